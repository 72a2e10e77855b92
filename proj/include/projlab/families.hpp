#pragma once

// Projection families Pi(lambda, p) = pi(g_lambda(p)) induced by group
// actions, together with their analytic derivatives at the identity.

#include "projlab/algebra.hpp"

#include <array>
#include <string>
#include <variant>
#include <vector>

namespace projlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Family specifications

struct MobiusOneParam {
    SL2CGenerator generator;
};
struct ProjectiveOneParam {
    GL3Generator generator;
};
/// All of SL(2,C) in exponential coordinates for the basis of mobius_full_basis().
struct MobiusFull {};
/// All of GL(3,R) in exponential coordinates for the row-major basis e_ij.
struct ProjectiveFull {};
/// Orthogonal projections of R^n onto m-planes, charted by basic rotations.
struct RotationGrassmann {
    int n = 2;
    int m = 1;
};
/// Closest-point projections of S^n (in R^{n+1}, base point e_{n+1}) onto
/// totally geodesic m-spheres through the base point.
struct SphereClosestPoint {
    int n = 2;
    int m = 1;
};
/// Closest-point projections of the Klein ball model of H^n onto totally
/// geodesic m-subspaces through the origin.
struct KleinClosestPoint {
    int n = 2;
    int m = 1;
};

using FamilySpec = std::variant<MobiusOneParam, ProjectiveOneParam, MobiusFull, ProjectiveFull, RotationGrassmann,
                                SphereClosestPoint, KleinClosestPoint>;

inline std::string family_kind(const FamilySpec& spec)
{
    struct {
        std::string operator()(const MobiusOneParam&) const { return "mobius"; }
        std::string operator()(const ProjectiveOneParam&) const { return "projective"; }
        std::string operator()(const MobiusFull&) const { return "mobius-full"; }
        std::string operator()(const ProjectiveFull&) const { return "projective-full"; }
        std::string operator()(const RotationGrassmann&) const { return "grassmann"; }
        std::string operator()(const SphereClosestPoint&) const { return "sphere"; }
        std::string operator()(const KleinClosestPoint&) const { return "klein"; }
    } visitor;
    return std::visit(visitor, spec);
}

/// Basis E1..E6 of sl(2,C): diag(1,-1), diag(i,-i), E12, iE12, E21, iE21.
inline const std::array<Mat2c, 6>& mobius_full_basis()
{
    static const std::array<Mat2c, 6> basis = [] {
        const cplx one(1.0, 0.0), i(0.0, 1.0), zero(0.0, 0.0);
        std::array<Mat2c, 6> b;
        b[0] << one, zero, zero, -one;
        b[1] << i, zero, zero, -i;
        b[2] << zero, one, zero, zero;
        b[3] << zero, i, zero, zero;
        b[4] << zero, zero, one, zero;
        b[5] << zero, zero, i, zero;
        return b;
    }();
    return basis;
}

// ---------------------------------------------------------------------------
// One-parameter Mobius family: Pi(t, z) = Re(exp(At) z)

inline double mobius_family_eval(const SL2CGenerator& a, double t, const ExtendedComplex& z)
{
    const ExtendedComplex image = mobius_apply(exp_sl2(a, t), z);
    if (image.is_infinity())
        throw Error(ErrorCode::SingularPoint, "gamma_t(z) is the point at infinity");
    return image.re();
}

/// d/dt at t = 0 of Re(gamma_t(z)) = Re(a12 + 2 a11 z - a21 z^2).
inline double mobius_dt_identity(const SL2CGenerator& a, cplx z)
{
    return std::real(a.a12() + 2.0 * a.a11() * z - a.a21() * z * z);
}

inline double mobius_dt_identity(const SL2CGenerator& a, const ExtendedComplex& z)
{
    if (z.is_infinity())
        throw Error(ErrorCode::SingularPoint, "derivative requested at infinity");
    return mobius_dt_identity(a, z.value());
}

/// Identity partials along E1..E6: (2x, -2y, 1, 0, -Re z^2, Im z^2).
inline Eigen::Matrix<double, 6, 1> mobius_identity_partials(cplx z)
{
    const cplx z2 = z * z;
    Eigen::Matrix<double, 6, 1> out;
    out << 2.0 * z.real(), -2.0 * z.imag(), 1.0, 0.0, -z2.real(), z2.imag();
    return out;
}

// ---------------------------------------------------------------------------
// One-parameter projective family: Pi(t, p) = pi(exp(At) p)

inline HomPoint1 projective_family_eval(const GL3Generator& a, double t, const HomPoint2& p)
{
    return pi_standard(proj_apply(exp_gl3(a, t), p));
}

/// d/dt at t = 0 of the affine value: a11 x + a12 y + a13 - x (a31 x + a32 y + a33).
inline double projective_dt_identity(const GL3Generator& a, const Vec2& p)
{
    const double x = p[0], y = p[1];
    return a.a(1, 1) * x + a.a(1, 2) * y + a.a(1, 3) - x * (a.a(3, 1) * x + a.a(3, 2) * y + a.a(3, 3));
}

/// Identity partials along e_11, e_12, ..., e_33 (row-major).
inline Eigen::Matrix<double, 9, 1> projective_identity_partials(const Vec2& p)
{
    const double x = p[0], y = p[1];
    Eigen::Matrix<double, 9, 1> out;
    out << x, y, 1.0, 0.0, 0.0, 0.0, -x * x, -x * y, -x;
    return out;
}

// ---------------------------------------------------------------------------
// Grassmannian charts

inline void check_grassmann_dims(int n, int m)
{
    if (!(1 <= m && m < n && n <= 4))
        throw Error(ErrorCode::InvalidArgument, "dimensions must satisfy 1 <= m < n <= 4");
}

/// Generator pairs (i, j), i < m <= j (zero based), in lexicographic order.
inline std::vector<std::pair<int, int>> grassmann_pairs(int n, int m)
{
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < m; ++i)
        for (int j = m; j < n; ++j)
            pairs.emplace_back(i, j);
    return pairs;
}

struct GrassmannChart {
    /// Orthonormal basis of the m-plane, as columns (n x m).
    MatrixXd basis;
    /// Rotation R with R V0 = the plane; R^T identifies the plane with R^m.
    MatrixXd rotation;

    /// Coordinates in R^m of the orthogonal projection of p onto the plane.
    VectorXd coordinates(const VectorXd& p) const { return (rotation.transpose() * p).head(basis.cols()); }
    /// Orthogonal projection of p onto the plane, in R^n.
    VectorXd project(const VectorXd& p) const { return basis * (basis.transpose() * p); }
};

/// Chart of G(n, m) around V0 = span(e1..em). theta_ij rotates e_i towards
/// e_j inside span(e_i, e_j), so for n = 2 the line has angle theta.
inline GrassmannChart grassmann_chart(int n, int m, const VectorXd& theta)
{
    check_grassmann_dims(n, m);
    const auto pairs = grassmann_pairs(n, m);
    if (theta.size() != static_cast<Eigen::Index>(pairs.size()))
        throw Error(ErrorCode::DimensionMismatch, "theta must have (n-m)m entries");
    if (!(theta.norm() < std::numbers::pi / 2))
        throw Error(ErrorCode::ChartOverflow, "theta outside the chart radius pi/2");
    MatrixXd gen = MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[k];
        gen(j, i) += theta[static_cast<Eigen::Index>(k)];
        gen(i, j) -= theta[static_cast<Eigen::Index>(k)];
    }
    GrassmannChart chart;
    chart.rotation = expm(gen);
    chart.basis = chart.rotation.leftCols(m);
    return chart;
}

// ---------------------------------------------------------------------------
// Curved-space closest-point projections

/// f(x_1..x_{n+1}) = (x_1/x_{n+1}, ..., x_n/x_{n+1}).
inline VectorXd projectivize(const VectorXd& q)
{
    const Eigen::Index n = q.size() - 1;
    if (std::abs(q[n]) < kPoleTol)
        throw Error(ErrorCode::EquatorSingularity, "projectivization undefined on the equator");
    return q.head(n) / q[n];
}

/// Orthonormal basis for the column span of v.
inline MatrixXd orthonormal_basis(const MatrixXd& v)
{
    Eigen::HouseholderQR<MatrixXd> qr(v);
    return qr.householderQ() * MatrixXd::Identity(v.rows(), v.cols());
}

/// Point of S^n n V closest to q: orthogonal projection to V rescaled to norm 1.
inline VectorXd sphere_closest_point(const VectorXd& q, const MatrixXd& v_basis)
{
    if (v_basis.rows() != q.size())
        throw Error(ErrorCode::DimensionMismatch, "subspace basis and point disagree in dimension");
    if (std::abs(q.norm() - 1.0) >= 1e-9)
        throw Error(ErrorCode::InvalidArgument, "point is not on the unit sphere");
    const MatrixXd b = orthonormal_basis(v_basis);
    const VectorXd proj = b * (b.transpose() * q);
    const double len = proj.norm();
    if (len < 1e-12)
        throw Error(ErrorCode::EquatorSingularity, "point is orthogonal to the subspace");
    return proj / len;
}

/// Closest point of W n H^n to q in the Klein model: the Euclidean orthogonal projection.
inline VectorXd klein_closest_point(const VectorXd& q, const MatrixXd& w_basis)
{
    if (w_basis.rows() != q.size())
        throw Error(ErrorCode::DimensionMismatch, "subspace basis and point disagree in dimension");
    if (!(q.norm() < 1.0))
        throw Error(ErrorCode::OutsideBall, "point is not inside the unit ball");
    const MatrixXd b = orthonormal_basis(w_basis);
    return b * (b.transpose() * q);
}

// ---------------------------------------------------------------------------
// Uniform contract

/// A projection family with points given in chart coordinates: (x, y) for the
/// planar families, R^n for Grassmann/Klein, R^{n+1} (on the sphere) for the
/// spherical family. Values are real vectors of the target dimension; the
/// projective target RP^1 is represented by its affine chart.
class ProjectionFamily {
public:
    explicit ProjectionFamily(FamilySpec spec) : spec_(std::move(spec))
    {
        if (const auto* g = std::get_if<RotationGrassmann>(&spec_))
            check_grassmann_dims(g->n, g->m);
        else if (const auto* s = std::get_if<SphereClosestPoint>(&spec_))
            check_grassmann_dims(s->n, s->m);
        else if (const auto* k = std::get_if<KleinClosestPoint>(&spec_))
            check_grassmann_dims(k->n, k->m);
    }

    const FamilySpec& spec() const noexcept { return spec_; }
    std::string kind() const { return family_kind(spec_); }

    int param_dim() const
    {
        switch (spec_.index()) {
        case 0:
        case 1: return 1;
        case 2: return 6;
        case 3: return 9;
        default: {
            const auto [n, m] = grass_dims();
            return (n - m) * m;
        }
        }
    }

    int target_dim() const { return spec_.index() <= 3 ? 1 : grass_dims().second; }

    /// Dimension of the vectors used as points.
    int space_dim() const
    {
        if (spec_.index() <= 3)
            return 2;
        const int n = grass_dims().first;
        return std::holds_alternative<SphereClosestPoint>(spec_) ? n + 1 : n;
    }

    /// Maps an arbitrary nearby vector onto the space (sphere: radial
    /// normalization; otherwise unchanged).
    VectorXd to_space(const VectorXd& p) const
    {
        if (std::holds_alternative<SphereClosestPoint>(spec_))
            return p / p.norm();
        return p;
    }

    bool in_domain(const VectorXd& lambda, const VectorXd& p) const
    {
        try {
            (void)eval(lambda, p);
            return true;
        } catch (const Error&) {
            return false;
        }
    }

    VectorXd eval(const VectorXd& lambda, const VectorXd& p) const
    {
        check_sizes(lambda, p);
        VectorXd out(target_dim());
        switch (spec_.index()) {
        case 0: {
            const auto& a = std::get<MobiusOneParam>(spec_).generator;
            out[0] = mobius_family_eval(a, lambda[0], ExtendedComplex::finite(p[0], p[1]));
            return out;
        }
        case 2: {
            const ExtendedComplex image = mobius_apply(mobius_element(lambda), ExtendedComplex::finite(p[0], p[1]));
            if (image.is_infinity())
                throw Error(ErrorCode::SingularPoint, "g(z) is the point at infinity");
            out[0] = image.re();
            return out;
        }
        case 1:
        case 3: {
            const HomPoint1 img = pi_standard(proj_apply(projective_element(lambda), HomPoint2::affine(p[0], p[1])));
            const auto value = img.affine();
            if (!value)
                throw Error(ErrorCode::SingularPoint, "projection is inf_X, outside the affine chart");
            out[0] = *value;
            return out;
        }
        case 4: return grassmann_chart(grass_dims().first, grass_dims().second, lambda).coordinates(p);
        case 5: {
            const auto& s = std::get<SphereClosestPoint>(spec_);
            check_on_sphere(p);
            const GrassmannChart chart = grassmann_chart(s.n, s.m, lambda);
            MatrixXd v = MatrixXd::Zero(s.n + 1, s.m + 1);
            v.topLeftCorner(s.n, s.m) = chart.basis;
            v(s.n, s.m) = 1.0;
            const VectorXd closest = sphere_closest_point(p, v);
            return chart.coordinates(projectivize(closest));
        }
        case 6: {
            const auto& k = std::get<KleinClosestPoint>(spec_);
            const GrassmannChart chart = grassmann_chart(k.n, k.m, lambda);
            return chart.coordinates(klein_closest_point(p, chart.basis));
        }
        }
        throw Error(ErrorCode::InvalidArgument, "unknown family");
    }

    /// The group action g_lambda(p) in chart coordinates, so that
    /// eval(lambda, p) == eval(0, act(lambda, p)).
    VectorXd act(const VectorXd& lambda, const VectorXd& p) const
    {
        check_sizes(lambda, p);
        switch (spec_.index()) {
        case 0:
        case 2: {
            const MobiusMap g = spec_.index() == 0 ? exp_sl2(std::get<MobiusOneParam>(spec_).generator, lambda[0])
                                                   : mobius_element(lambda);
            const ExtendedComplex image = mobius_apply(g, ExtendedComplex::finite(p[0], p[1]));
            if (image.is_infinity())
                throw Error(ErrorCode::SingularPoint, "image is the point at infinity");
            return Vec2(image.re(), image.im());
        }
        case 1:
        case 3: {
            const auto img = proj_apply(projective_element(lambda), HomPoint2::affine(p[0], p[1])).affine();
            if (!img)
                throw Error(ErrorCode::SingularPoint, "image is at infinity");
            return *img;
        }
        case 4:
        case 6: return grassmann_chart(grass_dims().first, grass_dims().second, lambda).rotation.transpose() * p;
        case 5: {
            const auto& s = std::get<SphereClosestPoint>(spec_);
            MatrixXd rot = MatrixXd::Identity(s.n + 1, s.n + 1);
            rot.topLeftCorner(s.n, s.n) = grassmann_chart(s.n, s.m, lambda).rotation.transpose();
            return rot * p;
        }
        }
        throw Error(ErrorCode::InvalidArgument, "unknown family");
    }

    /// Analytic d/dlambda Pi(lambda, p) at lambda = 0 (target_dim x param_dim).
    MatrixXd jacobian_identity(const VectorXd& p) const
    {
        check_sizes(VectorXd::Zero(param_dim()), p);
        MatrixXd jac(target_dim(), param_dim());
        switch (spec_.index()) {
        case 0: jac(0, 0) = mobius_dt_identity(std::get<MobiusOneParam>(spec_).generator, cplx(p[0], p[1])); break;
        case 1: jac(0, 0) = projective_dt_identity(std::get<ProjectiveOneParam>(spec_).generator, Vec2(p[0], p[1])); break;
        case 2: jac.row(0) = mobius_identity_partials(cplx(p[0], p[1])).transpose(); break;
        case 3: jac.row(0) = projective_identity_partials(Vec2(p[0], p[1])).transpose(); break;
        case 4:
        case 6: jac = grassmann_jacobian(p); break;
        case 5:
            check_on_sphere(p);
            jac = grassmann_jacobian(projectivize(p));
            break;
        }
        return jac;
    }

    /// Gradient form for one-dimensional targets.
    VectorXd dt_identity(const VectorXd& p) const
    {
        if (target_dim() != 1)
            throw Error(ErrorCode::DimensionMismatch, "dt_identity needs a one-dimensional target");
        return jacobian_identity(p).row(0).transpose();
    }

private:
    std::pair<int, int> grass_dims() const
    {
        if (const auto* g = std::get_if<RotationGrassmann>(&spec_))
            return {g->n, g->m};
        if (const auto* s = std::get_if<SphereClosestPoint>(&spec_))
            return {s->n, s->m};
        const auto& k = std::get<KleinClosestPoint>(spec_);
        return {k.n, k.m};
    }

    void check_sizes(const VectorXd& lambda, const VectorXd& p) const
    {
        if (lambda.size() != param_dim() || p.size() != space_dim())
            throw Error(ErrorCode::DimensionMismatch, "parameter or point has the wrong dimension for " + kind());
    }

    static void check_on_sphere(const VectorXd& q)
    {
        if (std::abs(q.norm() - 1.0) >= 1e-9)
            throw Error(ErrorCode::InvalidArgument, "point is not on the unit sphere");
    }

    static MobiusMap mobius_element(const VectorXd& lambda)
    {
        Mat2c a = Mat2c::Zero();
        const auto& basis = mobius_full_basis();
        for (int j = 0; j < 6; ++j)
            a += lambda[j] * basis[static_cast<std::size_t>(j)];
        return exp_sl2(SL2CGenerator(a), 1.0);
    }

    ProjectiveMap projective_element(const VectorXd& lambda) const
    {
        if (spec_.index() == 1)
            return exp_gl3(std::get<ProjectiveOneParam>(spec_).generator, lambda[0]);
        Mat3 a;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                a(i, j) = lambda[3 * i + j];
        return exp_gl3(GL3Generator(a), 1.0);
    }

    /// d/dtheta_ij of the first m coordinates of R(theta)^T p at theta = 0
    /// is p_j in row i.
    MatrixXd grassmann_jacobian(const VectorXd& p) const
    {
        const auto [n, m] = grass_dims();
        const auto pairs = grassmann_pairs(n, m);
        MatrixXd jac = MatrixXd::Zero(m, static_cast<Eigen::Index>(pairs.size()));
        for (std::size_t k = 0; k < pairs.size(); ++k)
            jac(pairs[k].first, static_cast<Eigen::Index>(k)) = p[pairs[k].second];
        return jac;
    }

    FamilySpec spec_;
};

// ---------------------------------------------------------------------------
// Numerical derivatives and conjugation

/// Central-difference Jacobian in lambda (target_dim x param_dim).
inline MatrixXd family_jacobian_numeric(const ProjectionFamily& family, const VectorXd& lambda, const VectorXd& p,
                                        double h)
{
    MatrixXd jac(family.target_dim(), family.param_dim());
    for (int j = 0; j < family.param_dim(); ++j) {
        VectorXd plus = lambda, minus = lambda;
        plus[j] += h;
        minus[j] -= h;
        jac.col(j) = (family.eval(plus, p) - family.eval(minus, p)) / (2.0 * h);
    }
    return jac;
}

/// Central-difference derivative flattened row-major (the gradient when m = 1).
inline VectorXd family_dt_numeric(const FamilySpec& spec, const VectorXd& lambda, const VectorXd& p, double h)
{
    const MatrixXd jac = family_jacobian_numeric(ProjectionFamily(spec), lambda, p, h);
    VectorXd flat(jac.size());
    for (Eigen::Index i = 0; i < jac.rows(); ++i)
        for (Eigen::Index j = 0; j < jac.cols(); ++j)
            flat[i * jac.cols() + j] = jac(i, j);
    return flat;
}

/// Generator replaced by M A M^{-1}. The full-group families are invariant
/// under conjugation (up to a linear change of exponential coordinates) and
/// are returned unchanged.
inline FamilySpec conjugate_family(const FamilySpec& spec, const MobiusMap& m)
{
    if (const auto* f = std::get_if<MobiusOneParam>(&spec)) {
        Mat2c b = m.matrix() * f->generator.matrix() * m.inverse().matrix();
        const cplx half_trace = b.trace() / 2.0;
        b(0, 0) -= half_trace;
        b(1, 1) -= half_trace;
        return MobiusOneParam{SL2CGenerator(b)};
    }
    if (std::holds_alternative<MobiusFull>(spec))
        return spec;
    throw Error(ErrorCode::InvalidArgument, "a Mobius map can only conjugate a Mobius family");
}

inline FamilySpec conjugate_family(const FamilySpec& spec, const ProjectiveMap& m)
{
    if (const auto* f = std::get_if<ProjectiveOneParam>(&spec))
        return ProjectiveOneParam{GL3Generator(Mat3(m.matrix() * f->generator.matrix() * m.inverse().matrix()))};
    if (std::holds_alternative<ProjectiveFull>(spec))
        return spec;
    throw Error(ErrorCode::InvalidArgument, "a projective map can only conjugate a projective family");
}

} // namespace projlab
