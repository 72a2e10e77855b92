#include "oracles.hpp"

#include "projlab/families.hpp"
#include "projlab/presets.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace projlab;
using std::numbers::pi;

namespace {

const cplx I(0.0, 1.0);

VectorXd vec(std::initializer_list<double> v)
{
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out[i++] = x;
    return out;
}

VectorXd scalar(double t) { return VectorXd::Constant(1, t); }

SL2CGenerator random_sl2(oracle::Sampler& s, double norm)
{
    Mat2c a;
    a << cplx(s.normal(), s.normal()), cplx(s.normal(), s.normal()), cplx(s.normal(), s.normal()), 0.0;
    a(1, 1) = -a(0, 0);
    return SL2CGenerator(Mat2c(a * (norm / a.norm())));
}

GL3Generator random_gl3(oracle::Sampler& s, double norm)
{
    Mat3 a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            a(i, j) = s.normal();
    return GL3Generator(Mat3(a * (norm / a.norm())));
}

VectorXd random_unit(oracle::Sampler& s, int n)
{
    VectorXd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = s.normal();
    return v.normalized();
}

} // namespace

// ---------------------------------------------------------------------------
// Mobius family

TEST(MobiusFamily, EvalExamples)
{
    oracle::Sampler s(1);
    for (int i = 0; i < 5; ++i)
        EXPECT_NEAR(mobius_family_eval(random_sl2(s, 1.0), 0.0, ExtendedComplex::finite(1, 2)), 1.0, 1e-15);
    EXPECT_NEAR(mobius_family_eval(presets::o2(), pi / 2, ExtendedComplex::finite(1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(mobius_family_eval(presets::translation(), 5.0, ExtendedComplex::finite(2, 3)), 7.0, 1e-14);
}

TEST(MobiusFamily, SingularWhenImageIsInfinity)
{
    // z -> -1/z at t = pi/2 for the generator [[0,1/2],[-1/2,0]]: 0 maps to inf.
    const SL2CGenerator a(0.0, 0.5, -0.5, 0.0);
    const double t = pi;
    // exp(At) = cos(t/2) Id + 2 sin(t/2) A = [[0,1],[-1,0]]
    try {
        (void)mobius_family_eval(a, t, ExtendedComplex::finite(0, 0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularPoint);
    }
}

TEST(MobiusFamily, DtIdentityExamples)
{
    EXPECT_NEAR(mobius_dt_identity(presets::o2(), cplx(1, 2)), -2.0, 1e-15);
    oracle::Sampler s(2);
    for (int i = 0; i < 20; ++i) {
        const double x = s.normal(), y = s.normal();
        EXPECT_NEAR(mobius_dt_identity(presets::elliptic_vertical(), cplx(x, y)), x * y, 1e-14);
        EXPECT_EQ(mobius_dt_identity(presets::translation(), cplx(x, y)), 1.0);
    }
    EXPECT_THROW((void)mobius_dt_identity(presets::o2(), ExtendedComplex::infinity()), Error);
}

TEST(MobiusFamily, DtIdentityMatchesFlowVelocity)
{
    oracle::Sampler s(3);
    for (int i = 0; i < 200; ++i) {
        const SL2CGenerator a = random_sl2(s, s.uniform(0.1, 3));
        const cplx z(s.normal() * 3, s.normal() * 3);
        const oracle::M2 m{{{a.a11(), a.a12()}, {a.a21(), a.a22()}}};
        EXPECT_NEAR(mobius_dt_identity(a, z), oracle::mobius_velocity(m, z).real(), 1e-12 * (1 + std::norm(z)));
    }
}

TEST(MobiusFamily, IdentityPartialsExamples)
{
    auto expect = [](cplx z, std::array<double, 6> v) {
        const auto p = mobius_identity_partials(z);
        for (int i = 0; i < 6; ++i)
            EXPECT_NEAR(p[i], v[static_cast<std::size_t>(i)], 1e-15) << "component " << i;
    };
    expect(0.0, {0, 0, 1, 0, 0, 0});
    expect(cplx(1, 1), {2, -2, 1, 0, 0, 2});
    expect(I, {0, -2, 1, 0, 1, 0});
}

TEST(MobiusFamily, IdentityPartialsAreBasisDerivatives)
{
    const auto& basis = mobius_full_basis();
    oracle::Sampler s(4);
    for (int i = 0; i < 50; ++i) {
        const cplx z(s.normal(), s.normal());
        const auto p = mobius_identity_partials(z);
        for (int j = 0; j < 6; ++j)
            EXPECT_NEAR(p[j], mobius_dt_identity(SL2CGenerator(basis[static_cast<std::size_t>(j)]), z), 1e-13);
    }
}

// ---------------------------------------------------------------------------
// Projective family

TEST(ProjectiveFamily, EvalExamples)
{
    oracle::Sampler s(5);
    EXPECT_EQ(projective_family_eval(random_gl3(s, 1.0), 0.0, HomPoint2(3, 4, 2)), HomPoint1(3, 2));
    const HomPoint1 r = projective_family_eval(presets::rotation(), pi / 2, HomPoint2(1, 0, 1));
    EXPECT_EQ(r, HomPoint1(0, 1));
    EXPECT_NEAR(*r.affine(), 0.0, 1e-14);
    EXPECT_NEAR(*projective_family_eval(presets::shear(), 2.0, HomPoint2(1, 3, 1)).affine(), -5.0, 1e-13);
}

TEST(ProjectiveFamily, DtIdentityExamples)
{
    oracle::Sampler s(6);
    for (int i = 0; i < 20; ++i) {
        const Vec2 p(s.normal(), s.normal());
        EXPECT_NEAR(projective_dt_identity(presets::rotation(), p), -p[1], 1e-15);
        EXPECT_NEAR(projective_dt_identity(presets::point_source_printed(), p), -1.0 - p[0] * p[0], 1e-14);
        EXPECT_EQ(projective_dt_identity(GL3Generator(), p), 0.0);
    }
}

TEST(ProjectiveFamily, IdentityPartialsAreBasisDerivatives)
{
    oracle::Sampler s(7);
    for (int i = 0; i < 50; ++i) {
        const Vec2 p(s.normal(), s.normal());
        const auto d = projective_identity_partials(p);
        for (int j = 0; j < 9; ++j) {
            Mat3 e = Mat3::Zero();
            e(j / 3, j % 3) = 1.0;
            EXPECT_NEAR(d[j], projective_dt_identity(GL3Generator(e), p), 1e-14);
        }
    }
}

// ---------------------------------------------------------------------------
// Numeric derivatives

TEST(FamilyDtNumeric, Examples)
{
    const VectorXd zero = scalar(0.0);
    EXPECT_NEAR(family_dt_numeric(MobiusOneParam{presets::o2()}, zero, vec({1, 2}), 1e-4)[0], -2.0, 1e-6);
    EXPECT_NEAR(family_dt_numeric(ProjectiveOneParam{presets::rotation()}, zero, vec({0.5, 0.25}), 1e-4)[0], -0.25, 1e-6);
    oracle::Sampler s(8);
    for (int i = 0; i < 20; ++i) {
        const VectorXd p = vec({s.normal(), s.normal()});
        EXPECT_NEAR(family_dt_numeric(MobiusOneParam{presets::translation()}, scalar(s.normal()), p, 1e-4)[0], 1.0, 1e-10);
    }
}

TEST(FamilyDtNumeric, AnalyticDerivativesAgree)
{
    // Generators are scaled to norm 0.1 so that the O(h^2 |A|^3 |z|^4) stencil
    // error stays below the tolerance out to |z| = 10.
    oracle::Sampler s(9);
    const VectorXd zero = scalar(0.0);
    for (int i = 0; i < 2000; ++i) {
        const SL2CGenerator a = random_sl2(s, s.uniform(0.0, 0.1));
        const double r = 10.0 * std::sqrt(s.uniform(0, 1)), th = s.uniform(0, 2 * pi);
        const VectorXd z = vec({r * std::cos(th), r * std::sin(th)});
        const double analytic = mobius_dt_identity(a, cplx(z[0], z[1]));
        const double numeric = family_dt_numeric(MobiusOneParam{a}, zero, z, 1e-4)[0];
        EXPECT_LT(std::abs(analytic - numeric), 1e-6 * (1 + std::abs(analytic)));

        const GL3Generator b = random_gl3(s, s.uniform(0.0, 0.1));
        const double pa = projective_dt_identity(b, Vec2(z[0], z[1]));
        const double pn = family_dt_numeric(ProjectiveOneParam{b}, zero, z, 1e-4)[0];
        EXPECT_LT(std::abs(pa - pn), 1e-6 * (1 + std::abs(pa)));
    }
}

TEST(ProjectionFamily, JacobianIdentityMatchesNumericForEveryFamily)
{
    oracle::Sampler s(10);
    const std::vector<FamilySpec> specs = {
        MobiusOneParam{random_sl2(s, 1.0)}, ProjectiveOneParam{random_gl3(s, 1.0)}, MobiusFull{}, ProjectiveFull{},
        RotationGrassmann{2, 1}, RotationGrassmann{3, 1}, RotationGrassmann{3, 2}, RotationGrassmann{4, 2},
        SphereClosestPoint{2, 1}, SphereClosestPoint{3, 2}, KleinClosestPoint{2, 1}, KleinClosestPoint{3, 1},
        KleinClosestPoint{4, 3},
    };
    for (const FamilySpec& spec : specs) {
        const ProjectionFamily f(spec);
        for (int i = 0; i < 20; ++i) {
            VectorXd p(f.space_dim());
            for (int d = 0; d < p.size(); ++d)
                p[d] = s.uniform(-0.5, 0.5);
            if (std::holds_alternative<SphereClosestPoint>(spec)) {
                p[p.size() - 1] = s.uniform(0.5, 1.0);
                p.normalize();
            }
            const Eigen::MatrixXd analytic = f.jacobian_identity(p);
            const Eigen::MatrixXd numeric = family_jacobian_numeric(f, VectorXd::Zero(f.param_dim()), p, 1e-5);
            ASSERT_EQ(analytic.rows(), f.target_dim());
            ASSERT_EQ(analytic.cols(), f.param_dim());
            EXPECT_LT((analytic - numeric).cwiseAbs().maxCoeff(), 1e-7) << f.kind();
        }
    }
}

// ---------------------------------------------------------------------------
// Group-action identity

TEST(ProjectionFamily, EvalFactorsThroughTheAction)
{
    oracle::Sampler s(11);
    const std::vector<FamilySpec> specs = {
        MobiusOneParam{random_sl2(s, 1.0)}, ProjectiveOneParam{random_gl3(s, 1.0)}, MobiusFull{}, ProjectiveFull{},
        RotationGrassmann{3, 1}, RotationGrassmann{4, 2}, SphereClosestPoint{2, 1}, SphereClosestPoint{3, 1},
        KleinClosestPoint{3, 2},
    };
    for (const FamilySpec& spec : specs) {
        const ProjectionFamily f(spec);
        int checked = 0;
        for (int i = 0; i < 100; ++i) {
            VectorXd lambda(f.param_dim());
            for (int d = 0; d < lambda.size(); ++d)
                lambda[d] = s.uniform(-0.4, 0.4);
            if (lambda.norm() >= pi / 2)
                continue;
            VectorXd p(f.space_dim());
            for (int d = 0; d < p.size(); ++d)
                p[d] = s.uniform(-0.5, 0.5);
            if (std::holds_alternative<SphereClosestPoint>(spec)) {
                p[p.size() - 1] = s.uniform(0.5, 1.0);
                p.normalize();
            }
            if (!f.in_domain(lambda, p))
                continue;
            const VectorXd moved = f.act(lambda, p);
            if (!f.in_domain(VectorXd::Zero(f.param_dim()), moved))
                continue;
            EXPECT_LT((f.eval(lambda, p) - f.eval(VectorXd::Zero(f.param_dim()), moved)).norm(), 1e-9) << f.kind();
            ++checked;
        }
        EXPECT_GT(checked, 50) << f.kind();
    }
}

TEST(ProjectionFamily, DimensionsAndKinds)
{
    EXPECT_EQ(ProjectionFamily(MobiusFull{}).param_dim(), 6);
    EXPECT_EQ(ProjectionFamily(ProjectiveFull{}).param_dim(), 9);
    EXPECT_EQ(ProjectionFamily(RotationGrassmann{4, 2}).param_dim(), 4);
    EXPECT_EQ(ProjectionFamily(SphereClosestPoint{3, 2}).space_dim(), 4);
    EXPECT_EQ(ProjectionFamily(KleinClosestPoint{3, 2}).target_dim(), 2);
    EXPECT_THROW(ProjectionFamily(RotationGrassmann{5, 1}), Error);
    EXPECT_THROW(ProjectionFamily(KleinClosestPoint{2, 2}), Error);
    EXPECT_EQ(family_kind(SphereClosestPoint{2, 1}), "sphere");
}

TEST(ProjectionFamily, InDomainIsComplementOfSingularSet)
{
    const ProjectionFamily f(ProjectiveOneParam{presets::rotation()});
    // The rotation by pi/2 sends (1, 0) onto the y-axis and (0, 1) to (-1, 0); no finite point hits inf_Y.
    EXPECT_TRUE(f.in_domain(scalar(pi / 2), vec({0.0, 1.0})));
    const ProjectionFamily z(ProjectiveOneParam{presets::z_shear()});
    // (x, y) -> (x, y)/(1 + xt): x = -1 at t = 1 goes to infinity.
    EXPECT_FALSE(z.in_domain(scalar(1.0), vec({-1.0, 0.3})));
    const ProjectionFamily k(KleinClosestPoint{2, 1});
    EXPECT_FALSE(k.in_domain(scalar(0.0), vec({0.9, 0.9})));
}

// ---------------------------------------------------------------------------
// Grassmann charts

TEST(GrassmannChart, Examples)
{
    const GrassmannChart c0 = grassmann_chart(3, 2, VectorXd::Zero(2));
    EXPECT_LT((c0.basis - Eigen::MatrixXd::Identity(3, 2)).norm(), 1e-15);
    EXPECT_LT((c0.rotation - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-15);

    const GrassmannChart c1 = grassmann_chart(2, 1, scalar(pi / 4));
    EXPECT_LT((c1.basis.col(0) - vec({std::cos(pi / 4), std::sin(pi / 4)})).norm(), 1e-14);
    Eigen::Matrix2d r;
    r << std::cos(pi / 4), -std::sin(pi / 4), std::sin(pi / 4), std::cos(pi / 4);
    EXPECT_LT((c1.rotation - r).norm(), 1e-14);

    const GrassmannChart c2 = grassmann_chart(3, 1, vec({0.0, pi / 6}));
    EXPECT_LT((c2.basis.col(0) - vec({std::cos(pi / 6), 0.0, std::sin(pi / 6)})).norm(), 1e-14);
}

TEST(GrassmannChart, ChartOverflow)
{
    try {
        (void)grassmann_chart(2, 1, scalar(pi / 2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ChartOverflow);
    }
    EXPECT_THROW((void)grassmann_chart(3, 1, scalar(0.1)), Error);
}

TEST(GrassmannChart, BasisIsOrthonormalAndProjectionIdempotent)
{
    oracle::Sampler s(12);
    for (int i = 0; i < 50; ++i) {
        const int n = 2 + i % 3, m = 1 + i % (n - 1);
        VectorXd theta = random_unit(s, (n - m) * m) * s.uniform(0, 1.5);
        const GrassmannChart c = grassmann_chart(n, m, theta);
        EXPECT_LT((c.basis.transpose() * c.basis - Eigen::MatrixXd::Identity(m, m)).norm(), 1e-12);
        EXPECT_LT((c.rotation.transpose() * c.rotation - Eigen::MatrixXd::Identity(n, n)).norm(), 1e-12);
        const VectorXd p = random_unit(s, n);
        EXPECT_LT((c.project(c.project(p)) - c.project(p)).norm(), 1e-12);
    }
}

// ---------------------------------------------------------------------------
// Curved-space projections

TEST(SphereClosestPoint, Examples)
{
    Eigen::MatrixXd v(3, 2);
    v << 1, 0, 0, 0, 0, 1;
    const VectorXd q = vec({1 / std::sqrt(2.0), 0.5, 0.5});
    EXPECT_LT((sphere_closest_point(vec({0.6, 0, 0.8}), v) - vec({0.6, 0, 0.8})).norm(), 1e-15);
    try {
        (void)sphere_closest_point(vec({0, 1, 0}), v);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EquatorSingularity);
    }
    const VectorXd expect = vec({std::sqrt(2.0 / 3.0), 0, 1 / std::sqrt(3.0)});
    const VectorXd got = sphere_closest_point(q, v);
    EXPECT_LT((got - expect).norm(), 1e-14);

    // argmin of the great-circle distance over 10^4 unit vectors of V
    double best = INFINITY;
    VectorXd arg;
    for (int k = 0; k < 10000; ++k) {
        const double a = 2 * pi * k / 10000;
        const VectorXd u = vec({std::cos(a), 0, std::sin(a)});
        const double d = std::acos(std::clamp(u.dot(q), -1.0, 1.0));
        if (d < best) {
            best = d;
            arg = u;
        }
    }
    EXPECT_LT((arg - got).norm(), 2 * pi / 10000);
}

TEST(SphereClosestPoint, OutputIsUnitInVAndIdempotent)
{
    oracle::Sampler s(13);
    for (int i = 0; i < 200; ++i) {
        const int n = 3 + i % 2;
        Eigen::MatrixXd v(n, 2);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < 2; ++c)
                v(r, c) = s.normal();
        const VectorXd q = random_unit(s, n);
        const VectorXd p = sphere_closest_point(q, v);
        EXPECT_NEAR(p.norm(), 1.0, 1e-12);
        const Eigen::MatrixXd b = v.householderQr().householderQ() * Eigen::MatrixXd::Identity(n, 2);
        EXPECT_LT((p - b * (b.transpose() * p)).norm(), 1e-12);
        EXPECT_LT((sphere_closest_point(p, v) - p).norm(), 1e-12);
    }
}

TEST(SphereClosestPoint, RejectsPointsOffTheSphere)
{
    EXPECT_THROW((void)sphere_closest_point(vec({1, 1, 0}), Eigen::MatrixXd::Identity(3, 2)), Error);
}

TEST(KleinClosestPoint, Examples)
{
    const Eigen::MatrixXd w = vec({1, 0});
    EXPECT_LT((klein_closest_point(vec({0.3, 0.4}), w) - vec({0.3, 0})).norm(), 1e-15);
    EXPECT_LT((klein_closest_point(vec({-0.2, 0}), w) - vec({-0.2, 0})).norm(), 1e-15);
    const VectorXd q = vec({0, 0.9});
    const VectorXd got = klein_closest_point(q, w);
    EXPECT_LT(got.norm(), 1e-15);
    double best = INFINITY, arg = 0;
    for (int k = 0; k < 10000; ++k) {
        const double x = -0.9999 + 1.9998 * k / 9999;
        const double d = oracle::klein_distance(std::vector<double>{x, 0}, std::vector<double>{0, 0.9});
        if (d < best) {
            best = d;
            arg = x;
        }
    }
    EXPECT_LT(std::abs(arg - got[0]), 2.0 / 9999);
    try {
        (void)klein_closest_point(vec({0.8, 0.6}), w);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OutsideBall);
    }
}

TEST(KleinClosestPoint, IdempotentAndInsideTheBall)
{
    oracle::Sampler s(14);
    for (int i = 0; i < 200; ++i) {
        const int n = 2 + i % 3;
        const Eigen::MatrixXd w = random_unit(s, n);
        const VectorXd q = random_unit(s, n) * s.uniform(0, 0.999);
        const VectorXd p = klein_closest_point(q, w);
        EXPECT_LT(p.norm(), 1.0);
        EXPECT_LT((klein_closest_point(p, w) - p).norm(), 1e-14);
    }
}

TEST(Projectivize, ConjugatesSphereProjectionToOrthogonalProjection)
{
    oracle::Sampler s(15);
    for (int i = 0; i < 500; ++i) {
        const int n = 2 + i % 2; // S^2 in R^3, S^3 in R^4
        const int m = 1 + i % (n - 1);
        VectorXd theta = random_unit(s, (n - m) * m) * s.uniform(0, 1.2);
        const GrassmannChart chart = grassmann_chart(n, m, theta);
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n + 1, m + 1);
        v.topLeftCorner(n, m) = chart.basis;
        v(n, m) = 1.0;
        VectorXd q = random_unit(s, n + 1);
        if (std::abs(q[n]) < 0.1)
            continue;
        const VectorXd lhs = projectivize(sphere_closest_point(q, v));
        const VectorXd rhs = chart.project(projectivize(q));
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9 * (1 + rhs.norm()));
    }
    EXPECT_THROW((void)projectivize(vec({1, 0, 0})), Error);
}

// ---------------------------------------------------------------------------
// Conjugation

TEST(ConjugateFamily, Examples)
{
    const FamilySpec rot = ProjectiveOneParam{presets::rotation()};
    const auto same = std::get<ProjectiveOneParam>(conjugate_family(rot, ProjectiveMap::identity()));
    EXPECT_LT((same.generator.matrix() - presets::rotation().matrix()).norm(), 1e-15);

    const auto printed = std::get<ProjectiveOneParam>(conjugate_family(rot, presets::point_source_printed_conjugator()));
    EXPECT_LT((printed.generator.matrix() - presets::point_source_printed().matrix()).norm(), 1e-14);

    const auto ell = std::get<MobiusOneParam>(conjugate_family(MobiusOneParam{presets::o2()}, presets::elliptic_conjugator()));
    EXPECT_LT((ell.generator.matrix() - presets::elliptic_vertical().matrix()).norm(), 1e-14);

    const auto corrected = std::get<ProjectiveOneParam>(conjugate_family(rot, presets::point_source_conjugator()));
    EXPECT_LT((corrected.generator.matrix() - presets::point_source_corrected().matrix()).norm(), 1e-14);
}

TEST(ConjugateFamily, IntertwinesTheFlows)
{
    // exp(M A M^-1 t) M = M exp(A t)
    oracle::Sampler s(16);
    for (int i = 0; i < 50; ++i) {
        const GL3Generator a = random_gl3(s, 1.0);
        Mat3 mm;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                mm(r, c) = s.normal();
        const ProjectiveMap m(mm);
        const auto b = std::get<ProjectiveOneParam>(conjugate_family(ProjectiveOneParam{a}, m)).generator;
        const double t = s.uniform(-1, 1);
        EXPECT_LT(((exp_gl3(b, t) * m).matrix() - (m * exp_gl3(a, t)).matrix()).norm(), 1e-9 * mm.norm());
    }
}

TEST(ConjugateFamily, FullFamiliesUnchangedAndKindMismatchRejected)
{
    EXPECT_TRUE(std::holds_alternative<MobiusFull>(conjugate_family(MobiusFull{}, presets::elliptic_conjugator())));
    EXPECT_THROW((void)conjugate_family(ProjectiveOneParam{presets::rotation()}, presets::elliptic_conjugator()), Error);
    EXPECT_THROW((void)conjugate_family(MobiusOneParam{presets::o2()}, ProjectiveMap::identity()), Error);
}
