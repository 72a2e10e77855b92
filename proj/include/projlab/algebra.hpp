#pragma once

// Points of the Riemann sphere and the real projective plane/line, the
// matrix groups acting on them, and exponentials of their Lie algebras.

#include "projlab/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>

namespace projlab {

using cplx = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;
using Vec2c = Eigen::Vector2cd;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Chordal tolerance for every comparison that may involve a point near a pole.
inline constexpr double kChordalTol = 1e-9;
/// Affine coordinates are not formed below this (normalized) denominator.
inline constexpr double kPoleTol = 1e-12;

// ---------------------------------------------------------------------------
// ExtendedComplex

class ExtendedComplex {
public:
    static ExtendedComplex finite(cplx z)
    {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw Error(ErrorCode::InvalidArgument, "finite point with non-finite coordinates");
        return ExtendedComplex(z, false);
    }
    static ExtendedComplex finite(double re, double im) { return finite(cplx(re, im)); }
    static ExtendedComplex infinity() { return ExtendedComplex(cplx(0.0, 0.0), true); }

    /// The point (num : den) of CP^1. The pair is normalized first, so the
    /// pole test is scale free.
    static ExtendedComplex from_homogeneous(cplx num, cplx den)
    {
        const double n = std::hypot(std::abs(num), std::abs(den));
        if (!(n > 0.0) || !std::isfinite(n))
            throw Error(ErrorCode::InvalidArgument, "homogeneous pair is zero or non-finite");
        num /= n;
        den /= n;
        if (std::abs(den) < kPoleTol)
            return infinity();
        return finite(num / den);
    }

    bool is_infinity() const noexcept { return infinite_; }
    bool is_finite() const noexcept { return !infinite_; }

    cplx value() const
    {
        if (infinite_)
            throw Error(ErrorCode::SingularPoint, "affine value of the point at infinity");
        return z_;
    }
    double re() const { return value().real(); }
    double im() const { return value().imag(); }

    /// Unit-norm homogeneous representative: (z : 1) or (1 : 0).
    Vec2c homogeneous() const
    {
        if (infinite_)
            return Vec2c(cplx(1.0, 0.0), cplx(0.0, 0.0));
        Vec2c v(z_, cplx(1.0, 0.0));
        return v / v.norm();
    }

    friend bool operator==(const ExtendedComplex& a, const ExtendedComplex& b)
    {
        if (a.infinite_ || b.infinite_)
            return a.infinite_ == b.infinite_;
        return a.z_ == b.z_;
    }

private:
    ExtendedComplex(cplx z, bool inf) : z_(z), infinite_(inf) {}

    cplx z_;
    bool infinite_;
};

// ---------------------------------------------------------------------------
// Homogeneous points

namespace detail {

template <int N>
Eigen::Matrix<double, N, 1> canonical_homogeneous(Eigen::Matrix<double, N, 1> v)
{
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw Error(ErrorCode::InvalidArgument, "homogeneous coordinates are zero or non-finite");
    v /= n;
    for (int i = 0; i < N; ++i) {
        if (std::abs(v[i]) > 1e-14) {
            if (v[i] < 0.0)
                v = -v;
            break;
        }
    }
    return v;
}

} // namespace detail

/// Point of RP^2. Stored as the unit representative whose first nonzero
/// coordinate is positive.
class HomPoint2 {
public:
    HomPoint2(double x, double y, double z) : v_(detail::canonical_homogeneous<3>(Vec3(x, y, z))) {}
    explicit HomPoint2(const Vec3& v) : v_(detail::canonical_homogeneous<3>(v)) {}

    static HomPoint2 affine(double x, double y) { return HomPoint2(x, y, 1.0); }
    static HomPoint2 infinity_x() { return HomPoint2(1.0, 0.0, 0.0); }
    static HomPoint2 infinity_y() { return HomPoint2(0.0, 1.0, 0.0); }

    const Vec3& coords() const noexcept { return v_; }
    double x() const noexcept { return v_[0]; }
    double y() const noexcept { return v_[1]; }
    double z() const noexcept { return v_[2]; }

    bool is_infinite() const noexcept { return std::abs(v_[2]) < kPoleTol; }

    std::optional<Vec2> affine() const
    {
        if (is_infinite())
            return std::nullopt;
        return Vec2(v_[0] / v_[2], v_[1] / v_[2]);
    }

private:
    Vec3 v_;
};

/// Point of RP^1 = R u {inf_X}, same canonicalization as HomPoint2.
class HomPoint1 {
public:
    HomPoint1(double x, double z) : v_(detail::canonical_homogeneous<2>(Vec2(x, z))) {}

    const Vec2& coords() const noexcept { return v_; }
    double x() const noexcept { return v_[0]; }
    double z() const noexcept { return v_[1]; }
    bool is_infinite() const noexcept { return std::abs(v_[1]) < kPoleTol; }

    std::optional<double> affine() const
    {
        if (is_infinite())
            return std::nullopt;
        return v_[0] / v_[1];
    }

private:
    Vec2 v_;
};

// ---------------------------------------------------------------------------
// Metrics

/// Chord length on the unit Riemann sphere (0 vs inf is 2).
inline double chordal_dist(const ExtendedComplex& p, const ExtendedComplex& q)
{
    if (p.is_finite() && q.is_finite()) {
        const cplx v = p.value(), w = q.value();
        return 2.0 * std::abs(v - w) / std::sqrt((1.0 + std::norm(v)) * (1.0 + std::norm(w)));
    }
    const Vec2c u = p.homogeneous(), v = q.homogeneous();
    return 2.0 * std::abs(u[0] * v[1] - u[1] * v[0]);
}

/// Sine of the angle between unit representatives.
inline double chordal_dist(const HomPoint2& p, const HomPoint2& q)
{
    return std::min(1.0, p.coords().cross(q.coords()).norm());
}

inline double chordal_dist(const HomPoint1& p, const HomPoint1& q)
{
    const Vec2& a = p.coords();
    const Vec2& b = q.coords();
    return std::min(1.0, std::abs(a[0] * b[1] - a[1] * b[0]));
}

inline bool approx_equal(const ExtendedComplex& p, const ExtendedComplex& q, double tol = kChordalTol)
{
    return chordal_dist(p, q) < tol;
}
inline bool approx_equal(const HomPoint2& p, const HomPoint2& q, double tol = kChordalTol)
{
    return chordal_dist(p, q) < tol;
}
inline bool approx_equal(const HomPoint1& p, const HomPoint1& q, double tol = kChordalTol)
{
    return chordal_dist(p, q) < tol;
}

inline bool operator==(const HomPoint2& p, const HomPoint2& q) { return approx_equal(p, q); }
inline bool operator==(const HomPoint1& p, const HomPoint1& q) { return approx_equal(p, q); }

// ---------------------------------------------------------------------------
// Group elements

/// Element of SL(2,C) acting on the Riemann sphere. The matrix is rescaled by
/// the principal square root of its determinant on construction; the residual
/// sign ambiguity (M ~ -M) does not change the action.
class MobiusMap {
public:
    MobiusMap() : m_(Mat2c::Identity()) {}
    MobiusMap(cplx a, cplx b, cplx c, cplx d)
    {
        m_ << a, b, c, d;
        normalize();
    }
    explicit MobiusMap(const Mat2c& m) : m_(m) { normalize(); }

    static MobiusMap identity() { return MobiusMap(); }

    const Mat2c& matrix() const noexcept { return m_; }
    cplx a() const { return m_(0, 0); }
    cplx b() const { return m_(0, 1); }
    cplx c() const { return m_(1, 0); }
    cplx d() const { return m_(1, 1); }
    cplx det() const { return m_.determinant(); }

    MobiusMap operator*(const MobiusMap& o) const { return MobiusMap(Mat2c(m_ * o.m_)); }

    MobiusMap inverse() const
    {
        Mat2c inv;
        inv << d(), -b(), -c(), a();
        return MobiusMap(inv);
    }

private:
    void normalize()
    {
        const cplx det = m_.determinant();
        const double scale = m_.cwiseAbs2().sum();
        if (!std::isfinite(scale) || std::abs(det) <= 1e-14 * scale)
            throw Error(ErrorCode::InvalidArgument, "Mobius matrix is singular");
        m_ /= std::sqrt(det);
    }

    Mat2c m_;
};

inline ExtendedComplex mobius_apply(const MobiusMap& g, const ExtendedComplex& p)
{
    const Vec2c w = g.matrix() * p.homogeneous();
    return ExtendedComplex::from_homogeneous(w[0], w[1]);
}

/// Invertible 3x3 real matrix acting on RP^2.
class ProjectiveMap {
public:
    ProjectiveMap() : m_(Mat3::Identity()) {}
    explicit ProjectiveMap(const Mat3& m) : m_(m)
    {
        const double det = m_.determinant();
        if (!std::isfinite(det) || std::abs(det) <= 1e-12)
            throw Error(ErrorCode::InvalidArgument, "projective matrix is not invertible");
    }

    static ProjectiveMap identity() { return ProjectiveMap(); }

    const Mat3& matrix() const noexcept { return m_; }
    ProjectiveMap operator*(const ProjectiveMap& o) const { return ProjectiveMap(Mat3(m_ * o.m_)); }
    ProjectiveMap inverse() const { return ProjectiveMap(Mat3(m_.inverse())); }

private:
    Mat3 m_;
};

inline HomPoint2 proj_apply(const ProjectiveMap& g, const HomPoint2& p) { return HomPoint2(Vec3(g.matrix() * p.coords())); }

/// The standard projection (x:y:z) -> (x:z) from the source inf_Y.
inline HomPoint1 pi_standard(const HomPoint2& p)
{
    if (std::hypot(p.x(), p.z()) < kPoleTol)
        throw Error(ErrorCode::SingularPoint, "pi is undefined at the source inf_Y");
    return HomPoint1(p.x(), p.z());
}

// ---------------------------------------------------------------------------
// Lie algebra data

/// Traceless 2x2 complex matrix (element of sl(2,C)).
class SL2CGenerator {
public:
    SL2CGenerator() : a_(Mat2c::Zero()) {}
    explicit SL2CGenerator(const Mat2c& a) : a_(a)
    {
        if (!a_.allFinite())
            throw Error(ErrorCode::InvalidArgument, "generator has non-finite entries");
        if (std::abs(a_.trace()) >= 1e-12)
            throw Error(ErrorCode::InvalidArgument, "sl(2,C) generator must be traceless");
    }
    SL2CGenerator(cplx a11, cplx a12, cplx a21, cplx a22)
        : SL2CGenerator((Mat2c() << a11, a12, a21, a22).finished())
    {
    }

    const Mat2c& matrix() const noexcept { return a_; }
    cplx a11() const { return a_(0, 0); }
    cplx a12() const { return a_(0, 1); }
    cplx a21() const { return a_(1, 0); }
    cplx a22() const { return a_(1, 1); }
    bool is_zero() const { return a_.cwiseAbs().maxCoeff() == 0.0; }
    double norm() const { return a_.norm(); }

private:
    Mat2c a_;
};

/// Real 3x3 matrix (element of gl(3,R)).
class GL3Generator {
public:
    GL3Generator() : a_(Mat3::Zero()) {}
    explicit GL3Generator(const Mat3& a) : a_(a)
    {
        if (!a_.allFinite())
            throw Error(ErrorCode::InvalidArgument, "generator has non-finite entries");
    }

    const Mat3& matrix() const noexcept { return a_; }
    /// One-based entry access matching the usual a_ij notation.
    double a(int i, int j) const { return a_(i - 1, j - 1); }
    bool is_zero() const { return a_.cwiseAbs().maxCoeff() == 0.0; }
    double norm() const { return a_.norm(); }

private:
    Mat3 a_;
};

// ---------------------------------------------------------------------------
// Exponentials

/// exp(At) for traceless A via Cayley-Hamilton: A^2 = -det(A) Id, hence
/// exp(At) = cos(wt) Id + t sinc(wt) A with w^2 = det(A). Below |wt| < 1e-4
/// the even series are used directly, which avoids the square root.
inline MobiusMap exp_sl2(const SL2CGenerator& gen, double t)
{
    const Mat2c& A = gen.matrix();
    const cplx x2 = A.determinant() * (t * t); // (w t)^2
    cplx c, s;
    if (std::abs(x2) < 1e-8) {
        c = 1.0 - x2 / 2.0 + x2 * x2 / 24.0;
        s = t * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
    } else {
        const cplx wt = std::sqrt(x2);
        c = std::cos(wt);
        s = t * std::sin(wt) / wt;
    }
    return MobiusMap(Mat2c(c * Mat2c::Identity() + s * A));
}

/// Dense matrix exponential: scaling and squaring around a degree-12 Taylor
/// polynomial (scaled 1-norm <= 1/2, truncation below 2e-14).
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
expm(const Eigen::MatrixBase<Derived>& a)
{
    using M = Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5)
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const M x = a / std::ldexp(1.0, squarings);
    const M id = M::Identity(a.rows(), a.cols());
    M result = id;
    for (int k = 12; k >= 1; --k)
        result = id + (x * result) / static_cast<double>(k);
    for (int i = 0; i < squarings; ++i)
        result = result * result;
    return result;
}

inline ProjectiveMap exp_gl3(const GL3Generator& gen, double t) { return ProjectiveMap(Mat3(expm(Mat3(gen.matrix() * t)))); }

/// sum_{k <= terms} X^k / k!, evaluated term by term. Reference values for
/// exp-check; accurate only for moderate norms.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
taylor_exp(const Eigen::MatrixBase<Derived>& x, int terms = 20)
{
    using M = Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
    M term = M::Identity(x.rows(), x.cols());
    M sum = term;
    for (int k = 1; k <= terms; ++k) {
        term = (term * x) / static_cast<double>(k);
        sum += term;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Gram volume

/// rho(M) = det(M M^T)^{1/2}: the m-volume distortion of M^T (m <= k).
inline double rho_gram(const Eigen::MatrixXd& m)
{
    if (m.rows() > m.cols())
        throw Error(ErrorCode::DimensionMismatch, "rho_gram needs rows <= cols");
    if (m.rows() == 0)
        return 1.0;
    const double det = (m * m.transpose()).determinant();
    return std::sqrt(std::max(0.0, det));
}

} // namespace projlab
