#pragma once

// The transversality condition for projection families, its numerical
// estimation, analytic prediction of the loci where it degenerates, and the
// classification of one-parameter subgroups.

#include "projlab/families.hpp"
#include "projlab/parallel.hpp"
#include "projlab/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace projlab {

// ---------------------------------------------------------------------------
// Phi and the single-triple check

struct Triple {
    VectorXd lambda;
    VectorXd v;
    VectorXd w;
};

/// Phi(lambda, v, w) = (Pi(lambda, v) - Pi(lambda, w)) / |v - w|.
inline VectorXd phi(const ProjectionFamily& family, const VectorXd& lambda, const VectorXd& v, const VectorXd& w)
{
    const double dist = (v - w).norm();
    if (dist < 1e-14)
        throw Error(ErrorCode::CoincidentPoints, "phi needs distinct points");
    return (family.eval(lambda, v) - family.eval(lambda, w)) / dist;
}

/// Which form of the transversality inequality to apply.
enum class Criterion {
    Auto,       ///< Scalar when m = k = 1, MaxPartial when m = 1, Gram otherwise.
    Gram,       ///< det(DPhi DPhi^T) >= C^2
    MaxPartial, ///< max_j |d_j Phi| >= C (m = 1)
    Scalar,     ///< |d Phi| >= C (m = k = 1)
};

enum class TripleOutcome { NotApplicable, Pass, Fail };

constexpr std::string_view to_string(TripleOutcome o)
{
    switch (o) {
    case TripleOutcome::NotApplicable: return "NotApplicable";
    case TripleOutcome::Pass: return "Pass";
    case TripleOutcome::Fail: return "Fail";
    }
    return "?";
}

/// Step for the central differences used away from the identity.
inline constexpr double kParamStep = 1e-4;

struct TripleEvaluation {
    VectorXd phi;
    MatrixXd dphi;        ///< D_lambda Phi, target_dim x param_dim
    double phi_norm = 0;  ///< |Phi|
    double strength = 0;  ///< left side of the then-clause, on the scale of C
};

inline Criterion resolve(Criterion c, const ProjectionFamily& family)
{
    if (c != Criterion::Auto)
        return c;
    if (family.target_dim() == 1)
        return family.param_dim() == 1 ? Criterion::Scalar : Criterion::MaxPartial;
    return Criterion::Gram;
}

inline double criterion_strength(const MatrixXd& dphi, Criterion c)
{
    switch (c) {
    case Criterion::Scalar:
        if (dphi.rows() != 1 || dphi.cols() != 1)
            throw Error(ErrorCode::DimensionMismatch, "scalar criterion needs m = k = 1");
        return std::abs(dphi(0, 0));
    case Criterion::MaxPartial:
        if (dphi.rows() != 1)
            throw Error(ErrorCode::DimensionMismatch, "max-partial criterion needs m = 1");
        return dphi.cwiseAbs().maxCoeff();
    case Criterion::Gram:
    case Criterion::Auto: break;
    }
    return rho_gram(dphi);
}

/// Phi and D_lambda Phi for one triple. Analytic identity derivatives are
/// used when lambda = 0, central differences otherwise.
inline TripleEvaluation evaluate_triple(const ProjectionFamily& family, const Triple& triple,
                                        Criterion criterion = Criterion::Auto)
{
    TripleEvaluation out;
    const double dist = (triple.v - triple.w).norm();
    out.phi = phi(family, triple.lambda, triple.v, triple.w);
    out.phi_norm = out.phi.norm();
    if (triple.lambda.isZero(0.0)) {
        out.dphi = (family.jacobian_identity(triple.v) - family.jacobian_identity(triple.w)) / dist;
    } else {
        out.dphi = (family_jacobian_numeric(family, triple.lambda, triple.v, kParamStep)
                    - family_jacobian_numeric(family, triple.lambda, triple.w, kParamStep))
                   / dist;
    }
    out.strength = criterion_strength(out.dphi, resolve(criterion, family));
    return out;
}

inline TripleOutcome outcome_at(const TripleEvaluation& e, double c)
{
    if (e.phi_norm > c)
        return TripleOutcome::NotApplicable;
    return e.strength >= c ? TripleOutcome::Pass : TripleOutcome::Fail;
}

inline TripleOutcome check_triple(const ProjectionFamily& family, const Triple& triple, double c,
                                  Criterion criterion = Criterion::Auto)
{
    return outcome_at(evaluate_triple(family, triple, criterion), c);
}

// ---------------------------------------------------------------------------
// Regions, scan reports

struct Region {
    enum class Kind { Box, Ball };
    Kind kind = Kind::Box;
    VectorXd lo, hi;     ///< Box corners
    VectorXd center;     ///< Ball center
    double radius = 0.0; ///< Ball radius

    static Region box(VectorXd lo, VectorXd hi)
    {
        Region r;
        r.kind = Kind::Box;
        r.lo = std::move(lo);
        r.hi = std::move(hi);
        return r;
    }
    static Region box2(double x0, double x1, double y0, double y1) { return box(Vec2(x0, y0), Vec2(x1, y1)); }
    static Region ball(VectorXd center, double radius)
    {
        Region r;
        r.kind = Kind::Ball;
        r.center = std::move(center);
        r.radius = radius;
        return r;
    }

    int dim() const { return static_cast<int>(kind == Kind::Box ? lo.size() : center.size()); }

    bool empty() const
    {
        if (kind == Kind::Ball)
            return !(radius > 0.0) || center.size() == 0;
        return lo.size() == 0 || lo.size() != hi.size() || !((hi - lo).minCoeff() > 0.0);
    }

    double diameter() const { return kind == Kind::Ball ? 2.0 * radius : (hi - lo).norm(); }

    bool contains(const VectorXd& p) const
    {
        if (kind == Kind::Ball)
            return (p - center).norm() <= radius;
        return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
    }

    VectorXd sample(Rng& rng) const
    {
        const int n = dim();
        VectorXd p(n);
        if (kind == Kind::Box) {
            for (int i = 0; i < n; ++i)
                p[i] = rng.uniform(lo[i], hi[i]);
            return p;
        }
        do {
            for (int i = 0; i < n; ++i)
                p[i] = rng.uniform(-1.0, 1.0);
        } while (p.norm() > 1.0);
        return center + radius * p;
    }

    std::string describe() const
    {
        auto vec = [](const VectorXd& v) {
            std::string s = "(";
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%s%.6g", i ? "," : "", v[i]);
                s += buf;
            }
            return s + ")";
        };
        if (kind == Kind::Box)
            return "box" + vec(lo) + "-" + vec(hi);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", radius);
        return "ball" + vec(center) + "r" + buf;
    }
};

struct DegeneratePoint {
    VectorXd point;
    double min_derivative = 0.0;
    double phi_at_min = 0.0;
};

struct ScanStats {
    std::size_t evaluated = 0; ///< triples or grid points actually evaluated
    std::size_t skipped = 0;   ///< samples rejected (outside domain)
};

/// Numerical transversality evidence. best_constant is 0 exactly when some
/// sample failed at the finest resolution, and those samples are the
/// degenerate points.
struct ScanReport {
    std::string family;
    std::string region;
    std::size_t samples = 0;
    std::size_t grid_nx = 0, grid_ny = 0;
    double grid_step = 0.0;
    double best_constant = 0.0;
    std::optional<Triple> worst_triple;
    std::vector<DegeneratePoint> degenerate_points;
    ScanStats stats;
};

// ---------------------------------------------------------------------------
// estimate_constant

struct Sampling {
    std::size_t triples = 20000;
    std::uint64_t seed = 1;
    /// Parameters are sampled uniformly in the ball of this radius around the
    /// identity (0: identity only).
    double param_radius = 0.0;
    /// Resolution of the C grid 2^-20 .. 2^0.
    int steps_per_octave = 1;
    Criterion criterion = Criterion::Auto;
};

inline std::vector<double> constant_grid(int steps_per_octave)
{
    std::vector<double> grid;
    const int steps = 20 * std::max(1, steps_per_octave);
    for (int i = 0; i <= steps; ++i)
        grid.push_back(std::exp2(-20.0 + 20.0 * i / steps));
    return grid;
}

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline VectorXd random_unit(Rng& rng, int n)
{
    VectorXd u(n);
    do {
        for (int i = 0; i < n; ++i)
            u[i] = rng.normal();
    } while (u.norm() < 1e-12);
    return u.normalized();
}

/// Kernel of the spatial Jacobian of Pi(lambda, .) at p, by central differences.
inline MatrixXd spatial_kernel(const ProjectionFamily& family, const VectorXd& lambda, const VectorXd& p)
{
    const int n = family.space_dim();
    const double h = 1e-6;
    MatrixXd jac(family.target_dim(), n);
    for (int i = 0; i < n; ++i) {
        VectorXd plus = p, minus = p;
        plus[i] += h;
        minus[i] -= h;
        jac.col(i) = (family.eval(lambda, plus) - family.eval(lambda, minus)) / (2.0 * h);
    }
    Eigen::JacobiSVD<MatrixXd> svd(jac, Eigen::ComputeFullV);
    const int rank = std::min<int>(static_cast<int>(jac.rows()), n);
    return svd.matrixV().rightCols(n - rank);
}

/// One random triple: half the offsets are isotropic, half are aimed close
/// to a fiber of Pi_lambda so that small |Phi| is well represented.
inline std::optional<Triple> sample_triple(const ProjectionFamily& family, const Region& region, const Sampling& s,
                                           Rng& rng)
{
    const int k = family.param_dim();
    for (int attempt = 0; attempt < 64; ++attempt) {
        Triple t;
        t.lambda = VectorXd::Zero(k);
        if (s.param_radius > 0.0)
            t.lambda = random_unit(rng, k) * s.param_radius * std::pow(rng.uniform(), 1.0 / k);
        t.w = family.to_space(region.sample(rng));
        if (!family.in_domain(t.lambda, t.w))
            continue;
        const int n = family.space_dim();
        VectorXd u = random_unit(rng, n);
        if (rng.uniform() < 0.5) {
            MatrixXd kernel;
            try {
                kernel = spatial_kernel(family, t.lambda, t.w);
            } catch (const Error&) {
                continue;
            }
            if (kernel.cols() > 0) {
                const VectorXd mix = random_unit(rng, static_cast<int>(kernel.cols()));
                u = (kernel * mix + rng.log_uniform(0x1.0p-24, 1.0) * u).normalized();
            }
        }
        const double len = region.diameter() * rng.log_uniform(1e-4, 0.5);
        t.v = family.to_space(t.w + len * u);
        if ((t.v - t.w).norm() < 1e-12 || !family.in_domain(t.lambda, t.v))
            continue;
        return t;
    }
    return std::nullopt;
}

} // namespace detail

/// Largest C in the log-spaced grid for which every sampled triple passes or
/// is not applicable. Deterministic for a given seed and sample count.
inline ScanReport estimate_constant(const ProjectionFamily& family, const Region& region, const Sampling& sampling)
{
    if (region.empty() || region.dim() != family.space_dim())
        throw Error(ErrorCode::EmptyRegion, "region is empty or has the wrong dimension");
    const std::vector<double> grid = constant_grid(sampling.steps_per_octave);

    struct Slot {
        std::optional<Triple> triple;
        TripleEvaluation eval;
        std::size_t passes = 0; ///< number of leading grid constants passed
    };
    std::vector<Slot> slots(sampling.triples);
    parallel_for(sampling.triples, [&](std::size_t i) {
        Rng rng(detail::mix_seed(sampling.seed, i));
        Slot& slot = slots[i];
        slot.triple = detail::sample_triple(family, region, sampling, rng);
        if (!slot.triple)
            return;
        try {
            slot.eval = evaluate_triple(family, *slot.triple, sampling.criterion);
        } catch (const Error&) {
            slot.triple.reset();
            return;
        }
        while (slot.passes < grid.size() && outcome_at(slot.eval, grid[slot.passes]) != TripleOutcome::Fail)
            ++slot.passes;
    });

    ScanReport report;
    report.family = family.kind();
    report.region = region.describe();
    report.samples = sampling.triples;
    std::size_t admissible = grid.size();
    const Slot* worst = nullptr;
    for (const Slot& slot : slots) {
        if (!slot.triple) {
            ++report.stats.skipped;
            continue;
        }
        ++report.stats.evaluated;
        if (slot.passes < admissible || worst == nullptr) {
            if (slot.passes < admissible)
                admissible = slot.passes;
            if (worst == nullptr || slot.passes < worst->passes)
                worst = &slot;
        }
        if (slot.passes == 0)
            report.degenerate_points.push_back({slot.triple->w, slot.eval.strength, slot.eval.phi_norm});
    }
    if (report.stats.evaluated == 0)
        throw Error(ErrorCode::EmptyRegion, "no sampled triple lies in the family domain");
    report.best_constant = admissible == 0 ? 0.0 : grid[admissible - 1];
    if (worst)
        report.worst_triple = worst->triple;
    return report;
}

// ---------------------------------------------------------------------------
// Empirical degeneracy scan

struct Grid2 {
    double x0 = -1, x1 = 1, y0 = -1, y1 = 1;
    int nx = 100, ny = 100;

    double step_x() const { return nx > 1 ? (x1 - x0) / (nx - 1) : 0.0; }
    double step_y() const { return ny > 1 ? (y1 - y0) / (ny - 1) : 0.0; }
    Vec2 at(int i, int j) const { return Vec2(x0 + i * step_x(), y0 + j * step_y()); }
};

struct DegeneracyOptions {
    int directions = 32;
    double tol = 1e-6;
    /// Length of the offsets p + delta u.
    double offset = 1e-5;
    /// Also flag the grid point closer to a sign change of the fiber-direction
    /// derivative between neighbours (locates loci that fall between lattice
    /// points).
    bool zero_crossings = true;
};

/// At each lattice point p (identity parameter), minimize over sampled offset
/// directions u with |Phi(0, p + delta u, p)| <= tol the norm of
/// D_lambda Psi / delta; p is degenerate when that minimum is below tol.
inline ScanReport empirical_degeneracy_scan(const ProjectionFamily& family, const Grid2& grid,
                                            const DegeneracyOptions& opt = {})
{
    if (family.space_dim() != 2)
        throw Error(ErrorCode::InvalidArgument, "degeneracy scans need a planar family");
    if (grid.nx < 1 || grid.ny < 1)
        throw Error(ErrorCode::EmptyRegion, "grid has no points");
    const VectorXd zero = VectorXd::Zero(family.param_dim());
    const bool signed_available = family.param_dim() == 1 && family.target_dim() == 1;
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

    struct Cell {
        bool valid = false;
        double min_derivative = std::numeric_limits<double>::infinity();
        double phi_at_min = kNaN;
        double signed_derivative = kNaN;
    };
    const std::size_t total = static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny);
    std::vector<Cell> cells(total);

    parallel_for(total, [&](std::size_t idx) {
        const int i = static_cast<int>(idx % static_cast<std::size_t>(grid.nx));
        const int j = static_cast<int>(idx / static_cast<std::size_t>(grid.nx));
        const VectorXd p = grid.at(i, j);
        Cell& cell = cells[idx];
        VectorXd value_p;
        MatrixXd jac_p;
        try {
            value_p = family.eval(zero, p);
            jac_p = family.jacobian_identity(p);
        } catch (const Error&) {
            return;
        }
        cell.valid = true;

        std::vector<Vec2> dirs;
        for (int d = 0; d < opt.directions; ++d) {
            const double a = std::numbers::pi * d / opt.directions;
            dirs.emplace_back(std::cos(a), std::sin(a));
        }
        std::optional<Vec2> fiber_dir;
        try {
            const MatrixXd kernel = detail::spatial_kernel(family, zero, p);
            if (kernel.cols() == 1) {
                // Orient by the gradient so the direction varies continuously.
                const Vec2 kv = kernel.col(0);
                const Vec2 grad(-kv[1], kv[0]);
                Vec2 u = kv;
                const VectorXd g = (family.eval(zero, VectorXd(p + 1e-6 * grad))
                                    - family.eval(zero, VectorXd(p - 1e-6 * grad)));
                if (g[0] < 0.0)
                    u = -u;
                fiber_dir = u;
                dirs.push_back(u);
            }
        } catch (const Error&) {
        }

        for (const Vec2& u : dirs) {
            const VectorXd v = p + opt.offset * u;
            try {
                const VectorXd ph = (family.eval(zero, v) - value_p) / opt.offset;
                if (ph.norm() > opt.tol)
                    continue;
                const MatrixXd dpsi = (family.jacobian_identity(v) - jac_p) / opt.offset;
                const double g = dpsi.norm();
                if (g < cell.min_derivative) {
                    cell.min_derivative = g;
                    cell.phi_at_min = ph.norm();
                }
            } catch (const Error&) {
            }
        }
        if (signed_available && fiber_dir) {
            try {
                const VectorXd v = p + opt.offset * *fiber_dir;
                cell.signed_derivative = (family.jacobian_identity(v)(0, 0) - jac_p(0, 0)) / opt.offset;
            } catch (const Error&) {
            }
        }
    });

    ScanReport report;
    report.family = family.kind();
    char buf[96];
    std::snprintf(buf, sizeof buf, "grid[%g,%g]x[%g,%g]", grid.x0, grid.x1, grid.y0, grid.y1);
    report.region = buf;
    report.grid_nx = static_cast<std::size_t>(grid.nx);
    report.grid_ny = static_cast<std::size_t>(grid.ny);
    report.grid_step = std::max(grid.step_x(), grid.step_y());
    report.samples = total;

    auto crossing = [&](int i, int j) {
        const Cell& c = cells[static_cast<std::size_t>(j) * grid.nx + i];
        if (std::isnan(c.signed_derivative))
            return false;
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
            const int ni = i + di[d], nj = j + dj[d];
            if (ni < 0 || nj < 0 || ni >= grid.nx || nj >= grid.ny)
                continue;
            const Cell& n = cells[static_cast<std::size_t>(nj) * grid.nx + ni];
            if (std::isnan(n.signed_derivative))
                continue;
            if (c.signed_derivative * n.signed_derivative < 0.0
                && std::abs(c.signed_derivative) <= std::abs(n.signed_derivative))
                return true;
        }
        return false;
    };

    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Cell& c = cells[static_cast<std::size_t>(j) * grid.nx + i];
            if (!c.valid) {
                ++report.stats.skipped;
                continue;
            }
            ++report.stats.evaluated;
            const bool small = c.min_derivative < opt.tol;
            if (small || (opt.zero_crossings && crossing(i, j))) {
                const double md = std::isfinite(c.min_derivative) ? c.min_derivative : std::abs(c.signed_derivative);
                report.degenerate_points.push_back({grid.at(i, j), md, std::isnan(c.phi_at_min) ? 0.0 : c.phi_at_min});
            }
        }
    }
    // Smallest directional derivative seen; zero as soon as anything is degenerate.
    double smallest = std::numeric_limits<double>::infinity();
    for (const Cell& c : cells)
        if (c.valid && std::isfinite(c.min_derivative))
            smallest = std::min(smallest, c.min_derivative);
    report.best_constant = !report.degenerate_points.empty() ? 0.0 : std::isfinite(smallest) ? smallest : opt.tol;
    return report;
}

// ---------------------------------------------------------------------------
// Loci

/// a x + b y = c with (a, b) a unit vector whose first nonzero entry is positive.
struct AffineLine {
    double a = 1.0, b = 0.0, c = 0.0;

    static AffineLine make(double a, double b, double c)
    {
        const double n = std::hypot(a, b);
        if (!(n > 0.0))
            throw Error(ErrorCode::InvalidArgument, "line has zero normal");
        a /= n;
        b /= n;
        c /= n;
        if (a < -1e-12 || (std::abs(a) <= 1e-12 && b < 0.0)) {
            a = -a;
            b = -b;
            c = -c;
        }
        return {a, b, c};
    }

    /// Direction (-b, a) has x-component below 1e-9.
    bool is_vertical() const { return std::abs(b) < 1e-9; }
    bool is_horizontal() const { return std::abs(a) < 1e-9; }
    /// Homogeneous covector l with l . (x, y, 1) = 0 on the line.
    Vec3 covector() const { return Vec3(a, b, -c); }
    Vec2 foot() const { return Vec2(a * c, b * c); }
    Vec2 direction() const { return Vec2(-b, a); }
};

struct Circle {
    double cx = 0.0, cy = 0.0, r = 1.0;
};

struct LocusDescription {
    enum class Kind { EmptyLocus, AffineLine, LineAtInfinity, WholeSpace, Circle };
    Kind kind = Kind::EmptyLocus;
    AffineLine line;
    Circle circle;
    /// Orbit of the excluded point: "Gamma(inf)" or "Gamma(inf_Y)".
    std::string singular_orbit;
    /// The flow fixes the excluded point (the orbit is a single point).
    bool singular_fixed = false;

    static LocusDescription of(Kind k)
    {
        LocusDescription d;
        d.kind = k;
        return d;
    }
    static LocusDescription of_line(AffineLine l)
    {
        LocusDescription d;
        d.kind = Kind::AffineLine;
        d.line = l;
        return d;
    }
};

constexpr std::string_view to_string(LocusDescription::Kind k)
{
    switch (k) {
    case LocusDescription::Kind::EmptyLocus: return "EmptyLocus";
    case LocusDescription::Kind::AffineLine: return "AffineLine";
    case LocusDescription::Kind::LineAtInfinity: return "LineAtInfinity";
    case LocusDescription::Kind::WholeSpace: return "WholeSpace";
    case LocusDescription::Kind::Circle: return "Circle";
    }
    return "?";
}

inline std::string format_number(double v)
{
    if (std::abs(v) < 1e-12)
        v = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string line_label(const LocusDescription& locus)
{
    switch (locus.kind) {
    case LocusDescription::Kind::LineAtInfinity: return "infinity";
    case LocusDescription::Kind::AffineLine: {
        const AffineLine& l = locus.line;
        if (l.is_vertical())
            return "x=" + format_number(l.c / l.a);
        if (l.is_horizontal())
            return "y=" + format_number(l.c / l.b);
        return format_number(l.a) + "*x" + (l.b < 0 ? "-" : "+") + format_number(std::abs(l.b)) + "*y="
               + format_number(l.c);
    }
    case LocusDescription::Kind::Circle:
        return "circle(" + format_number(locus.circle.cx) + "," + format_number(locus.circle.cy) + ";"
               + format_number(locus.circle.r) + ")";
    case LocusDescription::Kind::EmptyLocus: return "empty";
    case LocusDescription::Kind::WholeSpace: return "all";
    }
    return "?";
}

namespace detail {

inline double generator_eps(double norm) { return 1e-12 * std::max(1.0, norm); }

} // namespace detail

/// L0 = {z : Im(a11 - a21 z) = 0}; for a21 = 0 the locus is empty
/// (Im a11 != 0) or everything (translations and dilations).
inline LocusDescription predict_locus_mobius(const SL2CGenerator& a)
{
    if (a.is_zero())
        throw Error(ErrorCode::ZeroGenerator, "generator must be non-zero");
    const double eps = detail::generator_eps(a.norm());
    LocusDescription d;
    const cplx a21 = a.a21(), a11 = a.a11();
    if (std::abs(a21) > eps) {
        // Im(a21 z) = Im(a21) x + Re(a21) y
        d = LocusDescription::of_line(AffineLine::make(a21.imag(), a21.real(), a11.imag()));
    } else if (std::abs(a11.imag()) > eps) {
        d = LocusDescription::of(LocusDescription::Kind::EmptyLocus);
    } else {
        d = LocusDescription::of(LocusDescription::Kind::WholeSpace);
    }
    d.singular_orbit = "Gamma(inf)";
    d.singular_fixed = std::abs(a21) <= eps;
    return d;
}

/// L0 = {a32 x = a12} when a32 != 0; the line at infinity when a32 = 0 and
/// a12 != 0; all of RP^2 when both vanish.
inline LocusDescription predict_locus_projective(const GL3Generator& a)
{
    if (a.is_zero())
        throw Error(ErrorCode::ZeroGenerator, "generator must be non-zero");
    const double eps = detail::generator_eps(a.norm());
    const double a12 = a.a(1, 2), a32 = a.a(3, 2);
    LocusDescription d;
    if (std::abs(a32) > eps)
        d = LocusDescription::of_line(AffineLine::make(1.0, 0.0, a12 / a32));
    else if (std::abs(a12) > eps)
        d = LocusDescription::of(LocusDescription::Kind::LineAtInfinity);
    else
        d = LocusDescription::of(LocusDescription::Kind::WholeSpace);
    d.singular_orbit = "Gamma(inf_Y)";
    d.singular_fixed = std::abs(a12) <= eps && std::abs(a32) <= eps;
    return d;
}

// ---------------------------------------------------------------------------
// Distances to loci

namespace detail {

inline Vec3 stereographic(const ExtendedComplex& p)
{
    if (p.is_infinity())
        return Vec3(0.0, 0.0, 1.0);
    const cplx z = p.value();
    const double n = std::norm(z);
    return Vec3(2.0 * z.real(), 2.0 * z.imag(), n - 1.0) / (n + 1.0);
}

/// Distance on the unit sphere from P to the circle cut out by n . X = h.
inline double sphere_point_to_circle(const Vec3& p, Vec3 n, double h)
{
    const double len = n.norm();
    n /= len;
    h /= len;
    const double r = std::sqrt(std::max(0.0, 1.0 - h * h));
    const double off = n.dot(p) - h;
    const Vec3 in_plane = p - n.dot(p) * n; // component orthogonal to n
    return std::hypot(off, in_plane.norm() - r);
}

} // namespace detail

/// Chordal distance on the Riemann sphere from p to the closure of a locus
/// (lines contain inf).
inline double chordal_dist_to_locus(const ExtendedComplex& p, const LocusDescription& locus)
{
    using K = LocusDescription::Kind;
    switch (locus.kind) {
    case K::WholeSpace: return 0.0;
    case K::EmptyLocus: return std::numeric_limits<double>::infinity();
    case K::LineAtInfinity: return chordal_dist(p, ExtendedComplex::infinity());
    case K::AffineLine: {
        const AffineLine& l = locus.line;
        return detail::sphere_point_to_circle(detail::stereographic(p), Vec3(l.a, l.b, l.c), l.c);
    }
    case K::Circle: {
        // Substituting x = X1/(1-X3), |z|^2 = (1+X3)/(1-X3) into |z - c|^2 = r^2:
        // (1+X3) - 2cx X1 - 2cy X2 + (|c|^2 - r^2)(1 - X3) = 0.
        const Circle& c = locus.circle;
        const double cc = c.cx * c.cx + c.cy * c.cy;
        const Vec3 n(-2.0 * c.cx, -2.0 * c.cy, 1.0 - cc + c.r * c.r);
        const double h = -(1.0 + cc - c.r * c.r);
        return detail::sphere_point_to_circle(detail::stereographic(p), n, h);
    }
    }
    return std::numeric_limits<double>::infinity();
}

/// Sine distance in RP^2 from p to a projective line (or locus).
inline double chordal_dist_to_locus(const HomPoint2& p, const LocusDescription& locus)
{
    using K = LocusDescription::Kind;
    switch (locus.kind) {
    case K::WholeSpace: return 0.0;
    case K::EmptyLocus: return std::numeric_limits<double>::infinity();
    case K::LineAtInfinity: return std::abs(p.z());
    case K::AffineLine: {
        const Vec3 l = locus.line.covector();
        return std::abs(l.dot(p.coords())) / l.norm();
    }
    case K::Circle: break;
    }
    throw Error(ErrorCode::InvalidArgument, "circular loci are not projective lines");
}

/// Distance from a chart point to K0 = L0 u S0 (S0 = inf, resp. inf_Y).
inline double distance_to_k0(const FamilySpec& spec, const Vec2& p, const LocusDescription& locus)
{
    if (std::holds_alternative<MobiusOneParam>(spec) || std::holds_alternative<MobiusFull>(spec)) {
        const ExtendedComplex z = ExtendedComplex::finite(p[0], p[1]);
        return std::min(chordal_dist_to_locus(z, locus), chordal_dist(z, ExtendedComplex::infinity()));
    }
    const HomPoint2 q = HomPoint2::affine(p[0], p[1]);
    return std::min(chordal_dist_to_locus(q, locus), chordal_dist(q, HomPoint2::infinity_y()));
}

/// The chordal size of one lattice step at p (the metric used for "within k
/// grid steps").
inline double chordal_step(const FamilySpec& spec, const Vec2& p, double step)
{
    if (std::holds_alternative<MobiusOneParam>(spec) || std::holds_alternative<MobiusFull>(spec))
        return chordal_dist(ExtendedComplex::finite(p[0], p[1]), ExtendedComplex::finite(p[0] + step, p[1]));
    return chordal_dist(HomPoint2::affine(p[0], p[1]), HomPoint2::affine(p[0] + step, p[1]));
}

// ---------------------------------------------------------------------------
// Transport of loci under coordinate changes

/// Image of the locus under M^{-1}: lines pull back as l -> M^T l.
inline LocusDescription transport_locus(const LocusDescription& locus, const ProjectiveMap& m)
{
    using K = LocusDescription::Kind;
    if (locus.kind == K::EmptyLocus || locus.kind == K::WholeSpace)
        return locus;
    if (locus.kind == K::Circle)
        throw Error(ErrorCode::InvalidArgument, "circular loci are not projective lines");
    const Vec3 l = locus.kind == K::LineAtInfinity ? Vec3(0, 0, 1) : locus.line.covector();
    Vec3 t = m.matrix().transpose() * l;
    t /= t.norm();
    LocusDescription out = locus;
    if (std::hypot(t[0], t[1]) < 1e-12) {
        out.kind = K::LineAtInfinity;
    } else {
        out.kind = K::AffineLine;
        out.line = AffineLine::make(t[0], t[1], -t[2]);
    }
    return out;
}

namespace detail {

/// Generalized circle through three points of the Riemann sphere.
inline LocusDescription circle_through(const ExtendedComplex& p, const ExtendedComplex& q, const ExtendedComplex& r)
{
    std::vector<cplx> finite;
    for (const auto* z : {&p, &q, &r})
        if (z->is_finite())
            finite.push_back(z->value());
    if (finite.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "degenerate three-point transport");
    auto line_through = [](cplx a, cplx b) {
        const cplx d = b - a;
        return LocusDescription::of_line(AffineLine::make(-d.imag(), d.real(), -d.imag() * a.real() + d.real() * a.imag()));
    };
    if (finite.size() == 2)
        return line_through(finite[0], finite[1]);
    const cplx a = finite[0], b = finite[1], c = finite[2];
    const double cross = std::imag(std::conj(b - a) * (c - a));
    const double scale = std::max({std::norm(b - a), std::norm(c - a), 1e-300});
    if (std::abs(cross) < 1e-12 * scale)
        return line_through(a, b);
    // Circumcenter.
    const double d = 2.0 * (a.real() * (b.imag() - c.imag()) + b.real() * (c.imag() - a.imag())
                            + c.real() * (a.imag() - b.imag()));
    const double ux = (std::norm(a) * (b.imag() - c.imag()) + std::norm(b) * (c.imag() - a.imag())
                       + std::norm(c) * (a.imag() - b.imag()))
                      / d;
    const double uy = (std::norm(a) * (c.real() - b.real()) + std::norm(b) * (a.real() - c.real())
                       + std::norm(c) * (b.real() - a.real()))
                      / d;
    LocusDescription out;
    out.kind = LocusDescription::Kind::Circle;
    out.circle = {ux, uy, std::abs(a - cplx(ux, uy))};
    return out;
}

} // namespace detail

/// Image of the locus under M^{-1}, by transporting three of its points.
inline LocusDescription transport_locus(const LocusDescription& locus, const MobiusMap& m)
{
    using K = LocusDescription::Kind;
    if (locus.kind == K::EmptyLocus || locus.kind == K::WholeSpace)
        return locus;
    const MobiusMap inv = m.inverse();
    ExtendedComplex p[3] = {ExtendedComplex::infinity(), ExtendedComplex::infinity(), ExtendedComplex::infinity()};
    if (locus.kind == K::AffineLine) {
        const Vec2 f = locus.line.foot(), d = locus.line.direction();
        p[0] = ExtendedComplex::finite(f[0], f[1]);
        p[1] = ExtendedComplex::finite(f[0] + d[0], f[1] + d[1]);
    } else if (locus.kind == K::Circle) {
        const Circle& c = locus.circle;
        for (int i = 0; i < 3; ++i) {
            const double ang = 2.0 * std::numbers::pi * i / 3.0;
            p[i] = ExtendedComplex::finite(c.cx + c.r * std::cos(ang), c.cy + c.r * std::sin(ang));
        }
    } else {
        throw Error(ErrorCode::InvalidArgument, "the line at infinity is not a Mobius locus");
    }
    LocusDescription out = detail::circle_through(mobius_apply(inv, p[0]), mobius_apply(inv, p[1]), mobius_apply(inv, p[2]));
    out.singular_orbit = locus.singular_orbit;
    out.singular_fixed = locus.singular_fixed;
    return out;
}

// ---------------------------------------------------------------------------
// Classification of one-parameter subgroups

enum class VerdictKind { FailsGlobally, FailsOnLine, HoldsEverywhere, HoldsWithArtifactLocus };

constexpr std::string_view to_string(VerdictKind v)
{
    switch (v) {
    case VerdictKind::FailsGlobally: return "FailsGlobally";
    case VerdictKind::FailsOnLine: return "FailsOnLine";
    case VerdictKind::HoldsEverywhere: return "HoldsEverywhere";
    case VerdictKind::HoldsWithArtifactLocus: return "HoldsWithArtifactLocus";
    }
    return "?";
}

struct OrbitSample {
    double t = 0.0;
    bool at_infinity = false;
    double x = 0.0, y = 0.0; ///< affine coordinates (finite samples)
    double distance = 0.0;   ///< chordal distance to L0
};

struct ClassificationVerdict {
    VerdictKind kind = VerdictKind::HoldsEverywhere;
    /// "global", "bad", "good", "artifact" or "transversal" (L0 empty).
    std::string case_label;
    std::string reason;
    LocusDescription locus;
    std::vector<OrbitSample> orbit;
    double max_orbit_distance = 0.0;
};

/// Orbit sampling used to decide whether the singular orbit lies on L0.
struct OrbitTest {
    double t_min = -5.0, t_max = 5.0;
    int samples = 1000;
    double tol = kChordalTol;

    double t_at(int k) const { return t_min + (t_max - t_min) * k / (samples - 1); }
};

namespace detail {

inline void settle_line_case(ClassificationVerdict& v, bool vertical_or_infinite)
{
    if (v.max_orbit_distance < OrbitTest{}.tol) {
        if (vertical_or_infinite) {
            v.kind = VerdictKind::FailsOnLine;
            v.case_label = "bad";
            v.reason = "the singular orbit is the vertical line (or line at infinity) L0";
        } else {
            v.kind = VerdictKind::HoldsEverywhere;
            v.case_label = "good";
            v.reason = "the singular orbit is the non-vertical line L0, on which the projection is a similarity";
        }
    } else {
        v.kind = VerdictKind::HoldsWithArtifactLocus;
        v.case_label = "artifact";
        v.reason = "transversality fails on L0 but the singular orbit leaves L0";
    }
}

} // namespace detail

inline ClassificationVerdict classify_mobius(const SL2CGenerator& a, const OrbitTest& test = {})
{
    ClassificationVerdict v;
    v.locus = predict_locus_mobius(a);
    using K = LocusDescription::Kind;
    if (v.locus.kind == K::WholeSpace) {
        v.kind = VerdictKind::FailsGlobally;
        v.case_label = "global";
        v.reason = std::abs(a.a11()) > detail::generator_eps(a.norm()) ? "the group consists of Euclidean dilations"
                                                                        : "the group consists of translations";
        return v;
    }
    if (v.locus.kind == K::EmptyLocus) {
        v.kind = VerdictKind::HoldsEverywhere;
        v.case_label = "transversal";
        v.reason = "L0 is empty: the family is transversal on all finite points";
        return v;
    }
    for (int k = 0; k < test.samples; ++k) {
        OrbitSample s;
        s.t = test.t_at(k);
        const ExtendedComplex p = mobius_apply(exp_sl2(a, s.t), ExtendedComplex::infinity());
        s.at_infinity = p.is_infinity();
        if (!s.at_infinity) {
            s.x = p.re();
            s.y = p.im();
        }
        s.distance = chordal_dist_to_locus(p, v.locus);
        v.max_orbit_distance = std::max(v.max_orbit_distance, s.distance);
        v.orbit.push_back(s);
    }
    detail::settle_line_case(v, v.locus.line.is_vertical());
    return v;
}

inline ClassificationVerdict classify_projective(const GL3Generator& a, const OrbitTest& test = {})
{
    ClassificationVerdict v;
    v.locus = predict_locus_projective(a);
    if (v.locus.singular_fixed) {
        v.kind = VerdictKind::FailsGlobally;
        v.case_label = "global";
        v.reason = "the flow preserves the source inf_Y and commutes with the projection";
        return v;
    }
    for (int k = 0; k < test.samples; ++k) {
        OrbitSample s;
        s.t = test.t_at(k);
        const HomPoint2 p = proj_apply(exp_gl3(a, s.t), HomPoint2::infinity_y());
        s.at_infinity = p.is_infinite();
        if (!s.at_infinity) {
            s.x = p.x() / p.z();
            s.y = p.y() / p.z();
        }
        s.distance = chordal_dist_to_locus(p, v.locus);
        v.max_orbit_distance = std::max(v.max_orbit_distance, s.distance);
        v.orbit.push_back(s);
    }
    const bool vertical_or_infinite =
        v.locus.kind == LocusDescription::Kind::LineAtInfinity || v.locus.line.is_vertical();
    detail::settle_line_case(v, vertical_or_infinite);
    return v;
}

// ---------------------------------------------------------------------------
// Failure witness on L0

/// A finite point of L0 for a21 != 0, parametrized by s along the line.
inline cplx mobius_locus_point(const SL2CGenerator& a, double s)
{
    const cplx a21 = a.a21();
    if (std::abs(a21) <= detail::generator_eps(a.norm()))
        throw Error(ErrorCode::InvalidArgument, "L0 is a line only when a21 != 0");
    return (cplx(s, a.a11().imag())) * std::conj(a21) / std::norm(a21);
}

/// |d_t Psi(0, w + i dy, w)| / |dy| from the analytic identity derivative.
inline double witness_ratio(const SL2CGenerator& a, cplx w, double dy)
{
    const cplx v = w + cplx(0.0, dy);
    return std::abs(mobius_dt_identity(a, v) - mobius_dt_identity(a, w)) / std::abs(dy);
}

} // namespace projlab
