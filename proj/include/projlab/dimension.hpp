#pragma once

// Self-similar test sets, box-counting estimates, and dimension sweeps of
// projected clouds along a projection family.

#include "projlab/families.hpp"
#include "projlab/parallel.hpp"
#include "projlab/rng.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace projlab {

struct Similarity {
    double ratio = 0.5;
    double angle = 0.0; ///< rotation, used in the plane only
    VectorXd translation;

    VectorXd apply(const VectorXd& p) const
    {
        if (p.size() == 2 && angle != 0.0) {
            const double c = std::cos(angle), s = std::sin(angle);
            return ratio * Vec2(c * p[0] - s * p[1], s * p[0] + c * p[1]) + translation;
        }
        return ratio * p + translation;
    }

    /// The unique fixed point.
    VectorXd fixed_point() const
    {
        const int n = static_cast<int>(translation.size());
        MatrixXd lin = ratio * MatrixXd::Identity(n, n);
        if (n == 2 && angle != 0.0) {
            const double c = std::cos(angle), s = std::sin(angle);
            lin << c, -s, s, c;
            lin *= ratio;
        }
        return (MatrixXd::Identity(n, n) - lin).partialPivLu().solve(translation);
    }
};

struct IFSSystem {
    std::vector<Similarity> maps;
    int dim = 2;

    void validate() const
    {
        if (maps.empty())
            throw Error(ErrorCode::InvalidArgument, "an IFS needs at least one map");
        for (const Similarity& s : maps) {
            if (!(s.ratio > 0.0 && s.ratio < 1.0))
                throw Error(ErrorCode::NonContractive, "similarity ratios must lie in (0,1)");
            if (s.translation.size() != dim)
                throw Error(ErrorCode::DimensionMismatch, "translation has the wrong dimension");
        }
    }
};

/// Points stored as the columns of a dim x count matrix.
struct PointCloud {
    MatrixXd points;
    std::string provenance;

    int dim() const { return static_cast<int>(points.rows()); }
    std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
};

/// Chaos game with uniform map selection, started at the fixed point of the
/// first map (which lies on the attractor) after a burn-in of at least 40
/// steps.
inline PointCloud ifs_generate(const IFSSystem& system, std::size_t count, std::uint64_t seed)
{
    system.validate();
    if (count < 1000)
        throw Error(ErrorCode::InvalidArgument, "chaos game needs at least 1000 points");
    double rmax = 0.0;
    for (const Similarity& s : system.maps)
        rmax = std::max(rmax, s.ratio);
    const int burn_in = std::max(40, static_cast<int>(std::ceil(std::log(1e-9) / std::log(rmax))));

    Rng rng(seed);
    VectorXd p = system.maps.front().fixed_point();
    const std::size_t nmaps = system.maps.size();
    for (int i = 0; i < burn_in; ++i)
        p = system.maps[rng.index(nmaps)].apply(p);

    PointCloud cloud;
    cloud.points.resize(system.dim, static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        p = system.maps[rng.index(nmaps)].apply(p);
        cloud.points.col(static_cast<Eigen::Index>(i)) = p;
    }
    cloud.provenance = "ifs maps=" + std::to_string(nmaps) + " count=" + std::to_string(count)
                       + " seed=" + std::to_string(seed);
    return cloud;
}

/// Root of sum r_i^s = 1 on [0, n] by bisection (n when the sum still
/// exceeds 1 there, as happens for heavily overlapping systems).
inline double similarity_dimension(const IFSSystem& system)
{
    system.validate();
    auto moran = [&](double s) {
        double sum = 0.0;
        for (const Similarity& m : system.maps)
            sum += std::pow(m.ratio, s);
        return sum - 1.0;
    };
    double lo = 0.0, hi = static_cast<double>(system.dim);
    if (moran(lo) <= 0.0)
        return 0.0;
    if (moran(hi) >= 0.0)
        return hi;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (moran(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Box counting

struct BoxCountFit {
    std::vector<double> scales;
    std::vector<double> counts; ///< mean occupied-box counts
    double slope = 0.0;
    double r_squared = 1.0;
    bool reliable = true; ///< r^2 >= 0.98
};

inline std::vector<double> dyadic_scales(int from_exp = 4, int to_exp = 12)
{
    std::vector<double> s;
    for (int e = from_exp; e <= to_exp; ++e)
        s.push_back(std::exp2(-e));
    return s;
}

/// Ordinary least squares slope of log N against log(1/eps).
inline void fit_counts(BoxCountFit& fit)
{
    const std::size_t n = fit.scales.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = -std::log(fit.scales[i]);
        y[i] = std::log(fit.counts[i]);
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.r_squared = syy <= 1e-300 ? 1.0 : (sxy * sxy) / (sxx * syy);
    fit.reliable = fit.r_squared >= 0.98;
}

namespace detail {

inline void check_scales(const std::vector<double>& scales)
{
    if (scales.size() < 2)
        throw Error(ErrorCode::DegenerateScales, "need at least two scales");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0) || !std::isfinite(scales[i]))
            throw Error(ErrorCode::DegenerateScales, "scales must be positive and finite");
        if (i > 0 && !(scales[i] < scales[i - 1]))
            throw Error(ErrorCode::DegenerateScales, "scales must be strictly decreasing");
    }
}

/// Grid origins lo - f_a * eps_0 with f_a = frac(a / golden ratio). The same
/// origin is used at every scale, so dyadic grids stay nested and each
/// count sequence is monotone; at fine scales the offsets are spread over
/// the box, which removes most of the lattice-alignment bias.
inline constexpr int kGridShifts = 5;

inline double shift_fraction(int a) { return std::fmod(a * 0.6180339887498949, 1.0); }

/// Box counts of sorted 1D values, averaged over the shifted origins.
inline std::vector<double> count_sorted_1d(const std::vector<double>& sorted, const std::vector<double>& scales)
{
    std::vector<double> counts(scales.size(), 0.0);
    if (sorted.empty())
        return counts;
    for (int a = 0; a < kGridShifts; ++a) {
        const double origin = sorted.front() - shift_fraction(a) * scales.front();
        for (std::size_t k = 0; k < scales.size(); ++k) {
            std::size_t n = 0;
            double last = -1.0;
            for (double v : sorted) {
                const double box = std::floor((v - origin) / scales[k]);
                if (n == 0 || box != last) {
                    ++n;
                    last = box;
                }
            }
            counts[k] += static_cast<double>(n) / kGridShifts;
        }
    }
    return counts;
}

} // namespace detail

/// Box-counting dimension: OLS slope of log N(eps) over log(1/eps), with
/// N(eps) the occupied-box count averaged over detail::kGridShifts origins.
inline BoxCountFit box_count_dim(const PointCloud& cloud, const std::vector<double>& scales = dyadic_scales())
{
    detail::check_scales(scales);
    if (cloud.size() == 0)
        throw Error(ErrorCode::InvalidArgument, "cloud is empty");
    BoxCountFit fit;
    fit.scales = scales;
    const int dim = cloud.dim();
    if (dim == 1) {
        std::vector<double> v(cloud.points.data(), cloud.points.data() + cloud.size());
        std::sort(v.begin(), v.end());
        fit.counts = detail::count_sorted_1d(v, scales);
    } else {
        if (dim > 4)
            throw Error(ErrorCode::DimensionMismatch, "box counting supports up to four dimensions");
        const VectorXd lo = cloud.points.rowwise().minCoeff();
        std::vector<std::array<std::int64_t, 4>> keys(cloud.size());
        fit.counts.assign(scales.size(), 0.0);
        for (int a = 0; a < detail::kGridShifts; ++a) {
            const double shift = detail::shift_fraction(a) * scales.front();
            for (std::size_t k = 0; k < scales.size(); ++k) {
                for (std::size_t i = 0; i < cloud.size(); ++i) {
                    std::array<std::int64_t, 4> key{};
                    for (int d = 0; d < dim; ++d)
                        key[static_cast<std::size_t>(d)] = static_cast<std::int64_t>(std::floor(
                            (cloud.points(d, static_cast<Eigen::Index>(i)) - lo[d] + shift) / scales[k]));
                    keys[i] = key;
                }
                std::sort(keys.begin(), keys.end());
                fit.counts[k] += static_cast<double>(std::unique(keys.begin(), keys.end()) - keys.begin())
                                 / detail::kGridShifts;
            }
        }
    }
    fit_counts(fit);
    return fit;
}

// ---------------------------------------------------------------------------
// Sweeps

/// Pi(lambda, .) with the lambda-dependent work done once. Returns nullopt
/// outside the family domain.
class Projector {
public:
    Projector(const ProjectionFamily& family, const VectorXd& lambda) : family_(&family), lambda_(lambda)
    {
        const FamilySpec& spec = family.spec();
        if (const auto* f = std::get_if<MobiusOneParam>(&spec)) {
            mobius_ = exp_sl2(f->generator, lambda[0]);
        } else if (const auto* p = std::get_if<ProjectiveOneParam>(&spec)) {
            projective_ = exp_gl3(p->generator, lambda[0]);
        } else if (const auto* g = std::get_if<RotationGrassmann>(&spec)) {
            basis_ = grassmann_chart(g->n, g->m, lambda).basis;
        } else if (const auto* k = std::get_if<KleinClosestPoint>(&spec)) {
            basis_ = grassmann_chart(k->n, k->m, lambda).basis;
            klein_ = true;
        }
    }

    std::optional<VectorXd> operator()(const VectorXd& p) const
    {
        try {
            if (mobius_) {
                const ExtendedComplex z = mobius_apply(*mobius_, ExtendedComplex::finite(p[0], p[1]));
                if (z.is_infinity())
                    return std::nullopt;
                return VectorXd::Constant(1, z.re());
            }
            if (projective_) {
                const auto v = pi_standard(proj_apply(*projective_, HomPoint2::affine(p[0], p[1]))).affine();
                if (!v)
                    return std::nullopt;
                return VectorXd::Constant(1, *v);
            }
            if (basis_) {
                if (klein_ && !(p.norm() < 1.0))
                    return std::nullopt;
                return VectorXd(basis_->transpose() * p);
            }
            return family_->eval(lambda_, p);
        } catch (const Error&) {
            return std::nullopt;
        }
    }

private:
    const ProjectionFamily* family_;
    VectorXd lambda_;
    std::optional<MobiusMap> mobius_;
    std::optional<ProjectiveMap> projective_;
    std::optional<MatrixXd> basis_;
    bool klein_ = false;
};

struct SweepOptions {
    std::vector<double> scales = dyadic_scales();
    double margin = 0.1;
    /// dim A used for the target; estimated from the cloud when absent.
    std::optional<double> set_dimension;
    /// Points sampled for the fiber-preservation cross-check.
    std::size_t fiber_checks = 64;
};

struct SweepEntry {
    VectorXd lambda;
    BoxCountFit fit;
    std::size_t excluded = 0;
    bool exceptional = false;
    /// Measure of the occupied boxes at the finest scale.
    double covered_measure = 0.0;
};

struct DimSweepReport {
    std::string family;
    std::string set_id;
    std::vector<SweepEntry> entries;
    double set_dimension = 0.0;
    double cloud_estimate = 0.0; ///< box-count estimate of the unprojected cloud
    double target = 0.0;
    double margin = 0.1;
    /// Pi_lambda is constant along every sampled fiber of Pi_0 for every
    /// lambda, i.e. the images are reparametrizations of the same quotient.
    bool fiber_preserving = false;
    int target_dim = 1;

    std::vector<std::size_t> exceptional() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i].exceptional)
                out.push_back(i);
        return out;
    }
};

/// (j + 1/2) pi / count: an angle grid for rotation families avoiding the
/// coordinate directions.
inline std::vector<VectorXd> angle_grid(std::size_t count)
{
    std::vector<VectorXd> grid;
    for (std::size_t j = 0; j < count; ++j)
        grid.push_back(VectorXd::Constant(1, (static_cast<double>(j) + 0.5) * std::numbers::pi / static_cast<double>(count)
                                                 - std::numbers::pi / 2));
    return grid;
}

/// Evenly spaced scalar parameters in [lo, hi] (inclusive).
inline std::vector<VectorXd> linear_grid(double lo, double hi, std::size_t count)
{
    std::vector<VectorXd> grid;
    for (std::size_t j = 0; j < count; ++j)
        grid.push_back(VectorXd::Constant(1, count == 1 ? lo : lo + (hi - lo) * static_cast<double>(j) / (count - 1)));
    return grid;
}

namespace detail {

inline bool check_fiber_preserving(const ProjectionFamily& family, const PointCloud& cloud,
                                   const std::vector<VectorXd>& lambdas, std::size_t checks)
{
    const int m = family.target_dim();
    const int n = family.space_dim();
    if (std::holds_alternative<SphereClosestPoint>(family.spec()) || cloud.size() == 0)
        return false;
    // Fibers of Pi_0 are the translates of span(e_{m+1}..e_n).
    const std::size_t stride = std::max<std::size_t>(1, cloud.size() / std::max<std::size_t>(1, checks));
    for (const VectorXd& lambda : lambdas) {
        const Projector proj(family, lambda);
        for (std::size_t i = 0; i < cloud.size(); i += stride) {
            const VectorXd p = cloud.points.col(static_cast<Eigen::Index>(i));
            const auto base = proj(p);
            if (!base)
                continue;
            for (int j = m; j < n; ++j) {
                for (double s : {0.125, -0.25}) {
                    VectorXd q = p;
                    q[j] += s;
                    const auto other = proj(q);
                    if (other && (*other - *base).norm() > 1e-9 * (1.0 + base->norm()))
                        return false;
                }
            }
        }
    }
    return true;
}

} // namespace detail

inline DimSweepReport dim_sweep(const ProjectionFamily& family, const PointCloud& cloud,
                                const std::vector<VectorXd>& lambdas, const SweepOptions& opt = {},
                                std::string set_id = "cloud")
{
    if (lambdas.empty())
        throw Error(ErrorCode::EmptyGrid, "parameter grid is empty");
    if (cloud.dim() != family.space_dim())
        throw Error(ErrorCode::DimensionMismatch, "cloud and family disagree in dimension");
    for (const VectorXd& l : lambdas)
        if (l.size() != family.param_dim())
            throw Error(ErrorCode::DimensionMismatch, "parameter has the wrong dimension");

    DimSweepReport report;
    report.family = family.kind();
    report.set_id = std::move(set_id);
    report.margin = opt.margin;
    report.target_dim = family.target_dim();
    report.cloud_estimate = box_count_dim(cloud, opt.scales).slope;
    report.set_dimension = opt.set_dimension.value_or(report.cloud_estimate);
    report.target = std::min(static_cast<double>(family.target_dim()), report.set_dimension);
    report.entries.resize(lambdas.size());

    const int m = family.target_dim();
    parallel_for(lambdas.size(), [&](std::size_t li) {
        SweepEntry& e = report.entries[li];
        e.lambda = lambdas[li];
        const Projector proj(family, e.lambda);
        PointCloud image;
        image.points.resize(m, static_cast<Eigen::Index>(cloud.size()));
        Eigen::Index kept = 0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const auto v = proj(cloud.points.col(static_cast<Eigen::Index>(i)));
            if (!v || !v->allFinite()) {
                ++e.excluded;
                continue;
            }
            image.points.col(kept++) = *v;
        }
        image.points.conservativeResize(m, kept);
        if (kept == 0)
            return;
        e.fit = box_count_dim(image, opt.scales);
        e.covered_measure = static_cast<double>(e.fit.counts.back()) * std::pow(opt.scales.back(), m);
    });

    std::size_t empty = 0;
    for (SweepEntry& e : report.entries) {
        if (e.fit.counts.empty()) {
            ++empty;
            e.exceptional = true;
            continue;
        }
        e.exceptional = e.fit.slope < report.target - report.margin;
    }
    if (empty == report.entries.size())
        throw Error(ErrorCode::SingularPoint, "the cloud lies in singular fibers for every parameter");
    report.fiber_preserving = detail::check_fiber_preserving(family, cloud, lambdas, opt.fiber_checks);
    return report;
}

struct MarstrandSummary {
    double non_exceptional_fraction = 0.0;
    double median_estimate = 0.0;
    double min_estimate = 0.0;
    double max_estimate = 0.0;
    /// dim A > m: the covered-measure proxy is meaningful.
    bool dimension_exceeds_target = false;
    std::vector<double> covered_measure;
    double median_covered_measure = 0.0;
    /// The family commutes with the projection up to reparametrization.
    bool fails_globally_cross_check = false;
};

inline MarstrandSummary marstrand_report(const DimSweepReport& sweep)
{
    MarstrandSummary s;
    std::vector<double> estimates;
    std::size_t good = 0;
    for (const SweepEntry& e : sweep.entries) {
        if (!e.exceptional)
            ++good;
        if (!e.fit.counts.empty())
            estimates.push_back(e.fit.slope);
        s.covered_measure.push_back(e.covered_measure);
    }
    s.non_exceptional_fraction = sweep.entries.empty() ? 0.0 : static_cast<double>(good) / sweep.entries.size();
    auto median = [](std::vector<double> v) {
        if (v.empty())
            return 0.0;
        std::sort(v.begin(), v.end());
        const std::size_t h = v.size() / 2;
        return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    };
    if (!estimates.empty()) {
        s.median_estimate = median(estimates);
        s.min_estimate = *std::min_element(estimates.begin(), estimates.end());
        s.max_estimate = *std::max_element(estimates.begin(), estimates.end());
    }
    s.dimension_exceeds_target = sweep.set_dimension > sweep.target_dim;
    s.median_covered_measure = median(s.covered_measure);
    s.fails_globally_cross_check = sweep.fiber_preserving;
    return s;
}

} // namespace projlab
