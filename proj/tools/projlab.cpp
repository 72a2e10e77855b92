// projlab: command-line front end for scans, classification and sweeps.
//
// Exit status: 0 success, 2 invalid configuration, 3 domain error during a run.

#include "projlab/json_io.hpp"
#include "projlab/projlab.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace projlab;
using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Output helpers

std::string num(double v)
{
    if (v == 0.0)
        v = 0.0; // drop the sign of -0
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary)
    {
        if (!out_)
            throw ConfigError("cannot write " + path.string());
        row(header);
    }
    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << quoted(cells[i]);
        out_ << '\n';
    }

    /// RFC 4180 quoting for labels such as seed points "1,0".
    static std::string quoted(const std::string& cell)
    {
        if (cell.find_first_of(",\"\n") == std::string::npos)
            return cell;
        std::string q = "\"";
        for (char c : cell)
            q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }

private:
    std::ofstream out_;
};

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Parsing

std::vector<double> parse_list(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    std::string cleaned;
    for (char c : text)
        cleaned += (c == ';' || c == ' ' || c == '\t') ? ',' : c;
    std::stringstream ss(cleaned);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size() || !std::isfinite(v))
            throw ConfigError("malformed number \"" + item + "\" in " + what);
        out.push_back(v);
    }
    return out;
}

bool has_letters(const std::string& s)
{
    return std::any_of(s.begin(), s.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)) && c != 'e' && c != 'E'; });
}

struct Options {
    std::string family = "mobius";
    std::string gen;
    std::string conj;
    std::string region;
    std::string grid = "100";
    std::size_t samples = 0; // 0: command default
    std::uint64_t seed = 1;
    double tol = 1e-6;
    std::string out = ".";
    std::string preset;
    int n = 2;
    int m = 1;
    std::string params;
    std::string from;
    std::string config;
    int directions = 32;
    int steps_per_octave = 1;
    double param_radius = 0.0;
    std::vector<std::string> criteria;
};

struct Generator {
    FamilySpec spec;
    std::optional<MobiusMap> mobius_conj;
    std::optional<ProjectiveMap> projective_conj;
    std::string name;
};

Generator parse_family(const Options& o)
{
    Generator g;
    const std::string& fam = o.family;
    if (fam == "mobius") {
        if (o.gen.empty())
            throw ConfigError("--gen is required for the mobius family");
        if (has_letters(o.gen)) {
            const auto p = presets::find_mobius(o.gen);
            if (!p)
                throw ConfigError("unknown mobius preset \"" + o.gen + "\"");
            g.spec = MobiusOneParam{p->generator};
            g.mobius_conj = p->conjugator;
            g.name = p->name;
        } else {
            const auto v = parse_list(o.gen, "--gen");
            if (v.size() != 8)
                throw ConfigError("a mobius generator needs 8 numbers (re,im pairs, row-major)");
            g.spec = MobiusOneParam{SL2CGenerator(cplx(v[0], v[1]), cplx(v[2], v[3]), cplx(v[4], v[5]), cplx(v[6], v[7]))};
            g.name = "custom";
        }
        if (!o.conj.empty()) {
            const auto v = parse_list(o.conj, "--conj");
            if (v.size() != 8)
                throw ConfigError("a mobius conjugator needs 8 numbers");
            g.mobius_conj = MobiusMap((Mat2c() << cplx(v[0], v[1]), cplx(v[2], v[3]), cplx(v[4], v[5]), cplx(v[6], v[7])).finished());
        }
    } else if (fam == "projective") {
        if (o.gen.empty())
            throw ConfigError("--gen is required for the projective family");
        if (has_letters(o.gen)) {
            const auto p = presets::find_projective(o.gen);
            if (!p)
                throw ConfigError("unknown projective preset \"" + o.gen + "\"");
            g.spec = ProjectiveOneParam{p->generator};
            g.projective_conj = p->conjugator;
            g.name = p->name;
        } else {
            const auto v = parse_list(o.gen, "--gen");
            if (v.size() != 9)
                throw ConfigError("a projective generator needs 9 numbers (row-major)");
            g.spec = ProjectiveOneParam{GL3Generator(Mat3(Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v.data())))};
            g.name = "custom";
        }
        if (!o.conj.empty()) {
            const auto v = parse_list(o.conj, "--conj");
            if (v.size() != 9)
                throw ConfigError("a projective conjugator needs 9 numbers");
            g.projective_conj = ProjectiveMap(Mat3(Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v.data())));
        }
    } else if (fam == "mobius-full") {
        g.spec = MobiusFull{};
    } else if (fam == "projective-full") {
        g.spec = ProjectiveFull{};
    } else if (fam == "grassmann" || fam == "rotation") {
        g.spec = RotationGrassmann{o.n, o.m};
    } else if (fam == "sphere") {
        g.spec = SphereClosestPoint{o.n, o.m};
    } else if (fam == "klein") {
        g.spec = KleinClosestPoint{o.n, o.m};
    } else {
        throw ConfigError("unknown family \"" + fam + "\"");
    }
    if (g.name.empty())
        g.name = family_kind(g.spec);
    return g;
}

Region parse_region(const Options& o, const ProjectionFamily& family)
{
    const int n = family.space_dim();
    if (o.region.empty()) {
        if (n == 2 && family.spec().index() <= 3)
            return Region::box2(-1, 1, -1, 1);
        if (std::holds_alternative<SphereClosestPoint>(family.spec())) {
            VectorXd lo = VectorXd::Constant(n, -0.5), hi = VectorXd::Constant(n, 0.5);
            lo[n - 1] = 0.5;
            hi[n - 1] = 1.0;
            return Region::box(lo, hi);
        }
        return Region::ball(VectorXd::Zero(n), 0.9);
    }
    if (o.region.rfind("ball:", 0) == 0) {
        const auto v = parse_list(o.region.substr(5), "--region");
        if (v.size() == 1)
            return Region::ball(VectorXd::Zero(n), v[0]);
        if (static_cast<int>(v.size()) != n + 1)
            throw ConfigError("ball region needs r or n center coordinates and r");
        return Region::ball(Eigen::Map<const VectorXd>(v.data(), n), v.back());
    }
    const auto v = parse_list(o.region, "--region");
    if (static_cast<int>(v.size()) != 2 * n)
        throw ConfigError("box region needs lo,hi per coordinate (" + std::to_string(2 * n) + " numbers)");
    VectorXd lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
        lo[i] = v[static_cast<std::size_t>(2 * i)];
        hi[i] = v[static_cast<std::size_t>(2 * i + 1)];
    }
    const Region r = Region::box(lo, hi);
    if (r.empty())
        throw ConfigError("region is empty");
    return r;
}

Grid2 parse_grid(const Options& o)
{
    const auto v = parse_list(o.grid, "--grid");
    if (v.empty() || v.size() > 2)
        throw ConfigError("--grid takes n or nx,ny");
    Grid2 g;
    g.nx = static_cast<int>(v[0]);
    g.ny = static_cast<int>(v.size() == 2 ? v[1] : v[0]);
    if (g.nx < 1 || g.ny < 1 || g.nx != v[0] || g.ny != v.back())
        throw ConfigError("grid sizes must be positive integers");
    return g;
}

struct ParamRange {
    double lo, hi;
    std::size_t count;
};

std::optional<ParamRange> parse_params(const Options& o)
{
    if (o.params.empty())
        return std::nullopt;
    const auto v = parse_list(o.params, "--params");
    if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2]))
        throw ConfigError("--params takes lo,hi,count");
    return ParamRange{v[0], v[1], static_cast<std::size_t>(v[2])};
}

Criterion parse_criterion(const std::string& s)
{
    if (s == "auto")
        return Criterion::Auto;
    if (s == "gram")
        return Criterion::Gram;
    if (s == "max-partial")
        return Criterion::MaxPartial;
    if (s == "scalar")
        return Criterion::Scalar;
    throw ConfigError("unknown criterion \"" + s + "\"");
}

fs::path out_dir(const Options& o)
{
    fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory " + dir.string());
    return dir;
}

std::string locus_label_with_transport(const LocusDescription& locus, const Generator& g, json& extra)
{
    if (g.projective_conj) {
        const LocusDescription t = transport_locus(locus, *g.projective_conj);
        extra["native_line"] = line_label(locus);
        extra["transported_locus"] = io::to_json(t);
        return line_label(t) + " (transported)";
    }
    if (g.mobius_conj) {
        const LocusDescription t = transport_locus(locus, *g.mobius_conj);
        extra["native_line"] = line_label(locus);
        extra["transported_locus"] = io::to_json(t);
        return line_label(t) + " (transported)";
    }
    return line_label(locus);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_scan(const Options& o)
{
    const Generator g = parse_family(o);
    const ProjectionFamily family(g.spec);
    const Region region = parse_region(o, family);
    const fs::path dir = out_dir(o);

    Sampling s;
    s.triples = o.samples ? o.samples : 20000;
    s.seed = o.seed;
    s.param_radius = o.param_radius;
    s.steps_per_octave = o.steps_per_octave;
    s.criterion = o.criteria.empty() ? Criterion::Auto : parse_criterion(o.criteria.front());

    json report;
    report["command"] = "scan";
    report["family"] = io::to_json(g.spec);
    report["preset"] = g.name;
    const ScanReport constant = estimate_constant(family, region, s);
    report["constant_scan"] = io::to_json(constant);
    report["seed"] = o.seed;

    std::vector<DegeneratePoint> degenerate = constant.degenerate_points;
    if (family.space_dim() == 2 && region.kind == Region::Kind::Box) {
        Grid2 grid = parse_grid(o);
        grid.x0 = region.lo[0];
        grid.x1 = region.hi[0];
        grid.y0 = region.lo[1];
        grid.y1 = region.hi[1];
        DegeneracyOptions dopt;
        dopt.directions = o.directions;
        dopt.tol = o.tol;
        const ScanReport deg = empirical_degeneracy_scan(family, grid, dopt);
        report["degeneracy_scan"] = io::to_json(deg);
        degenerate = deg.degenerate_points;
        if (const auto* f = std::get_if<MobiusOneParam>(&g.spec))
            report["predicted_locus"] = io::to_json(predict_locus_mobius(f->generator));
        else if (const auto* p = std::get_if<ProjectiveOneParam>(&g.spec))
            report["predicted_locus"] = io::to_json(predict_locus_projective(p->generator));
    }
    write_json(dir / "scan.json", report);

    std::vector<std::string> header;
    const int dim = family.space_dim();
    const char* names[] = {"x", "y", "z", "w", "u"};
    for (int i = 0; i < dim; ++i)
        header.emplace_back(i < 5 ? names[i] : "p" + std::to_string(i));
    header.emplace_back("min_derivative");
    header.emplace_back("phi_at_min");
    CsvWriter csv(dir / "degenerate.csv", header);
    for (const DegeneratePoint& d : degenerate) {
        std::vector<std::string> row;
        for (Eigen::Index i = 0; i < d.point.size(); ++i)
            row.push_back(num(d.point[i]));
        row.push_back(num(d.min_derivative));
        row.push_back(num(d.phi_at_min));
        csv.row(row);
    }
    return 0;
}

json locus_json(const Generator& g, std::string& label)
{
    LocusDescription locus;
    if (const auto* f = std::get_if<MobiusOneParam>(&g.spec))
        locus = predict_locus_mobius(f->generator);
    else if (const auto* p = std::get_if<ProjectiveOneParam>(&g.spec))
        locus = predict_locus_projective(p->generator);
    else
        throw ConfigError("loci are predicted for one-parameter mobius or projective families only");
    json out;
    out["locus"] = io::to_json(locus);
    label = locus_label_with_transport(locus, g, out);
    out["line"] = label;
    return out;
}

int cmd_locus(const Options& o)
{
    const Generator g = parse_family(o);
    std::string label;
    json out = locus_json(g, label);
    out["command"] = "locus";
    out["family"] = io::to_json(g.spec);
    out["preset"] = g.name;
    write_json(out_dir(o) / "locus.json", out);
    std::cout << label << '\n';
    return 0;
}

int cmd_classify(const Options& o)
{
    const Generator g = parse_family(o);
    ClassificationVerdict v;
    if (const auto* f = std::get_if<MobiusOneParam>(&g.spec))
        v = classify_mobius(f->generator);
    else if (const auto* p = std::get_if<ProjectiveOneParam>(&g.spec))
        v = classify_projective(p->generator);
    else
        throw ConfigError("classify needs a one-parameter mobius or projective family");
    json out = io::to_json(v);
    out["command"] = "classify";
    out["family"] = io::to_json(g.spec);
    out["preset"] = g.name;
    if (out.contains("line"))
        out["line"] = locus_label_with_transport(v.locus, g, out);
    write_json(out_dir(o) / "classify.json", out);
    std::cout << to_string(v.kind);
    if (out.contains("line"))
        std::cout << ' ' << out["line"].get<std::string>();
    std::cout << '\n';
    return 0;
}

int cmd_sweep(const Options& o)
{
    const Generator g = parse_family(o);
    const ProjectionFamily family(g.spec);
    const std::string set_name = o.preset.empty() ? "cantor9" : o.preset;
    const auto system = presets::find_set(set_name);
    if (!system)
        throw ConfigError("unknown set preset \"" + set_name + "\"");
    if (family.space_dim() != system->dim)
        throw ConfigError("set presets are planar; choose a planar family");
    const std::size_t count = o.samples ? o.samples : 100000;
    const PointCloud cloud = ifs_generate(*system, count, o.seed);

    std::vector<VectorXd> lambdas;
    const auto range = parse_params(o);
    const int k = family.param_dim();
    if (range) {
        if (k != 1)
            throw ConfigError("--params describes one-dimensional parameter grids only");
        lambdas = linear_grid(range->lo, range->hi, range->count);
    } else if (std::holds_alternative<RotationGrassmann>(g.spec) && k == 1) {
        lambdas = angle_grid(64);
    } else if (k == 1) {
        lambdas = linear_grid(-1.0, 1.0, 65);
    } else {
        Rng rng(o.seed ^ 0x5eedULL);
        for (int i = 0; i < 64; ++i)
            lambdas.push_back(detail::random_unit(rng, k) * rng.uniform(0.0, 0.5));
    }

    SweepOptions sopt;
    sopt.set_dimension = similarity_dimension(*system);
    const DimSweepReport report = dim_sweep(family, cloud, lambdas, sopt, set_name);
    const fs::path dir = out_dir(o);
    json out = io::to_json(report);
    out["command"] = "sweep";
    out["family_spec"] = io::to_json(g.spec);
    out["points"] = count;
    out["seed"] = o.seed;
    write_json(dir / "sweep.json", out);

    std::vector<std::string> header;
    for (int i = 0; i < k; ++i)
        header.push_back(k == 1 ? "lambda" : "lambda" + std::to_string(i + 1));
    for (const char* h : {"slope", "r_squared", "excluded_count", "exceptional"})
        header.emplace_back(h);
    CsvWriter csv(dir / "sweep.csv", header);
    for (const SweepEntry& e : report.entries) {
        std::vector<std::string> row;
        for (Eigen::Index i = 0; i < e.lambda.size(); ++i)
            row.push_back(num(e.lambda[i]));
        const bool empty = e.fit.counts.empty();
        row.push_back(empty ? "nan" : num(e.fit.slope));
        row.push_back(empty ? "nan" : num(e.fit.r_squared));
        row.push_back(std::to_string(e.excluded));
        row.push_back(e.exceptional ? "1" : "0");
        csv.row(row);
    }
    const MarstrandSummary summary = marstrand_report(report);
    std::cout << "median " << num(summary.median_estimate) << " target " << num(report.target)
              << " non_exceptional " << num(summary.non_exceptional_fraction) << '\n';
    return 0;
}

/// Seed points: "inf", "infY", or "x,y" items separated by ';'.
std::vector<std::pair<std::string, std::optional<Vec2>>> parse_seeds(const std::string& text, bool projective)
{
    std::vector<std::pair<std::string, std::optional<Vec2>>> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.empty())
            continue;
        if (item == "inf" || item == "infY" || item == "inf_Y") {
            seeds.emplace_back(projective ? "infY" : "inf", std::nullopt);
            continue;
        }
        const auto v = parse_list(item, "--from");
        if (v.size() == 1)
            seeds.emplace_back(item, Vec2(v[0], 0.0));
        else if (v.size() == 2)
            seeds.emplace_back(item, Vec2(v[0], v[1]));
        else
            throw ConfigError("seed points are inf, infY, x or x,y");
    }
    if (seeds.empty())
        throw ConfigError("--from lists no seed points");
    return seeds;
}

int cmd_orbit(const Options& o)
{
    const Generator g = parse_family(o);
    const bool mobius = std::holds_alternative<MobiusOneParam>(g.spec);
    if (!mobius && !std::holds_alternative<ProjectiveOneParam>(g.spec))
        throw ConfigError("orbit needs a one-parameter mobius or projective family");
    const ProjectionFamily family(g.spec);
    const Region region = parse_region(o, family);
    if (region.kind != Region::Kind::Box)
        throw ConfigError("orbit plots need a box region");
    const auto range = parse_params(o).value_or(ParamRange{-std::numbers::pi, std::numbers::pi, 401});
    const auto seeds = parse_seeds(o.from.empty() ? (mobius ? "inf" : "infY") : o.from, !mobius);
    constexpr double kClip = 1e3;

    // Points are produced in generator coordinates and shown in the picture of
    // the conjugator, when there is one.
    auto show = [&](const ExtendedComplex& z) -> std::optional<Vec2> {
        ExtendedComplex w = g.mobius_conj ? mobius_apply(g.mobius_conj->inverse(), z) : z;
        if (w.is_infinity() || std::abs(w.value()) > kClip)
            return std::nullopt;
        return Vec2(w.re(), w.im());
    };
    auto show_p = [&](const HomPoint2& p) -> std::optional<Vec2> {
        const HomPoint2 q = g.projective_conj ? proj_apply(g.projective_conj->inverse(), p) : p;
        const auto a = q.affine();
        if (!a || a->cwiseAbs().maxCoeff() > kClip)
            return std::nullopt;
        return a;
    };

    CsvWriter csv(out_dir(o) / "orbit.csv", {"curve", "id", "t", "x", "y"});
    auto emit = [&](const std::string& curve, const std::string& id, double t, const std::optional<Vec2>& p) {
        if (p)
            csv.row({curve, id, num(t), num((*p)[0]), num((*p)[1])});
    };

    for (const auto& [id, seed] : seeds) {
        for (std::size_t k = 0; k < range.count; ++k) {
            const double t = range.count == 1 ? range.lo : range.lo + (range.hi - range.lo) * k / (range.count - 1);
            if (mobius) {
                const auto& a = std::get<MobiusOneParam>(g.spec).generator;
                const ExtendedComplex z = seed ? ExtendedComplex::finite((*seed)[0], (*seed)[1]) : ExtendedComplex::infinity();
                emit("orbit", id, t, show(mobius_apply(exp_sl2(a, t), z)));
            } else {
                const auto& a = std::get<ProjectiveOneParam>(g.spec).generator;
                const HomPoint2 p = seed ? HomPoint2::affine((*seed)[0], (*seed)[1]) : HomPoint2::infinity_y();
                emit("orbit", id, t, show_p(proj_apply(exp_gl3(a, t), p)));
            }
        }
    }

    // Fibers of the standard projection: vertical lines x = c.
    const int fibers = 9, steps = 101;
    for (int f = 0; f < fibers; ++f) {
        const double c = region.lo[0] + (region.hi[0] - region.lo[0]) * f / (fibers - 1);
        for (int s = 0; s < steps; ++s) {
            const double y = region.lo[1] + (region.hi[1] - region.lo[1]) * s / (steps - 1);
            const std::string id = "x=" + num(c);
            if (mobius)
                emit("fiber", id, y, show(ExtendedComplex::finite(c, y)));
            else
                emit("fiber", id, y, show_p(HomPoint2::affine(c, y)));
        }
    }

    // Predicted locus, in the displayed picture.
    std::string label;
    (void)locus_json(g, label);
    LocusDescription locus = mobius ? predict_locus_mobius(std::get<MobiusOneParam>(g.spec).generator)
                                    : predict_locus_projective(std::get<ProjectiveOneParam>(g.spec).generator);
    if (g.projective_conj)
        locus = transport_locus(locus, *g.projective_conj);
    if (g.mobius_conj)
        locus = transport_locus(locus, *g.mobius_conj);
    const std::string id = line_label(locus);
    if (locus.kind == LocusDescription::Kind::AffineLine) {
        const Vec2 foot = locus.line.foot(), dir = locus.line.direction();
        const double half = region.diameter();
        for (int s = 0; s < steps; ++s) {
            const double u = -half + 2.0 * half * s / (steps - 1);
            emit("locus", id, u, Vec2(foot + u * dir));
        }
    } else if (locus.kind == LocusDescription::Kind::Circle) {
        for (int s = 0; s < steps; ++s) {
            const double a = 2.0 * std::numbers::pi * s / (steps - 1);
            emit("locus", id, a, Vec2(locus.circle.cx + locus.circle.r * std::cos(a), locus.circle.cy + locus.circle.r * std::sin(a)));
        }
    }
    return 0;
}

int cmd_exp_check(const Options& o)
{
    const std::size_t count = o.samples ? o.samples : 100;
    json out;
    out["command"] = "exp-check";
    out["tolerance"] = 1e-10;
    out["terms"] = 20;
    double worst2 = 0.0, worst3 = 0.0;
    auto diff2 = [](const SL2CGenerator& a, double t) {
        const Mat2c e = exp_sl2(a, t).matrix();
        const Mat2c ref = taylor_exp(Mat2c(a.matrix() * t));
        // SL(2,C) normalization may flip the overall sign.
        return std::min((e - ref).cwiseAbs().maxCoeff(), (e + ref).cwiseAbs().maxCoeff());
    };
    auto diff3 = [](const GL3Generator& a, double t) {
        return (exp_gl3(a, t).matrix() - taylor_exp(Mat3(a.matrix() * t))).cwiseAbs().maxCoeff();
    };
    if (!o.gen.empty()) {
        const Generator g = parse_family(o);
        const auto range = parse_params(o).value_or(ParamRange{-2.0, 2.0, 41});
        json rows = json::array();
        for (std::size_t k = 0; k < range.count; ++k) {
            const double t = range.count == 1 ? range.lo : range.lo + (range.hi - range.lo) * k / (range.count - 1);
            double d = 0.0;
            if (const auto* f = std::get_if<MobiusOneParam>(&g.spec))
                d = diff2(f->generator, t);
            else if (const auto* p = std::get_if<ProjectiveOneParam>(&g.spec))
                d = diff3(p->generator, t);
            else
                throw ConfigError("exp-check needs a one-parameter family");
            (std::holds_alternative<MobiusOneParam>(g.spec) ? worst2 : worst3) = std::max(
                std::holds_alternative<MobiusOneParam>(g.spec) ? worst2 : worst3, d);
            rows.push_back({{"t", t}, {"max_entry_error", d}});
        }
        out["family"] = io::to_json(g.spec);
        out["rows"] = rows;
    } else {
        Rng rng(o.seed);
        for (std::size_t i = 0; i < count; ++i) {
            Mat2c a;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    a(r, c) = cplx(rng.normal(), rng.normal());
            a(1, 1) = -a(0, 0);
            a *= rng.uniform(0.0, 2.0) / a.norm();
            worst2 = std::max(worst2, diff2(SL2CGenerator(a), rng.uniform(-2.0, 2.0)));
            Mat3 b;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    b(r, c) = rng.normal();
            b *= rng.uniform(0.0, 2.0) / b.norm();
            worst3 = std::max(worst3, diff3(GL3Generator(b), rng.uniform(-2.0, 2.0)));
        }
        out["samples"] = count;
        out["seed"] = o.seed;
    }
    out["max_error_sl2"] = worst2;
    out["max_error_gl3"] = worst3;
    out["pass"] = worst2 < 1e-10 && worst3 < 1e-10;
    write_json(out_dir(o) / "exp-check.json", out);
    std::cout << (out["pass"].get<bool>() ? "pass" : "fail") << " sl2 " << num(worst2) << " gl3 " << num(worst3) << '\n';
    return out["pass"].get<bool>() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Config files

/// Turns a JSON object of flag values into argv-style tokens. The tokens are
/// placed before the command-line flags so explicit flags win.
std::vector<std::string> config_tokens(const std::string& path, const std::string& command, const CLI::App& sub)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config " + path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object())
        throw ConfigError("config must be a JSON object");
    std::vector<std::string> tokens;
    for (const auto& [key, value] : cfg.items()) {
        if (key == "command") {
            if (!value.is_string() || value.get<std::string>() != command)
                throw ConfigError("config command does not match the subcommand");
            continue;
        }
        if (key == "config" || sub.get_option_no_throw("--" + key) == nullptr)
            throw ConfigError("unknown config key \"" + key + "\"");
        std::string text;
        if (value.is_string())
            text = value.get<std::string>();
        else if (value.is_number_integer())
            text = std::to_string(value.get<long long>());
        else if (value.is_number())
            text = num(value.get<double>());
        else if (value.is_array()) {
            for (const auto& e : value) {
                if (!e.is_number())
                    throw ConfigError("config arrays must be numeric: " + key);
                text += (text.empty() ? "" : ",") + num(e.get<double>());
            }
        } else
            throw ConfigError("unsupported config value for " + key);
        tokens.push_back("--" + key);
        tokens.push_back(text);
    }
    return tokens;
}

void add_common(CLI::App& sub, Options& o)
{
    sub.add_option("--family", o.family, "mobius | projective | mobius-full | projective-full | grassmann | sphere | klein");
    sub.add_option("--gen", o.gen, "generator: flat row-major list (complex as re,im) or preset name");
    sub.add_option("--conj", o.conj, "conjugator used to transport loci and plots");
    sub.add_option("--region", o.region, "x0,x1,y0,y1 (lo,hi per coordinate) or ball:r");
    sub.add_option("--grid", o.grid, "lattice size n or nx,ny");
    sub.add_option("--samples", o.samples, "triples, chaos-game points or random generators");
    sub.add_option("--seed", o.seed, "random seed");
    sub.add_option("--tol", o.tol, "degeneracy tolerance");
    sub.add_option("--out", o.out, "output directory");
    sub.add_option("--preset", o.preset, "set preset: cantor9 | c14 | segment | square | point");
    sub.add_option("--n", o.n, "ambient dimension (grassmann, sphere, klein)");
    sub.add_option("--m", o.m, "target dimension (grassmann, sphere, klein)");
    sub.add_option("--params", o.params, "parameter grid lo,hi,count");
    sub.add_option("--from", o.from, "orbit seed points: inf, infY or x,y separated by ';'");
    sub.add_option("--config", o.config, "JSON file of flag values");
    sub.add_option("--directions", o.directions, "offset directions per lattice point");
    sub.add_option("--steps-per-octave", o.steps_per_octave, "resolution of the constant grid");
    sub.add_option("--param-radius", o.param_radius, "sample parameters in this ball around the identity");
    sub.add_option("--criterion", o.criteria, "auto | gram | max-partial | scalar");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"projlab: transversality and projection experiments"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    Options opt;
    struct Command {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const Command commands[] = {
        {"scan", "estimate transversality constants and locate degenerate points", cmd_scan},
        {"classify", "classify a one-parameter subgroup", cmd_classify},
        {"locus", "predict the non-transversality locus", cmd_locus},
        {"sweep", "box-counting dimension of projections along a parameter grid", cmd_sweep},
        {"orbit", "orbit, fiber and locus polylines for plotting", cmd_orbit},
        {"exp-check", "compare matrix exponentials with a truncated Taylor series", cmd_exp_check},
    };
    std::vector<CLI::App*> subs;
    for (const Command& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        add_common(*sub, opt);
        subs.push_back(sub);
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        // Expand --config before parsing so that explicit flags override it.
        for (std::size_t i = 0; i + 1 < args.size(); ++i) {
            if (args[i] != "--config")
                continue;
            CLI::App* sub = nullptr;
            for (CLI::App* s : subs)
                if (!args.empty() && args[0] == s->get_name())
                    sub = s;
            if (!sub)
                throw ConfigError("--config must follow a subcommand");
            const auto tokens = config_tokens(args[i + 1], args[0], *sub);
            args.insert(args.begin() + 1, tokens.begin(), tokens.end());
            break;
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    int status = 0;
    try {
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed())
                status = commands[i].run(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        const bool validation = e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::ZeroGenerator
                                || e.code() == ErrorCode::DimensionMismatch || e.code() == ErrorCode::ChartOverflow;
        std::cerr << (validation ? "config error: " : "domain error: ") << e.what() << '\n';
        return validation ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "elapsed " << secs << " s\n";
    return status;
}
