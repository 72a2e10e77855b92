#pragma once

// JSON forms of matrices, family specs and reports. Matrices are row-major
// nested arrays; complex entries are [re, im].

#include "projlab/dimension.hpp"
#include "projlab/families.hpp"
#include "projlab/transversality.hpp"

#include "json.hpp"

#include <string>

namespace projlab::io {

using nlohmann::json;

inline json to_json(const VectorXd& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

inline json to_json(const Mat2c& m)
{
    json out = json::array();
    for (int i = 0; i < 2; ++i) {
        json row = json::array();
        for (int j = 0; j < 2; ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        out.push_back(row);
    }
    return out;
}

inline json to_json(const Mat3& m)
{
    json out = json::array();
    for (int i = 0; i < 3; ++i)
        out.push_back({m(i, 0), m(i, 1), m(i, 2)});
    return out;
}

namespace detail {

inline double number(const json& j)
{
    if (!j.is_number())
        throw Error(ErrorCode::InvalidArgument, "expected a number, got " + j.dump());
    return j.get<double>();
}

inline const json& row(const json& j, std::size_t n)
{
    if (!j.is_array() || j.size() != n)
        throw Error(ErrorCode::InvalidArgument, "expected an array of length " + std::to_string(n));
    return j;
}

} // namespace detail

inline Mat2c mat2c_from_json(const json& j)
{
    Mat2c m;
    detail::row(j, 2);
    for (std::size_t i = 0; i < 2; ++i) {
        detail::row(j[i], 2);
        for (std::size_t k = 0; k < 2; ++k) {
            const json& e = j[i][k];
            if (e.is_number())
                m(static_cast<int>(i), static_cast<int>(k)) = cplx(e.get<double>(), 0.0);
            else {
                detail::row(e, 2);
                m(static_cast<int>(i), static_cast<int>(k)) = cplx(detail::number(e[0]), detail::number(e[1]));
            }
        }
    }
    return m;
}

inline Mat3 mat3_from_json(const json& j)
{
    Mat3 m;
    detail::row(j, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        detail::row(j[i], 3);
        for (std::size_t k = 0; k < 3; ++k)
            m(static_cast<int>(i), static_cast<int>(k)) = detail::number(j[i][k]);
    }
    return m;
}

inline json to_json(const FamilySpec& spec)
{
    json out;
    out["kind"] = family_kind(spec);
    if (const auto* f = std::get_if<MobiusOneParam>(&spec))
        out["generator"] = to_json(f->generator.matrix());
    else if (const auto* p = std::get_if<ProjectiveOneParam>(&spec))
        out["generator"] = to_json(p->generator.matrix());
    else if (const auto* g = std::get_if<RotationGrassmann>(&spec)) {
        out["n"] = g->n;
        out["m"] = g->m;
    } else if (const auto* s = std::get_if<SphereClosestPoint>(&spec)) {
        out["n"] = s->n;
        out["m"] = s->m;
    } else if (const auto* k = std::get_if<KleinClosestPoint>(&spec)) {
        out["n"] = k->n;
        out["m"] = k->m;
    }
    return out;
}

inline FamilySpec family_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw Error(ErrorCode::InvalidArgument, "family spec needs a string \"kind\"");
    for (const auto& [key, _] : j.items())
        if (key != "kind" && key != "generator" && key != "n" && key != "m")
            throw Error(ErrorCode::InvalidArgument, "unknown family key \"" + key + "\"");
    const std::string kind = j["kind"];
    auto dims = [&]() -> std::pair<int, int> {
        if (!j.contains("n") || !j.contains("m") || !j["n"].is_number_integer() || !j["m"].is_number_integer())
            throw Error(ErrorCode::InvalidArgument, kind + " needs integer n and m");
        return {j["n"].get<int>(), j["m"].get<int>()};
    };
    if (kind == "mobius")
        return MobiusOneParam{SL2CGenerator(mat2c_from_json(j.at("generator")))};
    if (kind == "projective")
        return ProjectiveOneParam{GL3Generator(mat3_from_json(j.at("generator")))};
    if (kind == "mobius-full")
        return MobiusFull{};
    if (kind == "projective-full")
        return ProjectiveFull{};
    if (kind == "grassmann") {
        const auto [n, m] = dims();
        return RotationGrassmann{n, m};
    }
    if (kind == "sphere") {
        const auto [n, m] = dims();
        return SphereClosestPoint{n, m};
    }
    if (kind == "klein") {
        const auto [n, m] = dims();
        return KleinClosestPoint{n, m};
    }
    throw Error(ErrorCode::InvalidArgument, "unknown family kind \"" + kind + "\"");
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const Triple& t) { return {{"lambda", to_json(t.lambda)}, {"v", to_json(t.v)}, {"w", to_json(t.w)}}; }

inline json to_json(const ScanReport& r)
{
    json out;
    out["family"] = r.family;
    out["region"] = r.region;
    out["samples"] = r.samples;
    out["grid"] = {{"nx", r.grid_nx}, {"ny", r.grid_ny}, {"step", r.grid_step}};
    out["best_constant"] = r.best_constant;
    out["worst_triple"] = r.worst_triple ? to_json(*r.worst_triple) : json(nullptr);
    out["degenerate_count"] = r.degenerate_points.size();
    out["stats"] = {{"evaluated", r.stats.evaluated}, {"skipped", r.stats.skipped}};
    return out;
}

inline json to_json(const LocusDescription& l)
{
    json out;
    out["kind"] = std::string(to_string(l.kind));
    out["label"] = line_label(l);
    if (l.kind == LocusDescription::Kind::AffineLine)
        out["line"] = {{"a", l.line.a}, {"b", l.line.b}, {"c", l.line.c}, {"vertical", l.line.is_vertical()}};
    else
        out["line"] = nullptr;
    if (l.kind == LocusDescription::Kind::Circle)
        out["circle"] = {{"cx", l.circle.cx}, {"cy", l.circle.cy}, {"r", l.circle.r}};
    out["singular_orbit"] = l.singular_orbit;
    out["singular_fixed"] = l.singular_fixed;
    return out;
}

inline json to_json(const ClassificationVerdict& v)
{
    json out;
    out["verdict"] = std::string(to_string(v.kind));
    out["case"] = v.case_label;
    out["reason"] = v.reason;
    out["locus"] = to_json(v.locus);
    if (v.kind == VerdictKind::FailsOnLine || v.kind == VerdictKind::HoldsWithArtifactLocus)
        out["line"] = line_label(v.locus);
    out["max_orbit_distance"] = v.max_orbit_distance;
    json samples = json::array();
    // A coarse subsample keeps the report readable; orbit CSVs carry the rest.
    const std::size_t stride = std::max<std::size_t>(1, v.orbit.size() / 20);
    for (std::size_t i = 0; i < v.orbit.size(); i += stride) {
        const OrbitSample& s = v.orbit[i];
        json js = {{"t", s.t}, {"distance", s.distance}};
        if (s.at_infinity)
            js["point"] = "infinity";
        else
            js["point"] = {s.x, s.y};
        samples.push_back(js);
    }
    out["orbit_samples"] = samples;
    return out;
}

inline json to_json(const BoxCountFit& f)
{
    return {{"scales", f.scales}, {"counts", f.counts}, {"slope", f.slope}, {"r_squared", f.r_squared},
            {"reliable", f.reliable}};
}

inline json to_json(const MarstrandSummary& s)
{
    return {{"non_exceptional_fraction", s.non_exceptional_fraction},
            {"median_estimate", s.median_estimate},
            {"min_estimate", s.min_estimate},
            {"max_estimate", s.max_estimate},
            {"dimension_exceeds_target", s.dimension_exceeds_target},
            {"median_covered_measure", s.median_covered_measure},
            {"fails_globally_cross_check", s.fails_globally_cross_check}};
}

inline json to_json(const DimSweepReport& r)
{
    json out;
    out["family"] = r.family;
    out["set"] = r.set_id;
    out["set_dimension"] = r.set_dimension;
    out["cloud_estimate"] = r.cloud_estimate;
    out["target"] = r.target;
    out["margin"] = r.margin;
    out["fiber_preserving"] = r.fiber_preserving;
    json entries = json::array();
    for (const SweepEntry& e : r.entries) {
        json je = {{"lambda", to_json(e.lambda)}, {"excluded", e.excluded}, {"exceptional", e.exceptional},
                   {"covered_measure", e.covered_measure}};
        je["fit"] = e.fit.counts.empty() ? json(nullptr) : to_json(e.fit);
        entries.push_back(je);
    }
    out["entries"] = entries;
    out["exceptional"] = r.exceptional();
    out["summary"] = to_json(marstrand_report(r));
    return out;
}

} // namespace projlab::io
