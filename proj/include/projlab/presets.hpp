#pragma once

// Named generators, conjugators and self-similar sets.

#include "projlab/dimension.hpp"
#include "projlab/families.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace projlab::presets {

// ---------------------------------------------------------------------------
// Mobius generators

/// O(2): z -> e^{it} z.
inline SL2CGenerator o2() { return SL2CGenerator(cplx(0, 0.5), 0.0, 0.0, cplx(0, -0.5)); }

/// Translations z -> z + t.
inline SL2CGenerator translation() { return SL2CGenerator(0.0, 1.0, 0.0, 0.0); }

/// Real dilations z -> e^{2t} z.
inline SL2CGenerator dilation() { return SL2CGenerator(1.0, 0.0, 0.0, -1.0); }

/// O(2) conjugated to rotate about a finite point c (fixes c and inf).
inline SL2CGenerator rotation_about(cplx c)
{
    // z -> e^{it}(z - c) + c
    return SL2CGenerator(cplx(0, 0.5), cplx(0, -1.0) * c, 0.0, cplx(0, -0.5));
}

/// O(2) conjugated by [[1,-1],[1,1]]: elliptic with fixed points +-1. The
/// orbit of inf is the imaginary axis.
inline SL2CGenerator elliptic_vertical() { return SL2CGenerator(0.0, cplx(0, 0.5), cplx(0, 0.5), 0.0); }

/// Elliptic with fixed points +-i; the orbit of inf is the real axis.
inline SL2CGenerator elliptic_horizontal() { return SL2CGenerator(0.0, 0.5, -0.5, 0.0); }

/// z -> e^{(a+ib)t} z conjugated by [[1,-1],[1,1]] (fixed points +-1).
inline SL2CGenerator loxodromic(double a = 1.0, double b = 1.0)
{
    Mat2c d;
    const cplx h(a / 2, b / 2);
    d << h, 0.0, 0.0, -h;
    Mat2c m;
    m << 1.0, -1.0, 1.0, 1.0;
    Mat2c g = m * d * m.inverse();
    const cplx tr = g.trace() / 2.0;
    g(0, 0) -= tr;
    g(1, 1) -= tr;
    return SL2CGenerator(g);
}

inline MobiusMap elliptic_conjugator()
{
    Mat2c m;
    m << 1.0, -1.0, 1.0, 1.0;
    return MobiusMap(m);
}

// ---------------------------------------------------------------------------
// Projective generators

inline Mat3 mat3(std::initializer_list<double> rows)
{
    Mat3 m;
    auto it = rows.begin();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m(i, j) = *it++;
    return m;
}

inline GL3Generator rotation() { return GL3Generator(mat3({0, -1, 0, 1, 0, 0, 0, 0, 0})); }
inline GL3Generator shear() { return GL3Generator(mat3({0, -1, 0, 0, 0, 0, 0, 0, 0})); }
/// (x, y) -> (x/(1+xt), y/(1+xt)).
inline GL3Generator z_shear() { return GL3Generator(mat3({0, 0, 0, 0, 0, 0, 1, 0, 0})); }
/// Rotation in the (x, z) coordinates; fixes inf_Y.
inline GL3Generator z_rotation() { return GL3Generator(mat3({0, 0, -1, 0, 0, 0, 1, 0, 0})); }
/// (x, y) -> (e^{2t} x, e^{3t} y).
inline GL3Generator diag23() { return GL3Generator(mat3({2, 0, 0, 0, 3, 0, 0, 0, 0})); }

/// Sends (1:1:1), a point on a non-linear orbit of diag23, to inf_Y.
inline ProjectiveMap diag23_conjugator() { return ProjectiveMap(mat3({1, 0, -1, 0, 1, 0, 0, -1, 1})); }
inline GL3Generator diag23_conjugated()
{
    return std::get<ProjectiveOneParam>(conjugate_family(ProjectiveOneParam{diag23()}, diag23_conjugator())).generator;
}

/// The point-source generator as printed, equal to the Z-rotation generator.
inline GL3Generator point_source_printed() { return GL3Generator(mat3({0, 0, -1, 0, 0, 0, 1, 0, 0})); }
/// The printed conjugator; it sends the origin to inf_Y.
inline ProjectiveMap point_source_printed_conjugator() { return ProjectiveMap(mat3({1, 0, 0, 0, 0, -1, 0, 1, 0})); }

/// Sends (0:1:1) to inf_Y.
inline ProjectiveMap point_source_conjugator() { return ProjectiveMap(mat3({1, 0, 0, 0, 1, 0, 0, -1, 1})); }
/// Rotation conjugated by point_source_conjugator(): projection from the
/// source (0, 1) composed with rotations about the origin.
inline GL3Generator point_source_corrected() { return GL3Generator(mat3({0, -1, 0, 1, 0, 0, -1, 0, 0})); }

// ---------------------------------------------------------------------------
// Lookup tables for the CLI

struct MobiusPreset {
    std::string name;
    SL2CGenerator generator;
    /// Set when the example is meant to be read in the conjugated picture;
    /// loci and plots are then transported by it.
    std::optional<MobiusMap> conjugator;
    std::string description;
};

struct ProjectivePreset {
    std::string name;
    GL3Generator generator;
    std::optional<ProjectiveMap> conjugator;
    std::string description;
};

inline std::vector<MobiusPreset> mobius_presets()
{
    return {
        {"o2", o2(), std::nullopt, "rotations z -> e^{it} z"},
        {"rotation-about", rotation_about(cplx(1.0, 1.0)), std::nullopt, "rotations about 1+i"},
        {"translation", translation(), std::nullopt, "translations z -> z + t"},
        {"dilation", dilation(), std::nullopt, "dilations z -> e^{2t} z"},
        {"elliptic", elliptic_vertical(), std::nullopt, "compact conjugate fixing +-1"},
        {"elliptic-horizontal", elliptic_horizontal(), std::nullopt, "compact conjugate fixing +-i"},
        {"loxodromic", loxodromic(), std::nullopt, "e^{(1+i)t} z conjugated to fix +-1"},
    };
}

inline std::vector<ProjectivePreset> projective_presets()
{
    return {
        {"rotation", rotation(), std::nullopt, "rotations about the origin"},
        {"shear", shear(), std::nullopt, "shears (x + yt, y)"},
        {"z-shear", z_shear(), std::nullopt, "Z-shears (x, y)/(1 + xt)"},
        {"z-rotation", z_rotation(), std::nullopt, "Z-rotations"},
        {"diag23", diag23(), std::nullopt, "(e^{2t} x, e^{3t} y)"},
        {"diag23-conjugated", diag23_conjugated(), diag23_conjugator(), "(e^{2t} x, e^{3t} y) with an orbit through inf_Y"},
        {"point-source", point_source_printed(), point_source_printed_conjugator(), "point-source generator as printed"},
        {"point-source-corrected", point_source_corrected(), point_source_conjugator(),
         "rotations seen from the source (0, 1)"},
    };
}

inline std::optional<MobiusPreset> find_mobius(const std::string& name)
{
    for (auto& p : mobius_presets())
        if (p.name == name)
            return p;
    return std::nullopt;
}

inline std::optional<ProjectivePreset> find_projective(const std::string& name)
{
    for (auto& p : projective_presets())
        if (p.name == name)
            return p;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Self-similar sets

inline Similarity sim(double ratio, double tx, double ty) { return {ratio, 0.0, Vec2(tx, ty)}; }

/// Four maps of ratio 1/9 onto the corners of the unit square (open set
/// condition with the open unit square).
inline IFSSystem cantor9()
{
    const double r = 1.0 / 9.0, o = 8.0 / 9.0;
    return {{sim(r, 0, 0), sim(r, o, 0), sim(r, 0, o), sim(r, o, o)}, 2};
}

/// The four-corner set C(1/4), similarity dimension 1 (open set condition
/// with the open unit square).
inline IFSSystem c14()
{
    const double r = 0.25, o = 0.75;
    return {{sim(r, 0, 0), sim(r, o, 0), sim(r, 0, o), sim(r, o, o)}, 2};
}

/// The vertical segment {0} x [-1/2, 1/2] (open set condition with its interior).
inline IFSSystem segment()
{
    return {{sim(0.5, 0, -0.25), sim(0.5, 0, 0.25)}, 2};
}

/// The unit square (four maps of ratio 1/2).
inline IFSSystem square()
{
    return {{sim(0.5, 0, 0), sim(0.5, 0.5, 0), sim(0.5, 0, 0.5), sim(0.5, 0.5, 0.5)}, 2};
}

/// A single map: the attractor is its fixed point.
inline IFSSystem point()
{
    return {{sim(0.5, 0, 0)}, 2};
}

inline std::optional<IFSSystem> find_set(const std::string& name)
{
    static const std::map<std::string, IFSSystem (*)()> table = {
        {"cantor9", &cantor9}, {"c14", &c14}, {"segment", &segment}, {"square", &square}, {"point", &point}};
    const auto it = table.find(name);
    if (it == table.end())
        return std::nullopt;
    return it->second();
}

} // namespace projlab::presets
