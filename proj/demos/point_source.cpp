// Projection from the source (0, 1) under rotations, handled by moving the
// source to inf_Y and transporting the locus back.
#include "projlab/projlab.hpp"

#include <iostream>

int main()
{
    using namespace projlab;
    const ProjectiveMap m = presets::point_source_conjugator();
    const FamilySpec conj = conjugate_family(ProjectiveOneParam{presets::rotation()}, m);
    const GL3Generator& b = std::get<ProjectiveOneParam>(conj).generator;
    std::cout << "conjugated generator\n" << b.matrix() << '\n';

    const ClassificationVerdict v = classify_projective(b);
    std::cout << "verdict " << to_string(v.kind) << ", L0 " << line_label(v.locus) << ", in the original picture "
              << line_label(transport_locus(v.locus, m)) << '\n';

    const ClassificationVerdict printed = classify_projective(presets::point_source_printed());
    std::cout << "printed generator: " << to_string(printed.kind) << ", L0 " << line_label(printed.locus) << '\n';
}
