// Prints the verdict and locus for every named generator.
#include "projlab/projlab.hpp"

#include <iostream>

int main()
{
    using namespace projlab;
    for (const auto& p : presets::mobius_presets()) {
        const ClassificationVerdict v = classify_mobius(p.generator);
        std::cout << "mobius     " << p.name << ": " << to_string(v.kind) << " (" << v.case_label << "), L0 "
                  << line_label(v.locus) << '\n';
    }
    for (const auto& p : presets::projective_presets()) {
        const ClassificationVerdict v = classify_projective(p.generator);
        std::cout << "projective " << p.name << ": " << to_string(v.kind) << " (" << v.case_label << "), L0 "
                  << line_label(v.locus);
        if (p.conjugator)
            std::cout << ", transported " << line_label(transport_locus(v.locus, *p.conjugator));
        std::cout << '\n';
    }
}
