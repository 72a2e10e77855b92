// Box-counting dimension of orthogonal projections of a Cantor dust.
#include "projlab/projlab.hpp"

#include <cmath>
#include <cstdio>

int main()
{
    using namespace projlab;
    const IFSSystem dust = presets::cantor9();
    const PointCloud cloud = ifs_generate(dust, 200000, 7);
    const ProjectionFamily rotations(RotationGrassmann{2, 1});
    SweepOptions opt;
    opt.set_dimension = similarity_dimension(dust);
    const DimSweepReport sweep = dim_sweep(rotations, cloud, angle_grid(16), opt, "cantor9");
    for (const SweepEntry& e : sweep.entries)
        std::printf("theta % .4f  slope %.4f  r2 %.4f%s\n", e.lambda[0], e.fit.slope, e.fit.r_squared,
                    e.exceptional ? "  exceptional" : "");
    const MarstrandSummary s = marstrand_report(sweep);
    std::printf("target %.4f  median %.4f  non-exceptional %.2f\n", sweep.target, s.median_estimate,
                s.non_exceptional_fraction);
}
