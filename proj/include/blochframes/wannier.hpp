#pragma once

#include <vector>

#include "blochframes/frames.hpp"
#include "blochframes/models.hpp"

namespace blochframes {

/// Samples at x = Σ_j (c_j + s_j/r) γ_j with cells c_j ∈ [−R/2, R/2) and
/// s_j ∈ [−r/2, r/2), so each cell is centred on its lattice vector.
struct WannierFunction {
    int band = 0;
    int cells = 0;
    int resolution = 0;
    std::vector<RVec> positions;
    std::vector<IVec> cell_index;
    CVec samples;
    double norm = 0.0;  // discrete L² norm over the sampled cells
};

std::vector<WannierFunction> wannier_from_frame(const Frame& frame, const PlaneWaveBasis& basis, int cells,
                                                int resolution, int workers = 1);

/// ψ(k, x) = e^{ik·x} φ_a(k, [x]) at closed-grid index n.
CVec evaluate_bloch(const Frame& frame, const PlaneWaveBasis& basis, int band, const IVec& n,
                    const std::vector<RVec>& x_samples);

struct DecayProfile {
    std::vector<int> distance;
    std::vector<double> shell_max;
    std::vector<double> envelope;  // non-increasing upper envelope of shell_max
    double slope = 0.0;            // least-squares slope of ln envelope per cell
};

DecayProfile decay_profile(const WannierFunction& w);

}  // namespace blochframes
