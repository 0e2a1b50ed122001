#pragma once

#include <vector>

#include "blochframes/spectral.hpp"

namespace blochframes {

struct BerryConnectionSample {
    std::vector<CMat> components;  // 𝒜_i(k), one m×m antihermitian matrix per axis
    double antihermitian_defect = 0.0;
};

/// Ω_ij(k) per grid point as a d×d antisymmetric matrix of (purely imaginary)
/// values. Derivatives are taken with respect to the torus angles
/// θ_j = 2π n_j / N_j, so (i/2π) Σ Ω_jl (2π/N_j)(2π/N_l) is the Chern sum.
struct CurvatureField {
    KGrid grid;
    std::vector<CMat> omega;
};

/// Centered finite-difference stencil weights c_s for offsets s = ±1, ±2.
/// Order must be 2 or 4.
std::vector<std::pair<int, double>> stencil_weights(int order);

std::vector<BerryConnectionSample> berry_connection(const ProjectorFamily& family,
                                                    const std::vector<CMat>& frame, int stencil = 2);

/// Ω = Tr(P[∂_iP, ∂_jP]) from overlaps of the family's columns; gauge-free.
CurvatureField curvature(const ProjectorFamily& family, int stencil = 2, int workers = 1);

/// tr(∂_i𝒜_j − ∂_j𝒜_i) from connection samples (the trace of the commutator term vanishes).
CurvatureField connection_curvature(const KGrid& grid, const std::vector<BerryConnectionSample>& connection,
                                    int stencil = 2);

/// max_k,i,j |Ω_ij(−k) + Ω_ij(k)|
double timereversal_defect(const CurvatureField& field);

struct ChernPair {
    int j = 0;  // 0-based axes, j < l
    int l = 1;
    int chern = 0;
    double plaquette_sum = 0.0;
    double riemann = 0.0;
    bool integral = true;  // |plaquette_sum − chern| ≤ 0.01
};

struct ChernReport {
    std::vector<ChernPair> pairs;
    double timereversal_defect = 0.0;

    bool trivial() const;
};

/// Plaquette Chern numbers over the coordinate cycles Θ_{j,l} (other grid
/// indices zero), oriented by (e_j, e_l). With the (i/2π) convention the lower
/// band of qwz at u = 1 has chern −1.
ChernReport chern_numbers(const ProjectorFamily& family, int stencil = 2, int workers = 1);
ChernReport chern_numbers(const ProjectorFamily& family, const CurvatureField& field);

}  // namespace blochframes
