#pragma once

#include <vector>

#include "blochframes/spectral.hpp"

namespace blochframes {

/// ℰ_n(k) for n ∈ [−count, count), anchored so that ℰ_0(0) is the smallest
/// positive eigenvalue at k = 0. Stored band i carries the label i − count.
struct DiracLabelling {
    BandStructure bands;
    int index_offset = 0;  // stored position of ℰ_0
    int anchor = 0;        // sorted index of ℰ_0 in the full truncated spectrum
    double continuity_defect = 0.0;
};

/// Sorted index of the smallest positive eigenvalue of H_D(0).
int dirac_anchor(const DiracPW& model);

DiracLabelling dirac_labelling(const DiracPW& model, const KGrid& grid, int count, int workers = 1);

/// Spinor matrix of T = −i(1 ⊗ α₁α₃)C.
const CMat& time_reversal_spinor();
/// T applied to a coefficient vector: −i(α₁α₃) on each G-block of C c.
CVec time_reversal_T(const PlaneWaveBasis& basis, const CVec& coefficients);
CMat time_reversal_T_columns(const PlaneWaveBasis& basis, const CMat& columns);

/// ‖H_D(k)T − T H_D(−k)‖ as the operator norm of H(k)M̃ − M̃ conj(H(−k)),
/// where T = M̃ K with K plain complex conjugation.
double dirac_commutation_defect(const DiracPW& model, const RVec& k);

struct KramersReport {
    double max_pairing_defect = 0.0;
    struct OddCluster {
        std::size_t k_index;
        int first_label;
        int size;
    };
    std::vector<OddCluster> odd_clusters;
    DiracLabelling labelling;
};

KramersReport kramers_check(const DiracPW& model, const KGrid& grid, int count, double tol = 1e-8,
                            int workers = 1);

struct DiracFamily {
    ProjectorFamily family;
    double t_defect = 0.0;  // max_k ‖P(−k) − T P(k) T⁻¹‖
    bool odd_window = false;
    int anchor = 0;
};

/// Projector family for the labels [first, first + count) around ℰ_0.
DiracFamily dirac_projector_family(const DiracPW& model, const KGrid& grid, int first, int count,
                                   int workers = 1);

/// T-symmetry defect of any family on a Dirac basis.
double t_symmetry_defect(const PlaneWaveBasis& basis, const ProjectorFamily& family);

}  // namespace blochframes
