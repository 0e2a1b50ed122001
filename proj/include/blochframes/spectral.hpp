#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "blochframes/lattice.hpp"
#include "blochframes/models.hpp"
#include "blochframes/types.hpp"

namespace blochframes {

struct Eigenpairs {
    RVec values;   // ascending
    CMat vectors;  // orthonormal columns
};

/// Eigenpairs with sorted indices [first, first + count) of a Hermitian matrix,
/// in the deterministic gauge (see canonicalize_gauge). Only the lower
/// triangle of h is read.
Eigenpairs hermitian_eigen(const CMat& h, int first, int count);

/// Fixes the eigenvector gauge in place. Within each cluster of relative
/// splitting below 1e-9 the basis is rebuilt greedily from coordinate
/// projections; each vector is then phased so that its first
/// maximal-magnitude component is real positive.
void canonicalize_gauge(Eigenpairs& pairs);

struct BandWindow {
    int first = 0;
    int count = 1;
};

struct BandStructure {
    KGrid grid;
    int offset = 0;  // sorted index of stored band 0
    int count = 0;
    int dim = 0;     // fiber dimension
    std::vector<RVec> energies;
    std::vector<CMat> vectors;
    std::shared_ptr<const ShiftAction> shift;
};

/// Lowest `count` eigenpairs at every grid point.
BandStructure solve_bands(const ModelSpec& model, const KGrid& grid, int count, int workers = 1);
/// Eigenpairs with sorted indices [offset, offset + count) at every grid point.
BandStructure solve_band_range(const ModelSpec& model, const KGrid& grid, int offset, int count,
                               int workers = 1);

/// Minimum over the grid of the separation between the window and its
/// neighbouring stored bands. Throws GapClosed below 1e-8. A side with no
/// spectrum at all (bottom or top of the truncated spectrum) does not count;
/// a window with neither neighbour has infinite gap.
double verify_gap(const BandStructure& bands, const BandWindow& window);

/// m orthonormal columns per grid point spanning Ran P(k), plus the τ action
/// used to continue them beyond the centred grid.
class ProjectorFamily {
public:
    ProjectorFamily(KGrid grid, BandWindow window, double gap, std::vector<CMat> columns,
                    std::shared_ptr<const ShiftAction> shift);

    const KGrid& grid() const { return grid_; }
    const BandWindow& window() const { return window_; }
    double gap() const { return gap_; }
    int rank() const { return static_cast<int>(columns_.front().cols()); }
    int fiber_dim() const { return static_cast<int>(columns_.front().rows()); }
    const std::shared_ptr<const ShiftAction>& shift() const { return shift_; }

    const CMat& columns(std::size_t flat) const { return columns_[flat]; }
    /// Columns at an arbitrary index, continued by Φ(k + λ) = τ(λ)⁻¹Φ(k).
    CMat columns_at(const IVec& n) const;
    CMat projector(std::size_t flat) const;
    CMat projector_at(const IVec& n) const;

private:
    KGrid grid_;
    BandWindow window_;
    double gap_;
    std::vector<CMat> columns_;
    std::shared_ptr<const ShiftAction> shift_;
};

ProjectorFamily projector_family(const BandStructure& bands, const BandWindow& window);

/// Closest unitary U V† of the thin SVD A = U Σ V†.
CMat polar_unitary(const CMat& a);

/// ‖P − Q‖ for P = ΦΦ†, Q = ΨΨ† of equal rank, as the largest singular value
/// of (1 − Q)Φ.
double projector_distance(const CMat& phi, const CMat& psi);

/// Nagy's unitary W with W P_from W† = P_to.
CMat nagy_transport(const CMat& p_from, const CMat& p_to);

/// W Φ for the Nagy unitary W between span Φ and span Ψ, without forming W:
/// W Φ = Ψ polar(Ψ†Φ).
CMat transport_columns(const CMat& phi_from, const CMat& psi_to);

}  // namespace blochframes
