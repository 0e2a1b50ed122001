#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "blochframes/types.hpp"

namespace blochframes {

/// A Bravais lattice Γ in d ≤ 3 dimensions together with its dual Γ*,
/// normalised by γ*_i · γ_j = 2π δ_ij.
class Lattice {
public:
    /// Generators are the columns of `generators` (d × d).
    static Lattice from_columns(const RMat& generators);

    int dim() const { return static_cast<int>(generators_.cols()); }
    const RMat& generators() const { return generators_; }
    const RMat& dual() const { return dual_; }

    RVec generator(int j) const { return generators_.col(j); }
    RVec dual_generator(int j) const { return dual_.col(j); }

    /// Σ_j m_j γ*_j
    RVec dual_vector(const IVec& m) const;
    /// Σ_j a_j γ_j
    RVec lattice_vector(const IVec& a) const;

    /// Volume of the fundamental cell Y.
    double cell_volume() const;
    /// Volume of the Brillouin zone Y*.
    double zone_volume() const;

    /// max_ij |γ*_i·γ_j − 2π δ_ij|
    double dual_residual() const;

    /// Coordinates of x in the generator basis.
    RVec fractional_coordinates(const RVec& x) const { return inverse_ * x; }

private:
    RMat generators_;
    RMat dual_;
    RMat inverse_;
};

Lattice make_lattice(std::span<const RVec> generators);

struct DomainSplit {
    IVec lattice_part{0, 0, 0};
    RVec fractional_part;  // Cartesian [x], fractional coordinates in [-1/2, 1/2)
};

/// x = Σ α_j γ_j + [x] with the fractional coordinates of [x] in [-1/2, 1/2).
DomainSplit reduce_to_domain(const RVec& x, const Lattice& lattice);

/// Centered, even-sized Monkhorst-style grid on Y*. Points are keyed by
/// integer indices n_j ∈ {-N_j/2, …, N_j/2 - 1}; k(n) = Σ (n_j/N_j) γ*_j.
/// Flattening is row-major with axis 0 slowest.
class KGrid {
public:
    KGrid(Lattice lattice, std::vector<int> shape);

    const Lattice& lattice() const { return lattice_; }
    int dim() const { return lattice_.dim(); }
    const std::vector<int>& shape() const { return shape_; }
    int extent(int axis) const { return shape_[axis]; }
    std::size_t size() const { return size_; }

    IVec coords(std::size_t flat) const;
    /// Requires every component inside the centered range.
    std::size_t flat(const IVec& n) const;

    struct Wrapped {
        std::size_t flat;
        IVec winding;  // n = n_wrapped + winding ∘ shape
    };
    /// Periodic reduction of arbitrary integer indices.
    Wrapped wrap(const IVec& n) const;

    /// k(n) for any integer n (no reduction).
    RVec point(const IVec& n) const;
    RVec point(std::size_t flat) const { return point(coords(flat)); }

    /// Index of −k(n), reduced to the grid.
    std::size_t negate(std::size_t flat) const;

    std::size_t origin() const { return flat(IVec{0, 0, 0}); }

    /// Cartesian length of one grid step along `axis`: |γ*_axis| / N_axis.
    double step_length(int axis) const;
    /// Step in the periodic torus coordinate θ_axis ∈ [-π, π): 2π / N_axis.
    double torus_step(int axis) const;

private:
    Lattice lattice_;
    std::vector<int> shape_;
    std::size_t size_ = 1;
};

/// Grid including the far faces n_j = +N_j/2 (the τ-images of the n_j = -N_j/2
/// faces). Frames are built and checked on this closed grid.
class ClosedGrid {
public:
    explicit ClosedGrid(const KGrid& grid);

    std::size_t size() const { return size_; }
    IVec coords(std::size_t flat) const;
    std::size_t flat(const IVec& n) const;
    bool contains(const IVec& n) const;
    /// True when every component lies in the periodic range.
    bool is_interior(const IVec& n) const;

private:
    int dim_;
    std::vector<int> shape_;
    std::size_t size_ = 1;
};

}  // namespace blochframes
