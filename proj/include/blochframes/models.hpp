#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blochframes/lattice.hpp"
#include "blochframes/types.hpp"

namespace blochframes {

/// Truncated plane-wave basis {G = Σ m_j γ*_j} of L²(T_Y) ⊗ ℂ^s. Basis index
/// of (G, spin) is g * s + spin. G-vectors are ordered by |G|, then by their
/// integer coordinates, which makes the ordering independent of insertion.
class PlaneWaveBasis {
public:
    /// All G with ½|G|² ≤ cutoff.
    static PlaneWaveBasis sphere(const Lattice& lattice, double cutoff, int spin_components = 1);
    /// All G with max_j |m_j| ≤ extent. A box basis admits the cyclic τ action.
    static PlaneWaveBasis box(const Lattice& lattice, int extent, int spin_components = 1);

    const Lattice& lattice() const { return lattice_; }
    int num_g() const { return static_cast<int>(coords_.size()); }
    int spin() const { return spin_; }
    int size() const { return num_g() * spin_; }
    int index(int g, int s) const { return g * spin_ + s; }

    const IVec& coords(int g) const { return coords_[g]; }
    RVec g_vector(int g) const { return lattice_.dual_vector(coords_[g]); }
    std::optional<int> find(const IVec& m) const;

    bool is_box() const { return box_extent_ > 0; }
    int box_extent() const { return box_extent_; }
    double cutoff() const { return cutoff_; }

private:
    PlaneWaveBasis(Lattice lattice, std::vector<IVec> coords, int spin, double cutoff, int box_extent);

    Lattice lattice_;
    std::vector<IVec> coords_;
    std::map<IVec, int> lookup_;
    int spin_ = 1;
    double cutoff_ = 0.0;
    int box_extent_ = 0;
};

/// Sparse Fourier coefficients V̂(G(m)) of a real periodic potential.
class Potential {
public:
    Potential() = default;
    /// Validates V̂(−m) = conj(V̂(m)) to 1e-14 (missing partners count as zero).
    explicit Potential(std::map<IVec, cplx> coefficients);

    cplx at(const IVec& m) const;
    const std::map<IVec, cplx>& coefficients() const { return coeffs_; }
    /// max_j |m_j| over the nonzero coefficients.
    int extent() const;
    /// max |V̂(−m) − V̂(m)|; zero for a reflection-symmetric potential.
    double reflection_defect() const;

private:
    std::map<IVec, cplx> coeffs_;
};

/// Realisation of τ(λ) on the truncated basis. Truncating: exact shift of the
/// Fourier support, coefficients falling outside the basis must be below the
/// drop tolerance. Cyclic: wrap-around shift on a box basis (unitary).
enum class TauMode { Truncating, Cyclic };

struct SchrodingerPW {
    PlaneWaveBasis basis;
    Potential potential;
    double kinetic_prefactor = 0.5;
    TauMode tau = TauMode::Truncating;
};

struct DiracPW {
    PlaneWaveBasis basis;  // spin_components == 4
    Potential potential;
    double mass = 1.0;
    TauMode tau = TauMode::Truncating;
};

/// Explicit k ↦ H(k) family with identity shift action; must be Γ*-periodic.
struct ExplicitFamily {
    std::string name;
    Lattice lattice;
    int dim_h = 0;
    std::function<CMat(const RVec&)> matrix;
};

using ModelSpec = std::variant<SchrodingerPW, DiracPW, ExplicitFamily>;

const Lattice& model_lattice(const ModelSpec& model);
int fiber_dimension(const ModelSpec& model);
const PlaneWaveBasis* model_basis(const ModelSpec& model);

/// Fiber Hamiltonian H(k) as a dense Hermitian matrix.
CMat assemble_fiber(const ModelSpec& model, const RVec& k);

/// (τ(λ)c)(G) = c(G − λ): multiplication by e^{iλ·y}.
CVec tau_shift(const PlaneWaveBasis& basis, const IVec& lambda, const CVec& coefficients,
               double drop_tolerance = 0.0);
/// Cyclic variant on a box basis: integer coordinates wrap modulo 2·extent+1.
CVec tau_shift_cyclic(const PlaneWaveBasis& basis, const IVec& lambda, const CVec& coefficients);

/// (Cc)(G) = conj(c(−G)), componentwise on spinor indices.
CVec conjugate(const PlaneWaveBasis& basis, const CVec& coefficients);
CMat conjugate_columns(const PlaneWaveBasis& basis, const CMat& columns);

/// ‖H(k+λ) − τ(λ)⁻¹H(k)τ(λ)‖ on the sub-basis where both sides are defined.
double covariance_defect(const ModelSpec& model, const RVec& k, const IVec& lambda);

/// τ(w)⁻¹ acting on the columns of a fiber-space matrix, as used by projector
/// families and frames to continue grid data to k + Σ w_j γ*_j.
class ShiftAction {
public:
    virtual ~ShiftAction() = default;
    virtual CMat apply_inverse(const IVec& w, const CMat& columns) const = 0;
    CMat apply(const IVec& w, const CMat& columns) const { return apply_inverse(-w, columns); }
    virtual bool is_identity() const { return false; }
    virtual bool is_unitary() const { return true; }
    virtual std::string describe() const = 0;
};

class IdentityShift final : public ShiftAction {
public:
    CMat apply_inverse(const IVec&, const CMat& columns) const override { return columns; }
    bool is_identity() const override { return true; }
    std::string describe() const override { return "identity"; }
};

class PlaneWaveShift final : public ShiftAction {
public:
    /// Drop tolerance applies to the truncating mode, relative to each column's norm.
    PlaneWaveShift(std::shared_ptr<const PlaneWaveBasis> basis, TauMode mode,
                   double drop_tolerance = 1e-10);
    CMat apply_inverse(const IVec& w, const CMat& columns) const override;
    bool is_unitary() const override { return mode_ == TauMode::Cyclic; }
    std::string describe() const override;

private:
    std::shared_ptr<const PlaneWaveBasis> basis_;
    TauMode mode_;
    double drop_tolerance_;
};

std::shared_ptr<const ShiftAction> make_shift_action(const ModelSpec& model);

/// Dirac matrices in the standard (Pauli-block) representation.
const std::array<CMat, 3>& dirac_alpha();
const CMat& dirac_beta();

/// H(k) = sin k₁ σ₁ + sin k₂ σ₂ + (u + cos k₁ + cos k₂) σ₃ on the unit square
/// lattice (Γ* = 2πℤ²); Chern-insulator negative control.
ExplicitFamily qwz_family(double u);

/// Registered explicit families by name ("qwz" with parameter "u").
ExplicitFamily make_explicit_family(const std::string& name, const std::map<std::string, double>& params);

}  // namespace blochframes
