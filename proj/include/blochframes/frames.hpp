#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "blochframes/geometry.hpp"
#include "blochframes/spectral.hpp"

namespace blochframes {

struct FrameResiduals {
    double orthonormality = 0.0;
    double span = 0.0;
    double equivariance = 0.0;
    double smoothness = 0.0;
};

/// Frame columns on the closed grid (see ClosedGrid), so the τ-images of the
/// n_j = −N_j/2 faces are stored explicitly and can be compared.
struct Frame {
    std::shared_ptr<const ProjectorFamily> family;
    std::vector<CMat> columns;  // indexed by ClosedGrid flat index
    FrameResiduals residuals;

    const KGrid& grid() const { return family->grid(); }
    ClosedGrid closed() const { return ClosedGrid(family->grid()); }
    const CMat& at(const IVec& n) const { return columns[closed().flat(n)]; }
    /// Columns on the periodic grid in KGrid flat order.
    std::vector<CMat> periodic() const;
};

struct Obstruction {
    ChernReport report;
    std::string message;
};

using FrameResult = std::variant<Frame, Obstruction>;

struct FrameOptions {
    bool correct_holonomy = true;
    bool anchor_at_origin = true;
    bool check_chern = true;
    int stencil = 2;
    int workers = 1;
};

/// Successive Nagy steps: out[0] = start, out[s+1] = W_s out[s] with
/// W_s transporting span targets[s] onto span targets[s+1].
std::vector<CMat> transport_path(const CMat& start, const std::vector<CMat>& targets);

/// Transport along `axis` from the closed-grid point `base` (whose axis
/// component must be −N/2) to the far face, N+1 frames in total.
std::vector<CMat> transport_line(const ProjectorFamily& family, int axis, const CMat& start, const IVec& base);

struct UnitaryEigen {
    CMat vectors;
    RVec phases;  // principal values in (−π, π]
};
UnitaryEigen unitary_eigen(const CMat& m);

/// Antihermitian L with exp(L) = M; branch cut in the middle of the largest
/// gap of the eigenphase circle (ties: gap with the smallest start angle);
/// eigenvalues of −iL lie in (cut − 2π, cut].
CMat unitary_log(const CMat& m);

FrameResult construct_frame(std::shared_ptr<const ProjectorFamily> family, const FrameOptions& options = {});
FrameResult construct_frame(const ProjectorFamily& family, const FrameOptions& options = {});

/// max over axes j and closed-grid points n with n_j = −N_j/2 of
/// ‖Φ(n + N_j e_j) − τ(γ*_j)⁻¹ Φ(n)‖.
double equivariance_defect(const Frame& frame);
FrameResiduals frame_residuals(const Frame& frame);

/// Orthonormal complement of each column block (1 − P(k)), sharing the
/// family's τ action. Requires a unitary (cyclic or identity) action.
ProjectorFamily complement_family(const ProjectorFamily& family);

struct Intertwiner {
    std::vector<CMat> unitaries;  // indexed by ClosedGrid flat index
    double unitarity = 0.0;
    double intertwining = 0.0;  // max ‖U†P U − P(0)‖
    double equivariance = 0.0;  // max ‖U(k + λ) − τ(λ)⁻¹ U(k)‖
};

/// U(k) = Φ(k)Φ(0)† + Ξ(k)Ξ(0)† from frames of P and of 1 − P.
Intertwiner build_intertwiner(const Frame& frame_p, const Frame& frame_q);

double operator_norm(const CMat& a);

}  // namespace blochframes
