#include "blochframes/dirac.hpp"

#include <cmath>

#include "blochframes/errors.hpp"
#include "blochframes/frames.hpp"

namespace blochframes {

namespace {

void require_spinor(const PlaneWaveBasis& basis) {
    if (basis.spin() != 4) throw WrongSpinDimension("Dirac operations need four spinor components", {{"spin", basis.spin()}});
}

}  // namespace

int dirac_anchor(const DiracPW& model) {
    require_spinor(model.basis);
    const ModelSpec spec = model;
    const CMat h = assemble_fiber(spec, RVec::Zero(model.basis.lattice().dim()));
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    const RVec& e = es.eigenvalues();
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (e[i] > 0.0) return static_cast<int>(i);
    }
    throw WindowTruncation("no positive eigenvalue at k = 0");
}

DiracLabelling dirac_labelling(const DiracPW& model, const KGrid& grid, int count, int workers) {
    if (count < 1) throw InvalidWindow("label count must be positive", {{"count", count}});
    const int anchor = dirac_anchor(model);
    const int dim = model.basis.size();
    if (anchor - count < 1 || anchor + count > dim - 1) {
        throw WindowTruncation("retained window touches the edge of the truncated spectrum",
                               {{"anchor", anchor}, {"count", count}, {"dim", dim}});
    }
    DiracLabelling out{solve_band_range(model, grid, anchor - count, 2 * count, workers), count, anchor, 0.0};
    const KGrid& g = out.bands.grid;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const IVec n = g.coords(p);
        for (int j = 0; j < g.dim(); ++j) {
            const std::size_t q = g.wrap(n + unit_ivec(j)).flat;
            out.continuity_defect =
                std::max(out.continuity_defect, (out.bands.energies[p] - out.bands.energies[q]).cwiseAbs().maxCoeff());
        }
    }
    return out;
}

const CMat& time_reversal_spinor() {
    static const CMat m = [] {
        const auto& a = dirac_alpha();
        return CMat(cplx(0.0, -1.0) * a[0] * a[2]);
    }();
    return m;
}

CVec time_reversal_T(const PlaneWaveBasis& basis, const CVec& coefficients) {
    require_spinor(basis);
    CVec c = conjugate(basis, coefficients);
    const CMat& m = time_reversal_spinor();
    for (int g = 0; g < basis.num_g(); ++g) c.segment(4 * g, 4) = (m * c.segment(4 * g, 4)).eval();
    return c;
}

CMat time_reversal_T_columns(const PlaneWaveBasis& basis, const CMat& columns) {
    CMat out(columns.rows(), columns.cols());
    for (Eigen::Index j = 0; j < columns.cols(); ++j) out.col(j) = time_reversal_T(basis, columns.col(j));
    return out;
}

double dirac_commutation_defect(const DiracPW& model, const RVec& k) {
    const PlaneWaveBasis& basis = model.basis;
    require_spinor(basis);
    const ModelSpec spec = model;
    const CMat hk = assemble_fiber(spec, k);
    const CMat hm = assemble_fiber(spec, RVec(-k));
    const int n = basis.size();
    CMat mt = CMat::Zero(n, n);
    const CMat& m = time_reversal_spinor();
    for (int g = 0; g < basis.num_g(); ++g) {
        const int partner = *basis.find(-basis.coords(g));
        mt.block(4 * g, 4 * partner, 4, 4) = m;
    }
    return operator_norm(hk * mt - mt * hm.conjugate());
}

KramersReport kramers_check(const DiracPW& model, const KGrid& grid, int count, double tol, int workers) {
    const double reflection = model.potential.reflection_defect();
    if (reflection > 1e-13) {
        throw SymmetryViolation("potential is not reflection symmetric", {{"defect", reflection}});
    }
    KramersReport report{0.0, {}, dirac_labelling(model, grid, count, workers)};
    const auto& bands = report.labelling.bands;
    const int off = report.labelling.index_offset;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const RVec& e = bands.energies[p];
        // Pairs (ℰ_n, ℰ_{n+1}) for even labels n.
        for (int n = -count; n + 1 < count; ++n) {
            if (n % 2 != 0) continue;
            report.max_pairing_defect = std::max(report.max_pairing_defect, e[off + n + 1] - e[off + n]);
        }
        int start = 0;
        const int total = static_cast<int>(e.size());
        while (start < total) {
            int end = start + 1;
            while (end < total && e[end] - e[end - 1] <= tol) ++end;
            const bool interior = start > 0 && end < total;
            if (interior && (end - start) % 2 != 0) {
                report.odd_clusters.push_back({p, start - off, end - start});
            }
            start = end;
        }
    }
    return report;
}

double t_symmetry_defect(const PlaneWaveBasis& basis, const ProjectorFamily& family) {
    require_spinor(basis);
    const KGrid& grid = family.grid();
    double worst = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const IVec n = grid.coords(p);
        // T P T⁻¹ is the projector onto span T Φ.
        const CMat t_cols = time_reversal_T_columns(basis, family.columns(p));
        worst = std::max(worst, projector_distance(family.columns_at(-n), t_cols));
    }
    return worst;
}

DiracFamily dirac_projector_family(const DiracPW& model, const KGrid& grid, int first, int count, int workers) {
    if (count < 1) throw InvalidWindow("window count must be positive", {{"count", count}});
    const int anchor = dirac_anchor(model);
    const int dim = model.basis.size();
    const int lo = anchor + first - 1;
    const int hi = anchor + first + count + 1;
    if (lo < 0 || hi > dim) {
        throw WindowTruncation("window plus guard bands leaves the truncated spectrum",
                               {{"anchor", anchor}, {"first", first}, {"count", count}, {"dim", dim}});
    }
    const BandStructure bands = solve_band_range(model, grid, lo, hi - lo, workers);
    DiracFamily out{projector_family(bands, BandWindow{1, count}), 0.0, false, anchor};
    out.t_defect = t_symmetry_defect(model.basis, out.family);
    out.odd_window = count % 2 != 0 && model.potential.reflection_defect() <= 1e-13;
    return out;
}

}  // namespace blochframes
