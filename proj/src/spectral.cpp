#include "blochframes/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <lapacke.h>

#include "blochframes/errors.hpp"
#include "blochframes/parallel.hpp"

namespace blochframes {

namespace {

constexpr double kClusterSplitting = 1e-9;
constexpr double kGapTolerance = 1e-8;
constexpr double kNagyMargin = 0.99;

// Index of the first entry within a relative 1e-8 of the maximal magnitude.
Eigen::Index leading_index(const Eigen::Ref<const RVec>& magnitudes) {
    const double top = magnitudes.maxCoeff();
    for (Eigen::Index i = 0; i < magnitudes.size(); ++i) {
        if (magnitudes[i] >= (1.0 - 1e-8) * top) return i;
    }
    return 0;
}

void rebuild_cluster(Eigen::Ref<CMat> block) {
    const Eigen::Index c = block.cols();
    CMat remaining = block;
    for (Eigen::Index t = 0; t < c; ++t) {
        const Eigen::Index width = remaining.cols();
        const RVec row_norms = remaining.rowwise().norm();
        const Eigen::Index i = leading_index(row_norms);
        // Projection of e_i onto the remaining span, in span coordinates.
        CVec a = remaining.row(i).adjoint();
        a /= a.norm();
        block.col(t) = remaining * a;
        if (width == 1) break;
        Eigen::HouseholderQR<CMat> qr(a);
        const CMat q = qr.householderQ() * CMat::Identity(width, width);
        remaining = (remaining * q.rightCols(width - 1)).eval();
    }
}

void fix_phase(Eigen::Ref<CVec> v) {
    const RVec mags = v.cwiseAbs();
    const Eigen::Index i = leading_index(mags);
    if (mags[i] == 0.0) return;
    v *= std::conj(v[i]) / mags[i];
}

}  // namespace

Eigenpairs hermitian_eigen(const CMat& h, int first, int count) {
    const auto n = static_cast<lapack_int>(h.rows());
    if (h.cols() != h.rows()) throw DimensionMismatch("eigensolver needs a square matrix");
    if (first < 0 || count < 1 || first + count > n) {
        throw InvalidWindow("requested eigenpairs exceed the matrix dimension",
                            {{"first", first}, {"count", count}, {"dim", n}});
    }
    const lapack_int il = first + 1;
    const lapack_int iu = first + count;
    Eigenpairs out;
    RVec w(n);
    lapack_int found = 0;
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
    const double abstol = LAPACKE_dlamch('S');
    lapack_int info = 0;
    // The complex driver is used even for real matrices: the real symmetric
    // path of some OpenBLAS builds returns wrong vectors on recent x86 kernels.
    CMat a = h;
    CMat z(n, count);
    info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, reinterpret_cast<lapack_complex_double*>(a.data()), n,
                          0.0, 0.0, il, iu, abstol, &found, w.data(),
                          reinterpret_cast<lapack_complex_double*>(z.data()), n, isuppz.data());
    out.vectors = std::move(z);
    if (info != 0 || found != count) {
        throw EigensolverFailure("dense eigensolver did not converge", {{"info", info}, {"found", found}});
    }
    out.values = w.head(count);
    canonicalize_gauge(out);
    const CMat full = h.selfadjointView<Eigen::Lower>();
    for (int j = 0; j < count; ++j) {
        const double e = out.values[j];
        const double res = (full * out.vectors.col(j) - e * out.vectors.col(j)).norm();
        if (res > 1e-10 * (1.0 + std::abs(e))) {
            throw EigensolverFailure("eigenpair residual too large", {{"index", first + j}, {"residual", res}});
        }
    }
    return out;
}

void canonicalize_gauge(Eigenpairs& pairs) {
    const auto count = pairs.values.size();
    Eigen::Index start = 0;
    while (start < count) {
        Eigen::Index end = start + 1;
        while (end < count &&
               pairs.values[end] - pairs.values[end - 1] < kClusterSplitting * (1.0 + std::abs(pairs.values[end]))) {
            ++end;
        }
        if (end - start > 1) rebuild_cluster(pairs.vectors.middleCols(start, end - start));
        start = end;
    }
    for (Eigen::Index j = 0; j < count; ++j) fix_phase(pairs.vectors.col(j));
}

BandStructure solve_band_range(const ModelSpec& model, const KGrid& grid, int offset, int count, int workers) {
    if (model_lattice(model).dim() != grid.dim()) {
        throw DimensionMismatch("grid and model live on lattices of different dimension");
    }
    const int dim = fiber_dimension(model);
    if (offset < 0 || count < 1 || offset + count > dim) {
        throw InvalidWindow("band count exceeds the fiber dimension",
                            {{"offset", offset}, {"count", count}, {"dim", dim}});
    }
    BandStructure bands{grid, offset, count, dim, {}, {}, make_shift_action(model)};
    bands.energies.resize(grid.size());
    bands.vectors.resize(grid.size());
    parallel_for(grid.size(), workers, [&](std::size_t i) {
        const RVec k = grid.point(i);
        try {
            Eigenpairs e = hermitian_eigen(assemble_fiber(model, k), offset, count);
            bands.energies[i] = std::move(e.values);
            bands.vectors[i] = std::move(e.vectors);
        } catch (const EigensolverFailure& err) {
            nlohmann::json details = err.details();
            details["k"] = std::vector<double>(k.data(), k.data() + k.size());
            throw EigensolverFailure(err.what(), details);
        }
    });
    return bands;
}

BandStructure solve_bands(const ModelSpec& model, const KGrid& grid, int count, int workers) {
    return solve_band_range(model, grid, 0, count, workers);
}

double verify_gap(const BandStructure& bands, const BandWindow& window) {
    if (window.count < 1 || window.first < 0) {
        throw InvalidWindow("band window must have first >= 0 and count >= 1",
                            {{"first", window.first}, {"count", window.count}});
    }
    const bool at_top = window.first + window.count == bands.count && bands.offset + bands.count == bands.dim;
    if (window.first + window.count > bands.count || (window.first + window.count == bands.count && !at_top)) {
        throw InvalidWindow("need at least one solved band above the window",
                            {{"first", window.first}, {"count", window.count}, {"solved", bands.count}});
    }
    if (window.first == 0 && bands.offset > 0) {
        throw InvalidWindow("need a solved band below the window", {{"offset", bands.offset}});
    }
    double g = std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    for (std::size_t i = 0; i < bands.grid.size(); ++i) {
        const RVec& e = bands.energies[i];
        double local = std::numeric_limits<double>::infinity();
        if (!at_top) local = e[window.first + window.count] - e[window.first + window.count - 1];
        if (window.first > 0) local = std::min(local, e[window.first] - e[window.first - 1]);
        if (local < g) {
            g = local;
            worst = i;
        }
    }
    if (g <= kGapTolerance) {
        const RVec k = bands.grid.point(worst);
        throw GapClosed("spectral gap closes on the grid",
                        {{"k", std::vector<double>(k.data(), k.data() + k.size())},
                         {"index", bands.grid.coords(worst)},
                         {"gap", g}});
    }
    return g;
}

ProjectorFamily::ProjectorFamily(KGrid grid, BandWindow window, double gap, std::vector<CMat> columns,
                                 std::shared_ptr<const ShiftAction> shift)
    : grid_(std::move(grid)), window_(window), gap_(gap), columns_(std::move(columns)),
      shift_(shift ? std::move(shift) : std::make_shared<IdentityShift>()) {
    if (columns_.size() != grid_.size()) {
        throw DimensionMismatch("one column block per grid point required",
                                {{"grid", grid_.size()}, {"blocks", columns_.size()}});
    }
}

CMat ProjectorFamily::columns_at(const IVec& n) const {
    const auto wrapped = grid_.wrap(n);
    const CMat& base = columns_[wrapped.flat];
    if (is_zero(wrapped.winding) || shift_->is_identity()) return base;
    // Truncation may drop tiny coefficients; restore exact orthonormality.
    return polar_unitary(shift_->apply_inverse(wrapped.winding, base));
}

CMat ProjectorFamily::projector(std::size_t flat) const {
    return columns_[flat] * columns_[flat].adjoint();
}

CMat ProjectorFamily::projector_at(const IVec& n) const {
    const CMat c = columns_at(n);
    return c * c.adjoint();
}

ProjectorFamily projector_family(const BandStructure& bands, const BandWindow& window) {
    const double gap = verify_gap(bands, window);
    std::vector<CMat> cols(bands.grid.size());
    for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = bands.vectors[i].middleCols(window.first, window.count);
    return ProjectorFamily(bands.grid, window, gap, std::move(cols), bands.shift);
}

CMat polar_unitary(const CMat& a) {
    Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

double projector_distance(const CMat& phi, const CMat& psi) {
    if (phi.cols() == 0) return 0.0;
    const CMat r = phi - psi * (psi.adjoint() * phi);
    Eigen::SelfAdjointEigenSolver<CMat> es(r.adjoint() * r, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

CMat nagy_transport(const CMat& p_from, const CMat& p_to) {
    const auto n = p_from.rows();
    if (p_to.rows() != n || p_from.cols() != n || p_to.cols() != n) {
        throw DimensionMismatch("projectors must be square and of equal size");
    }
    const CMat diff = p_to - p_from;
    Eigen::SelfAdjointEigenSolver<CMat> dist(diff, Eigen::EigenvaluesOnly);
    const double norm = dist.eigenvalues().cwiseAbs().maxCoeff();
    if (norm >= kNagyMargin) {
        throw ProjectorsTooFar("projectors too far apart for Nagy transport",
                               {{"distance", norm}, {"threshold", kNagyMargin},
                                {"advice", "refine the k-grid along the transport direction"}});
    }
    const CMat id = CMat::Identity(n, n);
    const CMat s = id - diff * diff;
    Eigen::SelfAdjointEigenSolver<CMat> es(s);
    const CMat inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                          es.eigenvectors().adjoint();
    return inv_sqrt * (p_to * p_from + (id - p_to) * (id - p_from));
}

CMat transport_columns(const CMat& phi_from, const CMat& psi_to) {
    if (phi_from.rows() != psi_to.rows() || phi_from.cols() != psi_to.cols()) {
        throw DimensionMismatch("frames must have equal shape",
                                {{"from", {phi_from.rows(), phi_from.cols()}}, {"to", {psi_to.rows(), psi_to.cols()}}});
    }
    if (phi_from.cols() == 0) return phi_from;
    const double distance = projector_distance(phi_from, psi_to);
    if (distance >= kNagyMargin) {
        throw ProjectorsTooFar("projectors too far apart for Nagy transport",
                               {{"distance", distance}, {"threshold", kNagyMargin},
                                {"advice", "refine the k-grid along the transport direction"}});
    }
    return psi_to * polar_unitary(psi_to.adjoint() * phi_from);
}

}  // namespace blochframes
