#include "blochframes/wannier.hpp"

#include <cmath>

#include "blochframes/errors.hpp"
#include "blochframes/parallel.hpp"

namespace blochframes {

namespace {

void require_scalar(const PlaneWaveBasis& basis, const Frame& frame) {
    if (basis.spin() != 1) {
        throw NotApplicable("Wannier synthesis is implemented for scalar (Schrödinger) bases only");
    }
    if (basis.size() != frame.family->fiber_dim()) {
        throw DimensionMismatch("basis does not match the frame", {{"basis", basis.size()}, {"frame", frame.family->fiber_dim()}});
    }
}

// φ_a(k, y) for all bands at the points y: rows are points, columns bands.
CMat periodic_part(const PlaneWaveBasis& basis, const CMat& coefficients, const std::vector<RVec>& ys) {
    const double scale = 1.0 / std::sqrt(basis.lattice().cell_volume());
    CMat waves(static_cast<Eigen::Index>(ys.size()), basis.num_g());
    for (std::size_t p = 0; p < ys.size(); ++p) {
        for (int g = 0; g < basis.num_g(); ++g) waves(p, g) = std::polar(scale, basis.g_vector(g).dot(ys[p]));
    }
    return waves * coefficients;
}

}  // namespace

std::vector<WannierFunction> wannier_from_frame(const Frame& frame, const PlaneWaveBasis& basis, int cells,
                                                int resolution, int workers) {
    require_scalar(basis, frame);
    if (cells < 1 || resolution < 1) {
        throw InvalidArgument("cells and resolution must be positive", {{"cells", cells}, {"resolution", resolution}});
    }
    const Lattice& lattice = basis.lattice();
    const KGrid& grid = frame.grid();
    const int d = lattice.dim();
    const int m = frame.family->rank();

    // One cell of sample offsets, shared by every cell.
    std::vector<RVec> ys;
    {
        IVec bound{1, 1, 1};
        for (int j = 0; j < d; ++j) bound[j] = resolution;
        IVec s{0, 0, 0};
        for (s[0] = 0; s[0] < bound[0]; ++s[0]) {
            for (s[1] = 0; s[1] < bound[1]; ++s[1]) {
                for (s[2] = 0; s[2] < bound[2]; ++s[2]) {
                    RVec frac(d);
                    for (int j = 0; j < d; ++j) frac[j] = static_cast<double>(s[j] - resolution / 2) / resolution;
                    ys.push_back(lattice.generators() * frac);
                }
            }
        }
    }
    std::vector<IVec> cell_list;
    {
        IVec bound{1, 1, 1};
        for (int j = 0; j < d; ++j) bound[j] = cells;
        IVec c{0, 0, 0};
        for (c[0] = 0; c[0] < bound[0]; ++c[0]) {
            for (c[1] = 0; c[1] < bound[1]; ++c[1]) {
                for (c[2] = 0; c[2] < bound[2]; ++c[2]) {
                    IVec cell{0, 0, 0};
                    for (int j = 0; j < d; ++j) cell[j] = c[j] - cells / 2;
                    cell_list.push_back(cell);
                }
            }
        }
    }

    const std::vector<CMat> cols = frame.periodic();
    std::vector<CMat> phi(grid.size());
    parallel_for(grid.size(), workers, [&](std::size_t p) { phi[p] = periodic_part(basis, cols[p], ys); });

    const auto n_y = static_cast<Eigen::Index>(ys.size());
    const auto n_x = static_cast<Eigen::Index>(cell_list.size()) * n_y;
    std::vector<WannierFunction> out(m);
    for (int a = 0; a < m; ++a) {
        auto& w = out[a];
        w.band = a;
        w.cells = cells;
        w.resolution = resolution;
        w.samples = CVec::Zero(n_x);
        w.positions.resize(n_x);
        w.cell_index.resize(n_x);
    }
    const double inv_nk = 1.0 / static_cast<double>(grid.size());
    parallel_for(cell_list.size(), workers, [&](std::size_t c) {
        const RVec origin = lattice.lattice_vector(cell_list[c]);
        for (Eigen::Index s = 0; s < n_y; ++s) {
            const Eigen::Index idx = static_cast<Eigen::Index>(c) * n_y + s;
            const RVec x = origin + ys[s];
            CVec acc = CVec::Zero(m);
            for (std::size_t p = 0; p < grid.size(); ++p) {
                acc += std::polar(1.0, grid.point(p).dot(x)) * phi[p].row(s).transpose();
            }
            for (int a = 0; a < m; ++a) {
                out[a].samples[idx] = acc[a] * inv_nk;
                out[a].positions[idx] = x;
                out[a].cell_index[idx] = cell_list[c];
            }
        }
    });
    const double dv = lattice.cell_volume() / static_cast<double>(n_y);
    for (auto& w : out) w.norm = std::sqrt(w.samples.squaredNorm() * dv);
    return out;
}

CVec evaluate_bloch(const Frame& frame, const PlaneWaveBasis& basis, int band, const IVec& n,
                    const std::vector<RVec>& x_samples) {
    require_scalar(basis, frame);
    if (band < 0 || band >= frame.family->rank()) throw InvalidArgument("band index out of range", {{"band", band}});
    const RVec k = frame.grid().point(n);
    const CMat coeffs = frame.at(n).col(band);
    std::vector<RVec> ys;
    ys.reserve(x_samples.size());
    for (const auto& x : x_samples) ys.push_back(reduce_to_domain(x, basis.lattice()).fractional_part);
    const CMat phi = periodic_part(basis, coeffs, ys);
    CVec out(static_cast<Eigen::Index>(x_samples.size()));
    for (std::size_t i = 0; i < x_samples.size(); ++i) out[i] = std::polar(1.0, k.dot(x_samples[i])) * phi(i, 0);
    return out;
}

DecayProfile decay_profile(const WannierFunction& w) {
    if (w.cells < 3) throw InvalidArgument("decay profile needs at least 3 cells per axis", {{"cells", w.cells}});
    Eigen::Index peak = 0;
    const RVec mags = w.samples.cwiseAbs();
    mags.maxCoeff(&peak);
    const IVec centre = w.cell_index[peak];
    int max_dist = 0;
    std::vector<int> dist(mags.size());
    for (Eigen::Index i = 0; i < mags.size(); ++i) {
        int dd = 0;
        for (int j = 0; j < kMaxDim; ++j) dd = std::max(dd, std::abs(w.cell_index[i][j] - centre[j]));
        dist[i] = dd;
        max_dist = std::max(max_dist, dd);
    }
    DecayProfile prof;
    prof.shell_max.assign(max_dist + 1, 0.0);
    for (Eigen::Index i = 0; i < mags.size(); ++i) prof.shell_max[dist[i]] = std::max(prof.shell_max[dist[i]], mags[i]);
    prof.envelope = prof.shell_max;
    for (int s = max_dist - 1; s >= 0; --s) prof.envelope[s] = std::max(prof.envelope[s], prof.envelope[s + 1]);
    for (int s = 0; s <= max_dist; ++s) prof.distance.push_back(s);
    // Least squares of ln(envelope) against distance; zero shells are skipped.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int s = 0; s <= max_dist; ++s) {
        if (prof.envelope[s] <= 0.0) continue;
        const double y = std::log(prof.envelope[s]);
        sx += s;
        sy += y;
        sxx += static_cast<double>(s) * s;
        sxy += s * y;
        ++n;
    }
    const double den = n * sxx - sx * sx;
    prof.slope = (n >= 2 && den > 0.0) ? (n * sxy - sx * sy) / den : 0.0;
    return prof;
}

}  // namespace blochframes
