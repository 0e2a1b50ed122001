#include "blochframes/geometry.hpp"

#include <cmath>
#include <numbers>

#include "blochframes/errors.hpp"
#include "blochframes/parallel.hpp"

namespace blochframes {

namespace {

constexpr double kSingularOverlap = 1e-10;

CMat frame_at(const ProjectorFamily& family, const std::vector<CMat>& frame, const IVec& n) {
    const auto w = family.grid().wrap(n);
    if (is_zero(w.winding) || family.shift()->is_identity()) return frame[w.flat];
    return family.shift()->apply_inverse(w.winding, frame[w.flat]);
}

}  // namespace

std::vector<std::pair<int, double>> stencil_weights(int order) {
    if (order == 2) return {{-1, -0.5}, {1, 0.5}};
    if (order == 4) return {{-2, 1.0 / 12.0}, {-1, -2.0 / 3.0}, {1, 2.0 / 3.0}, {2, -1.0 / 12.0}};
    throw InvalidArgument("stencil order must be 2 or 4", {{"stencil", order}});
}

std::vector<BerryConnectionSample> berry_connection(const ProjectorFamily& family,
                                                    const std::vector<CMat>& frame, int stencil) {
    const KGrid& grid = family.grid();
    const auto weights = stencil_weights(stencil);
    if (frame.size() != grid.size()) {
        throw DimensionMismatch("frame must have one block per grid point");
    }
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const CMat& phi = frame[p];
        const auto m = phi.cols();
        const double ortho = (phi.adjoint() * phi - CMat::Identity(m, m)).norm();
        const double span = projector_distance(family.columns(p), phi);
        if (ortho > 1e-10 || span > 1e-8) {
            throw FrameNotOrthonormal("frame is not an orthonormal basis of Ran P(k)",
                                      {{"index", grid.coords(p)}, {"orthonormality", ortho}, {"span", span}});
        }
    }
    std::vector<BerryConnectionSample> out(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const IVec n = grid.coords(p);
        const CMat& phi = frame[p];
        auto& sample = out[p];
        for (int i = 0; i < grid.dim(); ++i) {
            CMat a = CMat::Zero(phi.cols(), phi.cols());
            for (const auto& [s, c] : weights) {
                a += (c / grid.torus_step(i)) * (phi.adjoint() * frame_at(family, frame, n + unit_ivec(i, s)));
            }
            const CMat anti = 0.5 * (a - a.adjoint());
            sample.antihermitian_defect = std::max(sample.antihermitian_defect, (a - anti).norm());
            sample.components.push_back(anti);
        }
    }
    return out;
}

CurvatureField curvature(const ProjectorFamily& family, int stencil, int workers) {
    const KGrid& grid = family.grid();
    const int d = grid.dim();
    const auto weights = stencil_weights(stencil);
    CurvatureField field{grid, std::vector<CMat>(grid.size())};
    parallel_for(grid.size(), workers, [&](std::size_t p) {
        const IVec n = grid.coords(p);
        const CMat& phi0 = family.columns(p);
        // Neighbour columns along each axis at every stencil offset.
        std::vector<std::vector<CMat>> nb(d);
        for (int i = 0; i < d; ++i) {
            for (const auto& [s, c] : weights) nb[i].push_back(family.columns_at(n + unit_ivec(i, s)));
        }
        CMat omega = CMat::Zero(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                double im = 0.0;
                for (std::size_t a = 0; a < weights.size(); ++a) {
                    const CMat o0s = phi0.adjoint() * nb[i][a];
                    for (std::size_t b = 0; b < weights.size(); ++b) {
                        const CMat ost = nb[i][a].adjoint() * nb[j][b];
                        const CMat ot0 = nb[j][b].adjoint() * phi0;
                        im += weights[a].second * weights[b].second * (o0s * ost * ot0).trace().imag();
                    }
                }
                const cplx value(0.0, 2.0 * im / (grid.torus_step(i) * grid.torus_step(j)));
                omega(i, j) = value;
                omega(j, i) = -value;
            }
        }
        field.omega[p] = std::move(omega);
    });
    return field;
}

CurvatureField connection_curvature(const KGrid& grid, const std::vector<BerryConnectionSample>& connection,
                                    int stencil) {
    const int d = grid.dim();
    const auto weights = stencil_weights(stencil);
    CurvatureField field{grid, std::vector<CMat>(grid.size())};
    auto derivative = [&](const IVec& n, int axis, int comp) {
        cplx acc = 0.0;
        for (const auto& [s, c] : weights) {
            acc += c * connection[grid.wrap(n + unit_ivec(axis, s)).flat].components[comp].trace();
        }
        return acc / grid.torus_step(axis);
    };
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const IVec n = grid.coords(p);
        CMat omega = CMat::Zero(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                const cplx v = derivative(n, i, j) - derivative(n, j, i);
                omega(i, j) = v;
                omega(j, i) = -v;
            }
        }
        field.omega[p] = std::move(omega);
    }
    return field;
}

double timereversal_defect(const CurvatureField& field) {
    double worst = 0.0;
    for (std::size_t p = 0; p < field.grid.size(); ++p) {
        const std::size_t q = field.grid.negate(p);
        worst = std::max(worst, (field.omega[p] + field.omega[q]).cwiseAbs().maxCoeff());
    }
    return worst;
}

bool ChernReport::trivial() const {
    for (const auto& p : pairs) {
        if (p.chern != 0) return false;
    }
    return true;
}

ChernReport chern_numbers(const ProjectorFamily& family, int stencil, int workers) {
    if (family.grid().dim() < 2) return ChernReport{};
    return chern_numbers(family, curvature(family, stencil, workers));
}

ChernReport chern_numbers(const ProjectorFamily& family, const CurvatureField& field) {
    const KGrid& grid = family.grid();
    const int d = grid.dim();
    ChernReport report;
    report.timereversal_defect = timereversal_defect(field);
    if (d < 2) return report;
    for (int j = 0; j < d; ++j) {
        for (int l = j + 1; l < d; ++l) {
            const int nj = grid.extent(j);
            const int nl = grid.extent(l);
            double angle_sum = 0.0;
            double omega_sum = 0.0;
            for (int a = -nj / 2; a < nj / 2; ++a) {
                for (int b = -nl / 2; b < nl / 2; ++b) {
                    IVec n{0, 0, 0};
                    n[j] = a;
                    n[l] = b;
                    const CMat c0 = family.columns_at(n);
                    const CMat c1 = family.columns_at(n + unit_ivec(j));
                    const CMat c2 = family.columns_at(n + unit_ivec(j) + unit_ivec(l));
                    const CMat c3 = family.columns_at(n + unit_ivec(l));
                    const CMat links[4] = {c0.adjoint() * c1, c1.adjoint() * c2, c2.adjoint() * c3,
                                           c3.adjoint() * c0};
                    for (const auto& link : links) {
                        if (std::abs(link.determinant()) < kSingularOverlap) {
                            throw PlaquetteSingular("plaquette overlap is singular; refine the grid",
                                                    {{"index", n}, {"j", j + 1}, {"l", l + 1}});
                        }
                    }
                    angle_sum += std::arg((links[0] * links[1] * links[2] * links[3]).determinant());
                    omega_sum += field.omega[grid.flat(n)](j, l).imag();
                }
            }
            ChernPair pair;
            pair.j = j;
            pair.l = l;
            pair.plaquette_sum = -angle_sum / (2.0 * std::numbers::pi);
            pair.chern = static_cast<int>(std::lround(pair.plaquette_sum));
            pair.integral = std::abs(pair.plaquette_sum - pair.chern) <= 0.01;
            // (i/2π) Σ Ω h_j h_l with Ω purely imaginary.
            pair.riemann = -omega_sum * grid.torus_step(j) * grid.torus_step(l) / (2.0 * std::numbers::pi);
            report.pairs.push_back(pair);
        }
    }
    return report;
}

}  // namespace blochframes
