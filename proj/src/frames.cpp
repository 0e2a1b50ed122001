#include "blochframes/frames.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "blochframes/errors.hpp"
#include "blochframes/parallel.hpp"

namespace blochframes {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBranchTolerance = 1e-6;

CMat shifted(const ShiftAction& shift, const IVec& w, const CMat& cols) {
    if (is_zero(w) || shift.is_identity()) return cols;
    return polar_unitary(shift.apply_inverse(w, cols));
}

RVec principal_branch(const RVec& phases) {
    const auto m = phases.size();
    if (m == 0) return phases;
    std::vector<double> sorted(phases.data(), phases.data() + m);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> gaps(m);
    for (Eigen::Index i = 0; i + 1 < m; ++i) gaps[i] = sorted[i + 1] - sorted[i];
    gaps[m - 1] = sorted[0] + kTwoPi - sorted[m - 1];
    if (m >= 2) {
        bool equidistributed = true;
        for (double g : gaps) equidistributed = equidistributed && std::abs(g - kTwoPi / m) < 1e-12;
        if (equidistributed) {
            throw NoSpectralGap("eigenphases are equidistributed; logarithm branch is ambiguous",
                                {{"m", m}, {"advice", "refine the k-grid"}});
        }
    }
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < m; ++i) {
        if (gaps[i] > gaps[best] + 1e-12) best = i;
    }
    const double cut = sorted[best] + 0.5 * gaps[best];
    RVec out(m);
    for (Eigen::Index i = 0; i < m; ++i) out[i] = phases[i] - kTwoPi * std::ceil((phases[i] - cut) / kTwoPi);
    return out;
}

// Continues the eigenphases of a neighbouring holonomy: each new eigenvector
// inherits the branch of the parent eigenvector it overlaps most.
RVec tracked_branch(const UnitaryEigen& parent, const RVec& parent_phases, const UnitaryEigen& next) {
    const auto m = next.phases.size();
    RVec out(m);
    const RMat overlap = (parent.vectors.adjoint() * next.vectors).cwiseAbs();
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Index j = 0;
        overlap.col(i).maxCoeff(&j);
        const double ref = parent_phases[j];
        const double phi = next.phases[i] + kTwoPi * std::round((ref - next.phases[i]) / kTwoPi);
        if (std::abs(phi - ref) > 0.5 * std::numbers::pi) {
            throw HolonomyBranchMismatch("holonomy eigenphase jumps between neighbouring lines",
                                         {{"jump", phi - ref}, {"advice", "refine the k-grid"}});
        }
        out[i] = phi;
    }
    return out;
}

CMat exp_scaled(const UnitaryEigen& e, const RVec& phases, double t) {
    CVec diag(phases.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) diag[i] = std::polar(1.0, t * phases[i]);
    return e.vectors * diag.asDiagonal() * e.vectors.adjoint();
}

CMat log_from(const UnitaryEigen& e, const RVec& phases) {
    return e.vectors * (cplx(0.0, 1.0) * phases.cast<cplx>()).asDiagonal() * e.vectors.adjoint();
}

std::string describe_cycles(const ChernReport& report) {
    std::ostringstream os;
    os << "nonzero Chern number on";
    for (const auto& p : report.pairs) {
        if (p.chern != 0) os << " Theta_{" << p.j + 1 << "," << p.l + 1 << "} (c=" << p.chern << ")";
    }
    return os.str();
}

}  // namespace

double operator_norm(const CMat& a) {
    if (a.size() == 0) return 0.0;
    const CMat gram = a.rows() >= a.cols() ? CMat(a.adjoint() * a) : CMat(a * a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

std::vector<CMat> Frame::periodic() const {
    const ClosedGrid cg = closed();
    std::vector<CMat> out(grid().size());
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = columns[cg.flat(grid().coords(p))];
    return out;
}

std::vector<CMat> transport_path(const CMat& start, const std::vector<CMat>& targets) {
    std::vector<CMat> out;
    out.reserve(targets.size());
    if (targets.empty()) return out;
    out.push_back(start);
    for (std::size_t s = 1; s < targets.size(); ++s) {
        try {
            out.push_back(transport_columns(out.back(), targets[s]));
        } catch (const ProjectorsTooFar& err) {
            nlohmann::json details = err.details();
            details["segment"] = s - 1;
            throw ProjectorsTooFar(err.what(), details);
        }
    }
    return out;
}

std::vector<CMat> transport_line(const ProjectorFamily& family, int axis, const CMat& start, const IVec& base) {
    const int n = family.grid().extent(axis);
    if (base[axis] != -n / 2) throw InvalidArgument("transport lines start on the n = -N/2 face", {{"axis", axis}});
    std::vector<CMat> targets;
    targets.reserve(n + 1);
    for (int s = 0; s <= n; ++s) targets.push_back(family.columns_at(base + unit_ivec(axis, s)));
    try {
        return transport_path(start, targets);
    } catch (const ProjectorsTooFar& err) {
        nlohmann::json details = err.details();
        details["axis"] = axis;
        details["base"] = base;
        throw ProjectorsTooFar(err.what(), details);
    }
}

UnitaryEigen unitary_eigen(const CMat& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("unitary_log needs a square matrix");
    const auto n = m.rows();
    const double defect = (m.adjoint() * m - CMat::Identity(n, n)).cwiseAbs().maxCoeff();
    if (defect > 1e-10) throw InvalidArgument("matrix is not unitary", {{"defect", defect}});
    Eigen::ComplexSchur<CMat> schur(m);
    UnitaryEigen out;
    out.vectors = schur.matrixU();
    out.phases.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.phases[i] = std::arg(schur.matrixT()(i, i));
    return out;
}

CMat unitary_log(const CMat& m) {
    if (m.size() == 0) return m;
    const UnitaryEigen e = unitary_eigen(m);
    return log_from(e, principal_branch(e.phases));
}

FrameResult construct_frame(const ProjectorFamily& family, const FrameOptions& options) {
    return construct_frame(std::make_shared<const ProjectorFamily>(family), options);
}

FrameResult construct_frame(std::shared_ptr<const ProjectorFamily> family, const FrameOptions& options) {
    const KGrid& grid = family->grid();
    const int d = grid.dim();
    if (options.check_chern && d >= 2) {
        ChernReport report = chern_numbers(*family, options.stencil, options.workers);
        if (!report.trivial()) {
            std::string message = describe_cycles(report);
            return Obstruction{std::move(report), std::move(message)};
        }
    }
    const ShiftAction& shift = *family->shift();
    const ClosedGrid cg(grid);
    Frame frame;
    frame.family = family;
    frame.columns.assign(cg.size(), CMat());
    IVec origin{0, 0, 0};
    for (int j = 0; j < d; ++j) origin[j] = -grid.extent(j) / 2;
    frame.columns[cg.flat(origin)] = family->columns_at(origin);

    for (int a = 0; a < d; ++a) {
        const int n_a = grid.extent(a);
        // Points already built whose remaining coordinates sit on the near face.
        std::vector<IVec> face;
        for (std::size_t f = 0; f < cg.size(); ++f) {
            const IVec q = cg.coords(f);
            bool on_face = true;
            for (int b = a; b < d; ++b) on_face = on_face && q[b] == -grid.extent(b) / 2;
            if (on_face) face.push_back(q);
        }
        std::vector<std::vector<CMat>> lines(face.size());
        parallel_for(face.size(), options.workers, [&](std::size_t i) {
            lines[i] = transport_line(*family, a, frame.columns[cg.flat(face[i])], face[i]);
        });

        std::vector<CMat> corrections(face.size());
        if (options.correct_holonomy && family->rank() > 0) {
            std::vector<UnitaryEigen> eig(face.size());
            std::vector<RVec> phases(face.size());
            std::map<IVec, std::size_t> slot;
            for (std::size_t i = 0; i < face.size(); ++i) slot.emplace(face[i], i);
            for (std::size_t i = 0; i < face.size(); ++i) {
                const IVec& q = face[i];
                const CMat target = shifted(shift, unit_ivec(a), frame.columns[cg.flat(q)]);
                eig[i] = unitary_eigen(polar_unitary(target.adjoint() * lines[i].back()));
                int parent_axis = -1;
                for (int b = a - 1; b >= 0; --b) {
                    if (q[b] > -grid.extent(b) / 2) {
                        parent_axis = b;
                        break;
                    }
                }
                if (parent_axis < 0) {
                    phases[i] = principal_branch(eig[i].phases);
                } else {
                    const std::size_t p = slot.at(q - unit_ivec(parent_axis));
                    phases[i] = tracked_branch(eig[p], phases[p], eig[i]);
                }
            }
            // The far faces are τ-images of the near ones; their holonomy
            // logarithms must coincide or the corrected frame would tear.
            for (std::size_t i = 0; i < face.size(); ++i) {
                for (int b = 0; b < a; ++b) {
                    if (face[i][b] != grid.extent(b) / 2) continue;
                    const std::size_t o = slot.at(face[i] - unit_ivec(b, grid.extent(b)));
                    const double mismatch = operator_norm(log_from(eig[i], phases[i]) - log_from(eig[o], phases[o]));
                    if (mismatch > kBranchTolerance) {
                        throw HolonomyBranchMismatch("holonomy logarithm differs between a face and its image",
                                                     {{"axis", a}, {"face_axis", b}, {"index", face[i]},
                                                      {"mismatch", mismatch}, {"advice", "refine the k-grid"}});
                    }
                }
            }
            for (std::size_t i = 0; i < face.size(); ++i) {
                for (int s = 0; s <= n_a; ++s) {
                    lines[i][s] = lines[i][s] * exp_scaled(eig[i], phases[i], -static_cast<double>(s) / n_a);
                }
            }
        }
        for (std::size_t i = 0; i < face.size(); ++i) {
            for (int s = 1; s <= n_a; ++s) frame.columns[cg.flat(face[i] + unit_ivec(a, s))] = std::move(lines[i][s]);
        }
    }

    if (options.anchor_at_origin && family->rank() > 0) {
        const IVec zero{0, 0, 0};
        const CMat& at_zero = frame.columns[cg.flat(zero)];
        const CMat g = polar_unitary(at_zero.adjoint() * family->columns(grid.origin()));
        for (auto& c : frame.columns) c = (c * g).eval();
    }
    frame.residuals = frame_residuals(frame);
    return frame;
}

double equivariance_defect(const Frame& frame) {
    const KGrid& grid = frame.grid();
    const ClosedGrid cg = frame.closed();
    const ShiftAction& shift = *frame.family->shift();
    double worst = 0.0;
    for (std::size_t f = 0; f < cg.size(); ++f) {
        const IVec n = cg.coords(f);
        for (int j = 0; j < grid.dim(); ++j) {
            if (n[j] != -grid.extent(j) / 2) continue;
            const CMat& image = frame.columns[cg.flat(n + unit_ivec(j, grid.extent(j)))];
            const CMat expected = shift.is_identity() ? frame.columns[f]
                                                      : shift.apply_inverse(unit_ivec(j), frame.columns[f]);
            worst = std::max(worst, operator_norm(image - expected));
        }
    }
    return worst;
}

FrameResiduals frame_residuals(const Frame& frame) {
    const KGrid& grid = frame.grid();
    const ClosedGrid cg = frame.closed();
    FrameResiduals r;
    for (std::size_t f = 0; f < cg.size(); ++f) {
        const IVec n = cg.coords(f);
        const CMat& phi = frame.columns[f];
        const auto m = phi.cols();
        r.orthonormality = std::max(r.orthonormality, operator_norm(phi.adjoint() * phi - CMat::Identity(m, m)));
        r.span = std::max(r.span, projector_distance(frame.family->columns_at(n), phi));
        for (int j = 0; j < grid.dim(); ++j) {
            const IVec next = n + unit_ivec(j);
            if (!cg.contains(next)) continue;
            r.smoothness = std::max(r.smoothness, operator_norm(frame.columns[cg.flat(next)] - phi) / grid.step_length(j));
        }
    }
    r.equivariance = equivariance_defect(frame);
    return r;
}

ProjectorFamily complement_family(const ProjectorFamily& family) {
    if (!family.shift()->is_unitary()) {
        throw NotApplicable("complement family needs a unitary shift action (use the cyclic tau mode on a box basis)");
    }
    const auto n = family.fiber_dim();
    const auto m = family.rank();
    std::vector<CMat> cols(family.grid().size());
    for (std::size_t p = 0; p < cols.size(); ++p) {
        Eigen::HouseholderQR<CMat> qr(family.columns(p));
        const CMat q = qr.householderQ() * CMat::Identity(n, n);
        cols[p] = q.rightCols(n - m);
    }
    return ProjectorFamily(family.grid(), BandWindow{0, n - m}, family.gap(), std::move(cols), family.shift());
}

Intertwiner build_intertwiner(const Frame& frame_p, const Frame& frame_q) {
    const KGrid& grid = frame_p.grid();
    if (frame_q.grid().shape() != grid.shape()) throw DimensionMismatch("frames live on different grids");
    const auto n = frame_p.family->fiber_dim();
    const auto mp = frame_p.family->rank();
    const auto mq = frame_q.family->rank();
    if (mp + mq != n || frame_q.family->fiber_dim() != n) {
        throw DimensionMismatch("frame ranks must add up to the fiber dimension",
                                {{"rank_p", mp}, {"rank_q", mq}, {"dim", n}});
    }
    const ClosedGrid cg = frame_p.closed();
    const IVec zero{0, 0, 0};
    const CMat& p0 = frame_p.at(zero);
    const CMat& q0 = frame_q.at(zero);
    const CMat proj0 = p0 * p0.adjoint();
    Intertwiner out;
    out.unitaries.resize(cg.size());
    for (std::size_t f = 0; f < cg.size(); ++f) {
        out.unitaries[f] = frame_p.columns[f] * p0.adjoint() + frame_q.columns[f] * q0.adjoint();
    }
    const ShiftAction& shift = *frame_p.family->shift();
    for (std::size_t f = 0; f < cg.size(); ++f) {
        const IVec k = cg.coords(f);
        const CMat& u = out.unitaries[f];
        out.unitarity = std::max(out.unitarity, operator_norm(u.adjoint() * u - CMat::Identity(n, n)));
        const CMat pk = frame_p.family->projector_at(k);
        out.intertwining = std::max(out.intertwining, operator_norm(u.adjoint() * pk * u - proj0));
        for (int j = 0; j < grid.dim(); ++j) {
            if (k[j] != -grid.extent(j) / 2) continue;
            const CMat& image = out.unitaries[cg.flat(k + unit_ivec(j, grid.extent(j)))];
            const CMat expected = shift.is_identity() ? u : shift.apply_inverse(unit_ivec(j), u);
            out.equivariance = std::max(out.equivariance, operator_norm(image - expected));
        }
    }
    return out;
}

}  // namespace blochframes
