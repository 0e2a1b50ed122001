#include "blochframes/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "blochframes/errors.hpp"

namespace blochframes {

namespace {

int wrap_centered(int v, int extent) {
    const int period = 2 * extent + 1;
    int r = (v + extent) % period;
    if (r < 0) r += period;
    return r - extent;
}

std::vector<IVec> enumerate_box(int dim, const IVec& bound) {
    std::vector<IVec> out;
    IVec m{0, 0, 0};
    for (m[0] = -bound[0]; m[0] <= bound[0]; ++m[0]) {
        for (m[1] = (dim > 1 ? -bound[1] : 0); m[1] <= (dim > 1 ? bound[1] : 0); ++m[1]) {
            for (m[2] = (dim > 2 ? -bound[2] : 0); m[2] <= (dim > 2 ? bound[2] : 0); ++m[2]) {
                out.push_back(m);
            }
        }
    }
    return out;
}

void sort_by_length(std::vector<IVec>& coords, const Lattice& lattice) {
    std::vector<std::pair<double, IVec>> keyed;
    keyed.reserve(coords.size());
    for (const auto& m : coords) keyed.emplace_back(lattice.dual_vector(m).squaredNorm(), m);
    // Lengths of ±G are bitwise equal, so ties are broken purely by coordinates.
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = keyed[i].second;
}

double model_mass(const SchrodingerPW&) { return 0.0; }
double model_mass(const DiracPW& m) { return m.mass; }

template <class PW>
CMat assemble_plane_wave(const PW& model, const RVec& k, double kinetic, bool dirac) {
    const PlaneWaveBasis& basis = model.basis;
    const int s = basis.spin();
    const int n = basis.size();
    CMat h = CMat::Zero(n, n);
    const auto& alpha = dirac_alpha();
    const auto& beta = dirac_beta();
    for (int g = 0; g < basis.num_g(); ++g) {
        const RVec q = k + basis.g_vector(g);
        if (!dirac) {
            h(g, g) = kinetic * q.squaredNorm();
        } else {
            CMat block = model_mass(model) * beta;
            for (int i = 0; i < q.size(); ++i) block += q[i] * alpha[i];
            h.block(g * s, g * s, s, s) = block;
        }
    }
    for (const auto& [m, v] : model.potential.coefficients()) {
        for (int g = 0; g < basis.num_g(); ++g) {
            const auto row = basis.find(basis.coords(g) + m);
            if (!row) continue;
            for (int sp = 0; sp < s; ++sp) h(basis.index(*row, sp), basis.index(g, sp)) += v;
        }
    }
    return h;
}

}  // namespace

PlaneWaveBasis::PlaneWaveBasis(Lattice lattice, std::vector<IVec> coords, int spin, double cutoff,
                               int box_extent)
    : lattice_(std::move(lattice)), coords_(std::move(coords)), spin_(spin), cutoff_(cutoff),
      box_extent_(box_extent) {
    if (spin_ < 1) throw InvalidArgument("spin components must be positive", {{"spin", spin_}});
    for (int g = 0; g < num_g(); ++g) lookup_.emplace(coords_[g], g);
}

PlaneWaveBasis PlaneWaveBasis::sphere(const Lattice& lattice, double cutoff, int spin_components) {
    if (!(cutoff >= 0.0)) throw InvalidArgument("cutoff must be non-negative", {{"cutoff", cutoff}});
    const int d = lattice.dim();
    const double gmax = std::sqrt(2.0 * cutoff);
    IVec bound{0, 0, 0};
    for (int j = 0; j < d; ++j) {
        // m_j = G·γ_j / 2π, so |m_j| ≤ |G| |γ_j| / 2π.
        bound[j] = static_cast<int>(std::floor(gmax * lattice.generator(j).norm() / (2.0 * std::numbers::pi))) + 1;
    }
    std::vector<IVec> coords;
    for (const auto& m : enumerate_box(d, bound)) {
        if (0.5 * lattice.dual_vector(m).squaredNorm() <= cutoff) coords.push_back(m);
    }
    sort_by_length(coords, lattice);
    int box_extent = 0;
    if (d == 1) box_extent = coords.empty() ? 0 : std::abs(coords.back()[0]);
    return PlaneWaveBasis(lattice, std::move(coords), spin_components, cutoff, box_extent);
}

PlaneWaveBasis PlaneWaveBasis::box(const Lattice& lattice, int extent, int spin_components) {
    if (extent < 1) throw InvalidArgument("box extent must be at least 1", {{"extent", extent}});
    const int d = lattice.dim();
    IVec bound{0, 0, 0};
    for (int j = 0; j < d; ++j) bound[j] = extent;
    auto coords = enumerate_box(d, bound);
    sort_by_length(coords, lattice);
    double cutoff = 0.0;
    for (const auto& m : coords) cutoff = std::max(cutoff, 0.5 * lattice.dual_vector(m).squaredNorm());
    return PlaneWaveBasis(lattice, std::move(coords), spin_components, cutoff, extent);
}

std::optional<int> PlaneWaveBasis::find(const IVec& m) const {
    auto it = lookup_.find(m);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

Potential::Potential(std::map<IVec, cplx> coefficients) : coeffs_(std::move(coefficients)) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
        if (it->second == cplx(0.0, 0.0)) it = coeffs_.erase(it);
        else ++it;
    }
    for (const auto& [m, v] : coeffs_) {
        const cplx partner = at(-m);
        if (std::abs(partner - std::conj(v)) > 1e-14) {
            throw InvalidArgument("potential is not real-valued: V(-G) != conj(V(G))",
                                  {{"m", m}, {"re", v.real()}, {"im", v.imag()}});
        }
    }
}

cplx Potential::at(const IVec& m) const {
    auto it = coeffs_.find(m);
    return it == coeffs_.end() ? cplx(0.0, 0.0) : it->second;
}

int Potential::extent() const {
    int e = 0;
    for (const auto& [m, v] : coeffs_) {
        for (int c : m) e = std::max(e, std::abs(c));
    }
    return e;
}

double Potential::reflection_defect() const {
    double worst = 0.0;
    for (const auto& [m, v] : coeffs_) worst = std::max(worst, std::abs(at(-m) - v));
    return worst;
}

const Lattice& model_lattice(const ModelSpec& model) {
    return std::visit([](const auto& m) -> const Lattice& {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExplicitFamily>) return m.lattice;
        else return m.basis.lattice();
    }, model);
}

int fiber_dimension(const ModelSpec& model) {
    return std::visit([](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExplicitFamily>) return m.dim_h;
        else return m.basis.size();
    }, model);
}

const PlaneWaveBasis* model_basis(const ModelSpec& model) {
    return std::visit([](const auto& m) -> const PlaneWaveBasis* {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExplicitFamily>) return nullptr;
        else return &m.basis;
    }, model);
}

CMat assemble_fiber(const ModelSpec& model, const RVec& k) {
    if (k.size() != model_lattice(model).dim()) {
        throw InvalidArgument("k has wrong dimension", {{"expected", model_lattice(model).dim()}, {"got", k.size()}});
    }
    return std::visit([&k](const auto& m) -> CMat {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SchrodingerPW>) {
            if (m.basis.spin() != 1) throw WrongSpinDimension("Schrödinger basis must have one spin component");
            return assemble_plane_wave(m, k, m.kinetic_prefactor, false);
        } else if constexpr (std::is_same_v<T, DiracPW>) {
            if (m.basis.spin() != 4) throw WrongSpinDimension("Dirac basis must have four spinor components");
            return assemble_plane_wave(m, k, 0.0, true);
        } else {
            CMat h = m.matrix(k);
            if (h.rows() != m.dim_h || h.cols() != m.dim_h) {
                throw DimensionMismatch("explicit family returned a matrix of the wrong size",
                                        {{"family", m.name}, {"expected", m.dim_h}});
            }
            return h;
        }
    }, model);
}

CVec tau_shift(const PlaneWaveBasis& basis, const IVec& lambda, const CVec& coefficients,
               double drop_tolerance) {
    if (coefficients.size() != basis.size()) {
        throw DimensionMismatch("coefficient vector does not match basis", {{"basis", basis.size()}, {"got", coefficients.size()}});
    }
    const int s = basis.spin();
    CVec out = CVec::Zero(basis.size());
    for (int g = 0; g < basis.num_g(); ++g) {
        const auto target = basis.find(basis.coords(g) + lambda);
        for (int sp = 0; sp < s; ++sp) {
            const cplx c = coefficients[basis.index(g, sp)];
            if (target) {
                out[basis.index(*target, sp)] = c;
            } else if (std::abs(c) > drop_tolerance) {
                throw ShiftLeavesBasis("tau shift moves an occupied coefficient outside the basis",
                                       {{"m", basis.coords(g)}, {"lambda", lambda}, {"magnitude", std::abs(c)}});
            }
        }
    }
    return out;
}

CVec tau_shift_cyclic(const PlaneWaveBasis& basis, const IVec& lambda, const CVec& coefficients) {
    if (!basis.is_box()) throw NotApplicable("cyclic tau shift requires a box basis");
    const int e = basis.box_extent();
    const int d = basis.lattice().dim();
    const int s = basis.spin();
    CVec out = CVec::Zero(basis.size());
    for (int g = 0; g < basis.num_g(); ++g) {
        IVec t = basis.coords(g) + lambda;
        for (int j = 0; j < d; ++j) t[j] = wrap_centered(t[j], e);
        const int target = *basis.find(t);
        for (int sp = 0; sp < s; ++sp) out[basis.index(target, sp)] = coefficients[basis.index(g, sp)];
    }
    return out;
}

CVec conjugate(const PlaneWaveBasis& basis, const CVec& coefficients) {
    const int s = basis.spin();
    CVec out(basis.size());
    for (int g = 0; g < basis.num_g(); ++g) {
        const int partner = *basis.find(-basis.coords(g));
        for (int sp = 0; sp < s; ++sp) {
            out[basis.index(g, sp)] = std::conj(coefficients[basis.index(partner, sp)]);
        }
    }
    return out;
}

CMat conjugate_columns(const PlaneWaveBasis& basis, const CMat& columns) {
    CMat out(columns.rows(), columns.cols());
    for (Eigen::Index c = 0; c < columns.cols(); ++c) out.col(c) = conjugate(basis, columns.col(c));
    return out;
}

double covariance_defect(const ModelSpec& model, const RVec& k, const IVec& lambda) {
    const PlaneWaveBasis* basis = model_basis(model);
    if (basis == nullptr) {
        throw NotApplicable("covariance defect needs a plane-wave model (explicit families use the identity shift)");
    }
    const RVec k_shift = k + basis->lattice().dual_vector(lambda);
    const CMat shifted = assemble_fiber(model, k_shift);
    const CMat base = assemble_fiber(model, k);
    const int s = basis->spin();
    std::vector<int> rows;
    std::vector<int> image;
    for (int g = 0; g < basis->num_g(); ++g) {
        const auto t = basis->find(basis->coords(g) + lambda);
        if (!t) continue;
        for (int sp = 0; sp < s; ++sp) {
            rows.push_back(basis->index(g, sp));
            image.push_back(basis->index(*t, sp));
        }
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) return 0.0;
    CMat diff(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            diff(a, b) = shifted(rows[a], rows[b]) - base(image[a], image[b]);
        }
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(diff, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

PlaneWaveShift::PlaneWaveShift(std::shared_ptr<const PlaneWaveBasis> basis, TauMode mode,
                               double drop_tolerance)
    : basis_(std::move(basis)), mode_(mode), drop_tolerance_(drop_tolerance) {
    if (mode_ == TauMode::Cyclic && !basis_->is_box()) {
        throw NotApplicable("cyclic tau action requires a box basis");
    }
}

CMat PlaneWaveShift::apply_inverse(const IVec& w, const CMat& columns) const {
    if (is_zero(w)) return columns;
    CMat out(columns.rows(), columns.cols());
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
        if (mode_ == TauMode::Cyclic) {
            out.col(c) = tau_shift_cyclic(*basis_, -w, columns.col(c));
        } else {
            out.col(c) = tau_shift(*basis_, -w, columns.col(c), drop_tolerance_ * columns.col(c).norm());
        }
    }
    return out;
}

std::string PlaneWaveShift::describe() const {
    return mode_ == TauMode::Cyclic ? "plane-wave cyclic" : "plane-wave truncating";
}

std::shared_ptr<const ShiftAction> make_shift_action(const ModelSpec& model) {
    return std::visit([](const auto& m) -> std::shared_ptr<const ShiftAction> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExplicitFamily>) {
            return std::make_shared<IdentityShift>();
        } else {
            return std::make_shared<PlaneWaveShift>(std::make_shared<PlaneWaveBasis>(m.basis), m.tau);
        }
    }, model);
}

const std::array<CMat, 3>& dirac_alpha() {
    static const std::array<CMat, 3> alpha = [] {
        const cplx I(0.0, 1.0);
        std::array<CMat, 3> sigma;
        sigma[0] = CMat::Zero(2, 2);
        sigma[0] << 0.0, 1.0, 1.0, 0.0;
        sigma[1] = CMat::Zero(2, 2);
        sigma[1] << 0.0, -I, I, 0.0;
        sigma[2] = CMat::Zero(2, 2);
        sigma[2] << 1.0, 0.0, 0.0, -1.0;
        std::array<CMat, 3> a;
        for (int i = 0; i < 3; ++i) {
            a[i] = CMat::Zero(4, 4);
            a[i].block(0, 2, 2, 2) = sigma[i];
            a[i].block(2, 0, 2, 2) = sigma[i];
        }
        return a;
    }();
    return alpha;
}

const CMat& dirac_beta() {
    static const CMat beta = [] {
        CMat b = CMat::Zero(4, 4);
        b.diagonal() << 1.0, 1.0, -1.0, -1.0;
        return b;
    }();
    return beta;
}

ExplicitFamily qwz_family(double u) {
    ExplicitFamily f;
    f.name = "qwz";
    f.lattice = Lattice::from_columns(RMat::Identity(2, 2));
    f.dim_h = 2;
    f.matrix = [u](const RVec& k) {
        const cplx I(0.0, 1.0);
        const double dx = std::sin(k[0]);
        const double dy = std::sin(k[1]);
        const double dz = u + std::cos(k[0]) + std::cos(k[1]);
        CMat h(2, 2);
        h << dz, dx - I * dy, dx + I * dy, -dz;
        return h;
    };
    return f;
}

ExplicitFamily make_explicit_family(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "qwz") {
        for (const auto& [key, value] : params) {
            if (key != "u") throw ConfigError("unknown parameter for family qwz: " + key, {{"parameter", key}});
        }
        auto it = params.find("u");
        if (it == params.end()) throw ConfigError("family qwz requires parameter u");
        return qwz_family(it->second);
    }
    throw ConfigError("unknown explicit family: " + name, {{"family", name}});
}

}  // namespace blochframes
