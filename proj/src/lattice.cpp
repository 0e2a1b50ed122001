#include "blochframes/lattice.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "blochframes/errors.hpp"

namespace blochframes {

namespace {

constexpr double kSingularTolerance = 1e-12;

int positive_mod(int a, int n) {
    int r = a % n;
    return r < 0 ? r + n : r;
}

int floor_div(int a, int n) {
    return (a - positive_mod(a, n)) / n;
}

}  // namespace

Lattice Lattice::from_columns(const RMat& generators) {
    const auto d = generators.cols();
    if (d < 1 || d > kMaxDim || generators.rows() != d) {
        throw InvalidArgument("lattice needs d generators of dimension d, 1 <= d <= 3",
                              {{"rows", generators.rows()}, {"cols", generators.cols()}});
    }
    const double det = generators.determinant();
    if (!(std::abs(det) >= kSingularTolerance)) {
        throw SingularGenerators("lattice generators are linearly dependent",
                                 {{"determinant", det}});
    }
    Lattice lat;
    lat.generators_ = generators;
    lat.inverse_ = generators.inverse();
    // γ*_i · γ_j = 2π δ_ij  ⇔  Bᵀ A = 2π 1
    lat.dual_ = 2.0 * std::numbers::pi * lat.inverse_.transpose();
    return lat;
}

Lattice make_lattice(std::span<const RVec> generators) {
    const auto d = static_cast<Eigen::Index>(generators.size());
    if (d < 1 || d > kMaxDim) {
        throw InvalidArgument("lattice dimension must be 1, 2 or 3", {{"dim", d}});
    }
    RMat a(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (generators[j].size() != d) {
            throw InvalidArgument("generator " + std::to_string(j) + " has wrong length",
                                  {{"expected", d}, {"got", generators[j].size()}});
        }
        a.col(j) = generators[j];
    }
    return Lattice::from_columns(a);
}

RVec Lattice::dual_vector(const IVec& m) const {
    RVec out = RVec::Zero(dim());
    for (int j = 0; j < dim(); ++j) out += static_cast<double>(m[j]) * dual_.col(j);
    return out;
}

RVec Lattice::lattice_vector(const IVec& a) const {
    RVec out = RVec::Zero(dim());
    for (int j = 0; j < dim(); ++j) out += static_cast<double>(a[j]) * generators_.col(j);
    return out;
}

double Lattice::cell_volume() const { return std::abs(generators_.determinant()); }

double Lattice::zone_volume() const { return std::abs(dual_.determinant()); }

double Lattice::dual_residual() const {
    const RMat prod = dual_.transpose() * generators_;
    const RMat target = 2.0 * std::numbers::pi * RMat::Identity(dim(), dim());
    return (prod - target).cwiseAbs().maxCoeff();
}

DomainSplit reduce_to_domain(const RVec& x, const Lattice& lattice) {
    const int d = lattice.dim();
    if (x.size() != d) {
        throw InvalidArgument("position has wrong dimension", {{"expected", d}, {"got", x.size()}});
    }
    const RVec alpha = lattice.fractional_coordinates(x);
    DomainSplit out;
    RVec frac(d);
    for (int j = 0; j < d; ++j) {
        // Half-open convention: fractional part in [-1/2, 1/2). Values within
        // rounding of a cell face are snapped so that the split is idempotent.
        double t = alpha[j] + 0.5;
        const double nearest = std::round(t);
        if (std::abs(t - nearest) <= 1e-12 * std::max(1.0, std::abs(t))) t = nearest;
        const double n = std::floor(t);
        out.lattice_part[j] = static_cast<int>(n);
        frac[j] = t - n - 0.5;
    }
    out.fractional_part = lattice.generators() * frac;
    return out;
}

KGrid::KGrid(Lattice lattice, std::vector<int> shape)
    : lattice_(std::move(lattice)), shape_(std::move(shape)) {
    if (static_cast<int>(shape_.size()) != lattice_.dim()) {
        throw InvalidArgument("grid shape must have one entry per lattice dimension",
                              {{"dim", lattice_.dim()}, {"shape_entries", shape_.size()}});
    }
    for (int n : shape_) {
        if (n < 2 || n % 2 != 0) {
            throw InvalidArgument("grid sizes must be even and positive", {{"size", n}});
        }
        size_ *= static_cast<std::size_t>(n);
    }
}

IVec KGrid::coords(std::size_t flat) const {
    IVec n{0, 0, 0};
    for (int j = dim() - 1; j >= 0; --j) {
        const auto nj = static_cast<std::size_t>(shape_[j]);
        n[j] = static_cast<int>(flat % nj) - shape_[j] / 2;
        flat /= nj;
    }
    return n;
}

std::size_t KGrid::flat(const IVec& n) const {
    std::size_t f = 0;
    for (int j = 0; j < dim(); ++j) {
        const int half = shape_[j] / 2;
        if (n[j] < -half || n[j] >= half) {
            throw InvalidArgument("grid index outside the centered range",
                                  {{"axis", j}, {"index", n[j]}});
        }
        f = f * static_cast<std::size_t>(shape_[j]) + static_cast<std::size_t>(n[j] + half);
    }
    return f;
}

KGrid::Wrapped KGrid::wrap(const IVec& n) const {
    IVec reduced{0, 0, 0};
    IVec winding{0, 0, 0};
    for (int j = 0; j < dim(); ++j) {
        const int half = shape_[j] / 2;
        const int shifted = n[j] + half;
        winding[j] = floor_div(shifted, shape_[j]);
        reduced[j] = positive_mod(shifted, shape_[j]) - half;
    }
    return {flat(reduced), winding};
}

RVec KGrid::point(const IVec& n) const {
    RVec k = RVec::Zero(dim());
    for (int j = 0; j < dim(); ++j) {
        k += (static_cast<double>(n[j]) / shape_[j]) * lattice_.dual().col(j);
    }
    return k;
}

std::size_t KGrid::negate(std::size_t flat_index) const {
    return wrap(-coords(flat_index)).flat;
}

double KGrid::step_length(int axis) const {
    return lattice_.dual().col(axis).norm() / shape_[axis];
}

double KGrid::torus_step(int axis) const {
    return 2.0 * std::numbers::pi / shape_[axis];
}

ClosedGrid::ClosedGrid(const KGrid& grid) : dim_(grid.dim()), shape_(grid.shape()) {
    for (int n : shape_) size_ *= static_cast<std::size_t>(n + 1);
}

IVec ClosedGrid::coords(std::size_t flat) const {
    IVec n{0, 0, 0};
    for (int j = dim_ - 1; j >= 0; --j) {
        const auto ext = static_cast<std::size_t>(shape_[j] + 1);
        n[j] = static_cast<int>(flat % ext) - shape_[j] / 2;
        flat /= ext;
    }
    return n;
}

std::size_t ClosedGrid::flat(const IVec& n) const {
    std::size_t f = 0;
    for (int j = 0; j < dim_; ++j) {
        const int half = shape_[j] / 2;
        if (n[j] < -half || n[j] > half) {
            throw InvalidArgument("closed-grid index out of range", {{"axis", j}, {"index", n[j]}});
        }
        f = f * static_cast<std::size_t>(shape_[j] + 1) + static_cast<std::size_t>(n[j] + half);
    }
    return f;
}

bool ClosedGrid::contains(const IVec& n) const {
    for (int j = 0; j < dim_; ++j) {
        if (n[j] < -shape_[j] / 2 || n[j] > shape_[j] / 2) return false;
    }
    return true;
}

bool ClosedGrid::is_interior(const IVec& n) const {
    for (int j = 0; j < dim_; ++j) {
        if (n[j] >= shape_[j] / 2) return false;
    }
    return true;
}

}  // namespace blochframes
