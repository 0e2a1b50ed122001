#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <random>

#include "blochframes/models.hpp"
#include "blochframes/spectral.hpp"

namespace bftest {

using namespace blochframes;

inline constexpr double kPi = std::numbers::pi;

inline Lattice cubic(int d, double a) {
    return Lattice::from_columns(a * RMat::Identity(d, d));
}

// Γ = ℤ, so γ* = 2π; used for the free-particle anchors.
inline SchrodingerPW free_particle_1d(int extent = 1) {
    const Lattice lat = cubic(1, 1.0);
    return SchrodingerPW{PlaneWaveBasis::box(lat, extent), Potential{}, 0.5, TauMode::Truncating};
}

// Γ = 2πℤ (γ* = 1) with V̂(±1) = v.
inline SchrodingerPW mathieu_1d(double v, int extent = 10, TauMode tau = TauMode::Truncating) {
    const Lattice lat = cubic(1, 2.0 * kPi);
    std::map<IVec, cplx> c{{IVec{1, 0, 0}, v}, {IVec{-1, 0, 0}, v}};
    return SchrodingerPW{PlaneWaveBasis::box(lat, extent), Potential(c), 0.5, tau};
}

// Γ = 2πℤ² with V̂(±e₁) = V̂(±e₂) = 1.
inline SchrodingerPW mathieu_2d(double cutoff = 80.0) {
    const Lattice lat = cubic(2, 2.0 * kPi);
    std::map<IVec, cplx> c{{IVec{1, 0, 0}, 1.0}, {IVec{-1, 0, 0}, 1.0}, {IVec{0, 1, 0}, 1.0}, {IVec{0, -1, 0}, 1.0}};
    return SchrodingerPW{PlaneWaveBasis::sphere(lat, cutoff), Potential(c), 0.5, TauMode::Truncating};
}

inline DiracPW dirac_model(int d, int extent, std::map<IVec, cplx> coeffs = {}, double mass = 1.0,
                           TauMode tau = TauMode::Truncating) {
    const Lattice lat = cubic(d, 2.0 * kPi);
    return DiracPW{PlaneWaveBasis::box(lat, extent, 4), Potential(std::move(coeffs)), mass, tau};
}

// k-independent Hamiltonian on the unit lattice: constant projectors.
inline ExplicitFamily constant_family(int d, int dim) {
    ExplicitFamily f;
    f.name = "constant";
    f.lattice = cubic(d, 1.0);
    f.dim_h = dim;
    f.matrix = [dim](const RVec&) {
        CMat h = CMat::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) h(i, i) = i;
        return h;
    };
    return f;
}

inline CMat rotation(double theta) {
    CMat r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

inline CMat rotation_projector(double theta) {
    const CMat r = rotation(theta);
    CMat p0 = CMat::Zero(2, 2);
    p0(0, 0) = 1.0;
    return r * p0 * r.adjoint();
}

inline CVec random_vector(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> nd;
    CVec v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
    return v;
}

inline CMat random_unitary(std::mt19937_64& rng, int n) {
    CMat a(n, n);
    for (int j = 0; j < n; ++j) a.col(j) = random_vector(rng, n);
    return polar_unitary(a);
}

inline double op_norm(const CMat& a) {
    Eigen::JacobiSVD<CMat> svd(a);
    return a.size() == 0 ? 0.0 : svd.singularValues()(0);
}

}  // namespace bftest
