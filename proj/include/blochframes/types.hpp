#pragma once

#include <array>
#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace blochframes {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr int kMaxDim = 3;

// Integer coordinates (lattice, dual lattice or grid indices). Components
// beyond the active dimension are kept at zero so that comparisons and
// ordering are well defined.
using IVec = std::array<int, kMaxDim>;

inline IVec unit_ivec(int axis, int value = 1) {
    IVec v{0, 0, 0};
    v[axis] = value;
    return v;
}

inline IVec operator+(IVec a, const IVec& b) {
    for (int i = 0; i < kMaxDim; ++i) a[i] += b[i];
    return a;
}

inline IVec operator-(IVec a, const IVec& b) {
    for (int i = 0; i < kMaxDim; ++i) a[i] -= b[i];
    return a;
}

inline IVec operator-(IVec a) {
    for (int i = 0; i < kMaxDim; ++i) a[i] = -a[i];
    return a;
}

inline bool is_zero(const IVec& v) { return v[0] == 0 && v[1] == 0 && v[2] == 0; }

}  // namespace blochframes
