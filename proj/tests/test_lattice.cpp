#include <doctest.h>

#include <cmath>
#include <numbers>

#include "blochframes/errors.hpp"
#include "blochframes/lattice.hpp"

using namespace blochframes;

namespace {

constexpr double pi = std::numbers::pi;

RVec vec(std::initializer_list<double> v) {
    RVec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

// Solves γ*_i·γ_j = 2πδ_ij row by row with a generic solver, independent of
// the library's transpose-inverse formula.
RMat oracle_dual(const RMat& a) {
    const auto d = a.cols();
    RMat b(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        RVec rhs = RVec::Zero(d);
        rhs[i] = 2.0 * pi;
        b.col(i) = a.transpose().colPivHouseholderQr().solve(rhs);
    }
    return b;
}

}  // namespace

TEST_CASE("square lattice dual") {
    const RVec g[] = {vec({1, 0}), vec({0, 1})};
    const Lattice lat = make_lattice(g);
    CHECK(lat.dual_generator(0).isApprox(vec({2 * pi, 0})));
    CHECK(lat.dual_generator(1).isApprox(vec({0, 2 * pi})));
    CHECK(lat.dual_residual() <= 1e-12);
}

TEST_CASE("triangular lattice dual matches linear-solve oracle") {
    const RVec g[] = {vec({1, 0}), vec({0.5, std::sqrt(3.0) / 2})};
    const Lattice lat = make_lattice(g);
    const RMat oracle = oracle_dual(lat.generators());
    CHECK((lat.dual() - oracle).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((lat.dual_generator(0) - 2 * pi * vec({1, -1 / std::sqrt(3.0)})).norm() <= 1e-12);
    CHECK((lat.dual_generator(1) - 2 * pi * vec({0, 2 / std::sqrt(3.0)})).norm() <= 1e-12);
    CHECK(lat.dual_residual() <= 1e-12);
}

TEST_CASE("scalar lattice") {
    const RVec g[] = {vec({2 * pi})};
    const Lattice lat = make_lattice(g);
    CHECK(lat.dual_generator(0)[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("singular generators rejected") {
    const RVec g[] = {vec({1, 2}), vec({2, 4})};
    CHECK_THROWS_AS(make_lattice(g), SingularGenerators);
    const RVec tiny[] = {vec({1e-7, 0}), vec({0, 1e-7})};
    CHECK_THROWS_AS(make_lattice(tiny), SingularGenerators);
}

TEST_CASE("reduce_to_domain examples") {
    const RVec one[] = {vec({1})};
    const Lattice l1 = make_lattice(one);
    auto s = reduce_to_domain(vec({2.75}), l1);
    CHECK(s.lattice_part[0] == 3);
    CHECK(s.fractional_part[0] == doctest::Approx(-0.25));
    s = reduce_to_domain(vec({0.5}), l1);
    CHECK(s.lattice_part[0] == 1);
    CHECK(s.fractional_part[0] == doctest::Approx(-0.5));

    const RVec sq[] = {vec({1, 0}), vec({0, 1})};
    const Lattice l2 = make_lattice(sq);
    s = reduce_to_domain(vec({1.25, -0.75}), l2);
    CHECK(s.lattice_part[0] == 1);
    CHECK(s.lattice_part[1] == -1);
    CHECK(s.fractional_part[0] == doctest::Approx(0.25));
    CHECK(s.fractional_part[1] == doctest::Approx(0.25));
}

TEST_CASE("reduce_to_domain is idempotent and reconstructs x") {
    const RVec g[] = {vec({1, 0}), vec({0.5, std::sqrt(3.0) / 2})};
    const Lattice lat = make_lattice(g);
    for (double a = -3.1; a < 3.2; a += 0.37) {
        for (double b = -2.9; b < 3.0; b += 0.41) {
            const RVec x = vec({a, b});
            const auto s = reduce_to_domain(x, lat);
            const RVec back = lat.lattice_vector(s.lattice_part) + s.fractional_part;
            CHECK((back - x).norm() <= 1e-12);
            const auto t = reduce_to_domain(s.fractional_part, lat);
            CHECK(t.lattice_part[0] == 0);
            CHECK(t.lattice_part[1] == 0);
            CHECK((t.fractional_part - s.fractional_part).norm() <= 1e-14);
            const RVec f = lat.fractional_coordinates(s.fractional_part);
            CHECK(f.minCoeff() >= -0.5);
            CHECK(f.maxCoeff() < 0.5);
        }
    }
}

TEST_CASE("grid periodicity and inversion") {
    const RVec g[] = {vec({1, 0}), vec({0.5, std::sqrt(3.0) / 2})};
    const KGrid grid(make_lattice(g), {6, 4});
    CHECK(grid.size() == 24);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const IVec n = grid.coords(p);
        CHECK(grid.flat(n) == p);
        for (int j = 0; j < 2; ++j) {
            const auto w = grid.wrap(n + unit_ivec(j, grid.extent(j)));
            CHECK(w.flat == p);
            CHECK(w.winding[j] == 1);
            const RVec shifted = grid.point(n) + grid.lattice().dual_generator(j);
            CHECK((grid.point(n + unit_ivec(j, grid.extent(j))) - shifted).norm() <= 1e-12);
        }
        const std::size_t q = grid.negate(p);
        const RVec diff = grid.point(q) + grid.point(p);
        // −k(n) and k(q) differ by a dual lattice vector.
        const RVec frac = grid.lattice().generators().transpose() * diff / (2 * pi);
        for (int j = 0; j < 2; ++j) CHECK(std::abs(frac[j] - std::round(frac[j])) <= 1e-12);
    }
}

TEST_CASE("odd grid sizes rejected") {
    const RVec g[] = {vec({1})};
    CHECK_THROWS_AS(KGrid(make_lattice(g), {5}), InvalidArgument);
}

TEST_CASE("closed grid covers both faces") {
    const RVec g[] = {vec({1, 0}), vec({0, 1})};
    const KGrid grid(make_lattice(g), {4, 2});
    const ClosedGrid cg(grid);
    CHECK(cg.size() == 15);
    CHECK(cg.contains(IVec{2, 1, 0}));
    CHECK_FALSE(cg.is_interior(IVec{2, 0, 0}));
    CHECK(cg.is_interior(IVec{-2, -1, 0}));
    for (std::size_t f = 0; f < cg.size(); ++f) CHECK(cg.flat(cg.coords(f)) == f);
}
