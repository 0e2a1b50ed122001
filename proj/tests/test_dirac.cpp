#include <doctest.h>

#include "blochframes/dirac.hpp"
#include "blochframes/errors.hpp"
#include "blochframes/geometry.hpp"
#include "support.hpp"

using namespace bftest;

namespace {

std::map<IVec, cplx> symmetric_1d(double v) { return {{IVec{1, 0, 0}, v}, {IVec{-1, 0, 0}, v}}; }

}  // namespace

TEST_CASE("free Dirac anchor and labels") {
    const DiracPW d = dirac_model(1, 2);
    REQUIRE(d.basis.size() == 20);
    CHECK(dirac_anchor(d) == 10);
    const KGrid grid(d.basis.lattice(), {4});
    const auto lab = dirac_labelling(d, grid, 2);
    CHECK(lab.index_offset == 2);
    CHECK(lab.anchor == 10);
    const RVec& e0 = lab.bands.energies[grid.origin()];
    CHECK(e0[lab.index_offset] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e0[lab.index_offset - 1] == doctest::Approx(-1.0).epsilon(1e-12));
    // Oracle at k = 1/4 (γ* = 1): ±sqrt(k² + m²) for G = 0.
    const IVec quarter{1, 0, 0};
    const RVec& eq = lab.bands.energies[grid.flat(quarter)];
    CHECK(eq[lab.index_offset] == doctest::Approx(std::sqrt(1.0 / 16 + 1.0)).epsilon(1e-12));
    CHECK_THROWS_AS(dirac_labelling(d, grid, 10), WindowTruncation);
    CHECK_THROWS_AS(dirac_labelling(d, grid, 0), InvalidWindow);
}

TEST_CASE("constant potential shifts every label") {
    const DiracPW plain = dirac_model(1, 2, symmetric_1d(0.1));
    auto coeffs = symmetric_1d(0.1);
    coeffs[IVec{0, 0, 0}] = 0.3;
    const DiracPW shifted = dirac_model(1, 2, coeffs);
    const KGrid grid(plain.basis.lattice(), {6});
    const auto a = dirac_labelling(plain, grid, 3);
    const auto b = dirac_labelling(shifted, grid, 3);
    CHECK(a.anchor == b.anchor);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        CHECK((b.bands.energies[p] - a.bands.energies[p] - RVec::Constant(6, 0.3)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("time reversal is antiunitary") {
    const DiracPW d = dirac_model(2, 1, {}, 0.7);
    std::mt19937_64 rng(2);
    const int n = d.basis.size();
    const CVec x = random_vector(rng, n);
    const CVec y = random_vector(rng, n);
    const CVec tx = time_reversal_T(d.basis, x);
    const CVec ty = time_reversal_T(d.basis, y);
    CHECK(std::abs(tx.dot(ty) - y.dot(x)) <= 1e-12 * x.norm() * y.norm());
    CHECK(std::abs(tx.norm() - x.norm()) <= 1e-12 * x.norm());
    const cplx a(0.3, -1.2);
    CHECK((time_reversal_T(d.basis, a * x) - std::conj(a) * tx).norm() <= 1e-12 * x.norm());
    // With this spinor convention T² = −1.
    CHECK((time_reversal_T(d.basis, tx) + x).norm() <= 1e-12 * x.norm());
    const CMat& m = time_reversal_spinor();
    CHECK((m * m.conjugate() + CMat::Identity(4, 4)).norm() <= 1e-14);

    CHECK_THROWS_AS(time_reversal_T(PlaneWaveBasis::box(cubic(1, 1.0), 1), CVec::Zero(3)), WrongSpinDimension);
}

TEST_CASE("Dirac Hamiltonian commutes with time reversal") {
    std::map<IVec, cplx> c{{IVec{1, 0, 0}, 0.1}, {IVec{-1, 0, 0}, 0.1}, {IVec{0, 1, 0}, 0.2}, {IVec{0, -1, 0}, 0.2}};
    const DiracPW d = dirac_model(2, 1, c);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 5; ++i) {
        RVec k(2);
        k << u(rng), u(rng);
        CHECK(dirac_commutation_defect(d, k) <= 1e-12);
    }
}

TEST_CASE("Kramers pairs for a reflection-symmetric potential") {
    const DiracPW d = dirac_model(1, 4, symmetric_1d(0.1));
    const KGrid grid(d.basis.lattice(), {8});
    const auto report = kramers_check(d, grid, 4);
    CHECK(report.max_pairing_defect <= 1e-10);
    CHECK(report.odd_clusters.empty());
    CHECK(report.labelling.continuity_defect < 1.0);
}

TEST_CASE("Kramers check rejects asymmetric potentials") {
    const DiracPW d = dirac_model(1, 2, {{IVec{1, 0, 0}, cplx(0, 0.1)}, {IVec{-1, 0, 0}, cplx(0, -0.1)}});
    const KGrid grid(d.basis.lattice(), {4});
    CHECK_THROWS_AS(kramers_check(d, grid, 2), SymmetryViolation);
}

TEST_CASE("Dirac projector family is T-symmetric") {
    const DiracPW d = dirac_model(1, 8, symmetric_1d(0.1));
    const KGrid grid(d.basis.lattice(), {8});
    const auto fam = dirac_projector_family(d, grid, 0, 2);
    CHECK(fam.t_defect <= 1e-10);
    CHECK(fam.family.rank() == 2);
    CHECK(!fam.odd_window);
    // An odd window splits a Kramers doublet.
    CHECK_THROWS_AS(dirac_projector_family(d, grid, 0, 1), GapClosed);
    // Positive labels at k = 0 sit above the mass gap.
    CHECK(fam.family.gap() > 0.0);
    CHECK_THROWS_AS(dirac_projector_family(d, grid, 33, 4), WindowTruncation);
}

TEST_CASE("three-dimensional Dirac pair is gapped and trivial") {
    std::map<IVec, cplx> c;
    for (int j = 0; j < 3; ++j) {
        c[unit_ivec(j)] = 0.1;
        c[unit_ivec(j, -1)] = 0.1;
    }
    double previous = 0.0;
    for (int extent : {1, 2}) {
        const DiracPW d = dirac_model(3, extent, c, 1.0, TauMode::Cyclic);
        const KGrid grid(d.basis.lattice(), {2, 2, 2});
        const auto fam = dirac_projector_family(d, grid, 0, 2);
        CHECK(fam.family.gap() > 0.1);
        CHECK(chern_numbers(fam.family).trivial());
        // Box truncation limits the T-defect; it shrinks with the box.
        if (extent == 2) CHECK(fam.t_defect < 0.2 * previous);
        previous = fam.t_defect;
    }
}
