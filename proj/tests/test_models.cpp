#include <doctest.h>

#include "blochframes/errors.hpp"
#include "support.hpp"

using namespace bftest;

namespace {

RVec kvec(double x) {
    RVec k(1);
    k << x;
    return k;
}

RVec dense_eigenvalues(const CMat& h) {
    return Eigen::SelfAdjointEigenSolver<CMat>(h, Eigen::EigenvaluesOnly).eigenvalues();
}

CMat conjugation_matrix(const PlaneWaveBasis& basis) {
    // C as (permutation) ∘ (complex conjugation): C H C = P conj(H) P.
    CMat p = CMat::Zero(basis.size(), basis.size());
    for (int g = 0; g < basis.num_g(); ++g) {
        const int partner = *basis.find(-basis.coords(g));
        for (int s = 0; s < basis.spin(); ++s) p(basis.index(g, s), basis.index(partner, s)) = 1.0;
    }
    return p;
}

}  // namespace

TEST_CASE("free particle at k = 0") {
    const ModelSpec m = free_particle_1d(1);
    const RVec e = dense_eigenvalues(assemble_fiber(m, kvec(0.0)));
    REQUIRE(e.size() == 3);
    CHECK(std::abs(e[0]) <= 1e-12);
    CHECK(std::abs(e[1] - 2 * kPi * kPi) <= 1e-12);
    CHECK(std::abs(e[2] - 2 * kPi * kPi) <= 1e-12);
}

TEST_CASE("free particle diagonal at shifted k") {
    const Lattice lat = cubic(1, 2 * kPi);
    const ModelSpec m = SchrodingerPW{PlaneWaveBasis::box(lat, 1), Potential{}, 0.5, TauMode::Truncating};
    const CMat h = assemble_fiber(m, kvec(0.3));
    const auto* basis = model_basis(m);
    for (int g = 0; g < basis->num_g(); ++g) {
        const double mm = basis->coords(g)[0];
        CHECK(std::abs(h(g, g) - 0.5 * (0.3 + mm) * (0.3 + mm)) <= 1e-15);
    }
    CHECK((h - CMat(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sphere basis is inversion symmetric and ordered") {
    const Lattice lat = cubic(2, 2 * kPi);
    const auto basis = PlaneWaveBasis::sphere(lat, 20.0);
    double last = 0.0;
    for (int g = 0; g < basis.num_g(); ++g) {
        CHECK(basis.find(-basis.coords(g)).has_value());
        const double len = basis.g_vector(g).squaredNorm();
        CHECK(0.5 * len <= 20.0);
        CHECK(len >= last);
        last = len;
    }
    // Count against brute force over a generous box.
    int count = 0;
    for (int a = -20; a <= 20; ++a)
        for (int b = -20; b <= 20; ++b)
            if (0.5 * (a * a + b * b) <= 20.0) ++count;
    CHECK(basis.num_g() == count);
}

TEST_CASE("Mathieu gap at the zone edge is 2v to first order") {
    const double v = 0.05;
    const ModelSpec m = mathieu_1d(v, 3);
    const RVec e = dense_eigenvalues(assemble_fiber(m, kvec(0.5)));
    CHECK(std::abs((e[1] - e[0]) - 2 * v) <= 0.1 * 2 * v);
    // Larger cutoff agrees.
    const RVec big = dense_eigenvalues(assemble_fiber(ModelSpec(mathieu_1d(v, 15)), kvec(0.5)));
    CHECK(std::abs((big[1] - big[0]) - (e[1] - e[0])) <= 1e-6);
}

TEST_CASE("hermiticity and time reversal at matrix level") {
    std::vector<ModelSpec> models = {mathieu_1d(0.3, 6), mathieu_2d(15.0),
                                     dirac_model(2, 2, {{IVec{1, 0, 0}, 0.1}, {IVec{-1, 0, 0}, 0.1}})};
    const ModelSpec schrod_complex = [] {
        auto m = mathieu_1d(0.0, 6);
        m.potential = Potential({{IVec{1, 0, 0}, cplx(0.1, 0.2)}, {IVec{-1, 0, 0}, cplx(0.1, -0.2)}});
        return m;
    }();
    models.push_back(schrod_complex);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (const auto& m : models) {
        const int d = model_lattice(m).dim();
        for (int trial = 0; trial < 5; ++trial) {
            RVec k(d);
            for (int j = 0; j < d; ++j) k[j] = u(rng);
            const CMat h = assemble_fiber(m, k);
            CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-13);
            if (std::holds_alternative<SchrodingerPW>(m)) {
                const CMat p = conjugation_matrix(*model_basis(m));
                const CMat hm = assemble_fiber(m, RVec(-k));
                CHECK((p * h.conjugate() * p - hm).cwiseAbs().maxCoeff() <= 1e-12);
            }
        }
    }
}

TEST_CASE("complex potential without reality is rejected") {
    CHECK_THROWS_AS(Potential({{IVec{1, 0, 0}, cplx(0.0, 0.1)}, {IVec{-1, 0, 0}, cplx(0.0, 0.1)}}), InvalidArgument);
    CHECK_NOTHROW(Potential({{IVec{1, 0, 0}, cplx(0.0, 0.1)}, {IVec{-1, 0, 0}, cplx(0.0, -0.1)}}));
}

TEST_CASE("tau shift examples") {
    const auto basis = PlaneWaveBasis::box(cubic(1, 2 * kPi), 3);
    CVec e0 = CVec::Zero(basis.size());
    e0[*basis.find(IVec{0, 0, 0})] = 1.0;
    CHECK(tau_shift(basis, IVec{0, 0, 0}, e0) == e0);
    const CVec s = tau_shift(basis, IVec{1, 0, 0}, e0);
    CHECK(s[*basis.find(IVec{1, 0, 0})] == cplx(1.0));
    CHECK(std::abs(s.norm() - 1.0) == 0.0);

    std::mt19937_64 rng(3);
    CVec interior = CVec::Zero(basis.size());
    for (int g = 0; g < basis.num_g(); ++g) {
        if (std::abs(basis.coords(g)[0]) <= 2) interior[g] = random_vector(rng, 1)[0];
    }
    const CVec round = tau_shift(basis, IVec{-1, 0, 0}, tau_shift(basis, IVec{1, 0, 0}, interior));
    CHECK((round - interior).norm() == 0.0);

    CVec edge = CVec::Zero(basis.size());
    edge[*basis.find(IVec{3, 0, 0})] = 1.0;
    CHECK_THROWS_AS(tau_shift(basis, IVec{1, 0, 0}, edge), ShiftLeavesBasis);
    const CVec cyc = tau_shift_cyclic(basis, IVec{1, 0, 0}, edge);
    CHECK(cyc[*basis.find(IVec{-3, 0, 0})] == cplx(1.0));
}

TEST_CASE("conjugation examples and antiunitarity") {
    const auto basis = PlaneWaveBasis::box(cubic(1, 2 * kPi), 2);
    CVec v = CVec::Zero(basis.size());
    v[*basis.find(IVec{1, 0, 0})] = cplx(0, 1);
    const CVec c = conjugate(basis, v);
    CHECK(c[*basis.find(IVec{-1, 0, 0})] == cplx(0, -1));
    CHECK(c.norm() == doctest::Approx(1.0));

    CVec sym = CVec::Zero(basis.size());
    for (int g = 0; g < basis.num_g(); ++g) sym[g] = 1.0 / (1.0 + std::abs(basis.coords(g)[0]));
    CHECK(conjugate(basis, sym) == sym);

    std::mt19937_64 rng(11);
    const auto dbasis = PlaneWaveBasis::box(cubic(2, 2 * kPi), 2, 4);
    for (int t = 0; t < 5; ++t) {
        const CVec phi = random_vector(rng, dbasis.size());
        const CVec psi = random_vector(rng, dbasis.size());
        const cplx lhs = conjugate(dbasis, phi).dot(conjugate(dbasis, psi));
        CHECK(std::abs(lhs - psi.dot(phi)) <= 1e-12 * phi.norm() * psi.norm());
        CHECK((conjugate(dbasis, conjugate(dbasis, phi)) - phi).norm() == 0.0);
    }
}

TEST_CASE("covariance defect vanishes for plane-wave models") {
    const ModelSpec mathieu = mathieu_1d(0.05, 8);
    CHECK(covariance_defect(mathieu, kvec(0.2), IVec{0, 0, 0}) == 0.0);
    CHECK(covariance_defect(mathieu, kvec(0.2), IVec{1, 0, 0}) <= 1e-12);
    RVec k3(3);
    k3 << 0.1, -0.2, 0.3;
    const ModelSpec dirac = dirac_model(3, 1);
    CHECK(covariance_defect(dirac, k3, IVec{1, 0, 0}) <= 1e-12);
    CHECK(covariance_defect(dirac, k3, IVec{0, -1, 1}) <= 1e-12);
    CHECK_THROWS_AS(covariance_defect(ModelSpec(qwz_family(1.0)), RVec::Zero(2), IVec{1, 0, 0}), NotApplicable);
}

TEST_CASE("spectrum is periodic in k within the interior window") {
    const ModelSpec m = mathieu_1d(0.4, 14);
    const RVec a = dense_eigenvalues(assemble_fiber(m, kvec(0.23)));
    const RVec b = dense_eigenvalues(assemble_fiber(m, kvec(1.23)));
    CHECK((a.head(5) - b.head(5)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Dirac algebra") {
    const auto& a = dirac_alpha();
    const CMat& b = dirac_beta();
    const CMat id = CMat::Identity(4, 4);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK((a[i] * a[j] + a[j] * a[i] - (i == j ? 2.0 : 0.0) * id).cwiseAbs().maxCoeff() == 0.0);
        }
        CHECK((a[i] * b + b * a[i]).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK((b * b - id).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("free Dirac G = 0 block eigenvalues") {
    const ModelSpec m = dirac_model(3, 1);
    RVec k(3);
    k << 0.2, 0.0, 0.0;
    const RVec e = dense_eigenvalues(assemble_fiber(m, k));
    // Closed form ±sqrt(1 + |k+G|²), each twofold; G = 0 gives ±sqrt(1.04).
    int plus = 0, minus = 0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (std::abs(e[i] - std::sqrt(1.04)) <= 1e-12) ++plus;
        if (std::abs(e[i] + std::sqrt(1.04)) <= 1e-12) ++minus;
    }
    CHECK(plus == 2);
    CHECK(minus == 2);
}

TEST_CASE("qwz family is periodic and traceless") {
    const ModelSpec m = qwz_family(1.0);
    RVec k(2);
    k << 0.3, -1.1;
    RVec k2 = k;
    k2[0] += 2 * kPi;
    const CMat h = assemble_fiber(m, k);
    CHECK((h - assemble_fiber(m, k2)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(std::abs(h.trace()) == 0.0);
    CHECK_THROWS_AS(make_explicit_family("qwz", {}), ConfigError);
    CHECK_THROWS_AS(make_explicit_family("haldane", {{"u", 1.0}}), ConfigError);
}

TEST_CASE("shift actions") {
    const auto m = mathieu_1d(0.1, 3, TauMode::Cyclic);
    const auto shift = make_shift_action(m);
    CHECK(shift->is_unitary());
    std::mt19937_64 rng(5);
    CMat cols(m.basis.size(), 2);
    cols.col(0) = random_vector(rng, m.basis.size());
    cols.col(1) = random_vector(rng, m.basis.size());
    const CMat back = shift->apply(IVec{2, 0, 0}, shift->apply_inverse(IVec{2, 0, 0}, cols));
    CHECK((back - cols).norm() <= 1e-14);
    CHECK(make_shift_action(ModelSpec(qwz_family(0.0)))->is_identity());
}
