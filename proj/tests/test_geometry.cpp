#include <doctest.h>

#include "blochframes/errors.hpp"
#include "blochframes/geometry.hpp"
#include "support.hpp"

using namespace bftest;

namespace {

ProjectorFamily qwz_lower(double u, int n) {
    const ModelSpec m = qwz_family(u);
    const KGrid grid(model_lattice(m), {n, n});
    return projector_family(solve_bands(m, grid, 2), BandWindow{0, 1});
}

CMat expi(const CMat& h) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    CVec ph(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) ph[i] = std::polar(1.0, es.eigenvalues()[i]);
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// Smooth rank-2 frame in ℂ⁴ over the 2-torus with an explicit formula.
struct AnalyticFrame {
    CMat a, b;
    CMat operator()(double t1, double t2) const {
        return expi(std::sin(t1) * a + std::cos(t2) * b).leftCols(2);
    }
};

AnalyticFrame make_analytic(std::mt19937_64& rng) {
    auto herm = [&] {
        CMat x(4, 4);
        for (int j = 0; j < 4; ++j) x.col(j) = random_vector(rng, 4);
        return CMat(0.3 * (x + x.adjoint()));
    };
    return {herm(), herm()};
}

std::vector<CMat> sample(const AnalyticFrame& f, const KGrid& grid) {
    std::vector<CMat> out(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const IVec n = grid.coords(p);
        out[p] = f(2 * kPi * n[0] / grid.extent(0), 2 * kPi * n[1] / grid.extent(1));
    }
    return out;
}

}  // namespace

TEST_CASE("constant family has zero curvature and Chern numbers") {
    const ModelSpec m = constant_family(3, 3);
    const KGrid grid(model_lattice(m), {4, 4, 4});
    const auto bands = solve_bands(m, grid, 3);
    for (BandWindow w : {BandWindow{0, 1}, BandWindow{0, 3}}) {
        const auto fam = projector_family(bands, w);
        const auto field = curvature(fam);
        for (const auto& o : field.omega) CHECK(o.cwiseAbs().maxCoeff() == 0.0);
        const auto report = chern_numbers(fam);
        CHECK(report.pairs.size() == 3);
        CHECK(report.trivial());
        CHECK(timereversal_defect(field) == 0.0);
        const auto conn = berry_connection(fam, std::vector<CMat>(fam.grid().size(), fam.columns(0)));
        for (const auto& s : conn)
            for (const auto& a : s.components) CHECK(a.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("qwz Chern numbers") {
    CHECK(chern_numbers(qwz_lower(1.0, 32)).pairs.at(0).chern == -1);
    CHECK(chern_numbers(qwz_lower(-1.0, 32)).pairs.at(0).chern == 1);
    CHECK(chern_numbers(qwz_lower(3.0, 32)).pairs.at(0).chern == 0);
    CHECK(chern_numbers(qwz_lower(-3.0, 32)).pairs.at(0).chern == 0);
    const auto report = chern_numbers(qwz_lower(1.0, 32));
    CHECK(report.pairs[0].integral);
    CHECK(report.timereversal_defect > 0.1);
}

TEST_CASE("Chern numbers are additive over windows") {
    const ModelSpec m = qwz_family(1.0);
    const KGrid grid(model_lattice(m), {24, 24});
    const auto bands = solve_bands(m, grid, 2);
    const int lower = chern_numbers(projector_family(bands, {0, 1})).pairs[0].chern;
    const int upper = chern_numbers(projector_family(bands, {1, 1})).pairs[0].chern;
    const int both = chern_numbers(projector_family(bands, {0, 2})).pairs[0].chern;
    CHECK(lower == -1);
    CHECK(lower + upper == both);
    CHECK(both == 0);
}

TEST_CASE("Chern numbers are gauge invariant") {
    const auto fam = qwz_lower(-1.0, 16);
    std::mt19937_64 rng(21);
    std::vector<CMat> remixed;
    for (std::size_t p = 0; p < fam.grid().size(); ++p) remixed.push_back(fam.columns(p) * random_unitary(rng, 1));
    const ProjectorFamily other(fam.grid(), fam.window(), fam.gap(), remixed, fam.shift());
    const auto a = chern_numbers(fam).pairs[0];
    const auto b = chern_numbers(other).pairs[0];
    CHECK(a.chern == b.chern);
    CHECK(std::abs(a.plaquette_sum - b.plaquette_sum) <= 1e-12);
    CHECK(std::abs(a.riemann - b.riemann) <= 1e-12);
}

TEST_CASE("Riemann estimate converges at second order") {
    const double e16 = std::abs(chern_numbers(qwz_lower(1.0, 16)).pairs[0].riemann + 1.0);
    const double e32 = std::abs(chern_numbers(qwz_lower(1.0, 32)).pairs[0].riemann + 1.0);
    CHECK(e16 / e32 > 3.0);
    const double f32 = std::abs(chern_numbers(qwz_lower(1.0, 32), 4).pairs[0].riemann + 1.0);
    CHECK(f32 < e32);
}

TEST_CASE("time-reversal curvature symmetry for a real potential") {
    const ModelSpec m = mathieu_2d(80.0);
    const KGrid grid(model_lattice(m), {8, 8});
    const auto fam = projector_family(solve_bands(m, grid, 2), BandWindow{0, 1});
    const auto field = curvature(fam);
    CHECK(timereversal_defect(field) <= 1e-10);
    for (const auto& o : field.omega) {
        CHECK(std::abs(o(0, 1).real()) <= 1e-10);
        CHECK(o(0, 1) == -o(1, 0));
    }
    const auto report = chern_numbers(fam, field);
    CHECK(report.pairs[0].chern == 0);
    CHECK(std::abs(report.pairs[0].riemann) <= 1e-3);
}

TEST_CASE("pure-gauge connection") {
    const ModelSpec m = constant_family(2, 2);
    const KGrid grid(model_lattice(m), {64, 8});
    const auto fam = projector_family(solve_bands(m, grid, 2), BandWindow{0, 1});
    const int slope = 2;
    std::vector<CMat> frame;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const double t1 = 2 * kPi * grid.coords(p)[0] / 64.0;
        frame.push_back(fam.columns(p) * std::polar(1.0, slope * t1));
    }
    const auto conn = berry_connection(fam, frame);
    const double h = 2 * kPi / 64.0;
    for (const auto& s : conn) {
        CHECK(std::abs(s.components[0](0, 0) - cplx(0, slope)) <= slope * slope * slope * h * h);
        CHECK(std::abs(s.components[1](0, 0)) <= 1e-14);
        CHECK(s.antihermitian_defect <= 1e-12);
    }
}

TEST_CASE("connection transforms under a smooth gauge") {
    std::mt19937_64 rng(31);
    const AnalyticFrame f = make_analytic(rng);
    CMat c(2, 2);
    c << 0.4, cplx(0.1, 0.2), cplx(0.1, -0.2), -0.3;
    const KGrid grid(cubic(2, 1.0), {64, 64});
    const auto frame = sample(f, grid);
    const ProjectorFamily fam(grid, {0, 2}, 1.0, frame, nullptr);
    std::vector<CMat> gauged(grid.size());
    std::vector<CMat> gmat(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const double t1 = 2 * kPi * grid.coords(p)[0] / 64.0;
        gmat[p] = expi(std::cos(t1) * c);
        gauged[p] = frame[p] * gmat[p];
    }
    const auto a = berry_connection(fam, frame, 4);
    const auto b = berry_connection(fam, gauged, 4);
    double worst = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const double t1 = 2 * kPi * grid.coords(p)[0] / 64.0;
        const CMat gdg = cplx(0, -std::sin(t1)) * c;  // G†∂₁G for G = exp(i cos θ₁ C)
        const CMat expected = gmat[p].adjoint() * a[p].components[0] * gmat[p] + gdg;
        worst = std::max(worst, (b[p].components[0] - expected).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("trace of the connection curvature matches the projector curvature") {
    std::mt19937_64 rng(41);
    const AnalyticFrame f = make_analytic(rng);
    double previous = 0.0;
    for (int n : {32, 64}) {
        const KGrid grid(cubic(2, 1.0), {n, n});
        const auto frame = sample(f, grid);
        const ProjectorFamily fam(grid, {0, 2}, 1.0, frame, nullptr);
        const auto omega = curvature(fam);
        const auto from_conn = connection_curvature(grid, berry_connection(fam, frame));
        double worst = 0.0;
        for (std::size_t p = 0; p < grid.size(); ++p) {
            worst = std::max(worst, std::abs(omega.omega[p](0, 1) - from_conn.omega[p](0, 1)));
        }
        if (previous > 0.0) CHECK(previous / worst > 3.0);
        previous = worst;
    }
}

TEST_CASE("singular plaquettes are reported") {
    const KGrid grid(cubic(2, 1.0), {4, 4});
    std::vector<CMat> cols(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const IVec n = grid.coords(p);
        cols[p] = CMat::Zero(2, 1);
        cols[p]((n[0] + 2) % 2, 0) = 1.0;
    }
    const ProjectorFamily fam(grid, {0, 1}, 1.0, cols, nullptr);
    CHECK_THROWS_AS(chern_numbers(fam), PlaquetteSingular);
}

TEST_CASE("frames that do not span P are rejected") {
    const auto fam = qwz_lower(3.0, 4);
    std::vector<CMat> wrong;
    for (std::size_t p = 0; p < fam.grid().size(); ++p) wrong.push_back(CMat::Identity(2, 1));
    CHECK_THROWS_AS(berry_connection(fam, wrong), FrameNotOrthonormal);
    CHECK_THROWS_AS(stencil_weights(3), InvalidArgument);
}
