#include <doctest.h>

#include "akcy/setups.hpp"
#include "akcy/solver.hpp"
#include "akcy/spectral.hpp"
#include "oracles.hpp"

using namespace akcy;
using testing::TrigPoly;

namespace {
const GridSpec kGrid({8, 8, 8, 8}, {2 * M_PI, 2 * M_PI, 2 * M_PI, 2 * M_PI});

struct Setup {
    CompatibleTriple triple;
    DjOperator dj;
    MaSolver solver;
    explicit Setup(const GridSpec& g, SolverConfig cfg = {})
        : triple(standard_triple(g)), dj(triple), solver(triple, dj, cfg) {}
};
} // namespace

TEST_SUITE_BEGIN("ma_solver");

TEST_CASE("normalize_rhs: zero, constants, already-compatible f") {
    Setup s(kGrid);
    ScalarField zero(kGrid);
    CHECK(max_abs(s.solver.normalize_rhs(zero)) <= 1e-14);

    ScalarField c(kGrid);
    for (double& v : c.data) v = 0.7;
    CHECK(max_abs(s.solver.normalize_rhs(c)) <= 1e-13);

    // f = log(1 - 0.5 sin x0) already satisfies the volume identity
    ScalarField f = manufactured_f(kGrid, 0.5);
    ScalarField fn = s.solver.normalize_rhs(f);
    axpy(fn, -1.0, f);
    CHECK(max_abs(fn) <= 1e-12);

    // quadrature oracle: int e^f omega^2 = int omega^2 after normalization
    ScalarField r = random_scalar(kGrid, 201, 2, 0.8);
    ScalarField rn = s.solver.normalize_rhs(r);
    FourForm dens(kGrid);
    for (std::size_t p = 0; p < kGrid.points(); ++p) dens[p] = std::exp(rn[p]);
    CHECK(testing::grid_sum(dens) == doctest::Approx(std::pow(2 * M_PI, 4)).epsilon(1e-12));
}

TEST_CASE("ma_residual: zero case and the manufactured solution") {
    Setup s(kGrid);
    ScalarField zero(kGrid);
    CHECK(max_abs(s.solver.ma_residual(zero, zero)) <= 1e-13);

    // phi = 0.5 sin(x0), f = log(1 - 0.5 sin x0): residual vanishes
    ScalarField phi = manufactured_phi(kGrid, 0.5);
    ScalarField f = manufactured_f(kGrid, 0.5);
    CHECK(max_abs(s.solver.ma_residual(phi, f)) <= 1e-10);
}

TEST_CASE("ma_residual has zero volume mean for any phi and normalized f") {
    Setup s(kGrid);
    ScalarField phi = random_scalar(kGrid, 211, 2, 0.2);
    ScalarField f = s.solver.normalize_rhs(random_scalar(kGrid, 212, 2, 0.5));
    ScalarField r = s.solver.ma_residual(phi, f);
    FourForm dens = s.solver.omega_sq();
    for (std::size_t p = 0; p < kGrid.points(); ++p) dens[p] *= 0.5 * r[p];
    CHECK(std::abs(integrate(dens)) <= 1e-11 * s.solver.total_volume());
}

TEST_CASE("linearize_apply: flat Kahler identity -Delta and constants") {
    Setup s(kGrid);
    ScalarField zero(kGrid);
    ScalarField mode(kGrid);
    TrigPoly::for_points(kGrid, [&](std::size_t p, const std::array<double, 4>& x) {
        mode[p] = std::cos(x[0]);
    });
    ScalarField lm = s.solver.linearize_apply(zero, mode);
    axpy(lm, 1.0, mode); // L(0) cos = -cos
    CHECK(max_abs(lm) <= 1e-11);

    ScalarField c(kGrid);
    for (double& v : c.data) v = 3.0;
    ScalarField phi = random_scalar(kGrid, 221, 2, 0.2);
    CHECK(max_abs(s.solver.linearize_apply(phi, c)) <= 1e-12);
}

TEST_CASE("linearize_apply matches central differences to roundoff") {
    // The operator is exactly quadratic in phi, so central differences agree
    // with the linearization identically; the residual is roundoff at any h.
    Setup s(kGrid);
    ScalarField phi = random_scalar(kGrid, 231, 2, 0.15);
    ScalarField psi = random_scalar(kGrid, 232, 2, 1.0);
    ScalarField f = s.solver.normalize_rhs(ScalarField(kGrid));
    ScalarField lin = s.solver.linearize_apply(phi, psi);

    auto fd_error = [&](double h) {
        ScalarField plus = phi, minus = phi;
        axpy(plus, h, psi);
        axpy(minus, -h, psi);
        ScalarField rp = s.solver.ma_residual(plus, f);
        ScalarField rm = s.solver.ma_residual(minus, f);
        ScalarField diff(kGrid);
        for (std::size_t p = 0; p < kGrid.points(); ++p)
            diff[p] = (rp[p] - rm[p]) / (2.0 * h) - lin[p];
        return max_abs(diff);
    };
    CHECK(fd_error(1e-2) <= 1e-10);
    CHECK(fd_error(1e-3) <= 1e-10);
}

TEST_CASE("newton_solve: trivial f converges immediately") {
    Setup s(kGrid);
    ScalarField zero(kGrid);
    ScalarField f = s.solver.normalize_rhs(zero);
    NewtonResult res = s.solver.newton_solve(f, zero);
    CHECK(res.report.status == NewtonStatus::Converged);
    CHECK(res.report.iterations == 0);
    CHECK(max_abs(res.phi) <= 1e-13);
}

TEST_CASE("newton_solve: recovers the manufactured solution") {
    Setup s(kGrid);
    ScalarField f = manufactured_f(kGrid, 0.5);
    ScalarField phi_ref = manufactured_phi(kGrid, 0.5);
    NewtonResult res = s.solver.newton_solve(f, ScalarField(kGrid));
    REQUIRE(res.report.status == NewtonStatus::Converged);

    ScalarField err = res.phi;
    subtract_mean(err);
    ScalarField ref = phi_ref;
    subtract_mean(ref);
    axpy(err, -1.0, ref);
    CHECK(max_abs(err) <= 1e-8);

    // every accepted iterate kept positivity
    CHECK(res.report.min_a1 >= s.solver.config().positivity_margin);
    CHECK(res.report.min_a1 == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("newton_solve: aggressive amplitude raises PositivityLost, no NaN") {
    // e^f touching zero makes positivity unreachable: request a solution with
    // min eigenvalue below the margin by driving epsilon extremely close to 1
    SolverConfig cfg;
    cfg.positivity_margin = 5e-2; // a solution with min a1 = 0.01 is forbidden
    Setup s(kGrid, cfg);
    ScalarField f = manufactured_f(kGrid, 0.99);
    NewtonResult res = s.solver.newton_solve(f, ScalarField(kGrid));
    CHECK(res.report.status != NewtonStatus::Converged);
    CHECK(all_finite(res.phi));
    CHECK(all_finite(res.omega_phi));
}

TEST_CASE("continuation_solve: f = 0 immediate success") {
    Setup s(kGrid);
    ContinuationResult res = s.solver.continuation_solve(ScalarField(kGrid));
    CHECK(res.report.success);
    CHECK(max_abs(res.phi) <= 1e-10);
    CHECK(res.report.steps.back().t == 1.0);
}

TEST_CASE("continuation_solve: manufactured case with monotone t and monitors") {
    Setup s(kGrid);
    ScalarField f = manufactured_f(kGrid, 0.5);
    ContinuationResult res = s.solver.continuation_solve(f);
    REQUIRE(res.report.success);

    ScalarField err = res.phi;
    subtract_mean(err);
    ScalarField ref = manufactured_phi(kGrid, 0.5);
    subtract_mean(ref);
    axpy(err, -1.0, ref);
    CHECK(max_abs(err) <= 1e-8);

    double prev = -1.0;
    for (const auto& st : res.report.steps) {
        CHECK(st.t > prev);
        prev = st.t;
        CHECK(st.min_a1 > 0.0);
    }
    CHECK(res.report.steps.back().t == 1.0);
    CHECK(res.report.steps.back().residual_linf <= s.solver.config().newton_tol);

    // volume conservation along the path holds at the final state
    FourForm v1 = wedge_22(res.omega_phi, res.omega_phi);
    CHECK(std::abs(integrate(v1) - 2.0 * s.solver.total_volume()) <=
          1e-11 * s.solver.total_volume());
}

TEST_CASE("continuation_solve: works from a nonzero admissible warm start") {
    Setup s(kGrid);
    ScalarField f = manufactured_f(kGrid, 0.5);
    ScalarField seed = random_scalar(kGrid, 241, 1, 0.05);
    ContinuationResult a = s.solver.continuation_solve(f);
    ContinuationResult b = s.solver.continuation_solve(f, seed);
    REQUIRE(a.report.success);
    REQUIRE(b.report.success);

    // uniqueness up to constants: oscillation of the difference is tiny
    ScalarField diff = a.phi;
    axpy(diff, -1.0, b.phi);
    double lo = 1e300, hi = -1e300;
    for (double v : diff.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi - lo <= 1e-7);
}

TEST_CASE("continuation_solve: sandwich bound at t = 1") {
    Setup s(kGrid);
    ScalarField f = manufactured_f(kGrid, 0.6);
    ContinuationResult res = s.solver.continuation_solve(f);
    REQUIRE(res.report.success);

    // 2 omega_{1/2} +- (omega_1 - omega) must both be positive
    TwoForm d = res.omega_phi;
    axpy(d, -1.0, s.triple.omega()); // omega_1 - omega
    TwoForm mid = res.omega_phi;
    axpy(mid, 1.0, s.triple.omega()); // 2 omega_{1/2}
    TwoForm plus = mid, minus = mid;
    axpy(plus, 1.0, d);
    axpy(minus, -1.0, d);
    CHECK(positivity_check(plus, s.triple).ok);
    CHECK(positivity_check(minus, s.triple).ok);
}

TEST_CASE("tame_to_almost_kahler: already compatible form is returned unchanged") {
    CompatibleTriple triple = standard_triple(kGrid);
    auto [omega, rep] = tame_to_almost_kahler(triple.omega(), triple.J());
    TwoForm diff = omega;
    axpy(diff, -1.0, triple.omega());
    CHECK(max_abs(diff) <= 1e-12);
    CHECK(rep.kappa_inf <= 1e-12);
}

TEST_CASE("tame_to_almost_kahler: forward-constructed perturbation round trip") {
    CompatibleTriple triple = standard_triple(kGrid);
    // alpha0 = d*(anti-invariant potential) is orthogonal to ker d_J^-, so the
    // least-squares solve recovers it and Omega - d(alpha) = omega_std
    DjOperator dj(triple);
    AntiInvariantField c(kGrid);
    c.c1 = random_scalar(kGrid, 251, 1, 3e-5);
    c.c2 = random_scalar(kGrid, 252, 1, 3e-5);
    TwoForm psi0 = reconstruct(dj.frame(), c);
    OneForm alpha0 = codifferential(psi0, triple);

    TwoForm Omega = triple.omega();
    axpy(Omega, 1.0, exterior_d(alpha0));
    auto [omega, rep] = tame_to_almost_kahler(Omega, triple.J());
    TwoForm diff = omega;
    axpy(diff, -1.0, triple.omega());
    CHECK(max_abs(diff) <= 1e-8);
    CHECK(rep.taming_min > 0.9);
}

TEST_CASE("tame_to_almost_kahler: harmonic contamination raises ObstructionNonzero") {
    CompatibleTriple triple = standard_triple(kGrid);
    TwoForm Omega = triple.omega();
    for (std::size_t p = 0; p < kGrid.points(); ++p) {
        Omega.at(1, p) += 0.05; // 0.05 * (dx0^dx2 - dx1^dx3): constant, harmonic
        Omega.at(4, p) -= 0.05;
    }
    CHECK_THROWS_WITH_AS(tame_to_almost_kahler(Omega, triple.J()),
                         doctest::Contains("ObstructionNonzero"), Error);
}

TEST_CASE("tame_to_almost_kahler: non-taming form is rejected") {
    CompatibleTriple triple = standard_triple(kGrid);
    TwoForm Omega = triple.omega();
    scale(Omega, -1.0);
    CHECK_THROWS_WITH_AS(tame_to_almost_kahler(Omega, triple.J()),
                         doctest::Contains("NotTaming"), Error);
}

TEST_SUITE_END();
