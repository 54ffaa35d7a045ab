#include <doctest.h>

#include "akcy/dj.hpp"
#include "akcy/setups.hpp"
#include "akcy/spectral.hpp"
#include "oracles.hpp"

using namespace akcy;
using testing::TrigPoly;

namespace {
const GridSpec kGrid({8, 8, 8, 8}, {2 * M_PI, 2 * M_PI, 2 * M_PI, 2 * M_PI});

AntiInvariantField random_psi(const GridSpec& g, std::uint64_t seed) {
    AntiInvariantField psi(g);
    psi.c1 = random_scalar(g, seed, 2, 1.0);
    psi.c2 = random_scalar(g, seed + 1000, 2, 1.0);
    return psi;
}
} // namespace

TEST_SUITE_BEGIN("dj_operator");

TEST_CASE("frame: standard J recovers the constant anti-invariant pair") {
    CompatibleTriple triple = standard_triple(kGrid);
    AntiInvariantFrame fr = anti_invariant_frame(triple);
    // beta1 = dx0^dx2 - dx1^dx3, beta2 = dx0^dx3 + dx1^dx2 (already norm 2)
    for (std::size_t p = 0; p < kGrid.points(); ++p) {
        CHECK(fr.beta1.at(1, p) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(fr.beta1.at(4, p) == doctest::Approx(-1.0).epsilon(1e-13));
        CHECK(fr.beta2.at(2, p) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(fr.beta2.at(3, p) == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("frame: perturbed J gives anti-invariant orthonormal sections") {
    CompatibleTriple triple = perturbed_triple(kGrid, 21, 0.2);
    AntiInvariantFrame fr = anti_invariant_frame(triple);

    for (const TwoForm* b : {&fr.beta1, &fr.beta2}) {
        TwoForm jb = j_involution(*b, triple.J());
        axpy(jb, 1.0, *b);
        CHECK(max_abs(jb) <= 1e-10);
    }
    ScalarField n1 = inner_22(fr.beta1, fr.beta1, triple);
    ScalarField n12 = inner_22(fr.beta1, fr.beta2, triple);
    ScalarField n2 = inner_22(fr.beta2, fr.beta2, triple);
    for (std::size_t p = 0; p < kGrid.points(); ++p) {
        CHECK(n1[p] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(n2[p] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(std::abs(n12[p]) <= 1e-12);
    }

    // reconstruction is anti-invariant
    AntiInvariantField psi = random_psi(kGrid, 31);
    TwoForm sigma = reconstruct(fr, psi);
    TwoForm js = j_involution(sigma, triple.J());
    axpy(js, 1.0, sigma);
    CHECK(max_abs(js) <= 1e-10);
}

TEST_CASE("frame: orthogonal-pairing J degenerates the projection") {
    // J' pairs (x0,x2) and (x1,x3); the standard candidates project to zero.
    MatrixField Jm(kGrid);
    for (std::size_t p = 0; p < kGrid.points(); ++p) {
        Jm.at_ab(2, 0, p) = 1.0;
        Jm.at_ab(0, 2, p) = -1.0;
        Jm.at_ab(3, 1, p) = 1.0;
        Jm.at_ab(1, 3, p) = -1.0;
    }
    TwoForm wp(kGrid);
    for (std::size_t p = 0; p < kGrid.points(); ++p) {
        wp.at(1, p) = 1.0; // dx0^dx2
        wp.at(4, p) = 1.0; // dx1^dx3
    }
    CompatibleTriple triple = build_triple(wp, AcStructure(Jm));
    CHECK_THROWS_WITH_AS(anti_invariant_frame(triple), doctest::Contains("FrameDegenerate"), Error);
}

TEST_CASE("lejmi_apply: zero, self-adjointness, nonnegativity") {
    for (int which = 0; which < 2; ++which) {
        CompatibleTriple triple =
            (which == 0) ? standard_triple(kGrid) : perturbed_triple(kGrid, 22, 0.15);
        DjOperator dj(triple);

        CHECK(max_abs(dj.lejmi_apply(AntiInvariantField(kGrid)).c1) == 0.0);

        AntiInvariantField psi1 = random_psi(kGrid, 41);
        AntiInvariantField psi2 = random_psi(kGrid, 43);
        AntiInvariantField p1 = dj.lejmi_apply(psi1);
        AntiInvariantField p2 = dj.lejmi_apply(psi2);

        // direct-summation L2 pairing oracle
        auto pair = [&](const AntiInvariantField& a, const AntiInvariantField& b) {
            double s = 0.0;
            for (std::size_t p = 0; p < kGrid.points(); ++p)
                s += (a.c1[p] * b.c1[p] + a.c2[p] * b.c2[p]) * 2.0 * triple.sqrt_det()[p];
            return s * kGrid.cell_volume();
        };
        const double lhs = pair(p1, psi2);
        const double rhs = pair(psi1, p2);
        CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));

        // <P psi, psi> = |d* psi|^2 >= 0 (quadratic-form oracle)
        TwoForm sigma = reconstruct(dj.frame(), psi1);
        OneForm ds = codifferential(sigma, triple);
        const double qf = dj.lejmi_quadratic_form(psi1);
        const double dsn = l2_inner(ds, ds, triple);
        CHECK(qf == doctest::Approx(dsn).epsilon(1e-9));
        CHECK(qf >= -1e-10);
    }
}

TEST_CASE("solve_sigma: integrable structure gives sigma = 0") {
    CompatibleTriple triple = standard_triple(kGrid);
    DjOperator dj(triple);

    // d(J d phi) is already J-invariant for the flat structure
    ScalarField phi = random_scalar(kGrid, 51, 2, 1.0);
    TwoForm djdphi = exterior_d(j_one_form(exterior_d(phi), triple.J()));
    TwoForm anti = project_invariant(djdphi, triple.J(), Sign::Minus);
    CHECK(max_abs(anti) <= 1e-11);

    auto [sigma, rep] = dj.solve_sigma(phi);
    CHECK(rep.converged);
    CHECK(max_abs(sigma.c1) <= 1e-10);
    CHECK(max_abs(sigma.c2) <= 1e-10);

    auto [sigma0, rep0] = dj.solve_sigma(ScalarField(kGrid));
    CHECK(rep0.converged);
    CHECK(max_abs(sigma0.c1) == 0.0);
}

TEST_CASE("solve_sigma: perturbed J satisfies the anti-invariant equation") {
    // strict residuals need the structure resolved: 16^4 grid, fundamental-mode
    // perturbation (the J spectrum tail at Nyquist floors the residual)
    const GridSpec fine({16, 16, 16, 16}, {2 * M_PI, 2 * M_PI, 2 * M_PI, 2 * M_PI});
    CompatibleTriple triple = perturbed_triple(fine, 23, 0.1);
    DjOperator dj(triple);
    ScalarField phi = random_scalar(fine, 61, 2, 1.0);

    // the sigma path must be genuinely exercised
    TwoForm djdphi = exterior_d(j_one_form(exterior_d(phi), triple.J()));
    CHECK(max_abs(project_invariant(djdphi, triple.J(), Sign::Minus)) > 1e-4);

    auto res = dj.apply(phi);
    CHECK(res.report.converged);

    // residual oracle: direct evaluation of d_J^- W and d* W
    TwoForm dw_anti = project_invariant(res.dw, triple.J(), Sign::Minus);
    CHECK(max_abs(dw_anti) <= 1e-9);
    CHECK(max_abs(codifferential(res.w, triple)) <= 1e-9);
}

TEST_CASE("w_field: hand value on the flat torus, kernel, divergence-free") {
    CompatibleTriple triple = standard_triple(kGrid);
    DjOperator dj(triple);

    // phi = sin x0 -> W = cos(x0) dx1, with d* W = 0
    ScalarField phi(kGrid);
    TrigPoly::for_points(kGrid, [&](std::size_t p, const std::array<double, 4>& x) {
        phi[p] = std::sin(x[0]);
    });
    OneForm w = dj.w_field(phi);
    double err = 0.0;
    TrigPoly::for_points(kGrid, [&](std::size_t p, const std::array<double, 4>& x) {
        err = std::max(err, std::abs(w.at(1, p) - std::cos(x[0])));
        err = std::max(err, std::abs(w.at(0, p)));
        err = std::max(err, std::abs(w.at(2, p)));
        err = std::max(err, std::abs(w.at(3, p)));
    });
    CHECK(err <= 1e-12);
    CHECK(max_abs(codifferential(w, triple)) <= 1e-11);

    // constants are in the kernel
    ScalarField c(kGrid);
    for (double& v : c.data) v = 4.2;
    CHECK(max_abs(dj.w_field(c)) <= 1e-13);
    CHECK(max_abs(dj.dj_plus(c)) <= 1e-13);
}

TEST_CASE("w_field: divergence constraint on random phi, including perturbed J") {
    for (int which = 0; which < 2; ++which) {
        CompatibleTriple triple =
            (which == 0) ? standard_triple(kGrid) : perturbed_triple(kGrid, 24, 0.1);
        DjOperator dj(triple);
        ScalarField phi = random_scalar(kGrid, 71 + which, 2, 1.0);
        OneForm w = dj.w_field(phi);
        CHECK(max_abs(codifferential(w, triple)) <= 1e-9);
    }
}

TEST_CASE("dj_plus: hand value, exactness, volume neutrality") {
    CompatibleTriple triple = standard_triple(kGrid);
    DjOperator dj(triple);

    const double eps = 0.25;
    ScalarField phi(kGrid);
    TrigPoly::for_points(kGrid, [&](std::size_t p, const std::array<double, 4>& x) {
        phi[p] = eps * std::sin(x[0]);
    });
    TwoForm d = dj.dj_plus(phi);
    double err = 0.0;
    TrigPoly::for_points(kGrid, [&](std::size_t p, const std::array<double, 4>& x) {
        err = std::max(err, std::abs(d.at(0, p) + eps * std::sin(x[0])));
        for (int c = 1; c < 6; ++c) err = std::max(err, std::abs(d.at(c, p)));
    });
    CHECK(err <= 1e-12);
}

TEST_CASE("dj_plus: volume neutrality and J-invariance on random phi") {
    for (int which = 0; which < 2; ++which) {
        CompatibleTriple triple =
            (which == 0) ? standard_triple(kGrid) : perturbed_triple(kGrid, 25, 0.1);
        DjOperator dj(triple);
        ScalarField phi = random_scalar(kGrid, 81 + which, 2, 0.3);
        TwoForm d = dj.dj_plus(phi);

        TwoForm w1 = triple.omega();
        axpy(w1, 1.0, d);
        FourForm v1 = wedge_22(w1, w1);
        FourForm v0 = wedge_22(triple.omega(), triple.omega());
        const double I1 = integrate(v1);
        const double I0 = integrate(v0);
        CHECK(std::abs(I1 - I0) <= 1e-11 * std::abs(I0));

        // on the coarse 8^4 grid the anti-invariant residual is floored by the
        // truncation error of the perturbed structure itself
        const double tol = (which == 0) ? 1e-9 : 1e-3;
        CHECK(max_abs(project_invariant(d, triple.J(), Sign::Minus)) <= tol);
    }
}

TEST_CASE("dj_plus reduces to d J d phi for the standard integrable J") {
    CompatibleTriple triple = standard_triple(kGrid);
    DjOperator dj(triple);
    ScalarField phi = random_scalar(kGrid, 91, 2, 1.0);
    TwoForm d = dj.dj_plus(phi);
    TwoForm djd = exterior_d(j_one_form(exterior_d(phi), triple.J()));
    axpy(djd, -1.0, d);
    CHECK(max_abs(djd) <= 1e-9);
}

TEST_CASE("dj_plus is linear") {
    CompatibleTriple triple = perturbed_triple(kGrid, 26, 0.1);
    DjOperator dj(triple);
    ScalarField phi = random_scalar(kGrid, 95, 2, 1.0);
    ScalarField psi = random_scalar(kGrid, 96, 2, 1.0);
    const double a = 0.7, b = -1.3;

    ScalarField combo(kGrid);
    for (std::size_t p = 0; p < kGrid.points(); ++p) combo[p] = a * phi[p] + b * psi[p];
    TwoForm lhs = dj.dj_plus(combo);
    TwoForm rhs = dj.dj_plus(phi);
    scale(rhs, a);
    axpy(rhs, b, dj.dj_plus(psi));
    axpy(rhs, -1.0, lhs);
    CHECK(max_abs(rhs) <= 1e-10 * std::max(1.0, max_abs(lhs)));
}

TEST_CASE("mean projection is weighted by the volume form and logged in kernel") {
    CompatibleTriple triple = standard_triple(kGrid);
    DjOperator dj(triple);
    ScalarField phi = random_scalar(kGrid, 97, 2, 1.0);
    for (double& v : phi.data) v += 2.0; // nonzero mean is projected silently
    TwoForm d1 = dj.dj_plus(phi);
    subtract_mean(phi);
    TwoForm d2 = dj.dj_plus(phi);
    axpy(d2, -1.0, d1);
    CHECK(max_abs(d2) <= 1e-12);
}

TEST_CASE("harmonic_anti_dim: flat Kahler torus has a 2-dimensional kernel") {
    CompatibleTriple triple = standard_triple(kGrid);
    DjOperator dj(triple);

    // oracle: P annihilates the constant-coefficient fields
    AntiInvariantField c(kGrid);
    for (double& v : c.c1.data) v = 1.0;
    AntiInvariantField pc = dj.lejmi_apply(c);
    CHECK(max_abs(pc.c1) <= 1e-12);
    CHECK(max_abs(pc.c2) <= 1e-12);

    HarmonicReport rep = dj.harmonic_anti_dim();
    CHECK(rep.converged);
    CHECK(rep.dim == 2);
    CHECK(rep.gap_ratio >= 10.0);
    // flat spectrum: 0, 0, then 1/2 |k|^2 with |k|^2 = 1 (the witness is an
    // estimate; only its order matters for the gap)
    CHECK(rep.eigenvalues[2] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("harmonic_anti_dim: perturbed J reports a positive gap") {
    CompatibleTriple triple = perturbed_triple(kGrid, 27, 0.1);
    DjOperator dj(triple);
    HarmonicReport rep = dj.harmonic_anti_dim();
    CHECK(rep.converged);
    CHECK(rep.dim <= 2);
    // Rayleigh quotient beyond the numerical kernel is strictly positive
    CHECK(rep.eigenvalues[rep.dim] > 0.0);

    AntiInvariantField psi = random_psi(kGrid, 99);
    subtract_mean(psi.c1);
    subtract_mean(psi.c2);
    CHECK(dj.lejmi_quadratic_form(psi) > 0.0);
}

TEST_SUITE_END();
