#include "akcy/diagnostics.hpp"

#include <Eigen/Dense>

#include "akcy/krylov.hpp"
#include "akcy/setups.hpp"
#include "akcy/spectral.hpp"
#include "elliptic.hpp"

namespace akcy {

ScalarField potential_phi0(const TwoForm& omega, const TwoForm& omega1,
                           const CompatibleTriple& triple, double rel_tol, int max_iter) {
    require_same_grid(omega, triple.grid(), "potential_phi0");
    require_same_grid(omega1, triple.grid(), "potential_phi0");
    const GridSpec& g = triple.grid();
    const std::size_t np = g.points();

    // rho = -2 omega ^ (omega1 - omega) / omega^2
    TwoForm diff = omega1;
    axpy(diff, -1.0, omega);
    FourForm num = wedge_22(omega, diff);
    FourForm den = wedge_22(omega, omega);
    ScalarField rho(g);
    for (std::size_t p = 0; p < np; ++p) rho[p] = -2.0 * num[p] / den[p];

    // solvability: the volume mean must vanish ([omega1] = [omega])
    const double mean_val = integrate(hodge_star_0(rho, triple));
    FourForm volform(g);
    for (std::size_t p = 0; p < np; ++p) volform[p] = triple.sqrt_det()[p];
    const double vol = integrate(volform);
    if (std::abs(mean_val) > 1e-10 * std::max(1.0, max_abs(rho)) * vol)
        fail(ErrorCode::NotSolvable, "phi0 source term has nonzero volume mean");

    // CG on Delta_g phi = rho, symmetrized by the volume weight sqrt(det g)
    krylov::Vec b(np), x(np, 0.0);
    for (std::size_t p = 0; p < np; ++p) b[p] = rho[p] * triple.sqrt_det()[p];
    spectral::drop_nyquist(g, b.data());

    auto apply = [&](const krylov::Vec& in, krylov::Vec& out) {
        ScalarField phi(g);
        std::copy(in.begin(), in.end(), phi.data.begin());
        ScalarField lp = laplacian(phi, triple);
        out.resize(np);
        for (std::size_t p = 0; p < np; ++p) out[p] = lp[p] * triple.sqrt_det()[p];
        spectral::drop_nyquist(g, out.data());
    };
    double lambda_ref = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 4; ++a)
        lambda_ref = std::min(lambda_ref, std::pow(2.0 * M_PI / g.periods[a], 2));
    const double delta = 0.1 * lambda_ref;
    auto precond = [&](const krylov::Vec& in, krylov::Vec& out) {
        ScalarField r(g), z(g);
        std::copy(in.begin(), in.end(), r.data.begin());
        spectral::laplacian_shifted_inverse(g, r.comp(0), 1.0, delta, z.comp(0));
        spectral::drop_nyquist(g, z.comp(0));
        out.assign(z.data.begin(), z.data.end());
    };

    krylov::Options kopts;
    kopts.rel_tol = rel_tol;
    kopts.max_iter = max_iter;
    kopts.abs_tol = 1e-13 * std::max(1.0, krylov::norm(b));
    krylov::Result kres = krylov::cg(apply, precond, b, x, kopts);
    if (!kres.converged) fail(ErrorCode::NoConvergence, "phi0 Poisson solve hit the iteration cap");

    ScalarField phi0(g);
    std::copy(x.begin(), x.end(), phi0.data.begin());
    subtract_mean(phi0);
    return phi0;
}

Lemma1Report lemma1_check(const TwoForm& omega, const TwoForm& omega1, const ScalarField& f,
                          const CompatibleTriple& triple) {
    const GridSpec& g = triple.grid();
    const std::size_t np = g.points();

    Lemma1Report rep;
    rep.eigs = darboux_eigenvalues(omega, omega1, triple);

    TwoForm diff = omega1;
    axpy(diff, -1.0, omega);
    ScalarField norm2 = inner_22(diff, diff, triple);

    ScalarField phi0 = potential_phi0(omega, omega1, triple);
    ScalarField lap = laplacian(phi0, triple);

    for (std::size_t p = 0; p < np; ++p) {
        const double a1 = rep.eigs.a1[p], a2 = rep.eigs.a2[p];
        const double ef = std::exp(f[p]);
        rep.residual_det = std::max(rep.residual_det, std::abs(ef - a1 * a2));
        rep.residual_norm = std::max(
            rep.residual_norm, std::abs(norm2[p] - ((a1 - 1) * (a1 - 1) + (a2 - 1) * (a2 - 1))));
        rep.residual_lap = std::max(rep.residual_lap, std::abs(lap[p] - (2.0 - a1 - a2)));
    }
    rep.bound_margin = std::numeric_limits<double>::infinity();
    rep.printed_margin = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < np; ++p) {
        const double ef = std::exp(f[p]);
        rep.bound_margin = std::min(rep.bound_margin, 2.0 * (1.0 - std::sqrt(ef)) - lap[p]);
        rep.printed_margin = std::min(rep.printed_margin, 2.0 * (1.0 - ef) - lap[p]);
    }
    return rep;
}

SandwichReport sandwich_check(const TwoForm& omega, const TwoForm& omega1,
                              const CompatibleTriple& triple) {
    TwoForm diff = omega1;
    axpy(diff, -1.0, omega); // omega1 - omega
    TwoForm mid = omega1;
    axpy(mid, 1.0, omega); // 2 omega_1/2

    TwoForm plus = mid, minus = mid;
    axpy(plus, 1.0, diff);
    axpy(minus, -1.0, diff);
    SandwichReport rep;
    rep.margin_plus = positivity_check(plus, triple).min_a1;
    rep.margin_minus = positivity_check(minus, triple).min_a1;
    rep.ok = rep.margin_plus > 0.0 && rep.margin_minus > 0.0;
    return rep;
}

TraceIdentityReport trace_identity_check(const CompatibleTriple& triple, const TwoForm& omega1) {
    const GridSpec& g = triple.grid();
    const std::size_t np = g.points();
    EigenPairField eigs = darboux_eigenvalues(triple.omega(), omega1, triple);

    TraceIdentityReport rep;
    for (std::size_t p = 0; p < np; ++p) {
        const double a1 = eigs.a1[p], a2 = eigs.a2[p];
        rep.max_eigen_form = std::max(
            rep.max_eigen_form, std::abs((a1 + a2) / (a1 * a2) - (1.0 / a1 + 1.0 / a2)));
    }

    // matrix route: tr_g g1 sqrt(det g / det g1) = tr_{g1} g pointwise
    for (std::size_t p = 0; p < np; ++p) {
        Eigen::Matrix4d A1 = Eigen::Matrix4d::Zero(), Jm, G;
        for (int c = 0; c < 6; ++c) {
            const int a = kTwoFormPairs[c][0], b = kTwoFormPairs[c][1];
            A1(a, b) = omega1.at(c, p);
            A1(b, a) = -omega1.at(c, p);
        }
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                Jm(a, b) = triple.J().mat.at_ab(a, b, p);
                G(a, b) = triple.metric().at_ab(a, b, p);
            }
        Eigen::Matrix4d G1 = A1 * Jm;
        G1 = 0.5 * (G1 + G1.transpose());
        const double tr_g_g1 = (G.inverse() * G1).trace();
        const double tr_g1_g = (G1.inverse() * G).trace();
        const double detratio = std::sqrt(G.determinant() / G1.determinant());
        rep.max_matrix_form =
            std::max(rep.max_matrix_form, std::abs(tr_g_g1 * detratio - tr_g1_g));
    }
    return rep;
}

MonitorSeries apriori_monitor(const std::vector<TrajectoryPoint>& history,
                              const CompatibleTriple& triple, const DjOperator& dj) {
    const GridSpec& g = triple.grid();
    const std::size_t np = g.points();
    MonitorSeries out;
    out.bounded = true;

    for (const auto& point : history) {
        TwoForm omega_t = triple.omega();
        axpy(omega_t, 1.0, dj.dj_plus(point.phi));

        EigenPairField eigs = darboux_eigenvalues(triple.omega(), omega_t, triple);
        double smax = -1e300, amin = 1e300;
        for (std::size_t p = 0; p < np; ++p) {
            smax = std::max(smax, eigs.a1[p] + eigs.a2[p]);
            amin = std::min(amin, eigs.a1[p]);
        }
        out.t.push_back(point.t);
        out.max_trace.push_back(2.0 * smax);
        out.max_trace_half.push_back(smax);
        out.min_a1.push_back(amin);
        out.phi_linf.push_back(max_abs(point.phi));

        // |nabla g1|_{g1} proxy: spectral first derivatives of the g1 entries
        // contracted with g1 inverses
        MatrixField g1(g), g1_inv(g);
        {
            for (std::size_t p = 0; p < np; ++p) {
                Eigen::Matrix4d A1 = Eigen::Matrix4d::Zero(), Jm;
                for (int c = 0; c < 6; ++c) {
                    const int a = kTwoFormPairs[c][0], b = kTwoFormPairs[c][1];
                    A1(a, b) = omega_t.at(c, p);
                    A1(b, a) = -omega_t.at(c, p);
                }
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) Jm(a, b) = triple.J().mat.at_ab(a, b, p);
                Eigen::Matrix4d G1 = A1 * Jm;
                G1 = 0.5 * (G1 + G1.transpose());
                const Eigen::Matrix4d G1i = G1.inverse();
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) {
                        g1.at_ab(a, b, p) = G1(a, b);
                        g1_inv.at_ab(a, b, p) = G1i(a, b);
                    }
            }
        }
        std::array<MatrixField, 4> dg1;
        for (int ax = 0; ax < 4; ++ax) {
            dg1[ax] = MatrixField(g);
            for (int c = 0; c < 16; ++c)
                spectral::derivative(g, g1.comp(c), ax, dg1[ax].comp(c));
        }
        double grad_max = 0.0;
        for (std::size_t p = 0; p < np; ++p) {
            Eigen::Matrix4d G1i;
            std::array<Eigen::Matrix4d, 4> D, E;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    G1i(a, b) = g1_inv.at_ab(a, b, p);
                    for (int c = 0; c < 4; ++c) D[c](a, b) = dg1[c].at_ab(a, b, p);
                }
            for (int c = 0; c < 4; ++c) E[c] = G1i * D[c] * G1i;
            double s = 0.0;
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) s += G1i(c, d) * (E[c] * D[d].transpose()).trace();
            grad_max = std::max(grad_max, std::sqrt(std::max(0.0, s)));
        }
        out.grad_g1.push_back(grad_max);

        ScalarField phi0 = potential_phi0(triple.omega(), omega_t, triple);
        ScalarField lap = laplacian(phi0, triple);
        double lap_max = -1e300;
        for (std::size_t p = 0; p < np; ++p) lap_max = std::max(lap_max, lap[p]);
        out.max_lap_phi0.push_back(lap_max);

        if (!std::isfinite(smax) || !std::isfinite(grad_max) ||
            2.0 * smax > out.alarm_threshold)
            out.bounded = false;
    }
    return out;
}

UniquenessReport uniqueness_experiment(const MaSolver& solver, const ScalarField& f) {
    const GridSpec& g = f.grid;
    UniquenessReport rep;

    ContinuationResult a = solver.continuation_solve(f);
    rep.status_a = a.report.status;

    // fixed smooth mean-zero seed, halved until the warm start is admissible
    ScalarField seed = random_scalar(g, 9001, 1, 0.2);
    for (int tries = 0; tries < 40; ++tries) {
        TwoForm omega_seed = solver.triple().omega();
        axpy(omega_seed, 1.0, solver.dj().dj_plus(seed));
        QuadraticEigenBound qb = eigen_bounds_quadratic(omega_seed, solver.triple());
        if (qb.ok && qb.min_a1 >= 10.0 * solver.config().positivity_margin) break;
        scale(seed, 0.5);
    }

    ContinuationResult b = solver.continuation_solve(f, seed);
    rep.status_b = b.report.status;

    rep.both_converged = a.report.success && b.report.success;
    if (rep.both_converged) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t p = 0; p < g.points(); ++p) {
            const double v = a.phi[p] - b.phi[p];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        rep.oscillation = hi - lo;
    }
    return rep;
}

Decomposition44Report decomposition_44_check(const ScalarField& phi_solution,
                                             const TwoForm& omega1, const CompatibleTriple& triple,
                                             double rel_tol, int max_iter) {
    const GridSpec& g = triple.grid();
    const std::size_t np = g.points();

    // almost Kahler structure of the solved form
    CompatibleTriple triple1 = build_triple(omega1, AcStructure{triple.J().mat});

    // phi_1 from -1/2 Delta_{g1} phi_1 = omega1 ^ (omega1 - omega) / omega1^2
    ScalarField phi1 = potential_phi0(omega1, /*omega1=*/triple.omega(), triple1, rel_tol, max_iter);
    // note: potential solves -1/2 Delta phi = base ^ (other - base)/base^2 with
    // base = the triple's form; here base = omega1 and other = omega, which
    // flips the sign of the right-hand side relative to Eq. (s = 1):
    scale(phi1, -1.0);

    TwoForm djdphi1 = exterior_d(j_one_form(exterior_d(phi1), triple.J()));

    // G = (omega1 - omega) - dJd phi1, exact and closed; solve the 1-form
    // Hodge problem in g1 for the coexact potential: a = d*_{g1} psi
    TwoForm G = omega1;
    axpy(G, -1.0, triple.omega());
    axpy(G, -1.0, djdphi1);

    OneForm rhs = codifferential(G, triple1);
    auto T = [&](const OneForm& u) {
        ScalarField du_div = codifferential(u, triple1);
        OneForm part1 = codifferential(exterior_d(u), triple1);
        OneForm part2 = exterior_d(du_div);
        axpy(part1, 1.0, part2);
        return part1; // full 1-form Hodge Laplacian in g1
    };
    detail::OneFormCgResult sol = detail::oneform_weighted_cg(triple1, T, rhs, rel_tol, max_iter, 1.0);
    if (!sol.kres.converged)
        fail(ErrorCode::NoConvergence, "decomposition solve hit the iteration cap");
    OneForm& a = sol.solution;

    Decomposition44Report rep;
    rep.cg_iterations = sol.kres.iterations;
    rep.a_norm_inf = max_abs(a);

    TwoForm da = exterior_d(a);
    TwoForm res = G;
    axpy(res, -1.0, da);
    rep.residual_decomposition = max_abs(res);
    rep.residual_coclosed = max_abs(codifferential(a, triple1));

    FourForm wda = wedge_22(omega1, da);
    FourForm w1sq = wedge_22(omega1, omega1);
    double wmax = 0.0;
    for (std::size_t p = 0; p < np; ++p) wmax = std::max(wmax, std::abs(wda[p] / w1sq[p]));
    rep.residual_wedge = wmax;
    return rep;
}

} // namespace akcy
