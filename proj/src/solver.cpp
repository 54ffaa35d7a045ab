#include "akcy/solver.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "akcy/krylov.hpp"
#include "akcy/spectral.hpp"
#include "elliptic.hpp"

namespace akcy {

MaSolver::MaSolver(const CompatibleTriple& triple, const DjOperator& dj, SolverConfig cfg)
    : triple_(triple), dj_(dj), cfg_(cfg) {
    cfg_.validate();
    ww_ = wedge_22(triple.omega(), triple.omega());
    FourForm vol = ww_;
    scale(vol, 0.5);
    total_volume_ = integrate(vol);
}

ScalarField MaSolver::normalize_rhs(const ScalarField& f) const {
    require_same_grid(f, triple_.grid(), "normalize_rhs");
    require_finite(f, "normalize_rhs");
    FourForm efw(f.grid);
    for (std::size_t p = 0; p < f.grid.points(); ++p) efw[p] = 0.5 * std::exp(f[p]) * ww_[p];
    const double c = -std::log(integrate(efw) / total_volume_);
    ScalarField out = f;
    for (double& v : out.data) v += c;
    return out;
}

ScalarField MaSolver::residual_from(const TwoForm& omega_phi, const ScalarField& exp_f) const {
    FourForm sq = wedge_22(omega_phi, omega_phi, cfg_.dealias);
    ScalarField out(omega_phi.grid);
    for (std::size_t p = 0; p < omega_phi.grid.points(); ++p)
        out[p] = sq[p] / ww_[p] - exp_f[p];
    return out;
}

ScalarField MaSolver::ma_residual(const ScalarField& phi, const ScalarField& f) const {
    TwoForm omega_phi = triple_.omega();
    axpy(omega_phi, 1.0, dj_.dj_plus(phi));
    ScalarField exp_f(f.grid);
    for (std::size_t p = 0; p < f.grid.points(); ++p) exp_f[p] = std::exp(f[p]);
    return residual_from(omega_phi, exp_f);
}

ScalarField MaSolver::linearize_from(const TwoForm& omega_phi, const ScalarField& psi) const {
    TwoForm dpsi = dj_.dj_plus(psi);
    FourForm w = wedge_22(omega_phi, dpsi, cfg_.dealias);
    ScalarField out(psi.grid);
    for (std::size_t p = 0; p < psi.grid.points(); ++p) out[p] = 2.0 * w[p] / ww_[p];
    return out;
}

ScalarField MaSolver::linearize_apply(const ScalarField& phi, const ScalarField& psi) const {
    TwoForm omega_phi = triple_.omega();
    axpy(omega_phi, 1.0, dj_.dj_plus(phi));
    return linearize_from(omega_phi, psi);
}

double MaSolver::volume_l2(const ScalarField& r) const {
    double s = 0.0;
    for (std::size_t p = 0; p < r.grid.points(); ++p) s += r[p] * r[p] * 0.5 * ww_[p];
    return std::sqrt(s * r.grid.cell_volume() / total_volume_);
}

ContinuationStep MaSolver::measure(const TwoForm& omega_phi, const ScalarField& phi,
                                   const ScalarField& residual) const {
    ContinuationStep st;
    st.residual_linf = max_abs(residual);
    st.residual_l2 = volume_l2(residual);
    st.phi_linf = max_abs(phi);
    QuadraticEigenBound qb = eigen_bounds_quadratic(omega_phi, triple_);
    st.min_a1 = qb.min_a1;

    // tr_g g1 = 2 (a1 + a2): from the wedge trace route
    FourForm w1w = wedge_22(triple_.omega(), omega_phi);
    double smax = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < phi.grid.points(); ++p)
        smax = std::max(smax, 2.0 * w1w[p] / ww_[p]);
    st.max_trace = 2.0 * smax;
    return st;
}

NewtonResult MaSolver::newton_solve(const ScalarField& f, const ScalarField& phi_init) const {
    require_same_grid(f, triple_.grid(), "newton_solve");
    const GridSpec& g = triple_.grid();
    const std::size_t np = g.points();

    ScalarField exp_f(g);
    for (std::size_t p = 0; p < np; ++p) exp_f[p] = std::exp(f[p]);

    NewtonResult out{phi_init, TwoForm(g), {}};
    dj_.project_mean(out.phi);

    try {
        out.omega_phi = triple_.omega();
        axpy(out.omega_phi, 1.0, dj_.dj_plus(out.phi));
    } catch (const Error&) {
        out.report.status = NewtonStatus::KrylovStall;
        return out;
    }

    {
        QuadraticEigenBound qb = eigen_bounds_quadratic(out.omega_phi, triple_);
        out.report.min_a1 = qb.min_a1;
        if (!qb.ok || qb.min_a1 < cfg_.positivity_margin) {
            out.report.status = NewtonStatus::PositivityLost;
            return out;
        }
    }

    auto precond = [&](const krylov::Vec& in, krylov::Vec& z) {
        ScalarField r(g);
        std::copy(in.begin(), in.end(), r.data.begin());
        subtract_mean(r);
        ScalarField s = flat_poisson_solve(r, 1e300);
        spectral::drop_nyquist(g, s.comp(0));
        dj_.project_mean(s);
        z.assign(s.data.begin(), s.data.end());
    };

    int total_applies = 0;
    for (int it = 0; it <= cfg_.newton_max; ++it) {
        if (cfg_.cancel && cfg_.cancel->load()) {
            out.report.status = NewtonStatus::Cancelled;
            return out;
        }
        // Galerkin reading of the collocation system: residual and update live
        // on the fully-resolved modes. Spectral derivatives cannot see the
        // Nyquist ring, so pointwise targets with ring content (e^{tf} at
        // intermediate t) would otherwise put the tolerance out of reach.
        ScalarField F = residual_from(out.omega_phi, exp_f);
        out.report.residual_raw_linf = max_abs(F);
        drop_nyquist(F);
        out.report.residual_linf = max_abs(F);
        out.report.residual_l2 = volume_l2(F);
        out.report.iterations = it;
        if (out.report.residual_linf <= cfg_.newton_tol) {
            out.report.status = NewtonStatus::Converged;
            return out;
        }
        if (it == cfg_.newton_max) break; // cap reached with residual above tol

        // solve -L(phi) delta = F, matrix-free GMRES with the flat inverse
        auto apply = [&](const krylov::Vec& in, krylov::Vec& y) {
            ScalarField psi(g);
            std::copy(in.begin(), in.end(), psi.data.begin());
            ScalarField lp = linearize_from(out.omega_phi, psi);
            spectral::drop_nyquist(g, lp.comp(0));
            y.resize(np);
            for (std::size_t p = 0; p < np; ++p) y[p] = -lp.data[p];
        };
        krylov::Vec b(F.data.begin(), F.data.end());
        krylov::Vec x(np, 0.0);
        krylov::Options kopts;
        kopts.rel_tol = cfg_.krylov_tol;
        kopts.max_iter = std::max(1, cfg_.krylov_max - total_applies);
        krylov::Result kres;
        try {
            kres = krylov::gmres(apply, precond, b, x, kopts);
        } catch (const Error&) {
            out.report.status = NewtonStatus::KrylovStall;
            return out;
        }
        total_applies += kres.iterations;
        out.report.krylov_applies = total_applies;
        if (!kres.converged) {
            out.report.status = NewtonStatus::KrylovStall;
            return out;
        }

        ScalarField delta(g);
        std::copy(x.begin(), x.end(), delta.data.begin());
        dj_.project_mean(delta);

        TwoForm d_delta;
        try {
            d_delta = dj_.dj_plus(delta);
        } catch (const Error&) {
            out.report.status = NewtonStatus::KrylovStall;
            return out;
        }

        // backtracking line search, factor 1/2, floor 2^-20
        double s = 1.0;
        bool positivity_blocked = false;
        bool accepted = false;
        while (s >= std::pow(0.5, 20)) {
            TwoForm omega_trial = out.omega_phi;
            axpy(omega_trial, s, d_delta);
            QuadraticEigenBound qb = eigen_bounds_quadratic(omega_trial, triple_);
            if (!qb.ok || qb.min_a1 < cfg_.positivity_margin) {
                positivity_blocked = true;
                s *= 0.5;
                continue;
            }
            ScalarField Ft = residual_from(omega_trial, exp_f);
            drop_nyquist(Ft);
            if (max_abs(Ft) < out.report.residual_linf) {
                for (std::size_t p = 0; p < np; ++p) out.phi.data[p] += s * delta.data[p];
                dj_.project_mean(out.phi);
                out.omega_phi = std::move(omega_trial);
                out.report.min_a1 = qb.min_a1;
                accepted = true;
                break;
            }
            positivity_blocked = false;
            s *= 0.5;
        }
        if (!accepted) {
            out.report.status =
                positivity_blocked ? NewtonStatus::PositivityLost : NewtonStatus::Diverged;
            return out;
        }
    }
    out.report.status = NewtonStatus::Diverged;
    return out;
}

ContinuationResult MaSolver::continuation_solve(const ScalarField& f,
                                                const std::optional<ScalarField>& phi_init) const {
    const GridSpec& g = triple_.grid();
    ScalarField f_norm = normalize_rhs(f);

    ContinuationResult out{phi_init ? *phi_init : ScalarField(g), TwoForm(g), {}};
    dj_.project_mean(out.phi);
    out.omega_phi = triple_.omega();
    axpy(out.omega_phi, 1.0, dj_.dj_plus(out.phi));

    {
        // record the warm-start state against the t = 0 problem (f = 0)
        ScalarField exp0(g);
        for (double& v : exp0.data) v = 1.0;
        ScalarField F0 = residual_from(out.omega_phi, exp0);
        ContinuationStep st = measure(out.omega_phi, out.phi, F0);
        st.t = 0.0;
        out.report.steps.push_back(st);
        out.trajectory.push_back({0.0, out.phi});
        QuadraticEigenBound qb = eigen_bounds_quadratic(out.omega_phi, triple_);
        if (!qb.ok || qb.min_a1 < cfg_.positivity_margin) {
            out.report.status = ContinuationStatus::InnerFailure;
            out.report.last_newton = NewtonStatus::PositivityLost;
            return out;
        }
    }

    double t = 0.0;
    double step = cfg_.t_step_init;
    int easy_streak = 0;
    while (t < 1.0) {
        if (cfg_.cancel && cfg_.cancel->load()) {
            out.report.status = ContinuationStatus::Cancelled;
            return out;
        }
        const double t_try = std::min(1.0, t + step);
        ScalarField ft(g);
        for (std::size_t p = 0; p < g.points(); ++p) ft[p] = t_try * f_norm[p];
        ft = normalize_rhs(ft); // per-step renormalization c(t)

        NewtonResult nres = newton_solve(ft, out.phi);
        if (nres.report.status == NewtonStatus::Converged) {
            t = t_try;
            out.phi = std::move(nres.phi);
            out.omega_phi = std::move(nres.omega_phi);
            ScalarField exp_f(g);
            for (std::size_t p = 0; p < g.points(); ++p) exp_f[p] = std::exp(ft[p]);
            ScalarField F = residual_from(out.omega_phi, exp_f);
            ContinuationStep st = measure(out.omega_phi, out.phi, F);
            st.t = t;
            st.newton_iters = nres.report.iterations;
            out.report.steps.push_back(st);
            out.trajectory.push_back({t, out.phi});

            if (nres.report.iterations <= 3) {
                if (++easy_streak >= 2) {
                    step = std::min(2.0 * step, 1.0);
                    easy_streak = 0;
                }
            } else {
                easy_streak = 0;
            }
        } else if (nres.report.status == NewtonStatus::Cancelled) {
            out.report.status = ContinuationStatus::Cancelled;
            out.report.last_newton = nres.report.status;
            return out;
        } else {
            out.report.last_newton = nres.report.status;
            easy_streak = 0;
            step *= 0.5;
            if (step < cfg_.t_step_min) {
                out.report.status = ContinuationStatus::StepUnderflow;
                return out;
            }
        }
    }
    out.report.status = ContinuationStatus::Success;
    out.report.success = true;
    return out;
}

std::pair<TwoForm, TameReport> tame_to_almost_kahler(const TwoForm& Omega, const AcStructure& J,
                                                     TameOptions opts) {
    require_same_grid(Omega, J.grid(), "tame_to_almost_kahler");
    require_finite(Omega, "tame_to_almost_kahler");
    const GridSpec& g = Omega.grid;
    const std::size_t np = g.points();
    const double scale_ref = std::max(1.0, max_abs(Omega));

    const double closed_defect = max_abs(exterior_d(Omega));
    if (closed_defect > 1e-10 * scale_ref)
        fail(ErrorCode::NotClosed, "taming form is not closed");

    TameReport rep;
    {
        // taming: the symmetric part of Omega(., J.) must be positive definite
        double min_eig = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < np; ++p) {
            Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
            for (int c = 0; c < 6; ++c) {
                const int a = kTwoFormPairs[c][0], b = kTwoFormPairs[c][1];
                A(a, b) = Omega.at(c, p);
                A(b, a) = -Omega.at(c, p);
            }
            Eigen::Matrix4d Jm;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) Jm(a, b) = J.mat.at_ab(a, b, p);
            Eigen::Matrix4d B = A * Jm;
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(0.5 * (B + B.transpose()));
            min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        }
        rep.taming_min = min_eig;
        if (!(min_eig > 0.0))
            fail(ErrorCode::NotTaming, "Omega(X, JX) is not positive (min eigenvalue " +
                                           std::to_string(min_eig) + ")");
    }

    // auxiliary Hermitian structure from the positive (1,1) part
    TwoForm F = project_invariant(Omega, J, Sign::Plus);
    TwoForm gamma = project_invariant(Omega, J, Sign::Minus);
    CompatibleTriple aux = CompatibleTriple::hermitian(F, AcStructure{J.mat});

    // least squares d_J^- u ~ gamma: normal equations d* P_J^- d u = d* gamma
    OneForm rhs_form = codifferential(gamma, aux);
    auto T = [&](const OneForm& u) {
        TwoForm du_anti = project_invariant(exterior_d(u), J, Sign::Minus);
        return codifferential(du_anti, aux);
    };
    detail::OneFormCgResult sol =
        detail::oneform_weighted_cg(aux, T, rhs_form, opts.rel_tol, opts.max_iter, 0.5);
    rep.cg_iterations = sol.kres.iterations;
    if (!sol.kres.converged)
        fail(ErrorCode::NoConvergence, "taming decomposition solve hit the iteration cap");
    OneForm& alpha = sol.solution;

    // harmonic obstruction kappa = gamma - d_J^-(alpha)
    TwoForm dalpha = exterior_d(alpha);
    TwoForm kappa = gamma;
    axpy(kappa, -1.0, project_invariant(dalpha, AcStructure{J.mat}, Sign::Minus));
    rep.kappa_inf = max_abs(kappa);
    if (rep.kappa_inf > opts.obstruction_tol * scale_ref)
        fail(ErrorCode::ObstructionNonzero,
             "harmonic anti-invariant part obstructs the decomposition (|kappa| = " +
                 std::to_string(rep.kappa_inf) + ")");

    TwoForm omega = Omega;
    axpy(omega, -1.0, dalpha);
    // validates closed, J-invariant, positive
    build_triple(omega, AcStructure{J.mat});
    return {std::move(omega), rep};
}

} // namespace akcy
