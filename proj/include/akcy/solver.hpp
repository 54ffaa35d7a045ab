#pragma once

#include <atomic>
#include <optional>
#include <vector>

#include "akcy/dj.hpp"

namespace akcy {

struct SolverConfig {
    double newton_tol = 1e-11; // L-inf residual of the Monge-Ampere equation
    int newton_max = 30;
    double krylov_tol = 1e-10;
    int krylov_max = 20000;
    double t_step_init = 0.25;
    double t_step_min = 1.0 / 4096;
    double positivity_margin = 1e-6;
    bool dealias = false;
    const std::atomic<bool>* cancel = nullptr; // polled between iterations

    void validate() const {
        if (!(newton_tol > 0.0 && krylov_tol > 0.0))
            fail(ErrorCode::ValidationError, "solver tolerances must be positive");
        if (!(t_step_min > 0.0 && t_step_min <= t_step_init && t_step_init <= 1.0))
            fail(ErrorCode::ValidationError, "need 0 < t_step_min <= t_step_init <= 1");
        if (!(positivity_margin >= 0.0))
            fail(ErrorCode::ValidationError, "positivity margin must be nonnegative");
    }
};

enum class NewtonStatus { Converged, Diverged, PositivityLost, KrylovStall, Cancelled };

inline const char* newton_status_name(NewtonStatus s) {
    switch (s) {
        case NewtonStatus::Converged: return "Converged";
        case NewtonStatus::Diverged: return "NewtonDiverged";
        case NewtonStatus::PositivityLost: return "PositivityLost";
        case NewtonStatus::KrylovStall: return "KrylovStall";
        case NewtonStatus::Cancelled: return "Cancelled";
    }
    return "Unknown";
}

struct NewtonReport {
    NewtonStatus status = NewtonStatus::Diverged;
    int iterations = 0;
    int krylov_applies = 0;
    double residual_linf = 0.0;     // Galerkin residual (resolved modes)
    double residual_raw_linf = 0.0; // pointwise residual, all modes
    double residual_l2 = 0.0;
    double min_a1 = 0.0;
};

struct NewtonResult {
    ScalarField phi;
    TwoForm omega_phi; // omega + D_J^+(phi) at the final iterate
    NewtonReport report;
};

enum class ContinuationStatus { Success, StepUnderflow, InnerFailure, Cancelled };

inline const char* continuation_status_name(ContinuationStatus s) {
    switch (s) {
        case ContinuationStatus::Success: return "Success";
        case ContinuationStatus::StepUnderflow: return "StepUnderflow";
        case ContinuationStatus::InnerFailure: return "InnerFailure";
        case ContinuationStatus::Cancelled: return "Cancelled";
    }
    return "Unknown";
}

struct ContinuationStep {
    double t = 0.0;
    int newton_iters = 0;
    double residual_linf = 0.0;
    double residual_l2 = 0.0;
    double min_a1 = 0.0;
    double max_trace = 0.0; // max of tr_g g1 = 2 (a1 + a2)
    double phi_linf = 0.0;
};

struct ContinuationReport {
    ContinuationStatus status = ContinuationStatus::InnerFailure;
    bool success = false;
    NewtonStatus last_newton = NewtonStatus::Converged;
    std::vector<ContinuationStep> steps;
};

struct TrajectoryPoint {
    double t;
    ScalarField phi;
};

struct ContinuationResult {
    ScalarField phi;
    TwoForm omega_phi;
    ContinuationReport report;
    std::vector<TrajectoryPoint> trajectory; // phi at every accepted step
};

/// Nonlinear solver for (omega + D_J^+ phi)^2 = e^f omega^2 on one structure.
/// Holds references; keep triple and dj alive while in use.
class MaSolver {
public:
    MaSolver(const CompatibleTriple& triple, const DjOperator& dj, SolverConfig cfg = {});

    const SolverConfig& config() const { return cfg_; }
    const CompatibleTriple& triple() const { return triple_; }
    const DjOperator& dj() const { return dj_; }

    /// Shifts f by a constant so that int e^f omega^2 = int omega^2.
    ScalarField normalize_rhs(const ScalarField& f) const;

    /// (omega + D_J^+ phi)^2 / omega^2 - e^f.
    ScalarField ma_residual(const ScalarField& phi, const ScalarField& f) const;

    /// Derivative of the Monge-Ampere operator:
    /// 2 (omega + D_J^+ phi) ^ D_J^+ psi / omega^2.
    ScalarField linearize_apply(const ScalarField& phi, const ScalarField& psi) const;

    /// Damped Newton iteration with positivity safeguarding. f must be
    /// normalized; phi_init must satisfy the positivity margin.
    NewtonResult newton_solve(const ScalarField& f, const ScalarField& phi_init) const;

    /// Continuity path (omega + D phi_t)^2 = e^{t f + c(t)} omega^2 from t=0
    /// to t=1 with warm starts and step halving on failure.
    ContinuationResult continuation_solve(const ScalarField& f,
                                          const std::optional<ScalarField>& phi_init = {}) const;

    // internals shared with diagnostics
    ScalarField residual_from(const TwoForm& omega_phi, const ScalarField& exp_f) const;
    ScalarField linearize_from(const TwoForm& omega_phi, const ScalarField& psi) const;
    const FourForm& omega_sq() const { return ww_; }
    double total_volume() const { return total_volume_; }
    double volume_l2(const ScalarField& r) const;

private:
    const CompatibleTriple& triple_;
    const DjOperator& dj_;
    SolverConfig cfg_;
    FourForm ww_;   // omega ^ omega
    double total_volume_ = 0.0;

    ContinuationStep measure(const TwoForm& omega_phi, const ScalarField& phi,
                             const ScalarField& residual) const;
};

struct TameOptions {
    double obstruction_tol = 1e-8;
    double rel_tol = 1e-10;
    int max_iter = 20000;
};

struct TameReport {
    double kappa_inf = 0.0;   // harmonic anti-invariant obstruction, max norm
    double taming_min = 0.0;  // smallest eigenvalue of the taming pairing
    int cg_iterations = 0;
};

/// Splits a taming symplectic form Omega = F + d_J^-(alpha) and returns the
/// almost Kahler form omega = Omega - d(alpha). Throws NotTaming, NotClosed,
/// ObstructionNonzero (harmonic anti-invariant part beyond tolerance) or the
/// validation errors of build_triple.
std::pair<TwoForm, TameReport> tame_to_almost_kahler(const TwoForm& Omega, const AcStructure& J,
                                                     TameOptions opts = {});

} // namespace akcy
