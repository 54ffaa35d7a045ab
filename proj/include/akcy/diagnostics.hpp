#pragma once

#include "akcy/solver.hpp"

namespace akcy {

/// Pointwise residuals of the exact eigenvalue identities satisfied by a
/// solution pair (omega1 = omega + D_J^+ phi, f): the determinant identity
/// e^f = a1 a2, the potential Laplacian identity Delta phi0 = 2 - (a1 + a2),
/// and the norm identity in the form convention |omega1 - omega|^2_g =
/// (a1-1)^2 + (a2-1)^2 (the tensor-norm convention carries an extra factor 2).
struct Lemma1Report {
    EigenPairField eigs;
    double residual_det = 0.0;
    double residual_norm = 0.0;
    double residual_lap = 0.0;
    double bound_margin = 0.0;    // min of 2(1 - e^{f/2}) - Delta phi0 (>= 0 by AM-GM)
    double printed_margin = 0.0;  // min of 2(1 - e^{f}) - Delta phi0 (reported only)
};

struct SandwichReport {
    double margin_minus = 0.0; // min eigenvalue of 2 omega_1/2 - (omega1 - omega)
    double margin_plus = 0.0;  // min eigenvalue of 2 omega_1/2 + (omega1 - omega)
    bool ok = false;
};

struct TraceIdentityReport {
    double max_eigen_form = 0.0;  // |(a1+a2)/(a1 a2) - (1/a1 + 1/a2)|
    double max_matrix_form = 0.0; // |tr_g g1 sqrt(det g/det g1) - tr_{g1} g|
};

struct MonitorSeries {
    std::vector<double> t;
    std::vector<double> max_trace;      // max tr_g g1 = 2 max(a1 + a2)
    std::vector<double> max_trace_half; // max (a1 + a2) (alternate convention)
    std::vector<double> phi_linf;
    std::vector<double> min_a1;
    std::vector<double> grad_g1;        // spectral |nabla g1|_{g1} proxy, max
    std::vector<double> max_lap_phi0;   // max Delta_g phi0 (< 2 for solutions)
    double alarm_threshold = 1e3;
    bool bounded = false;
};

struct UniquenessReport {
    bool both_converged = false;
    double oscillation = 0.0; // max - min of phi_a - phi_b
    ContinuationStatus status_a = ContinuationStatus::InnerFailure;
    ContinuationStatus status_b = ContinuationStatus::InnerFailure;
};

struct Decomposition44Report {
    double residual_decomposition = 0.0; // |omega1 - omega - dJd phi1 - da|_inf
    double residual_coclosed = 0.0;      // |d*_{g1} a|_inf
    double residual_wedge = 0.0;         // |omega1 ^ da|_inf (density, normalized)
    double a_norm_inf = 0.0;
    int cg_iterations = 0;
};

/// Mean-zero solution of -1/2 Delta_g phi0 = omega ^ (omega1 - omega)/omega^2
/// with the triple's metric (flat-preconditioned CG).
ScalarField potential_phi0(const TwoForm& omega, const TwoForm& omega1,
                           const CompatibleTriple& triple, double rel_tol = 1e-10,
                           int max_iter = 10000);

Lemma1Report lemma1_check(const TwoForm& omega, const TwoForm& omega1, const ScalarField& f,
                          const CompatibleTriple& triple);

SandwichReport sandwich_check(const TwoForm& omega, const TwoForm& omega1,
                              const CompatibleTriple& triple);

TraceIdentityReport trace_identity_check(const CompatibleTriple& triple, const TwoForm& omega1);

MonitorSeries apriori_monitor(const std::vector<TrajectoryPoint>& history,
                              const CompatibleTriple& triple, const DjOperator& dj);

/// Two continuation runs from distinct admissible warm starts; their phi
/// difference must be constant (oscillation below tolerance) by uniqueness.
UniquenessReport uniqueness_experiment(const MaSolver& solver, const ScalarField& f);

/// Reconstructs the s = 1 decomposition omega1 - omega = dJd phi1 + d a with
/// d*_{g1} a = 0 and omega1 ^ da = 0, and reports the three residuals.
Decomposition44Report decomposition_44_check(const ScalarField& phi_solution, const TwoForm& omega1,
                                             const CompatibleTriple& triple,
                                             double rel_tol = 1e-10, int max_iter = 20000);

} // namespace akcy
