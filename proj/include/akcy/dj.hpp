#pragma once

#include <utility>
#include <vector>

#include "akcy/forms.hpp"

namespace akcy {

/// Global pointwise-orthogonal frame of the J-anti-invariant bundle,
/// normalized like omega: <beta_i, beta_j>_g = 2 delta_ij at every point.
struct AntiInvariantFrame {
    TwoForm beta1, beta2;
};

/// Section of the anti-invariant bundle in frame coefficients.
struct AntiInvariantField {
    ScalarField c1, c2;

    AntiInvariantField() = default;
    explicit AntiInvariantField(const GridSpec& g) : c1(g), c2(g) {}
};

struct LejmiSolveReport {
    int iterations = 0;
    double final_residual = 0.0; // relative weighted-CG residual
    bool converged = false;
};

struct LejmiOptions {
    double rel_tol = 1e-10;
    int max_iter = 10000;
};

struct HarmonicReport {
    int dim = 0;
    std::vector<double> eigenvalues; // lowest Ritz values, ascending
    double kernel_tol = 0.0;         // threshold used for the kernel count
    double gap_ratio = 0.0;          // first non-kernel eigenvalue / kernel_tol
    bool converged = false;
};

/// Builds the frame by projecting the constant anti-invariant candidates of
/// the standard structure through P_J^- and orthonormalizing pointwise.
/// Throws FrameDegenerate if the projected candidates drop rank anywhere.
AntiInvariantFrame anti_invariant_frame(const CompatibleTriple& triple, double gram_tol = 1e-8);

TwoForm reconstruct(const AntiInvariantFrame& frame, const AntiInvariantField& psi);

/// The operator machinery around W_J and D_J^+ for one fixed structure.
/// Holds references to the triple; keep the triple alive while in use.
class DjOperator {
public:
    explicit DjOperator(const CompatibleTriple& triple, LejmiOptions opts = {});

    const CompatibleTriple& triple() const { return triple_; }
    const AntiInvariantFrame& frame() const { return frame_; }

    /// Lejmi's operator P(psi) = P_J^-(d d* psi) in frame coefficients.
    AntiInvariantField lejmi_apply(const AntiInvariantField& psi) const;

    /// Quadratic form <P(psi), psi>_{L^2}; equals |d* psi|_{L^2}^2.
    double lejmi_quadratic_form(const AntiInvariantField& psi) const;

    /// Solves d_J^- J d phi + d_J^- d* sigma = 0 for sigma by preconditioned
    /// CG from zero (the minimum-norm solution, orthogonal to ker P up to
    /// solver drift). phi is mean-projected first.
    std::pair<AntiInvariantField, LejmiSolveReport> solve_sigma(const ScalarField& phi) const;

    /// W_J(phi) = J d phi + d* sigma(phi). Throws NoConvergence if the sigma
    /// solve hit its iteration cap.
    OneForm w_field(const ScalarField& phi) const;

    /// D_J^+(phi) = d W_J(phi).
    TwoForm dj_plus(const ScalarField& phi) const;

    struct Apply {
        OneForm w;
        TwoForm dw;
        AntiInvariantField sigma;
        LejmiSolveReport report;
    };
    /// One-pass evaluation of sigma, W_J and D_J^+ for the same phi.
    Apply apply(const ScalarField& phi) const;

    /// Estimates dim ker P by shifted inverse subspace iteration; returns the
    /// count of Ritz values below 1e-6 times the flat-model spectral scale.
    HarmonicReport harmonic_anti_dim(int nev = 6) const;

    /// Mean weighted by the volume form omega^2/2 (the paper's normalization).
    double volume_mean(const ScalarField& phi) const;
    void project_mean(ScalarField& phi) const;

private:
    const CompatibleTriple& triple_;
    AntiInvariantFrame frame_;
    LejmiOptions opts_;
    ScalarField weight_;     // 2 sqrt(det g): pointwise L2 weight of the frame
    FourForm volume_;        // omega^2 / 2
    double total_volume_ = 0.0;

    AntiInvariantField project_coeffs(const TwoForm& alpha) const;
};

} // namespace akcy
