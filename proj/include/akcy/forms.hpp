#pragma once

#include "akcy/grid.hpp"

namespace akcy {

enum class Sign { Plus, Minus };

/// Almost complex structure as a field of tangent-space endomorphisms J^a_b,
/// (JX)^a = J^a_b X^b. Column b of the per-point matrix is J(d/dx^b).
struct AcStructure {
    MatrixField mat;

    AcStructure() = default;
    explicit AcStructure(MatrixField m) : mat(std::move(m)) {}

    const GridSpec& grid() const { return mat.grid; }

    /// Standard constant structure: J d0 = d1, J d1 = -d0, J d2 = d3, J d3 = -d2.
    static AcStructure standard(const GridSpec& g);

    /// Max-norm violation of J*J = -I over all points.
    double involution_defect() const;
};

/// Almost Kahler (or, via `hermitian`, almost Hermitian) structure (omega, J, g)
/// with the derived metric g(X,Y) = omega(X, JY) cached together with its
/// inverse and volume density sqrt(det g).
class CompatibleTriple {
public:
    /// Validates: J^2 = -I, d(omega) = 0, g symmetric with J-invariant omega,
    /// g positive definite. Throws NotCompatible / NotClosed / NotPositive.
    static CompatibleTriple almost_kahler(TwoForm omega, AcStructure J);

    /// Same validation minus closedness of omega (auxiliary Hermitian triples,
    /// e.g. the positive (1,1) part of a taming form).
    static CompatibleTriple hermitian(TwoForm omega, AcStructure J);

    const GridSpec& grid() const { return omega_.grid; }
    const TwoForm& omega() const { return omega_; }
    const AcStructure& J() const { return j_; }
    const MatrixField& metric() const { return g_; }
    const MatrixField& metric_inv() const { return g_inv_; }
    const ScalarField& sqrt_det() const { return sqrt_det_; }
    bool closed() const { return closed_; }

private:
    CompatibleTriple() = default;
    static CompatibleTriple build(TwoForm omega, AcStructure J, bool require_closed);

    TwoForm omega_;
    AcStructure j_;
    MatrixField g_, g_inv_;
    ScalarField sqrt_det_;
    bool closed_ = false;
};

/// Spec name for the validating constructor.
inline CompatibleTriple build_triple(TwoForm omega, AcStructure J) {
    return CompatibleTriple::almost_kahler(std::move(omega), std::move(J));
}

/// Pointwise Darboux eigenvalues of a J-invariant form against omega,
/// sorted a1 <= a2.
struct EigenPairField {
    ScalarField a1, a2;
};

struct PositivityReport {
    double min_a1 = 0.0;
    double max_anti = 0.0; // max-norm of the J-anti-invariant part
    bool ok = false;
};

struct DarbouxOptions {
    double invariance_tol = 1e-8; // max-norm bound on P_J^- omega1
    double pairing_tol = 1e-8;    // relative pairing of generalized eigenvalues
};

// --- pointwise algebra ------------------------------------------------------

/// The involution alpha(.,.) -> alpha(J., J.) on 2-forms.
TwoForm j_involution(const TwoForm& alpha, const AcStructure& J);

/// P_J^{+-} alpha = (alpha +- J(alpha))/2.
TwoForm project_invariant(const TwoForm& alpha, const AcStructure& J, Sign sign);

FourForm hodge_star_0(const ScalarField& f, const CompatibleTriple& triple);
ThreeForm hodge_star_1(const OneForm& u, const CompatibleTriple& triple);
TwoForm hodge_star_2(const TwoForm& alpha, const CompatibleTriple& triple);
OneForm hodge_star_3(const ThreeForm& tau, const CompatibleTriple& triple);
ScalarField hodge_star_4(const FourForm& mu, const CompatibleTriple& triple);

/// P_g^{+-} alpha = (alpha +- *alpha)/2 on 2-forms.
TwoForm project_selfdual(const TwoForm& alpha, const CompatibleTriple& triple, Sign sign);

TwoForm wedge_11(const OneForm& u, const OneForm& v, bool dealias = false);
FourForm wedge_22(const TwoForm& alpha, const TwoForm& beta, bool dealias = false);
FourForm wedge_13(const OneForm& u, const ThreeForm& tau, bool dealias = false);

/// One-form J-action pinned as (J alpha)(X) = -alpha(JX); with the standard
/// structure J dx^0 = dx^1.
OneForm j_one_form(const OneForm& u, const AcStructure& J);

/// Pointwise metric pairing <alpha, beta>_g on 2-forms (|omega|_g^2 = 2).
ScalarField inner_22(const TwoForm& alpha, const TwoForm& beta, const CompatibleTriple& triple);
ScalarField inner_11(const OneForm& u, const OneForm& v, const CompatibleTriple& triple);

/// L2 pairings weighted by the metric volume sqrt(det g) * cell volume.
double l2_inner(const ScalarField& a, const ScalarField& b, const CompatibleTriple& triple);
double l2_inner(const OneForm& a, const OneForm& b, const CompatibleTriple& triple);
double l2_inner(const TwoForm& a, const TwoForm& b, const CompatibleTriple& triple);

EigenPairField darboux_eigenvalues(const TwoForm& omega, const TwoForm& omega1,
                                   const CompatibleTriple& triple, DarbouxOptions opts = {});

/// ok iff the anti-invariant part of omega_tilde is below tolerance and the
/// smallest pointwise eigenvalue against g is positive.
PositivityReport positivity_check(const TwoForm& omega_tilde, const CompatibleTriple& triple,
                                  double anti_tol = 1e-8);

/// Fast eigenvalue-pair bound via the trace/determinant routes
/// s = omega ^ omega1 / (omega^2/2), p = omega1^2 / omega^2; returns pointwise
/// min and max of a1 = (s - sqrt(s^2-4p))/2. Valid for J-invariant omega1;
/// reports pairing failure through `ok` when s^2 - 4p < -tol.
struct QuadraticEigenBound {
    double min_a1;
    double max_a2;
    bool ok;
};
QuadraticEigenBound eigen_bounds_quadratic(const TwoForm& omega1, const CompatibleTriple& triple);

} // namespace akcy
