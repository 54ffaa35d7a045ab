#pragma once

#include <complex>
#include <vector>

#include "akcy/grid.hpp"

namespace akcy {

struct CompatibleTriple; // forms.hpp

namespace spectral {

/// Forward c2c transform of one real component block. Thread-safe; plans are
/// cached per grid size behind a mutex, execution uses caller-owned buffers.
void forward(const GridSpec& g, const double* in, std::complex<double>* out);

/// Inverse transform (normalized by 1/N), keeping the real part.
void inverse(const GridSpec& g, const std::complex<double>* in, double* out);

/// Angular wavenumber 2*pi*k/L of mode index n on an axis; the Nyquist mode
/// is mapped to zero so first derivatives of real fields stay real-symmetric.
double wavenumber(const GridSpec& g, int axis, int mode_index);

/// Spectral partial derivative of a scalar component along one axis.
void derivative(const GridSpec& g, const double* in, int axis, double* out);

/// Zeroes every Fourier mode with an index at the Nyquist frequency on any
/// axis. Iterative solves run on this fully-resolved subspace: differentiation
/// drops Nyquist modes, so they would otherwise pollute operator kernels.
void drop_nyquist(const GridSpec& g, double* comp);

/// Inverse of (factor * Delta_flat + delta) including the zero mode; positive
/// definite preconditioner for operators that reduce to factor * Delta per
/// channel in the flat limit.
void laplacian_shifted_inverse(const GridSpec& g, const double* in, double factor, double delta,
                               double* out);

inline void half_laplacian_shifted_inverse(const GridSpec& g, const double* in, double delta,
                                           double* out) {
    laplacian_shifted_inverse(g, in, 0.5, delta, out);
}

} // namespace spectral

template <int N>
void drop_nyquist(FieldN<N>& f) {
    for (int c = 0; c < N; ++c) spectral::drop_nyquist(f.grid, f.comp(c));
}

// --- exterior derivative (spectral, exact on retained modes) ---------------

OneForm exterior_d(const ScalarField& f);
TwoForm exterior_d(const OneForm& u);
ThreeForm exterior_d(const TwoForm& alpha);
FourForm exterior_d(const ThreeForm& tau);

/// Unique mean-zero solution of Delta_flat phi = rho (Delta = d*d >= 0 for the
/// standard flat metric). Requires mean(rho) ~ 0; Fourier division by |k|^2.
ScalarField flat_poisson_solve(const ScalarField& rho, double mean_tol_rel = 1e-10);

/// Riemann sum of the density times the cell volume; exact for trigonometric
/// polynomials below the Nyquist limit.
double integrate(const FourForm& mu);

/// Pointwise product, optionally de-aliased by the 3/2 zero-padding rule.
ScalarField multiply(const ScalarField& a, const ScalarField& b, bool dealias = false);
void multiply_into(const GridSpec& g, const double* a, const double* b, double* out,
                   bool dealias = false);

// Metric operations (stars from the triple's metric, derivative spectral).
// Convention: d* = -*d* on every degree; Delta_g = d*d on functions.
ScalarField codifferential(const OneForm& u, const CompatibleTriple& triple);
OneForm codifferential(const TwoForm& alpha, const CompatibleTriple& triple);
TwoForm codifferential(const ThreeForm& tau, const CompatibleTriple& triple);
ScalarField laplacian(const ScalarField& phi, const CompatibleTriple& triple);

} // namespace akcy
