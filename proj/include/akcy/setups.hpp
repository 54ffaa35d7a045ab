#pragma once

#include <cstdint>

#include "akcy/forms.hpp"

namespace akcy {

/// omega = dx0^dx1 + dx2^dx3 with constant coefficients.
TwoForm standard_omega(const GridSpec& g);

/// Flat Kahler torus: standard omega, standard J, Euclidean metric.
CompatibleTriple standard_triple(const GridSpec& g);

/// Non-integrable compatible structure: the standard omega with J obtained by
/// the pointwise polar retraction of a seeded smooth metric perturbation
/// h = I + amplitude * S(x). Closedness of omega is untouched; compatibility
/// holds to machine precision by construction. amplitude in [0, 1).
CompatibleTriple perturbed_triple(const GridSpec& g, std::uint64_t seed, double amplitude);

/// Smooth mean-zero band-limited scalar: a seeded sum of separable cosine
/// terms with per-axis mode numbers <= max_mode.
ScalarField random_scalar(const GridSpec& g, std::uint64_t seed, int max_mode = 2,
                          double amplitude = 1.0);

OneForm random_one_form(const GridSpec& g, std::uint64_t seed, int max_mode = 2,
                        double amplitude = 1.0);

TwoForm random_two_form(const GridSpec& g, std::uint64_t seed, int max_mode = 2,
                        double amplitude = 1.0);

/// Manufactured case on the flat Kahler torus: phi* = eps/k^2 sin(k x0) with
/// k = 2*pi/L0 solves (omega + D_J^+ phi)^2 = e^f omega^2 for
/// f = log(1 - eps sin(k x0)). Requires eps in [0, 1).
ScalarField manufactured_phi(const GridSpec& g, double eps);
ScalarField manufactured_f(const GridSpec& g, double eps);

} // namespace akcy
