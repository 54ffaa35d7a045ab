#pragma once

// Internal helper: preconditioned CG for self-adjoint positive semi-definite
// operators on 1-forms, symmetrized to the euclidean inner product via the
// pointwise square root of the L2 weight sqrt(det g) g^{-1}. Conjugate
// gradients from zero picks the minimum-norm solution of consistent singular
// systems; iterations run on the fully-resolved (Nyquist-free) modes.

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "akcy/forms.hpp"
#include "akcy/krylov.hpp"
#include "akcy/spectral.hpp"

namespace akcy::detail {

struct OneFormCgResult {
    OneForm solution;
    krylov::Result kres;
};

/// Solves T u = rhs with T self-adjoint PSD in the L2(g) pairing of 1-forms.
/// precond_factor is the flat-limit symbol factor of T (T ~ factor * Delta).
inline OneFormCgResult oneform_weighted_cg(const CompatibleTriple& triple,
                                           const std::function<OneForm(const OneForm&)>& T,
                                           const OneForm& rhs, double rel_tol, int max_iter,
                                           double precond_factor) {
    const GridSpec& g = triple.grid();
    const std::size_t np = g.points();

    std::vector<Eigen::Matrix4d> w_half(np);
    for (std::size_t p = 0; p < np; ++p) {
        Eigen::Matrix4d Gi;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) Gi(a, b) = triple.metric_inv().at_ab(a, b, p);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(triple.sqrt_det()[p] * Gi);
        w_half[p] = es.operatorSqrt();
    }
    auto mat_apply = [&](krylov::Vec& v) {
        for (std::size_t p = 0; p < np; ++p) {
            Eigen::Vector4d u;
            for (int a = 0; a < 4; ++a) u[a] = v[a * np + p];
            u = w_half[p] * u;
            for (int a = 0; a < 4; ++a) v[a * np + p] = u[a];
        }
    };
    auto filter = [&](krylov::Vec& v) {
        for (int a = 0; a < 4; ++a) spectral::drop_nyquist(g, v.data() + a * np);
    };

    auto apply = [&](const krylov::Vec& in, krylov::Vec& out) {
        krylov::Vec v = in;
        mat_apply(v);
        OneForm u(g);
        for (int a = 0; a < 4; ++a)
            std::copy(v.begin() + a * np, v.begin() + (a + 1) * np, u.comp(a));
        OneForm tu = T(u);
        out.resize(4 * np);
        for (int a = 0; a < 4; ++a)
            std::copy(tu.comp(a), tu.comp(a) + np, out.begin() + a * np);
        mat_apply(out);
        filter(out);
    };

    double lambda_ref = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 4; ++a)
        lambda_ref =
            std::min(lambda_ref, precond_factor * std::pow(2.0 * M_PI / g.periods[a], 2));
    const double delta = 0.1 * lambda_ref;
    auto precond = [&](const krylov::Vec& in, krylov::Vec& out) {
        out.resize(4 * np);
        ScalarField r(g), z(g);
        for (int a = 0; a < 4; ++a) {
            std::copy(in.begin() + a * np, in.begin() + (a + 1) * np, r.data.begin());
            spectral::laplacian_shifted_inverse(g, r.comp(0), precond_factor, delta, z.comp(0));
            std::copy(z.data.begin(), z.data.end(), out.begin() + a * np);
        }
        filter(out);
    };

    krylov::Vec b(4 * np), y(4 * np, 0.0);
    for (int a = 0; a < 4; ++a)
        std::copy(rhs.comp(a), rhs.comp(a) + np, b.begin() + a * np);
    mat_apply(b);
    filter(b);

    krylov::Options kopts;
    kopts.rel_tol = rel_tol;
    kopts.max_iter = max_iter;
    kopts.abs_tol = 1e-13 * std::max(1.0, krylov::norm(b));
    OneFormCgResult res;
    res.kres = krylov::cg(apply, precond, b, y, kopts);

    mat_apply(y);
    res.solution = OneForm(g);
    for (int a = 0; a < 4; ++a)
        std::copy(y.begin() + a * np, y.begin() + (a + 1) * np, res.solution.comp(a));
    return res;
}

} // namespace akcy::detail
