#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace akcy::krylov {

using Vec = std::vector<double>;
using Apply = std::function<void(const Vec&, Vec&)>;

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_iter = 10000;
};

struct Result {
    int iterations = 0;
    double residual = 0.0; // final euclidean residual norm
    bool converged = false;
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

/// Preconditioned conjugate gradients for a self-adjoint positive
/// (semi-)definite operator; `precond` must be self-adjoint positive definite
/// on the subspace where the system is solved. x holds the initial guess.
inline Result cg(const Apply& apply, const Apply& precond, const Vec& b, Vec& x, Options opt) {
    const std::size_t n = b.size();
    Vec r(n), z(n), p(n), ap(n);

    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    const double b_norm = norm(b);
    const double target = std::max(opt.rel_tol * b_norm, opt.abs_tol);

    Result res;
    res.residual = norm(r);
    if (res.residual <= target) {
        res.converged = true;
        return res;
    }

    precond(r, z);
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= opt.max_iter; ++it) {
        if (!(std::isfinite(rz)) || rz == 0.0) break;
        apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break; // lost positivity (roundoff on a singular system)
        const double alpha = rz / pap;
        if (!std::isfinite(alpha)) break;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res.iterations = it;
        res.residual = norm(r);
        if (res.residual <= target) {
            res.converged = true;
            return res;
        }
        precond(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return res;
}

/// Restarted GMRES with right preconditioning: solves A M^{-1} y = b,
/// x = M^{-1} y. Handles mildly nonsymmetric operators (variable-coefficient
/// linearizations); counts operator applications in `iterations`.
inline Result gmres(const Apply& apply, const Apply& precond, const Vec& b, Vec& x, Options opt,
                    int restart = 60) {
    const std::size_t n = b.size();
    const double b_norm = norm(b);
    const double target = std::max(opt.rel_tol * b_norm, opt.abs_tol);

    Result res;
    Vec r(n), w(n), z(n);

    apply(x, w);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
    res.residual = norm(r);
    if (res.residual <= target) {
        res.converged = true;
        return res;
    }

    std::vector<Vec> V;
    std::vector<double> H; // column-major (restart+1) x restart
    std::vector<double> cs(restart), sn(restart), s(restart + 1);

    while (res.iterations < opt.max_iter) {
        const double beta = norm(r);
        if (beta <= target) {
            res.converged = true;
            return res;
        }
        V.assign(1, r);
        for (std::size_t i = 0; i < n; ++i) V[0][i] /= beta;
        std::fill(s.begin(), s.end(), 0.0);
        s[0] = beta;
        H.assign(std::size_t(restart + 1) * restart, 0.0);
        auto h = [&](int i, int j) -> double& { return H[std::size_t(j) * (restart + 1) + i]; };

        int k = 0;
        for (; k < restart && res.iterations < opt.max_iter; ++k) {
            precond(V[k], z);
            apply(z, w);
            ++res.iterations;
            // modified Gram-Schmidt
            for (int i = 0; i <= k; ++i) {
                h(i, k) = dot(w, V[i]);
                for (std::size_t q = 0; q < n; ++q) w[q] -= h(i, k) * V[i][q];
            }
            h(k + 1, k) = norm(w);
            if (h(k + 1, k) > 0.0) {
                Vec v = w;
                for (std::size_t q = 0; q < n; ++q) v[q] /= h(k + 1, k);
                V.push_back(std::move(v));
            }
            // apply accumulated Givens rotations
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double denom = std::hypot(h(k, k), h(k + 1, k));
            if (denom == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h(k, k) / denom;
                sn[k] = h(k + 1, k) / denom;
            }
            h(k, k) = cs[k] * h(k, k) + sn[k] * h(k + 1, k);
            h(k + 1, k) = 0.0;
            s[k + 1] = -sn[k] * s[k];
            s[k] = cs[k] * s[k];
            res.residual = std::abs(s[k + 1]);
            if (res.residual <= target || h(k + 1, k) == 0.0) {
                ++k;
                break;
            }
        }
        // back-substitute y and update x += M^{-1} (V y)
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double t = s[i];
            for (int j = i + 1; j < k; ++j) t -= h(i, j) * y[j];
            y[i] = (h(i, i) != 0.0) ? t / h(i, i) : 0.0;
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (int j = 0; j < k; ++j)
            for (std::size_t q = 0; q < n; ++q) w[q] += y[j] * V[j][q];
        precond(w, z);
        for (std::size_t q = 0; q < n; ++q) x[q] += z[q];

        apply(x, w);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
        res.residual = norm(r);
        if (res.residual <= target) {
            res.converged = true;
            return res;
        }
        if (k == 0) break; // no progress possible
    }
    return res;
}

} // namespace akcy::krylov
