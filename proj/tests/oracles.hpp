#pragma once

// Test-only analytic oracles, independent of the library's FFT path: fields
// are trigonometric polynomials with closed-form derivatives, sampled on the
// grid. Grid sums of sampled products give the quadrature oracle.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "akcy/grid.hpp"

namespace akcy::testing {

struct TrigTerm {
    double amp;
    std::array<int, 4> k;      // per-axis integer mode
    std::array<double, 4> ph;  // per-axis phase
};

class TrigPoly {
public:
    TrigPoly() = default;
    explicit TrigPoly(std::vector<TrigTerm> terms) : terms_(std::move(terms)) {}

    static TrigPoly random(std::uint64_t seed, int max_mode = 2, double amplitude = 1.0,
                           int nterms = 6) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> kd(-max_mode, max_mode);
        std::uniform_real_distribution<double> pd(0.0, 2.0 * M_PI);
        std::uniform_real_distribution<double> ad(0.3, 1.0);
        std::vector<TrigTerm> terms(nterms);
        for (auto& t : terms) {
            t.amp = amplitude * ad(rng);
            do {
                for (int a = 0; a < 4; ++a) t.k[a] = kd(rng);
            } while (t.k == std::array<int, 4>{0, 0, 0, 0});
            for (int a = 0; a < 4; ++a) t.ph[a] = pd(rng);
        }
        return TrigPoly(std::move(terms));
    }

    double value(const GridSpec& g, const std::array<double, 4>& x) const {
        double v = 0.0;
        for (const auto& t : terms_) {
            double term = t.amp;
            for (int a = 0; a < 4; ++a) term *= std::cos(2.0 * M_PI * t.k[a] * x[a] / g.periods[a] + t.ph[a]);
            v += term;
        }
        return v;
    }

    // Analytic partial derivative along one axis.
    double deriv(const GridSpec& g, int axis, const std::array<double, 4>& x) const {
        double v = 0.0;
        for (const auto& t : terms_) {
            double term = t.amp;
            for (int a = 0; a < 4; ++a) {
                const double arg = 2.0 * M_PI * t.k[a] * x[a] / g.periods[a] + t.ph[a];
                const double w = 2.0 * M_PI * t.k[a] / g.periods[a];
                term *= (a == axis) ? -w * std::sin(arg) : std::cos(arg);
            }
            v += term;
        }
        return v;
    }

    double second_deriv(const GridSpec& g, int ax1, int ax2, const std::array<double, 4>& x) const {
        double v = 0.0;
        for (const auto& t : terms_) {
            double term = t.amp;
            for (int a = 0; a < 4; ++a) {
                const double arg = 2.0 * M_PI * t.k[a] * x[a] / g.periods[a] + t.ph[a];
                const double w = 2.0 * M_PI * t.k[a] / g.periods[a];
                int order = (a == ax1) + (a == ax2);
                if (order == 0)
                    term *= std::cos(arg);
                else if (order == 1)
                    term *= -w * std::sin(arg);
                else
                    term *= -w * w * std::cos(arg);
            }
            v += term;
        }
        return v;
    }

    ScalarField sample(const GridSpec& g) const {
        ScalarField f(g);
        for_points(g, [&](std::size_t p, const std::array<double, 4>& x) { f[p] = value(g, x); });
        return f;
    }

    OneForm sample_gradient(const GridSpec& g) const {
        OneForm u(g);
        for_points(g, [&](std::size_t p, const std::array<double, 4>& x) {
            for (int a = 0; a < 4; ++a) u.at(a, p) = deriv(g, a, x);
        });
        return u;
    }

    template <class Fn>
    static void for_points(const GridSpec& g, Fn&& fn) {
        std::size_t p = 0;
        for (int i0 = 0; i0 < g.dims[0]; ++i0)
            for (int i1 = 0; i1 < g.dims[1]; ++i1)
                for (int i2 = 0; i2 < g.dims[2]; ++i2)
                    for (int i3 = 0; i3 < g.dims[3]; ++i3, ++p)
                        fn(p, std::array<double, 4>{g.coord(0, i0), g.coord(1, i1), g.coord(2, i2),
                                                    g.coord(3, i3)});
    }

private:
    std::vector<TrigTerm> terms_;
};

// Plain grid-sum quadrature of a sampled density (the integration oracle).
inline double grid_sum(const FieldN<1>& f) {
    double s = 0.0;
    for (double v : f.data) s += v;
    return s * f.grid.cell_volume();
}

} // namespace akcy::testing
