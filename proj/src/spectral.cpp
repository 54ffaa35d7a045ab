#include "akcy/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "akcy/forms.hpp"

namespace akcy {
namespace spectral {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// Plan creation is not thread-safe in FFTW; execution on caller buffers is.
std::mutex g_plan_mutex;
std::map<std::array<int, 4>, PlanPair>& plan_cache() {
    static std::map<std::array<int, 4>, PlanPair> cache;
    return cache;
}

PlanPair plans_for(const GridSpec& g) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(g.dims);
    if (it != cache.end()) return it->second;

    std::vector<std::complex<double>> buf(g.points());
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    PlanPair pp;
    pp.fwd = fftw_plan_dft(4, g.dims.data(), p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    pp.bwd = fftw_plan_dft(4, g.dims.data(), p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache[g.dims] = pp;
    return pp;
}

// Applies fn(flat_index, mode_indices) over the full spectral grid.
template <class Fn>
void for_modes(const GridSpec& g, Fn&& fn) {
    std::array<int, 4> n{};
    std::size_t idx = 0;
    for (n[0] = 0; n[0] < g.dims[0]; ++n[0])
        for (n[1] = 0; n[1] < g.dims[1]; ++n[1])
            for (n[2] = 0; n[2] < g.dims[2]; ++n[2])
                for (n[3] = 0; n[3] < g.dims[3]; ++n[3], ++idx) fn(idx, n);
}

} // namespace

double wavenumber(const GridSpec& g, int axis, int n) {
    const int N = g.dims[axis];
    if (n == N / 2) return 0.0; // Nyquist dropped in odd derivatives
    const int k = (n <= N / 2) ? n : n - N;
    return 2.0 * M_PI * k / g.periods[axis];
}

void forward(const GridSpec& g, const double* in, std::complex<double>* out) {
    const std::size_t np = g.points();
    for (std::size_t i = 0; i < np; ++i) out[i] = in[i];
    PlanPair pp = plans_for(g);
    auto* p = reinterpret_cast<fftw_complex*>(out);
    fftw_execute_dft(pp.fwd, p, p);
}

void inverse(const GridSpec& g, const std::complex<double>* in, double* out) {
    const std::size_t np = g.points();
    std::vector<std::complex<double>> buf(in, in + np);
    PlanPair pp = plans_for(g);
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_execute_dft(pp.bwd, p, p);
    const double norm = 1.0 / double(np);
    for (std::size_t i = 0; i < np; ++i) out[i] = buf[i].real() * norm;
}

void derivative(const GridSpec& g, const double* in, int axis, double* out) {
    std::vector<std::complex<double>> spec(g.points());
    forward(g, in, spec.data());
    for_modes(g, [&](std::size_t idx, const std::array<int, 4>& n) {
        spec[idx] *= std::complex<double>(0.0, wavenumber(g, axis, n[axis]));
    });
    inverse(g, spec.data(), out);
}

void drop_nyquist(const GridSpec& g, double* comp) {
    std::vector<std::complex<double>> spec(g.points());
    forward(g, comp, spec.data());
    for_modes(g, [&](std::size_t idx, const std::array<int, 4>& n) {
        for (int a = 0; a < 4; ++a)
            if (n[a] == g.dims[a] / 2) {
                spec[idx] = 0.0;
                break;
            }
    });
    inverse(g, spec.data(), comp);
}

void laplacian_shifted_inverse(const GridSpec& g, const double* in, double factor, double delta,
                               double* out) {
    std::vector<std::complex<double>> spec(g.points());
    forward(g, in, spec.data());
    for_modes(g, [&](std::size_t idx, const std::array<int, 4>& n) {
        double k2 = 0.0;
        for (int a = 0; a < 4; ++a) {
            const double ka = wavenumber(g, a, n[a]);
            k2 += ka * ka;
        }
        spec[idx] /= (factor * k2 + delta);
    });
    inverse(g, spec.data(), out);
}

} // namespace spectral

OneForm exterior_d(const ScalarField& f) {
    require_finite(f, "exterior_d(scalar)");
    const GridSpec& g = f.grid;
    OneForm out(g);
    std::vector<std::complex<double>> spec(g.points()), work(g.points());
    spectral::forward(g, f.comp(0), spec.data());
    for (int a = 0; a < 4; ++a) {
        std::array<int, 4> n{};
        std::size_t idx = 0;
        for (n[0] = 0; n[0] < g.dims[0]; ++n[0])
            for (n[1] = 0; n[1] < g.dims[1]; ++n[1])
                for (n[2] = 0; n[2] < g.dims[2]; ++n[2])
                    for (n[3] = 0; n[3] < g.dims[3]; ++n[3], ++idx)
                        work[idx] = spec[idx] * std::complex<double>(0.0, spectral::wavenumber(g, a, n[a]));
        spectral::inverse(g, work.data(), out.comp(a));
    }
    return out;
}

TwoForm exterior_d(const OneForm& u) {
    require_finite(u, "exterior_d(1-form)");
    const GridSpec& g = u.grid;
    const std::size_t np = g.points();
    TwoForm out(g);

    std::array<std::vector<std::complex<double>>, 4> spec;
    for (int a = 0; a < 4; ++a) {
        spec[a].resize(np);
        spectral::forward(g, u.comp(a), spec[a].data());
    }
    std::vector<std::complex<double>> work(np);
    for (int c = 0; c < 6; ++c) {
        const int a = kTwoFormPairs[c][0], b = kTwoFormPairs[c][1];
        std::array<int, 4> n{};
        std::size_t idx = 0;
        for (n[0] = 0; n[0] < g.dims[0]; ++n[0])
            for (n[1] = 0; n[1] < g.dims[1]; ++n[1])
                for (n[2] = 0; n[2] < g.dims[2]; ++n[2])
                    for (n[3] = 0; n[3] < g.dims[3]; ++n[3], ++idx) {
                        const std::complex<double> ika(0.0, spectral::wavenumber(g, a, n[a]));
                        const std::complex<double> ikb(0.0, spectral::wavenumber(g, b, n[b]));
                        work[idx] = ika * spec[b][idx] - ikb * spec[a][idx];
                    }
        spectral::inverse(g, work.data(), out.comp(c));
    }
    return out;
}

ThreeForm exterior_d(const TwoForm& alpha) {
    require_finite(alpha, "exterior_d(2-form)");
    const GridSpec& g = alpha.grid;
    const std::size_t np = g.points();
    ThreeForm out(g);

    std::array<std::vector<std::complex<double>>, 6> spec;
    for (int c = 0; c < 6; ++c) {
        spec[c].resize(np);
        spectral::forward(g, alpha.comp(c), spec[c].data());
    }
    std::vector<std::complex<double>> work(np);
    for (int t = 0; t < 4; ++t) {
        const int a = kThreeFormTriples[t][0], b = kThreeFormTriples[t][1], c = kThreeFormTriples[t][2];
        double sbc, sac, sab;
        const int i_bc = two_form_slot(b, c, sbc);
        const int i_ac = two_form_slot(a, c, sac);
        const int i_ab = two_form_slot(a, b, sab);
        std::array<int, 4> n{};
        std::size_t idx = 0;
        for (n[0] = 0; n[0] < g.dims[0]; ++n[0])
            for (n[1] = 0; n[1] < g.dims[1]; ++n[1])
                for (n[2] = 0; n[2] < g.dims[2]; ++n[2])
                    for (n[3] = 0; n[3] < g.dims[3]; ++n[3], ++idx) {
                        const std::complex<double> ika(0.0, spectral::wavenumber(g, a, n[a]));
                        const std::complex<double> ikb(0.0, spectral::wavenumber(g, b, n[b]));
                        const std::complex<double> ikc(0.0, spectral::wavenumber(g, c, n[c]));
                        work[idx] = ika * (sbc * spec[i_bc][idx]) - ikb * (sac * spec[i_ac][idx]) +
                                    ikc * (sab * spec[i_ab][idx]);
                    }
        spectral::inverse(g, work.data(), out.comp(t));
    }
    return out;
}

FourForm exterior_d(const ThreeForm& tau) {
    require_finite(tau, "exterior_d(3-form)");
    const GridSpec& g = tau.grid;
    const std::size_t np = g.points();
    FourForm out(g);

    // (d tau)_0123 = d0 t_123 - d1 t_023 + d2 t_013 - d3 t_012
    std::array<std::vector<std::complex<double>>, 4> spec;
    for (int t = 0; t < 4; ++t) {
        spec[t].resize(np);
        spectral::forward(g, tau.comp(t), spec[t].data());
    }
    std::vector<std::complex<double>> work(np);
    std::array<int, 4> n{};
    std::size_t idx = 0;
    for (n[0] = 0; n[0] < g.dims[0]; ++n[0])
        for (n[1] = 0; n[1] < g.dims[1]; ++n[1])
            for (n[2] = 0; n[2] < g.dims[2]; ++n[2])
                for (n[3] = 0; n[3] < g.dims[3]; ++n[3], ++idx) {
                    const std::complex<double> ik0(0.0, spectral::wavenumber(g, 0, n[0]));
                    const std::complex<double> ik1(0.0, spectral::wavenumber(g, 1, n[1]));
                    const std::complex<double> ik2(0.0, spectral::wavenumber(g, 2, n[2]));
                    const std::complex<double> ik3(0.0, spectral::wavenumber(g, 3, n[3]));
                    // triples order: 0=(012) 1=(013) 2=(023) 3=(123)
                    work[idx] = ik0 * spec[3][idx] - ik1 * spec[2][idx] + ik2 * spec[1][idx] -
                                ik3 * spec[0][idx];
                }
    spectral::inverse(g, work.data(), out.comp(0));
    return out;
}

ScalarField flat_poisson_solve(const ScalarField& rho, double mean_tol_rel) {
    require_finite(rho, "flat_poisson_solve");
    const GridSpec& g = rho.grid;
    const double scale = std::max(max_abs(rho), 1e-300);
    if (std::abs(mean(rho)) > mean_tol_rel * scale)
        fail(ErrorCode::NotSolvable, "flat_poisson_solve: right-hand side has nonzero mean");

    std::vector<std::complex<double>> spec(g.points());
    spectral::forward(g, rho.comp(0), spec.data());
    std::array<int, 4> n{};
    std::size_t idx = 0;
    for (n[0] = 0; n[0] < g.dims[0]; ++n[0])
        for (n[1] = 0; n[1] < g.dims[1]; ++n[1])
            for (n[2] = 0; n[2] < g.dims[2]; ++n[2])
                for (n[3] = 0; n[3] < g.dims[3]; ++n[3], ++idx) {
                    double k2 = 0.0;
                    for (int a = 0; a < 4; ++a) {
                        const double ka = spectral::wavenumber(g, a, n[a]);
                        k2 += ka * ka;
                    }
                    spec[idx] = (k2 > 0.0) ? spec[idx] / k2 : 0.0;
                }
    ScalarField out(g);
    spectral::inverse(g, spec.data(), out.comp(0));
    return out;
}

double integrate(const FourForm& mu) {
    double s = 0.0;
    for (double v : mu.data) s += v;
    return s * mu.grid.cell_volume();
}

void multiply_into(const GridSpec& g, const double* a, const double* b, double* out, bool dealias) {
    const std::size_t np = g.points();
    if (!dealias) {
        for (std::size_t i = 0; i < np; ++i) out[i] = a[i] * b[i];
        return;
    }
    // 3/2-rule: pad spectra to a finer grid, multiply there, truncate back.
    GridSpec big = g;
    for (int ax = 0; ax < 4; ++ax) {
        int m = (3 * g.dims[ax]) / 2;
        if (m % 2 != 0) ++m;
        big.dims[ax] = m;
    }
    const std::size_t npb = big.points();
    // inverse() normalizes by the grid's own point count; compensate so the
    // padded fields interpolate the originals exactly.
    const double up = double(npb) / double(np);
    const double down = double(np) / double(npb);
    std::vector<std::complex<double>> sa(np), sb(np), ba(npb, 0.0), bb(npb, 0.0);
    spectral::forward(g, a, sa.data());
    spectral::forward(g, b, sb.data());

    auto scatter = [&](const std::vector<std::complex<double>>& src, std::vector<std::complex<double>>& dst) {
        std::array<int, 4> n{};
        std::size_t idx = 0;
        for (n[0] = 0; n[0] < g.dims[0]; ++n[0])
            for (n[1] = 0; n[1] < g.dims[1]; ++n[1])
                for (n[2] = 0; n[2] < g.dims[2]; ++n[2])
                    for (n[3] = 0; n[3] < g.dims[3]; ++n[3], ++idx) {
                        std::array<int, 4> m{};
                        bool nyquist = false;
                        for (int ax = 0; ax < 4; ++ax) {
                            const int N = g.dims[ax];
                            int k = (n[ax] <= N / 2) ? n[ax] : n[ax] - N;
                            if (n[ax] == N / 2) nyquist = true; // dropped, like derivatives
                            m[ax] = (k >= 0) ? k : big.dims[ax] + k;
                        }
                        if (nyquist) continue;
                        dst[((std::size_t(m[0]) * big.dims[1] + m[1]) * big.dims[2] + m[2]) * big.dims[3] +
                            m[3]] = up * src[idx];
                    }
    };
    scatter(sa, ba);
    scatter(sb, bb);

    std::vector<double> ra(npb), rb(npb);
    spectral::inverse(big, ba.data(), ra.data());
    spectral::inverse(big, bb.data(), rb.data());
    for (std::size_t i = 0; i < npb; ++i) ra[i] *= rb[i];
    spectral::forward(big, ra.data(), ba.data());

    // gather back (truncate high modes)
    std::vector<std::complex<double>> sc(np, 0.0);
    {
        std::array<int, 4> n{};
        std::size_t idx = 0;
        for (n[0] = 0; n[0] < g.dims[0]; ++n[0])
            for (n[1] = 0; n[1] < g.dims[1]; ++n[1])
                for (n[2] = 0; n[2] < g.dims[2]; ++n[2])
                    for (n[3] = 0; n[3] < g.dims[3]; ++n[3], ++idx) {
                        std::array<int, 4> m{};
                        bool nyquist = false;
                        for (int ax = 0; ax < 4; ++ax) {
                            const int N = g.dims[ax];
                            int k = (n[ax] <= N / 2) ? n[ax] : n[ax] - N;
                            if (n[ax] == N / 2) nyquist = true;
                            m[ax] = (k >= 0) ? k : big.dims[ax] + k;
                        }
                        if (nyquist) {
                            sc[idx] = 0.0;
                            continue;
                        }
                        sc[idx] = down * ba[((std::size_t(m[0]) * big.dims[1] + m[1]) * big.dims[2] + m[2]) *
                                                big.dims[3] +
                                            m[3]];
                    }
    }
    spectral::inverse(g, sc.data(), out);
}

ScalarField multiply(const ScalarField& a, const ScalarField& b, bool dealias) {
    require_same_grid(a, b, "multiply");
    ScalarField out(a.grid);
    multiply_into(a.grid, a.comp(0), b.comp(0), out.comp(0), dealias);
    return out;
}

ScalarField codifferential(const OneForm& u, const CompatibleTriple& triple) {
    require_same_grid(u, triple.grid(), "codifferential(1-form)");
    ThreeForm su = hodge_star_1(u, triple);
    FourForm dsu = exterior_d(su);
    ScalarField out = hodge_star_4(dsu, triple);
    scale(out, -1.0);
    return out;
}

OneForm codifferential(const TwoForm& alpha, const CompatibleTriple& triple) {
    require_same_grid(alpha, triple.grid(), "codifferential(2-form)");
    TwoForm sa = hodge_star_2(alpha, triple);
    ThreeForm dsa = exterior_d(sa);
    OneForm out = hodge_star_3(dsa, triple);
    scale(out, -1.0);
    return out;
}

TwoForm codifferential(const ThreeForm& tau, const CompatibleTriple& triple) {
    require_same_grid(tau, triple.grid(), "codifferential(3-form)");
    OneForm st = hodge_star_3(tau, triple);
    TwoForm dst = exterior_d(st);
    TwoForm out = hodge_star_2(dst, triple);
    scale(out, -1.0);
    return out;
}

ScalarField laplacian(const ScalarField& phi, const CompatibleTriple& triple) {
    require_same_grid(phi, triple.grid(), "laplacian");
    return codifferential(exterior_d(phi), triple);
}

} // namespace akcy
