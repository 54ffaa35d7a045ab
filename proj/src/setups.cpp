#include "akcy/setups.hpp"

#include <Eigen/Dense>

#include <random>

namespace akcy {

namespace {

using Mat4 = Eigen::Matrix4d;

// Evaluate a separable cosine term prod_a cos(2 pi k_a x_a / L_a + phase_a).
struct CosTerm {
    double amp;
    std::array<int, 4> k;
    std::array<double, 4> phase;
};

std::vector<CosTerm> seeded_terms(std::uint64_t seed, int max_mode, double amplitude, int nterms) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> kd(-max_mode, max_mode);
    std::uniform_real_distribution<double> pd(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> ad(0.3, 1.0);
    std::vector<CosTerm> terms;
    terms.reserve(nterms);
    for (int j = 0; j < nterms; ++j) {
        CosTerm t;
        t.amp = amplitude * ad(rng) / (j + 1);
        do {
            for (int a = 0; a < 4; ++a) t.k[a] = kd(rng);
        } while (t.k == std::array<int, 4>{0, 0, 0, 0}); // keep the mean zero
        for (int a = 0; a < 4; ++a) t.phase[a] = pd(rng);
        terms.push_back(t);
    }
    return terms;
}

ScalarField sample_terms(const GridSpec& g, const std::vector<CosTerm>& terms) {
    ScalarField f(g);
    std::size_t p = 0;
    for (int i0 = 0; i0 < g.dims[0]; ++i0)
        for (int i1 = 0; i1 < g.dims[1]; ++i1)
            for (int i2 = 0; i2 < g.dims[2]; ++i2)
                for (int i3 = 0; i3 < g.dims[3]; ++i3, ++p) {
                    const int idx[4] = {i0, i1, i2, i3};
                    double v = 0.0;
                    for (const auto& t : terms) {
                        double term = t.amp;
                        for (int a = 0; a < 4; ++a)
                            term *= std::cos(2.0 * M_PI * t.k[a] * idx[a] / g.dims[a] + t.phase[a]);
                        v += term;
                    }
                    f[p] = v;
                }
    return f;
}

} // namespace

TwoForm standard_omega(const GridSpec& g) {
    TwoForm w(g);
    const std::size_t np = g.points();
    for (std::size_t p = 0; p < np; ++p) {
        w.at(0, p) = 1.0; // dx0^dx1
        w.at(5, p) = 1.0; // dx2^dx3
    }
    return w;
}

CompatibleTriple standard_triple(const GridSpec& g) {
    return build_triple(standard_omega(g), AcStructure::standard(g));
}

CompatibleTriple perturbed_triple(const GridSpec& g, std::uint64_t seed, double amplitude) {
    if (!(amplitude >= 0.0 && amplitude < 1.0))
        fail(ErrorCode::ValidationError, "perturbation amplitude must lie in [0, 1)");

    // Smooth symmetric perturbation field, normalized so |S(x)|_2 <= 1. Only
    // fundamental modes enter: the polar retraction is analytic in h, so the
    // spectrum of J decays by a factor ~amplitude per mode and the structure
    // is resolved to spectral accuracy on moderate grids.
    std::array<ScalarField, 10> entries;
    int e = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b, ++e) entries[e] = random_scalar(g, seed * 16 + e, 1, 1.0);

    const std::size_t np = g.points();
    double max_norm = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        Mat4 S;
        int q = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b, ++q) S(a, b) = S(b, a) = entries[q][p];
        max_norm = std::max(max_norm, S.cwiseAbs().rowwise().sum().maxCoeff());
    }
    const double rescale = (max_norm > 0.0) ? amplitude / max_norm : 0.0;

    Mat4 Omega0 = Mat4::Zero();
    Omega0(0, 1) = 1.0;
    Omega0(1, 0) = -1.0;
    Omega0(2, 3) = 1.0;
    Omega0(3, 2) = -1.0;

    MatrixField Jm(g);
    for (std::size_t p = 0; p < np; ++p) {
        Mat4 h = Mat4::Identity();
        int q = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b, ++q) {
                h(a, b) += rescale * entries[q][p];
                if (b != a) h(b, a) += rescale * entries[q][p];
            }
        // Polar retraction: J = h^{-1/2} Ahat (-Ahat^2)^{-1/2} h^{1/2},
        // Ahat = -h^{-1/2} Omega0 h^{-1/2}. Compatible with omega by construction.
        Eigen::SelfAdjointEigenSolver<Mat4> hs(h);
        const Mat4 h_half = hs.operatorSqrt();
        const Mat4 h_half_inv = hs.operatorInverseSqrt();
        const Mat4 Ahat = -h_half_inv * Omega0 * h_half_inv;
        Eigen::SelfAdjointEigenSolver<Mat4> ms(-Ahat * Ahat);
        const Mat4 J = h_half_inv * (Ahat * ms.operatorInverseSqrt()) * h_half;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) Jm.at_ab(a, b, p) = J(a, b);
    }
    return build_triple(standard_omega(g), AcStructure(std::move(Jm)));
}

ScalarField random_scalar(const GridSpec& g, std::uint64_t seed, int max_mode, double amplitude) {
    return sample_terms(g, seeded_terms(seed, max_mode, amplitude, 8));
}

OneForm random_one_form(const GridSpec& g, std::uint64_t seed, int max_mode, double amplitude) {
    OneForm u(g);
    for (int a = 0; a < 4; ++a) {
        ScalarField c = random_scalar(g, seed * 4 + a, max_mode, amplitude);
        std::copy(c.data.begin(), c.data.end(), u.comp(a));
    }
    return u;
}

TwoForm random_two_form(const GridSpec& g, std::uint64_t seed, int max_mode, double amplitude) {
    TwoForm alpha(g);
    for (int c = 0; c < 6; ++c) {
        ScalarField s = random_scalar(g, seed * 6 + c, max_mode, amplitude);
        std::copy(s.data.begin(), s.data.end(), alpha.comp(c));
    }
    return alpha;
}

ScalarField manufactured_phi(const GridSpec& g, double eps) {
    if (!(eps >= 0.0 && eps < 1.0))
        fail(ErrorCode::ValidationError, "manufactured amplitude must lie in [0, 1)");
    ScalarField phi(g);
    const double k = 2.0 * M_PI / g.periods[0];
    std::size_t p = 0;
    for (int i0 = 0; i0 < g.dims[0]; ++i0) {
        const double v = eps / (k * k) * std::sin(k * g.coord(0, i0));
        const std::size_t block = g.points() / g.dims[0];
        for (std::size_t q = 0; q < block; ++q, ++p) phi[p] = v;
    }
    return phi;
}

ScalarField manufactured_f(const GridSpec& g, double eps) {
    if (!(eps >= 0.0 && eps < 1.0))
        fail(ErrorCode::ValidationError, "manufactured amplitude must lie in [0, 1)");
    ScalarField f(g);
    const double k = 2.0 * M_PI / g.periods[0];
    std::size_t p = 0;
    for (int i0 = 0; i0 < g.dims[0]; ++i0) {
        const double v = std::log(1.0 - eps * std::sin(k * g.coord(0, i0)));
        const std::size_t block = g.points() / g.dims[0];
        for (std::size_t q = 0; q < block; ++q, ++p) f[p] = v;
    }
    return f;
}

} // namespace akcy
