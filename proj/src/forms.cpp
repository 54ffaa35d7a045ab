#include "akcy/forms.hpp"

#include <Eigen/Dense>

#include "akcy/spectral.hpp"

namespace akcy {

namespace {

using Mat4 = Eigen::Matrix4d;

// Gather the antisymmetric matrix of a 2-form at one point.
Mat4 two_form_matrix(const TwoForm& alpha, std::size_t p) {
    Mat4 A = Mat4::Zero();
    for (int c = 0; c < 6; ++c) {
        const int a = kTwoFormPairs[c][0], b = kTwoFormPairs[c][1];
        const double v = alpha.at(c, p);
        A(a, b) = v;
        A(b, a) = -v;
    }
    return A;
}

void set_two_form(TwoForm& alpha, std::size_t p, const Mat4& A) {
    for (int c = 0; c < 6; ++c) alpha.at(c, p) = A(kTwoFormPairs[c][0], kTwoFormPairs[c][1]);
}

Mat4 matrix_at(const MatrixField& m, std::size_t p) {
    Mat4 M;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) M(a, b) = m.at(4 * a + b, p);
    return M;
}

void set_matrix(MatrixField& m, std::size_t p, const Mat4& M) {
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) m.at(4 * a + b, p) = M(a, b);
}

} // namespace

AcStructure AcStructure::standard(const GridSpec& g) {
    MatrixField m(g);
    const std::size_t np = g.points();
    for (std::size_t p = 0; p < np; ++p) {
        m.at_ab(1, 0, p) = 1.0;
        m.at_ab(0, 1, p) = -1.0;
        m.at_ab(3, 2, p) = 1.0;
        m.at_ab(2, 3, p) = -1.0;
    }
    return AcStructure(std::move(m));
}

double AcStructure::involution_defect() const {
    const std::size_t np = grid().points();
    double worst = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        Mat4 J = matrix_at(mat, p);
        worst = std::max(worst, (J * J + Mat4::Identity()).cwiseAbs().maxCoeff());
    }
    return worst;
}

CompatibleTriple CompatibleTriple::build(TwoForm omega, AcStructure J, bool require_closed) {
    require_same_grid(omega, J.grid(), "build_triple");
    require_finite(omega, "build_triple");
    require_finite(J.mat, "build_triple");
    const GridSpec& g = omega.grid;
    const std::size_t np = g.points();
    const double scale = std::max(1.0, max_abs(omega));

    if (J.involution_defect() > 1e-10)
        fail(ErrorCode::NotCompatible, "J is not an almost complex structure (J^2 != -I)");

    if (require_closed) {
        const double closed_defect = max_abs(exterior_d(omega));
        if (closed_defect > 1e-10 * scale)
            fail(ErrorCode::NotClosed,
                 "omega is not closed (max |d omega| = " + std::to_string(closed_defect) + ")");
    }

    CompatibleTriple t;
    t.g_ = MatrixField(g);
    t.g_inv_ = MatrixField(g);
    t.sqrt_det_ = ScalarField(g);

    double sym_defect = 0.0, inv_defect = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        const Mat4 A = two_form_matrix(omega, p);
        const Mat4 Jm = matrix_at(J.mat, p);
        const Mat4 G = A * Jm; // g(X,Y) = omega(X, JY)
        sym_defect = std::max(sym_defect, (G - G.transpose()).cwiseAbs().maxCoeff());
        inv_defect = std::max(inv_defect, (Jm.transpose() * A * Jm - A).cwiseAbs().maxCoeff());
        set_matrix(t.g_, p, G);
    }
    if (sym_defect > 1e-10 * scale || inv_defect > 1e-10 * scale)
        fail(ErrorCode::NotCompatible, "omega is not J-invariant / metric not symmetric (defects " +
                                           std::to_string(sym_defect) + ", " +
                                           std::to_string(inv_defect) + ")");

    for (std::size_t p = 0; p < np; ++p) {
        const Mat4 G = matrix_at(t.g_, p);
        Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (G + G.transpose()));
        if (es.eigenvalues().minCoeff() <= 0.0)
            fail(ErrorCode::NotPositive, "metric is not positive definite");
        set_matrix(t.g_inv_, p, G.inverse());
        t.sqrt_det_[p] = std::sqrt(G.determinant());
    }

    t.omega_ = std::move(omega);
    t.j_ = std::move(J);
    t.closed_ = require_closed;
    return t;
}

CompatibleTriple CompatibleTriple::almost_kahler(TwoForm omega, AcStructure J) {
    return build(std::move(omega), std::move(J), true);
}

CompatibleTriple CompatibleTriple::hermitian(TwoForm omega, AcStructure J) {
    return build(std::move(omega), std::move(J), false);
}

TwoForm j_involution(const TwoForm& alpha, const AcStructure& J) {
    require_same_grid(alpha, J.grid(), "j_involution");
    const std::size_t np = alpha.grid.points();
    TwoForm out(alpha.grid);
    for (std::size_t p = 0; p < np; ++p) {
        const Mat4 A = two_form_matrix(alpha, p);
        const Mat4 Jm = matrix_at(J.mat, p);
        set_two_form(out, p, Jm.transpose() * A * Jm);
    }
    return out;
}

TwoForm project_invariant(const TwoForm& alpha, const AcStructure& J, Sign sign) {
    TwoForm ja = j_involution(alpha, J);
    const double s = (sign == Sign::Plus) ? 0.5 : -0.5;
    TwoForm out = alpha;
    scale(out, 0.5);
    axpy(out, s, ja);
    return out;
}

FourForm hodge_star_0(const ScalarField& f, const CompatibleTriple& triple) {
    require_same_grid(f, triple.grid(), "hodge_star_0");
    FourForm out(f.grid);
    const std::size_t np = f.grid.points();
    for (std::size_t p = 0; p < np; ++p) out[p] = f[p] * triple.sqrt_det()[p];
    return out;
}

ThreeForm hodge_star_1(const OneForm& u, const CompatibleTriple& triple) {
    require_same_grid(u, triple.grid(), "hodge_star_1");
    const std::size_t np = u.grid.points();
    ThreeForm out(u.grid);
    const MatrixField& gi = triple.metric_inv();
    for (std::size_t p = 0; p < np; ++p) {
        double raised[4];
        for (int a = 0; a < 4; ++a) {
            raised[a] = 0.0;
            for (int b = 0; b < 4; ++b) raised[a] += gi.at_ab(a, b, p) * u.at(b, p);
        }
        const double sg = triple.sqrt_det()[p];
        // slots: 0=(012) 1=(013) 2=(023) 3=(123)
        out.at(0, p) = -sg * raised[3];
        out.at(1, p) = sg * raised[2];
        out.at(2, p) = -sg * raised[1];
        out.at(3, p) = sg * raised[0];
    }
    return out;
}

TwoForm hodge_star_2(const TwoForm& alpha, const CompatibleTriple& triple) {
    require_same_grid(alpha, triple.grid(), "hodge_star_2");
    const std::size_t np = alpha.grid.points();
    TwoForm out(alpha.grid);
    for (std::size_t p = 0; p < np; ++p) {
        const Mat4 A = two_form_matrix(alpha, p);
        const Mat4 Gi = matrix_at(triple.metric_inv(), p);
        const Mat4 R = Gi * A * Gi; // raised indices, antisymmetric
        const double sg = triple.sqrt_det()[p];
        // (*a)_{ab} = sqrt(g) * eps_{cdab} a^{cd} over the complementary pair
        out.at(0, p) = sg * R(2, 3);  // (01) <- +a^{23}
        out.at(1, p) = -sg * R(1, 3); // (02) <- -a^{13}
        out.at(2, p) = sg * R(1, 2);  // (03) <- +a^{12}
        out.at(3, p) = sg * R(0, 3);  // (12) <- +a^{03}
        out.at(4, p) = -sg * R(0, 2); // (13) <- -a^{02}
        out.at(5, p) = sg * R(0, 1);  // (23) <- +a^{01}
    }
    return out;
}

OneForm hodge_star_3(const ThreeForm& tau, const CompatibleTriple& triple) {
    require_same_grid(tau, triple.grid(), "hodge_star_3");
    const std::size_t np = tau.grid.points();
    OneForm out(tau.grid);
    const MatrixField& g = triple.metric();
    for (std::size_t p = 0; p < np; ++p) {
        // V^k = eps^{kbcd} tau_{bcd} / 6, then (*tau)_a = -g_{ak} V^k / sqrt(g)
        const double V0 = tau.at(3, p);  // +tau_123
        const double V1 = -tau.at(2, p); // -tau_023
        const double V2 = tau.at(1, p);  // +tau_013
        const double V3 = -tau.at(0, p); // -tau_012
        const double inv_sg = 1.0 / triple.sqrt_det()[p];
        for (int a = 0; a < 4; ++a)
            out.at(a, p) = -inv_sg * (g.at_ab(a, 0, p) * V0 + g.at_ab(a, 1, p) * V1 +
                                      g.at_ab(a, 2, p) * V2 + g.at_ab(a, 3, p) * V3);
    }
    return out;
}

ScalarField hodge_star_4(const FourForm& mu, const CompatibleTriple& triple) {
    require_same_grid(mu, triple.grid(), "hodge_star_4");
    ScalarField out(mu.grid);
    const std::size_t np = mu.grid.points();
    for (std::size_t p = 0; p < np; ++p) out[p] = mu[p] / triple.sqrt_det()[p];
    return out;
}

TwoForm project_selfdual(const TwoForm& alpha, const CompatibleTriple& triple, Sign sign) {
    TwoForm sa = hodge_star_2(alpha, triple);
    const double s = (sign == Sign::Plus) ? 0.5 : -0.5;
    TwoForm out = alpha;
    scale(out, 0.5);
    axpy(out, s, sa);
    return out;
}

TwoForm wedge_11(const OneForm& u, const OneForm& v, bool dealias) {
    require_same_grid(u, v, "wedge_11");
    const GridSpec& g = u.grid;
    TwoForm out(g);
    std::vector<double> t1(g.points()), t2(g.points());
    for (int c = 0; c < 6; ++c) {
        const int a = kTwoFormPairs[c][0], b = kTwoFormPairs[c][1];
        multiply_into(g, u.comp(a), v.comp(b), t1.data(), dealias);
        multiply_into(g, u.comp(b), v.comp(a), t2.data(), dealias);
        for (std::size_t p = 0; p < g.points(); ++p) out.at(c, p) = t1[p] - t2[p];
    }
    return out;
}

FourForm wedge_22(const TwoForm& alpha, const TwoForm& beta, bool dealias) {
    require_same_grid(alpha, beta, "wedge_22");
    const GridSpec& g = alpha.grid;
    FourForm out(g);
    // (a^b)_0123 = a01 b23 + a23 b01 - a02 b13 - a13 b02 + a03 b12 + a12 b03
    static constexpr int pair[3][2] = {{0, 5}, {1, 4}, {2, 3}};
    static constexpr double sgn[3] = {1.0, -1.0, 1.0};
    std::vector<double> t1(g.points()), t2(g.points());
    for (int k = 0; k < 3; ++k) {
        multiply_into(g, alpha.comp(pair[k][0]), beta.comp(pair[k][1]), t1.data(), dealias);
        multiply_into(g, alpha.comp(pair[k][1]), beta.comp(pair[k][0]), t2.data(), dealias);
        for (std::size_t p = 0; p < g.points(); ++p) out[p] += sgn[k] * (t1[p] + t2[p]);
    }
    return out;
}

FourForm wedge_13(const OneForm& u, const ThreeForm& tau, bool dealias) {
    require_same_grid(u, tau, "wedge_13");
    const GridSpec& g = u.grid;
    FourForm out(g);
    // u ^ tau = u0 t123 - u1 t023 + u2 t013 - u3 t012
    static constexpr double sgn[4] = {1.0, -1.0, 1.0, -1.0};
    std::vector<double> t(g.points());
    for (int a = 0; a < 4; ++a) {
        multiply_into(g, u.comp(a), tau.comp(3 - a), t.data(), dealias);
        for (std::size_t p = 0; p < g.points(); ++p) out[p] += sgn[a] * t[p];
    }
    return out;
}

OneForm j_one_form(const OneForm& u, const AcStructure& J) {
    require_same_grid(u, J.grid(), "j_one_form");
    const std::size_t np = u.grid.points();
    OneForm out(u.grid);
    for (std::size_t p = 0; p < np; ++p)
        for (int a = 0; a < 4; ++a) {
            double s = 0.0;
            for (int b = 0; b < 4; ++b) s += u.at(b, p) * J.mat.at_ab(b, a, p);
            out.at(a, p) = -s; // (J u)(X) = -u(JX)
        }
    return out;
}

ScalarField inner_22(const TwoForm& alpha, const TwoForm& beta, const CompatibleTriple& triple) {
    require_same_grid(alpha, triple.grid(), "inner_22");
    require_same_grid(beta, triple.grid(), "inner_22");
    const std::size_t np = alpha.grid.points();
    ScalarField out(alpha.grid);
    for (std::size_t p = 0; p < np; ++p) {
        const Mat4 A = two_form_matrix(alpha, p);
        const Mat4 B = two_form_matrix(beta, p);
        const Mat4 Gi = matrix_at(triple.metric_inv(), p);
        out[p] = 0.5 * (A * Gi * B.transpose() * Gi).trace();
    }
    return out;
}

ScalarField inner_11(const OneForm& u, const OneForm& v, const CompatibleTriple& triple) {
    require_same_grid(u, triple.grid(), "inner_11");
    require_same_grid(v, triple.grid(), "inner_11");
    const std::size_t np = u.grid.points();
    ScalarField out(u.grid);
    const MatrixField& gi = triple.metric_inv();
    for (std::size_t p = 0; p < np; ++p) {
        double s = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) s += gi.at_ab(a, b, p) * u.at(a, p) * v.at(b, p);
        out[p] = s;
    }
    return out;
}

namespace {

template <class Pointwise>
double weighted_sum(const CompatibleTriple& triple, Pointwise&& f) {
    const std::size_t np = triple.grid().points();
    double s = 0.0;
    for (std::size_t p = 0; p < np; ++p) s += f(p) * triple.sqrt_det()[p];
    return s * triple.grid().cell_volume();
}

} // namespace

double l2_inner(const ScalarField& a, const ScalarField& b, const CompatibleTriple& triple) {
    return weighted_sum(triple, [&](std::size_t p) { return a[p] * b[p]; });
}

double l2_inner(const OneForm& a, const OneForm& b, const CompatibleTriple& triple) {
    ScalarField ip = inner_11(a, b, triple);
    return weighted_sum(triple, [&](std::size_t p) { return ip[p]; });
}

double l2_inner(const TwoForm& a, const TwoForm& b, const CompatibleTriple& triple) {
    ScalarField ip = inner_22(a, b, triple);
    return weighted_sum(triple, [&](std::size_t p) { return ip[p]; });
}

EigenPairField darboux_eigenvalues(const TwoForm& omega, const TwoForm& omega1,
                                   const CompatibleTriple& triple, DarbouxOptions opts) {
    require_same_grid(omega, triple.grid(), "darboux_eigenvalues");
    require_same_grid(omega1, triple.grid(), "darboux_eigenvalues");
    (void)omega; // the reference form is the triple's; kept for call-site clarity

    const double anti = max_abs(project_invariant(omega1, triple.J(), Sign::Minus));
    if (anti > opts.invariance_tol)
        fail(ErrorCode::NotInvariant,
             "omega1 is not J-invariant (|P_J^- omega1| = " + std::to_string(anti) + ")");

    const std::size_t np = omega1.grid.points();
    EigenPairField out{ScalarField(omega1.grid), ScalarField(omega1.grid)};
    for (std::size_t p = 0; p < np; ++p) {
        const Mat4 A1 = two_form_matrix(omega1, p);
        const Mat4 Jm = matrix_at(triple.J().mat, p);
        const Mat4 G = matrix_at(triple.metric(), p);
        Mat4 G1 = A1 * Jm;
        G1 = 0.5 * (G1 + G1.transpose());
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat4> es(G1, G);
        const auto& ev = es.eigenvalues(); // ascending
        const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
        if (std::abs(ev[0] - ev[1]) > opts.pairing_tol * scale ||
            std::abs(ev[2] - ev[3]) > opts.pairing_tol * scale)
            fail(ErrorCode::PairingBroken, "generalized eigenvalues do not occur in pairs");
        out.a1[p] = 0.5 * (ev[0] + ev[1]);
        out.a2[p] = 0.5 * (ev[2] + ev[3]);
    }
    return out;
}

PositivityReport positivity_check(const TwoForm& omega_tilde, const CompatibleTriple& triple,
                                  double anti_tol) {
    require_same_grid(omega_tilde, triple.grid(), "positivity_check");
    PositivityReport rep;
    rep.max_anti = max_abs(project_invariant(omega_tilde, triple.J(), Sign::Minus));

    const std::size_t np = omega_tilde.grid.points();
    double min_eig = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < np; ++p) {
        const Mat4 A1 = two_form_matrix(omega_tilde, p);
        const Mat4 Jm = matrix_at(triple.J().mat, p);
        const Mat4 G = matrix_at(triple.metric(), p);
        Mat4 G1 = A1 * Jm;
        G1 = 0.5 * (G1 + G1.transpose());
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat4> es(G1, G);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    rep.min_a1 = min_eig;
    rep.ok = rep.max_anti <= anti_tol && rep.min_a1 > 0.0;
    return rep;
}

QuadraticEigenBound eigen_bounds_quadratic(const TwoForm& omega1, const CompatibleTriple& triple) {
    require_same_grid(omega1, triple.grid(), "eigen_bounds_quadratic");
    const std::size_t np = omega1.grid.points();
    FourForm ww = wedge_22(triple.omega(), triple.omega());
    FourForm w1w = wedge_22(triple.omega(), omega1);
    FourForm w1w1 = wedge_22(omega1, omega1);

    QuadraticEigenBound out{std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity(), true};
    for (std::size_t p = 0; p < np; ++p) {
        const double s = 2.0 * w1w[p] / ww[p];
        const double q = w1w1[p] / ww[p];
        double disc = s * s - 4.0 * q;
        if (disc < 0.0) {
            if (disc < -1e-9 * std::max(1.0, s * s)) out.ok = false;
            disc = 0.0;
        }
        const double root = std::sqrt(disc);
        out.min_a1 = std::min(out.min_a1, 0.5 * (s - root));
        out.max_a2 = std::max(out.max_a2, 0.5 * (s + root));
    }
    return out;
}

} // namespace akcy
