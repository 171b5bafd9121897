#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pellip/approximant.hpp"
#include "support/oracles.hpp"

using namespace pellip;

namespace {

const BellmanSpec kSpec(3.0, 0.25);

ComplexMatrixField phase_field(double phi) {
    return ComplexMatrixField({ComplexMatrix::phase_identity(phi, 1)});
}

Vector4d point(double a, double b, double c, double d) {
    Vector4d w;
    w << a, b, c, d;
    return w;
}

}  // namespace

TEST_CASE("mollifier: normalized weights, support inside the nu-ball") {
    for (const double nu : {1.0, 0.25, 0.01}) {
        const Mollifier moll(nu, 8);
        double total = 0.0;
        for (const auto& nd : moll.nodes()) {
            total += nd.w;
            const double r = std::sqrt(nd.x1 * nd.x1 + nd.x2 * nd.x2 + nd.x3 * nd.x3 + nd.x4 * nd.x4);
            CHECK(r < nu);
            CHECK(nd.w > 0.0);
            CHECK(nd.x2 >= 0.0);
            CHECK(nd.x4 >= 0.0);
        }
        CHECK(std::abs(total - 1.0) <= 1e-10);
    }
    CHECK_THROWS_AS(Mollifier(0.5, 4), std::invalid_argument);
    CHECK_THROWS_AS(Mollifier(1.5, 8), std::invalid_argument);
}

TEST_CASE("mollified gradient vanishes at the origin") {
    const Mollifier moll(0.25);
    const MollifiedEval e = mollified_bellman(kSpec, moll, Vector4d::Zero());
    CHECK(e.grad.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(e.value > 0.0);
}

TEST_CASE("mollified value approaches the plain value away from the singular set") {
    const Mollifier moll(0.01);
    Rng rng(5);
    for (int k = 0; k < 20; ++k) {
        const double s = rng.uniform(0.5, 2.5), t = rng.uniform(0.5, 2.5);
        const double sp = std::pow(s, kSpec.p), tq = std::pow(t, kSpec.q);
        if (std::abs(sp - tq) < 0.1 * std::max(sp, tq)) continue;
        const double az = rng.uniform(0.0, 6.28), ae = rng.uniform(0.0, 6.28);
        const Vector4d w = point(s * std::cos(az), s * std::sin(az), t * std::cos(ae), t * std::sin(ae));
        const double plain = bellman_eval(kSpec, w.head<2>(), w.tail<2>(), false).value;
        const MollifiedEval e = mollified_bellman(kSpec, moll, w, false);
        CHECK(std::abs(e.value - plain) <= 0.02 * plain);
    }
}

TEST_CASE("mollified derivatives match finite differences of the quadrature value") {
    const double nu = 0.25;
    const Mollifier moll(nu);
    Rng rng(7);
    int checked = 0;
    while (checked < 100) {
        // Stay a safe distance from the singular set relative to nu so every
        // quadrature node sees a two-times-differentiable integrand.
        const double s = rng.uniform(0.8, 2.2), t = rng.uniform(0.8, 2.2);
        const double sp = std::pow(s, kSpec.p), tq = std::pow(t, kSpec.q);
        const double grad_scale = std::max(kSpec.p * std::pow(s, kSpec.p - 1.0),
                                           kSpec.q * std::pow(t, kSpec.q - 1.0));
        if (std::abs(sp - tq) < 1.6 * nu * grad_scale || t < 1.6 * nu) continue;
        const double az = rng.uniform(0.0, 6.28), ae = rng.uniform(0.0, 6.28);
        const Vector4d w = point(s * std::cos(az), s * std::sin(az), t * std::cos(ae), t * std::sin(ae));
        const bool with_hess = checked % 3 == 0;  // Hessian stencils cost 64 evaluations
        const MollifiedEval e = mollified_bellman(kSpec, moll, w, with_hess);
        const auto value = [&](const VectorXd& x) {
            return mollified_bellman(kSpec, moll, Vector4d(x), false).value;
        };
        const VectorXd fd_g = oracles::fd_gradient(value, w, 1e-5);
        CHECK((e.grad - fd_g).norm() <= 1e-5 * std::max(1.0, e.grad.norm()));
        if (with_hess) {
            const MatrixXd fd_h = oracles::fd_hessian(value, w, 1e-4);
            CHECK((e.hess - fd_h).cwiseAbs().maxCoeff() <=
                  1e-5 * std::max(1.0, e.hess.cwiseAbs().maxCoeff()));
        }
        ++checked;
    }
}

TEST_CASE("mollified Hessian growth: fitted constant against the nu-scaled envelope") {
    Rng rng(9);
    for (const double nu : {0.25, 0.1}) {
        const Mollifier moll(nu);
        double fitted = 0.0;
        for (int k = 0; k < 60; ++k) {
            const double s = rng.log_uniform(0.02, 5.0), t = rng.log_uniform(0.02, 5.0);
            const double az = rng.uniform(0.0, 6.28), ae = rng.uniform(0.0, 6.28);
            const Vector4d w =
                point(s * std::cos(az), s * std::sin(az), t * std::cos(ae), t * std::sin(ae));
            const MollifiedEval e = mollified_bellman(kSpec, moll, w);
            const double envelope = std::pow(nu, kSpec.q - 2.0) *
                                    (std::pow(s, kSpec.p - 2.0) + std::pow(t, 2.0 - kSpec.q) + 1.0);
            fitted = std::max(fitted, e.hess.cwiseAbs().maxCoeff() / envelope);
        }
        CHECK(fitted < 50.0);
    }
}

TEST_CASE("truncated power profile: branch values and slopes meet at the knee") {
    for (const double p : {2.5, 3.0, 6.0})
        for (const double eps : {0.3, 1.0})
            for (const double n : {1.0, 2.0, 4.0, 8.0}) {
                const TruncatedPower f{p, eps, n};
                const double pe = p + eps;
                const double inner_v = std::pow(n, -eps) * std::pow(n, pe);
                const double outer_v = 0.5 * pe * std::pow(n, p - 2.0) * n * n +
                                       (1.0 - 0.5 * pe) * std::pow(n, p);
                CHECK(inner_v == doctest::Approx(std::pow(n, p)).epsilon(1e-14));
                CHECK(outer_v == doctest::Approx(std::pow(n, p)).epsilon(1e-13));
                const double inner_d = pe * std::pow(n, -eps) * std::pow(n, pe - 1.0);
                const double outer_d = pe * std::pow(n, p - 2.0) * n;
                CHECK(inner_d == doctest::Approx(outer_d).epsilon(1e-13));
                CHECK(f.value(n) == doctest::Approx(std::pow(n, p)).epsilon(1e-13));
                // C^1 across the knee by finite differences.
                const double dl = (f.value(n) - f.value(n - 1e-6)) / 1e-6;
                const double dr = (f.value(n + 1e-6) - f.value(n)) / 1e-6;
                CHECK(std::abs(dl - dr) < 1e-4 * std::max(1.0, std::abs(dl)));
            }
}

TEST_CASE("cutoff: plateau, support, C^2 transition") {
    const Cutoff c;
    CHECK(c.value(2.9) == 1.0);
    CHECK(c.value(4.1) == 0.0);
    CHECK(c.d1(3.5) < 0.0);
    for (const double r : {3.0, 4.0}) {
        const double eps = 1e-6;
        CHECK(std::abs(c.value(r + eps) - c.value(r - eps)) < 1e-5);
        CHECK(std::abs(c.d1(r + eps) - c.d1(r - eps)) < 1e-5);
        CHECK(std::abs(c.d2(r + eps) - c.d2(r - eps)) < 1e-4);
    }
    // Derivatives consistent with finite differences inside the transition.
    for (const double r : {3.2, 3.5, 3.8}) {
        const double e1 = 1e-6, e2 = 1e-4;
        const double fd1 = (c.value(r + e1) - c.value(r - e1)) / (2.0 * e1);
        const double fd2 = (c.value(r + e2) - 2.0 * c.value(r) + c.value(r - e2)) / (e2 * e2);
        CHECK(std::abs(fd1 - c.d1(r)) < 1e-8);
        CHECK(std::abs(fd2 - c.d2(r)) < 1e-3);
    }
}

TEST_CASE("epsilon selection keeps the shifted exponent elliptic") {
    const ComplexMatrixField a = phase_field(0.5236);  // pi/6
    const ComplexMatrixField b = phase_field(0.0);
    for (const double p : {2.5, 3.0, 4.0}) {
        const double eps = choose_epsilon(a, b, p);
        CHECK(eps > 0.0);
        CHECK(eps <= 1.0);
        CHECK(delta_p_pair(a, b, p + eps) > 0.5 * delta_p_pair(a, b, p) - 1e-12);
    }
    CHECK_THROWS_AS(choose_epsilon(phase_field(1.55), phase_field(0.0), 3.0),
                    std::invalid_argument);
}

TEST_CASE("compensator spec: kappa and the threshold constant") {
    const ComplexMatrixField a = phase_field(0.5236);
    const ComplexMatrixField b = phase_field(0.0);
    const ApproximantSpec spec = make_approximant(kSpec, a, b, 2, 0.25);
    CHECK(spec.kappa ==
          doctest::Approx((kSpec.p + spec.epsilon - 2.0) * spec.base.Lambda / spec.delta_p_eps)
              .epsilon(1e-12));
    if (spec.kappa <= 1.0)
        CHECK(spec.big_k == 0.0);
    else
        CHECK(spec.big_k ==
              doctest::Approx(std::pow(2.0 * spec.kappa, kSpec.p + spec.epsilon - 1.0))
                  .epsilon(1e-12));
}

TEST_CASE("compensator derivatives match finite differences off the breakpoints") {
    const ComplexMatrixField a = phase_field(0.5236);
    const ComplexMatrixField b = phase_field(0.0);
    const ApproximantSpec spec = make_approximant(kSpec, a, b, 2, 0.25);
    Rng rng(13);
    int checked = 0;
    while (checked < 15) {
        Vector4d w;
        for (int i = 0; i < 4; ++i) w(i) = rng.uniform(-6.0, 6.0);
        const double n = spec.n;
        const double r4 = w.norm(), rz = w.head<2>().norm(), re = w.tail<2>().norm();
        if (std::abs(r4 - n) < 0.05 || std::abs(rz - n) < 0.05 || std::abs(re - n) < 0.05 ||
            rz < 0.05 || re < 0.05)
            continue;
        const PnEval e = pn_eval(spec, w);
        const auto value = [&](const VectorXd& x) { return pn_eval(spec, Vector4d(x), false).value; };
        const VectorXd fd_g = oracles::fd_gradient(value, w, 1e-6);
        CHECK((e.grad - fd_g).norm() < 1e-5 * std::max(1.0, e.grad.norm()));
        const MatrixXd fd_h = oracles::fd_hessian(value, w, 1e-4);
        CHECK((e.hess - fd_h).cwiseAbs().maxCoeff() <
              2e-4 * std::max(1.0, e.hess.cwiseAbs().maxCoeff()));
        ++checked;
    }
}

TEST_CASE("compensator gradient is C^1 across its breakpoints") {
    const ComplexMatrixField a = phase_field(0.5236);
    const ComplexMatrixField b = phase_field(0.0);
    const ApproximantSpec spec = make_approximant(kSpec, a, b, 2, 0.25);
    const Vector4d dir = point(0.5, 0.5, 0.5, 0.5).normalized();
    // Cross |omega| = n and |zeta| = n radially.
    for (const double radius : {static_cast<double>(spec.n), std::sqrt(2.0) * spec.n}) {
        const PnEval lo = pn_eval(spec, (radius - 1e-7) * dir, false);
        const PnEval hi = pn_eval(spec, (radius + 1e-7) * dir, false);
        CHECK((lo.grad - hi.grad).norm() < 1e-3 * std::max(1.0, lo.grad.norm()));
    }
}

TEST_CASE("outer lower bound for the compensator quadratic form") {
    const ComplexMatrixField af = phase_field(0.5236);
    const ComplexMatrixField bf = phase_field(0.0);
    const ApproximantSpec spec = make_approximant(kSpec, af, bf, 2, 0.25);
    const ComplexMatrix a = af.cell(0), b = bf.cell(0);
    const double lam = spec.base.lambda;
    const double floor = (kSpec.p + spec.epsilon) * std::pow(spec.n, kSpec.p - 2.0) * lam;
    Rng rng(17);
    for (int k = 0; k < 4000; ++k) {
        Vector4d w;
        for (int i = 0; i < 4; ++i) w(i) = rng.gaussian();
        const double r = rng.uniform(1.001 * spec.n, 6.0 * spec.n);
        w = r * w / w.norm();
        if (std::abs(w.head<2>().norm() - spec.n) < 1e-6 ||
            std::abs(w.tail<2>().norm() - spec.n) < 1e-6)
            continue;
        const PnEval e = pn_eval(spec, w);
        VectorXd x(2), y(2);
        x << rng.gaussian(), rng.gaussian();
        y << rng.gaussian(), rng.gaussian();
        const double form = gen_hess_form2(e.hess, a, b, x, y);
        CHECK(form >= floor * (x.squaredNorm() + y.squaredNorm()) - 1e-9);
    }
}

TEST_CASE("compensator gradient bound with an n-uniform constant") {
    const ComplexMatrixField af = phase_field(0.5236);
    const ComplexMatrixField bf = phase_field(0.0);
    Rng rng(19);
    std::vector<double> fitted;
    for (const int n : {1, 2, 4, 8}) {
        const ApproximantSpec spec = make_approximant(kSpec, af, bf, n, 0.25);
        double c = 0.0;
        Rng local(19);
        for (int k = 0; k < 2000; ++k) {
            Vector4d w;
            for (int i = 0; i < 4; ++i) w(i) = local.gaussian();
            w *= local.log_uniform(1e-2, 40.0) / w.norm();
            const PnEval e = pn_eval(spec, w, false);
            const double envelope = std::pow(w.head<2>().norm(), kSpec.p - 1.0) +
                                    std::pow(w.tail<2>().norm(), kSpec.p - 1.0);
            if (envelope > 0.0) c = std::max(c, e.grad.norm() / envelope);
        }
        fitted.push_back(c);
    }
    // Uniformity across n: later members stay within a fixed factor of the
    // first two.
    const double ref = std::max(fitted[0], fitted[1]);
    CHECK(fitted[2] <= 1.5 * ref);
    CHECK(fitted[3] <= 1.5 * ref);
}

TEST_CASE("compensator derivatives shrink pointwise as n grows") {
    // Inside the knee the whole family scales by n^{-eps}, so successive
    // members decay by that exact factor toward zero.
    const ComplexMatrixField af = phase_field(0.5236);
    const ComplexMatrixField bf = phase_field(0.0);
    const Vector4d w = point(0.4, -0.2, 0.3, 0.1);
    double prev = std::numeric_limits<double>::infinity();
    double eps = 1.0;
    for (const int n : {1, 2, 4, 8, 16}) {
        const ApproximantSpec spec = make_approximant(kSpec, af, bf, n, 0.25);
        eps = spec.epsilon;
        const PnEval e = pn_eval(spec, w);
        const double size = e.grad.norm() + e.hess.norm();
        if (std::isfinite(prev))
            CHECK(size == doctest::Approx(prev * std::pow(2.0, -eps)).epsilon(1e-10));
        prev = size;
    }
    CHECK(prev < std::pow(16.0, -eps) * 1e4);
}

TEST_CASE("identity pair admits a finite compensator weight") {
    const ComplexMatrixField ident({ComplexMatrix::identity(1)});
    const BellmanSpec spec(2.5, 0.25);
    const C1Calibration cal = calibrate_c1(spec, ident, ident, 0.25, 311, {1}, 250, 2);
    REQUIRE(cal.certified);
    CHECK(cal.c1 > 0.0);
    CHECK(std::isfinite(cal.c1));
}

TEST_CASE("smooth approximant: calibration, symmetry, growth, convergence") {
    const ComplexMatrixField af = phase_field(0.5236);
    const ComplexMatrixField bf = phase_field(0.0);
    const double nu = 0.25;
    const Mollifier moll(nu);

    ApproximantSpec spec = make_approximant(kSpec, af, bf, 2, nu);
    CHECK_THROWS_AS(approximant_eval(spec, kSpec, moll, Vector4d::Zero()), std::invalid_argument);

    const C1Calibration cal = calibrate_c1(kSpec, af, bf, nu, 99, {2}, 400, 2);
    REQUIRE(cal.certified);
    spec.c1 = cal.c1;

    // Doubling the compensator weight preserves sample nonnegativity.
    {
        Rng rng(21);
        ApproximantSpec doubled = spec;
        doubled.c1 = 2.0 * cal.c1;
        for (int k = 0; k < 40; ++k) {
            Vector4d w;
            for (int i = 0; i < 4; ++i) w(i) = rng.gaussian();
            w *= rng.uniform(3.0 * spec.n, 4.0 * spec.n) / w.norm();
            const MollifiedEval e = approximant_eval(doubled, kSpec, moll, w);
            const MatrixXd h = gen_hess_matrix2(e.hess, af.cell(0), bf.cell(0));
            CHECK(min_form_sphere(h).value >= -1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff()));
        }
    }

    // The zeta-derivative vanishes on the zeta = 0 slice.
    Rng rng(23);
    for (int k = 0; k < 10; ++k) {
        const double t = rng.log_uniform(0.05, 3.0 * spec.n);
        const double ang = rng.uniform(0.0, 6.28);
        const Vector4d w = point(0.0, 0.0, t * std::cos(ang), t * std::sin(ang));
        const MollifiedEval e = approximant_eval(spec, kSpec, moll, w, false);
        CHECK(std::abs(e.grad(0)) <= 1e-10);
        CHECK(std::abs(e.grad(1)) <= 1e-10);
    }

    // Gradient growth envelope |omega|^{p-1} + |omega|^{q-1}, fitted per n,
    // stays bounded in n.
    std::vector<double> fitted;
    for (const int n : {1, 2, 4, 8}) {
        ApproximantSpec sp_n = make_approximant(kSpec, af, bf, n, nu);
        sp_n.c1 = cal.c1;
        double c = 0.0;
        Rng local(31);
        for (int k = 0; k < 200; ++k) {
            Vector4d w;
            for (int i = 0; i < 4; ++i) w(i) = local.gaussian();
            w *= local.log_uniform(1e-2, 8.0 * n) / w.norm();
            const MollifiedEval e = approximant_eval(sp_n, kSpec, moll, w, false);
            const double r = w.norm();
            c = std::max(c, e.grad.norm() /
                                (std::pow(r, kSpec.p - 1.0) + std::pow(r, kSpec.q - 1.0)));
        }
        fitted.push_back(c);
    }
    CHECK(fitted[2] <= 1.5 * std::max(fitted[0], fitted[1]));
    CHECK(fitted[3] <= 1.5 * std::max(fitted[0], fitted[1]));

    // Pointwise convergence of the gradient to the mollified-Bellman
    // gradient as n grows: the compensator contribution decays like n^{-eps}.
    const Vector4d w = point(0.7, -0.4, 0.5, 0.3);
    const MollifiedEval limit = mollified_bellman(kSpec, moll, w);
    double prev_gap = std::numeric_limits<double>::infinity();
    double eps = 1.0;
    for (const int n : {1, 4, 16}) {
        ApproximantSpec sp_n = make_approximant(kSpec, af, bf, n, nu);
        eps = sp_n.epsilon;
        sp_n.c1 = cal.c1;
        const MollifiedEval e = approximant_eval(sp_n, kSpec, moll, w, false);
        const double gap = (e.grad - limit.grad).norm();
        if (std::isfinite(prev_gap)) {
            CHECK(gap < prev_gap);
            CHECK(gap <= prev_gap * (std::pow(4.0, -eps) * 1.2 + 1e-12));
        }
        prev_gap = gap;
    }
}
