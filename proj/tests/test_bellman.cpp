#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pellip/bellman.hpp"
#include "support/oracles.hpp"

using namespace pellip;

namespace {

double q_value(const BellmanSpec& spec, const VectorXd& w) {
    return bellman_eval(spec, w.head<2>(), w.tail<2>(), false).value;
}

Vector4d sample_point(Rng& rng, double lo = 0.05, double hi = 3.0) {
    Vector4d w;
    const double s = rng.log_uniform(lo, hi), t = rng.log_uniform(lo, hi);
    const double a = rng.uniform(0.0, 6.2831853), b = rng.uniform(0.0, 6.2831853);
    w << s * std::cos(a), s * std::sin(a), t * std::cos(b), t * std::sin(b);
    return w;
}

}  // namespace

TEST_CASE("spec validation and conjugate exponent") {
    const BellmanSpec s(4.0, 0.25);
    CHECK(s.q == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(BellmanSpec(1.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(BellmanSpec(3.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(BellmanSpec(3.0, 1.0), std::invalid_argument);
}

TEST_CASE("value and gradient at the origin vanish") {
    const BellmanSpec spec(3.0, 0.5);
    const BellmanEval e = bellman_eval(spec, Vector2d::Zero(), Vector2d::Zero());
    CHECK(e.value == 0.0);
    CHECK(e.grad.norm() == 0.0);
    CHECK(!e.hess_valid);
}

TEST_CASE("eta = 0 branch: value (1 + 2 delta / p) |zeta|^p") {
    const BellmanSpec spec(3.5, 0.25);
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        const Vector2d z(rng.gaussian(), rng.gaussian());
        const BellmanEval e = bellman_eval(spec, z, Vector2d::Zero());
        const double want = (1.0 + 2.0 * spec.delta / spec.p) * std::pow(z.norm(), spec.p);
        CHECK(e.value == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("p = 2 closed form: Hessian frozen from the finite-difference oracle") {
    // At p = q = 2 both branch corrections coincide with delta |zeta|^2, so
    // the function is (1 + delta)|zeta|^2 + |eta|^2 globally; the oracle
    // Hessian is diag(2(1+delta), 2(1+delta), 2, 2).
    const double delta = 0.25;
    const BellmanSpec spec(2.0, delta);
    Rng rng(11);
    for (int k = 0; k < 10; ++k) {
        Vector4d w = sample_point(rng);
        if (w.head<2>().norm() >= w.tail<2>().norm()) continue;  // keep |zeta| <= |eta|
        const double want = (1.0 + delta) * w.head<2>().squaredNorm() + w.tail<2>().squaredNorm();
        const BellmanEval e = bellman_eval(spec, w.head<2>(), w.tail<2>());
        CHECK(e.value == doctest::Approx(want).epsilon(1e-13));
        const MatrixXd fd =
            oracles::fd_hessian([&](const VectorXd& x) { return q_value(spec, x); }, w);
        Matrix4d frozen = Matrix4d::Identity() * 2.0;
        frozen(0, 0) = frozen(1, 1) = 2.0 * (1.0 + delta);
        CHECK((fd - frozen).cwiseAbs().maxCoeff() < 1e-5);
        REQUIRE(e.hess_valid);
        CHECK((e.hess - frozen).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("gradient matches finite differences everywhere (C^1 across the interface)") {
    Rng rng(17);
    for (const double p : {2.5, 4.0, 8.0}) {
        const BellmanSpec spec(p, 0.5);
        for (int k = 0; k < 30; ++k) {
            Vector4d w = sample_point(rng);
            const bool on_interface = k % 3 == 0;
            if (on_interface) {
                // Put the point exactly on the branch interface |zeta|^p = |eta|^q.
                const double t = w.tail<2>().norm();
                const double s = std::pow(std::pow(t, spec.q), 1.0 / spec.p);
                w.head<2>() = s * w.head<2>().normalized();
            }
            const BellmanEval e = bellman_eval(spec, w.head<2>(), w.tail<2>());
            const VectorXd fd =
                oracles::fd_gradient([&](const VectorXd& x) { return q_value(spec, x); }, w);
            // Central differences across the interface pick up an O(step)
            // error from the second-derivative jump; off it they are O(step^2).
            const double tol = on_interface ? 1e-4 : 2e-7;
            CHECK((e.grad - fd).norm() < tol * std::max(1.0, e.grad.norm()));
        }
    }
}

TEST_CASE("Hessian matches finite differences off the singular set") {
    Rng rng(19);
    for (const double p : {2.5, 4.0, 6.0}) {
        const BellmanSpec spec(p, 0.25);
        int checked = 0;
        while (checked < 25) {
            const Vector4d w = sample_point(rng, 0.3, 2.0);
            const double s = w.head<2>().norm(), t = w.tail<2>().norm();
            if (std::abs(std::pow(s, spec.p) - std::pow(t, spec.q)) < 5e-4 || t < 5e-4) continue;
            const BellmanEval e = bellman_eval(spec, w.head<2>(), w.tail<2>());
            REQUIRE(e.hess_valid);
            const MatrixXd fd =
                oracles::fd_hessian([&](const VectorXd& x) { return q_value(spec, x); }, w, 1e-5);
            CHECK((e.hess - fd).cwiseAbs().maxCoeff() <
                  1e-5 * std::max(1.0, e.hess.cwiseAbs().maxCoeff()));
            ++checked;
        }
    }
}

TEST_CASE("one-sided second differences disagree only near the singular set") {
    const BellmanSpec spec(4.0, 0.5);
    // On the interface, second differences from the two sides differ.
    const double t = 1.3;
    const double s = std::pow(std::pow(t, spec.q), 1.0 / spec.p);
    const Vector2d eta(t, 0.0);
    const double step = 1e-4;
    const auto val = [&](double base, double ds) {
        return bellman_eval(spec, Vector2d(base + ds, 0.0), eta, false).value;
    };
    const double left = (val(s, 0.0) - 2.0 * val(s, -step) + val(s, -2.0 * step)) / (step * step);
    const double right = (val(s, 2.0 * step) - 2.0 * val(s, step) + val(s, 0.0)) / (step * step);
    const double at_interface = std::abs(left - right);
    // Away from it, both one-sided estimates agree to FD truncation order.
    const double far = 2.5 * s;
    const double l2 = (val(far, 0.0) - 2.0 * val(far, -step) + val(far, -2.0 * step)) / (step * step);
    const double r2 = (val(far, 2.0 * step) - 2.0 * val(far, step) + val(far, 0.0)) / (step * step);
    const double away = std::abs(l2 - r2);
    CHECK(at_interface > 1e-2);
    CHECK(away < 0.1 * at_interface);
    CHECK(away < 0.05 * std::max(1.0, std::abs(l2)));
}

TEST_CASE("size bounds hold with a fitted constant") {
    Rng rng(29);
    for (const double p : {2.5, 4.0, 8.0}) {
        const BellmanSpec spec(p, 0.5);
        double c_val = 0.0, c_gz = 0.0, c_ge = 0.0;
        for (int k = 0; k < 4000; ++k) {
            const Vector4d w = sample_point(rng, 1e-3, 50.0);
            const double s = w.head<2>().norm(), t = w.tail<2>().norm();
            const BellmanEval e = bellman_eval(spec, w.head<2>(), w.tail<2>(), false);
            CHECK(e.value >= 0.0);
            const double sp = std::pow(s, spec.p), tq = std::pow(t, spec.q);
            c_val = std::max(c_val, e.value / (sp + tq));
            const double gz = std::hypot(e.grad(0), e.grad(1));
            const double ge = std::hypot(e.grad(2), e.grad(3));
            c_gz = std::max(c_gz, gz / std::max(std::pow(s, spec.p - 1.0), t));
            c_ge = std::max(c_ge, ge / std::pow(t, spec.q - 1.0));
        }
        CHECK(c_val < 10.0);
        CHECK(c_gz < 20.0);
        CHECK(c_ge < 10.0);
    }
}

TEST_CASE("power Hessian: quadratic case, axis example, FD oracle") {
    Rng rng(41);
    VectorXd w2(2);
    w2 << 0.3, -0.7;
    CHECK((power_hessian(2.0, w2) - 2.0 * MatrixXd::Identity(2, 2)).norm() < 1e-14);

    VectorXd e1(2);
    e1 << 1.0, 0.0;
    MatrixXd want(2, 2);
    want << 12.0, 0.0, 0.0, 4.0;
    CHECK((power_hessian(4.0, e1) - want).norm() < 1e-13);

    for (int k = 0; k < 15; ++k) {
        const int l = 1 + rng.uniform_int(2);
        VectorXd w(2 * l);
        for (int i = 0; i < 2 * l; ++i) w(i) = rng.gaussian();
        if (w.norm() < 0.3) continue;
        // Near-unit arguments keep the FD rounding floor inside the stated
        // 1e-6 relative budget at step 1e-5.
        w *= rng.uniform(0.7, 1.5) / w.norm();
        const double r = rng.uniform(1.5, 6.0);
        const MatrixXd fd = oracles::fd_hessian(
            [&](const VectorXd& x) { return std::pow(x.norm(), r); }, w, 1e-5);
        const MatrixXd hp = power_hessian(r, w);
        CHECK((hp - fd).cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, hp.cwiseAbs().maxCoeff()));
    }
    CHECK_THROWS_AS(power_hessian(4.0, VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("generalized Hessian form: identity matrices give the Euclidean form") {
    Rng rng(43);
    const ComplexMatrix id = ComplexMatrix::identity(2);
    for (int k = 0; k < 10; ++k) {
        VectorXd x(4), y(4);
        for (int i = 0; i < 4; ++i) {
            x(i) = rng.gaussian();
            y(i) = rng.gaussian();
        }
        const Matrix4d h2 = Matrix4d::Identity() * 2.0;  // Hessian of |omega|^2
        const double form = gen_hess_form2(h2, id, id, x, y);
        CHECK(form == doctest::Approx(2.0 * (x.squaredNorm() + y.squaredNorm())).epsilon(1e-13));
    }
}

TEST_CASE("one-variable reduction ties the power form to the p-form pairing") {
    Rng rng(47);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 1 + rng.uniform_int(3);
        const ComplexMatrix a = random_elliptic(rng, d);
        const double p = rng.uniform(1.3, 9.0);
        Vector2d zeta(rng.gaussian(), rng.gaussian());
        if (zeta.norm() < 0.2) continue;
        VectorXcd xi(d);
        for (int i = 0; i < d; ++i) xi(i) = Complex(rng.gaussian(), rng.gaussian());
        const VectorXd x = split_real(xi);
        const double form = gen_hess_form(power_hessian(p, VectorXd(zeta)), {a}, {x});

        const Complex phase = std::exp(Complex(0.0, -std::atan2(zeta(1), zeta(0))));
        const VectorXcd sigma = phase * xi;
        const VectorXcd ip_sigma = sigma + (1.0 - 2.0 / p) * sigma.conjugate();
        const double want = 0.5 * p * p * std::pow(zeta.norm(), p - 2.0) *
                            (ip_sigma.dot(a.entries() * sigma)).real();
        CHECK(form == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("two summation formulas and the matrix route agree (seeded sweep)") {
    Rng rng(53);
    for (int trial = 0; trial < 120; ++trial) {
        const int d = 1 + rng.uniform_int(2);
        const int l = 2;
        const double p = rng.uniform(2.0, 10.0);
        std::vector<ComplexMatrix> as;
        std::vector<VectorXd> xs;
        VectorXd omega(2 * l);
        do {
            for (int i = 0; i < 2 * l; ++i) omega(i) = rng.gaussian();
        } while (omega.segment(0, 2).norm() < 0.05 || omega.segment(2, 2).norm() < 0.05);
        omega.normalize();
        for (int j = 0; j < l; ++j) {
            as.push_back(random_elliptic(rng, d));
            VectorXd x(2 * d);
            for (int i = 0; i < 2 * d; ++i) x(i) = rng.gaussian();
            xs.push_back(x);
        }
        const double via_matrix = gen_hess_form(power_hessian(p, omega), as, xs);
        const double f1 = oracles::power_form_formula_one(p, omega, as, xs);
        const double f2 = oracles::power_form_formula_two(p, omega, as, xs);
        const double scale = std::max({1.0, std::abs(via_matrix), std::abs(f1), std::abs(f2)});
        CHECK(std::abs(via_matrix - f1) / scale < 1e-9);
        CHECK(std::abs(via_matrix - f2) / scale < 1e-9);
        CHECK(std::abs(f1 - f2) / scale < 1e-9);
    }
}

TEST_CASE("lower bound: constants minus the off-diagonal weight") {
    Rng rng(59);
    for (int trial = 0; trial < 60; ++trial) {
        const int d = 1 + rng.uniform_int(2);
        const double p = rng.uniform(2.0, 9.0);
        std::vector<ComplexMatrix> as = {random_elliptic(rng, d), random_elliptic(rng, d)};
        VectorXd omega(4);
        for (int i = 0; i < 4; ++i) omega(i) = rng.gaussian();
        omega.normalize();
        std::vector<VectorXd> xs;
        for (int j = 0; j < 2; ++j) {
            VectorXd x(2 * d);
            for (int i = 0; i < 2 * d; ++i) x(i) = rng.gaussian();
            xs.push_back(x);
        }
        const double form = gen_hess_form(power_hessian(p, omega), as, xs);
        const double delta = std::min(delta_p_value(as[0], p), delta_p_value(as[1], p));
        const double lam_max = std::max(as[0].Lambda(), as[1].Lambda());
        const double w1 = omega.segment(0, 2).norm(), w2 = omega.segment(2, 2).norm();
        const double x2 = xs[0].squaredNorm() + xs[1].squaredNorm();
        CHECK(form / p >= x2 * (delta - (p - 2.0) * lam_max * w1 * w2) - 1e-9);
    }
}

TEST_CASE("sphere minimum of the generalized Hessian: exact for the quadratic") {
    const ComplexMatrix id = ComplexMatrix::identity(2);
    const MatrixXd h = gen_hess_matrix2(Matrix4d::Identity() * 2.0, id, id);
    const MinFormResult r = min_form_sphere(h);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("product-normalized minimum agrees with exhaustive sampling") {
    Rng rng(61);
    for (int trial = 0; trial < 12; ++trial) {
        const int d = 1 + rng.uniform_int(2);
        const ComplexMatrix a = random_elliptic(rng, d);
        const ComplexMatrix b = random_elliptic(rng, d);
        const BellmanSpec spec(rng.uniform(2.2, 5.0), 0.25);
        Vector4d w = sample_point(rng, 0.4, 2.5);
        const BellmanEval e = bellman_eval(spec, w.head<2>(), w.tail<2>());
        if (!e.hess_valid) continue;
        const MatrixXd h = gen_hess_matrix2(e.hess, a, b);
        Rng r1(100 + trial), r2(200 + trial);
        const MinFormResult alt = min_form_product(h, r1, 50, 200);
        // Dense random verification with many more samples.
        const MinFormResult brute = min_form_product(h, r2, 0, 200000);
        if (alt.unbounded_below || brute.unbounded_below) {
            CHECK(alt.unbounded_below == brute.unbounded_below);
            continue;
        }
        CHECK(alt.value <= brute.value + 1e-9);
        CHECK(brute.value - alt.value <= 0.05 * std::max(1.0, std::abs(brute.value)));
        // The recorded witness reproduces the minimum.
        const double at_witness =
            gen_hess_form2(e.hess, a, b, alt.x, alt.y) / (alt.x.norm() * alt.y.norm());
        CHECK(std::abs(at_witness - alt.value) < 1e-12 * std::max(1.0, std::abs(alt.value)));
    }
}
