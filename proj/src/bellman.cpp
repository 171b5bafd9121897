#include "pellip/bellman.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace pellip {

BellmanSpec::BellmanSpec(double p_, double delta_) : p(p_), delta(delta_) {
    if (!(p >= 2.0)) throw std::invalid_argument("BellmanSpec: requires p >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("BellmanSpec: delta in (0,1)");
    q = p / (p - 1.0);
}

BellmanEval bellman_eval(const BellmanSpec& spec, const Vector2d& zeta, const Vector2d& eta,
                         bool want_hess) {
    const double p = spec.p, q = spec.q, delta = spec.delta;
    const double s2 = zeta.squaredNorm(), t2 = eta.squaredNorm();
    const double s = std::sqrt(s2), t = std::sqrt(t2);
    // Everything is expressed through s^{p-2} and t^{q-2}; this is the hot
    // path of the convolution quadrature. p >= 2 keeps s^{p-2} finite at 0;
    // q <= 2 makes t^{q-2} singular there, but t^{q-2} eta -> 0, so the
    // gradient extends by 0.
    const double sp2 = s > 0.0 ? std::pow(s, p - 2.0) : (p == 2.0 ? 1.0 : 0.0);
    const double tq2 = t > 0.0 ? std::pow(t, q - 2.0) : 0.0;
    const double sp = sp2 * s2, tq = tq2 * t2;
    const double indicator = sp - tq;

    BellmanEval out;
    out.value = sp + tq;
    out.grad.head<2>() = p * sp2 * zeta;
    out.grad.tail<2>() = q * tq2 * eta;

    const double t2q = t > 0.0 ? 1.0 / tq2 : 0.0;  // t^{2-q}
    const double tmq = t > 0.0 ? 1.0 / tq : 0.0;   // t^{-q}
    if (indicator <= 0.0) {
        // |zeta|^p <= |eta|^q: R = s^2 t^{2-q}
        out.value += delta * s2 * t2q;
        out.grad.head<2>() += 2.0 * delta * t2q * zeta;
        out.grad.tail<2>() += delta * (2.0 - q) * s2 * tmq * eta;
    } else {
        // |zeta|^p >= |eta|^q: R = (2/p) s^p + (2/q - 1) t^q
        out.value += delta * ((2.0 / p) * sp + (2.0 / q - 1.0) * tq);
        out.grad.head<2>() += 2.0 * delta * sp2 * zeta;
        out.grad.tail<2>() += delta * (2.0 - q) * tq2 * eta;
    }

    if (!want_hess) return out;
    if (t <= kSingularMargin || std::abs(indicator) <= kSingularMargin) return out;

    out.hess_valid = true;
    Matrix2d hzz, hee;
    Matrix2d hze = Matrix2d::Zero();
    Matrix2d hp;
    if (s > 0.0)
        hp = p * sp2 * (Matrix2d::Identity() + ((p - 2.0) / s2) * (zeta * zeta.transpose()));
    else
        hp = p == 2.0 ? Matrix2d(2.0 * Matrix2d::Identity()) : Matrix2d(Matrix2d::Zero());
    const Matrix2d hq =
        q * tq2 * (Matrix2d::Identity() + ((q - 2.0) / t2) * (eta * eta.transpose()));
    if (indicator < 0.0) {
        hzz = hp + 2.0 * delta * t2q * Matrix2d::Identity();
        hee = hq + delta * s2 * (2.0 - q) * tmq *
                       (Matrix2d::Identity() - (q / t2) * (eta * eta.transpose()));
        hze = 2.0 * delta * (2.0 - q) * tmq * (zeta * eta.transpose());
    } else {
        hzz = (1.0 + 2.0 * delta / p) * hp;
        hee = (1.0 + delta * (2.0 / q - 1.0)) * hq;
    }
    out.hess.topLeftCorner<2, 2>() = hzz;
    out.hess.bottomRightCorner<2, 2>() = hee;
    out.hess.topRightCorner<2, 2>() = hze;
    out.hess.bottomLeftCorner<2, 2>() = hze.transpose();
    return out;
}

BellmanEval bellman_eval_nudged(const BellmanSpec& spec, Vector2d zeta, Vector2d eta) {
    double t = eta.norm();
    if (t <= kSingularMargin) {
        eta = Vector2d(kSingularNudge, 0.0);
        t = kSingularNudge;
    }
    const double s = zeta.norm();
    if (std::abs(std::pow(s, spec.p) - std::pow(t, spec.q)) <= kSingularMargin) {
        const double s_new = s + kSingularNudge;
        zeta = (s > 0.0) ? Vector2d(zeta * (s_new / s)) : Vector2d(s_new, 0.0);
    }
    return bellman_eval(spec, zeta, eta, true);
}

MatrixXd power_hessian(double r, const VectorXd& omega) {
    if (!(r > 1.0)) throw std::invalid_argument("power_hessian: requires r > 1");
    const double n = omega.norm();
    if (n == 0.0) throw std::invalid_argument("power_hessian: omega = 0 is singular");
    const int m = static_cast<int>(omega.size());
    const VectorXd u = omega / n;
    return r * std::pow(n, r - 2.0) * (MatrixXd::Identity(m, m) + (r - 2.0) * (u * u.transpose()));
}

MatrixXd gen_hess_matrix(const MatrixXd& hess_phi, const std::vector<ComplexMatrix>& as) {
    const int k = static_cast<int>(as.size());
    if (hess_phi.rows() != 2 * k || hess_phi.cols() != 2 * k)
        throw std::invalid_argument("gen_hess_matrix: hess_phi must be 2k x 2k");
    const int d = as[0].dim();
    for (const auto& a : as)
        if (a.dim() != d) throw std::invalid_argument("gen_hess_matrix: mixed matrix dimensions");
    MatrixXd kron(2 * k * d, 2 * k * d);
    for (int i = 0; i < 2 * k; ++i)
        for (int j = 0; j < 2 * k; ++j)
            kron.block(i * d, j * d, d, d) = hess_phi(i, j) * MatrixXd::Identity(d, d);
    MatrixXd out(2 * k * d, 2 * k * d);
    for (int j = 0; j < k; ++j)
        out.middleRows(2 * j * d, 2 * d) =
            real_form(as[static_cast<size_t>(j)].adjoint()) * kron.middleRows(2 * j * d, 2 * d);
    return out;
}

double gen_hess_form(const MatrixXd& hess_phi, const std::vector<ComplexMatrix>& as,
                     const std::vector<VectorXd>& xs) {
    const int k = static_cast<int>(as.size());
    if (static_cast<int>(xs.size()) != k || hess_phi.rows() != 2 * k)
        throw std::invalid_argument("gen_hess_form: inconsistent dimensions");
    const int d = as[0].dim();
    for (const auto& x : xs)
        if (x.size() != 2 * d) throw std::invalid_argument("gen_hess_form: block size mismatch");
    // y = (hess_phi (x) I_d) Xi, assembled d-block by d-block.
    std::vector<VectorXd> yblocks(static_cast<size_t>(2 * k), VectorXd::Zero(d));
    for (int a = 0; a < 2 * k; ++a)
        for (int b = 0; b < 2 * k; ++b) {
            const double c = hess_phi(a, b);
            if (c == 0.0) continue;
            const VectorXd& xb = xs[static_cast<size_t>(b / 2)];
            yblocks[static_cast<size_t>(a)] += c * xb.segment((b % 2) * d, d);
        }
    double form = 0.0;
    for (int j = 0; j < k; ++j) {
        VectorXd yj(2 * d);
        yj.head(d) = yblocks[static_cast<size_t>(2 * j)];
        yj.tail(d) = yblocks[static_cast<size_t>(2 * j + 1)];
        form += xs[static_cast<size_t>(j)].dot(real_form(as[static_cast<size_t>(j)].adjoint()) * yj);
    }
    return form;
}

MatrixXd gen_hess_matrix2(const Matrix4d& hess_phi, const ComplexMatrix& a, const ComplexMatrix& b) {
    return gen_hess_matrix(hess_phi, {a, b});
}

double gen_hess_form2(const Matrix4d& hess_phi, const ComplexMatrix& a, const ComplexMatrix& b,
                      const VectorXd& x, const VectorXd& y) {
    return gen_hess_form(hess_phi, {a, b}, {x, y});
}

MinFormResult min_form_sphere(const MatrixXd& gen_hess) {
    const MatrixXd s = 0.5 * (gen_hess + gen_hess.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
    MinFormResult r;
    r.value = es.eigenvalues()(0);
    const VectorXd v = es.eigenvectors().col(0);
    const int half = static_cast<int>(v.size()) / 2;
    r.x = v.head(half);
    r.y = v.tail(half);
    return r;
}

namespace {

// Minimize <M z, z> + 2 <w, z> over the unit sphere: (M - mu I) z = -w with
// mu below the smallest eigenvalue and |z| = 1.
VectorXd sphere_quadratic_min(const MatrixXd& m, const VectorXd& w) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    const VectorXd lam = es.eigenvalues();
    const VectorXd wt = es.eigenvectors().transpose() * w;
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff() + w.norm());
    const auto norm2_at = [&](double mu) {
        double n2 = 0.0;
        for (int i = 0; i < lam.size(); ++i) {
            const double den = lam(i) - mu;
            n2 += wt(i) * wt(i) / (den * den);
        }
        return n2;
    };
    double hi = lam(0) - 1e-14 * scale;
    if (norm2_at(hi) < 1.0) {
        // Hard case: w has (numerically) no component on the bottom
        // eigenspace; complete with the bottom eigenvector.
        VectorXd z = VectorXd::Zero(w.size());
        for (int i = 0; i < lam.size(); ++i) {
            const double den = lam(i) - lam(0);
            if (std::abs(den) > 1e-12 * scale) z += -(wt(i) / den) * es.eigenvectors().col(i);
        }
        const double rem = 1.0 - z.squaredNorm();
        z += std::sqrt(std::max(0.0, rem)) * es.eigenvectors().col(0);
        return z.normalized();
    }
    double lo = hi - scale;
    while (norm2_at(lo) > 1.0) {
        lo -= (hi - lo);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * scale; ++it) {
        const double mid = 0.5 * (lo + hi);
        (norm2_at(mid) > 1.0 ? hi : lo) = mid;
    }
    const double mu = 0.5 * (lo + hi);
    VectorXd z = VectorXd::Zero(w.size());
    for (int i = 0; i < lam.size(); ++i) z += -(wt(i) / (lam(i) - mu)) * es.eigenvectors().col(i);
    return z.normalized();
}

}  // namespace

MinFormResult min_form_product(const MatrixXd& gen_hess, Rng& rng, int iters, int verify_samples) {
    const int n = static_cast<int>(gen_hess.rows());
    const int half = n / 2;
    const MatrixXd s = 0.5 * (gen_hess + gen_hess.transpose());
    const MatrixXd s11 = s.topLeftCorner(half, half);
    const MatrixXd s22 = s.bottomRightCorner(half, half);
    const MatrixXd s12 = s.topRightCorner(half, half);

    MinFormResult best;
    best.value = std::numeric_limits<double>::infinity();

    // Along pure-block directions the ratio degenerates to a scaling limit:
    // a negative diagonal block drives it to -infinity.
    Eigen::SelfAdjointEigenSolver<MatrixXd> es11(s11), es22(s22);
    if (es11.eigenvalues()(0) < 0.0 || es22.eigenvalues()(0) < 0.0) {
        best.unbounded_below = true;
        best.value = -std::numeric_limits<double>::infinity();
        best.x = es11.eigenvalues()(0) < 0.0 ? VectorXd(es11.eigenvectors().col(0))
                                             : VectorXd(VectorXd::Zero(half));
        best.y = es22.eigenvalues()(0) < 0.0 ? VectorXd(es22.eigenvectors().col(0))
                                             : VectorXd(VectorXd::Zero(half));
        return best;
    }

    const auto ratio = [&](const VectorXd& xu, const VectorXd& yu) {
        const double a = xu.dot(s11 * xu);
        const double c = yu.dot(s22 * yu);
        const double b = xu.dot(s12 * yu);
        return 2.0 * (std::sqrt(std::max(0.0, a * c)) + b);
    };
    const auto consider = [&](VectorXd xu, VectorXd yu) {
        const double v = ratio(xu, yu);
        if (v < best.value) {
            best.value = v;
            best.x = xu;
            best.y = yu;
        }
    };

    // Alternating eigen-iterations from a few deterministic starts.
    std::vector<std::pair<VectorXd, VectorXd>> starts;
    starts.emplace_back(es11.eigenvectors().col(0), es22.eigenvectors().col(0));
    {
        MinFormResult sph = min_form_sphere(gen_hess);
        if (sph.x.norm() > 1e-8 && sph.y.norm() > 1e-8)
            starts.emplace_back(sph.x.normalized(), sph.y.normalized());
    }
    for (int r = 0; r < 2; ++r) {
        VectorXd xu(half), yu(half);
        for (int i = 0; i < half; ++i) {
            xu(i) = rng.gaussian();
            yu(i) = rng.gaussian();
        }
        starts.emplace_back(xu.normalized(), yu.normalized());
    }
    for (auto& [xu, yu] : starts) {
        double prev = ratio(xu, yu);
        consider(xu, yu);
        for (int it = 0; it < iters; ++it) {
            const double c = std::max(1e-300, yu.dot(s22 * yu));
            const double a0 = std::max(1e-300, xu.dot(s11 * xu));
            xu = sphere_quadratic_min(std::sqrt(c / a0) * s11, s12 * yu);
            const double a = std::max(1e-300, xu.dot(s11 * xu));
            const double c0 = std::max(1e-300, yu.dot(s22 * yu));
            yu = sphere_quadratic_min(std::sqrt(a / c0) * s22, s12.transpose() * xu);
            const double cur = ratio(xu, yu);
            consider(xu, yu);
            if (std::abs(prev - cur) < 1e-12 * (1.0 + std::abs(cur))) break;
            prev = cur;
        }
    }
    // Random-direction verification sweep.
    for (int k = 0; k < verify_samples; ++k) {
        VectorXd xu(half), yu(half);
        for (int i = 0; i < half; ++i) {
            xu(i) = rng.gaussian();
            yu(i) = rng.gaussian();
        }
        consider(xu.normalized(), yu.normalized());
    }
    // Report the witness at the optimal relative scaling |X|/|Y|.
    const double a = best.x.dot(s11 * best.x);
    const double c = best.y.dot(s22 * best.y);
    if (a > 0.0 && c > 0.0) {
        const double r = std::pow(c / a, 0.25);
        best.x *= r;
        best.y /= r;
    }
    return best;
}

}  // namespace pellip
