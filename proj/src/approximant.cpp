#include "pellip/approximant.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "pellip/parallel.hpp"

namespace pellip {

Mollifier::Mollifier(double nu, int radius_points) : nu_(nu), radius_points_(radius_points) {
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("Mollifier: nu in (0, 1]");
    if (radius_points < 8) throw std::invalid_argument("Mollifier: need >= 8 points per radius");
    const int m = radius_points;
    const double h = 1.0 / m;
    double total = 0.0;
    for (int i1 = -m; i1 <= m; ++i1)
        for (int i2 = 0; i2 <= m; ++i2)
            for (int i3 = -m; i3 <= m; ++i3)
                for (int i4 = 0; i4 <= m; ++i4) {
                    const double x1 = i1 * h, x2 = i2 * h, x3 = i3 * h, x4 = i4 * h;
                    const double r2 = x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4;
                    if (r2 >= 1.0) continue;
                    const double mult = (i2 > 0 ? 2.0 : 1.0) * (i4 > 0 ? 2.0 : 1.0);
                    const double w = mult * std::exp(-1.0 / (1.0 - r2));
                    nodes_.push_back({nu * x1, nu * x2, nu * x3, nu * x4, w});
                    total += w;
                }
    for (auto& nd : nodes_) nd.w /= total;
}

MollifiedEval mollified_eval(const BiradialFn& f, const Mollifier& moll, const Vector4d& omega,
                             bool want_hess) {
    const double s = std::hypot(omega(0), omega(1));
    const double t = std::hypot(omega(2), omega(3));
    const double cz = s > 0.0 ? omega(0) / s : 1.0, sz = s > 0.0 ? omega(1) / s : 0.0;
    const double ce = t > 0.0 ? omega(2) / t : 1.0, se = t > 0.0 ? omega(3) / t : 0.0;

    double val = 0.0, g1 = 0.0, g3 = 0.0;
    double h11 = 0.0, h13 = 0.0, h33 = 0.0, h22 = 0.0, h44 = 0.0;
    for (const auto& nd : moll.nodes()) {
        // Even symmetry in each coordinate: evaluate with the offsets that
        // fall in the stored quadrant.
        const BiradialDerivs d = f(s - nd.x1, nd.x2, t - nd.x3, nd.x4, want_hess);
        val += nd.w * d.val;
        g1 += nd.w * d.g1;
        g3 += nd.w * d.g3;
        if (want_hess) {
            h11 += nd.w * d.h11;
            h13 += nd.w * d.h13;
            h33 += nd.w * d.h33;
            h22 += nd.w * d.h22;
            h44 += nd.w * d.h44;
        }
    }

    MollifiedEval out;
    out.value = val;
    out.grad << cz * g1, sz * g1, ce * g3, se * g3;
    if (want_hess) {
        Matrix4d aligned = Matrix4d::Zero();
        aligned(0, 0) = h11;
        aligned(1, 1) = h22;
        aligned(2, 2) = h33;
        aligned(3, 3) = h44;
        aligned(0, 2) = aligned(2, 0) = h13;
        Matrix4d rot = Matrix4d::Zero();
        rot(0, 0) = cz;
        rot(0, 1) = -sz;
        rot(1, 0) = sz;
        rot(1, 1) = cz;
        rot(2, 2) = ce;
        rot(2, 3) = -se;
        rot(3, 2) = se;
        rot(3, 3) = ce;
        out.hess = rot * aligned * rot.transpose();
    }
    return out;
}

BiradialDerivs bellman_biradial(const BellmanSpec& spec, double y1, double y2, double y3, double y4,
                                bool want_hess) {
    // Value and gradient exist everywhere; the nudge off the singular set is
    // applied only where the Hessian needs it, so it cannot perturb the
    // symmetry cancellations of the lower-order terms.
    const BellmanEval e = bellman_eval(spec, Vector2d(y1, y2), Vector2d(y3, y4), want_hess);
    BiradialDerivs d;
    d.val = e.value;
    d.g1 = e.grad(0);
    d.g3 = e.grad(2);
    if (want_hess) {
        const BellmanEval h =
            e.hess_valid ? e : bellman_eval_nudged(spec, Vector2d(y1, y2), Vector2d(y3, y4));
        d.h11 = h.hess(0, 0);
        d.h13 = h.hess(0, 2);
        d.h33 = h.hess(2, 2);
        d.h22 = h.hess(1, 1);
        d.h44 = h.hess(3, 3);
    }
    return d;
}

MollifiedEval mollified_bellman(const BellmanSpec& spec, const Mollifier& moll,
                                const Vector4d& omega, bool want_hess) {
    return mollified_eval(
        [&spec](double a, double b, double c, double d, bool wh) {
            return bellman_biradial(spec, a, b, c, d, wh);
        },
        moll, omega, want_hess);
}

double TruncatedPower::value(double t) const {
    const double pe = p + eps;
    if (t <= n) return std::pow(n, -eps) * std::pow(t, pe);
    return 0.5 * pe * std::pow(n, p - 2.0) * t * t + (1.0 - 0.5 * pe) * std::pow(n, p);
}

double TruncatedPower::d1(double t) const {
    const double pe = p + eps;
    if (t <= n) return pe * std::pow(n, -eps) * std::pow(t, pe - 1.0);
    return pe * std::pow(n, p - 2.0) * t;
}

double TruncatedPower::d2(double t) const {
    const double pe = p + eps;
    if (std::abs(t - n) <= kSingularMargin) t = n * (1.0 - kSingularNudge);
    if (t < n) return pe * (pe - 1.0) * std::pow(n, -eps) * std::pow(t, pe - 2.0);
    return pe * std::pow(n, p - 2.0);
}

double Cutoff::value(double r) const {
    if (r <= 3.0) return 1.0;
    if (r >= 4.0) return 0.0;
    const double u = r - 3.0;
    return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double Cutoff::d1(double r) const {
    if (r <= 3.0 || r >= 4.0) return 0.0;
    const double u = r - 3.0;
    return -30.0 * u * u * (1.0 - u) * (1.0 - u);
}

double Cutoff::d2(double r) const {
    if (r <= 3.0 || r >= 4.0) return 0.0;
    const double u = r - 3.0;
    return -60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

double choose_epsilon(const ComplexMatrixField& a, const ComplexMatrixField& b, double p,
                      double tol) {
    const double target = 0.5 * delta_p_pair(a, b, p);
    if (!(target > 0.0)) throw std::invalid_argument("choose_epsilon: pair is not p-elliptic");
    const auto good = [&](double eps) { return delta_p_pair(a, b, p + eps) > target; };
    if (good(1.0)) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (good(mid) ? lo : hi) = mid;
    }
    if (!(lo > 0.0) || !good(lo)) throw std::runtime_error("choose_epsilon: no admissible epsilon found");
    return lo;
}

ApproximantSpec make_approximant(const BellmanSpec& bellman, const ComplexMatrixField& a,
                                 const ComplexMatrixField& b, int n, double nu) {
    if (n < 1) throw std::invalid_argument("make_approximant: n >= 1");
    ApproximantSpec spec;
    spec.n = n;
    spec.nu = nu;
    spec.p = bellman.p;
    spec.q = bellman.q;
    spec.base = pair_constants(a, b, bellman.p);
    if (!(spec.base.delta_p > 0.0))
        throw std::invalid_argument("make_approximant: requires delta_p(A,B) > 0");
    spec.epsilon = choose_epsilon(a, b, bellman.p);
    spec.delta_p_eps = delta_p_pair(a, b, bellman.p + spec.epsilon);
    spec.kappa = (bellman.p + spec.epsilon - 2.0) * spec.base.Lambda / spec.delta_p_eps;
    spec.big_k = spec.kappa <= 1.0 ? 0.0 : std::pow(2.0 * spec.kappa, bellman.p + spec.epsilon - 1.0);
    return spec;
}

namespace {

// Accumulates the radial contribution g(|v|) on a 2-plane of coordinates
// (first, second) into the survivor components.
struct RadialPieces {
    double v = 0.0, d1 = 0.0, d1_over_r = 0.0, d2 = 0.0;
    bool at_origin = false;
};

RadialPieces radial_eval(const TruncatedPower& f, double r, bool want_hess) {
    RadialPieces out;
    if (r < 1e-150) {
        out.at_origin = true;  // f ~ t^{p+eps} with p+eps > 2: everything vanishes
        return out;
    }
    out.v = f.value(r);
    out.d1 = f.d1(r);
    out.d1_over_r = out.d1 / r;
    if (want_hess) out.d2 = f.d2(r);
    return out;
}

}  // namespace

BiradialDerivs pn_biradial(const ApproximantSpec& spec, double y1, double y2, double y3, double y4,
                           bool want_hess) {
    const TruncatedPower f = spec.profile();
    BiradialDerivs d;

    const double r4 = std::sqrt(y1 * y1 + y2 * y2 + y3 * y3 + y4 * y4);
    const RadialPieces w4 = radial_eval(f, r4, want_hess);
    if (!w4.at_origin) {
        const double u1 = y1 / r4, u2 = y2 / r4, u3 = y3 / r4;
        d.val += w4.v;
        d.g1 += w4.d1 * u1;
        d.g3 += w4.d1 * u3;
        if (want_hess) {
            const double k = w4.d2 - w4.d1_over_r;
            d.h11 += k * u1 * u1 + w4.d1_over_r;
            d.h13 += k * u1 * u3;
            d.h33 += k * u3 * u3 + w4.d1_over_r;
            d.h22 += k * u2 * u2 + w4.d1_over_r;
            const double u4 = y4 / r4;
            d.h44 += k * u4 * u4 + w4.d1_over_r;
        }
    }

    if (spec.big_k != 0.0) {
        const double rz = std::hypot(y1, y2);
        const RadialPieces wz = radial_eval(f, rz, want_hess);
        if (!wz.at_origin) {
            const double u1 = y1 / rz, u2 = y2 / rz;
            d.val += spec.big_k * wz.v;
            d.g1 += spec.big_k * wz.d1 * u1;
            if (want_hess) {
                const double k = wz.d2 - wz.d1_over_r;
                d.h11 += spec.big_k * (k * u1 * u1 + wz.d1_over_r);
                d.h22 += spec.big_k * (k * u2 * u2 + wz.d1_over_r);
            }
        }
        const double re = std::hypot(y3, y4);
        const RadialPieces we = radial_eval(f, re, want_hess);
        if (!we.at_origin) {
            const double u3 = y3 / re, u4 = y4 / re;
            d.val += spec.big_k * we.v;
            d.g3 += spec.big_k * we.d1 * u3;
            if (want_hess) {
                const double k = we.d2 - we.d1_over_r;
                d.h33 += spec.big_k * (k * u3 * u3 + we.d1_over_r);
                d.h44 += spec.big_k * (k * u4 * u4 + we.d1_over_r);
            }
        }
    }
    return d;
}

PnEval pn_eval(const ApproximantSpec& spec, const Vector4d& omega, bool want_hess) {
    // Same radial pieces, evaluated exactly at omega in its own frame.
    const double s = std::hypot(omega(0), omega(1));
    const double t = std::hypot(omega(2), omega(3));
    const double cz = s > 0.0 ? omega(0) / s : 1.0, sz = s > 0.0 ? omega(1) / s : 0.0;
    const double ce = t > 0.0 ? omega(2) / t : 1.0, se = t > 0.0 ? omega(3) / t : 0.0;
    const BiradialDerivs d = pn_biradial(spec, s, 0.0, t, 0.0, want_hess);
    PnEval out;
    out.value = d.val;
    out.grad << cz * d.g1, sz * d.g1, ce * d.g3, se * d.g3;
    if (want_hess) {
        Matrix4d aligned = Matrix4d::Zero();
        aligned(0, 0) = d.h11;
        aligned(1, 1) = d.h22;
        aligned(2, 2) = d.h33;
        aligned(3, 3) = d.h44;
        aligned(0, 2) = aligned(2, 0) = d.h13;
        Matrix4d rot = Matrix4d::Zero();
        rot(0, 0) = cz;
        rot(0, 1) = -sz;
        rot(1, 0) = sz;
        rot(1, 1) = cz;
        rot(2, 2) = ce;
        rot(2, 3) = -se;
        rot(3, 2) = se;
        rot(3, 3) = ce;
        out.hess = rot * aligned * rot.transpose();
    }
    return out;
}

MollifiedEval mollified_pn(const ApproximantSpec& spec, const Mollifier& moll, const Vector4d& omega,
                           bool want_hess) {
    return mollified_eval(
        [&spec](double a, double b, double c, double d, bool wh) {
            return pn_biradial(spec, a, b, c, d, wh);
        },
        moll, omega, want_hess);
}

namespace {

struct CutoffAt {
    double psi = 1.0;
    Vector4d dpsi = Vector4d::Zero();
    Matrix4d d2psi = Matrix4d::Zero();
};

CutoffAt cutoff_at(int n, const Vector4d& omega, bool want_hess) {
    CutoffAt out;
    const Cutoff c;
    const double r = omega.norm();
    const double rn = r / n;
    out.psi = c.value(rn);
    if (rn <= 3.0 || rn >= 4.0 || r == 0.0) return out;
    const Vector4d u = omega / r;
    const double p1 = c.d1(rn) / n;
    out.dpsi = p1 * u;
    if (want_hess) {
        const double p2 = c.d2(rn) / (n * n);
        out.d2psi = p2 * (u * u.transpose()) + (p1 / r) * (Matrix4d::Identity() - u * u.transpose());
    }
    return out;
}

}  // namespace

MollifiedEval approximant_eval(const ApproximantSpec& spec, const BellmanSpec& bellman,
                               const Mollifier& moll, const Vector4d& omega, bool want_hess) {
    if (!std::isfinite(spec.c1))
        throw std::invalid_argument("approximant_eval: C1 is uncalibrated (run calibrate_c1)");
    const double cp = spec.c1 * std::pow(spec.nu, spec.q - 2.0);
    const CutoffAt cut = cutoff_at(spec.n, omega, want_hess);
    MollifiedEval out;
    if (cut.psi != 0.0 || cut.dpsi.squaredNorm() != 0.0) {
        const MollifiedEval g = mollified_bellman(bellman, moll, omega, want_hess);
        out.value = cut.psi * g.value;
        out.grad = cut.psi * g.grad + g.value * cut.dpsi;
        if (want_hess)
            out.hess = cut.psi * g.hess + cut.dpsi * g.grad.transpose() +
                       g.grad * cut.dpsi.transpose() + g.value * cut.d2psi;
    }
    const MollifiedEval pn = mollified_pn(spec, moll, omega, want_hess);
    out.value += cp * pn.value;
    out.grad += cp * pn.grad;
    if (want_hess) out.hess += cp * pn.hess;
    return out;
}

ApproximantHessParts approximant_hess_parts(const ApproximantSpec& spec, const BellmanSpec& bellman,
                                            const Mollifier& moll, const Vector4d& omega) {
    ApproximantHessParts parts;
    const CutoffAt cut = cutoff_at(spec.n, omega, true);
    if (cut.psi != 0.0 || cut.dpsi.squaredNorm() != 0.0) {
        const MollifiedEval g = mollified_bellman(bellman, moll, omega, true);
        parts.bellman_part = cut.psi * g.hess + cut.dpsi * g.grad.transpose() +
                             g.grad * cut.dpsi.transpose() + g.value * cut.d2psi;
    }
    const MollifiedEval pn = mollified_pn(spec, moll, omega, true);
    parts.pn_part = std::pow(spec.nu, spec.q - 2.0) * pn.hess;
    return parts;
}

namespace {

Vector4d annulus_sample(Rng& rng, double r_lo, double r_hi) {
    Vector4d dir;
    double n2;
    do {
        for (int i = 0; i < 4; ++i) dir(i) = rng.gaussian();
        n2 = dir.squaredNorm();
    } while (n2 < 1e-30);
    dir /= std::sqrt(n2);
    const double u = rng.uniform();
    const double lo4 = std::pow(r_lo, 4.0), hi4 = std::pow(r_hi, 4.0);
    return std::pow(lo4 + u * (hi4 - lo4), 0.25) * dir;
}

}  // namespace

C1Calibration calibrate_c1(const BellmanSpec& bellman, const ComplexMatrixField& a,
                           const ComplexMatrixField& b, double nu, uint64_t seed,
                           std::vector<int> n_values, int samples_per_n, int threads) {
    if (a.size() != b.size())
        throw std::invalid_argument("calibrate_c1: fields must share a domain");
    C1Calibration cal;
    cal.n_values = n_values;
    cal.samples_per_n = samples_per_n;
    cal.seed = seed;

    const Mollifier moll(nu);
    struct Pair {
        MatrixXd hq, hp;
    };
    std::vector<std::vector<Pair>> parts(n_values.size());

    for (size_t ni = 0; ni < n_values.size(); ++ni) {
        ApproximantSpec spec = make_approximant(bellman, a, b, n_values[ni], nu);
        auto& bucket = parts[ni];
        bucket.resize(static_cast<size_t>(samples_per_n) * static_cast<size_t>(a.size()));
        const int n_batches = 64;
        parallel_batches(n_batches, threads, [&](int k) {
            Rng rng(batch_seed(seed ^ (0x5851f42d4c957f2dULL * (ni + 1)), static_cast<uint64_t>(k)));
            const int lo = static_cast<int>(static_cast<int64_t>(samples_per_n) * k / n_batches);
            const int hi = static_cast<int>(static_cast<int64_t>(samples_per_n) * (k + 1) / n_batches);
            for (int i = lo; i < hi; ++i) {
                const Vector4d omega = annulus_sample(rng, 3.0 * spec.n, 4.0 * spec.n);
                const ApproximantHessParts hp = approximant_hess_parts(spec, bellman, moll, omega);
                for (int c = 0; c < a.size(); ++c) {
                    MatrixXd hq = gen_hess_matrix2(hp.bellman_part, a.cell(c), b.cell(c));
                    MatrixXd hpn = gen_hess_matrix2(hp.pn_part, a.cell(c), b.cell(c));
                    Pair& slot = bucket[static_cast<size_t>(i) * a.size() + c];
                    slot.hq = 0.5 * (hq + hq.transpose());
                    slot.hp = 0.5 * (hpn + hpn.transpose());
                }
            }
        });
    }

    for (int k = -10; k <= 64; ++k) {
        const double c1 = std::ldexp(1.0, k);
        double min_form = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (const auto& bucket : parts) {
            for (const auto& pr : bucket) {
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(pr.hq + c1 * pr.hp, Eigen::EigenvaluesOnly);
                const double lmin = es.eigenvalues()(0);
                min_form = std::min(min_form, lmin);
                const double scale = std::max(1.0, pr.hq.cwiseAbs().maxCoeff() +
                                                       c1 * pr.hp.cwiseAbs().maxCoeff());
                if (lmin < -1e-12 * scale) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
        }
        if (ok) {
            cal.c1 = c1;
            cal.certified = true;
            cal.min_form = min_form;
            return cal;
        }
    }
    cal.certified = false;
    return cal;
}

}  // namespace pellip
