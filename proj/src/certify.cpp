#include "pellip/certify.hpp"

#include <cmath>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "pellip/parallel.hpp"

namespace pellip {

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::kCertifiedNonnegative: return "certified-nonnegative-with-margin";
        case Verdict::kNegativityWitness: return "negativity-witness";
        case Verdict::kInconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Verdict classify_min(double min_form, double scale, double negative_threshold,
                     double zero_tolerance) {
    if (min_form < negative_threshold * std::max(1.0, scale)) return Verdict::kNegativityWitness;
    if (min_form >= zero_tolerance * std::max(1.0, scale)) return Verdict::kCertifiedNonnegative;
    return Verdict::kInconclusive;
}

Vector4d sample_off_singular(Rng& rng, double p, double q, double r_lo, double r_hi) {
    for (;;) {
        const double s = rng.log_uniform(r_lo, r_hi);
        const double t = rng.log_uniform(r_lo, r_hi);
        const double az = rng.uniform(0.0, 6.283185307179586);
        const double ae = rng.uniform(0.0, 6.283185307179586);
        const double sp = std::pow(s, p), tq = std::pow(t, q);
        if (std::abs(sp - tq) <= 1e-6 * std::max(sp, tq)) continue;
        Vector4d omega;
        omega << s * std::cos(az), s * std::sin(az), t * std::cos(ae), t * std::sin(ae);
        return omega;
    }
}

DeltaCalibration calibrate_delta(double p, const ComplexMatrixField& a, const ComplexMatrixField& b,
                                 uint64_t seed, int omega_samples, int max_k) {
    if (a.size() != b.size())
        throw std::invalid_argument("calibrate_delta: fields must share a domain");
    const PairConstants c = pair_constants(a, b, p);
    if (!(c.delta_p > 0.0)) throw std::invalid_argument("calibrate_delta: requires delta_p(A,B) > 0");

    DeltaCalibration cal;
    cal.seed = seed;
    cal.omega_samples = omega_samples;
    cal.bound = c.delta_p / 5.0 * c.lambda / c.Lambda;

    for (int k = 1; k <= max_k; ++k) {
        const double delta = std::ldexp(1.0, -k);
        const BellmanSpec spec(p, delta);
        Rng rng(batch_seed(seed, static_cast<uint64_t>(k)));
        double min_product = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (int i = 0; i < omega_samples && ok; ++i) {
            const Vector4d omega = sample_off_singular(rng, spec.p, spec.q);
            const BellmanEval be =
                bellman_eval(spec, omega.head<2>(), omega.tail<2>(), true);
            if (!be.hess_valid) continue;
            for (int cell = 0; cell < a.size(); ++cell) {
                const MatrixXd h = gen_hess_matrix2(be.hess, a.cell(cell), b.cell(cell));
                const MinFormResult r = min_form_product(h, rng, 50, 512);
                min_product = std::min(min_product, r.value);
                if (r.value < cal.bound) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) {
            cal.delta = delta;
            cal.certified = true;
            cal.min_product = min_product;
            return cal;
        }
    }
    cal.certified = false;
    return cal;
}

namespace {

Vector4d unit4(Rng& rng) {
    Vector4d v;
    double n2;
    do {
        for (int i = 0; i < 4; ++i) v(i) = rng.gaussian();
        n2 = v.squaredNorm();
    } while (n2 < 1e-30);
    return v / std::sqrt(n2);
}

struct ScanState {
    double min_form = std::numeric_limits<double>::infinity();
    double scale = 1.0;
    Vector4d omega = Vector4d::Zero();
    VectorXd x, y;
};

void merge(ScanState& into, const ScanState& from) {
    if (from.min_form < into.min_form) into = from;
}

}  // namespace

ConvexityCertificate certify_power4(double p, const ComplexMatrix& a, const ComplexMatrix& b,
                                    int samples, uint64_t seed, int threads) {
    const int n_batches = 64;
    std::vector<ScanState> states(n_batches);
    parallel_batches(n_batches, threads, [&](int k) {
        Rng rng(batch_seed(seed, static_cast<uint64_t>(k)));
        ScanState st;
        const int lo = static_cast<int>(static_cast<int64_t>(samples) * k / n_batches);
        const int hi = static_cast<int>(static_cast<int64_t>(samples) * (k + 1) / n_batches);
        for (int i = lo; i < hi; ++i) {
            const Vector4d omega = unit4(rng);
            const Matrix4d hp = power_hessian(p, omega);
            const MatrixXd h = gen_hess_matrix2(hp, a, b);
            const MinFormResult r = min_form_sphere(h);
            st.scale = std::max(st.scale, h.cwiseAbs().maxCoeff());
            if (r.value < st.min_form) {
                st.min_form = r.value;
                st.omega = omega;
                st.x = r.x;
                st.y = r.y;
            }
        }
        states[static_cast<size_t>(k)] = st;
    });
    ScanState best = states[0];
    for (int k = 1; k < n_batches; ++k) merge(best, states[static_cast<size_t>(k)]);

    ConvexityCertificate cert;
    cert.region = "unit sphere of R^4";
    cert.normalization = "sphere";
    cert.sample_count = samples;
    cert.seed = seed;
    cert.min_normalized_form = best.min_form;
    cert.scale = best.scale;
    cert.witness_omega = best.omega;
    cert.witness_x = best.x;
    cert.witness_y = best.y;
    cert.verdict = classify_min(best.min_form, best.scale);
    return cert;
}

ConvexityCertificate certify_bellman_product(const BellmanSpec& spec, const ComplexMatrix& a,
                                             const ComplexMatrix& b, int omega_samples,
                                             uint64_t seed) {
    Rng rng(seed);
    ConvexityCertificate cert;
    cert.region = "off-singular biradial samples, radii in [0.05, 20]";
    cert.normalization = "productXY";
    cert.sample_count = omega_samples;
    cert.seed = seed;
    cert.min_normalized_form = std::numeric_limits<double>::infinity();
    for (int i = 0; i < omega_samples; ++i) {
        const Vector4d omega = sample_off_singular(rng, spec.p, spec.q);
        const BellmanEval be = bellman_eval(spec, omega.head<2>(), omega.tail<2>(), true);
        if (!be.hess_valid) continue;
        const MatrixXd h = gen_hess_matrix2(be.hess, a, b);
        const MinFormResult r = min_form_product(h, rng, 50, 256);
        cert.scale = std::max(cert.scale, h.cwiseAbs().maxCoeff());
        if (r.value < cert.min_normalized_form) {
            cert.min_normalized_form = r.value;
            cert.witness_omega = omega;
            cert.witness_x = r.x;
            cert.witness_y = r.y;
        }
    }
    cert.verdict = classify_min(cert.min_normalized_form, cert.scale);
    return cert;
}

ConvexityCertificate certify_approximant(const ApproximantSpec& spec, const BellmanSpec& bellman,
                                         const ComplexMatrixField& a, const ComplexMatrixField& b,
                                         int samples, uint64_t seed, int threads) {
    const Mollifier moll(spec.nu);
    const int n_batches = 64;
    std::vector<ScanState> states(n_batches);
    parallel_batches(n_batches, threads, [&](int k) {
        Rng rng(batch_seed(seed, static_cast<uint64_t>(k)));
        ScanState st;
        const int lo = static_cast<int>(static_cast<int64_t>(samples) * k / n_batches);
        const int hi = static_cast<int>(static_cast<int64_t>(samples) * (k + 1) / n_batches);
        for (int i = lo; i < hi; ++i) {
            // Radii spanning the inner ball, the cutoff annulus and the far
            // field of the scaled cutoff.
            const double r = rng.log_uniform(1e-2, 8.0 * spec.n);
            const Vector4d omega = r * unit4(rng);
            const MollifiedEval me = approximant_eval(spec, bellman, moll, omega, true);
            for (int cell = 0; cell < a.size(); ++cell) {
                const MatrixXd h = gen_hess_matrix2(me.hess, a.cell(cell), b.cell(cell));
                const MinFormResult res = min_form_sphere(h);
                st.scale = std::max(st.scale, h.cwiseAbs().maxCoeff());
                if (res.value < st.min_form) {
                    st.min_form = res.value;
                    st.omega = omega;
                    st.x = res.x;
                    st.y = res.y;
                }
            }
        }
        states[static_cast<size_t>(k)] = st;
    });
    ScanState best = states[0];
    for (int k = 1; k < n_batches; ++k) merge(best, states[static_cast<size_t>(k)]);

    ConvexityCertificate cert;
    cert.region = "log-uniform radii in [1e-2, 8n]";
    cert.normalization = "sphere";
    cert.sample_count = samples;
    cert.seed = seed;
    cert.min_normalized_form = best.min_form;
    cert.scale = best.scale;
    cert.witness_omega = best.omega;
    cert.witness_x = best.x;
    cert.witness_y = best.y;
    cert.verdict = classify_min(best.min_form, best.scale);
    return cert;
}

double RadialProfile::value(double t) const {
    switch (kind) {
        case Kind::kConstant: return 1.0;
        case Kind::kFlatThenQuadratic: {
            const double u = t - t0;
            return u > 0.0 ? u * u : 0.0;
        }
        case Kind::kPower: return std::pow(t, r);
    }
    return 0.0;
}

double RadialProfile::d1(double t) const {
    switch (kind) {
        case Kind::kConstant: return 0.0;
        case Kind::kFlatThenQuadratic: {
            const double u = t - t0;
            return u > 0.0 ? 2.0 * u : 0.0;
        }
        case Kind::kPower: return t > 0.0 ? r * std::pow(t, r - 1.0) : 0.0;
    }
    return 0.0;
}

double RadialProfile::d2(double t) const {
    switch (kind) {
        case Kind::kConstant: return 0.0;
        case Kind::kFlatThenQuadratic: return t > t0 ? 2.0 : 0.0;
        case Kind::kPower: return t > 0.0 ? r * (r - 1.0) * std::pow(t, r - 2.0) : 0.0;
    }
    return 0.0;
}

namespace {

// Generalized Hessian of Gamma(zeta) = gamma(|zeta|) with respect to one
// matrix, as a function of the radius and planar direction.
MatrixXd radial_gen_hess(const ComplexMatrix& a, const RadialProfile& prof, const Vector2d& zeta) {
    const double t = zeta.norm();
    Matrix2d d2g;
    if (t <= 0.0) {
        d2g = prof.d2(0.0) * Matrix2d::Identity();
    } else {
        const Vector2d u = zeta / t;
        const Matrix2d uu = u * u.transpose();
        d2g = prof.d2(t) * uu + (prof.d1(t) / t) * (Matrix2d::Identity() - uu);
    }
    return gen_hess_matrix(d2g, {a});
}

}  // namespace

ConvexityCertificate rigidity_probe(const ComplexMatrix& a, const RadialProfile& profile,
                                    int samples, uint64_t seed) {
    Rng rng(seed);
    ConvexityCertificate cert;
    cert.region = "radial profile scan";
    cert.normalization = "sphere";
    cert.sample_count = samples;
    cert.seed = seed;
    cert.min_normalized_form = std::numeric_limits<double>::infinity();

    Vector2d best_zeta = Vector2d::UnitX();
    const auto consider = [&](const Vector2d& zeta) {
        const MatrixXd h = radial_gen_hess(a, profile, zeta);
        const MinFormResult r = min_form_sphere(h);
        cert.scale = std::max(cert.scale, std::max(1e-30, h.cwiseAbs().maxCoeff()));
        if (r.value < cert.min_normalized_form) {
            cert.min_normalized_form = r.value;
            best_zeta = zeta;
            VectorXd xi(r.x.size() + r.y.size());
            xi << r.x, r.y;
            cert.witness_x = xi;
        }
    };

    for (int i = 0; i < samples; ++i) {
        // Half the budget covers broad radii, half clusters just above the
        // breakpoint where the slope turns on.
        double t;
        if (i % 2 == 0)
            t = rng.log_uniform(1e-2, 10.0) * profile.t0;
        else
            t = profile.t0 * (1.0 + rng.log_uniform(1e-4, 2.0));
        const double ang = rng.uniform(0.0, 6.283185307179586);
        consider(Vector2d(t * std::cos(ang), t * std::sin(ang)));
    }

    // Golden-section refinement of the radius along the best direction.
    {
        const double t_best = best_zeta.norm();
        const Vector2d dir = t_best > 0.0 ? Vector2d(best_zeta / t_best) : Vector2d::UnitX();
        const auto value_at = [&](double t) {
            return min_form_sphere(radial_gen_hess(a, profile, t * dir)).value;
        };
        const double gr = 0.61803398874989484820;
        double lo = std::max(1e-8, 0.5 * t_best), hi = 2.0 * t_best + 1e-8;
        double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
        double f1 = value_at(m1), f2 = value_at(m2);
        for (int it = 0; it < 60; ++it) {
            if (f1 < f2) {
                hi = m2;
                m2 = m1;
                f2 = f1;
                m1 = hi - gr * (hi - lo);
                f1 = value_at(m1);
            } else {
                lo = m1;
                m1 = m2;
                f1 = f2;
                m2 = lo + gr * (hi - lo);
                f2 = value_at(m2);
            }
        }
        consider((f1 < f2 ? m1 : m2) * dir);
    }

    cert.witness_omega = best_zeta;
    cert.verdict = classify_min(cert.min_normalized_form, cert.scale);
    return cert;
}

}  // namespace pellip
