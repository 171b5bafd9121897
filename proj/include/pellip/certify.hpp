#pragma once

#include <string>

#include "pellip/approximant.hpp"
#include "pellip/bellman.hpp"

namespace pellip {

enum class Verdict { kCertifiedNonnegative, kNegativityWitness, kInconclusive };

std::string verdict_name(Verdict v);

/// Seeded sampling certificate for a generalized-Hessian nonnegativity
/// claim. The witness reproduces min_normalized_form on re-evaluation; a
/// run is re-checkable bit-for-bit given the seed.
struct ConvexityCertificate {
    std::string region;
    std::string normalization;  // "sphere" or "productXY"
    int sample_count = 0;
    uint64_t seed = 0;
    double min_normalized_form = 0.0;
    double scale = 1.0;            // magnitude reference for the thresholds
    double negative_threshold = -1e-8;
    double zero_tolerance = -1e-9;
    VectorXd witness_omega;
    VectorXd witness_x;
    VectorXd witness_y;
    Verdict verdict = Verdict::kInconclusive;
};

Verdict classify_min(double min_form, double scale, double negative_threshold = -1e-8,
                     double zero_tolerance = -1e-9);

/// delta-calibration of the Bellman function: scans delta in {2^-1, 2^-2,
/// ...} and accepts the first value whose sampled product-normalized
/// generalized-Hessian minimum clears delta_p(A,B)/5 * lambda/Lambda on
/// every sampled point off the singular set.
struct DeltaCalibration {
    double delta = 0.0;
    bool certified = false;
    double bound = 0.0;       // the target margin
    double min_product = 0.0; // sampled minimum at the accepted delta
    int omega_samples = 0;
    uint64_t seed = 0;
};

DeltaCalibration calibrate_delta(double p, const ComplexMatrixField& a, const ComplexMatrixField& b,
                                 uint64_t seed, int omega_samples = 1000, int max_k = 20);

/// Biradial sample off the singular set with radii log-uniform in
/// [r_lo, r_hi]; used by every Bellman-related sampler.
Vector4d sample_off_singular(Rng& rng, double p, double q, double r_lo = 0.05, double r_hi = 20.0);

/// Sphere-normalized certification of the 4-variable power function
/// |omega|^p with respect to (A, B): min over seeded unit omega of the
/// smallest eigenvalue of the symmetrized generalized Hessian.
ConvexityCertificate certify_power4(double p, const ComplexMatrix& a, const ComplexMatrix& b,
                                    int samples, uint64_t seed, int threads = 1);

/// Certification of the Bellman Hessian in product normalization against
/// the strict bound: records min over samples of H/( |X||Y| ) - bound.
ConvexityCertificate certify_bellman_product(const BellmanSpec& spec, const ComplexMatrix& a,
                                             const ComplexMatrix& b, int omega_samples,
                                             uint64_t seed);

/// Global sphere-normalized certification of the smooth approximant
/// R_{n,nu} (requires calibrated C1); radii cover inner ball, transition
/// annulus and far field.
ConvexityCertificate certify_approximant(const ApproximantSpec& spec, const BellmanSpec& bellman,
                                         const ComplexMatrixField& a, const ComplexMatrixField& b,
                                         int samples, uint64_t seed, int threads = 1);

/// Radial profile gamma for the rigidity probe; Gamma(zeta) = gamma(|zeta|).
struct RadialProfile {
    enum class Kind { kConstant, kFlatThenQuadratic, kPower };
    Kind kind = Kind::kFlatThenQuadratic;
    double t0 = 1.0;  // breakpoint of the flat-then-quadratic profile
    double r = 2.0;   // exponent of the power profile

    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;  // one-sided at the breakpoint
};

/// Searches for a negativity witness of the generalized Hessian of the
/// radial function Gamma(zeta) = gamma(|zeta|) with respect to a single
/// matrix A. For complex A (Im A != 0) and a nonconstant profile whose
/// slope vanishes on an interval, a witness exists; the search mixes
/// log-uniform radii, radii clustered just above the flat part, and a
/// golden-section refinement around the best sample.
ConvexityCertificate rigidity_probe(const ComplexMatrix& a, const RadialProfile& profile,
                                    int samples, uint64_t seed);

}  // namespace pellip
