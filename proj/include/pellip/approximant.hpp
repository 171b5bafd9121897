#pragma once

#include <functional>
#include <vector>

#include "pellip/bellman.hpp"

namespace pellip {

/// Tensor-product quadrature of the normalized radial bump
///   phi(x) ~ exp(-1/(1 - |x|^2)) on the unit ball of R^4,
/// scaled to radius nu. Nodes are folded into the quadrant x2 >= 0, x4 >= 0
/// (the mollified targets are even in each coordinate, so only the even
/// derivative components survive); fold multiplicity is baked into the
/// weights, which sum to 1 exactly by normalization.
class Mollifier {
  public:
    struct Node {
        double x1, x2, x3, x4;
        double w;
    };

    Mollifier() = default;
    Mollifier(double nu, int radius_points = 8);

    double nu() const { return nu_; }
    int radius_points() const { return radius_points_; }
    const std::vector<Node>& nodes() const { return nodes_; }

  private:
    double nu_ = 0.0;
    int radius_points_ = 0;
    std::vector<Node> nodes_;
};

/// Derivative components of a function of (zeta, eta) that is even in each
/// of the four coordinates, evaluated at a general point. Only the
/// components that survive symmetrization are carried.
struct BiradialDerivs {
    double val = 0.0;
    double g1 = 0.0, g3 = 0.0;                              // d/dzeta1, d/deta1
    double h11 = 0.0, h13 = 0.0, h33 = 0.0, h22 = 0.0, h44 = 0.0;
};

struct MollifiedEval {
    double value = 0.0;
    Vector4d grad = Vector4d::Zero();
    Matrix4d hess = Matrix4d::Zero();
};

using BiradialFn = std::function<BiradialDerivs(double, double, double, double, bool)>;

/// Convolution (f * phi_nu)(omega), with derivatives taken on the smooth
/// factor under the integral. The point is rotated to the frame where
/// zeta and eta lie on their first axes, accumulated there, and rotated
/// back; exactness relies on f being invariant under independent rotations
/// of zeta and eta.
MollifiedEval mollified_eval(const BiradialFn& f, const Mollifier& moll, const Vector4d& omega,
                             bool want_hess = true);

BiradialDerivs bellman_biradial(const BellmanSpec& spec, double y1, double y2, double y3, double y4,
                                bool want_hess);

/// Mollified Bellman function: value, gradient (D f) * phi_nu and Hessian
/// (D^2 f) * phi_nu with nodes nudged off the singular set.
MollifiedEval mollified_bellman(const BellmanSpec& spec, const Mollifier& moll,
                                const Vector4d& omega, bool want_hess = true);

/// C^1 truncated power profile
///   f_n(t) = n^{-eps} t^{p+eps}                                  on [0, n],
///   f_n(t) = ((p+eps)/2) n^{p-2} t^2 + (1 - (p+eps)/2) n^p       on [n, inf);
/// value and slope of the branches match at t = n (both n^p and
/// (p+eps) n^{p-1}); the second derivative jumps there.
struct TruncatedPower {
    double p = 0.0;
    double eps = 0.0;
    double n = 1.0;

    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;  // breakpoint nudged inward by kSingularNudge
};

/// Radial C^2 cutoff: 1 on r <= 3, quintic transition, 0 on r >= 4. The
/// scaled family is cutoff(r/n).
struct Cutoff {
    double value(double r) const;
    double d1(double r) const;
    double d2(double r) const;
};

/// Parameters for one member of the compensating sequence
///   P_n(zeta, eta) = f_n(|omega|) + K (f_n(|zeta|) + f_n(|eta|)),
/// where eps keeps the pair (p+eps)-elliptic and K = big_k is the
/// modified-power-function constant at exponent p + eps.
struct ApproximantSpec {
    int n = 1;
    double nu = 0.25;
    double p = 0.0;
    double q = 0.0;
    double epsilon = 0.0;
    double kappa = 0.0;  // (p + eps - 2) Lambda(A,B) / delta_{p+eps}(A,B)
    double big_k = 0.0;  // 0 if kappa <= 1, else (2 kappa)^{p+eps-1}
    double c1 = std::numeric_limits<double>::quiet_NaN();  // set by calibrate_c1
    double delta_p_eps = 0.0;
    PairConstants base;  // constants of the pair at exponent p

    TruncatedPower profile() const { return TruncatedPower{p, epsilon, static_cast<double>(n)}; }
};

/// Largest eps in (0, 1] with delta_{p+eps}(A,B) > delta_p(A,B)/2, located
/// by bisection (the constant is nonincreasing in the exponent beyond 2).
double choose_epsilon(const ComplexMatrixField& a, const ComplexMatrixField& b, double p,
                      double tol = 1e-6);

ApproximantSpec make_approximant(const BellmanSpec& bellman, const ComplexMatrixField& a,
                                 const ComplexMatrixField& b, int n, double nu);

/// P_n and its derivatives (exact, no quadrature).
struct PnEval {
    double value = 0.0;
    Vector4d grad = Vector4d::Zero();
    Matrix4d hess = Matrix4d::Zero();
};
PnEval pn_eval(const ApproximantSpec& spec, const Vector4d& omega, bool want_hess = true);

BiradialDerivs pn_biradial(const ApproximantSpec& spec, double y1, double y2, double y3, double y4,
                           bool want_hess);

/// P_n * phi_nu and its derivatives by quadrature.
MollifiedEval mollified_pn(const ApproximantSpec& spec, const Mollifier& moll, const Vector4d& omega,
                           bool want_hess = true);

/// The smooth global approximant
///   R_{n,nu} = cutoff_n . (B * phi_nu) + C1 nu^{q-2} (P_n * phi_nu).
/// Requires a calibrated C1.
MollifiedEval approximant_eval(const ApproximantSpec& spec, const BellmanSpec& bellman,
                               const Mollifier& moll, const Vector4d& omega, bool want_hess = true);

/// The two Hessian pieces at omega whose C1-weighted sum is the Hessian of
/// R_{n,nu}: the cutoff-times-mollified-Bellman part and nu^{q-2} times the
/// mollified P_n part. Exposed so calibration can scan C1 cheaply.
struct ApproximantHessParts {
    Matrix4d bellman_part = Matrix4d::Zero();
    Matrix4d pn_part = Matrix4d::Zero();
};
ApproximantHessParts approximant_hess_parts(const ApproximantSpec& spec, const BellmanSpec& bellman,
                                            const Mollifier& moll, const Vector4d& omega);

struct C1Calibration {
    double c1 = 0.0;
    bool certified = false;
    double min_form = 0.0;  // over all annulus samples, at the accepted C1
    std::vector<int> n_values;
    int samples_per_n = 0;
    uint64_t seed = 0;
};

/// Smallest power of two C1 making the generalized Hessian of R_{n,nu}
/// sample-nonnegative on the annulus { 3n <= |omega| <= 4n } for each
/// requested n. Fails (certified = false) above 2^64.
C1Calibration calibrate_c1(const BellmanSpec& bellman, const ComplexMatrixField& a,
                           const ComplexMatrixField& b, double nu, uint64_t seed,
                           std::vector<int> n_values = {1, 2, 4}, int samples_per_n = 10000,
                           int threads = 1);

}  // namespace pellip
