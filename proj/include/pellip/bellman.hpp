#pragma once

#include <Eigen/Dense>

#include "pellip/algebra.hpp"

namespace pellip {

using Eigen::Matrix2d;
using Eigen::Matrix4d;
using Eigen::Vector2d;
using Eigen::Vector4d;

/// Parameters of the two-variable Bellman function
///   B(zeta, eta) = |zeta|^p + |eta|^q + delta * R(zeta, eta),
///   R = |zeta|^2 |eta|^{2-q}              on |zeta|^p <= |eta|^q,
///   R = (2/p)|zeta|^p + (2/q - 1)|eta|^q  on |zeta|^p >= |eta|^q,
/// with p >= 2 and q = p/(p-1). The function is C^1 on R^4 and C^2 off the
/// singular set { eta = 0 } union { |zeta|^p = |eta|^q }.
struct BellmanSpec {
    double p = 0.0;
    double q = 0.0;
    double delta = 0.0;

    BellmanSpec() = default;
    BellmanSpec(double p_, double delta_);
};

/// Margin used to decide closeness to the singular set: the Hessian is
/// reported only when |eta| and the branch indicator |zeta|^p - |eta|^q both
/// clear this margin.
constexpr double kSingularMargin = 1e-9;
/// Quadrature and sampling nodes get nudged this far off the singular set.
constexpr double kSingularNudge = 1e-7;

struct BellmanEval {
    double value = 0.0;
    Vector4d grad = Vector4d::Zero();
    Matrix4d hess = Matrix4d::Zero();
    bool hess_valid = false;
};

/// Closed-form value and gradient everywhere; closed-form Hessian off the
/// singular set (hess_valid == false otherwise).
BellmanEval bellman_eval(const BellmanSpec& spec, const Vector2d& zeta, const Vector2d& eta,
                         bool want_hess = true);

/// Same derivatives with sampling points nudged off the singular set by
/// kSingularNudge; used by quadrature loops where a defined Hessian is
/// required at every node.
BellmanEval bellman_eval_nudged(const BellmanSpec& spec, Vector2d zeta, Vector2d eta);

/// Complex Wirtinger-type derivative pair (d/dx - i d/dy)/2 of a real
/// function of (x, y), from its real gradient.
inline Complex wirtinger(double gx, double gy) { return 0.5 * Complex(gx, -gy); }

/// Hessian of |omega|^r on R^{2l}: r|omega|^{r-2} (I + (r-2) u u^T),
/// u = omega/|omega|. Requires r > 1 and omega != 0.
MatrixXd power_hessian(double r, const VectorXd& omega);

/// Generalized Hessian of a function Phi of k complex variables with
/// respect to matrices A_1..A_k:
///   (M(A_1^*) (+) ... (+) M(A_k^*)) . (D^2 Phi (x) I_d).
/// hess_phi is 2k x 2k; the result acts on R^{2kd}.
MatrixXd gen_hess_matrix(const MatrixXd& hess_phi, const std::vector<ComplexMatrix>& as);

/// Quadratic form <H Xi, Xi> of the generalized Hessian without forming H.
/// xs holds the k blocks of Xi, each in R^{2d}.
double gen_hess_form(const MatrixXd& hess_phi, const std::vector<ComplexMatrix>& as,
                     const std::vector<VectorXd>& xs);

/// k = 2 convenience wrapper.
MatrixXd gen_hess_matrix2(const Matrix4d& hess_phi, const ComplexMatrix& a, const ComplexMatrix& b);
double gen_hess_form2(const Matrix4d& hess_phi, const ComplexMatrix& a, const ComplexMatrix& b,
                      const VectorXd& x, const VectorXd& y);

enum class HessNormalization { kSphere, kProductXY };

struct MinFormResult {
    double value = 0.0;     // min of the normalized quadratic form
    VectorXd x;             // witness X block
    VectorXd y;             // witness Y block (productXY) or empty (sphere)
    bool unbounded_below = false;
};

/// Sphere normalization: smallest eigenvalue of sym(H) with unit eigenvector
/// split into its (X, Y) blocks.
MinFormResult min_form_sphere(const MatrixXd& gen_hess);

/// ProductXY normalization: minimum over X, Y != 0 of <H (X,Y), (X,Y)> /
/// (|X||Y|), computed by alternating eigenvalue iterations over the two
/// blocks (at most `iters` sweeps, stagnation below 1e-12) cross-checked
/// against `verify_samples` random direction pairs.
MinFormResult min_form_product(const MatrixXd& gen_hess, Rng& rng, int iters = 50,
                               int verify_samples = 10000);

}  // namespace pellip
