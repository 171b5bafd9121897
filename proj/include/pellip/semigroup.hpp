#pragma once

#include <memory>
#include <optional>

#include "pellip/operators.hpp"

namespace pellip {

/// Time-indexed record of a discrete flow.
struct FlowTrace {
    std::vector<double> times;
    std::vector<VectorXcd> states;               // optional (kept unless disabled)
    std::vector<double> requested_norms;          // exponents r
    std::vector<std::vector<double>> lr_norms;    // [r index][time index]
    std::vector<double> energy;                   // Bellman energy, when traced
    std::vector<double> bilinear;                 // running gradient-product integral
    std::string integrator;
    double richardson_gap = 0.0;  // max step-halving discrepancy, when checked
};

/// Abstract propagator u0 -> exp(-tL) u0.
class Propagator {
  public:
    virtual ~Propagator() = default;
    virtual VectorXcd at(VectorXcdRef u0, double t) = 0;
    virtual std::string name() const = 0;
};

/// Exact path for operators of the form e^{i phi} S with S real symmetric:
/// one dense eigendecomposition, then any time is a diagonal transform.
class PhaseSpectralPropagator : public Propagator {
  public:
    static std::unique_ptr<PhaseSpectralPropagator> build(const DiscreteOperator& op,
                                                          int max_n = 2500);
    VectorXcd at(VectorXcdRef u0, double t) override;
    std::string name() const override { return "phase-spectral"; }
    const VectorXd& eigenvalues() const { return lam_; }
    Complex phase() const { return phase_; }

  private:
    MatrixXd v_;
    VectorXd lam_;
    Complex phase_;
};

/// Exact path for constant diagonal fields e^{i phi} diag(a, b) on an
/// all-Dirichlet rectangle, where the operator splits into commuting 1d
/// factors.
class SeparablePropagator : public Propagator {
  public:
    static std::unique_ptr<SeparablePropagator> build(const DiscreteOperator& op);
    VectorXcd at(VectorXcdRef u0, double t) override;
    std::string name() const override { return "separable-spectral"; }

  private:
    int nxd_ = 0, nyd_ = 0;
    MatrixXd ux_, uy_;
    VectorXd lamx_, lamy_;
    Complex ca_, cb_;  // phase * a / h^2, phase * b / h^2
};

/// Crank-Nicolson stepper; A-stable, second order, sparse LU per step size.
/// Substeps satisfy dt <= max(dt_floor, t/50) with dt_floor = h^2/4 by
/// default.
class CrankNicolsonPropagator : public Propagator {
  public:
    CrankNicolsonPropagator(const DiscreteOperator& op, double dt_floor = -1.0);
    VectorXcd at(VectorXcdRef u0, double t) override;
    /// Step from a cached state (sequential traces reuse the current state).
    VectorXcd advance(VectorXcdRef u, double t_from, double t_to);
    std::string name() const override { return "crank-nicolson"; }

  private:
    const SparseCd l_;
    double dt_floor_;
    double dt_cached_ = -1.0;
    SparseCd rhs_;
    Eigen::SparseLU<SparseCd> lu_;
    void prepare(double dt);
};

struct StepOptions {
    enum class Method { kAuto, kCrankNicolson, kExact };
    Method method = Method::kAuto;
    double dt_floor = -1.0;              // default h^2/4
    bool richardson_check = false;       // rerun with halved steps, record gap
    std::vector<double> norms = {2.0};   // L^r norms recorded along the trace
    bool keep_states = true;
};

/// Auto picks the exact spectral paths when the operator structure allows
/// them (phase times real symmetric, or separable rectangle), otherwise
/// Crank-Nicolson.
std::unique_ptr<Propagator> make_propagator(const DiscreteOperator& op,
                                            StepOptions::Method method = StepOptions::Method::kAuto,
                                            double dt_floor = -1.0);

/// States approximating exp(-tL) u0 at the requested times (increasing,
/// first >= 0).
FlowTrace step_semigroup(const DiscreteOperator& op, VectorXcdRef u0,
                         const std::vector<double>& times, const StepOptions& opts = {});

/// Dense matrix exponential oracle for N <= 2000 (general complex
/// operators; scaling-and-squaring).
VectorXcd dense_expm_apply(const DiscreteOperator& op, VectorXcdRef u0, double t);

}  // namespace pellip
