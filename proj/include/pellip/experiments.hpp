#pragma once

#include <array>

#include "pellip/bellman.hpp"
#include "pellip/semigroup.hpp"

namespace pellip {

std::vector<std::array<double, 2>> dof_coords(const GridDomain& domain);

/// Seeded nodal data used by the experiments.
VectorXcd random_state(Rng& rng, int n);
/// Low-mode random combination evaluated at node coordinates; the same seed
/// gives the same underlying function on every refinement of the grid.
VectorXcd band_limited_state(const GridDomain& domain, uint64_t seed, int max_mode = 8);
/// exp(-(1 + i beta) ((x - c)/w)^2): complex-width Gaussian.
VectorXcd complex_gaussian_state(const GridDomain& domain, double center, double width, double beta);
/// rho^{1 + i c} with rho a Gaussian bump: log-modulated phase.
VectorXcd log_phase_state(const GridDomain& domain, double center, double width, double c);

std::vector<double> log_times(double t_min, double t_max, int count);

struct ContractivityOptions {
    int n_states = 50;
    std::vector<double> times = log_times(1e-3, 1.0, 20);
    uint64_t seed = 1;
    bool search_violator = false;
    StepOptions::Method method = StepOptions::Method::kAuto;
};

struct ContractivityReport {
    double p = 0.0;
    double delta_p = 0.0;      // constant of the coefficient field
    double max_ratio = 0.0;    // max over states and times of |T_t f|_p / |f|_p
    double tolerance = 1e-6;
    double allowance = 0.0;    // mesh-dependent slack C h, reported per run
    double worst_time = 0.0;
    int worst_state = -1;
    std::string integrator;
    std::string verdict;  // contractive | violation-within-allowance | violation |
                          // violator-found | inconclusive
    bool violator_found = false;
    std::string violator_family;
};

/// Max L^p ratio over a seeded dataset; in search mode (expected
/// noncontractive regime) the dataset is augmented with adversarial
/// complex-width and log-phase families and the verdict is either
/// violator-found or inconclusive, never a certified pass.
ContractivityReport contractivity_experiment(const DiscreteOperator& op, double p,
                                             const ContractivityOptions& opts);

struct BilinearOptions {
    double t_cap = 256.0;
    int points_per_decade = 24;
    double t_lo = 1e-4;
    StepOptions::Method method = StepOptions::Method::kAuto;
};

struct BilinearReport {
    double integral = 0.0;  // includes the exponential tail estimate
    double tail = 0.0;
    double ratio_pq = 0.0;   // integral / (|f|_p |g|_q)
    double ratio_sum = 0.0;  // integral / (|f|_p^p + |g|_q^q)
    double t_end = 0.0;
    double decay_rate = 0.0;
    bool tail_converged = false;
    bool mean_subtracted = false;
    double norm_f_p = 0.0, norm_g_q = 0.0;
    std::vector<double> times, integrand;
};

/// Time-space quadrature of |grad T_t f| |grad T_t g| with an exponential
/// tail bound from the observed decay. Pure-Neumann flows get their
/// conserved means subtracted first.
BilinearReport bilinear_experiment(const DiscreteOperator& op_a, const DiscreteOperator& op_b,
                                   double p, VectorXcd f, VectorXcd g,
                                   const BilinearOptions& opts = {});

struct HeatFlowOptions {
    double fd_rel_step = 1e-3;
    StepOptions::Method method = StepOptions::Method::kAuto;
};

struct HeatFlowReport {
    FlowTrace trace;  // energy, L^p/L^q norms, running bilinear integral
    std::vector<double> deriv_formula_a;  // -E' via Wirtinger pairing with L
    std::vector<double> deriv_hessian_b;  // generalized-Hessian integrand sum
    std::vector<double> deriv_fd;         // -E' by centered differences
    double max_rel_gap_a_fd = 0.0;
    bool energy_monotone = true;
    double max_uptick = 0.0;
    double min_integrand_margin = 0.0;  // min over corners of b-integrand - bound |X||Y|
    double bound = 0.0;                 // delta_p/5 * lambda/Lambda
};

/// Traces the Bellman energy of the paired flows and compares its decay
/// rate against the two derivative expressions (the L-pairing form and the
/// generalized-Hessian form).
HeatFlowReport heat_flow_trace(const BellmanSpec& bellman, const DiscreteOperator& op_a,
                               const DiscreteOperator& op_b, VectorXcdRef f, VectorXcdRef g,
                               const std::vector<double>& times, const HeatFlowOptions& opts = {});

}  // namespace pellip
