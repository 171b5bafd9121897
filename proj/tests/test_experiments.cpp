#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pellip/certify.hpp"
#include "pellip/experiments.hpp"

using namespace pellip;

namespace {

constexpr double kPi = 3.14159265358979323846;

DiscreteOperator phase_op_1d(int n, double phi, bool dirichlet = true) {
    const GridDomain g = build_interval(n, 1.0 / n, dirichlet, dirichlet);
    return assemble_operator(ComplexMatrixField({ComplexMatrix::phase_identity(phi, 1)}), g);
}

}  // namespace

TEST_CASE("contractivity: real varying field and rotations inside the admissible cone") {
    Rng rng(3);
    const GridDomain g = build_interval(128, 1.0 / 128, true, false);
    std::vector<ComplexMatrix> cells;
    for (int c = 0; c < g.n_active_cells(); ++c)
        cells.emplace_back(MatrixXcd(rng.uniform(0.5, 3.0) * MatrixXcd::Identity(1, 1)));
    const DiscreteOperator op = assemble_operator(ComplexMatrixField(cells), g);
    ContractivityOptions opts;
    opts.n_states = 16;
    opts.seed = 11;
    for (const double p : {1.5, 2.0, 7.0}) {
        const ContractivityReport rep = contractivity_experiment(op, p, opts);
        CHECK(rep.verdict == "contractive");
        CHECK(rep.max_ratio <= 1.0 + 1e-6);
        CHECK(rep.integrator == "phase-spectral");
    }
    const ContractivityReport rot = contractivity_experiment(phase_op_1d(128, 0.7), 3.0, opts);
    CHECK(rot.verdict == "contractive");
}

TEST_CASE("contractivity search mode never certifies a pass") {
    ContractivityOptions opts;
    opts.n_states = 8;
    opts.search_violator = true;
    opts.times = log_times(1e-5, 0.5, 30);
    opts.seed = 5;
    // Outside the cone: cos(1.2) < |1 - 2/8|.
    const ContractivityReport bad = contractivity_experiment(phase_op_1d(256, 1.2), 8.0, opts);
    CHECK(bad.delta_p < 0.0);
    CHECK((bad.verdict == "violator-found" || bad.verdict == "inconclusive"));
    CHECK(bad.verdict == "violator-found");
    CHECK(bad.max_ratio > 1.0 + 1e-6 + bad.allowance);
}

TEST_CASE("2d separable path powers the rectangle experiment") {
    MatrixXcd d = MatrixXcd::Zero(2, 2);
    d(0, 0) = std::polar(1.0, 0.4);
    d(1, 1) = std::polar(2.0, 0.4);
    const GridDomain g = build_rectangle(24, 24, 1.0 / 24, kSidesAll);
    const DiscreteOperator op = assemble_operator(ComplexMatrixField({ComplexMatrix(d)}), g);
    ContractivityOptions opts;
    opts.n_states = 10;
    opts.seed = 7;
    const ContractivityReport rep = contractivity_experiment(op, 4.0, opts);
    CHECK(rep.integrator == "separable-spectral");
    CHECK(rep.verdict == "contractive");
}

TEST_CASE("bilinear integral: zero data, scale invariance, finite ratios") {
    const GridDomain g = build_interval(128, 1.0 / 128, true, true);
    const DiscreteOperator op =
        assemble_operator(ComplexMatrixField({ComplexMatrix::identity(1)}), g);
    const double p = 4.0;

    const VectorXcd zero = VectorXcd::Zero(op.n());
    const BilinearReport rep0 = bilinear_experiment(op, op, p, zero, zero);
    CHECK(rep0.integral == 0.0);

    const VectorXcd f = band_limited_state(g, 21, 8);
    const VectorXcd gvec = band_limited_state(g, 22, 8);
    const BilinearReport rep = bilinear_experiment(op, op, p, f, gvec);
    CHECK(rep.tail_converged);
    CHECK(rep.integral > 0.0);
    CHECK(std::isfinite(rep.ratio_pq));
    CHECK(std::isfinite(rep.ratio_sum));

    const double s = 37.5;
    const BilinearReport scaled = bilinear_experiment(op, op, p, s * f, gvec / s);
    CHECK(std::abs(scaled.ratio_pq - rep.ratio_pq) <= 1e-10 * rep.ratio_pq);
    CHECK(std::abs(scaled.integral - rep.integral) <= 1e-10 * rep.integral);
}

TEST_CASE("bilinear on pure Neumann subtracts the conserved mean") {
    const GridDomain g = build_interval(96, 1.0 / 96, false, false);
    const DiscreteOperator op =
        assemble_operator(ComplexMatrixField({ComplexMatrix::identity(1)}), g);
    VectorXcd f = band_limited_state(g, 31, 6);
    f.array() += Complex(2.0, -1.0);  // a surviving mean would stall the decay
    const VectorXcd gvec = band_limited_state(g, 32, 6);
    const BilinearReport rep = bilinear_experiment(op, op, 3.0, f, gvec);
    CHECK(rep.mean_subtracted);
    CHECK(rep.tail_converged);
    CHECK(rep.decay_rate > 0.0);
}

TEST_CASE("bilinear ratio is stable under mesh refinement") {
    const double p = 4.0;
    double ratio_coarse = 0.0, ratio_fine = 0.0;
    for (const int n : {128, 256}) {
        const GridDomain g = build_interval(n, 1.0 / n, true, true);
        const DiscreteOperator op =
            assemble_operator(ComplexMatrixField({ComplexMatrix::identity(1)}), g);
        const VectorXcd f = band_limited_state(g, 41, 8);
        const VectorXcd gvec = band_limited_state(g, 42, 8);
        const BilinearReport rep = bilinear_experiment(op, op, p, f, gvec);
        (n == 128 ? ratio_coarse : ratio_fine) = rep.ratio_pq;
    }
    CHECK(std::abs(ratio_fine - ratio_coarse) <= 0.10 * ratio_coarse);
}

TEST_CASE("bilinear with a two-cell complex field and distinct boundary splits") {
    const int n = 128;
    const GridDomain ga = build_interval(n, 1.0 / n, true, true);
    const GridDomain gb = build_interval(n, 1.0 / n, true, false);  // different form domain
    std::vector<ComplexMatrix> cells;
    for (int c = 0; c < n; ++c)
        cells.push_back(c < n / 2 ? ComplexMatrix::identity(1)
                                  : ComplexMatrix::phase_identity(kPi / 6.0, 1));
    const ComplexMatrixField rough(cells);
    const double p = 4.0;
    REQUIRE(delta_p_value(rough, p) > 0.0);
    const DiscreteOperator op_a = assemble_operator(rough, ga);
    const DiscreteOperator op_b =
        assemble_operator(ComplexMatrixField({ComplexMatrix::identity(1)}), gb);
    const VectorXcd f = band_limited_state(ga, 51, 8);
    const VectorXcd gvec = band_limited_state(gb, 52, 8);
    const BilinearReport rep = bilinear_experiment(op_a, op_b, p, f, gvec);
    CHECK(rep.tail_converged);
    CHECK(rep.ratio_pq > 0.0);
    CHECK(std::isfinite(rep.ratio_pq));
}

TEST_CASE("heat flow: monotone energy, derivative identities, integrand bound") {
    const double p = 4.0;
    const ComplexMatrixField af({ComplexMatrix::phase_identity(kPi / 6.0, 1)});
    const ComplexMatrixField bf({ComplexMatrix::identity(1)});
    const DeltaCalibration dc = calibrate_delta(p, af, bf, 17, 250);
    REQUIRE(dc.certified);
    const BellmanSpec spec(p, dc.delta);

    const GridDomain g = build_interval(96, 1.0 / 96, true, true);
    const DiscreteOperator op_a = assemble_operator(af, g);
    const DiscreteOperator op_b = assemble_operator(bf, g);
    Rng rng(23);
    const VectorXcd f = random_state(rng, op_a.n());
    const VectorXcd gvec = random_state(rng, op_b.n());
    const HeatFlowReport rep =
        heat_flow_trace(spec, op_a, op_b, f, gvec, log_times(1e-3, 0.5, 16));

    CHECK(rep.energy_monotone);
    CHECK(rep.max_rel_gap_a_fd < 1e-4);
    CHECK(rep.min_integrand_margin >= -1e-9);
    CHECK(rep.trace.energy.front() > rep.trace.energy.back());
    // The running bilinear accumulator never decreases.
    for (size_t k = 1; k < rep.trace.bilinear.size(); ++k)
        CHECK(rep.trace.bilinear[k] >= rep.trace.bilinear[k - 1] - 1e-15);
    // Both derivative routes stay nonnegative along the flow.
    for (size_t k = 0; k < rep.trace.times.size(); ++k) {
        CHECK(rep.deriv_formula_a[k] >= -1e-9);
        CHECK(rep.deriv_hessian_b[k] >= -1e-9);
    }
}

TEST_CASE("heat flow requires a jointly elliptic pair") {
    const ComplexMatrixField af({ComplexMatrix::phase_identity(1.4, 1)});
    const ComplexMatrixField bf({ComplexMatrix::identity(1)});
    const GridDomain g = build_interval(16, 1.0 / 16, true, true);
    const DiscreteOperator op_a = assemble_operator(af, g);
    const DiscreteOperator op_b = assemble_operator(bf, g);
    const BellmanSpec spec(12.0, 0.25);
    const VectorXcd f = VectorXcd::Ones(op_a.n());
    CHECK_THROWS_AS(heat_flow_trace(spec, op_a, op_b, f, f, {0.1}), std::invalid_argument);
}
