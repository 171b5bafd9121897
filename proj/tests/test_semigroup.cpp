#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pellip/semigroup.hpp"
#include "pellip/experiments.hpp"

using namespace pellip;

namespace {

DiscreteOperator laplacian_1d(int n, bool dirichlet) {
    const GridDomain g = build_interval(n, 1.0 / n, dirichlet, dirichlet);
    return assemble_operator(ComplexMatrixField::constant(ComplexMatrix::identity(1), 1), g);
}

// Superposition of low interior sine modes on the unit interval: compatible
// with Dirichlet ends, so the semidiscrete solution is spectrally smooth.
VectorXcd sine_state(const GridDomain& g, int modes, uint64_t seed) {
    Rng rng(seed);
    const auto coords = dof_coords(g);
    VectorXcd v = VectorXcd::Zero(g.n_dofs());
    for (int j = 1; j <= modes; ++j) {
        const Complex c(rng.gaussian(), rng.gaussian());
        for (int i = 0; i < g.n_dofs(); ++i)
            v(i) += c / static_cast<double>(j) *
                    std::sin(j * 3.14159265358979323846 * coords[static_cast<size_t>(i)][0]);
    }
    return v;
}

}  // namespace

TEST_CASE("constant states are fixed points of pure-Neumann flows") {
    const DiscreteOperator op = laplacian_1d(40, false);
    const VectorXcd ones = VectorXcd::Constant(op.n(), Complex(1.0, 0.0));
    const FlowTrace trace = step_semigroup(op, ones, {0.01, 0.1, 1.0});
    for (const VectorXcd& u : trace.states)
        CHECK((u - ones).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("L2 norm is nonincreasing for accretive operators") {
    Rng rng(3);
    const DiscreteOperator op = laplacian_1d(64, true);
    const VectorXcd f = random_state(rng, op.n());
    const FlowTrace trace = step_semigroup(op, f, log_times(1e-4, 2.0, 12));
    double prev = lr_norm(op.domain, f, 2.0);
    for (const double n2 : trace.lr_norms[0]) {
        CHECK(n2 <= prev * (1.0 + 1e-10));
        prev = n2;
    }
}

TEST_CASE("phase-spectral propagator matches the dense exponential") {
    Rng rng(5);
    const GridDomain g = build_interval(40, 1.0 / 40, true, false);
    const ComplexMatrixField field({ComplexMatrix::phase_identity(0.6, 1)});
    const DiscreteOperator op = assemble_operator(field, g);
    auto prop = make_propagator(op, StepOptions::Method::kExact);
    CHECK(prop->name() == "phase-spectral");
    const VectorXcd f = random_state(rng, op.n());
    for (const double t : {1e-3, 0.05, 0.4}) {
        const VectorXcd a = prop->at(f, t);
        const VectorXcd b = dense_expm_apply(op, f, t);
        CHECK((a - b).norm() <= 1e-11 * std::max(1.0, b.norm()));
    }
}

TEST_CASE("separable propagator matches the assembled operator exactly") {
    Rng rng(7);
    const GridDomain g = build_rectangle(12, 10, 0.08, kSidesAll);
    MatrixXcd d = MatrixXcd::Zero(2, 2);
    d(0, 0) = std::polar(1.3, 0.5);
    d(1, 1) = std::polar(0.7, 0.5);
    const DiscreteOperator op = assemble_operator(ComplexMatrixField({ComplexMatrix(d)}), g);
    auto sep = SeparablePropagator::build(op);
    REQUIRE(sep);
    const VectorXcd f = random_state(rng, op.n());
    for (const double t : {1e-3, 0.02, 0.2}) {
        const VectorXcd a = sep->at(f, t);
        const VectorXcd b = dense_expm_apply(op, f, t);
        CHECK((a - b).norm() <= 1e-10 * std::max(1.0, b.norm()));
    }
    // Not available off the all-Dirichlet rectangle.
    const GridDomain gn = build_rectangle(12, 10, 0.08, kSideLeft);
    CHECK(!SeparablePropagator::build(assemble_operator(ComplexMatrixField({ComplexMatrix(d)}), gn)));
}

TEST_CASE("Crank-Nicolson tracks the dense exponential on a mid-size operator") {
    Rng rng(9);
    const GridDomain g = build_interval(500, 1.0 / 500, true, true);
    // Complex nonsymmetric field: no exact path, the stepper is on its own.
    MatrixXcd m(1, 1);
    m(0, 0) = std::polar(1.0, 0.5);
    const DiscreteOperator op = assemble_operator(ComplexMatrixField({ComplexMatrix(m)}), g);
    VectorXcd f = sine_state(g, 6, 17);
    f /= lr_norm(g, f, 2.0);
    auto cn = std::make_unique<CrankNicolsonPropagator>(op);
    for (const double t : {1e-4, 1e-3, 1e-2}) {
        const VectorXcd a = cn->at(f, t);
        const VectorXcd b = dense_expm_apply(op, f, t);
        CHECK((a - b).norm() <= 1e-6 * b.norm());
    }
}

TEST_CASE("semigroup property: exact path to 1e-12, stepper to 1e-8") {
    Rng rng(11);
    const DiscreteOperator op = laplacian_1d(64, true);
    VectorXcd f = band_limited_state(op.domain, 23, 5);
    f /= lr_norm(op.domain, f, 2.0);
    const double t = 0.07, s = 0.18;

    auto exact = make_propagator(op, StepOptions::Method::kExact);
    const VectorXcd one_shot = exact->at(f, t + s);
    const VectorXcd two_step = exact->at(exact->at(f, t), s);
    CHECK((one_shot - two_step).norm() <= 1e-12 * std::max(1.0, one_shot.norm()));

    CrankNicolsonPropagator cn(op);
    const VectorXcd cn_one = cn.at(f, t + s);
    const VectorXcd cn_two = cn.at(cn.at(f, t), s);
    CHECK((cn_one - cn_two).norm() <= 1e-8 * std::max(1.0, cn_one.norm()));
}

TEST_CASE("Richardson check reports a small step-halving gap") {
    const DiscreteOperator op = laplacian_1d(64, true);
    VectorXcd f = sine_state(op.domain, 4, 29);
    StepOptions opts;
    opts.method = StepOptions::Method::kCrankNicolson;
    opts.richardson_check = true;
    const FlowTrace trace = step_semigroup(op, f, {0.01, 0.1}, opts);
    CHECK(trace.richardson_gap < 1e-5);
    CHECK(trace.integrator == "crank-nicolson");
}

TEST_CASE("pure-Neumann real flows conserve mass") {
    Rng rng(15);
    const GridDomain g = build_rectangle(10, 8, 0.1, 0);
    std::vector<ComplexMatrix> cells;
    for (int c = 0; c < g.n_active_cells(); ++c) {
        MatrixXd m = MatrixXd::Identity(2, 2) * rng.uniform(0.5, 2.0);
        m(0, 1) = m(1, 0) = rng.uniform(-0.2, 0.2);
        cells.emplace_back(MatrixXcd(m.cast<Complex>()));
    }
    const DiscreteOperator op = assemble_operator(ComplexMatrixField(cells), g);
    const VectorXcd f = random_state(rng, op.n());
    const Complex m0 = dof_mass(g, f);
    const FlowTrace trace = step_semigroup(op, f, {0.01, 0.1, 0.5});
    for (const VectorXcd& u : trace.states)
        CHECK(std::abs(dof_mass(g, u) - m0) <= 1e-10 * std::max(1.0, std::abs(m0)));
}

TEST_CASE("invalid time grids are rejected") {
    const DiscreteOperator op = laplacian_1d(8, true);
    const VectorXcd f = VectorXcd::Ones(op.n());
    CHECK_THROWS_AS(step_semigroup(op, f, {0.1, 0.05}), std::invalid_argument);
    CHECK_THROWS_AS(step_semigroup(op, f, {-0.1}), std::invalid_argument);
}
