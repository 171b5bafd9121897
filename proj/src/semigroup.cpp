#include "pellip/semigroup.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace pellip {

std::unique_ptr<PhaseSpectralPropagator> PhaseSpectralPropagator::build(const DiscreteOperator& op,
                                                                        int max_n) {
    if (op.n() > max_n) return nullptr;
    const MatrixXcd dense(op.stiffness);
    double amax = 0.0;
    Complex pivot(1.0, 0.0);
    for (int j = 0; j < dense.cols(); ++j)
        for (int i = 0; i < dense.rows(); ++i)
            if (std::abs(dense(i, j)) > amax) {
                amax = std::abs(dense(i, j));
                pivot = dense(i, j);
            }
    if (amax == 0.0) return nullptr;
    const Complex phase = pivot / std::abs(pivot);
    const MatrixXcd rotated = dense / phase;
    const double scale = rotated.cwiseAbs().maxCoeff();
    if (rotated.imag().cwiseAbs().maxCoeff() > 1e-13 * scale) return nullptr;
    const MatrixXd s = rotated.real();
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-13 * scale) return nullptr;

    auto prop = std::make_unique<PhaseSpectralPropagator>();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
    prop->v_ = es.eigenvectors();
    prop->lam_ = es.eigenvalues();
    prop->phase_ = phase;
    return prop;
}

VectorXcd PhaseSpectralPropagator::at(VectorXcdRef u0, double t) {
    VectorXcd w = v_.transpose() * u0;
    for (int i = 0; i < w.size(); ++i) w(i) *= std::exp(-t * phase_ * lam_(i));
    return v_ * w;
}

namespace {

// 1d Dirichlet stiffness of -d^2/dx^2 on n_cells cells (interior nodes),
// without the 1/h^2 scale.
MatrixXd dirichlet_tridiag(int n_cells) {
    const int m = n_cells - 1;
    MatrixXd k = MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        k(i, i) = 2.0;
        if (i > 0) k(i, i - 1) = -1.0;
        if (i + 1 < m) k(i, i + 1) = -1.0;
    }
    return k;
}

}  // namespace

std::unique_ptr<SeparablePropagator> SeparablePropagator::build(const DiscreteOperator& op) {
    const GridDomain& g = op.domain;
    if (g.dim != 2) return nullptr;
    if (static_cast<int>(g.active_cells.size()) != g.nx * g.ny) return nullptr;  // full rectangle
    // All-Dirichlet boundary is what decouples the two directions exactly.
    for (const NodeKind k : g.node_kind)
        if (k == NodeKind::kNeumann) return nullptr;
    if (op.field.size() != 1) return nullptr;
    const MatrixXcd& a = op.field.cell(0).entries();
    if (a.rows() != 2) return nullptr;
    if (a(0, 1) != Complex(0, 0) || a(1, 0) != Complex(0, 0)) return nullptr;
    const Complex a00 = a(0, 0), a11 = a(1, 1);
    const double r0 = std::abs(a00), r1 = std::abs(a11);
    if (r0 == 0.0 || r1 == 0.0) return nullptr;
    // Common phase, positive diagonal magnitudes.
    const Complex phase = a00 / r0;
    if (std::abs(a11 / phase - Complex(r1, 0.0)) > 1e-14 * r1) return nullptr;

    auto prop = std::make_unique<SeparablePropagator>();
    prop->nxd_ = g.nx - 1;
    prop->nyd_ = g.ny - 1;
    if (prop->nxd_ < 1 || prop->nyd_ < 1) return nullptr;
    Eigen::SelfAdjointEigenSolver<MatrixXd> ex(dirichlet_tridiag(g.nx));
    Eigen::SelfAdjointEigenSolver<MatrixXd> ey(dirichlet_tridiag(g.ny));
    prop->ux_ = ex.eigenvectors();
    prop->lamx_ = ex.eigenvalues();
    prop->uy_ = ey.eigenvectors();
    prop->lamy_ = ey.eigenvalues();
    prop->ca_ = phase * r0 / (g.h * g.h);
    prop->cb_ = phase * r1 / (g.h * g.h);
    return prop;
}

VectorXcd SeparablePropagator::at(VectorXcdRef u0, double t) {
    using MatrixXcdMap = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>>;
    // Dof layout is x-fastest: dof = (j-1) * nxd + (i-1).
    MatrixXcdMap u(u0.data(), nxd_, nyd_);
    Eigen::MatrixXcd w = ux_.transpose() * u * uy_;
    for (int j = 0; j < nyd_; ++j)
        for (int i = 0; i < nxd_; ++i)
            w(i, j) *= std::exp(-t * (ca_ * lamx_(i) + cb_ * lamy_(j)));
    Eigen::MatrixXcd back = ux_ * w * uy_.transpose();
    return Eigen::Map<VectorXcd>(back.data(), nxd_ * nyd_);
}

CrankNicolsonPropagator::CrankNicolsonPropagator(const DiscreteOperator& op, double dt_floor)
    : l_(op.stiffness) {
    const double h = op.domain.h;
    dt_floor_ = dt_floor > 0.0 ? dt_floor : h * h / 4.0;
}

void CrankNicolsonPropagator::prepare(double dt) {
    if (dt == dt_cached_) return;
    SparseCd eye(l_.rows(), l_.cols());
    eye.setIdentity();
    SparseCd lhs = eye + SparseCd(Complex(0.5 * dt, 0.0) * l_);
    rhs_ = eye - SparseCd(Complex(0.5 * dt, 0.0) * l_);
    lu_.compute(lhs);
    if (lu_.info() != Eigen::Success)
        throw std::runtime_error("CrankNicolson: sparse factorization failed");
    dt_cached_ = dt;
}

VectorXcd CrankNicolsonPropagator::advance(VectorXcdRef u, double t_from, double t_to) {
    VectorXcd cur = u;
    double t = t_from;
    while (t < t_to - 1e-300) {
        const double span = t_to - t;
        // Graded accuracy control: absolute floor near t = 0, relative cap
        // afterwards, never overshooting the target time.
        const double dt_target = std::min(span, std::max(dt_floor_, t / 50.0));
        const int n_sub = std::max(1, static_cast<int>(std::ceil(span / dt_target)));
        const double dt = span / n_sub;
        prepare(dt);
        for (int k = 0; k < n_sub; ++k) {
            cur = lu_.solve(rhs_ * cur);
        }
        t = t_to;
    }
    return cur;
}

VectorXcd CrankNicolsonPropagator::at(VectorXcdRef u0, double t) { return advance(u0, 0.0, t); }

std::unique_ptr<Propagator> make_propagator(const DiscreteOperator& op, StepOptions::Method method,
                                            double dt_floor) {
    if (method != StepOptions::Method::kCrankNicolson) {
        if (auto sep = SeparablePropagator::build(op)) return sep;
        if (auto ph = PhaseSpectralPropagator::build(op)) return ph;
        if (method == StepOptions::Method::kExact)
            throw std::runtime_error("make_propagator: no exact path for this operator");
    }
    return std::make_unique<CrankNicolsonPropagator>(op, dt_floor);
}

FlowTrace step_semigroup(const DiscreteOperator& op, VectorXcdRef u0,
                         const std::vector<double>& times, const StepOptions& opts) {
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || (i > 0 && times[i] <= times[i - 1]))
            throw std::invalid_argument("step_semigroup: times must be increasing and >= 0");
    }
    FlowTrace trace;
    trace.requested_norms = opts.norms;
    trace.lr_norms.resize(opts.norms.size());

    auto prop = make_propagator(op, opts.method, opts.dt_floor);
    trace.integrator = prop->name();
    auto* cn = dynamic_cast<CrankNicolsonPropagator*>(prop.get());

    std::unique_ptr<CrankNicolsonPropagator> cn_half;
    VectorXcd cur_half;
    if (opts.richardson_check && cn) {
        cn_half = std::make_unique<CrankNicolsonPropagator>(
            op, 0.5 * (opts.dt_floor > 0.0 ? opts.dt_floor : op.domain.h * op.domain.h / 4.0));
        cur_half = u0;
    }

    VectorXcd cur = u0;
    double t_prev = 0.0;
    for (double t : times) {
        if (cn) {
            cur = cn->advance(cur, t_prev, t);
            if (cn_half) {
                cur_half = cn_half->advance(cur_half, t_prev, t);
                const double gap = (cur - cur_half).norm() / std::max(1e-300, cur_half.norm());
                trace.richardson_gap = std::max(trace.richardson_gap, gap);
            }
            t_prev = t;
        } else {
            cur = prop->at(u0, t);
        }
        trace.times.push_back(t);
        if (opts.keep_states) trace.states.push_back(cur);
        for (size_t r = 0; r < opts.norms.size(); ++r)
            trace.lr_norms[r].push_back(lr_norm(op.domain, cur, opts.norms[r]));
    }
    return trace;
}

VectorXcd dense_expm_apply(const DiscreteOperator& op, VectorXcdRef u0, double t) {
    if (op.n() > 2000)
        throw std::invalid_argument("dense_expm_apply: dense oracle capped at N = 2000");
    const MatrixXcd dense(op.stiffness);
    const MatrixXcd e = (-t * dense).exp();
    return e * u0;
}

}  // namespace pellip
