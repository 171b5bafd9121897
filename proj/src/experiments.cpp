#include "pellip/experiments.hpp"

#include <cmath>

#include "pellip/numeric.hpp"

namespace pellip {

std::vector<std::array<double, 2>> dof_coords(const GridDomain& domain) {
    std::vector<std::array<double, 2>> out(static_cast<size_t>(domain.n_dofs()));
    for (int d = 0; d < domain.n_dofs(); ++d) {
        const int node = domain.dof_node[static_cast<size_t>(d)];
        const int i = node % (domain.nx + 1);
        const int j = node / (domain.nx + 1);
        out[static_cast<size_t>(d)] = {domain.node_x(i), domain.dim == 2 ? domain.node_y(j) : 0.0};
    }
    return out;
}

VectorXcd random_state(Rng& rng, int n) {
    VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
    return v;
}

VectorXcd band_limited_state(const GridDomain& domain, uint64_t seed, int max_mode) {
    Rng rng(seed);
    const auto coords = dof_coords(domain);
    const double lx = domain.nx * domain.h;
    const double ly = domain.dim == 2 ? domain.ny * domain.h : 1.0;
    VectorXcd v = VectorXcd::Zero(domain.n_dofs());
    const double pi = 3.14159265358979323846;
    for (int kx = 0; kx <= max_mode; ++kx)
        for (int ky = 0; ky <= (domain.dim == 2 ? max_mode : 0); ++ky) {
            const Complex a(rng.gaussian(), rng.gaussian());
            const Complex b(rng.gaussian(), rng.gaussian());
            const double decay = 1.0 / (1.0 + kx * kx + ky * ky);
            for (int i = 0; i < domain.n_dofs(); ++i) {
                const double x = (coords[static_cast<size_t>(i)][0] - domain.x0) / lx;
                const double y = domain.dim == 2 ? (coords[static_cast<size_t>(i)][1] - domain.y0) / ly : 0.0;
                v(i) += decay * (a * std::cos(pi * (kx * x + ky * y)) +
                                 b * std::sin(pi * (kx * x + ky * y)));
            }
        }
    return v;
}

VectorXcd complex_gaussian_state(const GridDomain& domain, double center, double width,
                                 double beta) {
    const auto coords = dof_coords(domain);
    VectorXcd v(domain.n_dofs());
    for (int i = 0; i < domain.n_dofs(); ++i) {
        const double u = (coords[static_cast<size_t>(i)][0] - center) / width;
        v(i) = std::exp(-Complex(1.0, beta) * (u * u));
    }
    return v;
}

VectorXcd log_phase_state(const GridDomain& domain, double center, double width, double c) {
    const auto coords = dof_coords(domain);
    VectorXcd v(domain.n_dofs());
    for (int i = 0; i < domain.n_dofs(); ++i) {
        const double u = (coords[static_cast<size_t>(i)][0] - center) / width;
        const double lrho = -u * u;
        v(i) = std::exp(lrho) * std::exp(Complex(0.0, c * lrho));
    }
    return v;
}

std::vector<double> log_times(double t_min, double t_max, int count) {
    std::vector<double> ts(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k)
        ts[static_cast<size_t>(k)] =
            t_min * std::pow(t_max / t_min, count == 1 ? 0.0 : static_cast<double>(k) / (count - 1));
    return ts;
}

namespace {

double ratio_sweep(const DiscreteOperator& op, Propagator& prop, double p, const VectorXcd& f,
                   const std::vector<double>& times, double* worst_time) {
    const double n0 = lr_norm(op.domain, f, p);
    if (n0 <= 0.0) return 0.0;
    double worst = 0.0;
    auto* cn = dynamic_cast<CrankNicolsonPropagator*>(&prop);
    VectorXcd cur = f;
    double t_prev = 0.0;
    for (double t : times) {
        cur = cn ? cn->advance(cur, t_prev, t) : prop.at(f, t);
        t_prev = t;
        const double r = lr_norm(op.domain, cur, p) / n0;
        if (r > worst) {
            worst = r;
            if (worst_time) *worst_time = t;
        }
    }
    return worst;
}

}  // namespace

ContractivityReport contractivity_experiment(const DiscreteOperator& op, double p,
                                             const ContractivityOptions& opts) {
    ContractivityReport rep;
    rep.p = p;
    rep.delta_p = delta_p_value(op.field, p);
    rep.allowance = op.domain.h;
    auto prop = make_propagator(op, opts.method);
    rep.integrator = prop->name();

    Rng rng(opts.seed);
    struct Candidate {
        VectorXcd f;
        std::string family;
    };
    std::vector<Candidate> dataset;
    for (int s = 0; s < opts.n_states; ++s)
        dataset.push_back({random_state(rng, op.n()), "random"});
    {
        // A few structured states: bumps, a near-point mass, modulated bumps.
        const double lx = op.domain.nx * op.domain.h;
        dataset.push_back({band_limited_state(op.domain, opts.seed ^ 0x9e37ULL, 6), "band-limited"});
        VectorXcd point = VectorXcd::Zero(op.n());
        point(op.n() / 2) = 1.0;
        dataset.push_back({point, "point-mass"});
        dataset.push_back({complex_gaussian_state(op.domain, 0.5 * lx, 0.1 * lx, 1.5), "cgauss"});
    }
    if (opts.search_violator && op.domain.dim == 1) {
        const double lx = op.domain.nx * op.domain.h;
        for (double width : {4.0 * op.domain.h, 16.0 * op.domain.h, 0.05 * lx, 0.15 * lx})
            for (double beta : {-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0}) {
                dataset.push_back(
                    {complex_gaussian_state(op.domain, 0.5 * lx, width, beta), "cgauss-scan"});
                dataset.push_back({log_phase_state(op.domain, 0.5 * lx, width, beta), "logphase-scan"});
            }
    }

    for (size_t s = 0; s < dataset.size(); ++s) {
        double worst_t = 0.0;
        const double r = ratio_sweep(op, *prop, p, dataset[s].f, opts.times, &worst_t);
        if (r > rep.max_ratio) {
            rep.max_ratio = r;
            rep.worst_time = worst_t;
            rep.worst_state = static_cast<int>(s);
            rep.violator_family = dataset[s].family;
        }
    }

    const double hard = 1.0 + rep.tolerance;
    if (opts.search_violator) {
        rep.violator_found = rep.max_ratio > hard + rep.allowance;
        rep.verdict = rep.violator_found ? "violator-found" : "inconclusive";
    } else if (rep.max_ratio <= hard) {
        rep.verdict = "contractive";
    } else if (rep.max_ratio <= hard + rep.allowance) {
        rep.verdict = "violation-within-allowance";
    } else {
        rep.verdict = "violation";
    }
    return rep;
}

namespace {

// Pointwise product of gradient magnitudes, corner quadrature.
double gradient_product_integral(const DiscreteOperator& op_a, const DiscreteOperator& op_b,
                                 const VectorXcd& u, const VectorXcd& v) {
    const GridDomain& ga = op_a.domain;
    KahanSum s;
    for (int ac = 0; ac < ga.n_active_cells(); ++ac) {
        const int raw = ga.active_cells[static_cast<size_t>(ac)];
        const CellCorners cu = cell_corner_data(ga, u, raw);
        const CellCorners cv = cell_corner_data(op_b.domain, v, raw);
        const double w = ga.cell_measure() / cu.n_corners;
        for (int c = 0; c < cu.n_corners; ++c) {
            double gu2 = 0.0, gv2 = 0.0;
            for (int k = 0; k < ga.dim; ++k) {
                gu2 += std::norm(cu.grad[c][k]);
                gv2 += std::norm(cv.grad[c][k]);
            }
            s.add(w * std::sqrt(gu2 * gv2));
        }
    }
    return s.value();
}

void require_same_geometry(const GridDomain& a, const GridDomain& b, const char* who) {
    if (a.dim != b.dim || a.nx != b.nx || a.ny != b.ny || a.h != b.h || a.cell_mask != b.cell_mask)
        throw std::invalid_argument(std::string(who) + ": operators must share the cell geometry");
}

}  // namespace

BilinearReport bilinear_experiment(const DiscreteOperator& op_a, const DiscreteOperator& op_b,
                                   double p, VectorXcd f, VectorXcd g, const BilinearOptions& opts) {
    require_same_geometry(op_a.domain, op_b.domain, "bilinear_experiment");
    const double q = p / (p - 1.0);
    BilinearReport rep;
    if (op_a.domain.pure_neumann()) {
        f.array() -= dof_mass(op_a.domain, f) / (op_a.n() * op_a.domain.cell_measure());
        rep.mean_subtracted = true;
    }
    if (op_b.domain.pure_neumann()) {
        g.array() -= dof_mass(op_b.domain, g) / (op_b.n() * op_b.domain.cell_measure());
        rep.mean_subtracted = true;
    }
    rep.norm_f_p = lr_norm(op_a.domain, f, p);
    rep.norm_g_q = lr_norm(op_b.domain, g, q);

    auto prop_a = make_propagator(op_a, opts.method);
    auto prop_b = make_propagator(op_b, opts.method);
    auto* cn_a = dynamic_cast<CrankNicolsonPropagator*>(prop_a.get());
    auto* cn_b = dynamic_cast<CrankNicolsonPropagator*>(prop_b.get());

    rep.times.push_back(0.0);
    rep.integrand.push_back(gradient_product_integral(op_a, op_b, f, g));
    double peak = rep.integrand[0];

    VectorXcd u = f, v = g;
    double t_prev = 0.0;
    const double grow = std::pow(10.0, 1.0 / opts.points_per_decade);
    KahanSum integral;
    double t = opts.t_lo;
    while (t <= opts.t_cap) {
        u = cn_a ? cn_a->advance(u, t_prev, t) : prop_a->at(f, t);
        v = cn_b ? cn_b->advance(v, t_prev, t) : prop_b->at(g, t);
        const double it = gradient_product_integral(op_a, op_b, u, v);
        integral.add(0.5 * (t - t_prev) * (it + rep.integrand.back()));
        rep.times.push_back(t);
        rep.integrand.push_back(it);
        peak = std::max(peak, it);
        t_prev = t;
        if (it <= 1e-12 * peak && rep.times.size() > 8) break;
        t *= grow;
    }
    rep.t_end = t_prev;

    // Exponential tail from the observed decay over the last few samples.
    const size_t m = rep.integrand.size();
    if (m >= 6) {
        const double i1 = rep.integrand[m - 6], i2 = rep.integrand[m - 1];
        const double dt = rep.times[m - 1] - rep.times[m - 6];
        if (i1 > 0.0 && i2 > 0.0 && i2 < i1 && dt > 0.0) {
            rep.decay_rate = std::log(i1 / i2) / dt;
            rep.tail = rep.integrand[m - 1] / rep.decay_rate;
            rep.tail_converged = true;
        }
    }
    if (!rep.tail_converged && peak > 0.0) rep.decay_rate = 0.0;

    rep.integral = integral.value() + rep.tail;
    const double denom_pq = rep.norm_f_p * rep.norm_g_q;
    rep.ratio_pq = denom_pq > 0.0 ? rep.integral / denom_pq : 0.0;
    const double denom_sum = std::pow(rep.norm_f_p, p) + std::pow(rep.norm_g_q, q);
    rep.ratio_sum = denom_sum > 0.0 ? rep.integral / denom_sum : 0.0;
    return rep;
}

namespace {

struct EnergyEval {
    double energy = 0.0;
    double minus_de_a = 0.0;   // 2 Re sum (dzeta B . Lu + deta B . Lv)
    double hess_b = 0.0;       // generalized-Hessian integrand sum
    double min_margin = std::numeric_limits<double>::infinity();
};

Vector2d as_r2(Complex z) { return Vector2d(z.real(), z.imag()); }

EnergyEval energy_at(const BellmanSpec& spec, const DiscreteOperator& op_a,
                     const DiscreteOperator& op_b, const VectorXcd& u, const VectorXcd& v,
                     bool with_derivs, double bound) {
    const GridDomain& ga = op_a.domain;
    EnergyEval out;
    KahanSum energy, da, db;
    const VectorXcd lu = with_derivs ? VectorXcd(op_a.apply(u)) : VectorXcd();
    const VectorXcd lv = with_derivs ? VectorXcd(op_b.apply(v)) : VectorXcd();
    const int d = ga.dim;
    for (int ac = 0; ac < ga.n_active_cells(); ++ac) {
        const int raw = ga.active_cells[static_cast<size_t>(ac)];
        const CellCorners cu = cell_corner_data(ga, u, raw);
        const CellCorners cv = cell_corner_data(op_b.domain, v, raw);
        const double w = ga.cell_measure() / cu.n_corners;
        const ComplexMatrix& a_cell = op_a.field.size() == 1 ? op_a.field.cell(0) : op_a.field.cell(ac);
        const ComplexMatrix& b_cell = op_b.field.size() == 1 ? op_b.field.cell(0) : op_b.field.cell(ac);
        for (int c = 0; c < cu.n_corners; ++c) {
            const BellmanEval be =
                bellman_eval(spec, as_r2(cu.values[c]), as_r2(cv.values[c]), with_derivs);
            energy.add(w * be.value);
            if (!with_derivs) continue;
            const Complex dz = wirtinger(be.grad(0), be.grad(1));
            const Complex de = wirtinger(be.grad(2), be.grad(3));
            const auto dof_of = [](const GridDomain& dom, int node) {
                return dom.node_dof[static_cast<size_t>(node)];
            };
            const int dau = dof_of(ga, cu.nodes[c]);
            const int dbv = dof_of(op_b.domain, cv.nodes[c]);
            const Complex lu_c = dau < 0 ? Complex(0, 0) : lu(dau);
            const Complex lv_c = dbv < 0 ? Complex(0, 0) : lv(dbv);
            da.add(w * 2.0 * (dz * lu_c + de * lv_c).real());
            if (be.hess_valid) {
                VectorXd x(2 * d), y(2 * d);
                for (int k = 0; k < d; ++k) {
                    x(k) = cu.grad[c][k].real();
                    x(d + k) = cu.grad[c][k].imag();
                    y(k) = cv.grad[c][k].real();
                    y(d + k) = cv.grad[c][k].imag();
                }
                const double form = gen_hess_form2(be.hess, a_cell, b_cell, x, y);
                db.add(w * form);
                out.min_margin = std::min(out.min_margin, form - bound * x.norm() * y.norm());
            }
        }
    }
    out.energy = energy.value();
    out.minus_de_a = da.value();
    out.hess_b = db.value();
    return out;
}

}  // namespace

HeatFlowReport heat_flow_trace(const BellmanSpec& bellman, const DiscreteOperator& op_a,
                               const DiscreteOperator& op_b, VectorXcdRef f, VectorXcdRef g,
                               const std::vector<double>& times, const HeatFlowOptions& opts) {
    require_same_geometry(op_a.domain, op_b.domain, "heat_flow_trace");
    const PairConstants pc = pair_constants(op_a.field, op_b.field, bellman.p);
    if (!(pc.delta_p > 0.0))
        throw std::invalid_argument("heat_flow_trace: requires delta_p(A,B) > 0");
    HeatFlowReport rep;
    rep.bound = pc.delta_p / 5.0 * pc.lambda / pc.Lambda;

    auto prop_a = make_propagator(op_a, opts.method);
    auto prop_b = make_propagator(op_b, opts.method);
    rep.trace.integrator = prop_a->name();
    rep.trace.requested_norms = {bellman.p, bellman.q};
    rep.trace.lr_norms.resize(2);

    double prev_e = 0.0, prev_t = 0.0, prev_i = 0.0;
    KahanSum bilinear;
    double min_margin = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        const VectorXcd u = prop_a->at(f, t);
        const VectorXcd v = prop_b->at(g, t);
        const EnergyEval ee = energy_at(bellman, op_a, op_b, u, v, true, rep.bound);
        min_margin = std::min(min_margin, ee.min_margin);

        rep.trace.times.push_back(t);
        rep.trace.energy.push_back(ee.energy);
        rep.trace.lr_norms[0].push_back(lr_norm(op_a.domain, u, bellman.p));
        rep.trace.lr_norms[1].push_back(lr_norm(op_b.domain, v, bellman.q));
        rep.deriv_formula_a.push_back(ee.minus_de_a);
        rep.deriv_hessian_b.push_back(ee.hess_b);

        const double it = gradient_product_integral(op_a, op_b, u, v);
        if (k > 0) bilinear.add(0.5 * (t - prev_t) * (it + prev_i));
        rep.trace.bilinear.push_back(bilinear.value());

        // Centered difference of the energy.
        const double dt = opts.fd_rel_step * t;
        if (t > 0.0 && dt > 0.0) {
            const EnergyEval em = energy_at(bellman, op_a, op_b, prop_a->at(f, t - dt),
                                            prop_b->at(g, t - dt), false, rep.bound);
            const EnergyEval ep = energy_at(bellman, op_a, op_b, prop_a->at(f, t + dt),
                                            prop_b->at(g, t + dt), false, rep.bound);
            const double fd = -(ep.energy - em.energy) / (2.0 * dt);
            rep.deriv_fd.push_back(fd);
            // Ignore the comparison once the flow has decayed to the point
            // where the derivative is numerically negligible.
            const double floor = 1e-9 * std::max(1.0, rep.trace.energy[0]);
            if (std::abs(fd) > floor || std::abs(ee.minus_de_a) > floor)
                rep.max_rel_gap_a_fd =
                    std::max(rep.max_rel_gap_a_fd, rel_gap(fd, ee.minus_de_a, floor));
        } else {
            rep.deriv_fd.push_back(std::numeric_limits<double>::quiet_NaN());
        }

        if (k > 0) {
            const double uptick = ee.energy - prev_e;
            rep.max_uptick = std::max(rep.max_uptick, uptick);
            if (uptick > 1e-12 * std::max(1.0, rep.trace.energy[0])) rep.energy_monotone = false;
        }
        prev_e = ee.energy;
        prev_t = t;
        prev_i = it;
    }
    rep.min_integrand_margin = min_margin;
    return rep;
}

}  // namespace pellip
