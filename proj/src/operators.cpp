#include "pellip/operators.hpp"

#include <cmath>

#include "pellip/numeric.hpp"

namespace pellip {

namespace {

struct CornerGrads {
    int n_corners = 0;
    int n_nodes = 0;
    // coeff[corner][component][local node]
    double coeff[4][2][4] = {};
};

CornerGrads corner_gradients(int dim, double h) {
    CornerGrads g;
    const double ih = 1.0 / h;
    if (dim == 1) {
        g.n_corners = 2;
        g.n_nodes = 2;
        for (int c = 0; c < 2; ++c) {
            g.coeff[c][0][0] = -ih;
            g.coeff[c][0][1] = ih;
        }
        return g;
    }
    g.n_corners = 4;
    g.n_nodes = 4;
    // Local nodes 0..3 = (0,0), (1,0), (0,1), (1,1). Each corner pairs the
    // one-sided differences along its two adjacent edges.
    const auto dx_bottom = [&](double* c) { c[0] = -ih; c[1] = ih; };
    const auto dx_top = [&](double* c) { c[2] = -ih; c[3] = ih; };
    const auto dy_left = [&](double* c) { c[0] = -ih; c[2] = ih; };
    const auto dy_right = [&](double* c) { c[1] = -ih; c[3] = ih; };
    dx_bottom(g.coeff[0][0]);
    dy_left(g.coeff[0][1]);
    dx_bottom(g.coeff[1][0]);
    dy_right(g.coeff[1][1]);
    dx_top(g.coeff[2][0]);
    dy_left(g.coeff[2][1]);
    dx_top(g.coeff[3][0]);
    dy_right(g.coeff[3][1]);
    return g;
}

// <A grad u, grad v> coefficient of u_jl against conj(v_il) at one corner.
// The (k, l) loop is arranged so that assembling with A* yields exactly the
// conjugate transpose of assembling with A: diagonal terms first, then each
// unordered pair as a single two-term sum (IEEE addition is commutative, so
// the swapped pair matches bit for bit under conjugation).
Complex pair_coeff(const MatrixXcd& a, const CornerGrads& g, int corner, int il, int jl) {
    const int d = static_cast<int>(a.rows());
    Complex acc(0.0, 0.0);
    for (int k = 0; k < d; ++k)
        acc += a(k, k) * (g.coeff[corner][k][jl] * g.coeff[corner][k][il]);
    for (int k = 0; k < d; ++k)
        for (int l = k + 1; l < d; ++l) {
            const Complex s = a(k, l) * (g.coeff[corner][l][jl] * g.coeff[corner][k][il]) +
                              a(l, k) * (g.coeff[corner][k][jl] * g.coeff[corner][l][il]);
            acc += s;
        }
    return acc;
}

const ComplexMatrix& field_cell(const ComplexMatrixField& field, int active_index) {
    return field.size() == 1 ? field.cell(0) : field.cell(active_index);
}

}  // namespace

DiscreteOperator assemble_operator(const ComplexMatrixField& field, const GridDomain& domain) {
    if (field.dim() != domain.dim)
        throw std::invalid_argument("assemble_operator: field dimension must match the domain");
    if (field.size() != 1 && field.size() != domain.n_active_cells())
        throw std::invalid_argument("assemble_operator: field cells misaligned with domain cells");

    DiscreteOperator op;
    op.domain = domain;
    op.field = field;
    const CornerGrads g = corner_gradients(domain.dim, domain.h);
    const double corner_weight = 1.0 / g.n_corners;  // h^d of the cell cancels the node measure

    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<size_t>(domain.n_active_cells()) * g.n_corners * g.n_nodes * g.n_nodes);
    for (int ac = 0; ac < domain.n_active_cells(); ++ac) {
        const MatrixXcd& a = field_cell(field, ac).entries();
        int nodes[4];
        domain.cell_nodes(domain.active_cells[static_cast<size_t>(ac)], nodes);
        for (int corner = 0; corner < g.n_corners; ++corner)
            for (int il = 0; il < g.n_nodes; ++il) {
                const int di = domain.node_dof[static_cast<size_t>(nodes[il])];
                if (di < 0) continue;
                for (int jl = 0; jl < g.n_nodes; ++jl) {
                    const int dj = domain.node_dof[static_cast<size_t>(nodes[jl])];
                    if (dj < 0) continue;
                    const Complex c = pair_coeff(a, g, corner, il, jl);
                    if (c != Complex(0.0, 0.0)) trips.emplace_back(di, dj, corner_weight * c);
                }
            }
    }
    op.stiffness.resize(domain.n_dofs(), domain.n_dofs());
    op.stiffness.setFromTriplets(trips.begin(), trips.end());

    op.hermitian = true;
    for (const auto& c : field.cells())
        if ((c.entries() - c.entries().adjoint()).cwiseAbs().maxCoeff() != 0.0) {
            op.hermitian = false;
            break;
        }
    return op;
}

Complex cell_form(const ComplexMatrixField& field, const GridDomain& domain, VectorXcdRef u,
                  VectorXcdRef v) {
    const CornerGrads g = corner_gradients(domain.dim, domain.h);
    const double w = domain.cell_measure() / g.n_corners;
    KahanSum re, im;
    const auto value_at = [&](VectorXcdRef vec, int node) {
        const int dof = domain.node_dof[static_cast<size_t>(node)];
        return dof < 0 ? Complex(0.0, 0.0) : vec(dof);
    };
    for (int ac = 0; ac < domain.n_active_cells(); ++ac) {
        const MatrixXcd& a = field_cell(field, ac).entries();
        int nodes[4];
        domain.cell_nodes(domain.active_cells[static_cast<size_t>(ac)], nodes);
        Complex uv[4], vv[4];
        for (int k = 0; k < g.n_nodes; ++k) {
            uv[k] = value_at(u, nodes[k]);
            vv[k] = value_at(v, nodes[k]);
        }
        for (int corner = 0; corner < g.n_corners; ++corner) {
            Complex gu[2] = {}, gv[2] = {};
            for (int k = 0; k < domain.dim; ++k)
                for (int n = 0; n < g.n_nodes; ++n) {
                    gu[k] += g.coeff[corner][k][n] * uv[n];
                    gv[k] += g.coeff[corner][k][n] * vv[n];
                }
            for (int k = 0; k < domain.dim; ++k)
                for (int l = 0; l < domain.dim; ++l) {
                    const Complex term = w * a(k, l) * gu[l] * std::conj(gv[k]);
                    re.add(term.real());
                    im.add(term.imag());
                }
        }
    }
    return {re.value(), im.value()};
}

Complex dof_inner(const GridDomain& domain, VectorXcdRef u, VectorXcdRef v) {
    KahanSum re, im;
    const double w = domain.cell_measure();
    for (int i = 0; i < domain.n_dofs(); ++i) {
        const Complex term = w * u(i) * std::conj(v(i));
        re.add(term.real());
        im.add(term.imag());
    }
    return {re.value(), im.value()};
}

double lr_norm(const GridDomain& domain, VectorXcdRef u, double r) {
    if (std::isinf(r)) {
        double m = 0.0;
        for (int i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u(i)));
        return m;
    }
    KahanSum s;
    const double w = domain.cell_measure();
    for (int i = 0; i < u.size(); ++i) s.add(w * std::pow(std::abs(u(i)), r));
    return std::pow(s.value(), 1.0 / r);
}

double grad_norm_sq(const GridDomain& domain, VectorXcdRef u) {
    const CornerGrads g = corner_gradients(domain.dim, domain.h);
    const double w = domain.cell_measure() / g.n_corners;
    KahanSum s;
    const auto value_at = [&](int node) {
        const int dof = domain.node_dof[static_cast<size_t>(node)];
        return dof < 0 ? Complex(0.0, 0.0) : u(dof);
    };
    for (int ac = 0; ac < domain.n_active_cells(); ++ac) {
        int nodes[4];
        domain.cell_nodes(domain.active_cells[static_cast<size_t>(ac)], nodes);
        Complex uv[4];
        for (int k = 0; k < g.n_nodes; ++k) uv[k] = value_at(nodes[k]);
        for (int corner = 0; corner < g.n_corners; ++corner)
            for (int k = 0; k < domain.dim; ++k) {
                Complex gu(0.0, 0.0);
                for (int n = 0; n < g.n_nodes; ++n) gu += g.coeff[corner][k][n] * uv[n];
                s.add(w * std::norm(gu));
            }
    }
    return s.value();
}

CellCorners cell_corner_data(const GridDomain& domain, VectorXcdRef u, int raw_cell) {
    const CornerGrads g = corner_gradients(domain.dim, domain.h);
    CellCorners out;
    out.n_corners = g.n_corners;
    domain.cell_nodes(raw_cell, out.nodes);
    Complex uv[4] = {};
    for (int k = 0; k < g.n_nodes; ++k) {
        const int dof = domain.node_dof[static_cast<size_t>(out.nodes[k])];
        uv[k] = dof < 0 ? Complex(0.0, 0.0) : u(dof);
        out.values[k] = uv[k];
    }
    for (int corner = 0; corner < g.n_corners; ++corner)
        for (int k = 0; k < domain.dim; ++k) {
            Complex gu(0.0, 0.0);
            for (int n = 0; n < g.n_nodes; ++n) gu += g.coeff[corner][k][n] * uv[n];
            out.grad[corner][k] = gu;
        }
    return out;
}

Complex dof_mass(const GridDomain& domain, VectorXcdRef u) {
    KahanSum re, im;
    const double w = domain.cell_measure();
    for (int i = 0; i < domain.n_dofs(); ++i) {
        re.add(w * u(i).real());
        im.add(w * u(i).imag());
    }
    return {re.value(), im.value()};
}

}  // namespace pellip
