#pragma once

#include <Eigen/Sparse>

#include "pellip/algebra.hpp"
#include "pellip/grid.hpp"

namespace pellip {

using SparseCd = Eigen::SparseMatrix<Complex>;
using VectorXcdRef = const Eigen::Ref<const VectorXcd>&;

/// Discrete divergence-form operator on the active degrees of freedom of a
/// grid domain: <L u, v> h^d equals the sesquilinear cell form
/// sum_cells <A grad u, grad v> h^d exactly, Dirichlet nodes eliminated.
/// Cell gradients are one-sided differences along the cell edges, averaged
/// over the cell corners (trapezoid quadrature), which carries the cross
/// terms of full matrices A.
struct DiscreteOperator {
    GridDomain domain;
    ComplexMatrixField field;
    SparseCd stiffness;  // n_dofs x n_dofs, includes the 1/h^d node measure
    bool hermitian = false;

    int n() const { return static_cast<int>(stiffness.rows()); }
    VectorXcd apply(VectorXcdRef u) const { return stiffness * u; }
};

/// Field cells align with active domain cells (field.size() ==
/// n_active_cells(), or 1 for a constant field).
DiscreteOperator assemble_operator(const ComplexMatrixField& field, const GridDomain& domain);

/// The cell form sum_cells <A grad u, grad v> h^d evaluated directly with
/// compensated summation; independent of the assembled matrix path.
Complex cell_form(const ComplexMatrixField& field, const GridDomain& domain, VectorXcdRef u,
                  VectorXcdRef v);

/// <u, v>_h = sum u_i conj(v_i) h^d over dofs.
Complex dof_inner(const GridDomain& domain, VectorXcdRef u, VectorXcdRef v);

/// Discrete L^r norm (sum |u_i|^r h^d)^{1/r}; r = inf -> max.
double lr_norm(const GridDomain& domain, VectorXcdRef u, double r);

/// Squared discrete gradient norm sum_cells |grad_h u|^2 h^d (corner
/// quadrature, matching the cell form with A = I).
double grad_norm_sq(const GridDomain& domain, VectorXcdRef u);

/// Per-corner complex gradient components of u on one cell (dim entries per
/// corner). Used by the experiment integrands.
struct CellCorners {
    int n_corners = 0;
    int nodes[4] = {-1, -1, -1, -1};
    Complex values[4];
    Complex grad[4][2];  // corner -> gradient component
};
CellCorners cell_corner_data(const GridDomain& domain, VectorXcdRef u, int raw_cell);

/// Mass sum u_i h^d over dofs (conserved by pure-Neumann flows).
Complex dof_mass(const GridDomain& domain, VectorXcdRef u);

}  // namespace pellip
