#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pellip {

enum class NodeKind : uint8_t { kInactive = 0, kInterior, kNeumann, kDirichlet };

/// Masked rectangular lattice of cells with nodes at cell corners and a
/// Dirichlet/Neumann split of the discrete boundary. Boundary nodes are the
/// active nodes not surrounded by a full ring of active cells; Dirichlet
/// nodes are pinned to zero and eliminated from the operator.
class GridDomain {
  public:
    int dim = 1;
    int nx = 0, ny = 0;  // cells per direction (ny = 0 in 1d)
    double h = 0.0;
    double x0 = 0.0, y0 = 0.0;  // coordinates of node (0, 0)

    std::vector<uint8_t> cell_mask;   // nx (1d) or nx*ny (2d), row-major in j
    std::vector<NodeKind> node_kind;  // (nx+1) or (nx+1)*(ny+1)
    std::vector<int> node_dof;        // node -> dof index, -1 when pinned/inactive
    std::vector<int> dof_node;        // dof -> node raw index
    std::vector<int> active_cells;    // raw indices of active cells

    int n_nodes() const { return dim == 1 ? nx + 1 : (nx + 1) * (ny + 1); }
    int n_dofs() const { return static_cast<int>(dof_node.size()); }
    int n_active_cells() const { return static_cast<int>(active_cells.size()); }
    double cell_measure() const { return dim == 1 ? h : h * h; }

    int node_index(int i, int j = 0) const { return j * (nx + 1) + i; }
    int cell_index(int i, int j = 0) const { return j * nx + i; }
    bool cell_active(int i, int j = 0) const {
        if (i < 0 || i >= nx) return false;
        if (dim == 2 && (j < 0 || j >= ny)) return false;
        return cell_mask[static_cast<size_t>(dim == 1 ? i : j * nx + i)] != 0;
    }
    double node_x(int i) const { return x0 + i * h; }
    double node_y(int j) const { return y0 + j * h; }

    bool pure_neumann() const;
    bool pure_dirichlet() const;

    /// Nodes of a cell: 2 in 1d (left, right), 4 in 2d (00, 10, 01, 11).
    void cell_nodes(int raw_cell, int out[4]) const;

    /// Finalizes node classification and dof numbering from the mask and a
    /// per-node Dirichlet predicate.
    void classify(const std::vector<uint8_t>& dirichlet_nodes);
};

// Side bits for rectangle boundary conditions.
constexpr uint8_t kSideLeft = 1, kSideRight = 2, kSideBottom = 4, kSideTop = 8;
constexpr uint8_t kSidesAll = kSideLeft | kSideRight | kSideBottom | kSideTop;

GridDomain build_interval(int n_cells, double h, bool dirichlet_left, bool dirichlet_right);
GridDomain build_rectangle(int nx, int ny, double h, uint8_t dirichlet_sides);
/// Square with the top-right quadrant removed; `dirichlet_all` pins the
/// whole discrete boundary, otherwise it is pure Neumann.
GridDomain build_lshape(int n, double h, bool dirichlet_all);
/// '#' marks an active cell, '.' an inactive one; row 0 is the bottom row.
GridDomain build_bitmap(const std::vector<std::string>& rows, double h, bool dirichlet_all);

/// Exponentially narrowing strip { x > 0, |y| < c e^{-alpha x} } sampled by
/// cell centers, truncated where the omitted mass c e^{-alpha x}/alpha
/// drops below 1e-6 (or at x_max when positive), Neumann closure
/// everywhere including the cut.
GridDomain build_horn(double alpha, double c, double h, double x_max = 0.0);

}  // namespace pellip
