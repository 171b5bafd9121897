#include "pellip/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pellip {

bool GridDomain::pure_neumann() const {
    return std::none_of(node_kind.begin(), node_kind.end(),
                        [](NodeKind k) { return k == NodeKind::kDirichlet; });
}

bool GridDomain::pure_dirichlet() const {
    return std::none_of(node_kind.begin(), node_kind.end(),
                        [](NodeKind k) { return k == NodeKind::kNeumann; });
}

void GridDomain::cell_nodes(int raw_cell, int out[4]) const {
    if (dim == 1) {
        out[0] = raw_cell;
        out[1] = raw_cell + 1;
        out[2] = out[3] = -1;
        return;
    }
    const int i = raw_cell % nx, j = raw_cell / nx;
    out[0] = node_index(i, j);
    out[1] = node_index(i + 1, j);
    out[2] = node_index(i, j + 1);
    out[3] = node_index(i + 1, j + 1);
}

void GridDomain::classify(const std::vector<uint8_t>& dirichlet_nodes) {
    active_cells.clear();
    const int n_cells_total = dim == 1 ? nx : nx * ny;
    for (int c = 0; c < n_cells_total; ++c)
        if (cell_mask[static_cast<size_t>(c)]) active_cells.push_back(c);
    if (active_cells.empty()) throw std::invalid_argument("GridDomain: empty cell mask");

    node_kind.assign(static_cast<size_t>(n_nodes()), NodeKind::kInactive);
    const auto touch = [&](int node) { node_kind[static_cast<size_t>(node)] = NodeKind::kInterior; };
    for (int c : active_cells) {
        int nodes[4];
        cell_nodes(c, nodes);
        for (int k = 0; k < (dim == 1 ? 2 : 4); ++k) touch(nodes[k]);
    }
    // A node is interior when its full ring of adjacent cells is active.
    if (dim == 1) {
        for (int i = 0; i <= nx; ++i) {
            if (node_kind[static_cast<size_t>(i)] == NodeKind::kInactive) continue;
            if (!(cell_active(i - 1) && cell_active(i)))
                node_kind[static_cast<size_t>(i)] = NodeKind::kNeumann;
        }
    } else {
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                const int n = node_index(i, j);
                if (node_kind[static_cast<size_t>(n)] == NodeKind::kInactive) continue;
                const bool full = cell_active(i - 1, j - 1) && cell_active(i, j - 1) &&
                                  cell_active(i - 1, j) && cell_active(i, j);
                if (!full) node_kind[static_cast<size_t>(n)] = NodeKind::kNeumann;
            }
    }
    for (int n = 0; n < n_nodes(); ++n) {
        if (!dirichlet_nodes.empty() && dirichlet_nodes[static_cast<size_t>(n)]) {
            if (node_kind[static_cast<size_t>(n)] == NodeKind::kInterior)
                throw std::invalid_argument("GridDomain: Dirichlet node is not on the boundary");
            if (node_kind[static_cast<size_t>(n)] == NodeKind::kNeumann)
                node_kind[static_cast<size_t>(n)] = NodeKind::kDirichlet;
        }
    }
    node_dof.assign(static_cast<size_t>(n_nodes()), -1);
    dof_node.clear();
    for (int n = 0; n < n_nodes(); ++n) {
        const NodeKind k = node_kind[static_cast<size_t>(n)];
        if (k == NodeKind::kInterior || k == NodeKind::kNeumann) {
            node_dof[static_cast<size_t>(n)] = static_cast<int>(dof_node.size());
            dof_node.push_back(n);
        }
    }
}

GridDomain build_interval(int n_cells, double h, bool dirichlet_left, bool dirichlet_right) {
    if (n_cells < 1 || !(h > 0.0)) throw std::invalid_argument("build_interval: bad extents");
    GridDomain g;
    g.dim = 1;
    g.nx = n_cells;
    g.h = h;
    g.cell_mask.assign(static_cast<size_t>(n_cells), 1);
    std::vector<uint8_t> dir(static_cast<size_t>(n_cells + 1), 0);
    dir[0] = dirichlet_left ? 1 : 0;
    dir[static_cast<size_t>(n_cells)] = dirichlet_right ? 1 : 0;
    g.classify(dir);
    return g;
}

GridDomain build_rectangle(int nx, int ny, double h, uint8_t dirichlet_sides) {
    if (nx < 1 || ny < 1 || !(h > 0.0)) throw std::invalid_argument("build_rectangle: bad extents");
    GridDomain g;
    g.dim = 2;
    g.nx = nx;
    g.ny = ny;
    g.h = h;
    g.cell_mask.assign(static_cast<size_t>(nx) * ny, 1);
    std::vector<uint8_t> dir(static_cast<size_t>(nx + 1) * (ny + 1), 0);
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const bool d = ((dirichlet_sides & kSideLeft) && i == 0) ||
                           ((dirichlet_sides & kSideRight) && i == nx) ||
                           ((dirichlet_sides & kSideBottom) && j == 0) ||
                           ((dirichlet_sides & kSideTop) && j == ny);
            if (d) dir[static_cast<size_t>(g.node_index(i, j))] = 1;
        }
    g.classify(dir);
    return g;
}

GridDomain build_lshape(int n, double h, bool dirichlet_all) {
    if (n < 2) throw std::invalid_argument("build_lshape: need n >= 2");
    GridDomain g;
    g.dim = 2;
    g.nx = n;
    g.ny = n;
    g.h = h;
    g.cell_mask.assign(static_cast<size_t>(n) * n, 0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (!(i >= n / 2 && j >= n / 2)) g.cell_mask[static_cast<size_t>(j * n + i)] = 1;
    g.classify({});
    if (dirichlet_all) {
        std::vector<uint8_t> dir(static_cast<size_t>(g.n_nodes()), 0);
        for (int k = 0; k < g.n_nodes(); ++k)
            if (g.node_kind[static_cast<size_t>(k)] == NodeKind::kNeumann) dir[static_cast<size_t>(k)] = 1;
        g.classify(dir);
    }
    return g;
}

GridDomain build_bitmap(const std::vector<std::string>& rows, double h, bool dirichlet_all) {
    if (rows.empty() || rows[0].empty()) throw std::invalid_argument("build_bitmap: empty bitmap");
    GridDomain g;
    g.dim = 2;
    g.ny = static_cast<int>(rows.size());
    g.nx = static_cast<int>(rows[0].size());
    g.h = h;
    g.cell_mask.assign(static_cast<size_t>(g.nx) * g.ny, 0);
    for (int j = 0; j < g.ny; ++j) {
        if (static_cast<int>(rows[static_cast<size_t>(j)].size()) != g.nx)
            throw std::invalid_argument("build_bitmap: ragged bitmap rows");
        for (int i = 0; i < g.nx; ++i)
            if (rows[static_cast<size_t>(j)][static_cast<size_t>(i)] == '#')
                g.cell_mask[static_cast<size_t>(j * g.nx + i)] = 1;
    }
    g.classify({});
    if (dirichlet_all) {
        std::vector<uint8_t> dir(static_cast<size_t>(g.n_nodes()), 0);
        for (int k = 0; k < g.n_nodes(); ++k)
            if (g.node_kind[static_cast<size_t>(k)] == NodeKind::kNeumann) dir[static_cast<size_t>(k)] = 1;
        g.classify(dir);
    }
    return g;
}

GridDomain build_horn(double alpha, double c, double h, double x_max) {
    if (!(alpha > 0.0) || !(c > 0.0) || !(h > 0.0))
        throw std::invalid_argument("build_horn: alpha, c, h must be positive");
    if (x_max <= 0.0) x_max = std::log(c / (alpha * 1e-6)) / alpha;
    GridDomain g;
    g.dim = 2;
    g.nx = std::max(1, static_cast<int>(std::ceil(x_max / h)));
    const int half_rows = static_cast<int>(std::ceil(c / h)) + 1;
    g.ny = 2 * half_rows;
    g.h = h;
    g.y0 = -half_rows * h;
    g.cell_mask.assign(static_cast<size_t>(g.nx) * g.ny, 0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double xc = (i + 0.5) * h;
            const double yc = g.y0 + (j + 0.5) * h;
            if (std::abs(yc) < c * std::exp(-alpha * xc))
                g.cell_mask[static_cast<size_t>(j * g.nx + i)] = 1;
        }
    g.classify({});
    return g;
}

}  // namespace pellip
