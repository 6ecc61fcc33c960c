/**
 * @file elements.hpp
 * @brief P1/P2 Lagrange shape functions on triangles, symmetric Gauss rules
 *        and global degree-of-freedom maps.
 *
 * Reference triangle: (0,0),(1,0),(0,1) with lambda0 = 1 - xi - eta,
 * lambda1 = xi, lambda2 = eta. P2 local dofs are the three vertices followed by
 * the midpoints of local edges (0,1), (1,2), (2,0).
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lgnc/error.hpp"
#include "lgnc/mesh.hpp"

namespace lgnc {

struct ElementKind {
    int degree = 1;

    explicit constexpr ElementKind(int d = 1) : degree(d) {}
    constexpr int dofs_per_cell() const { return degree == 1 ? 3 : 6; }
    friend constexpr bool operator==(ElementKind, ElementKind) = default;
};

inline constexpr ElementKind P1{1};
inline constexpr ElementKind P2{2};

inline void check_kind(ElementKind kind) {
    if (kind.degree != 1 && kind.degree != 2) {
        throw InvalidArgument("element degree must be 1 or 2, got " + std::to_string(kind.degree));
    }
}

inline constexpr std::array<std::array<int, 2>, 3> kP2Edges{{{0, 1}, {1, 2}, {2, 0}}};

/// Shape values and gradients with respect to (xi, eta).
struct ShapeEval {
    int n = 0;
    std::array<double, 6> values{};
    std::array<std::array<double, 2>, 6> ref_grads{};
};

inline ShapeEval shape_eval(ElementKind kind, const BarycentricCoords& b) {
    static constexpr std::array<std::array<double, 2>, 3> dl{{{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}}};
    ShapeEval s;
    if (kind.degree == 1) {
        s.n = 3;
        for (int i = 0; i < 3; ++i) {
            s.values[i] = b[i];
            s.ref_grads[i] = dl[i];
        }
        return s;
    }
    check_kind(kind);
    s.n = 6;
    for (int i = 0; i < 3; ++i) {
        s.values[i] = b[i] * (2.0 * b[i] - 1.0);
        const double f = 4.0 * b[i] - 1.0;
        s.ref_grads[i] = {f * dl[i][0], f * dl[i][1]};
    }
    for (int e = 0; e < 3; ++e) {
        const int i = kP2Edges[e][0], j = kP2Edges[e][1];
        s.values[3 + e] = 4.0 * b[i] * b[j];
        s.ref_grads[3 + e] = {4.0 * (b[i] * dl[j][0] + b[j] * dl[i][0]),
                              4.0 * (b[i] * dl[j][1] + b[j] * dl[i][1])};
    }
    return s;
}

/// Barycentric coordinates of the local nodal points of `kind`.
inline std::vector<BarycentricCoords> local_nodes(ElementKind kind) {
    std::vector<BarycentricCoords> pts{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    if (kind.degree == 2) {
        for (auto [i, j] : kP2Edges) {
            BarycentricCoords m{0, 0, 0};
            m[i] = m[j] = 0.5;
            pts.push_back(m);
        }
    }
    return pts;
}

/// Weights sum to 1; multiply by the cell area to integrate.
struct QuadratureRule {
    std::vector<BarycentricCoords> points;
    std::vector<double> weights;
    int exact_degree = 0;

    std::size_t size() const { return points.size(); }
};

namespace detail {

inline void add_orbit3(QuadratureRule& r, double a, double w) {
    const double b = 1.0 - 2.0 * a;
    r.points.push_back({a, a, b});
    r.points.push_back({a, b, a});
    r.points.push_back({b, a, a});
    r.weights.insert(r.weights.end(), 3, w);
}

inline void add_orbit6(QuadratureRule& r, double a, double b, double w) {
    const double c = 1.0 - a - b;
    for (const BarycentricCoords& p : {BarycentricCoords{a, b, c}, BarycentricCoords{a, c, b},
                                       BarycentricCoords{b, a, c}, BarycentricCoords{b, c, a},
                                       BarycentricCoords{c, a, b}, BarycentricCoords{c, b, a}}) {
        r.points.push_back(p);
        r.weights.push_back(w);
    }
}

}  // namespace detail

/// Positive-weight symmetric rules. Degree 3 is served by the 6-point degree-4 rule.
inline QuadratureRule quadrature_rule(int exact_degree) {
    if (exact_degree > 6) {
        throw Unsupported("quadrature_rule: degree " + std::to_string(exact_degree) +
                          " not available (max 6)");
    }
    QuadratureRule r;
    switch (std::max(exact_degree, 1)) {
        case 1:
            r.points = {{1.0 / 3, 1.0 / 3, 1.0 / 3}};
            r.weights = {1.0};
            r.exact_degree = 1;
            break;
        case 2:
            detail::add_orbit3(r, 1.0 / 6, 1.0 / 3);
            r.exact_degree = 2;
            break;
        case 3:
        case 4:
            detail::add_orbit3(r, 0.44594849091596488632, 0.22338158967801146570);
            detail::add_orbit3(r, 0.09157621350977074346, 0.10995174365532186764);
            r.exact_degree = 4;
            break;
        case 5: {
            const double s = std::sqrt(15.0);
            r.points = {{1.0 / 3, 1.0 / 3, 1.0 / 3}};
            r.weights = {9.0 / 40};
            detail::add_orbit3(r, (6.0 - s) / 21, (155.0 - s) / 1200);
            detail::add_orbit3(r, (6.0 + s) / 21, (155.0 + s) / 1200);
            r.exact_degree = 5;
            break;
        }
        default:
            detail::add_orbit3(r, 0.24928674517091042129, 0.11678627572637936603);
            detail::add_orbit3(r, 0.06308901449150222834, 0.050844906370206816921);
            detail::add_orbit6(r, 0.053145049844816947353, 0.31035245103378440542,
                               0.082851075618373575194);
            r.exact_degree = 6;
            break;
    }
    return r;
}

/// Degree used for right-hand sides, composed integrands and error norms.
inline constexpr int kRhsQuadratureDegree = 5;

inline int matrix_quadrature_degree(ElementKind kind) { return std::max(2 * kind.degree, 2); }

/// Per-cell affine map data: physical gradient = Jinv^T * reference gradient.
struct CellMap {
    double area = 0.0;
    std::array<std::array<double, 2>, 2> jinv_t{};  // row r: d(xi,eta)/dx_r

    CellMap(const Mesh& mesh, int c) {
        const Point p0 = mesh.vertex(c, 0), p1 = mesh.vertex(c, 1), p2 = mesh.vertex(c, 2);
        const double j00 = p1.x - p0.x, j01 = p2.x - p0.x;
        const double j10 = p1.y - p0.y, j11 = p2.y - p0.y;
        const double det = j00 * j11 - j01 * j10;
        area = 0.5 * det;
        // J = [[j00, j01],[j10, j11]], J^{-T} = [[j11, -j10],[-j01, j00]] / det
        jinv_t = {{{j11 / det, -j10 / det}, {-j01 / det, j00 / det}}};
    }

    std::array<double, 2> physical(const std::array<double, 2>& g) const {
        return {jinv_t[0][0] * g[0] + jinv_t[0][1] * g[1], jinv_t[1][0] * g[0] + jinv_t[1][1] * g[1]};
    }
};

/// Scalar or vector Lagrange space. Vector dofs are blocked by component:
/// global = component * n_scalar + scalar dof.
struct DofMap {
    ElementKind kind{1};
    int components = 1;
    int n_scalar = 0;
    int n_dofs = 0;
    std::vector<std::vector<int>> cell_to_global;  // scalar dofs per cell
    std::vector<int> dirichlet_dofs;               // all components, sorted
    std::vector<char> is_dirichlet;                // per global dof
    std::vector<Point> support_points;             // per scalar dof

    int dofs_per_cell() const { return kind.dofs_per_cell(); }
    int global(int cell, int local, int component = 0) const {
        return component * n_scalar + cell_to_global[cell][local];
    }
};

inline DofMap build_dof_map(const Mesh& mesh, ElementKind kind, int components, bool homogeneous_dirichlet) {
    check_kind(kind);
    if (components != 1 && components != 2) {
        throw InvalidArgument("build_dof_map: components must be 1 or 2");
    }
    DofMap map;
    map.kind = kind;
    map.components = components;
    const int nv = static_cast<int>(mesh.num_nodes());
    std::vector<char> scalar_bc(mesh.boundary_node_flags().begin(), mesh.boundary_node_flags().end());
    map.support_points = mesh.nodes();
    map.cell_to_global.resize(mesh.num_cells());

    if (kind.degree == 1) {
        for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
            const auto& t = mesh.cell(static_cast<int>(c));
            map.cell_to_global[c] = {t[0], t[1], t[2]};
        }
        map.n_scalar = nv;
    } else {
        // edges numbered in sorted (min, max) node-pair order after the nodes
        std::map<std::pair<int, int>, int> edges;
        std::map<std::pair<int, int>, int> edge_cells;
        for (const auto& t : mesh.cells()) {
            for (auto [i, j] : kP2Edges) {
                auto key = std::minmax(t[i], t[j]);
                edges.emplace(key, 0);
                ++edge_cells[key];
            }
        }
        int next = nv;
        for (auto& [key, idx] : edges) {
            idx = next++;
            map.support_points.push_back(0.5 * (mesh.node(key.first) + mesh.node(key.second)));
            scalar_bc.push_back(edge_cells.at(key) == 1 ? 1 : 0);
        }
        for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
            const auto& t = mesh.cell(static_cast<int>(c));
            auto& g = map.cell_to_global[c];
            g = {t[0], t[1], t[2]};
            for (auto [i, j] : kP2Edges) g.push_back(edges.at(std::minmax(t[i], t[j])));
        }
        map.n_scalar = next;
    }
    map.n_dofs = components * map.n_scalar;
    map.is_dirichlet.assign(map.n_dofs, 0);
    if (homogeneous_dirichlet) {
        for (int comp = 0; comp < components; ++comp) {
            for (int s = 0; s < map.n_scalar; ++s) {
                if (scalar_bc[s]) {
                    map.dirichlet_dofs.push_back(comp * map.n_scalar + s);
                    map.is_dirichlet[comp * map.n_scalar + s] = 1;
                }
            }
        }
    }
    return map;
}

}  // namespace lgnc
