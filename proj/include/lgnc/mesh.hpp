/**
 * @file mesh.hpp
 * @brief Conforming triangulations of polygonal domains: structured unit-square
 *        meshes, red refinement, neighbour walking point location and a plain
 *        text import/export format.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lgnc/error.hpp"

namespace lgnc {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(const Point&, const Point&) = default;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }

using BarycentricCoords = std::array<double, 3>;
using Cell = std::array<int, 3>;

inline constexpr int kBoundary = -1;
inline constexpr double kBaryTol = 1e-12;

/// Immutable triangulation. Cells are counterclockwise; neighbors[c][e] is the
/// cell across the edge opposite local vertex e, or kBoundary.
class Mesh {
public:
    Mesh() = default;

    /// Builds adjacency and sizes. Boundary flags are derived from boundary
    /// edges when `boundary_flags` is empty.
    Mesh(std::vector<Point> nodes, std::vector<Cell> cells, std::vector<bool> boundary_flags = {})
        : nodes_(std::move(nodes)), cells_(std::move(cells)), boundary_(std::move(boundary_flags)) {
        if (nodes_.empty() || cells_.empty()) {
            throw InvalidArgument("Mesh: need at least one node and one cell");
        }
        for (const auto& c : cells_) {
            for (int v : c) {
                if (v < 0 || v >= static_cast<int>(nodes_.size())) {
                    throw InvalidArgument("Mesh: cell references node " + std::to_string(v) +
                                          " out of range");
                }
            }
        }
        build_geometry();
        build_adjacency();
        if (boundary_.empty()) {
            boundary_.assign(nodes_.size(), false);
            for (std::size_t c = 0; c < cells_.size(); ++c) {
                for (int e = 0; e < 3; ++e) {
                    if (neighbors_[c][e] == kBoundary) {
                        boundary_[cells_[c][(e + 1) % 3]] = true;
                        boundary_[cells_[c][(e + 2) % 3]] = true;
                    }
                }
            }
        } else if (boundary_.size() != nodes_.size()) {
            throw InvalidArgument("Mesh: boundary flag count does not match node count");
        }
    }

    const std::vector<Point>& nodes() const { return nodes_; }
    const std::vector<Cell>& cells() const { return cells_; }
    const std::vector<bool>& boundary_node_flags() const { return boundary_; }
    const std::vector<std::array<int, 3>>& cell_neighbors() const { return neighbors_; }
    const std::vector<double>& cell_diameters() const { return h_cell_; }

    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_cells() const { return cells_.size(); }

    const Point& node(int i) const { return nodes_[i]; }
    const Cell& cell(int c) const { return cells_[c]; }
    double h_cell(int c) const { return h_cell_[c]; }
    double area(int c) const { return area_[c]; }

    /// max over cells of h_K
    double h() const { return h_; }
    /// realized inverse-assumption constant h / min h_K
    double alpha0() const { return alpha0_; }

    double total_area() const {
        double a = 0.0;
        for (double ak : area_) a += ak;
        return a;
    }

    Point vertex(int c, int local) const { return nodes_[cells_[c][local]]; }

    Point to_physical(int c, const BarycentricCoords& b) const {
        const Point p0 = vertex(c, 0), p1 = vertex(c, 1), p2 = vertex(c, 2);
        return {b[0] * p0.x + b[1] * p1.x + b[2] * p2.x, b[0] * p0.y + b[1] * p1.y + b[2] * p2.y};
    }

    BarycentricCoords barycentric(int c, Point p) const {
        const Point p0 = vertex(c, 0), p1 = vertex(c, 1), p2 = vertex(c, 2);
        const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
        const double l1 = ((p.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p.y - p0.y)) / det;
        const double l2 = ((p1.x - p0.x) * (p.y - p0.y) - (p.x - p0.x) * (p1.y - p0.y)) / det;
        return {1.0 - l1 - l2, l1, l2};
    }

    /// Edges shared by exactly one cell, as (cell, local edge) pairs.
    std::vector<std::pair<int, int>> boundary_edges() const {
        std::vector<std::pair<int, int>> out;
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            for (int e = 0; e < 3; ++e) {
                if (neighbors_[c][e] == kBoundary) out.emplace_back(static_cast<int>(c), e);
            }
        }
        return out;
    }

private:
    void build_geometry() {
        area_.resize(cells_.size());
        h_cell_.resize(cells_.size());
        h_ = 0.0;
        double hmin = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            const Point p0 = nodes_[cells_[c][0]], p1 = nodes_[cells_[c][1]], p2 = nodes_[cells_[c][2]];
            const double a2 = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
            if (!(a2 > 0.0)) {
                throw InvalidArgument("Mesh: cell " + std::to_string(c) +
                                      " has non-positive signed area (must be counterclockwise)");
            }
            area_[c] = 0.5 * a2;
            h_cell_[c] = std::max({norm(p1 - p0), norm(p2 - p1), norm(p0 - p2)});
            h_ = std::max(h_, h_cell_[c]);
            hmin = std::min(hmin, h_cell_[c]);
        }
        alpha0_ = h_ / hmin;
    }

    void build_adjacency() {
        std::map<std::pair<int, int>, std::pair<int, int>> first;  // edge -> (cell, local edge)
        neighbors_.assign(cells_.size(), {kBoundary, kBoundary, kBoundary});
        std::map<std::pair<int, int>, int> count;
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            for (int e = 0; e < 3; ++e) {
                int a = cells_[c][(e + 1) % 3], b = cells_[c][(e + 2) % 3];
                auto key = std::minmax(a, b);
                const int n = ++count[key];
                if (n > 2) {
                    throw InvalidArgument("Mesh: edge (" + std::to_string(key.first) + "," +
                                          std::to_string(key.second) + ") shared by more than 2 cells");
                }
                auto it = first.find(key);
                if (it == first.end()) {
                    first.emplace(key, std::make_pair(static_cast<int>(c), e));
                } else {
                    neighbors_[c][e] = it->second.first;
                    neighbors_[it->second.first][it->second.second] = static_cast<int>(c);
                }
            }
        }
    }

    std::vector<Point> nodes_;
    std::vector<Cell> cells_;
    std::vector<bool> boundary_;
    std::vector<std::array<int, 3>> neighbors_;
    std::vector<double> area_;
    std::vector<double> h_cell_;
    double h_ = 0.0;
    double alpha0_ = 1.0;
};

/// n x n squares on (0,1)^2, each cut along its (i,j)-(i+1,j+1) diagonal.
inline Mesh generate_unit_square(int n) {
    if (n < 1) throw InvalidArgument("generate_unit_square: n must be >= 1, got " + std::to_string(n));
    const int m = n + 1;
    std::vector<Point> nodes;
    std::vector<bool> boundary;
    nodes.reserve(static_cast<std::size_t>(m) * m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            nodes.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
            boundary.push_back(i == 0 || j == 0 || i == n || j == n);
        }
    }
    std::vector<Cell> cells;
    cells.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = j * m + i, v10 = v00 + 1, v01 = v00 + m, v11 = v01 + 1;
            cells.push_back({v00, v10, v11});
            cells.push_back({v00, v11, v01});
        }
    }
    return Mesh(std::move(nodes), std::move(cells), std::move(boundary));
}

/// Red refinement: every triangle split into 4 congruent children via edge midpoints.
inline Mesh refine_uniform(const Mesh& mesh) {
    std::vector<Point> nodes = mesh.nodes();
    std::vector<bool> boundary = mesh.boundary_node_flags();
    std::map<std::pair<int, int>, int> midpoint;
    const auto& nb = mesh.cell_neighbors();
    for (const auto& t : mesh.cells()) {
        for (int e = 0; e < 3; ++e) midpoint.emplace(std::minmax(t[(e + 1) % 3], t[(e + 2) % 3]), -1);
    }
    // number midpoints in sorted edge order
    for (auto& [key, idx] : midpoint) {
        idx = static_cast<int>(nodes.size());
        nodes.push_back(0.5 * (mesh.node(key.first) + mesh.node(key.second)));
        boundary.push_back(false);
    }
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        for (int e = 0; e < 3; ++e) {
            if (nb[c][e] == kBoundary) {
                auto key = std::minmax(mesh.cell(c)[(e + 1) % 3], mesh.cell(c)[(e + 2) % 3]);
                boundary[midpoint.at(key)] = true;
            }
        }
    }
    std::vector<Cell> cells;
    cells.reserve(4 * mesh.num_cells());
    for (const auto& t : mesh.cells()) {
        const int a = t[0], b = t[1], c = t[2];
        const int ab = midpoint.at(std::minmax(a, b));
        const int bc = midpoint.at(std::minmax(b, c));
        const int ca = midpoint.at(std::minmax(c, a));
        cells.push_back({a, ab, ca});
        cells.push_back({ab, b, bc});
        cells.push_back({ca, bc, c});
        cells.push_back({ab, bc, ca});
    }
    return Mesh(std::move(nodes), std::move(cells), std::move(boundary));
}

struct Location {
    int cell = -1;
    BarycentricCoords bary{};
};

namespace detail {

inline bool inside(const BarycentricCoords& b) {
    return b[0] >= -kBaryTol && b[1] >= -kBaryTol && b[2] >= -kBaryTol;
}

inline std::optional<Location> locate_exhaustive(const Mesh& mesh, Point p) {
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto b = mesh.barycentric(static_cast<int>(c), p);
        if (inside(b)) return Location{static_cast<int>(c), b};
    }
    return std::nullopt;
}

}  // namespace detail

/// Walks across the edge with the most negative barycentric coordinate,
/// starting at `hint`. Falls back to a full scan when the walk hits the
/// boundary or exceeds the cell count.
inline std::optional<Location> locate_point(const Mesh& mesh, Point p, int hint) {
    if (hint < 0 || hint >= static_cast<int>(mesh.num_cells())) {
        throw InvalidArgument("locate_point: hint " + std::to_string(hint) + " is not a cell index");
    }
    const auto& nb = mesh.cell_neighbors();
    int cur = hint;
    int prev = -1;
    const std::size_t max_steps = mesh.num_cells() + 1;
    for (std::size_t step = 0; step < max_steps; ++step) {
        const auto b = mesh.barycentric(cur, p);
        int e = 0;
        if (b[1] < b[e]) e = 1;
        if (b[2] < b[e]) e = 2;
        if (b[e] >= -kBaryTol) return Location{cur, b};
        const int next = nb[cur][e];
        if (next == kBoundary || next == prev) break;
        prev = cur;
        cur = next;
    }
    return detail::locate_exhaustive(mesh, p);
}

/// Nearest point of the boundary to p, with the cell owning that boundary edge.
struct BoundaryProjection {
    Point point;
    int cell = -1;
    double distance = std::numeric_limits<double>::infinity();
};

inline BoundaryProjection closest_boundary_point(const Mesh& mesh, Point p) {
    BoundaryProjection best;
    for (auto [c, e] : mesh.boundary_edges()) {
        const Point a = mesh.vertex(c, (e + 1) % 3), b = mesh.vertex(c, (e + 2) % 3);
        const Point ab = b - a;
        double t = ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / (ab.x * ab.x + ab.y * ab.y);
        t = std::clamp(t, 0.0, 1.0);
        const Point q = a + t * ab;
        const double d = norm(p - q);
        if (d < best.distance) best = {q, c, d};
    }
    return best;
}

// Plain text format:
//   nv nc
//   x y boundary_flag      (nv lines)
//   i0 i1 i2               (nc lines, 0-based, counterclockwise)

inline Mesh read_mesh(std::istream& in) {
    std::size_t nv = 0, nc = 0;
    if (!(in >> nv >> nc)) throw ConfigError("read_mesh: missing 'nv nc' header");
    std::vector<Point> nodes(nv);
    std::vector<bool> boundary(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        int flag = 0;
        if (!(in >> nodes[i].x >> nodes[i].y >> flag)) {
            throw ConfigError("read_mesh: bad node line " + std::to_string(i + 2));
        }
        boundary[i] = flag != 0;
    }
    std::vector<Cell> cells(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        if (!(in >> cells[c][0] >> cells[c][1] >> cells[c][2])) {
            throw ConfigError("read_mesh: bad cell line " + std::to_string(nv + c + 2));
        }
    }
    try {
        return Mesh(std::move(nodes), std::move(cells), std::move(boundary));
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("read_mesh: ") + e.what());
    }
}

inline void write_mesh(std::ostream& out, const Mesh& mesh) {
    std::ostringstream s;
    s.precision(17);
    s << mesh.num_nodes() << ' ' << mesh.num_cells() << '\n';
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        s << mesh.nodes()[i].x << ' ' << mesh.nodes()[i].y << ' '
          << (mesh.boundary_node_flags()[i] ? 1 : 0) << '\n';
    }
    for (const auto& c : mesh.cells()) s << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    out << s.str();
}

}  // namespace lgnc
