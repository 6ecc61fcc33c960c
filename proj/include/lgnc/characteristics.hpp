/**
 * @file characteristics.hpp
 * @brief First-order upwind map x -> x - w(x) dt, its stability certificate
 *        and Jacobian, and evaluation of fields composed with it.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "lgnc/elements.hpp"
#include "lgnc/error.hpp"
#include "lgnc/field.hpp"
#include "lgnc/mesh.hpp"

namespace lgnc {

inline constexpr double kCflLimit = 0.25;
inline constexpr double kFootClampTol = 1e-10;  // relative to h

struct CflCertificate {
    double w_w1inf = 0.0;
    double dt = 0.0;
    double product = 0.0;
    bool ok = true;
};

inline CflCertificate make_certificate(double w_w1inf, double dt) {
    const double product = dt * w_w1inf;
    return {w_w1inf, dt, product, product <= kCflLimit};
}

inline Point foot(Point x, Vec2 w, double dt) { return {x.x - w[0] * dt, x.y - w[1] * dt}; }

inline Point foot(const std::function<Vec2(Point)>& w, double dt, Point x) { return foot(x, w(x), dt); }

/// Foot for a discrete velocity; x is located first (hint 0 unless given).
inline Point foot(const Mesh& mesh, const DiscreteField& w, double dt, Point x, int hint = 0) {
    const auto loc = locate_point(mesh, x, hint);
    if (!loc) throw InvalidArgument("foot: x is outside the mesh");
    return foot(x, w.vector_value(loc->cell, loc->bary), dt);
}

/// max-row-sum norm of a 2x2 matrix
inline double row_sum_norm(const Mat2& g) {
    return std::max(std::abs(g[0][0]) + std::abs(g[0][1]), std::abs(g[1][0]) + std::abs(g[1][1]));
}

/// |w|_{1,inf} realized as the max over cells and degree-5 quadrature points
/// of the row-sum norm of grad w (exact for P1).
inline double w1inf_seminorm(const Mesh& mesh, const DiscreteField& w) {
    const auto rule = quadrature_rule(kRhsQuadratureDegree);
    std::vector<ShapeEval> shapes;
    for (const auto& b : rule.points) shapes.push_back(shape_eval(w.map().kind, b));
    const std::size_t nq = w.map().kind.degree == 1 ? 1 : shapes.size();
    double m = 0.0;
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const CellMap cm(mesh, c);
        for (std::size_t q = 0; q < nq; ++q) m = std::max(m, row_sum_norm(w.vector_gradient(cm, c, shapes[q])));
    }
    return m;
}

inline CflCertificate check_cfl(const Mesh& mesh, const DiscreteField& w, double dt) {
    return make_certificate(w1inf_seminorm(mesh, w), dt);
}

/// det(I - dt * grad w)
inline double jacobian(const Mat2& grad_w, double dt) {
    return (1.0 - dt * grad_w[0][0]) * (1.0 - dt * grad_w[1][1]) - dt * dt * grad_w[0][1] * grad_w[1][0];
}

inline double jacobian(const Mesh& mesh, const DiscreteField& w, double dt, int cell, const BarycentricCoords& b) {
    return jacobian(w.vector_gradient(CellMap(mesh, cell), cell, shape_eval(w.map().kind, b)), dt);
}

struct QuadPoint {
    int cell = 0;
    BarycentricCoords bary{};
};

/// All (cell, rule point) pairs in cell-major order.
inline std::vector<QuadPoint> cell_quadrature_points(const Mesh& mesh, const QuadratureRule& rule) {
    std::vector<QuadPoint> pts;
    pts.reserve(mesh.num_cells() * rule.size());
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        for (const auto& b : rule.points) pts.push_back({c, b});
    }
    return pts;
}

/// A characteristic foot: the (possibly clamped) point and where it lies.
struct Foot {
    Point point;
    Location loc;
};

/// Locates y starting from `hint`. Points outside by at most h * kFootClampTol
/// are moved onto the nearest boundary point.
inline Foot locate_foot(const Mesh& mesh, Point y, int hint) {
    if (auto loc = locate_point(mesh, y, hint)) return {y, *loc};
    const auto proj = closest_boundary_point(mesh, y);
    if (proj.distance <= mesh.h() * kFootClampTol) {
        if (auto loc = locate_point(mesh, proj.point, proj.cell)) return {proj.point, *loc};
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "foot outside domain beyond clamp tolerance: (" << y.x << ", " << y.y << ") is " << proj.distance
        << " from the boundary";
    throw FootOutside(msg.str());
}

/// Feet X1(w, dt)(x_q), one per input point. `velocity` is called as
/// velocity(cell, bary, x) and returns w(x). A foot that coincides with its
/// quadrature point keeps the point's own cell and barycentrics.
template <class VelocityAt>
std::vector<Foot> locate_feet(const Mesh& mesh, VelocityAt&& velocity, double dt, std::span<const QuadPoint> points) {
    std::vector<Foot> out;
    out.reserve(points.size());
    for (const auto& qp : points) {
        const Point x = mesh.to_physical(qp.cell, qp.bary);
        const Point y = foot(x, velocity(qp.cell, qp.bary, x), dt);
        if (y == x) {
            out.push_back({x, {qp.cell, qp.bary}});
        } else {
            out.push_back(locate_foot(mesh, y, qp.cell));
        }
    }
    return out;
}

inline std::vector<Foot> locate_feet(const Mesh& mesh, const DiscreteField& w, double dt,
                                     std::span<const QuadPoint> points) {
    return locate_feet(
        mesh, [&](int c, const BarycentricCoords& b, Point) { return w.vector_value(c, b); }, dt, points);
}

inline std::vector<Foot> locate_feet(const Mesh& mesh, const std::function<Vec2(Point)>& w, double dt,
                                     std::span<const QuadPoint> points) {
    return locate_feet(
        mesh, [&](int, const BarycentricCoords&, Point x) { return w(x); }, dt, points);
}

/// field(X1(w, dt)(x_q)) for each point.
inline std::vector<double> evaluate_composed(const DiscreteField& field, std::span<const Foot> feet,
                                             int component = 0) {
    std::vector<double> out(feet.size());
    for (std::size_t i = 0; i < feet.size(); ++i) out[i] = field.value(feet[i].loc.cell, feet[i].loc.bary, component);
    return out;
}

inline std::vector<double> evaluate_composed(const std::function<double(Point)>& field, std::span<const Foot> feet) {
    std::vector<double> out(feet.size());
    for (std::size_t i = 0; i < feet.size(); ++i) out[i] = field(feet[i].point);
    return out;
}

inline std::vector<double> evaluate_composed(const Mesh& mesh, const DiscreteField& field, const DiscreteField& w,
                                             double dt, std::span<const QuadPoint> points, int component = 0) {
    const auto feet = locate_feet(mesh, w, dt, points);
    return evaluate_composed(field, feet, component);
}

inline std::vector<double> evaluate_composed(const Mesh& mesh, const std::function<double(Point)>& field,
                                             const DiscreteField& w, double dt, std::span<const QuadPoint> points) {
    const auto feet = locate_feet(mesh, w, dt, points);
    return evaluate_composed(field, feet);
}

}  // namespace lgnc
