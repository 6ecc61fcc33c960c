/**
 * @file field.hpp
 * @brief Finite element coefficient vectors bound to a DofMap, pointwise
 *        evaluation, interpolation and the problem data of the Boussinesq system.
 */
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "lgnc/elements.hpp"
#include "lgnc/error.hpp"
#include "lgnc/mesh.hpp"
#include "lgnc/sparse.hpp"

namespace lgnc {

using Vec2 = std::array<double, 2>;
/// row i = gradient of component i
using Mat2 = std::array<std::array<double, 2>, 2>;

using ScalarFunction = std::function<double(Point, double)>;
using VectorFunction = std::function<Vec2(Point, double)>;

/// Coefficients of nu, kappa and the time dependent forcings. Empty functions
/// stand for zero.
struct ProblemData {
    double nu = 1.0;
    double kappa = 1.0;
    VectorFunction beta;
    VectorFunction f_u;
    ScalarFunction f_theta;

    void validate() const {
        if (!(nu > 0.0)) throw InvalidArgument("ProblemData: nu must be > 0");
        if (!(kappa > 0.0)) throw InvalidArgument("ProblemData: kappa must be > 0");
    }
    Vec2 beta_at(Point x, double t) const { return beta ? beta(x, t) : Vec2{0.0, 0.0}; }
    Vec2 f_u_at(Point x, double t) const { return f_u ? f_u(x, t) : Vec2{0.0, 0.0}; }
    double f_theta_at(Point x, double t) const { return f_theta ? f_theta(x, t) : 0.0; }
};

class DiscreteField {
public:
    DiscreteField() = default;
    explicit DiscreteField(std::shared_ptr<const DofMap> map)
        : map_(std::move(map)), coeffs_(static_cast<std::size_t>(map_->n_dofs), 0.0) {}
    DiscreteField(std::shared_ptr<const DofMap> map, Vector coeffs)
        : map_(std::move(map)), coeffs_(std::move(coeffs)) {
        if (static_cast<int>(coeffs_.size()) != map_->n_dofs) {
            throw InvalidArgument("DiscreteField: coefficient count " + std::to_string(coeffs_.size()) +
                                  " does not match n_dofs " + std::to_string(map_->n_dofs));
        }
    }

    const DofMap& map() const { return *map_; }
    const std::shared_ptr<const DofMap>& map_ptr() const { return map_; }
    const Vector& coeffs() const { return coeffs_; }
    Vector& coeffs() { return coeffs_; }
    int components() const { return map_->components; }

    double value(int cell, const BarycentricCoords& b, int component = 0) const {
        return value(cell, shape_eval(map_->kind, b), component);
    }

    double value(int cell, const ShapeEval& s, int component = 0) const {
        double v = 0.0;
        for (int i = 0; i < s.n; ++i) v += s.values[i] * coeffs_[map_->global(cell, i, component)];
        return v;
    }

    Vec2 vector_value(int cell, const ShapeEval& s) const { return {value(cell, s, 0), value(cell, s, 1)}; }
    Vec2 vector_value(int cell, const BarycentricCoords& b) const {
        return vector_value(cell, shape_eval(map_->kind, b));
    }

    std::array<double, 2> gradient(const CellMap& cm, int cell, const ShapeEval& s, int component = 0) const {
        std::array<double, 2> g{0.0, 0.0};
        for (int i = 0; i < s.n; ++i) {
            const double c = coeffs_[map_->global(cell, i, component)];
            g[0] += c * s.ref_grads[i][0];
            g[1] += c * s.ref_grads[i][1];
        }
        return cm.physical(g);
    }

    Mat2 vector_gradient(const CellMap& cm, int cell, const ShapeEval& s) const {
        return {gradient(cm, cell, s, 0), gradient(cm, cell, s, 1)};
    }

    /// True if every Dirichlet dof is exactly zero.
    bool satisfies_dirichlet() const {
        for (int d : map_->dirichlet_dofs) {
            if (coeffs_[d] != 0.0) return false;
        }
        return true;
    }

private:
    std::shared_ptr<const DofMap> map_;
    Vector coeffs_;
};

/// Nodal interpolation of a scalar (component 0) or vector function.
inline DiscreteField interpolate(std::shared_ptr<const DofMap> map, const std::function<double(Point)>& f) {
    DiscreteField out(map);
    for (int s = 0; s < map->n_scalar; ++s) out.coeffs()[s] = f(map->support_points[s]);
    return out;
}

inline DiscreteField interpolate(std::shared_ptr<const DofMap> map, const std::function<Vec2(Point)>& f) {
    if (map->components != 2) throw InvalidArgument("interpolate: vector function needs a 2-component map");
    DiscreteField out(map);
    for (int s = 0; s < map->n_scalar; ++s) {
        const Vec2 v = f(map->support_points[s]);
        out.coeffs()[s] = v[0];
        out.coeffs()[map->n_scalar + s] = v[1];
    }
    return out;
}

}  // namespace lgnc
