/**
 * @file projection.hpp
 * @brief Stokes-Poisson projection: the (stabilized) Stokes projection of a
 *        velocity/pressure pair together with the Ritz projection of a
 *        temperature, solved as two independent symmetric systems.
 */
#pragma once

#include <functional>

#include "lgnc/assembly.hpp"
#include "lgnc/linsolve.hpp"

namespace lgnc {

/// Time-frozen exact fields with the derivatives the projection needs.
struct ExactFields {
    std::function<Vec2(Point)> w;
    std::function<Mat2(Point)> grad_w;  // row i = grad of component i
    std::function<double(Point)> r;
    std::function<double(Point)> phi;
    std::function<Vec2(Point)> grad_phi;
};

struct ProjectionResult {
    DiscreteField u;
    DiscreteField p;
    DiscreteField theta;
    SolveReport flow;
    SolveReport temperature;
};

/// sum_K sum_q w_q |K| F(x_q, comp) . grad psi_i for the degree-5 rule.
/// `flux(point_index, comp)` returns a 2-vector per test component.
template <class Flux>
Vector assemble_gradient_rhs(const Mesh& mesh, const DofMap& map, Flux&& flux) {
    const auto rule = quadrature_rule(kRhsQuadratureDegree);
    std::vector<ShapeEval> shapes;
    for (const auto& b : rule.points) shapes.push_back(shape_eval(map.kind, b));
    const std::size_t nq = rule.size();
    Vector out(map.n_dofs, 0.0);
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const CellMap cm(mesh, c);
        for (std::size_t q = 0; q < nq; ++q) {
            const double w = rule.weights[q] * cm.area;
            for (int comp = 0; comp < map.components; ++comp) {
                const Vec2 f = flux(c * nq + q, comp);
                for (int i = 0; i < map.dofs_per_cell(); ++i) {
                    const auto g = cm.physical(shapes[q].ref_grads[i]);
                    out[map.global(c, i, comp)] += w * (f[0] * g[0] + f[1] * g[1]);
                }
            }
        }
    }
    return out;
}

/// Right-hand side A((w, r), (v_h, q_h)) of the flow part, laid out like a
/// FlowSystem vector (multiplier entry 0).
inline Vector stokes_projection_rhs(const Discretization& d, double nu, const ExactFields& ex) {
    const Mesh& mesh = d.mesh;
    const auto pts = cell_quadrature_points(mesh, quadrature_rule(kRhsQuadratureDegree));
    std::vector<Mat2> gw(pts.size());
    std::vector<double> rv(pts.size(), 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Point x = mesh.to_physical(pts[i].cell, pts[i].bary);
        gw[i] = ex.grad_w ? ex.grad_w(x) : Mat2{};
        if (ex.r) rv[i] = ex.r(x);
    }
    // test v = psi e_c: 2 nu D(w)_{c.} . grad psi - r d_c psi
    const Vector fv = assemble_gradient_rhs(mesh, *d.velocity, [&](std::size_t i, int c) {
        const Mat2& g = gw[i];
        const double d0 = nu * (g[c][0] + g[0][c]);
        const double d1 = nu * (g[c][1] + g[1][c]);
        return Vec2{d0 - (c == 0 ? rv[i] : 0.0), d1 - (c == 1 ? rv[i] : 0.0)};
    });
    // test q: -(div w, q)
    const Vector fq =
        assemble_pointwise_rhs(mesh, *d.pressure, [&](std::size_t i, int) { return -(gw[i][0][0] + gw[i][1][1]); });
    Vector rhs(fv);
    rhs.insert(rhs.end(), fq.begin(), fq.end());
    rhs.push_back(0.0);
    return rhs;
}

inline Vector poisson_projection_rhs(const Discretization& d, double kappa, const ExactFields& ex) {
    const Mesh& mesh = d.mesh;
    const auto pts = cell_quadrature_points(mesh, quadrature_rule(kRhsQuadratureDegree));
    std::vector<Vec2> gp(pts.size(), Vec2{0.0, 0.0});
    if (ex.grad_phi) {
        for (std::size_t i = 0; i < pts.size(); ++i) gp[i] = ex.grad_phi(mesh.to_physical(pts[i].cell, pts[i].bary));
    }
    return assemble_gradient_rhs(mesh, *d.temperature, [&](std::size_t i, int) {
        return Vec2{kappa * gp[i][0], kappa * gp[i][1]};
    });
}

/// Splits a FlowSystem solution into velocity and (zero mean) pressure.
inline std::pair<DiscreteField, DiscreteField> split_flow_solution(const Discretization& d, const FlowSystem& fs,
                                                                   const Vector& x) {
    DiscreteField u(d.velocity, Vector(x.begin(), x.begin() + fs.n_velocity));
    DiscreteField p(d.pressure, Vector(x.begin() + fs.pressure_offset(), x.begin() + fs.multiplier_index()));
    for (int dof : d.velocity->dirichlet_dofs) u.coeffs()[dof] = 0.0;
    normalize_mean(d.mesh, p);
    return {std::move(u), std::move(p)};
}

/// Solves A_h((w_h, r_h), (v, q)) + a_th(phi_h, psi) = A((w, r), (v, q)) + a_th(phi, psi).
/// The stabilization enters the left side only.
inline ProjectionResult stokes_poisson_project(const Discretization& d, const ProblemData& data, const ExactFields& ex,
                                               double tol = kDefaultSolverTol) {
    data.validate();
    ProjectionResult out;
    const FlowSystem fs = assemble_flow_operator(d.mesh, *d.velocity, *d.pressure, data.nu, 0.0, d.k);
    Vector frhs = stokes_projection_rhs(d, data.nu, ex);
    for (int i = 0; i < fs.size(); ++i) {
        if (fs.fixed[i]) frhs[i] = 0.0;
    }
    auto flow = solve_sym_indefinite(fs.matrix, frhs, tol, fs.preconditioner);
    auto [u, p] = split_flow_solution(d, fs, flow.x);
    out.u = std::move(u);
    out.p = std::move(p);
    out.flow = flow.report;

    const auto tsys = assemble_temperature_system(d.mesh, *d.temperature, data.kappa, 0.0);
    Vector trhs = poisson_projection_rhs(d, data.kappa, ex);
    apply_dirichlet(*d.temperature, trhs);
    auto temp = solve_spd(tsys, trhs, tol);
    out.theta = DiscreteField(d.temperature, std::move(temp.x));
    for (int dof : d.temperature->dirichlet_dofs) out.theta.coeffs()[dof] = 0.0;
    out.temperature = temp.report;
    return out;
}

}  // namespace lgnc
