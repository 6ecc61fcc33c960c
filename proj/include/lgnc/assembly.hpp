/**
 * @file assembly.hpp
 * @brief Global matrices and load vectors of the Boussinesq scheme.
 *
 * Forms (phi = trial, psi = test):
 *   a_u(u, v)   = 2 nu (D(u), D(v)),  D(u) = (grad u + grad u^T) / 2
 *   b(v, q)     = -(div v, q)
 *   a_th(t, s)  = kappa (grad t, grad s)
 *   C_h(p, q)   = sum_K h_K^2 (grad p, grad q)_K
 */
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lgnc/characteristics.hpp"
#include "lgnc/elements.hpp"
#include "lgnc/field.hpp"
#include "lgnc/mesh.hpp"
#include "lgnc/sparse.hpp"

namespace lgnc {

namespace detail {

struct TabulatedRule {
    QuadratureRule rule;
    std::vector<ShapeEval> shapes;

    TabulatedRule(ElementKind kind, int degree) : rule(quadrature_rule(degree)) {
        for (const auto& b : rule.points) shapes.push_back(shape_eval(kind, b));
    }
};

inline std::vector<std::array<double, 2>> physical_grads(const CellMap& cm, const ShapeEval& s) {
    std::vector<std::array<double, 2>> g(s.n);
    for (int i = 0; i < s.n; ++i) g[i] = cm.physical(s.ref_grads[i]);
    return g;
}

/// Scalar local matrix sum_q w_q |K| f(grad_i, grad_j, v_i, v_j) scattered to
/// every component block pair (a, a) of a `components`-map.
template <class Kernel>
CsrMatrix assemble_scalar_form(const Mesh& mesh, const DofMap& map, int degree, Kernel&& kernel) {
    const TabulatedRule tab(map.kind, degree);
    const int nl = map.dofs_per_cell();
    TripletBuilder t(map.n_dofs, map.n_dofs);
    t.reserve(mesh.num_cells() * nl * nl * map.components);
    std::vector<double> local(nl * nl);
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const CellMap cm(mesh, c);
        std::fill(local.begin(), local.end(), 0.0);
        for (std::size_t q = 0; q < tab.rule.size(); ++q) {
            const auto& s = tab.shapes[q];
            const auto g = physical_grads(cm, s);
            const double w = tab.rule.weights[q] * cm.area;
            for (int i = 0; i < nl; ++i) {
                for (int j = 0; j < nl; ++j) local[i * nl + j] += w * kernel(c, g[i], g[j], s.values[i], s.values[j]);
            }
        }
        for (int comp = 0; comp < map.components; ++comp) {
            for (int i = 0; i < nl; ++i) {
                for (int j = 0; j < nl; ++j) t.add(map.global(c, i, comp), map.global(c, j, comp), local[i * nl + j]);
            }
        }
    }
    return t.build();
}

inline double dot2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return a[0] * b[0] + a[1] * b[1];
}

}  // namespace detail

/// Gram matrix of the basis; vector maps give two identical diagonal blocks.
inline SparseSymMatrix assemble_mass(const Mesh& mesh, const DofMap& map) {
    return SparseSymMatrix(detail::assemble_scalar_form(
        mesh, map, matrix_quadrature_degree(map.kind),
        [](int, const auto&, const auto&, double vi, double vj) { return vi * vj; }));
}

/// Unscaled (grad, grad) matrix.
inline SparseSymMatrix assemble_laplacian(const Mesh& mesh, const DofMap& map) {
    return SparseSymMatrix(detail::assemble_scalar_form(
        mesh, map, matrix_quadrature_degree(map.kind),
        [](int, const auto& gi, const auto& gj, double, double) { return detail::dot2(gi, gj); }));
}

inline SparseSymMatrix assemble_temperature_stiffness(const Mesh& mesh, const DofMap& t_map, double kappa) {
    return SparseSymMatrix(detail::assemble_scalar_form(
        mesh, t_map, matrix_quadrature_degree(t_map.kind),
        [kappa](int, const auto& gi, const auto& gj, double, double) { return kappa * detail::dot2(gi, gj); }));
}

inline SparseSymMatrix assemble_pressure_stabilization(const Mesh& mesh, const DofMap& q_map) {
    return SparseSymMatrix(detail::assemble_scalar_form(
        mesh, q_map, matrix_quadrature_degree(q_map.kind), [&mesh](int c, const auto& gi, const auto& gj, double, double) {
            const double hk = mesh.h_cell(c);
            return hk * hk * detail::dot2(gi, gj);
        }));
}

/// 2 nu (D(phi_j), D(phi_i)). For phi = psi_a e_c, psi_b e_d this is
/// nu [delta_cd grad psi_a . grad psi_b + d_d psi_a d_c psi_b].
inline SparseSymMatrix assemble_velocity_stiffness(const Mesh& mesh, const DofMap& v_map, double nu) {
    if (v_map.components != 2) throw InvalidArgument("assemble_velocity_stiffness: velocity map must have 2 components");
    const detail::TabulatedRule tab(v_map.kind, matrix_quadrature_degree(v_map.kind));
    const int nl = v_map.dofs_per_cell();
    TripletBuilder t(v_map.n_dofs, v_map.n_dofs);
    t.reserve(mesh.num_cells() * nl * nl * 4);
    std::vector<double> local(4 * nl * nl);
    auto at = [nl](int ci, int cj, int i, int j) { return ((ci * 2 + cj) * nl + i) * nl + j; };
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const CellMap cm(mesh, c);
        std::fill(local.begin(), local.end(), 0.0);
        for (std::size_t q = 0; q < tab.rule.size(); ++q) {
            const auto g = detail::physical_grads(cm, tab.shapes[q]);
            const double w = nu * tab.rule.weights[q] * cm.area;
            for (int i = 0; i < nl; ++i) {
                for (int j = 0; j < nl; ++j) {
                    const double lap = detail::dot2(g[i], g[j]);
                    for (int ci = 0; ci < 2; ++ci) {
                        for (int cj = 0; cj < 2; ++cj) {
                            // test i in component ci, trial j in component cj
                            local[at(ci, cj, i, j)] += w * ((ci == cj ? lap : 0.0) + g[j][ci] * g[i][cj]);
                        }
                    }
                }
            }
        }
        for (int ci = 0; ci < 2; ++ci) {
            for (int cj = 0; cj < 2; ++cj) {
                for (int i = 0; i < nl; ++i) {
                    for (int j = 0; j < nl; ++j) t.add(v_map.global(c, i, ci), v_map.global(c, j, cj), local[at(ci, cj, i, j)]);
                }
            }
        }
    }
    return SparseSymMatrix(t.build());
}

/// B with B_ij = -(div phi_j, psi_i): rows are pressure dofs, columns velocity dofs.
inline CsrMatrix assemble_divergence(const Mesh& mesh, const DofMap& v_map, const DofMap& q_map) {
    if (v_map.components != 2) throw InvalidArgument("assemble_divergence: velocity map must have 2 components");
    const int degree = std::max(v_map.kind.degree - 1 + q_map.kind.degree, 1);
    const auto rule = quadrature_rule(degree);
    const int nv = v_map.dofs_per_cell(), nq = q_map.dofs_per_cell();
    TripletBuilder t(q_map.n_dofs, v_map.n_dofs);
    t.reserve(mesh.num_cells() * nv * nq * 2);
    std::vector<double> local(2 * nq * nv);
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const CellMap cm(mesh, c);
        std::fill(local.begin(), local.end(), 0.0);
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const auto sv = shape_eval(v_map.kind, rule.points[k]);
            const auto sq = shape_eval(q_map.kind, rule.points[k]);
            const auto g = detail::physical_grads(cm, sv);
            const double w = rule.weights[k] * cm.area;
            for (int i = 0; i < nq; ++i) {
                for (int comp = 0; comp < 2; ++comp) {
                    for (int j = 0; j < nv; ++j) local[(comp * nq + i) * nv + j] -= w * sq.values[i] * g[j][comp];
                }
            }
        }
        for (int comp = 0; comp < 2; ++comp) {
            for (int i = 0; i < nq; ++i) {
                for (int j = 0; j < nv; ++j) t.add(q_map.global(c, i), v_map.global(c, j, comp), local[(comp * nq + i) * nv + j]);
            }
        }
    }
    return t.build();
}

/// (1, psi_i) for every dof of a scalar map.
inline Vector assemble_basis_integrals(const Mesh& mesh, const DofMap& map) {
    const detail::TabulatedRule tab(map.kind, matrix_quadrature_degree(map.kind));
    Vector out(map.n_dofs, 0.0);
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const double area = mesh.area(c);
        for (std::size_t q = 0; q < tab.rule.size(); ++q) {
            for (int i = 0; i < map.dofs_per_cell(); ++i) {
                out[map.global(c, i)] += tab.rule.weights[q] * area * tab.shapes[q].values[i];
            }
        }
    }
    return out;
}

/// Saddle point operator of one flow solve, unknowns ordered
/// [velocity (n_velocity), pressure (n_pressure), mean multiplier (1)]:
///
///   [ mass_scale M + A_u     B^T         0 ]
///   [ B                  -delta0 C_h     m ]
///   [ 0                       m^T        0 ]
///
/// with m_i = (1, psi_i). Velocity Dirichlet rows/columns are eliminated
/// symmetrically.
struct FlowSystem {
    SparseSymMatrix matrix;
    CsrMatrix divergence;     // B, unconstrained
    CsrMatrix stabilization;  // C_h (zero matrix when delta0 = 0)
    Vector pressure_mean;     // m
    Vector preconditioner;    // positive diagonal for MINRES
    std::vector<char> fixed;  // eliminated dofs of the full system
    int n_velocity = 0;
    int n_pressure = 0;
    double delta0 = 0.0;

    int size() const { return n_velocity + n_pressure + 1; }
    int pressure_offset() const { return n_velocity; }
    int multiplier_index() const { return n_velocity + n_pressure; }
};

inline double delta0_for(int k) { return k == 1 ? 1.0 : 0.0; }

/// General form with the velocity mass scaled by `mass_scale` (1/dt in the
/// scheme, 0 for the steady Stokes projection).
inline FlowSystem assemble_flow_operator(const Mesh& mesh, const DofMap& v_map, const DofMap& q_map, double nu,
                                         double mass_scale, int k) {
    if (k != 1 && k != 2) throw InvalidArgument("assemble_flow_operator: k must be 1 or 2");
    FlowSystem fs;
    fs.n_velocity = v_map.n_dofs;
    fs.n_pressure = q_map.n_dofs;
    fs.delta0 = delta0_for(k);
    const int po = fs.pressure_offset(), mi = fs.multiplier_index();

    const auto au = assemble_velocity_stiffness(mesh, v_map, nu);
    fs.divergence = assemble_divergence(mesh, v_map, q_map);
    fs.stabilization = assemble_pressure_stabilization(mesh, q_map).csr();
    fs.pressure_mean = assemble_basis_integrals(mesh, q_map);

    TripletBuilder t(fs.size(), fs.size());
    const auto& a = au.csr();
    for (int i = 0; i < a.rows(); ++i) {
        for (int p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) t.add(i, a.col_idx()[p], a.values()[p]);
    }
    if (mass_scale != 0.0) {
        const auto m = assemble_mass(mesh, v_map).csr();
        for (int i = 0; i < m.rows(); ++i) {
            for (int p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) t.add(i, m.col_idx()[p], mass_scale * m.values()[p]);
        }
    }
    const auto& b = fs.divergence;
    for (int i = 0; i < b.rows(); ++i) {
        for (int p = b.row_ptr()[i]; p < b.row_ptr()[i + 1]; ++p) {
            t.add(po + i, b.col_idx()[p], b.values()[p]);
            t.add(b.col_idx()[p], po + i, b.values()[p]);
        }
    }
    const auto& cmat = fs.stabilization;
    for (int i = 0; i < cmat.rows(); ++i) {
        // k = 2 keeps the diagonal pattern with exact zeros so every row exists
        for (int p = cmat.row_ptr()[i]; p < cmat.row_ptr()[i + 1]; ++p) {
            if (fs.delta0 != 0.0 || cmat.col_idx()[p] == i) {
                t.add(po + i, po + cmat.col_idx()[p], -fs.delta0 * cmat.values()[p]);
            }
        }
    }
    for (int i = 0; i < fs.n_pressure; ++i) {
        t.add(po + i, mi, fs.pressure_mean[i]);
        t.add(mi, po + i, fs.pressure_mean[i]);
    }
    t.add(mi, mi, 0.0);

    fs.fixed.assign(fs.size(), 0);
    for (int d : v_map.dirichlet_dofs) fs.fixed[d] = 1;
    fs.matrix = SparseSymMatrix(eliminate_dofs(t.build(), fs.fixed));

    // diagonal Schur complement approximation for the pressure block
    const Vector kd = fs.matrix.diagonal();
    fs.preconditioner.assign(fs.size(), 1.0);
    for (int i = 0; i < fs.n_velocity; ++i) fs.preconditioner[i] = kd[i] > 0.0 ? kd[i] : 1.0;
    const auto mass_p = assemble_mass(mesh, q_map).diagonal();
    double mult = 0.0;
    for (int i = 0; i < fs.n_pressure; ++i) {
        double s = fs.delta0 * cmat(i, i);
        for (int p = b.row_ptr()[i]; p < b.row_ptr()[i + 1]; ++p) {
            const int j = b.col_idx()[p];
            if (!fs.fixed[j]) s += b.values()[p] * b.values()[p] / fs.preconditioner[j];
        }
        if (!(s > 0.0)) s = mass_p[i];
        fs.preconditioner[po + i] = s;
        mult += fs.pressure_mean[i] * fs.pressure_mean[i] / s;
    }
    fs.preconditioner[mi] = mult > 0.0 ? mult : 1.0;
    return fs;
}

inline FlowSystem assemble_flow_system(const Mesh& mesh, const DofMap& v_map, const DofMap& q_map,
                                       const ProblemData& data, double dt, int k) {
    if (!(dt > 0.0)) throw InvalidArgument("assemble_flow_system: dt must be > 0");
    data.validate();
    return assemble_flow_operator(mesh, v_map, q_map, data.nu, 1.0 / dt, k);
}

/// Temperature operator mass_scale M + kappa A with Dirichlet elimination.
inline SparseSymMatrix assemble_temperature_system(const Mesh& mesh, const DofMap& t_map, double kappa,
                                                   double mass_scale) {
    TripletBuilder t(t_map.n_dofs, t_map.n_dofs);
    const auto a = assemble_temperature_stiffness(mesh, t_map, kappa).csr();
    for (int i = 0; i < a.rows(); ++i) {
        for (int p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) t.add(i, a.col_idx()[p], a.values()[p]);
    }
    if (mass_scale != 0.0) {
        const auto m = assemble_mass(mesh, t_map).csr();
        for (int i = 0; i < m.rows(); ++i) {
            for (int p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) t.add(i, m.col_idx()[p], mass_scale * m.values()[p]);
        }
    }
    return SparseSymMatrix(eliminate_dofs(t.build(), t_map.is_dirichlet));
}

/// Zeroes Dirichlet entries of a right-hand side (homogeneous lift).
inline void apply_dirichlet(const DofMap& map, std::span<double> rhs) {
    for (int d : map.dirichlet_dofs) rhs[d] = 0.0;
}

/// sum_q w_q |K| value(c, q, comp) psi_i(x_q) for a test map on the degree-5
/// rule; `value(point_index, component)` indexes cell-major quadrature points.
template <class ValueAt>
Vector assemble_pointwise_rhs(const Mesh& mesh, const DofMap& map, ValueAt&& value) {
    const detail::TabulatedRule tab(map.kind, kRhsQuadratureDegree);
    const std::size_t nq = tab.rule.size();
    Vector out(map.n_dofs, 0.0);
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const double area = mesh.area(c);
        for (std::size_t q = 0; q < nq; ++q) {
            const double w = tab.rule.weights[q] * area;
            for (int comp = 0; comp < map.components; ++comp) {
                const double v = value(c * nq + q, comp);
                for (int i = 0; i < map.dofs_per_cell(); ++i) out[map.global(c, i, comp)] += w * v * tab.shapes[q].values[i];
            }
        }
    }
    return out;
}

/// (f, psi_i) for a scalar function.
inline Vector assemble_load(const Mesh& mesh, const DofMap& map, const std::function<double(Point)>& f) {
    const auto pts = cell_quadrature_points(mesh, quadrature_rule(kRhsQuadratureDegree));
    return assemble_pointwise_rhs(mesh, map, [&](std::size_t i, int) { return f(mesh.to_physical(pts[i].cell, pts[i].bary)); });
}

/// (f, v_i) for a vector function.
inline Vector assemble_load(const Mesh& mesh, const DofMap& map, const std::function<Vec2(Point)>& f) {
    const auto pts = cell_quadrature_points(mesh, quadrature_rule(kRhsQuadratureDegree));
    std::vector<Vec2> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = f(mesh.to_physical(pts[i].cell, pts[i].bary));
    return assemble_pointwise_rhs(mesh, map, [&](std::size_t i, int comp) { return vals[i][comp]; });
}

/// Feet of the degree-5 quadrature points under X1(w, dt).
inline std::vector<Foot> transport_feet(const Mesh& mesh, const DiscreteField& w, double dt) {
    const auto pts = cell_quadrature_points(mesh, quadrature_rule(kRhsQuadratureDegree));
    return locate_feet(mesh, w, dt, pts);
}

/// (field o X1(w, dt), psi_i) given precomputed feet. `field` has the same
/// number of components as `map`.
inline Vector assemble_transport_rhs(const Mesh& mesh, const DofMap& map, const DiscreteField& field,
                                     std::span<const Foot> feet) {
    if (field.components() != map.components) throw InvalidArgument("assemble_transport_rhs: component mismatch");
    std::vector<ShapeEval> shapes(feet.size());
    for (std::size_t i = 0; i < feet.size(); ++i) shapes[i] = shape_eval(field.map().kind, feet[i].loc.bary);
    return assemble_pointwise_rhs(mesh, map, [&](std::size_t i, int comp) { return field.value(feet[i].loc.cell, shapes[i], comp); });
}

inline Vector assemble_transport_rhs(const Mesh& mesh, const DofMap& map, const DiscreteField& field,
                                     const DiscreteField& w, double dt) {
    const auto feet = transport_feet(mesh, w, dt);
    return assemble_transport_rhs(mesh, map, field, feet);
}

/// Scalar analytic field transported by a discrete velocity.
inline Vector assemble_transport_rhs(const Mesh& mesh, const DofMap& map, const std::function<double(Point)>& field,
                                     const DiscreteField& w, double dt) {
    const auto feet = transport_feet(mesh, w, dt);
    return assemble_pointwise_rhs(mesh, map, [&](std::size_t i, int) { return field(feet[i].point); });
}

/// (theta_prev beta(., t), v_i)
inline Vector assemble_buoyancy_rhs(const Mesh& mesh, const DofMap& v_map, const DiscreteField& theta_prev,
                                    const VectorFunction& beta, double t) {
    if (!beta) return Vector(v_map.n_dofs, 0.0);
    const auto rule = quadrature_rule(kRhsQuadratureDegree);
    const auto pts = cell_quadrature_points(mesh, rule);
    std::vector<ShapeEval> shapes;
    for (const auto& b : rule.points) shapes.push_back(shape_eval(theta_prev.map().kind, b));
    std::vector<Vec2> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double th = theta_prev.value(pts[i].cell, shapes[i % rule.size()]);
        const Vec2 be = beta(mesh.to_physical(pts[i].cell, pts[i].bary), t);
        vals[i] = {th * be[0], th * be[1]};
    }
    return assemble_pointwise_rhs(mesh, v_map, [&](std::size_t i, int comp) { return vals[i][comp]; });
}

/// Mesh plus the three spaces of the scheme: P_k vector velocity (zero trace),
/// P1 pressure, P_k temperature (zero trace).
struct Discretization {
    Mesh mesh;
    int k = 1;
    std::shared_ptr<const DofMap> velocity;
    std::shared_ptr<const DofMap> pressure;
    std::shared_ptr<const DofMap> temperature;
};

inline Discretization make_discretization(Mesh mesh, int k) {
    if (k != 1 && k != 2) throw InvalidArgument("make_discretization: k must be 1 or 2, got " + std::to_string(k));
    Discretization d;
    d.k = k;
    d.velocity = std::make_shared<const DofMap>(build_dof_map(mesh, ElementKind{k}, 2, true));
    d.pressure = std::make_shared<const DofMap>(build_dof_map(mesh, P1, 1, false));
    d.temperature = std::make_shared<const DofMap>(build_dof_map(mesh, ElementKind{k}, 1, true));
    d.mesh = std::move(mesh);
    return d;
}

/// (1, q_h) / |Omega|
inline double mean_value(const Mesh& mesh, const DiscreteField& q) {
    const auto m = assemble_basis_integrals(mesh, q.map());
    double s = 0.0;
    for (int i = 0; i < q.map().n_scalar; ++i) s += m[i] * q.coeffs()[i];
    return s / mesh.total_area();
}

/// Shifts a P1 pressure to zero mean (P1 basis sums to one).
inline void normalize_mean(const Mesh& mesh, DiscreteField& q) {
    const double mean = mean_value(mesh, q);
    for (double& c : q.coeffs()) c -= mean;
}

}  // namespace lgnc
