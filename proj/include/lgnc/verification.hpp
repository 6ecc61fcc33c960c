/**
 * @file verification.hpp
 * @brief Manufactured solutions, discrete-in-time error norms and
 *        convergence studies.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lgnc/assembly.hpp"
#include "lgnc/projection.hpp"
#include "lgnc/scheme.hpp"

namespace lgnc {

/// Exact (u, p, theta) with the derivatives needed for forcing and error
/// evaluation. f_u and f_theta satisfy the strong equations
///   du/dt + (u.grad)u - div(2 nu D(u)) + grad p - theta beta = f_u
///   dtheta/dt + u.grad theta - kappa lap theta = f_theta.
struct ManufacturedCase {
    std::string name;
    double nu = 1.0;
    double kappa = 1.0;
    VectorFunction u;
    std::function<Mat2(Point, double)> grad_u;
    VectorFunction dt_u;
    ScalarFunction p;
    ScalarFunction theta;
    VectorFunction grad_theta;
    ScalarFunction dt_theta;
    VectorFunction beta;
    VectorFunction f_u;
    ScalarFunction f_theta;

    ProblemData problem_data() const { return {nu, kappa, beta, f_u, f_theta}; }

    ExactFields fields_at(double t, bool with_pressure = true) const {
        ExactFields ex;
        ex.w = [this, t](Point x) { return u(x, t); };
        ex.grad_w = [this, t](Point x) { return grad_u(x, t); };
        if (with_pressure) ex.r = [this, t](Point x) { return p(x, t); };
        ex.phi = [this, t](Point x) { return theta(x, t); };
        ex.grad_phi = [this, t](Point x) { return grad_theta(x, t); };
        return ex;
    }
};

/// On (0,1)^2 with g(t) = cos t and amplitude A = 0.1:
///   u     = A g (sin^2(pi x) sin(2 pi y), -sin(2 pi x) sin^2(pi y))
///   p     = A g sin(2 pi x) sin(2 pi y)
///   theta = A g sin(pi x) sin(pi y)
/// with beta = (0, beta_y).
inline ManufacturedCase manufactured_case(const std::string& name, double nu = 1.0, double kappa = 1.0,
                                          double beta_y = 1.0) {
    if (name != "trig") throw InvalidArgument("manufactured_case: unknown case '" + name + "'");
    if (!(nu > 0.0) || !(kappa > 0.0)) throw InvalidArgument("manufactured_case: nu and kappa must be > 0");
    constexpr double pi = std::numbers::pi;
    constexpr double amp = 0.1;
    struct Trig {
        double s1x, c1x, s2x, c2x, s1y, c1y, s2y, c2y;
        explicit Trig(Point x)
            : s1x(std::sin(pi * x.x)), c1x(std::cos(pi * x.x)), s2x(std::sin(2 * pi * x.x)), c2x(std::cos(2 * pi * x.x)),
              s1y(std::sin(pi * x.y)), c1y(std::cos(pi * x.y)), s2y(std::sin(2 * pi * x.y)), c2y(std::cos(2 * pi * x.y)) {}
    };
    auto g = [](double t) { return amp * std::cos(t); };
    auto gp = [](double t) { return -amp * std::sin(t); };
    // spatial profiles (amplitude 1)
    auto u_sh = [](const Trig& s) { return Vec2{s.s1x * s.s1x * s.s2y, -s.s2x * s.s1y * s.s1y}; };
    auto grad_u_sh = [](const Trig& s) {
        return Mat2{{{pi * s.s2x * s.s2y, 2 * pi * s.s1x * s.s1x * s.c2y},
                     {-2 * pi * s.c2x * s.s1y * s.s1y, -pi * s.s2x * s.s2y}}};
    };
    auto lap_u_sh = [](const Trig& s) {
        return Vec2{2 * pi * pi * s.c2x * s.s2y - 4 * pi * pi * s.s1x * s.s1x * s.s2y,
                    4 * pi * pi * s.s2x * s.s1y * s.s1y - 2 * pi * pi * s.s2x * s.c2y};
    };
    auto grad_p_sh = [](const Trig& s) { return Vec2{2 * pi * s.c2x * s.s2y, 2 * pi * s.s2x * s.c2y}; };
    auto th_sh = [](const Trig& s) { return s.s1x * s.s1y; };
    auto grad_th_sh = [](const Trig& s) { return Vec2{pi * s.c1x * s.s1y, pi * s.s1x * s.c1y}; };

    ManufacturedCase mc;
    mc.name = name;
    mc.nu = nu;
    mc.kappa = kappa;
    mc.u = [=](Point x, double t) {
        const Vec2 v = u_sh(Trig(x));
        return Vec2{g(t) * v[0], g(t) * v[1]};
    };
    mc.grad_u = [=](Point x, double t) {
        Mat2 m = grad_u_sh(Trig(x));
        for (auto& row : m) {
            for (double& e : row) e *= g(t);
        }
        return m;
    };
    mc.dt_u = [=](Point x, double t) {
        const Vec2 v = u_sh(Trig(x));
        return Vec2{gp(t) * v[0], gp(t) * v[1]};
    };
    mc.p = [=](Point x, double t) {
        const Trig s(x);
        return g(t) * s.s2x * s.s2y;
    };
    mc.theta = [=](Point x, double t) { return g(t) * th_sh(Trig(x)); };
    mc.grad_theta = [=](Point x, double t) {
        const Vec2 v = grad_th_sh(Trig(x));
        return Vec2{g(t) * v[0], g(t) * v[1]};
    };
    mc.dt_theta = [=](Point x, double t) { return gp(t) * th_sh(Trig(x)); };
    mc.beta = [beta_y](Point, double) { return Vec2{0.0, beta_y}; };
    mc.f_u = [=](Point x, double t) {
        const Trig s(x);
        const double gt = g(t), gpt = gp(t);
        const Vec2 uu = u_sh(s);
        const Mat2 gu = grad_u_sh(s);
        const Vec2 lap = lap_u_sh(s);
        const Vec2 gpr = grad_p_sh(s);
        const double th = gt * th_sh(s);
        Vec2 f{};
        for (int i = 0; i < 2; ++i) {
            const double conv = gt * gt * (gu[i][0] * uu[0] + gu[i][1] * uu[1]);
            f[i] = gpt * uu[i] + conv - nu * gt * lap[i] + gt * gpr[i];
        }
        f[1] -= th * beta_y;
        return f;
    };
    mc.f_theta = [=](Point x, double t) {
        const Trig s(x);
        const double gt = g(t);
        const Vec2 uu = u_sh(s);
        const Vec2 gth = grad_th_sh(s);
        const double th = th_sh(s);
        return gp(t) * th + gt * gt * (uu[0] * gth[0] + uu[1] * gth[1]) + kappa * 2 * pi * pi * gt * th;
    };
    return mc;
}

/// Errors against the exact solution in the discrete-in-time norms:
/// l-inf over n = 0..N_T, l2 as (dt sum_{n=1}^{N_T} ||.||^2)^{1/2}.
struct NormReport {
    double err_u_linf_h1 = 0.0;
    double err_u_linf_l2 = 0.0;
    double err_th_linf_h1 = 0.0;
    double err_th_linf_l2 = 0.0;
    double err_p_l2l2 = 0.0;
    double err_dtu_l2l2 = 0.0;
    double err_dtth_l2l2 = 0.0;

    static constexpr int kCount = 7;
    std::array<double, kCount> values() const {
        return {err_u_linf_h1, err_u_linf_l2, err_th_linf_h1, err_th_linf_l2, err_p_l2l2, err_dtu_l2l2, err_dtth_l2l2};
    }
    static std::array<const char*, kCount> names() {
        return {"err_u_linf_h1", "err_u_linf_l2", "err_th_linf_h1", "err_th_linf_l2",
                "err_p_l2l2",    "err_dtu_l2l2",  "err_dtth_l2l2"};
    }
};

/// Single-time spatial errors.
struct SpatialErrors {
    double u_l2 = 0.0;
    double u_h1 = 0.0;  // full H1 norm
    double th_l2 = 0.0;
    double th_h1 = 0.0;
    double p_l2 = 0.0;
};

/// Squared-error accumulation over cells in a caller-given order so the
/// result can be cross-checked against a different traversal.
inline SpatialErrors spatial_errors(const Mesh& mesh, const DiscreteField* u, const DiscreteField* p,
                                    const DiscreteField* theta, const ExactFields& ex,
                                    const std::vector<int>* cell_order = nullptr) {
    const auto rule = quadrature_rule(kRhsQuadratureDegree);
    double u0 = 0, u1 = 0, t0 = 0, t1 = 0, p0 = 0;
    double p_shift = 0.0;
    if (p) p_shift = mean_value(mesh, *p);
    std::vector<ShapeEval> su, st, sp;
    for (const auto& b : rule.points) {
        if (u) su.push_back(shape_eval(u->map().kind, b));
        if (theta) st.push_back(shape_eval(theta->map().kind, b));
        if (p) sp.push_back(shape_eval(p->map().kind, b));
    }
    const int nc = static_cast<int>(mesh.num_cells());
    for (int idx = 0; idx < nc; ++idx) {
        const int c = cell_order ? (*cell_order)[idx] : idx;
        const CellMap cm(mesh, c);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double w = rule.weights[q] * cm.area;
            const Point x = mesh.to_physical(c, rule.points[q]);
            if (u) {
                const Vec2 uh = u->vector_value(c, su[q]);
                const Mat2 gh = u->vector_gradient(cm, c, su[q]);
                const Vec2 ue = ex.w(x);
                const Mat2 ge = ex.grad_w(x);
                for (int i = 0; i < 2; ++i) {
                    u0 += w * (uh[i] - ue[i]) * (uh[i] - ue[i]);
                    for (int j = 0; j < 2; ++j) u1 += w * (gh[i][j] - ge[i][j]) * (gh[i][j] - ge[i][j]);
                }
            }
            if (theta) {
                const double th = theta->value(c, st[q]);
                const auto gth = theta->gradient(cm, c, st[q]);
                const double te = ex.phi(x);
                const Vec2 gte = ex.grad_phi(x);
                t0 += w * (th - te) * (th - te);
                t1 += w * ((gth[0] - gte[0]) * (gth[0] - gte[0]) + (gth[1] - gte[1]) * (gth[1] - gte[1]));
            }
            if (p) {
                const double e = p->value(c, sp[q]) - p_shift - (ex.r ? ex.r(x) : 0.0);
                p0 += w * e * e;
            }
        }
    }
    return {std::sqrt(u0), std::sqrt(u0 + u1), std::sqrt(t0), std::sqrt(t0 + t1), std::sqrt(p0)};
}

/// L2 error of (a - b)/dt against exact time derivatives at t.
inline std::pair<double, double> backward_difference_errors(const Mesh& mesh, const State& cur, const State& prev,
                                                            double dt, const ManufacturedCase& mc, double t) {
    const auto rule = quadrature_rule(kRhsQuadratureDegree);
    std::vector<ShapeEval> su, st;
    for (const auto& b : rule.points) {
        su.push_back(shape_eval(cur.u.map().kind, b));
        st.push_back(shape_eval(cur.theta.map().kind, b));
    }
    double eu = 0.0, et = 0.0;
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const double area = mesh.area(c);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double w = rule.weights[q] * area;
            const Point x = mesh.to_physical(c, rule.points[q]);
            const Vec2 a = cur.u.vector_value(c, su[q]), b = prev.u.vector_value(c, su[q]);
            const Vec2 du = mc.dt_u(x, t);
            for (int i = 0; i < 2; ++i) {
                const double e = (a[i] - b[i]) / dt - du[i];
                eu += w * e * e;
            }
            const double e = (cur.theta.value(c, st[q]) - prev.theta.value(c, st[q])) / dt - mc.dt_theta(x, t);
            et += w * e * e;
        }
    }
    return {std::sqrt(eu), std::sqrt(et)};
}

/// Folds states n = 0, 1, ..., N_T (in order) into a NormReport.
class ErrorAccumulator {
public:
    ErrorAccumulator(const ManufacturedCase& mc, const Mesh& mesh, double dt) : mc_(mc), mesh_(mesh), dt_(dt) {}

    void add(const State& s) {
        const auto ex = mc_.fields_at(s.t);
        const bool with_p = s.n >= 1;
        const auto e = spatial_errors(mesh_, &s.u, with_p ? &s.p : nullptr, &s.theta, ex);
        r_.err_u_linf_h1 = std::max(r_.err_u_linf_h1, e.u_h1);
        r_.err_u_linf_l2 = std::max(r_.err_u_linf_l2, e.u_l2);
        r_.err_th_linf_h1 = std::max(r_.err_th_linf_h1, e.th_h1);
        r_.err_th_linf_l2 = std::max(r_.err_th_linf_l2, e.th_l2);
        if (with_p) {
            p_sum_ += dt_ * e.p_l2 * e.p_l2;
            if (!prev_) throw InvalidArgument("ErrorAccumulator: states must start at n = 0");
            const auto [du, dth] = backward_difference_errors(mesh_, s, *prev_, dt_, mc_, s.t);
            dtu_sum_ += dt_ * du * du;
            dtth_sum_ += dt_ * dth * dth;
        }
        prev_ = s;
        ++count_;
    }

    NormReport report() const {
        NormReport r = r_;
        r.err_p_l2l2 = std::sqrt(p_sum_);
        r.err_dtu_l2l2 = std::sqrt(dtu_sum_);
        r.err_dtth_l2l2 = std::sqrt(dtth_sum_);
        return r;
    }

    int count() const { return count_; }

private:
    const ManufacturedCase& mc_;
    const Mesh& mesh_;
    double dt_;
    NormReport r_;
    double p_sum_ = 0.0, dtu_sum_ = 0.0, dtth_sum_ = 0.0;
    std::optional<State> prev_;
    int count_ = 0;
};

inline NormReport error_norms(const std::vector<State>& states, const ManufacturedCase& mc, const Mesh& mesh, double dt) {
    ErrorAccumulator acc(mc, mesh, dt);
    for (const auto& s : states) acc.add(s);
    return acc.report();
}

/// Rules tying dt to the mesh size of each level.
enum class DtRuleKind { h_k, h_k1, fixed, stability_limit };

struct DtRule {
    DtRuleKind kind = DtRuleKind::h_k;
    double c = 0.1;

    double dt(double h, int k) const {
        switch (kind) {
            case DtRuleKind::h_k: return c * std::pow(h, k);
            case DtRuleKind::h_k1: return c * std::pow(h, k + 1);
            case DtRuleKind::fixed: return c;
            case DtRuleKind::stability_limit: return stability_limit_dt(c, h);
        }
        return c;
    }
};

struct StudyDiagnostics {
    int steps = 0;
    double max_divergence_residual = 0.0;
    double max_symmetry_defect = 0.0;
    double max_cfl_product = 0.0;
    int max_flow_iterations = 0;
    int max_temperature_iterations = 0;
};

struct ConvergenceRow {
    int level = 0;
    int n = 0;
    double h = 0.0;
    double dt = 0.0;
    NormReport errors;
    StudyDiagnostics diag;
};

/// Rows plus log(e_l / e_{l+1}) / log(r_l / r_{l+1}) where r is h (spatial
/// studies) or dt (temporal studies). orders[l] is empty for l = 0.
struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::vector<std::optional<std::array<double, NormReport::kCount>>> orders;
    bool temporal = false;

    void compute_orders() {
        orders.assign(rows.size(), std::nullopt);
        for (std::size_t l = 1; l < rows.size(); ++l) {
            const double ratio = temporal ? rows[l - 1].dt / rows[l].dt : rows[l - 1].h / rows[l].h;
            std::array<double, NormReport::kCount> o{};
            const auto a = rows[l - 1].errors.values(), b = rows[l].errors.values();
            for (int i = 0; i < NormReport::kCount; ++i) o[i] = std::log(a[i] / b[i]) / std::log(ratio);
            orders[l] = o;
        }
    }

    /// order of column `col` between the last two rows
    double final_order(int col) const { return (*orders.back())[col]; }
    double min_order(int col) const {
        double m = INFINITY;
        for (const auto& o : orders) {
            if (o) m = std::min(m, (*o)[col]);
        }
        return m;
    }
};

/// One scheme run with error accumulation; returns the row (level/n unset).
inline ConvergenceRow run_level(const ManufacturedCase& mc, const Discretization& disc, double dt, double T,
                                double solver_tol = kDefaultSolverTol,
                                const std::function<void(const State&)>& on_state = nullptr) {
    SchemeConfig cfg;
    cfg.k = disc.k;
    cfg.dt = dt;
    cfg.T = T;
    cfg.data = mc.problem_data();
    cfg.solver_tol = solver_tol;
    const Scheme scheme(disc, cfg);
    const State s0 = scheme.init_state([&](Point x) { return mc.u(x, 0.0); }, [&](Point x) { return mc.grad_u(x, 0.0); },
                                       [&](Point x) { return mc.theta(x, 0.0); },
                                       [&](Point x) { return mc.grad_theta(x, 0.0); });
    ErrorAccumulator acc(mc, disc.mesh, dt);
    ConvergenceRow row;
    row.h = disc.mesh.h();
    row.dt = dt;
    scheme.run(s0, [&](const State& s) {
        acc.add(s);
        auto& d = row.diag;
        if (s.n > 0) {
            d.steps = s.n;
            d.max_cfl_product = std::max(d.max_cfl_product, s.diag.cfl.product);
            d.max_flow_iterations = std::max(d.max_flow_iterations, s.diag.flow.iterations);
            d.max_temperature_iterations = std::max(d.max_temperature_iterations, s.diag.temperature.iterations);
        }
        d.max_divergence_residual = std::max(d.max_divergence_residual, s.diag.divergence_residual);
        d.max_symmetry_defect =
            std::max({d.max_symmetry_defect, s.diag.flow_symmetry_defect, s.diag.temperature_symmetry_defect});
        if (on_state) on_state(s);
    });
    row.errors = acc.report();
    return row;
}

/// Checks dt <= c0 h^{1/2} for every level before anything runs.
inline void check_stability_condition(const std::vector<std::pair<double, double>>& h_dt, double c0) {
    for (const auto& [h, dt] : h_dt) {
        if (dt > stability_limit_dt(c0, h) * (1.0 + 1e-12)) {
            throw InvalidArgument("stability condition dt <= c0 h^{1/2} violated: dt = " + std::to_string(dt) +
                                  ", h = " + std::to_string(h) + ", c0 h^{1/2} = " +
                                  std::to_string(stability_limit_dt(c0, h)));
        }
    }
}

/// Spatial study over unit-square meshes n in `levels`, dt from `rule`.
inline ConvergenceTable convergence_study(const ManufacturedCase& mc, int k, const std::vector<int>& levels,
                                          const DtRule& rule, double T, double c0 = 1.0,
                                          double solver_tol = kDefaultSolverTol) {
    if (levels.empty()) throw InvalidArgument("convergence_study: no levels");
    for (std::size_t l = 1; l < levels.size(); ++l) {
        if (levels[l] <= levels[l - 1]) throw InvalidArgument("convergence_study: levels must increase");
    }
    std::vector<std::pair<double, double>> h_dt;
    for (int n : levels) {
        const double h = std::sqrt(2.0) / n;
        h_dt.emplace_back(h, rule.dt(h, k));
    }
    check_stability_condition(h_dt, c0);
    ConvergenceTable table;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const auto disc = make_discretization(generate_unit_square(levels[l]), k);
        const double dt = rule.dt(disc.mesh.h(), k);
        ConvergenceRow row;
        try {
            row = run_level(mc, disc, dt, T, solver_tol);
        } catch (const std::exception& e) {
            throw std::runtime_error("level " + std::to_string(l) + " (n = " + std::to_string(levels[l]) +
                                     "): " + e.what());
        }
        row.level = static_cast<int>(l);
        row.n = levels[l];
        table.rows.push_back(row);
    }
    table.compute_orders();
    return table;
}

/// Temporal study: fixed mesh, dt halves (or follows `dts`).
inline ConvergenceTable temporal_study(const ManufacturedCase& mc, int k, int n, const std::vector<double>& dts,
                                       double T, double c0 = 1.0, double solver_tol = kDefaultSolverTol) {
    const auto disc = make_discretization(generate_unit_square(n), k);
    std::vector<std::pair<double, double>> h_dt;
    for (double dt : dts) h_dt.emplace_back(disc.mesh.h(), dt);
    check_stability_condition(h_dt, c0);
    ConvergenceTable table;
    table.temporal = true;
    for (std::size_t l = 0; l < dts.size(); ++l) {
        ConvergenceRow row;
        try {
            row = run_level(mc, disc, dts[l], T, solver_tol);
        } catch (const std::exception& e) {
            throw std::runtime_error("level " + std::to_string(l) + " (dt = " + std::to_string(dts[l]) + "): " + e.what());
        }
        row.level = static_cast<int>(l);
        row.n = n;
        table.rows.push_back(row);
    }
    table.compute_orders();
    return table;
}

/// Stokes-Poisson projection errors of the exact fields at time t.
struct ProjectionRow {
    int n = 0;
    double h = 0.0;
    SpatialErrors errors;
};

struct ProjectionTable {
    std::vector<ProjectionRow> rows;

    /// observed orders between consecutive rows for (u_h1, u_l2, th_h1, th_l2)
    std::vector<std::array<double, 4>> orders() const {
        std::vector<std::array<double, 4>> out;
        for (std::size_t l = 1; l < rows.size(); ++l) {
            const auto& a = rows[l - 1].errors;
            const auto& b = rows[l].errors;
            const double r = std::log(rows[l - 1].h / rows[l].h);
            out.push_back({std::log(a.u_h1 / b.u_h1) / r, std::log(a.u_l2 / b.u_l2) / r, std::log(a.th_h1 / b.th_h1) / r,
                           std::log(a.th_l2 / b.th_l2) / r});
        }
        return out;
    }
};

inline ProjectionTable projection_study(const ManufacturedCase& mc, int k, const std::vector<int>& levels, double t = 0.0,
                                        double solver_tol = kDefaultSolverTol) {
    ProjectionTable table;
    const auto ex = mc.fields_at(t);
    for (int n : levels) {
        const auto disc = make_discretization(generate_unit_square(n), k);
        const auto pr = stokes_poisson_project(disc, mc.problem_data(), ex, solver_tol);
        table.rows.push_back({n, disc.mesh.h(), spatial_errors(disc.mesh, &pr.u, &pr.p, &pr.theta, ex)});
    }
    return table;
}

}  // namespace lgnc
