/**
 * @file scheme.hpp
 * @brief First-order Lagrange-Galerkin time stepping for the Boussinesq
 *        system. Each step performs one symmetric flow solve and one SPD
 *        temperature solve; both read only the previous state, so they are
 *        independent of each other.
 */
#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lgnc/assembly.hpp"
#include "lgnc/characteristics.hpp"
#include "lgnc/linsolve.hpp"
#include "lgnc/projection.hpp"

namespace lgnc {

enum class CflPolicy { abort, warn };

struct SchemeConfig {
    int k = 1;
    double dt = 0.1;
    double T = 1.0;
    ProblemData data;
    double solver_tol = kDefaultSolverTol;
    CflPolicy cfl_policy = CflPolicy::abort;

    /// floor(T / dt), robust to the last-ulp error of the division
    int num_steps() const { return static_cast<int>(std::floor(T / dt * (1.0 + 1e-12))); }

    void validate() const {
        if (k != 1 && k != 2) throw InvalidArgument("SchemeConfig: k must be 1 or 2");
        if (!(dt > 0.0)) throw InvalidArgument("SchemeConfig: dt must be > 0");
        if (num_steps() < 1) {
            throw InvalidArgument("SchemeConfig: floor(T/dt) must be >= 1 (T = " + std::to_string(T) +
                                  ", dt = " + std::to_string(dt) + ")");
        }
        data.validate();
    }
};

struct StepDiagnostics {
    CflCertificate cfl;
    SolveReport flow;
    SolveReport temperature;
    double divergence_residual = 0.0;  // max_i |b(u_h, q_i) - delta0 C_h(p_h, q_i)|
    double flow_rhs_norm = 0.0;
    double flow_symmetry_defect = 0.0;
    double temperature_symmetry_defect = 0.0;
};

struct State {
    int n = 0;
    double t = 0.0;
    DiscreteField u;
    DiscreteField p;
    DiscreteField theta;
    StepDiagnostics diag;
};

enum class SolveOrder { flow_first, temperature_first };

/// Owns the step-independent matrices for one (mesh, k, dt, nu, kappa). The
/// discretization is referenced, not copied, and must outlive the scheme.
class Scheme {
public:
    Scheme(const Discretization& disc, SchemeConfig config)
        : disc_(disc), config_(std::move(config)) {
        config_.validate();
        if (disc_.k != config_.k) throw InvalidArgument("Scheme: discretization k differs from config k");
        flow_ = assemble_flow_system(disc_.mesh, *disc_.velocity, *disc_.pressure, config_.data, config_.dt, config_.k);
        temperature_ = assemble_temperature_system(disc_.mesh, *disc_.temperature, config_.data.kappa, 1.0 / config_.dt);
    }

    const SchemeConfig& config() const { return config_; }
    const Discretization& discretization() const { return disc_; }
    const FlowSystem& flow_system() const { return flow_; }
    const SparseSymMatrix& temperature_system() const { return temperature_; }

    /// Initial state from the Stokes-Poisson projection of (u0, 0, theta0);
    /// all three components are kept.
    State init_state(const std::function<Vec2(Point)>& u0, const std::function<Mat2(Point)>& grad_u0,
                     const std::function<double(Point)>& theta0, const std::function<Vec2(Point)>& grad_theta0) const {
        ExactFields ex{u0, grad_u0, nullptr, theta0, grad_theta0};
        auto proj = stokes_poisson_project(disc_, config_.data, ex, config_.solver_tol);
        State s;
        s.n = 0;
        s.t = 0.0;
        s.u = std::move(proj.u);
        s.p = std::move(proj.p);
        s.theta = std::move(proj.theta);
        s.diag.flow = proj.flow;
        s.diag.temperature = proj.temperature;
        s.diag.cfl = check_cfl(disc_.mesh, s.u, config_.dt);
        s.diag.divergence_residual = divergence_residual(s.u, s.p);
        s.diag.flow_symmetry_defect = flow_.matrix.defect();
        s.diag.temperature_symmetry_defect = temperature_.defect();
        return s;
    }

    State zero_state() const {
        State s;
        s.u = DiscreteField(disc_.velocity);
        s.p = DiscreteField(disc_.pressure);
        s.theta = DiscreteField(disc_.temperature);
        return s;
    }

    /// One step n-1 -> n.
    State step(const State& prev, SolveOrder order = SolveOrder::flow_first) const {
        const Mesh& mesh = disc_.mesh;
        const double dt = config_.dt;
        State next;
        next.n = prev.n + 1;
        next.t = next.n * dt;
        next.diag.cfl = check_cfl(mesh, prev.u, dt);
        if (!next.diag.cfl.ok && config_.cfl_policy == CflPolicy::abort) {
            std::ostringstream msg;
            msg.precision(6);
            msg << "step " << next.n << ": dt*|u_h|_{1,inf} = " << next.diag.cfl.product << " > 1/4 (dt = " << dt
                << ", |u_h|_{1,inf} = " << next.diag.cfl.w_w1inf << ")";
            throw CflViolation(msg.str(), next.diag.cfl.product);
        }
        const auto feet = transport_feet(mesh, prev.u, dt);
        next.diag.flow_symmetry_defect = flow_.matrix.defect();
        next.diag.temperature_symmetry_defect = temperature_.defect();
        if (order == SolveOrder::flow_first) {
            solve_flow(prev, feet, next);
            solve_temperature(prev, feet, next);
        } else {
            solve_temperature(prev, feet, next);
            solve_flow(prev, feet, next);
        }
        next.diag.divergence_residual = divergence_residual(next.u, next.p);
        return next;
    }

    /// Runs N_T steps from `initial`, calling observer(state) for n = 0..N_T.
    template <class Observer>
    void run(State initial, Observer&& observer) const {
        observer(static_cast<const State&>(initial));
        State cur = std::move(initial);
        const int steps = config_.num_steps();
        for (int n = 1; n <= steps; ++n) {
            try {
                cur = step(cur);
            } catch (const CflViolation&) {
                throw;
            } catch (const FootOutside& e) {
                throw FootOutside("step " + std::to_string(n) + ": " + e.what());
            } catch (const SolverFailure& e) {
                throw SolverFailure("step " + std::to_string(n) + ": " + e.what(), e.iterations(), e.residual());
            }
            observer(static_cast<const State&>(cur));
        }
    }

    std::vector<State> run(State initial) const {
        std::vector<State> out;
        run(std::move(initial), [&](const State& s) { out.push_back(s); });
        return out;
    }

    /// max_i |(B u - delta0 C p)_i|
    double divergence_residual(const DiscreteField& u, const DiscreteField& p) const {
        const Vector bu = flow_.divergence * u.coeffs();
        const Vector cp = flow_.stabilization * p.coeffs();
        double m = 0.0;
        for (std::size_t i = 0; i < bu.size(); ++i) m = std::max(m, std::abs(bu[i] - flow_.delta0 * cp[i]));
        return m;
    }

private:
    void solve_flow(const State& prev, std::span<const Foot> feet, State& next) const {
        const Mesh& mesh = disc_.mesh;
        const DofMap& vm = *disc_.velocity;
        const double t = next.t;
        Vector rhs = assemble_transport_rhs(mesh, vm, prev.u, feet);
        for (double& v : rhs) v /= config_.dt;
        const Vector buoy = assemble_buoyancy_rhs(mesh, vm, prev.theta, config_.data.beta, t);
        const Vector load = config_.data.f_u
                                ? assemble_load(mesh, vm, std::function<Vec2(Point)>([&](Point x) { return config_.data.f_u(x, t); }))
                                : Vector(vm.n_dofs, 0.0);
        for (int i = 0; i < vm.n_dofs; ++i) rhs[i] += buoy[i] + load[i];
        rhs.resize(flow_.size(), 0.0);
        for (int i = 0; i < flow_.size(); ++i) {
            if (flow_.fixed[i]) rhs[i] = 0.0;
        }
        Vector x0(prev.u.coeffs());
        x0.insert(x0.end(), prev.p.coeffs().begin(), prev.p.coeffs().end());
        x0.push_back(0.0);
        auto sol = solve_sym_indefinite(flow_.matrix, rhs, config_.solver_tol, flow_.preconditioner, std::move(x0));
        next.diag.flow = sol.report;
        next.diag.flow_rhs_norm = norm2(rhs);
        auto [u, p] = split_flow_solution(disc_, flow_, sol.x);
        next.u = std::move(u);
        next.p = std::move(p);
    }

    void solve_temperature(const State& prev, std::span<const Foot> feet, State& next) const {
        const Mesh& mesh = disc_.mesh;
        const DofMap& tm = *disc_.temperature;
        const double t = next.t;
        Vector rhs = assemble_transport_rhs(mesh, tm, prev.theta, feet);
        for (double& v : rhs) v /= config_.dt;
        if (config_.data.f_theta) {
            const Vector load =
                assemble_load(mesh, tm, std::function<double(Point)>([&](Point x) { return config_.data.f_theta(x, t); }));
            for (int i = 0; i < tm.n_dofs; ++i) rhs[i] += load[i];
        }
        apply_dirichlet(tm, rhs);
        auto sol = solve_spd(temperature_, rhs, config_.solver_tol, prev.theta.coeffs());
        next.diag.temperature = sol.report;
        next.theta = DiscreteField(disc_.temperature, std::move(sol.x));
        for (int d : tm.dirichlet_dofs) next.theta.coeffs()[d] = 0.0;
    }

    const Discretization& disc_;
    SchemeConfig config_;
    FlowSystem flow_;
    SparseSymMatrix temperature_;
};

/// dt = c0 * h^{d/4} with d = 2
inline double stability_limit_dt(double c0, double h) { return c0 * std::sqrt(h); }

}  // namespace lgnc
