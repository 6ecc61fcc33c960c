#include <gtest/gtest.h>

#include <cmath>

#include "lgnc/verification.hpp"
#include "oracles.hpp"

using namespace lgnc;

namespace {

constexpr double kPi = 3.14159265358979323846;

State manufactured_initial(const Scheme& s, const ManufacturedCase& mc) {
    return s.init_state([&](Point x) { return mc.u(x, 0.0); }, [&](Point x) { return mc.grad_u(x, 0.0); },
                        [&](Point x) { return mc.theta(x, 0.0); }, [&](Point x) { return mc.grad_theta(x, 0.0); });
}

SchemeConfig manufactured_config(const ManufacturedCase& mc, int k, double dt, double T) {
    SchemeConfig cfg;
    cfg.k = k;
    cfg.dt = dt;
    cfg.T = T;
    cfg.data = mc.problem_data();
    return cfg;
}

}  // namespace

TEST(Scheme, StepCountIsFloor) {
    SchemeConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 0.3;
    EXPECT_EQ(cfg.num_steps(), 3);
    cfg.T = 0.3;
    cfg.dt = 0.1;
    EXPECT_EQ(cfg.num_steps(), 3);
    cfg.T = 0.05;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg.T = 1.0;
    cfg.k = 3;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(Scheme, StabilityLimit) {
    EXPECT_DOUBLE_EQ(stability_limit_dt(0.5, 0.04), 0.1);
    const DtRule rule{DtRuleKind::stability_limit, 2.0};
    EXPECT_DOUBLE_EQ(rule.dt(0.25, 1), 1.0);
}

TEST(Scheme, ZeroDataKeepsZeroState) {
    for (int k : {1, 2}) {
        const auto d = make_discretization(generate_unit_square(4), k);
        SchemeConfig cfg;
        cfg.k = k;
        cfg.dt = 0.1;
        cfg.T = 0.5;
        const Scheme s(d, cfg);
        const auto states = s.run(s.zero_state());
        ASSERT_EQ(states.size(), 6u);
        for (const auto& st : states) {
            for (double c : st.u.coeffs()) EXPECT_EQ(c, 0.0);
            for (double c : st.p.coeffs()) EXPECT_EQ(c, 0.0);
            for (double c : st.theta.coeffs()) EXPECT_EQ(c, 0.0);
        }
        EXPECT_NEAR(states.back().t, 0.5, 1e-15);
    }
}

TEST(Scheme, ZeroFlowReducesToBackwardEulerHeat) {
    for (int k : {1, 2}) {
        const Mesh mesh = oracle::jittered_square(5, 0.3, 19);
        const auto d = make_discretization(mesh, k);
        SchemeConfig cfg;
        cfg.k = k;
        cfg.dt = 0.02;
        cfg.T = 0.02;
        cfg.data.kappa = 0.7;
        cfg.solver_tol = 1e-13;
        const Scheme s(d, cfg);
        const State s0 = s.init_state([](Point) { return Vec2{0.0, 0.0}; }, [](Point) { return Mat2{}; },
                                      [](Point x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); },
                                      [](Point x) {
                                          return Vec2{kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y),
                                                      kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
                                      });
        const State s1 = s.step(s0);
        for (double c : s1.u.coeffs()) EXPECT_EQ(c, 0.0);

        // (M/dt + kappa K) theta1 = M theta0 / dt, assembled densely from exact element integrals
        const auto& tm = *d.temperature;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(tm.n_dofs, tm.n_dofs), kk = m;
        for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
            const auto e = oracle::element_oracle(k, mesh.vertex(c, 0), mesh.vertex(c, 1), mesh.vertex(c, 2));
            for (int i = 0; i < tm.dofs_per_cell(); ++i) {
                for (int j = 0; j < tm.dofs_per_cell(); ++j) {
                    m(tm.global(c, i), tm.global(c, j)) += e.mass(i, j);
                    kk(tm.global(c, i), tm.global(c, j)) += e.stiffness(i, j);
                }
            }
        }
        Eigen::MatrixXd a = m / cfg.dt + cfg.data.kappa * kk;
        Eigen::VectorXd b = m * oracle::to_eigen(s0.theta.coeffs()) / cfg.dt;
        for (int dof : tm.dirichlet_dofs) {
            a.row(dof).setZero();
            a.col(dof).setZero();
            a(dof, dof) = 1.0;
            b[dof] = 0.0;
        }
        const Eigen::VectorXd ref = a.partialPivLu().solve(b);
        const double err = (oracle::to_eigen(s1.theta.coeffs()) - ref).cwiseAbs().maxCoeff();
        EXPECT_LE(err, 1e-8 * ref.cwiseAbs().maxCoeff()) << "k = " << k;
    }
}

TEST(Scheme, SolveOrderDoesNotMatter) {
    const auto mc = manufactured_case("trig");
    for (int k : {1, 2}) {
        const auto d = make_discretization(generate_unit_square(6), k);
        const Scheme s(d, manufactured_config(mc, k, 0.01, 0.05));
        State cur = manufactured_initial(s, mc);
        for (int n = 0; n < 3; ++n) {
            const State a = s.step(cur, SolveOrder::flow_first);
            const State b = s.step(cur, SolveOrder::temperature_first);
            EXPECT_EQ(a.u.coeffs(), b.u.coeffs());
            EXPECT_EQ(a.p.coeffs(), b.p.coeffs());
            EXPECT_EQ(a.theta.coeffs(), b.theta.coeffs());
            cur = a;
        }
    }
}

TEST(Scheme, RunsAreBitwiseReproducible) {
    const auto mc = manufactured_case("trig");
    const auto d = make_discretization(generate_unit_square(6), 1);
    const Scheme s(d, manufactured_config(mc, 1, 0.02, 0.1));
    const auto a = s.run(manufactured_initial(s, mc));
    const auto b = s.run(manufactured_initial(s, mc));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        EXPECT_EQ(a[n].u.coeffs(), b[n].u.coeffs());
        EXPECT_EQ(a[n].p.coeffs(), b[n].p.coeffs());
        EXPECT_EQ(a[n].theta.coeffs(), b[n].theta.coeffs());
    }
}

TEST(Scheme, DivergenceIdentityAndSymmetryOnEveryStep) {
    const auto mc = manufactured_case("trig");
    for (int k : {1, 2}) {
        const auto d = make_discretization(generate_unit_square(k == 1 ? 16 : 8), k);
        const Scheme s(d, manufactured_config(mc, k, 0.01, 0.03));
        const State s0 = manufactured_initial(s, mc);
        EXPECT_LE(s0.diag.divergence_residual, 1e-9);
        s.run(s0, [&](const State& st) {
            EXPECT_LE(st.diag.divergence_residual, 1e-9) << "step " << st.n;
            EXPECT_LE(st.diag.flow_symmetry_defect, kSymmetryTol);
            EXPECT_LE(st.diag.temperature_symmetry_defect, kSymmetryTol);
            EXPECT_TRUE(st.u.satisfies_dirichlet());
            EXPECT_TRUE(st.theta.satisfies_dirichlet());
            if (st.n > 0) EXPECT_LE(st.diag.divergence_residual, 10 * 1e-10 * st.diag.flow_rhs_norm);
        });
    }
}

TEST(Scheme, CflViolationAborts) {
    const auto mc = manufactured_case("trig");
    const auto d = make_discretization(generate_unit_square(4), 1);
    const Scheme s(d, manufactured_config(mc, 1, 5.0, 5.0));
    try {
        s.step(manufactured_initial(s, mc));
        FAIL() << "expected CflViolation";
    } catch (const CflViolation& e) {
        EXPECT_GT(e.product(), 0.25);
        EXPECT_NE(std::string(e.what()).find("dt*|u_h|_{1,inf}"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("> 1/4"), std::string::npos);
    }
}

TEST(Scheme, CflWarnPolicyContinues) {
    const auto mc = manufactured_case("trig");
    const auto d = make_discretization(generate_unit_square(4), 1);
    auto cfg = manufactured_config(mc, 1, 3.0, 3.0);
    cfg.cfl_policy = CflPolicy::warn;
    const Scheme s(d, cfg);
    const State s1 = s.step(manufactured_initial(s, mc));
    EXPECT_FALSE(s1.diag.cfl.ok);
}

TEST(Scheme, RejectsMismatchedDegree) {
    const auto d = make_discretization(generate_unit_square(2), 1);
    SchemeConfig cfg;
    cfg.k = 2;
    EXPECT_THROW(Scheme(d, cfg), InvalidArgument);
}
