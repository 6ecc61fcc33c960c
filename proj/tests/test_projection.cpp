#include <gtest/gtest.h>

#include <random>

#include "lgnc/verification.hpp"
#include "oracles.hpp"

using namespace lgnc;

namespace {

/// ExactFields that evaluate discrete fields at arbitrary points.
ExactFields fields_from(const Mesh& mesh, const DiscreteField* w, const DiscreteField* r, const DiscreteField* phi) {
    auto at = [&mesh](Point x) {
        const auto loc = locate_point(mesh, x, 0);
        if (!loc) throw std::runtime_error("point outside mesh");
        return *loc;
    };
    ExactFields ex;
    if (w) {
        ex.w = [=](Point x) {
            const auto l = at(x);
            return w->vector_value(l.cell, l.bary);
        };
        ex.grad_w = [=, &mesh](Point x) {
            const auto l = at(x);
            return w->vector_gradient(CellMap(mesh, l.cell), l.cell, shape_eval(w->map().kind, l.bary));
        };
    }
    if (r) {
        ex.r = [=](Point x) {
            const auto l = at(x);
            return r->value(l.cell, l.bary);
        };
    }
    if (phi) {
        ex.phi = [=](Point x) {
            const auto l = at(x);
            return phi->value(l.cell, l.bary);
        };
        ex.grad_phi = [=, &mesh](Point x) {
            const auto l = at(x);
            const auto g = phi->gradient(CellMap(mesh, l.cell), l.cell, shape_eval(phi->map().kind, l.bary));
            return Vec2{g[0], g[1]};
        };
    }
    return ex;
}

DiscreteField random_field(std::shared_ptr<const DofMap> map, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DiscreteField f(map);
    for (double& c : f.coeffs()) c = u(rng);
    for (int d : map->dirichlet_dofs) f.coeffs()[d] = 0.0;
    return f;
}

double max_abs_diff(const Vector& a, const Vector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(Projection, StableElementReproducesDiscreteTriple) {
    const auto d = make_discretization(oracle::jittered_square(3, 0.3, 5), 2);
    std::mt19937_64 rng(8);
    const auto w = random_field(d.velocity, rng);
    auto r = random_field(d.pressure, rng);
    const auto phi = random_field(d.temperature, rng);
    ProblemData data;
    data.nu = 0.6;
    data.kappa = 1.7;
    const auto pr = stokes_poisson_project(d, data, fields_from(d.mesh, &w, &r, &phi), 1e-13);
    normalize_mean(d.mesh, r);
    EXPECT_LE(max_abs_diff(pr.u.coeffs(), w.coeffs()), 1e-9);
    EXPECT_LE(max_abs_diff(pr.p.coeffs(), r.coeffs()), 1e-9);
    EXPECT_LE(max_abs_diff(pr.theta.coeffs(), phi.coeffs()), 1e-9);
}

TEST(Projection, TemperaturePartIsGalerkinIdentity) {
    for (int k : {1, 2}) {
        const auto d = make_discretization(oracle::jittered_square(4, 0.3, 6), k);
        std::mt19937_64 rng(9);
        const auto phi = random_field(d.temperature, rng);
        ProblemData data;
        const auto pr = stokes_poisson_project(d, data, fields_from(d.mesh, nullptr, nullptr, &phi), 1e-13);
        EXPECT_LE(max_abs_diff(pr.theta.coeffs(), phi.coeffs()), 1e-9) << "k = " << k;
        for (double c : pr.u.coeffs()) EXPECT_EQ(c, 0.0);
    }
}

TEST(Projection, ZeroFieldsGiveZero) {
    for (int k : {1, 2}) {
        const auto d = make_discretization(generate_unit_square(4), k);
        ExactFields ex;
        const auto pr = stokes_poisson_project(d, ProblemData{}, ex);
        for (double c : pr.u.coeffs()) EXPECT_EQ(c, 0.0);
        for (double c : pr.p.coeffs()) EXPECT_EQ(c, 0.0);
        for (double c : pr.theta.coeffs()) EXPECT_EQ(c, 0.0);
    }
}

TEST(Projection, OutputsSatisfyConstraints) {
    const auto mc = manufactured_case("trig");
    for (int k : {1, 2}) {
        const auto d = make_discretization(generate_unit_square(6), k);
        const auto pr = stokes_poisson_project(d, mc.problem_data(), mc.fields_at(0.0));
        EXPECT_TRUE(pr.u.satisfies_dirichlet());
        EXPECT_TRUE(pr.theta.satisfies_dirichlet());
        EXPECT_NEAR(mean_value(d.mesh, pr.p), 0.0, 1e-15);
    }
}

TEST(Projection, PoissonPartConvergesAtOrderK) {
    // phi = sin(pi x) sin(pi y) in the H1 norm
    const auto mc = manufactured_case("trig");
    for (int k : {1, 2}) {
        const auto t = projection_study(mc, k, {4, 8, 16});
        for (const auto& o : t.orders()) EXPECT_GE(o[2], k - 0.1) << "k = " << k;
    }
}

TEST(Projection, StableElementOrders) {
    const auto t = projection_study(manufactured_case("trig"), 2, {4, 8, 16});
    for (const auto& o : t.orders()) {
        EXPECT_GE(o[0], 1.85);
        EXPECT_GE(o[1], 2.85);
        EXPECT_GE(o[3], 2.85);
    }
}
