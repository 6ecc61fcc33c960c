#include <gtest/gtest.h>

#include <random>

#include "lgnc/assembly.hpp"
#include "lgnc/characteristics.hpp"
#include "oracles.hpp"

using namespace lgnc;

namespace {

std::shared_ptr<const DofMap> velocity_map(const Mesh& mesh, int k, bool bc) {
    return std::make_shared<const DofMap>(build_dof_map(mesh, ElementKind{k}, 2, bc));
}

DiscreteField random_velocity(const std::shared_ptr<const DofMap>& map, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DiscreteField w(map);
    for (double& c : w.coeffs()) c = u(rng);
    for (int d : map->dirichlet_dofs) w.coeffs()[d] = 0.0;
    return w;
}

}  // namespace

TEST(Certificate, IdentityGradient) {
    const Mesh mesh = generate_unit_square(4);
    const auto w = interpolate(velocity_map(mesh, 1, false),
                               std::function<Vec2(Point)>([](Point p) { return Vec2{p.x, p.y}; }));
    EXPECT_NEAR(w1inf_seminorm(mesh, w), 1.0, 1e-14);
    const auto ok = check_cfl(mesh, w, 0.2);
    EXPECT_TRUE(ok.ok);
    EXPECT_NEAR(ok.product, 0.2, 1e-14);
    EXPECT_FALSE(check_cfl(mesh, w, 0.4).ok);
}

TEST(Certificate, RowSumNorm) {
    EXPECT_EQ(row_sum_norm(Mat2{{{1.0, -2.0}, {0.5, 0.5}}}), 3.0);
    EXPECT_EQ(row_sum_norm(Mat2{{{0.0, 0.0}, {-4.0, 1.0}}}), 5.0);
}

TEST(Jacobian, ClosedForms) {
    EXPECT_EQ(jacobian(Mat2{}, 0.3), 1.0);
    EXPECT_NEAR(jacobian(Mat2{{{1.0, 0.0}, {0.0, 1.0}}}, 0.1), 0.81, 1e-15);
    const Mesh mesh = generate_unit_square(3);
    const auto w = interpolate(velocity_map(mesh, 2, false),
                               std::function<Vec2(Point)>([](Point p) { return Vec2{p.x, p.y}; }));
    EXPECT_NEAR(jacobian(mesh, w, 0.1, 4, {0.2, 0.3, 0.5}), 0.81, 1e-14);
}

TEST(Jacobian, BoundedUnderCertificateAtRandomPoints) {
    const Mesh mesh = oracle::jittered_square(6, 0.3, 31);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k : {1, 2}) {
        const auto map = velocity_map(mesh, k, true);
        for (int f = 0; f < 10; ++f) {
            const auto w = random_velocity(map, rng);
            const double dt = 0.25 / w1inf_seminorm(mesh, w) * u(rng);
            ASSERT_TRUE(check_cfl(mesh, w, dt).ok);
            for (int s = 0; s < 100; ++s) {
                double a = u(rng), b = u(rng);
                if (a + b > 1.0) {
                    a = 1.0 - a;
                    b = 1.0 - b;
                }
                const int c = static_cast<int>(u(rng) * mesh.num_cells()) % static_cast<int>(mesh.num_cells());
                // P2 gradients are sampled at the certificate's own quadrature points only
                const BarycentricCoords bary =
                    k == 1 ? BarycentricCoords{1.0 - a - b, a, b} : quadrature_rule(5).points[s % 7];
                const double j = jacobian(mesh, w, dt, c, bary);
                EXPECT_GE(j, 0.5);
                EXPECT_LE(j, 1.5);
            }
        }
    }
}

TEST(Jacobian, RowSumCertificateAllowsIsotropicExpansionAboveThreeHalves) {
    // dt grad w = -I/4 satisfies dt |w|_{1,inf} = 1/4 in the row-sum norm
    EXPECT_NEAR(jacobian(Mat2{{{-2.5, 0.0}, {0.0, -2.5}}}, 0.1), 1.5625, 1e-15);
}

TEST(Feet, ZeroVelocityIsBitwiseIdentity) {
    const Mesh mesh = oracle::jittered_square(5, 0.3, 3);
    const auto tmap = std::make_shared<const DofMap>(build_dof_map(mesh, P2, 1, true));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DiscreteField theta(tmap);
    for (double& c : theta.coeffs()) c = u(rng);
    const DiscreteField w(velocity_map(mesh, 2, true));
    const auto pts = cell_quadrature_points(mesh, quadrature_rule(5));
    const auto composed = evaluate_composed(mesh, theta, w, 0.5, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(composed[i], theta.value(pts[i].cell, pts[i].bary));
}

TEST(Feet, ConstantFieldStaysConstant) {
    const Mesh mesh = oracle::jittered_square(5, 0.3, 3);
    const auto tmap = std::make_shared<const DofMap>(build_dof_map(mesh, P1, 1, false));
    const auto theta = interpolate(tmap, std::function<double(Point)>([](Point) { return 2.5; }));
    std::mt19937_64 rng(2);
    const auto w = random_velocity(velocity_map(mesh, 1, true), rng);
    const double dt = 0.25 / w1inf_seminorm(mesh, w);
    const auto pts = cell_quadrature_points(mesh, quadrature_rule(5));
    for (double v : evaluate_composed(mesh, theta, w, dt, pts)) EXPECT_NEAR(v, 2.5, 1e-14);
}

TEST(Feet, ConstantVelocityShiftsLinearField) {
    const Mesh mesh = oracle::jittered_square(6, 0.3, 12);
    const double c = 0.3, dt = 0.01;
    const auto pts = cell_quadrature_points(mesh, quadrature_rule(5));
    const std::function<double(Point)> field = [](Point p) { return p.x; };
    const auto tmap = std::make_shared<const DofMap>(build_dof_map(mesh, P1, 1, false));
    const auto theta = interpolate(tmap, field);
    int checked = 0;
    for (const auto& q : pts) {
        const Point x = mesh.to_physical(q.cell, q.bary);
        if (x.x < c * dt + 1e-3) continue;
        const Foot f = locate_foot(mesh, foot(x, Vec2{c, 0.0}, dt), q.cell);
        EXPECT_NEAR(field(f.point), x.x - c * dt, 1e-15);
        EXPECT_NEAR(theta.value(f.loc.cell, f.loc.bary), x.x - c * dt, 1e-14);
        ++checked;
    }
    EXPECT_GT(checked, 0);
}

TEST(Feet, ZeroTraceVelocityKeepsBoundaryPointsInside) {
    const Mesh mesh = oracle::jittered_square(5, 0.3, 14);
    std::mt19937_64 rng(4);
    for (int k : {1, 2}) {
        const auto w = random_velocity(velocity_map(mesh, k, true), rng);
        const double dt = 0.25 / w1inf_seminorm(mesh, w);
        for (auto [c, e] : mesh.boundary_edges()) {
            for (double s : {0.0, 0.25, 0.5, 0.75}) {
                BarycentricCoords b{0, 0, 0};
                b[(e + 1) % 3] = s;
                b[(e + 2) % 3] = 1.0 - s;
                const Point x = mesh.to_physical(c, b);
                EXPECT_NO_THROW(locate_foot(mesh, foot(x, w.vector_value(c, b), dt), c));
            }
        }
    }
}

TEST(Feet, FarOutsideThrows) {
    const Mesh mesh = generate_unit_square(4);
    EXPECT_THROW(locate_foot(mesh, {1.1, 0.5}, 0), FootOutside);
    const Foot clamped = locate_foot(mesh, {1.0 + 1e-11, 0.5}, 0);
    EXPECT_EQ(clamped.point.x, 1.0);
}
