#include <gtest/gtest.h>

#include <set>

#include "lgnc/assembly.hpp"
#include "oracles.hpp"

using namespace lgnc;

namespace {

/// Global-to-local permutation of the single-cell dof map.
std::vector<int> local_order(const DofMap& map) { return map.cell_to_global[0]; }

}  // namespace

TEST(Quadrature, ExactOnMonomialsUpToDegree) {
    for (int d = 1; d <= 6; ++d) {
        const auto rule = quadrature_rule(d);
        double wsum = 0.0;
        for (double w : rule.weights) {
            EXPECT_GT(w, 0.0);
            wsum += w;
        }
        EXPECT_NEAR(wsum, 1.0, 1e-15);
        for (int a = 0; a <= rule.exact_degree; ++a) {
            for (int b = 0; a + b <= rule.exact_degree; ++b) {
                for (int c = 0; a + b + c <= rule.exact_degree; ++c) {
                    double q = 0.0;
                    for (std::size_t i = 0; i < rule.size(); ++i) {
                        const auto& l = rule.points[i];
                        q += rule.weights[i] * std::pow(l[0], a) * std::pow(l[1], b) * std::pow(l[2], c);
                    }
                    EXPECT_NEAR(q, oracle::integrate_monomial({a, b, c}, 1.0), 1e-15)
                        << "degree " << d << " monomial " << a << b << c;
                }
            }
        }
    }
}

TEST(Quadrature, DegreeThreeUsesDegreeFourRule) {
    const auto r = quadrature_rule(3);
    EXPECT_EQ(r.exact_degree, 4);
    EXPECT_EQ(r.size(), 6u);
    EXPECT_EQ(quadrature_rule(5).size(), 7u);
}

TEST(Quadrature, RejectsDegreeAboveSix) { EXPECT_THROW(quadrature_rule(7), Unsupported); }

TEST(Shape, P2ValuesAtCentroid) {
    const auto s = shape_eval(P2, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.values[i], -1.0 / 9, 1e-15);
    for (int i = 3; i < 6; ++i) EXPECT_NEAR(s.values[i], 4.0 / 9, 1e-15);
}

TEST(Shape, KroneckerAtNodesAndPartitionOfUnity) {
    for (ElementKind kind : {P1, P2}) {
        const auto nodes = local_nodes(kind);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const auto s = shape_eval(kind, nodes[j]);
            for (int i = 0; i < s.n; ++i) EXPECT_NEAR(s.values[i], i == static_cast<int>(j) ? 1.0 : 0.0, 1e-15);
        }
        const auto s = shape_eval(kind, {0.2, 0.3, 0.5});
        double sum = 0.0, gx = 0.0, gy = 0.0;
        for (int i = 0; i < s.n; ++i) {
            sum += s.values[i];
            gx += s.ref_grads[i][0];
            gy += s.ref_grads[i][1];
        }
        EXPECT_NEAR(sum, 1.0, 1e-15);
        EXPECT_NEAR(gx, 0.0, 1e-14);
        EXPECT_NEAR(gy, 0.0, 1e-14);
    }
}

TEST(Shape, GradientsMatchFiniteDifferences) {
    const double eps = 1e-6;
    for (ElementKind kind : {P1, P2}) {
        const double xi = 0.27, eta = 0.31;
        const auto s = shape_eval(kind, {1 - xi - eta, xi, eta});
        const auto sx1 = shape_eval(kind, {1 - xi - eps - eta, xi + eps, eta});
        const auto sx0 = shape_eval(kind, {1 - xi + eps - eta, xi - eps, eta});
        const auto sy1 = shape_eval(kind, {1 - xi - eta - eps, xi, eta + eps});
        const auto sy0 = shape_eval(kind, {1 - xi - eta + eps, xi, eta - eps});
        for (int i = 0; i < s.n; ++i) {
            EXPECT_NEAR(s.ref_grads[i][0], (sx1.values[i] - sx0.values[i]) / (2 * eps), 1e-8);
            EXPECT_NEAR(s.ref_grads[i][1], (sy1.values[i] - sy0.values[i]) / (2 * eps), 1e-8);
        }
    }
}

TEST(CellMapTest, PhysicalGradientOfCoordinates) {
    const Mesh m({{0.1, 0.2}, {1.3, 0.5}, {0.4, 1.7}}, {{0, 1, 2}});
    const CellMap cm(m, 0);
    EXPECT_NEAR(cm.area, m.area(0), 1e-15);
    // x = sum_i x_i l_i, so grad x = sum_i x_i grad l_i = (1, 0)
    const auto s = shape_eval(P1, {0.3, 0.3, 0.4});
    std::array<double, 2> gx{0, 0}, gy{0, 0};
    for (int i = 0; i < 3; ++i) {
        const auto g = cm.physical(s.ref_grads[i]);
        const Point p = m.vertex(0, i);
        gx[0] += p.x * g[0];
        gx[1] += p.x * g[1];
        gy[0] += p.y * g[0];
        gy[1] += p.y * g[1];
    }
    EXPECT_NEAR(gx[0], 1.0, 1e-14);
    EXPECT_NEAR(gx[1], 0.0, 1e-14);
    EXPECT_NEAR(gy[0], 0.0, 1e-14);
    EXPECT_NEAR(gy[1], 1.0, 1e-14);
}

TEST(ReferenceMatrices, P1ClosedForms) {
    const Mesh ref = oracle::reference_triangle();
    const auto map = build_dof_map(ref, P1, 1, false);
    const auto m = oracle::dense(assemble_mass(ref, map));
    const auto k = oracle::dense(assemble_laplacian(ref, map));
    Eigen::Matrix3d m_expected, k_expected;
    m_expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    m_expected /= 24.0;
    k_expected << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
    EXPECT_LE((m - m_expected).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((k - k_expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ReferenceMatrices, MatchSymbolicIntegration) {
    const Mesh ref = oracle::reference_triangle();
    for (int degree : {1, 2}) {
        const auto map = build_dof_map(ref, ElementKind{degree}, 1, false);
        const auto m = oracle::dense(assemble_mass(ref, map));
        const auto k = oracle::dense(assemble_laplacian(ref, map));
        const auto o = oracle::element_oracle(degree, {0, 0}, {1, 0}, {0, 1});
        const auto g = local_order(map);
        for (int i = 0; i < map.dofs_per_cell(); ++i) {
            for (int j = 0; j < map.dofs_per_cell(); ++j) {
                EXPECT_NEAR(m(g[i], g[j]), o.mass(i, j), 1e-13) << "degree " << degree;
                EXPECT_NEAR(k(g[i], g[j]), o.stiffness(i, j), 1e-13) << "degree " << degree;
            }
        }
    }
}

TEST(DofMapTest, P2CountsOnTwoByTwoMesh) {
    const Mesh m = generate_unit_square(2);
    const auto s = build_dof_map(m, P2, 1, true);
    EXPECT_EQ(s.n_scalar, 9 + 16);
    EXPECT_EQ(s.dirichlet_dofs.size(), 16u);
    const auto v = build_dof_map(m, P2, 2, true);
    EXPECT_EQ(v.n_dofs, 50);
    EXPECT_EQ(v.dirichlet_dofs.size(), 32u);
    EXPECT_EQ(v.global(0, 4, 1), 25 + v.cell_to_global[0][4]);
    const auto free = build_dof_map(m, P2, 1, false);
    EXPECT_TRUE(free.dirichlet_dofs.empty());
}

TEST(DofMapTest, SharedEdgesShareDofs) {
    const Mesh m = oracle::jittered_square(4, 0.2, 1);
    const auto map = build_dof_map(m, P2, 1, true);
    // every edge dof's support point is the midpoint of its edge in each cell using it
    for (int c = 0; c < static_cast<int>(m.num_cells()); ++c) {
        for (int e = 0; e < 3; ++e) {
            const auto [i, j] = kP2Edges[e];
            const Point mid = 0.5 * (m.vertex(c, i) + m.vertex(c, j));
            const Point sp = map.support_points[map.cell_to_global[c][3 + e]];
            EXPECT_NEAR(sp.x, mid.x, 1e-15);
            EXPECT_NEAR(sp.y, mid.y, 1e-15);
        }
    }
    std::set<int> seen;
    for (const auto& g : map.cell_to_global) seen.insert(g.begin(), g.end());
    EXPECT_EQ(static_cast<int>(seen.size()), map.n_scalar);
}

TEST(DofMapTest, RejectsBadArguments) {
    const Mesh m = generate_unit_square(2);
    EXPECT_THROW(build_dof_map(m, ElementKind{3}, 1, true), InvalidArgument);
    EXPECT_THROW(build_dof_map(m, P1, 3, true), InvalidArgument);
}
