#include <gtest/gtest.h>

#include <random>

#include "lgnc/linsolve.hpp"
#include "oracles.hpp"

using namespace lgnc;

namespace {

double rel_error(const Vector& x, const Eigen::VectorXd& ref) {
    return (oracle::to_eigen(x) - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

Vector random_vector(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (double& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST(Sparse, TripletBuilderSumsDuplicates) {
    TripletBuilder t(2, 3);
    t.add(1, 2, 1.5);
    t.add(0, 0, 1.0);
    t.add(1, 2, 0.25);
    t.add(0, 1, -2.0);
    const auto a = t.build();
    EXPECT_EQ(a.nnz(), 3u);
    EXPECT_EQ(a(1, 2), 1.75);
    EXPECT_EQ(a(0, 1), -2.0);
    EXPECT_EQ(a(1, 0), 0.0);
    const auto y = a * Vector{1.0, 2.0, 3.0};
    EXPECT_EQ(y[0], -3.0);
    EXPECT_EQ(y[1], 5.25);
    const auto z = a.transpose_multiply(Vector{1.0, 1.0});
    EXPECT_EQ(z, (Vector{1.0, -2.0, 1.75}));
}

TEST(Sparse, SymmetryDefect) {
    TripletBuilder t(2, 2);
    t.add(0, 0, 2.0);
    t.add(0, 1, 1.0);
    t.add(1, 0, 1.0);
    t.add(1, 1, 3.0);
    EXPECT_EQ(symmetry_defect(t.build()), 0.0);
    t.add(1, 0, 1e-6);
    const SparseSymMatrix s(t.build());
    EXPECT_GT(s.defect(), kSymmetryTol);
    EXPECT_FALSE(s.certified());
}

TEST(Sparse, EliminateDofsKeepsSymmetry) {
    const Mesh mesh = generate_unit_square(3);
    const auto map = build_dof_map(mesh, P1, 1, true);
    const auto a = eliminate_dofs(assemble_laplacian(mesh, map).csr(), map.is_dirichlet);
    EXPECT_EQ(symmetry_defect(a), 0.0);
    for (int d : map.dirichlet_dofs) {
        EXPECT_EQ(a(d, d), 1.0);
        for (int j = 0; j < a.rows(); ++j) {
            if (j != d) {
                EXPECT_EQ(a(d, j), 0.0);
                EXPECT_EQ(a(j, d), 0.0);
            }
        }
    }
}

TEST(Linsolve, CgMatchesDenseCholesky) {
    for (int k : {1, 2}) {
        const Mesh mesh = oracle::jittered_square(k == 1 ? 8 : 4, 0.3, 17);
        const auto map = build_dof_map(mesh, ElementKind{k}, 1, true);
        ASSERT_LE(map.n_dofs, 100);
        const auto a = assemble_temperature_system(mesh, map, 0.8, 50.0);
        const auto b = random_vector(map.n_dofs, 5);
        const auto res = solve_spd(a, b, 1e-12);
        const Eigen::VectorXd ref = oracle::dense(a).llt().solve(oracle::to_eigen(b));
        EXPECT_LE(rel_error(res.x, ref), 1e-8);
        EXPECT_LE(res.report.residual, 1e-12);
        EXPECT_EQ(res.report.method, "cg-jacobi");
    }
}

TEST(Linsolve, MinresMatchesDenseFactorization) {
    for (int k : {1, 2}) {
        const Mesh mesh = oracle::jittered_square(k == 1 ? 4 : 2, 0.3, 23);
        const auto d = make_discretization(mesh, k);
        ProblemData data;
        const auto fs = assemble_flow_system(d.mesh, *d.velocity, *d.pressure, data, 0.05, k);
        ASSERT_LE(fs.size(), 100);
        auto b = random_vector(fs.size(), 9);
        for (int i = 0; i < fs.size(); ++i) {
            if (fs.fixed[i]) b[i] = 0.0;
        }
        const auto res = solve_sym_indefinite(fs.matrix, b, 1e-12, fs.preconditioner);
        const Eigen::MatrixXd dm = oracle::dense(fs.matrix);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(dm);
        ASSERT_TRUE(lu.isInvertible()) << "k = " << k;
        const Eigen::VectorXd ref = lu.solve(oracle::to_eigen(b));
        EXPECT_LE(rel_error(res.x, ref), 1e-8) << "k = " << k;
        EXPECT_LE(relative_residual(fs.matrix, res.x, b), 1e-12);
    }
}

TEST(Linsolve, SmallSaddlePoint) {
    TripletBuilder t(2, 2);
    t.add(0, 0, 1.0);
    t.add(0, 1, 1.0);
    t.add(1, 0, 1.0);
    const SparseSymMatrix a(t.build());
    const auto res = solve_sym_indefinite(a, Vector{2.0, 1.0}, 1e-14);
    EXPECT_NEAR(res.x[0], 1.0, 1e-13);
    EXPECT_NEAR(res.x[1], 1.0, 1e-13);
}

TEST(Linsolve, ZeroRightHandSideGivesZero) {
    const Mesh mesh = generate_unit_square(3);
    const auto map = build_dof_map(mesh, P1, 1, true);
    const auto a = assemble_temperature_system(mesh, map, 1.0, 1.0);
    const Vector zero(map.n_dofs, 0.0);
    EXPECT_EQ(solve_spd(a, zero).x, zero);
    EXPECT_EQ(solve_sym_indefinite(a, zero).x, zero);
}

TEST(Linsolve, WarmStartAtSolutionNeedsNoIterations) {
    const Mesh mesh = generate_unit_square(4);
    const auto map = build_dof_map(mesh, P1, 1, true);
    const auto a = assemble_temperature_system(mesh, map, 1.0, 10.0);
    const auto b = random_vector(map.n_dofs, 1);
    const auto first = solve_spd(a, b, 1e-12);
    const auto again = solve_spd(a, b, 1e-10, first.x);
    EXPECT_EQ(again.report.iterations, 0);
}

TEST(Linsolve, DimensionMismatchIsRejected) {
    const Mesh mesh = generate_unit_square(2);
    const auto map = build_dof_map(mesh, P1, 1, true);
    const auto a = assemble_temperature_system(mesh, map, 1.0, 1.0);
    EXPECT_THROW(solve_spd(a, Vector(3, 1.0)), InvalidArgument);
    EXPECT_THROW(solve_sym_indefinite(a, Vector(3, 1.0)), InvalidArgument);
}
