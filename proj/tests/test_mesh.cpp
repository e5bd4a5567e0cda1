#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rlxa/mesh.hpp"

using namespace rlxa;

namespace {

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST(Mesh, IntervalTwoCells) {
  const Mesh m = build_mesh(Interval{0.0, 1.0}, 2);
  ASSERT_EQ(m.num_nodes(), 3);
  EXPECT_DOUBLE_EQ(m.nodes[0][0], 0.0);
  EXPECT_DOUBLE_EQ(m.nodes[1][0], 0.5);
  EXPECT_DOUBLE_EQ(m.nodes[2][0], 1.0);
  EXPECT_EQ(m.boundary_nodes, (std::vector<int>{0, 2}));
  EXPECT_DOUBLE_EQ(m.h_max, 0.5);
}

TEST(Mesh, UnitSquareSingleCell) {
  const Mesh m = build_mesh(Rectangle{0.0, 1.0, 0.0, 1.0}, 1);
  EXPECT_EQ(m.num_nodes(), 4);
  EXPECT_EQ(m.cells.size(), 2u);
  EXPECT_EQ(m.boundary_nodes.size(), 4u);
}

TEST(Mesh, RejectsBadInput) {
  EXPECT_THROW(build_mesh(Interval{0.0, 1.0}, 0), std::invalid_argument);
  EXPECT_THROW(build_mesh(Interval{1.0, 1.0}, 4), std::invalid_argument);
  EXPECT_THROW(build_mesh(Rectangle{0.0, 1.0, 2.0, 1.0}, 4), std::invalid_argument);
}

TEST(Mesh, BoundaryAndVolumes) {
  for (int n : {1, 3, 7}) {
    const Mesh m = build_mesh(Rectangle{-1.0, 2.0, 0.0, 0.5}, n);
    EXPECT_EQ(static_cast<int>(m.boundary_nodes.size()), 4 * n);
    for (int b : m.boundary_nodes) {
      EXPECT_GE(b, 0);
      EXPECT_LT(b, m.num_nodes());
    }
    for (int c = 0; c < static_cast<int>(m.cells.size()); ++c) EXPECT_GT(m.cell_measure(c), 0.0);
  }
}

TEST(Assembly, IntervalTwoCellsExact) {
  const Operators ops = assemble(build_mesh(Interval{0.0, 1.0}, 2));
  Eigen::MatrixXd M(3, 3), K(3, 3);
  M << 1.0 / 6, 1.0 / 12, 0, 1.0 / 12, 1.0 / 3, 1.0 / 12, 0, 1.0 / 12, 1.0 / 6;
  K << 2, -2, 0, -2, 4, -2, 0, -2, 2;
  EXPECT_LT(rel_diff(Eigen::MatrixXd(ops.mass), M), 1e-15);
  EXPECT_LT(rel_diff(Eigen::MatrixXd(ops.stiffness), K), 1e-15);
}

TEST(Assembly, IntervalBoundaryMassIsEndpointDiagonal) {
  for (int n : {1, 2, 9}) {
    const Operators ops = assemble(build_mesh(Interval{0.0, 3.0}, n));
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n + 1, n + 1);
    B(0, 0) = B(n, n) = 1.0;
    EXPECT_EQ(Eigen::MatrixXd(ops.boundary_mass), B);
  }
}

TEST(Assembly, MatchesDenseQuadrature) {
  std::vector<Domain> domains{Interval{0.0, 1.0}, Interval{-2.0, 5.0}, Rectangle{0.0, 1.0, 0.0, 1.0},
                              Rectangle{-1.0, 1.0, 0.0, 3.0}};
  for (const auto& d : domains) {
    for (int n : {1, 2, 5, 6}) {
      const Mesh mesh = build_mesh(d, n);
      if (mesh.num_nodes() > 50) continue;
      const Operators ops = assemble(mesh);
      const oracle::DenseOps o = oracle::assemble(mesh);
      EXPECT_LT(rel_diff(Eigen::MatrixXd(ops.mass), o.M), 1e-12);
      EXPECT_LT(rel_diff(Eigen::MatrixXd(ops.stiffness), o.K), 1e-12);
      EXPECT_LT(rel_diff(Eigen::MatrixXd(ops.boundary_mass), o.B), 1e-12);
      EXPECT_LT((ops.lumped_mass - o.vertex_weight).cwiseAbs().maxCoeff(), 1e-13);
      std::vector<int> bn = mesh.boundary_nodes;
      std::sort(bn.begin(), bn.end());
      EXPECT_EQ(bn, o.boundary);
    }
  }
}

TEST(Assembly, SymmetryKernelAndDefiniteness) {
  for (const Domain& d : std::vector<Domain>{Interval{0.0, 1.0}, Rectangle{0.0, 2.0, 0.0, 1.0}}) {
    const Mesh mesh = build_mesh(d, 6);
    const Operators ops = assemble(mesh);
    const Eigen::MatrixXd M(ops.mass), K(ops.stiffness), B(ops.boundary_mass);
    EXPECT_EQ((M - M.transpose()).norm(), 0.0);
    EXPECT_EQ((K - K.transpose()).norm(), 0.0);
    EXPECT_EQ((B - B.transpose()).norm(), 0.0);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.num_nodes());
    EXPECT_LT((K * ones).cwiseAbs().maxCoeff(), 1e-13 * K.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(M), ek(K), eb(B), ea(K + B);
    EXPECT_GT(em.eigenvalues().minCoeff(), 0.0);
    EXPECT_GT(ek.eigenvalues().minCoeff(), -1e-12);
    EXPECT_GT(eb.eigenvalues().minCoeff(), -1e-12);
    const int rank_b = static_cast<int>((eb.eigenvalues().array() > 1e-12).count());
    EXPECT_EQ(rank_b, static_cast<int>(mesh.boundary_nodes.size()));
    // ‖·‖₁ is a norm: K + M_Γ has trivial kernel.
    EXPECT_GT(ea.eigenvalues().minCoeff(), 1e-6);
  }
}

TEST(Norms, H1Examples) {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 16);
  const auto& nm = disc->norms;
  const int n = disc->size();
  EXPECT_EQ(nm.h1(Vec::Zero(n)), 0.0);
  EXPECT_NEAR(nm.h1(Vec::Ones(n)), std::sqrt(2.0), 1e-14);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = disc->mesh.nodes[i][0];
  EXPECT_NEAR(nm.h1(x), std::sqrt(2.0), 1e-13);
  EXPECT_THROW((void)nm.h1(Vec::Zero(n + 1)), std::invalid_argument);
}

TEST(Norms, PhaseSpaceAndExtendedForms) {
  const auto disc = make_discretization(Rectangle{0.0, 1.0, 0.0, 1.0}, 4);
  const auto& nm = disc->norms;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const int n = disc->size();
  Vec u(n), v(n);
  for (int i = 0; i < n; ++i) {
    u[i] = g(rng);
    v[i] = g(rng);
  }
  const double eps = 0.3;
  EXPECT_NEAR(nm.hyp_sq(u, v, eps), nm.h1_sq(u) + eps * nm.l2_sq(v), 1e-12);
  EXPECT_NEAR(nm.h1_sq(u), nm.grad_sq(u) + nm.boundary_sq(u), 1e-12);
  const double ext = nm.ext_sq(u, disc->boundary_part(u), v, disc->boundary_part(v), eps);
  EXPECT_NEAR(ext - nm.hyp_sq(u, v, eps), nm.boundary_sq(u) + eps * nm.boundary_sq(v), 1e-11);
}

TEST(Norms, DiscreteLaplacianDefinition) {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 10);
  const auto& ops = disc->ops;
  const int n = disc->size();
  Vec u(n), ut(n);
  for (int i = 0; i < n; ++i) {
    const double x = disc->mesh.nodes[i][0];
    u[i] = std::cos(2.0 * x);
    ut[i] = x * x;
  }
  const Vec lap = disc->norms.laplacian(u, ut);
  const Vec lhs = ops.mass * lap;
  const Vec rhs = -(ops.stiffness * u + ops.boundary_mass * (u + ut));
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(disc->norms.h2_sq(u, ut), disc->norms.h1_sq(u) + disc->norms.l2_sq(lap), 1e-10);
  EXPECT_NEAR(disc->norms.regular_norm(u, ut),
              std::sqrt(disc->norms.h2_sq(u, ut)) + disc->norms.h1(ut), 1e-12);
}
