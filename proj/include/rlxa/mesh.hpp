#pragma once

#include <array>
#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace rlxa {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

struct Interval {
  double a = 0.0;
  double b = 1.0;
};

struct Rectangle {
  double ax = 0.0;
  double bx = 1.0;
  double ay = 0.0;
  double by = 1.0;
};

using Domain = std::variant<Interval, Rectangle>;

/// Uniform simplicial mesh of an interval (dim 1) or a rectangle (dim 2).
///
/// Cells store dim+1 node indices; in 1D the third entry is unused (-1).
/// Boundary edges are only populated in 2D; in 1D the boundary is the two
/// endpoint nodes.
struct Mesh {
  int dim = 1;
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<int, 3>> cells;
  std::vector<std::array<int, 2>> boundary_edges;
  std::vector<int> boundary_nodes;
  double h_max = 0.0;

  [[nodiscard]] int num_nodes() const { return static_cast<int>(nodes.size()); }
  [[nodiscard]] int nodes_per_cell() const { return dim + 1; }
  [[nodiscard]] double cell_measure(int c) const;
};

/// Throws std::invalid_argument for degenerate domains or n < 1.
Mesh build_mesh(const Domain& domain, int n);

/// Assembled P1 operators. All matrices are symmetric.
struct Operators {
  SpMat mass;           // ∫_Ω χᵢχⱼ
  SpMat stiffness;      // ∫_Ω ∇χᵢ·∇χⱼ
  SpMat boundary_mass;  // ∫_Γ χᵢχⱼ
  Vec lumped_mass;      // row sums of `mass`, nodal quadrature weights
  std::vector<int> boundary_nodes;

  [[nodiscard]] int size() const { return static_cast<int>(mass.rows()); }
  /// K + M_Γ, the form behind ‖·‖₁².
  [[nodiscard]] SpMat robin() const { return stiffness + boundary_mass; }
  /// M + M_Γ, the damping form of the dynamic boundary condition.
  [[nodiscard]] SpMat damping() const { return mass + boundary_mass; }
  [[nodiscard]] double domain_measure() const { return lumped_mass.sum(); }
};

Operators assemble(const Mesh& mesh);

/// Quadratic forms behind every norm used by the solvers and functionals.
class NormSuite {
 public:
  explicit NormSuite(const Operators& ops);

  [[nodiscard]] int size() const { return static_cast<int>(mass_.rows()); }

  [[nodiscard]] double l2_sq(const Vec& u) const;        // ‖u‖²
  [[nodiscard]] double l2_dot(const Vec& u, const Vec& v) const;
  [[nodiscard]] double boundary_sq(const Vec& u) const;  // ‖u‖²_{L²(Γ)}
  [[nodiscard]] double boundary_dot(const Vec& u, const Vec& v) const;
  [[nodiscard]] double grad_sq(const Vec& u) const;      // ‖∇u‖²
  [[nodiscard]] double h1_sq(const Vec& u) const;        // ‖∇u‖² + ‖u‖²_{L²(Γ)}
  [[nodiscard]] double h1(const Vec& u) const;
  [[nodiscard]] double lumped_dot(const Vec& u, const Vec& v) const;
  [[nodiscard]] double lumped_sq(const Vec& u) const;

  /// ‖u‖₁² + ε‖v‖².
  [[nodiscard]] double hyp_sq(const Vec& u, const Vec& v, double eps) const;

  /// ‖u‖₁² + ‖γ‖²_{L²(Γ)} + ε(‖v‖² + ‖δ‖²_{L²(Γ)}) on 𝒳_ε; only boundary
  /// entries of γ and δ matter.
  [[nodiscard]] double ext_sq(const Vec& u, const Vec& gamma, const Vec& v, const Vec& delta, double eps) const;

  /// Discrete Laplacian with flux supplied by the dynamic boundary condition:
  /// M Δ_h u = −(K u + M_Γ(u + u_t)).
  [[nodiscard]] Vec laplacian(const Vec& u, const Vec& u_t) const;
  /// ‖u‖₁² + ‖Δ_h u‖².
  [[nodiscard]] double h2_sq(const Vec& u, const Vec& u_t) const;
  /// ‖u‖₂,h + ‖u_t‖₁, the discrete 𝒟_ε norm.
  [[nodiscard]] double regular_norm(const Vec& u, const Vec& u_t) const;

  [[nodiscard]] Vec solve_mass(const Vec& rhs) const;
  /// sqrt(rᵀ M⁻¹ r), the M-weighted dual norm of a load vector.
  [[nodiscard]] double dual_norm(const Vec& r) const;

  void check_size(const Vec& u) const;

 private:
  SpMat mass_;
  SpMat stiffness_;
  SpMat boundary_mass_;
  Vec lumped_;
  std::shared_ptr<const Eigen::SimplicialLDLT<SpMat>> mass_solver_;
};

/// Mesh, operators and norms for one experiment. Immutable after construction.
struct Discretization {
  Mesh mesh;
  Operators ops;
  NormSuite norms;

  explicit Discretization(Mesh m);
  [[nodiscard]] int size() const { return mesh.num_nodes(); }
  /// Nodal vector that keeps boundary entries of `u` and zeroes the rest.
  [[nodiscard]] Vec boundary_part(const Vec& u) const;
};

std::shared_ptr<const Discretization> make_discretization(const Domain& domain, int n);

}  // namespace rlxa
