#include "rlxa/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rlxa {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat symmetrized(const SpMat& a) {
  SpMat at = a.transpose();
  SpMat s = 0.5 * (a + at);
  s.makeCompressed();
  return s;
}

SpMat from_triplets(int n, const Triplets& t) {
  SpMat m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return symmetrized(m);
}

Mesh interval_mesh(const Interval& d, int n) {
  if (!(d.b > d.a)) throw std::invalid_argument("interval: require b > a");
  Mesh m;
  m.dim = 1;
  const double h = (d.b - d.a) / n;
  m.nodes.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = (i == n) ? d.b : d.a + i * h;
    m.nodes.push_back({x, 0.0});
  }
  for (int i = 0; i < n; ++i) m.cells.push_back({i, i + 1, -1});
  m.boundary_nodes = {0, n};
  m.h_max = h;
  return m;
}

Mesh rectangle_mesh(const Rectangle& d, int n) {
  if (!(d.bx > d.ax) || !(d.by > d.ay)) {
    throw std::invalid_argument("rectangle: require bx > ax and by > ay");
  }
  Mesh m;
  m.dim = 2;
  const double hx = (d.bx - d.ax) / n;
  const double hy = (d.by - d.ay) / n;
  const auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double x = (i == n) ? d.bx : d.ax + i * hx;
      const double y = (j == n) ? d.by : d.ay + j * hy;
      m.nodes.push_back({x, y});
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int p00 = id(i, j), p10 = id(i + 1, j), p11 = id(i + 1, j + 1), p01 = id(i, j + 1);
      m.cells.push_back({p00, p10, p11});
      m.cells.push_back({p00, p11, p01});
    }
  }
  // Perimeter walked counter-clockwise so every boundary node appears once.
  for (int i = 0; i < n; ++i) m.boundary_edges.push_back({id(i, 0), id(i + 1, 0)});
  for (int j = 0; j < n; ++j) m.boundary_edges.push_back({id(n, j), id(n, j + 1)});
  for (int i = n; i > 0; --i) m.boundary_edges.push_back({id(i, n), id(i - 1, n)});
  for (int j = n; j > 0; --j) m.boundary_edges.push_back({id(0, j), id(0, j - 1)});
  for (const auto& e : m.boundary_edges) m.boundary_nodes.push_back(e[0]);
  m.h_max = std::hypot(hx, hy);
  return m;
}

double triangle_area(const Mesh& m, const std::array<int, 3>& c) {
  const auto& p0 = m.nodes[c[0]];
  const auto& p1 = m.nodes[c[1]];
  const auto& p2 = m.nodes[c[2]];
  return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

}  // namespace

double Mesh::cell_measure(int c) const {
  const auto& cell = cells[c];
  if (dim == 1) return nodes[cell[1]][0] - nodes[cell[0]][0];
  return triangle_area(*this, cell);
}

Mesh build_mesh(const Domain& domain, int n) {
  if (n < 1) throw std::invalid_argument("build_mesh: resolution must be >= 1, got " + std::to_string(n));
  Mesh m = std::visit(
      [n](const auto& d) -> Mesh {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Interval>) {
          return interval_mesh(d, n);
        } else {
          return rectangle_mesh(d, n);
        }
      },
      domain);
  for (int c = 0; c < static_cast<int>(m.cells.size()); ++c) {
    if (!(m.cell_measure(c) > 0.0)) throw std::logic_error("build_mesh: non-positive cell volume");
  }
  return m;
}

Operators assemble(const Mesh& mesh) {
  const int n = mesh.num_nodes();
  Triplets mt, kt, bt;
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    const auto& cell = mesh.cells[c];
    const double vol = mesh.cell_measure(c);
    if (mesh.dim == 1) {
      const double h = vol;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          mt.emplace_back(cell[a], cell[b], h / 6.0 * (a == b ? 2.0 : 1.0));
          kt.emplace_back(cell[a], cell[b], (a == b ? 1.0 : -1.0) / h);
        }
      }
    } else {
      // ∇λ_a = (y_{a+1} − y_{a+2}, x_{a+2} − x_{a+1}) / (2|T|)
      std::array<std::array<double, 2>, 3> g{};
      for (int a = 0; a < 3; ++a) {
        const auto& pj = mesh.nodes[cell[(a + 1) % 3]];
        const auto& pk = mesh.nodes[cell[(a + 2) % 3]];
        g[a] = {(pj[1] - pk[1]) / (2.0 * vol), (pk[0] - pj[0]) / (2.0 * vol)};
      }
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          mt.emplace_back(cell[a], cell[b], vol / 12.0 * (a == b ? 2.0 : 1.0));
          kt.emplace_back(cell[a], cell[b], vol * (g[a][0] * g[b][0] + g[a][1] * g[b][1]));
        }
      }
    }
  }
  if (mesh.dim == 1) {
    for (int i : mesh.boundary_nodes) bt.emplace_back(i, i, 1.0);
  } else {
    for (const auto& e : mesh.boundary_edges) {
      const auto& p = mesh.nodes[e[0]];
      const auto& q = mesh.nodes[e[1]];
      const double len = std::hypot(q[0] - p[0], q[1] - p[1]);
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) bt.emplace_back(e[a], e[b], len / 6.0 * (a == b ? 2.0 : 1.0));
      }
    }
  }
  Operators ops;
  ops.mass = from_triplets(n, mt);
  ops.stiffness = from_triplets(n, kt);
  ops.boundary_mass = from_triplets(n, bt);
  ops.lumped_mass = ops.mass * Vec::Ones(n);
  ops.boundary_nodes = mesh.boundary_nodes;
  return ops;
}

NormSuite::NormSuite(const Operators& ops)
    : mass_(ops.mass),
      stiffness_(ops.stiffness),
      boundary_mass_(ops.boundary_mass),
      lumped_(ops.lumped_mass) {
  auto solver = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(mass_);
  if (solver->info() != Eigen::Success) throw std::runtime_error("NormSuite: mass matrix factorization failed");
  mass_solver_ = std::move(solver);
}

void NormSuite::check_size(const Vec& u) const {
  if (u.size() != mass_.rows()) {
    throw std::invalid_argument("nodal field has " + std::to_string(u.size()) + " entries, mesh has " +
                                std::to_string(mass_.rows()));
  }
}

double NormSuite::l2_dot(const Vec& u, const Vec& v) const {
  check_size(u);
  check_size(v);
  return u.dot(mass_ * v);
}
double NormSuite::l2_sq(const Vec& u) const { return l2_dot(u, u); }

double NormSuite::boundary_dot(const Vec& u, const Vec& v) const {
  check_size(u);
  check_size(v);
  return u.dot(boundary_mass_ * v);
}
double NormSuite::boundary_sq(const Vec& u) const { return boundary_dot(u, u); }

double NormSuite::grad_sq(const Vec& u) const {
  check_size(u);
  return u.dot(stiffness_ * u);
}

double NormSuite::h1_sq(const Vec& u) const { return grad_sq(u) + boundary_sq(u); }
double NormSuite::h1(const Vec& u) const { return std::sqrt(std::max(0.0, h1_sq(u))); }

double NormSuite::lumped_dot(const Vec& u, const Vec& v) const {
  check_size(u);
  check_size(v);
  return (lumped_.array() * u.array() * v.array()).sum();
}
double NormSuite::lumped_sq(const Vec& u) const { return lumped_dot(u, u); }

double NormSuite::hyp_sq(const Vec& u, const Vec& v, double eps) const { return h1_sq(u) + eps * l2_sq(v); }

double NormSuite::ext_sq(const Vec& u, const Vec& gamma, const Vec& v, const Vec& delta, double eps) const {
  return h1_sq(u) + boundary_sq(gamma) + eps * (l2_sq(v) + boundary_sq(delta));
}

Vec NormSuite::laplacian(const Vec& u, const Vec& u_t) const {
  check_size(u);
  check_size(u_t);
  const Vec rhs = -(stiffness_ * u + boundary_mass_ * (u + u_t));
  return solve_mass(rhs);
}

double NormSuite::h2_sq(const Vec& u, const Vec& u_t) const { return h1_sq(u) + l2_sq(laplacian(u, u_t)); }

double NormSuite::regular_norm(const Vec& u, const Vec& u_t) const {
  return std::sqrt(std::max(0.0, h2_sq(u, u_t))) + h1(u_t);
}

Vec NormSuite::solve_mass(const Vec& rhs) const {
  check_size(rhs);
  return mass_solver_->solve(rhs);
}

double NormSuite::dual_norm(const Vec& r) const { return std::sqrt(std::max(0.0, r.dot(solve_mass(r)))); }

Discretization::Discretization(Mesh m) : mesh(std::move(m)), ops(assemble(mesh)), norms(ops) {}

Vec Discretization::boundary_part(const Vec& u) const {
  Vec out = Vec::Zero(u.size());
  for (int i : mesh.boundary_nodes) out[i] = u[i];
  return out;
}

std::shared_ptr<const Discretization> make_discretization(const Domain& domain, int n) {
  return std::make_shared<const Discretization>(build_mesh(domain, n));
}

}  // namespace rlxa
