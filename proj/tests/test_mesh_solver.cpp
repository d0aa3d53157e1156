#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fsi/fields.hpp"
#include "fsi/linalg.hpp"
#include "fsi/mesh.hpp"

using namespace fsi;

namespace {

GeometrySpec square_with_solid(double h) {
  GeometrySpec g;
  g.dim = 2;
  g.container.lo[0] = g.container.lo[1] = 0.0;
  g.container.hi[0] = g.container.hi[1] = 1.0;
  Box s;
  s.lo[0] = s.lo[1] = 0.25;
  s.hi[0] = s.hi[1] = 0.75;
  g.solids.push_back(s);
  g.h = h;
  return g;
}

}  // namespace

TEST_CASE("mesh counts for a centered solid block") {
  PhaseMesh m = build_mesh(square_with_solid(0.25));
  CHECK(m.n_cells == 16);
  CHECK(m.n_nodes == 25);
  CHECK(m.solid_cells.size() == 4);
  CHECK(m.fluid_cells.size() == 12);
  CHECK(m.interface_facets.size() == 8);   // perimeter of the 2x2 block
  CHECK(m.outer_facets.size() == 16);
  CHECK(m.cell_vol == doctest::Approx(0.0625).epsilon(1e-15));

  int n_outer = 0, n_iface = 0, n_solid = 0;
  for (int p = 0; p < m.n_nodes; ++p) {
    n_outer += m.node_on_outer[size_t(p)] ? 1 : 0;
    n_iface += m.node_on_interface[size_t(p)] ? 1 : 0;
    n_solid += m.node_in_solid[size_t(p)] ? 1 : 0;
  }
  CHECK(n_outer == 16);
  CHECK(n_iface == 8);   // boundary nodes of the 3x3 solid patch
  CHECK(n_solid == 9);
}

TEST_CASE("interface normals point from fluid into solid") {
  PhaseMesh m = build_mesh(square_with_solid(0.25));
  for (const InterfaceFacet& f : m.interface_facets) {
    Vec cf = m.cell_center(f.fluid_cell), cs = m.cell_center(f.solid_cell);
    // moving from the fluid center along the normal must approach the solid
    CHECK(f.sign * (cs[f.axis] - cf[f.axis]) > 0);
    CHECK(f.area == doctest::Approx(0.25).epsilon(1e-15));
  }
}

TEST_CASE("invalid geometries are rejected") {
  GeometrySpec g = square_with_solid(0.25);
  SUBCASE("solid touching the outer wall") {
    g.solids[0].lo[0] = 0.0;
    CHECK_THROWS_AS(build_mesh(g), std::runtime_error);
  }
  SUBCASE("solid outside the container") {
    g.solids[0].hi[0] = 1.5;
    CHECK_THROWS_AS(build_mesh(g), std::runtime_error);
  }
  SUBCASE("overlapping solids") {
    Box s2;
    s2.lo[0] = s2.lo[1] = 0.5;
    s2.hi[0] = s2.hi[1] = 0.8;
    g.solids.push_back(s2);
    CHECK_THROWS_AS(build_mesh(g), std::runtime_error);
  }
  SUBCASE("nonpositive resolution") {
    g.h = 0.0;
    CHECK_THROWS_AS(build_mesh(g), std::runtime_error);
  }
}

TEST_CASE("shape functions are a partition of unity") {
  PhaseMesh m = build_mesh(square_with_solid(0.25));
  for (int q = 0; q < m.quad.npts; ++q) {
    double sv = 0;
    Vec sg;
    for (int a = 0; a < m.shapes.nsh; ++a) {
      sv += m.shapes.val[size_t(q * m.shapes.nsh + a)];
      Vec g = m.shapes.grad[size_t(q * m.shapes.nsh + a)];
      for (int i = 0; i < 2; ++i) sg[i] += g[i];
    }
    CHECK(sv == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(sg[0]) <= 1e-12);
    CHECK(std::abs(sg[1]) <= 1e-12);
  }
}

TEST_CASE("quadrature integrates nodal interpolants exactly") {
  PhaseMesh m = build_mesh(square_with_solid(0.25));
  // f(x) = x interpolates exactly; int_0^1 int_0^1 x^2 = 1/3
  NodalField f(size_t(m.n_nodes));
  for (int p = 0; p < m.n_nodes; ++p) f[size_t(p)] = m.node_pos(p)[0];
  CHECK(l2_norm_sq(m, f, 1, Region::All) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  // seminorm of a linear field: |grad|^2 = 1 everywhere
  CHECK(h1_seminorm_sq(m, f, 1, Region::All) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("lumped node weights sum to the phase volume") {
  PhaseMesh m = build_mesh(square_with_solid(0.125));
  for (Region r : {Region::All, Region::Fluid, Region::Solid}) {
    std::vector<double> w = lumped_node_weights(m, r);
    double total = 0;
    for (double v : w) total += v;
    double cells = double(region_cells(m, r).size());
    CHECK(total == doctest::Approx(cells * m.cell_vol).epsilon(1e-13));
  }
}

TEST_CASE("node lattice finite differences are exact on quadratics") {
  PhaseMesh m = build_mesh(square_with_solid(0.125));
  NodalField f(size_t(m.n_nodes));
  for (int p = 0; p < m.n_nodes; ++p) {
    Vec x = m.node_pos(p);
    f[size_t(p)] = 3 * x[0] * x[0] + 2 * x[0] * x[1] - x[1] * x[1] + x[0] - 4;
  }
  for (int p = 0; p < m.n_nodes; ++p) {
    Vec x = m.node_pos(p);
    CHECK(fd_d1(m, f, 1, 0, p, 0) == doctest::Approx(6 * x[0] + 2 * x[1] + 1).epsilon(1e-11));
    CHECK(fd_d1(m, f, 1, 0, p, 1) == doctest::Approx(2 * x[0] - 2 * x[1]).epsilon(1e-11));
    CHECK(fd_d2(m, f, 1, 0, p, 0, 0) == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(fd_d2(m, f, 1, 0, p, 0, 1) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fd_d2(m, f, 1, 0, p, 1, 1) == doctest::Approx(-2.0).epsilon(1e-9));
  }
}

TEST_CASE("masked finite differences stay exact on quadratics") {
  PhaseMesh m = build_mesh(square_with_solid(0.125));
  NodalField f(size_t(m.n_nodes));
  for (int p = 0; p < m.n_nodes; ++p) {
    Vec x = m.node_pos(p);
    f[size_t(p)] = x[0] * x[0] - 3 * x[0] * x[1];
  }
  // only solid nodes valid: stencils must fall back to one-sided forms
  FdMask mask;
  mask.valid = &m.node_in_solid;
  for (int p = 0; p < m.n_nodes; ++p) {
    if (!m.node_in_solid[size_t(p)]) continue;
    Vec x = m.node_pos(p);
    CHECK(fd_d1(m, f, 1, 0, p, 0, mask) == doctest::Approx(2 * x[0] - 3 * x[1]).epsilon(1e-10));
    CHECK(fd_d2(m, f, 1, 0, p, 0, 1, mask) == doctest::Approx(-3.0).epsilon(1e-8));
  }
}

TEST_CASE("cg solves a 1d poisson problem at second order") {
  auto solve_poisson = [](int n) {
    // -u'' = pi^2 sin(pi x), u(0) = u(1) = 0, u = sin(pi x)
    double h = 1.0 / n;
    SparseSystem sys(n + 1);
    for (int e = 0; e < n; ++e) {
      double k = 1.0 / h;
      sys.add(e, e, k);
      sys.add(e + 1, e + 1, k);
      sys.add(e, e + 1, -k);
      sys.add(e + 1, e, -k);
    }
    for (int i = 0; i <= n; ++i)
      sys.add_rhs(i, M_PI * M_PI * std::sin(M_PI * i * h) * h);  // lumped load
    sys.pin(0, 0.0);
    sys.pin(n, 0.0);
    SpMat a;
    DVec b;
    sys.finalize(a, b);
    DVec x = DVec::Zero(n + 1);
    SolveReport rep = solve_spd(a, b, x, 1e-12, 2000);
    REQUIRE(rep.converged);
    double err = 0;
    for (int i = 0; i <= n; ++i) err = std::max(err, std::abs(x[i] - std::sin(M_PI * i * h)));
    return err;
  };
  double e16 = solve_poisson(16), e32 = solve_poisson(32);
  CHECK(e16 / e32 >= 3.5);  // second order in h
}

TEST_CASE("cg matches a dense direct solve") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 24;
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = u(rng);
  Eigen::MatrixXd ad = b.transpose() * b + Eigen::MatrixXd::Identity(n, n);
  SpMat a = ad.sparseView();
  DVec rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = u(rng);
  DVec want = ad.ldlt().solve(rhs);
  DVec x = DVec::Zero(n);
  SolveReport rep = solve_spd(a, rhs, x, 1e-13, 500);
  CHECK(rep.converged);
  CHECK((x - want).norm() <= 1e-9 * want.norm());
}

TEST_CASE("cg rejects nonsymmetric input") {
  SpMat a(2, 2);
  a.insert(0, 0) = 2.0;
  a.insert(0, 1) = 1.0;
  a.insert(1, 1) = 2.0;  // missing the (1,0) entry
  a.makeCompressed();
  DVec b(2);
  b << 1.0, 1.0;
  DVec x = DVec::Zero(2);
  CHECK_THROWS_AS(solve_spd(a, b, x, 1e-12, 100), std::runtime_error);
}

TEST_CASE("pinned dofs keep their value and drop out of the free block") {
  // 2-dof system [2 1; 1 2] x = [1 1], x1 pinned at 3
  SparseSystem sys(2);
  sys.add(0, 0, 2.0);
  sys.add(0, 1, 1.0);
  sys.add(1, 0, 1.0);
  sys.add(1, 1, 2.0);
  sys.add_rhs(0, 1.0);
  sys.add_rhs(1, 1.0);
  sys.pin(1, 3.0);
  SpMat a;
  DVec b;
  sys.finalize(a, b);
  DVec x = DVec::Zero(2);
  SolveReport rep = solve_spd(a, b, x, 1e-14, 50);
  CHECK(rep.converged);
  CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-14));
  // free equation: 2 x0 + 1 * 3 = 1
  CHECK(x[0] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("newton converges quadratically on a scalar problem") {
  auto residual = [](const DVec& x) {
    DVec r(1);
    r[0] = x[0] * x[0] - 4.0;
    return r;
  };
  auto jacobian = [](const DVec& x) {
    SpMat j(1, 1);
    j.insert(0, 0) = 2.0 * x[0];
    j.makeCompressed();
    return j;
  };
  DVec x(1);
  x[0] = 1.0;
  NewtonOptions o;
  o.tol = 1e-13;
  NewtonReport rep = solve_newton(residual, jacobian, x, o);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 8);
  CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("newton reports non-convergence when starved of iterations") {
  auto residual = [](const DVec& x) {
    DVec r(1);
    r[0] = x[0] * x[0] - 4.0;
    return r;
  };
  auto jacobian = [](const DVec& x) {
    SpMat j(1, 1);
    j.insert(0, 0) = 2.0 * x[0];
    j.makeCompressed();
    return j;
  };
  DVec x(1);
  x[0] = 1.0;
  NewtonOptions o;
  o.tol = 1e-13;
  o.maxit = 1;
  NewtonReport rep = solve_newton(residual, jacobian, x, o);
  CHECK_FALSE(rep.converged);
  CHECK(rep.residual_norm > o.tol);
}

TEST_CASE("newton fd check passes for a consistent jacobian") {
  auto residual = [](const DVec& x) {
    DVec r(2);
    r[0] = x[0] * x[0] + x[1] - 3.0;
    r[1] = std::sin(x[1]) + x[0] - 1.0;
    return r;
  };
  auto jacobian = [](const DVec& x) {
    SpMat j(2, 2);
    j.insert(0, 0) = 2.0 * x[0];
    j.insert(0, 1) = 1.0;
    j.insert(1, 0) = 1.0;
    j.insert(1, 1) = std::cos(x[1]);
    j.makeCompressed();
    return j;
  };
  DVec x(2);
  x[0] = 0.5;
  x[1] = 0.5;
  NewtonOptions o;
  o.fd_check = true;
  o.fd_cols = 2;
  NewtonReport rep = solve_newton(residual, jacobian, x, o);
  CHECK(rep.converged);
}
