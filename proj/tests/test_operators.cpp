#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fsi/operators.hpp"

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

double dot(const NodalField& a, const NodalField& b) {
  double s = 0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double max_abs_field(const NodalField& f) {
  double m = 0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

NodalField random_interior_solid(const PhaseMesh& m, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NodalField f = zero_field(m, m.dim);
  for (int p = 0; p < m.n_nodes; ++p)
    if (m.node_in_solid[size_t(p)] && !m.node_on_interface[size_t(p)])
      for (int i = 0; i < m.dim; ++i) f[size_t(p * m.dim + i)] = u(rng);
  return f;
}

}  // namespace

TEST_CASE("elasticity coefficients take the isotropic values") {
  ElasticityTensor c(2.0, 1.0, 2);
  CHECK(c.c_eval(0, 0, 0, 0) == 4.0);  // lambda + 2 mu
  CHECK(c.c_eval(0, 0, 1, 1) == 2.0);  // lambda
  CHECK(c.c_eval(0, 1, 0, 1) == 1.0);  // mu
  CHECK(c.c_eval(0, 1, 1, 0) == 1.0);  // mu
  CHECK(c.c_eval(0, 0, 0, 1) == 0.0);
}

TEST_CASE("contractions match the coefficient definition") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int d : {2, 3}) {
    ElasticityTensor c(1.3, 0.7, d);
    Mat g;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = u(rng);
    Mat sym = g;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) sym(i, j) = 0.5 * (g(i, j) + g(j, i));

    Mat want_raw = Mat::zero(), want_sym = Mat::zero(), want_con = Mat::zero();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) {
            want_raw(i, j) += c.c_eval(i, j, k, l) * g(k, l);
            want_sym(i, j) += c.c_eval(i, j, k, l) * (g(k, l) + g(l, k));
            want_con(i, j) += c.c_eval(i, j, k, l) * sym(k, l);
          }
    Mat raw = c.stress_raw(g), symr = c.stress_sym(g), con = c.contract(sym);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        CHECK(raw(i, j) == doctest::Approx(want_raw(i, j)).epsilon(1e-14));
        CHECK(symr(i, j) == doctest::Approx(want_sym(i, j)).epsilon(1e-14));
        CHECK(con(i, j) == doctest::Approx(want_con(i, j)).epsilon(1e-14));
      }
  }
}

TEST_CASE("pointwise stability: c:S:S = lambda tr^2 + 2 mu |S|^2") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ElasticityTensor c(2.0, 1.0, 3);
  Mat s = Mat::zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) s(i, j) = s(j, i) = u(rng);
  double quad = 0, tr = 0, frob = 0;
  for (int i = 0; i < 3; ++i) {
    tr += s(i, i);
    for (int j = 0; j < 3; ++j) {
      frob += s(i, j) * s(i, j);
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) quad += c.c_eval(i, j, k, l) * s(k, l) * s(i, j);
    }
  }
  CHECK(quad == doctest::Approx(2.0 * tr * tr + 2.0 * frob).epsilon(1e-13));
}

TEST_CASE("weak elastic operator is symmetric negative semidefinite") {
  PhaseMesh m = build_mesh(square_with_solid(0.125));
  ElasticityTensor c(2.0, 1.0, 2);
  // dense matrix over the interior solid dofs, eigenvalues as the oracle
  std::vector<int> dofs;
  for (int p = 0; p < m.n_nodes; ++p)
    if (m.node_in_solid[size_t(p)] && !m.node_on_interface[size_t(p)])
      for (int i = 0; i < 2; ++i) dofs.push_back(p * 2 + i);
  REQUIRE(dofs.size() >= 8);
  const int n = int(dofs.size());
  Eigen::MatrixXd l(n, n);
  for (int a = 0; a < n; ++a) {
    NodalField e = zero_field(m, 2);
    e[size_t(dofs[size_t(a)])] = 1.0;
    NodalField le = linear_L(m, c, e).load;
    for (int b = 0; b < n; ++b) l(b, a) = le[size_t(dofs[size_t(b)])];
  }
  CHECK((l - l.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (l + l.transpose()));
  CHECK(es.eigenvalues().maxCoeff() <= 1e-12);
}

TEST_CASE("weak elastic operator annihilates rigid motions") {
  PhaseMesh m = build_mesh(square_with_solid(0.125));
  ElasticityTensor c(2.0, 1.0, 2);
  NodalField u = zero_field(m, 2);
  for (int p = 0; p < m.n_nodes; ++p) {
    Vec x = m.node_pos(p);
    u[size_t(p * 2 + 0)] = 0.7 - 1.3 * x[1];
    u[size_t(p * 2 + 1)] = -0.4 + 1.3 * x[0];
  }
  CHECK(max_abs_field(linear_L(m, c, u).load) <= 1e-12);
}

TEST_CASE("strong elastic operator reproduces a hand computation") {
  // u = (x^2, 0): stress_sym = [[4 lx + 8 mx, 0], [0, 4 lx]], div = (4l + 8m, 0)
  PhaseMesh m = build_mesh(square_with_solid(0.125));
  double lambda = 2.0, mu = 1.0;
  ElasticityTensor c(lambda, mu, 2);
  NodalField u = zero_field(m, 2);
  for (int p = 0; p < m.n_nodes; ++p) {
    double x = m.node_pos(p)[0];
    u[size_t(p * 2 + 0)] = x * x;
  }
  NodalField lu = linear_L_strong(m, c, u);
  for (int p = 0; p < m.n_nodes; ++p) {
    CHECK(lu[size_t(p * 2 + 0)] == doctest::Approx(4 * lambda + 8 * mu).epsilon(1e-9));
    CHECK(std::abs(lu[size_t(p * 2 + 1)]) <= 1e-9);
  }
}

TEST_CASE("nonlinear operator vanishes exactly at the identity") {
  PhaseMesh m = build_mesh(square_with_solid(0.125));
  ElasticityTensor c(2.0, 1.0, 2);
  CHECK(max_abs_field(nonlinear_N(m, c, identity_configuration(m)).load) == 0.0);
  std::vector<Vec> g = traction_G(m, c, identity_configuration(m));
  for (const Vec& v : g) {
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);
  }
}

TEST_CASE("nonlinear operator is frame indifferent") {
  PhaseMesh m = build_mesh(square_with_solid(0.125));
  ElasticityTensor c(2.0, 1.0, 2);
  NodalField eta = identity_configuration(m);
  for (int p = 0; p < m.n_nodes; ++p) {
    Vec x = m.node_pos(p);
    double s = std::sin(2 * M_PI * x[0]) * std::sin(2 * M_PI * x[1]);
    eta[size_t(p * 2 + 0)] += 0.05 * s;
    eta[size_t(p * 2 + 1)] -= 0.03 * s;
  }
  NodalField base = nonlinear_N(m, c, eta).load;
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int t = 0; t < 3; ++t) {
    double th = u(rng), cs = std::cos(th), sn = std::sin(th);
    NodalField etaq(eta.size());
    for (int p = 0; p < m.n_nodes; ++p) {
      etaq[size_t(p * 2 + 0)] = cs * eta[size_t(p * 2 + 0)] - sn * eta[size_t(p * 2 + 1)];
      etaq[size_t(p * 2 + 1)] = sn * eta[size_t(p * 2 + 0)] + cs * eta[size_t(p * 2 + 1)];
    }
    NodalField nq = nonlinear_N(m, c, etaq).load;
    double err = 0;
    for (int p = 0; p < m.n_nodes; ++p) {
      err = std::max(err, std::abs(nq[size_t(p * 2 + 0)] -
                                   (cs * base[size_t(p * 2 + 0)] - sn * base[size_t(p * 2 + 1)])));
      err = std::max(err, std::abs(nq[size_t(p * 2 + 1)] -
                                   (sn * base[size_t(p * 2 + 0)] + cs * base[size_t(p * 2 + 1)])));
    }
    CHECK(err <= 1e-12);
  }
}

TEST_CASE("linearizing the nonlinear operator at identity gives minus L") {
  PhaseMesh m = build_mesh(square_with_solid(0.125));
  ElasticityTensor c(2.0, 1.0, 2);
  std::mt19937 rng(21);
  NodalField delta = random_interior_solid(m, rng);
  const double s = 1e-5;
  NodalField ep = identity_configuration(m), em = ep;
  for (size_t k = 0; k < ep.size(); ++k) {
    ep[k] += s * delta[k];
    em[k] -= s * delta[k];
  }
  NodalField np = nonlinear_N(m, c, ep).load;
  NodalField nm = nonlinear_N(m, c, em).load;
  NodalField l = linear_L(m, c, delta).load;
  double scale = std::max(max_abs_field(l), 1e-30), err = 0;
  for (size_t k = 0; k < l.size(); ++k)
    err = std::max(err, std::abs((np[k] - nm[k]) / (2 * s) + l[k]));
  CHECK(err / scale <= 1e-6);
}

TEST_CASE("viscous form with unit cofactors is symmetric and positive") {
  PhaseMesh m = build_mesh(square_with_solid(0.125));
  TensorField a = cofactor_field(gradient(m, identity_configuration(m), Region::Fluid));
  std::mt19937 rng(25);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_field = [&] {
    NodalField f(size_t(m.n_nodes * 2));
    for (double& v : f) v = u(rng);
    return f;
  };
  for (int t = 0; t < 5; ++t) {
    NodalField v = random_field(), w = random_field();
    NodalField kv = fluid_viscous(m, a, v, 0.7).load;
    NodalField kw = fluid_viscous(m, a, w, 0.7).load;
    CHECK(std::abs(dot(kv, w) - dot(kw, v)) <= 1e-11 * std::max(1.0, std::abs(dot(kv, w))));
    CHECK(dot(kv, v) >= -1e-12);
  }
  // constant fields carry no viscous load beyond quadrature rounding
  NodalField cst(size_t(m.n_nodes * 2), 0.8);
  CHECK(max_abs_field(fluid_viscous(m, a, cst, 0.7).load) <= 1e-15);
}

TEST_CASE("pressure term is adjoint to the lagrangian divergence") {
  PhaseMesh m = build_mesh(square_with_solid(0.125));
  NodalField eta = identity_configuration(m);
  std::mt19937 rng(27);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (double& v : eta) v += u(rng);
  TensorField a = cofactor_field(gradient(m, eta, Region::Fluid));

  NodalField v(size_t(m.n_nodes * 2));
  for (double& x : v) x = u(rng);
  std::vector<double> div = lagrangian_div(m, a, v);
  std::vector<double> q(div.size());
  for (double& x : q) x = u(rng);

  // <P(q), v> must equal the quadrature pairing of q with a : grad v
  double lhs = dot(pressure_term(m, a, q).load, v);
  double rhs = 0;
  const auto& cells = region_cells(m, Region::Fluid);
  for (size_t s = 0; s < cells.size(); ++s)
    for (int qp = 0; qp < m.quad.npts; ++qp)
      rhs += m.quad.w[size_t(qp)] * q[s * size_t(m.quad.npts) + size_t(qp)] *
             div[s * size_t(m.quad.npts) + size_t(qp)];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("lagrangian divergence of the identity velocity is the dimension") {
  PhaseMesh m = build_mesh(square_with_solid(0.25));
  TensorField a = cofactor_field(gradient(m, identity_configuration(m), Region::Fluid));
  NodalField v = identity_configuration(m);
  for (double d : lagrangian_div(m, a, v)) CHECK(d == doctest::Approx(2.0).epsilon(1e-14));
}
