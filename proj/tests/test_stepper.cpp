#include <cmath>
#include <random>

#include "doctest.h"
#include "fsi/presets.hpp"
#include "fsi/stepper.hpp"

using namespace fsi;

namespace {

GeometrySpec standard_geometry(double h) {
  GeometrySpec g;
  g.dim = 2;
  g.container.lo[0] = g.container.lo[1] = 0.0;
  g.container.hi[0] = g.container.hi[1] = 1.0;
  Box s;
  s.lo[0] = s.lo[1] = 0.375;
  s.hi[0] = s.hi[1] = 0.625;
  g.solids.push_back(s);
  g.h = h;
  return g;
}

GeometrySpec pure_fluid(double h) {
  GeometrySpec g;
  g.dim = 2;
  g.container.lo[0] = g.container.lo[1] = 0.0;
  g.container.hi[0] = g.container.hi[1] = 1.0;
  g.h = h;
  return g;
}

double max_abs_field(const NodalField& f) {
  double m = 0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("the residual vanishes identically at rest") {
  PhaseMesh m = build_mesh(standard_geometry(0.125));
  SolverParams p;
  Stepper st(m, p);
  DeformationState s = st.initial_state(zero_field(m, 2));
  DVec w = DVec::Zero(m.n_nodes * 2);
  DVec r = st.residual(w, s);
  CHECK(r.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero data stays exactly zero under stepping") {
  PhaseMesh m = build_mesh(standard_geometry(0.125));
  SolverParams p;
  RunOptions o;
  o.t_end = 0.02;  // 20 steps
  RunResult res = run_simulation(m, p, zero_field(m, 2), nullptr, nullptr, o);
  CHECK(res.completed);
  CHECK(res.stop_reason == "end");
  CHECK(max_abs_field(res.final_state.v) == 0.0);
  NodalField id = identity_configuration(m);
  double de = 0;
  for (size_t k = 0; k < id.size(); ++k)
    de = std::max(de, std::abs(res.final_state.eta[k] - id[k]));
  CHECK(de == 0.0);
  for (const auto& rec : res.records) CHECK(rec.e_total == 0.0);
}

TEST_CASE("assembled jacobian matches finite differences of the residual") {
  PhaseMesh m = build_mesh(standard_geometry(0.125));
  SolverParams p;
  p.eps = 1e-2;  // keep the penalty block well scaled for the FD probe
  Stepper st(m, p);

  GeometrySpec g = standard_geometry(0.125);
  NodalField u0 = make_initial_data(m, g, "annulus_vortex", 0.5);
  DeformationState s = st.initial_state(u0);
  // displace the configuration a little so every nonlinear block is active
  std::mt19937 rng(51);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int pnode = 0; pnode < m.n_nodes; ++pnode)
    if (!m.node_on_outer[size_t(pnode)])
      for (int i = 0; i < 2; ++i) s.eta[size_t(pnode * 2 + i)] += 0.01 * u(rng);

  const int nd = m.n_nodes * 2;
  DVec w(nd);
  for (int k = 0; k < nd; ++k) w[k] = 0.3 * u(rng);
  SpMat j = st.jacobian(w, s);
  Eigen::MatrixXd jd(j);

  const double h = 1e-6;
  std::uniform_int_distribution<int> pick(0, nd - 1);
  for (int probe = 0; probe < 8; ++probe) {
    int col = pick(rng);
    DVec wp = w, wm = w;
    wp[col] += h;
    wm[col] -= h;
    DVec fd = (st.residual(wp, s) - st.residual(wm, s)) / (2 * h);
    double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    CHECK((jd.col(col) - fd).cwiseAbs().maxCoeff() / scale <= 2e-5);
  }
}

TEST_CASE("newton's own fd verification accepts the step jacobian") {
  PhaseMesh m = build_mesh(standard_geometry(0.125));
  SolverParams p;
  p.eps = 1e-2;
  p.newton.fd_check = true;
  p.newton.fd_cols = 4;
  GeometrySpec g = standard_geometry(0.125);
  Stepper st(m, p);
  DeformationState s = st.initial_state(make_initial_data(m, g, "annulus_vortex", 0.5));
  StepReport rep = st.step(s);
  CHECK(rep.newton.converged);
}

TEST_CASE("with only the mass term active a step transports the velocity") {
  // nu = 0, kappa = 0, huge eps: the free equations reduce to M (w - v) = 0
  PhaseMesh m = build_mesh(pure_fluid(0.125));
  SolverParams p;
  p.nu = 0.0;
  p.kappa = 0.0;
  p.eps = 1e12;
  Stepper st(m, p);
  GeometrySpec g = pure_fluid(0.125);
  NodalField u0 = zero_field(m, 2);
  for (int pnode = 0; pnode < m.n_nodes; ++pnode) {
    Vec x = m.node_pos(pnode);
    double b = std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]);  // zero on walls
    u0[size_t(pnode * 2 + 0)] = 0.3 * b;
    u0[size_t(pnode * 2 + 1)] = -0.2 * b;
  }
  DeformationState s = st.initial_state(u0);
  StepReport rep = st.step(s);
  REQUIRE(rep.newton.converged);
  double err = 0;
  for (size_t k = 0; k < u0.size(); ++k) err = std::max(err, std::abs(s.v[k] - u0[k]));
  CHECK(err <= 1e-9);
  // and the configuration moved exactly by dt * v
  NodalField id = identity_configuration(m);
  for (size_t k = 0; k < u0.size(); ++k)
    CHECK(s.eta[k] == doctest::Approx(id[k] + p.dt * s.v[k]).epsilon(1e-12));
}

TEST_CASE("walls pin the velocity on every step") {
  PhaseMesh m = build_mesh(standard_geometry(0.125));
  SolverParams p;
  GeometrySpec g = standard_geometry(0.125);
  NodalField u0 = make_initial_data(m, g, "annulus_vortex", 1.0);
  RunOptions o;
  o.t_end = 0.01;
  RunResult res = run_simulation(m, p, u0, nullptr, nullptr, o);
  REQUIRE(res.completed);
  for (int pnode = 0; pnode < m.n_nodes; ++pnode)
    if (m.node_on_outer[size_t(pnode)]) {
      CHECK(res.final_state.v[size_t(pnode * 2 + 0)] == 0.0);
      CHECK(res.final_state.v[size_t(pnode * 2 + 1)] == 0.0);
    }
}

TEST_CASE("identical runs are bitwise identical") {
  PhaseMesh m = build_mesh(standard_geometry(0.125));
  SolverParams p;
  GeometrySpec g = standard_geometry(0.125);
  NodalField u0 = make_initial_data(m, g, "annulus_vortex", 1.0);
  RunOptions o;
  o.t_end = 0.01;
  RunResult a = run_simulation(m, p, u0, nullptr, nullptr, o);
  RunResult b = run_simulation(m, p, u0, nullptr, nullptr, o);
  REQUIRE(a.records.size() == b.records.size());
  for (size_t k = 0; k < a.final_state.v.size(); ++k) {
    CHECK(a.final_state.v[k] == b.final_state.v[k]);
    CHECK(a.final_state.eta[k] == b.final_state.eta[k]);
  }
  for (size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].e_total == b.records[k].e_total);
    CHECK(a.records[k].newton_residual == b.records[k].newton_residual);
  }
}

TEST_CASE("violent data trips a breakdown detector before the horizon") {
  PhaseMesh m = build_mesh(standard_geometry(0.125));
  SolverParams p;
  p.dt = 2e-2;
  p.newton.maxit = 6;
  GeometrySpec g = standard_geometry(0.125);
  NodalField u0 = make_initial_data(m, g, "annulus_vortex", 200.0);
  RunOptions o;
  o.t_end = 1.0;
  RunResult res = run_simulation(m, p, u0, nullptr, nullptr, o);
  CHECK_FALSE(res.completed);
  CHECK(res.t_star < o.t_end);
  bool known = res.stop_reason == "newton" || res.stop_reason == "det" ||
               res.stop_reason == "blowup";
  CHECK(known);
}

TEST_CASE("diagnostics start from the measured initial state") {
  PhaseMesh m = build_mesh(standard_geometry(0.125));
  SolverParams p;
  GeometrySpec g = standard_geometry(0.125);
  NodalField u0 = make_initial_data(m, g, "annulus_vortex", 1.0);
  RunOptions o;
  o.t_end = 0.005;
  RunResult res = run_simulation(m, p, u0, nullptr, nullptr, o);
  REQUIRE(res.completed);
  REQUIRE(!res.records.empty());
  const DiagnosticsRecord& first = res.records.front();
  CHECK(first.step == 0);
  CHECK(first.t == 0.0);
  CHECK(first.e_kin > 0.0);
  CHECK(first.e_el == 0.0);  // starts at the identity configuration
  CHECK(first.min_det == doctest::Approx(1.0).epsilon(1e-13));
  // records advance in time and keep the determinant positive
  for (size_t k = 1; k < res.records.size(); ++k) {
    CHECK(res.records[k].t > res.records[k - 1].t);
    CHECK(res.records[k].min_det > 0.0);
  }
}

TEST_CASE("kept trajectories feed the space-time norm") {
  PhaseMesh m = build_mesh(standard_geometry(0.125));
  SolverParams p;
  GeometrySpec g = standard_geometry(0.125);
  NodalField u0 = make_initial_data(m, g, "annulus_vortex", 1.0);
  RunOptions o;
  o.t_end = 0.006;  // 6 steps -> 7 states
  o.keep_states = true;
  RunResult res = run_simulation(m, p, u0, nullptr, nullptr, o);
  REQUIRE(res.completed);
  REQUIRE(res.states.size() == 7);
  ZtNorm zn = zt_norm(m, res.states, true);
  CHECK(zn.v_h1_sq_time > 0.0);
  CHECK(zn.total >= zn.v_h1_sq_time);
  CHECK(std::isfinite(zn.total));
  // the quotient terms only add content
  ZtNorm base = zt_norm(m, res.states, false);
  CHECK(zn.total >= base.total);

  std::vector<DeformationState> too_short(res.states.begin(), res.states.begin() + 2);
  CHECK_THROWS_AS(zt_norm(m, too_short, false), std::runtime_error);
}
