#include <cmath>
#include <cstdlib>
#include <random>

#include "doctest.h"
#include "fsi/experiments.hpp"
#include "fsi/presets.hpp"

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

}  // namespace

TEST_CASE("fit_rate recovers exact power laws") {
  std::vector<double> hs = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> e2, e1;
  for (double h : hs) {
    e2.push_back(3.7 * h * h);
    e1.push_back(0.2 * h);
  }
  CHECK(fit_rate(hs, e2) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit_rate(hs, e1) == doctest::Approx(1.0).epsilon(1e-10));
  // non-dyadic ladders work too
  std::vector<double> hs2 = {1.0 / 10, 1.0 / 14, 1.0 / 23};
  std::vector<double> e3;
  for (double h : hs2) e3.push_back(h * h * h);
  CHECK(fit_rate(hs2, e3) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("fit_rate rejects degenerate inputs") {
  CHECK_THROWS_AS(fit_rate({0.1}, {0.01}), std::runtime_error);
  CHECK_THROWS_AS(fit_rate({0.1, 0.05}, {0.01, 0.0}), std::runtime_error);
  CHECK_THROWS_AS(fit_rate({0.1, 0.05}, {0.01}), std::runtime_error);
}

TEST_CASE("thread budget respects the environment override") {
  setenv("FSI_THREADS", "3", 1);
  CHECK(thread_budget(100) == 3);
  CHECK(thread_budget(2) == 2);  // never more threads than jobs
  setenv("FSI_THREADS", "junk", 1);
  CHECK(thread_budget(100) >= 1);
  unsetenv("FSI_THREADS");
  CHECK(thread_budget(4) >= 1);
  CHECK(thread_budget(4) <= 4);
}

TEST_CASE("relax_update interpolates between its arguments") {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> le(-14.0, 2.0);
  for (int t = 0; t < 500; ++t) {
    double y0 = u(rng), g0 = u(rng), g1 = u(rng);
    double dt = std::pow(10.0, le(rng) / 4.0), eps = std::pow(10.0, le(rng));
    double y = relax_update(y0, g0, g1, dt, eps);
    double lo = std::min({y0, g0, g1}), hi = std::max({y0, g0, g1});
    CHECK(y >= lo - 1e-12 * (1 + std::abs(lo)));
    CHECK(y <= hi + 1e-12 * (1 + std::abs(hi)));
  }
}

TEST_CASE("relax_update limits: stiff tracks the data, mild keeps the state") {
  // eps -> 0: y -> g1; eps -> infinity: y -> y0
  CHECK(relax_update(4.0, -1.0, 2.5, 0.1, 1e-13) == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(relax_update(4.0, -1.0, 2.5, 0.1, 1e13) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("relax_update is the exact integrator for affine data") {
  // eps y' + y = a + b t has solution y = c e^{-t/eps} + a - eps b + b t
  const double a = 1.2, b = -0.7, eps = 0.03, dt = 0.05, y0 = 2.0;
  auto g = [&](double t) { return a + b * t; };
  auto exact = [&](double t) {
    double yp0 = a - eps * b;
    return (y0 - yp0) * std::exp(-t / eps) + yp0 + b * t;
  };
  double y = y0;
  for (int n = 1; n <= 40; ++n) {
    y = relax_update(y, g((n - 1) * dt), g(n * dt), dt, eps);
    CHECK(y == doctest::Approx(exact(n * dt)).epsilon(1e-11));
  }
}

TEST_CASE("relaxation trial obeys its data majorant for extreme eps") {
  GeometrySpec g = standard_geometry(0.125);
  PhaseMesh m = build_mesh(g);
  ElasticityTensor c(2.0, 1.0, 2);
  NodalField u0 = make_initial_data(m, g, "solid_bump", 1.0);
  auto data = [&m](double t) {
    NodalField out = zero_field(m, 2);
    for (int p = 0; p < m.n_nodes; ++p)
      if (m.node_in_solid[size_t(p)]) {
        Vec x = m.node_pos(p);
        out[size_t(p * 2 + 0)] = std::sin(5 * t) * x[0];
        out[size_t(p * 2 + 1)] = std::cos(3 * t + x[1]);
      }
    return out;
  };
  for (double eps : {1.0, 1e-4, 1e-8}) {
    RelaxationTrial tr = relaxation_trial(m, c, u0, data, eps, 0.01, 0.5);
    CHECK(tr.sup_y <= tr.bound + 1e-8);
    CHECK(tr.times.size() == tr.y_l2.size());
    CHECK(tr.times.size() == tr.g_l2.size());
    CHECK(std::isfinite(tr.sup_y));
  }
}

TEST_CASE("hierarchy relaxation data is quadratic in time") {
  GeometrySpec g = standard_geometry(1.0 / 16);
  PhaseMesh m = build_mesh(g);
  ElasticityTensor c(2.0, 1.0, 2);
  auto f = make_forcing(g, "none");
  NodalField u0 = make_initial_data(m, g, "annulus_vortex", 1.0);
  CompatData data = build_compat_data(m, u0, *f, 1.0, c);
  auto gfn = hierarchy_relax_data(m, c, data);
  NodalField g0 = gfn(0.0), gh = gfn(0.5), g1 = gfn(1.0);
  // second difference of a quadratic recovers its curvature: L(w2) / 4
  FdMask smask;
  smask.valid = &m.node_in_solid;
  NodalField lw2 = linear_L_strong(m, c, data.w2_solid, smask);
  for (int p = 0; p < m.n_nodes; ++p)
    if (m.node_in_solid[size_t(p)])
      for (int i = 0; i < 2; ++i) {
        size_t k = size_t(p * 2 + i);
        double second = g0[k] - 2 * gh[k] + g1[k];
        CHECK(second == doctest::Approx(0.25 * lw2[k]).epsilon(1e-9));
      }
}

TEST_CASE("kappa sweep runs its grid and reports the spread") {
  GeometrySpec g = standard_geometry(0.125);
  PhaseMesh m = build_mesh(g);
  NodalField u0 = make_initial_data(m, g, "annulus_vortex", 1.0);
  SolverParams p;
  RunOptions o;
  o.t_end = 0.01;
  KappaSweep sw = kappa_sweep(m, p, u0, nullptr, nullptr, {1e-1, 1e-2}, o);
  REQUIRE(sw.runs.size() == 2);
  CHECK(sw.runs[0].kappa == 1e-1);
  CHECK(sw.runs[1].kappa == 1e-2);
  for (const KappaRun& run : sw.runs) {
    CHECK(run.completed);
    CHECK(run.t_star == doctest::Approx(0.01).epsilon(1e-12));
  }
  CHECK(sw.ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("perturbation ratios are reproducible and well scaled") {
  GeometrySpec g = standard_geometry(0.125);
  PhaseMesh m = build_mesh(g);
  NodalField u0 = make_initial_data(m, g, "annulus_vortex", 1.0);
  NodalField dir = make_initial_data(m, g, "annulus_vortex", 1.0);
  double nrm = std::sqrt(l2_norm_sq(m, dir, 2, Region::All));
  for (double& v : dir) v /= nrm;
  SolverParams p;
  RunOptions o;
  o.t_end = 0.01;
  PerturbationStudy s1 = perturbation_study(m, p, u0, dir, nullptr, nullptr, {1e-3, 1e-4}, o);
  PerturbationStudy s2 = perturbation_study(m, p, u0, dir, nullptr, nullptr, {1e-3, 1e-4}, o);
  CHECK(s1.csv == s2.csv);
  CHECK(s1.csv.rfind("# fsi perturbation schema v1", 0) == 0);
  REQUIRE(s1.ratios.size() == 2);
  for (double r : s1.ratios) {
    CHECK(r > 0.0);
    CHECK(r < 100.0);  // a short stable window cannot amplify much
  }
  CHECK(s1.max_ratio >= s1.min_ratio);
}

TEST_CASE("energy check flags a rise beyond the slack") {
  std::vector<DiagnosticsRecord> recs(4);
  for (size_t i = 0; i < recs.size(); ++i) recs[i].step = int(i);
  recs[0].e_total = 1.0;
  recs[1].e_total = 0.9;
  recs[2].e_total = 0.8;
  recs[3].e_total = 0.7;
  EnergyCheck ok = check_energy(recs, 1e-10);
  CHECK(ok.non_increasing);
  CHECK(ok.e0 == 1.0);
  CHECK(ok.first_bad_step == -1);

  recs[2].e_total = 0.9 + 1e-8;
  EnergyCheck bad = check_energy(recs, 1e-10);
  CHECK_FALSE(bad.non_increasing);
  CHECK(bad.first_bad_step == 2);
  CHECK(bad.max_rise == doctest::Approx(1e-8).epsilon(1e-3));

  recs[2].e_total = 0.9 + 1e-12;  // within slack
  CHECK(check_energy(recs, 1e-10).non_increasing);
}
