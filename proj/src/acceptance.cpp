#include "fsi/acceptance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>

#include "fsi/compat.hpp"
#include "fsi/experiments.hpp"
#include "fsi/kinematics.hpp"
#include "fsi/operators.hpp"
#include "fsi/presets.hpp"
#include "fsi/stepper.hpp"

namespace fsi {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void check(CriterionResult& r, bool ok, const std::string& what) {
  if (!r.detail.empty()) r.detail += ", ";
  r.detail += what;
  if (!ok) {
    r.pass = false;
    r.detail += " [BAD]";
  }
}

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

GeometrySpec fluid_geometry(int dim, double h) {
  GeometrySpec g;
  g.dim = dim;
  for (int a = 0; a < dim; ++a) {
    g.container.lo[a] = 0.0;
    g.container.hi[a] = 1.0;
  }
  g.h = h;
  return g;
}

double field_max(const NodalField& f) {
  double m = 0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

double dot_fields(const NodalField& a, const NodalField& b) {
  double s = 0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// ---------------------------------------------------------------------- 1

void crit_kinematics(CriterionResult& r) {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double cof_err = 0, tr_err = 0;
  for (int d : {2, 3}) {
    for (int trial = 0; trial < 200; ++trial) {
      Mat f;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) f(i, j) = u(rng) + (i == j ? 2.0 : 0.0);
      Eigen::MatrixXd fe(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) fe(i, j) = f(i, j);
      double detf = fe.determinant();
      // adjugate convention: a F = det(F) I, the transpose of the cofactor
      // matrix, so the independent oracle is det(F) F^-1
      Eigen::MatrixXd oracle = detf * fe.inverse();
      Mat a = cofactor(f, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) cof_err = std::max(cof_err, std::abs(a(i, j) - oracle(i, j)));
      tr_err = std::max(tr_err, std::abs(trace_prod(a, f, d) - d * det(f, d)));
    }
  }
  check(r, cof_err <= 1e-12, "cofactor vs det*F^-1 " + num(cof_err));
  check(r, tr_err <= 1e-12, "trace identity " + num(tr_err));

  // planar case: the adjugate is linear in the gradient and the cell
  // differences telescope exactly, so the residual sits at the rounding
  // floor on every mesh, stronger than any convergence order
  double floor2 = 0;
  for (int n : {8, 16, 32}) {
    PhaseMesh m = build_mesh(fluid_geometry(2, 1.0 / n));
    NodalField eta = identity_configuration(m);
    for (int p = 0; p < m.n_nodes; ++p) {
      Vec x = m.node_pos(p);
      eta[size_t(p * 2 + 0)] += 0.08 * std::sin(2 * M_PI * x[0]) * std::sin(2 * M_PI * x[1]);
      eta[size_t(p * 2 + 1)] +=
          0.06 * std::sin(2 * M_PI * x[0] + 0.7) * std::sin(2 * M_PI * x[1] + 0.3);
    }
    floor2 = std::max(floor2, piola_residual(m, eta, Region::All));
  }
  check(r, floor2 <= 1e-12, "piola d=2 rounding floor " + num(floor2));

  // quadratic adjugate in three dimensions: second order decay, measured
  // on a field with independent components so the adjugate stays quadratic
  std::vector<double> hs, res;
  for (int n : {16, 32, 64}) {
    PhaseMesh m = build_mesh(fluid_geometry(3, 1.0 / n));
    NodalField eta = identity_configuration(m);
    for (int p = 0; p < m.n_nodes; ++p) {
      Vec x = m.node_pos(p);
      eta[size_t(p * 3 + 0)] += 0.06 * std::sin(M_PI * x[0]) * std::cos(M_PI * x[1]);
      eta[size_t(p * 3 + 1)] += 0.05 * std::sin(M_PI * x[1]) * std::cos(M_PI * x[2]);
      eta[size_t(p * 3 + 2)] += 0.04 * std::sin(M_PI * x[2]) * std::cos(M_PI * x[0]);
    }
    hs.push_back(1.0 / n);
    res.push_back(piola_residual(m, eta, Region::All));
  }
  double rate = fit_rate(hs, res);
  check(r, rate >= 1.8, "piola d=3 rate " + num(rate));
}

// ---------------------------------------------------------------------- 2

void crit_operators(CriterionResult& r) {
  for (int d : {2, 3}) {
    ElasticityTensor c(2.0, 1.0, d);
    bool sym = true;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) {
            double v = c.c_eval(i, j, k, l);
            sym = sym && v == c.c_eval(j, i, k, l) && v == c.c_eval(i, j, l, k) &&
                  v == c.c_eval(k, l, i, j);
          }
    check(r, sym, "c symmetry d=" + std::to_string(d));
  }

  PhaseMesh m = build_mesh(standard_geometry(1.0 / 16));
  ElasticityTensor c(2.0, 1.0, 2);
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_interior = [&] {
    NodalField f = zero_field(m, 2);
    for (int p = 0; p < m.n_nodes; ++p)
      if (m.node_in_solid[size_t(p)] && !m.node_on_interface[size_t(p)])
        for (int i = 0; i < 2; ++i) f[size_t(p * 2 + i)] = u(rng);
    return f;
  };

  double sym_err = 0, worst_pos = -1e300;
  for (int t = 0; t < 20; ++t) {
    NodalField a = random_interior(), b = random_interior();
    NodalField la = linear_L(m, c, a).load, lb = linear_L(m, c, b).load;
    double ab = dot_fields(la, b), ba = dot_fields(lb, a);
    sym_err = std::max(sym_err, std::abs(ab - ba) / std::max(1.0, std::abs(ab)));
    worst_pos = std::max(worst_pos, dot_fields(la, a));
  }
  check(r, sym_err <= 1e-12, "L symmetry " + num(sym_err));
  check(r, worst_pos <= 1e-12, "L semidefiniteness " + num(worst_pos));

  NodalField rigid = zero_field(m, 2);
  for (int p = 0; p < m.n_nodes; ++p) {
    Vec x = m.node_pos(p);
    rigid[size_t(p * 2 + 0)] = 0.3 - 0.5 * x[1];
    rigid[size_t(p * 2 + 1)] = -0.2 + 0.5 * x[0];
  }
  check(r, field_max(linear_L(m, c, rigid).load) <= 1e-12, "L(rigid)");

  check(r, field_max(nonlinear_N(m, c, identity_configuration(m)).load) == 0.0, "N(Id)=0");

  NodalField eta = identity_configuration(m);
  for (int p = 0; p < m.n_nodes; ++p) {
    Vec x = m.node_pos(p);
    double s = std::sin(2 * M_PI * x[0]) * std::sin(2 * M_PI * x[1]);
    eta[size_t(p * 2 + 0)] += 0.06 * s;
    eta[size_t(p * 2 + 1)] -= 0.04 * s;
  }
  NodalField nbase = nonlinear_N(m, c, eta).load;
  std::vector<Vec> gbase = traction_G(m, c, eta);
  double frame_err = 0;
  for (int t = 0; t < 20; ++t) {
    double th = M_PI * u(rng);
    double cs = std::cos(th), sn = std::sin(th);
    NodalField etaq(eta.size());
    for (int p = 0; p < m.n_nodes; ++p) {
      etaq[size_t(p * 2 + 0)] = cs * eta[size_t(p * 2 + 0)] - sn * eta[size_t(p * 2 + 1)];
      etaq[size_t(p * 2 + 1)] = sn * eta[size_t(p * 2 + 0)] + cs * eta[size_t(p * 2 + 1)];
    }
    NodalField nq = nonlinear_N(m, c, etaq).load;
    for (int p = 0; p < m.n_nodes; ++p) {
      double e0 = nq[size_t(p * 2 + 0)] -
                  (cs * nbase[size_t(p * 2 + 0)] - sn * nbase[size_t(p * 2 + 1)]);
      double e1 = nq[size_t(p * 2 + 1)] -
                  (sn * nbase[size_t(p * 2 + 0)] + cs * nbase[size_t(p * 2 + 1)]);
      frame_err = std::max(frame_err, std::max(std::abs(e0), std::abs(e1)));
    }
    std::vector<Vec> gq = traction_G(m, c, etaq);
    for (size_t k = 0; k < gq.size(); ++k) {
      double e0 = gq[k][0] - (cs * gbase[k][0] - sn * gbase[k][1]);
      double e1 = gq[k][1] - (sn * gbase[k][0] + cs * gbase[k][1]);
      frame_err = std::max(frame_err, std::max(std::abs(e0), std::abs(e1)));
    }
  }
  check(r, frame_err <= 1e-12, "frame indifference " + num(frame_err));

  NodalField delta = random_interior();
  double s = 1e-5;
  NodalField ep = identity_configuration(m), em = ep;
  for (size_t k = 0; k < ep.size(); ++k) {
    ep[k] += s * delta[k];
    em[k] -= s * delta[k];
  }
  NodalField np = nonlinear_N(m, c, ep).load, nm = nonlinear_N(m, c, em).load;
  NodalField l = linear_L(m, c, delta).load;
  double lin_err = 0, scale = std::max(field_max(l), 1e-30);
  for (size_t k = 0; k < l.size(); ++k)
    lin_err = std::max(lin_err, std::abs((np[k] - nm[k]) / (2 * s) + l[k]));
  lin_err /= scale;
  check(r, lin_err <= 1e-6, "dN=-L rel " + num(lin_err));
}

// ---------------------------------------------------------------------- 3

void crit_hierarchy(CriterionResult& r) {
  auto recover = [&](const std::function<double(const Vec&)>& qstar,
                     const std::function<double(const Vec&)>& lap,
                     const std::function<Vec(const Vec&)>& grad) {
    std::vector<double> hs, errs;
    for (int n : {16, 32, 64}) {
      PhaseMesh m = build_mesh(standard_geometry(1.0 / n));
      FluidPoissonProblem p;
      p.volume_rhs.assign(size_t(m.n_nodes), 0.0);
      p.dirichlet.assign(size_t(m.n_nodes), 0.0);
      for (int nd = 0; nd < m.n_nodes; ++nd) {
        Vec x = m.node_pos(nd);
        p.volume_rhs[size_t(nd)] = lap(x);
        p.dirichlet[size_t(nd)] = qstar(x);
      }
      p.neumann = [&](const OuterFacet& fct, const Vec& x) {
        return double(fct.sign) * grad(x)[fct.axis];
      };
      NodalField q = solve_fluid_poisson(m, p);
      NodalField diff(size_t(m.n_nodes), 0.0);
      for (int nd = 0; nd < m.n_nodes; ++nd)
        if (m.node_in_fluid[size_t(nd)]) diff[size_t(nd)] = q[size_t(nd)] - qstar(m.node_pos(nd));
      hs.push_back(1.0 / n);
      errs.push_back(std::sqrt(l2_norm_sq(m, diff, 1, Region::Fluid)));
    }
    return fit_rate(hs, errs);
  };

  // transcendental harmonic: polynomial harmonics up to the quadratics come
  // out nodally exact on this tensor mesh, leaving nothing but rounding to
  // fit a rate through
  double rate0 = recover(
      [](const Vec& x) { return std::sin(M_PI * x[0]) * std::sinh(M_PI * x[1]); },
      [](const Vec&) { return 0.0; },
      [](const Vec& x) {
        Vec g;
        g[0] = M_PI * std::cos(M_PI * x[0]) * std::sinh(M_PI * x[1]);
        g[1] = M_PI * std::sin(M_PI * x[0]) * std::cosh(M_PI * x[1]);
        return g;
      });
  check(r, rate0 >= 1.8, "q0-shape recovery rate " + num(rate0));

  double rate1 = recover(
      [](const Vec& x) { return x[0] * x[0] * x[0] * x[0] + x[1] * x[1] * x[1]; },
      [](const Vec& x) { return 12.0 * x[0] * x[0] + 6.0 * x[1]; },
      [](const Vec& x) {
        Vec g;
        g[0] = 4.0 * x[0] * x[0] * x[0];
        g[1] = 3.0 * x[1] * x[1];
        return g;
      });
  check(r, rate1 >= 1.8, "q1-shape recovery rate " + num(rate1));

  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double jet_err = 0;
  for (int d : {2, 3})
    for (int trial = 0; trial < 50; ++trial) {
      Mat g0 = Mat::identity(d), g1, g2, g3;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          g0(i, j) += 0.4 * u(rng);
          g1(i, j) = u(rng);
          g2(i, j) = u(rng);
          g3(i, j) = u(rng);
        }
      TaylorMat jet = cofactor_jet(g0, g1, g2, g3, d);
      for (int n = 0; n <= 3; ++n) {
        Mat fd = cofactor_jet_fd(g0, g1, g2, g3, d, n, 0.25);
        Mat an = jet.deriv(n);
        double scale = std::max(1.0, max_abs(fd, d));
        jet_err = std::max(jet_err, max_abs(an - fd, d) / scale);
      }
    }
  check(r, jet_err <= 1e-6, "cofactor jet vs FD " + num(jet_err));

  GeometrySpec g = standard_geometry(1.0 / 16);
  PhaseMesh m = build_mesh(g);
  ElasticityTensor c(2.0, 1.0, 2);
  auto f = make_forcing(g, "none");
  NodalField u0 = make_initial_data(m, g, "solid_bump", 1.0);
  CompatData data = build_compat_data(m, u0, *f, 1.0, c);
  check(r, field_max(data.w1) <= 1e-14, "w1=0 for solid-only data " + num(field_max(data.w1)));
  FdMask smask;
  smask.valid = &m.node_in_solid;
  NodalField lu = linear_L_strong(m, c, u0, smask);
  double werr = 0;
  for (int p = 0; p < m.n_nodes; ++p)
    if (m.node_in_solid[size_t(p)])
      for (int i = 0; i < 2; ++i) {
        size_t k = size_t(p * 2 + i);
        werr = std::max(werr, std::abs(data.w2_solid[k] - lu[k]));
      }
  check(r, werr <= 1e-12, "w2 = L(u0) identity " + num(werr));
}

// ---------------------------------------------------------------------- 4

void crit_relaxation(CriterionResult& r) {
  GeometrySpec g = standard_geometry(1.0 / 8);
  PhaseMesh m = build_mesh(g);
  ElasticityTensor c(2.0, 1.0, 2);
  NodalField u0 = make_initial_data(m, g, "solid_bump", 1.0);
  const double dt = 1e-2, t_end = 1.0;

  double worst_gap = -1e300;
  for (int profile = 0; profile < 3; ++profile) {
    std::mt19937 rng(100 + profile);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> amp(size_t(m.n_nodes * 2), 0.0), om = amp, ph = amp;
    for (int p = 0; p < m.n_nodes; ++p)
      if (m.node_in_solid[size_t(p)])
        for (int i = 0; i < 2; ++i) {
          size_t k = size_t(p * 2 + i);
          amp[k] = u(rng);
          om[k] = 2.5 * (u(rng) + 1.0);
          ph[k] = M_PI * u(rng);
        }
    auto gfn = [&m, amp, om, ph](double t) {
      NodalField out = zero_field(m, 2);
      for (size_t k = 0; k < out.size(); ++k)
        if (amp[k] != 0.0) out[k] = amp[k] * std::cos(om[k] * t + ph[k]);
      return out;
    };
    for (double eps : {1.0, 1e-2, 1e-4, 1e-6}) {
      RelaxationTrial tr = relaxation_trial(m, c, u0, gfn, eps, dt, t_end);
      double gsup = *std::max_element(tr.g_l2.begin(), tr.g_l2.end());
      worst_gap = std::max(worst_gap, tr.sup_y - (tr.y_l2.front() + gsup));
    }
  }
  check(r, worst_gap <= 1e-8, "sup-bound slack " + num(worst_gap));

  double serr = 0;
  const double g0 = 1.7;
  for (double eps : {1.0, 1e-2, 1e-4, 1e-6}) {
    double y = 0;
    for (int n = 1; n <= 100; ++n) {
      y = relax_update(y, g0, g0, dt, eps);
      double exact = -g0 * std::expm1(-double(n) * dt / eps);
      serr = std::max(serr, std::abs(y - exact));
    }
  }
  check(r, serr <= 1e-10, "scalar closed form " + num(serr));
}

// ---------------------------------------------------------------------- 5

void crit_stepper(CriterionResult& r) {
  GeometrySpec g = standard_geometry(1.0 / 16);
  PhaseMesh m = build_mesh(g);
  SolverParams p;

  {
    RunOptions o;
    o.t_end = 0.1;  // 100 steps
    RunResult res = run_simulation(m, p, zero_field(m, 2), nullptr, nullptr, o);
    NodalField deta = res.final_state.eta;
    NodalField id = identity_configuration(m);
    for (size_t k = 0; k < deta.size(); ++k) deta[k] -= id[k];
    bool zero_energy = true;
    for (const auto& rec : res.records) zero_energy = zero_energy && rec.e_total == 0.0;
    check(r,
          res.completed && field_max(res.final_state.v) == 0.0 && field_max(deta) == 0.0 &&
              zero_energy,
          "zero data stays zero");
  }

  {
    // unforced and first-order compatible: the bump lives in the solid, so
    // there is nothing to force at the interface and the energy claim holds
    // in its own premises
    NodalField u0 = make_initial_data(m, g, "solid_bump", 1.0);
    RunOptions o;
    o.t_end = 0.2;  // 200 steps
    RunResult res = run_simulation(m, p, u0, nullptr, nullptr, o);
    check(r, res.completed, "dissipation run completed");
    EnergyCheck ec = check_energy(res.records, 1e-10);
    check(r, ec.non_increasing,
          "energy non-increasing (max rise " + num(ec.max_rise) + ", e0 " + num(ec.e0) + ")");
  }
}

// ---------------------------------------------------------------------- 6

// the shared small-data configuration of the long-run criteria: the vortex
// at a tenth of unit peak speed, with the data hierarchy switched on
struct StandardRun {
  GeometrySpec g;
  PhaseMesh m;
  ElasticityTensor c{2.0, 1.0, 2};
  std::unique_ptr<Forcing> f;
  NodalField u0;
  HierarchyTerms hier;
  StandardRun()
      : g(standard_geometry(1.0 / 16)),
        m(build_mesh(g)),
        f(make_forcing(g, "none")),
        u0(make_initial_data(m, g, "annulus_vortex", 0.1)) {
    CompatData data = build_compat_data(m, u0, *f, 1.0, c);
    hier = make_hierarchy_terms(m, data, c);
  }
};

void crit_penalty(CriterionResult& r) {
  StandardRun sr;
  std::vector<double> sups;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    SolverParams p;
    p.eps = eps;
    RunOptions o;
    o.t_end = 0.05;
    RunResult res = run_simulation(sr.m, p, sr.u0, sr.f.get(), &sr.hier, o);
    check(r, res.completed, "eps=" + num(eps) + " completed");
    // the t = 0 record measures the interpolation divergence of the data,
    // which no penalty can touch; the scheme's residual starts at step one
    double s = 0;
    for (const auto& rec : res.records)
      if (rec.step > 0) s = std::max(s, rec.div_residual);
    sups.push_back(s);
  }
  for (size_t i = 1; i < sups.size(); ++i) {
    double ratio = sups[i] / sups[i - 1];
    check(r, ratio <= 0.75, "residual ratio " + num(ratio));
  }
}

// ---------------------------------------------------------------------- 7

void crit_kappa(CriterionResult& r) {
  StandardRun sr;
  SolverParams p;
  RunOptions o;
  o.t_end = 0.5;
  o.record_every = 10;
  KappaSweep sw = kappa_sweep(sr.m, p, sr.u0, sr.f.get(), &sr.hier, {1e-1, 1e-2, 1e-3, 1e-4}, o);
  bool all_end = true;
  for (const auto& run : sw.runs) all_end = all_end && run.completed;
  check(r, all_end || sw.ratio >= 0.5,
        std::string(all_end ? "all runs reach t_end" : "breakdowns") + ", t* ratio " +
            num(sw.ratio));

  // the trajectory comparison is defined on a horizon every run survives;
  // when a run broke down early, round the common window to the recording
  // grid instead of failing the precondition
  RunOptions oc;
  oc.record_every = 10;
  oc.keep_states = true;
  double grid = p.dt * oc.record_every;
  oc.t_end = all_end ? o.t_end : grid * std::floor(0.999 * sw.min_t_star / grid);
  KappaConvergence kc =
      kappa_convergence(sr.m, p, sr.u0, sr.f.get(), &sr.hier, {1e-1, 1e-2, 1e-3}, 1e-4, oc);
  std::string ds;
  for (double d : kc.distances) ds += (ds.empty() ? "" : " ") + num(d);
  check(r, kc.strictly_decreasing,
        "distances to kappa_ref decrease at T=" + num(oc.t_end) + " (" + ds + ")");
}

// ---------------------------------------------------------------------- 8

void crit_uniqueness(CriterionResult& r) {
  StandardRun sr;
  // perturbation along a fixed unit-norm compatible field: the solid bump
  // satisfies the first-order matching conditions exactly
  NodalField dir = make_initial_data(sr.m, sr.g, "solid_bump", 1.0);
  double nrm = std::sqrt(l2_norm_sq(sr.m, dir, 2, Region::All));
  for (double& v : dir) v /= nrm;

  SolverParams p;
  RunOptions o;
  o.t_end = 0.1;
  std::vector<double> deltas = {1e-3, 1e-4, 1e-5};
  PerturbationStudy s1 =
      perturbation_study(sr.m, p, sr.u0, dir, sr.f.get(), &sr.hier, deltas, o);
  PerturbationStudy s2 =
      perturbation_study(sr.m, p, sr.u0, dir, sr.f.get(), &sr.hier, deltas, o);
  check(r, s1.csv == s2.csv, "reruns byte-identical");
  double spread = s1.max_ratio / s1.min_ratio;
  check(r, spread <= 1.1,
        "ratio spread " + num(spread) + " (r " + num(s1.min_ratio) + ".." + num(s1.max_ratio) +
            ")");
}

// ---------------------------------------------------------------------- 9

void crit_mms(CriterionResult& r) {
  RateFit t = mms_time_rate(8, 0.2, {0.02, 0.01, 0.005}, 3.0, 1e-2);
  check(r, t.rate >= 0.8 && t.rate <= 1.2, "time rate " + num(t.rate));
  RateFit s = mms_space_rate({16, 32, 64}, 2.0, 1.0);
  check(r, s.rate >= 1.8, "space rate " + num(s.rate));
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream& log) {
  struct Gate {
    const char* name;
    void (*fn)(CriterionResult&);
  };
  const Gate gates[] = {
      {"kinematic-identities", crit_kinematics},
      {"operator-suite", crit_operators},
      {"data-hierarchy", crit_hierarchy},
      {"relaxation-bound", crit_relaxation},
      {"equilibrium-dissipation", crit_stepper},
      {"penalty-consistency", crit_penalty},
      {"kappa-robustness", crit_kappa},
      {"determinism-sensitivity", crit_uniqueness},
      {"manufactured-rates", crit_mms},
  };
  std::vector<CriterionResult> out;
  int idx = 1;
  for (const Gate& gate : gates) {
    CriterionResult r;
    r.index = idx++;
    r.name = gate.name;
    r.pass = true;
    auto t0 = std::chrono::steady_clock::now();
    try {
      gate.fn(r);
    } catch (const std::exception& e) {
      r.pass = false;
      if (!r.detail.empty()) r.detail += ", ";
      r.detail += std::string("threw: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << (r.pass ? "[PASS] " : "[FAIL] ") << r.index << " " << r.name << " ("
        << num(r.seconds) << "s): " << r.detail << "\n";
    log.flush();
    out.push_back(std::move(r));
  }
  return out;
}

bool all_passed(const std::vector<CriterionResult>& rs) {
  for (const auto& r : rs)
    if (!r.pass) return false;
  return !rs.empty();
}

}  // namespace fsi
