#include "fsi/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "fsi/io.hpp"
#include "fsi/kinematics.hpp"

namespace fsi {

namespace {

// chunk-free worker pool over job indices; the first captured exception wins
void parallel_jobs(int njobs, const std::function<void(int)>& fn) {
  int nt = thread_budget(njobs);
  if (nt <= 1) {
    for (int i = 0; i < njobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errs;
  errs.resize(size_t(njobs));
  auto work = [&] {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= njobs) break;
      try {
        fn(i);
      } catch (...) {
        errs[size_t(i)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(size_t(nt));
  for (int t = 0; t < nt; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

double field_l2(const PhaseMesh& m, const NodalField& f) {
  return std::sqrt(l2_norm_sq(m, f, m.dim, Region::All));
}

}  // namespace

double fit_rate(const std::vector<double>& hs, const std::vector<double>& errors) {
  if (hs.size() != errors.size() || hs.size() < 2)
    throw std::runtime_error("fit_rate: need matching lists with at least 2 points");
  size_t n = hs.size();
  double xb = 0, yb = 0;
  std::vector<double> x(n), y(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(hs[i] > 0) || !(errors[i] > 0))
      throw std::runtime_error("fit_rate: sizes and errors must be positive");
    x[i] = std::log(hs[i]);
    y[i] = std::log(errors[i]);
    xb += x[i];
    yb += y[i];
  }
  xb /= double(n);
  yb /= double(n);
  double num = 0, den = 0;
  for (size_t i = 0; i < n; ++i) {
    num += (x[i] - xb) * (y[i] - yb);
    den += (x[i] - xb) * (x[i] - xb);
  }
  return num / den;
}

int thread_budget(int njobs) {
  if (njobs <= 1) return 1;
  int cap = njobs;
  if (const char* e = std::getenv("FSI_THREADS")) {
    int v = std::atoi(e);
    if (v > 0) cap = std::min(cap, v);
  } else {
    unsigned hc = std::thread::hardware_concurrency();
    if (hc > 0) cap = std::min(cap, int(hc));
  }
  return std::max(1, cap);
}

double relax_update(double y0, double g0, double g1, double dt, double eps) {
  double em = std::expm1(-dt / eps);  // e^{-dt/eps} - 1, in [-1, 0]
  double s = (g1 - g0) / dt;
  return y0 * (1.0 + em) - g0 * em + s * (dt + eps * em);
}

RelaxationTrial relaxation_trial(const PhaseMesh& m, const ElasticityTensor& c,
                                 const NodalField& u0,
                                 const std::function<NodalField(double)>& g, double eps,
                                 double dt, double t_end) {
  if (m.solid_cells.empty())
    throw std::runtime_error("relaxation_trial: mesh has no solid region");
  if (!(eps > 0) || !(dt > 0)) throw std::runtime_error("relaxation_trial: eps, dt must be > 0");

  FdMask smask;
  smask.valid = &m.node_in_solid;
  std::vector<double> wl = lumped_node_weights(m, Region::Solid);
  auto solid_l2 = [&](const NodalField& f) {
    double s = 0;
    for (int n = 0; n < m.n_nodes; ++n) {
      if (wl[size_t(n)] == 0) continue;
      for (int i = 0; i < m.dim; ++i) {
        double v = f[size_t(n * m.dim + i)];
        s += wl[size_t(n)] * v * v;
      }
    }
    return std::sqrt(s);
  };

  RelaxationTrial out;
  NodalField y = linear_L_strong(m, c, u0, smask);
  NodalField g0 = g(0.0);
  out.times.push_back(0.0);
  out.y_l2.push_back(solid_l2(y));
  out.g_l2.push_back(solid_l2(g0));

  long nsteps = std::lround(t_end / dt);
  double t = 0;
  for (long n = 1; n <= nsteps; ++n) {
    NodalField g1 = g(double(n) * dt);
    for (int p = 0; p < m.n_nodes; ++p) {
      if (!m.node_in_solid[size_t(p)]) continue;
      for (int i = 0; i < m.dim; ++i) {
        size_t k = size_t(p * m.dim + i);
        y[k] = relax_update(y[k], g0[k], g1[k], dt, eps);
      }
    }
    t = double(n) * dt;
    out.times.push_back(t);
    out.y_l2.push_back(solid_l2(y));
    out.g_l2.push_back(solid_l2(g1));
    g0 = std::move(g1);
  }

  out.sup_y = *std::max_element(out.y_l2.begin(), out.y_l2.end());
  out.bound = out.y_l2.front();
  for (double v : out.g_l2) out.bound = std::max(out.bound, v);
  out.y_final = std::move(y);
  return out;
}

std::function<NodalField(double)> hierarchy_relax_data(const PhaseMesh& m,
                                                       const ElasticityTensor& c,
                                                       const CompatData& data) {
  return [&m, c, u0 = data.u0, w1 = data.w1_solid, w2 = data.w2_solid](double t) {
    NodalField x = u0;
    for (size_t k = 0; k < x.size(); ++k) x[k] += t * w1[k] + 0.5 * t * t * w2[k];
    FdMask smask;
    smask.valid = &m.node_in_solid;
    return linear_L_strong(m, c, x, smask);
  };
}

KappaSweep kappa_sweep(const PhaseMesh& m, const SolverParams& base, const NodalField& u0,
                       const Forcing* f, const HierarchyTerms* hier,
                       const std::vector<double>& kappas, const RunOptions& opts) {
  if (kappas.empty()) throw std::runtime_error("kappa_sweep: empty kappa list");
  KappaSweep out;
  out.runs.resize(kappas.size());
  parallel_jobs(int(kappas.size()), [&](int i) {
    SolverParams p = base;
    p.kappa = kappas[size_t(i)];
    RunResult r = run_simulation(m, p, u0, f, hier, opts);
    out.runs[size_t(i)] = {p.kappa, r.t_star, r.completed, r.stop_reason};
  });
  out.min_t_star = out.runs[0].t_star;
  out.max_t_star = out.runs[0].t_star;
  for (const auto& r : out.runs) {
    out.min_t_star = std::min(out.min_t_star, r.t_star);
    out.max_t_star = std::max(out.max_t_star, r.t_star);
  }
  out.ratio = out.max_t_star > 0 ? out.min_t_star / out.max_t_star : 0.0;
  return out;
}

KappaConvergence kappa_convergence(const PhaseMesh& m, const SolverParams& base,
                                   const NodalField& u0, const Forcing* f,
                                   const HierarchyTerms* hier, const std::vector<double>& kappas,
                                   double kappa_ref, const RunOptions& opts) {
  if (kappas.empty()) throw std::runtime_error("kappa_convergence: empty kappa list");
  RunOptions o = opts;
  o.keep_states = true;

  std::vector<double> all = kappas;
  all.push_back(kappa_ref);
  std::vector<RunResult> results(all.size());
  parallel_jobs(int(all.size()), [&](int i) {
    SolverParams p = base;
    p.kappa = all[size_t(i)];
    results[size_t(i)] = run_simulation(m, p, u0, f, hier, o);
  });
  for (size_t i = 0; i < all.size(); ++i)
    if (!results[i].completed)
      throw std::runtime_error("kappa_convergence: run at kappa=" + format_double(all[i]) +
                               " stopped early (" + results[i].stop_reason + ")");

  const std::vector<DeformationState>& ref = results.back().states;
  KappaConvergence out;
  out.kappa_ref = kappa_ref;
  out.kappas = kappas;
  for (size_t i = 0; i < kappas.size(); ++i) {
    const std::vector<DeformationState>& st = results[i].states;
    if (st.size() != ref.size())
      throw std::runtime_error("kappa_convergence: trajectory lengths differ");
    double acc = 0;
    NodalField diff(ref[0].v.size());
    for (size_t n = 1; n < ref.size(); ++n) {
      double dt = ref[n].t - ref[n - 1].t;
      for (size_t k = 0; k < diff.size(); ++k) diff[k] = st[n].v[k] - ref[n].v[k];
      acc += dt * (l2_norm_sq(m, diff, m.dim, Region::All) +
                   h1_seminorm_sq(m, diff, m.dim, Region::All));
    }
    out.distances.push_back(std::sqrt(acc));
  }
  out.strictly_decreasing = true;
  for (size_t i = 1; i < out.distances.size(); ++i)
    if (!(out.distances[i] < out.distances[i - 1])) out.strictly_decreasing = false;
  return out;
}

PerturbationStudy perturbation_study(const PhaseMesh& m, const SolverParams& p,
                                     const NodalField& u0, const NodalField& direction,
                                     const Forcing* f, const HierarchyTerms* hier,
                                     const std::vector<double>& deltas, const RunOptions& opts) {
  if (deltas.empty()) throw std::runtime_error("perturbation_study: empty delta list");
  RunOptions o = opts;
  o.keep_states = true;

  std::vector<RunResult> results(deltas.size() + 1);
  parallel_jobs(int(deltas.size()) + 1, [&](int i) {
    NodalField v0 = u0;
    if (i > 0) {
      double d = deltas[size_t(i - 1)];
      for (size_t k = 0; k < v0.size(); ++k) v0[k] += d * direction[k];
    }
    results[size_t(i)] = run_simulation(m, p, v0, f, hier, o);
  });
  for (size_t i = 0; i < results.size(); ++i)
    if (!results[i].completed)
      throw std::runtime_error("perturbation_study: run " + std::to_string(i) +
                               " stopped early (" + results[i].stop_reason + ")");

  const std::vector<DeformationState>& base = results[0].states;
  PerturbationStudy out;
  out.deltas = deltas;
  NodalField diff(base[0].v.size());
  for (size_t i = 0; i < deltas.size(); ++i) {
    const std::vector<DeformationState>& st = results[i + 1].states;
    if (st.size() != base.size())
      throw std::runtime_error("perturbation_study: trajectory lengths differ");
    double sup = 0;
    for (size_t n = 0; n < base.size(); ++n) {
      for (size_t k = 0; k < diff.size(); ++k) diff[k] = st[n].v[k] - base[n].v[k];
      sup = std::max(sup, field_l2(m, diff));
    }
    out.ratios.push_back(sup / deltas[i]);
  }
  out.max_ratio = *std::max_element(out.ratios.begin(), out.ratios.end());
  out.min_ratio = *std::min_element(out.ratios.begin(), out.ratios.end());

  std::string csv = "# fsi perturbation schema v1\ndelta,ratio\n";
  for (size_t i = 0; i < deltas.size(); ++i)
    csv += format_double(deltas[i]) + "," + format_double(out.ratios[i]) + "\n";
  out.csv = std::move(csv);
  return out;
}

EnergyCheck check_energy(const std::vector<DiagnosticsRecord>& recs, double rel_tol) {
  EnergyCheck c;
  if (recs.empty()) return c;
  c.e0 = recs[0].e_total;
  double slack = rel_tol * c.e0;
  for (size_t n = 1; n < recs.size(); ++n) {
    double rise = recs[n].e_total - recs[n - 1].e_total;
    c.max_rise = std::max(c.max_rise, rise);
    if (rise > slack && c.first_bad_step < 0) {
      c.first_bad_step = recs[n].step;
      c.non_increasing = false;
    }
  }
  return c;
}

RateFit mms_time_rate(int ncells, double t_end, const std::vector<double>& dts, double omega,
                      double eps) {
  GeometrySpec g;
  g.dim = 2;
  g.container.lo[0] = g.container.lo[1] = 0;
  g.container.hi[0] = g.container.hi[1] = 1;
  g.h = 1.0 / ncells;
  PhaseMesh m = build_mesh(g);

  // smooth profile vanishing on the walls; the two components differ so the
  // convective and cofactor couplings are exercised
  NodalField shape = zero_field(m, m.dim);
  for (int n = 0; n < m.n_nodes; ++n) {
    if (m.node_on_outer[size_t(n)]) continue;
    Vec x = m.node_pos(n);
    double s = std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]);
    shape[size_t(n * m.dim + 0)] = 0.08 * s;
    shape[size_t(n * m.dim + 1)] = -0.05 * s;
  }
  auto vstar = [&](double t) {
    NodalField v = shape;
    double a = std::sin(omega * t);
    for (double& x : v) x *= a;
    return v;
  };
  auto etastar = [&](double t) {
    NodalField e = identity_configuration(m);
    double a = (1.0 - std::cos(omega * t)) / omega;
    for (size_t k = 0; k < e.size(); ++k) e[k] += a * shape[k];
    return e;
  };

  RateFit out;
  for (double dt : dts) {
    SolverParams p;
    p.nu = 1.0;
    p.eps = eps;
    p.dt = dt;
    p.kappa = 0;
    p.include_hg = false;
    Stepper probe(m, p);

    ExtraLoad defect = [&, dt](double t) {
      NodalField w = vstar(t);
      DeformationState s;
      s.t = t - dt;
      s.v = w;
      s.eta = etastar(t);
      for (size_t k = 0; k < s.eta.size(); ++k) s.eta[k] -= dt * w[k];
      DVec wv = Eigen::Map<const DVec>(w.data(), Eigen::Index(w.size()));
      DVec load = probe.residual(wv, s);
      NodalField vd = shape;
      double a = omega * std::cos(omega * t);
      for (double& x : vd) x *= a;
      load += probe.mass_matrix() * Eigen::Map<const DVec>(vd.data(), Eigen::Index(vd.size()));
      return NodalField(load.data(), load.data() + load.size());
    };

    RunOptions ro;
    ro.t_end = t_end;
    ro.record_every = 1 << 20;
    RunResult r = run_simulation(m, p, vstar(0.0), nullptr, nullptr, ro, defect);
    if (!r.completed)
      throw std::runtime_error("mms_time_rate: run at dt=" + format_double(dt) +
                               " stopped early (" + r.stop_reason + ")");
    NodalField exact = vstar(t_end);
    NodalField diff = r.final_state.v;
    for (size_t k = 0; k < diff.size(); ++k) diff[k] -= exact[k];
    out.hs.push_back(dt);
    out.errors.push_back(field_l2(m, diff));
  }
  out.rate = fit_rate(out.hs, out.errors);
  return out;
}

namespace {

// manufactured displacement on the solid box [0.25, 0.75]^2: identity plus a
// sine bump that vanishes on the box boundary
struct SpaceMms {
  double a0 = 0.04, a1 = -0.03;

  Vec eta(const Vec& x) const {
    double b = std::sin(2 * M_PI * (x[0] - 0.25)) * std::sin(2 * M_PI * (x[1] - 0.25));
    Vec e;
    e[0] = x[0] + a0 * b;
    e[1] = x[1] + a1 * b;
    return e;
  }
  Mat grad_eta(const Vec& x) const {
    double sx = std::sin(2 * M_PI * (x[0] - 0.25)), cx = std::cos(2 * M_PI * (x[0] - 0.25));
    double sy = std::sin(2 * M_PI * (x[1] - 0.25)), cy = std::cos(2 * M_PI * (x[1] - 0.25));
    Mat f = Mat::identity(2);
    f(0, 0) += a0 * 2 * M_PI * cx * sy;
    f(0, 1) += a0 * 2 * M_PI * sx * cy;
    f(1, 0) += a1 * 2 * M_PI * cx * sy;
    f(1, 1) += a1 * 2 * M_PI * sx * cy;
    return f;
  }
  Mat stress(const ElasticityTensor& c, const Vec& x) const {
    Mat f = grad_eta(x);
    Mat b = strain_offset(f, 2);
    return matmul(f, c.contract(b), 2);
  }
  // minus the divergence of the stress, by fourth-order FD of the closed form
  Vec load(const ElasticityTensor& c, const Vec& x) const {
    double h = 1e-3;
    Vec out;
    for (int l = 0; l < 2; ++l) {
      Vec xp2 = x, xp1 = x, xm1 = x, xm2 = x;
      xp2[l] += 2 * h;
      xp1[l] += h;
      xm1[l] -= h;
      xm2[l] -= 2 * h;
      Mat d = (-1.0) * stress(c, xp2) + 8.0 * stress(c, xp1) - 8.0 * stress(c, xm1) +
              stress(c, xm2);
      for (int i = 0; i < 2; ++i) out[i] -= d(i, l) / (12 * h);
    }
    return out;
  }
};

}  // namespace

RateFit mms_space_rate(const std::vector<int>& ns, double lambda, double mu) {
  SpaceMms mms;
  ElasticityTensor c(lambda, mu, 2);
  RateFit out;

  for (int n : ns) {
    GeometrySpec g;
    g.dim = 2;
    g.container.lo[0] = g.container.lo[1] = 0;
    g.container.hi[0] = g.container.hi[1] = 1;
    Box solid;
    solid.lo[0] = solid.lo[1] = 0.25;
    solid.hi[0] = solid.hi[1] = 0.75;
    g.solids.push_back(solid);
    g.h = 1.0 / n;
    PhaseMesh m = build_mesh(g);

    NodalField target = identity_configuration(m);
    for (int p = 0; p < m.n_nodes; ++p)
      if (m.node_in_solid[size_t(p)]) {
        Vec e = mms.eta(m.node_pos(p));
        for (int i = 0; i < 2; ++i) target[size_t(p * 2 + i)] = e[i];
      }

    // weak body load over the solid cells
    DVec loadvec = DVec::Zero(m.n_nodes * 2);
    const int nsh = m.shapes.nsh;
    for (int cell : m.solid_cells) {
      auto nodes = m.cell_nodes(cell);
      for (int q = 0; q < m.quad.npts; ++q) {
        Vec xq = m.cell_lo(cell);
        for (int a = 0; a < 2; ++a) xq[a] += m.quad.xi[size_t(q)][a] * m.h[size_t(a)];
        Vec fq = mms.load(c, xq);
        double wq = m.quad.w[size_t(q)];
        for (int a = 0; a < nsh; ++a) {
          double va = m.shapes.val[size_t(q * nsh + a)];
          for (int i = 0; i < 2; ++i) loadvec[nodes[size_t(a)] * 2 + i] += wq * fq[i] * va;
        }
      }
    }

    std::vector<uint8_t> free_dof(size_t(m.n_nodes * 2), 0);
    for (int p = 0; p < m.n_nodes; ++p)
      if (m.node_in_solid[size_t(p)] && !m.node_on_interface[size_t(p)])
        for (int i = 0; i < 2; ++i) free_dof[size_t(p * 2 + i)] = 1;

    auto residual = [&](const DVec& x) {
      NodalField eta(x.data(), x.data() + x.size());
      DVec r = Eigen::Map<const DVec>(nonlinear_N(m, c, eta).load.data(), x.size());
      r -= loadvec;
      for (Eigen::Index k = 0; k < x.size(); ++k)
        if (!free_dof[size_t(k)]) r[k] = x[k] - target[size_t(k)];
      return r;
    };
    auto jacobian = [&](const DVec& x) {
      NodalField eta(x.data(), x.data() + x.size());
      std::vector<Eigen::Triplet<double>> trips;
      TensorField gs = gradient(m, eta, Region::Solid);
      const int nd = nsh * 2;
      std::vector<double> jl(size_t(nd) * size_t(nd));
      for (size_t slot = 0; slot < gs.cells.size(); ++slot) {
        int cell = gs.cells[slot];
        auto nodes = m.cell_nodes(cell);
        std::fill(jl.begin(), jl.end(), 0.0);
        for (int q = 0; q < m.quad.npts; ++q) {
          double wq = m.quad.w[size_t(q)];
          const Mat& f = gs.at(int(slot), q);
          Mat b = strain_offset(f, 2);
          Mat pb = c.contract(b);
          Mat ft = transpose(f, 2);
          for (int bb = 0; bb < nsh; ++bb) {
            const Vec& dpb = m.shapes.grad[size_t(q * nsh + bb)];
            for (int ii = 0; ii < 2; ++ii) {
              Mat e;
              for (int col = 0; col < 2; ++col) e(ii, col) = dpb[col];
              Mat dbm = matmul(transpose(e, 2), f, 2) + matmul(ft, e, 2);
              Mat dpk = matmul(e, pb, 2) + matmul(f, c.contract(dbm), 2);
              for (int a = 0; a < nsh; ++a) {
                const Vec& dpa = m.shapes.grad[size_t(q * nsh + a)];
                for (int i = 0; i < 2; ++i) {
                  double v = 0;
                  for (int l = 0; l < 2; ++l) v += dpk(i, l) * dpa[l];
                  jl[size_t((a * 2 + i) * nd + bb * 2 + ii)] += wq * v;
                }
              }
            }
          }
        }
        for (int a = 0; a < nsh; ++a)
          for (int i = 0; i < 2; ++i) {
            int row = nodes[size_t(a)] * 2 + i;
            if (!free_dof[size_t(row)]) continue;
            for (int bb = 0; bb < nsh; ++bb)
              for (int ii = 0; ii < 2; ++ii)
                trips.emplace_back(row, nodes[size_t(bb)] * 2 + ii,
                                   jl[size_t((a * 2 + i) * nd + bb * 2 + ii)]);
          }
      }
      for (int k = 0; k < m.n_nodes * 2; ++k)
        if (!free_dof[size_t(k)]) trips.emplace_back(k, k, 1.0);
      SpMat j(m.n_nodes * 2, m.n_nodes * 2);
      j.setFromTriplets(trips.begin(), trips.end());
      return j;
    };

    DVec x = Eigen::Map<const DVec>(identity_configuration(m).data(),
                                    Eigen::Index(m.n_nodes * 2));
    for (Eigen::Index k = 0; k < x.size(); ++k)
      if (!free_dof[size_t(k)]) x[k] = target[size_t(k)];
    NewtonOptions nopt;
    NewtonReport rep = solve_newton(residual, jacobian, x, nopt);
    if (!rep.converged) throw std::runtime_error("mms_space_rate: static solve did not converge");

    NodalField diff(x.data(), x.data() + x.size());
    for (size_t k = 0; k < diff.size(); ++k) diff[k] -= target[k];
    out.hs.push_back(1.0 / n);
    out.errors.push_back(std::sqrt(l2_norm_sq(m, diff, 2, Region::Solid)));
  }
  out.rate = fit_rate(out.hs, out.errors);
  return out;
}

}  // namespace fsi
