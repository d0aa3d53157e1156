#include "fsi/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fsi/kinematics.hpp"

namespace fsi {

namespace {

DVec to_dvec(const NodalField& f) {
  return Eigen::Map<const DVec>(f.data(), Eigen::Index(f.size()));
}

NodalField to_nodal(const DVec& v) {
  return NodalField(v.data(), v.data() + v.size());
}

Vec quad_position(const PhaseMesh& m, int cell, int q) {
  Vec x = m.cell_lo(cell);
  for (int a = 0; a < m.dim; ++a) x[a] += m.quad.xi[size_t(q)][a] * m.h[size_t(a)];
  return x;
}

// nodal-FD H2 norm squared of a vector field over the solid, lumped weights
double solid_h2_norm_sq(const PhaseMesh& m, const NodalField& f) {
  if (m.solid_cells.empty()) return 0;
  FdMask smask;
  smask.valid = &m.node_in_solid;
  std::vector<double> wl = lumped_node_weights(m, Region::Solid);
  double s = 0;
  for (int n = 0; n < m.n_nodes; ++n) {
    if (wl[size_t(n)] == 0) continue;
    double loc = 0;
    for (int i = 0; i < m.dim; ++i) {
      double v = f[size_t(n * m.dim + i)];
      loc += v * v;
    }
    Mat g = fd_grad_vec(m, f, n, smask);
    for (int i = 0; i < m.dim; ++i)
      for (int j = 0; j < m.dim; ++j) loc += g(i, j) * g(i, j);
    for (int i = 0; i < m.dim; ++i)
      for (int a = 0; a < m.dim; ++a)
        for (int b = 0; b < m.dim; ++b) {
          double dd = fd_d2(m, f, m.dim, i, n, a, b, smask);
          loc += dd * dd;
        }
    s += wl[size_t(n)] * loc;
  }
  return s;
}

}  // namespace

HierarchyTerms make_hierarchy_terms(const PhaseMesh& m, const CompatData& data,
                                    const ElasticityTensor& c) {
  HierarchyTerms h;
  h.qbar0.assign(size_t(m.n_cells), 0.0);
  h.qbar1.assign(size_t(m.n_cells), 0.0);
  h.qbar2.assign(size_t(m.n_cells), 0.0);
  const NodalField* qs[3] = {&data.q0, &data.q1, &data.q2};
  std::vector<double>* dst[3] = {&h.qbar0, &h.qbar1, &h.qbar2};
  for (int k = 0; k < 3; ++k)
    for (int cell : m.fluid_cells) {
      double s = 0;
      for (int q = 0; q < m.quad.npts; ++q)
        s += m.quad.w[size_t(q)] * eval_scalar(m, *qs[k], cell, m.shapes, q);
      (*dst[k])[size_t(cell)] = s / m.cell_vol;
    }
  h.has_pressure = true;
  h.hg = forcing_hg(m, c, data.u0, data.w1_solid, data.w2_solid);
  h.has_hg = true;
  return h;
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const PhaseMesh& mesh, const SolverParams& p)
    : m(mesh), prm(p), elast(p.lambda, p.mu, mesh.dim) {
  if (!(prm.dt > 0)) throw std::runtime_error("Stepper: dt must be positive");
  if (!(prm.eps > 0)) throw std::runtime_error("Stepper: eps must be positive");
  if (prm.kappa < 0) throw std::runtime_error("Stepper: kappa must be nonnegative");

  const int d = m.dim, nsh = m.shapes.nsh;
  const int ndof = m.n_nodes * d;

  dof_pinned.assign(size_t(ndof), 0);
  for (int n = 0; n < m.n_nodes; ++n)
    if (m.node_on_outer[size_t(n)])
      for (int i = 0; i < d; ++i) dof_pinned[size_t(n * d + i)] = 1;

  std::vector<Eigen::Triplet<double>> mt, kt;
  for (int cell = 0; cell < m.n_cells; ++cell) {
    auto ns = m.cell_nodes(cell);
    for (int q = 0; q < m.quad.npts; ++q) {
      double w = m.quad.w[size_t(q)];
      for (int a = 0; a < nsh; ++a) {
        double va = m.shapes.val[size_t(q * nsh + a)];
        for (int b = 0; b < nsh; ++b) {
          double s = w * va * m.shapes.val[size_t(q * nsh + b)];
          for (int i = 0; i < d; ++i)
            mt.emplace_back(ns[size_t(a)] * d + i, ns[size_t(b)] * d + i, s);
        }
      }
    }
  }
  for (int cell : m.solid_cells) {
    auto ns = m.cell_nodes(cell);
    for (int q = 0; q < m.quad.npts; ++q) {
      double w = prm.kappa * m.quad.w[size_t(q)];
      for (int a = 0; a < nsh; ++a) {
        const Vec& da = m.shapes.grad[size_t(q * nsh + a)];
        for (int b = 0; b < nsh; ++b) {
          const Vec& db = m.shapes.grad[size_t(q * nsh + b)];
          double gdot = dot(da, db, d);
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
              // c^{ijkl} dw^k,_l phi^i,_j with dof components (row i, col j)
              double v = prm.lambda * da[i] * db[j] + prm.mu * da[j] * db[i];
              if (i == j) v += prm.mu * gdot;
              kt.emplace_back(ns[size_t(a)] * d + i, ns[size_t(b)] * d + j, w * v);
            }
        }
      }
    }
  }

  mass.resize(ndof, ndof);
  mass.setFromTriplets(mt.begin(), mt.end());
  kappa_stiffness.resize(ndof, ndof);
  kappa_stiffness.setFromTriplets(kt.begin(), kt.end());

  fixed_trips.reserve(mt.size() + kt.size() + size_t(ndof));
  for (const auto& t : mt)
    if (!dof_pinned[size_t(t.row())]) fixed_trips.emplace_back(t.row(), t.col(), t.value() / prm.dt);
  for (const auto& t : kt)
    if (!dof_pinned[size_t(t.row())]) fixed_trips.push_back(t);
  for (int k = 0; k < ndof; ++k)
    if (dof_pinned[size_t(k)]) fixed_trips.emplace_back(k, k, 1.0);
}

std::vector<double> Stepper::qbar_at(double t) const {
  std::vector<double> q;
  if (!hier || !hier->has_pressure) return q;
  q.resize(size_t(m.n_cells), 0.0);
  double s2 = 0.5 * t * t;
  for (int c : m.fluid_cells)
    q[size_t(c)] =
        hier->qbar0[size_t(c)] + t * hier->qbar1[size_t(c)] + s2 * hier->qbar2[size_t(c)];
  return q;
}

void Stepper::pressure_closure(const NodalField& w, const NodalField& eta_new, double t_new,
                               std::vector<double>& q_cell) const {
  q_cell.assign(size_t(m.n_cells), 0.0);
  TensorField af = cofactor_field(gradient(m, eta_new, Region::Fluid));
  std::vector<double> divs = lagrangian_div(m, af, w);
  std::vector<double> qb = qbar_at(t_new);
  for (size_t slot = 0; slot < af.cells.size(); ++slot) {
    int cell = af.cells[slot];
    double avg = 0;
    for (int q = 0; q < m.quad.npts; ++q)
      avg += m.quad.w[size_t(q)] * divs[slot * size_t(m.quad.npts) + size_t(q)];
    avg /= m.cell_vol;
    q_cell[size_t(cell)] = (qb.empty() ? 0.0 : qb[size_t(cell)]) - avg / prm.eps;
  }
}

DeformationState Stepper::initial_state(const NodalField& u0) const {
  DeformationState s;
  s.t = 0;
  s.eta = identity_configuration(m);
  s.v = u0;
  for (int n = 0; n < m.n_nodes; ++n)
    if (m.node_on_outer[size_t(n)])
      for (int i = 0; i < m.dim; ++i) s.v[size_t(n * m.dim + i)] = 0;
  // the pressure is a dependent quantity of each implicit solve; before the
  // first step only the expansion offset is known, and feeding the raw
  // interpolant of u0 through the closure would divide its interpolation
  // divergence by eps and record a spurious spike at t = 0
  s.q_cell.assign(size_t(m.n_cells), 0.0);
  std::vector<double> qb = qbar_at(0.0);
  if (!qb.empty()) s.q_cell = std::move(qb);
  return s;
}

DVec Stepper::residual(const DVec& w, const DeformationState& s) const {
  const int d = m.dim, nsh = m.shapes.nsh;
  const double dt = prm.dt, t_new = s.t + dt;

  NodalField wn = to_nodal(w);
  NodalField eta_new = s.eta;
  for (size_t k = 0; k < eta_new.size(); ++k) eta_new[k] += dt * wn[k];

  DVec r = mass * ((w - to_dvec(s.v)) / dt);
  r += kappa_stiffness * w;

  TensorField af = cofactor_field(gradient(m, eta_new, Region::Fluid));
  r += to_dvec(fluid_viscous(m, af, wn, prm.nu).load);

  // cellwise pressure from the penalty closure, then its weak pairing
  std::vector<double> divs = lagrangian_div(m, af, wn);
  std::vector<double> qb = qbar_at(t_new);
  std::vector<double> qsamples(divs.size());
  for (size_t slot = 0; slot < af.cells.size(); ++slot) {
    int cell = af.cells[slot];
    double avg = 0;
    for (int q = 0; q < m.quad.npts; ++q)
      avg += m.quad.w[size_t(q)] * divs[slot * size_t(m.quad.npts) + size_t(q)];
    avg /= m.cell_vol;
    double qc = (qb.empty() ? 0.0 : qb[size_t(cell)]) - avg / prm.eps;
    for (int q = 0; q < m.quad.npts; ++q) qsamples[slot * size_t(m.quad.npts) + size_t(q)] = qc;
  }
  r -= to_dvec(pressure_term(m, af, qsamples).load);

  if (!m.solid_cells.empty()) r += to_dvec(nonlinear_N(m, elast, eta_new).load);

  if (frc) {
    for (int cell : m.fluid_cells) {
      auto ns = m.cell_nodes(cell);
      for (int q = 0; q < m.quad.npts; ++q) {
        double wq = m.quad.w[size_t(q)];
        Vec fv = frc->f(t_new, eval_vec(m, eta_new, cell, m.shapes, q));
        for (int a = 0; a < nsh; ++a) {
          double va = m.shapes.val[size_t(q * nsh + a)];
          for (int i = 0; i < d; ++i) r[ns[size_t(a)] * d + i] -= wq * fv[i] * va;
        }
      }
    }
    for (int cell : m.solid_cells) {
      auto ns = m.cell_nodes(cell);
      for (int q = 0; q < m.quad.npts; ++q) {
        double wq = m.quad.w[size_t(q)];
        Vec fv = frc->f(t_new, quad_position(m, cell, q));
        for (int a = 0; a < nsh; ++a) {
          double va = m.shapes.val[size_t(q * nsh + a)];
          for (int i = 0; i < d; ++i) r[ns[size_t(a)] * d + i] -= wq * fv[i] * va;
        }
      }
    }
  }

  if (hier && hier->has_hg && prm.include_hg)
    r -= prm.kappa * to_dvec(hier->hg.pairing_at(t_new));
  if (extra) r -= to_dvec(extra(t_new));

  for (int k = 0; k < w.size(); ++k)
    if (dof_pinned[size_t(k)]) r[k] = w[k];
  return r;
}

SpMat Stepper::jacobian(const DVec& w, const DeformationState& s) const {
  const int d = m.dim, nsh = m.shapes.nsh;
  const int nd = nsh * d;
  const double dt = prm.dt, t_new = s.t + dt;

  NodalField wn = to_nodal(w);
  NodalField eta_new = s.eta;
  for (size_t k = 0; k < eta_new.size(); ++k) eta_new[k] += dt * wn[k];

  std::vector<Eigen::Triplet<double>> trips = fixed_trips;

  TensorField gf = gradient(m, eta_new, Region::Fluid);
  TensorField af = cofactor_field(gf);
  std::vector<double> qb = qbar_at(t_new);

  std::vector<double> jl(size_t(nd) * size_t(nd));
  std::vector<Mat> da(size_t(nd), Mat::zero());  // dt * d adj(F)[e_ii x Dphi_b]
  std::vector<double> trow(size_t(nd), 0.0);     // int of tr(A grad phi) per test dof
  std::vector<double> ddiv(size_t(nd), 0.0);     // int of the divergence variation
  std::vector<double> dtest(size_t(nd) * size_t(nd));

  for (size_t slot = 0; slot < af.cells.size(); ++slot) {
    int cell = af.cells[slot];
    auto ns = m.cell_nodes(cell);
    std::fill(jl.begin(), jl.end(), 0.0);
    std::fill(trow.begin(), trow.end(), 0.0);
    std::fill(ddiv.begin(), ddiv.end(), 0.0);
    std::fill(dtest.begin(), dtest.end(), 0.0);
    double avg = 0;

    for (int q = 0; q < m.quad.npts; ++q) {
      double wq = m.quad.w[size_t(q)];
      const Mat& f = gf.at(int(slot), q);
      const Mat& a = af.at(int(slot), q);
      Mat gw = grad_vec(m, wn, cell, m.shapes, q);
      Mat aat = matmul(a, transpose(a, d), d);

      for (int b = 0; b < nsh; ++b) {
        const Vec& db = m.shapes.grad[size_t(q * nsh + b)];
        for (int ii = 0; ii < d; ++ii) {
          Mat e;
          for (int col = 0; col < d; ++col) e(ii, col) = db[col];
          da[size_t(b * d + ii)] = dt * dadjugate(f, e, d);
        }
      }

      avg += wq * trace_prod(a, gw, d);

      for (int a_ = 0; a_ < nsh; ++a_) {
        const Vec& dpa = m.shapes.grad[size_t(q * nsh + a_)];
        for (int i = 0; i < d; ++i) {
          double tr_a = 0;
          for (int k = 0; k < d; ++k) tr_a += a(k, i) * dpa[k];
          trow[size_t(a_ * d + i)] += wq * tr_a;
        }
      }

      for (int b = 0; b < nsh; ++b) {
        const Vec& dpb = m.shapes.grad[size_t(q * nsh + b)];
        for (int ii = 0; ii < d; ++ii) {
          const Mat& dab = da[size_t(b * d + ii)];
          double divrow = 0;
          for (int k = 0; k < d; ++k) divrow += a(k, ii) * dpb[k];
          ddiv[size_t(b * d + ii)] += wq * (divrow + trace_prod(dab, gw, d));

          Mat sym = matmul(dab, transpose(a, d), d) + matmul(a, transpose(dab, d), d);
          Mat t2 = matmul(sym, transpose(gw, d), d);

          for (int a_ = 0; a_ < nsh; ++a_) {
            const Vec& dpa = m.shapes.grad[size_t(q * nsh + a_)];
            // viscous: nu (AA^T)^{jk} dw^i,_k phi^i,_j is component diagonal
            double gvis = 0;
            for (int j = 0; j < d; ++j)
              for (int k = 0; k < d; ++k) gvis += aat(j, k) * dpb[k] * dpa[j];
            jl[size_t((a_ * d + ii) * nd + b * d + ii)] += wq * prm.nu * gvis;
            for (int i = 0; i < d; ++i) {
              double gda = 0;
              for (int j = 0; j < d; ++j) gda += t2(j, i) * dpa[j];
              jl[size_t((a_ * d + i) * nd + b * d + ii)] += wq * prm.nu * gda;
              // variation of the test-side divergence under the cofactor
              double dtr = 0;
              for (int k = 0; k < d; ++k) dtr += dab(k, i) * dpa[k];
              dtest[size_t((a_ * d + i) * nd + b * d + ii)] += wq * dtr;
            }
          }
        }
      }

      if (frc) {
        Mat gradf = frc->grad_f(t_new, eval_vec(m, eta_new, cell, m.shapes, q));
        for (int a_ = 0; a_ < nsh; ++a_) {
          double va = m.shapes.val[size_t(q * nsh + a_)];
          for (int b = 0; b < nsh; ++b) {
            double vb = m.shapes.val[size_t(q * nsh + b)];
            for (int i = 0; i < d; ++i)
              for (int ii = 0; ii < d; ++ii)
                jl[size_t((a_ * d + i) * nd + b * d + ii)] -= wq * dt * gradf(i, ii) * va * vb;
          }
        }
      }
    }

    avg /= m.cell_vol;
    double qc = (qb.empty() ? 0.0 : qb[size_t(cell)]) - avg / prm.eps;
    for (int ra = 0; ra < nd; ++ra)
      for (int cb = 0; cb < nd; ++cb)
        jl[size_t(ra * nd + cb)] +=
            trow[size_t(ra)] * ddiv[size_t(cb)] / (m.cell_vol * prm.eps) -
            qc * dtest[size_t(ra * nd + cb)];

    for (int a_ = 0; a_ < nsh; ++a_)
      for (int i = 0; i < d; ++i) {
        int row = ns[size_t(a_)] * d + i;
        if (dof_pinned[size_t(row)]) continue;
        for (int b = 0; b < nsh; ++b)
          for (int ii = 0; ii < d; ++ii)
            trips.emplace_back(row, ns[size_t(b)] * d + ii,
                               jl[size_t((a_ * d + i) * nd + b * d + ii)]);
      }
  }

  if (!m.solid_cells.empty()) {
    TensorField gs = gradient(m, displacement_field(m, eta_new), Region::Solid);
    for (size_t slot = 0; slot < gs.cells.size(); ++slot) {
      int cell = gs.cells[slot];
      auto ns = m.cell_nodes(cell);
      std::fill(jl.begin(), jl.end(), 0.0);
      for (int q = 0; q < m.quad.npts; ++q) {
        double wq = m.quad.w[size_t(q)];
        Mat f = Mat::identity(d) + gs.at(int(slot), q);
        Mat b = strain_from_displacement(gs.at(int(slot), q), d);
        Mat pb = elast.contract(b);
        Mat ft = transpose(f, d);
        for (int bb = 0; bb < nsh; ++bb) {
          const Vec& dpb = m.shapes.grad[size_t(q * nsh + bb)];
          for (int ii = 0; ii < d; ++ii) {
            Mat e;
            for (int col = 0; col < d; ++col) e(ii, col) = dpb[col];
            Mat df = dt * e;
            Mat dbm = matmul(transpose(df, d), f, d) + matmul(ft, df, d);
            Mat dpk = matmul(df, pb, d) + matmul(f, elast.contract(dbm), d);
            for (int a_ = 0; a_ < nsh; ++a_) {
              const Vec& dpa = m.shapes.grad[size_t(q * nsh + a_)];
              for (int i = 0; i < d; ++i) {
                double v = 0;
                for (int l = 0; l < d; ++l) v += dpk(i, l) * dpa[l];
                jl[size_t((a_ * d + i) * nd + bb * d + ii)] += wq * v;
              }
            }
          }
        }
      }
      for (int a_ = 0; a_ < nsh; ++a_)
        for (int i = 0; i < d; ++i) {
          int row = ns[size_t(a_)] * d + i;
          if (dof_pinned[size_t(row)]) continue;
          for (int b = 0; b < nsh; ++b)
            for (int ii = 0; ii < d; ++ii)
              trips.emplace_back(row, ns[size_t(b)] * d + ii,
                                 jl[size_t((a_ * d + i) * nd + b * d + ii)]);
        }
    }
  }

  SpMat j(m.n_nodes * d, m.n_nodes * d);
  j.setFromTriplets(trips.begin(), trips.end());
  return j;
}

StepReport Stepper::step(DeformationState& s) {
  StepReport rep;
  DVec x = to_dvec(s.v);
  auto res = [&](const DVec& w) { return residual(w, s); };
  auto jac = [&](const DVec& w) { return jacobian(w, s); };
  rep.newton = solve_newton(res, jac, x, prm.newton);
  if (!rep.newton.converged) return rep;

  NodalField vnew = to_nodal(x);
  // the wall rows of the system read w = 0, which Newton satisfies only to
  // its tolerance; impose the constraint bitwise so the configuration never
  // drifts off the container
  for (int n = 0; n < m.n_nodes; ++n)
    if (m.node_on_outer[size_t(n)])
      for (int i = 0; i < m.dim; ++i) vnew[size_t(n * m.dim + i)] = 0.0;
  for (size_t k = 0; k < s.eta.size(); ++k) s.eta[k] += prm.dt * vnew[k];
  s.v = vnew;
  s.t += prm.dt;
  pressure_closure(vnew, s.eta, s.t, s.q_cell);
  rep.min_det = min_jacobian_det(m, s.eta, Region::All);
  rep.accepted = true;
  return rep;
}

DiagnosticsRecord Stepper::measure(const DeformationState& s) const {
  DiagnosticsRecord r;
  r.t = s.t;
  r.e_kin = 0.5 * l2_norm_sq(m, s.v, m.dim, Region::All);

  if (!m.solid_cells.empty()) {
    TensorField gs = gradient(m, displacement_field(m, s.eta), Region::Solid);
    double e = 0;
    for (size_t slot = 0; slot < gs.cells.size(); ++slot)
      for (int q = 0; q < m.quad.npts; ++q) {
        Mat b = strain_from_displacement(gs.at(int(slot), q), m.dim);
        double trb = trace(b, m.dim), fro = 0;
        for (int i = 0; i < m.dim; ++i)
          for (int j = 0; j < m.dim; ++j) fro += b(i, j) * b(i, j);
        e += m.quad.w[size_t(q)] * 0.25 * (prm.lambda * trb * trb + 2.0 * prm.mu * fro);
      }
    r.e_el = e;
  }
  r.e_total = r.e_kin + r.e_el;

  r.v_h1 = std::sqrt(l2_norm_sq(m, s.v, m.dim, Region::All) +
                     h1_seminorm_sq(m, s.v, m.dim, Region::All));
  r.disp_h2_solid = std::sqrt(solid_h2_norm_sq(m, displacement_field(m, s.eta)));
  r.q_l2 = std::sqrt(cell_l2_norm_sq(m, s.q_cell, m.fluid_cells));

  TensorField af = cofactor_field(gradient(m, s.eta, Region::Fluid));
  std::vector<double> divs = lagrangian_div(m, af, s.v);
  double dr = 0;
  for (size_t slot = 0; slot < af.cells.size(); ++slot) {
    double avg = 0;
    for (int q = 0; q < m.quad.npts; ++q)
      avg += m.quad.w[size_t(q)] * divs[slot * size_t(m.quad.npts) + size_t(q)];
    avg /= m.cell_vol;
    dr += m.cell_vol * avg * avg;
  }
  r.div_residual = std::sqrt(dr);
  r.min_det = min_jacobian_det(m, s.eta, Region::All);
  return r;
}

// ---------------------------------------------------------------------------

RunResult run_simulation(const PhaseMesh& m, const SolverParams& p, const NodalField& u0,
                         const Forcing* f, const HierarchyTerms* hier, const RunOptions& opts,
                         ExtraLoad extra) {
  Stepper st(m, p);
  st.set_forcing(f);
  st.set_hierarchy(hier);
  if (extra) st.set_extra_load(std::move(extra));

  RunResult out;
  DeformationState s = st.initial_state(u0);
  long nsteps = std::lround(opts.t_end / p.dt);
  if (nsteps < 1) throw std::runtime_error("run_simulation: t_end shorter than one step");

  double acc_v = 0, sup_disp = 0, sup_q = 0;
  auto finish_record = [&](DiagnosticsRecord& rec, int stepidx) {
    rec.step = stepidx;
    sup_disp = std::max(sup_disp, rec.disp_h2_solid * rec.disp_h2_solid);
    sup_q = std::max(sup_q, rec.q_l2 * rec.q_l2);
    if (stepidx > 0) acc_v += p.dt * rec.v_h1 * rec.v_h1;
    rec.z_proxy = acc_v + sup_disp + sup_q;
  };

  DiagnosticsRecord rec0 = st.measure(s);
  finish_record(rec0, 0);
  out.records.push_back(rec0);
  if (opts.keep_states) out.states.push_back(s);

  out.stop_reason = "end";
  out.completed = true;
  for (long n = 1; n <= nsteps; ++n) {
    StepReport rep = st.step(s);
    if (!rep.accepted) {
      out.stop_reason = "newton";
      out.completed = false;
      break;
    }
    DiagnosticsRecord rec = st.measure(s);
    finish_record(rec, int(n));
    rec.newton_iters = rep.newton.iterations;
    rec.newton_residual = rep.newton.residual_norm;

    bool breakdown = false;
    if (rep.min_det <= p.det_floor) {
      out.stop_reason = "det";
      breakdown = true;
    } else if (rec.z_proxy > p.z_ceiling) {
      out.stop_reason = "blowup";
      breakdown = true;
    }
    if (n % opts.record_every == 0 || n == nsteps || breakdown) out.records.push_back(rec);
    if (opts.keep_states) out.states.push_back(s);
    if (breakdown) {
      out.completed = false;
      break;
    }
  }
  out.t_star = s.t;
  out.final_state = std::move(s);
  return out;
}

ZtNorm zt_norm(const PhaseMesh& m, const std::vector<DeformationState>& states,
               bool with_quotients) {
  if (states.size() < 4)
    throw std::runtime_error("zt_norm: need at least 4 recorded states");
  ZtNorm z;
  for (size_t n = 0; n < states.size(); ++n) {
    const DeformationState& s = states[n];
    z.sup_disp_h2_sq = std::max(z.sup_disp_h2_sq, solid_h2_norm_sq(m, displacement_field(m, s.eta)));
    z.sup_q_l2_sq = std::max(z.sup_q_l2_sq, cell_l2_norm_sq(m, s.q_cell, m.fluid_cells));
    if (n == 0) continue;
    double dt = s.t - states[n - 1].t;
    z.v_h1_sq_time += dt * (l2_norm_sq(m, s.v, m.dim, Region::All) +
                            h1_seminorm_sq(m, s.v, m.dim, Region::All));
    if (with_quotients) {
      NodalField dv(s.v.size());
      for (size_t k = 0; k < dv.size(); ++k) dv[k] = (s.v[k] - states[n - 1].v[k]) / dt;
      z.quot_v_sq_time += dt * l2_norm_sq(m, dv, m.dim, Region::All);
      std::vector<double> dq(s.q_cell.size());
      for (size_t k = 0; k < dq.size(); ++k) dq[k] = (s.q_cell[k] - states[n - 1].q_cell[k]) / dt;
      z.sup_quot_q_sq = std::max(z.sup_quot_q_sq, cell_l2_norm_sq(m, dq, m.fluid_cells));
    }
  }
  z.total = z.v_h1_sq_time + z.sup_disp_h2_sq + z.sup_q_l2_sq;
  if (with_quotients) z.total += z.quot_v_sq_time + z.sup_quot_q_sq;
  return z;
}

}  // namespace fsi
