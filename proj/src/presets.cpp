#include "fsi/presets.hpp"

#include <cmath>
#include <stdexcept>

namespace fsi {

namespace {

Vec box_center(const Box& b, int d) {
  Vec c;
  for (int a = 0; a < d; ++a) c[a] = 0.5 * (b.lo[a] + b.hi[a]);
  return c;
}

double min_half_extent(const Box& b, int d, int skip_axis = -1) {
  double r = 1e300;
  for (int a = 0; a < d; ++a) {
    if (a == skip_axis) continue;
    r = std::min(r, 0.5 * (b.hi[a] - b.lo[a]));
  }
  return r;
}

// C^3 step: 0 at tau<=0, 1 at tau>=1, three vanishing derivatives at each end
double smoothstep3(double tau) {
  if (tau <= 0) return 0;
  if (tau >= 1) return 1;
  double t2 = tau * tau;
  return t2 * t2 * (35.0 - 84.0 * tau + 70.0 * t2 - 20.0 * t2 * tau);
}

// (1 - s^2)^4 on |s|<1; C^3 across the support boundary
double bump(double s) {
  if (std::fabs(s) >= 1) return 0;
  double b = 1 - s * s;
  double b2 = b * b;
  return b2 * b2;
}
// d/ds
double bump_d(double s) {
  if (std::fabs(s) >= 1) return 0;
  double b = 1 - s * s;
  return -8.0 * s * b * b * b;
}

// stream-function vortex in the (x0, x1) plane, modulated by a plateau in x2
// for d=3; u = curl(0, 0, psi * chi_z) stays divergence free exactly
NodalField annulus_vortex(const PhaseMesh& m, const GeometrySpec& g, double amp) {
  const int d = m.dim;
  Vec c = box_center(g.container, d);
  double rxy = min_half_extent(g.container, 2);
  double r_lo = 0.44 * rxy, r_hi = 0.9 * rxy;
  double rc = 0.5 * (r_lo + r_hi), w = 0.5 * (r_hi - r_lo);

  double cz = 0, rz = 1;
  if (d == 3) {
    cz = c[2];
    rz = 0.5 * (g.container.hi[2] - g.container.lo[2]);
  }

  // |bump'| peaks at s = 1/sqrt(7); dividing by that value makes the
  // amplitude the peak speed of the vortex instead of a raw stream
  // function scale that would grow with 1/w
  const double peak = 1728.0 / (343.0 * std::sqrt(7.0));

  NodalField u = zero_field(m, d);
  for (int n = 0; n < m.n_nodes; ++n) {
    Vec x = m.node_pos(n);
    double dx = x[0] - c[0], dy = x[1] - c[1];
    double r = std::hypot(dx, dy);
    if (r == 0) continue;
    double s = (r - rc) / w;
    double dpsi = amp * bump_d(s) / peak;
    double px = dpsi * dx / r, py = dpsi * dy / r;
    double chi = 1;
    if (d == 3) chi = bump((x[2] - cz) / (0.9 * rz));
    // u = (d_y[psi chi], -d_x[psi chi], 0); psi depends on (x,y), chi on z
    u[size_t(n * d + 0)] = py * chi;
    u[size_t(n * d + 1)] = -px * chi;
  }
  return u;
}

// rotation about the domain center: chi plateau covers the solid so the
// motion is rigid there, and decays to zero before the outer wall
NodalField rigid_rotation(const PhaseMesh& m, const GeometrySpec& g, double amp) {
  const int d = m.dim;
  Vec c = box_center(g.container, d);
  double rxy = min_half_extent(g.container, 2);
  double r1 = 0.4 * rxy, r2 = 0.9 * rxy;

  double cz = 0, rz = 1;
  if (d == 3) {
    cz = c[2];
    rz = 0.5 * (g.container.hi[2] - g.container.lo[2]);
  }

  NodalField u = zero_field(m, d);
  for (int n = 0; n < m.n_nodes; ++n) {
    Vec x = m.node_pos(n);
    double dx = x[0] - c[0], dy = x[1] - c[1];
    double r = std::hypot(dx, dy);
    double chi = 1.0 - smoothstep3((r - r1) / (r2 - r1));
    if (d == 3) {
      // plateau to 0.3 rz, zero from 0.9 rz
      double az = std::fabs(x[2] - cz);
      chi *= 1.0 - smoothstep3((az - 0.3 * rz) / (0.6 * rz));
    }
    u[size_t(n * d + 0)] = -amp * chi * dy;
    u[size_t(n * d + 1)] = amp * chi * dx;
  }
  return u;
}

NodalField solid_bump(const PhaseMesh& m, const GeometrySpec& g, double amp) {
  if (g.solids.empty())
    throw std::runtime_error("initial data 'solid_bump' needs at least one solid box");
  const Box& b = g.solids[0];
  const int d = m.dim;
  NodalField u = zero_field(m, d);
  for (int n = 0; n < m.n_nodes; ++n) {
    Vec x = m.node_pos(n);
    double v = amp;
    for (int a = 0; a < d; ++a) {
      double tau = (x[a] - b.lo[a]) / (b.hi[a] - b.lo[a]);
      if (tau <= 0 || tau >= 1) {
        v = 0;
        break;
      }
      double p = 4.0 * tau * (1.0 - tau);  // 1 at the center, 0 at the faces
      double p2 = p * p;
      v *= p2 * p2;
    }
    u[size_t(n * d + 0)] = v;
  }
  return u;
}

// ---------------------------------------------------------------------------

class ZeroForcing final : public Forcing {
 public:
  explicit ZeroForcing(int d) : Forcing(d) {}
  Vec f(double, const Vec&) const override { return Vec{}; }
  Vec f_t(double, const Vec&) const override { return Vec{}; }
  Vec f_tt(double, const Vec&) const override { return Vec{}; }
  Vec f_ttt(double, const Vec&) const override { return Vec{}; }
  Mat grad_f(double, const Vec&) const override { return Mat{}; }
  Mat grad_f_t(double, const Vec&) const override { return Mat{}; }
  Vec hess_quad(double, const Vec&, const Vec&) const override { return Vec{}; }
};

class GravityForcing final : public Forcing {
 public:
  GravityForcing(int d, double amp) : Forcing(d) { pull[d - 1] = -amp; }
  Vec f(double, const Vec&) const override { return pull; }
  Vec f_t(double, const Vec&) const override { return Vec{}; }
  Vec f_tt(double, const Vec&) const override { return Vec{}; }
  Vec f_ttt(double, const Vec&) const override { return Vec{}; }
  Mat grad_f(double, const Vec&) const override { return Mat{}; }
  Mat grad_f_t(double, const Vec&) const override { return Mat{}; }
  Vec hess_quad(double, const Vec&, const Vec&) const override { return Vec{}; }

 private:
  Vec pull;
};

// sinusoidal burst in time, gaussian in space, aimed along e_0
class PulseForcing final : public Forcing {
 public:
  PulseForcing(int d, double amp, Vec center, double sigma, double period)
      : Forcing(d), a(amp), c(center), s2(sigma * sigma), om(2.0 * M_PI / period) {}

  Vec f(double t, const Vec& x) const override { return (a * std::sin(om * t) * gauss(x)) * e0(); }
  Vec f_t(double t, const Vec& x) const override {
    return (a * om * std::cos(om * t) * gauss(x)) * e0();
  }
  Vec f_tt(double t, const Vec& x) const override {
    return (-a * om * om * std::sin(om * t) * gauss(x)) * e0();
  }
  Vec f_ttt(double t, const Vec& x) const override {
    return (-a * om * om * om * std::cos(om * t) * gauss(x)) * e0();
  }
  Mat grad_f(double t, const Vec& x) const override {
    Mat m;
    double g = a * std::sin(om * t) * gauss(x);
    for (int j = 0; j < dim; ++j) m(0, j) = g * (-2.0 * (x[j] - c[j]) / s2);
    return m;
  }
  Mat grad_f_t(double t, const Vec& x) const override {
    Mat m;
    double g = a * om * std::cos(om * t) * gauss(x);
    for (int j = 0; j < dim; ++j) m(0, j) = g * (-2.0 * (x[j] - c[j]) / s2);
    return m;
  }
  Vec hess_quad(double t, const Vec& x, const Vec& u) const override {
    double du = 0, uu = 0;
    for (int j = 0; j < dim; ++j) {
      du += (x[j] - c[j]) * u[j];
      uu += u[j] * u[j];
    }
    double g = a * std::sin(om * t) * gauss(x);
    Vec r;
    r[0] = g * (4.0 * du * du / (s2 * s2) - 2.0 * uu / s2);
    return r;
  }

 private:
  Vec e0() const {
    Vec v;
    v[0] = 1;
    return v;
  }
  double gauss(const Vec& x) const {
    double r2 = 0;
    for (int j = 0; j < dim; ++j) r2 += (x[j] - c[j]) * (x[j] - c[j]);
    return std::exp(-r2 / s2);
  }
  double a;
  Vec c;
  double s2, om;
};

}  // namespace

NodalField make_initial_data(const PhaseMesh& m, const GeometrySpec& g, const std::string& name,
                             double amplitude) {
  NodalField u;
  if (name == "zero")
    u = zero_field(m, m.dim);
  else if (name == "annulus_vortex")
    u = annulus_vortex(m, g, amplitude);
  else if (name == "rigid_rotation")
    u = rigid_rotation(m, g, amplitude);
  else if (name == "solid_bump")
    u = solid_bump(m, g, amplitude);
  else
    throw std::runtime_error("unknown initial data '" + name + "' (have: " +
                             initial_data_names() + ")");
  // the presets vanish on the wall by construction; make it exact
  for (int n = 0; n < m.n_nodes; ++n)
    if (m.node_on_outer[size_t(n)])
      for (int i = 0; i < m.dim; ++i) u[size_t(n * m.dim + i)] = 0;
  return u;
}

std::unique_ptr<Forcing> make_forcing(const GeometrySpec& g, const std::string& name,
                                      double amplitude) {
  if (name == "none") return std::make_unique<ZeroForcing>(g.dim);
  if (name == "gravity") return std::make_unique<GravityForcing>(g.dim, amplitude);
  if (name == "pulse") {
    Vec c = box_center(g.container, g.dim);
    double r = min_half_extent(g.container, g.dim);
    return std::make_unique<PulseForcing>(g.dim, amplitude, c, 0.3 * r, 0.25);
  }
  throw std::runtime_error("unknown forcing '" + name + "' (have: " + forcing_names() + ")");
}

const char* initial_data_names() { return "zero, annulus_vortex, rigid_rotation, solid_bump"; }
const char* forcing_names() { return "none, gravity, pulse"; }

}  // namespace fsi
