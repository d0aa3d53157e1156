#include <string>

#include "doctest.h"
#include "fsi/config.hpp"

using namespace fsi;

namespace {

RunConfig sample_config() {
  RunConfig c;
  c.geometry.dim = 2;
  c.geometry.container.lo[0] = 0.0;
  c.geometry.container.lo[1] = -0.5;
  c.geometry.container.hi[0] = 2.0;
  c.geometry.container.hi[1] = 1.5;
  Box s;
  s.lo[0] = 0.5;
  s.lo[1] = 0.25;
  s.hi[0] = 1.0;
  s.hi[1] = 0.75;
  c.geometry.solids.push_back(s);
  c.geometry.h = 0.0625;
  c.solver.nu = 1.5;
  c.solver.lambda = 2.25;
  c.solver.mu = 0.75;
  c.solver.kappa = 1e-3;
  c.solver.eps = 1e-5;
  c.solver.dt = 5e-4;
  c.solver.include_hg = false;
  c.t_end = 0.25;
  c.record_every = 4;
  c.initial = "annulus_vortex";
  c.amplitude = 1.375;
  c.forcing = "gravity";
  c.forcing_amplitude = 0.5;
  c.use_hierarchy = false;
  return c;
}

}  // namespace

TEST_CASE("emit then parse is the identity") {
  RunConfig c = sample_config();
  std::string text = emit_config(c);
  RunConfig back = parse_config(text);
  CHECK(back == c);
  // canonical form is a fixed point
  CHECK(emit_config(back) == text);
}

TEST_CASE("a minimal file gets the documented defaults") {
  RunConfig c = parse_config(
      "[domain]\n"
      "dim = 2\n"
      "lo = 0 0\n"
      "hi = 1 1\n"
      "h = 0.125\n");
  CHECK(c.geometry.solids.empty());
  CHECK(c.solver.nu == 1.0);
  CHECK(c.solver.kappa == 1e-2);
  CHECK(c.solver.eps == 1e-4);
  CHECK(c.solver.dt == 1e-3);
  CHECK(c.t_end == 0.5);
  CHECK(c.initial == "zero");
  CHECK(c.forcing == "none");
  CHECK(c.use_hierarchy);
}

TEST_CASE("comments, blank lines, and spacing are tolerated") {
  RunConfig c = parse_config(
      "# header comment\n"
      "\n"
      "[domain]\n"
      "  dim=2   # inline comment\n"
      "lo =   0    0\n"
      "hi= 1 1\n"
      "h = 0.25\n"
      "\n"
      "[solver]\n"
      "nu = 2.0\n");
  CHECK(c.solver.nu == 2.0);
  CHECK(c.geometry.h == 0.25);
}

TEST_CASE("solid sections are read in order") {
  RunConfig c = parse_config(
      "[domain]\n"
      "dim = 2\n"
      "lo = 0 0\n"
      "hi = 4 1\n"
      "h = 0.125\n"
      "[solid1]\n"
      "lo = 0.5 0.25\n"
      "hi = 1.0 0.75\n"
      "[solid2]\n"
      "lo = 2.5 0.25\n"
      "hi = 3.0 0.75\n");
  REQUIRE(c.geometry.solids.size() == 2);
  CHECK(c.geometry.solids[0].lo[0] == 0.5);
  CHECK(c.geometry.solids[1].lo[0] == 2.5);
}

TEST_CASE("malformed files are rejected with line information") {
  const std::string base =
      "[domain]\n"
      "dim = 2\n"
      "lo = 0 0\n"
      "hi = 1 1\n"
      "h = 0.125\n";

  SUBCASE("duplicate keys name both lines") {
    CHECK_THROWS_WITH_AS(parse_config(base + "[solver]\nnu = 1\nnu = 2\n"),
                         doctest::Contains("duplicate key"), ConfigError);
  }
  SUBCASE("unknown keys are flagged") {
    CHECK_THROWS_WITH_AS(parse_config(base + "[solver]\nviscosity = 1\n"),
                         doctest::Contains("viscosity"), ConfigError);
  }
  SUBCASE("unknown sections are flagged") {
    CHECK_THROWS_WITH_AS(parse_config(base + "[turbulence]\nmodel = none\n"),
                         doctest::Contains("turbulence"), ConfigError);
  }
  SUBCASE("missing required keys are flagged") {
    CHECK_THROWS_AS(parse_config("[domain]\ndim = 2\nlo = 0 0\nhi = 1 1\n"), ConfigError);
  }
  SUBCASE("solid numbering gaps are flagged") {
    CHECK_THROWS_WITH_AS(parse_config(base + "[solid2]\nlo = 0.25 0.25\nhi = 0.75 0.75\n"),
                         doctest::Contains("solid1"), ConfigError);
  }
  SUBCASE("malformed numbers are flagged") {
    CHECK_THROWS_AS(parse_config(base + "[solver]\nnu = 1.2.3\n"), ConfigError);
  }
  SUBCASE("malformed booleans are flagged") {
    CHECK_THROWS_AS(parse_config(base + "[run]\nuse_hierarchy = yes\n"), ConfigError);
  }
  SUBCASE("vector arity must match the dimension") {
    CHECK_THROWS_AS(parse_config("[domain]\ndim = 2\nlo = 0 0 0\nhi = 1 1\nh = 0.125\n"),
                    ConfigError);
  }
  SUBCASE("dimension must be 2 or 3") {
    CHECK_THROWS_AS(parse_config("[domain]\ndim = 4\nlo = 0 0\nhi = 1 1\nh = 0.125\n"),
                    ConfigError);
  }
  SUBCASE("lines outside any section are flagged") {
    CHECK_THROWS_AS(parse_config("dim = 2\n" + base), ConfigError);
  }
}

TEST_CASE("three dimensional domains round trip") {
  RunConfig c;
  c.geometry.dim = 3;
  for (int a = 0; a < 3; ++a) {
    c.geometry.container.lo[a] = 0.0;
    c.geometry.container.hi[a] = 1.0;
  }
  Box s;
  for (int a = 0; a < 3; ++a) {
    s.lo[a] = 0.375;
    s.hi[a] = 0.625;
  }
  c.geometry.solids.push_back(s);
  c.geometry.h = 0.125;
  RunConfig back = parse_config(emit_config(c));
  CHECK(back == c);
  CHECK(back.geometry.solids.size() == 1);
}
