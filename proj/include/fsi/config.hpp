#pragma once
#include <stdexcept>
#include <string>

#include "fsi/mesh.hpp"
#include "fsi/stepper.hpp"

namespace fsi {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything a run needs, read from a sectioned key = value file. Unknown
// keys, duplicate keys (both line numbers), malformed values, and gaps in the
// solid1..solidN numbering are errors; zero solids is a valid pure-fluid run.
struct RunConfig {
  GeometrySpec geometry;
  SolverParams solver;
  double t_end = 0.5;
  int record_every = 1;
  std::string initial = "zero";
  double amplitude = 1.0;
  std::string forcing = "none";
  double forcing_amplitude = 1.0;
  bool use_hierarchy = true;
};

RunConfig parse_config(const std::string& text);

// Canonical form: every key written explicitly, floats rendered as the
// shortest round-tripping decimals, so parse(emit(c)) == c holds exactly.
std::string emit_config(const RunConfig& c);

bool operator==(const RunConfig& a, const RunConfig& b);
inline bool operator!=(const RunConfig& a, const RunConfig& b) { return !(a == b); }

}  // namespace fsi
