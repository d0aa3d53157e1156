#pragma once
#include <memory>
#include <string>

#include "fsi/compat.hpp"
#include "fsi/fields.hpp"
#include "fsi/mesh.hpp"

namespace fsi {

// Named initial velocity fields evaluated at mesh nodes.
//
//   zero            u0 = 0
//   annulus_vortex  curl of a C^3 radial bump stream function; exactly
//                   divergence free, supported on an annulus between the
//                   solid and the outer wall, so it vanishes on both
//   rigid_rotation  rotation about the domain center with a C^3 radial
//                   plateau: rigid on the solid, zero near the wall,
//                   exactly divergence free
//   solid_bump      C^3 product bump inside the first solid box, zero
//                   everywhere in the fluid (component 0 only)
//
// Unknown names throw with the list of valid ones.
NodalField make_initial_data(const PhaseMesh& m, const GeometrySpec& g, const std::string& name,
                             double amplitude = 1.0);

// Named body forces with analytic time and space derivatives.
//
//   none     f = 0
//   gravity  constant pull on the last coordinate, f = -amplitude e_{d-1}
//   pulse    amplitude sin(2 pi t / period) * gaussian(x) e_0
//
std::unique_ptr<Forcing> make_forcing(const GeometrySpec& g, const std::string& name,
                                      double amplitude = 1.0);

const char* initial_data_names();  // comma separated, for CLI help
const char* forcing_names();

}  // namespace fsi
