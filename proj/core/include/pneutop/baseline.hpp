#pragma once

#include "pneutop/config.hpp"
#include "pneutop/mesh_domain.hpp"
#include "pneutop/types.hpp"

namespace pneutop {

/// Cavity used by the rectangular chamber. An empty `params.cavity` derives
/// it from the domain: it spans from x = wall to the symmetry edge and from
/// the lowest inlet node on the symmetry edge up to nely - wall.
ElementRect baseline_cavity(const DomainModel& domain, const BaselineParams& params);

/// Binary field of a conventional rectangular chamber: solid walls of
/// thickness `wall` around the cavity on the sides facing away from the
/// symmetry edge, solid below it, void elsewhere; NDS/NDV regions are then
/// imposed. Throws ConfigError when wall < 2, the symmetry edge is not the
/// right edge, or the cavity plus walls leave the domain.
Vector baseline_rectangular(const DomainModel& domain, const BaselineParams& params);

} // namespace pneutop
