#include "pneutop/baseline.hpp"

#include "pneutop/errors.hpp"

#include <algorithm>
#include <climits>

namespace pneutop {

ElementRect baseline_cavity(const DomainModel& domain, const BaselineParams& params)
{
    if (params.wall < 2) throw ConfigError("baseline.wall must be at least 2 elements, got " + std::to_string(params.wall));
    const auto& c = domain.config();
    if (c.symmetry != Side::right) throw ConfigError("baseline chamber expects the symmetry edge on the right");
    if (!(params.cavity == ElementRect{})) return params.cavity;

    int y0 = INT_MAX;
    for (const auto& s : c.inlet)
        if (s.side == Side::right) y0 = std::min(y0, s.from);
    if (y0 == INT_MAX) throw ConfigError("baseline cavity needs an inlet on the symmetry edge or an explicit baseline.cavity");
    return {params.wall, y0, c.nelx, c.nely - params.wall};
}

Vector baseline_rectangular(const DomainModel& domain, const BaselineParams& params)
{
    const ElementRect cav = baseline_cavity(domain, params);
    const int nelx = domain.nelx(), nely = domain.nely(), t = params.wall;
    if (cav.x0 >= cav.x1 || cav.y0 >= cav.y1 || cav.x0 - t < 0 || cav.x1 > nelx || cav.y0 < 0 ||
        cav.y1 + t > nely)
        throw ConfigError("baseline cavity [" + std::to_string(cav.x0) + "," + std::to_string(cav.x1) + ")x[" +
                          std::to_string(cav.y0) + "," + std::to_string(cav.y1) + ") with wall " + std::to_string(t) +
                          " exceeds the " + std::to_string(nelx) + "x" + std::to_string(nely) + " domain");

    Vector rho = Vector::Zero(domain.num_elements());
    for (int ex = cav.x0 - t; ex < nelx; ++ex) {
        for (int ey = 0; ey < cav.y1 + t; ++ey) {
            const bool inside = ex >= cav.x0 && ex < cav.x1 && ey >= cav.y0 && ey < cav.y1;
            rho[domain.element_index(ex, ey)] = inside ? 0.0 : 1.0;
        }
    }
    for (int e = 0; e < domain.num_elements(); ++e) {
        if (domain.region(e) == Region::solid) rho[e] = 1.0;
        if (domain.region(e) == Region::void_) rho[e] = 0.0;
    }
    return rho;
}

} // namespace pneutop
