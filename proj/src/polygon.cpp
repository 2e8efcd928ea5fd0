#include "mgems/polygon.hpp"

#include <cmath>
#include <numbers>

namespace mgems {

std::vector<PolygonCut> polygon_ball(double radius, int m) {
    if (m < 3) throw ScenarioError("polygon.sides", "polygon needs at least 3 sides");
    if (radius <= 0.0) throw ScenarioError("polygon.radius", "radius must be positive");
    std::vector<PolygonCut> cuts;
    cuts.reserve(m);
    const double apothem = radius * std::cos(std::numbers::pi / m);
    for (int j = 0; j < m; ++j) {
        // Outward normal of the edge between vertices j and j+1.
        const double psi = (2.0 * j + 1.0) * std::numbers::pi / m;
        cuts.push_back({std::cos(psi), std::sin(psi), apothem});
    }
    return cuts;
}

bool polygon_contains(const std::vector<PolygonCut>& cuts, double p, double q, double tol) {
    for (const auto& c : cuts)
        if (c.a * p + c.b * q > c.rhs + tol) return false;
    return true;
}

}  // namespace mgems
