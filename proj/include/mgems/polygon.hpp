#pragma once

#include <vector>

#include "mgems/common.hpp"

namespace mgems {

// One half-plane a*p + b*q <= rhs of the polygon linearization.
struct PolygonCut {
    double a, b, rhs;
};

// Inner linearization of p^2 + q^2 <= radius^2 by the regular m-gon inscribed
// in the circle, one vertex on the positive p axis. The cuts' feasible set is
// the polygon itself (apothem radius*cos(pi/m)), so schedules can never exceed
// the true inverter limit.
std::vector<PolygonCut> polygon_ball(double radius, int m);

bool polygon_contains(const std::vector<PolygonCut>& cuts, double p, double q,
                      double tol = 0.0);

}  // namespace mgems
