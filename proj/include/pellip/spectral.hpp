#pragma once

#include <stdexcept>
#include <vector>

namespace pellip {

/// The exponent-dependent parabola
///   x = alpha^2 [ (p/(p-2))^2 (y/alpha^2)^2 + 1/p - 1/p^2 ],
/// scaled by alpha^2 from its alpha = 1 normal form. At p = 2 it collapses
/// to the ray { y = 0, x >= alpha^2/4 }.
struct ParabolaSpec {
    double p = 0.0;
    double alpha = 1.0;
};

struct ParabolaPoint {
    double x = 0.0;
    double y = 0.0;
    bool degenerate_ray = false;  // p == 2: x is the ray endpoint alpha^2/4
};

ParabolaPoint parabola_point(const ParabolaSpec& spec, double y);

/// Vertex real part alpha^2 (1/p - 1/p^2).
double parabola_vertex(const ParabolaSpec& spec);

struct CriticalAngles {
    double phi_star = 0.0;  // arcsin|2/p - 1|
    double phi = 0.0;       // pi/2 - phi_star
};
CriticalAngles critical_angles(double p);

struct TangencyReport {
    double phi_star = 0.0;
    double sup_arg = 0.0;        // max |arg| over the swept parabola
    double gap = 0.0;            // phi_star - sup_arg, once the sweep reaches y_max
    double min_margin = 0.0;     // min over sweep of phi_star - |arg|
    double arg_at_y_max = 0.0;   // |arg| at the largest swept |y|
    double y_max = 0.0;
    std::vector<double> ys, xs, args;  // sampled curve for plotting
};

/// Sweeps |y| on a log grid up to y_max and checks that the parabola stays
/// inside the closed sector of half-angle phi_star while its opening angle
/// fills the sector from inside. Requires p != 2.
TangencyReport tangency_check(double p, double alpha, double y_max = 1e6,
                              int points_per_decade = 160, double y_min = 1e-6,
                              bool keep_samples = false);

}  // namespace pellip
