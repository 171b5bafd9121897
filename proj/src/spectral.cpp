#include "pellip/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace pellip {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

ParabolaPoint parabola_point(const ParabolaSpec& spec, double y) {
    if (!(spec.p > 1.0)) throw std::invalid_argument("parabola_point: requires p > 1");
    ParabolaPoint pt;
    pt.y = y;
    if (spec.p == 2.0) {
        pt.degenerate_ray = true;
        pt.x = spec.alpha * spec.alpha / 4.0;
        pt.y = 0.0;
        return pt;
    }
    const double a2 = spec.alpha * spec.alpha;
    const double u = y / a2;  // imaginary part in the alpha = 1 normal form
    const double c = (spec.p / (spec.p - 2.0)) * (spec.p / (spec.p - 2.0));
    pt.x = a2 * (c * u * u + 1.0 / spec.p - 1.0 / (spec.p * spec.p));
    return pt;
}

double parabola_vertex(const ParabolaSpec& spec) {
    return spec.alpha * spec.alpha * (1.0 / spec.p - 1.0 / (spec.p * spec.p));
}

CriticalAngles critical_angles(double p) {
    if (!(p > 1.0)) throw std::invalid_argument("critical_angles: requires p > 1");
    CriticalAngles a;
    a.phi_star = std::asin(std::abs(2.0 / p - 1.0));
    a.phi = kPi / 2.0 - a.phi_star;
    return a;
}

TangencyReport tangency_check(double p, double alpha, double y_max, int points_per_decade,
                              double y_min, bool keep_samples) {
    if (p == 2.0) throw std::invalid_argument("tangency_check: parabola degenerates at p = 2");
    TangencyReport rep;
    rep.phi_star = critical_angles(p).phi_star;
    rep.y_max = y_max;
    rep.sup_arg = 0.0;
    rep.min_margin = rep.phi_star;
    const ParabolaSpec spec{p, alpha};
    const double decades = std::log10(y_max / y_min);
    const int n = std::max(2, static_cast<int>(decades * points_per_decade));
    for (int k = 0; k <= n; ++k) {
        const double y = y_min * std::pow(y_max / y_min, static_cast<double>(k) / n);
        const ParabolaPoint pt = parabola_point(spec, y);
        const double arg = std::abs(std::atan2(pt.y, pt.x));
        rep.sup_arg = std::max(rep.sup_arg, arg);
        rep.min_margin = std::min(rep.min_margin, rep.phi_star - arg);
        if (k == n) rep.arg_at_y_max = arg;
        if (keep_samples) {
            rep.ys.push_back(y);
            rep.xs.push_back(pt.x);
            rep.args.push_back(arg);
        }
    }
    rep.gap = rep.phi_star - rep.sup_arg;
    return rep;
}

}  // namespace pellip
