#ifndef CSA_CAPACITY_HPP
#define CSA_CAPACITY_HPP

// Rate-dependent load ceiling: the positive root of G = 1 - e^{-G/R},
// its inverse, and the EXIT-area admissibility check.

#include <cmath>
#include <stdexcept>

#include "csa/ensemble.hpp"

namespace csa {

struct CapacityPoint {
    double rate = 0.0;
    double g_bound = 0.0;
};

// Positive solution of G = 1 - e^{-G/R} in [0,1); 0 for R = 1 by
// continuity.  Bisection: unconditionally safe near R -> 1 where the
// root approaches 0.
inline double capacity_bound(double R) {
    if (!(R > 0.0 && R <= 1.0)) throw std::invalid_argument("capacity_bound: rate outside (0,1]");
    if (R == 1.0) return 0.0;
    const auto f = [R](double g) { return g + std::expm1(-g / R); };  // < 0 below the root
    double lo = 1e-300, hi = 1.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline CapacityPoint capacity_point(double R) { return {R, capacity_bound(R)}; }

// Smallest rate that can sustain load G:  R >= -G / ln(1-G).
inline double min_rate_for_load(double G) {
    if (!(G >= 0.0 && G < 1.0)) throw std::invalid_argument("min_rate_for_load: load outside [0,1)");
    if (G == 0.0) return 1.0;
    return -G / std::log1p(-G);
}

// Area below the slice-node EXIT function over [0,1], closed form.
inline double area_sn_closed_form(double G, double R) {
    if (G < 0.0) throw std::invalid_argument("area_sn: negative load");
    if (!(R > 0.0 && R <= 1.0)) throw std::invalid_argument("area_sn: rate outside (0,1]");
    if (G == 0.0) return 0.0;
    return 1.0 + (R / G) * std::expm1(-G / R);
}

enum class AreaVerdict { admissible, violated };

// Necessary condition for an open decoding tunnel: A_b + A_s <= 1,
// with A_b equal to the rate by the Area Theorem and A_s in closed
// form.
inline AreaVerdict area_admissibility(const ComponentDistribution& dist, double G) {
    const double sum = dist.rate() + area_sn_closed_form(G, dist.rate());
    return sum > 1.0 + 1e-9 ? AreaVerdict::violated : AreaVerdict::admissible;
}

}  // namespace csa

#endif
