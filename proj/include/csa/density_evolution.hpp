#ifndef CSA_DENSITY_EVOLUTION_HPP
#define CSA_DENSITY_EVOLUTION_HPP

// Density evolution for the iterative interference-subtraction
// process: the recursion p_l = f_s(f_b(p_{l-1})), asymptotic-threshold
// search by bisection on the channel load, the stability bound from
// the derivative of the map at zero, and EXIT-chart tables.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "csa/ensemble.hpp"

namespace csa {

// Slice-node EXIT function  f_s(q) = 1 - exp(-(G/R) q).
inline double exit_sn(double q, double G, double R) {
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("exit_sn: q outside [0,1]");
    if (G < 0.0) throw std::invalid_argument("exit_sn: negative load");
    if (!(R > 0.0 && R <= 1.0)) throw std::invalid_argument("exit_sn: rate outside (0,1]");
    return -std::expm1(-(G / R) * q);
}

struct DeTrace {
    enum class Verdict { converged_to_zero, stalled, iteration_cap };

    double load = 0.0;
    double rate = 0.0;
    std::vector<double> p;  // p_0 .. p_L
    std::vector<double> q;  // q_1 .. q_L
    Verdict verdict = Verdict::iteration_cap;
    double p_hat = 0.0, q_hat = 0.0;  // fixed point, when stalled
    std::size_t iterations = 0;

    bool converged() const { return verdict == Verdict::converged_to_zero; }
};

namespace detail {

constexpr double kStallDelta = 1e-14;

// Recursion without trace recording, for bisection probes.
inline DeTrace::Verdict de_verdict(const ComponentDistribution& dist, double G, std::size_t max_iters,
                                   double epsilon,
                                   ComponentDistribution::ExitStrategy strategy =
                                       ComponentDistribution::ExitStrategy::specialized) {
    const double gr = G / dist.rate();
    double p = -std::expm1(-gr);
    if (p < epsilon) return DeTrace::Verdict::converged_to_zero;
    for (std::size_t l = 1; l <= max_iters; ++l) {
        const double pn = -std::expm1(-gr * dist.exit_bn(p, strategy));
        if (pn < epsilon) return DeTrace::Verdict::converged_to_zero;
        if (p - pn < kStallDelta) return DeTrace::Verdict::stalled;
        p = pn;
    }
    return DeTrace::Verdict::iteration_cap;
}

}  // namespace detail

inline DeTrace de_iterate(const ComponentDistribution& dist, double G,
                          std::size_t max_iters = 50'000, double epsilon = 1e-10) {
    if (max_iters < 1) throw std::invalid_argument("de_iterate: max_iters must be >= 1");
    if (epsilon <= 0.0) throw std::invalid_argument("de_iterate: epsilon must be positive");
    if (G < 0.0) throw std::invalid_argument("de_iterate: negative load");
    DeTrace t;
    t.load = G;
    t.rate = dist.rate();
    const double gr = G / t.rate;
    double p = -std::expm1(-gr);
    t.p.push_back(p);
    if (p < epsilon) {
        t.verdict = DeTrace::Verdict::converged_to_zero;
        return t;
    }
    for (std::size_t l = 1; l <= max_iters; ++l) {
        const double qn = dist.exit_bn(p);
        const double pn = -std::expm1(-gr * qn);
        t.q.push_back(qn);
        t.p.push_back(pn);
        t.iterations = l;
        if (pn < epsilon) {
            t.verdict = DeTrace::Verdict::converged_to_zero;
            return t;
        }
        if (p - pn < detail::kStallDelta) {
            t.verdict = DeTrace::Verdict::stalled;
            t.p_hat = pn;
            t.q_hat = qn;
            return t;
        }
        p = pn;
    }
    t.verdict = DeTrace::Verdict::iteration_cap;
    return t;
}

struct ThresholdResult {
    double g_star = 0.0;
    double lower = 0.0, upper = 0.0;
    double tolerance = 0.0;
    std::vector<std::pair<double, DeTrace::Verdict>> probes;
};

// Largest load for which the recursion is driven to zero, located by
// bisection on [0,1].  Independent of the population-size split
// between activation probability and alpha: the search is on G
// directly.
inline ThresholdResult threshold(const ComponentDistribution& dist, double tolerance = 1e-4,
                                 std::size_t max_iters = 50'000, double epsilon = 1e-10,
                                 ComponentDistribution::ExitStrategy strategy =
                                     ComponentDistribution::ExitStrategy::specialized) {
    if (tolerance <= 0.0) throw std::invalid_argument("threshold: tolerance must be positive");
    ThresholdResult r;
    r.tolerance = tolerance;
    double lo = 0.0, hi = 1.0;  // G = 0 converges trivially
    bool any_converged = false;
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        const auto v = detail::de_verdict(dist, mid, max_iters, epsilon, strategy);
        r.probes.emplace_back(mid, v);
        if (v == DeTrace::Verdict::converged_to_zero) {
            lo = mid;
            any_converged = true;
        } else {
            hi = mid;
        }
    }
    r.lower = lo;
    r.upper = hi;
    r.g_star = any_converged ? 0.5 * (lo + hi) : 0.0;
    return r;
}

// Stability upper bound k / (2 B2), infinite when no picked code has
// weight-2 codewords (minimum distance of the mixture >= 3).
inline double stability_bound(const ComponentDistribution& dist) {
    const double b2 = dist.b2_mixture();
    if (b2 <= 0.0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(dist.k()) / (2.0 * b2);
}

// Central finite difference of f_s . f_b at p = 0; equals 2 G B2 / k
// when the mixture has minimum distance 2, and 0 otherwise.
inline double stability_derivative_check(const ComponentDistribution& dist, double G) {
    const double gr = G / dist.rate();
    const auto F = [&](double p) { return -std::expm1(-gr * dist.exit_bn(p)); };
    const double h = 1e-6;
    return (F(h) - F(-h)) / (2.0 * h);
}

namespace detail {

// 64-point Gauss-Legendre nodes/weights on [0,1]; exact for
// polynomials up to degree 127, which covers every EXIT mixture here.
inline const std::array<std::pair<double, double>, 64>& gauss_legendre_01() {
    static const auto table = [] {
        std::array<std::pair<double, double>, 64> t{};
        constexpr int n = 64;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (x * p0 - p1) / (x * x - 1.0);
                const double dx = p0 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * pp * pp);
            t[i] = {0.5 * (1.0 - x), 0.5 * w};
            t[n - 1 - i] = {0.5 * (1.0 + x), 0.5 * w};
        }
        return t;
    }();
    return table;
}

}  // namespace detail

template <typename F>
double integrate_01(F&& f) {
    double s = 0.0;
    for (const auto& [x, w] : detail::gauss_legendre_01()) s += w * f(x);
    return s;
}

struct ExitChart {
    struct Row {
        double p, f_b, f_s_inv;
    };
    double load = 0.0, rate = 0.0;
    std::vector<Row> rows;   // clipped to p < 1 - exp(-G/R)
    double area_bn = 0.0;    // numeric integral of f_b over [0,1]
    double area_sn = 0.0;    // numeric integral of f_s over [0,1]
};

// Chart data: f_b(p) against f_s^{-1}(p) = -(R/G) ln(1-p) on a uniform
// p-grid, plus quadrature estimates of the two EXIT areas.
inline ExitChart exit_chart(const ComponentDistribution& dist, double G, std::size_t samples) {
    if (samples < 2) throw std::invalid_argument("exit_chart: need at least 2 samples");
    if (G <= 0.0) throw std::invalid_argument("exit_chart: load must be positive");
    ExitChart c;
    c.load = G;
    c.rate = dist.rate();
    const double gr = G / c.rate;
    const double p_max = -std::expm1(-gr);
    for (std::size_t i = 0; i < samples; ++i) {
        const double p = static_cast<double>(i) / static_cast<double>(samples - 1);
        if (p >= p_max) break;
        c.rows.push_back({p, dist.exit_bn(p), -(1.0 / gr) * std::log1p(-p)});
    }
    c.area_bn = integrate_01([&](double p) { return dist.exit_bn(p); });
    c.area_sn = integrate_01([&](double q) { return -std::expm1(-gr * q); });
    return c;
}

}  // namespace csa

#endif
