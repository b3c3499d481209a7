#ifndef CSA_OPTIMIZER_HPP
#define CSA_OPTIMIZER_HPP

// Differential-evolution search for the selection probabilities that
// maximize the asymptotic threshold at a fixed scheme rate.  The rate
// equality is enforced by projection: normalize to the simplex, then
// exponentially tilt the weights until the expected code length hits
// k/R (a monotone one-dimensional problem).

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include <json.hpp>

#include "csa/density_evolution.hpp"
#include "csa/ensemble.hpp"

namespace csa {

struct DesignProblem {
    std::vector<ComponentSpec> candidates;  // probabilities ignored
    double target_rate = 0.0;
    double rate_tolerance = 1e-9;
    double min_local_rate = 0.0;  // drop candidates with k/n below this
    std::size_t population = 40;
    std::size_t generations = 200;
    double mutation = 0.7;
    double crossover = 0.9;
    std::uint64_t seed = 1;
    double threshold_tolerance = 1e-4;
    EnsembleOptions ensemble;
    std::size_t workers = 1;
};

struct EvaluationMetrics {
    double rate = 0.0;
    double threshold = 0.0;
    double stability_bound = 0.0;
    double energy_increment_db = 0.0;
};

struct DesignResult {
    std::vector<double> lambda;  // aligned with DesignProblem::candidates
    double threshold = 0.0;
    double rate = 0.0;
    double stability_bound = 0.0;
    std::vector<double> trajectory;  // best threshold per generation
};

// Single-point evaluation of a probability vector over a candidate
// list (entries with zero probability are dropped).
inline EvaluationMetrics evaluate(const std::vector<ComponentSpec>& candidates, std::span<const double> lambda,
                                  const EnsembleOptions& ens = {}, double threshold_tolerance = 1e-4) {
    if (candidates.size() != lambda.size()) throw std::invalid_argument("evaluate: size mismatch");
    double sum = 0.0;
    for (double l : lambda) {
        if (l < -1e-12) throw std::invalid_argument("evaluate: negative probability");
        sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("evaluate: probabilities do not sum to 1");
    std::vector<ComponentSpec> entries;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (lambda[i] <= 0.0) continue;
        ComponentSpec s = candidates[i];
        s.probability = lambda[i];
        entries.push_back(std::move(s));
    }
    const ComponentDistribution dist(entries, ens);
    EvaluationMetrics m;
    m.rate = dist.rate();
    m.threshold = threshold(dist, threshold_tolerance).g_star;
    m.stability_bound = stability_bound(dist);
    m.energy_increment_db = dist.energy_increment_db();
    return m;
}

namespace detail {

// Tilt the simplex vector p so that sum lambda_i n_i = n_target:
// lambda_i(t) = p_i exp(-t n_i) / Z(t).  The mean length is strictly
// decreasing in t, so bisection on t suffices.  Returns nothing when
// the target is outside the reachable range of the support.
inline std::optional<std::vector<double>> project_to_rate(std::span<const double> raw,
                                                          std::span<const double> lengths, double n_target) {
    const std::size_t d = raw.size();
    std::vector<double> p(d);
    double sum = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        p[i] = raw[i] > 0.0 ? raw[i] : 0.0;
        sum += p[i];
    }
    if (sum <= 0.0) return std::nullopt;
    double nmin = std::numeric_limits<double>::infinity(), nmax = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        p[i] /= sum;
        if (p[i] > 0.0) {
            nmin = std::min(nmin, lengths[i]);
            nmax = std::max(nmax, lengths[i]);
        }
    }
    const auto tilted = [&](double t) {
        std::vector<double> l(d, 0.0);
        double emax = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < d; ++i)
            if (p[i] > 0.0) emax = std::max(emax, -t * (lengths[i] - n_target));
        double z = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            if (p[i] > 0.0) z += (l[i] = p[i] * std::exp(-t * (lengths[i] - n_target) - emax));
        for (double& v : l) v /= z;
        return l;
    };
    const auto mean_len = [&](const std::vector<double>& l) {
        double m = 0.0;
        for (std::size_t i = 0; i < d; ++i) m += l[i] * lengths[i];
        return m;
    };
    if (nmax - nmin < 1e-12) {
        if (std::abs(nmin - n_target) > 1e-9) return std::nullopt;
        return p;
    }
    if (n_target <= nmin + 1e-12 || n_target >= nmax - 1e-12) return std::nullopt;
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 60 && mean_len(tilted(lo)) < n_target; ++i) lo *= 2.0;
    for (int i = 0; i < 60 && mean_len(tilted(hi)) > n_target; ++i) hi *= 2.0;
    if (mean_len(tilted(lo)) < n_target || mean_len(tilted(hi)) > n_target) return std::nullopt;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mean_len(tilted(mid)) > n_target ? lo : hi) = mid;
    }
    return tilted(0.5 * (lo + hi));
}

}  // namespace detail

// DE/rand/1/bin over the simplex.  Deterministic for a fixed seed:
// all random draws happen sequentially in the main thread, objective
// evaluations may run in parallel.
inline DesignResult optimize(const DesignProblem& problem) {
    if (problem.candidates.empty()) throw std::invalid_argument("optimize: empty candidate list");
    if (!(problem.target_rate > 0.0 && problem.target_rate < 1.0))
        throw std::invalid_argument("optimize: target rate outside (0,1)");
    if (problem.population < 5) throw std::invalid_argument("optimize: population must be >= 5");

    // Respect the minimum local rate by restricting the candidate list.
    std::vector<std::size_t> index;  // filtered -> original
    for (std::size_t i = 0; i < problem.candidates.size(); ++i) {
        const auto& c = problem.candidates[i];
        const double local_rate = static_cast<double>(c.k) / static_cast<double>(c.n);
        if (local_rate >= problem.min_local_rate - 1e-12) index.push_back(i);
    }
    if (index.empty()) throw std::invalid_argument("optimize: no candidate satisfies the local-rate floor");
    const std::size_t d = index.size();
    const std::size_t k = problem.candidates[index[0]].k;
    for (std::size_t i : index)
        if (problem.candidates[i].k != k) throw std::invalid_argument("optimize: mixed code dimensions");
    const double n_target = static_cast<double>(k) / problem.target_rate;
    std::vector<double> lengths(d);
    for (std::size_t i = 0; i < d; ++i) lengths[i] = static_cast<double>(problem.candidates[index[i]].n);

    std::vector<ComponentSpec> filtered;
    for (std::size_t i : index) filtered.push_back(problem.candidates[i]);

    const auto fitness = [&](const std::vector<double>& lambda) -> double {
        if (lambda.empty()) return -std::numeric_limits<double>::infinity();
        try {
            return evaluate(filtered, lambda, problem.ensemble, problem.threshold_tolerance).threshold;
        } catch (const std::invalid_argument&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    std::mt19937_64 rng(problem.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const std::size_t P = problem.population;
    std::vector<std::vector<double>> pop(P);
    std::vector<double> fit(P, -std::numeric_limits<double>::infinity());

    // Seed every rate-feasible single candidate and the projected
    // uniform vector, then random simplex points.
    std::size_t filled = 0;
    for (std::size_t i = 0; i < d && filled < P; ++i) {
        if (std::abs(lengths[i] - n_target) < 1e-9) {
            std::vector<double> v(d, 0.0);
            v[i] = 1.0;
            pop[filled++] = std::move(v);
        }
    }
    if (filled < P) {
        std::vector<double> u(d, 1.0 / static_cast<double>(d));
        if (auto pr = detail::project_to_rate(u, lengths, n_target)) pop[filled++] = std::move(*pr);
    }
    while (filled < P) {
        std::vector<double> w(d);
        for (double& x : w) x = -std::log(std::max(u01(rng), 1e-300));
        if (auto pr = detail::project_to_rate(w, lengths, n_target))
            pop[filled++] = std::move(*pr);
        else
            pop[filled++] = {};  // infeasible support; penalized
    }

    const auto evaluate_batch = [&](const std::vector<std::vector<double>>& members, std::vector<double>& out) {
        out.assign(members.size(), 0.0);
        const std::size_t nw = std::max<std::size_t>(1, problem.workers);
        if (nw == 1) {
            for (std::size_t i = 0; i < members.size(); ++i) out[i] = fitness(members[i]);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto work = [&] {
            try {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= members.size()) break;
                    out[i] = fitness(members[i]);
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < nw; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    };

    evaluate_batch(pop, fit);

    std::size_t best = 0;
    for (std::size_t i = 1; i < P; ++i)
        if (fit[i] > fit[best]) best = i;
    if (pop[best].empty())
        throw std::runtime_error("optimize: target rate unreachable on the candidate supports");

    DesignResult result;
    result.trajectory.reserve(problem.generations);
    std::uniform_int_distribution<std::size_t> pick(0, P - 1);
    std::uniform_int_distribution<std::size_t> pickdim(0, d - 1);
    for (std::size_t gen = 0; gen < problem.generations; ++gen) {
        std::vector<std::vector<double>> trials(P);
        for (std::size_t i = 0; i < P; ++i) {
            std::size_t r1 = pick(rng), r2 = pick(rng), r3 = pick(rng);
            while (r1 == i) r1 = pick(rng);
            while (r2 == i || r2 == r1) r2 = pick(rng);
            while (r3 == i || r3 == r1 || r3 == r2) r3 = pick(rng);
            const auto& a = pop[r1].empty() ? pop[best] : pop[r1];
            const auto& b = pop[r2].empty() ? pop[best] : pop[r2];
            const auto& c = pop[r3].empty() ? pop[best] : pop[r3];
            const auto& target = pop[i].empty() ? pop[best] : pop[i];
            std::vector<double> trial(d);
            const std::size_t jrand = pickdim(rng);
            for (std::size_t j = 0; j < d; ++j) {
                const double mutant = a[j] + problem.mutation * (b[j] - c[j]);
                trial[j] = (u01(rng) < problem.crossover || j == jrand) ? mutant : target[j];
            }
            if (auto pr = detail::project_to_rate(trial, lengths, n_target))
                trials[i] = std::move(*pr);
            else
                trials[i] = {};
        }
        std::vector<double> trial_fit;
        evaluate_batch(trials, trial_fit);
        for (std::size_t i = 0; i < P; ++i)
            if (trial_fit[i] > fit[i]) {
                pop[i] = std::move(trials[i]);
                fit[i] = trial_fit[i];
            }
        best = 0;
        for (std::size_t i = 1; i < P; ++i)
            if (fit[i] > fit[best]) best = i;
        result.trajectory.push_back(fit[best]);
    }

    if (pop[best].empty() || !std::isfinite(fit[best]))
        throw std::runtime_error("optimize: no feasible probability vector found");

    const EvaluationMetrics m = evaluate(filtered, pop[best], problem.ensemble, problem.threshold_tolerance);
    result.lambda.assign(problem.candidates.size(), 0.0);
    for (std::size_t i = 0; i < d; ++i) result.lambda[index[i]] = pop[best][i];
    result.threshold = m.threshold;
    result.rate = m.rate;
    result.stability_bound = m.stability_bound;
    if (std::abs(m.rate - problem.target_rate) > std::max(problem.rate_tolerance, 1e-9) * 10.0 + 1e-9)
        throw std::runtime_error("optimize: returned rate misses the target");
    return result;
}

// ---- JSON ----------------------------------------------------------------

inline DesignProblem design_problem_from_json(const nlohmann::json& j) {
    DesignProblem p;
    for (const auto& item : j.at("candidates")) {
        nlohmann::json c = item;
        if (!c.contains("p")) c["p"] = 0.0;
        p.candidates.push_back(component_spec_from_json(c));
    }
    p.target_rate = j.at("target_rate").get<double>();
    p.min_local_rate = j.value("min_local_rate", 0.0);
    p.population = j.value("population", std::size_t{40});
    p.generations = j.value("generations", std::size_t{200});
    p.mutation = j.value("mutation", 0.7);
    p.crossover = j.value("crossover", 0.9);
    p.seed = j.value("seed", std::uint64_t{1});
    p.threshold_tolerance = j.value("threshold_tolerance", 1e-4);
    if (j.contains("ensemble_samples")) p.ensemble.samples = j.at("ensemble_samples").get<std::uint64_t>();
    if (j.contains("ensemble_seed")) p.ensemble.seed = j.at("ensemble_seed").get<std::uint64_t>();
    p.workers = j.value("workers", std::size_t{1});
    return p;
}

inline nlohmann::json design_result_to_json(const DesignProblem& problem, const DesignResult& r) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < problem.candidates.size(); ++i) {
        if (r.lambda[i] <= 0.0) continue;
        ComponentSpec s = problem.candidates[i];
        s.probability = r.lambda[i];
        entries.push_back(component_spec_to_json(s));
    }
    return nlohmann::json{{"lambda", r.lambda},
                          {"entries", entries},
                          {"threshold", r.threshold},
                          {"rate", r.rate},
                          {"stability_bound", r.stability_bound},
                          {"trajectory", r.trajectory}};
}

}  // namespace csa

#endif
