#ifndef CSA_ENSEMBLE_HPP
#define CSA_ENSEMBLE_HPP

// Component-code distributions: the set of erasure codes users draw
// from, their selection probabilities, derived rate/edge statistics,
// and expectations over the uniform random-matrix ensemble.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "csa/linear_code.hpp"

namespace csa {

enum class ComponentKind { explicit_code, random_ensemble, mds, repetition };

struct ComponentSpec {
    ComponentKind kind = ComponentKind::explicit_code;
    double probability = 0.0;
    std::size_t n = 0, k = 0;
    std::optional<BinaryLinearCode> code;  // explicit / repetition

    static ComponentSpec explicit_code(BinaryLinearCode c, double p) {
        ComponentSpec s;
        s.kind = ComponentKind::explicit_code;
        s.probability = p;
        s.n = c.n();
        s.k = c.k();
        s.code = std::move(c);
        return s;
    }
    static ComponentSpec from_generator(const std::string& text, double p) {
        return explicit_code(BinaryLinearCode::from_string(text), p);
    }
    static ComponentSpec random_ensemble(std::size_t n, std::size_t k, double p) {
        ComponentSpec s;
        s.kind = ComponentKind::random_ensemble;
        s.probability = p;
        s.n = n;
        s.k = k;
        return s;
    }
    static ComponentSpec mds(std::size_t n, std::size_t k, double p) {
        if (k < 1 || k >= n || n > 64) throw std::invalid_argument("mds entry: need 1 <= k < n <= 64");
        ComponentSpec s;
        s.kind = ComponentKind::mds;
        s.probability = p;
        s.n = n;
        s.k = k;
        return s;
    }
    static ComponentSpec repetition(std::size_t n, double p) {
        ComponentSpec s;
        s.kind = ComponentKind::repetition;
        s.probability = p;
        s.n = n;
        s.k = 1;
        s.code = BinaryLinearCode::repetition(n);
        return s;
    }
};

// Expected information functions and weight-2 count over the uniform
// ensemble of k x n binary generator matrices with rank k, no all-zero
// column and minimum distance at least 2.
struct EnsembleExpectation {
    std::size_t n = 0, k = 0;
    std::vector<double> e;         // E[e_g], g = 0..n
    std::vector<double> e_stderr;  // all zero in exact mode
    double b2 = 0.0;
    double b2_stderr = 0.0;
    std::uint64_t member_count = 0;  // admissible matrices (exact mode only)
    std::uint64_t samples = 0;       // sampled mode only
    bool exact = true;
};

namespace detail {

// Admissibility from the column-value counts: rank k and no codeword
// of weight < 2 (weight of message u is the number of columns v with
// odd <u,v>).  counts has size 2^k, index 0 unused (no idle columns).
inline bool ensemble_admissible(std::span<const std::uint64_t> counts, std::size_t k) {
    Gf2Basis basis;
    for (std::uint64_t v = 1; v < counts.size(); ++v)
        if (counts[v]) basis.insert(v);
    if (basis.rank() != k) return false;
    for (std::uint64_t u = 1; u < (std::uint64_t{1} << k); ++u) {
        std::uint64_t w = 0;
        for (std::uint64_t v = 1; v < counts.size(); ++v)
            if (counts[v] && (std::popcount(u & v) & 1)) {
                w += counts[v];
                if (w >= 2) break;
            }
        if (w < 2) return false;
    }
    return true;
}

inline std::uint64_t ensemble_weight2(std::span<const std::uint64_t> counts, std::size_t k) {
    std::uint64_t b2 = 0;
    for (std::uint64_t u = 1; u < (std::uint64_t{1} << k); ++u) {
        std::uint64_t w = 0;
        for (std::uint64_t v = 1; v < counts.size(); ++v)
            if (counts[v] && (std::popcount(u & v) & 1)) w += counts[v];
        if (w == 2) ++b2;
    }
    return b2;
}

}  // namespace detail

// Exact expectations by enumerating column multisets with multinomial
// weights; identical to enumerating all 2^{kn} matrices since both
// admissibility and the information functions depend only on the
// multiset of columns.
inline EnsembleExpectation enumerate_random_ensemble(std::size_t n, std::size_t k) {
    if (k < 1 || n < 1) throw std::invalid_argument("enumerate_random_ensemble: bad (n,k)");
    if (k * n > 24) throw std::domain_error("enumerate_random_ensemble: k*n > 24, use sample_random_ensemble");
    const std::size_t nvals = (std::size_t{1} << k) - 1;
    std::vector<std::uint64_t> counts(std::size_t{1} << k, 0);
    std::vector<std::uint64_t> e_sum(n + 1, 0);
    std::uint64_t total = 0, b2_sum = 0;

    // Recursive composition walk; weight = multinomial(n; c_1..c_m).
    auto walk = [&](auto&& self, std::size_t v, std::size_t remaining, std::uint64_t weight) -> void {
        if (v == nvals) {
            counts[nvals] = remaining;
            // weight still needs C(remaining, remaining) = 1
            if (detail::ensemble_admissible(counts, k)) {
                total += weight;
                b2_sum += weight * detail::ensemble_weight2(counts, k);
                const auto e = detail::information_function_values(counts, n, k);
                for (std::size_t g = 0; g <= n; ++g) e_sum[g] += weight * e[g];
            }
            counts[nvals] = 0;
            return;
        }
        for (std::size_t c = 0; c <= remaining; ++c) {
            counts[v] = c;
            self(self, v + 1, remaining - c, weight * binomial(remaining, c));
            counts[v] = 0;
        }
    };
    walk(walk, 1, n, 1);

    if (total == 0) throw std::domain_error("enumerate_random_ensemble: no admissible code for this (n,k)");
    EnsembleExpectation out;
    out.n = n;
    out.k = k;
    out.exact = true;
    out.member_count = total;
    out.e.resize(n + 1);
    out.e_stderr.assign(n + 1, 0.0);
    for (std::size_t g = 0; g <= n; ++g) out.e[g] = static_cast<double>(e_sum[g]) / static_cast<double>(total);
    out.b2 = static_cast<double>(b2_sum) / static_cast<double>(total);
    return out;
}

// Monte Carlo expectations: rejection-sample admissible matrices
// uniformly (i.i.d. nonzero columns, then filter), with standard
// errors of the estimates.
inline EnsembleExpectation sample_random_ensemble(std::size_t n, std::size_t k,
                                                  std::uint64_t samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("sample_random_ensemble: samples must be >= 1");
    if (k < 1 || n < 2 || k > 6 || n > 63) throw std::invalid_argument("sample_random_ensemble: unsupported (n,k)");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> pick_col(1, (std::uint64_t{1} << k) - 1);

    struct Bucket {
        std::uint64_t hits = 0;
        std::vector<std::uint64_t> e;
        std::uint64_t b2 = 0;
    };
    std::map<std::vector<std::uint8_t>, Bucket> buckets;

    std::vector<std::uint64_t> counts(std::size_t{1} << k, 0);
    std::uint64_t accepted = 0, consecutive_rejects = 0;
    const std::uint64_t reject_limit = 2'000'000;
    while (accepted < samples) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t j = 0; j < n; ++j) ++counts[pick_col(rng)];
        if (!detail::ensemble_admissible(counts, k)) {
            if (++consecutive_rejects > reject_limit)
                throw std::runtime_error("sample_random_ensemble: rejection rate too high");
            continue;
        }
        consecutive_rejects = 0;
        ++accepted;
        std::vector<std::uint8_t> key(counts.begin() + 1, counts.end());
        auto& b = buckets[key];
        if (b.hits == 0) {
            b.e = detail::information_function_values(counts, n, k);
            b.b2 = detail::ensemble_weight2(counts, k);
        }
        ++b.hits;
    }

    EnsembleExpectation out;
    out.n = n;
    out.k = k;
    out.exact = false;
    out.samples = samples;
    out.e.assign(n + 1, 0.0);
    out.e_stderr.assign(n + 1, 0.0);
    std::vector<double> e_sq(n + 1, 0.0);
    double b2_mean = 0.0, b2_sq = 0.0;
    for (const auto& [key, b] : buckets) {
        const double w = static_cast<double>(b.hits) / static_cast<double>(samples);
        for (std::size_t g = 0; g <= n; ++g) {
            const double x = static_cast<double>(b.e[g]);
            out.e[g] += w * x;
            e_sq[g] += w * x * x;
        }
        b2_mean += w * static_cast<double>(b.b2);
        b2_sq += w * static_cast<double>(b.b2) * static_cast<double>(b.b2);
    }
    for (std::size_t g = 0; g <= n; ++g) {
        const double var = std::max(0.0, e_sq[g] - out.e[g] * out.e[g]);
        out.e_stderr[g] = std::sqrt(var / static_cast<double>(samples));
    }
    out.b2 = b2_mean;
    out.b2_stderr = std::sqrt(std::max(0.0, b2_sq - b2_mean * b2_mean) / static_cast<double>(samples));
    return out;
}

struct EnsembleOptions {
    std::size_t exact_limit = 24;     // enumerate when k*n <= limit
    std::uint64_t samples = 200'000;  // sampled mode otherwise
    std::uint64_t seed = 0xC5A0'5EEDULL;
};

// The pair (component codes, selection probabilities) with its derived
// quantities, resolved once so density evolution can evaluate EXIT
// functions without touching the ensemble machinery again.
class ComponentDistribution {
  public:
    struct Entry {
        ComponentSpec spec;
        double lambda = 0.0;             // edge-perspective probability
        std::vector<double> info;        // e_g values; empty for MDS entries
        double b2 = 0.0;                 // weight-2 codewords (expected for ensembles)
        std::optional<EnsembleExpectation> ensemble;
    };

    ComponentDistribution(std::vector<ComponentSpec> entries, const EnsembleOptions& opt = {}) {
        if (entries.empty()) throw std::invalid_argument("distribution: no entries");
        double psum = 0.0;
        k_ = entries.front().k;
        for (const auto& s : entries) {
            if (s.probability < 0.0 || s.probability > 1.0)
                throw std::invalid_argument("distribution: probability outside [0,1]");
            psum += s.probability;
            if (s.k != k_) throw std::invalid_argument("distribution: mixed code dimensions");
        }
        // Published tables round probabilities to 4-6 decimals, so accept
        // small deviations and renormalize.
        if (std::abs(psum - 1.0) > 1e-3) throw std::invalid_argument("distribution: probabilities do not sum to 1");

        n_bar_ = 0.0;
        for (auto& s : entries) {
            Entry e;
            e.spec = std::move(s);
            e.spec.probability /= psum;
            resolve(e, opt);
            n_bar_ += e.spec.probability * static_cast<double>(e.spec.n);
            entries_.push_back(std::move(e));
        }
        rate_ = static_cast<double>(k_) / n_bar_;
        if (!(rate_ > 0.0 && rate_ < 1.0)) throw std::invalid_argument("distribution: rate outside (0,1)");
        double lsum = 0.0;
        cdf_.reserve(entries_.size());
        for (auto& e : entries_) {
            e.lambda = e.spec.probability * static_cast<double>(e.spec.n) / n_bar_;
            lsum += e.spec.probability;
            cdf_.push_back(lsum);
        }
        cdf_.back() = 1.0;
        if (all_repetition()) {
            std::size_t nmax = 0;
            for (const auto& e : entries_) nmax = std::max(nmax, e.spec.n);
            rep_edge_poly_.assign(nmax, 0.0);
            for (const auto& e : entries_) rep_edge_poly_[e.spec.n - 1] += e.lambda;
        }
    }

    std::size_t k() const { return k_; }
    double n_bar() const { return n_bar_; }
    double rate() const { return rate_; }
    double energy_increment_db() const { return -10.0 * std::log10(rate_); }
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    bool all_repetition() const {
        for (const auto& e : entries_)
            if (e.spec.kind != ComponentKind::repetition &&
                !(e.spec.kind == ComponentKind::explicit_code && e.spec.k == 1))
                return false;
        return true;
    }

    // Expected number of weight-2 codewords in a picked code.
    double b2_mixture() const {
        double b = 0.0;
        for (const auto& e : entries_) b += e.spec.probability * e.b2;
        return b;
    }

    enum class ExitStrategy { specialized, general };

    // Burst-node EXIT function of entry h.  Polynomial in p; callers
    // may evaluate slightly outside [0,1] (finite differences).
    double entry_exit_bn(std::size_t h, double p, ExitStrategy strategy = ExitStrategy::specialized) const {
        const Entry& e = entries_[h];
        const std::size_t n = e.spec.n;
        if (e.spec.kind == ComponentKind::mds) return exit_mds(n, k_, p);
        if (strategy == ExitStrategy::specialized) {
            if (k_ == 1) {  // repetition: f_b(p) = p^{n-1}
                double f = 1.0;
                for (std::size_t i = 0; i + 1 < n; ++i) f *= p;
                return f;
            }
            if (e.spec.kind == ComponentKind::explicit_code && n == k_ + 1) {
                // the only admissible (k+1,k) binary code is the SPC
                double q = 1.0;
                for (std::size_t i = 0; i < k_; ++i) q *= (1.0 - p);
                return 1.0 - q;
            }
        }
        return exit_bn_from_info(e.info, n, p);
    }

    // Mixture EXIT function  f_b(p) = sum_h lambda_h f_b^{(h)}(p).
    double exit_bn(double p, ExitStrategy strategy = ExitStrategy::specialized) const {
        if (strategy == ExitStrategy::specialized && !rep_edge_poly_.empty()) {
            // repetition mixture: sum_h lambda_h p^{n_h - 1}, Horner form
            double f = 0.0;
            for (std::size_t d = rep_edge_poly_.size(); d-- > 0;) f = f * p + rep_edge_poly_[d];
            return f;
        }
        double f = 0.0;
        for (std::size_t h = 0; h < entries_.size(); ++h) f += entries_[h].lambda * entry_exit_bn(h, p, strategy);
        return f;
    }

    // Entry index for a uniform draw u in [0,1).
    std::size_t pick(double u) const {
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), entries_.size() - 1);
    }

  private:
    void resolve(Entry& e, const EnsembleOptions& opt) {
        switch (e.spec.kind) {
            case ComponentKind::explicit_code:
            case ComponentKind::repetition: {
                const BinaryLinearCode& c = *e.spec.code;
                if (c.d_min() < 2) throw std::invalid_argument("distribution: code with d_min < 2");
                const auto iv = c.information_functions_real();
                e.info.assign(iv.begin(), iv.end());
                e.b2 = static_cast<double>(c.weight2_count());
                break;
            }
            case ComponentKind::random_ensemble: {
                EnsembleExpectation ee = (e.spec.k * e.spec.n <= opt.exact_limit)
                                             ? enumerate_random_ensemble(e.spec.n, e.spec.k)
                                             : sample_random_ensemble(e.spec.n, e.spec.k, opt.samples,
                                                                      opt.seed + 0x9E3779B97F4A7C15ULL * e.spec.n);
                e.info = ee.e;
                e.b2 = ee.b2;
                e.ensemble = std::move(ee);
                break;
            }
            case ComponentKind::mds: {
                // q=2 MDS weight formula at w=2: C(n,2) when d = n-k+1 = 2.
                e.b2 = (e.spec.n == e.spec.k + 1) ? static_cast<double>(binomial(e.spec.n, 2)) : 0.0;
                break;
            }
        }
    }

    std::vector<Entry> entries_;
    std::size_t k_ = 0;
    double n_bar_ = 0.0, rate_ = 0.0;
    std::vector<double> cdf_;
    std::vector<double> rep_edge_poly_;  // non-empty iff every entry is a repetition code
};

inline ComponentDistribution build_distribution(std::vector<ComponentSpec> entries, const EnsembleOptions& opt = {}) {
    return ComponentDistribution(std::move(entries), opt);
}

// ---- JSON configuration ------------------------------------------------
//
// {"entries": [ {"type":"explicit","G":"1100,0111","p":0.5},
//               {"type":"random","n":4,"k":2,"p":0.2},
//               {"type":"mds","n":5,"k":3,"p":0.2},
//               {"type":"rep","n":3,"p":0.1} ],
//  "ensemble_samples": 200000, "ensemble_seed": 1}
//
// A bare entry array is accepted as well.

inline ComponentSpec component_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type") || !j.contains("p"))
        throw std::invalid_argument("distribution entry: need object with \"type\" and \"p\"");
    const std::string type = j.at("type").get<std::string>();
    const double p = j.at("p").get<double>();
    if (type == "explicit") return ComponentSpec::from_generator(j.at("G").get<std::string>(), p);
    if (type == "random") return ComponentSpec::random_ensemble(j.at("n").get<std::size_t>(), j.at("k").get<std::size_t>(), p);
    if (type == "mds") return ComponentSpec::mds(j.at("n").get<std::size_t>(), j.at("k").get<std::size_t>(), p);
    if (type == "rep") return ComponentSpec::repetition(j.at("n").get<std::size_t>(), p);
    throw std::invalid_argument("distribution entry: unknown type \"" + type + "\"");
}

inline nlohmann::json component_spec_to_json(const ComponentSpec& s) {
    nlohmann::json j;
    j["p"] = s.probability;
    switch (s.kind) {
        case ComponentKind::explicit_code:
            j["type"] = "explicit";
            j["G"] = s.code->generator_string();
            break;
        case ComponentKind::random_ensemble:
            j["type"] = "random";
            j["n"] = s.n;
            j["k"] = s.k;
            break;
        case ComponentKind::mds:
            j["type"] = "mds";
            j["n"] = s.n;
            j["k"] = s.k;
            break;
        case ComponentKind::repetition:
            j["type"] = "rep";
            j["n"] = s.n;
            break;
    }
    return j;
}

inline std::vector<ComponentSpec> component_specs_from_json(const nlohmann::json& j) {
    const nlohmann::json& arr = j.is_array() ? j : j.at("entries");
    if (!arr.is_array() || arr.empty()) throw std::invalid_argument("distribution config: empty entry list");
    std::vector<ComponentSpec> specs;
    specs.reserve(arr.size());
    for (const auto& item : arr) specs.push_back(component_spec_from_json(item));
    return specs;
}

inline ComponentDistribution distribution_from_json(const nlohmann::json& j, EnsembleOptions opt = {}) {
    if (j.is_object()) {
        if (j.contains("ensemble_samples")) opt.samples = j.at("ensemble_samples").get<std::uint64_t>();
        if (j.contains("ensemble_seed")) opt.seed = j.at("ensemble_seed").get<std::uint64_t>();
    }
    return build_distribution(component_specs_from_json(j), opt);
}

}  // namespace csa

#endif
