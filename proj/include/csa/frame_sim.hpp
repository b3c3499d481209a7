#ifndef CSA_FRAME_SIM_HPP
#define CSA_FRAME_SIM_HPP

// Finite-length Monte Carlo: MAC-frame generation, the iterative
// interference-subtraction decoder on the burst/slice bipartite graph,
// the genie-aided GF(2) solver, and campaign statistics.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "csa/density_evolution.hpp"
#include "csa/ensemble.hpp"
#include "csa/rng.hpp"

namespace csa {

struct BernoulliActivation {
    double pi = 0.0;             // per-user activation probability
    std::size_t population = 0;  // N
};
struct FixedActivation {
    std::size_t active = 0;  // N_a
};
using Activation = std::variant<BernoulliActivation, FixedActivation>;

// One user's transmission: the chosen component code (an index into
// the distribution), the occupied slices in ascending order, and the
// transmitted payloads.  Payload buffers are flat, payload_len bytes
// per segment.
struct Burst {
    std::uint32_t entry = 0;
    std::vector<std::uint32_t> slices;   // n_h distinct positions
    std::vector<std::uint8_t> info;      // k * payload_len
    std::vector<std::uint8_t> coded;     // n_h * payload_len
};

// One MAC-frame realization.  Slice state is the received channel
// observation: XOR of all incident segments plus the collision
// multiplicity, which the receiver can always discriminate.
struct FrameGraph {
    std::size_t slots = 0;  // M
    std::size_t k = 0;
    std::size_t payload_len = 16;
    std::vector<Burst> bursts;
    std::vector<std::uint8_t> slice_accum;    // n_slices * payload_len
    std::vector<std::uint32_t> slice_mult;

    std::size_t n_slices() const { return slots * k; }
    std::span<const std::uint8_t> slice_payload(std::size_t s) const {
        return {slice_accum.data() + s * payload_len, payload_len};
    }
};

namespace detail {

inline void fill_random(std::span<std::uint8_t> out, std::mt19937_64& rng) {
    std::size_t i = 0;
    while (i < out.size()) {
        std::uint64_t w = rng();
        for (std::size_t b = 0; b < 8 && i < out.size(); ++b, ++i) {
            out[i] = static_cast<std::uint8_t>(w & 0xFF);
            w >>= 8;
        }
    }
}

inline void xor_bytes(std::uint8_t* dst, const std::uint8_t* src, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) dst[i] ^= src[i];
}

// Floyd's algorithm: n distinct values in [0, range), then sorted.
inline std::vector<std::uint32_t> sample_distinct(std::size_t n, std::size_t range, std::mt19937_64& rng) {
    std::vector<std::uint32_t> out;
    out.reserve(n);
    for (std::size_t j = range - n; j < range; ++j) {
        std::uniform_int_distribution<std::size_t> d(0, j);
        const std::uint32_t t = static_cast<std::uint32_t>(d(rng));
        if (std::find(out.begin(), out.end(), t) == out.end())
            out.push_back(t);
        else
            out.push_back(static_cast<std::uint32_t>(j));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

// Draws the active users, their component codes, slice positions and
// payloads.  Encoded segments of binary codes are generator-column
// XOR combinations of the information segments; MDS segments use a
// systematic prefix plus parity payloads derived deterministically
// from the information payloads.
inline FrameGraph generate_frame(std::size_t slots, std::size_t k, const ComponentDistribution& dist,
                                 const Activation& activation, std::uint64_t seed,
                                 std::size_t payload_len = 16) {
    if (slots < 1) throw std::invalid_argument("generate_frame: need at least one slot");
    if (k != dist.k()) throw std::invalid_argument("generate_frame: k does not match the distribution");
    if (payload_len < 1) throw std::invalid_argument("generate_frame: empty payloads");
    FrameGraph f;
    f.slots = slots;
    f.k = k;
    f.payload_len = payload_len;
    const std::size_t ns = f.n_slices();
    for (const auto& e : dist.entries())
        if (e.spec.n > ns) throw std::invalid_argument("generate_frame: component longer than the frame");

    std::mt19937_64 rng(seed);
    std::size_t active = 0;
    if (const auto* bern = std::get_if<BernoulliActivation>(&activation)) {
        if (bern->pi < 0.0 || bern->pi > 1.0) throw std::invalid_argument("generate_frame: activation probability outside [0,1]");
        active = std::binomial_distribution<std::size_t>(bern->population, bern->pi)(rng);
    } else {
        active = std::get<FixedActivation>(activation).active;
    }

    f.slice_accum.assign(ns * payload_len, 0);
    f.slice_mult.assign(ns, 0);
    f.bursts.reserve(active);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t u = 0; u < active; ++u) {
        Burst b;
        b.entry = static_cast<std::uint32_t>(dist.pick(u01(rng)));
        const auto& entry = dist.entries()[b.entry];
        const std::size_t n = entry.spec.n;
        b.slices = detail::sample_distinct(n, ns, rng);
        b.info.resize(k * payload_len);
        detail::fill_random(b.info, rng);
        b.coded.assign(n * payload_len, 0);
        if (entry.spec.kind == ComponentKind::mds) {
            std::memcpy(b.coded.data(), b.info.data(), b.info.size());
            const std::uint64_t h = fnv1a64(b.info.data(), b.info.size());
            for (std::size_t j = k; j < n; ++j) {
                std::uint64_t state = derive_seed(h, j);
                for (std::size_t i = 0; i < payload_len; i += 8) {
                    const std::uint64_t w = splitmix64(state);
                    for (std::size_t t = 0; t < 8 && i + t < payload_len; ++t)
                        b.coded[j * payload_len + i + t] = static_cast<std::uint8_t>(w >> (8 * t));
                }
            }
        } else {
            const BinaryLinearCode& code = *entry.spec.code;
            for (std::size_t j = 0; j < n; ++j) {
                std::uint64_t col = code.column(j);
                while (col) {
                    const int i = std::countr_zero(col);
                    col &= col - 1;
                    detail::xor_bytes(b.coded.data() + j * payload_len,
                                      b.info.data() + static_cast<std::size_t>(i) * payload_len, payload_len);
                }
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t s = b.slices[j];
            detail::xor_bytes(f.slice_accum.data() + s * payload_len, b.coded.data() + j * payload_len, payload_len);
            ++f.slice_mult[s];
        }
        f.bursts.push_back(std::move(b));
    }
    return f;
}

struct DecodeOutcome {
    std::vector<bool> recovered;              // per burst
    std::vector<std::uint32_t> recovered_at;  // round index (1-based), 0 if lost
    std::size_t iterations = 0;
    std::size_t residual_slices = 0;

    std::size_t recovered_count() const {
        std::size_t c = 0;
        for (bool r : recovered) c += r;
        return c;
    }
};

// Iterative interference subtraction.  Each round (a) harvests the
// remaining segment of every multiplicity-1 slice, (b) runs MAP
// erasure decoding at every burst that gained segments (any-k-of-n
// rule for MDS bursts), (c) subtracts everything newly known from its
// slice and decrements the multiplicity.  Stops at a fixpoint or
// after max_iters rounds.
inline DecodeOutcome sic_decode(const FrameGraph& f, const ComponentDistribution& dist,
                                std::size_t max_iters = 100) {
    const std::size_t plen = f.payload_len;
    const std::size_t nb = f.bursts.size();
    DecodeOutcome out;
    out.recovered.assign(nb, false);
    out.recovered_at.assign(nb, 0);

    std::vector<std::uint8_t> accum = f.slice_accum;
    std::vector<std::uint32_t> mult = f.slice_mult;

    // Edge lookup: slice -> incident (burst, segment) pairs, CSR layout.
    const std::size_t ns = f.n_slices();
    std::vector<std::uint32_t> deg(ns + 1, 0);
    for (const auto& b : f.bursts)
        for (std::uint32_t s : b.slices) ++deg[s + 1];
    for (std::size_t s = 0; s < ns; ++s) deg[s + 1] += deg[s];
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges(deg[ns]);
    {
        std::vector<std::uint32_t> fill(deg.begin(), deg.end() - 1);
        for (std::uint32_t bi = 0; bi < nb; ++bi)
            for (std::uint32_t j = 0; j < f.bursts[bi].slices.size(); ++j)
                edges[fill[f.bursts[bi].slices[j]]++] = {bi, j};
    }

    std::vector<std::uint64_t> known(nb, 0);      // segment bitmask per burst
    std::vector<std::uint32_t> known_count(nb, 0);
    std::vector<std::vector<std::uint8_t>> seg_payload(nb);  // decoded payloads, flat
    for (std::size_t bi = 0; bi < nb; ++bi) seg_payload[bi].assign(f.bursts[bi].slices.size() * plen, 0);

    std::vector<std::uint32_t> candidates;  // slices at multiplicity 1
    for (std::uint32_t s = 0; s < ns; ++s)
        if (mult[s] == 1) candidates.push_back(s);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> newly;  // (burst, segment)
    std::vector<std::uint32_t> touched;                          // bursts to re-decode

    const auto mark_known = [&](std::uint32_t bi, std::uint32_t j, const std::uint8_t* payload) {
        known[bi] |= std::uint64_t{1} << j;
        ++known_count[bi];
        std::memcpy(seg_payload[bi].data() + j * plen, payload, plen);
        if (std::memcmp(payload, f.bursts[bi].coded.data() + j * plen, plen) != 0)
            throw std::logic_error("sic_decode: recovered segment differs from transmitted payload");
        newly.emplace_back(bi, j);
    };

    for (std::size_t round = 1; round <= max_iters; ++round) {
        newly.clear();
        touched.clear();
        // (a) degree-1 harvest
        std::vector<std::uint32_t> snapshot;
        snapshot.swap(candidates);
        for (std::uint32_t s : snapshot) {
            if (mult[s] != 1) continue;
            bool found = false;
            for (std::uint32_t e = deg[s]; e < deg[s + 1] && !found; ++e) {
                const auto [bi, j] = edges[e];
                if (!(known[bi] >> j & 1)) {
                    mark_known(bi, j, accum.data() + std::size_t{s} * plen);
                    touched.push_back(bi);
                    found = true;
                }
            }
            if (!found) throw std::logic_error("sic_decode: degree-1 slice with no pending segment");
        }
        // (b) local MAP decoding at bursts that gained segments
        for (std::uint32_t bi : touched) {
            if (out.recovered[bi]) continue;
            const Burst& b = f.bursts[bi];
            const auto& entry = dist.entries()[b.entry];
            const std::size_t n = b.slices.size();
            if (entry.spec.kind == ComponentKind::mds) {
                if (known_count[bi] >= f.k) {
                    for (std::uint32_t j = 0; j < n; ++j)
                        if (!(known[bi] >> j & 1)) mark_known(bi, j, b.coded.data() + j * plen);
                    out.recovered[bi] = true;
                    out.recovered_at[bi] = static_cast<std::uint32_t>(round);
                    if (std::memcmp(b.coded.data(), b.info.data(), b.info.size()) != 0)
                        throw std::logic_error("sic_decode: systematic MDS prefix mismatch");
                }
                continue;
            }
            const BinaryLinearCode& code = *entry.spec.code;
            std::vector<std::size_t> kp;
            std::vector<Payload> kv;
            for (std::uint32_t j = 0; j < n; ++j)
                if (known[bi] >> j & 1) {
                    kp.push_back(j);
                    kv.emplace_back(seg_payload[bi].begin() + j * plen, seg_payload[bi].begin() + (j + 1) * plen);
                }
            for (auto& [pos, payload] : map_erasure_decode(code, kp, kv))
                mark_known(bi, static_cast<std::uint32_t>(pos), payload.data());
            if (known_count[bi] == n) {
                // reproduce the information segments from the decoded ones
                std::array<std::uint64_t, 64> pivot_col{};
                std::array<int, 64> pivot_idx{};
                pivot_idx.fill(-1);
                std::vector<Payload> rhs;
                for (std::uint32_t j = 0; j < n; ++j) {
                    std::uint64_t col = code.column(j);
                    Payload v(seg_payload[bi].begin() + j * plen, seg_payload[bi].begin() + (j + 1) * plen);
                    while (col) {
                        const int t = 63 - std::countl_zero(col);
                        if (!pivot_col[t]) {
                            pivot_col[t] = col;
                            pivot_idx[t] = static_cast<int>(rhs.size());
                            rhs.push_back(v);
                            col = 0;
                        } else {
                            col ^= pivot_col[t];
                            xor_into(v, rhs[static_cast<std::size_t>(pivot_idx[t])]);
                        }
                    }
                }
                for (std::size_t i = 0; i < f.k; ++i) {
                    std::uint64_t col = std::uint64_t{1} << i;  // unit vector = info segment i
                    Payload v(plen, 0);
                    while (col) {
                        const int t = 63 - std::countl_zero(col);
                        if (pivot_idx[t] < 0) throw std::logic_error("sic_decode: info solve failed on full-rank code");
                        col ^= pivot_col[t];
                        xor_into(v, rhs[static_cast<std::size_t>(pivot_idx[t])]);
                    }
                    if (std::memcmp(v.data(), b.info.data() + i * plen, plen) != 0)
                        throw std::logic_error("sic_decode: information segment mismatch");
                }
                out.recovered[bi] = true;
                out.recovered_at[bi] = static_cast<std::uint32_t>(round);
            }
        }
        if (newly.empty()) break;
        // (c) interference subtraction
        for (const auto& [bi, j] : newly) {
            const std::uint32_t s = f.bursts[bi].slices[j];
            if (mult[s] == 0) throw std::logic_error("sic_decode: multiplicity underflow");
            detail::xor_bytes(accum.data() + std::size_t{s} * plen, seg_payload[bi].data() + std::size_t{j} * plen, plen);
            if (--mult[s] == 1) candidates.push_back(s);
        }
        out.iterations = round;
    }
    for (std::uint32_t s = 0; s < ns; ++s)
        if (mult[s] > 0) ++out.residual_slices;
    return out;
}

// Genie-aided decoding: one GF(2) linear system over all active
// users' information segments, one equation per non-empty slice,
// solved by Gauss-Jordan elimination.  A user is recovered iff all of
// its k unknowns are uniquely determined.  Defined for frames whose
// bursts all carry binary generator matrices.
inline DecodeOutcome genie_decode(const FrameGraph& f, const ComponentDistribution& dist) {
    const std::size_t plen = f.payload_len;
    const std::size_t nb = f.bursts.size();
    for (const auto& b : f.bursts)
        if (dist.entries()[b.entry].spec.kind == ComponentKind::mds)
            throw std::invalid_argument("genie_decode: MDS bursts have no GF(2) system");

    const std::size_t ns = f.n_slices();
    const std::size_t nvars = nb * f.k;
    const std::size_t words = (nvars + 63) / 64;
    struct Row {
        std::vector<std::uint64_t> bits;
        std::vector<std::uint8_t> rhs;
    };
    std::vector<Row> rows;  // one per pivot, kept fully reduced (RREF)
    std::vector<int> pivot_of_var(nvars, -1);

    // Invariant: every stored row contains its own pivot variable plus
    // free variables only, so reducing a fresh equation is one upward
    // sweep over its pivoted bits.
    const auto reduce_insert = [&](Row r) {
        for (std::size_t w = 0; w < words; ++w) {
            std::uint64_t pending = r.bits[w];
            while (pending) {
                const int bit = std::countr_zero(pending);
                const std::size_t var = w * 64 + static_cast<std::size_t>(bit);
                const int pr = pivot_of_var[var];
                if (pr >= 0) {
                    const Row& p = rows[static_cast<std::size_t>(pr)];
                    for (std::size_t t = 0; t < words; ++t) r.bits[t] ^= p.bits[t];
                    detail::xor_bytes(r.rhs.data(), p.rhs.data(), plen);
                }
                // advance strictly past 'bit'; XOR only toggles free bits
                pending = bit == 63 ? 0 : (r.bits[w] & ~((std::uint64_t{2} << bit) - 1));
            }
        }
        std::size_t pivot = nvars;
        for (std::size_t w = 0; w < words && pivot == nvars; ++w)
            if (r.bits[w]) pivot = w * 64 + static_cast<std::size_t>(std::countr_zero(r.bits[w]));
        if (pivot == nvars) {
            // dependent equation: right-hand side must close
            for (std::uint8_t v : r.rhs)
                if (v) throw std::logic_error("genie_decode: inconsistent system");
            return;
        }
        for (auto& other : rows)
            if (other.bits[pivot / 64] >> (pivot % 64) & 1) {
                for (std::size_t t = 0; t < words; ++t) other.bits[t] ^= r.bits[t];
                detail::xor_bytes(other.rhs.data(), r.rhs.data(), plen);
            }
        pivot_of_var[pivot] = static_cast<int>(rows.size());
        rows.push_back(std::move(r));
    };

    // slice -> incident (burst, segment), CSR layout
    std::vector<std::uint32_t> deg(ns + 1, 0);
    for (const auto& b : f.bursts)
        for (std::uint32_t s : b.slices) ++deg[s + 1];
    for (std::size_t s = 0; s < ns; ++s) deg[s + 1] += deg[s];
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges(deg[ns]);
    {
        std::vector<std::uint32_t> fill(deg.begin(), deg.end() - 1);
        for (std::uint32_t bi = 0; bi < nb; ++bi)
            for (std::uint32_t j = 0; j < f.bursts[bi].slices.size(); ++j)
                edges[fill[f.bursts[bi].slices[j]]++] = {bi, j};
    }

    for (std::uint32_t s = 0; s < ns; ++s) {
        if (f.slice_mult[s] == 0) continue;
        Row r;
        r.bits.assign(words, 0);
        r.rhs.assign(f.slice_accum.begin() + std::size_t{s} * plen,
                     f.slice_accum.begin() + (std::size_t{s} + 1) * plen);
        for (std::uint32_t e = deg[s]; e < deg[s + 1]; ++e) {
            const auto [bi, j] = edges[e];
            std::uint64_t col = dist.entries()[f.bursts[bi].entry].spec.code->column(j);
            while (col) {
                const int i = std::countr_zero(col);
                col &= col - 1;
                const std::size_t var = bi * f.k + static_cast<std::size_t>(i);
                r.bits[var / 64] ^= std::uint64_t{1} << (var % 64);
            }
        }
        reduce_insert(std::move(r));
    }

    // A variable is determined iff it is a pivot and its row contains
    // no other (free) variable.
    std::vector<bool> determined(nvars, false);
    for (std::size_t var = 0; var < nvars; ++var) {
        const int pr = pivot_of_var[var];
        if (pr < 0) continue;
        const Row& r = rows[static_cast<std::size_t>(pr)];
        std::size_t support = 0;
        for (std::size_t w = 0; w < words && support <= 1; ++w) support += static_cast<std::size_t>(std::popcount(r.bits[w]));
        if (support == 1) determined[var] = true;
    }

    DecodeOutcome out;
    out.recovered.assign(nb, false);
    out.recovered_at.assign(nb, 0);
    out.iterations = 1;
    for (std::uint32_t bi = 0; bi < nb; ++bi) {
        bool all = true;
        for (std::size_t i = 0; i < f.k; ++i) all = all && determined[bi * f.k + i];
        if (all) {
            out.recovered[bi] = true;
            out.recovered_at[bi] = 1;
            for (std::size_t i = 0; i < f.k; ++i) {
                const Row& r = rows[static_cast<std::size_t>(pivot_of_var[bi * f.k + i])];
                if (std::memcmp(r.rhs.data(), f.bursts[bi].info.data() + i * plen, plen) != 0)
                    throw std::logic_error("genie_decode: solved segment differs from transmitted payload");
            }
        }
    }
    for (std::uint32_t s = 0; s < ns; ++s) {
        if (f.slice_mult[s] == 0) continue;
        bool resolved = true;
        for (std::uint32_t e = deg[s]; e < deg[s + 1] && resolved; ++e)
            resolved = out.recovered[edges[e].first];
        if (!resolved) ++out.residual_slices;
    }
    return out;
}

// ---- campaigns ----------------------------------------------------------

struct CampaignConfig {
    std::size_t slots = 0;  // M
    std::size_t k = 0;
    std::vector<ComponentSpec> entries;
    EnsembleOptions ensemble;
    enum class Mode { bernoulli, fixed } mode = Mode::bernoulli;
    std::size_t population = 0;  // N, bernoulli mode
    std::vector<double> load_grid;
    std::size_t frames_per_point = 0;
    enum class Decoder { sic, genie, both } decoder = Decoder::sic;
    std::uint64_t seed = 1;
    std::size_t max_iters = 100;
    std::size_t payload_len = 16;
    std::size_t workers = 1;
};

struct CampaignPoint {
    double offered_load = 0.0;   // nominal grid value
    double load_realized = 0.0;  // measured active bursts per slot
    double throughput = 0.0;     // recovered bursts per slot
    double plr = 0.0;
    double ci_half = 0.0;  // 95% half-width on the loss rate
    double iters_mean = 0.0;
    std::size_t frames = 0;
    // populated when decoder == both
    double genie_throughput = std::numeric_limits<double>::quiet_NaN();
    double genie_plr = std::numeric_limits<double>::quiet_NaN();
};

struct CampaignReport {
    std::vector<CampaignPoint> points;
};

// Runs frames_per_point frames per load point.  Frames are
// embarrassingly parallel; per-frame seeds are derived from the
// master seed and frame index and all reductions are integer sums, so
// the report is identical for any worker count.
inline CampaignReport run_campaign(const CampaignConfig& cfg) {
    if (cfg.slots < 1 || cfg.frames_per_point < 1 || cfg.load_grid.empty())
        throw std::invalid_argument("run_campaign: incomplete configuration");
    if (cfg.mode == CampaignConfig::Mode::bernoulli && cfg.population < 1)
        throw std::invalid_argument("run_campaign: bernoulli mode needs a population size");
    const ComponentDistribution dist(cfg.entries, cfg.ensemble);
    if (cfg.k != dist.k()) throw std::invalid_argument("run_campaign: k does not match the distribution");
    const bool run_sic = cfg.decoder != CampaignConfig::Decoder::genie;
    const bool run_genie = cfg.decoder != CampaignConfig::Decoder::sic;

    CampaignReport report;
    for (std::size_t pi = 0; pi < cfg.load_grid.size(); ++pi) {
        const double load = cfg.load_grid[pi];
        if (load < 0.0) throw std::invalid_argument("run_campaign: negative load");
        Activation act;
        if (cfg.mode == CampaignConfig::Mode::bernoulli) {
            const double pi_act = load * static_cast<double>(cfg.slots) / static_cast<double>(cfg.population);
            if (pi_act > 1.0) throw std::invalid_argument("run_campaign: load requires activation probability > 1");
            act = BernoulliActivation{pi_act, cfg.population};
        } else {
            act = FixedActivation{static_cast<std::size_t>(std::llround(load * static_cast<double>(cfg.slots)))};
        }

        struct Totals {
            std::uint64_t active = 0, sic_rec = 0, genie_rec = 0, iters = 0;
        };
        const std::size_t nworkers = std::max<std::size_t>(1, cfg.workers);
        std::vector<Totals> partial(nworkers);
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto work = [&](std::size_t w) {
            Totals& t = partial[w];
            try {
                for (;;) {
                    const std::size_t fi = next.fetch_add(1);
                    if (fi >= cfg.frames_per_point) break;
                    const FrameGraph frame =
                        generate_frame(cfg.slots, cfg.k, dist, act, derive_seed(cfg.seed, pi, fi), cfg.payload_len);
                    t.active += frame.bursts.size();
                    if (run_sic) {
                        const DecodeOutcome o = sic_decode(frame, dist, cfg.max_iters);
                        t.sic_rec += o.recovered_count();
                        t.iters += o.iterations;
                    }
                    if (run_genie) {
                        const DecodeOutcome o = genie_decode(frame, dist);
                        t.genie_rec += o.recovered_count();
                        if (!run_sic) t.iters += o.iterations;
                    }
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        };
        if (nworkers == 1) {
            work(0);
            if (failure) std::rethrow_exception(failure);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < nworkers; ++w) pool.emplace_back(work, w);
            for (auto& th : pool) th.join();
            if (failure) std::rethrow_exception(failure);
        }
        Totals sum;
        for (const auto& t : partial) {
            sum.active += t.active;
            sum.sic_rec += t.sic_rec;
            sum.genie_rec += t.genie_rec;
            sum.iters += t.iters;
        }

        CampaignPoint p;
        p.offered_load = load;
        p.frames = cfg.frames_per_point;
        const double mf = static_cast<double>(cfg.slots) * static_cast<double>(cfg.frames_per_point);
        p.load_realized = static_cast<double>(sum.active) / mf;
        const std::uint64_t primary_rec = run_sic ? sum.sic_rec : sum.genie_rec;
        p.throughput = static_cast<double>(primary_rec) / mf;
        const double lost = static_cast<double>(sum.active - primary_rec);
        p.plr = sum.active ? lost / static_cast<double>(sum.active) : 0.0;
        p.ci_half = sum.active ? 1.96 * std::sqrt(std::max(0.0, p.plr * (1.0 - p.plr)) / static_cast<double>(sum.active)) : 0.0;
        p.iters_mean = static_cast<double>(sum.iters) / static_cast<double>(cfg.frames_per_point);
        if (run_sic && run_genie) {
            p.genie_throughput = static_cast<double>(sum.genie_rec) / mf;
            p.genie_plr = sum.active ? static_cast<double>(sum.active - sum.genie_rec) / static_cast<double>(sum.active) : 0.0;
        }
        report.points.push_back(p);
    }
    return report;
}

// ---- JSON configuration --------------------------------------------------

inline CampaignConfig campaign_config_from_json(const nlohmann::json& j) {
    CampaignConfig c;
    c.slots = j.at("M").get<std::size_t>();
    c.k = j.at("k").get<std::size_t>();
    c.entries = component_specs_from_json(j.at("distribution"));
    if (j.at("distribution").is_object()) {
        const auto& d = j.at("distribution");
        if (d.contains("ensemble_samples")) c.ensemble.samples = d.at("ensemble_samples").get<std::uint64_t>();
        if (d.contains("ensemble_seed")) c.ensemble.seed = d.at("ensemble_seed").get<std::uint64_t>();
    }
    const std::string mode = j.value("mode", std::string("bernoulli"));
    if (mode == "bernoulli")
        c.mode = CampaignConfig::Mode::bernoulli;
    else if (mode == "fixed")
        c.mode = CampaignConfig::Mode::fixed;
    else
        throw std::invalid_argument("campaign config: unknown mode \"" + mode + "\"");
    c.population = j.value("population", std::size_t{0});
    c.load_grid = j.at("load_grid").get<std::vector<double>>();
    c.frames_per_point = j.at("frames_per_point").get<std::size_t>();
    const std::string dec = j.value("decoder", std::string("sic"));
    if (dec == "sic")
        c.decoder = CampaignConfig::Decoder::sic;
    else if (dec == "genie")
        c.decoder = CampaignConfig::Decoder::genie;
    else if (dec == "both")
        c.decoder = CampaignConfig::Decoder::both;
    else
        throw std::invalid_argument("campaign config: unknown decoder \"" + dec + "\"");
    c.seed = j.value("seed", std::uint64_t{1});
    c.max_iters = j.value("max_iters", std::size_t{100});
    c.payload_len = j.value("payload_len", std::size_t{16});
    c.workers = j.value("workers", std::size_t{1});
    return c;
}

inline nlohmann::json campaign_report_to_json(const CampaignConfig& cfg, const CampaignReport& r) {
    nlohmann::json pts = nlohmann::json::array();
    const bool both = cfg.decoder == CampaignConfig::Decoder::both;
    for (const auto& p : r.points) {
        nlohmann::json o{{"load", p.offered_load},   {"S", p.throughput},       {"PLR", p.plr},
                         {"ci_half", p.ci_half},     {"iters_mean", p.iters_mean},
                         {"frames", p.frames},       {"load_realized", p.load_realized}};
        if (both) {
            o["genie_S"] = p.genie_throughput;
            o["genie_PLR"] = p.genie_plr;
        }
        pts.push_back(o);
    }
    return nlohmann::json{{"points", pts}};
}

}  // namespace csa

#endif
