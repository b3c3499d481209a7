#ifndef CSA_LINEAR_CODE_HPP
#define CSA_LINEAR_CODE_HPP

// Binary linear block codes with the derived quantities used by the
// density-evolution analysis: GF(2) rank, weight enumerator / minimum
// distance, un-normalized information functions, MAP erasure decoding
// and the burst-node EXIT functions.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csa/gf2.hpp"

namespace csa {

using Payload = std::vector<std::uint8_t>;

inline void xor_into(Payload& dst, const Payload& src) {
    if (dst.size() != src.size()) throw std::logic_error("payload length mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
}

inline bool is_zero(const Payload& p) {
    return std::all_of(p.begin(), p.end(), [](std::uint8_t b) { return b == 0; });
}

// Binomial coefficients up to n = 64 (C(64,32) fits in 64 bits).
inline std::uint64_t binomial(std::size_t n, std::size_t g) {
    static const auto table = [] {
        std::array<std::array<std::uint64_t, 65>, 65> t{};
        for (std::size_t i = 0; i <= 64; ++i) {
            t[i][0] = 1;
            for (std::size_t j = 1; j <= i; ++j)
                t[i][j] = t[i - 1][j - 1] + (j <= i - 1 ? t[i - 1][j] : 0);
        }
        return t;
    }();
    if (n > 64 || g > n) return 0;
    return table[n][g];
}

// e_g = sum of GF(2) ranks over all g-column submatrices, g = 0..n.
struct InformationFunctions {
    std::size_t n = 0, k = 0;
    std::vector<std::uint64_t> values;  // size n+1
};

// B_w = number of codewords of Hamming weight w, w = 0..n.
struct WeightEnumerator {
    std::vector<std::uint64_t> counts;
    std::size_t d_min() const {
        for (std::size_t w = 1; w < counts.size(); ++w)
            if (counts[w]) return w;
        return counts.size();  // zero-dimensional code; no nonzero word
    }
};

namespace detail {

// Exact information functions from the column multiset.  Subsets of
// columns with the same multiset of values have the same rank, and the
// rank only depends on the span of the distinct values present, so a
// DP over (subset size, span) enumerates all 2^n subsets implicitly.
// Spans are subspaces of GF(2)^k stored as element-set bitmasks, which
// requires 2^k <= 64, i.e. k <= 6.
inline std::vector<std::uint64_t> information_function_values(
    std::span<const std::uint64_t> column_counts,  // count per column value 1..2^k-1
    std::size_t n, std::size_t k) {
    if (k > 6) throw std::domain_error("information functions: dimension > 6 unsupported");
    if (n > 63) throw std::domain_error("information functions: length > 63 unsupported");

    std::vector<std::pair<std::uint64_t, std::size_t>> types;  // (value, count)
    for (std::uint64_t v = 1; v < (std::uint64_t{1} << k); ++v)
        if (column_counts[v]) types.emplace_back(v, column_counts[v]);

    // Reachable spans, breadth-first from the zero span.
    std::vector<std::uint64_t> span_mask{1};  // element set {0}
    std::map<std::uint64_t, std::size_t> span_id{{1, 0}};
    auto extend = [](std::uint64_t mask, std::uint64_t v) {
        if ((mask >> v) & 1u) return mask;
        std::uint64_t shifted = 0;
        for (std::uint64_t m = mask; m;) {
            const int s = std::countr_zero(m);
            m &= m - 1;
            shifted |= std::uint64_t{1} << (static_cast<std::uint64_t>(s) ^ v);
        }
        return mask | shifted;
    };
    for (std::size_t i = 0; i < span_mask.size(); ++i)
        for (const auto& [v, c] : types) {
            const std::uint64_t m = extend(span_mask[i], v);
            if (!span_id.count(m)) {
                span_id.emplace(m, span_mask.size());
                span_mask.push_back(m);
            }
        }
    // Extension table and per-span rank.
    const std::size_t ns = span_mask.size();
    std::vector<std::size_t> ext(ns * types.size());
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t t = 0; t < types.size(); ++t)
            ext[s * types.size() + t] = span_id.at(extend(span_mask[s], types[t].first));
    std::vector<std::size_t> rank(ns);
    for (std::size_t s = 0; s < ns; ++s)
        rank[s] = static_cast<std::size_t>(std::countr_zero(std::uint64_t(std::popcount(span_mask[s]))));

    std::vector<std::uint64_t> dp((n + 1) * ns, 0), next((n + 1) * ns);
    dp[0] = 1;  // g = 0, zero span
    std::size_t placed = 0;
    for (std::size_t t = 0; t < types.size(); ++t) {
        const std::size_t c = types[t].second;
        std::fill(next.begin(), next.end(), 0);
        for (std::size_t g = 0; g <= placed; ++g)
            for (std::size_t s = 0; s < ns; ++s) {
                const std::uint64_t w = dp[g * ns + s];
                if (!w) continue;
                next[g * ns + s] += w;  // take none of this type
                const std::size_t es = ext[s * types.size() + t];
                for (std::size_t a = 1; a <= c; ++a)
                    next[(g + a) * ns + es] += w * binomial(c, a);
            }
        dp.swap(next);
        placed += c;
    }
    std::vector<std::uint64_t> e(n + 1, 0);
    for (std::size_t g = 0; g <= n; ++g)
        for (std::size_t s = 0; s < ns; ++s)
            e[g] += dp[g * ns + s] * rank[s];
    return e;
}

}  // namespace detail

class BinaryLinearCode {
  public:
    BinaryLinearCode(std::vector<BitRow> rows, std::size_t n) : n_(n), k_(rows.size()), rows_(std::move(rows)) {
        if (k_ == 0 || n_ == 0) throw std::invalid_argument("code: empty generator");
        if (n_ > 64) throw std::invalid_argument("code: length > 64 unsupported");
        const BitRow col_mask = n_ == 64 ? ~BitRow{0} : (BitRow{1} << n_) - 1;
        BitRow used = 0;
        for (BitRow r : rows_) {
            if (r & ~col_mask) throw std::invalid_argument("code: row wider than length");
            used |= r;
        }
        if (used != col_mask) throw std::invalid_argument("code: idle (all-zero) column");
        if (gf2_rank(rows_) != k_) throw std::invalid_argument("code: generator not full rank");
        if (k_ <= 24) {
            // Gray-code walk over all 2^k codewords: cw tracks the word
            // for Gray(u), which flips row countr_zero(u) at each step.
            weights_.counts.assign(n_ + 1, 0);
            BitRow cw = 0;
            weights_.counts[0] = 1;
            for (std::uint64_t u = 1; u < (std::uint64_t{1} << k_); ++u) {
                cw ^= rows_[static_cast<std::size_t>(std::countr_zero(u))];
                ++weights_.counts[static_cast<std::size_t>(std::popcount(cw))];
            }
            d_min_ = weights_.d_min();
        }
        if (k_ <= 6) {
            std::vector<std::uint64_t> counts(std::size_t{1} << k_, 0);
            for (std::size_t j = 0; j < n_; ++j) ++counts[gf2_column(rows_, j)];
            info_.n = n_;
            info_.k = k_;
            info_.values = detail::information_function_values(counts, n_, k_);
            info_real_.assign(info_.values.begin(), info_.values.end());
        }
    }

    static BinaryLinearCode from_string(const std::string& text) {
        ParsedGenerator g = parse_generator(text);
        return BinaryLinearCode(std::move(g.rows), g.n);
    }

    static BinaryLinearCode repetition(std::size_t n) {
        if (n < 1 || n > 64) throw std::invalid_argument("repetition: bad length");
        const BitRow all = n == 64 ? ~BitRow{0} : (BitRow{1} << n) - 1;
        return BinaryLinearCode({all}, n);
    }

    // (k+1, k) single parity check, systematic form [I | 1].
    static BinaryLinearCode single_parity_check(std::size_t k) {
        if (k < 1 || k > 24) throw std::invalid_argument("spc: bad dimension");
        std::vector<BitRow> rows(k);
        for (std::size_t i = 0; i < k; ++i) rows[i] = (BitRow{1} << i) | (BitRow{1} << k);
        return BinaryLinearCode(std::move(rows), k + 1);
    }

    std::size_t n() const { return n_; }
    std::size_t k() const { return k_; }
    double rate() const { return static_cast<double>(k_) / static_cast<double>(n_); }
    const std::vector<BitRow>& generator_rows() const { return rows_; }
    std::string generator_string() const { return format_generator(rows_, n_); }
    std::uint64_t column(std::size_t j) const { return gf2_column(rows_, j); }

    const WeightEnumerator& weight_enumerator() const {
        if (weights_.counts.empty()) throw std::domain_error("weight enumerator: dimension > 24");
        return weights_;
    }
    std::size_t d_min() const {
        if (weights_.counts.empty()) throw std::domain_error("d_min: dimension > 24");
        return d_min_;
    }
    std::uint64_t weight2_count() const { return weight_enumerator().counts.size() > 2 ? weight_enumerator().counts[2] : 0; }

    const InformationFunctions& information_functions() const {
        if (info_.values.empty()) throw std::domain_error("information functions: dimension > 6");
        return info_;
    }
    std::span<const double> information_functions_real() const {
        information_functions();
        return info_real_;
    }

  private:
    std::size_t n_, k_;
    std::vector<BitRow> rows_;
    WeightEnumerator weights_;        // empty when k > 24
    std::size_t d_min_ = 0;
    InformationFunctions info_;       // empty when k > 6
    std::vector<double> info_real_;
};

inline InformationFunctions information_functions(const BinaryLinearCode& code) { return code.information_functions(); }
inline WeightEnumerator weight_enumerator(const BinaryLinearCode& code) { return code.weight_enumerator(); }

// MAP erasure decoding: the erased coordinates whose generator column
// lies in the GF(2) span of the known columns are recovered, with
// payloads obtained by the matching linear combination of known
// payloads.  Returns the newly recovered (position, payload) pairs.
inline std::vector<std::pair<std::size_t, Payload>> map_erasure_decode(
    const BinaryLinearCode& code,
    std::span<const std::size_t> known_positions,
    std::span<const Payload> known_values) {
    if (known_positions.size() != known_values.size())
        throw std::invalid_argument("map_erasure_decode: positions/values size mismatch");
    std::vector<bool> known(code.n(), false);
    for (std::size_t p : known_positions) {
        if (p >= code.n()) throw std::invalid_argument("map_erasure_decode: position out of range");
        if (known[p]) throw std::invalid_argument("map_erasure_decode: duplicate position");
        known[p] = true;
    }
    if (known_positions.empty()) return {};

    // Row-reduce the known columns, carrying payloads as right-hand
    // sides; pivots indexed by leading bit.
    std::array<std::uint64_t, 64> pivot_col{};
    std::array<int, 64> pivot_rhs{};
    pivot_rhs.fill(-1);
    std::vector<Payload> rhs_store;
    for (std::size_t i = 0; i < known_positions.size(); ++i) {
        std::uint64_t col = code.column(known_positions[i]);
        Payload rhs = known_values[i];
        while (col) {
            const int b = 63 - std::countl_zero(col);
            if (!pivot_col[b]) break;
            col ^= pivot_col[b];
            xor_into(rhs, rhs_store[static_cast<std::size_t>(pivot_rhs[b])]);
        }
        if (col) {
            const int b = 63 - std::countl_zero(col);
            pivot_col[b] = col;
            pivot_rhs[b] = static_cast<int>(rhs_store.size());
            rhs_store.push_back(std::move(rhs));
        } else if (!is_zero(rhs)) {
            throw std::logic_error("map_erasure_decode: inconsistent payloads");
        }
    }

    std::vector<std::pair<std::size_t, Payload>> recovered;
    for (std::size_t j = 0; j < code.n(); ++j) {
        if (known[j]) continue;
        std::uint64_t col = code.column(j);
        Payload acc(known_values[0].size(), 0);
        while (col) {
            const int b = 63 - std::countl_zero(col);
            if (!pivot_col[b]) break;
            col ^= pivot_col[b];
            xor_into(acc, rhs_store[static_cast<std::size_t>(pivot_rhs[b])]);
        }
        if (col == 0) recovered.emplace_back(j, std::move(acc));
    }
    return recovered;
}

// Positions recoverable from a known-column span, without payloads.
inline std::vector<std::size_t> map_erasure_recoverable(const BinaryLinearCode& code,
                                                        std::span<const std::size_t> known_positions) {
    Gf2Basis basis;
    std::vector<bool> known(code.n(), false);
    for (std::size_t p : known_positions) {
        known[p] = true;
        basis.insert(code.column(p));
    }
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < code.n(); ++j)
        if (!known[j] && basis.contains(code.column(j))) out.push_back(j);
    return out;
}

// Burst-node EXIT function under MAP erasure decoding, evaluated from
// (possibly averaged) information-function values:
//   f_b(p) = 1/n * sum_{t=0}^{n-1} p^t (1-p)^{n-1-t}
//            * [ (n-t) e_{n-t} - (t+1) e_{n-1-t} ].
// Polynomial in p, so evaluation outside [0,1] is allowed when the
// caller needs it (finite differences at 0).
inline double exit_bn_from_info(std::span<const double> e, std::size_t n, double p) {
    const double q = 1.0 - p;
    std::array<double, 64> qpow;
    qpow[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) qpow[i] = qpow[i - 1] * q;
    double sum = 0.0, pt = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double at = static_cast<double>(n - t) * e[n - t] - static_cast<double>(t + 1) * e[n - 1 - t];
        sum += pt * qpow[n - 1 - t] * at;
        pt *= p;
    }
    return sum / static_cast<double>(n);
}

inline double exit_bn(const BinaryLinearCode& code, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("exit_bn: p outside [0,1]");
    return exit_bn_from_info(code.information_functions_real(), code.n(), p);
}

// EXIT function of an (n,k) MDS code under bounded-distance decoding:
//   f_b(p) = sum_{l=0}^{k-1} C(n-1,l) (1-p)^l p^{n-1-l}.
inline double exit_mds(std::size_t n, std::size_t k, double p) {
    if (k < 1 || k >= n) throw std::invalid_argument("exit_mds: need 1 <= k < n");
    double sum = 0.0;
    const double q = 1.0 - p;
    double ql = 1.0;  // q^l
    std::array<double, 64> ppow;
    ppow[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) ppow[i] = ppow[i - 1] * p;
    for (std::size_t l = 0; l < k; ++l) {
        sum += static_cast<double>(binomial(n - 1, l)) * ql * ppow[n - 1 - l];
        ql *= q;
    }
    return sum;
}

}  // namespace csa

#endif
