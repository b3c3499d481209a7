#ifndef CSA_GF2_HPP
#define CSA_GF2_HPP

// Small dense GF(2) matrices stored as one machine word per row
// (bit j of a row word = entry in column j, j < 64).

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace csa {

using BitRow = std::uint64_t;

// Incremental GF(2) row basis indexed by leading bit.
class Gf2Basis {
  public:
    // Returns true if v was independent of the basis (and absorbs it).
    bool insert(std::uint64_t v) {
        while (v) {
            const int b = 63 - std::countl_zero(v);
            if (!lead_[b]) {
                lead_[b] = v;
                ++rank_;
                return true;
            }
            v ^= lead_[b];
        }
        return false;
    }
    bool contains(std::uint64_t v) const {
        while (v) {
            const int b = 63 - std::countl_zero(v);
            if (!lead_[b]) return false;
            v ^= lead_[b];
        }
        return true;
    }
    std::size_t rank() const { return rank_; }

  private:
    std::array<std::uint64_t, 64> lead_{};
    std::size_t rank_ = 0;
};

// Row rank by Gaussian elimination.
inline std::size_t gf2_rank(std::span<const BitRow> rows) {
    if (rows.empty()) throw std::invalid_argument("gf2_rank: empty matrix");
    Gf2Basis basis;
    for (BitRow r : rows) basis.insert(r);
    return basis.rank();
}

inline std::size_t gf2_rank(const std::vector<BitRow>& rows) {
    return gf2_rank(std::span<const BitRow>(rows));
}

// Column j of a k-row matrix as a k-bit value (bit i = row i).
inline std::uint64_t gf2_column(std::span<const BitRow> rows, std::size_t j) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        c |= ((rows[i] >> j) & 1u) << i;
    return c;
}

// Generator matrices are written as comma-separated bit-row strings,
// leftmost character = column 0, e.g. "1100,0111".
struct ParsedGenerator {
    std::size_t k = 0;
    std::size_t n = 0;
    std::vector<BitRow> rows;
};

inline ParsedGenerator parse_generator(const std::string& text) {
    ParsedGenerator g;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        const std::string row = text.substr(start, end - start);
        if (row.empty()) throw std::invalid_argument("parse_generator: empty row in \"" + text + "\"");
        if (g.n == 0) g.n = row.size();
        if (row.size() != g.n)
            throw std::invalid_argument("parse_generator: ragged rows in \"" + text + "\"");
        if (g.n > 64) throw std::invalid_argument("parse_generator: length > 64 unsupported");
        BitRow bits = 0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] == '1')
                bits |= BitRow{1} << j;
            else if (row[j] != '0')
                throw std::invalid_argument("parse_generator: non-binary digit in \"" + text + "\"");
        }
        g.rows.push_back(bits);
        if (end == text.size()) break;
        start = end + 1;
    }
    g.k = g.rows.size();
    return g;
}

inline std::string format_generator(std::span<const BitRow> rows, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) out += ',';
        for (std::size_t j = 0; j < n; ++j)
            out += ((rows[i] >> j) & 1u) ? '1' : '0';
    }
    return out;
}

}  // namespace csa

#endif
