#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "csa/linear_code.hpp"
#include "support/oracles.hpp"

using namespace csa;

namespace {

// Random full-rank code with no idle columns and d_min >= 2.
BinaryLinearCode random_admissible_code(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint64_t> col(1, (std::uint64_t{1} << k) - 1);
    for (;;) {
        std::vector<BitRow> rows(k, 0);
        for (std::size_t j = 0; j < n; ++j) {
            const std::uint64_t c = col(rng);
            for (std::size_t i = 0; i < k; ++i)
                if (c >> i & 1) rows[i] |= BitRow{1} << j;
        }
        try {
            BinaryLinearCode code(rows, n);
            if (code.d_min() >= 2) return code;
        } catch (const std::invalid_argument&) {
        }
    }
}

}  // namespace

TEST_CASE("GF(2) rank", "[gf2codes]") {
    CHECK(gf2_rank(std::vector<BitRow>{0b01, 0b10}) == 2);
    CHECK(gf2_rank(std::vector<BitRow>{0b11, 0b11}) == 1);
    CHECK(gf2_rank(parse_generator("110,011").rows) == 2);
    CHECK_THROWS_AS(gf2_rank(std::vector<BitRow>{}), std::invalid_argument);
}

TEST_CASE("generator parsing round trip", "[gf2codes]") {
    const auto g = parse_generator("1100,0111");
    CHECK(g.k == 2);
    CHECK(g.n == 4);
    CHECK(format_generator(g.rows, g.n) == "1100,0111");
    CHECK_THROWS_AS(parse_generator("110,01"), std::invalid_argument);
    CHECK_THROWS_AS(parse_generator("1102"), std::invalid_argument);
}

TEST_CASE("code construction invariants", "[gf2codes]") {
    CHECK_THROWS_AS(BinaryLinearCode::from_string("1100,1100"), std::invalid_argument);  // rank deficient
    CHECK_THROWS_AS(BinaryLinearCode::from_string("100,010"), std::invalid_argument);    // idle column
    const auto code = BinaryLinearCode::from_string("1011,0110");
    CHECK(code.n() == 4);
    CHECK(code.k() == 2);
}

TEST_CASE("information functions of the reference codes", "[gf2codes]") {
    const auto rep2 = BinaryLinearCode::repetition(2);
    CHECK(rep2.information_functions().values == std::vector<std::uint64_t>{0, 2, 1});

    const auto spc32 = BinaryLinearCode::from_string("110,011");
    CHECK(spc32.information_functions().values == std::vector<std::uint64_t>{0, 3, 6, 2});

    const auto c42 = BinaryLinearCode::from_string("1100,0111");
    CHECK(c42.information_functions().values[3] == 8);  // all four 3-column subsets have rank 2
}

TEST_CASE("information functions match the brute-force subset walk", "[gf2codes]") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 25; ++t) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng() % 4);
        const std::size_t n = k + 1 + static_cast<std::size_t>(rng() % (10 - k));
        const auto code = random_admissible_code(n, k, rng);
        CHECK(code.information_functions().values == test::info_functions_bruteforce(code));
    }
}

TEST_CASE("information function invariants on admitted codes", "[gf2codes]") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng() % 4);
        const std::size_t n = k + 1 + static_cast<std::size_t>(rng() % 8);
        const auto code = random_admissible_code(n, k, rng);
        const auto& e = code.information_functions().values;
        CHECK(e[0] == 0);
        CHECK(e[n] == k);
        // the mean rank of a g-subset grows with g
        for (std::size_t g = 1; g <= n; ++g)
            CHECK(static_cast<double>(e[g]) / static_cast<double>(binomial(n, g)) >=
                  static_cast<double>(e[g - 1]) / static_cast<double>(binomial(n, g - 1)) - 1e-12);
        CHECK(e[1] == n);          // no idle symbols
        CHECK(e[n - 1] == k * n);  // d_min >= 2
    }
}

TEST_CASE("information function Monte Carlo estimate agrees", "[gf2codes]") {
    const auto code = BinaryLinearCode::from_string("111111110000,000001111111");
    const auto& exact = code.information_functions().values;
    for (std::size_t g : {3u, 6u, 9u}) {
        const auto mc = test::info_function_mc(code, g, 20'000, 1234 + g);
        CHECK(std::abs(mc.value - static_cast<double>(exact[g])) < 4.0 * mc.stderr_ + 1e-9);
    }
}

TEST_CASE("weight enumerator of the reference codes", "[gf2codes]") {
    const auto spc = BinaryLinearCode::from_string("110,011");
    CHECK(spc.weight_enumerator().counts == std::vector<std::uint64_t>{1, 0, 3, 0});
    CHECK(spc.d_min() == 2);
    CHECK(BinaryLinearCode::from_string("1100,0111").weight2_count() == 1);
    CHECK(BinaryLinearCode::from_string("1100,1111").weight2_count() == 2);
}

TEST_CASE("weight enumerator properties", "[gf2codes]") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 15; ++t) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng() % 4);
        const std::size_t n = k + 1 + static_cast<std::size_t>(rng() % 8);
        const auto code = random_admissible_code(n, k, rng);
        const auto& w = code.weight_enumerator();
        CHECK(w.counts[0] == 1);
        std::uint64_t total = 0;
        for (auto c : w.counts) total += c;
        CHECK(total == (std::uint64_t{1} << k));
        for (std::size_t x = 1; x < code.d_min(); ++x) CHECK(w.counts[x] == 0);
    }
}

TEST_CASE("weight enumerator rejects large dimensions", "[gf2codes]") {
    std::vector<BitRow> rows(25);
    for (std::size_t i = 0; i < 25; ++i) rows[i] = (BitRow{1} << i) | (BitRow{1} << 25);
    const BinaryLinearCode big(rows, 26);  // (26,25) parity-check style code
    CHECK_THROWS_AS(big.weight_enumerator(), std::domain_error);
}

TEST_CASE("MAP erasure decoding on the worked example", "[gf2codes]") {
    const auto code = BinaryLinearCode::from_string("1011,0110");
    const Payload u0{1, 2, 3, 4}, u1{5, 6, 7, 8};
    Payload s2 = u0;
    xor_into(s2, u1);
    const std::vector<std::size_t> known{0, 2};
    const std::vector<Payload> values{u0, s2};
    const auto rec = map_erasure_decode(code, known, values);
    REQUIRE(rec.size() == 2);
    CHECK(rec[0].first == 1);
    CHECK(rec[0].second == u1);
    CHECK(rec[1].first == 3);
    CHECK(rec[1].second == u0);
}

TEST_CASE("MAP erasure decoding edge cases", "[gf2codes]") {
    const auto spc = BinaryLinearCode::from_string("110,011");
    const std::vector<std::size_t> one{0};
    const std::vector<Payload> vals{Payload{42}};
    CHECK(map_erasure_decode(spc, one, vals).empty());

    const std::vector<std::size_t> all{0, 1, 2};
    const std::vector<Payload> three{Payload{1}, Payload{2}, Payload{3}};
    CHECK(map_erasure_decode(spc, all, three).empty());

    const std::vector<std::size_t> dup{0, 0};
    const std::vector<Payload> two{Payload{1}, Payload{1}};
    CHECK_THROWS_AS(map_erasure_decode(spc, dup, two), std::invalid_argument);
}

TEST_CASE("MAP erasure decoding is idempotent", "[gf2codes]") {
    std::mt19937_64 rng(21);
    const auto code = random_admissible_code(6, 3, rng);
    std::vector<std::uint8_t> info{17, 34, 51};
    std::vector<std::size_t> known{0, 4};
    std::vector<Payload> vals;
    for (std::size_t p : known) {
        std::uint8_t v = 0;
        std::uint64_t col = code.column(p);
        while (col) {
            v ^= info[static_cast<std::size_t>(std::countr_zero(col))];
            col &= col - 1;
        }
        vals.push_back({v});
    }
    auto rec = map_erasure_decode(code, known, vals);
    for (auto& [p, v] : rec) {
        known.push_back(p);
        vals.push_back(v);
    }
    CHECK(map_erasure_decode(code, known, vals).empty());
}

TEST_CASE("MAP erasure decoding matches codeword-enumeration oracle", "[gf2codes]") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 60; ++t) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng() % 4);
        const std::size_t n = k + 1 + static_cast<std::size_t>(rng() % 7);
        const auto code = random_admissible_code(n, k, rng);
        std::vector<std::uint8_t> info(k);
        for (auto& b : info) b = static_cast<std::uint8_t>(rng());
        std::vector<std::size_t> known;
        std::vector<Payload> vals;
        for (std::size_t j = 0; j < n; ++j) {
            if (rng() % 2) continue;
            std::uint8_t v = 0;
            std::uint64_t col = code.column(j);
            while (col) {
                v ^= info[static_cast<std::size_t>(std::countr_zero(col))];
                col &= col - 1;
            }
            known.push_back(j);
            vals.push_back({v});
        }
        const auto got = map_erasure_decode(code, known, vals);
        const auto want = test::erasure_decode_bruteforce(code, info, known);
        REQUIRE(got.size() == want.positions.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].first == want.positions[i]);
            CHECK(got[i].second == Payload{want.values[i]});
        }
    }
}

TEST_CASE("burst-node EXIT function values", "[gf2codes]") {
    const auto rep2 = BinaryLinearCode::repetition(2);
    CHECK(exit_bn(rep2, 0.3) == Catch::Approx(0.3).margin(1e-15));
    CHECK_THROWS_AS(exit_bn(rep2, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(exit_bn(rep2, 1.1), std::invalid_argument);

    std::mt19937_64 rng(9);
    for (int t = 0; t < 10; ++t) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng() % 4);
        const std::size_t n = k + 1 + static_cast<std::size_t>(rng() % 8);
        const auto code = random_admissible_code(n, k, rng);
        CHECK(exit_bn(code, 0.0) == Catch::Approx(0.0).margin(1e-12));
        CHECK(exit_bn(code, 1.0) == Catch::Approx(1.0).margin(1e-12));
        double prev = 0.0;
        for (int i = 0; i <= 50; ++i) {
            const double f = exit_bn(code, i / 50.0);
            CHECK(f >= prev - 1e-12);
            CHECK(f >= -1e-12);
            CHECK(f <= 1.0 + 1e-12);
            prev = f;
        }
    }
}

TEST_CASE("EXIT area equals the code rate", "[gf2codes]") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 20; ++t) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng() % 4);
        const std::size_t n = k + 1 + static_cast<std::size_t>(rng() % 10);
        const auto code = random_admissible_code(n, k, rng);
        const double area = test::simpson_01([&](double p) { return exit_bn(code, p); });
        CHECK(std::abs(area - code.rate()) < 1e-6);
    }
}

TEST_CASE("SPC EXIT duality", "[gf2codes]") {
    for (std::size_t k = 1; k <= 6; ++k) {
        const auto spc = BinaryLinearCode::single_parity_check(k);
        for (int i = 0; i <= 100; ++i) {
            const double p = i / 100.0;
            CHECK(std::abs(exit_bn(spc, p) - (1.0 - std::pow(1.0 - p, static_cast<double>(k)))) < 1e-12);
        }
    }
}

TEST_CASE("MDS EXIT function", "[gf2codes]") {
    CHECK(exit_mds(5, 3, 0.5) == Catch::Approx(0.6875).margin(1e-15));  // (1+4+6)/16
    CHECK(exit_mds(7, 3, 1.0) == Catch::Approx(1.0).margin(1e-12));
    for (int i = 0; i <= 20; ++i) {
        const double p = i / 20.0;
        CHECK(std::abs(exit_mds(6, 1, p) - exit_bn(BinaryLinearCode::repetition(6), p)) < 1e-12);
    }
    CHECK_THROWS_AS(exit_mds(4, 4, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(exit_mds(4, 0, 0.5), std::invalid_argument);
}
