#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "csa/ensemble.hpp"

using namespace csa;

TEST_CASE("distribution derived quantities", "[ensemble]") {
    const ComponentDistribution irsa({ComponentSpec::repetition(2, 0.554016),
                                      ComponentSpec::repetition(3, 0.261312),
                                      ComponentSpec::repetition(6, 0.184672)});
    CHECK(irsa.n_bar() == Catch::Approx(3.0).margin(1e-9));
    CHECK(irsa.rate() == Catch::Approx(1.0 / 3.0).margin(1e-9));

    const ComponentDistribution rep2({ComponentSpec::repetition(2, 1.0)});
    CHECK(rep2.rate() == Catch::Approx(0.5));
    CHECK(rep2.energy_increment_db() == Catch::Approx(3.0103).margin(1e-4));

    const ComponentDistribution spc({ComponentSpec::explicit_code(BinaryLinearCode::single_parity_check(2), 1.0)});
    CHECK(spc.rate() == Catch::Approx(2.0 / 3.0).margin(1e-12));
}

TEST_CASE("distribution validation", "[ensemble]") {
    CHECK_THROWS_AS(ComponentDistribution({ComponentSpec::repetition(2, 0.5)}), std::invalid_argument);
    CHECK_THROWS_AS(ComponentDistribution({ComponentSpec::repetition(2, 0.5),
                                           ComponentSpec::from_generator("110,011", 0.5)}),
                    std::invalid_argument);  // mixed k
    // d_min = 1: identity-like (2,2) code
    CHECK_THROWS_AS(ComponentDistribution({ComponentSpec::from_generator("10,01", 1.0)}), std::invalid_argument);
    CHECK_THROWS_AS(ComponentDistribution({}), std::invalid_argument);
}

TEST_CASE("edge fractions and rate identity", "[ensemble]") {
    const ComponentDistribution d({ComponentSpec::from_generator("110,011", 0.666667),
                                   ComponentSpec::from_generator("1100,0111", 0.333333)});
    double lsum = 0.0;
    for (std::size_t h = 0; h < d.size(); ++h) {
        const auto& e = d.entries()[h];
        CHECK(e.lambda ==
              Catch::Approx(e.spec.probability * static_cast<double>(e.spec.n) / d.n_bar()).margin(1e-15));
        lsum += e.lambda;
    }
    CHECK(lsum == Catch::Approx(1.0).margin(1e-12));
    CHECK(d.rate() * d.n_bar() == Catch::Approx(static_cast<double>(d.k())).margin(1e-12));
}

TEST_CASE("exact ensemble enumeration", "[ensemble]") {
    const auto e21 = enumerate_random_ensemble(2, 1);
    CHECK(e21.member_count == 1);
    CHECK(e21.e == std::vector<double>{0.0, 2.0, 1.0});

    const auto e32 = enumerate_random_ensemble(3, 2);
    CHECK(e32.member_count == 6);  // the column permutations of the SPC
    CHECK(e32.e == std::vector<double>{0.0, 3.0, 6.0, 2.0});
    CHECK(e32.b2 == Catch::Approx(3.0));

    const auto e42 = enumerate_random_ensemble(4, 2);
    CHECK(e42.member_count == 54);
    CHECK(e42.b2 == Catch::Approx(4.0 / 3.0).margin(1e-12));

    CHECK_THROWS_AS(enumerate_random_ensemble(13, 2), std::domain_error);  // k*n > 24
    CHECK_THROWS_AS(enumerate_random_ensemble(2, 2), std::domain_error);   // no admissible code
}

TEST_CASE("sampled ensemble agrees with enumeration", "[ensemble]") {
    const auto exact = enumerate_random_ensemble(4, 2);
    const auto mc = sample_random_ensemble(4, 2, 100'000, 99);
    CHECK_FALSE(mc.exact);
    CHECK(mc.samples == 100'000);
    CHECK(mc.b2_stderr > 0.0);
    CHECK(std::abs(mc.b2 - exact.b2) < 3.0 * mc.b2_stderr);
    for (std::size_t g = 0; g <= 4; ++g)
        CHECK(std::abs(mc.e[g] - exact.e[g]) < 4.0 * mc.e_stderr[g] + 1e-9);

    const auto exact12 = enumerate_random_ensemble(12, 2);
    const auto mc12 = sample_random_ensemble(12, 2, 100'000, 123);
    CHECK(mc12.e_stderr[6] > 0.0);  // standard errors reported where members differ
    for (std::size_t g = 0; g <= 12; ++g)
        CHECK(std::abs(mc12.e[g] - exact12.e[g]) < 5.0 * mc12.e_stderr[g] + 1e-9);
    // e_1 and e_{n-1} are the same for every admissible member
    CHECK(mc12.e[1] == Catch::Approx(12.0).margin(1e-9));
    CHECK(mc12.e_stderr[1] == Catch::Approx(0.0).margin(1e-6));
    CHECK(mc12.e[11] == Catch::Approx(24.0).margin(1e-9));
}

TEST_CASE("sampling input validation", "[ensemble]") {
    CHECK_THROWS_AS(sample_random_ensemble(4, 2, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_random_ensemble(2, 2, 10, 1), std::runtime_error);  // nothing admissible
}

TEST_CASE("ensemble expectations bounded by k C(n,g)", "[ensemble]") {
    const auto ee = enumerate_random_ensemble(6, 2);
    for (std::size_t g = 0; g <= 6; ++g) {
        CHECK(ee.e[g] >= 0.0);
        CHECK(ee.e[g] <= 2.0 * static_cast<double>(binomial(6, g)) + 1e-9);
    }
}

TEST_CASE("distribution JSON round trip", "[ensemble]") {
    const std::string text = R"({"entries":[
        {"type":"explicit","G":"1100,0111","p":0.25},
        {"type":"random","n":4,"k":2,"p":0.25},
        {"type":"mds","n":5,"k":2,"p":0.25},
        {"type":"rep","n":3,"p":0.25}]})";
    const auto j = nlohmann::json::parse(text);
    CHECK_THROWS_AS(distribution_from_json(j), std::invalid_argument);  // rep has k=1, others k=2

    const auto specs = component_specs_from_json(j);
    REQUIRE(specs.size() == 4);
    CHECK(specs[0].kind == ComponentKind::explicit_code);
    CHECK(specs[1].kind == ComponentKind::random_ensemble);
    CHECK(specs[2].kind == ComponentKind::mds);
    CHECK(specs[3].kind == ComponentKind::repetition);
    for (const auto& s : specs) {
        const auto back = component_spec_from_json(component_spec_to_json(s));
        CHECK(back.kind == s.kind);
        CHECK(back.n == s.n);
        CHECK(back.k == s.k);
        CHECK(back.probability == s.probability);
    }
    CHECK_THROWS_AS(component_spec_from_json(nlohmann::json{{"type", "nope"}, {"p", 1.0}}),
                    std::invalid_argument);
}

TEST_CASE("published distribution files parse", "[ensemble]") {
    for (const char* name : {"irsa_r13", "csa_k2_codes_r13", "csa_k2_random_r12", "mds_lambda9"}) {
        std::ifstream in(std::string(CSA_CONFIG_DIR) + "/" + name + ".json");
        REQUIRE(in.good());
        const auto dist = distribution_from_json(nlohmann::json::parse(in));
        CHECK(dist.rate() > 0.0);
        CHECK(dist.rate() < 1.0);
    }
}
