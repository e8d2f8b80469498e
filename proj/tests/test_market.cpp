#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "amerbound/instances.hpp"
#include "amerbound/market.hpp"
#include "support/random_instances.hpp"

using namespace amerbound;

namespace {
std::string slurp(const std::string& rel) {
    std::ifstream in(std::string(AMERBOUND_SOURCE_DIR) + "/" + rel);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}
}  // namespace

TEST_CASE("jump example marginals follow the cumulative jump probability", "[market]") {
    auto in = instances::sec26();
    auto m = implied_marginals(in.surface);
    double Q = 0.0;
    const double q[] = {0.5, 0.25, 0.25};
    for (std::size_t n = 0; n < 3; ++n) {
        Q += q[n];
        CHECK(m.p(0, n) == Catch::Approx(0.0).margin(1e-15));
        CHECK(m.p(1, n) == Catch::Approx(Q / 2));
        CHECK(m.p(2, n) == Catch::Approx(1 - Q));
        CHECK(m.p(3, n) == Catch::Approx(Q / 2));
    }
    auto rep = validate(in.surface);
    CHECK(rep.status == Validity::weakly_valid);
    CHECK(rep.zero_tail);
}

TEST_CASE("built-in examples are weakly valid with zero tail", "[market]") {
    for (auto name : {"sec26", "sec52", "eg11"}) {
        auto in = instances::by_name(name);
        auto rep = validate(in.surface);
        INFO(name);
        CHECK(rep.status != Validity::invalid);
        CHECK(rep.violations.empty());
        CHECK(rep.zero_tail);
        CHECK(check_convex_order(implied_marginals(in.surface)).status == Validity::weakly_valid);
    }
    REQUIRE_THROWS_AS(instances::by_name("nope"), std::invalid_argument);
}

TEST_CASE("marginals round trip through call prices", "[market]") {
    auto in = instances::sec52();
    auto m = implied_marginals(in.surface);
    CHECK(m.s0 == Catch::Approx(2.0));
    const double expect[5][2] = {{0, 0.4}, {0.5, 0}, {0, 0.2}, {0.5, 0}, {0, 0.4}};
    for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t n = 0; n < 2; ++n) CHECK(m.p(j, n) == Catch::Approx(expect[j][n]).margin(1e-14));
    auto back = surface_from_marginals(m.states, m.maturities, m.p);
    for (std::size_t j = 0; j <= back.J(); ++j)
        for (std::size_t n = 0; n < back.N(); ++n)
            CHECK(back.prices(j, n) == Catch::Approx(in.surface.prices(j, n)).margin(1e-13));
}

TEST_CASE("static price of piecewise-linear claims", "[market]") {
    auto in = instances::sec26();
    const auto x = in.surface.states();
    for (std::size_t n = 0; n < in.surface.N(); ++n) {
        // Forward: pays x, priced at s0 with the tail slope 1 beyond x_J.
        CHECK(price_piecewise_linear(in.surface, x, 1.0, n) == Catch::Approx(100.0));
        // Call at 100 as a lattice claim.
        std::vector<double> call{0, 0, 0, 50};
        CHECK(price_piecewise_linear(in.surface, call, 1.0, n) == Catch::Approx(in.surface.prices(2, n)));
    }
    REQUIRE_THROWS_AS(price_piecewise_linear(in.surface, {1.0}, 0.0, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(price_piecewise_linear(in.surface, x, 0.0, 9), std::invalid_argument);
}

TEST_CASE("extended marginals carry the tail call price", "[market]") {
    auto s = load_surface_json(slurp("data/bs_quarterly.json"));
    auto e = extended_marginals(s);
    REQUIRE(e.p.rows() == s.J() + 2);
    for (std::size_t n = 0; n < s.N(); ++n) {
        double mass = 0.0, mean = 0.0;
        for (std::size_t j = 0; j <= s.J(); ++j) {
            mass += e.p(j, n);
            mean += e.p(j, n) * e.states[j];
        }
        CHECK(mass == Catch::Approx(1.0));
        // Mean of the lattice part plus the tail call recovers s0.
        CHECK(mean + e.p(s.J() + 1, n) == Catch::Approx(100.0));
        CHECK(e.p(s.J() + 1, n) == Catch::Approx(s.prices(s.J(), n)));
    }
    auto rep = validate(s, ValidationMode::strict);
    CHECK(rep.status == Validity::strictly_valid);
    CHECK_FALSE(rep.zero_tail);
}

TEST_CASE("perturbations are flagged with their size", "[market]") {
    auto s = load_surface_json(slurp("data/bs_quarterly.json"));
    const double eps = 1e-3;
    SECTION("butterfly") {
        // Raising the middle call breaks convexity across 90/100/110.
        auto bumped = s;
        double margin = 0.5 * (s.prices(3, 1) + s.prices(5, 1)) - s.prices(4, 1);
        bumped.prices(4, 1) += margin + eps;
        auto rep = validate(bumped);
        REQUIRE(rep.status == Validity::invalid);
        bool found = false;
        for (const auto& v : rep.violations)
            if (v.constraint == "convexity" && v.j == 4 && v.n == 1) {
                found = true;
                CHECK(v.magnitude == Catch::Approx(eps).margin(1e-9));
            }
        CHECK(found);
    }
    SECTION("calendar") {
        auto bumped = s;
        bumped.prices(4, 0) = s.prices(4, 1) + eps;
        auto rep = validate(bumped);
        REQUIRE(rep.status == Validity::invalid);
        bool found = false;
        for (const auto& v : rep.violations) found = found || (v.constraint == "calendar" && v.j == 4 && v.n == 0);
        CHECK(found);
    }
    SECTION("negative probability stops marginal extraction") {
        auto bumped = s;
        bumped.prices(4, 1) += 3.0;
        REQUIRE_THROWS_AS(implied_marginals(bumped), ValidationError);
    }
}

TEST_CASE("strictly valid implies weakly valid", "[market][property]") {
    for (std::size_t i = 0; i < 100; ++i) {
        auto in = oracle::random_instance(i);
        auto strict = validate(in.surface, ValidationMode::strict);
        auto weak = validate(in.surface, ValidationMode::weak);
        INFO(in.label);
        CHECK(weak.status != Validity::invalid);
        if (strict.status == Validity::strictly_valid) CHECK(weak.status == Validity::strictly_valid);
        CHECK(weak.zero_tail == in.zero_tail);
        // Lattice marginals are a martingale law only when no mass sits beyond x_J.
        if (in.zero_tail) CHECK(check_convex_order(implied_marginals(in.surface), 1e-9).status != Validity::invalid);
    }
}

TEST_CASE("surface loading", "[market]") {
    SECTION("csv with an s0 line") {
        auto s = load_surface_csv(slurp("data/sec26.csv"));
        auto ref = instances::sec26().surface;
        REQUIRE(s.J() == 3);
        REQUIRE(s.N() == 3);
        for (std::size_t j = 0; j <= 3; ++j)
            for (std::size_t n = 0; n < 3; ++n) CHECK(s.prices(j, n) == ref.prices(j, n));
    }
    SECTION("csv with a strike-0 row") {
        auto s = load_surface_csv("strike,1\n0,10\n5,5\n10,0\n");
        CHECK(s.s0 == 10.0);
        CHECK(s.J() == 2);
    }
    SECTION("marginal documents") {
        auto s = load_surface_json(slurp("data/sec52_marginals.json"));
        CHECK(s.s0 == Catch::Approx(2.0));
        CHECK(s.prices(1, 1) == Catch::Approx(1.4));
    }
    SECTION("errors") {
        REQUIRE_THROWS_AS(load_surface_json("{"), ParseError);
        REQUIRE_THROWS_AS(load_surface_json("{\"strikes\": [1], \"maturities\": [1], \"calls\": [[0]]}"), ParseError);
        REQUIRE_THROWS_AS(load_surface_json("{\"s0\": 1, \"strikes\": [1], \"maturities\": [1], \"calls\": [[0, 1]]}"),
                          ValidationError);
        REQUIRE_THROWS_AS(load_surface_json("{\"s0\": 1, \"strikes\": [2, 1], \"maturities\": [1], \"calls\": [[0], [0]]}"),
                          ValidationError);
        REQUIRE_THROWS_AS(load_surface_csv("strike,1\n5,x\n"), ParseError);
        REQUIRE_THROWS_AS(load_surface_csv("strike,1\n5,1\n"), ParseError);
        REQUIRE_THROWS_AS(load_surface_json("{\"states\": [0, 1], \"marginals\": [[0.5], [0.6]]}"), ValidationError);
    }
}
