#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "amerbound/bench.hpp"
#include "amerbound/bound.hpp"
#include "amerbound/instances.hpp"
#include "support/closed_form.hpp"
#include "support/random_instances.hpp"

using namespace amerbound;

namespace {
double solve_value(const lp::LinearProgram& prog) {
    auto s = lp::solve(prog);
    REQUIRE(s.status == lp::Status::optimal);
    return s.objective;
}

// Random (q, b) inside the closed form's domain.
std::pair<std::vector<double>, std::vector<double>> random_jump(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    std::size_t N = 1 + rng() % 5;
    std::vector<double> q(N), b(N);
    double total = 0;
    for (double& v : q) total += v = 0.05 + u(rng);
    for (double& v : q) v /= total;
    b[0] = 110 + 35 * u(rng);
    double floor = 2 * b[0] - 150;
    for (std::size_t n = 1; n < N; ++n) b[n] = b[n - 1] - (b[n - 1] - 50) * u(rng) * 0.6;
    if (N > 1) b[N - 1] = std::min(b[N - 1], floor - 5 * u(rng));
    return {q, b};
}
}  // namespace

TEST_CASE("jump example matches the closed form", "[bound][oracle]") {
    auto in = instances::sec26();
    double ref = oracle::jump_value({0.5, 0.25, 0.25}, {130, 115, 100});
    REQUIRE(ref == 35.625);
    auto r = robust_bound(in.surface, in.payoff);
    CHECK(r.variant == Variant::bounded);
    CHECK(r.phi == Catch::Approx(ref).margin(1e-8));
    CHECK(r.psi == Catch::Approx(ref).margin(1e-8));

    std::mt19937_64 rng(26);
    for (int trial = 0; trial < 40; ++trial) {
        auto [q, b] = random_jump(rng);
        auto inst = instances::sec26(q, b);
        double expect = oracle::jump_value(q, b);
        auto res = robust_bound(inst.surface, inst.payoff);
        INFO("trial " << trial << " N=" << q.size() << " b1=" << b[0] << " bN=" << b.back());
        CHECK(res.phi == Catch::Approx(expect).margin(1e-8));
        CHECK(res.psi == Catch::Approx(expect).margin(1e-8));
    }
}

TEST_CASE("filtration example and introductory example", "[bound]") {
    auto a = instances::sec52();
    auto ra = robust_bound(a.surface, a.payoff, VariantChoice::bounded);
    CHECK(ra.phi == Catch::Approx(3.6).margin(1e-8));
    CHECK(ra.psi == Catch::Approx(3.6).margin(1e-8));

    auto b = instances::eg11();
    auto rb = robust_bound(b.surface, b.payoff);
    CHECK(rb.phi == Catch::Approx(34).margin(1e-8));
    CHECK(rb.psi == Catch::Approx(34).margin(1e-8));
    // Exercising everything at t_1 is worth only 32.
    CHECK(rb.phi > 32.0);
}

TEST_CASE("variants agree on zero-tail surfaces", "[bound]") {
    for (auto name : {"sec26", "sec52", "eg11"}) {
        auto in = instances::by_name(name);
        auto bounded = robust_bound(in.surface, in.payoff, VariantChoice::bounded);
        auto extended = robust_bound(in.surface, in.payoff, VariantChoice::extended);
        INFO(name);
        CHECK(extended.variant == Variant::extended);
        CHECK(extended.phi == Catch::Approx(bounded.phi).margin(1e-8));
        CHECK(extended.psi == Catch::Approx(bounded.psi).margin(1e-8));
    }
    for (std::size_t i = 0; i < 20; i += 2) {
        auto in = oracle::random_instance(i);
        auto bounded = robust_bound(in.surface, in.payoff, VariantChoice::bounded);
        auto extended = robust_bound(in.surface, in.payoff, VariantChoice::extended);
        INFO(in.label);
        CHECK(extended.phi == Catch::Approx(bounded.phi).margin(1e-7));
    }
}

TEST_CASE("mechanical duals reproduce the hand-built programs", "[bound]") {
    auto in = instances::sec26();
    auto m = implied_marginals(in.surface);
    auto primal = build_primal_bounded(m, in.payoff);
    auto dual = build_dual_bounded(m, in.payoff);
    CHECK(solve_value(lp::dual_of(primal.lp)) == Catch::Approx(35.625).margin(1e-8));
    CHECK(solve_value(lp::dual_of(dual.lp)) == Catch::Approx(35.625).margin(1e-8));

    auto s = bench::bs_surface({});
    auto put = bench::bench_payoffs({});
    auto e = extended_marginals(s);
    auto ep = build_primal_extended(e, put.grid);
    CHECK(solve_value(lp::dual_of(ep.lp)) == Catch::Approx(solve_value(build_dual_extended(e, put.grid).lp)).margin(1e-7));
}

TEST_CASE("variable index is a bijection over the columns", "[bound]") {
    auto in = oracle::random_instance(7);
    auto e = extended_marginals(in.surface);
    for (auto built : {build_primal_extended(e, in.payoff), build_dual_extended(e, in.payoff)}) {
        REQUIRE(built.index.size() == built.lp.num_vars());
        for (std::size_t c = 0; c < built.index.size(); ++c) CHECK(built.index.find(built.index.key(c)) == c);
    }
    auto m = implied_marginals(instances::sec26().surface);
    auto d = build_dual_bounded(m, instances::sec26().payoff);
    using K = VarKey::Kind;
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(d.index.find({K::e1, j, 0, 2}) == VariableIndex::none);
        CHECK(d.index.find({K::e2, j, 0, 0}) == VariableIndex::none);
    }
    REQUIRE_THROWS_AS(build_primal_bounded(m, make_payoff_grid(Matrix(3, 3), {})), std::invalid_argument);
}

TEST_CASE("zero payoff and variant selection", "[bound]") {
    auto s = bench::bs_surface({});
    auto zero = make_payoff_grid(Matrix(s.J() + 1, s.N()), {});
    auto r = robust_bound(s, zero);
    CHECK(r.variant == Variant::extended);
    CHECK(r.phi == Catch::Approx(0).margin(1e-12));
    CHECK(r.psi == Catch::Approx(0).margin(1e-12));
    CHECK(r.hedge.V.max_abs() == Catch::Approx(0).margin(1e-12));
    REQUIRE_THROWS_AS(robust_bound(s, zero, VariantChoice::bounded), ValidationError);
    auto in = instances::sec26();
    CHECK(robust_bound(in.surface, in.payoff).variant == Variant::bounded);
}

TEST_CASE("headline quarterly put bound", "[bound]") {
    bench::BenchConfig c;
    auto r = robust_bound(bench::bs_surface(c), bench::bench_payoffs(c).grid);
    CHECK(r.variant == Variant::extended);
    CHECK(r.phi == Catch::Approx(7.66).margin(0.005));
    CHECK(r.gap <= 1e-6 * (1 + r.phi));
    CHECK(r.model.tail_value() == 0.0);  // the put has no asymptotic slope
}

TEST_CASE("explicit hedges of the worked examples", "[bound]") {
    auto check = [](const instances::Instance& in, const HedgeStrategy& h) {
        auto d = build_dual_bounded(implied_marginals(in.surface), in.payoff);
        return lp::check_point(d.lp, hedge_to_vector(h, d.index), 1e-9);
    };
    SECTION("filtration example") {
        auto in = instances::sec52();
        auto ok = check(in, instances::sec52_corrected_hedge());
        CHECK(ok.feasible);
        CHECK(ok.objective == Catch::Approx(3.6).margin(1e-12));
        CHECK(hedge_cost(instances::sec52_corrected_hedge(), implied_marginals(in.surface).p) ==
              Catch::Approx(3.6).margin(1e-12));
        auto literal = check(in, instances::sec52_printed_hedge());
        CHECK_FALSE(literal.feasible);
        CHECK(literal.violated_rows.size() == 7);
    }
    SECTION("jump example") {
        auto in = instances::sec26();
        auto ok = check(in, instances::sec26_explicit_hedge());
        CHECK(ok.feasible);
        CHECK(ok.objective == Catch::Approx(35.625).margin(1e-12));
        std::string binding;
        for (auto row : ok.binding_rows) binding += std::to_string(row) + " ";
        INFO("binding rows: " << binding);
        CHECK(ok.binding_rows.size() == 41);
        CHECK_FALSE(check(in, instances::sec26_explicit_hedge({130, 115, 100}, true)).feasible);

        std::mt19937_64 rng(52);
        for (int trial = 0; trial < 20; ++trial) {
            auto [q, b] = random_jump(rng);
            auto inst = instances::sec26(q, b);
            auto rep = check(inst, instances::sec26_explicit_hedge(b));
            INFO("trial " << trial);
            CHECK(rep.feasible);
            CHECK(rep.objective == Catch::Approx(oracle::jump_value(q, b)).margin(1e-9));
        }
    }
}

TEST_CASE("structural properties on random instances", "[bound][property]") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    for (std::size_t i = 0; i < 30; ++i) {
        auto in = oracle::random_instance(i);
        auto r = robust_bound(in.surface, in.payoff);
        INFO(in.label);
        CHECK(r.gap <= 1e-6 * (1 + std::abs(r.phi)));

        // Weak duality with the solver's own points.
        CHECK(r.phi <= r.psi + 1e-8 * (1 + std::abs(r.phi)));

        // Exercising at one fixed maturity is feasible, so the bound dominates Europeans.
        double european = 0;
        for (std::size_t n = 0; n < in.surface.N(); ++n)
            european = std::max(european, price_piecewise_linear(in.surface, in.payoff.values.col(n),
                                                                 in.payoff.tail_slopes[n], n));
        CHECK(r.phi >= european - 1e-8 * (1 + european));

        // Raising the payoff cannot lower the bound.
        Matrix up = in.payoff.values;
        for (std::size_t j = 0; j < up.rows(); ++j)
            for (std::size_t n = 0; n < up.cols(); ++n) up(j, n) += u(rng) < 0.3 ? u(rng) : 0.0;
        auto higher = robust_bound(in.surface, make_payoff_grid(up, in.payoff.tail_slopes));
        CHECK(higher.phi >= r.phi - 1e-8 * (1 + r.phi));

        auto report = check_model(r.model, &in.payoff);
        if (r.variant == Variant::bounded) CHECK(report.absorbing_residual <= 1e-9);

        // With a strictly positive payoff the whole mass is exercised.
        if (r.variant == Variant::bounded) {
            Matrix pos = in.payoff.values;
            for (std::size_t j = 0; j < pos.rows(); ++j)
                for (std::size_t n = 0; n < pos.cols(); ++n) pos(j, n) += 1.0;
            auto all = robust_bound(in.surface, make_payoff_grid(pos, in.payoff.tail_slopes));
            double mass = 0;
            for (std::size_t j = 0; j < pos.rows(); ++j)
                for (std::size_t n = 0; n < pos.cols(); ++n) mass += all.model.F(j, n);
            CHECK(mass == Catch::Approx(1.0).margin(1e-8));
        }
    }
}

TEST_CASE("seed model is a feasible pricing point", "[bound]") {
    for (auto name : {"sec26", "sec52", "eg11"}) {
        auto in = instances::by_name(name);
        auto m = implied_marginals(in.surface);
        auto seed = seed_model(m);
        auto primal = build_primal_bounded(m, in.payoff);
        auto rep = lp::check_point(primal.lp, model_to_vector(seed, primal.index), 1e-9);
        INFO(name);
        CHECK(rep.feasible);
        double first = 0;
        for (std::size_t j = 0; j <= m.J(); ++j) first += in.payoff.values(j, 0) * m.p(j, 0);
        CHECK(rep.objective == Catch::Approx(first).margin(1e-12));
        CHECK(check_model(seed).ok);
    }
    // The pricing LP at the zero vector violates the marginal rows.
    auto in = instances::sec26();
    auto primal = build_primal_bounded(implied_marginals(in.surface), in.payoff);
    CHECK_FALSE(lp::check_point(primal.lp, std::vector<double>(primal.lp.num_vars(), 0.0), 1e-9).feasible);
}
