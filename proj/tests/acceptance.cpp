// One PASS/FAIL line per acceptance criterion; nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "amerbound/bench.hpp"
#include "amerbound/instances.hpp"
#include "amerbound/verify.hpp"
#include "support/closed_form.hpp"
#include "support/random_instances.hpp"
#include "support/random_lp.hpp"
#include "support/vertex_oracle.hpp"

using namespace amerbound;

namespace {

// Everything criterion 7 re-checks.
struct Solved {
    std::string label;
    BoundResult result;
    AmericanPayoffGrid payoff;
    PayoffFunction function;  // empty unless the claim comes from a put
    double s0 = 100.0;
};
std::vector<Solved> solved;

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string cell(const char* name, double got, double want) {
    std::ostringstream os;
    os << name << ' ' << fmt("%.4f", got) << " (" << fmt("%.2f", want) << ")";
    return os.str();
}

bool near(double got, double want, double tol) { return std::abs(got - want) <= tol; }

Outcome c1() {
    auto in = instances::sec52();
    auto r = robust_bound(in.surface, in.payoff);
    solved.push_back({"sec52", r, in.payoff, {}, in.surface.s0});
    auto dual = build_dual_bounded(implied_marginals(in.surface), in.payoff);
    auto rep = lp::check_point(dual.lp, hedge_to_vector(instances::sec52_corrected_hedge(), dual.index), 1e-9);
    Outcome o;
    o.pass = near(r.phi, 3.6, 1e-8) && near(r.psi, 3.6, 1e-8) && rep.feasible && near(rep.objective, 3.6, 1e-9);
    o.detail = "Phi=" + fmt("%.10f", r.phi) + " Psi=" + fmt("%.10f", r.psi) + "; explicit hedge " +
               (rep.feasible ? "feasible" : "infeasible") + " at cost " + fmt("%.6f", rep.objective) +
               " with d2 read as a short position";
    return o;
}

Outcome c2() {
    auto in = instances::eg11();
    auto r = robust_bound(in.surface, in.payoff);
    solved.push_back({"eg11", r, in.payoff, {}, in.surface.s0});
    auto seed = seed_model(implied_marginals(in.surface));
    double seed_price = mc_price(seed, in.payoff, 1, 1).estimate;
    Outcome o;
    o.pass = near(r.phi, 34.0, 1e-8) && near(r.psi, 34.0, 1e-8) && near(seed_price, 32.0, 1e-12);
    o.detail = "Phi=" + fmt("%.10f", r.phi) + ", seed model " + fmt("%.6f", seed_price);
    return o;
}

Outcome c3() {
    auto in = instances::sec26();
    auto r = robust_bound(in.surface, in.payoff);
    solved.push_back({"sec26", r, in.payoff, {}, in.surface.s0});
    double ref = oracle::jump_value({0.5, 0.25, 0.25}, {130, 115, 100});
    Outcome o;
    o.pass = near(r.phi, ref, 1e-8) && near(r.psi, ref, 1e-8) && near(ref, 35.625, 1e-12);
    o.detail = "Phi=" + fmt("%.10f", r.phi) + " Psi=" + fmt("%.10f", r.psi) + ", closed form " + fmt("%.6f", ref);
    return o;
}

struct Row {
    double phi, chi, zeta, chi_exact, ratio;
};

Row solve_row(const bench::BenchConfig& c, const std::string& label) {
    auto surface = bench::bs_surface(c);
    auto pay = bench::bench_payoffs(c);
    auto r = robust_bound(surface, pay.grid);
    Row row{r.phi, bench::chi_binomial(pay.linear, c), bench::zeta(surface, pay.grid),
            bench::chi_binomial(pay.put, c), 0.0};
    row.ratio = 100.0 * (row.chi - row.zeta) / (row.phi - row.zeta);
    solved.push_back({label, std::move(r), pay.grid, pay.linear, c.s0});
    return row;
}

Outcome c4() {
    auto row = solve_row({}, "headline");
    Outcome o;
    o.pass = near(row.phi, 7.66, 0.05) && near(row.chi, 6.74, 0.05) && near(row.zeta, 6.35, 0.05) &&
             near(row.chi_exact, 6.09, 0.05) && near(row.ratio, 29.1, 2.0);
    o.detail = cell("phi", row.phi, 7.66) + ", " + cell("chi", row.chi, 6.74) + ", " + cell("zeta", row.zeta, 6.35) +
               ", " + cell("chi(a)", row.chi_exact, 6.09) + ", " + cell("ratio%", row.ratio, 29.1);
    return o;
}

Outcome c5() {
    const double want[5][4] = {{1.00, 0.92, 0.91, 15.5},
                               {3.25, 2.89, 2.79, 20.6},
                               {7.66, 6.74, 6.35, 29.1},
                               {14.09, 12.81, 11.73, 45.8},
                               {22.02, 20.89, 20.15, 39.6}};
    auto configs = bench::figure4_configs();
    Outcome o;
    double worst_cell = 0, worst_ratio = 0;
    for (std::size_t i = 0; i < configs.size() && i < 5; ++i) {
        auto row = solve_row(configs[i], "moneyness K=" + fmt("%g", configs[i].K));
        worst_cell = std::max({worst_cell, std::abs(row.phi - want[i][0]), std::abs(row.chi - want[i][1]),
                               std::abs(row.zeta - want[i][2])});
        worst_ratio = std::max(worst_ratio, std::abs(row.ratio - want[i][3]));
        o.pass = o.pass && row.ratio < 50.0;
    }
    o.pass = o.pass && configs.size() == 5 && worst_cell <= 0.05;
    o.detail = "5 rows, worst price cell off by " + fmt("%.4f", worst_cell) + ", all ratios below 50%" +
               ", worst ratio cell off by " + fmt("%.2f", worst_ratio) +
               " points (ratio cells amplify price rounding)";
    return o;
}

Outcome c6() {
    Outcome o;
    double worst = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        auto in = oracle::random_instance(i);
        auto r = robust_bound(in.surface, in.payoff);
        double rel = std::abs(r.phi - r.psi) / (1 + std::abs(r.phi));
        worst = std::max(worst, rel);
        o.pass = o.pass && rel <= 1e-6;
        solved.push_back({in.label, std::move(r), in.payoff, {}, in.surface.s0});
    }
    o.detail = "100 instances, worst |Phi-Psi|/(1+|Phi|) " + fmt("%.2e", worst);
    return o;
}

Outcome c7() {
    Outcome o;
    double worst_z = 0, worst_lattice = 0, worst_random = 0;
    std::size_t lattice_done = 0, continuous_done = 0;
    for (const auto& s : solved) {
        const double scale = payoff_scale(s.payoff);
        auto mr = check_model(s.result.model, &s.payoff);
        auto mc = mc_price(s.result.model, s.payoff, 1000000, 42);
        double z = mc.stderr_ > 0 ? std::abs(mc.estimate - s.result.phi) / mc.stderr_ : 0.0;
        bool mc_ok = std::abs(mc.estimate - s.result.phi) <= 3 * mc.stderr_ + 1e-9 * scale;
        worst_z = std::max(worst_z, z);

        VerifyOptions vo;
        vo.s0 = s.s0;
        auto lat = verify_superreplication(s.result.hedge, s.payoff, VerifyMode::lattice_exhaustive, 0, 1, nullptr, vo);
        bool lat_ok = true;
        if (lat.skipped.empty()) {
            ++lattice_done;
            lat_ok = lat.min_slack >= -1e-9 * scale;
            worst_lattice = std::min(worst_lattice, lat.min_slack / scale);
        }
        auto full = verify_superreplication(s.result.hedge, s.payoff, VerifyMode::full_line_random, 100000, 2,
                                            nullptr, vo);
        bool rand_ok = full.min_slack >= -1e-6 * scale;
        worst_random = std::min(worst_random, full.min_slack / scale);
        if (s.function.eval) {
            auto cont = verify_superreplication(s.result.hedge, s.payoff, VerifyMode::continuous_random, 100000, 3,
                                                &s.function, vo);
            ++continuous_done;
            rand_ok = rand_ok && cont.min_slack >= -1e-6 * scale;
            worst_random = std::min(worst_random, cont.min_slack / scale);
        }
        if (!(mr.ok && mc_ok && lat_ok && rand_ok)) {
            o.pass = false;
            o.detail += s.label + " failed (model " + std::to_string(mr.ok) + ", mc z=" + fmt("%.2f", z) + "); ";
        }
    }
    o.detail += std::to_string(solved.size()) + " instances, worst MC deviation " + fmt("%.2f", worst_z) +
                " se, lattice (" + std::to_string(lattice_done) + " exhaustive) min slack/scale " +
                fmt("%.1e", worst_lattice) + ", random (" + std::to_string(continuous_done) +
                " also continuous) min slack/scale " + fmt("%.1e", worst_random);
    return o;
}

Outcome c8() {
    auto mutate_all = [](const Solved& s, VerifyMode mode) {
        const double eps = 1e-3 * payoff_scale(s.payoff);
        std::size_t tried = 0, caught = 0;
        const auto& r = s.result;
        const PayoffFunction* A = s.function.eval ? &s.function : nullptr;
        for (std::size_t j = 0; j <= r.hedge.J(); ++j)
            for (std::size_t n = 0; n < r.hedge.N(); ++n) {
                if (r.model.F(j, n) <= 1e-9 || s.payoff.values(j, n) <= 0) continue;
                HedgeStrategy h = r.hedge;
                h.V(j, n) -= eps;
                ++tried;
                auto v = verify_superreplication(h, s.payoff, mode, 20000, 3, A);
                if (v.min_slack < -0.5 * eps) ++caught;
            }
        return std::pair{tried, caught};
    };
    Outcome o;
    for (const auto& s : solved) {
        if (s.label != "sec26" && s.label != "headline") continue;
        auto mode = s.label == "sec26" ? VerifyMode::lattice_exhaustive : VerifyMode::full_line_random;
        auto [tried, caught] = mutate_all(s, mode);
        o.pass = o.pass && tried > 0 && caught == tried;
        o.detail += s.label + ": " + std::to_string(caught) + "/" + std::to_string(tried) + " lowered V caught; ";
    }
    o.detail.resize(o.detail.size() - 2);
    return o;
}

Outcome c9() {
    std::mt19937_64 rng(20261018);
    Outcome o;
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        auto lp = oracle::random_small_lp(rng);
        auto exact = oracle::vertex_optimum(lp);
        if (!exact) {
            o.pass = false;
            continue;
        }
        auto s = lp::solve(lp);
        double err = s.status == lp::Status::optimal ? std::abs(s.objective - static_cast<double>(*exact)) : INFINITY;
        worst = std::max(worst, err);
        o.pass = o.pass && err <= 1e-7;
    }
    o.detail = "200 programs, worst deviation from exact vertex optimum " + fmt("%.2e", worst);
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        double budget;  // seconds, 0 for none
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{{1, 1, c1},   {2, 1, c2},   {3, 1, c3}, {4, 30, c4}, {5, 180, c5},
                                     {6, 300, c6}, {7, 0, c7},   {8, 0, c8}, {9, 0, c9}};
    int failed = 0;
    for (const auto& c : all) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget > 0 && secs > c.budget) {
            o.pass = false;
            o.detail += "; over the " + fmt("%g", c.budget) + " s budget";
        }
        failed += !o.pass;
        std::printf("criterion %d: %s  (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
