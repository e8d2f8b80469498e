#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "amerbound/bench.hpp"
#include "amerbound/bound.hpp"
#include "amerbound/instances.hpp"
#include "amerbound/market.hpp"
#include "amerbound/model.hpp"
#include "amerbound/report.hpp"
#include "amerbound/verify.hpp"

namespace amerbound::cli {

using json = nlohmann::json;

enum ExitCode { ok = 0, failure = 1, parse = 2, validation = 3, solver = 4, certification = 5 };

struct RunConfig {
    std::string command;
    std::string input;    // surface file (.json or .csv)
    std::string payoff;   // payoff file or inline JSON
    std::string variant = "auto";
    std::string mode = "weak";  // validate
    std::string example;        // demo
    std::string table = "all";  // bench-table: fig3, fig4 or all
    std::size_t max_maturities = 26;
    std::size_t trials = 0;     // 0: command default
    std::uint64_t seed = 42;
    std::size_t steps = 2000;
    std::string out;
    std::string format;         // json, csv or pretty; empty: command default
    double tol_gap = 1e-6;
    double tol_feas = 1e-9;
};

// Lattice claim plus, when known, the payoff function it was derived from.
struct PayoffSpec {
    AmericanPayoffGrid grid;
    std::optional<PayoffFunction> function;
    std::string description;
};

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

inline CallSurface load_surface_file(const std::string& path) {
    std::string text = read_text(path);
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return load_surface_csv(text);
    return load_surface(parse_json(text, path));
}

inline json payoff_document(const std::string& arg) {
    auto first = arg.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && arg[first] == '{') return parse_json(arg, "--payoff");
    return parse_json(read_text(arg), arg);
}

inline double field(const json& doc, const char* key, std::optional<double> fallback = std::nullopt) {
    if (!doc.contains(key)) {
        if (fallback) return *fallback;
        throw ParseError(std::string("payoff spec lacks '") + key + "'");
    }
    if (!doc[key].is_number()) throw ParseError(std::string("payoff field '") + key + "' must be a number");
    return doc[key].get<double>();
}

// {"type":"put","K":..,"r":..,"exercise":"continuous"|"maturities"}
// {"type":"grid","values":[[..]],"tail_slopes":[..]}, values indexed [state][maturity]
// {"type":"example","name":"sec26|sec52|eg11"}
inline PayoffSpec load_payoff(const json& doc, const CallSurface& s) {
    if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string())
        throw ParseError("payoff spec must be an object with a string 'type'");
    const std::string type = doc["type"];
    PayoffSpec p;
    if (type == "put") {
        double K = field(doc, "K"), r = field(doc, "r", 0.0);
        std::string ex = doc.value("exercise", std::string("continuous"));
        PayoffFunction put;
        try {
            put = discounted_put(K, r);
        } catch (const std::invalid_argument& e) {
            throw ValidationError(e.what());
        }
        if (ex == "continuous") {
            p.function = linearize(put, s.strikes, s.maturities);
            p.grid = exercise_time_transform(*p.function, s.strikes, s.maturities);
        } else if (ex == "maturities") {
            p.grid = grid_payoff(put, s.strikes, s.maturities);
        } else {
            throw ParseError("payoff 'exercise' must be 'continuous' or 'maturities'");
        }
        p.description = "put K=" + report::fmt(K) + " r=" + report::fmt(r) + " exercise=" + ex;
    } else if (type == "grid") {
        Matrix v = detail::number_matrix(doc, "values");
        std::vector<double> tails = doc.contains("tail_slopes") ? detail::number_array(doc, "tail_slopes")
                                                                : std::vector<double>(v.cols(), 0.0);
        try {
            p.grid = make_payoff_grid(std::move(v), std::move(tails));
        } catch (const std::invalid_argument& e) {
            throw ValidationError(e.what());
        }
        p.description = "grid";
    } else if (type == "example") {
        if (!doc.contains("name") || !doc["name"].is_string()) throw ParseError("example payoff needs a 'name'");
        try {
            p.grid = instances::by_name(doc["name"]).payoff;
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what());
        }
        p.description = "example " + doc["name"].get<std::string>();
    } else {
        throw ParseError("unknown payoff type '" + type + "'");
    }
    if (p.grid.values.rows() != s.J() + 1 || p.grid.N() != s.N())
        throw ValidationError("payoff grid is " + std::to_string(p.grid.values.rows()) + "x" +
                              std::to_string(p.grid.N()) + " but the surface needs " + std::to_string(s.J() + 1) +
                              "x" + std::to_string(s.N()));
    return p;
}

struct Problem {
    CallSurface surface;
    PayoffSpec payoff;
};

// Surface from --input, or from the example named by the payoff spec.
inline Problem load_problem(const RunConfig& c) {
    if (c.payoff.empty()) throw ParseError("--payoff is required");
    json doc = payoff_document(c.payoff);
    Problem p;
    if (!c.input.empty()) {
        p.surface = load_surface_file(c.input);
    } else if (doc.is_object() && doc.value("type", std::string()) == "example" && doc.contains("name") &&
               doc["name"].is_string()) {
        try {
            p.surface = instances::by_name(doc["name"]).surface;
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what());
        }
    } else {
        throw ParseError("--input is required unless the payoff is a built-in example");
    }
    p.payoff = load_payoff(doc, p.surface);
    return p;
}

inline VariantChoice variant_choice(const std::string& v) {
    if (v == "auto") return VariantChoice::automatic;
    if (v == "bounded") return VariantChoice::bounded;
    if (v == "extended") return VariantChoice::extended;
    throw ParseError("--variant must be auto, bounded or extended");
}

inline BoundOptions bound_options(const RunConfig& c) {
    BoundOptions o;
    o.tol_gap = c.tol_gap;
    o.tol_feas = c.tol_feas;
    return o;
}

inline BoundResult solve(const RunConfig& c, const Problem& p) {
    auto rep = validate(p.surface, ValidationMode::weak);
    if (rep.status == Validity::invalid) {
        const auto& v = rep.violations.front();
        throw ValidationError("surface violates " + v.constraint + " at (" + std::to_string(v.j) + ", " +
                              std::to_string(v.n) + ") by " + report::fmt(v.magnitude));
    }
    return robust_bound(p.surface, p.payoff.grid, variant_choice(c.variant), bound_options(c));
}

struct Certification {
    json doc;
    bool passed = false;
};

// Model checks, Monte Carlo price against the bound and path-wise
// super-replication in every mode that applies.
inline Certification certify(const BoundResult& r, const Problem& p, std::size_t trials, std::size_t mc_paths,
                             std::uint64_t seed, double tol_feas) {
    Certification c;
    const double scale = payoff_scale(r.payoff);
    auto mr = check_model(r.model, &r.payoff, std::max(tol_feas, 1e-8));
    auto mc = mc_price(r.model, r.payoff, mc_paths, seed);
    bool mc_ok = std::abs(mc.estimate - r.phi) <= 3.0 * mc.stderr_ + 1e-9 * scale;
    json mcj = report::to_json(mc);
    mcj["within_3_stderr"] = mc_ok;
    VerifyOptions vo;
    vo.s0 = p.surface.s0;
    const PayoffFunction* A = p.payoff.function ? &*p.payoff.function : nullptr;
    std::vector<VerifyMode> modes{VerifyMode::lattice_exhaustive, VerifyMode::interval_random,
                                  VerifyMode::full_line_random};
    if (A && A->decreasing_in_t) modes.push_back(VerifyMode::continuous_random);
    json sr = json::array();
    bool sr_ok = true;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        auto v = verify_superreplication(r.hedge, r.payoff, modes[i], trials, seed + i, A, vo);
        bool pass = v.min_slack >= -1e-6 * scale;
        sr_ok = sr_ok && pass;
        json j = report::to_json(v);
        j["passed"] = pass;
        sr.push_back(std::move(j));
    }
    c.passed = mr.ok && mc_ok && sr_ok;
    c.doc = {{"variant", to_string(r.variant)},
             {"phi", report::num(r.phi)},
             {"psi", report::num(r.psi)},
             {"gap", report::num(r.gap)},
             {"hedge_cost", report::num(hedge_cost(r.hedge, r.marginals.p))},
             {"model_check", report::to_json(mr)},
             {"monte_carlo", mcj},
             {"superreplication", sr},
             {"slack_scale", report::num(scale)},
             {"certified", c.passed}};
    return c;
}

inline void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
    if (c.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + c.out + "'");
    f << text;
}

inline std::string fixed6(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << v;
    return os.str();
}

struct Demo {
    std::vector<std::string> lines;
    json doc;
    bool passed = true;

    void check(const std::string& what, bool ok, const std::string& detail) {
        lines.push_back((ok ? "  [ok]   " : "  [FAIL] ") + what + ": " + detail);
        doc["checks"].push_back({{"check", what}, {"passed", ok}, {"detail", detail}});
        passed = passed && ok;
    }
};

inline Demo run_demo(const std::string& name, std::size_t paths, std::uint64_t seed) {
    instances::Instance in;
    try {
        in = instances::by_name(name);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    Demo d;
    d.doc["example"] = name;
    auto r = robust_bound(in.surface, in.payoff);
    d.lines.push_back("demo " + name + ": Phi=" + fixed6(r.phi) + " Psi=" + fixed6(r.psi) + " (" +
                      to_string(r.variant) + " variant)");
    d.doc["phi"] = report::num(r.phi);
    d.doc["psi"] = report::num(r.psi);
    d.check("bound", std::abs(r.phi - in.expected) <= 1e-8 && std::abs(r.psi - in.expected) <= 1e-8,
            "expected " + fixed6(in.expected));

    auto marg = implied_marginals(in.surface);
    auto dual = build_dual_bounded(marg, in.payoff);
    auto check_hedge = [&](const std::string& what, const HedgeStrategy& h, bool expect_feasible) {
        auto rep = lp::check_point(dual.lp, hedge_to_vector(h, dual.index), 1e-9);
        std::string detail = rep.feasible ? "feasible, cost " + fixed6(rep.objective) + ", " +
                                                std::to_string(rep.binding_rows.size()) + " binding rows"
                                          : std::to_string(rep.violated_rows.size()) + " violated rows, worst by " +
                                                report::fmt(rep.max_violation);
        d.check(what, rep.feasible == expect_feasible && (!rep.feasible || std::abs(rep.objective - in.expected) <= 1e-9),
                detail);
    };
    if (name == "sec52") {
        check_hedge("explicit hedge quintuple (d2 as a short position)", instances::sec52_corrected_hedge(), true);
        check_hedge("explicit hedge quintuple with d2 packed literally (violation expected)",
                    instances::sec52_printed_hedge(), false);
        auto fs = bench::markov_best_sec52();
        d.check("natural-filtration optimum", std::abs(fs.best - 3.5) <= 1e-12,
                "best " + fixed6(fs.best) + " at p=" + fixed6(fs.p));
    } else if (name == "sec26") {
        check_hedge("explicit hedge (d2 as a short position)", instances::sec26_explicit_hedge(), true);
        check_hedge("explicit hedge with d2 packed literally (violation expected)",
                    instances::sec26_explicit_hedge({130.0, 115.0, 100.0}, true), false);
    } else if (name == "eg11") {
        auto seed_m = seed_model(marg);
        auto sp = mc_price(seed_m, in.payoff, 1, seed);
        double exact = 0.0;
        for (std::size_t j = 0; j <= marg.J(); ++j) exact += in.payoff.values(j, 0) * marg.p(j, 0);
        d.check("exercise at the first maturity", std::abs(exact - 32.0) <= 1e-12 && std::abs(sp.estimate - 32.0) <= 1e-12,
                "seed-model price " + fixed6(exact));
    }
    auto mr = check_model(r.model, &in.payoff);
    d.check("extracted model", mr.ok,
            "marginal " + report::fmt(mr.marginal_residual) + ", martingale " + report::fmt(mr.martingale_residual) +
                ", q in [" + report::fmt(mr.q_min) + ", " + report::fmt(mr.q_max) + "]");
    auto mc = mc_price(r.model, in.payoff, paths, seed);
    d.check("Monte Carlo", std::abs(mc.estimate - r.phi) <= 3.0 * mc.stderr_ + 1e-9,
            fixed6(mc.estimate) + " +- " + fixed6(mc.stderr_) + " over " + std::to_string(paths) + " paths");
    VerifyOptions vo;
    vo.s0 = in.surface.s0;
    for (auto mode : {VerifyMode::lattice_exhaustive, VerifyMode::full_line_random}) {
        auto v = verify_superreplication(r.hedge, in.payoff, mode, 100000, seed, nullptr, vo);
        d.check(std::string("super-replication ") + to_string(mode), v.min_slack >= -1e-9 * payoff_scale(in.payoff),
                "min slack " + report::fmt(v.min_slack) + " over " + std::to_string(v.trials) + " cases");
    }
    d.doc["passed"] = d.passed;
    return d;
}

inline std::vector<bench::BenchConfig> bench_configs(const RunConfig& c) {
    std::vector<bench::BenchConfig> out;
    if (c.table == "fig3" || c.table == "all")
        for (auto& b : bench::figure3_configs())
            if (b.N <= c.max_maturities) out.push_back(b);
    if (c.table == "fig4" || c.table == "all")
        for (auto& b : bench::figure4_configs())
            if (b.N <= c.max_maturities) out.push_back(b);
    if (c.table != "fig3" && c.table != "fig4" && c.table != "all")
        throw ParseError("--table must be fig3, fig4 or all");
    for (auto& b : out) b.steps = c.steps;
    return out;
}

inline int execute(const RunConfig& c, std::ostream& out) {
    const std::string& cmd = c.command;
    auto json_or = [&](const json& j, const std::string& pretty) {
        emit(c, c.format == "pretty" ? pretty : report::dump(j), out);
    };
    if (cmd == "validate") {
        if (c.input.empty()) throw ParseError("--input is required");
        auto s = load_surface_file(c.input);
        if (c.mode != "weak" && c.mode != "strict") throw ParseError("--mode must be weak or strict");
        auto rep = validate(s, c.mode == "strict" ? ValidationMode::strict : ValidationMode::weak);
        json j = report::to_json(rep);
        json_or(j, std::string("status: ") + to_string(rep.status) + ", " + std::to_string(rep.violations.size()) +
                       " violations\n");
        return rep.status == Validity::invalid ? validation : ok;
    }
    if (cmd == "bound") {
        auto p = load_problem(c);
        auto r = solve(c, p);
        json_or(report::to_json(r), "variant " + std::string(to_string(r.variant)) + "\nphi " + report::fmt(r.phi) +
                                        "\npsi " + report::fmt(r.psi) + "\ngap " + report::fmt(r.gap) + "\n");
        return ok;
    }
    if (cmd == "certify") {
        auto p = load_problem(c);
        auto r = solve(c, p);
        std::size_t trials = c.trials ? c.trials : 100000;
        auto cert = certify(r, p, trials, 10 * trials, c.seed, c.tol_feas);
        json_or(cert.doc, std::string("certified: ") + (cert.passed ? "yes" : "no") + "\n");
        if (!cert.passed) throw CertificationError("certificate checks failed (see report)");
        return ok;
    }
    if (cmd == "simulate") {
        auto p = load_problem(c);
        auto r = solve(c, p);
        std::size_t paths = c.trials ? c.trials : 1000000;
        auto mc = mc_price(r.model, r.payoff, paths, c.seed);
        json j = report::to_json(mc);
        j["phi"] = report::num(r.phi);
        j["seed"] = c.seed;
        json_or(j, "estimate " + report::fmt(mc.estimate) + " +- " + report::fmt(mc.stderr_) + "\n");
        return ok;
    }
    if (cmd == "bench-table") {
        auto rows = bench::premium_table(bench_configs(c), bound_options(c));
        json j = json::array();
        for (const auto& r : rows) j.push_back(report::to_json(r));
        if (c.format == "json") {
            emit(c, report::dump(j), out);
        } else {
            emit(c, report::premium_csv(rows), out);
            if (!c.out.empty()) {
                RunConfig side = c;
                side.out = c.out + ".json";
                emit(side, report::dump(j), out);
            }
        }
        return ok;
    }
    if (cmd == "demo") {
        auto d = run_demo(c.example, c.trials ? c.trials : 1000000, c.seed);
        if (c.format == "json") {
            emit(c, report::dump(d.doc), out);
        } else {
            std::string text;
            for (const auto& l : d.lines) text += l + "\n";
            emit(c, text, out);
        }
        if (!d.passed) throw CertificationError("demo " + c.example + " failed a check");
        return ok;
    }
    throw ParseError("unknown command '" + cmd + "'");
}

// Runs a configured command, mapping each error class to its exit code.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        return execute(c, out);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return parse;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return validation;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << "\n";
        return solver;
    } catch (const CertificationError& e) {
        err << "certification error: " << e.what() << "\n";
        return certification;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
}

inline int main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Model-free upper bounds for American claims from European call prices"};
    app.require_subcommand(1);
    RunConfig c;
    auto common = [&](CLI::App* s, bool payoff) {
        s->add_option("--input", c.input, "call surface (.json or .csv)");
        if (payoff) {
            s->add_option("--payoff", c.payoff, "payoff spec file or inline JSON");
            s->add_option("--variant", c.variant, "auto, bounded or extended");
        }
        s->add_option("--out", c.out, "output file (default stdout)");
        s->add_option("--format", c.format, "json, csv or pretty");
        s->add_option("--tol-gap", c.tol_gap, "relative duality-gap tolerance");
        s->add_option("--tol-feas", c.tol_feas, "feasibility tolerance");
        s->add_option("--seed", c.seed, "random seed");
        s->add_option("--trials", c.trials, "paths or verification trials");
        s->add_option("--steps", c.steps, "binomial tree steps");
    };
    auto* v = app.add_subcommand("validate", "check a call surface for static arbitrage");
    common(v, false);
    v->add_option("--mode", c.mode, "weak or strict");
    common(app.add_subcommand("bound", "solve the pricing and hedging programs"), true);
    common(app.add_subcommand("certify", "solve and verify both certificates"), true);
    common(app.add_subcommand("simulate", "Monte Carlo price of the extremal model"), true);
    auto* b = app.add_subcommand("bench-table", "Black-Scholes premium tables");
    common(b, false);
    b->add_option("--table", c.table, "fig3, fig4 or all");
    b->add_option("--max-maturities", c.max_maturities, "skip rows with more maturities");
    auto* d = app.add_subcommand("demo", "run a built-in example end to end");
    common(d, false);
    d->add_option("example", c.example, "sec26, sec52 or eg11")->required();
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return parse;
    }
    c.command = app.get_subcommands().front()->get_name();
    return run(c, out, err);
}

}  // namespace amerbound::cli
