#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amerbound/bench.hpp"
#include "amerbound/bound.hpp"
#include "amerbound/market.hpp"
#include "amerbound/model.hpp"
#include "amerbound/verify.hpp"

// Deterministic serialization: keys sorted (nlohmann::json uses std::map),
// numbers rounded to 12 significant digits, non-finite numbers as null.
namespace amerbound::report {

using json = nlohmann::json;

inline json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r;  // drop negative zero
}

inline json vec(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

inline json mat(const Matrix& m, std::size_t rows) {
    json a = json::array();
    for (std::size_t i = 0; i < rows; ++i) {
        json r = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(num(m(i, j)));
        a.push_back(std::move(r));
    }
    return a;
}
inline json mat(const Matrix& m) { return mat(m, m.rows()); }

inline json to_json(const ValidationReport& r) {
    json v = json::array();
    for (const auto& x : r.violations)
        v.push_back({{"constraint", x.constraint}, {"j", x.j}, {"n", x.n}, {"magnitude", num(x.magnitude)}});
    return {{"status", to_string(r.status)}, {"violations", v}, {"zero_tail", r.zero_tail}};
}

inline json to_json(const ModelReport& r) {
    return {{"marginal_residual", num(r.marginal_residual)}, {"martingale_residual", num(r.martingale_residual)},
            {"q_min", num(r.q_min)}, {"q_max", num(r.q_max)}, {"q_mass_residual", num(r.q_mass_residual)}, {"fg_residual", num(r.fg_residual)},
            {"absorbing_residual", num(r.absorbing_residual)}, {"ok", r.ok}};
}

inline json to_json(const RegimeModel& m) {
    json g1 = json::array(), g2 = json::array();
    for (const auto& g : m.G1) g1.push_back(mat(g));
    for (const auto& g : m.G2) g2.push_back(mat(g));
    return {{"states", vec(m.states)}, {"maturities", vec(m.maturities)}, {"F", mat(m.F)}, {"G1", g1}, {"G2", g2},
            {"q", mat(m.q)}};
}

inline json to_json(const HedgeStrategy& h) {
    const std::size_t L = h.J() + 1;
    json tail;
    if (h.has_tail_row()) {
        std::vector<double> e1(h.N()), e2(h.N()), v(h.N()), r1(h.N() > 0 ? h.N() - 1 : 0), r2(r1.size());
        for (std::size_t n = 0; n < h.N(); ++n) {
            e1[n] = h.E1(L, n);
            e2[n] = h.E2(L, n);
            v[n] = h.V(L, n);
        }
        for (std::size_t n = 0; n < r1.size(); ++n) {
            r1[n] = tail_hedge_ratio(h, n, 1);
            r2[n] = tail_hedge_ratio(h, n, 2);
        }
        tail = {{"E1", vec(e1)}, {"E2", vec(e2)}, {"V", vec(v)}, {"ratio1", vec(r1)}, {"ratio2", vec(r2)}};
    } else {
        tail = {{"beta", vec(h.beta)}, {"R", num(h.R)}};
    }
    return {{"states", vec(h.states)}, {"maturities", vec(h.maturities)}, {"E1", mat(h.E1, L)},
            {"E2", mat(h.E2, L)}, {"D1", mat(h.D1)}, {"D2", mat(h.D2)}, {"V", mat(h.V, L)}, {"tail", tail}};
}

inline json to_json(const BoundDiagnostics& d) {
    return {{"primal_iterations", d.primal_iterations}, {"dual_iterations", d.dual_iterations},
            {"primal_residual", num(d.primal_residual)}, {"dual_residual", num(d.dual_residual)},
            {"primal_columns", d.primal_columns}, {"primal_rows", d.primal_rows},
            {"dual_columns", d.dual_columns}, {"dual_rows", d.dual_rows}};
}

// Timing is left out so that repeated runs serialize identically.
inline json to_json(const BoundResult& r) {
    return {{"variant", to_string(r.variant)}, {"phi", num(r.phi)}, {"psi", num(r.psi)}, {"gap", num(r.gap)},
            {"model", to_json(r.model)}, {"hedge", to_json(r.hedge)}, {"diagnostics", to_json(r.diagnostics)}};
}

inline json to_json(const VerificationReport& r, bool with_time = false) {
    json j = {{"mode", to_string(r.mode)},
              {"trials", r.trials},
              {"min_slack", num(r.min_slack)},
              {"path_slack", num(r.path_slack)},
              {"certificate_slack", num(r.certificate_slack)},
              {"worst_path", vec(r.worst_path)},
              {"worst_exercise", r.worst_continuous ? json{{"time", num(r.worst_exercise)},
                                                           {"price", num(r.worst_exercise_value)}}
                                                     : json{{"maturity_index", static_cast<std::size_t>(r.worst_exercise)}}}};
    if (r.worst_path.empty()) j["worst_exercise"] = nullptr;
    if (!r.skipped.empty()) j["skipped"] = r.skipped;
    if (with_time) j["elapsed"] = num(r.elapsed);
    return j;
}

inline json to_json(const McEstimate& m) {
    return {{"estimate", num(m.estimate)}, {"stderr", num(m.stderr_)}, {"paths", m.paths}};
}

inline json to_json(const bench::PremiumRow& r) {
    return {{"maturities", r.N},       {"lowest", num(r.strike_lo)}, {"highest", num(r.strike_hi)},
            {"interval", num(r.interval)}, {"strike", num(r.K)},  {"phi", num(r.phi)},
            {"chi", num(r.chi)},       {"zeta", num(r.zeta)},        {"premium_pct", num(r.ratio)},
            {"chi_unlinearized", num(r.chi_exact)}, {"gap", num(r.gap)}};
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace detail {
inline void write(std::ostringstream& os, const json& j, int depth) {
    const std::string pad(2 * static_cast<std::size_t>(depth + 1), ' '), end(2 * static_cast<std::size_t>(depth), ' ');
    if (j.is_object() || j.is_array()) {
        const bool obj = j.is_object();
        if (j.empty()) {
            os << (obj ? "{}" : "[]");
            return;
        }
        os << (obj ? "{\n" : "[\n");
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            os << pad;
            if (obj) os << json(it.key()).dump() << ": ";
            write(os, *it, depth + 1);
        }
        os << "\n" << end << (obj ? "}" : "]");
    } else if (j.is_number_float()) {
        double v = j.get<double>();
        if (!std::isfinite(v)) {
            os << "null";
        } else {
            std::string t = fmt(v);
            if (t.find_first_of(".e") == std::string::npos) t += ".0";
            os << t;
        }
    } else {
        os << j.dump();
    }
}
}  // namespace detail

// Pretty-printed JSON with 12 significant digits per floating-point number.
inline std::string dump(const json& j) {
    std::ostringstream os;
    detail::write(os, j, 0);
    os << "\n";
    return os.str();
}

// Columns of the maturity sweep table followed by the put strike and the
// unlinearized model price.
inline std::string premium_csv(const std::vector<bench::PremiumRow>& rows) {
    std::ostringstream os;
    os << "maturities,lowest,highest,interval,strike,phi,chi,zeta,premium_pct,chi_unlinearized\n";
    for (const auto& r : rows)
        os << r.N << ',' << fmt(r.strike_lo) << ',' << fmt(r.strike_hi) << ','
           << (r.strike_count > 1 ? fmt(r.interval) : "-") << ',' << fmt(r.K) << ',' << fmt(r.phi) << ','
           << fmt(r.chi) << ',' << fmt(r.zeta) << ',' << fmt(r.ratio) << ',' << fmt(r.chi_exact) << '\n';
    return os.str();
}

}  // namespace amerbound::report
