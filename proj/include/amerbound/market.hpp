#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amerbound/common.hpp"

namespace amerbound {

// Strike 0 is the implicit state j = 0; prices(0, n) == s0.
struct CallSurface {
    double s0 = 0.0;
    std::vector<double> strikes;     // x_1 < ... < x_J
    std::vector<double> maturities;  // t_1 < ... < t_N
    Matrix prices;                   // (J+1) x N

    std::size_t J() const { return strikes.size(); }
    std::size_t N() const { return maturities.size(); }
    double state(std::size_t j) const { return j == 0 ? 0.0 : strikes[j - 1]; }
    std::vector<double> states() const {
        std::vector<double> x{0.0};
        x.insert(x.end(), strikes.begin(), strikes.end());
        return x;
    }
};

namespace detail {
inline void require_increasing_positive(const std::vector<double>& v, const char* what) {
    if (v.empty()) throw ValidationError(std::string(what) + " must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] <= 0.0)
            throw ValidationError(std::string(what) + " must be positive");
        if (i > 0 && v[i] <= v[i - 1]) throw ValidationError(std::string(what) + " not increasing");
    }
}
}  // namespace detail

// calls is J x N (strike 0 excluded) or (J+1) x N with row 0 equal to s0.
inline CallSurface make_surface(double s0, std::vector<double> strikes, std::vector<double> maturities,
                                const Matrix& calls) {
    if (!(s0 > 0.0) || !std::isfinite(s0)) throw ValidationError("s0 must be positive");
    detail::require_increasing_positive(strikes, "strikes");
    detail::require_increasing_positive(maturities, "maturities");
    const std::size_t J = strikes.size(), N = maturities.size();
    std::size_t offset;
    if (calls.rows() == J && calls.cols() == N)
        offset = 1;
    else if (calls.rows() == J + 1 && calls.cols() == N)
        offset = 0;
    else
        throw ValidationError("call matrix dimensions do not match the grids");
    CallSurface s{s0, std::move(strikes), std::move(maturities), Matrix(J + 1, N)};
    for (std::size_t n = 0; n < N; ++n) {
        s.prices(0, n) = s0;
        for (std::size_t r = 0; r < calls.rows(); ++r) {
            double c = calls(r, n);
            if (!std::isfinite(c) || c < 0.0) throw ValidationError("negative or non-finite call price");
            if (r + offset == 0) {
                if (std::abs(c - s0) > 1e-10 * (1.0 + s0)) throw ValidationError("zero-strike call differs from s0");
                continue;
            }
            s.prices(r + offset, n) = c;
        }
    }
    return s;
}

enum class Validity { weakly_valid, strictly_valid, invalid };
enum class ValidationMode { weak, strict };

struct Violation {
    std::string constraint;
    std::size_t j = 0;
    std::size_t n = 0;
    double magnitude = 0.0;
};

struct ValidationReport {
    Validity status = Validity::weakly_valid;
    std::vector<Violation> violations;
    bool zero_tail = false;
};

inline const char* to_string(Validity v) {
    switch (v) {
        case Validity::weakly_valid: return "weakly-valid";
        case Validity::strictly_valid: return "strictly-valid";
        case Validity::invalid: return "invalid";
    }
    return "unknown";
}

// Each check is "margin >= 0"; weak fails below -tol, strict needs margin > tol.
// Margins are in price units so a bump of one call by eps moves a margin by eps.
inline ValidationReport validate(const CallSurface& s, ValidationMode mode = ValidationMode::weak,
                                 double tol = 1e-10) {
    ValidationReport rep;
    std::vector<Violation> strict_fail;
    const std::size_t J = s.J(), N = s.N();
    auto check = [&](const char* id, std::size_t j, std::size_t n, double margin, bool strict_only_weak = false) {
        if (margin < -tol)
            rep.violations.push_back({id, j, n, -margin});
        else if (margin <= tol && !strict_only_weak)
            strict_fail.push_back({std::string("strict-") + id, j, n, tol - margin});
    };
    const auto x = s.states();
    for (std::size_t n = 0; n < N; ++n) {
        const auto c = s.prices.col(n);
        for (std::size_t j = 1; j <= J; ++j) {
            check("nonnegative", j, n, c[j], j < J);
            check("monotone-in-strike", j, n, c[j - 1] - c[j]);
        }
        // Slope of the first call spread is at most one: s0 - c_1 <= x_1.
        check("slope-bound", 1, n, x[1] - (c[0] - c[1]));
        for (std::size_t j = 1; j < J; ++j) {
            double w_left = (x[j + 1] - x[j]) / (x[j + 1] - x[j - 1]);
            double w_right = (x[j] - x[j - 1]) / (x[j + 1] - x[j - 1]);
            check("convexity", j, n, w_left * c[j - 1] + w_right * c[j + 1] - c[j]);
        }
        if (n + 1 < N)
            for (std::size_t j = 1; j <= J; ++j) check("calendar", j, n, s.prices(j, n + 1) - c[j]);
    }
    rep.zero_tail = s.prices(J, N - 1) <= tol;
    if (!rep.violations.empty())
        rep.status = Validity::invalid;
    else if (strict_fail.empty())
        rep.status = Validity::strictly_valid;
    else if (mode == ValidationMode::strict) {
        rep.status = Validity::invalid;
        rep.violations = std::move(strict_fail);
    } else
        rep.status = Validity::weakly_valid;
    return rep;
}

struct MarginalSystem {
    double s0 = 0.0;
    std::vector<double> states;  // x_0 = 0, x_1..x_J
    std::vector<double> maturities;
    Matrix p;                    // (J+1) x N

    std::size_t J() const { return states.size() - 1; }
    std::size_t N() const { return maturities.size(); }
};

// Rows 0..J as in MarginalSystem, row J+1 carries the tail call price c_{J,n}.
struct ExtendedMarginalSystem {
    double s0 = 0.0;
    std::vector<double> states;
    std::vector<double> maturities;
    Matrix p;  // (J+2) x N

    std::size_t J() const { return states.size() - 1; }
    std::size_t N() const { return maturities.size(); }
};

inline MarginalSystem implied_marginals(const CallSurface& s, double tol = 1e-10) {
    const std::size_t J = s.J(), N = s.N();
    const auto x = s.states();
    MarginalSystem m{s.s0, x, s.maturities, Matrix(J + 1, N)};
    for (std::size_t n = 0; n < N; ++n) {
        auto c = s.prices.col(n);
        std::vector<double> slope(J + 1);  // slope[j]: spread between j-1 and j
        for (std::size_t j = 1; j <= J; ++j) slope[j] = (c[j - 1] - c[j]) / (x[j] - x[j - 1]);
        for (std::size_t j = 0; j <= J; ++j) {
            double left = j == 0 ? 1.0 : slope[j];
            double right = j == J ? 0.0 : slope[j + 1];
            m.p(j, n) = left - right;
        }
        double sum = 0.0;
        for (std::size_t j = 0; j <= J; ++j) {
            if (m.p(j, n) < -tol) {
                std::ostringstream os;
                os << "inconsistent surface: negative probability " << m.p(j, n) << " at state " << j
                   << ", maturity " << n;
                throw ValidationError(os.str());
            }
            m.p(j, n) = std::max(m.p(j, n), 0.0);
            sum += m.p(j, n);
        }
        if (std::abs(sum - 1.0) > 1e-8) throw ValidationError("inconsistent surface: column does not sum to one");
        for (std::size_t j = 0; j <= J; ++j) m.p(j, n) /= sum;
    }
    return m;
}

inline ExtendedMarginalSystem extended_marginals(const CallSurface& s, double tol = 1e-10) {
    auto m = implied_marginals(s, tol);
    const std::size_t J = s.J(), N = s.N();
    ExtendedMarginalSystem e{m.s0, m.states, m.maturities, Matrix(J + 2, N)};
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t j = 0; j <= J; ++j) e.p(j, n) = m.p(j, n);
        e.p(J + 1, n) = s.prices(J, n);
    }
    return e;
}

// Static cost of the claim paying the extended linear interpolation of h
// (knots 0..J, slope tail_slope beyond x_J) at maturity n.
inline double price_piecewise_linear(const CallSurface& s, const std::vector<double>& h, double tail_slope,
                                     std::size_t n) {
    if (h.size() != s.J() + 1) throw std::invalid_argument("value vector must have J+1 entries");
    if (n >= s.N()) throw std::invalid_argument("maturity index out of range");
    auto m = implied_marginals(s);
    double v = tail_slope * s.prices(s.J(), n);
    for (std::size_t j = 0; j <= s.J(); ++j) v += h[j] * m.p(j, n);
    return v;
}

inline ValidationReport check_convex_order(const MarginalSystem& m, double tol = 1e-10) {
    ValidationReport rep;
    const std::size_t J = m.J(), N = m.N();
    auto call = [&](std::size_t n, double k) {
        double v = 0.0;
        for (std::size_t i = 0; i <= J; ++i) v += m.p(i, n) * std::max(m.states[i] - k, 0.0);
        return v;
    };
    for (std::size_t n = 0; n < N; ++n) {
        double sum = 0.0, mean = 0.0;
        for (std::size_t i = 0; i <= J; ++i) {
            if (m.p(i, n) < -tol) rep.violations.push_back({"nonnegative", i, n, -m.p(i, n)});
            sum += m.p(i, n);
            mean += m.p(i, n) * m.states[i];
        }
        if (std::abs(sum - 1.0) > tol) rep.violations.push_back({"total-mass", 0, n, std::abs(sum - 1.0)});
        if (std::abs(mean - m.s0) > tol * (1.0 + m.s0))
            rep.violations.push_back({"mean", 0, n, std::abs(mean - m.s0)});
        if (n + 1 < N)
            for (std::size_t j = 0; j <= J; ++j) {
                double d = call(n + 1, m.states[j]) - call(n, m.states[j]);
                if (d < -tol) rep.violations.push_back({"convex-order", j, n, -d});
            }
    }
    rep.zero_tail = true;
    rep.status = rep.violations.empty() ? Validity::weakly_valid : Validity::invalid;
    return rep;
}

// Prices calls off given node probabilities; states[0] must be 0.
inline CallSurface surface_from_marginals(const std::vector<double>& states, const std::vector<double>& maturities,
                                          const Matrix& p) {
    if (states.size() < 2 || states[0] != 0.0) throw ValidationError("state grid must start at 0");
    if (p.rows() != states.size() || p.cols() != maturities.size())
        throw ValidationError("marginal matrix dimensions do not match the grids");
    MarginalSystem m{0.0, states, maturities, p};
    for (std::size_t i = 0; i < states.size(); ++i) m.s0 += p(i, 0) * states[i];
    auto rep = check_convex_order(m);
    if (rep.status == Validity::invalid)
        throw ValidationError("marginals are not probability vectors in convex order with a common mean");
    std::vector<double> strikes(states.begin() + 1, states.end());
    Matrix calls(strikes.size(), maturities.size());
    for (std::size_t n = 0; n < maturities.size(); ++n)
        for (std::size_t j = 0; j < strikes.size(); ++j) {
            double v = 0.0;
            for (std::size_t i = 0; i < states.size(); ++i) v += p(i, n) * std::max(states[i] - strikes[j], 0.0);
            calls(j, n) = v;
        }
    return make_surface(m.s0, strikes, maturities, calls);
}

namespace detail {
inline std::vector<double> number_array(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_array()) throw ParseError(std::string("missing array field '") + key + "'");
    std::vector<double> out;
    for (const auto& v : doc[key]) {
        if (!v.is_number()) throw ParseError(std::string("non-numeric entry in '") + key + "'");
        out.push_back(v.get<double>());
    }
    return out;
}

inline Matrix number_matrix(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_array()) throw ParseError(std::string("missing matrix field '") + key + "'");
    std::vector<std::vector<double>> rows;
    for (const auto& r : doc[key]) {
        if (!r.is_array()) throw ParseError(std::string("matrix '") + key + "' must be an array of arrays");
        std::vector<double> row;
        for (const auto& v : r) {
            if (!v.is_number()) throw ParseError(std::string("non-numeric entry in '") + key + "'");
            row.push_back(v.get<double>());
        }
        rows.push_back(std::move(row));
    }
    try {
        return Matrix::from_nested(rows);
    } catch (const std::invalid_argument&) {
        throw ParseError(std::string("matrix '") + key + "' is ragged");
    }
}
}  // namespace detail

inline CallSurface load_surface(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ParseError("surface document must be a JSON object");
    if (doc.contains("marginals")) {
        Matrix p = detail::number_matrix(doc, "marginals");
        std::vector<double> states;
        if (doc.contains("states")) {
            states = detail::number_array(doc, "states");
        } else {
            states = {0.0};
            auto k = detail::number_array(doc, "strikes");
            states.insert(states.end(), k.begin(), k.end());
        }
        std::vector<double> mat;
        if (doc.contains("maturities")) {
            mat = detail::number_array(doc, "maturities");
        } else {
            for (std::size_t n = 0; n < p.cols(); ++n) mat.push_back(static_cast<double>(n + 1));
        }
        auto s = surface_from_marginals(states, mat, p);
        if (doc.contains("s0")) {
            if (!doc["s0"].is_number()) throw ParseError("'s0' must be a number");
            double s0 = doc["s0"].get<double>();
            if (std::abs(s0 - s.s0) > 1e-8 * (1.0 + s0)) throw ValidationError("s0 differs from the marginal mean");
        }
        return s;
    }
    if (!doc.contains("s0") || !doc["s0"].is_number()) throw ParseError("missing numeric field 's0'");
    return make_surface(doc["s0"].get<double>(), detail::number_array(doc, "strikes"),
                        detail::number_array(doc, "maturities"), detail::number_matrix(doc, "calls"));
}

inline CallSurface load_surface_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    return load_surface(doc);
}

// CSV: header "strike,t_1,...,t_N", then one row per strike.  s0 comes from a
// strike-0 row or from a leading "s0,<value>" line.
inline CallSurface load_surface_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string>> cells;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        cells.push_back(std::move(row));
    }
    auto num = [](const std::string& s, std::size_t line_no) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size() && s.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
        }
    };
    std::size_t r = 0;
    double s0 = -1.0;
    if (!cells.empty() && !cells[0].empty() && cells[0][0] == "s0") {
        if (cells[0].size() < 2) throw ParseError("line 1: s0 value missing");
        s0 = num(cells[0][1], 1);
        ++r;
    }
    if (r >= cells.size()) throw ParseError("CSV has no header row");
    std::vector<double> mat;
    for (std::size_t c = 1; c < cells[r].size(); ++c) mat.push_back(num(cells[r][c], r + 1));
    ++r;
    std::vector<double> strikes;
    std::vector<std::vector<double>> calls;
    for (; r < cells.size(); ++r) {
        if (cells[r].size() != mat.size() + 1)
            throw ParseError("line " + std::to_string(r + 1) + ": expected " + std::to_string(mat.size() + 1) + " cells");
        double k = num(cells[r][0], r + 1);
        std::vector<double> row;
        for (std::size_t c = 1; c < cells[r].size(); ++c) row.push_back(num(cells[r][c], r + 1));
        if (k == 0.0) {
            s0 = row.empty() ? s0 : row[0];
            continue;
        }
        strikes.push_back(k);
        calls.push_back(std::move(row));
    }
    if (s0 < 0.0) throw ParseError("CSV lacks s0 (strike-0 row or s0 line)");
    return make_surface(s0, strikes, mat, Matrix::from_nested(calls));
}

}  // namespace amerbound
