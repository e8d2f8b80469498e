#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "amerbound/common.hpp"
#include "amerbound/index.hpp"
#include "amerbound/market.hpp"
#include "amerbound/payoff.hpp"

namespace amerbound {

enum class HedgeMode { lattice, interval, full_line };

// Semi-static hedge (E1, E2, D1, D2, V).  Rows 0..J are lattice states; the
// extended variant adds row J+1 holding tail slopes of E1, E2 and V.
// Boundary entries e1(., N-1) and e2(., 0) stay zero.
struct HedgeStrategy {
    Variant variant = Variant::bounded;
    std::vector<double> states;  // x_0..x_J
    std::vector<double> maturities;
    Matrix E1, E2, V;            // S x N
    Matrix D1, D2;               // (J+1) x (N-1)
    std::vector<double> beta;    // tail calls at x_J per maturity (bounded variant)
    double R = 0.0;              // global payoff slope bound
    HedgeMode mode = HedgeMode::full_line;

    std::size_t J() const { return states.size() - 1; }
    std::size_t N() const { return maturities.size(); }
    bool has_tail_row() const { return variant == Variant::extended; }
};

inline HedgeStrategy empty_hedge(Variant variant, const std::vector<double>& states,
                                 const std::vector<double>& maturities) {
    HedgeStrategy h;
    h.variant = variant;
    h.states = states;
    h.maturities = maturities;
    const std::size_t S = states.size() + (variant == Variant::extended ? 1 : 0), N = maturities.size();
    h.E1 = h.E2 = h.V = Matrix(S, N);
    h.D1 = h.D2 = Matrix(states.size(), N > 0 ? N - 1 : 0);
    h.beta.assign(N, 0.0);
    return h;
}

inline HedgeStrategy hedge_from_vector(const std::vector<double>& x, const VariableIndex& idx,
                                       const std::vector<double>& states, const std::vector<double>& maturities) {
    using K = VarKey::Kind;
    HedgeStrategy h = empty_hedge(idx.variant(), states, maturities);
    for (std::size_t c = 0; c < idx.size(); ++c) {
        const auto& key = idx.key(c);
        switch (key.kind) {
            case K::e1: h.E1(key.j, key.n) = x[c]; break;
            case K::e2: h.E2(key.j, key.n) = x[c]; break;
            case K::d1: h.D1(key.j, key.n) = x[c]; break;
            case K::d2: h.D2(key.j, key.n) = x[c]; break;
            case K::v: h.V(key.j, key.n) = std::max(x[c], 0.0); break;
            default: break;
        }
    }
    return h;
}

inline std::vector<double> hedge_to_vector(const HedgeStrategy& h, const VariableIndex& idx) {
    using K = VarKey::Kind;
    std::vector<double> x(idx.size(), 0.0);
    for (std::size_t c = 0; c < idx.size(); ++c) {
        const auto& key = idx.key(c);
        switch (key.kind) {
            case K::e1: x[c] = h.E1(key.j, key.n); break;
            case K::e2: x[c] = h.E2(key.j, key.n); break;
            case K::d1: x[c] = h.D1(key.j, key.n); break;
            case K::d2: x[c] = h.D2(key.j, key.n); break;
            case K::v: x[c] = h.V(key.j, key.n); break;
            default: break;
        }
    }
    return x;
}

// Static cost: sum (e1 + e2) p-hat + sum v_N p-hat_N over every row of the hedge.
inline double hedge_cost(const HedgeStrategy& h, const Matrix& p) {
    const std::size_t N = h.N();
    double c = 0.0;
    for (std::size_t j = 0; j < h.E1.rows(); ++j) {
        for (std::size_t n = 0; n < N; ++n) {
            if (n + 1 < N) c += h.E1(j, n) * p(j, n);
            if (n > 0) c += h.E2(j, n) * p(j, n);
        }
        c += h.V(j, N - 1) * p(j, N - 1);
    }
    return c;
}

// Linear interpolation over the knots; beyond x_J continue with tail_slope
// (extended) or fail (plain).
inline double linear_interp(const std::vector<double>& x, const std::vector<double>& h, double s,
                            std::optional<double> tail_slope = std::nullopt) {
    if (x.size() != h.size() || x.empty()) throw std::invalid_argument("knot/value size mismatch");
    const std::size_t J = x.size() - 1;
    if (s < 0.0) throw std::domain_error("interpolation point below zero");
    if (s >= x[J]) {
        if (s > x[J] && !tail_slope) throw std::domain_error("interpolation point beyond the last knot");
        return h[J] + (tail_slope ? *tail_slope : 0.0) * (s - x[J]);
    }
    std::size_t j = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), s) - x.begin()) - 1;
    double w = (s - x[j]) / (x[j + 1] - x[j]);
    return (1.0 - w) * h[j] + w * h[j + 1];
}

// Three-case hedge-ratio interpolation on [0, x_J]; u is the slope of the
// companion row (e1 for regime 1, e1 - v for regime 2) on each interval.
inline double mixed_interp(const std::vector<double>& x, const std::vector<double>& d,
                           const std::vector<double>& companion, double s) {
    const std::size_t J = x.size() - 1;
    if (s < 0.0 || s > x[J]) throw std::domain_error("mixed interpolation outside [0, x_J]");
    auto it = std::lower_bound(x.begin(), x.end(), s);
    if (it != x.end() && *it == s) return d[static_cast<std::size_t>(it - x.begin())];
    std::size_t j = static_cast<std::size_t>(it - x.begin()) - 1;
    double u = (companion[j + 1] - companion[j]) / (x[j + 1] - x[j]);
    if (d[j] <= u) return d[j];
    if (d[j + 1] >= u) return d[j + 1];
    return u;
}

namespace detail {
inline std::vector<double> column(const Matrix& m, std::size_t n, std::size_t rows) {
    std::vector<double> out(rows);
    for (std::size_t j = 0; j < rows; ++j) out[j] = m(j, n);
    return out;
}
}  // namespace detail

// Constant ratio above x_J for the extended variant.
inline double tail_hedge_ratio(const HedgeStrategy& h, std::size_t n, int delta) {
    if (!h.has_tail_row()) throw std::logic_error("tail hedge ratio needs an extended-variant hedge");
    const std::size_t J = h.J(), T = J + 1;
    if (delta == 1) return std::min(h.D1(J, n), h.E1(T, n));
    return std::min(h.D2(J, n), h.E1(T, n) - h.V(T, n));
}

// Hedge ratio of regime delta held over transition n at price s.
inline double hedge_ratio(const HedgeStrategy& h, std::size_t n, int delta, double s) {
    const std::size_t J = h.J();
    const Matrix& D = delta == 1 ? h.D1 : h.D2;
    if (s > h.states[J]) {
        if (h.mode != HedgeMode::full_line) throw std::domain_error("path leaves the hedge's interval");
        return h.has_tail_row() ? tail_hedge_ratio(h, n, delta) : D(J, n);
    }
    auto d = detail::column(D, n, J + 1);
    if (h.mode == HedgeMode::lattice) {
        auto it = std::lower_bound(h.states.begin(), h.states.end(), s);
        if (it == h.states.end() || *it != s) throw std::domain_error("path leaves the lattice");
        return d[static_cast<std::size_t>(it - h.states.begin())];
    }
    auto comp = detail::column(h.E1, n, J + 1);
    if (delta == 2)
        for (std::size_t j = 0; j <= J; ++j) comp[j] -= h.V(j, n);
    return mixed_interp(h.states, d, comp, s);
}

// Tail calls at x_J that make a bounded-variant hedge super-replicate above x_J:
// beta_n >= (max of the ratios held from t_n at x_J, with R added after exercise)^+
//         + (min of the ratios held into t_n anywhere)^-.
inline std::vector<double> tail_calls(const HedgeStrategy& h, double R) {
    const std::size_t J = h.J(), N = h.N();
    std::vector<double> beta(N, 0.0);
    for (std::size_t n = 0; n < N; ++n) {
        if (n + 1 < N) beta[n] += std::max({h.D1(J, n), h.D2(J, n) + R, 0.0});
        if (n > 0) {
            double lo1 = h.D1(0, n - 1), lo2 = h.D2(0, n - 1);
            for (std::size_t j = 0; j <= J; ++j) {
                lo1 = std::min(lo1, h.D1(j, n - 1));
                lo2 = std::min(lo2, h.D2(j, n - 1));
            }
            beta[n] += std::max(-std::min(lo1, lo2 + R), 0.0);
        }
    }
    return beta;
}

// Path at t_1..t_N with either a maturity exercise index or a continuous
// exercise time rho and the price at rho.
struct PricePath {
    std::vector<double> values;
    bool continuous = false;
    std::size_t exercise_index = 0;
    double exercise_time = 0.0;
    double exercise_value = 0.0;
};

// Terminal value of the hedge.  For a continuous exercise time the short
// position of a'_+(X_rho) units from rho to the next maturity is included;
// A is the continuous-exercise payoff whose lattice version the hedge was built on.
inline double gains(const HedgeStrategy& h, const PricePath& path, const PayoffFunction* A = nullptr) {
    const std::size_t J = h.J(), N = h.N();
    if (path.values.size() != N) throw std::invalid_argument("path length differs from maturity count");
    const auto& x = h.states;
    const bool ext = h.has_tail_row();
    const std::size_t T = J + 1;

    std::size_t switch_at;  // first maturity whose transition uses regime 2
    if (!path.continuous) {
        switch_at = path.exercise_index;
    } else {
        auto it = std::lower_bound(h.maturities.begin(), h.maturities.end(), path.exercise_time);
        switch_at = static_cast<std::size_t>(it - h.maturities.begin());
        if (switch_at >= N) throw std::invalid_argument("exercise time beyond the last maturity");
    }

    auto leg = [&](const Matrix& M, std::size_t n, double s, double tail) {
        if (s > x[J] && h.mode != HedgeMode::full_line) throw std::domain_error("path leaves the hedge's interval");
        return linear_interp(x, detail::column(M, n, J + 1), s, tail);
    };
    double g = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        double s = path.values[n];
        if (n + 1 < N) g += leg(h.E1, n, s, ext ? h.E1(T, n) : 0.0);
        if (n > 0) g += leg(h.E2, n, s, ext ? h.E2(T, n) : 0.0);
        if (!ext && n < h.beta.size()) g += h.beta[n] * std::max(s - x[J], 0.0);
    }
    g += leg(h.V, N - 1, path.values[N - 1], ext ? h.V(T, N - 1) : h.R);
    for (std::size_t n = 0; n + 1 < N; ++n) {
        int delta = n < switch_at ? 1 : 2;
        g += hedge_ratio(h, n, delta, path.values[n]) * (path.values[n + 1] - path.values[n]);
    }
    if (path.continuous && path.exercise_time != h.maturities[switch_at]) {
        if (!A) throw std::invalid_argument("continuous exercise needs the payoff function");
        double t_prev = switch_at == 0 ? 0.0 : h.maturities[switch_at - 1];
        g -= A->slope(path.exercise_value, t_prev) * (path.values[switch_at] - path.exercise_value);
    }
    return g;
}

}  // namespace amerbound
