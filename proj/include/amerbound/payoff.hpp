#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "amerbound/common.hpp"

namespace amerbound {

// Payoff values on the lattice, one column per maturity.
struct AmericanPayoffGrid {
    Matrix values;                    // a_{j,n}, (J+1) x N
    std::vector<double> tail_slopes;  // R_n = lim a(x,t_n)/x
    double R = 0.0;                   // global slope bound
    std::size_t clamped = 0;          // negative inputs set to 0

    std::size_t rows() const { return values.rows(); }
    std::size_t N() const { return values.cols(); }
};

inline AmericanPayoffGrid make_payoff_grid(Matrix values, std::vector<double> tail_slopes) {
    if (tail_slopes.empty()) tail_slopes.assign(values.cols(), 0.0);
    if (tail_slopes.size() != values.cols()) throw std::invalid_argument("one tail slope per maturity expected");
    AmericanPayoffGrid g{std::move(values), std::move(tail_slopes), 0.0, 0};
    for (std::size_t j = 0; j < g.values.rows(); ++j)
        for (std::size_t n = 0; n < g.values.cols(); ++n) {
            double& v = g.values(j, n);
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite payoff value");
            if (v < 0.0) {
                v = 0.0;
                ++g.clamped;
            }
        }
    for (double r : g.tail_slopes) {
        if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("tail slopes must be finite and nonnegative");
        g.R = std::max(g.R, r);
    }
    return g;
}

struct SampleDomain {
    double x_max = 300.0;
    double t_max = 2.0;
};

// Black-box payoff a(x, t) with declared shape properties.
struct PayoffFunction {
    std::function<double(double, double)> eval;
    std::function<double(double, double)> right_slope;  // d+/dx
    std::function<double(double)> tail_slope;            // lim a(x,t)/x
    bool convex_in_x = false;
    bool decreasing_in_t = false;

    double operator()(double x, double t) const { return std::max(eval(x, t), 0.0); }
    double slope(double x, double t) const {
        if (right_slope) return right_slope(x, t);
        double h = 1e-7 * (1.0 + std::abs(x));
        return ((*this)(x + h, t) - (*this)(x, t)) / h;
    }
};

// Verifies the declared flags with 1000 random secant and monotonicity tests.
inline PayoffFunction make_payoff(std::function<double(double, double)> eval,
                                  std::function<double(double, double)> right_slope,
                                  std::function<double(double)> tail_slope, bool convex, bool decreasing,
                                  SampleDomain dom = {}) {
    PayoffFunction f{std::move(eval), std::move(right_slope), std::move(tail_slope), convex, decreasing};
    if (!f.tail_slope) f.tail_slope = [](double) { return 0.0; };
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> ux(0.0, dom.x_max), ut(0.0, dom.t_max), ul(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double t = ut(rng);
        if (convex) {
            double x = ux(rng), y = ux(rng), l = ul(rng);
            double mid = f(l * x + (1 - l) * y, t), chord = l * f(x, t) + (1 - l) * f(y, t);
            if (mid > chord + 1e-12 * (1.0 + std::abs(chord)))
                throw std::invalid_argument("payoff declared convex in x fails a secant test");
        }
        if (decreasing) {
            double x = ux(rng), s = ut(rng);
            double lo = std::min(s, t), hi = std::max(s, t);
            if (f(x, hi) > f(x, lo) + 1e-12 * (1.0 + std::abs(f(x, lo))))
                throw std::invalid_argument("payoff declared decreasing in t fails a monotonicity test");
        }
    }
    return f;
}

// (K e^{-rt} - x)^+
inline PayoffFunction discounted_put(double K, double r) {
    if (!(K > 0.0) || r < 0.0) throw std::invalid_argument("put needs K > 0 and r >= 0");
    return make_payoff([K, r](double x, double t) { return std::max(K * std::exp(-r * t) - x, 0.0); },
                       [K, r](double x, double t) { return x < K * std::exp(-r * t) ? -1.0 : 0.0; },
                       [](double) { return 0.0; }, true, true, SampleDomain{3.0 * K, 2.0});
}

inline std::vector<double> with_zero_state(const std::vector<double>& strikes) {
    std::vector<double> x{0.0};
    x.insert(x.end(), strikes.begin(), strikes.end());
    return x;
}

inline AmericanPayoffGrid grid_payoff(const PayoffFunction& f, const std::vector<double>& strikes,
                                      const std::vector<double>& maturities) {
    const auto x = with_zero_state(strikes);
    Matrix a(x.size(), maturities.size());
    std::vector<double> tails(maturities.size());
    for (std::size_t n = 0; n < maturities.size(); ++n) {
        for (std::size_t j = 0; j < x.size(); ++j) a(j, n) = f.eval(x[j], maturities[n]);
        tails[n] = f.tail_slope(maturities[n]);
    }
    return make_payoff_grid(std::move(a), std::move(tails));
}

// Piecewise linear in x over {0, strikes}, piecewise constant in t on
// [t_n, t_{n+1}) with t_0 = 0.  Beyond x_J the last segment's slope
// continues, capped by f's tail slope and floored at a zero payoff.
inline PayoffFunction linearize(const PayoffFunction& f, const std::vector<double>& strikes,
                                const std::vector<double>& maturities) {
    auto x = with_zero_state(strikes);
    std::vector<double> times{0.0};
    times.insert(times.end(), maturities.begin(), maturities.end());
    Matrix knots(x.size(), times.size());
    std::vector<double> tail(times.size());
    for (std::size_t n = 0; n < times.size(); ++n) {
        for (std::size_t j = 0; j < x.size(); ++j) knots(j, n) = f(x[j], times[n]);
        double last = x.size() > 1 ? (knots(x.size() - 1, n) - knots(x.size() - 2, n)) / (x.back() - x[x.size() - 2])
                                   : 0.0;
        tail[n] = std::min(last, f.tail_slope(times[n]));
    }
    auto column = [times](double t) {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        return it == times.begin() ? std::size_t{0} : static_cast<std::size_t>(it - times.begin() - 1);
    };
    auto value = [x, knots, tail, column](double s, double t) {
        std::size_t n = column(t);
        const std::size_t J = x.size() - 1;
        if (s >= x[J]) return std::max(knots(J, n) + tail[n] * (s - x[J]), 0.0);
        std::size_t j = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), s) - x.begin()) - 1;
        double w = (s - x[j]) / (x[j + 1] - x[j]);
        return (1.0 - w) * knots(j, n) + w * knots(j + 1, n);
    };
    auto slope = [x, knots, tail, column, value](double s, double t) {
        std::size_t n = column(t);
        const std::size_t J = x.size() - 1;
        if (s >= x[J]) return value(s, t) > 0.0 || tail[n] > 0.0 ? tail[n] : 0.0;
        std::size_t j = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), s) - x.begin()) - 1;
        return (knots(j + 1, n) - knots(j, n)) / (x[j + 1] - x[j]);
    };
    auto tails = [tail, column](double t) { return std::max(tail[column(t)], 0.0); };
    return make_payoff(value, slope, tails, f.convex_in_x, f.decreasing_in_t,
                       SampleDomain{2.0 * x.back(), maturities.empty() ? 1.0 : 1.5 * maturities.back()});
}

// Lattice payoff for continuous exercise: a(x_j, t_k) = A(x_j, t_{k-1}) with t_0 = 0.
inline AmericanPayoffGrid exercise_time_transform(const PayoffFunction& A, const std::vector<double>& strikes,
                                                  const std::vector<double>& maturities) {
    if (!A.decreasing_in_t) throw std::invalid_argument("exercise-time transform needs a payoff decreasing in t");
    const auto x = with_zero_state(strikes);
    Matrix a(x.size(), maturities.size());
    std::vector<double> tails(maturities.size());
    for (std::size_t k = 0; k < maturities.size(); ++k) {
        double prev = k == 0 ? 0.0 : maturities[k - 1];
        for (std::size_t j = 0; j < x.size(); ++j) a(j, k) = A.eval(x[j], prev);
        tails[k] = A.tail_slope(prev);
    }
    return make_payoff_grid(std::move(a), std::move(tails));
}

}  // namespace amerbound
