#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "amerbound/bound.hpp"
#include "amerbound/market.hpp"
#include "amerbound/payoff.hpp"
#include "amerbound/rng.hpp"

namespace amerbound::bench {

struct BenchConfig {
    double s0 = 100.0;
    double vol = 0.2;
    double rate = 0.05;
    std::vector<double> strikes{70, 80, 90, 100, 110, 120, 130, 140};
    std::size_t N = 4;  // maturities T/N, 2T/N, ..., T
    double T = 1.0;
    double K = 100.0;   // put strike
    std::size_t steps = 2000;

    std::vector<double> maturities() const {
        std::vector<double> t(N);
        for (std::size_t n = 0; n < N; ++n) t[n] = T * static_cast<double>(n + 1) / static_cast<double>(N);
        return t;
    }
    void check() const {
        if (!(vol > 0.0) || N < 1 || steps < 100 || !(s0 > 0.0) || strikes.empty())
            throw std::invalid_argument("bench config needs vol > 0, N >= 1, steps >= 100 and a strike");
    }
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Undiscounted Black call on a driftless lognormal forward.
inline double black_call(double forward, double strike, double vol, double t) {
    if (strike <= 0.0) return forward;
    double sd = vol * std::sqrt(t);
    double d1 = (std::log(forward / strike) + 0.5 * sd * sd) / sd;
    return forward * normal_cdf(d1) - strike * normal_cdf(d1 - sd);
}

inline CallSurface bs_surface(const BenchConfig& c) {
    c.check();
    auto mat = c.maturities();
    Matrix calls(c.strikes.size(), c.N);
    for (std::size_t j = 0; j < c.strikes.size(); ++j)
        for (std::size_t n = 0; n < c.N; ++n) calls(j, n) = black_call(c.s0, c.strikes[j], c.vol, mat[n]);
    return make_surface(c.s0, c.strikes, mat, calls);
}

// CRR tree on the discounted price, exercise at every node up to T.
inline double chi_binomial(const PayoffFunction& f, const BenchConfig& c, bool american = true) {
    c.check();
    const std::size_t M = c.steps;
    const double dt = c.T / static_cast<double>(M), u = std::exp(c.vol * std::sqrt(dt)), d = 1.0 / u;
    const double pu = (1.0 - d) / (u - d);
    std::vector<double> v(M + 1);
    for (std::size_t i = 0; i <= M; ++i)
        v[i] = f(c.s0 * std::pow(u, static_cast<double>(i)) * std::pow(d, static_cast<double>(M - i)), c.T);
    for (std::size_t m = M; m-- > 0;) {
        const double t = dt * static_cast<double>(m);
        for (std::size_t i = 0; i <= m; ++i) {
            double cont = pu * v[i + 1] + (1.0 - pu) * v[i];
            v[i] = american ? std::max(cont, f(c.s0 * std::pow(u, static_cast<double>(i)) *
                                                   std::pow(d, static_cast<double>(m - i)), t))
                            : cont;
        }
    }
    return v[0];
}

// Best static European value over the grid maturities of a lattice payoff.
inline double zeta(const CallSurface& s, const AmericanPayoffGrid& a) {
    double best = 0.0;
    std::vector<double> col(s.J() + 1);
    for (std::size_t n = 0; n < s.N(); ++n) {
        for (std::size_t j = 0; j <= s.J(); ++j) col[j] = a.values(j, n);
        best = std::max(best, price_piecewise_linear(s, col, a.tail_slopes[n], n));
    }
    return best;
}

struct PremiumRow {
    std::size_t N = 0;
    double strike_lo = 0.0, strike_hi = 0.0;
    std::size_t strike_count = 0;
    double interval = 0.0;  // strike spacing, 0 for a single strike
    double K = 0.0;
    double phi = 0.0;
    double chi = 0.0;
    double zeta = 0.0;
    double ratio = 0.0;  // percent
    double chi_exact = 0.0;  // model price of the unlinearized put
    double gap = 0.0;
    double seconds = 0.0;
};

// The put, its linearization on the grid and the lattice claim whose bound
// equals the continuous-exercise bound of the linearized put.
struct BenchPayoffs {
    PayoffFunction put, linear;
    AmericanPayoffGrid grid;
};

inline BenchPayoffs bench_payoffs(const BenchConfig& c) {
    BenchPayoffs p{discounted_put(c.K, c.rate), {}, {}};
    p.linear = linearize(p.put, c.strikes, c.maturities());
    p.grid = exercise_time_transform(p.linear, c.strikes, c.maturities());
    return p;
}

inline PremiumRow premium_row(const BenchConfig& c, const BoundOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    auto surface = bs_surface(c);
    auto pay = bench_payoffs(c);
    auto res = robust_bound(surface, pay.grid, VariantChoice::automatic, opt);
    PremiumRow row;
    row.N = c.N;
    row.strike_lo = c.strikes.front();
    row.strike_hi = c.strikes.back();
    row.strike_count = c.strikes.size();
    row.interval = c.strikes.size() > 1 ? c.strikes[1] - c.strikes[0] : 0.0;
    row.K = c.K;
    row.phi = res.phi;
    row.gap = res.gap;
    row.chi = chi_binomial(pay.linear, c);
    row.chi_exact = chi_binomial(pay.put, c);
    row.zeta = zeta(surface, pay.grid);
    row.ratio = 100.0 * (row.chi - row.zeta) / (row.phi - row.zeta);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

inline std::vector<PremiumRow> premium_table(const std::vector<BenchConfig>& configs, const BoundOptions& opt = {}) {
    std::vector<PremiumRow> rows(configs.size());
    parallel_chunks(configs.size(), [&](std::size_t i) { rows[i] = premium_row(configs[i], opt); });
    return rows;
}

inline std::vector<double> strike_range(double lo, double hi, double step) {
    std::vector<double> s;
    for (double k = lo; k <= hi + 1e-9; k += step) s.push_back(k);
    return s;
}

// Maturity-count sweep at the money (first table).
inline std::vector<BenchConfig> figure3_configs() {
    std::vector<BenchConfig> out;
    BenchConfig single;
    single.N = 2;
    single.strikes = {100};
    out.push_back(single);
    for (auto [N, step] : {std::pair<std::size_t, double>{2, 10}, {4, 10}, {4, 2.5}, {12, 10}, {26, 10}}) {
        BenchConfig c;
        c.N = N;
        c.strikes = strike_range(70, 140, step);
        out.push_back(c);
    }
    return out;
}

// Put-strike sweep on the quarterly grid (second table).
inline std::vector<BenchConfig> figure4_configs() {
    std::vector<BenchConfig> out;
    for (double K : {80.0, 90.0, 100.0, 110.0, 120.0}) {
        BenchConfig c;
        c.K = K;
        out.push_back(c);
    }
    return out;
}

struct FiltrationSweep {
    double best = 0.0;
    double p = 0.0;
};

// Natural-filtration price of the two-period example as a function of the
// up-probability p from state 1, with s = 4/5 - p the up-probability from state 3.
inline bool sec52_consistent(double p) {
    double s = 0.8 - p;
    return p >= -1e-12 && p <= 0.25 + 1e-12 && s >= 0.5 - 1e-12 && s <= 0.75 + 1e-12;
}

inline double sec52_markov_price(double p) {
    double s = 0.8 - p;
    return 0.5 * (8.0 * (p + s) + std::max(1.0 - 8.0 * p, 0.0));
}

inline FiltrationSweep markov_best_sec52(std::size_t grid = 1001) {
    FiltrationSweep best{-1.0, 0.0};
    for (std::size_t i = 0; i < grid; ++i) {
        double p = 0.25 * static_cast<double>(i) / static_cast<double>(grid - 1);
        if (!sec52_consistent(p)) continue;
        double v = sec52_markov_price(p);
        if (v > best.best + 1e-15) best = {v, p};
    }
    return best;
}

}  // namespace amerbound::bench
