#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "amerbound/bench.hpp"
#include "amerbound/market.hpp"
#include "amerbound/payoff.hpp"

namespace oracle {

struct RandomInstance {
    amerbound::CallSurface surface;
    amerbound::AmericanPayoffGrid payoff;
    bool zero_tail = false;
    std::string label;
};

inline std::vector<double> random_strikes(std::mt19937_64& rng, std::size_t J, double lo, double hi_step) {
    std::uniform_real_distribution<double> first(lo, lo + 20.0), step(5.0, hi_step);
    std::vector<double> k{first(rng)};
    while (k.size() < J) k.push_back(k.back() + step(rng));
    return k;
}

inline std::vector<double> random_maturities(std::mt19937_64& rng, std::size_t N) {
    std::uniform_real_distribution<double> dt(0.1, 0.5);
    std::vector<double> t{dt(rng)};
    while (t.size() < N) t.push_back(t.back() + dt(rng));
    return t;
}

// Marginals of a random martingale chain on the lattice; the surface priced off
// them has zero tail and is typically only weakly valid.
inline amerbound::CallSurface random_lattice_surface(std::mt19937_64& rng, std::size_t J, std::size_t N) {
    auto x = amerbound::with_zero_state(random_strikes(rng, J, 10.0, 30.0));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> mu(J + 1);
    for (std::size_t j = 0; j <= J; ++j) mu[j] = u(rng) < 0.3 ? 0.0 : u(rng);
    mu[1 + rng() % J] += 0.5;  // some mass away from zero
    double total = 0.0;
    for (double m : mu) total += m;
    for (double& m : mu) m /= total;
    amerbound::Matrix P(J + 1, N);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t j = 0; j <= J; ++j) P(j, n) = mu[j];
        std::vector<double> next(J + 1, 0.0);
        for (std::size_t j = 0; j <= J; ++j) {
            if (j == 0 || j == J || u(rng) < 0.3) {
                next[j] += mu[j];
                continue;
            }
            std::size_t i = rng() % j, k = j + 1 + rng() % (J - j);
            double wk = (x[j] - x[i]) / (x[k] - x[i]), lam = u(rng);
            next[j] += (1.0 - lam) * mu[j];
            next[k] += lam * wk * mu[j];
            next[i] += lam * (1.0 - wk) * mu[j];
        }
        mu = next;
    }
    return amerbound::surface_from_marginals(x, random_maturities(rng, N), P);
}

// Black surface with random volatility, strikes and maturities (strictly valid, positive tail).
inline amerbound::CallSurface random_black_surface(std::mt19937_64& rng, std::size_t J, std::size_t N) {
    amerbound::bench::BenchConfig c;
    c.vol = std::uniform_real_distribution<double>(0.1, 0.5)(rng);
    c.strikes = random_strikes(rng, J, 60.0, 20.0);
    c.N = N;
    auto t = random_maturities(rng, N);
    amerbound::Matrix calls(J, N);
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t n = 0; n < N; ++n) calls(j, n) = amerbound::bench::black_call(c.s0, c.strikes[j], c.vol, t[n]);
    return amerbound::make_surface(c.s0, c.strikes, t, calls);
}

// Per maturity: constant plus puts plus possibly calls, all with positive weights.
inline amerbound::AmericanPayoffGrid random_convex_payoff(std::mt19937_64& rng, const std::vector<double>& x,
                                                          std::size_t N) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double top = 1.2 * x.back();
    amerbound::Matrix a(x.size(), N);
    std::vector<double> tails(N, 0.0);
    for (std::size_t n = 0; n < N; ++n) {
        double c0 = u(rng) < 0.5 ? 5.0 * u(rng) : 0.0;
        std::vector<std::pair<double, double>> puts, calls;
        for (std::size_t m = 0, M = 1 + rng() % 2; m < M; ++m) puts.push_back({top * u(rng), u(rng)});
        if (u(rng) < 0.3) calls.push_back({top * u(rng), 0.5 * u(rng)});
        for (std::size_t j = 0; j < x.size(); ++j) {
            double v = c0;
            for (auto [K, w] : puts) v += w * std::max(K - x[j], 0.0);
            for (auto [K, w] : calls) v += w * std::max(x[j] - K, 0.0);
            a(j, n) = v;
        }
        for (auto [K, w] : calls) tails[n] += w;
    }
    return amerbound::make_payoff_grid(std::move(a), std::move(tails));
}

// Deterministic instance number i: even numbers are lattice (zero-tail)
// surfaces, odd numbers Black surfaces; J <= 8, N <= 6.
inline RandomInstance random_instance(std::size_t i) {
    std::mt19937_64 rng(0xa11ce + 7919 * i);
    std::size_t J = 1 + rng() % 8, N = 1 + rng() % 6;
    RandomInstance r;
    r.zero_tail = i % 2 == 0;
    if (r.zero_tail) {
        J = std::max<std::size_t>(J, 2);
        r.surface = random_lattice_surface(rng, J, N);
    } else {
        r.surface = random_black_surface(rng, J, N);
    }
    r.payoff = random_convex_payoff(rng, r.surface.states(), N);
    r.label = "random #" + std::to_string(i) + " (J=" + std::to_string(J) + ", N=" + std::to_string(N) + ")";
    return r;
}

}  // namespace oracle
