#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "amerbound/hedge.hpp"
#include "amerbound/market.hpp"
#include "amerbound/payoff.hpp"

namespace amerbound::instances {

struct Instance {
    std::string name;
    CallSurface surface;
    AmericanPayoffGrid payoff;
    double expected = 0.0;
};

// Jump example: up to 150 with probability Q_n/2, down to 50 with Q_n/2,
// payoff (b_n - x)^+ on states {0, 50, 100, 150}.
inline Instance sec26(const std::vector<double>& q = {0.5, 0.25, 0.25},
                      const std::vector<double>& b = {130.0, 115.0, 100.0}) {
    const std::size_t N = q.size();
    Matrix calls(3, N);
    std::vector<double> mat;
    double Q = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        Q += q[n];
        calls(0, n) = 50.0;
        calls(1, n) = 25.0 * Q;
        calls(2, n) = 0.0;
        mat.push_back(static_cast<double>(n + 1));
    }
    Instance in{"sec26", make_surface(100.0, {50.0, 100.0, 150.0}, mat, calls), {}, 35.625};
    Matrix a(4, N);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < 4; ++j) a(j, n) = std::max(b[n] - 50.0 * static_cast<double>(j), 0.0);
    in.payoff = make_payoff_grid(a, std::vector<double>(N, 0.0));
    return in;
}

// Two-period filtration example on states {0,...,4}.
inline Instance sec52() {
    Matrix p = Matrix::from_nested({{0.0, 0.4}, {0.5, 0.0}, {0.0, 0.2}, {0.5, 0.0}, {0.0, 0.4}});
    Instance in{"sec52", surface_from_marginals({0, 1, 2, 3, 4}, {1, 2}, p), {}, 3.6};
    Matrix a = Matrix::from_nested({{0, 0}, {1, 0}, {0, 0}, {0, 0}, {0, 8}});
    in.payoff = make_payoff_grid(a, {0.0, 0.0});
    return in;
}

// Introductory example: no move until t_1, then 50/100/150 with equal mass;
// put struck at 132 discounted at 10% per period.
inline Instance eg11() {
    Matrix p = Matrix::from_nested({{0, 0}, {0, 1.0 / 3}, {1, 1.0 / 3}, {0, 1.0 / 3}});
    Instance in{"eg11", surface_from_marginals({0, 50, 100, 150}, {1, 2}, p), {}, 34.0};
    Matrix a(4, 2);
    for (std::size_t j = 0; j < 4; ++j) {
        a(j, 0) = std::max(132.0 - 50.0 * static_cast<double>(j), 0.0);
        a(j, 1) = std::max(120.0 - 50.0 * static_cast<double>(j), 0.0);
    }
    in.payoff = make_payoff_grid(a, {0.0, 0.0});
    return in;
}

inline Instance by_name(const std::string& name) {
    if (name == "sec26") return sec26();
    if (name == "sec52") return sec52();
    if (name == "eg11") return eg11();
    throw std::invalid_argument("unknown example '" + name + "' (expected sec26, sec52 or eg11)");
}

// Hedge quintuple of the filtration example as printed: d2 at states 3, 4 is +2.
inline HedgeStrategy sec52_printed_hedge() {
    HedgeStrategy h = empty_hedge(Variant::bounded, {0, 1, 2, 3, 4}, {1, 2});
    const double e1[] = {0, 1, 2, 3, 4}, e2[] = {0, 0, 0, -2, -4}, d2[] = {0, 0, 0, 2, 2};
    const double v1[] = {0, 1, 2, 5, 8}, v2[] = {0, 0, 0, 4, 8};
    for (std::size_t j = 0; j < 5; ++j) {
        h.E1(j, 0) = e1[j];
        h.E2(j, 1) = e2[j];
        h.D1(j, 0) = 1.0;
        h.D2(j, 0) = d2[j];
        h.V(j, 0) = v1[j];
        h.V(j, 1) = v2[j];
    }
    return h;
}

// Same quintuple with the sign of d2 reversed; this version satisfies every
// hedging-LP row and costs 18/5.
inline HedgeStrategy sec52_corrected_hedge() {
    HedgeStrategy h = sec52_printed_hedge();
    for (std::size_t j = 0; j < 5; ++j) h.D2(j, 0) = -h.D2(j, 0);
    return h;
}

// Explicit dual solution of the jump example (D1 = E2 = 0).  As printed, d2 is
// the forward slope of v(., n+1); the hedging rows need its negative.
inline HedgeStrategy sec26_explicit_hedge(const std::vector<double>& b = {130.0, 115.0, 100.0},
                                          bool printed_sign = false) {
    const std::size_t N = b.size();
    std::vector<double> mat;
    for (std::size_t n = 0; n < N; ++n) mat.push_back(static_cast<double>(n + 1));
    HedgeStrategy h = empty_hedge(Variant::bounded, {0, 50, 100, 150}, mat);
    std::size_t nstar = 0;  // number of leading maturities with b_n - 50 > 2(b_1 - 100)
    for (std::size_t n = 0; n < N; ++n)
        if (b[n] - 50.0 > 2.0 * (b[0] - 100.0)) nstar = n + 1;
    for (std::size_t n = 0; n < N; ++n) {
        h.V(0, n) = std::max(b[n], 3.0 * (b[0] - 100.0));
        h.V(1, n) = n < nstar ? b[n] - 50.0 : 2.0 * (b[0] - 100.0);
        h.V(2, n) = b[0] - 100.0;
        h.V(3, n) = 0.0;
    }
    for (std::size_t n = 0; n + 1 < N; ++n)
        for (std::size_t j = 0; j < 4; ++j) {
            h.E1(j, n) = h.V(j, n) - h.V(j, n + 1);
            double slope = j < 3 ? (h.V(j + 1, n + 1) - h.V(j, n + 1)) / 50.0 : 0.0;
            h.D2(j, n) = printed_sign ? slope : -slope;
        }
    return h;
}

}  // namespace amerbound::instances
