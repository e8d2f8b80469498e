#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "amerbound/common.hpp"
#include "amerbound/index.hpp"
#include "amerbound/lp.hpp"
#include "amerbound/market.hpp"
#include "amerbound/payoff.hpp"
#include "amerbound/rng.hpp"

namespace amerbound {

// Price/regime model.  Rows 0..J are lattice states; in the extended variant
// row J+1 is the tail row, whose entries carry slope mass rather than probability.
struct RegimeModel {
    Variant variant = Variant::bounded;
    double s0 = 0.0;
    std::vector<double> states;  // x_0..x_J
    std::vector<double> maturities;
    Matrix p;                    // marginals (p-hat in the extended variant)
    Matrix F;                    // S x N
    Transitions G1, G2;          // N-1 matrices, S x S
    Matrix q;                    // switch probability on arrival in regime 1
    std::vector<double> tail_slopes;  // R_n used for the tail row value

    std::size_t J() const { return states.size() - 1; }
    std::size_t N() const { return maturities.size(); }
    std::size_t S() const { return F.rows(); }

    // Contribution of the tail row to the model value: sum_n R_n f_{J+1,n}.
    double tail_value() const {
        if (variant == Variant::bounded) return 0.0;
        double v = 0.0;
        for (std::size_t n = 0; n < N(); ++n) v += tail_slopes[n] * F(J() + 1, n);
        return v;
    }

    // Regime-1 mass arriving at (j, n) and leaving it along lattice edges.
    double regime1_inflow(std::size_t j, std::size_t n) const {
        if (n == 0) return p(j, 0);
        double s = 0.0;
        for (std::size_t i = 0; i <= J(); ++i) s += G1[n - 1](i, j);
        return s;
    }
    double regime1_outflow(std::size_t j, std::size_t n) const {
        if (n + 1 >= N()) return 0.0;
        double s = 0.0;
        for (std::size_t k = 0; k <= J(); ++k) s += G1[n](j, k);
        return s;
    }
};

namespace detail {
inline Matrix switch_probabilities(const RegimeModel& m) {
    Matrix q(m.S(), m.N());
    for (std::size_t n = 0; n < m.N(); ++n)
        for (std::size_t j = 0; j <= m.J(); ++j) {
            double in = m.regime1_inflow(j, n);
            if (in <= 1e-12) continue;
            q(j, n) = n + 1 == m.N() ? 1.0 : std::clamp((in - m.regime1_outflow(j, n)) / in, 0.0, 1.0);
        }
    return q;
}
}  // namespace detail

struct ModelReport {
    double marginal_residual = 0.0;
    double martingale_residual = 0.0;  // relative to x_J
    double q_min = 0.0;
    double q_max = 0.0;
    double q_mass_residual = 0.0;      // q outside [0,1], weighted by the regime-1 inflow
    double fg_residual = 0.0;          // eq:fg identities at positive-payoff nodes
    double absorbing_residual = 0.0;   // bounded variant: mass leaving x_J downwards
    bool ok = false;
};

inline ModelReport check_model(const RegimeModel& m, const AmericanPayoffGrid* payoff = nullptr,
                               double tol = 1e-8) {
    ModelReport r;
    const std::size_t J = m.J(), N = m.N(), S = m.S();
    const bool ext = m.variant == Variant::extended;
    const std::size_t T = J + 1;
    auto dest_ok = [&](std::size_t j, std::size_t k) { return j <= J ? true : k == T; };
    for (std::size_t n = 0; n + 1 < N; ++n) {
        for (std::size_t j = 0; j < S; ++j) {
            double out = 0.0;
            for (std::size_t k = 0; k < S; ++k) {
                if (j <= J && k == T) continue;  // slope mass, not probability
                out += m.G1[n](j, k) + m.G2[n](j, k);
            }
            r.marginal_residual = std::max(r.marginal_residual, std::abs(out - m.p(j, n)));
            double in = 0.0;
            for (std::size_t i = 0; i < S; ++i)
                if (dest_ok(i, j)) in += m.G1[n](i, j) + m.G2[n](i, j);
            r.marginal_residual = std::max(r.marginal_residual, std::abs(in - m.p(j, n + 1)));
        }
        for (std::size_t j = 0; j <= J; ++j)
            for (const Transitions* G : {&m.G1, &m.G2}) {
                double mart = ext ? (*G)[n](j, T) : 0.0;
                for (std::size_t k = 0; k <= J; ++k) mart += (m.states[k] - m.states[j]) * (*G)[n](j, k);
                r.martingale_residual = std::max(r.martingale_residual, std::abs(mart) / std::max(1.0, m.states[J]));
                if (!ext)
                    for (std::size_t k = 0; k < J && j == J; ++k)
                        r.absorbing_residual = std::max(r.absorbing_residual, (*G)[n](J, k));
            }
    }
    r.q_min = 1.0;
    r.q_max = 0.0;
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j <= J; ++j) {
            double in = m.regime1_inflow(j, n);
            if (in <= 1e-12) continue;
            double stay = n + 1 == N ? in : in - m.regime1_outflow(j, n);
            r.q_mass_residual = std::max({r.q_mass_residual, -stay, stay - in});
            double raw = stay / in;
            r.q_min = std::min(r.q_min, raw);
            r.q_max = std::max(r.q_max, raw);
        }
    if (r.q_min > r.q_max) r.q_min = r.q_max = 0.0;
    if (payoff) {
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t j = 0; j < S; ++j) {
                double a = j <= J ? payoff->values(j, n) : payoff->tail_slopes[n];
                if (a <= 0.0) continue;
                double lhs = m.F(j, n);
                if (n > 0)
                    for (std::size_t i = 0; i < S; ++i)
                        if (dest_ok(i, j)) lhs += m.G2[n - 1](i, j);
                double rhs = 0.0;
                if (n + 1 < N) {
                    for (std::size_t k = 0; k < S; ++k)
                        if (dest_ok(j, k) && !(j <= J && k == T)) rhs += m.G2[n](j, k);
                } else {
                    rhs = m.p(j, n);
                }
                r.fg_residual = std::max(r.fg_residual, std::abs(lhs - rhs));
            }
    }
    r.ok = r.marginal_residual <= tol && r.martingale_residual <= tol && r.q_mass_residual <= 1e-9 &&
           r.fg_residual <= tol && r.absorbing_residual <= tol;
    return r;
}

// Builds the model from an LP 2.1 / 4.2 point.
inline RegimeModel model_from_vector(const std::vector<double>& x, const VariableIndex& idx,
                                     const ExtendedMarginalSystem& marg, const AmericanPayoffGrid& payoff) {
    using K = VarKey::Kind;
    RegimeModel m;
    m.variant = idx.variant();
    m.s0 = marg.s0;
    m.states = marg.states;
    m.maturities = marg.maturities;
    const std::size_t S = idx.states(), N = idx.maturities();
    m.p = Matrix(S, N);
    for (std::size_t j = 0; j < S; ++j)
        for (std::size_t n = 0; n < N; ++n) m.p(j, n) = marg.p(j, n);
    m.F = Matrix(S, N);
    m.G1.assign(N > 0 ? N - 1 : 0, Matrix(S, S));
    m.G2 = m.G1;
    m.tail_slopes = payoff.tail_slopes;
    auto val = [&](VarKey key) {
        std::size_t c = idx.find(key);
        return c == VariableIndex::none ? 0.0 : std::max(x[c], 0.0);
    };
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < S; ++j) {
            m.F(j, n) = val({K::f, j, 0, n});
            if (n + 1 < N)
                for (std::size_t k = 0; k < S; ++k) {
                    m.G1[n](j, k) = val({K::g1, j, k, n});
                    m.G2[n](j, k) = val({K::g2, j, k, n});
                }
        }
    m.q = detail::switch_probabilities(m);
    return m;
}

inline std::vector<double> model_to_vector(const RegimeModel& m, const VariableIndex& idx) {
    using K = VarKey::Kind;
    std::vector<double> x(idx.size(), 0.0);
    for (std::size_t c = 0; c < idx.size(); ++c) {
        const auto& key = idx.key(c);
        switch (key.kind) {
            case K::f: x[c] = m.F(key.j, key.n); break;
            case K::g1: x[c] = m.G1[key.n](key.j, key.k); break;
            case K::g2: x[c] = m.G2[key.n](key.j, key.k); break;
            default: break;
        }
    }
    return x;
}

// Exercise at t_1 over martingale transports between consecutive marginals,
// each found by a feasibility LP.
inline RegimeModel seed_model(const MarginalSystem& marg) {
    const std::size_t S = marg.J() + 1, N = marg.N();
    RegimeModel m;
    m.variant = Variant::bounded;
    m.s0 = marg.s0;
    m.states = marg.states;
    m.maturities = marg.maturities;
    m.p = marg.p;
    m.F = Matrix(S, N);
    m.G1.assign(N > 0 ? N - 1 : 0, Matrix(S, S));
    m.G2 = m.G1;
    m.tail_slopes.assign(N, 0.0);
    for (std::size_t j = 0; j < S; ++j) m.F(j, 0) = marg.p(j, 0);
    for (std::size_t n = 0; n + 1 < N; ++n) {
        lp::LinearProgram prog;
        prog.sense = lp::Sense::minimize;
        for (std::size_t c = 0; c < S * S; ++c) prog.add_variable(0.0);
        for (std::size_t j = 0; j < S; ++j) {
            std::vector<lp::Term> out, in, mart;
            for (std::size_t k = 0; k < S; ++k) {
                out.push_back({j * S + k, 1.0});
                in.push_back({k * S + j, 1.0});
                if (k != j) mart.push_back({j * S + k, marg.states[k] - marg.states[j]});
            }
            prog.add_row(std::move(out), lp::Relation::eq, marg.p(j, n));
            prog.add_row(std::move(in), lp::Relation::eq, marg.p(j, n + 1));
            prog.add_row(std::move(mart), lp::Relation::eq, 0.0);
        }
        auto sol = lp::solve(prog, {.route = lp::SolveOptions::Route::direct});
        if (sol.status != lp::Status::optimal)
            throw CertificationError("no martingale transport between maturities " + std::to_string(n) + " and " +
                                     std::to_string(n + 1) + ": marginals not in convex order");
        for (std::size_t j = 0; j < S; ++j)
            for (std::size_t k = 0; k < S; ++k) m.G2[n](j, k) = std::max(sol.primal[j * S + k], 0.0);
    }
    m.q = detail::switch_probabilities(m);
    return m;
}

struct SimulatedPath {
    std::vector<std::size_t> states;  // lattice index at t_1..t_N
    std::size_t exercise = 0;         // maturity index of the first regime switch
};

namespace detail {
// Cumulative kernels for sampling, one per (regime, state, transition).
struct Sampler {
    std::vector<double> initial;                          // cumulative over states
    std::vector<std::vector<std::vector<double>>> cum[2];  // [delta][n][j] -> cumulative row
    std::size_t J = 0;

    explicit Sampler(const RegimeModel& m) : J(m.J()) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= J; ++j) initial.push_back(acc += m.p(j, 0));
        for (int d = 0; d < 2; ++d) {
            const Transitions& G = d == 0 ? m.G1 : m.G2;
            cum[d].resize(G.size());
            for (std::size_t n = 0; n < G.size(); ++n) {
                cum[d][n].resize(J + 1);
                for (std::size_t j = 0; j <= J; ++j) {
                    auto& row = cum[d][n][j];
                    double s = 0.0;
                    for (std::size_t k = 0; k <= J; ++k) row.push_back(s += G[n](j, k));
                }
            }
        }
    }

    static std::size_t draw(const std::vector<double>& cum, double u) {
        double total = cum.back();
        if (total <= 0.0) return cum.size();
        auto it = std::upper_bound(cum.begin(), cum.end(), u * total);
        std::size_t k = static_cast<std::size_t>(it - cum.begin());
        if (k >= cum.size()) k = cum.size() - 1;
        while (k > 0 && cum[k] == cum[k - 1]) --k;  // skip zero-weight entries
        return k;
    }
};

// Simulates one path; stops early after exercise when full is false.
inline SimulatedPath simulate_one(const RegimeModel& m, const Sampler& s, CounterRng& rng, bool full) {
    SimulatedPath path;
    const std::size_t N = m.N();
    std::size_t j = Sampler::draw(s.initial, rng.uniform());
    path.states.push_back(j);
    bool regime2 = false;
    path.exercise = N - 1;
    for (std::size_t n = 0;; ++n) {
        if (!regime2 && (n + 1 == N || rng.uniform() < m.q(j, n))) {
            regime2 = true;
            path.exercise = n;
            if (!full) return path;
        }
        if (n + 1 == N) break;
        const auto& row = s.cum[regime2 ? 1 : 0][n][j];
        std::size_t k = Sampler::draw(row, rng.uniform());
        if (k > m.J()) k = j;  // zero-mass node; unreachable in a consistent model
        j = k;
        path.states.push_back(j);
    }
    return path;
}
}  // namespace detail

inline std::vector<SimulatedPath> simulate(const RegimeModel& m, std::size_t paths, std::uint64_t seed) {
    detail::Sampler s(m);
    std::vector<SimulatedPath> out(paths);
    const std::size_t chunk = 4096, chunks = (paths + chunk - 1) / chunk;
    parallel_chunks(chunks, [&](std::size_t c) {
        for (std::size_t i = c * chunk; i < std::min(paths, (c + 1) * chunk); ++i) {
            CounterRng rng(seed, i);
            out[i] = detail::simulate_one(m, s, rng, true);
        }
    });
    return out;
}

struct McEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::size_t paths = 0;
};

// Mean of a(X_tau, tau) under the model's exercise rule, plus the tail-row
// contribution in the extended variant.
inline McEstimate mc_price(const RegimeModel& m, const AmericanPayoffGrid& payoff, std::size_t paths,
                           std::uint64_t seed) {
    detail::Sampler s(m);
    const std::size_t chunk = 65536, chunks = (paths + chunk - 1) / chunk;
    std::vector<double> sum(chunks, 0.0), sum2(chunks, 0.0);
    parallel_chunks(chunks, [&](std::size_t c) {
        double a = 0.0, b = 0.0;
        for (std::size_t i = c * chunk; i < std::min(paths, (c + 1) * chunk); ++i) {
            CounterRng rng(seed, i);
            auto path = detail::simulate_one(m, s, rng, false);
            double v = payoff.values(path.states.back(), path.exercise);
            a += v;
            b += v * v;
        }
        sum[c] = a;
        sum2[c] = b;
    });
    double a = 0.0, b = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        a += sum[c];
        b += sum2[c];
    }
    McEstimate e;
    e.paths = paths;
    double mean = a / static_cast<double>(paths);
    double var = std::max(b / static_cast<double>(paths) - mean * mean, 0.0);
    e.estimate = mean + m.tail_value();
    e.stderr_ = paths > 1 ? std::sqrt(var * static_cast<double>(paths) / static_cast<double>(paths - 1) /
                                      static_cast<double>(paths))
                          : 0.0;
    return e;
}

}  // namespace amerbound
