#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "amerbound/bound.hpp"
#include "amerbound/hedge.hpp"
#include "amerbound/payoff.hpp"
#include "amerbound/rng.hpp"

namespace amerbound {

enum class VerifyMode { lattice_exhaustive, interval_random, full_line_random, continuous_random };

inline const char* to_string(VerifyMode m) {
    switch (m) {
        case VerifyMode::lattice_exhaustive: return "lattice-exhaustive";
        case VerifyMode::interval_random: return "interval-random";
        case VerifyMode::full_line_random: return "full-line-random";
        case VerifyMode::continuous_random: return "continuous-exercise-random";
    }
    return "?";
}

struct VerifyOptions {
    double s0 = std::numeric_limits<double>::quiet_NaN();  // start of continuous paths; default mid-grid
    double step_vol = 0.35;                                // lognormal volatility per maturity step
    double excursion_share = 0.1;
    double snap_share = 0.25;                              // probability a value is moved onto a knot
    std::size_t max_cases = 1000000;
};

struct VerificationReport {
    VerifyMode mode = VerifyMode::lattice_exhaustive;
    std::size_t trials = 0;
    double min_slack = std::numeric_limits<double>::infinity();        // min of the two below
    double path_slack = std::numeric_limits<double>::infinity();       // min G_T - payoff over paths
    double certificate_slack = std::numeric_limits<double>::infinity();  // min slack of the grid rows
    std::vector<double> worst_path;
    bool worst_continuous = false;
    double worst_exercise = 0.0;  // maturity index, or exercise time when continuous
    double worst_exercise_value = 0.0;
    double elapsed = 0.0;
    std::string skipped;          // reason when the mode could not run
};

// Grid rows (i)-(iii) of the hedging LP evaluated at the hedge; the minimum
// slack is negative when the certificate is broken even where no traded
// position changes.
inline double certificate_slack(const HedgeStrategy& h, const AmericanPayoffGrid& a) {
    const std::size_t S = h.E1.rows();
    auto lp = detail::build_dual(h.variant, Matrix(S, h.N()), h.states, a);
    auto rep = lp::check_point(lp.lp, hedge_to_vector(h, lp.index), 0.0);
    double m = std::numeric_limits<double>::infinity();
    for (double s : rep.row_slack) m = std::min(m, s);
    for (std::size_t j = 0; j < S; ++j)
        for (std::size_t n = 0; n < h.N(); ++n) m = std::min(m, h.V(j, n));
    for (double b : h.beta) m = std::min(m, b);
    return m;
}

// Exercise value at maturity n: extended interpolation of the grid column.
inline double claim_at_maturity(const HedgeStrategy& h, const AmericanPayoffGrid& a, std::size_t n, double y) {
    const std::size_t J = h.J();
    std::vector<double> col(J + 1);
    for (std::size_t j = 0; j <= J; ++j) col[j] = a.values(j, n);
    return linear_interp(h.states, col, y, a.tail_slopes[n]);
}

namespace detail {

inline double exponential(CounterRng& rng) { return -std::log1p(-rng.uniform()); }

inline double normal(CounterRng& rng) {
    double u = rng.uniform(), v = rng.uniform();
    return std::sqrt(-2.0 * std::log1p(-u)) * std::cos(2.0 * 3.14159265358979323846 * v);
}

inline double snap(const std::vector<double>& x, double y, CounterRng& rng, double share) {
    if (rng.uniform() >= share) return y;
    return x[std::min(static_cast<std::size_t>(rng.uniform() * x.size()), x.size() - 1)];
}

struct Trial {
    PricePath path;
    double payoff = 0.0;
};

inline Trial draw_trial(const HedgeStrategy& h, const AmericanPayoffGrid& a, const PayoffFunction* A,
                        VerifyMode mode, const VerifyOptions& o, CounterRng& rng) {
    const std::size_t N = h.N(), J = h.J();
    const auto& x = h.states;
    const double xJ = x[J];
    const double s0 = std::isnan(o.s0) ? 0.5 * xJ : o.s0;
    Trial t;
    t.path.values.resize(N);
    if (mode == VerifyMode::interval_random) {
        for (auto& y : t.path.values) y = snap(x, rng.uniform() * xJ, rng, o.snap_share);
    } else {
        double y = s0;
        for (auto& v : t.path.values) {
            y *= std::exp(o.step_vol * normal(rng) - 0.5 * o.step_vol * o.step_vol);
            v = y;
        }
        if (rng.uniform() < o.excursion_share) {
            std::size_t from = std::min(static_cast<std::size_t>(rng.uniform() * N), N - 1);
            for (std::size_t n = from; n < N; ++n) t.path.values[n] = xJ * (1.0 + exponential(rng));
        }
        for (auto& v : t.path.values) v = snap(x, v, rng, o.snap_share);
    }
    bool continuous = mode == VerifyMode::continuous_random ||
                      (mode == VerifyMode::full_line_random && A && A->decreasing_in_t && rng.uniform() < 0.5);
    if (!continuous) {
        std::size_t n = std::min(static_cast<std::size_t>(rng.uniform() * N), N - 1);
        t.path.exercise_index = n;
        t.payoff = claim_at_maturity(h, a, n, t.path.values[n]);
        return t;
    }
    const double T = h.maturities.back();
    double rho = T * (1.0 - rng.uniform());  // (0, T]
    auto it = std::lower_bound(h.maturities.begin(), h.maturities.end(), rho);
    std::size_t k = static_cast<std::size_t>(it - h.maturities.begin());
    // Left-limit convention: the price holds its last maturity value until the next one;
    // a third of the draws use an arbitrary price at rho instead.
    double y = k == 0 ? s0 : t.path.values[k - 1];
    if (rng.uniform() < 1.0 / 3.0) y = snap(x, rng.uniform() * 1.5 * xJ, rng, o.snap_share);
    t.path.continuous = true;
    t.path.exercise_time = rho;
    t.path.exercise_value = y;
    t.payoff = (*A)(y, rho);
    return t;
}

struct Worst {
    double slack = std::numeric_limits<double>::infinity();
    PricePath path;
};

inline void keep_worst(Worst& w, double slack, const PricePath& p) {
    if (slack < w.slack) {
        w.slack = slack;
        w.path = p;
    }
}

}  // namespace detail

// Searches for a path and exercise time on which the hedge's terminal value
// falls short of the claim.  A is required for continuous exercise.
inline VerificationReport verify_superreplication(const HedgeStrategy& hedge, const AmericanPayoffGrid& a,
                                                  VerifyMode mode, std::size_t trials, std::uint64_t seed,
                                                  const PayoffFunction* A = nullptr, const VerifyOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    VerificationReport rep;
    rep.mode = mode;
    const std::size_t N = hedge.N(), J = hedge.J();
    if (a.values.rows() != J + 1 || a.N() != N) throw std::invalid_argument("payoff grid does not match the hedge");
    if (mode == VerifyMode::continuous_random && !A)
        throw std::invalid_argument("continuous-exercise verification needs the payoff function");
    HedgeStrategy h = hedge;
    h.mode = mode == VerifyMode::lattice_exhaustive ? HedgeMode::lattice
           : mode == VerifyMode::interval_random    ? HedgeMode::interval
                                                    : HedgeMode::full_line;
    rep.certificate_slack = certificate_slack(h, a);

    std::vector<detail::Worst> worst;
    if (mode == VerifyMode::lattice_exhaustive) {
        double cases = std::pow(static_cast<double>(J + 1), static_cast<double>(N)) * static_cast<double>(N);
        if (cases > static_cast<double>(opt.max_cases)) {
            rep.skipped = "lattice has more than " + std::to_string(opt.max_cases) + " cases";
        } else {
            std::size_t paths = static_cast<std::size_t>(std::llround(cases)) / N;
            rep.trials = paths * N;
            const std::size_t chunk = 4096, chunks = (paths + chunk - 1) / chunk;
            worst.resize(chunks);
            parallel_chunks(chunks, [&](std::size_t c) {
                PricePath p;
                p.values.resize(N);
                for (std::size_t i = c * chunk; i < std::min(paths, (c + 1) * chunk); ++i) {
                    std::size_t code = i;
                    for (std::size_t n = 0; n < N; ++n) {
                        p.values[n] = h.states[code % (J + 1)];
                        code /= J + 1;
                    }
                    for (std::size_t e = 0; e < N; ++e) {
                        p.exercise_index = e;
                        double slack = gains(h, p, A) - claim_at_maturity(h, a, e, p.values[e]);
                        detail::keep_worst(worst[c], slack, p);
                    }
                }
            });
        }
    } else {
        rep.trials = trials;
        const std::size_t chunk = 4096, chunks = (trials + chunk - 1) / chunk;
        worst.resize(chunks);
        parallel_chunks(chunks, [&](std::size_t c) {
            for (std::size_t i = c * chunk; i < std::min(trials, (c + 1) * chunk); ++i) {
                CounterRng rng(seed, i);
                auto t = detail::draw_trial(h, a, A, mode, opt, rng);
                detail::keep_worst(worst[c], gains(h, t.path, A) - t.payoff, t.path);
            }
        });
    }
    for (const auto& w : worst)
        if (w.slack < rep.path_slack) {
            rep.path_slack = w.slack;
            rep.worst_path = w.path.values;
            rep.worst_continuous = w.path.continuous;
            rep.worst_exercise = w.path.continuous ? w.path.exercise_time : static_cast<double>(w.path.exercise_index);
            rep.worst_exercise_value = w.path.continuous ? w.path.exercise_value
                                                         : w.path.values[w.path.exercise_index];
        }
    rep.min_slack = std::min(rep.path_slack, rep.certificate_slack);
    rep.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// Scale for slack tolerances: 1 + the largest grid payoff.
inline double payoff_scale(const AmericanPayoffGrid& a) { return 1.0 + a.values.max_abs(); }

}  // namespace amerbound
