#pragma once

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "amerbound/hedge.hpp"
#include "amerbound/index.hpp"
#include "amerbound/lp.hpp"
#include "amerbound/market.hpp"
#include "amerbound/model.hpp"
#include "amerbound/payoff.hpp"

namespace amerbound {

struct BuiltLP {
    lp::LinearProgram lp;
    VariableIndex index;
};

namespace detail {

inline ExtendedMarginalSystem as_extended(const MarginalSystem& m) {
    ExtendedMarginalSystem e{m.s0, m.states, m.maturities, Matrix(m.J() + 2, m.N())};
    for (std::size_t j = 0; j <= m.J(); ++j)
        for (std::size_t n = 0; n < m.N(); ++n) e.p(j, n) = m.p(j, n);
    return e;
}

inline void check_dims(std::size_t J, std::size_t N, const AmericanPayoffGrid& a) {
    if (a.values.rows() != J + 1 || a.values.cols() != N || a.tail_slopes.size() != N)
        throw std::invalid_argument("payoff grid dimensions do not match the marginals");
    if (N == 0) throw std::invalid_argument("at least one maturity is required");
}

// Shared primal builder.  In the extended variant lattice rows never send mass
// to the tail row and the tail row only moves to itself; the columns g(J+1, k<=J)
// would be forced to zero and are omitted.
inline BuiltLP build_primal(Variant variant, const Matrix& p, const std::vector<double>& x,
                            const AmericanPayoffGrid& a) {
    using K = VarKey::Kind;
    using lp::Relation;
    const std::size_t J = x.size() - 1, N = p.cols();
    const bool ext = variant == Variant::extended;
    const std::size_t S = ext ? J + 2 : J + 1, T = J + 1;
    BuiltLP b{{}, VariableIndex(variant, S, N)};
    b.lp.sense = lp::Sense::maximize;
    auto exists = [&](std::size_t j, std::size_t k) { return !(ext && j == T && k != T); };
    auto add = [&](VarKey key, double cost) {
        std::size_t c = b.index.add(key);
        b.lp.add_variable(cost);
        return c;
    };
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < S; ++j) add({K::f, j, 0, n}, j <= J ? a.values(j, n) : a.tail_slopes[n]);
    for (std::size_t n = 0; n + 1 < N; ++n)
        for (K kind : {K::g1, K::g2})
            for (std::size_t j = 0; j < S; ++j)
                for (std::size_t k = 0; k < S; ++k)
                    if (exists(j, k)) add({kind, j, k, n}, 0.0);
    // Probability flow: lattice rows count lattice destinations only.
    auto counts = [&](std::size_t j, std::size_t k) { return exists(j, k) && !(ext && j <= J && k == T); };
    const auto& idx = b.index;
    for (std::size_t n = 0; n + 1 < N; ++n)
        for (std::size_t j = 0; j < S; ++j) {
            std::vector<lp::Term> t;
            for (K kind : {K::g1, K::g2})
                for (std::size_t k = 0; k < S; ++k)
                    if (counts(j, k)) t.push_back({idx.at({kind, j, k, n}), 1.0});
            b.lp.add_row(std::move(t), Relation::eq, p(j, n));  // (a)
        }
    for (std::size_t n = 1; n < N; ++n)
        for (std::size_t j = 0; j < S; ++j) {
            std::vector<lp::Term> t;
            for (K kind : {K::g1, K::g2})
                for (std::size_t i = 0; i < S; ++i)
                    if (exists(i, j)) t.push_back({idx.at({kind, i, j, n - 1}), 1.0});
            b.lp.add_row(std::move(t), Relation::eq, p(j, n));  // (b)
        }
    for (std::size_t n = 0; n + 1 < N; ++n)
        for (K kind : {K::g1, K::g2})
            for (std::size_t j = 0; j <= J; ++j) {
                std::vector<lp::Term> t;
                for (std::size_t k = 0; k <= J; ++k)
                    if (k != j) t.push_back({idx.at({kind, j, k, n}), x[k] - x[j]});
                if (ext) t.push_back({idx.at({kind, j, T, n}), 1.0});
                b.lp.add_row(std::move(t), Relation::eq, 0.0);  // (c), (d)
            }
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < S; ++j) {
            std::vector<lp::Term> t{{idx.at({K::f, j, 0, n}), 1.0}};
            if (n + 1 < N)
                for (std::size_t k = 0; k < S; ++k)
                    if (counts(j, k)) t.push_back({idx.at({K::g2, j, k, n}), -1.0});
            if (n > 0)
                for (std::size_t i = 0; i < S; ++i)
                    if (exists(i, j)) t.push_back({idx.at({K::g2, i, j, n - 1}), 1.0});
            b.lp.add_row(std::move(t), Relation::le, n + 1 == N ? p(j, n) : 0.0);  // (e)
        }
    return b;
}

inline BuiltLP build_dual(Variant variant, const Matrix& p, const std::vector<double>& x,
                          const AmericanPayoffGrid& a) {
    using K = VarKey::Kind;
    using lp::Bound;
    using lp::Relation;
    const std::size_t J = x.size() - 1, N = p.cols();
    const bool ext = variant == Variant::extended;
    const std::size_t S = ext ? J + 2 : J + 1, T = J + 1;
    BuiltLP b{{}, VariableIndex(variant, S, N)};
    b.lp.sense = lp::Sense::minimize;
    auto add = [&](VarKey key, double cost, Bound bound) {
        std::size_t c = b.index.add(key);
        b.lp.add_variable(cost, bound);
        return c;
    };
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < S; ++j) {
            if (n + 1 < N) add({K::e1, j, 0, n}, p(j, n), Bound::free);
            if (n > 0) add({K::e2, j, 0, n}, p(j, n), Bound::free);
            add({K::v, j, 0, n}, n + 1 == N ? p(j, n) : 0.0, Bound::nonnegative);
        }
    for (std::size_t n = 0; n + 1 < N; ++n)
        for (std::size_t j = 0; j <= J; ++j) {
            add({K::d1, j, 0, n}, 0.0, Bound::free);
            add({K::d2, j, 0, n}, 0.0, Bound::free);
        }
    const auto& idx = b.index;
    auto e1 = [&](std::size_t j, std::size_t n) { return idx.at({K::e1, j, 0, n}); };
    auto e2 = [&](std::size_t j, std::size_t n) { return idx.at({K::e2, j, 0, n}); };
    auto d1 = [&](std::size_t j, std::size_t n) { return idx.at({K::d1, j, 0, n}); };
    auto d2 = [&](std::size_t j, std::size_t n) { return idx.at({K::d2, j, 0, n}); };
    auto v = [&](std::size_t j, std::size_t n) { return idx.at({K::v, j, 0, n}); };
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < S; ++j)
            b.lp.add_row({{v(j, n), 1.0}}, Relation::ge, j <= J ? a.values(j, n) : a.tail_slopes[n]);  // (i)
    for (std::size_t n = 0; n + 1 < N; ++n) {
        for (std::size_t j = 0; j <= J; ++j)
            for (std::size_t k = 0; k <= J; ++k) {
                // (ii) and (iii); for j == k the ratio term vanishes.
                std::vector<lp::Term> r1{{e1(j, n), 1.0}, {e2(k, n + 1), 1.0}};
                if (k != j) r1.push_back({d1(j, n), x[k] - x[j]});
                b.lp.add_row(std::move(r1), Relation::ge, 0.0);
                std::vector<lp::Term> r2{{e1(j, n), 1.0}, {e2(k, n + 1), 1.0}};
                if (k != j) r2.push_back({d2(j, n), x[k] - x[j]});
                r2.push_back({v(j, n), -1.0});
                r2.push_back({v(k, n + 1), 1.0});
                b.lp.add_row(std::move(r2), Relation::ge, 0.0);
            }
        if (!ext) continue;
        for (std::size_t j = 0; j <= J; ++j) {
            b.lp.add_row({{e2(T, n + 1), 1.0}, {d1(j, n), 1.0}}, Relation::ge, 0.0);
            b.lp.add_row({{e2(T, n + 1), 1.0}, {d2(j, n), 1.0}, {v(T, n + 1), 1.0}}, Relation::ge, 0.0);
        }
        b.lp.add_row({{e1(T, n), 1.0}, {e2(T, n + 1), 1.0}}, Relation::ge, 0.0);
        b.lp.add_row({{e1(T, n), 1.0}, {e2(T, n + 1), 1.0}, {v(T, n), -1.0}, {v(T, n + 1), 1.0}}, Relation::ge,
                     0.0);
    }
    return b;
}

}  // namespace detail

inline BuiltLP build_primal_bounded(const MarginalSystem& m, const AmericanPayoffGrid& a) {
    detail::check_dims(m.J(), m.N(), a);
    return detail::build_primal(Variant::bounded, m.p, m.states, a);
}
inline BuiltLP build_dual_bounded(const MarginalSystem& m, const AmericanPayoffGrid& a) {
    detail::check_dims(m.J(), m.N(), a);
    return detail::build_dual(Variant::bounded, m.p, m.states, a);
}
inline BuiltLP build_primal_extended(const ExtendedMarginalSystem& m, const AmericanPayoffGrid& a) {
    detail::check_dims(m.J(), m.N(), a);
    return detail::build_primal(Variant::extended, m.p, m.states, a);
}
inline BuiltLP build_dual_extended(const ExtendedMarginalSystem& m, const AmericanPayoffGrid& a) {
    detail::check_dims(m.J(), m.N(), a);
    return detail::build_dual(Variant::extended, m.p, m.states, a);
}

enum class VariantChoice { automatic, bounded, extended };

struct BoundOptions {
    double tol_gap = 1e-6;
    double tol_feas = 1e-9;
    double zero_tail_tol = 1e-10;
    lp::SolveOptions solver{};
};

struct BoundDiagnostics {
    std::size_t primal_iterations = 0;
    std::size_t dual_iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    std::size_t primal_columns = 0;
    std::size_t primal_rows = 0;
    std::size_t dual_columns = 0;
    std::size_t dual_rows = 0;
    double seconds = 0.0;
};

struct BoundResult {
    Variant variant = Variant::bounded;
    double phi = 0.0;
    double psi = 0.0;
    double gap = 0.0;
    RegimeModel model;
    HedgeStrategy hedge;
    BoundDiagnostics diagnostics;
    ExtendedMarginalSystem marginals;  // p-hat; row J+1 is zero in the bounded variant
    AmericanPayoffGrid payoff;
    BuiltLP primal;
    BuiltLP dual;
};

inline BoundResult robust_bound(const CallSurface& surface, const AmericanPayoffGrid& payoff,
                                VariantChoice choice = VariantChoice::automatic, const BoundOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    const bool zero_tail = surface.prices(surface.J(), surface.N() - 1) <= opt.zero_tail_tol;
    Variant variant = choice == VariantChoice::automatic ? (zero_tail ? Variant::bounded : Variant::extended)
                    : choice == VariantChoice::bounded   ? Variant::bounded
                                                         : Variant::extended;
    if (variant == Variant::bounded && !zero_tail)
        throw ValidationError("bounded variant needs a zero-priced call at the largest strike");
    BoundResult r;
    r.variant = variant;
    r.payoff = payoff;
    r.marginals = extended_marginals(surface);
    if (variant == Variant::bounded) {
        auto m = implied_marginals(surface);
        r.primal = build_primal_bounded(m, payoff);
        r.dual = build_dual_bounded(m, payoff);
        for (std::size_t n = 0; n < surface.N(); ++n) r.marginals.p(surface.J() + 1, n) = 0.0;
    } else {
        r.primal = build_primal_extended(r.marginals, payoff);
        r.dual = build_dual_extended(r.marginals, payoff);
    }
    auto ps = lp::solve(r.primal.lp, opt.solver);
    auto ds = lp::solve(r.dual.lp, opt.solver);
    if (ps.status != lp::Status::optimal)
        throw SolverError(std::string("pricing LP not solved: ") + lp::to_string(ps.status));
    if (ds.status != lp::Status::optimal)
        throw SolverError(std::string("hedging LP not solved: ") + lp::to_string(ds.status));
    r.phi = ps.objective;
    r.psi = ds.objective;
    r.gap = std::abs(r.phi - r.psi);
    auto& d = r.diagnostics;
    d.primal_iterations = ps.iterations;
    d.dual_iterations = ds.iterations;
    d.primal_columns = r.primal.lp.num_vars();
    d.primal_rows = r.primal.lp.rows.size();
    d.dual_columns = r.dual.lp.num_vars();
    d.dual_rows = r.dual.lp.rows.size();
    d.primal_residual = lp::check_point(r.primal.lp, ps.primal, opt.tol_feas).max_violation;
    d.dual_residual = lp::check_point(r.dual.lp, ds.primal, opt.tol_feas).max_violation;
    if (r.gap > opt.tol_gap * (1.0 + std::abs(r.phi))) {
        std::ostringstream os;
        os.precision(12);
        os << "duality gap exceeded: primal " << r.phi << ", dual " << r.psi;
        throw SolverError(os.str());
    }
    r.model = model_from_vector(ps.primal, r.primal.index, r.marginals, payoff);
    r.hedge = hedge_from_vector(ds.primal, r.dual.index, surface.states(), surface.maturities);
    r.hedge.R = payoff.R;
    if (variant == Variant::bounded) r.hedge.beta = tail_calls(r.hedge, payoff.R);
    d.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace amerbound
