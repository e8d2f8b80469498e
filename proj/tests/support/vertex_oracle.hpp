#pragma once

// Exact LP optimum by brute-force vertex enumeration in rational arithmetic.
// Only for tiny bounded problems.

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <vector>

#include "amerbound/lp.hpp"

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

struct ExactRow {
    std::vector<Rational> a;
    Rational rhs;
    amerbound::lp::Relation rel;
};

// Solves the square system by Gauss-Jordan; nullopt when singular.
inline std::optional<std::vector<Rational>> solve_square(std::vector<std::vector<Rational>> m,
                                                         std::vector<Rational> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && m[p][c] == 0) ++p;
        if (p == n) return std::nullopt;
        std::swap(m[p], m[c]);
        std::swap(b[p], b[c]);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || m[i][c] == 0) continue;
            Rational f = m[i][c] / m[c][c];
            for (std::size_t k = c; k < n; ++k) m[i][k] -= f * m[c][k];
            b[i] -= f * b[c];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= m[i][i];
    return b;
}

// Returns the optimal objective (the problem must be feasible and bounded
// with at least one vertex), or nullopt if no feasible vertex exists.
inline std::optional<Rational> vertex_optimum(const amerbound::lp::LinearProgram& lp) {
    using amerbound::lp::Relation;
    const std::size_t n = lp.num_vars();
    std::vector<ExactRow> cons;
    for (const auto& r : lp.rows) {
        ExactRow e{std::vector<Rational>(n, 0), Rational(r.rhs), r.rel};
        for (const auto& t : r.terms) e.a[t.index] = Rational(t.value);
        cons.push_back(std::move(e));
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (lp.bounds[j] != amerbound::lp::Bound::nonnegative) continue;
        ExactRow e{std::vector<Rational>(n, 0), 0, Relation::ge};
        e.a[j] = 1;
        cons.push_back(std::move(e));
    }
    const std::size_t total = cons.size();
    std::optional<Rational> best;
    std::vector<std::size_t> pick(n);
    auto feasible = [&](const std::vector<Rational>& x) {
        for (const auto& c : cons) {
            Rational lhs = 0;
            for (std::size_t j = 0; j < n; ++j) lhs += c.a[j] * x[j];
            if (c.rel == Relation::le && lhs > c.rhs) return false;
            if (c.rel == Relation::ge && lhs < c.rhs) return false;
            if (c.rel == Relation::eq && lhs != c.rhs) return false;
        }
        return true;
    };
    // Lexicographic enumeration of n-subsets of the constraint list.
    if (total < n) return std::nullopt;
    for (std::size_t i = 0; i < n; ++i) pick[i] = i;
    for (;;) {
        std::vector<std::vector<Rational>> m(n);
        std::vector<Rational> b(n);
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = cons[pick[i]].a;
            b[i] = cons[pick[i]].rhs;
        }
        if (auto x = solve_square(m, b); x && feasible(*x)) {
            Rational v = 0;
            for (std::size_t j = 0; j < n; ++j) v += Rational(lp.objective[j]) * (*x)[j];
            bool better = !best || (lp.sense == amerbound::lp::Sense::maximize ? v > *best : v < *best);
            if (better) best = v;
        }
        std::size_t i = n;
        while (i > 0 && pick[i - 1] == total - n + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t k = i; k < n; ++k) pick[k] = pick[k - 1] + 1;
    }
    return best;
}

}  // namespace oracle
