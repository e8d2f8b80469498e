#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "amerbound/common.hpp"

namespace amerbound::lp {

enum class Sense { maximize, minimize };
enum class Relation { le, eq, ge };
enum class Bound { nonnegative, free };
enum class Status { optimal, infeasible, unbounded };

struct Term {
    std::size_t index;
    double value;
};

struct Row {
    std::vector<Term> terms;
    Relation rel = Relation::le;
    double rhs = 0.0;
};

struct LinearProgram {
    Sense sense = Sense::maximize;
    std::vector<double> objective;
    std::vector<Bound> bounds;
    std::vector<Row> rows;

    std::size_t num_vars() const { return objective.size(); }

    std::size_t add_variable(double cost, Bound bound = Bound::nonnegative) {
        objective.push_back(cost);
        bounds.push_back(bound);
        return objective.size() - 1;
    }

    std::size_t add_row(std::vector<Term> terms, Relation rel, double rhs) {
        rows.push_back(Row{std::move(terms), rel, rhs});
        return rows.size() - 1;
    }

    // Throws std::invalid_argument on out-of-range or duplicate indices and non-finite data.
    void check() const {
        if (bounds.size() != objective.size())
            throw std::invalid_argument("bounds/objective size mismatch");
        for (double c : objective)
            if (!std::isfinite(c)) throw std::invalid_argument("non-finite objective coefficient");
        std::vector<std::size_t> seen(num_vars(), std::numeric_limits<std::size_t>::max());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!std::isfinite(rows[i].rhs)) throw std::invalid_argument("non-finite rhs");
            for (const auto& t : rows[i].terms) {
                if (t.index >= num_vars()) throw std::invalid_argument("variable index out of range");
                if (!std::isfinite(t.value)) throw std::invalid_argument("non-finite coefficient");
                if (seen[t.index] == i) throw std::invalid_argument("duplicate index in row");
                seen[t.index] = i;
            }
        }
    }

    double max_abs_coefficient() const {
        double m = 0.0;
        for (const auto& r : rows)
            for (const auto& t : r.terms) m = std::max(m, std::abs(t.value));
        return m;
    }
};

// dual[i] is the multiplier of row i, i.e. the sensitivity of the optimal
// objective to rows[i].rhs.  Maximize: le rows >= 0, ge rows <= 0.
struct Solution {
    Status status = Status::infeasible;
    double objective = 0.0;
    std::vector<double> primal;
    std::vector<double> dual;
    std::size_t iterations = 0;
};

struct SolveOptions {
    enum class Route { direct, through_dual, automatic };
    Route route = Route::automatic;
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-11;
    std::size_t refactor_period = 100;
};

namespace detail {

// Revised primal simplex on  min c x, A x = b, x >= 0, b >= 0, with an
// explicit dense basis inverse that is rebuilt every refactor_period pivots.
class Simplex {
public:
    struct Column {
        std::vector<std::size_t> idx;
        std::vector<double> val;
    };

    Simplex(std::size_t m, std::vector<Column> cols, std::vector<double> b,
            std::vector<std::size_t> basis, std::size_t first_artificial,
            const SolveOptions& opt)
        : m_(m), cols_(std::move(cols)), b_(std::move(b)), basis_(std::move(basis)),
          first_art_(first_artificial), opt_(opt) {
        in_basis_.assign(cols_.size(), -1);
        for (std::size_t i = 0; i < m_; ++i) in_basis_[basis_[i]] = static_cast<long>(i);
        refactor();
    }

    enum class Outcome { optimal, unbounded };

    Outcome run(const std::vector<double>& cost, bool phase_two) {
        cost_ = cost;
        std::size_t degenerate_run = 0;
        bool bland = false;
        const std::size_t bland_after = 5 * (m_ + cols_.size());
        const std::size_t limit = 200 * (m_ + cols_.size()) + 10000;
        std::vector<char> rejected(cols_.size(), 0);
        std::vector<double> y(m_), alpha(m_);

        for (;;) {
            if (++local_iters_ > limit) throw SolverError("simplex iteration limit exceeded");
            compute_duals(y);

            std::size_t q = cols_.size();
            double best = -opt_.optimality_tol;
            for (std::size_t j = 0; j < cols_.size(); ++j) {
                if (in_basis_[j] >= 0 || rejected[j]) continue;
                if (phase_two && j >= first_art_) continue;
                double d = reduced_cost(j, y);
                if (d < best) {
                    q = j;
                    best = d;
                    if (bland) break;
                }
            }
            if (q == cols_.size()) {
                bool any_rejected = std::find(rejected.begin(), rejected.end(), 1) != rejected.end();
                if (any_rejected) {
                    refactor();
                    std::fill(rejected.begin(), rejected.end(), 0);
                    if (++breakdown_resets_ > 20)
                        throw SolverError("numerical breakdown: pivot magnitude below threshold");
                    continue;
                }
                return Outcome::optimal;
            }

            ftran(q, alpha);
            std::size_t r = ratio_test(alpha, phase_two, bland);
            if (r == m_) {
                bool tiny_positive = false;
                for (double a : alpha)
                    if (a > 0.0) tiny_positive = true;
                if (!tiny_positive) return Outcome::unbounded;
                rejected[q] = 1;
                continue;
            }
            double theta = std::max(x_[r], 0.0) / alpha[r];
            if (theta <= 1e-12)
                ++degenerate_run;
            else
                degenerate_run = 0;
            bland = degenerate_run > bland_after;
            pivot(q, r, alpha, theta);
            std::fill(rejected.begin(), rejected.end(), 0);
            ++iterations_;
            if (++since_refactor_ >= opt_.refactor_period) refactor();
        }
    }

    // Pivot basic artificial variables out of the basis where possible.
    void expel_artificials() {
        std::vector<double> alpha(m_);
        for (std::size_t r = 0; r < m_; ++r) {
            if (basis_[r] < first_art_) continue;
            std::size_t best_j = cols_.size();
            double best_a = 1e-7;
            for (std::size_t j = 0; j < first_art_; ++j) {
                if (in_basis_[j] >= 0) continue;
                double a = 0.0;
                const auto& c = cols_[j];
                for (std::size_t t = 0; t < c.idx.size(); ++t) a += binv_[r * m_ + c.idx[t]] * c.val[t];
                if (std::abs(a) > best_a) {
                    best_a = std::abs(a);
                    best_j = j;
                }
            }
            if (best_j == cols_.size()) continue;
            ftran(best_j, alpha);
            pivot(best_j, r, alpha, 0.0);
            ++iterations_;
            if (++since_refactor_ >= opt_.refactor_period) refactor();
        }
        refactor();
    }

    double value(const std::vector<double>& cost) const {
        double v = 0.0;
        for (std::size_t i = 0; i < m_; ++i) v += cost[basis_[i]] * x_[i];
        return v;
    }

    std::vector<double> solution() const {
        std::vector<double> out(cols_.size(), 0.0);
        for (std::size_t i = 0; i < m_; ++i) out[basis_[i]] = std::max(x_[i], 0.0);
        return out;
    }

    std::vector<double> duals(const std::vector<double>& cost) {
        cost_ = cost;
        std::vector<double> y(m_);
        compute_duals(y);
        return y;
    }

    std::size_t iterations() const { return iterations_; }

private:
    void compute_duals(std::vector<double>& y) const {
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            double cb = cost_[basis_[i]];
            if (cb == 0.0) continue;
            const double* row = &binv_[i * m_];
            for (std::size_t k = 0; k < m_; ++k) y[k] += cb * row[k];
        }
    }

    double reduced_cost(std::size_t j, const std::vector<double>& y) const {
        double d = cost_[j];
        const auto& c = cols_[j];
        for (std::size_t t = 0; t < c.idx.size(); ++t) d -= y[c.idx[t]] * c.val[t];
        return d;
    }

    void ftran(std::size_t j, std::vector<double>& alpha) const {
        std::fill(alpha.begin(), alpha.end(), 0.0);
        const auto& c = cols_[j];
        for (std::size_t t = 0; t < c.idx.size(); ++t) {
            std::size_t k = c.idx[t];
            double v = c.val[t];
            for (std::size_t i = 0; i < m_; ++i) alpha[i] += binv_[i * m_ + k] * v;
        }
    }

    // Harris two-pass ratio test; plain minimum ratio with lowest-index ties under Bland.
    std::size_t ratio_test(const std::vector<double>& alpha, bool phase_two, bool bland) const {
        const double tol = opt_.pivot_tol;
        std::size_t r = m_;
        if (phase_two) {
            // Artificial variables left in the basis must stay at zero.
            double big = 0.0;
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] >= first_art_ && std::abs(alpha[i]) > std::max(tol, 1e-9) &&
                    std::abs(alpha[i]) > big) {
                    big = std::abs(alpha[i]);
                    r = i;
                }
            if (r != m_) return r;
        }
        if (bland) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i)
                if (alpha[i] > tol) best = std::min(best, std::max(x_[i], 0.0) / alpha[i]);
            for (std::size_t i = 0; i < m_; ++i) {
                if (alpha[i] <= tol || std::max(x_[i], 0.0) / alpha[i] > best + 1e-12) continue;
                if (r == m_ || basis_[i] < basis_[r]) r = i;
            }
            return r;
        }
        double theta_max = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m_; ++i)
            if (alpha[i] > tol)
                theta_max = std::min(theta_max, (std::max(x_[i], 0.0) + opt_.feasibility_tol) / alpha[i]);
        double best_alpha = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (alpha[i] <= tol) continue;
            if (std::max(x_[i], 0.0) / alpha[i] <= theta_max && alpha[i] > best_alpha) {
                best_alpha = alpha[i];
                r = i;
            }
        }
        return r;
    }

    void pivot(std::size_t q, std::size_t r, const std::vector<double>& alpha, double theta) {
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            x_[i] -= theta * alpha[i];
            if (x_[i] < 0.0 && x_[i] > -opt_.feasibility_tol) x_[i] = 0.0;
        }
        x_[r] = theta;
        double* prow = &binv_[r * m_];
        double inv = 1.0 / alpha[r];
        for (std::size_t k = 0; k < m_; ++k) prow[k] *= inv;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r || alpha[i] == 0.0) continue;
            double f = alpha[i];
            double* row = &binv_[i * m_];
            for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
        }
        in_basis_[basis_[r]] = -1;
        basis_[r] = q;
        in_basis_[q] = static_cast<long>(r);
    }

    // Gauss-Jordan inversion of the basis with partial pivoting.
    void refactor() {
        since_refactor_ = 0;
        std::vector<double> a(m_ * m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& c = cols_[basis_[i]];
            for (std::size_t t = 0; t < c.idx.size(); ++t) a[c.idx[t] * m_ + i] = c.val[t];
        }
        binv_.assign(m_ * m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
        for (std::size_t col = 0; col < m_; ++col) {
            std::size_t p = col;
            double best = std::abs(a[col * m_ + col]);
            for (std::size_t i = col + 1; i < m_; ++i)
                if (std::abs(a[i * m_ + col]) > best) {
                    best = std::abs(a[i * m_ + col]);
                    p = i;
                }
            if (best < 1e-14) throw SolverError("singular basis during refactorization");
            if (p != col)
                for (std::size_t k = 0; k < m_; ++k) {
                    std::swap(a[p * m_ + k], a[col * m_ + k]);
                    std::swap(binv_[p * m_ + k], binv_[col * m_ + k]);
                }
            double inv = 1.0 / a[col * m_ + col];
            for (std::size_t k = 0; k < m_; ++k) {
                a[col * m_ + k] *= inv;
                binv_[col * m_ + k] *= inv;
            }
            for (std::size_t i = 0; i < m_; ++i) {
                if (i == col) continue;
                double f = a[i * m_ + col];
                if (f == 0.0) continue;
                for (std::size_t k = 0; k < m_; ++k) {
                    a[i * m_ + k] -= f * a[col * m_ + k];
                    binv_[i * m_ + k] -= f * binv_[col * m_ + k];
                }
            }
        }
        x_.assign(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < m_; ++k) s += binv_[i * m_ + k] * b_[k];
            x_[i] = (s < 0.0 && s > -opt_.feasibility_tol) ? 0.0 : s;
        }
    }

    std::size_t m_;
    std::vector<Column> cols_;
    std::vector<double> b_;
    std::vector<std::size_t> basis_;
    std::vector<long> in_basis_;
    std::size_t first_art_;
    SolveOptions opt_;
    std::vector<double> binv_;
    std::vector<double> x_;
    std::vector<double> cost_;
    std::size_t iterations_ = 0;
    std::size_t local_iters_ = 0;
    std::size_t since_refactor_ = 0;
    std::size_t breakdown_resets_ = 0;
};

inline Solution solve_direct(const LinearProgram& lp, const SolveOptions& opt) {
    const std::size_t m = lp.rows.size();
    const std::size_t nv = lp.num_vars();
    Solution sol;
    sol.primal.assign(nv, 0.0);
    sol.dual.assign(m, 0.0);

    std::vector<double> scale(m, 1.0), sign(m, 1.0), b(m);
    std::vector<Relation> rel(m);
    for (std::size_t i = 0; i < m; ++i) {
        double mx = 0.0;
        for (const auto& t : lp.rows[i].terms) mx = std::max(mx, std::abs(t.value));
        if (mx > 0.0) scale[i] = 1.0 / mx;
        b[i] = lp.rows[i].rhs * scale[i];
        rel[i] = lp.rows[i].rel;
        if (b[i] < 0.0) {
            sign[i] = -1.0;
            b[i] = -b[i];
            if (rel[i] == Relation::le)
                rel[i] = Relation::ge;
            else if (rel[i] == Relation::ge)
                rel[i] = Relation::le;
        }
    }

    // Structural columns (free variables split into a +/- pair), then slacks, then artificials.
    std::vector<Simplex::Column> cols;
    std::vector<double> cost;
    std::vector<std::size_t> pos_col(nv), neg_col(nv, SIZE_MAX);
    const double obj_sign = lp.sense == Sense::maximize ? -1.0 : 1.0;
    std::vector<Simplex::Column> by_var(nv);
    for (std::size_t i = 0; i < m; ++i)
        for (const auto& t : lp.rows[i].terms) {
            if (t.value == 0.0) continue;
            by_var[t.index].idx.push_back(i);
            by_var[t.index].val.push_back(t.value * scale[i] * sign[i]);
        }
    for (std::size_t j = 0; j < nv; ++j) {
        pos_col[j] = cols.size();
        cols.push_back(by_var[j]);
        cost.push_back(obj_sign * lp.objective[j]);
        if (lp.bounds[j] == Bound::free) {
            neg_col[j] = cols.size();
            Simplex::Column c = by_var[j];
            for (double& v : c.val) v = -v;
            cols.push_back(std::move(c));
            cost.push_back(-obj_sign * lp.objective[j]);
        }
    }
    std::vector<std::size_t> basis(m, SIZE_MAX);
    for (std::size_t i = 0; i < m; ++i) {
        if (rel[i] == Relation::eq) continue;
        double s = rel[i] == Relation::le ? 1.0 : -1.0;
        if (s > 0) basis[i] = cols.size();
        cols.push_back(Simplex::Column{{i}, {s}});
        cost.push_back(0.0);
    }
    const std::size_t first_art = cols.size();
    std::vector<double> phase1(cols.size(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] != SIZE_MAX) continue;
        basis[i] = cols.size();
        cols.push_back(Simplex::Column{{i}, {1.0}});
        cost.push_back(0.0);
        phase1.push_back(1.0);
    }
    phase1.resize(cols.size(), 0.0);

    if (m == 0) {
        // Only sign restrictions: optimal at zero unless some direction improves.
        for (std::size_t j = 0; j < nv; ++j) {
            double c = obj_sign * lp.objective[j];
            if (c < 0.0 || (lp.bounds[j] == Bound::free && c != 0.0)) {
                sol.status = Status::unbounded;
                return sol;
            }
        }
        sol.status = Status::optimal;
        return sol;
    }

    Simplex spx(m, std::move(cols), b, std::move(basis), first_art, opt);
    if (first_art < phase1.size()) {
        spx.run(phase1, false);
        double bnorm = 0.0;
        for (double v : b) bnorm = std::max(bnorm, v);
        if (spx.value(phase1) > opt.feasibility_tol * (1.0 + bnorm)) {
            sol.status = Status::infeasible;
            sol.iterations = spx.iterations();
            return sol;
        }
        spx.expel_artificials();
    }
    auto outcome = spx.run(cost, true);
    sol.iterations = spx.iterations();
    if (outcome == Simplex::Outcome::unbounded) {
        sol.status = Status::unbounded;
        return sol;
    }
    sol.status = Status::optimal;
    auto x = spx.solution();
    for (std::size_t j = 0; j < nv; ++j) {
        sol.primal[j] = x[pos_col[j]];
        if (neg_col[j] != SIZE_MAX) sol.primal[j] -= x[neg_col[j]];
    }
    auto y = spx.duals(cost);
    for (std::size_t i = 0; i < m; ++i) sol.dual[i] = obj_sign * y[i] * sign[i] * scale[i];
    sol.objective = 0.0;
    for (std::size_t j = 0; j < nv; ++j) sol.objective += lp.objective[j] * sol.primal[j];
    return sol;
}

}  // namespace detail

// Mechanical dual.  Dual variable i belongs to row i; when its sign is forced
// nonpositive it is stored negated (and negated[i] is set).
struct DualProgram {
    LinearProgram lp;
    std::vector<bool> negated;
};

inline DualProgram dual_program(const LinearProgram& lp) {
    DualProgram d;
    const bool max = lp.sense == Sense::maximize;
    d.lp.sense = max ? Sense::minimize : Sense::maximize;
    const std::size_t m = lp.rows.size();
    d.negated.assign(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        Relation r = lp.rows[i].rel;
        bool neg = max ? r == Relation::ge : r == Relation::le;
        d.negated[i] = neg;
        double s = neg ? -1.0 : 1.0;
        d.lp.add_variable(s * lp.rows[i].rhs, r == Relation::eq ? Bound::free : Bound::nonnegative);
    }
    std::vector<std::vector<Term>> cols(lp.num_vars());
    for (std::size_t i = 0; i < m; ++i)
        for (const auto& t : lp.rows[i].terms)
            cols[t.index].push_back(Term{i, d.negated[i] ? -t.value : t.value});
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        Relation r = lp.bounds[j] == Bound::free ? Relation::eq : (max ? Relation::ge : Relation::le);
        d.lp.add_row(std::move(cols[j]), r, lp.objective[j]);
    }
    return d;
}

inline LinearProgram dual_of(const LinearProgram& lp) { return dual_program(lp).lp; }

inline Solution solve(const LinearProgram& lp, const SolveOptions& opt = {});

namespace detail {

inline Solution solve_through_dual(const LinearProgram& lp, const SolveOptions& opt) {
    DualProgram d = dual_program(lp);
    SolveOptions inner = opt;
    inner.route = SolveOptions::Route::direct;
    Solution ds = solve_direct(d.lp, inner);
    if (ds.status != Status::optimal) return solve_direct(lp, inner);
    Solution s;
    s.status = Status::optimal;
    s.iterations = ds.iterations;
    s.primal = ds.dual;
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
        if (lp.bounds[j] == Bound::nonnegative) s.primal[j] = std::max(s.primal[j], 0.0);
    s.dual.resize(lp.rows.size());
    for (std::size_t i = 0; i < lp.rows.size(); ++i)
        s.dual[i] = d.negated[i] ? -ds.primal[i] : ds.primal[i];
    s.objective = 0.0;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) s.objective += lp.objective[j] * s.primal[j];
    return s;
}

}  // namespace detail

inline Solution solve(const LinearProgram& lp, const SolveOptions& opt) {
    lp.check();
    using Route = SolveOptions::Route;
    Route route = opt.route;
    if (route == Route::automatic) {
        std::size_t cols = 0;
        for (auto b : lp.bounds) cols += b == Bound::free ? 2 : 1;
        route = lp.rows.size() > 2 * cols ? Route::through_dual : Route::direct;
    }
    return route == Route::through_dual ? detail::solve_through_dual(lp, opt)
                                        : detail::solve_direct(lp, opt);
}

struct PointReport {
    bool feasible = true;
    double objective = 0.0;
    double max_violation = 0.0;
    std::size_t worst_row = SIZE_MAX;           // SIZE_MAX when the worst item is a bound
    std::vector<double> row_slack;              // >= 0 when the row holds
    std::vector<std::size_t> violated_rows;
    std::vector<std::size_t> binding_rows;
    std::vector<std::size_t> violated_bounds;
};

inline PointReport check_point(const LinearProgram& lp, const std::vector<double>& x, double tol) {
    if (x.size() != lp.num_vars()) throw std::invalid_argument("point has wrong dimension");
    PointReport rep;
    for (std::size_t j = 0; j < x.size(); ++j) {
        rep.objective += lp.objective[j] * x[j];
        if (lp.bounds[j] == Bound::nonnegative && x[j] < -tol) {
            rep.violated_bounds.push_back(j);
            if (-x[j] > rep.max_violation) {
                rep.max_violation = -x[j];
                rep.worst_row = SIZE_MAX;
            }
        }
    }
    rep.row_slack.resize(lp.rows.size());
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        const auto& r = lp.rows[i];
        double lhs = 0.0;
        for (const auto& t : r.terms) lhs += t.value * x[t.index];
        double s = r.rel == Relation::le ? r.rhs - lhs
                 : r.rel == Relation::ge ? lhs - r.rhs
                                         : -std::abs(lhs - r.rhs);
        rep.row_slack[i] = s;
        if (s < -tol) {
            rep.violated_rows.push_back(i);
            if (-s > rep.max_violation) {
                rep.max_violation = -s;
                rep.worst_row = i;
            }
        } else if (s <= tol) {
            rep.binding_rows.push_back(i);
        }
    }
    rep.feasible = rep.violated_rows.empty() && rep.violated_bounds.empty();
    return rep;
}

// Fixed-format text dump, one constraint per line.
inline void dump(const LinearProgram& lp, std::ostream& os) {
    os.precision(17);
    os << (lp.sense == Sense::maximize ? "MAXIMIZE" : "MINIMIZE") << ' ' << lp.num_vars() << ' '
       << lp.rows.size() << '\n';
    os << "OBJ";
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
        if (lp.objective[j] != 0.0) os << ' ' << j << ':' << lp.objective[j];
    os << '\n';
    os << "FREE";
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
        if (lp.bounds[j] == Bound::free) os << ' ' << j;
    os << '\n';
    for (const auto& r : lp.rows) {
        os << (r.rel == Relation::le ? "LE" : r.rel == Relation::ge ? "GE" : "EQ") << ' ' << r.rhs;
        for (const auto& t : r.terms) os << ' ' << t.index << ':' << t.value;
        os << '\n';
    }
}

inline const char* to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
    }
    return "unknown";
}

}  // namespace amerbound::lp
