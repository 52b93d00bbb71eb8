#ifndef NJGEOM_SIMPLEX_HPP
#define NJGEOM_SIMPLEX_HPP

#include "njgeom/matrix.hpp"
#include "njgeom/scalar.hpp"

#include <optional>
#include <vector>

namespace njgeom {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    std::vector<Rational> x;
    Rational objective;
};

/// Exact two-phase tableau simplex for  min c.x  s.t.  A x = b, x >= 0.
/// Bland's rule on both entering and leaving choices, so it cannot cycle.
class ExactSimplex {
public:
    ExactSimplex(DenseMatrix<Rational> a, std::vector<Rational> b, std::vector<Rational> c)
        : rows_(a.rows()), vars_(a.cols()), c_(std::move(c)) {
        // tableau columns: vars_ structural, rows_ artificial, then rhs
        tab_ = DenseMatrix<Rational>(rows_, vars_ + rows_ + 1);
        for (std::size_t r = 0; r < rows_; ++r) {
            const bool flip = b[r] < 0;
            for (std::size_t j = 0; j < vars_; ++j) tab_(r, j) = flip ? Rational(-a(r, j)) : a(r, j);
            tab_(r, vars_ + r) = 1;
            tab_(r, rhs()) = flip ? Rational(-b[r]) : b[r];
        }
        basis_.resize(rows_);
        for (std::size_t r = 0; r < rows_; ++r) basis_[r] = vars_ + r;
        active_row_.assign(rows_, true);
    }

    LpResult solve(bool feasibility_only = false) {
        LpResult out;
        // phase 1: minimize the sum of artificials
        std::vector<Rational> phase1(vars_ + rows_, 0);
        for (std::size_t r = 0; r < rows_; ++r) phase1[vars_ + r] = 1;
        run(phase1, vars_ + rows_);
        Rational infeas = 0;
        for (std::size_t r = 0; r < rows_; ++r)
            if (active_row_[r] && basis_[r] >= vars_) infeas += tab_(r, rhs());
        if (sgn(infeas) > 0) {
            out.status = LpStatus::infeasible;
            return out;
        }
        drive_out_artificials();
        if (!feasibility_only) {
            std::vector<Rational> cost(vars_ + rows_, 0);
            for (std::size_t j = 0; j < vars_; ++j) cost[j] = c_[j];
            if (!run(cost, vars_)) {
                out.status = LpStatus::unbounded;
                return out;
            }
        }
        out.status = LpStatus::optimal;
        out.x.assign(vars_, 0);
        for (std::size_t r = 0; r < rows_; ++r)
            if (active_row_[r] && basis_[r] < vars_) out.x[basis_[r]] = tab_(r, rhs());
        out.objective = 0;
        if (!c_.empty())
            for (std::size_t j = 0; j < vars_; ++j) out.objective += c_[j] * out.x[j];
        return out;
    }

private:
    std::size_t rhs() const { return vars_ + rows_; }

    /// Simplex iterations with the given cost over columns [0, allowed). False if unbounded.
    bool run(const std::vector<Rational>& cost, std::size_t allowed) {
        for (;;) {
            // reduced cost of column j: cost_j - sum_r cost_{basis_r} tab(r,j)
            std::size_t enter = allowed;
            for (std::size_t j = 0; j < allowed; ++j) {
                if (is_basic(j)) continue;
                Rational rc = cost[j];
                for (std::size_t r = 0; r < rows_; ++r)
                    if (active_row_[r] && sgn(tab_(r, j)) != 0) rc -= cost[basis_[r]] * tab_(r, j);
                if (sgn(rc) < 0) {
                    enter = j;
                    break;
                }
            }
            if (enter == allowed) return true;
            std::size_t leave = rows_;
            Rational best_ratio;
            for (std::size_t r = 0; r < rows_; ++r) {
                if (!active_row_[r] || sgn(tab_(r, enter)) <= 0) continue;
                Rational ratio = tab_(r, rhs()) / tab_(r, enter);
                if (leave == rows_ || ratio < best_ratio || (ratio == best_ratio && basis_[r] < basis_[leave])) {
                    leave = r;
                    best_ratio = ratio;
                }
            }
            if (leave == rows_) return false;
            pivot(leave, enter);
        }
    }

    bool is_basic(std::size_t j) const {
        for (std::size_t r = 0; r < rows_; ++r)
            if (active_row_[r] && basis_[r] == j) return true;
        return false;
    }

    void pivot(std::size_t row, std::size_t col) {
        const Rational inv = 1 / tab_(row, col);
        for (std::size_t j = 0; j <= rhs(); ++j) tab_(row, j) *= inv;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == row || !active_row_[r] || sgn(tab_(r, col)) == 0) continue;
            const Rational f = tab_(r, col);
            for (std::size_t j = 0; j <= rhs(); ++j)
                if (sgn(tab_(row, j)) != 0) tab_(r, j) -= f * tab_(row, j);
        }
        basis_[row] = col;
    }

    void drive_out_artificials() {
        for (std::size_t r = 0; r < rows_; ++r) {
            if (!active_row_[r] || basis_[r] < vars_) continue;
            std::size_t col = vars_;
            for (std::size_t j = 0; j < vars_; ++j)
                if (!is_basic(j) && sgn(tab_(r, j)) != 0) {
                    col = j;
                    break;
                }
            if (col == vars_) active_row_[r] = false;  // redundant equality
            else pivot(r, col);
        }
    }

    std::size_t rows_;
    std::size_t vars_;
    std::vector<Rational> c_;
    DenseMatrix<Rational> tab_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_row_;
};

/// Returns lambda >= 0 with sum_j lambda_j columns[j] = target, if one exists.
inline std::optional<std::vector<Rational>> nonnegative_combination(const std::vector<std::vector<Rational>>& columns,
                                                                    const std::vector<Rational>& target) {
    const std::size_t dim = target.size();
    DenseMatrix<Rational> a(dim, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j)
        for (std::size_t i = 0; i < dim; ++i) a(i, j) = columns[j][i];
    ExactSimplex lp(std::move(a), target, {});
    auto res = lp.solve(true);
    if (res.status != LpStatus::optimal) return std::nullopt;
    return res.x;
}

}  // namespace njgeom

#endif  // NJGEOM_SIMPLEX_HPP
