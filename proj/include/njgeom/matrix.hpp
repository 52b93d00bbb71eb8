#ifndef NJGEOM_MATRIX_HPP
#define NJGEOM_MATRIX_HPP

#include "njgeom/scalar.hpp"

#include <cassert>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace njgeom {

/// Small row-major dense matrix. Used for the exact operators (A, R, cumulative maps)
/// and for exact elimination in the polytope code.
template <class T>
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, from_int<T>(0)) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = from_int<T>(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<T> row(std::size_t r) const {
        return std::vector<T>(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                              data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
    }

    DenseMatrix transposed() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

template <class T>
DenseMatrix<T> operator*(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: dimension mismatch");
    DenseMatrix<T> c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const T& aik = a(i, k);
            if (aik == 0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

template <class T>
std::vector<T> operator*(const DenseMatrix<T>& a, const std::vector<T>& x) {
    if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector product: dimension mismatch");
    std::vector<T> y(a.rows(), from_int<T>(0));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        T acc = from_int<T>(0);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (a(i, j) != 0) acc += a(i, j) * x[j];
        }
        y[i] = acc;
    }
    return y;
}

template <class To, class From>
DenseMatrix<To> matrix_cast(const DenseMatrix<From>& m) {
    DenseMatrix<To> out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if constexpr (std::is_same_v<From, std::int64_t>) {
                out(r, c) = from_int<To>(m(r, c));
            } else if constexpr (std::is_same_v<From, Rational> && std::is_same_v<To, double>) {
                out(r, c) = m(r, c).get_d();
            } else {
                out(r, c) = static_cast<To>(m(r, c));
            }
        }
    return out;
}

/// Reduced row echelon form computed in place by Gauss-Jordan elimination.
/// Returns the pivot columns. For floating scalars entries with |x| <= tol count as zero.
template <class T>
std::vector<std::size_t> reduce_to_rref(DenseMatrix<T>& m, double tol = 1e-12) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t best = m.rows();
        if constexpr (is_exact_v<T>) {
            for (std::size_t i = r; i < m.rows(); ++i) {
                if (sgn(m(i, c)) != 0) {
                    best = i;
                    break;
                }
            }
        } else {
            double mag = tol;
            for (std::size_t i = r; i < m.rows(); ++i) {
                if (std::abs(m(i, c)) > mag) {
                    mag = std::abs(m(i, c));
                    best = i;
                }
            }
        }
        if (best == m.rows()) continue;
        if (best != r) {
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(r, j), m(best, j));
        }
        T inv = from_int<T>(1) / m(r, c);
        for (std::size_t j = c; j < m.cols(); ++j) m(r, j) *= inv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == r || sign_with_tolerance(m(i, c), 0.0) == 0) continue;
            T f = m(i, c);
            for (std::size_t j = c; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

template <class T>
std::size_t rank(DenseMatrix<T> m, double tol = 1e-12) {
    return reduce_to_rref(m, tol).size();
}

/// Basis of {x : M x = 0}.
template <class T>
std::vector<std::vector<T>> nullspace(DenseMatrix<T> m, double tol = 1e-12) {
    const auto pivots = reduce_to_rref(m, tol);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<std::vector<T>> basis;
    for (std::size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free]) continue;
        std::vector<T> v(m.cols(), from_int<T>(0));
        v[free] = from_int<T>(1);
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m(r, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Solves M x = b; returns nullopt if inconsistent. Picks the solution with free variables zero.
template <class T>
std::optional<std::vector<T>> solve(const DenseMatrix<T>& m, const std::vector<T>& b, double tol = 1e-12) {
    DenseMatrix<T> aug(m.rows(), m.cols() + 1);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) aug(r, c) = m(r, c);
        aug(r, m.cols()) = b[r];
    }
    const auto pivots = reduce_to_rref(aug, tol);
    if (!pivots.empty() && pivots.back() == m.cols()) return std::nullopt;
    std::vector<T> x(m.cols(), from_int<T>(0));
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug(r, m.cols());
    return x;
}

/// Rows given as vectors stacked into a matrix.
template <class T>
DenseMatrix<T> from_rows(const std::vector<std::vector<T>>& rows, std::size_t cols) {
    DenseMatrix<T> m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        assert(rows[r].size() == cols);
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
    }
    return m;
}

}  // namespace njgeom

#endif  // NJGEOM_MATRIX_HPP
