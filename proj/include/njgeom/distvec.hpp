#ifndef NJGEOM_DISTVEC_HPP
#define NJGEOM_DISTVEC_HPP

#include "njgeom/matrix.hpp"
#include "njgeom/scalar.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace njgeom {

/// Number of unordered taxon pairs, i.e. the length of a flattened dissimilarity vector.
constexpr std::size_t pair_count(int n) {
    return n < 2 ? 0 : static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
}

/// Row-wise flattened index of the pair {a,b}: for a > b the index is a(a-1)/2 + b.
/// Accepts the two labels in either order.
inline std::size_t pair_to_index(int a, int b, int n) {
    if (a < 0 || b < 0 || a >= n || b >= n)
        throw std::out_of_range("pair_to_index: taxon label out of range for n=" + std::to_string(n));
    if (a == b) throw std::invalid_argument("pair_to_index: a pair needs two distinct taxa");
    if (a < b) std::swap(a, b);
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(a - 1) / 2 + static_cast<std::size_t>(b);
}

/// Inverse of pair_to_index; returns (a,b) with a > b.
inline std::pair<int, int> index_to_pair(std::size_t i, int n) {
    if (i >= pair_count(n)) throw std::out_of_range("index_to_pair: index out of range for n=" + std::to_string(n));
    auto a = static_cast<int>(std::floor(0.5 + std::sqrt(0.25 + 2.0 * static_cast<double>(i))));
    // guard the floating-point floor against rounding at perfect squares
    while (static_cast<std::size_t>(a) * static_cast<std::size_t>(a - 1) / 2 > i) --a;
    while (static_cast<std::size_t>(a + 1) * static_cast<std::size_t>(a) / 2 <= i) ++a;
    const int b = static_cast<int>(i - static_cast<std::size_t>(a) * static_cast<std::size_t>(a - 1) / 2);
    return {a, b};
}

/// Symmetric zero-diagonal distance matrix on n taxa stored as its row-wise lower triangle.
template <class T>
class DissimilarityVector {
public:
    DissimilarityVector() = default;

    explicit DissimilarityVector(int n) : n_(n), entries_(pair_count(n), from_int<T>(0)) { check_n(n); }

    DissimilarityVector(int n, std::vector<T> entries) : n_(n), entries_(std::move(entries)) {
        check_n(n);
        if (entries_.size() != pair_count(n))
            throw std::invalid_argument("DissimilarityVector: expected " + std::to_string(pair_count(n)) +
                                        " entries for n=" + std::to_string(n) + ", got " +
                                        std::to_string(entries_.size()));
    }

    int taxa() const { return n_; }
    std::size_t size() const { return entries_.size(); }

    const T& operator[](std::size_t i) const { return entries_[i]; }
    T& operator[](std::size_t i) { return entries_[i]; }

    const T& operator()(int a, int b) const { return entries_[pair_to_index(a, b, n_)]; }
    T& operator()(int a, int b) { return entries_[pair_to_index(a, b, n_)]; }

    /// Distance with d(a,a) = 0.
    T at(int a, int b) const { return a == b ? from_int<T>(0) : (*this)(a, b); }

    const std::vector<T>& entries() const { return entries_; }

    DissimilarityVector& operator+=(const DissimilarityVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
        return *this;
    }
    DissimilarityVector& operator-=(const DissimilarityVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
        return *this;
    }
    DissimilarityVector& operator*=(const T& s) {
        for (auto& e : entries_) e *= s;
        return *this;
    }

    friend DissimilarityVector operator+(DissimilarityVector a, const DissimilarityVector& b) { return a += b; }
    friend DissimilarityVector operator-(DissimilarityVector a, const DissimilarityVector& b) { return a -= b; }
    friend DissimilarityVector operator*(const T& s, DissimilarityVector a) { return a *= s; }
    friend DissimilarityVector operator-(DissimilarityVector a) {
        for (auto& e : a.entries_) e = -e;
        return a;
    }

    friend bool operator==(const DissimilarityVector& a, const DissimilarityVector& b) {
        return a.n_ == b.n_ && a.entries_ == b.entries_;
    }

private:
    static void check_n(int n) {
        if (n < 3) throw std::invalid_argument("DissimilarityVector: need at least 3 taxa, got " + std::to_string(n));
    }
    void check_same(const DissimilarityVector& o) const {
        if (o.n_ != n_) throw std::invalid_argument("DissimilarityVector: taxon count mismatch");
    }

    int n_ = 0;
    std::vector<T> entries_;
};

template <class To, class From>
DissimilarityVector<To> convert(const DissimilarityVector<From>& d) {
    std::vector<To> e;
    e.reserve(d.size());
    for (const auto& x : d.entries()) {
        if constexpr (std::is_same_v<From, Rational> && std::is_same_v<To, double>) {
            e.push_back(x.get_d());
        } else {
            e.push_back(To(x));
        }
    }
    return DissimilarityVector<To>(d.taxa(), std::move(e));
}

/// The tree metric in which leaf `apex` sits at distance 1 from every other leaf
/// and all other distances vanish.
template <class T = Rational>
DissimilarityVector<T> shift_vector(int apex, int n) {
    if (apex < 0 || apex >= n) throw std::out_of_range("shift_vector: apex out of range");
    DissimilarityVector<T> s(n);
    for (int k = 0; k < n; ++k) {
        if (k != apex) s(apex, k) = from_int<T>(1);
    }
    return s;
}

/// A bijection on {0..n-1}; image(i) is where taxon i is sent.
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<int> image) : image_(std::move(image)) {
        std::vector<bool> seen(image_.size(), false);
        for (int v : image_) {
            if (v < 0 || static_cast<std::size_t>(v) >= image_.size() || seen[static_cast<std::size_t>(v)])
                throw std::invalid_argument("Permutation: not a bijection on {0.." +
                                            std::to_string(image_.size() - 1) + "}");
            seen[static_cast<std::size_t>(v)] = true;
        }
    }

    static Permutation identity(int n) {
        std::vector<int> img(static_cast<std::size_t>(n));
        std::iota(img.begin(), img.end(), 0);
        return Permutation(std::move(img));
    }

    /// Cycle notation helper: cycle({0,1,2}) sends 0->1->2->0.
    static Permutation cycle(int n, const std::vector<int>& c) {
        std::vector<int> img(static_cast<std::size_t>(n));
        std::iota(img.begin(), img.end(), 0);
        for (std::size_t k = 0; k < c.size(); ++k) img[static_cast<std::size_t>(c[k])] = c[(k + 1) % c.size()];
        return Permutation(std::move(img));
    }

    int size() const { return static_cast<int>(image_.size()); }
    int operator()(int i) const { return image_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& images() const { return image_; }

    Permutation inverse() const {
        std::vector<int> inv(image_.size());
        for (std::size_t i = 0; i < image_.size(); ++i) inv[static_cast<std::size_t>(image_[i])] = static_cast<int>(i);
        return Permutation(std::move(inv));
    }

    /// (a * b)(i) = a(b(i)).
    friend Permutation operator*(const Permutation& a, const Permutation& b) {
        if (a.size() != b.size()) throw std::invalid_argument("Permutation: size mismatch in composition");
        std::vector<int> img(b.image_.size());
        for (std::size_t i = 0; i < img.size(); ++i) img[i] = a(b(static_cast<int>(i)));
        return Permutation(std::move(img));
    }

    friend bool operator==(const Permutation&, const Permutation&) = default;
    friend auto operator<=>(const Permutation&, const Permutation&) = default;

private:
    std::vector<int> image_;
};

/// Index map of the permutation action on pair indices: entry i is the index of {σ(a),σ(b)}.
inline std::vector<std::size_t> pair_index_map(const Permutation& sigma) {
    const int n = sigma.size();
    std::vector<std::size_t> map(pair_count(n));
    for (std::size_t i = 0; i < map.size(); ++i) {
        auto [a, b] = index_to_pair(i, n);
        map[i] = pair_to_index(sigma(a), sigma(b), n);
    }
    return map;
}

/// Relabels taxa: the output entry at {σ(a),σ(b)} is the input entry at {a,b}.
template <class Vec>
Vec permute_entries(const Permutation& sigma, const Vec& v) {
    const auto map = pair_index_map(sigma);
    if (map.size() != v.size()) throw std::invalid_argument("apply_permutation: dimension mismatch");
    Vec out(v);
    for (std::size_t i = 0; i < map.size(); ++i) out[map[i]] = v[i];
    return out;
}

template <class T>
DissimilarityVector<T> apply_permutation(const Permutation& sigma, const DissimilarityVector<T>& d) {
    if (sigma.size() != d.taxa()) throw std::invalid_argument("apply_permutation: permutation size differs from n");
    return DissimilarityVector<T>(d.taxa(), permute_entries(sigma, d.entries()));
}

/// w_{ab,cd}: +1 on pairs ab and cd, -1 on pairs ac and bd, zero elsewhere (five taxa).
inline DissimilarityVector<Rational> w_vector(int a, int b, int c, int d) {
    DissimilarityVector<Rational> w(5);
    w(a, b) = 1;
    w(c, d) = 1;
    w(a, c) = -1;
    w(b, d) = -1;
    return w;
}

using WBasis = std::array<DissimilarityVector<Rational>, 5>;

/// The basis w_{01,34}, w_{12,40}, w_{23,01}, w_{34,12}, w_{40,23} of the orthogonal
/// complement of the shift space for five taxa.
inline WBasis w_basis() {
    return {w_vector(0, 1, 3, 4), w_vector(1, 2, 4, 0), w_vector(2, 3, 0, 1), w_vector(3, 4, 1, 2),
            w_vector(4, 0, 2, 3)};
}

template <class T>
T inner(const DissimilarityVector<T>& x, const DissimilarityVector<T>& y) {
    T acc = from_int<T>(0);
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}


/// Matrix of σ acting on span(w_1..w_5): column j holds the w-coordinates of σ·w_j.
inline DenseMatrix<Rational> w_basis_action(const Permutation& sigma) {
    if (sigma.size() != 5) throw std::invalid_argument("w_basis_action: five taxa only");
    const WBasis w = w_basis();
    DenseMatrix<Rational> basis(10, 5);
    for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t i = 0; i < 10; ++i) basis(i, j) = w[j][i];
    DenseMatrix<Rational> action(5, 5);
    for (std::size_t j = 0; j < 5; ++j) {
        const auto image = apply_permutation(sigma, w[j]);
        const auto coords = solve(basis, image.entries());
        if (!coords) throw std::logic_error("w_basis_action: image left the span of the w-basis");
        for (std::size_t i = 0; i < 5; ++i) action(i, j) = (*coords)[i];
    }
    return action;
}

}  // namespace njgeom

#endif  // NJGEOM_DISTVEC_HPP
