#ifndef NJGEOM_SCALAR_HPP
#define NJGEOM_SCALAR_HPP

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <type_traits>
#include <vector>

namespace njgeom {

using Rational = mpq_class;
using IntVector = std::vector<std::int64_t>;

/// Exact scalars compare without tolerance; floating scalars use an absolute one.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    static double to_double(double x) { return x; }
};

template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static double to_double(const Rational& x) { return x.get_d(); }
};

template <class T>
inline constexpr bool is_exact_v = ScalarTraits<T>::exact;

/// Sign of x with |x| <= tol treated as zero (tol ignored for exact scalars).
template <class T>
int sign_with_tolerance(const T& x, double tol) {
    if constexpr (is_exact_v<T>) {
        (void)tol;
        return sgn(x);
    } else {
        if (std::abs(x) <= tol) return 0;
        return x > 0 ? 1 : -1;
    }
}

template <class T>
T from_int(std::int64_t v) {
    if constexpr (std::is_same_v<T, Rational>) {
        return Rational(static_cast<long>(v));
    } else {
        return static_cast<T>(v);
    }
}

template <class T>
double to_double(const T& x) {
    return ScalarTraits<T>::to_double(x);
}

template <class T>
std::string to_string(const T& x) {
    if constexpr (std::is_same_v<T, Rational>) {
        return x.get_str();
    } else {
        return std::to_string(x);
    }
}

/// Dot product of an integer normal with a scalar vector.
template <class T>
T dot(const IntVector& h, const std::vector<T>& x) {
    T acc = from_int<T>(0);
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] != 0) acc += from_int<T>(h[i]) * x[i];
    }
    return acc;
}

/// Scales a rational vector to coprime integers, preserving direction.
inline IntVector to_primitive_integer(const std::vector<Rational>& v) {
    mpz_class lcm_den = 1;
    for (const auto& x : v) {
        if (sgn(x) != 0) mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), x.get_den_mpz_t());
    }
    std::vector<mpz_class> ints;
    ints.reserve(v.size());
    mpz_class g = 0;
    for (const auto& x : v) {
        mpz_class k = x.get_num() * (lcm_den / x.get_den());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), k.get_mpz_t());
        ints.push_back(k);
    }
    IntVector out(v.size(), 0);
    if (g == 0) return out;
    for (std::size_t i = 0; i < ints.size(); ++i) {
        mpz_class q = ints[i] / g;
        out[i] = q.get_si();
    }
    return out;
}

inline IntVector to_primitive_integer(IntVector v) {
    std::int64_t g = 0;
    for (auto x : v) g = std::gcd(g, x < 0 ? -x : x);
    if (g > 1) {
        for (auto& x : v) x /= g;
    }
    return v;
}

inline bool is_zero(const IntVector& v) {
    for (auto x : v) {
        if (x != 0) return false;
    }
    return true;
}

}  // namespace njgeom

#endif  // NJGEOM_SCALAR_HPP
