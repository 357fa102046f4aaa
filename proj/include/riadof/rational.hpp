// SPDX-License-Identifier: Apache-2.0
//
// Exact rational numbers backed by GMP.

#pragma once

#include <gmpxx.h>

#include <compare>
#include <concepts>
#include <cstdint>
#include <ostream>
#include <string>

namespace riadof {

// Fraction in lowest terms with a positive denominator. Every operation is exact.
class Rational {
public:
    Rational() = default;

    template <std::integral I>
    Rational(I value) : q_(static_cast<long>(value)) {}

    Rational(long numerator, long denominator);

    static Rational from_mpq(const mpq_class& q);

    // Accepts "p", "-p", "p/q".
    static Rational parse(const std::string& text);

    mpz_class numerator() const { return q_.get_num(); }
    mpz_class denominator() const { return q_.get_den(); }
    const mpq_class& raw() const { return q_; }

    bool is_integer() const { return q_.get_den() == 1; }
    int sign() const { return sgn(q_); }

    mpz_class floor() const;
    mpz_class ceil() const;

    // Throws std::overflow_error unless the value is an integer that fits in int64.
    std::int64_t to_int64() const;

    double to_double() const { return q_.get_d(); }

    // "p/q", or "p" for integers.
    std::string str() const;

    Rational& operator+=(const Rational& o);
    Rational& operator-=(const Rational& o);
    Rational& operator*=(const Rational& o);
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a);

    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.q_, b.q_) == 0; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b)
    {
        const int c = cmp(a.q_, b.q_);
        return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    mpq_class q_{0};
};

Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);
Rational abs(const Rational& a);

// Binomial coefficient C(n, k); zero when k < 0 or k > n.
Rational binomial(long n, long k);

// Decimal rendering with the given number of significant digits, locale independent.
std::string to_decimal(const Rational& r, int significant_digits = 12);

} // namespace riadof
