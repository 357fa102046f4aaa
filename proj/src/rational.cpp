// SPDX-License-Identifier: Apache-2.0

#include "riadof/rational.hpp"

#include <stdexcept>

namespace riadof {

Rational::Rational(long numerator, long denominator)
{
    if (denominator == 0)
        throw std::domain_error("Rational: zero denominator");
    q_ = mpq_class(numerator, denominator);
    q_.canonicalize();
}

Rational Rational::from_mpq(const mpq_class& q)
{
    if (q.get_den() == 0)
        throw std::domain_error("Rational: zero denominator");
    Rational r;
    r.q_ = q;
    r.q_.canonicalize();
    return r;
}

Rational Rational::parse(const std::string& text)
{
    const auto slash = text.find('/');
    mpz_class num, den = 1;
    if (num.set_str(text.substr(0, slash), 10) != 0)
        throw std::invalid_argument("Rational: cannot parse '" + text + "'");
    if (slash != std::string::npos && den.set_str(text.substr(slash + 1), 10) != 0)
        throw std::invalid_argument("Rational: cannot parse '" + text + "'");
    if (den == 0)
        throw std::domain_error("Rational: zero denominator");
    return from_mpq(mpq_class(num, den));
}

mpz_class Rational::floor() const
{
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
    return f;
}

mpz_class Rational::ceil() const
{
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
    return c;
}

std::int64_t Rational::to_int64() const
{
    if (!is_integer() || !q_.get_num().fits_slong_p())
        throw std::overflow_error("Rational: " + str() + " is not a 64-bit integer");
    return static_cast<std::int64_t>(q_.get_num().get_si());
}

std::string Rational::str() const
{
    if (is_integer())
        return q_.get_num().get_str();
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

Rational& Rational::operator+=(const Rational& o)
{
    q_ += o.q_;
    return *this;
}

Rational& Rational::operator-=(const Rational& o)
{
    q_ -= o.q_;
    return *this;
}

Rational& Rational::operator*=(const Rational& o)
{
    q_ *= o.q_;
    return *this;
}

Rational& Rational::operator/=(const Rational& o)
{
    if (o.q_ == 0)
        throw std::domain_error("Rational: division by zero");
    q_ /= o.q_;
    return *this;
}

Rational operator-(const Rational& a)
{
    Rational r;
    r.q_ = -a.q_;
    return r;
}

Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }
Rational abs(const Rational& a) { return a.sign() < 0 ? -a : a; }

Rational binomial(long n, long k)
{
    if (n < 0 || k < 0 || k > n)
        return Rational(0);
    mpz_class c;
    mpz_bin_uiui(c.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return Rational::from_mpq(mpq_class(c));
}

std::string to_decimal(const Rational& r, int significant_digits)
{
    if (significant_digits < 1)
        throw std::invalid_argument("to_decimal: significant_digits must be positive");
    if (r.sign() == 0)
        return "0";
    const mpq_class a = abs(r).raw();

    // Decimal exponent e with 10^(e-1) <= a < 10^e.
    long e = static_cast<long>(mpz_sizeinbase(a.get_num_mpz_t(), 10)) - static_cast<long>(mpz_sizeinbase(a.get_den_mpz_t(), 10));
    auto pow10 = [](long k) {
        mpq_class p = 1;
        mpz_class base;
        mpz_ui_pow_ui(base.get_mpz_t(), 10, static_cast<unsigned long>(k < 0 ? -k : k));
        p = k < 0 ? mpq_class(1, base) : mpq_class(base);
        p.canonicalize();
        return p;
    };
    while (a >= pow10(e))
        ++e;
    while (a < pow10(e - 1))
        --e;

    // Round half away from zero to the requested number of digits.
    const mpq_class scaled = a * pow10(significant_digits - e);
    mpz_class digits_z;
    mpz_class twice = scaled.get_num() * 2 + scaled.get_den();
    mpz_class denom2 = scaled.get_den() * 2;
    mpz_fdiv_q(digits_z.get_mpz_t(), twice.get_mpz_t(), denom2.get_mpz_t());
    std::string digits = digits_z.get_str();
    if (static_cast<int>(digits.size()) > significant_digits) {
        ++e;
        digits.pop_back();
    }

    std::string out;
    if (e <= 0) {
        out = "0." + std::string(static_cast<size_t>(-e), '0') + digits;
    } else if (static_cast<size_t>(e) >= digits.size()) {
        out = digits + std::string(static_cast<size_t>(e) - digits.size(), '0');
    } else {
        out = digits.substr(0, static_cast<size_t>(e)) + "." + digits.substr(static_cast<size_t>(e));
    }
    if (out.find('.') != std::string::npos) {
        while (out.back() == '0')
            out.pop_back();
        if (out.back() == '.')
            out.pop_back();
    }
    return r.sign() < 0 ? "-" + out : out;
}

} // namespace riadof
