#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace seclab {

/// Arbitrary-precision rational in canonical form (gcd(num, den) = 1, den > 0).
///
/// Every value, probability and expected ratio in the library is carried by
/// this type; nothing in the solving pipeline rounds.
class Rational {
public:
    Rational() = default;
    Rational(long value) : v_(value) {}  // NOLINT(google-explicit-constructor)
    Rational(long num, long den);
    explicit Rational(const mpz_class& integer) : v_(integer) {}
    Rational(const mpz_class& num, const mpz_class& den);
    explicit Rational(const mpq_class& value) : v_(value) { v_.canonicalize(); }

    const mpq_class& raw() const { return v_; }
    mpz_class numerator() const { return v_.get_num(); }
    mpz_class denominator() const { return v_.get_den(); }

    int sign() const { return sgn(v_); }
    bool is_zero() const { return sign() == 0; }
    bool is_integer() const { return v_.get_den() == 1; }

    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.v_)); }

    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) == 0; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        const int c = cmp(a.v_, b.v_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    /// Integer power; negative exponents invert (zero base with negative exponent throws).
    Rational pow(long exponent) const;
    Rational abs() const { return Rational(mpq_class(::abs(v_))); }
    Rational reciprocal() const { return Rational(1) / *this; }

    /// floor(x) as an integer.
    mpz_class floor() const;

    /// "p" for integers, "p/q" otherwise.
    std::string str() const;

    /// Lossy, for log-scale estimates and plotting columns only.
    double approx() const { return v_.get_d(); }

private:
    mpq_class v_;
};

/// Parses "p", "p/q" or a plain decimal literal such as "0.0259" or "-3.5".
/// Throws LabError(Parse) on malformed text or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical text form, the inverse of parse_rational.
inline std::string render(const Rational& x) { return x.str(); }

/// Decimal expansion rounded half away from zero to `digits` fractional digits.
std::string to_decimal(const Rational& x, int digits);

/// Returns e when base^e == value exactly, for base > 0 and base != 1.
std::optional<long> exact_log(const Rational& value, const Rational& base);

}  // namespace seclab
