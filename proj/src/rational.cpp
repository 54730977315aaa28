#include "seclab/rational.hpp"

#include <cctype>
#include <cmath>

#include "seclab/error.hpp"

namespace seclab {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::InvalidParameter: return "invalid parameter";
        case ErrorKind::DegenerateInstance: return "degenerate instance";
        case ErrorKind::UndefinedError: return "undefined prediction error";
        case ErrorKind::PrecisionExhausted: return "precision exhausted";
        case ErrorKind::InvalidFamily: return "invalid family";
        case ErrorKind::UnreachableState: return "unreachable state";
        case ErrorKind::MissingState: return "missing state";
        case ErrorKind::EnumerationGuard: return "enumeration guard";
        case ErrorKind::NonpositiveBudget: return "nonpositive budget";
        case ErrorKind::UnknownPreset: return "unknown preset";
        case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

Rational::Rational(long num, long den) : Rational(mpz_class(num), mpz_class(den)) {}

Rational::Rational(const mpz_class& num, const mpz_class& den) {
    if (den == 0) throw LabError(ErrorKind::Parse, "zero denominator");
    v_ = mpq_class(num, den);
    v_.canonicalize();
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero()) throw LabError(ErrorKind::DegenerateInstance, "division by zero");
    v_ /= o.v_;
    return *this;
}

Rational Rational::pow(long exponent) const {
    if (exponent < 0) {
        if (is_zero()) throw LabError(ErrorKind::DegenerateInstance, "zero to a negative power");
        return reciprocal().pow(-exponent);
    }
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), v_.get_num_mpz_t(), static_cast<unsigned long>(exponent));
    mpz_pow_ui(den.get_mpz_t(), v_.get_den_mpz_t(), static_cast<unsigned long>(exponent));
    return Rational(num, den);
}

mpz_class Rational::floor() const {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
    return q;
}

std::string Rational::str() const { return v_.get_str(); }

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

mpz_class parse_integer(std::string_view s, std::string_view whole) {
    std::string_view digits = s;
    if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) digits.remove_prefix(1);
    if (!all_digits(digits)) throw LabError(ErrorKind::Parse, "not a number: '" + std::string(whole) + "'");
    mpz_class z;
    std::string buf(s.front() == '+' ? s.substr(1) : s);
    z.set_str(buf, 10);
    return z;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) throw LabError(ErrorKind::Parse, "empty number");

    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        const auto den_text = text.substr(slash + 1);
        if (!all_digits(den_text)) throw LabError(ErrorKind::Parse, "bad denominator in '" + std::string(text) + "'");
        return Rational(parse_integer(text.substr(0, slash), text), parse_integer(den_text, text));
    }
    if (const auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view int_part = text.substr(0, dot);
        const std::string_view frac = text.substr(dot + 1);
        if (!frac.empty() && !all_digits(frac)) throw LabError(ErrorKind::Parse, "bad decimal '" + std::string(text) + "'");
        const bool negative = !int_part.empty() && int_part.front() == '-';
        if (!int_part.empty() && (int_part.front() == '-' || int_part.front() == '+')) int_part.remove_prefix(1);
        if (int_part.empty() && frac.empty()) throw LabError(ErrorKind::Parse, "bad decimal '" + std::string(text) + "'");
        if (!int_part.empty() && !all_digits(int_part)) throw LabError(ErrorKind::Parse, "bad decimal '" + std::string(text) + "'");
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
        mpz_class whole = int_part.empty() ? mpz_class(0) : parse_integer(int_part, text);
        mpz_class fraction = frac.empty() ? mpz_class(0) : parse_integer(frac, text);
        mpz_class num = whole * scale + fraction;
        if (negative) num = -num;
        return Rational(num, scale);
    }
    return Rational(parse_integer(text, text));
}

std::string to_decimal(const Rational& x, int digits) {
    if (digits < 0) digits = 0;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    const bool negative = x.sign() < 0;
    const mpq_class scaled = ::abs(x.raw()) * scale;
    // round half away from zero: floor(scaled + 1/2)
    mpq_class shifted = scaled + mpq_class(1, 2);
    mpz_class rounded;
    mpz_fdiv_q(rounded.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());

    std::string body = rounded.get_str();
    if (digits > 0) {
        if (body.size() <= static_cast<std::size_t>(digits))
            body.insert(0, static_cast<std::size_t>(digits) + 1 - body.size(), '0');
        body.insert(body.size() - static_cast<std::size_t>(digits), ".");
    }
    if (negative && rounded != 0) body.insert(0, "-");
    return body;
}

namespace {

double log_abs(const mpz_class& z) {
    long exp = 0;
    const double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
    return std::log(std::fabs(mant)) + static_cast<double>(exp) * std::log(2.0);
}

}  // namespace

std::optional<long> exact_log(const Rational& value, const Rational& base) {
    if (value.sign() <= 0 || base.sign() <= 0 || base == Rational(1)) return std::nullopt;
    const double lv = log_abs(value.numerator()) - log_abs(value.denominator());
    const double lb = log_abs(base.numerator()) - log_abs(base.denominator());
    const long guess = std::lround(lv / lb);
    for (long e = guess - 1; e <= guess + 1; ++e)
        if (base.pow(e) == value) return e;
    return std::nullopt;
}

}  // namespace seclab
