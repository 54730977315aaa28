#include "seclab/enclosure.hpp"

#include <cstdlib>
#include <optional>
#include <string>

#include "seclab/error.hpp"

namespace seclab {

const char* to_string(Comparison c) {
    switch (c) {
        case Comparison::Less: return "Less";
        case Comparison::Greater: return "Greater";
        case Comparison::Indeterminate: return "Indeterminate";
    }
    return "?";
}

Comparison compare(const Rational& x, const IrrationalEnclosure& enclosure) {
    if (x <= enclosure.lower) return Comparison::Less;
    if (x >= enclosure.upper) return Comparison::Greater;
    return Comparison::Indeterminate;
}

IrrationalEnclosure e_enclosure(int digits) {
    if (digits < 1) digits = 1;
    mpz_class target;
    mpz_ui_pow_ui(target.get_mpz_t(), 10, static_cast<unsigned long>(digits));

    // Smallest N with N!·N > 10^digits, so the tail bound is below 10^-digits.
    unsigned long n = 1;
    mpz_class factorial = 1;
    while (factorial * n <= target) {
        ++n;
        factorial *= n;
    }
    // sum_{j=0}^{N} N!/j!, accumulated from j = N downward.
    mpz_class term = 1;
    mpz_class sum = 1;
    for (unsigned long j = n; j >= 1; --j) {
        term *= j;
        sum += term;
    }
    IrrationalEnclosure enc;
    enc.lower = Rational(sum, factorial);
    enc.upper = enc.lower + Rational(mpz_class(1), factorial * n);
    enc.digits = digits;
    return enc;
}

IrrationalEnclosure inv_e_enclosure(int digits) {
    const IrrationalEnclosure e = e_enclosure(digits);
    return {e.upper.reciprocal(), e.lower.reciprocal(), e.digits};
}

Precision default_precision() {
    Precision p;
    if (const char* env = std::getenv("SECRETARY_LAB_PRECISION")) {
        try {
            const int digits = std::stoi(env);
            if (digits > 0) p.initial_digits = digits;
            if (p.max_digits < p.initial_digits) p.max_digits = p.initial_digits;
        } catch (const std::exception&) {
            // unparsable override: keep the default
        }
    }
    return p;
}

namespace {

// Digit schedule: initial, 2·initial, ... capped at max (inclusive).
template <typename Step>
auto refine(const Precision& precision, Step&& step) -> decltype(step(0)) {
    int digits = precision.initial_digits;
    for (;;) {
        if (auto result = step(digits)) return result;
        if (digits >= precision.max_digits) return {};
        digits = digits > precision.max_digits / 2 ? precision.max_digits : digits * 2;
    }
}

}  // namespace

Comparison compare_to_inv_e(const Rational& x, const Precision& precision) {
    const auto result = refine(precision, [&](int digits) -> std::optional<Comparison> {
        const Comparison c = compare(x, inv_e_enclosure(digits));
        if (c == Comparison::Indeterminate) return std::nullopt;
        return c;
    });
    if (!result)
        throw LabError(ErrorKind::PrecisionExhausted,
                       "comparison of " + x.str() + " with 1/e undecided at " +
                           std::to_string(precision.max_digits) + " digits");
    return *result;
}

mpz_class floor_div_e(const mpz_class& n, const Precision& precision) {
    const Rational nn(n);
    const auto result = refine(precision, [&](int digits) -> std::optional<mpz_class> {
        const IrrationalEnclosure inv = inv_e_enclosure(digits);
        const mpz_class lo = (nn * inv.lower).floor();
        if (lo != (nn * inv.upper).floor()) return std::nullopt;
        return lo;
    });
    if (!result) throw LabError(ErrorKind::PrecisionExhausted, "floor(" + n.get_str() + "/e) undecided");
    return *result;
}

}  // namespace seclab
