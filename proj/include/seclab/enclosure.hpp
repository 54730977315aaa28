#pragma once

#include "seclab/rational.hpp"

namespace seclab {

enum class Comparison { Less, Greater, Indeterminate };

const char* to_string(Comparison c);

/// Rational interval (lower, upper) strictly containing an irrational constant.
struct IrrationalEnclosure {
    Rational lower;
    Rational upper;
    int digits = 0;  // width is below 10^-digits

    Rational width() const { return upper - lower; }
    bool contains(const Rational& x) const { return lower < x && x < upper; }

    friend bool operator==(const IrrationalEnclosure&, const IrrationalEnclosure&) = default;
};

/// Position of x relative to the enclosed constant. Decisive only when x lies
/// outside the open interval; otherwise Indeterminate (refine and retry).
Comparison compare(const Rational& x, const IrrationalEnclosure& enclosure);

/// Certified enclosure of e from the truncated series sum_{j<=N} 1/j! and the
/// tail bound 1/(N!·N).
IrrationalEnclosure e_enclosure(int digits);

/// 1/e enclosure obtained by inverting e_enclosure(digits).
IrrationalEnclosure inv_e_enclosure(int digits);

/// Refinement schedule for decisive comparisons: digits start at
/// `initial_digits` and double until decisive or above `max_digits`.
struct Precision {
    int initial_digits = 50;
    int max_digits = 100000;
};

/// Default precision; SECRETARY_LAB_PRECISION overrides initial_digits.
Precision default_precision();

/// Decisive comparison of x against 1/e. Never returns Indeterminate; throws
/// LabError(PrecisionExhausted) when the cap is hit.
Comparison compare_to_inv_e(const Rational& x, const Precision& precision = default_precision());

/// floor(n/e), certified: refines until both interval ends share a floor.
mpz_class floor_div_e(const mpz_class& n, const Precision& precision = default_precision());

}  // namespace seclab
