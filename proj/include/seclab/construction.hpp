#pragma once

#include <utility>

#include "seclab/instance.hpp"

namespace seclab {

/// Parameters of the hard prior family: row 1 (s, 1, 1, ...) with mass mix_eps,
/// and 2k-2 geometric rows sharing the remaining mass.
struct ConstructionParams {
    Rational mix_eps;
    Rational s;
    int k = 4;
    int n = 3;

    int row_count() const { return 2 * k - 1; }

    friend bool operator==(const ConstructionParams&, const ConstructionParams&) = default;
};

/// Throws LabError(InvalidParameter) naming the first violated precondition:
/// mix_eps in (0,1), s > 1, k even and >= 4, n >= 3.
void validate_params(const ConstructionParams& params);

PriorFamily build_hard_family(const ConstructionParams& params);

enum class Column : int { X2 = 2, X3 = 3 };

/// Exponents of s in columns X_2 and X_3 for rows 2..2k-1.
///
/// Rows come in swap pairs (2t, 2t+1) carrying exponents {t+1, t+2}. The
/// even row puts the lower exponent in X_2 when t is odd, the higher one when
/// t is even.
std::pair<int, int> row_exponents(int row, int k);

/// Row sharing X_1 and padding with `row` but with X_2 and X_3 swapped.
int swap_partner(int row);

/// 2i - 4 + (i mod 2): first row whose X_2 entry is s^i, for 3 <= i <= k+1.
int first_appearance_row(int i, int k);

/// Rows (ascending) whose column equals s^i, found by scanning the generated
/// table. The closed form is checked against the scan; 3 <= i <= k.
std::pair<int, int> confusion_pair_rows(const ConstructionParams& params, int i, Column column);

/// Closed form of confusion_pair_rows without building the table.
std::pair<int, int> confusion_pair_rows_closed_form(int i, Column column);

}  // namespace seclab
