#include "seclab/construction.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "seclab/error.hpp"

namespace seclab {

namespace {

[[noreturn]] void bad(const std::string& what) { throw LabError(ErrorKind::InvalidParameter, what); }

}  // namespace

void validate_params(const ConstructionParams& p) {
    if (!(p.mix_eps > Rational(0) && p.mix_eps < Rational(1)))
        bad("mix_eps must lie strictly between 0 and 1 (got " + p.mix_eps.str() + ")");
    if (!(p.s > Rational(1))) bad("s must be greater than 1 (got " + p.s.str() + ")");
    if (p.k < 4) bad("k must be at least 4 (got " + std::to_string(p.k) + ")");
    if (p.k % 2 != 0) bad("k must be even (got " + std::to_string(p.k) + ")");
    if (p.n < 3) bad("n must be at least 3 (got " + std::to_string(p.n) + ")");
}

std::pair<int, int> row_exponents(int row, int k) {
    if (row < 2 || row > 2 * k - 1) bad("row " + std::to_string(row) + " has no geometric exponents");
    const int t = row / 2;
    const int lower = t + 1;
    const int higher = t + 2;
    const bool even_row = row % 2 == 0;
    const bool lower_in_x2 = (t % 2 == 1) == even_row;
    return lower_in_x2 ? std::pair{lower, higher} : std::pair{higher, lower};
}

int swap_partner(int row) {
    if (row < 2) bad("row " + std::to_string(row) + " has no swap partner");
    return row % 2 == 0 ? row + 1 : row - 1;
}

PriorFamily build_hard_family(const ConstructionParams& params) {
    validate_params(params);
    const int rows = params.row_count();
    const Rational share = (Rational(1) - params.mix_eps) / Rational(rows - 1);

    PriorFamily family;
    family.n = params.n;
    family.base_s = params.s;
    family.prediction_id = 1;
    family.scenarios.reserve(static_cast<std::size_t>(rows));

    Scenario prediction{1, std::vector<Rational>(static_cast<std::size_t>(params.n), Rational(1))};
    prediction.values[0] = params.s;
    family.scenarios.push_back(std::move(prediction));
    family.probabilities.push_back(params.mix_eps);

    for (int row = 2; row <= rows; ++row) {
        const auto [x2, x3] = row_exponents(row, params.k);
        Scenario sc{row, std::vector<Rational>(static_cast<std::size_t>(params.n), Rational(1))};
        sc.values[0] = params.s;
        sc.values[1] = params.s.pow(x2);
        sc.values[2] = params.s.pow(x3);
        family.scenarios.push_back(std::move(sc));
        family.probabilities.push_back(share);
    }
    return family;
}

int first_appearance_row(int i, int k) {
    if (i < 3 || i > k + 1) bad("exponent " + std::to_string(i) + " outside 3.." + std::to_string(k + 1));
    return 2 * i - 4 + (i % 2);
}

std::pair<int, int> confusion_pair_rows_closed_form(int i, Column column) {
    if (i < 3) bad("exponent " + std::to_string(i) + " below 3");
    const int first = 2 * i - 4 + (i % 2);
    const int second = 2 * i - 2 + (i % 2);
    if (column == Column::X2) return {first, second};
    const int a = swap_partner(first);
    const int b = swap_partner(second);
    return {std::min(a, b), std::max(a, b)};
}

std::pair<int, int> confusion_pair_rows(const ConstructionParams& params, int i, Column column) {
    if (i < 3 || i > params.k)
        bad("exponent " + std::to_string(i) + " outside 3.." + std::to_string(params.k) +
            " (s^2 and s^(k+1) occur once per column)");
    const PriorFamily family = build_hard_family(params);
    const Rational target = params.s.pow(i);
    const auto col = static_cast<std::size_t>(column) - 1;
    std::vector<int> hits;
    for (const auto& sc : family.scenarios)
        if (sc.values[col] == target) hits.push_back(sc.id);
    if (hits.size() != 2)
        throw LabError(ErrorKind::InvalidFamily,
                       "s^" + std::to_string(i) + " appears " + std::to_string(hits.size()) + " times in the column");
    const std::pair<int, int> scanned{hits[0], hits[1]};
    if (scanned != confusion_pair_rows_closed_form(i, column))
        throw std::logic_error("confusion pair scan disagrees with the closed form");
    return scanned;
}

}  // namespace seclab
