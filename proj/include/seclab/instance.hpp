#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seclab/rational.hpp"

namespace seclab {

/// One realizable value vector (a row of a prior family). Ids are 1-based.
struct Scenario {
    int id = 0;
    std::vector<Rational> values;

    std::size_t size() const { return values.size(); }
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Finite prior over scenarios; one scenario is announced as the prediction.
struct PriorFamily {
    int n = 0;
    std::vector<Scenario> scenarios;
    std::vector<Rational> probabilities;  // parallel to scenarios
    int prediction_id = 0;
    std::optional<Rational> base_s;        // base for the "s^e" value shorthand in files

    /// Position of the scenario with this id, or npos.
    std::size_t index_of(int id) const;
    const Scenario& scenario(int id) const;
    const Scenario& prediction() const { return scenario(prediction_id); }

    friend bool operator==(const PriorFamily&, const PriorFamily&) = default;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

Rational scenario_max(const Scenario& scenario);

/// accepted / max(values); zero when nothing was accepted.
Rational competitive_ratio(const std::optional<Rational>& accepted, const Scenario& scenario);

/// max_i |1 - predicted_i / value_i|.
Rational prediction_error(std::span<const Rational> values, std::span<const Rational> predictions);

/// Multiplies every value by c.
Scenario scale(const Scenario& scenario, const Rational& c);

struct ValidationReport {
    bool valid = true;
    Rational probability_sum;
    std::vector<std::string> violations;
};

ValidationReport validate_family(const PriorFamily& family);

/// Throws LabError(InvalidFamily) listing every violation.
void require_valid(const PriorFamily& family);

}  // namespace seclab
