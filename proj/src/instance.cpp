#include "seclab/instance.hpp"

#include <algorithm>
#include <set>

#include "seclab/error.hpp"

namespace seclab {

std::size_t PriorFamily::index_of(int id) const {
    for (std::size_t i = 0; i < scenarios.size(); ++i)
        if (scenarios[i].id == id) return i;
    return npos;
}

const Scenario& PriorFamily::scenario(int id) const {
    const std::size_t i = index_of(id);
    if (i == npos) throw LabError(ErrorKind::InvalidFamily, "no scenario with id " + std::to_string(id));
    return scenarios[i];
}

Rational scenario_max(const Scenario& scenario) {
    if (scenario.values.empty()) throw LabError(ErrorKind::DegenerateInstance, "empty scenario");
    return *std::max_element(scenario.values.begin(), scenario.values.end());
}

Rational competitive_ratio(const std::optional<Rational>& accepted, const Scenario& scenario) {
    const Rational best = scenario_max(scenario);
    if (best.sign() <= 0)
        throw LabError(ErrorKind::DegenerateInstance, "scenario " + std::to_string(scenario.id) + " has no positive value");
    if (!accepted) return Rational(0);
    if (std::find(scenario.values.begin(), scenario.values.end(), *accepted) == scenario.values.end())
        throw LabError(ErrorKind::InvalidParameter,
                       "accepted value " + accepted->str() + " is not in scenario " + std::to_string(scenario.id));
    return *accepted / best;
}

Rational prediction_error(std::span<const Rational> values, std::span<const Rational> predictions) {
    if (values.size() != predictions.size())
        throw LabError(ErrorKind::InvalidParameter, "values and predictions differ in length");
    Rational worst(0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].is_zero())
            throw LabError(ErrorKind::UndefinedError, "true value " + std::to_string(i + 1) + " is zero");
        worst = std::max(worst, (Rational(1) - predictions[i] / values[i]).abs());
    }
    return worst;
}

Scenario scale(const Scenario& scenario, const Rational& c) {
    Scenario out{scenario.id, {}};
    out.values.reserve(scenario.values.size());
    for (const auto& v : scenario.values) out.values.push_back(v * c);
    return out;
}

ValidationReport validate_family(const PriorFamily& family) {
    ValidationReport report;
    auto fail = [&](std::string message) {
        report.valid = false;
        report.violations.push_back(std::move(message));
    };

    if (family.n < 1) fail("candidate count n must be positive");
    if (family.scenarios.empty()) fail("no scenarios");
    if (family.probabilities.size() != family.scenarios.size())
        fail("probability count differs from scenario count");

    std::set<int> ids;
    bool duplicate = false;
    for (const auto& sc : family.scenarios) {
        if (!ids.insert(sc.id).second) duplicate = true;
        if (sc.id < 1) fail("scenario id " + std::to_string(sc.id) + " is not positive");
        if (static_cast<int>(sc.values.size()) != family.n)
            fail("scenario " + std::to_string(sc.id) + " has " + std::to_string(sc.values.size()) +
                 " values, expected " + std::to_string(family.n));
        bool positive = false;
        for (const auto& v : sc.values) {
            if (v.sign() < 0) fail("scenario " + std::to_string(sc.id) + " has a negative value");
            if (v.sign() > 0) positive = true;
        }
        if (!positive) fail("scenario " + std::to_string(sc.id) + " has no positive value");
    }
    if (duplicate) fail("ids not unique");

    report.probability_sum = Rational(0);
    for (const auto& p : family.probabilities) {
        if (p.sign() < 0) fail("negative probability " + p.str());
        report.probability_sum += p;
    }
    if (report.probability_sum != Rational(1)) fail("mass != 1 (sum is " + report.probability_sum.str() + ")");
    if (!ids.contains(family.prediction_id))
        fail("prediction_id " + std::to_string(family.prediction_id) + " not present");
    return report;
}

void require_valid(const PriorFamily& family) {
    const ValidationReport report = validate_family(family);
    if (report.valid) return;
    std::string message;
    for (const auto& v : report.violations) {
        if (!message.empty()) message += "; ";
        message += v;
    }
    throw LabError(ErrorKind::InvalidFamily, message);
}

}  // namespace seclab
