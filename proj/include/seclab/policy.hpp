#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seclab/instance.hpp"

namespace seclab {

/// An arrival: which candidate (1-based) and the value it revealed.
struct Observation {
    int index = 0;
    Rational value;

    friend bool operator==(const Observation&, const Observation&) = default;
    friend auto operator<=>(const Observation&, const Observation&) = default;
};

/// Ordered arrival history plus the arrival awaiting a decision. The online
/// algorithm sees candidate identities as well as values.
struct InformationState {
    std::vector<Observation> observed;
    Observation current;

    std::size_t arrivals() const { return observed.size() + 1; }
    bool has_arrived(int index) const;

    friend bool operator==(const InformationState&, const InformationState&) = default;
    friend auto operator<=>(const InformationState&, const InformationState&) = default;
};

/// "(idx:value),(idx:value)|current=(idx:value)"; values use the family
/// value grammar (s^e when base_s is given).
std::string serialize_state(const InformationState& state, const std::optional<Rational>& base_s = std::nullopt);
InformationState parse_state(std::string_view text, const std::optional<Rational>& base_s = std::nullopt);

enum class Action { Accept, Reject };

const char* to_string(Action a);

struct ActionSet {
    bool accept = false;
    bool reject = false;

    bool contains(Action a) const { return a == Action::Accept ? accept : reject; }
    bool empty() const { return !accept && !reject; }
    friend bool operator==(const ActionSet&, const ActionSet&) = default;
};

/// Deterministic action map over information states.
class Policy {
public:
    void set(InformationState state, Action action) { actions_[std::move(state)] = action; }
    const Action* find(const InformationState& state) const;
    /// Throws LabError(MissingState) naming the state.
    Action at(const InformationState& state) const;
    std::size_t size() const { return actions_.size(); }

    auto begin() const { return actions_.begin(); }
    auto end() const { return actions_.end(); }

    friend bool operator==(const Policy&, const Policy&) = default;

private:
    std::map<InformationState, Action> actions_;
};

nlohmann::json policy_to_json(const Policy& policy, const std::optional<Rational>& base_s);
Policy policy_from_json(const nlohmann::json& j);

/// Exact Bayes posterior over scenario ids (every id present, zero mass where
/// the observations rule it out). Arrival order is uniform and independent of
/// the scenario, so only value-consistency matters.
std::map<int, Rational> posterior(const PriorFamily& family, const InformationState& state);

/// Actions allowed under 1-consistency with respect to `prediction`.
/// Off the prediction path both actions are allowed, and so are both when
/// every predicted maximum has already been rejected.
ActionSet consistent_actions(const Scenario& prediction, const InformationState& state);

/// Visits every information state consistent with at least one scenario of
/// positive mass (or the prediction scenario), parents before children,
/// children by ascending candidate index then value.
void for_each_reachable_state(const PriorFamily& family,
                              const std::function<void(const InformationState&)>& visit);

struct RowRatio {
    int id = 0;
    Rational ratio;
    friend bool operator==(const RowRatio&, const RowRatio&) = default;
};

/// Expected competitive ratio of a fixed policy.
struct Evaluation {
    Rational expected_ratio;
    std::map<int, Rational> per_row;  // conditional expected ratio, rows of positive mass
    RowRatio worst_row;
};

struct SolveReport {
    Rational optimum;
    Policy policy;
    std::map<int, Rational> per_row;
    RowRatio worst_row;
    bool constrained = false;
};

/// Backward induction over information states. When `constrained`, every
/// state is restricted to consistent_actions for the family's prediction.
/// Ties go to Accept.
SolveReport solve_optimal(const PriorFamily& family, bool constrained);

/// Exact expectation by enumerating every (scenario, arrival order) pair with
/// weight probability/n!. Requires n <= 8.
Evaluation evaluate_policy(const Policy& policy, const PriorFamily& family);

/// True iff on every arrival order of the prediction scenario the policy
/// accepts a candidate attaining the predicted maximum.
bool is_consistent(const Policy& policy, const Scenario& prediction);

/// Largest n for which n! arrival orders are enumerated.
inline constexpr int kMaxEnumerationN = 8;

nlohmann::json solve_report_to_json(const SolveReport& report, int digits, bool include_policy = false,
                                    const std::optional<Rational>& base_s = std::nullopt);

}  // namespace seclab
