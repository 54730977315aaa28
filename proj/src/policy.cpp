#include "seclab/policy.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "seclab/error.hpp"
#include "seclab/family_io.hpp"

namespace seclab {

using nlohmann::json;

bool InformationState::has_arrived(int index) const {
    if (current.index == index) return true;
    return std::any_of(observed.begin(), observed.end(), [&](const Observation& o) { return o.index == index; });
}

const char* to_string(Action a) { return a == Action::Accept ? "accept" : "reject"; }

std::string serialize_state(const InformationState& state, const std::optional<Rational>& base_s) {
    auto item = [&](const Observation& o) { return "(" + std::to_string(o.index) + ":" + render_value(o.value, base_s) + ")"; };
    std::string out;
    for (std::size_t i = 0; i < state.observed.size(); ++i) {
        if (i > 0) out += ',';
        out += item(state.observed[i]);
    }
    out += "|current=";
    out += item(state.current);
    return out;
}

namespace {

Observation parse_observation(std::string_view text, const std::optional<Rational>& base_s) {
    if (text.size() < 5 || text.front() != '(' || text.back() != ')')
        throw LabError(ErrorKind::Parse, "bad observation '" + std::string(text) + "'");
    text = text.substr(1, text.size() - 2);
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw LabError(ErrorKind::Parse, "observation without ':'");
    const Rational idx = parse_rational(text.substr(0, colon));
    if (!idx.is_integer() || !idx.numerator().fits_sint_p())
        throw LabError(ErrorKind::Parse, "bad candidate index in '" + std::string(text) + "'");
    return {static_cast<int>(idx.numerator().get_si()), parse_value(text.substr(colon + 1), base_s)};
}

}  // namespace

InformationState parse_state(std::string_view text, const std::optional<Rational>& base_s) {
    constexpr std::string_view marker = "|current=";
    const auto bar = text.find(marker);
    if (bar == std::string_view::npos) throw LabError(ErrorKind::Parse, "state without current arrival");
    InformationState state;
    std::string_view history = text.substr(0, bar);
    while (!history.empty()) {
        const auto close = history.find(')');
        if (close == std::string_view::npos) throw LabError(ErrorKind::Parse, "unterminated observation");
        state.observed.push_back(parse_observation(history.substr(0, close + 1), base_s));
        history.remove_prefix(close + 1);
        if (!history.empty()) {
            if (history.front() != ',') throw LabError(ErrorKind::Parse, "expected ',' between observations");
            history.remove_prefix(1);
        }
    }
    state.current = parse_observation(text.substr(bar + marker.size()), base_s);
    return state;
}

const Action* Policy::find(const InformationState& state) const {
    const auto it = actions_.find(state);
    return it == actions_.end() ? nullptr : &it->second;
}

Action Policy::at(const InformationState& state) const {
    if (const Action* a = find(state)) return *a;
    throw LabError(ErrorKind::MissingState, "policy has no action for " + serialize_state(state));
}

json policy_to_json(const Policy& policy, const std::optional<Rational>& base_s) {
    json states = json::object();
    for (const auto& [state, action] : policy) states[serialize_state(state, base_s)] = to_string(action);
    json j;
    if (base_s) j["base_s"] = base_s->str();
    j["states"] = std::move(states);
    return j;
}

Policy policy_from_json(const json& j) {
    try {
        std::optional<Rational> base_s;
        if (j.contains("base_s")) base_s = parse_rational(j.at("base_s").get<std::string>());
        Policy policy;
        for (const auto& [key, action] : j.at("states").items()) {
            const auto text = action.get<std::string>();
            if (text != "accept" && text != "reject") throw LabError(ErrorKind::Parse, "bad action '" + text + "'");
            policy.set(parse_state(key, base_s), text == "accept" ? Action::Accept : Action::Reject);
        }
        return policy;
    } catch (const json::exception& e) {
        throw LabError(ErrorKind::Parse, std::string("policy file: ") + e.what());
    }
}

namespace {

void check_state_shape(const PriorFamily& family, const InformationState& state) {
    std::vector<char> seen(static_cast<std::size_t>(family.n) + 1, 0);
    auto check = [&](const Observation& o) {
        if (o.index < 1 || o.index > family.n)
            throw LabError(ErrorKind::UnreachableState, "candidate index " + std::to_string(o.index) + " out of range");
        if (seen[static_cast<std::size_t>(o.index)]++)
            throw LabError(ErrorKind::UnreachableState, "candidate " + std::to_string(o.index) + " arrives twice");
    };
    for (const auto& o : state.observed) check(o);
    check(state.current);
}

bool matches(const Scenario& sc, const InformationState& state) {
    auto ok = [&](const Observation& o) { return sc.values[static_cast<std::size_t>(o.index) - 1] == o.value; };
    return ok(state.current) && std::all_of(state.observed.begin(), state.observed.end(), ok);
}

// Scenario positions that can generate states: positive mass, plus the
// prediction so consistency is defined on its whole path.
std::vector<std::size_t> support(const PriorFamily& family) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < family.scenarios.size(); ++i)
        if (family.probabilities[i].sign() > 0 || family.scenarios[i].id == family.prediction_id) rows.push_back(i);
    return rows;
}

std::map<Rational, std::vector<std::size_t>> split_by_value(const PriorFamily& family,
                                                            const std::vector<std::size_t>& rows, int index) {
    std::map<Rational, std::vector<std::size_t>> groups;
    for (std::size_t r : rows) groups[family.scenarios[r].values[static_cast<std::size_t>(index) - 1]].push_back(r);
    return groups;
}

void visit_subtree(const PriorFamily& family, InformationState& state, const std::vector<std::size_t>& rows,
                   const std::function<void(const InformationState&)>& visit) {
    visit(state);
    if (static_cast<int>(state.arrivals()) == family.n) return;
    for (int j = 1; j <= family.n; ++j) {
        if (state.has_arrived(j)) continue;
        for (const auto& [value, sub] : split_by_value(family, rows, j)) {
            InformationState child{state.observed, Observation{j, value}};
            child.observed.push_back(state.current);
            visit_subtree(family, child, sub, visit);
        }
    }
}

RowRatio worst_of(const std::map<int, Rational>& per_row) {
    RowRatio worst{0, Rational(0)};
    bool first = true;
    for (const auto& [id, ratio] : per_row) {
        if (first || ratio < worst.ratio) worst = {id, ratio};
        first = false;
    }
    return worst;
}

class BackwardInduction {
public:
    BackwardInduction(const PriorFamily& family, bool constrained)
        : family_(family), constrained_(constrained), prediction_(family.prediction()) {
        row_max_.reserve(family.scenarios.size());
        for (const auto& sc : family.scenarios) row_max_.push_back(scenario_max(sc));
    }

    // Returns sum over consistent rows of probability * conditional expected
    // ratio from this state on. Dividing by the state's mass would give the
    // posterior value; the comparison between actions is unaffected.
    Rational solve(const InformationState& state, const std::vector<std::size_t>& rows) {
        Rational accept(0);
        for (std::size_t r : rows) {
            if (family_.probabilities[r].sign() == 0) continue;
            accept += family_.probabilities[r] * state.current.value / row_max_[r];
        }

        Rational reject(0);
        const int arrived = static_cast<int>(state.arrivals());
        if (arrived < family_.n) {
            for (int j = 1; j <= family_.n; ++j) {
                if (state.has_arrived(j)) continue;
                for (const auto& [value, sub] : split_by_value(family_, rows, j)) {
                    InformationState child{state.observed, Observation{j, value}};
                    child.observed.push_back(state.current);
                    reject += solve(child, sub);
                }
            }
            reject /= Rational(family_.n - arrived);
        }

        const ActionSet allowed =
            constrained_ ? consistent_actions(prediction_, state) : ActionSet{true, true};
        if (allowed.empty()) throw std::logic_error("no consistent action at " + serialize_state(state));
        const bool take = allowed.accept && (!allowed.reject || accept >= reject);
        policy_.set(state, take ? Action::Accept : Action::Reject);
        return take ? accept : reject;
    }

    Policy take_policy() { return std::move(policy_); }

private:
    const PriorFamily& family_;
    bool constrained_;
    const Scenario& prediction_;
    std::vector<Rational> row_max_;
    Policy policy_;
};

// Conditional expected ratio of `policy` given the scenario, averaging over
// the remaining uniformly random arrivals.
Rational row_value(const Policy& policy, const Scenario& sc, const Rational& best, InformationState& state) {
    if (policy.at(state) == Action::Accept) return state.current.value / best;
    const int n = static_cast<int>(sc.size());
    const int arrived = static_cast<int>(state.arrivals());
    if (arrived == n) return Rational(0);
    Rational sum(0);
    for (int j = 1; j <= n; ++j) {
        if (state.has_arrived(j)) continue;
        InformationState child{state.observed, Observation{j, sc.values[static_cast<std::size_t>(j) - 1]}};
        child.observed.push_back(state.current);
        sum += row_value(policy, sc, best, child);
    }
    return sum / Rational(n - arrived);
}

}  // namespace

std::map<int, Rational> posterior(const PriorFamily& family, const InformationState& state) {
    check_state_shape(family, state);
    std::map<int, Rational> post;
    Rational mass(0);
    for (std::size_t i = 0; i < family.scenarios.size(); ++i) {
        const bool ok = matches(family.scenarios[i], state);
        post[family.scenarios[i].id] = ok ? family.probabilities[i] : Rational(0);
        if (ok) mass += family.probabilities[i];
    }
    if (mass.sign() == 0) throw LabError(ErrorKind::UnreachableState, serialize_state(state, family.base_s));
    for (auto& [id, p] : post) p /= mass;
    return post;
}

ActionSet consistent_actions(const Scenario& prediction, const InformationState& state) {
    if (!matches(prediction, state)) return {true, true};
    const Rational best = scenario_max(prediction);
    ActionSet allowed;
    allowed.accept = state.current.value == best;
    for (int j = 1; j <= static_cast<int>(prediction.size()); ++j)
        if (!state.has_arrived(j) && prediction.values[static_cast<std::size_t>(j) - 1] == best) allowed.reject = true;
    // Every maximum already went by: only policies that broke consistency
    // earlier get here, and nothing can restore it.
    if (allowed.empty()) return {true, true};
    return allowed;
}

void for_each_reachable_state(const PriorFamily& family, const std::function<void(const InformationState&)>& visit) {
    const auto rows = support(family);
    for (int j = 1; j <= family.n; ++j) {
        for (const auto& [value, sub] : split_by_value(family, rows, j)) {
            InformationState state{{}, Observation{j, value}};
            visit_subtree(family, state, sub, visit);
        }
    }
}

SolveReport solve_optimal(const PriorFamily& family, bool constrained) {
    require_valid(family);
    BackwardInduction dp(family, constrained);
    const auto rows = support(family);
    Rational total(0);
    for (int j = 1; j <= family.n; ++j) {
        for (const auto& [value, sub] : split_by_value(family, rows, j))
            total += dp.solve(InformationState{{}, Observation{j, value}}, sub);
    }

    SolveReport report;
    report.optimum = total / Rational(family.n);
    report.policy = dp.take_policy();
    report.constrained = constrained;

    Rational mixture(0);
    for (std::size_t i = 0; i < family.scenarios.size(); ++i) {
        if (family.probabilities[i].sign() == 0) continue;
        const Scenario& sc = family.scenarios[i];
        const Rational best = scenario_max(sc);
        Rational sum(0);
        for (int j = 1; j <= family.n; ++j) {
            InformationState state{{}, Observation{j, sc.values[static_cast<std::size_t>(j) - 1]}};
            sum += row_value(report.policy, sc, best, state);
        }
        const Rational ratio = sum / Rational(family.n);
        report.per_row[sc.id] = ratio;
        mixture += family.probabilities[i] * ratio;
    }
    if (mixture != report.optimum) throw std::logic_error("per-row decomposition disagrees with the optimum");
    report.worst_row = worst_of(report.per_row);
    return report;
}

Evaluation evaluate_policy(const Policy& policy, const PriorFamily& family) {
    require_valid(family);
    if (family.n > kMaxEnumerationN)
        throw LabError(ErrorKind::EnumerationGuard,
                       "n = " + std::to_string(family.n) + " exceeds " + std::to_string(kMaxEnumerationN) +
                           "; use the Monte Carlo estimator");
    std::vector<int> order(static_cast<std::size_t>(family.n));
    mpz_class orders;
    mpz_fac_ui(orders.get_mpz_t(), static_cast<unsigned long>(family.n));

    Evaluation eval;
    eval.expected_ratio = Rational(0);
    for (std::size_t i = 0; i < family.scenarios.size(); ++i) {
        if (family.probabilities[i].sign() == 0) continue;
        const Scenario& sc = family.scenarios[i];
        const Rational best = scenario_max(sc);
        Rational sum(0);
        std::iota(order.begin(), order.end(), 1);
        do {
            InformationState state;
            for (int idx : order) {
                state.current = {idx, sc.values[static_cast<std::size_t>(idx) - 1]};
                if (policy.at(state) == Action::Accept) {
                    sum += state.current.value / best;
                    break;
                }
                state.observed.push_back(state.current);
            }
        } while (std::next_permutation(order.begin(), order.end()));
        const Rational ratio = sum / Rational(orders);
        eval.per_row[sc.id] = ratio;
        eval.expected_ratio += family.probabilities[i] * ratio;
    }
    eval.worst_row = worst_of(eval.per_row);
    return eval;
}

bool is_consistent(const Policy& policy, const Scenario& prediction) {
    const Rational best = scenario_max(prediction);
    std::vector<int> order(prediction.size());
    std::iota(order.begin(), order.end(), 1);
    do {
        InformationState state;
        bool won = false;
        for (int idx : order) {
            state.current = {idx, prediction.values[static_cast<std::size_t>(idx) - 1]};
            if (policy.at(state) == Action::Accept) {
                won = state.current.value == best;
                break;
            }
            state.observed.push_back(state.current);
        }
        if (!won) return false;
    } while (std::next_permutation(order.begin(), order.end()));
    return true;
}

json solve_report_to_json(const SolveReport& report, int digits, bool include_policy,
                          const std::optional<Rational>& base_s) {
    json per_row = json::object();
    for (const auto& [id, ratio] : report.per_row) per_row[std::to_string(id)] = number_json(ratio, digits);
    json j{{"constrained", report.constrained},
           {"optimum", number_json(report.optimum, digits)},
           {"per_row", per_row},
           {"worst_row", {{"id", report.worst_row.id}, {"ratio", number_json(report.worst_row.ratio, digits)}}},
           {"policy_states", report.policy.size()}};
    if (include_policy) j["policy"] = policy_to_json(report.policy, base_s);
    return j;
}

}  // namespace seclab
