#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "seclab/instance.hpp"
#include "seclab/policy.hpp"

namespace seclab {

/// Streaming decision rule. `decide` sees the arrival history, the current
/// arrival, n and the prediction vector, and must be a pure function of them.
struct OnlineAlgorithm {
    using Decide = std::function<Action(std::span<const Observation> history, const Observation& current, int n,
                                        std::span<const Rational> predictions)>;
    std::string name;
    Decide decide;
};

/// floor(n/e), certified through the e enclosure.
int dynkin_cutoff(int n);

/// Classic rule: reject the first floor(n/e) arrivals, then accept the first
/// arrival whose value is at least the maximum of that prefix. If nothing
/// qualifies, the last arrival is accepted.
OnlineAlgorithm dynkin_policy(int n);

/// Accepts the first arrival whose index attains max(predictions).
OnlineAlgorithm prediction_argmax_policy(std::vector<Rational> predictions);

/// Replays a state policy as a streaming rule. Missing states throw.
OnlineAlgorithm policy_algorithm(Policy policy);

/// Builds the algorithm named "dynkin", "pred-argmax" or "policy:<file>" for
/// the given family.
OnlineAlgorithm make_algorithm(const std::string& name, const PriorFamily& family);

/// The state policy the algorithm induces on every reachable state of the family.
Policy induced_policy(const OnlineAlgorithm& alg, const PriorFamily& family);

/// Exact expectation over scenarios x arrival orders; n <= 8.
Rational exact_expected_ratio(const OnlineAlgorithm& alg, const PriorFamily& family);

enum class Metric { Ratio, Success };

const char* to_string(Metric m);

struct MonteCarloEstimate {
    double mean = 0;
    double std_error = 0;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    Metric metric = Metric::Ratio;
};

/// I.i.d. (scenario, order) samples. Trial t draws from its own generator
/// seeded by (seed, t), and trial outcomes are summed in trial order, so the
/// result does not depend on `threads`.
MonteCarloEstimate monte_carlo_estimate(const OnlineAlgorithm& alg, const PriorFamily& family, std::int64_t trials,
                                        std::uint64_t seed, Metric metric, unsigned threads = 0);

nlohmann::json estimate_to_json(const MonteCarloEstimate& est);

}  // namespace seclab
