#include "seclab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "seclab/enclosure.hpp"
#include "seclab/error.hpp"
#include "seclab/family_io.hpp"

namespace seclab {

using nlohmann::json;

int dynkin_cutoff(int n) {
    if (n < 1) throw LabError(ErrorKind::InvalidParameter, "n must be at least 1");
    return static_cast<int>(floor_div_e(mpz_class(n)).get_si());
}

OnlineAlgorithm dynkin_policy(int n) {
    const int cutoff = dynkin_cutoff(n);
    return {"dynkin", [n, cutoff](std::span<const Observation> history, const Observation& current, int size,
                                  std::span<const Rational>) {
                if (size != n)
                    throw LabError(ErrorKind::InvalidParameter, "dynkin rule built for n = " + std::to_string(n) +
                                                                    ", run with n = " + std::to_string(size));
                const auto position = static_cast<int>(history.size()) + 1;
                if (position <= cutoff) return Action::Reject;
                if (position == n) return Action::Accept;
                for (int i = 0; i < cutoff; ++i)
                    if (history[static_cast<std::size_t>(i)].value > current.value) return Action::Reject;
                return Action::Accept;
            }};
}

OnlineAlgorithm prediction_argmax_policy(std::vector<Rational> predictions) {
    if (predictions.empty()) throw LabError(ErrorKind::InvalidParameter, "empty prediction vector");
    const Rational best = *std::max_element(predictions.begin(), predictions.end());
    std::vector<char> argmax(predictions.size() + 1, 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) argmax[i + 1] = predictions[i] == best;
    return {"pred-argmax", [argmax = std::move(argmax)](std::span<const Observation>, const Observation& current, int,
                                                        std::span<const Rational>) {
                const auto i = static_cast<std::size_t>(current.index);
                return i < argmax.size() && argmax[i] ? Action::Accept : Action::Reject;
            }};
}

OnlineAlgorithm policy_algorithm(Policy policy) {
    return {"policy", [policy = std::move(policy)](std::span<const Observation> history, const Observation& current,
                                                   int, std::span<const Rational>) {
                return policy.at(InformationState{{history.begin(), history.end()}, current});
            }};
}

OnlineAlgorithm make_algorithm(const std::string& name, const PriorFamily& family) {
    if (name == "dynkin") return dynkin_policy(family.n);
    if (name == "pred-argmax") return prediction_argmax_policy(family.prediction().values);
    if (name.starts_with("policy:")) {
        const auto path = name.substr(7);
        json j;
        try {
            j = json::parse(read_text_file(path));
        } catch (const json::parse_error& e) {
            throw LabError(ErrorKind::Parse, path + ": " + e.what());
        }
        auto alg = policy_algorithm(policy_from_json(j.contains("policy") ? j.at("policy") : j));
        alg.name = name;
        return alg;
    }
    throw LabError(ErrorKind::InvalidParameter, "unknown algorithm '" + name + "' (dynkin, pred-argmax, policy:<file>)");
}

Policy induced_policy(const OnlineAlgorithm& alg, const PriorFamily& family) {
    const auto& predictions = family.prediction().values;
    Policy policy;
    for_each_reachable_state(family, [&](const InformationState& state) {
        policy.set(state, alg.decide(state.observed, state.current, family.n, predictions));
    });
    return policy;
}

Rational exact_expected_ratio(const OnlineAlgorithm& alg, const PriorFamily& family) {
    require_valid(family);
    if (family.n > kMaxEnumerationN)
        throw LabError(ErrorKind::EnumerationGuard, "n = " + std::to_string(family.n) +
                                                        " is too large to enumerate; use the Monte Carlo estimator");
    const auto& predictions = family.prediction().values;
    std::vector<int> order(static_cast<std::size_t>(family.n));
    mpz_class orders;
    mpz_fac_ui(orders.get_mpz_t(), static_cast<unsigned long>(family.n));

    Rational total(0);
    std::vector<Observation> history;
    for (std::size_t i = 0; i < family.scenarios.size(); ++i) {
        if (family.probabilities[i].sign() == 0) continue;
        const Scenario& sc = family.scenarios[i];
        const Rational best = scenario_max(sc);
        Rational sum(0);
        std::iota(order.begin(), order.end(), 1);
        do {
            history.clear();
            for (int idx : order) {
                const Observation current{idx, sc.values[static_cast<std::size_t>(idx) - 1]};
                if (alg.decide(history, current, family.n, predictions) == Action::Accept) {
                    sum += current.value / best;
                    break;
                }
                history.push_back(current);
            }
        } while (std::next_permutation(order.begin(), order.end()));
        total += family.probabilities[i] * sum / Rational(orders);
    }
    return total;
}

const char* to_string(Metric m) { return m == Metric::Ratio ? "ratio" : "success"; }

namespace {

// SplitMix64 keyed by (seed, trial): every trial owns an independent substream
// that is cheap to create.
class TrialGenerator {
public:
    using result_type = std::uint64_t;

    TrialGenerator(std::uint64_t seed, std::uint64_t trial) : state_(mix(seed) ^ trial) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return mix(state_ += 0x9e3779b97f4a7c15ULL); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace

MonteCarloEstimate monte_carlo_estimate(const OnlineAlgorithm& alg, const PriorFamily& family, std::int64_t trials,
                                        std::uint64_t seed, Metric metric, unsigned threads) {
    require_valid(family);
    if (trials < 1) throw LabError(ErrorKind::InvalidParameter, "trials must be at least 1");

    // Scenario draw: row r is the first with u / 2^64 < cumulative mass, i.e.
    // u < ceil(cumulative * 2^64) for the 64-bit integer u.
    mpz_class two64 = 1;
    two64 <<= 64;
    std::vector<unsigned __int128> thresholds;
    Rational running(0);
    for (const auto& p : family.probabilities) {
        running += p;
        const Rational x = running * Rational(two64);
        const mpz_class scaled = x.floor() + (x.denominator() == 1 ? 0 : 1);
        const mpz_class high = scaled >> 64;
        const mpz_class low = scaled - (high << 64);
        thresholds.push_back((static_cast<unsigned __int128>(high.get_ui()) << 64) | low.get_ui());
    }
    // Outcome of accepting each column of each row, per metric.
    std::vector<std::vector<double>> payoff;
    for (const auto& sc : family.scenarios) {
        const Rational best = scenario_max(sc);
        auto& row = payoff.emplace_back();
        for (const auto& v : sc.values)
            row.push_back(metric == Metric::Success ? (v == best ? 1.0 : 0.0) : (v / best).approx());
    }
    const auto& predictions = family.prediction().values;

    std::vector<double> outcomes(static_cast<std::size_t>(trials));
    auto run = [&](std::int64_t begin, std::int64_t end) {
        std::vector<int> order(static_cast<std::size_t>(family.n));
        std::vector<Observation> history;
        history.reserve(order.size());
        for (std::int64_t t = begin; t < end; ++t) {
            TrialGenerator rng(seed, static_cast<std::uint64_t>(t));
            std::size_t row = 0;
            if (family.scenarios.size() > 1) {
                const unsigned __int128 u = rng();
                row = static_cast<std::size_t>(std::upper_bound(thresholds.begin(), thresholds.end(), u) -
                                               thresholds.begin());
                row = std::min(row, family.scenarios.size() - 1);
            }
            const Scenario& sc = family.scenarios[row];
            std::iota(order.begin(), order.end(), 1);
            std::shuffle(order.begin(), order.end(), rng);

            double outcome = 0;
            history.clear();
            for (int idx : order) {
                const Observation current{idx, sc.values[static_cast<std::size_t>(idx) - 1]};
                if (alg.decide(history, current, family.n, predictions) == Action::Accept) {
                    outcome = payoff[row][static_cast<std::size_t>(idx) - 1];
                    break;
                }
                history.push_back(current);
            }
            outcomes[static_cast<std::size_t>(t)] = outcome;
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::int64_t>(threads, trials));
    if (threads <= 1) {
        run(0, trials);
    } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(threads);
        const std::int64_t chunk = (trials + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::int64_t begin = chunk * w;
            const std::int64_t end = std::min(trials, begin + chunk);
            if (begin >= end) continue;
            workers.emplace_back([&, w, begin, end] {
                try {
                    run(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    double sum = 0;
    for (double x : outcomes) sum += x;
    const double mean = sum / static_cast<double>(trials);
    double squares = 0;
    for (double x : outcomes) squares += (x - mean) * (x - mean);
    const double stdev = trials > 1 ? std::sqrt(squares / static_cast<double>(trials - 1)) : 0.0;
    return {mean, stdev / std::sqrt(static_cast<double>(trials)), trials, seed, metric};
}

json estimate_to_json(const MonteCarloEstimate& est) {
    return {{"mean", est.mean},
            {"std_error", est.std_error},
            {"trials", est.trials},
            {"seed", est.seed},
            {"metric", to_string(est.metric)}};
}

}  // namespace seclab
