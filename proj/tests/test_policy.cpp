#include <doctest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "seclab/bounds.hpp"
#include "seclab/construction.hpp"
#include "seclab/error.hpp"
#include "seclab/policy.hpp"

using namespace seclab;

namespace {

PriorFamily small_family(int n = 3) { return build_hard_family({Rational(1, 10), Rational(5), 4, n}); }

Policy constant_policy(const PriorFamily& family, Action a) {
    Policy p;
    for_each_reachable_state(family, [&](const InformationState& st) { p.set(st, a); });
    return p;
}

Policy random_consistent_policy(const PriorFamily& family, std::mt19937_64& rng) {
    Policy p;
    for_each_reachable_state(family, [&](const InformationState& st) {
        const ActionSet allowed = consistent_actions(family.prediction(), st);
        if (allowed.accept && allowed.reject)
            p.set(st, std::bernoulli_distribution(0.5)(rng) ? Action::Accept : Action::Reject);
        else
            p.set(st, allowed.accept ? Action::Accept : Action::Reject);
    });
    return p;
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const LabError& e) {
        return e.kind();
    }
    FAIL("expected LabError");
    return ErrorKind::Io;
}

}  // namespace

TEST_CASE("posterior examples") {
    const ConstructionParams p{Rational(259, 10000), Rational(19), 20, 3};
    const auto family = build_hard_family(p);
    for (int i = 3; i <= p.k; ++i) {
        CAPTURE(i);
        const auto post = posterior(family, InformationState{{}, {2, p.s.pow(i)}});
        const auto [a, b] = confusion_pair_rows(p, i, Column::X2);
        Rational total(0);
        for (const auto& [id, mass] : post) {
            total += mass;
            if (id == a || id == b)
                CHECK(mass == Rational(1, 2));
            else
                CHECK(mass == Rational(0));
        }
        CHECK(total == Rational(1));
    }

    const auto point = posterior(family, InformationState{{}, {2, Rational(1)}});
    CHECK(point.at(1) == Rational(1));

    const auto prior = posterior(family, InformationState{{}, {1, p.s}});
    for (std::size_t r = 0; r < family.scenarios.size(); ++r)
        CHECK(prior.at(family.scenarios[r].id) == family.probabilities[r]);

    CHECK(kind_of([&] { posterior(family, InformationState{{}, {2, Rational(7)}}); }) == ErrorKind::UnreachableState);
}

TEST_CASE("posterior masses sum to one on every reachable state") {
    const auto family = build_hard_family({Rational(1, 7), Rational(3, 2), 6, 4});
    std::size_t states = 0;
    for_each_reachable_state(family, [&](const InformationState& st) {
        Rational total(0);
        for (const auto& [id, mass] : posterior(family, st)) total += mass;
        CHECK(total == Rational(1));
        ++states;
    });
    CHECK(states > 0);
}

TEST_CASE("consistent action examples") {
    const auto family = small_family();
    const auto& pred = family.prediction();
    CHECK(consistent_actions(pred, {{}, {1, Rational(5)}}) == ActionSet{true, false});
    CHECK(consistent_actions(pred, {{}, {2, Rational(1)}}) == ActionSet{false, true});
    CHECK(consistent_actions(pred, {{}, {2, Rational(625)}}) == ActionSet{true, true});
    CHECK(consistent_actions(pred, {{{2, Rational(1)}}, {1, Rational(5)}}) == ActionSet{true, false});
    // The predicted maximum was already passed over: nothing is forced.
    CHECK(consistent_actions(pred, {{{1, Rational(5)}, {2, Rational(1)}}, {3, Rational(1)}}) == ActionSet{true, true});
}

TEST_CASE("solver on the small hard family") {
    const auto family = small_family();
    const auto report = solve_optimal(family, true);
    CHECK(report.optimum == Rational(1703, 3125));
    CHECK(report.optimum == oracle_optimum(Rational(1, 10), Rational(5), 4));
    CHECK(report.constrained);

    const auto free = solve_optimal(family, false);
    CHECK(free.optimum >= report.optimum);

    Rational mixture(0);
    Rational worst = report.per_row.begin()->second;
    for (std::size_t r = 0; r < family.scenarios.size(); ++r) {
        const auto& ratio = report.per_row.at(family.scenarios[r].id);
        mixture += family.probabilities[r] * ratio;
        worst = std::min(worst, ratio);
    }
    CHECK(mixture == report.optimum);
    CHECK(report.worst_row.ratio == worst);
    CHECK(report.per_row.at(report.worst_row.id) == worst);
    CHECK(report.worst_row.ratio <= report.optimum);

    const auto eval = evaluate_policy(report.policy, family);
    CHECK(eval.expected_ratio == report.optimum);
    CHECK(eval.per_row == report.per_row);
    CHECK(is_consistent(report.policy, family.prediction()));
    CHECK(!is_consistent(free.policy, family.prediction()));
}

TEST_CASE("larger preset is above 1/e") {
    const auto family = build_hard_family({Rational(259, 10000), Rational(19), 20, 3});
    const auto report = solve_optimal(family, true);
    CHECK(report.optimum == oracle_optimum(Rational(259, 10000), Rational(19), 20));
    CHECK(compare_to_inv_e(report.optimum) == Comparison::Greater);
    CHECK(report.optimum.approx() == doctest::Approx(0.38392).epsilon(1e-5));
}

TEST_CASE("fixed policies against the simulation oracle") {
    const auto family = small_family();
    const auto accept_first = constant_policy(family, Action::Accept);
    const auto eval = evaluate_policy(accept_first, family);
    const Rational simulated =
        oracle::enumerate_ratio(family, [](const std::vector<Observation>&, const Observation&) { return true; });
    CHECK(eval.expected_ratio == simulated);
    CHECK(eval.expected_ratio == Rational(3859, 9375));
    CHECK(!is_consistent(accept_first, family.prediction()));

    Policy argmax;
    for_each_reachable_state(family, [&](const InformationState& st) {
        argmax.set(st, st.current.index == 1 ? Action::Accept : Action::Reject);
    });
    CHECK(is_consistent(argmax, family.prediction()));
    CHECK(evaluate_policy(argmax, family).expected_ratio ==
          oracle::enumerate_ratio(family, [](const std::vector<Observation>&, const Observation& c) {
              return c.index == 1;
          }));

    const auto solved = solve_optimal(family, true);
    const auto& pol = solved.policy;
    CHECK(oracle::enumerate_ratio(family, [&](const std::vector<Observation>& h, const Observation& c) {
              return pol.at(InformationState{h, c}) == Action::Accept;
          }) == solved.optimum);
}

TEST_CASE("solver equals closed form and brute force on a grid") {
    const std::vector<Rational> eps_grid{Rational(1, 10), Rational(259, 10000), Rational(1, 2)};
    const std::vector<Rational> s_grid{Rational(5), Rational(3, 2), Rational(19)};
    for (int k : {4, 6, 8}) {
        for (const auto& eps : eps_grid) {
            for (const auto& s : s_grid) {
                CAPTURE(k);
                CAPTURE(eps.str());
                CAPTURE(s.str());
                const auto family = build_hard_family({eps, s, k, 3});
                const auto dp = solve_optimal(family, true).optimum;
                CHECK(dp == oracle_optimum(eps, s, k));
                std::size_t examined = 0;
                CHECK(dp == oracle::brute_force_consistent_optimum(family, &examined));
                CHECK(examined > 0);
            }
        }
    }
}

TEST_CASE("padding with ones leaves the optimum unchanged") {
    for (int k : {4, 6}) {
        const ConstructionParams base{Rational(1, 10), Rational(5), k, 3};
        const auto reference = solve_optimal(build_hard_family(base), true).optimum;
        for (int n : {4, 5}) {
            CAPTURE(k);
            CAPTURE(n);
            auto params = base;
            params.n = n;
            const auto family = build_hard_family(params);
            const auto report = solve_optimal(family, true);
            CHECK(report.optimum == reference);
            CHECK(evaluate_policy(report.policy, family).expected_ratio == reference);
            CHECK(is_consistent(report.policy, family.prediction()));
        }
    }
}

TEST_CASE("no consistent policy or mixture beats the optimum") {
    const auto family = small_family();
    const auto optimum = solve_optimal(family, true).optimum;
    std::mt19937_64 rng(20261016);
    std::vector<Rational> values;
    values.reserve(1000);
    for (int i = 0; i < 1000; ++i) {
        const auto pol = random_consistent_policy(family, rng);
        CHECK(is_consistent(pol, family.prediction()));
        values.push_back(evaluate_policy(pol, family).expected_ratio);
        CHECK(values.back() <= optimum);
    }
    std::uniform_int_distribution<long> weight(0, 100);
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    for (int i = 0; i < 1000; ++i) {
        Rational num(0);
        Rational den(0);
        for (int j = 0; j < 5; ++j) {
            const Rational w(weight(rng) + 1);
            num += w * values[pick(rng)];
            den += w;
        }
        CHECK(num / den <= optimum);
    }
}

TEST_CASE("relaxing the constraint never lowers the optimum") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> num(1, 99);
    std::uniform_int_distribution<long> sn(11, 60);
    for (int i = 0; i < 20; ++i) {
        const ConstructionParams p{Rational(num(rng), 100), Rational(sn(rng), 10), 4 + 2 * (i % 3), 3};
        const auto family = build_hard_family(p);
        const auto c = solve_optimal(family, true);
        const auto u = solve_optimal(family, false);
        CHECK(u.optimum >= c.optimum);
        CHECK(c.worst_row.ratio <= c.optimum);
        CHECK(u.worst_row.ratio <= u.optimum);
    }
}

TEST_CASE("state and policy serialization") {
    const auto family = small_family();
    const InformationState st{{{2, Rational(25)}, {1, Rational(5)}}, {3, Rational(125)}};
    const auto text = serialize_state(st, family.base_s);
    CHECK(text == "(2:s^2),(1:s^1)|current=(3:s^3)");
    CHECK(parse_state(text, family.base_s) == st);
    const auto plain = serialize_state(st);
    CHECK(parse_state(plain) == st);
    CHECK(parse_state(serialize_state({{}, {1, Rational(5)}})) == InformationState{{}, {1, Rational(5)}});
    CHECK_THROWS(parse_state("(1:5)"));
    CHECK_THROWS(parse_state("garbage|current=(1:5)"));

    const auto report = solve_optimal(family, true);
    const auto j = policy_to_json(report.policy, family.base_s);
    CHECK(policy_from_json(j) == report.policy);
    CHECK(policy_from_json(nlohmann::json::parse(j.dump())) == report.policy);
    CHECK(report.policy.size() > 0);

    const auto out = solve_report_to_json(report, 12, true, family.base_s);
    CHECK(out.at("optimum").at("exact") == "1703/3125");
}

TEST_CASE("missing states and guards") {
    const auto family = small_family();
    Policy empty;
    CHECK(kind_of([&] { empty.at(InformationState{{}, {1, Rational(5)}}); }) == ErrorKind::MissingState);
    CHECK(kind_of([&] { evaluate_policy(empty, family); }) == ErrorKind::MissingState);
    CHECK(empty.find(InformationState{{}, {1, Rational(5)}}) == nullptr);

    try {
        empty.at(InformationState{{}, {1, Rational(5)}});
    } catch (const LabError& e) {
        CHECK(std::string(e.what()).find("current=(1:5)") != std::string::npos);
    }

    auto big = build_hard_family({Rational(1, 10), Rational(5), 4, kMaxEnumerationN + 1});
    CHECK(kind_of([&] { evaluate_policy(empty, big); }) == ErrorKind::EnumerationGuard);
}
