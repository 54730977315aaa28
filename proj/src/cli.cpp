#include "seclab/cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "seclab/baselines.hpp"
#include "seclab/bounds.hpp"
#include "seclab/error.hpp"
#include "seclab/family_io.hpp"

namespace seclab {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParamFlags {
    std::string eps, s;
    int k = 0;
    int n = 3;
    std::string family_path;

    void add_to(CLI::App& cmd, bool with_family) {
        cmd.add_option("--eps", eps, "mass on the prediction row, e.g. 1/10");
        cmd.add_option("--s", s, "value base s > 1");
        cmd.add_option("--k", k, "even k >= 4; the family has 2k-1 rows");
        cmd.add_option("--n", n, "candidate count (>= 3, padded with ones)")->capture_default_str();
        if (with_family) cmd.add_option("--family", family_path, "family JSON file instead of --eps/--s/--k");
    }

    bool explicit_params() const { return !eps.empty() || !s.empty() || k != 0; }

    ConstructionParams params() const {
        if (eps.empty() || s.empty() || k == 0) throw UsageError("--eps, --s and --k are all required");
        ConstructionParams p{parse_rational(eps), parse_rational(s), k, n};
        validate_params(p);
        return p;
    }

    PriorFamily family() const {
        if (!family_path.empty()) {
            if (explicit_params()) throw UsageError("--family excludes --eps/--s/--k");
            PriorFamily f = read_family(family_path);
            require_valid(f);
            return f;
        }
        return build_hard_family(params());
    }
};

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") out << text;
    else write_file_atomic(path, text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) items.push_back(item);
    return items;
}

json bounds_json(const ConstructionParams& p, int digits) {
    json j;
    j["params"] = {{"mix_eps", p.mix_eps.str()}, {"s", p.s.str()}, {"k", p.k}, {"row_count", p.row_count()}};
    const Rational alpha = alpha_value(p.mix_eps, p.s, p.k);
    j["alpha"] = number_json(alpha, digits);
    j["alpha_vs_inv_e"] = to_string(compare_to_inv_e(alpha));
    const IrrationalEnclosure beta = beta_bounds(digits);
    j["beta_enclosure"] = {{"lower", number_json(beta.lower, digits + 2)}, {"upper", number_json(beta.upper, digits + 2)}};
    try {
        const IrrationalEnclosure t = threshold_value(p.mix_eps, digits);
        j["threshold"] = {{"lower", number_json(t.lower, digits + 2)}, {"upper", number_json(t.upper, digits + 2)}};
    } catch (const LabError& e) {
        if (e.kind() != ErrorKind::NonpositiveBudget) throw;
        j["threshold"] = nullptr;
        j["threshold_note"] = e.what();
    }
    j["preset_lhs"] = number_json(preset_lhs(p.s, p.k), digits);
    j["preset_inequality_holds"] = preset_inequality_holds(p.mix_eps, p.s, p.k);
    j["ub_display"] = number_json(ub_display(p.mix_eps, p.s, p.k), digits);
    const Rational oracle = oracle_optimum(p.mix_eps, p.s, p.k);
    j["oracle_optimum"] = number_json(oracle, digits);
    j["oracle_vs_inv_e"] = to_string(compare_to_inv_e(oracle));
    return j;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact verification laboratory for the learning-augmented secretary problem", "secretary_lab"};
    app.require_subcommand(1);
    app.fallthrough();
    int digits = 12;
    app.add_option("--digits", digits, "decimal digits in rendered numbers")->capture_default_str();

    // gen
    auto* gen = app.add_subcommand("gen", "generate the hard prior family");
    ParamFlags gen_flags;
    gen_flags.add_to(*gen, false);
    std::string gen_out, gen_render, gen_render_out;
    gen->add_option("-o,--output", gen_out, "family JSON path (stdout when omitted)");
    gen->add_option("--render", gen_render, "also render the table")->check(CLI::IsMember({"md", "csv"}));
    gen->add_option("--render-out", gen_render_out, "table path (default: output path with .md/.csv)");

    // solve
    auto* solve = app.add_subcommand("solve", "exact optimal stopping policy by backward induction");
    ParamFlags solve_flags;
    solve_flags.add_to(*solve, true);
    bool unconstrained = false;
    std::string solve_out, policy_out;
    solve->add_flag("--unconstrained", unconstrained, "drop the 1-consistency constraint");
    solve->add_option("-o,--output", solve_out, "report JSON path");
    solve->add_option("--policy-out", policy_out, "policy dump JSON path");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate an online algorithm");
    ParamFlags eval_flags;
    eval_flags.add_to(*eval, true);
    std::string alg_name, eval_out, metric_name = "ratio";
    bool exact = false, mc = false;
    std::int64_t trials = 100000;
    std::uint64_t seed = 0;
    eval->add_option("--alg", alg_name, "dynkin, pred-argmax or policy:<file>")->required();
    auto* exact_flag = eval->add_flag("--exact", exact, "exact enumeration (n <= 8)");
    eval->add_flag("--mc", mc, "Monte Carlo estimate")->excludes(exact_flag);
    eval->add_option("--trials", trials)->capture_default_str();
    eval->add_option("--seed", seed)->capture_default_str();
    eval->add_option("--metric", metric_name)->check(CLI::IsMember({"ratio", "success"}))->capture_default_str();
    eval->add_option("-o,--output", eval_out);

    // bounds
    auto* bounds = app.add_subcommand("bounds", "closed-form quantities for (eps, s, k)");
    ParamFlags bounds_flags;
    bounds_flags.add_to(*bounds, false);
    std::string bounds_out;
    bounds->add_option("-o,--output", bounds_out);

    // verify
    auto* verify = app.add_subcommand("verify", "end-to-end verification of a preset or parameters");
    ParamFlags verify_flags;
    verify_flags.add_to(*verify, false);
    std::string preset_name, presets_path, verify_out;
    bool list_presets = false;
    verify->add_option("--preset", preset_name, "named preset");
    verify->add_option("--presets", presets_path, "preset registry JSON (default: built in)");
    verify->add_flag("--list", list_presets, "list presets and exit");
    verify->add_option("-o,--output", verify_out);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "CSV over a parameter grid");
    std::string sweep_eps, sweep_s, sweep_k, sweep_out, sweep_fields;
    SweepSpec spec;
    sweep->add_option("--eps", sweep_eps, "comma-separated mix_eps values")->required();
    sweep->add_option("--s", sweep_s, "comma-separated s values")->required();
    sweep->add_option("--k", sweep_k, "comma-separated even k values")->required();
    sweep->add_option("--n", spec.n)->capture_default_str();
    sweep->add_option("--fields", sweep_fields, "comma-separated subset of columns");
    sweep->add_option("--max-points", spec.max_points)->capture_default_str();
    sweep->add_option("--jobs", spec.jobs, "worker threads (0 = hardware)")->capture_default_str();
    sweep->add_option("-o,--output", sweep_out);

    std::vector<const char*> argv{"secretary_lab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsageError;
    }

    if (gen->parsed()) {
        const PriorFamily family = build_hard_family(gen_flags.params());
        emit(gen_out, dump(family_to_json(family)), out);
        if (!gen_render.empty()) {
            const std::string table =
                gen_render == "md" ? render_family_markdown(family) : render_family_csv(family);
            std::string path = gen_render_out;
            if (path.empty() && !gen_out.empty() && gen_out != "-")
                path = std::filesystem::path(gen_out).replace_extension(gen_render == "md" ? ".md" : ".csv").string();
            emit(path, table, out);
        }
    } else if (solve->parsed()) {
        const PriorFamily family = solve_flags.family();
        const SolveReport report = solve_optimal(family, !unconstrained);
        json j = solve_report_to_json(report, digits);
        j["optimum_vs_inv_e"] = to_string(compare_to_inv_e(report.optimum));
        j["is_consistent"] = is_consistent(report.policy, family.prediction());
        emit(solve_out, dump(j), out);
        if (!policy_out.empty()) write_file_atomic(policy_out, dump(policy_to_json(report.policy, family.base_s)));
    } else if (eval->parsed()) {
        const PriorFamily family = eval_flags.family();
        const OnlineAlgorithm alg = make_algorithm(alg_name, family);
        json j{{"algorithm", alg.name}};
        if (mc) {
            const Metric metric = metric_name == "success" ? Metric::Success : Metric::Ratio;
            j["estimate"] = estimate_to_json(monte_carlo_estimate(alg, family, trials, seed, metric));
        } else {
            if (metric_name != "ratio") throw UsageError("--metric applies to --mc only");
            const Rational value = exact_expected_ratio(alg, family);
            j["expected_ratio"] = number_json(value, digits);
            j["vs_inv_e"] = to_string(compare_to_inv_e(value));
        }
        if (alg.name == "dynkin") {
            j["cutoff"] = dynkin_cutoff(family.n);
            j["fallback"] = "accept last arrival when nothing qualifies";
        }
        emit(eval_out, dump(j), out);
    } else if (bounds->parsed()) {
        const ConstructionParams p = bounds_flags.params();
        emit(bounds_out, dump(bounds_json(p, digits)), out);
    } else if (verify->parsed()) {
        const std::vector<Preset> registry =
            presets_path.empty() ? builtin_presets() : parse_presets(json::parse(read_text_file(presets_path)));
        if (list_presets) {
            for (const auto& p : registry) out << p.name << "\t" << p.description << "\n";
            return kExitOk;
        }
        TheoremReport report;
        if (!preset_name.empty()) {
            if (verify_flags.explicit_params()) throw UsageError("--preset excludes --eps/--s/--k");
            report = verify_preset(find_preset(registry, preset_name));
        } else {
            report = verify_theorem(verify_flags.params());
        }
        emit(verify_out, dump(theorem_report_to_json(report, digits)), out);
    } else if (sweep->parsed()) {
        for (const auto& e : split_list(sweep_eps)) spec.mix_eps.push_back(parse_rational(e));
        for (const auto& v : split_list(sweep_s)) spec.s.push_back(parse_rational(v));
        for (const auto& v : split_list(sweep_k)) {
            const Rational k = parse_rational(v);
            if (!k.is_integer() || !k.numerator().fits_sint_p()) throw UsageError("k values must be integers");
            spec.k.push_back(static_cast<int>(k.numerator().get_si()));
        }
        spec.fields = split_list(sweep_fields);
        spec.digits = digits;
        emit(sweep_out, run_sweep(spec), out);
    }
    return kExitOk;
}

}  // namespace

const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> columns{
        "eps",        "s",         "k",          "n",           "row_count",
        "alpha",      "alpha_dec", "ub_display", "ub_display_dec", "dp_optimum",
        "dp_optimum_dec", "vs_inv_e"};
    return columns;
}

std::string run_sweep(const SweepSpec& spec) {
    for (const auto& f : spec.fields)
        if (std::find(sweep_columns().begin(), sweep_columns().end(), f) == sweep_columns().end())
            throw LabError(ErrorKind::InvalidParameter, "unknown sweep column '" + f + "'");
    std::vector<ConstructionParams> points;
    for (const auto& eps : spec.mix_eps)
        for (const auto& s : spec.s)
            for (int k : spec.k) points.push_back({eps, s, k, spec.n});
    if (points.empty()) throw LabError(ErrorKind::InvalidParameter, "empty sweep");
    if (points.size() > spec.max_points)
        throw LabError(ErrorKind::InvalidParameter, "sweep has " + std::to_string(points.size()) +
                                                        " points, cap is " + std::to_string(spec.max_points));
    for (const auto& p : points) validate_params(p);

    const std::vector<std::string>& fields = spec.fields.empty() ? sweep_columns() : spec.fields;
    std::vector<std::string> lines(points.size());
    auto compute = [&](std::size_t i) {
        const ConstructionParams& p = points[i];
        const Rational alpha = alpha_value(p.mix_eps, p.s, p.k);
        const Rational ub = ub_display(p.mix_eps, p.s, p.k);
        const Rational dp = solve_optimal(build_hard_family(p), true).optimum;
        std::string line;
        for (const auto& f : fields) {
            if (!line.empty()) line += ',';
            if (f == "eps") line += p.mix_eps.str();
            else if (f == "s") line += p.s.str();
            else if (f == "k") line += std::to_string(p.k);
            else if (f == "n") line += std::to_string(p.n);
            else if (f == "row_count") line += std::to_string(p.row_count());
            else if (f == "alpha") line += alpha.str();
            else if (f == "alpha_dec") line += to_decimal(alpha, spec.digits);
            else if (f == "ub_display") line += ub.str();
            else if (f == "ub_display_dec") line += to_decimal(ub, spec.digits);
            else if (f == "dp_optimum") line += dp.str();
            else if (f == "dp_optimum_dec") line += to_decimal(dp, spec.digits);
            else if (f == "vs_inv_e") line += to_string(compare_to_inv_e(dp));
        }
        lines[i] = std::move(line);
    };

    unsigned jobs = spec.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.jobs;
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, points.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
                compute(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    for (unsigned w = 1; w < jobs; ++w) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);

    std::string csv;
    for (std::size_t i = 0; i < fields.size(); ++i) csv += (i ? "," : "") + fields[i];
    csv += '\n';
    for (const auto& line : lines) csv += line + '\n';
    return csv;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsageError;
    } catch (const LabError& e) {
        err << e.what() << "\n";
        return kExitDomainError;
    } catch (const nlohmann::json::exception& e) {
        err << "json: " << e.what() << "\n";
        return kExitDomainError;
    }
}

}  // namespace seclab
