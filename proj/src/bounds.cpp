#include "seclab/bounds.hpp"

#include <functional>

#include "seclab/error.hpp"
#include "seclab/family_io.hpp"
#include "seclab/presets_data.hpp"

namespace seclab {

using nlohmann::json;

namespace {

void check_closed_form_params(const Rational& mix_eps, const Rational& s, int k) {
    if (k < 2) throw LabError(ErrorKind::InvalidParameter, "k must be at least 2 (k - 1 is a divisor)");
    if (!(s > Rational(1))) throw LabError(ErrorKind::InvalidParameter, "s must be greater than 1");
    if (mix_eps < Rational(0) || !(mix_eps < Rational(1)))
        throw LabError(ErrorKind::InvalidParameter, "mix_eps must lie in [0, 1)");
}

const Rational kThird(1, 3);
const Rational kTwoThirds(2, 3);
const Rational kHalf(1, 2);

// Cases 2 and 3 (X_2 or X_3 arrives first): identical contribution in every
// closed form.
Rational second_arrival_case(const Rational& eps, const Rational& s, int k) {
    const Rational rows(2 * k - 1);
    const Rational others = rows - Rational(1);
    return eps + Rational(2) * (Rational(1) - eps) / others +
           (Rational(1) - eps) * ((rows - Rational(3)) / others) * (kHalf + Rational(1) / (Rational(2) * s));
}

}  // namespace

Rational alpha_value(const Rational& mix_eps, const Rational& s, int k) {
    check_closed_form_params(mix_eps, s, k);
    return kThird + kTwoThirds * (mix_eps + (Rational(1) - mix_eps) * preset_lhs(s, k));
}

Rational preset_lhs(const Rational& s, int k) {
    if (k < 2) throw LabError(ErrorKind::InvalidParameter, "k must be at least 2 (k - 1 is a divisor)");
    return s.reciprocal() + Rational(1, k - 1);
}

IrrationalEnclosure beta_bounds(int digits) {
    // width(beta) = 3/2 width(1/e) < 15 * 10^-(digits + 2)
    const IrrationalEnclosure inv_e = inv_e_enclosure(digits + 2);
    const Rational three_halves(3, 2);
    return {three_halves * (inv_e.lower - kThird), three_halves * (inv_e.upper - kThird), digits};
}

IrrationalEnclosure threshold_value(const Rational& mix_eps, int digits, const Precision& precision) {
    if (!(mix_eps < Rational(1))) throw LabError(ErrorKind::InvalidParameter, "mix_eps must be below 1");
    const Rational scale = Rational(1) - mix_eps;
    // (beta - eps)/(1 - eps) is increasing in beta. Once eps < beta is decided,
    // eps < 0.052 so the width grows by at most 1/(1 - eps) < 1.1.
    for (int d = digits + 1;; d *= 2) {
        const IrrationalEnclosure beta = beta_bounds(d);
        if (mix_eps >= beta.upper)
            throw LabError(ErrorKind::NonpositiveBudget,
                           "mix_eps = " + mix_eps.str() + " is not below beta; (beta - eps)/(1 - eps) <= 0");
        if (mix_eps <= beta.lower)
            return {(beta.lower - mix_eps) / scale, (beta.upper - mix_eps) / scale, digits};
        if (d >= precision.max_digits)
            throw LabError(ErrorKind::PrecisionExhausted, "mix_eps = " + mix_eps.str() + " too close to beta");
    }
}

Rational ub_display(const Rational& mix_eps, const Rational& s, int k) {
    check_closed_form_params(mix_eps, s, k);
    const Rational first = mix_eps + (Rational(1) - mix_eps) / s;
    return kThird * first + kTwoThirds * second_arrival_case(mix_eps, s, k);
}

Rational oracle_optimum(const Rational& mix_eps, const Rational& s, int k) {
    check_closed_form_params(mix_eps, s, k);
    // rows 2..2k-1 have maxima s^3, s^3, s^4, s^4, ..., s^(k+1), s^(k+1)
    Rational geometric(0);
    for (int m = 3; m <= k + 1; ++m) geometric += s.pow(1 - m);
    const Rational others(2 * k - 2);
    const Rational first = mix_eps + (Rational(1) - mix_eps) * (Rational(2) / others) * geometric;
    return kThird * first + kTwoThirds * second_arrival_case(mix_eps, s, k);
}

bool preset_inequality_holds(const Rational& mix_eps, const Rational& s, int k, const Precision& precision) {
    const Rational lhs = preset_lhs(s, k);
    for (int d = precision.initial_digits;; d *= 2) {
        IrrationalEnclosure threshold;
        try {
            threshold = threshold_value(mix_eps, d, Precision{d, precision.max_digits});
        } catch (const LabError& e) {
            if (e.kind() == ErrorKind::NonpositiveBudget) return false;
            throw;
        }
        const Comparison c = compare(lhs, threshold);
        if (c != Comparison::Indeterminate) return c == Comparison::Less;
        if (d >= precision.max_digits)
            throw LabError(ErrorKind::PrecisionExhausted, "1/s + 1/(k-1) indistinguishable from the threshold");
    }
}

std::vector<Preset> parse_presets(const json& j) {
    std::vector<Preset> out;
    try {
        for (const auto& p : j.at("presets")) {
            Preset preset;
            preset.name = p.at("name").get<std::string>();
            preset.params.mix_eps = parse_rational(p.at("mix_eps").get<std::string>());
            preset.params.s = parse_rational(p.at("s").get<std::string>());
            preset.params.k = p.at("k").get<int>();
            preset.params.n = p.value("n", 3);
            preset.claims_below_inv_e = p.value("claims_below_inv_e", false);
            if (p.contains("claimed_excess")) preset.claimed_excess = parse_rational(p.at("claimed_excess").get<std::string>());
            preset.description = p.value("description", "");
            validate_params(preset.params);
            out.push_back(std::move(preset));
        }
    } catch (const json::exception& e) {
        throw LabError(ErrorKind::Parse, std::string("preset registry: ") + e.what());
    }
    return out;
}

const std::vector<Preset>& builtin_presets() {
    static const std::vector<Preset> presets = parse_presets(json::parse(detail::kPresetsJson));
    return presets;
}

int preset_registry_version() {
    static const int version = json::parse(detail::kPresetsJson).at("version").get<int>();
    return version;
}

const Preset& find_preset(const std::vector<Preset>& presets, const std::string& name) {
    for (const auto& p : presets)
        if (p.name == name) return p;
    std::string known;
    for (const auto& p : presets) known += (known.empty() ? "" : ", ") + p.name;
    throw LabError(ErrorKind::UnknownPreset, "'" + name + "' (known: " + known + ")");
}

TheoremReport verify_theorem(const ConstructionParams& params, const std::string& preset_name) {
    validate_params(params);
    TheoremReport r;
    r.preset = preset_name;
    r.params = params;
    r.alpha = alpha_value(params.mix_eps, params.s, params.k);
    r.alpha_vs_inv_e = compare_to_inv_e(r.alpha);
    r.beta = beta_bounds(12);
    try {
        r.threshold = threshold_value(params.mix_eps, 12);
    } catch (const LabError& e) {
        if (e.kind() != ErrorKind::NonpositiveBudget) throw;
        r.notes.push_back("mix_eps is not below beta: the parameter condition has no room");
    }
    r.preset_lhs = preset_lhs(params.s, params.k);
    r.preset_inequality_holds = preset_inequality_holds(params.mix_eps, params.s, params.k);
    r.ub_display = ub_display(params.mix_eps, params.s, params.k);
    r.oracle_optimum = oracle_optimum(params.mix_eps, params.s, params.k);

    const SolveReport solved = solve_optimal(build_hard_family(params), true);
    r.dp_optimum = solved.optimum;
    r.worst_row = solved.worst_row;
    r.verdict_vs_inv_e = compare_to_inv_e(r.dp_optimum);
    const IrrationalEnclosure inv_e = inv_e_enclosure(default_precision().initial_digits);
    r.inv_e_margin = {inv_e.lower - r.dp_optimum, inv_e.upper - r.dp_optimum, inv_e.digits};
    r.chain_holds = r.dp_optimum == r.oracle_optimum && r.dp_optimum < r.ub_display && r.ub_display < r.alpha;

    if (r.dp_optimum != r.oracle_optimum) r.notes.push_back("solver optimum differs from the closed-form optimum");
    if (!r.chain_holds) r.notes.push_back("inequality chain dp = oracle < ub_display < alpha fails");
    if (r.preset_inequality_holds != (r.alpha_vs_inv_e == Comparison::Less))
        r.notes.push_back("parameter condition and alpha verdict disagree");
    if (params.k < r.k_floor_proof) r.notes.push_back("k is below the bound required by the argument (20)");
    if (params.k < r.k_floor_caption) r.notes.push_back("k is below the bound stated under the table (12)");
    return r;
}

TheoremReport verify_preset(const Preset& preset) {
    TheoremReport r = verify_theorem(preset.params, preset.name);
    r.claims_below_inv_e = preset.claims_below_inv_e;
    r.claimed_excess = preset.claimed_excess;
    if (preset.claims_below_inv_e) {
        if (!r.preset_inequality_holds) {
            r.claim_holds = false;
            r.notes.push_back("DIVERGENCE: preset fails 1/s + 1/(k-1) < (beta - eps)/(1 - eps) (lhs " +
                              to_decimal(r.preset_lhs, 6) + ")");
        }
        if (r.verdict_vs_inv_e != Comparison::Less) {
            r.claim_holds = false;
            r.notes.push_back("DIVERGENCE: constrained optimum " + to_decimal(r.dp_optimum, 6) +
                              " is not below 1/e for this preset");
        }
    }
    if (preset.claimed_excess) {
        const Rational bound = kThird + *preset.claimed_excess;
        if (r.dp_optimum > bound || r.alpha > bound) {
            r.claim_holds = false;
            r.notes.push_back("DIVERGENCE: optimum or alpha exceeds 1/3 + " + preset.claimed_excess->str());
        }
    }
    return r;
}

TheoremReport verify_preset(const std::string& name) { return verify_preset(find_preset(builtin_presets(), name)); }

namespace {

json enclosure_json(const IrrationalEnclosure& e, int digits) {
    return {{"lower", number_json(e.lower, digits)},
            {"upper", number_json(e.upper, digits)},
            {"digits", e.digits},
            {"width", to_decimal(e.width(), digits + 4)}};
}

IrrationalEnclosure enclosure_from_json(const json& j) {
    return {parse_rational(j.at("lower").at("exact").get<std::string>()),
            parse_rational(j.at("upper").at("exact").get<std::string>()), j.at("digits").get<int>()};
}

Rational exact_from_json(const json& j) { return parse_rational(j.at("exact").get<std::string>()); }

Comparison comparison_from_string(const std::string& s) {
    if (s == "Less") return Comparison::Less;
    if (s == "Greater") return Comparison::Greater;
    if (s == "Indeterminate") return Comparison::Indeterminate;
    throw LabError(ErrorKind::Parse, "bad comparison '" + s + "'");
}

}  // namespace

json theorem_report_to_json(const TheoremReport& r, int digits) {
    json j;
    j["preset"] = r.preset;
    j["params"] = {{"mix_eps", r.params.mix_eps.str()},
                   {"s", r.params.s.str()},
                   {"k", r.params.k},
                   {"n", r.params.n},
                   {"row_count", r.params.row_count()}};
    j["alpha"] = number_json(r.alpha, digits);
    j["alpha_vs_inv_e"] = to_string(r.alpha_vs_inv_e);
    j["beta_enclosure"] = enclosure_json(r.beta, digits);
    j["threshold"] = r.threshold ? enclosure_json(*r.threshold, digits) : json(nullptr);
    j["preset_lhs"] = number_json(r.preset_lhs, digits);
    j["preset_inequality_holds"] = r.preset_inequality_holds;
    j["ub_display"] = number_json(r.ub_display, digits);
    j["oracle_optimum"] = number_json(r.oracle_optimum, digits);
    j["dp_optimum"] = number_json(r.dp_optimum, digits);
    j["verdict_vs_inv_e"] = to_string(r.verdict_vs_inv_e);
    j["inv_e_margin"] = enclosure_json(r.inv_e_margin, digits);
    j["worst_row"] = {{"id", r.worst_row.id}, {"ratio", number_json(r.worst_row.ratio, digits)}};
    j["chain_holds"] = r.chain_holds;
    j["claims_below_inv_e"] = r.claims_below_inv_e;
    j["claimed_excess"] = r.claimed_excess ? json(r.claimed_excess->str()) : json(nullptr);
    j["claim_holds"] = r.claim_holds;
    j["notes"] = r.notes;
    j["k_floor_caption"] = r.k_floor_caption;
    j["k_floor_proof"] = r.k_floor_proof;
    j["preset_registry_version"] = preset_registry_version();
    return j;
}

TheoremReport theorem_report_from_json(const json& j) {
    try {
        TheoremReport r;
        r.preset = j.at("preset").get<std::string>();
        const auto& p = j.at("params");
        r.params = {parse_rational(p.at("mix_eps").get<std::string>()), parse_rational(p.at("s").get<std::string>()),
                    p.at("k").get<int>(), p.at("n").get<int>()};
        r.alpha = exact_from_json(j.at("alpha"));
        r.alpha_vs_inv_e = comparison_from_string(j.at("alpha_vs_inv_e").get<std::string>());
        r.beta = enclosure_from_json(j.at("beta_enclosure"));
        if (!j.at("threshold").is_null()) r.threshold = enclosure_from_json(j.at("threshold"));
        r.preset_lhs = exact_from_json(j.at("preset_lhs"));
        r.preset_inequality_holds = j.at("preset_inequality_holds").get<bool>();
        r.ub_display = exact_from_json(j.at("ub_display"));
        r.oracle_optimum = exact_from_json(j.at("oracle_optimum"));
        r.dp_optimum = exact_from_json(j.at("dp_optimum"));
        r.verdict_vs_inv_e = comparison_from_string(j.at("verdict_vs_inv_e").get<std::string>());
        r.inv_e_margin = enclosure_from_json(j.at("inv_e_margin"));
        r.worst_row = {j.at("worst_row").at("id").get<int>(), exact_from_json(j.at("worst_row").at("ratio"))};
        r.chain_holds = j.at("chain_holds").get<bool>();
        r.claims_below_inv_e = j.at("claims_below_inv_e").get<bool>();
        if (!j.at("claimed_excess").is_null()) r.claimed_excess = parse_rational(j.at("claimed_excess").get<std::string>());
        r.claim_holds = j.at("claim_holds").get<bool>();
        r.notes = j.at("notes").get<std::vector<std::string>>();
        r.k_floor_caption = j.at("k_floor_caption").get<int>();
        r.k_floor_proof = j.at("k_floor_proof").get<int>();
        return r;
    } catch (const json::exception& e) {
        throw LabError(ErrorKind::Parse, std::string("theorem report: ") + e.what());
    }
}

}  // namespace seclab
