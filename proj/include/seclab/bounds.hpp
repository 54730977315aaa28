#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seclab/construction.hpp"
#include "seclab/enclosure.hpp"
#include "seclab/policy.hpp"

namespace seclab {

/// 1/3 + (2/3)(eps + (1 - eps)(1/s + 1/(k - 1))): the closed-form ceiling on
/// any 1-consistent algorithm's expected ratio over the hard family.
Rational alpha_value(const Rational& mix_eps, const Rational& s, int k);

/// Certified enclosure of beta = (3/2)(1/e - 1/3), width below 10^-digits.
IrrationalEnclosure beta_bounds(int digits = 12);

/// Certified enclosure of (beta - eps)/(1 - eps). Throws
/// LabError(NonpositiveBudget) when eps >= beta.
IrrationalEnclosure threshold_value(const Rational& mix_eps, int digits = 12,
                                    const Precision& precision = default_precision());

/// The mixture upper bound before simplification; with r = 2k - 1,
/// (1/3)(eps + (1-eps)/s) + (2/3)(eps + 2(1-eps)/(r-1) + (1-eps)((r-3)/(r-1))(1/2 + 1/(2s))).
Rational ub_display(const Rational& mix_eps, const Rational& s, int k);

/// Exact constrained optimum assembled case by case, independent of the
/// solver: X_1 first forces acceptance (ratio s^(1-m) on a row with maximum
/// s^m); X_2 or X_3 first is worth 1 on the three identifiable values and
/// 1/2 + 1/(2s) on every confusable one.
Rational oracle_optimum(const Rational& mix_eps, const Rational& s, int k);

/// 1/s + 1/(k-1), the left side of the parameter condition.
Rational preset_lhs(const Rational& s, int k);

/// Decides 1/s + 1/(k-1) < threshold_value(mix_eps) with refinement. False
/// when the budget is nonpositive.
bool preset_inequality_holds(const Rational& mix_eps, const Rational& s, int k,
                             const Precision& precision = default_precision());

struct Preset {
    std::string name;
    ConstructionParams params;
    bool claims_below_inv_e = false;       // preset is advertised as pushing the optimum below 1/e
    std::optional<Rational> claimed_excess;  // advertised bound on optimum - 1/3
    std::string description;
};

/// Presets from the versioned registry compiled in from config/presets.json.
const std::vector<Preset>& builtin_presets();
int preset_registry_version();
std::vector<Preset> parse_presets(const nlohmann::json& j);
/// Throws LabError(UnknownPreset).
const Preset& find_preset(const std::vector<Preset>& presets, const std::string& name);

struct TheoremReport {
    std::string preset;  // empty for explicit parameters
    ConstructionParams params;
    Rational alpha;
    Comparison alpha_vs_inv_e = Comparison::Indeterminate;
    IrrationalEnclosure beta;
    std::optional<IrrationalEnclosure> threshold;  // absent when mix_eps >= beta
    Rational preset_lhs;
    bool preset_inequality_holds = false;
    Rational ub_display;
    Rational oracle_optimum;
    Rational dp_optimum;
    Comparison verdict_vs_inv_e = Comparison::Indeterminate;
    IrrationalEnclosure inv_e_margin;  // encloses 1/e - dp_optimum
    RowRatio worst_row;
    bool chain_holds = false;          // dp = oracle < ub_display < alpha
    bool claims_below_inv_e = false;
    std::optional<Rational> claimed_excess;
    bool claim_holds = true;
    std::vector<std::string> notes;
    int k_floor_caption = 12;  // k bound stated under the construction table
    int k_floor_proof = 20;    // k bound stated in the argument

    friend bool operator==(const TheoremReport&, const TheoremReport&) = default;
};

TheoremReport verify_theorem(const ConstructionParams& params, const std::string& preset_name = {});
TheoremReport verify_preset(const Preset& preset);
TheoremReport verify_preset(const std::string& name);

nlohmann::json theorem_report_to_json(const TheoremReport& report, int digits = 12);
TheoremReport theorem_report_from_json(const nlohmann::json& j);

}  // namespace seclab
