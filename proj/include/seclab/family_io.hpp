#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "seclab/instance.hpp"

namespace seclab {

/// Value grammar shared by every file format: "p/q", "p", or "s^e" where e is
/// an integer and s the family-level base.
Rational parse_value(std::string_view text, const std::optional<Rational>& base_s);

/// "s^e" when value is an exact integer power of base_s, canonical rational otherwise.
std::string render_value(const Rational& value, const std::optional<Rational>& base_s);

/// {"exact": "p/q", "decimal": "..."} for report files.
nlohmann::json number_json(const Rational& x, int digits);

nlohmann::json family_to_json(const PriorFamily& family);
PriorFamily family_from_json(const nlohmann::json& j);

PriorFamily read_family(const std::filesystem::path& path);

/// Table layout: row | X_1..X_n | probability | note (prediction marker).
std::string render_family_markdown(const PriorFamily& family);
std::string render_family_csv(const PriorFamily& family);

/// Writes via a sibling temp file and rename, so readers never see partial output.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace seclab
