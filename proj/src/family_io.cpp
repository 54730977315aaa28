#include "seclab/family_io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "seclab/error.hpp"

namespace seclab {

using nlohmann::json;

Rational parse_value(std::string_view text, const std::optional<Rational>& base_s) {
    if (text.starts_with("s^")) {
        if (!base_s) throw LabError(ErrorKind::Parse, "'" + std::string(text) + "' needs base_s");
        const Rational e = parse_rational(text.substr(2));
        if (!e.is_integer() || text.find('.') != std::string_view::npos || text.find('/') != std::string_view::npos)
            throw LabError(ErrorKind::Parse, "exponent in '" + std::string(text) + "' is not an integer");
        const mpz_class exponent = e.numerator();
        if (!exponent.fits_slong_p()) throw LabError(ErrorKind::Parse, "exponent too large");
        return base_s->pow(exponent.get_si());
    }
    if (text.find('.') != std::string_view::npos)
        throw LabError(ErrorKind::Parse, "decimal '" + std::string(text) + "' is not a file value; use p/q");
    return parse_rational(text);
}

std::string render_value(const Rational& value, const std::optional<Rational>& base_s) {
    if (base_s) {
        if (auto e = exact_log(value, *base_s); e && *e != 0) return "s^" + std::to_string(*e);
    }
    return value.str();
}

json number_json(const Rational& x, int digits) {
    return {{"exact", x.str()}, {"decimal", to_decimal(x, digits)}};
}

json family_to_json(const PriorFamily& family) {
    json j;
    j["n"] = family.n;
    if (family.base_s) j["base_s"] = family.base_s->str();
    json rows = json::array();
    for (std::size_t i = 0; i < family.scenarios.size(); ++i) {
        const auto& sc = family.scenarios[i];
        json values = json::array();
        for (const auto& v : sc.values) values.push_back(render_value(v, family.base_s));
        rows.push_back({{"id", sc.id},
                        {"values", values},
                        {"probability", i < family.probabilities.size() ? family.probabilities[i].str() : "0"}});
    }
    j["scenarios"] = rows;
    j["prediction_id"] = family.prediction_id;
    return j;
}

PriorFamily family_from_json(const json& j) {
    try {
        PriorFamily family;
        family.n = j.at("n").get<int>();
        if (j.contains("base_s") && !j.at("base_s").is_null())
            family.base_s = parse_value(j.at("base_s").get<std::string>(), std::nullopt);
        for (const auto& row : j.at("scenarios")) {
            Scenario sc;
            sc.id = row.at("id").get<int>();
            for (const auto& v : row.at("values")) {
                if (v.is_number_integer()) sc.values.emplace_back(v.get<long>());
                else sc.values.push_back(parse_value(v.get<std::string>(), family.base_s));
            }
            const auto& p = row.at("probability");
            family.probabilities.push_back(p.is_number_integer() ? Rational(p.get<long>())
                                                                 : parse_value(p.get<std::string>(), family.base_s));
            family.scenarios.push_back(std::move(sc));
        }
        family.prediction_id = j.at("prediction_id").get<int>();
        return family;
    } catch (const json::exception& e) {
        throw LabError(ErrorKind::Parse, std::string("family file: ") + e.what());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LabError(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PriorFamily read_family(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw LabError(ErrorKind::Parse, path.string() + ": " + e.what());
    }
    return family_from_json(j);
}

std::string render_family_markdown(const PriorFamily& family) {
    std::ostringstream out;
    out << "| row |";
    for (int c = 1; c <= family.n; ++c) out << " X_" << c << " |";
    out << " probability | note |\n|---|";
    for (int c = 1; c <= family.n; ++c) out << "---|";
    out << "---|---|\n";
    for (std::size_t i = 0; i < family.scenarios.size(); ++i) {
        const auto& sc = family.scenarios[i];
        out << "| " << sc.id << " |";
        for (const auto& v : sc.values) {
            const auto text = render_value(v, family.base_s);
            out << ' ' << (text == "s^1" ? "s" : text) << " |";
        }
        out << ' ' << family.probabilities[i].str() << " | " << (sc.id == family.prediction_id ? "prediction" : "")
            << " |\n";
    }
    return out.str();
}

std::string render_family_csv(const PriorFamily& family) {
    std::ostringstream out;
    out << "row";
    for (int c = 1; c <= family.n; ++c) out << ",X_" << c;
    out << ",probability,prediction\n";
    for (std::size_t i = 0; i < family.scenarios.size(); ++i) {
        const auto& sc = family.scenarios[i];
        out << sc.id;
        for (const auto& v : sc.values) out << ',' << render_value(v, family.base_s);
        out << ',' << family.probabilities[i].str() << ',' << (sc.id == family.prediction_id ? 1 : 0) << '\n';
    }
    return out.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw LabError(ErrorKind::Io, "cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw LabError(ErrorKind::Io, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw LabError(ErrorKind::Io, "cannot rename onto " + path.string());
    }
}

}  // namespace seclab
