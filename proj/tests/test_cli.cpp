#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seclab/bounds.hpp"
#include "seclab/cli.hpp"
#include "seclab/construction.hpp"
#include "seclab/family_io.hpp"

using namespace seclab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_command(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("seclab-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

json read_json(const std::string& path) { return json::parse(read_text_file(path)); }

bool has_temp_files(const fs::path& dir) {
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().string().find(".tmp") != std::string::npos) return true;
    return false;
}

int shell(const std::string& command) {
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream in(line);
    for (std::string cell; std::getline(in, cell, ',');) cells.push_back(cell);
    return cells;
}

}  // namespace

TEST_CASE("gen writes the family and its table") {
    TempDir dir;
    const auto r = run({"gen", "--eps", "1/10", "--s", "5", "--k", "4", "--n", "3", "-o", dir / "fam.json", "--render",
                        "md"});
    REQUIRE(r.code == kExitOk);
    const auto family = read_family(dir / "fam.json");
    CHECK(family == build_hard_family({Rational(1, 10), Rational(5), 4, 3}));
    const auto md = read_text_file(dir / "fam.md");
    CHECK(md == render_family_markdown(family));
    CHECK(!has_temp_files(dir.path()));

    CHECK(run({"gen", "--eps", "1/10", "--s", "5", "--k", "4", "-o", dir / "fam.csv.json", "--render", "csv",
               "--render-out", dir / "table.csv"})
              .code == kExitOk);
    CHECK(read_text_file(dir / "table.csv") == render_family_csv(family));

    const auto stdout_run = run({"gen", "--eps", "1/10", "--s", "5", "--k", "4"});
    CHECK(stdout_run.code == kExitOk);
    CHECK(family_from_json(json::parse(stdout_run.out)) == family);
}

TEST_CASE("outputs are byte-identical across runs") {
    TempDir dir;
    const std::vector<std::vector<std::string>> commands{
        {"gen", "--eps", "259/10000", "--s", "19", "--k", "20", "-o"},
        {"solve", "--eps", "1/10", "--s", "5", "--k", "4", "-o"},
        {"eval", "--eps", "1/10", "--s", "5", "--k", "4", "--alg", "dynkin", "--mc", "--trials", "5000", "--seed",
         "11", "-o"},
        {"eval", "--eps", "1/10", "--s", "5", "--k", "4", "--alg", "pred-argmax", "--exact", "-o"},
        {"bounds", "--eps", "1/10", "--s", "5", "--k", "4", "-o"},
        {"verify", "--preset", "paper-19-20", "-o"},
        {"sweep", "--eps", "1/100,1/10", "--s", "5,19", "--k", "4,6", "-o"},
    };
    int i = 0;
    for (auto args : commands) {
        CAPTURE(args[0]);
        const auto a = dir / ("a" + std::to_string(i));
        const auto b = dir / ("b" + std::to_string(i));
        ++i;
        auto first = args;
        first.push_back(a);
        auto second = args;
        second.push_back(b);
        REQUIRE(run(first).code == kExitOk);
        REQUIRE(run(second).code == kExitOk);
        CHECK(read_text_file(a) == read_text_file(b));
    }
    CHECK(!has_temp_files(dir.path()));
}

TEST_CASE("gen, solve and verify agree") {
    TempDir dir;
    REQUIRE(run({"gen", "--eps", "1/10", "--s", "5", "--k", "4", "-o", dir / "fam.json"}).code == kExitOk);
    REQUIRE(run({"solve", "--family", dir / "fam.json", "-o", dir / "solve.json", "--policy-out", dir / "policy.json"})
                .code == kExitOk);
    REQUIRE(run({"verify", "--eps", "1/10", "--s", "5", "--k", "4", "-o", dir / "verify.json"}).code == kExitOk);
    const auto solved = read_json(dir / "solve.json");
    const auto verified = read_json(dir / "verify.json");
    CHECK(solved.at("optimum").at("exact") == "1703/3125");
    CHECK(solved.at("is_consistent") == true);
    CHECK(verified.at("dp_optimum").at("exact") == "1703/3125");
    CHECK(verified.at("oracle_optimum").at("exact") == "1703/3125");

    // The dumped policy replays to the same value.
    const auto eval = run({"eval", "--family", dir / "fam.json", "--alg", "policy:" + (dir / "policy.json"), "--exact"});
    REQUIRE(eval.code == kExitOk);
    CHECK(json::parse(eval.out).at("expected_ratio").at("exact") == "1703/3125");

    const auto loose = run({"solve", "--eps", "1/10", "--s", "5", "--k", "4", "--unconstrained"});
    REQUIRE(loose.code == kExitOk);
    CHECK(json::parse(loose.out).at("constrained") == false);
}

TEST_CASE("verify presets") {
    const auto corrected = run({"verify", "--preset", "corrected-76-78"});
    REQUIRE(corrected.code == kExitOk);
    const auto j = json::parse(corrected.out);
    CHECK(j.at("verdict_vs_inv_e") == "Less");
    CHECK(j.at("preset_inequality_holds") == true);
    CHECK(theorem_report_from_json(j) == verify_preset("corrected-76-78"));

    const auto stated = json::parse(run({"verify", "--preset", "paper-19-20"}).out);
    CHECK(stated.at("verdict_vs_inv_e") == "Greater");
    CHECK(stated.at("preset_inequality_holds") == false);
    CHECK(stated.at("claim_holds") == false);

    const auto list = run({"verify", "--list"});
    CHECK(list.code == kExitOk);
    CHECK(list.out.find("one-third-plus") != std::string::npos);

    TempDir dir;
    write_file_atomic(dir / "presets.json", R"({"version": 1, "presets": [{"name": "tiny", "mix_eps": "1/10",
        "s": "5", "k": 4, "n": 3, "claims_below_inv_e": false, "description": "small"}]})");
    const auto custom = run({"verify", "--presets", dir / "presets.json", "--preset", "tiny"});
    REQUIRE(custom.code == kExitOk);
    CHECK(json::parse(custom.out).at("dp_optimum").at("exact") == "1703/3125");
}

TEST_CASE("sweep csv") {
    const auto r = run({"sweep", "--eps", "1/100", "--s", "50,100,200,400", "--k", "50,100,200,400"});
    REQUIRE(r.code == kExitOk);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 17);
    const auto header = split_csv(lines[0]);
    CHECK(header == sweep_columns());
    for (const char* col : {"eps", "s", "k", "row_count", "alpha", "ub_display", "dp_optimum", "vs_inv_e"})
        CHECK(std::find(header.begin(), header.end(), col) != header.end());
    const auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };

    std::vector<Rational> diagonal;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        REQUIRE(cells.size() == header.size());
        const Rational eps = parse_rational(cells[col("eps")]);
        const Rational s = parse_rational(cells[col("s")]);
        const int k = std::stoi(cells[col("k")]);
        const Rational dp = parse_rational(cells[col("dp_optimum")]);
        CHECK(dp == oracle_optimum(eps, s, k));
        CHECK(parse_rational(cells[col("alpha")]) == alpha_value(eps, s, k));
        CHECK(parse_rational(cells[col("ub_display")]) == ub_display(eps, s, k));
        CHECK(std::stoi(cells[col("row_count")]) == 2 * k - 1);
        CHECK(cells[col("dp_optimum_dec")] == to_decimal(dp, 12));
        if (s == Rational(k)) diagonal.push_back(dp);
    }
    REQUIRE(diagonal.size() == 4);
    for (std::size_t i = 1; i < diagonal.size(); ++i) CHECK(diagonal[i] < diagonal[i - 1]);
    CHECK(diagonal.back() > Rational(1, 3));

    const auto narrow = run({"sweep", "--eps", "1/10", "--s", "5", "--k", "4", "--fields", "k,dp_optimum", "--digits",
                             "4"});
    REQUIRE(narrow.code == kExitOk);
    CHECK(narrow.out == "k,dp_optimum\n4,1703/3125\n");
    const auto dec4 = run({"--digits", "4", "sweep", "--eps", "1/10", "--s", "5", "--k", "4", "--fields",
                           "dp_optimum_dec"});
    CHECK(dec4.out == "dp_optimum_dec\n0.5450\n");

    const auto one = run({"sweep", "--eps", "1/100,1/10", "--s", "5,19", "--k", "4,6,8", "--jobs", "1"});
    const auto many = run({"sweep", "--eps", "1/100,1/10", "--s", "5,19", "--k", "4,6,8", "--jobs", "5"});
    CHECK(one.out == many.out);

    CHECK(run({"sweep", "--eps", "1/10", "--s", "5,6", "--k", "4,6", "--max-points", "3"}).code == kExitDomainError);
    CHECK(run({"sweep", "--eps", "1/10", "--s", "5", "--k", "5"}).code == kExitDomainError);
    CHECK(run({"sweep", "--eps", "1/10", "--s", "5", "--k", "4", "--fields", "nope"}).code != kExitOk);
}

TEST_CASE("eval") {
    const auto exact = run({"eval", "--eps", "1/10", "--s", "5", "--k", "4", "--alg", "pred-argmax", "--exact"});
    REQUIRE(exact.code == kExitOk);
    CHECK(json::parse(exact.out).at("expected_ratio").at("exact") == "359/3125");

    const auto dynkin = json::parse(run({"eval", "--eps", "1/10", "--s", "5", "--k", "4", "--alg", "dynkin"}).out);
    CHECK(dynkin.at("cutoff") == 1);

    const auto mc = run({"eval", "--eps", "1/10", "--s", "5", "--k", "4", "--alg", "dynkin", "--mc", "--trials", "2000",
                         "--seed", "9", "--metric", "success"});
    REQUIRE(mc.code == kExitOk);
    const auto est = json::parse(mc.out).at("estimate");
    CHECK(est.at("trials") == 2000);
    CHECK(est.at("seed") == 9);

    CHECK(run({"eval", "--eps", "1/10", "--s", "5", "--k", "4", "--alg", "dynkin", "--mc", "--exact"}).code ==
          kExitUsageError);
    CHECK(run({"eval", "--eps", "1/10", "--s", "5", "--k", "4"}).code == kExitUsageError);
    CHECK(run({"eval", "--eps", "1/10", "--s", "5", "--k", "4", "--alg", "magic"}).code == kExitDomainError);
    CHECK(run({"eval", "--eps", "1/10", "--s", "5", "--k", "4", "--n", "9", "--alg", "dynkin", "--exact"}).code ==
          kExitDomainError);
}

TEST_CASE("bounds") {
    const auto r = run({"bounds", "--eps", "1/10", "--s", "5", "--k", "4"});
    REQUIRE(r.code == kExitOk);
    const auto j = json::parse(r.out);
    CHECK(j.at("ub_display").at("exact") == "3/5");
    CHECK(j.at("oracle_optimum").at("exact") == "1703/3125");
    const auto high = json::parse(run({"bounds", "--eps", "1/2", "--s", "5", "--k", "4"}).out);
    CHECK(high.at("threshold").is_null());
}

TEST_CASE("exit codes") {
    CHECK(run({}).code == kExitUsageError);
    CHECK(run({"bogus"}).code == kExitUsageError);
    CHECK(run({"gen", "--wat"}).code == kExitUsageError);
    CHECK(run({"--help"}).code == kExitOk);
    CHECK(run({"gen", "--eps", "2", "--s", "5", "--k", "4"}).code == kExitDomainError);
    CHECK(run({"gen", "--eps", "1/10", "--s", "5", "--k", "7"}).code == kExitDomainError);
    CHECK(run({"gen", "--eps", "1/0", "--s", "5", "--k", "4"}).code != kExitOk);
    CHECK(run({"gen", "--eps", "abc", "--s", "5", "--k", "4"}).code != kExitOk);
    CHECK(run({"verify", "--preset", "no-such"}).code == kExitDomainError);
    CHECK(run({"solve", "--family", "/nonexistent/fam.json"}).code == kExitDomainError);

    const auto bad = run({"gen", "--eps", "1/10", "--s", "1", "--k", "4"});
    CHECK(bad.err.find("s must be greater than 1") != std::string::npos);
}

TEST_CASE("malformed family files are domain errors") {
    TempDir dir;
    write_file_atomic(dir / "broken.json", "{not json");
    CHECK(run({"solve", "--family", dir / "broken.json"}).code == kExitDomainError);
    write_file_atomic(dir / "mass.json", R"({"n": 3, "prediction_id": 1, "scenarios": [
        {"id": 1, "values": ["1", "2", "3"], "probability": "1/2"}]})");
    const auto r = run({"solve", "--family", dir / "mass.json"});
    CHECK(r.code == kExitDomainError);
    CHECK(r.err.find("mass") != std::string::npos);
}

TEST_CASE("installed binary") {
    TempDir dir;
    const std::string bin = SECLAB_CLI_PATH;
    CHECK(shell(bin + " verify --preset corrected-76-78 -o " + (dir / "r.json") + " > /dev/null") == 0);
    CHECK(read_json(dir / "r.json").at("verdict_vs_inv_e") == "Less");
    CHECK(shell(bin + " nonsense > /dev/null 2>&1") == 2);
    CHECK(shell(bin + " gen --eps 1/10 --s 5 --k 3 > /dev/null 2>&1") == 1);
    CHECK(shell("SECRETARY_LAB_PRECISION=5 " + bin + " verify --preset corrected-76-78 -o " + (dir / "p.json") +
                " > /dev/null") == 0);
    CHECK(read_json(dir / "p.json").at("verdict_vs_inv_e") == "Less");
    CHECK(!has_temp_files(dir.path()));
}
