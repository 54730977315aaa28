#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "seclab/construction.hpp"

namespace seclab {

/// Exit codes of run_command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

/// Runs one subcommand (gen, solve, eval, bounds, verify, sweep). `args`
/// excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SweepSpec {
    std::vector<Rational> mix_eps;
    std::vector<Rational> s;
    std::vector<int> k;
    int n = 3;
    std::vector<std::string> fields;  // empty = every column
    std::size_t max_points = 10000;
    int digits = 12;
    unsigned jobs = 0;
};

/// Columns available to the sweep CSV, in output order.
const std::vector<std::string>& sweep_columns();

/// CSV text for the cartesian product (eps-major, then s, then k). Rows
/// appear in input order whatever the worker count.
std::string run_sweep(const SweepSpec& spec);

}  // namespace seclab
