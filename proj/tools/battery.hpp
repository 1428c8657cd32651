#pragma once

#include "config.hpp"

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace fgap::app {

struct CheckRecord {
    std::string name;
    // The identity or statement the check exercises.
    std::string anchor;
    // Acceptance criterion number, 0 for supplementary checks.
    int criterion = 0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

// Runs every check (or the named subset) on the configured band set and divisor.
std::vector<CheckRecord> run_battery(const RunConfig& c, const std::set<std::string>& only = {});
std::vector<std::string> battery_names();

struct TruncationStudy {
    std::vector<std::pair<double, double>> gaps;
    std::vector<cplx> samples;
    // max over samples of |e_{alpha_N} - e_{alpha_{N+1}}|, N = 1..nmax-1.
    std::vector<double> differences;
    std::vector<double> ratios;
    bool pass = false;
};

// Gaps of width 4^-j centred at j + 1, divisor at 0.3 of each gap with alternating sign.
TruncationStudy truncation_study(std::size_t nmax = 6, QuadOptions o = {});

} // namespace fgap::app
