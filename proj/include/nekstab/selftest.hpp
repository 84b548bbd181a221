#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nekstab::selftest {

struct SuiteResult {
    std::string name;
    std::uint64_t cases = 0;
    std::uint64_t failures = 0;
    double seconds = 0.0;
    std::string first_counterexample;
};

struct Report {
    std::vector<SuiteResult> suites;
    bool all_passed = true;
};

/// Exhaustive/property suites over the exact lattice kernel, the rational
/// machinery and the formula identities. inject_fault corrupts one Bezout
/// case so the counterexample path can be exercised by tests.
Report run(bool inject_fault = false);

nlohmann::json report_json(const Report& report);
std::string report_text(const Report& report);

} // namespace nekstab::selftest
