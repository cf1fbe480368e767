#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evidencenet/data.hpp"

namespace evidencenet::acceptance {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct Context {
    std::optional<Dataset> data;  // whitened housing table; criteria needing it fail without
    std::string data_error;       // reported when data is absent
    std::uint64_t master_seed = 0;
    std::ostream* log = nullptr;  // progress messages for long criteria
};

inline constexpr int kCriterionCount = 12;

/// Criteria whose runtime is minutes rather than seconds.
bool is_slow(int id);

std::string title(int id);

/// Runs one criterion; exceptions are caught and reported as failures.
CriterionResult run_criterion(int id, const Context& ctx);

/// "PASS  3  title: detail (12.3 s)"
std::string format_line(const CriterionResult& r);

}  // namespace evidencenet::acceptance
