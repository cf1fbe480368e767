// Acceptance scorecard: one PASS/FAIL line per criterion.
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>

#include "evidencenet/acceptance.hpp"
#include "evidencenet/experiment.hpp"

namespace acc = evidencenet::acceptance;

int main() {
    acc::Context ctx;
    ctx.log = &std::cerr;
    try {
        const char* env = std::getenv(evidencenet::kDataEnvVar);
        const std::filesystem::path path = env && *env ? env : EVIDENCENET_TEST_DATA;
        ctx.data = evidencenet::load_dataset(evidencenet::resolve_data_path(path)).data;
    } catch (const std::exception& e) {
        ctx.data_error = e.what();
    }

    int passed = 0;
    for (int id = 1; id <= acc::kCriterionCount; ++id) {
        const auto r = acc::run_criterion(id, ctx);
        std::cout << acc::format_line(r) << std::endl;
        passed += r.passed;
    }
    std::cout << passed << "/" << acc::kCriterionCount << " criteria passed" << std::endl;
    return passed == acc::kCriterionCount ? 0 : 1;
}
