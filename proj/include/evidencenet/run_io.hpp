#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "evidencenet/sampler.hpp"

namespace evidencenet {

namespace fs = std::filesystem;

inline constexpr const char* kDeadPointsFile = "dead_points.csv";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kPredictionsFile = "predictions.csv";
inline constexpr const char* kChecksumFile = "checksums.sha256";

/// Everything recorded about one (model, split) run or one per-split
/// ensemble combination.
struct RunSummary {
    std::string kind = "run";  // "run" or "ensemble"
    std::string model_name;
    std::size_t split_index = 0;
    double log_z = 0.0;
    double log_z_err = 0.0;
    double info_h = 0.0;
    std::size_t n_like_calls = 0;
    std::size_t n_iters = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    std::uint64_t master_seed = 0;
    std::size_t dim = 0;
    std::size_t n_live = 0;
    std::size_t n_repeats = 0;
    double test_loss = 0.0;
    double test_loss_err = 0.0;
    double train_loss = 0.0;
    double ess = 0.0;
    std::string config_hash;
    nlohmann::json members = nlohmann::json::array();  // ensemble members only
    nlohmann::json config;  // protocol snapshot; omitted when null
};

void to_json(nlohmann::json& j, const RunSummary& s);
void from_json(const nlohmann::json& j, RunSummary& s);

struct PredictionRow {
    std::size_t index = 0;  // original row of the record
    double y_true = 0.0;
    double y_hat = 0.0;
    double y_sd = 0.0;
};

/// Formats a double so that it parses back to the same value.
std::string format_double(double v);

/// Writes through a temporary file in the same directory and renames it
/// into place.
void write_file_atomic(const fs::path& path, const std::string& contents);
std::string read_file(const fs::path& path);

std::string dead_points_csv(const NsRun& run);
void write_dead_points(const fs::path& path, const NsRun& run);
/// Reads back dead points; dimension inferred from the header.
std::vector<DeadPoint> read_dead_points(const fs::path& path);

void write_summary(const fs::path& path, const RunSummary& summary);
RunSummary read_summary(const fs::path& path);

std::string predictions_csv(const std::vector<PredictionRow>& rows);
void write_predictions(const fs::path& path, const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> read_predictions(const fs::path& path);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& bytes);

/// Writes checksums for the given files (paths relative to `dir`) in
/// `sha256sum` format.
void write_checksums(const fs::path& dir, const std::vector<std::string>& files);

/// Returns the names of files whose checksum no longer matches (or that
/// are missing). Throws if the checksum file itself is absent.
std::vector<std::string> verify_checksums(const fs::path& dir);

}  // namespace evidencenet
