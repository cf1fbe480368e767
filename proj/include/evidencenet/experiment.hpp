#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evidencenet/data.hpp"
#include "evidencenet/ensemble.hpp"
#include "evidencenet/run_io.hpp"
#include "evidencenet/sampler.hpp"

namespace evidencenet {

/// Environment variable naming the default data file.
inline constexpr const char* kDataEnvVar = "EVIDENCENET_DATA";

/// Resolves an explicit path, falling back to $EVIDENCENET_DATA. Throws
/// std::runtime_error with a hint when neither is usable.
fs::path resolve_data_path(const std::optional<fs::path>& explicit_path);

struct LoadedData {
    Dataset data;
    std::string sha256;  // of the raw file bytes
};

LoadedData load_dataset(const fs::path& path);

struct RunConfig {
    fs::path data_path;
    std::vector<std::string> models;
    SamplerConfig sampler;  // seed is derived per run from master_seed
    std::uint64_t master_seed = 0;
    std::size_t n_splits = 10;
    std::vector<std::size_t> split_indices;  // empty means 0 .. n_splits-1
    fs::path output_dir = "runs";
    std::size_t threads = 1;
    bool reproducible = true;
    bool allow_offgrid = false;

    std::vector<std::size_t> active_splits() const;
    std::vector<ModelSpec> parsed_models() const;
    void validate() const;

    /// Settings that determine results; hashed into every artifact.
    nlohmann::json protocol_snapshot(const std::string& data_sha) const;
};

std::string config_hash(const nlohmann::json& snapshot);

/// Per-run seed derived from the master seed, model name and split.
std::uint64_t run_seed(std::uint64_t master_seed, const std::string& model_name, std::size_t split_index);

/// Directory-safe form of a model name, e.g. "lh sv (4, 4)" -> "lh_sv_4-4".
std::string model_slug(const std::string& name);

struct RunArtifacts {
    NsRun run;
    RunSummary summary;
    std::vector<PredictionRow> predictions;
};

/// Samples one model on one split and evaluates the test predictions.
RunArtifacts run_one(const ModelSpec& spec, const Dataset& data, const SplitPlan& plan, const SamplerConfig& cfg,
                     std::uint64_t master_seed, const std::string& config_hash);

/// Writes dead points, summary, predictions and checksums into `dir`.
void persist_run(const fs::path& dir, const RunArtifacts& artifacts);

struct RunOutcome {
    std::vector<fs::path> run_dirs;
    std::size_t non_converged = 0;
    std::vector<std::string> failures;
};

/// Executes every (model, split) pair, writing one directory per pair
/// under output_dir/<model>/split_<k>/, then the config snapshot and the
/// report files.
RunOutcome cmd_run(const RunConfig& cfg, std::ostream& log);

struct EnsembleMember {
    fs::path path;
    std::optional<double> prior;
};

struct EnsembleDefinition {
    std::string name;
    std::vector<EnsembleMember> members;

    /// {"name": ..., "members": [{"path": ..., "prior": ...}, ...]}; relative
    /// paths resolve against the file's directory.
    static EnsembleDefinition from_file(const fs::path& path);
};

struct EnsembleOutcome {
    std::vector<RunSummary> per_split;
    AggregateRow aggregate;
};

/// Combines member runs split by split and writes
/// out_dir/split_<k>/{summary.json,predictions.csv} plus aggregate.json.
EnsembleOutcome cmd_ensemble(const EnsembleDefinition& def, const fs::path& out_dir);

struct ReportRow {
    std::string name;
    std::string kind;
    std::size_t dim = 0;
    std::size_t n_splits = 0;
    double test_loss = 0.0;
    std::optional<double> test_loss_sem;
    double test_loss_err_mean = 0.0;
    double log_z = 0.0;
    double log_z_err = 0.0;
    std::string config_hash;
};

struct Report {
    std::vector<ReportRow> rows;

    /// name,test_loss,test_loss_err,log_z,log_z_err,dim
    std::string csv() const;
    std::string text() const;
};

/// Collects every summary.json under the given directories, groups them
/// by model and aggregates over splits. Individual models are ordered as in
/// the experiment grid, ensembles follow by name. Throws if the artifacts
/// come from different protocol snapshots unless `force` is set.
Report build_report(const std::vector<fs::path>& roots, bool force = false);

/// Re-hashes run artifacts under the given roots; returns one message per
/// problem found.
std::vector<std::string> verify_run_dirs(const std::vector<fs::path>& roots);

struct OracleSplit {
    std::size_t split_index = 0;
    double log_z = 0.0;
    double test_loss = 0.0;
    double test_loss_err = 0.0;
};

struct OracleSummary {
    std::vector<OracleSplit> splits;
    double mean_log_z = 0.0;      // arithmetic mean of log Z
    AggregateRow aggregate;       // log of the mean evidence, mean loss
};

/// Closed-form "br" evidences and posterior-mean test losses over seeded splits.
OracleSummary oracle_br(const Dataset& data, std::uint64_t master_seed, std::size_t n_splits);

}  // namespace evidencenet
