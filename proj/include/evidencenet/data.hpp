#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace evidencenet {

inline constexpr std::size_t kFeatureCount = 13;
inline constexpr std::size_t kColumnCount = kFeatureCount + 1;

/// Parsed numeric table: 13 feature columns followed by the target, in the
/// dataset's original units.
struct RawTable {
    Eigen::MatrixXd values;  // rows x kColumnCount

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

struct ColumnStats {
    double mean = 0.0;
    double std = 1.0;  // population (1/n) convention
};

/// Whitened features and targets together with the statistics needed to
/// undo the transform. Also used for index subsets (training/test splits),
/// which keep the statistics of the full table.
struct Dataset {
    Eigen::MatrixXd features;  // n x 13, row-major by record
    Eigen::VectorXd targets;   // n
    std::vector<ColumnStats> stats;  // kColumnCount entries; last is the target
    std::vector<std::size_t> row_ids;  // original row index of each record

    std::size_t size() const { return static_cast<std::size_t>(targets.size()); }

    Dataset subset(std::span<const std::size_t> rows) const;
};

struct SplitPlan {
    std::uint64_t master_seed = 0;
    std::size_t split_index = 0;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
};

/// Reads whitespace- or comma-separated rows of 14 numbers. A single
/// non-numeric first line is treated as a CSV header. Blank lines and lines
/// starting with '#' are skipped. Throws std::runtime_error naming the line
/// on malformed input.
RawTable load_table(const std::filesystem::path& path);

/// Same as load_table but from an in-memory buffer; `origin` is used in
/// error messages.
RawTable parse_table(std::string_view text, std::string_view origin = "<memory>");

/// Whitens every column to zero mean and unit population variance.
/// Throws std::invalid_argument on an empty table or a constant column.
Dataset whiten(const RawTable& table);

/// Inverse of whiten, returning values in original units.
RawTable unwhiten(const Dataset& data);

/// k seeded 50/50 partitions of 0..n-1. Each is a Fisher-Yates shuffle
/// driven by a counter-based generator keyed on (master_seed, split_index);
/// the first floor(n/2) shuffled indices form the training set.
std::vector<SplitPlan> make_splits(std::size_t n, std::uint64_t master_seed, std::size_t k);

SplitPlan make_split(std::size_t n, std::uint64_t master_seed, std::size_t split_index);

}  // namespace evidencenet
