#include "evidencenet/data.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "evidencenet/rng.hpp"

namespace evidencenet {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    constexpr std::string_view seps = " \t\r,;";
    std::size_t i = line.find_first_not_of(seps);
    while (i != std::string_view::npos) {
        const std::size_t j = line.find_first_of(seps, i);
        out.push_back(line.substr(i, j == std::string_view::npos ? line.size() - i : j - i));
        i = line.find_first_not_of(seps, j);
    }
    return out;
}

bool parse_double(std::string_view field, double& value) {
    if (!field.empty() && field.front() == '"' && field.back() == '"' && field.size() >= 2)
        field = field.substr(1, field.size() - 2);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    return ec == std::errc() && ptr == end && std::isfinite(value);
}

}  // namespace

RawTable parse_table(std::string_view text, std::string_view origin) {
    std::vector<double> flat;
    std::size_t line_no = 0;
    bool seen_data = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#') {
            if (eol == text.size()) break;
            continue;
        }
        auto fields = split_fields(line);
        if (fields.size() != kColumnCount) {
            if (!seen_data && line_no == 1 && !fields.empty()) {
                double probe;
                if (!parse_double(fields.front(), probe)) continue;  // header
            }
            std::ostringstream msg;
            msg << origin << ":" << line_no << ": expected " << kColumnCount << " columns, found "
                << fields.size();
            throw std::runtime_error(msg.str());
        }
        std::array<double, kColumnCount> row{};
        bool ok = true;
        for (std::size_t c = 0; c < kColumnCount && ok; ++c) ok = parse_double(fields[c], row[c]);
        if (!ok) {
            if (!seen_data && line_no == 1) continue;  // header with 14 names
            std::ostringstream msg;
            msg << origin << ":" << line_no << ": cannot parse numeric value";
            throw std::runtime_error(msg.str());
        }
        flat.insert(flat.end(), row.begin(), row.end());
        seen_data = true;
        if (eol == text.size()) break;
    }
    if (flat.empty()) throw std::runtime_error(std::string(origin) + ": no data rows");

    RawTable table;
    const auto n = static_cast<Eigen::Index>(flat.size() / kColumnCount);
    table.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), n, static_cast<Eigen::Index>(kColumnCount));
    return table;
}

RawTable load_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open data file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_table(buf.str(), path.string());
}

Dataset whiten(const RawTable& table) {
    if (table.rows() == 0) throw std::invalid_argument("cannot whiten an empty table");
    if (table.cols() != kColumnCount) throw std::invalid_argument("expected 14 columns");

    const double n = static_cast<double>(table.rows());
    Eigen::MatrixXd z = table.values;
    std::vector<ColumnStats> stats(kColumnCount);
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        const double mean = z.col(c).sum() / n;
        const double var = (z.col(c).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        if (!(sd > 0.0) || sd <= 1e-300)
            throw std::invalid_argument("column " + std::to_string(c) + " has zero variance; cannot whiten");
        stats[static_cast<std::size_t>(c)] = {mean, sd};
        z.col(c) = (z.col(c).array() - mean) / sd;
    }

    Dataset d;
    d.features = z.leftCols(static_cast<Eigen::Index>(kFeatureCount));
    d.targets = z.col(static_cast<Eigen::Index>(kFeatureCount));
    d.stats = std::move(stats);
    d.row_ids.resize(table.rows());
    for (std::size_t i = 0; i < d.row_ids.size(); ++i) d.row_ids[i] = i;
    return d;
}

RawTable unwhiten(const Dataset& data) {
    RawTable t;
    const auto n = static_cast<Eigen::Index>(data.size());
    t.values.resize(n, static_cast<Eigen::Index>(kColumnCount));
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        const auto& s = data.stats.at(c);
        const auto col = static_cast<Eigen::Index>(c);
        if (c < kFeatureCount)
            t.values.col(col) = data.features.col(col).array() * s.std + s.mean;
        else
            t.values.col(col) = data.targets.array() * s.std + s.mean;
    }
    return t;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.targets.resize(static_cast<Eigen::Index>(rows.size()));
    out.stats = stats;
    out.row_ids.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = rows[i];
        if (r >= size()) throw std::out_of_range("subset row index out of range");
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(r));
        out.targets(static_cast<Eigen::Index>(i)) = targets(static_cast<Eigen::Index>(r));
        out.row_ids.push_back(row_ids.empty() ? r : row_ids[r]);
    }
    return out;
}

SplitPlan make_split(std::size_t n, std::uint64_t master_seed, std::size_t split_index) {
    if (n < 2) throw std::invalid_argument("make_split needs at least 2 records");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    CounterRng rng(master_seed, 0x5eed0000ULL + split_index);
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(perm[i], perm[j]);
    }
    const std::size_t n_train = n / 2;
    SplitPlan plan;
    plan.master_seed = master_seed;
    plan.split_index = split_index;
    plan.train_idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    plan.test_idx.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    return plan;
}

std::vector<SplitPlan> make_splits(std::size_t n, std::uint64_t master_seed, std::size_t k) {
    if (k < 1) throw std::invalid_argument("make_splits needs k >= 1");
    std::vector<SplitPlan> plans;
    plans.reserve(k);
    for (std::size_t s = 0; s < k; ++s) plans.push_back(make_split(n, master_seed, s));
    return plans;
}

}  // namespace evidencenet
