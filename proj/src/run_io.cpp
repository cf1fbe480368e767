#include "evidencenet/run_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace evidencenet {

using nlohmann::json;

namespace {

// JSON has no infinities; store them as strings.
json number_or_string(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double read_number(const json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) out.push_back(cur);
    return out;
}

double parse_field(const std::string& s, const fs::path& path, std::size_t line) {
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

}  // namespace

void to_json(json& j, const RunSummary& s) {
    j = json{{"kind", s.kind},
             {"model_name", s.model_name},
             {"split_index", s.split_index},
             {"log_z", number_or_string(s.log_z)},
             {"log_z_err", number_or_string(s.log_z_err)},
             {"info_h", number_or_string(s.info_h)},
             {"n_like_calls", s.n_like_calls},
             {"n_iters", s.n_iters},
             {"converged", s.converged},
             {"seed", s.seed},
             {"master_seed", s.master_seed},
             {"dim", s.dim},
             {"n_live", s.n_live},
             {"n_repeats", s.n_repeats},
             {"test_loss", number_or_string(s.test_loss)},
             {"test_loss_err", number_or_string(s.test_loss_err)},
             {"train_loss", number_or_string(s.train_loss)},
             {"ess", number_or_string(s.ess)},
             {"config_hash", s.config_hash}};
    if (s.kind == "ensemble") j["members"] = s.members;
    if (!s.config.is_null()) j["config"] = s.config;
}

void from_json(const json& j, RunSummary& s) {
    s.kind = j.value("kind", std::string("run"));
    s.model_name = j.at("model_name").get<std::string>();
    s.split_index = j.at("split_index").get<std::size_t>();
    s.log_z = read_number(j.at("log_z"));
    s.log_z_err = read_number(j.at("log_z_err"));
    s.info_h = read_number(j.at("info_h"));
    s.n_like_calls = j.at("n_like_calls").get<std::size_t>();
    s.n_iters = j.at("n_iters").get<std::size_t>();
    s.converged = j.at("converged").get<bool>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.master_seed = j.value("master_seed", std::uint64_t{0});
    s.dim = j.value("dim", std::size_t{0});
    s.n_live = j.value("n_live", std::size_t{0});
    s.n_repeats = j.value("n_repeats", std::size_t{0});
    s.test_loss = j.contains("test_loss") ? read_number(j["test_loss"]) : 0.0;
    s.test_loss_err = j.contains("test_loss_err") ? read_number(j["test_loss_err"]) : 0.0;
    s.train_loss = j.contains("train_loss") ? read_number(j["train_loss"]) : 0.0;
    s.ess = j.contains("ess") ? read_number(j["ess"]) : 0.0;
    s.config_hash = j.value("config_hash", std::string());
    s.members = j.value("members", json::array());
    s.config = j.value("config", json());
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("cannot format number");
    return std::string(buf, ptr);
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string dead_points_csv(const NsRun& run) {
    std::string out = "logL,logX,logWeight";
    for (std::size_t i = 0; i < run.dim; ++i) out += ",theta_" + std::to_string(i);
    for (std::size_t i = 0; i < run.dim; ++i) out += ",u_" + std::to_string(i);
    out += '\n';
    for (const auto& p : run.dead) {
        out += format_double(p.logL);
        out += ',';
        out += format_double(p.log_x);
        out += ',';
        out += format_double(p.log_weight);
        for (double v : p.theta) (out += ',') += format_double(v);
        for (double v : p.u) (out += ',') += format_double(v);
        out += '\n';
    }
    return out;
}

void write_dead_points(const fs::path& path, const NsRun& run) { write_file_atomic(path, dead_points_csv(run)); }

std::vector<DeadPoint> read_dead_points(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty dead-point file");
    const auto header = split_csv(line);
    if (header.size() < 3 || (header.size() - 3) % 2 != 0 || header[0] != "logL")
        throw std::runtime_error(path.string() + ": unexpected dead-point header");
    const std::size_t dim = (header.size() - 3) / 2;
    std::vector<DeadPoint> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
        DeadPoint p;
        p.logL = parse_field(f[0], path, line_no);
        p.log_x = parse_field(f[1], path, line_no);
        p.log_weight = parse_field(f[2], path, line_no);
        p.theta.resize(dim);
        p.u.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            p.theta[i] = parse_field(f[3 + i], path, line_no);
            p.u[i] = parse_field(f[3 + dim + i], path, line_no);
        }
        out.push_back(std::move(p));
    }
    return out;
}

void write_summary(const fs::path& path, const RunSummary& summary) {
    write_file_atomic(path, json(summary).dump(2) + "\n");
}

RunSummary read_summary(const fs::path& path) {
    try {
        return json::parse(read_file(path)).get<RunSummary>();
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": malformed summary: " + e.what());
    }
}

std::string predictions_csv(const std::vector<PredictionRow>& rows) {
    std::string out = "index,y_true,y_hat,y_sd\n";
    for (const auto& r : rows)
        out += std::to_string(r.index) + "," + format_double(r.y_true) + "," + format_double(r.y_hat) + "," +
               format_double(r.y_sd) + "\n";
    return out;
}

void write_predictions(const fs::path& path, const std::vector<PredictionRow>& rows) {
    write_file_atomic(path, predictions_csv(rows));
}

std::vector<PredictionRow> read_predictions(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line != "index,y_true,y_hat,y_sd")
        throw std::runtime_error(path.string() + ": unexpected predictions header");
    std::vector<PredictionRow> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 4) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 4 columns");
        PredictionRow r;
        r.index = static_cast<std::size_t>(parse_field(f[0], path, line_no));
        r.y_true = parse_field(f[1], path, line_no);
        r.y_hat = parse_field(f[2], path, line_no);
        r.y_sd = parse_field(f[3], path, line_no);
        out.push_back(r);
    }
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 computation failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return os.str();
}

void write_checksums(const fs::path& dir, const std::vector<std::string>& files) {
    std::string out;
    for (const auto& f : files) out += sha256_hex(read_file(dir / f)) + "  " + f + "\n";
    write_file_atomic(dir / kChecksumFile, out);
}

std::vector<std::string> verify_checksums(const fs::path& dir) {
    std::istringstream in(read_file(dir / kChecksumFile));
    std::vector<std::string> bad;
    std::string line;
    while (std::getline(in, line)) {
        if (line.size() < 67) continue;
        const auto expected = line.substr(0, 64);
        const auto name = line.substr(66);
        const auto file = dir / name;
        if (!fs::exists(file) || sha256_hex(read_file(file)) != expected) bad.push_back(name);
    }
    return bad;
}

}  // namespace evidencenet
