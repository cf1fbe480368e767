#include "evidencenet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "evidencenet/oracle.hpp"
#include "evidencenet/posterior.hpp"

namespace evidencenet {

using nlohmann::json;

fs::path resolve_data_path(const std::optional<fs::path>& explicit_path) {
    fs::path path;
    if (explicit_path && !explicit_path->empty()) {
        path = *explicit_path;
    } else if (const char* env = std::getenv(kDataEnvVar); env && *env) {
        path = env;
    } else {
        throw std::runtime_error(std::string("no data file given: pass --data <path> or set ") + kDataEnvVar);
    }
    if (!fs::is_regular_file(path))
        throw std::runtime_error("data file '" + path.string() + "' not found: pass --data <path> or set " +
                                 kDataEnvVar);
    return path;
}

LoadedData load_dataset(const fs::path& path) {
    const std::string bytes = read_file(path);
    return {whiten(parse_table(bytes, path.string())), sha256_hex(bytes)};
}

std::vector<std::size_t> RunConfig::active_splits() const {
    if (!split_indices.empty()) return split_indices;
    std::vector<std::size_t> out(n_splits);
    for (std::size_t i = 0; i < n_splits; ++i) out[i] = i;
    return out;
}

std::vector<ModelSpec> RunConfig::parsed_models() const {
    std::vector<ModelSpec> out;
    for (const auto& name : models) {
        auto spec = parse_name(name);
        if (!allow_offgrid && !spec.on_grid())
            throw std::invalid_argument("model '" + name +
                                        "' is not part of the experiment grid; pass --allow-offgrid to run it anyway");
        out.push_back(std::move(spec));
    }
    return out;
}

void RunConfig::validate() const {
    if (models.empty()) throw std::invalid_argument("no models given");
    if (n_splits == 0) throw std::invalid_argument("n_splits must be positive");
    for (auto k : split_indices)
        if (k >= n_splits)
            throw std::invalid_argument("split index " + std::to_string(k) + " out of range for " +
                                        std::to_string(n_splits) + " splits");
    if (threads == 0) throw std::invalid_argument("threads must be positive");
    sampler.validate();
    (void)parsed_models();
}

json RunConfig::protocol_snapshot(const std::string& data_sha) const {
    return json{{"data_sha256", data_sha},
                {"master_seed", master_seed},
                {"n_splits", n_splits},
                {"n_live", sampler.n_live},
                {"n_repeats", sampler.n_repeats},
                {"termination_frac", sampler.termination_frac},
                {"max_iters", sampler.max_iters},
                {"slice_width", sampler.slice_width},
                {"max_step_out", sampler.max_step_out}};
}

std::string config_hash(const json& snapshot) { return sha256_hex(snapshot.dump()).substr(0, 16); }

std::uint64_t run_seed(std::uint64_t master_seed, const std::string& model_name, std::size_t split_index) {
    return mix64(mix64(master_seed ^ stable_hash(model_name)) + split_index);
}

std::string model_slug(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (c == ' ') {
            if (!out.empty() && out.back() != '_' && out.back() != '-') out += '_';
        } else if (c == ',') {
            out += '-';
        } else if (c != '(' && c != ')') {
            out += c;
        }
    }
    while (!out.empty() && (out.back() == '_' || out.back() == '-')) out.pop_back();
    // "_-" arises from ", " sequences; collapse to "-".
    std::string clean;
    for (char c : out) {
        if (c == '-' && !clean.empty() && clean.back() == '_') clean.back() = '-';
        else if (c == '_' && !clean.empty() && clean.back() == '-') continue;
        else clean += c;
    }
    return clean;
}

RunArtifacts run_one(const ModelSpec& spec, const Dataset& data, const SplitPlan& plan, const SamplerConfig& cfg,
                     std::uint64_t master_seed, const std::string& hash) {
    const auto name = spec.name();
    const Dataset train = data.subset(plan.train_idx);
    const Dataset test = data.subset(plan.test_idx);

    SamplerConfig scfg = cfg;
    scfg.seed = run_seed(master_seed, name, plan.split_index);

    RunArtifacts a;
    a.run = run(spec, train, scfg);
    const auto samples = posterior_samples(a.run, spec);
    const auto test_summary = summarize(samples, test.features, test.targets);
    const auto train_summary = summarize(samples, train.features, train.targets);

    auto& s = a.summary;
    s.model_name = name;
    s.split_index = plan.split_index;
    s.log_z = a.run.log_z;
    s.log_z_err = a.run.log_z_err;
    s.info_h = a.run.info_h;
    s.n_like_calls = a.run.n_like_calls;
    s.n_iters = a.run.n_iters;
    s.converged = a.run.converged;
    s.seed = scfg.seed;
    s.master_seed = master_seed;
    s.dim = a.run.dim;
    s.n_live = scfg.n_live;
    s.n_repeats = scfg.repeats_for(a.run.dim);
    s.test_loss = test_summary.test_loss;
    s.test_loss_err = test_summary.test_loss_err;
    s.train_loss = train_summary.test_loss;
    s.ess = samples.effective_sample_size();
    s.config_hash = hash;

    a.predictions.resize(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        a.predictions[i] = {test.row_ids[i], test.targets(static_cast<Eigen::Index>(i)),
                            test_summary.y_hat(static_cast<Eigen::Index>(i)),
                            test_summary.y_sd(static_cast<Eigen::Index>(i))};
    return a;
}

void persist_run(const fs::path& dir, const RunArtifacts& a) {
    fs::create_directories(dir);
    write_dead_points(dir / kDeadPointsFile, a.run);
    write_predictions(dir / kPredictionsFile, a.predictions);
    write_summary(dir / kSummaryFile, a.summary);
}

namespace {

std::string split_dir(std::size_t k) { return "split_" + std::to_string(k); }

// Checksums for every artifact below `root`, with paths relative to it.
void write_tree_checksums(const fs::path& root, const std::vector<fs::path>& dirs) {
    std::vector<std::string> files;
    for (const auto& d : dirs)
        for (const char* f : {kDeadPointsFile, kSummaryFile, kPredictionsFile})
            if (fs::exists(d / f)) files.push_back(fs::relative(d / f, root).generic_string());
    std::sort(files.begin(), files.end());
    write_checksums(root, files);
}

std::vector<fs::path> summary_files(const std::vector<fs::path>& roots) {
    std::vector<fs::path> out;
    for (const auto& root : roots) {
        if (!fs::exists(root)) throw std::runtime_error("'" + root.string() + "' does not exist");
        if (fs::is_regular_file(root)) {
            out.push_back(root);
            continue;
        }
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file() && e.path().filename() == kSummaryFile) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_reports(const fs::path& dir, const Report& report) {
    write_file_atomic(dir / "report.csv", report.csv());
    write_file_atomic(dir / "report.txt", report.text());
}

}  // namespace

RunOutcome cmd_run(const RunConfig& cfg_in, std::ostream& log) {
    RunConfig cfg = cfg_in;
    cfg.validate();
    if (!cfg.reproducible) cfg.master_seed = (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
    const auto specs = cfg.parsed_models();
    const auto loaded = load_dataset(cfg.data_path);
    const auto snapshot = cfg.protocol_snapshot(loaded.sha256);
    const auto hash = config_hash(snapshot);

    struct Job {
        std::size_t model;
        SplitPlan plan;
        fs::path dir;
    };
    std::vector<Job> jobs;
    for (std::size_t m = 0; m < specs.size(); ++m)
        for (auto k : cfg.active_splits())
            jobs.push_back({m, make_split(loaded.data.size(), cfg.master_seed, k),
                            cfg.output_dir / model_slug(specs[m].name()) / split_dir(k)});

    fs::create_directories(cfg.output_dir);
    json config_doc = snapshot;
    config_doc["config_hash"] = hash;
    config_doc["data_path"] = cfg.data_path.generic_string();
    config_doc["models"] = cfg.models;
    config_doc["splits"] = cfg.active_splits();
    config_doc["threads"] = cfg.threads;
    config_doc["reproducible"] = cfg.reproducible;
    write_file_atomic(cfg.output_dir / "config.json", config_doc.dump(2) + "\n");

    RunOutcome outcome;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::vector<char> done(jobs.size(), 0);
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const auto& job = jobs[j];
            const auto name = specs[job.model].name();
            try {
                auto a = run_one(specs[job.model], loaded.data, job.plan, cfg.sampler, cfg.master_seed, hash);
                a.summary.config = snapshot;
                persist_run(job.dir, a);
                std::lock_guard lock(mu);
                done[j] = 1;
                if (!a.summary.converged) ++outcome.non_converged;
                log << name << " split " << job.plan.split_index << ": log Z = " << format_double(a.summary.log_z)
                    << " +/- " << format_double(a.summary.log_z_err) << ", test loss = "
                    << format_double(a.summary.test_loss) << (a.summary.converged ? "" : " [not converged]") << '\n';
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                outcome.failures.push_back(name + " split " + std::to_string(job.plan.split_index) + ": " + e.what());
                log << "error: " << outcome.failures.back() << '\n';
            }
        }
    };
    const std::size_t n_threads = std::min(cfg.threads, std::max<std::size_t>(jobs.size(), 1));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (std::size_t j = 0; j < jobs.size(); ++j)
        if (done[j]) outcome.run_dirs.push_back(jobs[j].dir);
    write_tree_checksums(cfg.output_dir, outcome.run_dirs);
    write_reports(cfg.output_dir, build_report({cfg.output_dir}));
    return outcome;
}

EnsembleDefinition EnsembleDefinition::from_file(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    EnsembleDefinition def;
    def.name = j.at("name").get<std::string>();
    const auto base = path.parent_path();
    for (const auto& m : j.at("members")) {
        EnsembleMember member;
        fs::path p = m.at("path").get<std::string>();
        member.path = p.is_absolute() ? p : base / p;
        if (m.contains("prior")) member.prior = m["prior"].get<double>();
        def.members.push_back(std::move(member));
    }
    return def;
}

namespace {

std::map<std::size_t, fs::path> member_splits(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("ensemble member '" + dir.string() + "' is not a directory");
    std::map<std::size_t, fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (!e.is_directory() || name.rfind("split_", 0) != 0) continue;
        if (!fs::exists(e.path() / kSummaryFile)) continue;
        out[std::stoul(name.substr(6))] = e.path();
    }
    if (out.empty()) throw std::runtime_error("ensemble member '" + dir.string() + "' has no split directories");
    return out;
}

}  // namespace

EnsembleOutcome cmd_ensemble(const EnsembleDefinition& def, const fs::path& out_dir) {
    if (def.members.empty()) throw std::invalid_argument("an ensemble needs at least one member");
    if (def.name.empty()) throw std::invalid_argument("an ensemble needs a name");

    std::vector<double> prior;
    const bool any_prior = std::any_of(def.members.begin(), def.members.end(), [](auto& m) { return m.prior; });
    if (any_prior) {
        for (const auto& m : def.members) {
            if (!m.prior) throw std::invalid_argument("either every ensemble member has a prior or none does");
            prior.push_back(*m.prior);
        }
    }

    std::vector<std::map<std::size_t, fs::path>> splits;
    for (const auto& m : def.members) splits.push_back(member_splits(m.path));
    for (std::size_t i = 1; i < splits.size(); ++i) {
        std::set<std::size_t> a, b;
        for (auto& [k, _] : splits[0]) a.insert(k);
        for (auto& [k, _] : splits[i]) b.insert(k);
        if (a != b)
            throw std::runtime_error("split mismatch between ensemble members '" + def.members[0].path.string() +
                                     "' and '" + def.members[i].path.string() + "'");
    }

    EnsembleOutcome outcome;
    std::vector<SplitResult> results;
    std::vector<fs::path> written;
    for (const auto& [k, _] : splits[0]) {
        std::vector<RunSummary> sums;
        std::vector<std::vector<PredictionRow>> preds;
        std::vector<double> log_zs;
        for (std::size_t m = 0; m < def.members.size(); ++m) {
            sums.push_back(read_summary(splits[m].at(k) / kSummaryFile));
            preds.push_back(read_predictions(splits[m].at(k) / kPredictionsFile));
            log_zs.push_back(sums.back().log_z);
        }
        const std::size_t n = preds[0].size();
        for (std::size_t m = 1; m < preds.size(); ++m) {
            bool same = preds[m].size() == n;
            for (std::size_t i = 0; same && i < n; ++i) same = preds[m][i].index == preds[0][i].index;
            if (!same)
                throw std::runtime_error("split " + std::to_string(k) + ": members were tested on different records");
        }

        const auto post = model_posterior(log_zs, prior);
        std::vector<Moments> moments(preds.size());
        for (std::size_t m = 0; m < preds.size(); ++m) {
            moments[m].mean.resize(static_cast<Eigen::Index>(n));
            moments[m].sd.resize(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) {
                moments[m].mean(static_cast<Eigen::Index>(i)) = preds[m][i].y_hat;
                moments[m].sd(static_cast<Eigen::Index>(i)) = preds[m][i].y_sd;
            }
        }
        const auto mix = combined_predictive(moments, post.post);
        Eigen::VectorXd y(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = preds[0][i].y_true;
        const auto loss = test_loss(y, mix.mean, mix.sd);

        RunSummary s;
        s.kind = "ensemble";
        s.model_name = def.name;
        s.split_index = k;
        s.log_z = combined_evidence(log_zs, prior);
        double var = 0.0, info = 0.0;
        std::set<std::string> hashes;
        for (std::size_t m = 0; m < sums.size(); ++m) {
            var += std::pow(post.post[m] * sums[m].log_z_err, 2);
            info += post.post[m] * sums[m].info_h;
            s.n_like_calls += sums[m].n_like_calls;
            s.n_iters += sums[m].n_iters;
            s.dim += sums[m].dim;
            s.ess += post.post[m] * sums[m].ess;
            s.train_loss += post.post[m] * sums[m].train_loss;
            hashes.insert(sums[m].config_hash);
            s.members.push_back(json{{"name", sums[m].model_name},
                                     {"path", def.members[m].path.generic_string()},
                                     {"prior", post.prior[m]},
                                     {"posterior", post.post[m]},
                                     {"log_z", sums[m].log_z}});
        }
        s.log_z_err = std::sqrt(var);
        s.info_h = info;
        s.converged = std::all_of(sums.begin(), sums.end(), [](auto& x) { return x.converged; });
        s.master_seed = sums[0].master_seed;
        s.n_live = sums[0].n_live;
        s.test_loss = loss.loss;
        s.test_loss_err = loss.err;
        s.config_hash = hashes.size() == 1 ? *hashes.begin() : "mixed";
        if (hashes.size() == 1) s.config = sums[0].config;

        std::vector<PredictionRow> rows(n);
        for (std::size_t i = 0; i < n; ++i)
            rows[i] = {preds[0][i].index, preds[0][i].y_true, mix.mean(static_cast<Eigen::Index>(i)),
                       mix.sd(static_cast<Eigen::Index>(i))};
        const auto dir = out_dir / split_dir(k);
        fs::create_directories(dir);
        write_predictions(dir / kPredictionsFile, rows);
        write_summary(dir / kSummaryFile, s);
        written.push_back(dir);

        results.push_back({s.log_z, s.log_z_err, s.test_loss, s.test_loss_err});
        outcome.per_split.push_back(std::move(s));
    }

    outcome.aggregate = aggregate_splits(results);

    // Second order: aggregate each member over splits first, then combine.
    std::vector<double> member_log_zs, member_errs;
    for (const auto& ms : splits) {
        std::vector<SplitResult> r;
        for (const auto& [k, dir] : ms) {
            const auto s = read_summary(dir / kSummaryFile);
            r.push_back({s.log_z, s.log_z_err, s.test_loss, s.test_loss_err});
        }
        const auto agg = aggregate_splits(r);
        member_log_zs.push_back(agg.log_z);
        member_errs.push_back(agg.test_loss_err_mean);
    }
    const auto member_post = model_posterior(member_log_zs, prior);
    double member_first_err = 0.0;
    for (std::size_t m = 0; m < member_errs.size(); ++m) member_first_err += member_post.post[m] * member_errs[m];
    const auto& a = outcome.aggregate;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json agg{{"name", def.name},
             {"n_splits", a.n_splits},
             {"log_z", a.log_z},
             {"log_z_err", opt(a.log_z_err)},
             {"log_z_sampler_err", a.log_z_sampler_err},
             {"test_loss", a.test_loss},
             {"test_loss_sem", opt(a.test_loss_sem)},
             {"test_loss_err_mean", a.test_loss_err_mean},
             {"members_first", {{"log_z", combined_evidence(member_log_zs, prior)},
                                {"posterior", member_post.post},
                                {"test_loss_err_mean", member_first_err}}}};
    write_file_atomic(out_dir / "aggregate.json", agg.dump(2) + "\n");
    write_tree_checksums(out_dir, written);
    return outcome;
}

Report build_report(const std::vector<fs::path>& roots, bool force) {
    std::map<std::pair<std::string, std::string>, std::vector<RunSummary>> groups;
    std::set<std::string> hashes;
    for (const auto& f : summary_files(roots)) {
        auto s = read_summary(f);
        hashes.insert(s.config_hash);
        groups[{s.kind, s.model_name}].push_back(std::move(s));
    }
    if (hashes.size() > 1 && !force) {
        std::string list;
        for (const auto& h : hashes) list += (list.empty() ? "" : ", ") + (h.empty() ? std::string("<none>") : h);
        throw std::runtime_error("refusing to mix runs from different configurations (" + list +
                                 "); pass --force to report them together");
    }

    Report report;
    for (auto& [key, sums] : groups) {
        std::sort(sums.begin(), sums.end(), [](auto& a, auto& b) { return a.split_index < b.split_index; });
        std::vector<SplitResult> results;
        for (const auto& s : sums) {
            if (!results.empty() && s.split_index == sums[results.size() - 1].split_index)
                throw std::runtime_error("duplicate split " + std::to_string(s.split_index) + " for '" + key.second +
                                         "'");
            results.push_back({s.log_z, s.log_z_err, s.test_loss, s.test_loss_err});
        }
        const auto a = aggregate_splits(results);
        ReportRow row;
        row.kind = key.first;
        row.name = key.second;
        row.dim = sums.front().dim;
        row.n_splits = a.n_splits;
        row.test_loss = a.test_loss;
        row.test_loss_sem = a.test_loss_sem;
        row.test_loss_err_mean = a.test_loss_err_mean;
        row.log_z = a.log_z;
        row.log_z_err = a.log_z_err.value_or(a.log_z_sampler_err);
        row.config_hash = sums.front().config_hash;
        report.rows.push_back(std::move(row));
    }

    auto order = [](const ReportRow& r) {
        std::vector<long> key{r.kind == "ensemble" ? 1L : 0L};
        if (r.kind != "ensemble") {
            try {
                const auto k = report_order_key(parse_name(r.name));
                key.insert(key.end(), k.begin(), k.end());
            } catch (const std::invalid_argument&) {
                key.push_back(std::numeric_limits<long>::max());
            }
        }
        return key;
    };
    std::stable_sort(report.rows.begin(), report.rows.end(), [&](const ReportRow& a, const ReportRow& b) {
        const auto ka = order(a), kb = order(b);
        if (ka != kb) return ka < kb;
        return a.name < b.name;
    });
    return report;
}

std::string Report::csv() const {
    std::string out = "name,test_loss,test_loss_err,log_z,log_z_err,dim\n";
    for (const auto& r : rows) {
        out += "\"" + r.name + "\"," + format_double(r.test_loss) + "," +
               format_double(r.test_loss_sem.value_or(std::numeric_limits<double>::quiet_NaN())) + "," +
               format_double(r.log_z) + "," + format_double(r.log_z_err) + "," + std::to_string(r.dim) + "\n";
    }
    return out;
}

std::string Report::text() const {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-26s %5s %6s  %-18s %9s  %-20s\n", "model", "dim", "splits", "test loss",
                  "prop err", "log Z");
    out += buf;
    for (const auto& r : rows) {
        char loss[64];
        if (r.test_loss_sem)
            std::snprintf(loss, sizeof loss, "%.4f +/- %.4f", r.test_loss, *r.test_loss_sem);
        else
            std::snprintf(loss, sizeof loss, "%.4f", r.test_loss);
        char lz[64];
        std::snprintf(lz, sizeof lz, "%.2f +/- %.2f", r.log_z, r.log_z_err);
        std::snprintf(buf, sizeof buf, "%-26s %5zu %6zu  %-18s %9.4f  %-20s\n", r.name.c_str(), r.dim, r.n_splits,
                      loss, r.test_loss_err_mean, lz);
        out += buf;
    }
    return out;
}

std::vector<std::string> verify_run_dirs(const std::vector<fs::path>& roots) {
    std::vector<std::string> problems;
    for (const auto& root : roots) {
        if (!fs::exists(root)) {
            problems.push_back("'" + root.string() + "' does not exist");
            continue;
        }
        std::vector<fs::path> manifests;
        if (fs::exists(root / kChecksumFile)) manifests.push_back(root / kChecksumFile);
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file() && e.path().filename() == kChecksumFile && e.path() != root / kChecksumFile)
                manifests.push_back(e.path());
        if (manifests.empty()) {
            problems.push_back("'" + root.string() + "' has no " + kChecksumFile);
            continue;
        }
        std::sort(manifests.begin(), manifests.end());
        for (const auto& m : manifests)
            for (const auto& f : verify_checksums(m.parent_path()))
                problems.push_back("checksum mismatch: " + (m.parent_path() / f).generic_string());
    }
    return problems;
}

OracleSummary oracle_br(const Dataset& data, std::uint64_t master_seed, std::size_t n_splits) {
    OracleSummary out;
    std::vector<SplitResult> results;
    for (const auto& plan : make_splits(data.size(), master_seed, n_splits)) {
        const auto train = data.subset(plan.train_idx);
        const auto test = data.subset(plan.test_idx);
        const auto blr = oracle::AnalyticBLR::from_dataset(train);
        Eigen::VectorXd mean, sd;
        blr.predict(test.features, mean, sd);
        const auto loss = test_loss(test.targets, mean, sd);
        out.splits.push_back({plan.split_index, blr.log_evidence(), loss.loss, loss.err});
        results.push_back({out.splits.back().log_z, 0.0, loss.loss, loss.err});
        out.mean_log_z += out.splits.back().log_z / static_cast<double>(n_splits);
    }
    out.aggregate = aggregate_splits(results);
    return out;
}

}  // namespace evidencenet
