#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evidencenet/acceptance.hpp"
#include "evidencenet/experiment.hpp"
#include "evidencenet/model.hpp"
#include "evidencenet/run_io.hpp"

namespace en = evidencenet;

namespace {

constexpr int kUsageError = 2;

struct RunOptions {
    std::string data;
    std::vector<std::string> models;
    bool grid = false;
    bool paper_scale = false;
    std::size_t n_splits = 10;
    std::vector<std::size_t> splits;
    std::size_t n_live = 200;
    std::size_t n_repeats = 0;
    double termination_frac = 1e-3;
    std::size_t max_iters = 50'000'000;
    std::uint64_t seed = 0;
    std::string out = "runs";
    std::size_t threads = 1;
    bool not_reproducible = false;
    bool allow_offgrid = false;
};

int do_run(const RunOptions& o) {
    en::RunConfig cfg;
    cfg.data_path = en::resolve_data_path(o.data.empty() ? std::nullopt : std::optional<en::fs::path>(o.data));
    cfg.models = o.models;
    if (o.grid || (o.paper_scale && cfg.models.empty()))
        for (const auto& s : en::paper_grid()) cfg.models.push_back(s.name());
    cfg.sampler.n_live = o.paper_scale ? 1000 : o.n_live;
    cfg.sampler.n_repeats = o.n_repeats;
    cfg.sampler.termination_frac = o.termination_frac;
    cfg.sampler.max_iters = o.max_iters;
    cfg.master_seed = o.seed;
    cfg.n_splits = o.n_splits;
    cfg.split_indices = o.splits;
    cfg.output_dir = o.out;
    cfg.threads = o.threads;
    cfg.reproducible = !o.not_reproducible;
    cfg.allow_offgrid = o.allow_offgrid;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsageError;
    }
    if (o.paper_scale)
        std::cerr << "warning: paper scale uses 1000 live points; the largest models can take many hours per split\n";

    const auto outcome = en::cmd_run(cfg, std::cerr);
    std::cout << en::read_file(cfg.output_dir / "report.txt");
    for (const auto& f : outcome.failures) std::cerr << "failed: " << f << '\n';
    if (outcome.non_converged > 0) std::cerr << outcome.non_converged << " run(s) did not converge\n";
    return outcome.failures.empty() && outcome.non_converged == 0 ? 0 : 1;
}

int do_ensemble(const std::string& definition, const std::string& name, const std::vector<std::string>& members,
                const std::vector<double>& priors, const std::string& out) {
    en::EnsembleDefinition def;
    if (!definition.empty()) {
        def = en::EnsembleDefinition::from_file(definition);
    } else {
        if (name.empty() || members.empty()) {
            std::cerr << "usage error: give --definition, or --name with one or more --member\n";
            return kUsageError;
        }
        if (!priors.empty() && priors.size() != members.size()) {
            std::cerr << "usage error: --prior must be given once per member\n";
            return kUsageError;
        }
        def.name = name;
        for (std::size_t i = 0; i < members.size(); ++i)
            def.members.push_back({members[i], priors.empty() ? std::nullopt : std::optional<double>(priors[i])});
    }
    const auto outcome = en::cmd_ensemble(def, out.empty() ? en::fs::path("ensembles") / en::model_slug(def.name)
                                                           : en::fs::path(out));
    const auto& a = outcome.aggregate;
    std::cout << def.name << ": " << a.n_splits << " split(s), log Z = " << en::format_double(a.log_z);
    if (a.log_z_err) std::cout << " +/- " << en::format_double(*a.log_z_err);
    std::cout << ", test loss = " << en::format_double(a.test_loss);
    if (a.test_loss_sem) std::cout << " +/- " << en::format_double(*a.test_loss_sem);
    std::cout << '\n';
    return 0;
}

int do_report(const std::vector<std::string>& dirs, const std::string& csv, bool force) {
    std::vector<en::fs::path> roots(dirs.begin(), dirs.end());
    const auto report = en::build_report(roots, force);
    if (csv == "-") {
        std::cout << report.csv();
        return 0;
    }
    std::cout << report.text();
    if (!csv.empty()) en::write_file_atomic(csv, report.csv());
    return 0;
}

int do_oracle(const std::string& data, std::size_t n_splits, std::uint64_t seed) {
    const auto path = en::resolve_data_path(data.empty() ? std::nullopt : std::optional<en::fs::path>(data));
    const auto loaded = en::load_dataset(path);
    const auto o = en::oracle_br(loaded.data, seed, n_splits);
    std::cout << "split,log_z,test_loss,test_loss_err\n";
    for (const auto& s : o.splits)
        std::cout << s.split_index << ',' << en::format_double(s.log_z) << ',' << en::format_double(s.test_loss)
                  << ',' << en::format_double(s.test_loss_err) << '\n';
    std::cout << "# log mean evidence " << en::format_double(o.aggregate.log_z);
    if (o.aggregate.log_z_err) std::cout << " +/- " << en::format_double(*o.aggregate.log_z_err);
    std::cout << ", mean log evidence " << en::format_double(o.mean_log_z) << ", mean test loss "
              << en::format_double(o.aggregate.test_loss);
    if (o.aggregate.test_loss_sem) std::cout << " +/- " << en::format_double(*o.aggregate.test_loss_sem);
    std::cout << '\n';
    return 0;
}

int do_verify(const std::string& data, bool full, const std::vector<int>& only, const std::vector<std::string>& runs,
              std::uint64_t seed) {
    bool ok = true;
    if (!runs.empty()) {
        const auto problems = en::verify_run_dirs({runs.begin(), runs.end()});
        for (const auto& p : problems) std::cout << "FAIL     " << p << '\n';
        if (problems.empty()) std::cout << "PASS     artifact checksums\n";
        ok = problems.empty();
        if (only.empty() && !full) return ok ? 0 : 1;
    }

    en::acceptance::Context ctx;
    ctx.master_seed = seed;
    ctx.log = &std::cerr;
    try {
        const auto path = en::resolve_data_path(data.empty() ? std::nullopt : std::optional<en::fs::path>(data));
        ctx.data = en::load_dataset(path).data;
    } catch (const std::exception& e) {
        ctx.data_error = e.what();
    }

    std::vector<int> ids = only;
    if (ids.empty())
        for (int id = 1; id <= en::acceptance::kCriterionCount; ++id)
            if (full || !en::acceptance::is_slow(id)) ids.push_back(id);
    int passed = 0;
    for (int id : ids) {
        if (id < 1 || id > en::acceptance::kCriterionCount) {
            std::cerr << "usage error: no criterion " << id << '\n';
            return kUsageError;
        }
        const auto r = en::acceptance::run_criterion(id, ctx);
        std::cout << en::acceptance::format_line(r) << std::endl;
        passed += r.passed;
    }
    std::cout << passed << "/" << ids.size() << " criteria passed\n";
    return ok && passed == static_cast<int>(ids.size()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian neural networks sampled by nested sampling, with evidences and ensembles"};
    app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
    app.require_subcommand(1);

    RunOptions ro;
    auto* run = app.add_subcommand("run", "Sample models over seeded data splits and write run directories");
    run->add_option("--data", ro.data, std::string("Data file (default: $") + en::kDataEnvVar + ")");
    run->add_option("-m,--model", ro.models, "Model name, e.g. \"lh sv (4, 4)\"; repeatable");
    run->add_flag("--grid", ro.grid, "Run every model of the experiment grid");
    run->add_flag("--paper-scale", ro.paper_scale, "1000 live points and, without --model, the full grid");
    run->add_option("--n-splits", ro.n_splits, "Number of seeded splits")->capture_default_str();
    run->add_option("--split", ro.splits, "Run only these split indices; repeatable");
    run->add_option("--n-live", ro.n_live, "Live points")->capture_default_str();
    run->add_option("--n-repeats", ro.n_repeats, "Slice moves per replacement (0: 5 x dimension)")
        ->capture_default_str();
    run->add_option("--termination-frac", ro.termination_frac, "Stop when the live evidence is this fraction")
        ->capture_default_str();
    run->add_option("--max-iters", ro.max_iters, "Iteration cap; reaching it marks the run non-converged")
        ->capture_default_str();
    run->add_option("--seed", ro.seed, "Master seed")->capture_default_str();
    run->add_option("-o,--out", ro.out, "Output directory")->capture_default_str();
    run->add_option("-j,--threads", ro.threads, "Concurrent (model, split) runs")->capture_default_str();
    run->add_flag("--not-reproducible", ro.not_reproducible, "Draw a fresh master seed");
    run->add_flag("--allow-offgrid", ro.allow_offgrid, "Accept models outside the experiment grid");

    std::string ens_def, ens_name, ens_out;
    std::vector<std::string> ens_members;
    std::vector<double> ens_priors;
    auto* ens = app.add_subcommand("ensemble", "Combine member runs split by split, weighting by evidence");
    ens->add_option("--definition", ens_def, "JSON file {name, members: [{path, prior}]}");
    ens->add_option("--name", ens_name, "Ensemble name, e.g. \"1l lh sv\"");
    ens->add_option("--member", ens_members, "Model directory containing split_<k> runs; repeatable");
    ens->add_option("--prior", ens_priors, "Prior probability per member, in member order");
    ens->add_option("-o,--out", ens_out, "Output directory (default: ensembles/<name>)");

    std::vector<std::string> rep_dirs;
    std::string rep_csv;
    bool rep_force = false;
    auto* rep = app.add_subcommand("report", "Aggregate run and ensemble directories into a table");
    rep->add_option("dirs", rep_dirs, "Run or ensemble directories")->required();
    rep->add_option("--csv", rep_csv, "Also write CSV to this path ('-' prints only the CSV)");
    rep->add_flag("--force", rep_force, "Report runs from different configurations together");

    std::string or_data;
    std::size_t or_splits = 10;
    std::uint64_t or_seed = 0;
    auto* orc = app.add_subcommand("oracle", "Closed-form reference values");
    auto* br = orc->add_subcommand("br", "Bayesian linear regression evidence and test loss per split");
    orc->require_subcommand(1);
    br->add_option("--data", or_data, std::string("Data file (default: $") + en::kDataEnvVar + ")");
    br->add_option("--n-splits", or_splits, "Number of seeded splits")->capture_default_str();
    br->add_option("--seed", or_seed, "Master seed")->capture_default_str();

    std::string ver_data;
    bool ver_full = false;
    std::vector<int> ver_only;
    std::vector<std::string> ver_runs;
    std::uint64_t ver_seed = 0;
    auto* ver = app.add_subcommand("verify", "Run the acceptance criteria and print a scorecard");
    ver->add_option("--data", ver_data, std::string("Data file (default: $") + en::kDataEnvVar + ")");
    ver->add_flag("--full", ver_full, "Include the long sampler criteria");
    ver->add_option("--only", ver_only, "Run only these criterion numbers");
    ver->add_option("--runs", ver_runs, "Check artifact checksums under these directories");
    ver->add_option("--seed", ver_seed, "Master seed for split-based criteria")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*run) return do_run(ro);
        if (*ens) return do_ensemble(ens_def, ens_name, ens_members, ens_priors, ens_out);
        if (*rep) return do_report(rep_dirs, rep_csv, rep_force);
        if (*br) return do_oracle(or_data, or_splits, or_seed);
        if (*ver) return do_verify(ver_data, ver_full, ver_only, ver_runs, ver_seed);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
