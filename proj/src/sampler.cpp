#include "evidencenet/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "evidencenet/likelihood.hpp"
#include "evidencenet/transform.hpp"

namespace evidencenet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxSliceRetries = 100;
constexpr double kMinSliceWidth = 1e-12;

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Strict ordering of (logL, label) pairs; labels resolve plateaus.
bool below(double logL_a, double label_a, double logL_b, double label_b) {
    return logL_a < logL_b || (logL_a == logL_b && label_a < label_b);
}

Eigen::MatrixXd random_orthonormal_basis(std::size_t dim, CounterRng& rng) {
    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

Eigen::VectorXd random_unit_vector(std::size_t dim, CounterRng& rng) {
    Eigen::VectorXd e(static_cast<Eigen::Index>(dim));
    double norm = 0.0;
    do {
        for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = rng.normal();
        norm = e.norm();
    } while (norm == 0.0);
    return e / norm;
}

}  // namespace

void SamplerConfig::validate() const {
    if (n_live < 2) throw std::invalid_argument("n_live must be at least 2");
    if (!(termination_frac > 0.0 && termination_frac < 1.0))
        throw std::invalid_argument("termination_frac must lie in (0, 1)");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    if (!(slice_width > 0.0)) throw std::invalid_argument("slice_width must be positive");
    if (max_step_out < 1) throw std::invalid_argument("max_step_out must be positive");
}

Problem make_problem(const ModelSpec& spec, const Dataset& train) {
    auto transform = std::make_shared<const PriorTransform>(spec);
    auto like = std::make_shared<const GaussianLikelihood>(spec, train);
    Problem p;
    p.dim = transform->dim();
    p.prior_transform = [transform](std::span<const double> u, std::span<double> theta) { (*transform)(u, theta); };
    p.log_likelihood = [like](std::span<const double> theta) { return (*like)(theta); };
    return p;
}

Eigen::MatrixXd live_cholesky(std::span<const LivePoint> live, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
    if (live.size() < 2) return identity;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& p : live) mean += Eigen::Map<const Eigen::VectorXd>(p.u.data(), d);
    mean /= static_cast<double>(live.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& p : live) {
        const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(p.u.data(), d) - mean;
        cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(live.size() - 1);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) return identity;
    Eigen::MatrixXd l = llt.matrixL();
    const double scale = std::sqrt(cov.diagonal().maxCoeff());
    if (!(scale > 0.0)) return identity;
    for (Eigen::Index i = 0; i < d; ++i)
        if (!(l(i, i) > 1e-14 * scale)) return identity;
    return l;
}

ConstrainedSampler::ConstrainedSampler(const Problem& problem, const SamplerConfig& cfg)
    : problem_(problem), cfg_(cfg), theta_scratch_(problem.dim) {}

double ConstrainedSampler::evaluate(std::span<const double> u, std::span<double> theta) {
    problem_.prior_transform(u, theta);
    ++n_calls_;
    const double v = problem_.log_likelihood(theta);
    return std::isnan(v) ? kNegInf : v;
}

LivePoint ConstrainedSampler::sample(std::span<const LivePoint> live, double logL_star, double label_star,
                                     std::size_t n_repeats, CounterRng& rng, const Eigen::MatrixXd& chol) {
    if (live.empty()) throw std::invalid_argument("constrained_sample needs at least one live point");
    const std::size_t dim = problem_.dim;
    const auto d = static_cast<Eigen::Index>(dim);
    const auto& seed = live[static_cast<std::size_t>(rng.below(live.size()))];

    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(seed.u.data(), d);
    std::vector<double> theta = seed.theta;
    double logL = seed.logL;

    Eigen::VectorXd trial(d);
    std::span<double> trial_span(trial.data(), dim);
    auto inside = [&](double t, const Eigen::VectorXd& dir, double& out_logL) {
        for (Eigen::Index i = 0; i < d; ++i) {
            trial(i) = x(i) + t * dir(i);
            if (trial(i) < 0.0 || trial(i) > 1.0) {
                out_logL = kNegInf;
                return false;
            }
        }
        out_logL = evaluate(trial_span, theta_scratch_);
        return out_logL >= logL_star;
    };

    const double w = cfg_.slice_width;
    Eigen::MatrixXd basis;
    for (std::size_t rep = 0; rep < n_repeats; ++rep) {
        if (rep % dim == 0) basis = random_orthonormal_basis(dim, rng);
        Eigen::VectorXd dir = chol * basis.col(static_cast<Eigen::Index>(rep % dim));

        bool moved = false;
        for (std::size_t attempt = 0; attempt < kMaxSliceRetries && !moved; ++attempt) {
            if (attempt > 0) dir = chol * random_unit_vector(dim, rng);
            double left = -rng.uniform() * w;
            double right = left + w;
            double probe;
            auto j = static_cast<std::size_t>(std::floor(static_cast<double>(cfg_.max_step_out) * rng.uniform()));
            std::size_t k = cfg_.max_step_out - 1 - j;
            while (j > 0 && inside(left, dir, probe)) {
                left -= w;
                --j;
            }
            while (k > 0 && inside(right, dir, probe)) {
                right += w;
                --k;
            }
            while (right - left > kMinSliceWidth * w) {
                const double t = left + rng.uniform() * (right - left);
                double trial_logL;
                if (inside(t, dir, trial_logL)) {
                    x = trial;
                    std::copy(theta_scratch_.begin(), theta_scratch_.end(), theta.begin());
                    logL = trial_logL;
                    moved = true;
                    break;
                }
                (t < 0.0 ? left : right) = t;
            }
        }
        if (!moved) throw std::runtime_error("slice sampling failed to find a point inside the likelihood contour");
    }

    LivePoint out;
    out.u.assign(x.data(), x.data() + d);
    out.theta = std::move(theta);
    out.logL = logL;
    out.label = logL == logL_star ? label_star + (1.0 - label_star) * rng.uniform_open() : rng.uniform();
    return out;
}

LivePoint constrained_sample(const Problem& problem, std::span<const LivePoint> live, double logL_star,
                             std::size_t n_repeats, CounterRng& rng) {
    SamplerConfig cfg;
    ConstrainedSampler cs(problem, cfg);
    return cs.sample(live, logL_star, 0.0, n_repeats, rng, live_cholesky(live, problem.dim));
}

void integrate_evidence(NsRun& run) {
    double log_z = kNegInf;
    for (const auto& p : run.dead) log_z = log_add_exp(log_z, p.log_weight);
    double h = 0.0;
    if (log_z > kNegInf) {
        for (const auto& p : run.dead) {
            if (p.log_weight == kNegInf) continue;
            h += std::exp(p.log_weight - log_z) * (p.logL - log_z);
        }
    }
    h = std::max(h, 0.0);
    run.log_z = log_z;
    run.info_h = h;
    run.log_z_err = std::sqrt(h / static_cast<double>(run.config.n_live));
}

NsRun run_nested_sampling(const Problem& problem, const SamplerConfig& cfg) {
    cfg.validate();
    const std::size_t dim = problem.dim;
    if (dim < 1) throw std::invalid_argument("nested sampling needs at least one dimension");
    const std::size_t n_live = cfg.n_live;
    const double n = static_cast<double>(n_live);
    const std::size_t n_repeats = cfg.repeats_for(dim);

    CounterRng rng(cfg.seed, 0x6e65737465640000ULL);
    ConstrainedSampler slicer(problem, cfg);

    NsRun result;
    result.dim = dim;
    result.config = cfg;

    std::vector<LivePoint> live(n_live);
    std::size_t init_calls = 0;
    bool any_finite = false;
    for (auto& p : live) {
        p.u.resize(dim);
        p.theta.resize(dim);
        for (auto& v : p.u) v = rng.uniform_open();
        problem.prior_transform(p.u, p.theta);
        p.logL = problem.log_likelihood(p.theta);
        if (std::isnan(p.logL)) p.logL = kNegInf;
        p.label = rng.uniform();
        ++init_calls;
        any_finite = any_finite || p.logL > kNegInf;
    }
    if (!any_finite) throw std::runtime_error("every initial live point has zero likelihood");

    const double log_shell = std::log(-std::expm1(-1.0 / n));  // log(1 - e^{-1/n})
    const double log_frac = std::log(cfg.termination_frac);
    double log_z = kNegInf;
    std::size_t iter = 0;

    while (true) {
        if (iter >= cfg.max_iters) {
            result.converged = false;
            break;
        }
        std::size_t worst = 0;
        for (std::size_t i = 1; i < live.size(); ++i)
            if (below(live[i].logL, live[i].label, live[worst].logL, live[worst].label)) worst = i;

        ++iter;
        const double log_x = -static_cast<double>(iter) / n;
        const double log_dx = -static_cast<double>(iter - 1) / n + log_shell;
        LivePoint dying = std::move(live[worst]);
        live[worst] = std::move(live.back());
        live.pop_back();

        const double log_w = dying.logL == kNegInf ? kNegInf : dying.logL + log_dx;
        log_z = log_add_exp(log_z, log_w);
        const double logL_star = dying.logL;
        const double label_star = dying.label;
        result.dead.push_back({std::move(dying.u), std::move(dying.theta), logL_star, log_x, log_w});

        const Eigen::MatrixXd chol = live_cholesky(live, dim);
        live.push_back(slicer.sample(live, logL_star, label_star, n_repeats, rng, chol));

        double max_logL = kNegInf;
        for (const auto& p : live) max_logL = std::max(max_logL, p.logL);
        if (log_z > kNegInf && max_logL + log_x < log_z + log_frac) {
            result.converged = true;
            break;
        }
    }

    // Remaining live points share the final volume equally.
    std::sort(live.begin(), live.end(),
              [](const LivePoint& a, const LivePoint& b) { return below(a.logL, a.label, b.logL, b.label); });
    const double log_x_final = -static_cast<double>(iter) / n;
    const double log_share = log_x_final - std::log(n);
    for (std::size_t j = 0; j < live.size(); ++j) {
        auto& p = live[j];
        const double log_x = log_x_final + std::log((n - static_cast<double>(j) - 0.5) / n);
        const double log_w = p.logL == kNegInf ? kNegInf : p.logL + log_share;
        result.dead.push_back({std::move(p.u), std::move(p.theta), p.logL, log_x, log_w});
    }

    result.n_iters = iter;
    result.n_like_calls = init_calls + slicer.n_calls();
    integrate_evidence(result);
    return result;
}

WeightedSamples posterior_samples(const NsRun& run, const ModelSpec& spec) {
    WeightedSamples s;
    s.source_model = spec;
    const auto n = static_cast<Eigen::Index>(run.dead.size());
    const auto d = static_cast<Eigen::Index>(run.dim);
    s.thetas.resize(n, d);
    s.weights.resize(run.dead.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = run.dead[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d; ++j) s.thetas(i, j) = p.theta[static_cast<std::size_t>(j)];
        const double w = p.log_weight == kNegInf ? 0.0 : std::exp(p.log_weight - run.log_z);
        s.weights[static_cast<std::size_t>(i)] = w;
        total += w;
    }
    if (total > 0.0)
        for (auto& w : s.weights) w /= total;
    return s;
}

}  // namespace evidencenet
