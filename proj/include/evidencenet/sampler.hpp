#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "evidencenet/data.hpp"
#include "evidencenet/model.hpp"
#include "evidencenet/posterior.hpp"
#include "evidencenet/rng.hpp"

namespace evidencenet {

struct SamplerConfig {
    std::size_t n_live = 200;
    std::size_t n_repeats = 0;  // 0 means 5 * dimension
    std::uint64_t seed = 0;
    double termination_frac = 1e-3;
    std::size_t max_iters = 50'000'000;
    double slice_width = 3.0;         // initial bracket, in live-point standard deviations
    std::size_t max_step_out = 100;

    std::size_t repeats_for(std::size_t dim) const { return n_repeats ? n_repeats : 5 * dim; }
    void validate() const;
};

/// A target for the sampler: a prior transform from the unit hypercube and
/// a log-likelihood on the transformed parameters.
struct Problem {
    std::size_t dim = 0;
    std::function<void(std::span<const double> u, std::span<double> theta)> prior_transform;
    std::function<double(std::span<const double> theta)> log_likelihood;
};

/// Binds a model and a training set into a sampling problem.
Problem make_problem(const ModelSpec& spec, const Dataset& train);

struct LivePoint {
    std::vector<double> u;
    std::vector<double> theta;
    double logL = 0.0;
    double label = 0.0;  // breaks likelihood ties on plateaus
};

struct DeadPoint {
    std::vector<double> u;
    std::vector<double> theta;
    double logL = 0.0;
    double log_x = 0.0;       // estimated log prior volume at death
    double log_weight = 0.0;  // logL + log(dX), unnormalized
};

struct NsRun {
    std::vector<DeadPoint> dead;
    double log_z = 0.0;
    double log_z_err = 0.0;
    double info_h = 0.0;
    std::size_t n_like_calls = 0;
    std::size_t n_iters = 0;
    bool converged = false;
    std::size_t dim = 0;
    SamplerConfig config;
};

/// Lower-triangular factor of the live-point covariance in hypercube
/// coordinates, or the identity when the covariance is singular.
Eigen::MatrixXd live_cholesky(std::span<const LivePoint> live, std::size_t dim);

/// Slice-sampling state shared across constrained draws.
class ConstrainedSampler {
public:
    ConstrainedSampler(const Problem& problem, const SamplerConfig& cfg);

    /// Draws a new point above the (logL_star, label_star) constraint by
    /// n_repeats one-dimensional slice moves along directions drawn from the
    /// live-point covariance, starting from a uniformly chosen live point.
    /// Points outside the unit cube count as outside the contour.
    LivePoint sample(std::span<const LivePoint> live, double logL_star, double label_star, std::size_t n_repeats,
                     CounterRng& rng, const Eigen::MatrixXd& chol);

    std::size_t n_calls() const { return n_calls_; }

private:
    double evaluate(std::span<const double> u, std::span<double> theta);

    const Problem& problem_;
    SamplerConfig cfg_;
    std::size_t n_calls_ = 0;
    std::vector<double> theta_scratch_;
};

LivePoint constrained_sample(const Problem& problem, std::span<const LivePoint> live, double logL_star,
                             std::size_t n_repeats, CounterRng& rng);

/// Full nested-sampling run with deterministic compression X_i = exp(-i / n_live).
/// Throws std::runtime_error if every initial point has zero likelihood.
NsRun run_nested_sampling(const Problem& problem, const SamplerConfig& cfg);

inline NsRun run(const ModelSpec& spec, const Dataset& train, const SamplerConfig& cfg) {
    return run_nested_sampling(make_problem(spec, train), cfg);
}

/// Normalized posterior weights of the dead points.
WeightedSamples posterior_samples(const NsRun& run, const ModelSpec& spec = {});

/// Recomputes log Z, H and the error estimate from a dead-point sequence.
void integrate_evidence(NsRun& run);

}  // namespace evidencenet
