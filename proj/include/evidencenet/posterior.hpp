#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "evidencenet/model.hpp"

namespace evidencenet {

/// Posterior represented by weighted physical-space samples (one per row).
struct WeightedSamples {
    Eigen::MatrixXd thetas;  // n_samples x dim
    std::vector<double> weights;  // normalized to 1
    ModelSpec source_model;
    std::vector<std::size_t> model_tag;  // member index after ensembling; empty otherwise

    std::size_t size() const { return weights.size(); }

    /// Kish effective sample size (sum w)^2 / sum w^2.
    double effective_sample_size() const;
};

struct PredictiveSummary {
    Eigen::VectorXd y_hat;
    Eigen::VectorXd y_sd;
    double test_loss = 0.0;
    double test_loss_err = 0.0;
};

struct Moments {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
};

/// Weighted mean and standard deviation of f(x; theta) for each row of X.
Moments predictive(const WeightedSamples& samples, const Eigen::MatrixXd& X);

/// Weighted mean and sd of precomputed per-sample predictions
/// (rows = samples, cols = inputs).
Moments weighted_moments(const Eigen::MatrixXd& predictions, std::span<const double> weights);

struct TestLoss {
    double loss = 0.0;   // mean squared error
    double err = 0.0;    // first-order propagation of predictive sd
};

/// E = mean (y - y_hat)^2 and E_err = sqrt(sum (2 (y - y_hat) / n)^2 sd^2).
/// Throws std::invalid_argument on empty or mismatched input.
TestLoss test_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y_sd);

PredictiveSummary summarize(const WeightedSamples& samples, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// One split's results for aggregation.
struct SplitResult {
    double log_z = 0.0;
    double log_z_err = 0.0;
    double test_loss = 0.0;
    double test_loss_err = 0.0;
};

struct AggregateRow {
    std::size_t n_splits = 0;
    double log_z = 0.0;  // log of the mean evidence
    std::optional<double> log_z_err;  // delta-method SEM combined with sampler errors
    double log_z_sampler_err = 0.0;   // sampler-error part alone
    double test_loss = 0.0;
    std::optional<double> test_loss_sem;  // standard error of the mean across splits
    double test_loss_err_mean = 0.0;      // average of per-split propagated errors
};

/// Averages evidences (not log evidences) and losses over splits. With a
/// single split the error fields are left empty.
AggregateRow aggregate_splits(std::span<const SplitResult> runs);

/// log(sum exp(v)), -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);

}  // namespace evidencenet
