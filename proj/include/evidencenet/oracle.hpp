#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "evidencenet/data.hpp"

namespace evidencenet::oracle {

/// Closed-form Bayesian linear regression with unit prior and noise widths:
/// y ~ Normal(0, I + Phi Phi^T). Used as ground truth for the "br" model.
struct AnalyticBLR {
    Eigen::MatrixXd design;  // n x p, intercept column included by the caller
    Eigen::VectorXd y;

    /// Design matrix of features plus an intercept column of ones.
    static AnalyticBLR from_dataset(const Dataset& train);

    double log_evidence() const;

    /// Posterior mean and covariance of the coefficients.
    Eigen::VectorXd posterior_mean() const;
    Eigen::MatrixXd posterior_cov() const;

    /// Posterior mean of f(x) and its standard deviation (excluding noise)
    /// at each row of X (features only; the intercept is appended).
    void predict(const Eigen::MatrixXd& X, Eigen::VectorXd& mean, Eigen::VectorXd& sd) const;
};

double blr_log_evidence(const Dataset& train);
double blr_log_evidence(const Eigen::MatrixXd& design, const Eigen::VectorXd& y);

/// Midpoint-rule log integral of exp(log_like(u)) over [0,1]^dims, with
/// dims <= 3. Throws std::invalid_argument beyond that.
double grid_log_evidence(const std::function<double(std::span<const double>)>& log_like, std::size_t dims,
                         std::size_t nodes_per_dim);

}  // namespace evidencenet::oracle
