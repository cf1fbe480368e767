#pragma once

#include <span>
#include <vector>

#include "evidencenet/posterior.hpp"

namespace evidencenet {

/// Posterior probability of each member model given its evidence and a
/// prior over models.
struct ModelPosterior {
    std::vector<ModelSpec> members;
    std::vector<double> prior;
    std::vector<double> log_zs;
    std::vector<double> post;
};

/// Uniform prior when `prior` is empty. Throws std::invalid_argument if the
/// prior does not sum to one or if every member has zero posterior mass.
ModelPosterior model_posterior(std::span<const double> log_zs, std::span<const double> prior = {});

/// log sum_m Z_m P(m).
double combined_evidence(std::span<const double> log_zs, std::span<const double> prior = {});

/// Union of member samples with each member's weights scaled by its model
/// posterior; model_tag records the member index.
WeightedSamples combined_samples(std::span<const WeightedSamples> members, const ModelPosterior& posterior);

/// Predictive moments of an evidence-weighted mixture, from per-member
/// predictive moments at the same inputs.
Moments combined_predictive(std::span<const Moments> members, std::span<const double> post);

/// Predictive moments of tagged, combined samples whose members may differ
/// in architecture.
Moments predictive_mixture(const WeightedSamples& combined, std::span<const ModelSpec> members,
                           const Eigen::MatrixXd& X);

}  // namespace evidencenet
