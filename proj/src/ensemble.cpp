#include "evidencenet/ensemble.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "evidencenet/network.hpp"

namespace evidencenet {

namespace {

std::vector<double> resolve_prior(std::size_t m, std::span<const double> prior) {
    if (m == 0) throw std::invalid_argument("an ensemble needs at least one member");
    if (prior.empty()) return std::vector<double>(m, 1.0 / static_cast<double>(m));
    if (prior.size() != m) throw std::invalid_argument("one prior weight per member required");
    double s = 0.0;
    for (double p : prior) {
        if (!(p >= 0.0)) throw std::invalid_argument("prior weights must be non-negative");
        s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("prior weights must sum to 1");
    return {prior.begin(), prior.end()};
}

std::vector<double> log_joint(std::span<const double> log_zs, const std::vector<double>& prior) {
    std::vector<double> out(log_zs.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = prior[i] > 0.0 ? log_zs[i] + std::log(prior[i]) : -std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace

ModelPosterior model_posterior(std::span<const double> log_zs, std::span<const double> prior) {
    ModelPosterior mp;
    mp.prior = resolve_prior(log_zs.size(), prior);
    mp.log_zs.assign(log_zs.begin(), log_zs.end());
    const auto lj = log_joint(log_zs, mp.prior);
    const double norm = log_sum_exp(lj);
    if (!std::isfinite(norm)) throw std::invalid_argument("model posterior undefined: every member has zero mass");
    mp.post.resize(lj.size());
    double total = 0.0;
    for (std::size_t i = 0; i < lj.size(); ++i) total += mp.post[i] = std::exp(lj[i] - norm);
    for (auto& p : mp.post) p /= total;
    return mp;
}

double combined_evidence(std::span<const double> log_zs, std::span<const double> prior) {
    const auto p = resolve_prior(log_zs.size(), prior);
    return log_sum_exp(log_joint(log_zs, p));
}

WeightedSamples combined_samples(std::span<const WeightedSamples> members, const ModelPosterior& posterior) {
    if (members.size() != posterior.post.size())
        throw std::invalid_argument("combined_samples: sample sets missing for some ensemble members");
    WeightedSamples out;
    Eigen::Index rows = 0, cols = 0;
    for (const auto& m : members) {
        rows += m.thetas.rows();
        cols = std::max(cols, m.thetas.cols());
    }
    // Members may have different dimensions; shorter rows are zero padded.
    out.thetas = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto& m = members[i];
        out.thetas.block(r, 0, m.thetas.rows(), m.thetas.cols()) = m.thetas;
        r += m.thetas.rows();
        for (double w : m.weights) {
            out.weights.push_back(w * posterior.post[i]);
            out.model_tag.push_back(i);
        }
    }
    if (members.size() == 1) out.source_model = members.front().source_model;
    return out;
}

Moments combined_predictive(std::span<const Moments> members, std::span<const double> post) {
    if (members.empty() || members.size() != post.size())
        throw std::invalid_argument("combined_predictive: one posterior weight per member required");
    const auto n = members.front().mean.size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i].mean.size() != n) throw std::invalid_argument("members predict different input counts");
        mean += post[i] * members[i].mean;
    }
    Eigen::VectorXd var = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < members.size(); ++i)
        var += post[i] * (members[i].sd.array().square() + (members[i].mean - mean).array().square()).matrix();
    return {mean, var.array().max(0.0).sqrt()};
}

Moments predictive_mixture(const WeightedSamples& combined, std::span<const ModelSpec> members,
                           const Eigen::MatrixXd& X) {
    if (combined.model_tag.size() != combined.size())
        throw std::invalid_argument("predictive_mixture needs tagged samples");
    Eigen::MatrixXd preds(static_cast<Eigen::Index>(combined.size()), X.rows());
    for (std::size_t k = 0; k < combined.size(); ++k) {
        const auto& spec = members[combined.model_tag[k]];
        const auto lay = make_layout(spec);
        const auto row = combined.thetas.row(static_cast<Eigen::Index>(k));
        std::vector<double> net(lay.n_network);
        for (std::size_t j = 0; j < net.size(); ++j) net[j] = row(static_cast<Eigen::Index>(lay.network_offset + j));
        preds.row(static_cast<Eigen::Index>(k)) = forward_batch_flat(spec.arch, net, X).transpose();
    }
    return weighted_moments(preds, combined.weights);
}

}  // namespace evidencenet
