#include "evidencenet/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "evidencenet/network.hpp"

namespace evidencenet {

double log_sum_exp(std::span<const double> v) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (v.empty()) return neg_inf;
    const double m = *std::max_element(v.begin(), v.end());
    if (m == neg_inf) return neg_inf;
    if (std::isinf(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

double WeightedSamples::effective_sample_size() const {
    double s = 0.0, s2 = 0.0;
    for (double w : weights) {
        s += w;
        s2 += w * w;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

Moments weighted_moments(const Eigen::MatrixXd& predictions, std::span<const double> weights) {
    if (static_cast<std::size_t>(predictions.rows()) != weights.size())
        throw std::invalid_argument("one weight per sample row required");
    const auto m = predictions.cols();
    Moments out{Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)};
    for (Eigen::Index k = 0; k < predictions.rows(); ++k)
        out.mean += weights[static_cast<std::size_t>(k)] * predictions.row(k).transpose();
    Eigen::VectorXd var = Eigen::VectorXd::Zero(m);
    for (Eigen::Index k = 0; k < predictions.rows(); ++k)
        var += weights[static_cast<std::size_t>(k)] * (predictions.row(k).transpose() - out.mean).array().square().matrix();
    out.sd = var.array().max(0.0).sqrt();
    return out;
}

Moments predictive(const WeightedSamples& samples, const Eigen::MatrixXd& X) {
    if (samples.size() == 0) throw std::invalid_argument("predictive needs at least one sample");
    const auto& spec = samples.source_model;
    const std::size_t offset = make_layout(spec).network_offset;
    const std::size_t n_net = param_count(spec.arch);
    if (static_cast<std::size_t>(samples.thetas.cols()) != offset + n_net)
        throw std::invalid_argument("sample dimension does not match the source model");

    // Samples with zero weight do not contribute; skip their forward passes.
    std::vector<Eigen::Index> rows;
    std::vector<double> w;
    for (std::size_t k = 0; k < samples.size(); ++k)
        if (samples.weights[k] > 0.0) {
            rows.push_back(static_cast<Eigen::Index>(k));
            w.push_back(samples.weights[k]);
        }
    Eigen::MatrixXd preds(static_cast<Eigen::Index>(rows.size()), X.rows());
    std::vector<double> theta(offset + n_net);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t j = 0; j < theta.size(); ++j) theta[j] = samples.thetas(rows[r], static_cast<Eigen::Index>(j));
        const std::span<const double> net(theta.data() + offset, n_net);
        preds.row(static_cast<Eigen::Index>(r)) = forward_batch_flat(spec.arch, net, X).transpose();
    }
    return weighted_moments(preds, w);
}

TestLoss test_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y_sd) {
    if (y.size() == 0) throw std::invalid_argument("test_loss on an empty set");
    if (y.size() != y_hat.size() || y.size() != y_sd.size())
        throw std::invalid_argument("test_loss inputs must have equal lengths");
    const double n = static_cast<double>(y.size());
    const Eigen::ArrayXd res = (y - y_hat).array();
    TestLoss out;
    out.loss = res.square().sum() / n;
    out.err = std::sqrt(((2.0 * res / n).square() * y_sd.array().square()).sum());
    return out;
}

PredictiveSummary summarize(const WeightedSamples& samples, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto m = predictive(samples, X);
    const auto loss = test_loss(y, m.mean, m.sd);
    return {m.mean, m.sd, loss.loss, loss.err};
}

AggregateRow aggregate_splits(std::span<const SplitResult> runs) {
    if (runs.empty()) throw std::invalid_argument("aggregate_splits needs at least one run");
    const std::size_t k = runs.size();
    const double kd = static_cast<double>(k);
    AggregateRow row;
    row.n_splits = k;

    std::vector<double> lz;
    lz.reserve(k);
    for (const auto& r : runs) lz.push_back(r.log_z);
    row.log_z = log_sum_exp(lz) - std::log(kd);

    double loss_sum = 0.0, err_sum = 0.0;
    for (const auto& r : runs) {
        loss_sum += r.test_loss;
        err_sum += r.test_loss_err;
    }
    row.test_loss = loss_sum / kd;
    row.test_loss_err_mean = err_sum / kd;

    // Delta method: d log(Zbar) = dZbar / Zbar, with Z_i / Zbar = exp(lz_i - log Zbar).
    double sampler_var = 0.0;
    for (const auto& r : runs) {
        const double ratio = std::isfinite(row.log_z) ? std::exp(r.log_z - row.log_z) : 0.0;
        sampler_var += std::pow(ratio / kd * r.log_z_err, 2);
    }
    row.log_z_sampler_err = std::sqrt(sampler_var);

    if (k >= 2) {
        double ss = 0.0, ls = 0.0;
        for (const auto& r : runs) {
            const double ratio = std::isfinite(row.log_z) ? std::exp(r.log_z - row.log_z) : 0.0;
            ss += (ratio - 1.0) * (ratio - 1.0);
            ls += (r.test_loss - row.test_loss) * (r.test_loss - row.test_loss);
        }
        const double sem_z = std::sqrt(ss / (kd - 1.0) / kd);
        row.log_z_err = std::sqrt(sem_z * sem_z + sampler_var);
        row.test_loss_sem = std::sqrt(ls / (kd - 1.0) / kd);
    }
    return row;
}

}  // namespace evidencenet
