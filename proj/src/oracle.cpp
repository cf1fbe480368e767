#include "evidencenet/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace evidencenet::oracle {

AnalyticBLR AnalyticBLR::from_dataset(const Dataset& train) {
    AnalyticBLR blr;
    const auto n = train.features.rows();
    const auto p = train.features.cols();
    blr.design.resize(n, p + 1);
    blr.design.leftCols(p) = train.features;
    blr.design.col(p).setOnes();
    blr.y = train.targets;
    return blr;
}

namespace {

// A = I + Phi^T Phi, the posterior precision of the coefficients.
Eigen::LLT<Eigen::MatrixXd> precision_factor(const Eigen::MatrixXd& design) {
    const auto p = design.cols();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(p, p);
    a.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(a.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success) throw std::runtime_error("Bayesian linear regression: singular system");
    return llt;
}

}  // namespace

double blr_log_evidence(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    if (design.rows() != y.size()) throw std::invalid_argument("design rows must match targets");
    const double n = static_cast<double>(y.size());
    if (design.cols() == 0) return -0.5 * (y.squaredNorm() + n * std::log(2.0 * std::numbers::pi));
    const auto llt = precision_factor(design);
    // Woodbury and the matrix determinant lemma reduce the n x n system to p x p.
    const Eigen::VectorXd b = design.transpose() * y;
    const Eigen::VectorXd half = llt.matrixL().solve(b);
    const double quad = y.squaredNorm() - half.squaredNorm();
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (quad + logdet + n * std::log(2.0 * std::numbers::pi));
}

double blr_log_evidence(const Dataset& train) {
    const auto blr = AnalyticBLR::from_dataset(train);
    return blr_log_evidence(blr.design, blr.y);
}

double AnalyticBLR::log_evidence() const { return blr_log_evidence(design, y); }

Eigen::VectorXd AnalyticBLR::posterior_mean() const {
    return precision_factor(design).solve(design.transpose() * y);
}

Eigen::MatrixXd AnalyticBLR::posterior_cov() const {
    const auto p = design.cols();
    return precision_factor(design).solve(Eigen::MatrixXd::Identity(p, p));
}

void AnalyticBLR::predict(const Eigen::MatrixXd& X, Eigen::VectorXd& mean, Eigen::VectorXd& sd) const {
    const auto p = design.cols();
    if (X.cols() + 1 != p) throw std::invalid_argument("feature count does not match the design matrix");
    Eigen::MatrixXd phi(X.rows(), p);
    phi.leftCols(p - 1) = X;
    phi.col(p - 1).setOnes();
    mean = phi * posterior_mean();
    const Eigen::MatrixXd cov = posterior_cov();
    sd.resize(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) sd(i) = std::sqrt(std::max(0.0, phi.row(i).dot(cov * phi.row(i).transpose())));
}

double grid_log_evidence(const std::function<double(std::span<const double>)>& log_like, std::size_t dims,
                         std::size_t nodes_per_dim) {
    if (dims == 0 || dims > 3) throw std::invalid_argument("grid quadrature supports 1 to 3 dimensions");
    if (nodes_per_dim == 0) throw std::invalid_argument("grid quadrature needs at least one node per dimension");
    const double h = 1.0 / static_cast<double>(nodes_per_dim);
    std::size_t total = 1;
    for (std::size_t d = 0; d < dims; ++d) total *= nodes_per_dim;

    // Running log-sum-exp with rescaling when a new maximum appears.
    double max_v = -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    std::vector<double> u(dims);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (std::size_t d = 0; d < dims; ++d) {
            u[d] = (static_cast<double>(rem % nodes_per_dim) + 0.5) * h;
            rem /= nodes_per_dim;
        }
        const double v = log_like(u);
        if (v == -std::numeric_limits<double>::infinity() || std::isnan(v)) continue;
        if (v > max_v) {
            acc = acc * std::exp(max_v - v) + 1.0;
            max_v = v;
        } else {
            acc += std::exp(v - max_v);
        }
    }
    if (acc == 0.0) return -std::numeric_limits<double>::infinity();
    return max_v + std::log(acc) + static_cast<double>(dims) * std::log(h);
}

}  // namespace evidencenet::oracle
