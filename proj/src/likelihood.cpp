#include "evidencenet/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace evidencenet {

double gaussian_log_like(double chi2, std::size_t n, double sigma) {
    const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    return -chi2 / (2.0 * sigma * sigma) - static_cast<double>(n) * (std::log(sigma) + half_log_2pi);
}

GaussianLikelihood::GaussianLikelihood(ModelSpec spec, const Dataset& train)
    : spec_(std::move(spec)), layout_(make_layout(spec_)), n_(train.size()) {
    if (static_cast<std::size_t>(train.features.cols()) != spec_.arch.input_size && n_ > 0)
        throw std::invalid_argument("dataset feature count does not match the architecture input size");
    x_.resize(n_ * spec_.arch.input_size);
    y_.resize(n_);
    for (std::size_t r = 0; r < n_; ++r) {
        for (std::size_t c = 0; c < spec_.arch.input_size; ++c)
            x_[r * spec_.arch.input_size + c] = train.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        y_[r] = train.targets(static_cast<Eigen::Index>(r));
    }
}

double GaussianLikelihood::chi_squared(std::span<const double> theta) const {
    if (theta.size() != layout_.total()) throw std::invalid_argument("log_like: parameter dimension mismatch");
    const auto net = theta.subspan(layout_.network_offset, layout_.n_network);
    const std::size_t d = spec_.arch.input_size;
    double chi2 = 0.0;
    for (std::size_t r = 0; r < n_; ++r) {
        const double f = forward_flat(spec_.arch, net, std::span<const double>(x_.data() + r * d, d));
        const double res = y_[r] - f;
        chi2 += res * res;
    }
    return chi2;
}

double GaussianLikelihood::operator()(std::span<const double> theta) const {
    const double sigma = layout_.sigma_index ? theta[*layout_.sigma_index] : 1.0;
    if (!(sigma > 0.0)) throw std::invalid_argument("log_like: likelihood width must be positive");
    double chi2;
    try {
        chi2 = chi_squared(theta);
    } catch (const NonFiniteError&) {
        return -std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(chi2)) return -std::numeric_limits<double>::infinity();
    return gaussian_log_like(chi2, n_, sigma);
}

LogLikelihood log_like(const ModelSpec& spec, std::span<const double> theta, const Dataset& train) {
    return {GaussianLikelihood(spec, train)(theta), 1};
}

}  // namespace evidencenet
