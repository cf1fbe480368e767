#include "evidencenet/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace evidencenet {

namespace {

inline double clamp_unit(double u) { return std::clamp(u, kUnitClamp, 1.0 - kUnitClamp); }

double std_normal_quantile(double u) {
    // erfc_inv keeps full relative precision in both tails.
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double gamma_quantile_unit_rate(double u, double alpha) {
    if (u <= 0.5) return boost::math::gamma_p_inv(alpha, u);
    return boost::math::gamma_q_inv(alpha, 1.0 - u);
}

}  // namespace

double gaussian_quantile(double u, double mean, double sd) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("gaussian_quantile: u must lie in (0, 1)");
    if (!(sd > 0.0)) throw std::domain_error("gaussian_quantile: sd must be positive");
    return mean + sd * std_normal_quantile(u);
}

double gamma_precision_quantile(double u, double alpha, double beta) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("gamma_precision_quantile: u must lie in (0, 1)");
    if (!(alpha > 0.0 && beta > 0.0)) throw std::domain_error("gamma_precision_quantile: alpha, beta must be positive");
    const double tau = gamma_quantile_unit_rate(u, alpha) / beta;
    return 1.0 / std::sqrt(tau);
}

void forced_identifiability_inplace(std::span<double> u) {
    const std::size_t k = u.size();
    if (k == 0) return;
    u[k - 1] = std::pow(u[k - 1], 1.0 / static_cast<double>(k));
    for (std::size_t i = k - 1; i-- > 0;) u[i] = std::pow(u[i], 1.0 / static_cast<double>(i + 1)) * u[i + 1];
}

std::vector<double> forced_identifiability(std::span<const double> u) {
    std::vector<double> t(u.begin(), u.end());
    forced_identifiability_inplace(t);
    return t;
}

PriorTransform::PriorTransform(ModelSpec spec) : spec_(std::move(spec)), layout_(make_layout(spec_)) {
    if (spec_.granularity != Granularity::fixed) hyper_priors_ = hyperprior_params(spec_).hyper;
}

void PriorTransform::operator()(std::span<const double> u, std::span<double> theta) const {
    if (u.size() != dim() || theta.size() != dim())
        throw std::invalid_argument("prior transform: expected " + std::to_string(dim()) + " coordinates, got " +
                                    std::to_string(u.size()));
    for (std::size_t i = 0; i < layout_.n_hyper; ++i)
        theta[i] = gamma_precision_quantile(clamp_unit(u[i]), hyper_priors_[i].alpha, hyper_priors_[i].beta);
    if (layout_.sigma_index)
        theta[*layout_.sigma_index] =
            gamma_precision_quantile(clamp_unit(u[*layout_.sigma_index]), sigma_prior_.alpha, sigma_prior_.beta);

    for (const auto& block : layout_.blocks) {
        auto out = theta.subspan(block.offset, block.size);
        for (std::size_t i = 0; i < block.size; ++i) out[i] = clamp_unit(u[block.offset + i]);
        if (block.ordered) {
            forced_identifiability_inplace(out);
            for (auto& v : out) v = clamp_unit(v);
        }
        for (std::size_t i = 0; i < block.size; ++i) {
            const auto& gov = layout_.governor[block.offset + i - layout_.network_offset];
            const double sd = gov ? theta[*gov] : 1.0;
            out[i] = sd * std_normal_quantile(out[i]);
        }
    }
}

std::vector<double> PriorTransform::operator()(std::span<const double> u) const {
    std::vector<double> theta(dim());
    (*this)(u, theta);
    return theta;
}

}  // namespace evidencenet
