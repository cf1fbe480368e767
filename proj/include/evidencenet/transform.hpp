#pragma once

#include <span>
#include <vector>

#include "evidencenet/model.hpp"

namespace evidencenet {

/// Coordinates are clamped to [kUnitClamp, 1 - kUnitClamp] inside to_physical.
inline constexpr double kUnitClamp = 1e-15;

/// Inverse normal CDF. Throws std::domain_error unless 0 < u < 1 and sd > 0.
double gaussian_quantile(double u, double mean, double sd);

/// Draws a precision tau from Gamma(shape alpha, rate beta) at quantile u and
/// returns the width sigma = tau^(-1/2).
double gamma_precision_quantile(double u, double alpha, double beta);

/// Maps a block of independent uniforms onto an ascending tuple distributed
/// as the order statistics of the same number of uniforms:
///   t_k = u_k^(1/k),  t_i = u_i^(1/i) * t_{i+1}   (1-based).
std::vector<double> forced_identifiability(std::span<const double> u);
void forced_identifiability_inplace(std::span<double> u);

/// Prior transform for a model: unit hypercube coordinates to physical
/// parameters in ParamLayout order.
class PriorTransform {
public:
    explicit PriorTransform(ModelSpec spec);

    std::size_t dim() const { return layout_.total(); }
    const ModelSpec& spec() const { return spec_; }
    const ParamLayout& layout() const { return layout_; }

    /// Throws std::invalid_argument on dimension mismatch.
    void operator()(std::span<const double> u, std::span<double> theta) const;
    std::vector<double> operator()(std::span<const double> u) const;

private:
    ModelSpec spec_;
    ParamLayout layout_;
    std::vector<GammaPrior> hyper_priors_;
    GammaPrior sigma_prior_;
};

inline std::vector<double> to_physical(const ModelSpec& spec, std::span<const double> u) {
    return PriorTransform(spec)(u);
}

}  // namespace evidencenet
