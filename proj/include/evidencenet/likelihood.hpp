#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evidencenet/data.hpp"
#include "evidencenet/model.hpp"

namespace evidencenet {

struct LogLikelihood {
    double value = 0.0;       // natural log
    std::size_t n_calls = 0;
};

/// log L = -chi^2 / (2 sigma^2) - N (log sigma + log(2 pi) / 2)
double gaussian_log_like(double chi2, std::size_t n, double sigma);

/// Independent Gaussian likelihood of a model on a fixed dataset. A network
/// output that overflows yields -infinity.
class GaussianLikelihood {
public:
    GaussianLikelihood(ModelSpec spec, const Dataset& train);

    double operator()(std::span<const double> theta) const;

    /// Sum of squared residuals for the network part of theta.
    double chi_squared(std::span<const double> theta) const;

    std::size_t size() const { return n_; }
    const ModelSpec& spec() const { return spec_; }

private:
    ModelSpec spec_;
    ParamLayout layout_;
    std::size_t n_;
    std::vector<double> x_;  // row-major n x input_size
    std::vector<double> y_;
};

LogLikelihood log_like(const ModelSpec& spec, std::span<const double> theta, const Dataset& train);

}  // namespace evidencenet
