#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evidencenet/network.hpp"

namespace evidencenet {

/// How finely prior widths are shared across network parameters.
enum class Granularity { fixed, single, layer, input_size };

/// A Bayesian model: architecture, prior granularity and whether the
/// likelihood width is sampled.
struct ModelSpec {
    Architecture arch;
    Granularity granularity = Granularity::fixed;
    bool variable_sigma = false;

    /// Canonical name, e.g. "lh sv (4, 4)", "r (8)", "br".
    std::string name() const;

    /// True for the combinations in the experiment grid: tanh with any
    /// granularity, relu only with fixed priors, and a sampled likelihood
    /// width exactly when the granularity is not fixed.
    bool on_grid() const;

    bool operator==(const ModelSpec&) const = default;
};

/// Parses the model-name grammar
///   [r] [sh|lh|ih] [sv] [(n1, n2, ...)]   or   br
/// Throws std::invalid_argument listing the valid tokens on failure.
ModelSpec parse_name(std::string_view s);
std::string format_name(const ModelSpec& spec);

struct GammaPrior {
    double alpha = 1.0;
    double beta = 1.0;  // rate on the precision
    bool operator==(const GammaPrior&) const = default;
};

std::size_t hyper_count(const ModelSpec& spec);
std::size_t total_dim(const ModelSpec& spec);

struct HyperpriorParams {
    std::vector<GammaPrior> hyper;  // one per prior hyperparameter, layout order
    GammaPrior likelihood;          // prior on the likelihood precision
};

/// Gamma hyperpriors on the precisions. Weights feeding layer j >= 2 get
/// beta = 1 / l_{j-1} under layer and input-size granularity; everything
/// else is (1, 1). Throws std::invalid_argument for fixed granularity.
HyperpriorParams hyperprior_params(const ModelSpec& spec);

/// Contiguous block of network parameters sharing a role in the prior.
struct ParamBlock {
    std::size_t offset = 0;  // into the full parameter vector
    std::size_t size = 0;
    std::size_t layer = 0;   // 1-based weighted layer
    bool is_bias = false;
    bool ordered = false;    // forced-identifiability ordering applies
};

/// Flat ordering of the sampled parameters:
///   [prior hyperparameters] [likelihood sigma?] [layer 1 w, b] ... [layer L w, b]
struct ParamLayout {
    std::size_t n_hyper = 0;
    std::optional<std::size_t> sigma_index;
    std::size_t network_offset = 0;
    std::size_t n_network = 0;
    /// Governing hyperparameter index for each network parameter, or
    /// nullopt when the width is the constant 1.
    std::vector<std::optional<std::size_t>> governor;
    std::vector<ParamBlock> blocks;

    std::size_t total() const { return network_offset + n_network; }
};

ParamLayout make_layout(const ModelSpec& spec);

/// The 49-model experiment grid in report order.
std::vector<ModelSpec> paper_grid();

/// Sort key reproducing the report ordering: depth, widths, then variant
/// (tanh fixed, relu, sh, lh, ih).
std::vector<long> report_order_key(const ModelSpec& spec);

}  // namespace evidencenet
