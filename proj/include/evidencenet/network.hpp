#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace evidencenet {

enum class Activation { tanh, relu };

/// Fully connected MLP shape. The output layer is always linear.
struct Architecture {
    std::vector<std::size_t> hidden_sizes;
    std::size_t input_size = 13;
    std::size_t output_size = 1;
    Activation activation = Activation::tanh;

    /// Number of weighted layers, hidden plus output.
    std::size_t layer_count() const { return hidden_sizes.size() + 1; }

    /// Width of layer `l`, with 0 the input and layer_count() the output.
    std::size_t width(std::size_t l) const;

    void validate() const;

    bool operator==(const Architecture&) const = default;
};

/// Total weights and biases: sum over layers of l_{k-1} * l_k + l_k.
std::size_t param_count(const Architecture& arch);

/// Thrown by forward when an intermediate value overflows.
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(std::size_t layer, const std::string& what)
        : std::runtime_error(what), layer_(layer) {}
    std::size_t layer() const noexcept { return layer_; }

private:
    std::size_t layer_;
};

/// Per-layer weights (rows = receiving nodes) and biases.
struct NetworkParams {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    /// Unpacks a flat block laid out layer by layer, each layer as its
    /// weight matrix in row-major order followed by its bias vector.
    static NetworkParams from_flat(const Architecture& arch, std::span<const double> flat);
    std::vector<double> to_flat() const;

    static NetworkParams zeros(const Architecture& arch);
};

/// Evaluates the network on one input. Throws NonFiniteError naming the
/// layer whose output is not finite.
double forward(const Architecture& arch, const NetworkParams& params, std::span<const double> x);

/// Same evaluation on a flat parameter block (layout as in from_flat).
double forward_flat(const Architecture& arch, std::span<const double> flat, std::span<const double> x);

/// Row-wise forward over an n x input_size matrix. Each output equals the
/// corresponding forward() result bit for bit.
Eigen::VectorXd forward_batch(const Architecture& arch, const NetworkParams& params, const Eigen::MatrixXd& X);
Eigen::VectorXd forward_batch_flat(const Architecture& arch, std::span<const double> flat, const Eigen::MatrixXd& X);

}  // namespace evidencenet
