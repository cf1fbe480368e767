#include "evidencenet/network.hpp"

#include <algorithm>
#include <cmath>

namespace evidencenet {

std::size_t Architecture::width(std::size_t l) const {
    if (l == 0) return input_size;
    if (l <= hidden_sizes.size()) return hidden_sizes[l - 1];
    if (l == layer_count()) return output_size;
    throw std::out_of_range("layer index out of range");
}

void Architecture::validate() const {
    if (input_size == 0 || output_size == 0) throw std::invalid_argument("layer sizes must be >= 1");
    for (auto h : hidden_sizes)
        if (h == 0) throw std::invalid_argument("hidden layer sizes must be >= 1");
}

std::size_t param_count(const Architecture& arch) {
    std::size_t n = 0;
    for (std::size_t l = 1; l <= arch.layer_count(); ++l) n += arch.width(l - 1) * arch.width(l) + arch.width(l);
    return n;
}

NetworkParams NetworkParams::from_flat(const Architecture& arch, std::span<const double> flat) {
    if (flat.size() != param_count(arch)) throw std::invalid_argument("flat parameter block has wrong size");
    NetworkParams p;
    std::size_t k = 0;
    for (std::size_t l = 1; l <= arch.layer_count(); ++l) {
        const auto rows = static_cast<Eigen::Index>(arch.width(l));
        const auto cols = static_cast<Eigen::Index>(arch.width(l - 1));
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = flat[k++];
        Eigen::VectorXd b(rows);
        for (Eigen::Index i = 0; i < rows; ++i) b(i) = flat[k++];
        p.weights.push_back(std::move(w));
        p.biases.push_back(std::move(b));
    }
    return p;
}

std::vector<double> NetworkParams::to_flat() const {
    std::vector<double> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const auto& w = weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) out.push_back(w(i, j));
        for (Eigen::Index i = 0; i < biases[l].size(); ++i) out.push_back(biases[l](i));
    }
    return out;
}

NetworkParams NetworkParams::zeros(const Architecture& arch) {
    return from_flat(arch, std::vector<double>(param_count(arch), 0.0));
}

namespace {

inline double activate(Activation g, double a) {
    return g == Activation::tanh ? std::tanh(a) : std::max(a, 0.0);
}

// Node-major accumulation over a flat block. `buf` holds two scratch
// vectors of the widest layer size.
double eval_flat(const Architecture& arch, const double* flat, std::span<const double> x, std::vector<double>& buf) {
    std::size_t widest = arch.input_size;
    for (auto h : arch.hidden_sizes) widest = std::max(widest, h);
    widest = std::max(widest, arch.output_size);
    buf.resize(2 * widest);
    double* cur = buf.data();
    double* next = buf.data() + widest;
    std::copy(x.begin(), x.end(), cur);

    const std::size_t layers = arch.layer_count();
    for (std::size_t l = 1; l <= layers; ++l) {
        const std::size_t in = arch.width(l - 1);
        const std::size_t out = arch.width(l);
        const double* w = flat;
        const double* b = flat + in * out;
        const bool hidden = l < layers;
        for (std::size_t i = 0; i < out; ++i) {
            double a = b[i];
            const double* wi = w + i * in;
            for (std::size_t k = 0; k < in; ++k) a += wi[k] * cur[k];
            next[i] = hidden ? activate(arch.activation, a) : a;
            if (!std::isfinite(next[i]))
                throw NonFiniteError(l, "non-finite value in layer " + std::to_string(l));
        }
        flat = b + out;
        std::swap(cur, next);
    }
    return cur[0];
}

}  // namespace

double forward_flat(const Architecture& arch, std::span<const double> flat, std::span<const double> x) {
    if (flat.size() != param_count(arch)) throw std::invalid_argument("flat parameter block has wrong size");
    if (x.size() != arch.input_size) throw std::invalid_argument("input has wrong dimension");
    thread_local std::vector<double> buf;
    return eval_flat(arch, flat.data(), x, buf);
}

double forward(const Architecture& arch, const NetworkParams& params, std::span<const double> x) {
    const auto flat = params.to_flat();
    return forward_flat(arch, flat, x);
}

Eigen::VectorXd forward_batch_flat(const Architecture& arch, std::span<const double> flat, const Eigen::MatrixXd& X) {
    if (flat.size() != param_count(arch)) throw std::invalid_argument("flat parameter block has wrong size");
    Eigen::VectorXd out(X.rows());
    if (X.rows() == 0) return out;
    if (static_cast<std::size_t>(X.cols()) != arch.input_size) throw std::invalid_argument("input has wrong dimension");
    thread_local std::vector<double> buf;
    std::vector<double> row(arch.input_size);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        for (std::size_t c = 0; c < row.size(); ++c) row[c] = X(r, static_cast<Eigen::Index>(c));
        out(r) = eval_flat(arch, flat.data(), row, buf);
    }
    return out;
}

Eigen::VectorXd forward_batch(const Architecture& arch, const NetworkParams& params, const Eigen::MatrixXd& X) {
    const auto flat = params.to_flat();
    return forward_batch_flat(arch, flat, X);
}

}  // namespace evidencenet
