// Minimal dense feed-forward network with manual backpropagation (gradients
// w.r.t. parameters and inputs) and an Adam optimizer. Batches are rows.
#pragma once

#include "sfwlab/rng.hpp"
#include "sfwlab/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sfwlab {

enum class Activation { Tanh, Gelu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
    Matrix w;  // (out, in)
    Vector b;  // (out)
};

class FeedForwardNet {
public:
    FeedForwardNet() = default;

    // dims = {input, hidden..., output}. Weights drawn uniform in
    // +-sqrt(6 / (fan_in + fan_out)), biases zero.
    FeedForwardNet(const std::vector<int>& dims, Activation act, std::uint64_t seed);

    int input_dim() const;
    int output_dim() const;
    Activation activation() const { return act_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    // x: (batch, input_dim) -> (batch, output_dim). Hidden layers use the
    // configured activation; the output layer is linear.
    Matrix forward(const Matrix& x) const;

    struct Gradients {
        std::vector<DenseLayer> params;  // same shapes as layers()
        Matrix input;                    // (batch, input_dim)
    };

    // Gradients of sum(upstream .* forward(x)) w.r.t. every parameter and x.
    Gradients backward(const Matrix& x, const Matrix& upstream) const;

    // Input gradient only (vector-Jacobian product); cheaper alias used by
    // the guidance paths that never touch parameters.
    Matrix input_grad(const Matrix& x, const Matrix& upstream) const;

private:
    std::vector<DenseLayer> layers_;
    Activation act_ = Activation::Tanh;
};

Matrix activate(const Matrix& z, Activation act);
Matrix activate_grad(const Matrix& z, Activation act);

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    std::vector<DenseLayer> m;  // first moments, shapes mirror the params
    std::vector<DenseLayer> v;  // second moments
};

AdamState make_adam(const std::vector<DenseLayer>& params, double lr = 1e-3,
                    double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Standard bias-corrected Adam update, in place.
void adam_step(AdamState& state, std::vector<DenseLayer>& params,
               const std::vector<DenseLayer>& grads);

}  // namespace sfwlab
