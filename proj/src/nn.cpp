#include "sfwlab/nn.hpp"

#include <cmath>

namespace sfwlab {

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

void check_shapes(const std::vector<DenseLayer>& a, const std::vector<DenseLayer>& b,
                  const char* what) {
    require(a.size() == b.size(), std::string(what) + ": layer count mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) {
        require(a[i].w.rows() == b[i].w.rows() && a[i].w.cols() == b[i].w.cols() &&
                    a[i].b.size() == b[i].b.size(),
                std::string(what) + ": shape mismatch at layer " + std::to_string(i));
    }
}
}  // namespace

std::string to_string(Activation a) {
    return a == Activation::Tanh ? "tanh" : "gelu";
}

Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "gelu") return Activation::Gelu;
    throw ConfigError("unknown activation: " + s);
}

FeedForwardNet::FeedForwardNet(const std::vector<int>& dims, Activation act, std::uint64_t seed)
    : act_(act) {
    require(dims.size() >= 2, "FeedForwardNet: need at least input and output dims");
    Rng rng(seed);
    layers_.reserve(dims.size() - 1);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const int fan_in = dims[i];
        const int fan_out = dims[i + 1];
        require(fan_in > 0 && fan_out > 0, "FeedForwardNet: dims must be positive");
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        DenseLayer layer;
        layer.w = Matrix(fan_out, fan_in);
        for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.w.cols(); ++c)
                layer.w(r, c) = bound * (2.0 * rng.uniform() - 1.0);
        layer.b = Vector::Zero(fan_out);
        layers_.push_back(std::move(layer));
    }
}

int FeedForwardNet::input_dim() const {
    require(!layers_.empty(), "FeedForwardNet: uninitialized");
    return static_cast<int>(layers_.front().w.cols());
}

int FeedForwardNet::output_dim() const {
    require(!layers_.empty(), "FeedForwardNet: uninitialized");
    return static_cast<int>(layers_.back().w.rows());
}

Matrix activate(const Matrix& z, Activation act) {
    if (act == Activation::Tanh) return z.array().tanh();
    // smooth (tanh-approximation) gelu
    const auto za = z.array();
    return 0.5 * za * (1.0 + (kGeluC * (za + 0.044715 * za.cube())).tanh());
}

Matrix activate_grad(const Matrix& z, Activation act) {
    if (act == Activation::Tanh) {
        const auto t = z.array().tanh();
        return 1.0 - t.square();
    }
    const auto za = z.array();
    const auto inner = kGeluC * (za + 0.044715 * za.cube());
    const auto th = inner.tanh();
    const auto dinner = kGeluC * (1.0 + 3.0 * 0.044715 * za.square());
    return 0.5 * (1.0 + th) + 0.5 * za * (1.0 - th.square()) * dinner;
}

Matrix FeedForwardNet::forward(const Matrix& x) const {
    require(x.cols() == input_dim(),
            "forward: expected " + std::to_string(input_dim()) + " input columns, got " +
                std::to_string(x.cols()));
    Matrix h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Matrix z = (h * layers_[i].w.transpose()).rowwise() + layers_[i].b.transpose();
        h = (i + 1 < layers_.size()) ? activate(z, act_) : std::move(z);
    }
    return h;
}

FeedForwardNet::Gradients FeedForwardNet::backward(const Matrix& x, const Matrix& upstream) const {
    require(x.cols() == input_dim(), "backward: input shape mismatch");
    require(upstream.rows() == x.rows() && upstream.cols() == output_dim(),
            "backward: upstream shape mismatch");

    const std::size_t n_layers = layers_.size();
    std::vector<Matrix> acts(n_layers);      // layer inputs a_0 .. a_{L-1}
    std::vector<Matrix> preacts(n_layers);   // z_1 .. z_L
    Matrix h = x;
    for (std::size_t i = 0; i < n_layers; ++i) {
        acts[i] = h;
        preacts[i] = (h * layers_[i].w.transpose()).rowwise() + layers_[i].b.transpose();
        h = (i + 1 < n_layers) ? activate(preacts[i], act_) : preacts[i];
    }

    Gradients out;
    out.params.resize(n_layers);
    Matrix delta = upstream;  // d loss / d z_L (output layer is linear)
    for (std::size_t i = n_layers; i-- > 0;) {
        out.params[i].w = delta.transpose() * acts[i];
        out.params[i].b = delta.colwise().sum().transpose();
        Matrix to_prev = delta * layers_[i].w;
        if (i > 0) {
            delta = to_prev.array() * activate_grad(preacts[i - 1], act_).array();
        } else {
            out.input = std::move(to_prev);
        }
    }
    return out;
}

Matrix FeedForwardNet::input_grad(const Matrix& x, const Matrix& upstream) const {
    return backward(x, upstream).input;
}

AdamState make_adam(const std::vector<DenseLayer>& params, double lr, double beta1, double beta2,
                    double eps) {
    AdamState s;
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const auto& p : params) {
        s.m.push_back({Matrix::Zero(p.w.rows(), p.w.cols()), Vector::Zero(p.b.size())});
        s.v.push_back({Matrix::Zero(p.w.rows(), p.w.cols()), Vector::Zero(p.b.size())});
    }
    return s;
}

void adam_step(AdamState& state, std::vector<DenseLayer>& params,
               const std::vector<DenseLayer>& grads) {
    check_shapes(params, grads, "adam_step");
    check_shapes(params, state.m, "adam_step(state)");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& m = state.m[i];
        auto& v = state.v[i];
        const auto& g = grads[i];
        m.w = state.beta1 * m.w + (1.0 - state.beta1) * g.w;
        m.b = state.beta1 * m.b + (1.0 - state.beta1) * g.b;
        v.w = state.beta2 * v.w.array().matrix() + (1.0 - state.beta2) * g.w.array().square().matrix();
        v.b = state.beta2 * v.b.array().matrix() + (1.0 - state.beta2) * g.b.array().square().matrix();
        params[i].w.array() -=
            state.lr * (m.w.array() / bc1) / ((v.w.array() / bc2).sqrt() + state.eps);
        params[i].b.array() -=
            state.lr * (m.b.array() / bc1) / ((v.b.array() / bc2).sqrt() + state.eps);
    }
}

}  // namespace sfwlab
