#pragma once

// Dense feed-forward networks in double precision with hand-written
// reverse-mode gradients. Batches are column-major: one sample per column.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pap/common.hpp"

namespace pap {

enum class Activation : std::uint32_t { identity = 0, relu = 1, tanh = 2 };

struct DenseLayer {
    Eigen::MatrixXd weight; // out x in
    Eigen::VectorXd bias;   // out
    Activation activation = Activation::identity;
};

namespace detail {

inline Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a)
{
    switch (a) {
    case Activation::relu:
        return z.cwiseMax(0.0);
    case Activation::tanh:
        return z.array().tanh().matrix();
    case Activation::identity:
        break;
    }
    return z;
}

// Derivative expressed through the activated output.
inline Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& out, Activation a)
{
    switch (a) {
    case Activation::relu:
        return (out.array() > 0.0).cast<double>().matrix();
    case Activation::tanh:
        return (1.0 - out.array().square()).matrix();
    case Activation::identity:
        break;
    }
    return Eigen::MatrixXd::Ones(out.rows(), out.cols());
}

} // namespace detail

/// Layer inputs and outputs of one forward pass, kept for backward().
struct ForwardCache {
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<Eigen::MatrixXd> outputs;
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weight;
    std::vector<Eigen::VectorXd> bias;
};

class Mlp {
public:
    Mlp() = default;

    explicit Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers))
    {
        for (std::size_t l = 1; l < layers_.size(); ++l)
            require(layers_[l].weight.cols() == layers_[l - 1].weight.rows(), "layer dimensions do not chain");
        for (const auto& L : layers_)
            require(L.bias.size() == L.weight.rows(), "bias length must match layer width");
    }

    /// Fully connected net with `hidden` widths; weights and biases drawn
    /// uniformly from +-1/sqrt(fan_in).
    template <typename Rng>
    static Mlp build(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output,
                     Activation hidden_act, Activation output_act, Rng& rng)
    {
        require(input > 0 && output > 0, "network needs positive input and output sizes");
        std::vector<DenseLayer> layers;
        std::size_t fan_in = input;
        auto add = [&](std::size_t width, Activation act) {
            std::uniform_real_distribution<double> u(-1.0 / std::sqrt(double(fan_in)), 1.0 / std::sqrt(double(fan_in)));
            DenseLayer L;
            L.weight.resize(Eigen::Index(width), Eigen::Index(fan_in));
            L.bias.resize(Eigen::Index(width));
            for (Eigen::Index r = 0; r < L.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < L.weight.cols(); ++c)
                    L.weight(r, c) = u(rng);
            for (Eigen::Index r = 0; r < L.bias.size(); ++r)
                L.bias(r) = u(rng);
            L.activation = act;
            layers.push_back(std::move(L));
            fan_in = width;
        };
        for (std::size_t w : hidden)
            add(w, hidden_act);
        add(output, output_act);
        return Mlp(std::move(layers));
    }

    std::size_t input_dim() const { return layers_.empty() ? 0 : std::size_t(layers_.front().weight.cols()); }
    std::size_t output_dim() const { return layers_.empty() ? 0 : std::size_t(layers_.back().weight.rows()); }
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const
    {
        require(std::size_t(x.rows()) == input_dim(), "input dimension mismatch");
        Eigen::MatrixXd a = x;
        for (const auto& L : layers_)
            a = detail::activate((L.weight * a).colwise() + L.bias, L.activation);
        return a;
    }

    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, ForwardCache& cache) const
    {
        require(std::size_t(x.rows()) == input_dim(), "input dimension mismatch");
        cache.inputs.clear();
        cache.outputs.clear();
        Eigen::MatrixXd a = x;
        for (const auto& L : layers_) {
            cache.inputs.push_back(a);
            a = detail::activate((L.weight * a).colwise() + L.bias, L.activation);
            cache.outputs.push_back(a);
        }
        return a;
    }

    /// Single-sample convenience wrapper.
    std::vector<double> operator()(std::span<const double> x) const
    {
        Eigen::MatrixXd in(Eigen::Index(x.size()), 1);
        for (std::size_t i = 0; i < x.size(); ++i)
            in(Eigen::Index(i), 0) = x[i];
        const Eigen::MatrixXd out = forward(in);
        return {out.data(), out.data() + out.size()};
    }

    /// Parameter gradients of sum(dout .* output); optionally the input gradient.
    Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& dout, Eigen::MatrixXd* dinput = nullptr,
                       bool want_params = true) const
    {
        require(cache.outputs.size() == layers_.size(), "forward cache does not match this network");
        Gradients g;
        if (want_params) {
            g.weight.resize(layers_.size());
            g.bias.resize(layers_.size());
        }
        Eigen::MatrixXd da = dout;
        for (std::size_t k = layers_.size(); k-- > 0;) {
            const auto& L = layers_[k];
            const Eigen::MatrixXd dz = da.cwiseProduct(detail::activation_grad(cache.outputs[k], L.activation));
            if (want_params) {
                g.weight[k] = dz * cache.inputs[k].transpose();
                g.bias[k] = dz.rowwise().sum();
            }
            if (k > 0 || dinput)
                da = L.weight.transpose() * dz;
        }
        if (dinput)
            *dinput = std::move(da);
        return g;
    }

    std::size_t parameter_count() const
    {
        std::size_t n = 0;
        for (const auto& L : layers_)
            n += std::size_t(L.weight.size() + L.bias.size());
        return n;
    }

    /// Visits every parameter in checkpoint order (row-major weights, then bias, per layer).
    template <typename F>
    void for_each_parameter(F&& f)
    {
        for (auto& L : layers_) {
            for (Eigen::Index r = 0; r < L.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < L.weight.cols(); ++c)
                    f(L.weight(r, c));
            for (Eigen::Index r = 0; r < L.bias.size(); ++r)
                f(L.bias(r));
        }
    }

    bool same_shape(const Mlp& other) const
    {
        if (layers_.size() != other.layers_.size())
            return false;
        for (std::size_t l = 0; l < layers_.size(); ++l)
            if (layers_[l].weight.rows() != other.layers_[l].weight.rows() ||
                layers_[l].weight.cols() != other.layers_[l].weight.cols() ||
                layers_[l].activation != other.layers_[l].activation)
                return false;
        return true;
    }

    friend bool operator==(const Mlp& a, const Mlp& b)
    {
        if (!a.same_shape(b))
            return false;
        for (std::size_t l = 0; l < a.layers_.size(); ++l)
            if (a.layers_[l].weight != b.layers_[l].weight || a.layers_[l].bias != b.layers_[l].bias)
                return false;
        return true;
    }

private:
    std::vector<DenseLayer> layers_;
};

/// target <- tau * online + (1 - tau) * target, elementwise.
inline void polyak_update(Mlp& target, const Mlp& online, double tau)
{
    require(target.same_shape(online), "soft update needs networks of identical shape");
    require(tau >= 0.0 && tau <= 1.0, "soft update factor must lie in [0, 1]");
    for (std::size_t l = 0; l < target.layers().size(); ++l) {
        auto& t = target.layers()[l];
        const auto& o = online.layers()[l];
        t.weight = tau * o.weight + (1.0 - tau) * t.weight;
        t.bias = tau * o.bias + (1.0 - tau) * t.bias;
    }
}

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected adaptive-moment optimizer state for one network.
class AdamState {
public:
    AdamState() = default;
    AdamState(const Mlp& net, AdamConfig cfg) : cfg_(cfg)
    {
        for (const auto& L : net.layers()) {
            m_w_.push_back(Eigen::MatrixXd::Zero(L.weight.rows(), L.weight.cols()));
            v_w_.push_back(Eigen::MatrixXd::Zero(L.weight.rows(), L.weight.cols()));
            m_b_.push_back(Eigen::VectorXd::Zero(L.bias.size()));
            v_b_.push_back(Eigen::VectorXd::Zero(L.bias.size()));
        }
    }

    const AdamConfig& config() const { return cfg_; }
    long steps() const { return t_; }

    /// One descent step: params -= lr * m_hat / (sqrt(v_hat) + eps).
    void step(Mlp& net, const Gradients& g)
    {
        require(g.weight.size() == net.layers().size() && m_w_.size() == net.layers().size(),
                "optimizer state does not match the network");
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            auto& L = net.layers()[l];
            update(L.weight, g.weight[l], m_w_[l], v_w_[l], c1, c2);
            update(L.bias, g.bias[l], m_b_[l], v_b_[l], c1, c2);
        }
    }

private:
    template <typename P, typename G, typename M>
    void update(P& param, const G& grad, M& m, M& v, double c1, double c2) const
    {
        require(param.rows() == grad.rows() && param.cols() == grad.cols(), "gradient shape mismatch");
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * grad;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
        param.array() -= cfg_.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.epsilon);
    }

    AdamConfig cfg_;
    std::vector<Eigen::MatrixXd> m_w_, v_w_;
    std::vector<Eigen::VectorXd> m_b_, v_b_;
    long t_ = 0;
};

inline void adam_step(Mlp& net, const Gradients& g, AdamState& state) { state.step(net, g); }

struct GradientCheckReport {
    double max_relative_error = 0.0;
    std::size_t parameters_checked = 0;
    bool passed = false;
};

/// Compares backward() with central differences of sum(output_weights .* net(input)).
/// `corrupt` perturbs the analytic gradient (negative controls in tests).
inline GradientCheckReport gradient_check(const Mlp& net, const Eigen::MatrixXd& input, double tolerance,
                                          double step = 1e-5, double corrupt = 0.0)
{
    Mlp probe = net;
    Eigen::MatrixXd weights = Eigen::MatrixXd::Ones(Eigen::Index(net.output_dim()), input.cols());
    for (Eigen::Index r = 0; r < weights.rows(); ++r)
        weights.row(r).array() *= 1.0 + 0.25 * double(r);
    auto loss = [&](const Mlp& m) { return m.forward(input).cwiseProduct(weights).sum(); };

    ForwardCache cache;
    net.forward(input, cache);
    const Gradients g = net.backward(cache, weights);
    std::vector<double> analytic;
    for (std::size_t l = 0; l < g.weight.size(); ++l) {
        for (Eigen::Index r = 0; r < g.weight[l].rows(); ++r)
            for (Eigen::Index c = 0; c < g.weight[l].cols(); ++c)
                analytic.push_back(g.weight[l](r, c));
        for (Eigen::Index r = 0; r < g.bias[l].size(); ++r)
            analytic.push_back(g.bias[l](r));
    }
    if (!analytic.empty())
        analytic.front() += corrupt;

    GradientCheckReport rep;
    std::size_t idx = 0;
    probe.for_each_parameter([&](double& p) {
        const double saved = p;
        p = saved + step;
        const double up = loss(probe);
        p = saved - step;
        const double down = loss(probe);
        p = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic[idx++];
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-5});
        rep.max_relative_error = std::max(rep.max_relative_error, std::abs(a - numeric) / denom);
    });
    rep.parameters_checked = idx;
    rep.passed = rep.max_relative_error < tolerance;
    return rep;
}

// Checkpoint layout, all integers and doubles little-endian:
//   8 bytes magic "PAPMLP01", u32 version (=1), u32 layer count,
//   per layer: u32 inputs, u32 outputs, u32 activation (0 identity, 1 relu, 2 tanh),
//   then per layer: outputs*inputs f64 weights row-major, outputs f64 biases.
inline constexpr char kCheckpointMagic[8] = {'P', 'A', 'P', 'M', 'L', 'P', '0', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v)
{
    char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b, 8);
}

inline void put_u32(std::ostream& os, std::uint32_t v)
{
    char b[4];
    for (int i = 0; i < 4; ++i)
        b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b, 4);
}

inline std::uint64_t get_u64(std::istream& is)
{
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw std::runtime_error("truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | b[i];
    return v;
}

inline std::uint32_t get_u32(std::istream& is)
{
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("truncated checkpoint");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | b[i];
    return v;
}

} // namespace detail

inline void write_checkpoint(std::ostream& os, const Mlp& net)
{
    os.write(kCheckpointMagic, 8);
    detail::put_u32(os, kCheckpointVersion);
    detail::put_u32(os, std::uint32_t(net.layers().size()));
    for (const auto& L : net.layers()) {
        detail::put_u32(os, std::uint32_t(L.weight.cols()));
        detail::put_u32(os, std::uint32_t(L.weight.rows()));
        detail::put_u32(os, static_cast<std::uint32_t>(L.activation));
    }
    for (const auto& L : net.layers()) {
        for (Eigen::Index r = 0; r < L.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < L.weight.cols(); ++c)
                detail::put_u64(os, std::bit_cast<std::uint64_t>(L.weight(r, c)));
        for (Eigen::Index r = 0; r < L.bias.size(); ++r)
            detail::put_u64(os, std::bit_cast<std::uint64_t>(L.bias(r)));
    }
}

inline Mlp read_checkpoint(std::istream& is)
{
    char magic[8];
    if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kCheckpointMagic))
        throw std::runtime_error("not a network checkpoint (bad magic)");
    if (const auto version = detail::get_u32(is); version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = detail::get_u32(is);
    std::vector<DenseLayer> layers(count);
    for (auto& L : layers) {
        const auto in = detail::get_u32(is);
        const auto out = detail::get_u32(is);
        const auto act = detail::get_u32(is);
        if (act > 2)
            throw std::runtime_error("checkpoint has an unknown activation code");
        L.weight.resize(Eigen::Index(out), Eigen::Index(in));
        L.bias.resize(Eigen::Index(out));
        L.activation = static_cast<Activation>(act);
    }
    for (auto& L : layers) {
        for (Eigen::Index r = 0; r < L.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < L.weight.cols(); ++c)
                L.weight(r, c) = std::bit_cast<double>(detail::get_u64(is));
        for (Eigen::Index r = 0; r < L.bias.size(); ++r)
            L.bias(r) = std::bit_cast<double>(detail::get_u64(is));
    }
    return Mlp(std::move(layers));
}

inline void save_checkpoint(const std::string& path, const Mlp& net)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write checkpoint '" + path + "'");
    write_checkpoint(os, net);
    if (!os)
        throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

inline Mlp load_checkpoint(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open checkpoint '" + path + "'");
    try {
        return read_checkpoint(is);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

} // namespace pap
