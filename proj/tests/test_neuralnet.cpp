#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pap/neuralnet.hpp"

using namespace pap;

namespace {

Eigen::MatrixXd random_input(std::size_t rows, std::size_t cols, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            x(r, c) = u(rng);
    return x;
}

} // namespace

TEST(Mlp, ShapesAndInit)
{
    std::mt19937_64 rng(1);
    const Mlp net = Mlp::build(7, {5, 4}, 3, Activation::relu, Activation::tanh, rng);
    EXPECT_EQ(net.input_dim(), 7u);
    EXPECT_EQ(net.output_dim(), 3u);
    EXPECT_EQ(net.parameter_count(), 7u * 5 + 5 + 5 * 4 + 4 + 4 * 3 + 3);
    for (const auto& L : net.layers())
        EXPECT_LE(L.weight.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(double(L.weight.cols())));
    EXPECT_THROW(net.forward(Eigen::MatrixXd::Zero(6, 1)), contract_error);
}

TEST(Mlp, TanhOutputBounded)
{
    std::mt19937_64 rng(2);
    const Mlp net = Mlp::build(4, {8}, 3, Activation::relu, Activation::tanh, rng);
    const Eigen::MatrixXd y = net.forward(100.0 * random_input(4, 50, rng));
    EXPECT_LE(y.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Mlp, BatchMatchesSingleSamples)
{
    std::mt19937_64 rng(3);
    const Mlp net = Mlp::build(5, {6, 6}, 2, Activation::relu, Activation::identity, rng);
    const Eigen::MatrixXd x = random_input(5, 9, rng);
    const Eigen::MatrixXd y = net.forward(x);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const std::vector<double> col(x.col(c).data(), x.col(c).data() + x.rows());
        const auto out = net(col);
        EXPECT_DOUBLE_EQ(out[0], y(0, c));
        EXPECT_DOUBLE_EQ(out[1], y(1, c));
    }
}

TEST(GradientCheck, TwentyRandomNetworks)
{
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> width(2, 9);
    const Activation acts[] = {Activation::relu, Activation::tanh};
    const Activation outs[] = {Activation::identity, Activation::tanh};
    for (int k = 0; k < 20; ++k) {
        const std::size_t in = width(rng);
        const Mlp net = Mlp::build(in, {width(rng), width(rng)}, width(rng) % 3 + 1, acts[k % 2], outs[(k / 2) % 2], rng);
        const auto rep = gradient_check(net, random_input(in, 4, rng), 1e-4);
        EXPECT_TRUE(rep.passed) << "network " << k << " error " << rep.max_relative_error;
        EXPECT_EQ(rep.parameters_checked, net.parameter_count());
    }
}

TEST(GradientCheck, DetectsCorruptedGradient)
{
    std::mt19937_64 rng(5);
    const Mlp net = Mlp::build(3, {4}, 1, Activation::tanh, Activation::identity, rng);
    EXPECT_FALSE(gradient_check(net, random_input(3, 2, rng), 1e-4, 1e-5, 1e-2).passed);
}

TEST(Backward, InputGradientMatchesFiniteDifference)
{
    std::mt19937_64 rng(6);
    const Mlp net = Mlp::build(4, {7}, 1, Activation::tanh, Activation::identity, rng);
    Eigen::MatrixXd x = random_input(4, 1, rng);
    ForwardCache cache;
    net.forward(x, cache);
    Eigen::MatrixXd dx;
    net.backward(cache, Eigen::MatrixXd::Ones(1, 1), &dx, false);
    for (Eigen::Index r = 0; r < 4; ++r) {
        Eigen::MatrixXd up = x, down = x;
        up(r, 0) += 1e-6;
        down(r, 0) -= 1e-6;
        EXPECT_NEAR(dx(r, 0), (net.forward(up)(0, 0) - net.forward(down)(0, 0)) / 2e-6, 1e-7);
    }
}

TEST(Polyak, ExactBlend)
{
    std::mt19937_64 rng(7);
    const Mlp online = Mlp::build(3, {4}, 2, Activation::relu, Activation::tanh, rng);
    const Mlp target0 = Mlp::build(3, {4}, 2, Activation::relu, Activation::tanh, rng);
    Mlp target = target0;
    polyak_update(target, online, 0.001);
    for (std::size_t l = 0; l < target.layers().size(); ++l) {
        const Eigen::MatrixXd want = 0.001 * online.layers()[l].weight + 0.999 * target0.layers()[l].weight;
        EXPECT_EQ(target.layers()[l].weight, want);
    }
    Mlp copy = target0;
    polyak_update(copy, online, 0.0);
    EXPECT_EQ(copy, target0);
    polyak_update(copy, online, 1.0);
    EXPECT_EQ(copy, online);
    EXPECT_THROW(polyak_update(copy, online, 1.5), contract_error);
}

TEST(Adam, FirstStepMovesByLearningRate)
{
    std::mt19937_64 rng(8);
    Mlp net = Mlp::build(2, {}, 1, Activation::identity, Activation::identity, rng);
    const Mlp before = net;
    AdamState opt(net, AdamConfig{0.01});
    Gradients g;
    g.weight = {Eigen::MatrixXd::Constant(1, 2, 3.0)};
    g.bias = {Eigen::VectorXd::Constant(1, -0.5)};
    opt.step(net, g);
    EXPECT_NEAR(net.layers()[0].weight(0, 0), before.layers()[0].weight(0, 0) - 0.01, 1e-9);
    EXPECT_NEAR(net.layers()[0].bias(0), before.layers()[0].bias(0) + 0.01, 1e-9);
    EXPECT_EQ(opt.steps(), 1);
}

TEST(Adam, FitsLinearRegression)
{
    std::mt19937_64 rng(9);
    Mlp net = Mlp::build(2, {}, 1, Activation::identity, Activation::identity, rng);
    AdamState opt(net, AdamConfig{0.05});
    for (int it = 0; it < 2000; ++it) {
        const Eigen::MatrixXd x = random_input(2, 16, rng);
        const Eigen::RowVectorXd y = 2.0 * x.row(0) - 3.0 * x.row(1) + Eigen::RowVectorXd::Constant(16, 0.5);
        ForwardCache cache;
        const Eigen::MatrixXd q = net.forward(x, cache);
        opt.step(net, net.backward(cache, (2.0 / 16) * (q.row(0) - y)));
    }
    EXPECT_NEAR(net.layers()[0].weight(0, 0), 2.0, 1e-3);
    EXPECT_NEAR(net.layers()[0].weight(0, 1), -3.0, 1e-3);
    EXPECT_NEAR(net.layers()[0].bias(0), 0.5, 1e-3);
}

TEST(Checkpoint, RoundTripIsBitExact)
{
    std::mt19937_64 rng(10);
    const Mlp net = Mlp::build(13, {8, 6}, 3, Activation::relu, Activation::tanh, rng);
    std::stringstream ss;
    write_checkpoint(ss, net);
    EXPECT_EQ(read_checkpoint(ss), net);

    const auto path = std::filesystem::temp_directory_path() / "pap_test_actor.ckpt";
    save_checkpoint(path.string(), net);
    EXPECT_EQ(load_checkpoint(path.string()), net);
    std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsCorruptInput)
{
    std::stringstream bad("NOTACKPT........");
    EXPECT_THROW(read_checkpoint(bad), std::runtime_error);

    std::mt19937_64 rng(11);
    std::stringstream ss;
    write_checkpoint(ss, Mlp::build(3, {4}, 1, Activation::relu, Activation::identity, rng));
    std::string bytes = ss.str();
    std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
    EXPECT_THROW(read_checkpoint(truncated), std::runtime_error);
    EXPECT_THROW(load_checkpoint("/nonexistent/actor.ckpt"), std::runtime_error);
}
