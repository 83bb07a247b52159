#include <doctest.h>

#include <cmath>
#include <vector>

#include "smoothfair/errors.hpp"
#include "smoothfair/numkit/losses.hpp"
#include "smoothfair/numkit/network.hpp"
#include "smoothfair/numkit/optimizer.hpp"
#include "smoothfair/numkit/rng.hpp"
#include "smoothfair/numkit/serialize.hpp"
#include "support/gradient_check.hpp"

using namespace smoothfair;

namespace {

NetworkParams single_layer(Matrix w, Activation act) {
    Layer layer;
    layer.bias = Vector::Zero(w.rows());
    layer.weights = std::move(w);
    layer.activation = act;
    return NetworkParams({layer});
}

Matrix row(std::initializer_list<double> values) {
    Matrix m(1, static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) m(0, i++) = v;
    return m;
}

}  // namespace

TEST_CASE("forward: identity layer with identity weights") {
    auto net = single_layer(Matrix::Identity(2, 2), Activation::identity);
    auto out = forward(net, row({1, 2})).output;
    CHECK(out(0, 0) == 1.0);
    CHECK(out(0, 1) == 2.0);
}

TEST_CASE("forward: relu clips negatives") {
    auto net = single_layer(Matrix::Identity(2, 2), Activation::relu);
    auto out = forward(net, row({-1, 3})).output;
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == 3.0);
}

TEST_CASE("forward: two-layer net matches hand evaluation") {
    Layer l1;
    l1.weights.resize(2, 2);
    l1.weights << 1.0, -2.0, 0.5, 0.25;
    l1.bias = Vector(2);
    l1.bias << 0.5, -1.0;
    l1.activation = Activation::relu;
    Layer l2;
    l2.weights.resize(1, 2);
    l2.weights << 2.0, -3.0;
    l2.bias = Vector(1);
    l2.bias << 0.1;
    l2.activation = Activation::sigmoid;
    NetworkParams net({l1, l2});
    // x = (1, 1): hidden pre = (1 - 2 + 0.5, 0.5 + 0.25 - 1) = (-0.5, -0.25) -> relu (0, 0)
    // output = sigmoid(0.1)
    auto out = forward(net, row({1, 1})).output;
    CHECK(out(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-0.1))).epsilon(1e-15));
    // x = (2, 0.5): hidden pre = (2 - 1 + 0.5, 1 + 0.125 - 1) = (1.5, 0.125)
    // output = sigmoid(3 - 0.375 + 0.1)
    out = forward(net, row({2, 0.5})).output;
    CHECK(out(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.725))).epsilon(1e-15));
}

TEST_CASE("forward: shape mismatch") {
    auto net = single_layer(Matrix::Identity(2, 2), Activation::identity);
    CHECK_THROWS_AS(forward(net, row({1, 2, 3})), ShapeError);
}

TEST_CASE("backward: linear net gradient is x transposed") {
    Matrix w(1, 3);
    w << 0.3, -0.7, 2.0;
    auto net = single_layer(w, Activation::identity);
    Matrix x = row({1.5, -2.0, 4.0});
    auto fwd = forward(net, x);
    auto g = backward(net, fwd.tape, Matrix::Ones(1, 1));
    CHECK(g.weights[0].isApprox(x));
    CHECK(g.biases[0](0) == 1.0);
    CHECK(g.input.isApprox(w));
}

TEST_CASE("backward: zero upstream gradient gives zero gradients") {
    Rng rng(3);
    std::vector<std::size_t> dims{4, 6, 5, 2};
    auto net = make_mlp(dims, Activation::relu, Activation::sigmoid, rng);
    Matrix x = Matrix::Random(7, 4);
    auto fwd = forward(net, x);
    auto g = backward(net, fwd.tape, Matrix::Zero(7, 2));
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        CHECK(g.weights[l].cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.biases[l].cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(g.input.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward: matches central finite differences on random small nets") {
    Rng rng(2024);
    double worst = 0.0;
    const Activation acts[] = {Activation::relu, Activation::sigmoid, Activation::identity};
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t depth = 1 + rng.index(3);
        std::vector<std::size_t> dims{1 + rng.index(8)};
        for (std::size_t l = 0; l < depth; ++l) dims.push_back(1 + rng.index(8));
        auto net = make_mlp(dims, acts[rng.index(3)], acts[rng.index(3)], rng);
        Matrix x(3, static_cast<Eigen::Index>(dims[0]));
        do {
            for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        } while (testing::relu_margin(net, x) < 1e-3);
        Matrix proj(3, static_cast<Eigen::Index>(dims.back()));
        for (Eigen::Index i = 0; i < proj.size(); ++i) proj.data()[i] = rng.normal();
        worst = std::max(worst, testing::network_gradient_error(net, x, proj));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("backward: stale tape is rejected") {
    Rng rng(1);
    std::vector<std::size_t> dims{2, 3, 1};
    auto net = make_mlp(dims, Activation::relu, Activation::identity, rng);
    auto fwd = forward(net, Matrix::Ones(1, 2));
    auto grads = backward(net, fwd.tape, Matrix::Ones(1, 1));
    sgd_step(net, grads, 0.1);
    CHECK_THROWS_AS(backward(net, fwd.tape, Matrix::Ones(1, 1)), StateError);

    NetworkParams other = net;
    auto fwd2 = forward(net, Matrix::Ones(1, 2));
    CHECK_THROWS_AS(backward(other, fwd2.tape, Matrix::Ones(1, 1)), StateError);
}

TEST_CASE("sgd_step arithmetic") {
    auto net = single_layer(Matrix::Ones(1, 1), Activation::identity);
    Gradients g;
    g.weights = {Matrix::Constant(1, 1, 2.0)};
    g.biases = {Vector::Zero(1)};
    sgd_step(net, g, 0.1);
    CHECK(net.layers()[0].weights(0, 0) == doctest::Approx(0.8).epsilon(1e-15));

    g.weights = {Matrix::Zero(1, 1)};
    sgd_step(net, g, 0.1);
    CHECK(net.layers()[0].weights(0, 0) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("sgd_step: two steps on w^2 from 1 with lr 0.1 reach 0.64") {
    auto net = single_layer(Matrix::Ones(1, 1), Activation::identity);
    for (int step = 0; step < 2; ++step) {
        const double w = net.layers()[0].weights(0, 0);
        Gradients g;
        g.weights = {Matrix::Constant(1, 1, 2.0 * w)};
        g.biases = {Vector::Zero(1)};
        sgd_step(net, g, 0.1);
    }
    CHECK(net.layers()[0].weights(0, 0) == doctest::Approx(0.64).epsilon(1e-14));
}

TEST_CASE("sgd_step: non-finite gradient aborts the step") {
    auto net = single_layer(Matrix::Ones(1, 1), Activation::identity);
    Gradients g;
    g.weights = {Matrix::Constant(1, 1, NAN)};
    g.biases = {Vector::Zero(1)};
    CHECK_THROWS_AS(sgd_step(net, g, 0.1), NumericError);
    CHECK(net.layers()[0].weights(0, 0) == 1.0);
}

TEST_CASE("optimizer: sgd kind equals sgd_step; adam decreases a quadratic") {
    auto a = single_layer(Matrix::Ones(1, 1), Activation::identity);
    auto b = a;
    Optimizer opt(a, {OptimizerKind::sgd, 0.1});
    Gradients g;
    g.weights = {Matrix::Constant(1, 1, 2.0)};
    g.biases = {Vector::Constant(1, 1.0)};
    opt.step(a, g);
    sgd_step(b, g, 0.1);
    CHECK(a.layers()[0].weights(0, 0) == b.layers()[0].weights(0, 0));
    CHECK(a.layers()[0].bias(0) == b.layers()[0].bias(0));

    auto c = single_layer(Matrix::Ones(1, 1), Activation::identity);
    Optimizer adam(c, {OptimizerKind::adam, 0.05});
    for (int i = 0; i < 200; ++i) {
        Gradients q;
        q.weights = {Matrix::Constant(1, 1, 2.0 * c.layers()[0].weights(0, 0))};
        q.biases = {Vector::Zero(1)};
        adam.step(c, q);
    }
    CHECK(std::abs(c.layers()[0].weights(0, 0)) < 0.05);
}

TEST_CASE("training determinism: same seed gives bit-identical parameters") {
    auto run = [](std::uint64_t seed) {
        Rng rng(seed);
        std::vector<std::size_t> dims{3, 8, 8, 1};
        auto net = make_mlp(dims, Activation::relu, Activation::sigmoid, rng);
        Optimizer opt(net, {OptimizerKind::adam, 1e-2});
        Matrix x(16, 3);
        Labels y(16);
        for (Eigen::Index i = 0; i < 16; ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = rng.normal();
            y[static_cast<std::size_t>(i)] = x(i, 0) > 0 ? 1 : 0;
        }
        for (int it = 0; it < 50; ++it) {
            auto fwd = forward(net, x);
            auto loss = bce_loss(fwd.output, y);
            opt.step(net, backward(net, fwd.tape, loss.grad));
        }
        return net;
    };
    auto a = run(11);
    auto b = run(11);
    auto c = run(12);
    for (std::size_t l = 0; l < a.layers().size(); ++l) {
        CHECK(a.layers()[l].weights == b.layers()[l].weights);
        CHECK(a.layers()[l].bias == b.layers()[l].bias);
    }
    CHECK(a.layers()[0].weights != c.layers()[0].weights);
}

TEST_CASE("forward never produces NaN on finite inputs") {
    Rng rng(77);
    std::vector<std::size_t> dims{5, 16, 16, 1};
    auto net = make_mlp(dims, Activation::relu, Activation::sigmoid, rng);
    Matrix x(50, 5);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal(0.0, 1e3);
    CHECK(forward(net, x).output.allFinite());
}

TEST_CASE("rng: reproducible streams and sane moments") {
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng r(9);
    double sum = 0.0;
    double sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = r.normal();
        sum += v;
        sq += v * v;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);

    auto p = r.permutation(10);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < 10; ++i) CHECK(p[i] == i);
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
}

TEST_CASE("network json round trip preserves parameters exactly") {
    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::size_t> dims{1 + rng.index(5), 1 + rng.index(5), 1 + rng.index(5)};
        auto net = make_mlp(dims, Activation::relu, Activation::sigmoid, rng);
        auto back = network_from_json(nlohmann::json::parse(network_to_json(net).dump()));
        CHECK(back.layer_dims() == net.layer_dims());
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            CHECK(back.layers()[l].weights == net.layers()[l].weights);
            CHECK(back.layers()[l].bias == net.layers()[l].bias);
            CHECK(back.layers()[l].activation == net.layers()[l].activation);
        }
    }
    CHECK_THROWS_AS(network_from_json(nlohmann::json{{"layer_dims", {2, 1}}}), SchemaError);
}

TEST_CASE("bce and mse losses") {
    Matrix p(2, 1);
    p << 0.5, 0.0;
    Labels y{1, 0};
    auto r = bce_loss(p, y);
    CHECK(r.value == doctest::Approx((std::log(2.0) - std::log(1.0 - kProbClamp)) / 2.0));
    CHECK(std::isfinite(bce_loss(Matrix::Zero(1, 1), Labels{1}).value));

    Matrix a = Matrix::Ones(2, 2);
    auto m = mse_loss(a, Matrix::Zero(2, 2));
    CHECK(m.value == 1.0);
    CHECK(m.grad(0, 0) == 0.5);
}
