#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include "relrank/checkpoint.hpp"
#include "relrank/nn.hpp"
#include "relrank/rng.hpp"
#include "relrank/tensor.hpp"

using namespace relrank;
using namespace relrank::nn;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<Real>(rng.uniform(lo, hi));
    return t;
}

// Scalar readout for gradient checks: fixed random coefficients over the
// flattened output, so the check exercises every output cell.
struct Readout {
    std::vector<Real> coeffs;

    explicit Readout(std::size_t n, Rng& rng) {
        coeffs.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            coeffs.push_back(static_cast<Real>(rng.uniform(-1.0, 1.0)));
        }
    }

    Real operator()(const Tensor& y) const {
        Real acc = 0;
        for (std::size_t i = 0; i < y.size(); ++i) acc += coeffs[i] * y[i];
        return acc;
    }

    Tensor upstream(const Tensor& like) const {
        Tensor dy(like.shape());
        for (std::size_t i = 0; i < dy.size(); ++i) dy[i] = coeffs[i];
        return dy;
    }
};

} // namespace

TEST_CASE("dense layer identity forward") {
    DenseLayer layer(3, 3, Activation::Linear);
    layer.weights().value.zero();
    for (std::size_t i = 0; i < 3; ++i) layer.weights().value.at(i, i) = 1;
    layer.bias().value.zero();

    Rng rng(7);
    const Tensor x = random_tensor({4, 3}, rng);
    const Tensor y = layer.forward(x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]));
}

TEST_CASE("relu and sigmoid definitions") {
    Tensor t({2});
    t[0] = -3;
    t[1] = 2;
    relu_inplace(t);
    CHECK(t[0] == 0);
    CHECK(t[1] == 2);
    CHECK(sigmoid(Real(0)) == doctest::Approx(0.5));
}

TEST_CASE("dense layer gradient matches central differences") {
    Rng rng(11);
    DenseLayer layer(5, 4, Activation::Relu);
    layer.init(rng);
    Tensor x = random_tensor({3, 5}, rng);
    Tensor dx_storage;
    Readout readout(3 * 4, rng);

    auto forward = [&] { return readout(layer.forward(x)); };
    auto backprop = [&] {
        const Tensor y = layer.forward(x);
        dx_storage = layer.backward(readout.upstream(y));
    };
    std::vector<NamedParam> params;
    layer.collect_params("dense", params);
    auto slots = slots_of(params);
    slots.push_back({"input", &x, &dx_storage});

    const auto result = grad_check(forward, backprop, slots);
    CHECK(result.max_rel_err <= 1e-6);
}

TEST_CASE("conv1d constant signal") {
    Conv1dLayer conv(1, 1, 2);
    conv.filter_bank().value.fill(1);
    conv.bias().value.zero();
    Tensor x({1, 1, 5}, Real(1));
    const Tensor y = conv.forward(x);
    REQUIRE(y.shape() == std::vector<std::size_t>{1, 1, 4});
    for (std::size_t k = 0; k < 4; ++k) CHECK(y.at(0, 0, k) == doctest::Approx(2.0));
}

TEST_CASE("conv1d delta response lands on its column") {
    Conv1dLayer conv(1, 1, 2);
    conv.filter_bank().value.zero();
    conv.filter_bank().value.at(0, 0, 0) = 1; // filter [1, 0]
    conv.bias().value.zero();
    Tensor x({1, 1, 5}, Real(0));
    x.at(0, 0, 2) = 1; // t = 3, 1-based
    const Tensor y = conv.forward(x);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(y.at(0, 0, k) == doctest::Approx(k == 2 ? 1.0 : 0.0));
    }
}

TEST_CASE("conv1d gradient matches central differences") {
    Rng rng(13);
    Conv1dLayer conv(2, 3, 3);
    conv.init(rng);
    Tensor x = random_tensor({2, 2, 7}, rng);
    Tensor dx_storage;
    Readout readout(2 * 3 * 5, rng);

    auto forward = [&] { return readout(conv.forward(x)); };
    auto backprop = [&] {
        const Tensor y = conv.forward(x);
        dx_storage = conv.backward(readout.upstream(y));
    };
    std::vector<NamedParam> params;
    conv.collect_params("conv", params);
    auto slots = slots_of(params);
    slots.push_back({"input", &x, &dx_storage});

    const auto result = grad_check(forward, backprop, slots);
    CHECK(result.max_rel_err <= 1e-4);
}

TEST_CASE("conv1d output length is T - w + 1") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t w = 1 + rng.below(6);
        const std::size_t t_len = w + rng.below(10);
        Conv1dLayer conv(1, 2, w);
        conv.init(rng);
        const Tensor y = conv.forward(random_tensor({1, 1, t_len}, rng));
        CHECK(y.extent(2) == t_len - w + 1);
    }
    Conv1dLayer conv(1, 1, 5);
    conv.init(rng);
    CHECK_THROWS_AS(conv.forward(Tensor({1, 1, 4})), DimensionError);
}

TEST_CASE("batchnorm training output has zero mean unit variance") {
    Rng rng(19);
    BatchNormLayer bn(3);
    const Tensor x = random_tensor({8, 3}, rng, -5.0, 5.0);
    const Tensor y = bn.forward(x, Mode::Training);
    for (std::size_t c = 0; c < 3; ++c) {
        double mean = 0, var = 0;
        for (std::size_t b = 0; b < 8; ++b) mean += y.at(b, c);
        mean /= 8;
        for (std::size_t b = 0; b < 8; ++b) {
            var += (y.at(b, c) - mean) * (y.at(b, c) - mean);
        }
        var /= 8;
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3)); // eps shifts variance slightly
    }
}

TEST_CASE("batchnorm rejects training batches of one") {
    BatchNormLayer bn(4);
    CHECK_THROWS_AS(bn.forward(Tensor({1, 4}, Real(1)), Mode::Training), DimensionError);
    // A single series still works when positions supply the statistics.
    CHECK_NOTHROW(bn.forward(Tensor({1, 4, 6}, Real(1)), Mode::Inference));
}

TEST_CASE("batchnorm inference is affine with no batch coupling") {
    Rng rng(23);
    BatchNormLayer bn(2);
    bn.forward(random_tensor({16, 2}, rng, 0.0, 4.0), Mode::Training); // warm running stats

    const Tensor a = random_tensor({1, 2}, rng);
    const Tensor b = random_tensor({1, 2}, rng);
    Tensor both({2, 2});
    both.at(0, 0) = a.at(0, 0);
    both.at(0, 1) = a.at(0, 1);
    both.at(1, 0) = b.at(0, 0);
    both.at(1, 1) = b.at(0, 1);

    const Tensor ya = bn.forward(a, Mode::Inference);
    const Tensor yb = bn.forward(b, Mode::Inference);
    const Tensor yboth = bn.forward(both, Mode::Inference);
    CHECK(yboth.at(0, 0) == doctest::Approx(ya.at(0, 0)).epsilon(1e-12));
    CHECK(yboth.at(0, 1) == doctest::Approx(ya.at(0, 1)).epsilon(1e-12));
    CHECK(yboth.at(1, 0) == doctest::Approx(yb.at(0, 0)).epsilon(1e-12));
    CHECK(yboth.at(1, 1) == doctest::Approx(yb.at(0, 1)).epsilon(1e-12));
}

TEST_CASE("batchnorm gradient matches central differences") {
    Rng rng(29);
    BatchNormLayer bn(3);
    Tensor x = random_tensor({5, 3}, rng, -2.0, 2.0);
    Tensor dx_storage;
    Readout readout(5 * 3, rng);

    auto forward = [&] { return readout(bn.forward(x, Mode::Training)); };
    auto backprop = [&] {
        const Tensor y = bn.forward(x, Mode::Training);
        dx_storage = bn.backward(readout.upstream(y));
    };
    std::vector<NamedParam> params;
    bn.collect_params("bn", params);
    auto slots = slots_of(params);
    slots.push_back({"input", &x, &dx_storage});

    const auto result = grad_check(forward, backprop, slots);
    CHECK(result.max_rel_err <= 1e-4);
}

TEST_CASE("dropout boundary behavior") {
    Rng rng(31);
    DropoutLayer drop(Real(0));
    const Tensor x = random_tensor({4, 4}, rng);
    const Tensor y = drop.forward(x, Mode::Training, rng);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);

    DropoutLayer half(Real(0.5));
    const Tensor yi = half.forward(x, Mode::Inference, rng);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(yi[i] == x[i]);

    CHECK_THROWS_AS(DropoutLayer(Real(1)), ConfigError);
}

TEST_CASE("embedding lookup and scatter-add gradient") {
    Rng rng(37);
    EmbeddingTable table(6, 3);
    table.init(rng);
    const std::vector<std::size_t> idx = {2, 4, 2};
    const Tensor rows = table.lookup(idx);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(rows.at(0, j) == table.table().value.at(2, j));
        CHECK(rows.at(1, j) == table.table().value.at(4, j));
        CHECK(rows.at(2, j) == table.table().value.at(2, j));
    }

    Tensor dy({3, 3}, Real(1));
    table.accumulate_grad(idx, dy);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(table.table().grad.at(2, j) == doctest::Approx(2.0)); // two occurrences
        CHECK(table.table().grad.at(4, j) == doctest::Approx(1.0));
        CHECK(table.table().grad.at(0, j) == doctest::Approx(0.0));
    }
    CHECK_THROWS_AS(table.lookup(std::vector<std::size_t>{6}), DimensionError);
}

TEST_CASE("adam zero gradient leaves values unchanged") {
    Parameter p({4});
    p.value.fill(Real(0.5));
    p.grad.zero();
    std::vector<NamedParam> params{{"p", &p}};
    adam_step(params, {}, 1);
    for (std::size_t i = 0; i < 4; ++i) CHECK(p.value[i] == doctest::Approx(0.5));
}

TEST_CASE("adam first step from zero moments") {
    Parameter p({1});
    p.value[0] = 1.0;
    p.grad[0] = 0.3;
    AdamConfig cfg;
    cfg.lr = Real(0.01);
    std::vector<NamedParam> params{{"p", &p}};
    adam_step(params, cfg, 1);
    // m-hat = g, v-hat = g^2: delta = -lr * g / (|g| + eps)
    const double expected = 1.0 - 0.01 * 0.3 / (0.3 + 1e-8);
    CHECK(p.value[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(p.grad[0] == 0); // grads cleared after the step
}

TEST_CASE("adam constant gradient approaches lr-sized signed steps") {
    Parameter p({1});
    p.value[0] = 0;
    AdamConfig cfg;
    cfg.lr = Real(0.05);
    std::vector<NamedParam> params{{"p", &p}};
    double prev = 0;
    double step = 0;
    for (std::uint64_t t = 1; t <= 500; ++t) {
        p.grad[0] = -2.0; // constant negative gradient -> value climbs
        adam_step(params, cfg, t);
        step = p.value[0] - prev;
        prev = p.value[0];
    }
    CHECK(step == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("glorot init respects bound and seed determinism") {
    Rng rng(41);
    Tensor t({100, 100});
    glorot_init(t, 100, 100, rng);
    const double bound = std::sqrt(6.0 / 200.0);
    double sum = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(std::abs(t[i]) <= bound);
        sum += t[i];
    }
    const double mean = sum / static_cast<double>(t.size());
    // Uniform(-b, b): sd of the mean is b / sqrt(3 n).
    const double sigma = bound / std::sqrt(3.0 * static_cast<double>(t.size()));
    CHECK(std::abs(mean) <= 3.0 * sigma);

    Rng r1(99), r2(99);
    Tensor a({8, 8}), b({8, 8});
    glorot_init(a, 8, 8, r1);
    glorot_init(b, 8, 8, r2);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("grad check flags a corrupted backward pass") {
    Rng rng(43);
    DenseLayer layer(4, 3, Activation::Linear);
    layer.init(rng);
    Tensor x = random_tensor({2, 4}, rng);
    Readout readout(2 * 3, rng);

    auto forward = [&] { return readout(layer.forward(x)); };
    auto backprop = [&] {
        const Tensor y = layer.forward(x);
        layer.backward(readout.upstream(y));
        // Fault injection: corrupt one accumulated weight gradient.
        layer.weights().grad[0] += 1.0;
    };
    std::vector<NamedParam> params;
    layer.collect_params("dense", params);
    const auto result = grad_check(forward, backprop, slots_of(params));
    CHECK(result.max_rel_err > 1e-2);
}

TEST_CASE("layers pass grad check on randomized shapes") {
    Rng rng(47);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t in = 2 + rng.below(6);
        const std::size_t out = 1 + rng.below(5);
        const std::size_t batch = 2 + rng.below(4);
        const Activation act = trial % 2 == 0 ? Activation::Relu : Activation::Sigmoid;
        DenseLayer layer(in, out, act);
        layer.init(rng);
        Tensor x = random_tensor({batch, in}, rng);
        Tensor dx_storage;
        Readout readout(batch * out, rng);
        auto forward = [&] { return readout(layer.forward(x)); };
        auto backprop = [&] {
            const Tensor y = layer.forward(x);
            dx_storage = layer.backward(readout.upstream(y));
        };
        std::vector<NamedParam> params;
        layer.collect_params("dense", params);
        auto slots = slots_of(params);
        slots.push_back({"input", &x, &dx_storage});
        CHECK(grad_check(forward, backprop, slots).max_rel_err <= 1e-4);
    }
}

TEST_CASE("forward passes are deterministic") {
    Rng rng(53);
    DenseLayer layer(6, 4, Activation::Relu);
    layer.init(rng);
    const Tensor x = random_tensor({3, 6}, rng);
    const Tensor y1 = layer.forward(x);
    const Tensor y2 = layer.forward(x);
    for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);
}

TEST_CASE("checkpoint round trip is bit exact") {
    Rng rng(59);
    Checkpoint ck;
    ck.config["model.alpha"] = "2.5";
    ck.config["train.lr"] = "0.001";
    Tensor weird({3, 3});
    for (std::size_t i = 0; i < weird.size(); ++i) {
        weird[i] = static_cast<Real>(rng.uniform(-1.0, 1.0)) * Real(1e-7);
    }
    weird[0] = Real(0);
    weird[1] = Real(-0.0);
    weird[2] = Real(1) / Real(3);
    ck.tensors.emplace_back("w", weird);
    ck.tensors.emplace_back("running_var", Tensor({2}, Real(1)));

    const auto path = std::filesystem::temp_directory_path() / "relrank_ck_test.rrc";
    ck.save(path.string());
    const Checkpoint loaded = Checkpoint::load(path.string());

    REQUIRE(loaded.tensors.size() == 2);
    CHECK(loaded.config.at("model.alpha") == "2.5");
    CHECK(loaded.tensors[0].first == "w");
    REQUIRE(loaded.tensors[0].second.shape() == weird.shape());
    for (std::size_t i = 0; i < weird.size(); ++i) {
        const double a = weird[i];
        const double b = loaded.tensors[0].second[i];
        CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
    }
    std::filesystem::remove(path);
}
