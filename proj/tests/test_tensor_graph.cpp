#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "acap/graph.hpp"
#include "acap/rng.hpp"
#include "acap/tensor.hpp"
#include "support.hpp"

using namespace acap;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("tensor basics") {
    Tensor t({2, 3});
    REQUIRE(t.numel() == 6);
    REQUIRE(t.rank() == 2);
    REQUIRE(t.rows() == 2);
    REQUIRE(t.cols() == 3);
    for (std::size_t i = 0; i < t.numel(); ++i) REQUIRE(t[i] == 0.0);
    t.at(1, 2) = 7.0;
    REQUIRE(t[5] == 7.0);
    REQUIRE(t.shape_str() == "[2x3]");

    REQUIRE_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);

    Tensor f = Tensor::full({3}, 2.5);
    REQUIRE(f[0] == 2.5);
    REQUIRE(f[2] == 2.5);

    Tensor bad = Tensor::vector({1.0, std::nan("")});
    REQUIRE_FALSE(bad.all_finite());
    REQUIRE_THROWS_AS(require_finite(bad, "check"), DivergenceError);
}

TEST_CASE("affine identity and bias") {
    Tape t;
    const NodePtr x = t.constant(Tensor::matrix(1, 2, {1.0, 2.0}));
    const NodePtr W = t.constant(Tensor::matrix(2, 2, {1.0, 0.0, 0.0, 1.0}));
    const NodePtr b = t.constant(Tensor::vector({0.0, 0.0}));
    const NodePtr y = affine(t, x, W, b);
    REQUIRE(y->val.shape == std::vector<std::size_t>{1, 2});
    REQUIRE(y->val[0] == 1.0);
    REQUIRE(y->val[1] == 2.0);

    const NodePtr x0 = t.constant(Tensor::vector({0.0, 0.0}));
    const NodePtr b2 = t.constant(Tensor::vector({3.0, 4.0}));
    const NodePtr y2 = affine(t, x0, W, b2);
    REQUIRE(y2->val.shape == std::vector<std::size_t>{2});
    REQUIRE(y2->val[0] == 3.0);
    REQUIRE(y2->val[1] == 4.0);
}

TEST_CASE("affine matches a scalar-loop oracle on random inputs") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor xv = testsup::random_tensor({3, 4}, rng);
        const Tensor Wv = testsup::random_tensor({4, 2}, rng);
        const Tensor bv = testsup::random_tensor({2}, rng);
        Tape t;
        const NodePtr y =
            affine(t, t.constant(xv), t.constant(Wv), t.constant(bv));
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t c = 0; c < 2; ++c) {
                double want = bv[c];
                for (std::size_t k = 0; k < 4; ++k) want += xv.at(r, k) * Wv.at(k, c);
                REQUIRE(y->val.at(r, c) == Approx(want).margin(1e-14));
            }
        }
    }
}

TEST_CASE("affine rejects mismatched shapes and names both") {
    Tape t;
    const NodePtr x = t.constant(Tensor::matrix(1, 3, {1.0, 2.0, 3.0}));
    const NodePtr W = t.constant(Tensor::matrix(2, 2, {1.0, 0.0, 0.0, 1.0}));
    const NodePtr b = t.constant(Tensor::vector({0.0, 0.0}));
    REQUIRE_THROWS_AS(affine(t, x, W, b), DimensionError);
    REQUIRE_THROWS_WITH(affine(t, x, W, b),
                        ContainsSubstring("[1x3]") && ContainsSubstring("[2x2]"));

    const NodePtr W3 = t.constant(Tensor::matrix(3, 2, {1, 0, 0, 1, 0, 0}));
    const NodePtr bad_b = t.constant(Tensor::vector({0.0, 0.0, 0.0}));
    REQUIRE_THROWS_WITH(affine(t, x, W3, bad_b),
                        ContainsSubstring("[3x2]") && ContainsSubstring("[3]"));
}

TEST_CASE("softmax known values") {
    Tape t;
    const NodePtr u = softmax(t, t.constant(Tensor::vector({1.0, 1.0, 1.0, 1.0})));
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(u->val[i] == Approx(0.25).margin(1e-15));

    // extreme logits must not overflow
    const NodePtr e = softmax(t, t.constant(Tensor::vector({1000.0, 0.0})));
    REQUIRE(e->val[0] == Approx(1.0).margin(1e-12));
    REQUIRE(e->val[1] == Approx(0.0).margin(1e-12));
    REQUIRE(e->val.all_finite());

    const NodePtr s = softmax(t, t.constant(Tensor::vector({1.0, 2.0, 3.0})));
    const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    REQUIRE(s->val[0] == Approx(std::exp(1.0) / z).margin(1e-14));
    REQUIRE(s->val[1] == Approx(std::exp(2.0) / z).margin(1e-14));
    REQUIRE(s->val[2] == Approx(std::exp(3.0) / z).margin(1e-14));

    REQUIRE_THROWS_AS(softmax(t, t.constant(Tensor({0}))), DimensionError);
}

TEST_CASE("softmax sums to one and ignores constant shifts") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SplitMix64 rng(seed);
        const std::size_t n = 1 + rng.next_below(12);
        Tensor x = testsup::random_tensor({n}, rng, -8.0, 8.0);
        Tensor shifted = x;
        const double c = rng.uniform(-100.0, 100.0);
        for (double& v : shifted.v) v += c;

        Tape t;
        const NodePtr a = softmax(t, t.constant(x));
        const NodePtr b = softmax(t, t.constant(shifted));
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += a->val[i];
            REQUIRE(a->val[i] == Approx(b->val[i]).margin(1e-12));
            REQUIRE(a->val[i] > 0.0);
        }
        REQUIRE(sum == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("weighted cross-entropy values") {
    Tape t;

    // confident correct prediction: loss collapses to (almost) zero
    const NodePtr hot = t.constant(Tensor::vector({1.0, 0.0, 0.0}));
    REQUIRE(weighted_cross_entropy(t, hot, 0, 1.0)->val[0] == Approx(0.0).margin(1e-7));

    // uniform over 4 classes: exactly ln 4
    const NodePtr uni = t.constant(Tensor::vector({0.25, 0.25, 0.25, 0.25}));
    REQUIRE(weighted_cross_entropy(t, uni, 2, 1.0)->val[0] ==
            Approx(std::log(4.0)).margin(1e-12));

    // the weight scales the loss linearly
    REQUIRE(weighted_cross_entropy(t, uni, 2, 0.5)->val[0] ==
            Approx(0.5 * std::log(4.0)).margin(1e-12));

    // binary mode sums per-coordinate terms
    const double want_binary = -std::log(0.25) - 3.0 * std::log(0.75);
    REQUIRE(weighted_cross_entropy(t, uni, 1, 1.0, LossMode::kBinary)->val[0] ==
            Approx(want_binary).margin(1e-12));
    REQUIRE(want_binary == Approx(2.2493405784752333).margin(1e-12));

    // rejections
    const NodePtr off = t.constant(Tensor::vector({0.5, 0.4}));
    REQUIRE_THROWS_AS(weighted_cross_entropy(t, off, 0, 1.0), ContractError);
    REQUIRE_THROWS_AS(weighted_cross_entropy(t, uni, 7, 1.0), ContractError);
    REQUIRE_THROWS_AS(weighted_cross_entropy(t, uni, 0, 0.0), ContractError);
    REQUIRE_THROWS_AS(weighted_cross_entropy(t, uni, 0, -1.0), ContractError);
}

TEST_CASE("elementwise ops and mean") {
    Tape t;
    const NodePtr a = t.constant(Tensor::vector({1.0, 2.0}));
    const NodePtr b = t.constant(Tensor::vector({3.0, 5.0}));
    REQUIRE(add(t, a, b)->val[1] == 7.0);
    REQUIRE(sub(t, b, a)->val[0] == 2.0);
    REQUIRE(mul(t, a, b)->val[1] == 10.0);
    REQUIRE(scale(t, b, -2.0)->val[0] == -6.0);

    const NodePtr c = t.constant(Tensor::vector({1.0, 2.0, 3.0}));
    REQUIRE_THROWS_AS(add(t, a, c), DimensionError);

    const NodePtr s1 = t.constant(Tensor({1}, {2.0}));
    const NodePtr s2 = t.constant(Tensor({1}, {4.0}));
    const NodePtr s3 = t.constant(Tensor({1}, {9.0}));
    REQUIRE(mean(t, {s1, s2, s3})->val[0] == Approx(5.0).margin(1e-15));
    REQUIRE_THROWS_AS(mean(t, {}), ContractError);

    REQUIRE(sigmoid(t, t.constant(Tensor::vector({0.0})))->val[0] == 0.5);
    REQUIRE(sigmoid(t, t.constant(Tensor::vector({-800.0})))->val[0] ==
            Approx(0.0).margin(1e-300));
    REQUIRE(tanh_op(t, t.constant(Tensor::vector({0.5})))->val[0] ==
            Approx(std::tanh(0.5)).margin(1e-15));

    const NodePtr v = t.constant(Tensor::vector({10.0, 11.0, 12.0, 13.0}));
    const NodePtr sl = slice(t, v, 1, 2);
    REQUIRE(sl->val.numel() == 2);
    REQUIRE(sl->val[0] == 11.0);
    REQUIRE(sl->val[1] == 12.0);
    REQUIRE_THROWS_AS(slice(t, v, 3, 2), DimensionError);

    const NodePtr cc = concat(t, a, b);
    REQUIRE(cc->val.numel() == 4);
    REQUIRE(cc->val[0] == 1.0);
    REQUIRE(cc->val[3] == 5.0);
}

TEST_CASE("leaves are cached and gradients accumulate across uses") {
    ParamStore store;
    Param& w = store.add("w", Tensor({1}, {3.0}));

    Tape t;
    const NodePtr l1 = t.leaf(w);
    const NodePtr l2 = t.leaf(w);
    REQUIRE(l1.get() == l2.get());

    // loss = w*w + 5*w, so dloss/dw = 2w + 5 = 11 at w = 3
    const NodePtr loss = add(t, mul(t, l1, l1), scale(t, l2, 5.0));
    REQUIRE(loss->val[0] == Approx(24.0).margin(1e-15));
    t.backward(loss);
    REQUIRE(w.grad[0] == Approx(11.0).margin(1e-12));

    // a second backward on a fresh tape adds into the same buffer
    Tape t2;
    t2.backward(mul(t2, t2.leaf(w), t2.leaf(w)));
    REQUIRE(w.grad[0] == Approx(17.0).margin(1e-12));

    store.zero_grads();
    REQUIRE(w.grad[0] == 0.0);
}

TEST_CASE("backward contract violations") {
    ParamStore store;
    Param& w = store.add("w", Tensor::vector({1.0, 2.0}));

    Tape t;
    const NodePtr vec = t.leaf(w);
    REQUIRE_THROWS_AS(t.backward(vec), DimensionError);

    Tape frozen(false);
    const NodePtr leaf = frozen.leaf(w);
    REQUIRE_FALSE(leaf->needs_grad);
    const NodePtr y = mul(frozen, leaf, leaf);
    REQUIRE_FALSE(y->needs_grad);
    REQUIRE_THROWS_AS(frozen.backward(y), ContractError);
    REQUIRE(w.grad[0] == 0.0);
}

TEST_CASE("constants never receive gradients") {
    ParamStore store;
    Param& w = store.add("w", Tensor({1}, {2.0}));
    Tape t;
    const NodePtr c = t.constant(Tensor({1}, {10.0}));
    const NodePtr loss = mul(t, t.leaf(w), c);
    t.backward(loss);
    REQUIRE(w.grad[0] == Approx(10.0).margin(1e-12));
    REQUIRE_FALSE(c->has_grad());
}

TEST_CASE("parameter store bookkeeping") {
    ParamStore store;
    store.add("a", Tensor({2, 2}));
    store.add("b", Tensor({3}));
    REQUIRE(store.size() == 2);
    REQUIRE(store.total_values() == 7);
    REQUIRE(store.contains("a"));
    REQUIRE_FALSE(store.contains("c"));
    REQUIRE_THROWS_AS(store.add("a", Tensor({1})), ContractError);
    REQUIRE_THROWS_AS(store.at("missing"), ContractError);
    REQUIRE(store[0].name == "a");
    REQUIRE(store[1].name == "b");

    store.at("b").value[1] = 4.0;
    ParamStore copy = store.clone();
    REQUIRE(copy.at("b").value[1] == 4.0);
    copy.at("b").value[1] = -1.0;
    REQUIRE(store.at("b").value[1] == 4.0);  // deep copy
}
