#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "testutil.hpp"
#include "wordspot/autograd.hpp"
#include "wordspot/optim.hpp"

using namespace wordspot;

TEST_CASE("tensor shape bookkeeping") {
    Tensor t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    CHECK(t.at(1, 2) == 6);
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0}), Error);
}

TEST_CASE("matmul forward examples") {
    // identity case
    auto a = constant(Tensor::identity(2));
    auto b = constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
    auto c = matmul(a, b);
    CHECK(c->value.data == std::vector<double>{1, 2, 3, 4});

    // hand expansion 1*3 + 2*4
    auto r = matmul(constant(Tensor::matrix(1, 2, {1, 2})),
                    constant(Tensor::matrix(2, 1, {3, 4})));
    CHECK(r->value.data[0] == doctest::Approx(11.0));

    // annihilator
    auto z = matmul(b, constant(Tensor::zeros({2, 2})));
    for (double x : z->value.data) CHECK(x == 0.0);

    CHECK_THROWS_AS(matmul(a, constant(Tensor::matrix(3, 1, {1, 2, 3}))), Error);
}

TEST_CASE("l2_normalize examples") {
    auto v = l2_normalize(constant(Tensor::vector({3, 4})));
    CHECK(v->value.at(0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(v->value.at(1) == doctest::Approx(0.8).epsilon(1e-12));

    auto u = l2_normalize(constant(Tensor::vector({0.6, 0.8})));
    CHECK(u->value.at(0) == doctest::Approx(0.6).epsilon(1e-12));

    auto axis = l2_normalize(constant(Tensor::vector({2, 0, 0})));
    CHECK(axis->value.data == std::vector<double>{1, 0, 0});

    CHECK_THROWS_AS(l2_normalize(constant(Tensor::vector({0, 0, 0}))), Error);

    // output norm is 1 within 1e-9 for arbitrary non-degenerate inputs
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = testutil::random_tensor({8}, rng, -5.0, 5.0);
        if (std::fabs(x.data[0]) < 0.1) x.data[0] = 0.5;
        auto n = l2_normalize(constant(x));
        double sq = 0.0;
        for (double e : n->value.data) sq += e * e;
        CHECK(std::fabs(std::sqrt(sq) - 1.0) < 1e-9);
    }
}

TEST_CASE("elementwise examples") {
    CHECK(relu_op(constant(Tensor::scalar(-1.0)))->value.data[0] == 0.0);
    CHECK(tanh_op(constant(Tensor::scalar(0.0)))->value.data[0] == 0.0);
    auto x = constant(Tensor::vector({1.5, -2.5}));
    CHECK(scale(x, 1.0)->value.data == x->value.data);
}

TEST_CASE("backward basics") {
    // loss = sum(x) -> grad all ones
    auto x = parameter(Tensor::vector({1, 2, 3}));
    backward(sum(x));
    CHECK(x->grad.data == std::vector<double>{1, 1, 1});

    // loss = 0.5 * |x|^2 -> grad = x
    auto y = parameter(Tensor::vector({1.5, -2.0, 0.25}));
    backward(scale(sum(mul(y, y)), 0.5));
    for (int i = 0; i < 3; ++i) CHECK(y->grad.at(i) == doctest::Approx(y->value.at(i)));

    // non-scalar root rejected
    auto m = parameter(Tensor::matrix(2, 2, {1, 2, 3, 4}));
    CHECK_THROWS_AS(backward(scale(m, 2.0)), Error);
}

TEST_CASE("backward sums contributions of a twice-used node") {
    auto x = parameter(Tensor::vector({1.0, -3.0, 2.0}));
    backward(sum(mul(x, x)));  // f = sum(x .* x), grad = 2x
    for (int i = 0; i < 3; ++i) CHECK(x->grad.at(i) == doctest::Approx(2.0 * x->value.at(i)));
}

TEST_CASE("repeated backward without zeroing accumulates") {
    auto x = parameter(Tensor::vector({2.0, 5.0}));
    auto loss = sum(x);
    backward(loss);
    backward(loss);
    CHECK(x->grad.at(0) == doctest::Approx(2.0));
    CHECK(x->grad.at(1) == doctest::Approx(2.0));
}

TEST_CASE("finite-difference check per op") {
    Rng rng(42);
    double worst = 0.0;

    for (int trial = 0; trial < 5; ++trial) {
        // matmul + add + bias + tanh chain
        worst = std::max(worst, testutil::gradient_check(
            [](const std::vector<NodePtr>& p) {
                return sum(tanh_op(add_rowvec(matmul(p[0], p[1]), p[2])));
            },
            {testutil::random_tensor({3, 4}, rng), testutil::random_tensor({4, 2}, rng),
             testutil::random_tensor({2}, rng)}));

        // relu (keep inputs away from the kink)
        worst = std::max(worst, testutil::gradient_check(
            [](const std::vector<NodePtr>& p) { return sum(relu_op(p[0])); },
            {testutil::random_tensor({6}, rng, 0.2, 2.0)}));

        // exp/log/mean
        worst = std::max(worst, testutil::gradient_check(
            [](const std::vector<NodePtr>& p) { return mean(log_op(exp_op(p[0]))); },
            {testutil::random_tensor({2, 3}, rng)}));

        // l2_normalize rows + mul + sub + transpose
        worst = std::max(worst, testutil::gradient_check(
            [](const std::vector<NodePtr>& p) {
                auto n = l2_normalize(p[0]);
                return sum(mul(n, transpose(p[1])));
            },
            {testutil::random_tensor({3, 3}, rng, 0.3, 1.5),
             testutil::random_tensor({3, 3}, rng)}));

        // row_logsumexp + diag + scalar_mul
        worst = std::max(worst, testutil::gradient_check(
            [](const std::vector<NodePtr>& p) {
                auto logits = scalar_mul(exp_op(scale(p[1], -1.0)), p[0]);
                return mean(sub(row_logsumexp(logits), take_diag(logits)));
            },
            {testutil::random_tensor({4, 4}, rng), Tensor::scalar(-1.2)}));

        // concat_rows
        worst = std::max(worst, testutil::gradient_check(
            [](const std::vector<NodePtr>& p) {
                return sum(mul(concat_rows(p[0], p[1]), concat_rows(p[1], p[0])));
            },
            {testutil::random_tensor({2, 3}, rng), testutil::random_tensor({2, 3}, rng)}));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("adamw: zero grad and zero decay leaves params unchanged") {
    Tensor p = Tensor::vector({1.0, -2.0, 3.0});
    const Tensor before = p;
    Tensor g = Tensor::zeros({3});
    AdamWState state = make_adamw_state({&p});
    AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    adamw_step({&p}, {&g}, state, cfg);
    CHECK(p.data == before.data);
    CHECK(state.t == 1);
}

TEST_CASE("adamw: first step approximates signed update") {
    Tensor p = Tensor::vector({0.5, -0.5});
    Tensor g = Tensor::vector({0.3, -0.7});
    AdamWState state = make_adamw_state({&p});
    AdamWConfig cfg;
    cfg.lr = 1e-3;
    cfg.weight_decay = 0.0;
    adamw_step({&p}, {&g}, state, cfg);
    // m_hat = g, v_hat = g^2 -> step = lr * g / (|g| + eps) ~ lr * sign(g)
    CHECK(p.at(0) == doctest::Approx(0.5 - 1e-3).epsilon(1e-6));
    CHECK(p.at(1) == doctest::Approx(-0.5 + 1e-3).epsilon(1e-6));
}

TEST_CASE("adamw: decoupled decay is pure shrinkage under zero grad") {
    Tensor p = Tensor::vector({2.0, -4.0});
    Tensor g = Tensor::zeros({2});
    AdamWState state = make_adamw_state({&p});
    AdamWConfig cfg;
    cfg.lr = 0.1;
    cfg.weight_decay = 0.05;
    adamw_step({&p}, {&g}, state, cfg);
    CHECK(p.at(0) == doctest::Approx(2.0 * (1.0 - 0.1 * 0.05)));
    CHECK(p.at(1) == doctest::Approx(-4.0 * (1.0 - 0.1 * 0.05)));
}

TEST_CASE("adamw rejects bad arguments") {
    Tensor p = Tensor::vector({1.0});
    Tensor g = Tensor::vector({1.0});
    AdamWState state = make_adamw_state({&p});
    AdamWConfig cfg;
    cfg.lr = 0.0;
    CHECK_THROWS_AS(adamw_step({&p}, {&g}, state, cfg), Error);
}
