#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "testutil.hpp"
#include "wordspot/model.hpp"
#include "wordspot/objectives.hpp"

using namespace wordspot;

TEST_CASE("similarity_matrix examples") {
    const Tensor eye = Tensor::identity(2);
    const Tensor s = similarity_matrix(eye, eye);
    CHECK(s.data == std::vector<double>{1, 0, 0, 1});

    const Tensor v = Tensor::matrix(1, 2, {1, 0});
    const Tensor z = Tensor::matrix(1, 2, {std::sqrt(0.5), std::sqrt(0.5)});
    CHECK(similarity_matrix(v, z).data[0] == doctest::Approx(0.70711).epsilon(1e-5));

    Rng rng(3);
    const Tensor a = testutil::random_unit_rows(6, 8, rng);
    const Tensor b = testutil::random_unit_rows(6, 8, rng);
    for (double x : similarity_matrix(a, b).data) {
        CHECK(x <= 1.0 + 1e-12);
        CHECK(x >= -1.0 - 1e-12);
    }

    Tensor not_unit = Tensor::matrix(1, 2, {1.0, 1.0});
    CHECK_THROWS_AS(similarity_matrix(not_unit, eye), Error);
}

TEST_CASE("directional losses: closed forms") {
    // uniform similarity -> ln N for any temperature
    for (int n : {2, 3, 8}) {
        const Tensor s = Tensor::full({n, n}, 0.37);
        CHECK(std::fabs(loss_v2t(s, 0.2) - std::log(n)) < 1e-9);
        CHECK(std::fabs(loss_t2v(s, 0.2) - std::log(n)) < 1e-9);
        CHECK(std::fabs(loss_itc(s, 0.2) - std::log(n)) < 1e-9);
    }

    // N=2, S=I, tau=1: -log(e / (e + 1))
    const Tensor eye = Tensor::identity(2);
    const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
    CHECK(loss_v2t(eye, 1.0) == doctest::Approx(0.313262).epsilon(1e-5));
    CHECK(loss_v2t(eye, 1.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(loss_t2v(eye, 1.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(loss_itc(eye, 1.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("loss decreases monotonically as the diagonal strengthens") {
    Tensor s = Tensor::full({3, 3}, 0.1);
    double prev = loss_v2t(s, 0.5);
    for (double d = 0.2; d <= 1.0; d += 0.1) {
        for (int i = 0; i < 3; ++i) s.at(i, i) = d;
        const double cur = loss_v2t(s, 0.5);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("t2v equals v2t on symmetric similarity") {
    Rng rng(5);
    Tensor s = Tensor::zeros({4, 4});
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            const double x = rng.uniform(-0.9, 0.9);
            s.at(i, j) = x;
            s.at(j, i) = x;
        }
    CHECK(loss_t2v(s, 0.3) == doctest::Approx(loss_v2t(s, 0.3)).epsilon(1e-12));

    // asymmetric: itc is the exact mean
    s.at(0, 1) += 0.4;
    const double itc = loss_itc(s, 0.3);
    const double lo = std::min(loss_v2t(s, 0.3), loss_t2v(s, 0.3));
    const double hi = std::max(loss_v2t(s, 0.3), loss_t2v(s, 0.3));
    CHECK(itc == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
    CHECK(itc >= lo);
    CHECK(itc <= hi);
}

TEST_CASE("semantic_mask expansion") {
    const Tensor m = semantic_mask({0, 1, 0});
    CHECK(m.data == std::vector<double>{0, 0, 1, 0, 0, 0, 1, 0, 0});

    const Tensor distinct = semantic_mask({0, 1, 2});
    for (double x : distinct.data) CHECK(x == 0.0);

    const Tensor same = semantic_mask({7, 7, 7});
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) CHECK(same.at(j, k) == (j == k ? 0.0 : 1.0));
}

TEST_CASE("loss_inv examples") {
    // perfectly clustered same-class embeddings
    Tensor h = Tensor::matrix(4, 2, {1, 0, 1, 0, 0, 1, 0, 1});
    CHECK(loss_inv(h, {0, 0, 1, 1}, 1e-8) <= 1e-6);

    // no positive pairs -> exactly 1
    CHECK(loss_inv(Tensor::identity(3), {0, 1, 2}, 1e-8) == doctest::Approx(1.0).epsilon(1e-15));

    // two same-class embeddings at 45 degrees
    Tensor pair = Tensor::matrix(2, 2, {1, 0, std::sqrt(0.5), std::sqrt(0.5)});
    CHECK(loss_inv(pair, {4, 4}, 1e-8) == doctest::Approx(0.29289).epsilon(1e-4));
}

TEST_CASE("loss_inv is modality blind") {
    Rng rng(11);
    const Tensor v = testutil::random_unit_rows(4, 6, rng);
    const Tensor z = testutil::random_unit_rows(4, 6, rng);
    const std::vector<int> labels = {0, 1, 0, 2};

    const NodePtr a = loss_inv_node(constant(v), constant(z), labels, 1e-8);
    // swap a visual row with a text row having identical coordinates/label
    Tensor v2 = v, z2 = z;
    for (int j = 0; j < 6; ++j) std::swap(v2.at(2, j), z2.at(2, j));
    const NodePtr b = loss_inv_node(constant(v2), constant(z2), labels, 1e-8);
    CHECK(a->value.data[0] == doctest::Approx(b->value.data[0]).epsilon(1e-12));
}

TEST_CASE("total_loss: degenerate weight and weighted-sum identity") {
    Rng rng(13);
    EmbeddingBatch batch;
    batch.visual = testutil::random_unit_rows(5, 8, rng);
    batch.text = testutil::random_unit_rows(5, 8, rng);
    batch.labels = {0, 1, 2, 0, 1};

    LossConfig cfg;
    cfg.lambda = 0.0;
    const Tensor s = similarity_matrix(batch.visual, batch.text);
    CHECK(total_loss(batch, 0.07, cfg) == doctest::Approx(loss_itc(s, 0.07)).epsilon(1e-12));

    cfg.lambda = 0.5;
    Tensor h = Tensor::zeros({10, 8});
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 8; ++j) {
            h.at(i, j) = batch.visual.at(i, j);
            h.at(i + 5, j) = batch.text.at(i, j);
        }
    std::vector<int> h_labels = batch.labels;
    h_labels.insert(h_labels.end(), batch.labels.begin(), batch.labels.end());
    const double expected = loss_itc(s, 0.07) + 0.5 * loss_inv(h, h_labels, cfg.epsilon);
    CHECK(total_loss(batch, 0.07, cfg) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("losses are invariant under joint batch permutation") {
    Rng rng(17);
    EmbeddingBatch batch;
    batch.visual = testutil::random_unit_rows(6, 5, rng);
    batch.text = testutil::random_unit_rows(6, 5, rng);
    batch.labels = {0, 1, 2, 0, 1, 2};
    LossConfig cfg;
    const double base = total_loss(batch, 0.1, cfg);

    const std::vector<int> perm = {3, 0, 5, 1, 4, 2};
    EmbeddingBatch shuffled;
    shuffled.visual = Tensor::zeros({6, 5});
    shuffled.text = Tensor::zeros({6, 5});
    shuffled.labels.resize(6);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 5; ++j) {
            shuffled.visual.at(i, j) = batch.visual.at(perm[i], j);
            shuffled.text.at(i, j) = batch.text.at(perm[i], j);
        }
        shuffled.labels[i] = batch.labels[perm[i]];
    }
    CHECK(total_loss(shuffled, 0.1, cfg) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("ablation toggles of the loss graph") {
    Rng rng(19);
    const Tensor v = testutil::random_unit_rows(4, 6, rng);
    const Tensor z = testutil::random_unit_rows(4, 6, rng);
    const std::vector<int> labels = {0, 1, 0, 1};
    const NodePtr lt = constant(Tensor::scalar(std::log(0.07)));
    LossConfig cfg;

    LossToggles only_v2t;
    only_v2t.t2v = false;
    only_v2t.inv = false;
    const auto nodes = total_loss_node(constant(v), constant(z), labels, lt, cfg, only_v2t);
    CHECK(nodes.invariance == nullptr);
    CHECK(nodes.total->value.data[0] ==
          doctest::Approx(loss_v2t(similarity_matrix(v, z), 0.07)).epsilon(1e-12));

    LossToggles none;
    none.v2t = none.t2v = none.inv = false;
    CHECK_THROWS_AS(total_loss_node(constant(v), constant(z), labels, lt, cfg, none), Error);
}

TEST_CASE("full-model gradient matches finite differences") {
    // tiny model so the FD sweep stays fast
    ModelConfig cfg;
    cfg.canvas_height = 8;
    cfg.canvas_width = 16;
    cfg.pool = 4;
    cfg.hidden_dim = 5;
    cfg.anchor.base_dim = 6;
    cfg.anchor.embed_dim = 4;

    Rng rng(23);
    const int n = 4;
    const Tensor pooled = testutil::random_tensor({n, cfg.pooled_dim()}, rng, 0.0, 1.0);
    const Tensor anchors = testutil::random_unit_rows(n, cfg.anchor.base_dim, rng);
    const std::vector<int> labels = {0, 1, 0, 1};
    LossConfig loss_cfg;

    ModelParams p = init_params(31, cfg);
    std::vector<Tensor> values;
    for (const Tensor* t : p.trainable()) values.push_back(*t);

    const double worst = testutil::gradient_check(
        [&](const std::vector<NodePtr>& params) {
            ModelGraph g;
            g.w1 = params[0];
            g.b1 = params[1];
            g.w2 = params[2];
            g.b2 = params[3];
            g.w3 = params[4];
            g.b3 = params[5];
            g.text_proj = params[6];
            g.log_temperature = params[7];
            const NodePtr v = encode_image_batch(g, pooled);
            const NodePtr z = encode_text_batch(g, anchors);
            return total_loss_node(v, z, labels, g.log_temperature, loss_cfg).total;
        },
        values);
    CHECK(worst <= 1e-4);
}

TEST_CASE("gradient flows only into trainable parameters") {
    ModelConfig cfg;
    cfg.canvas_height = 8;
    cfg.canvas_width = 16;
    cfg.pool = 4;
    cfg.hidden_dim = 5;
    cfg.anchor.base_dim = 6;
    cfg.anchor.embed_dim = 4;
    Rng rng(29);
    ModelParams p = init_params(37, cfg);
    ModelGraph g = make_graph(p);

    const Tensor pooled = testutil::random_tensor({3, cfg.pooled_dim()}, rng, 0.0, 1.0);
    const Tensor anchors = testutil::random_unit_rows(3, cfg.anchor.base_dim, rng);
    const NodePtr v = encode_image_batch(g, pooled);
    const NodePtr z = encode_text_batch(g, anchors);
    LossConfig loss_cfg;
    const auto nodes = total_loss_node(v, z, {0, 1, 0}, g.log_temperature, loss_cfg);
    backward(nodes.total);

    // Every trainable tensor received gradient; the anchor rows entered as
    // constants (requires_grad false), i.e. the frozen side never updates.
    for (const NodePtr& node : g.all()) {
        double sq = 0.0;
        for (double x : node->grad.data) sq += x * x;
        CHECK(sq > 0.0);
    }
}
