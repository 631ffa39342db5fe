#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "testutil.hpp"
#include "wordspot/model.hpp"

using namespace wordspot;

namespace {

double dot(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
    return acc;
}

}  // namespace

TEST_CASE("anchor_base: zero language offset collapses languages") {
    AnchorConfig cfg;
    cfg.language_offset_beta = 0.0;
    for (int y = 0; y < 5; ++y) {
        CHECK(anchor_base(y, "en", cfg).data == anchor_base(y, "zh", cfg).data);
    }
}

TEST_CASE("anchor_base: small offset keeps cross-lingual cosine high") {
    AnchorConfig cfg;  // beta = 0.1
    for (int y = 0; y < 20; ++y) {
        const Tensor en = anchor_base(y, "en", cfg);
        const Tensor zh = anchor_base(y, "zh", cfg);
        const Tensor es = anchor_base(y, "es", cfg);
        CHECK(dot(en, zh) >= 0.9);
        CHECK(dot(en, es) >= 0.9);
        CHECK(std::fabs(dot(en, en) - 1.0) < 1e-9);
    }
}

TEST_CASE("anchor_base: distinct classes are near-orthogonal at base_dim 64") {
    AnchorConfig cfg;
    for (int y = 0; y < 20; ++y) {
        for (int y2 = y + 1; y2 < 20; ++y2) {
            CHECK(std::fabs(dot(anchor_base(y, "en", cfg), anchor_base(y2, "en", cfg))) < 0.5);
        }
    }
}

TEST_CASE("anchor_base: deterministic, validates language") {
    AnchorConfig cfg;
    CHECK(anchor_base(3, "en", cfg).data == anchor_base(3, "en", cfg).data);
    CHECK_THROWS_AS(anchor_base(3, "fr", cfg), Error);
    CHECK_THROWS_AS(anchor_base(-1, "en", cfg), Error);
}

TEST_CASE("init_params: deterministic, documented defaults") {
    ModelConfig cfg;
    ModelParams a = init_params(17, cfg);
    ModelParams b = init_params(17, cfg);
    for (std::size_t i = 0; i < a.trainable().size(); ++i) {
        CHECK(a.trainable()[i]->data == b.trainable()[i]->data);
    }
    CHECK(a.temperature() == doctest::Approx(0.07).epsilon(1e-12));
    CHECK(a.w1.shape == std::vector<int>{108, 64});
    CHECK(a.w2.shape == std::vector<int>{64, 64});
    CHECK(a.text_proj.shape == std::vector<int>{64, 32});
    CHECK(a.param_count() < 100000);

    ModelParams c = init_params(18, cfg);
    CHECK(a.w1.data != c.w1.data);
}

TEST_CASE("encode_text: unit norm, determinism, projector composition") {
    ModelConfig cfg;
    ModelParams p = init_params(17, cfg);
    const Tensor z1 = encode_text(4, "en", p);
    const Tensor z2 = encode_text(4, "en", p);
    CHECK(z1.data == z2.data);
    CHECK(std::fabs(std::sqrt(dot(z1, z1)) - 1.0) < 1e-9);

    // identity-block projector with beta = 0: z is the truncated,
    // renormalized class direction
    ModelConfig cfg0;
    cfg0.anchor.language_offset_beta = 0.0;
    ModelParams q = init_params(17, cfg0);
    q.text_proj = Tensor::zeros({cfg0.anchor.base_dim, cfg0.anchor.embed_dim});
    for (int i = 0; i < cfg0.anchor.embed_dim; ++i) q.text_proj.at(i, i) = 1.0;
    const Tensor u = anchor_base(2, "en", cfg0.anchor);
    Tensor expected = Tensor::zeros({cfg0.anchor.embed_dim});
    double sq = 0.0;
    for (int i = 0; i < cfg0.anchor.embed_dim; ++i) {
        expected.at(i) = u.at(i);
        sq += u.at(i) * u.at(i);
    }
    for (int i = 0; i < cfg0.anchor.embed_dim; ++i) expected.at(i) /= std::sqrt(sq);
    const Tensor z = encode_text(2, "en", q);
    for (int i = 0; i < cfg0.anchor.embed_dim; ++i) {
        CHECK(z.at(i) == doctest::Approx(expected.at(i)).epsilon(1e-12));
    }
}

TEST_CASE("encode_image: unit norm, shape check, degenerate input") {
    ModelConfig cfg;
    ModelParams p = init_params(17, cfg);
    StyleParams style = style_from_id(0, 7);
    const Image img = render_word("abc", "en", style, 24, 72, 1);
    const Tensor v = encode_image(img, p);
    CHECK(std::fabs(std::sqrt(dot(v, v)) - 1.0) < 1e-9);

    Image bad;
    bad.height = 10;
    bad.width = 10;
    bad.pixels.assign(100, 0.0);
    CHECK_THROWS_AS(encode_image(bad, p), Error);

    // all-zero image with zero weights/biases -> degenerate embedding
    ModelParams zeroed = init_params(17, cfg);
    for (Tensor* t : zeroed.trainable()) t->fill(0.0);
    Image blank;
    blank.height = 24;
    blank.width = 72;
    blank.pixels.assign(24 * 72, 0.0);
    CHECK_THROWS_AS(encode_image(blank, zeroed), Error);
}

TEST_CASE("graph and plain encoders agree") {
    ModelConfig cfg;
    ModelParams p = init_params(21, cfg);
    StyleParams style = style_from_id(1, 7);
    const Image img = render_word("bcd", "en", style, 24, 72, 3);

    const Tensor direct = encode_image(img, p);
    const Tensor pooled = pool_image(img, cfg);
    ModelGraph g = make_graph(p);
    const NodePtr batch = encode_image_batch(
        g, Tensor::matrix(1, static_cast<int>(pooled.numel()), pooled.data));
    for (int j = 0; j < cfg.anchor.embed_dim; ++j) {
        CHECK(direct.at(j) == doctest::Approx(batch->value.at(0, j)).epsilon(1e-12));
    }

    const Tensor a = anchor_base(5, "zh", cfg.anchor);
    const NodePtr zb = encode_text_batch(g, Tensor::matrix(1, cfg.anchor.base_dim, a.data));
    const Tensor zt = encode_text(5, "zh", p);
    for (int j = 0; j < cfg.anchor.embed_dim; ++j) {
        CHECK(zt.at(j) == doctest::Approx(zb->value.at(0, j)).epsilon(1e-12));
    }
}

TEST_CASE("checkpoint round trip is bit exact") {
    testutil::TempDir dir("ckpt");
    ModelConfig cfg;
    cfg.anchor.anchor_seed = 99;
    ModelParams p = init_params(23, cfg);
    p.log_temperature.data[0] = std::log(0.05);
    const std::string path = dir.str() + "/model.ckpt";
    save_checkpoint(path, p);
    ModelParams q = load_checkpoint(path);
    CHECK(q.cfg.anchor.anchor_seed == 99);
    const auto pa = p.trainable();
    const auto qa = q.trainable();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == qa[i]->data);

    CHECK_THROWS_AS(load_checkpoint(dir.str() + "/missing.ckpt"), Error);
}

TEST_CASE("temperature clamp") {
    ModelConfig cfg;
    ModelParams p = init_params(1, cfg);
    p.log_temperature.data[0] = 5.0;
    p.clamp_temperature();
    CHECK(p.temperature() == doctest::Approx(1.0));
    p.log_temperature.data[0] = -100.0;
    p.clamp_temperature();
    CHECK(p.temperature() == doctest::Approx(0.01));
}
