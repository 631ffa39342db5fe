// Exercises the engine exclusively through the C surface in wordspot.h.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "testutil.hpp"
#include "wordspot.h"

namespace fs = std::filesystem;

namespace {

ws_config* small_config() {
    ws_config* cfg = nullptr;
    REQUIRE(ws_config_defaults(&cfg) == WS_OK);
    REQUIRE(ws_config_set(cfg, "lexicon.num_classes", "4") == WS_OK);
    REQUIRE(ws_config_set(cfg, "dataset.train_per_class_per_lang", "4") == WS_OK);
    REQUIRE(ws_config_set(cfg, "dataset.finetune_per_class_per_lang", "2") == WS_OK);
    REQUIRE(ws_config_set(cfg, "dataset.id_eval_per_class_per_lang", "1") == WS_OK);
    REQUIRE(ws_config_set(cfg, "dataset.ood_eval_per_class_per_lang", "2") == WS_OK);
    REQUIRE(ws_config_set(cfg, "model.hidden_dim", "16") == WS_OK);
    REQUIRE(ws_config_set(cfg, "model.embed_dim", "8") == WS_OK);
    REQUIRE(ws_config_set(cfg, "model.base_dim", "16") == WS_OK);
    REQUIRE(ws_config_set(cfg, "stages.pretrain.epochs", "3") == WS_OK);
    REQUIRE(ws_config_set(cfg, "stages.finetune.epochs", "2") == WS_OK);
    REQUIRE(ws_config_set(cfg, "quant.calibration_samples", "16") == WS_OK);
    return cfg;
}

}  // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(ws_version()).find('.') != std::string::npos);
    CHECK(std::string(ws_status_name(WS_OK)) == "ok");
    CHECK(std::string(ws_status_name(WS_ERR_IO)) == "io");
    CHECK(std::string(ws_status_name(WS_ERR_DEGENERATE)) == "degenerate");
}

TEST_CASE("config handle: defaults, dump, overrides, validation") {
    ws_config* cfg = nullptr;
    REQUIRE(ws_config_defaults(&cfg) == WS_OK);

    char* text = nullptr;
    REQUIRE(ws_config_dump(cfg, &text) == WS_OK);
    CHECK(std::string(text).find("\"lambda\": 0.5") != std::string::npos);
    ws_string_free(text);

    CHECK(ws_config_set(cfg, "loss.lambda", "0.25") == WS_OK);
    REQUIRE(ws_config_dump(cfg, &text) == WS_OK);
    CHECK(std::string(text).find("\"lambda\": 0.25") != std::string::npos);
    ws_string_free(text);

    // invalid override leaves the handle untouched
    CHECK(ws_config_set(cfg, "loss.lambda", "-3") == WS_ERR_CONFIG);
    CHECK(std::string(ws_last_error()).find("lambda") != std::string::npos);
    CHECK(ws_config_set(cfg, "no.such.key", "1") == WS_ERR_CONFIG);
    REQUIRE(ws_config_dump(cfg, &text) == WS_OK);
    CHECK(std::string(text).find("\"lambda\": 0.25") != std::string::npos);
    ws_string_free(text);

    ws_config_free(cfg);
}

TEST_CASE("error paths set ws_last_error") {
    ws_config* cfg = nullptr;
    CHECK(ws_config_load("/definitely/not/here.json", &cfg) == WS_ERR_IO);
    CHECK(std::strlen(ws_last_error()) > 0);

    ws_model* model = nullptr;
    CHECK(ws_model_load("/definitely/not/here.ckpt", &model) == WS_ERR_IO);

    CHECK(ws_train(nullptr, "x", "y") == WS_ERR_INVALID_ARGUMENT);
    CHECK(ws_generate_dataset(nullptr, nullptr) == WS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("full pipeline via the C API") {
    testutil::TempDir root("capi");
    const std::string data_dir = root.str() + "/data";
    const std::string run_dir = root.str() + "/run";

    ws_config* cfg = small_config();

    REQUIRE(ws_generate_dataset(cfg, data_dir.c_str()) == WS_OK);
    CHECK(ws_generate_dataset(cfg, data_dir.c_str()) == WS_ERR_STATE);  // no overwrite

    REQUIRE(ws_train(cfg, data_dir.c_str(), run_dir.c_str()) == WS_OK);
    const std::string ckpt = run_dir + "/stage2.ckpt";
    CHECK(fs::exists(ckpt));

    CHECK(ws_evaluate(cfg, ckpt.c_str(), data_dir.c_str(), "ood_eval",
                      (root.str() + "/eval").c_str()) == WS_OK);
    CHECK(fs::exists(root.str() + "/eval/metrics_report.json"));

    CHECK(ws_cross_evaluate(cfg, ckpt.c_str(), data_dir.c_str(), "ood_eval",
                            (root.str() + "/cross").c_str()) == WS_OK);
    CHECK(ws_characterize(cfg, ckpt.c_str(), data_dir.c_str(), "ood_eval",
                          (root.str() + "/geo").c_str()) == WS_OK);
    CHECK(ws_quantize(cfg, ckpt.c_str(), data_dir.c_str(), (root.str() + "/quant").c_str()) ==
          WS_OK);

    // unknown split comes back as a format error, with a message
    CHECK(ws_evaluate(cfg, ckpt.c_str(), data_dir.c_str(), "nope",
                      (root.str() + "/bad").c_str()) == WS_ERR_FORMAT);

    // model handle surface
    ws_model* model = nullptr;
    REQUIRE(ws_model_load(ckpt.c_str(), &model) == WS_OK);
    CHECK(ws_model_embed_dim(model) == 8);

    std::vector<double> z(8, 0.0);
    REQUIRE(ws_model_encode_text(model, 0, "en", z.data()) == WS_OK);
    double norm = 0.0;
    for (double x : z) norm += x * x;
    CHECK(std::fabs(std::sqrt(norm) - 1.0) < 1e-9);
    CHECK(ws_model_encode_text(model, 0, "fr", z.data()) == WS_ERR_INVALID_ARGUMENT);

    std::vector<double> pixels(24 * 72, 0.5);
    std::vector<double> v(8, 0.0);
    REQUIRE(ws_model_encode_image(model, pixels.data(), 24, 72, v.data()) == WS_OK);
    CHECK(ws_model_encode_image(model, pixels.data(), 10, 10, v.data()) == WS_ERR_DIMENSION);

    ws_model_free(model);
    ws_config_free(cfg);
}
