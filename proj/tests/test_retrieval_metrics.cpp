#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "testutil.hpp"
#include "wordspot/metrics.hpp"
#include "wordspot/retrieval.hpp"

using namespace wordspot;

namespace {

Gallery toy_gallery(int num_classes, const std::vector<std::string>& languages, int dim) {
    // Orthogonal axis embeddings so ranks are easy to reason about.
    Gallery g;
    g.languages_in_scope = languages;
    int axis = 0;
    for (int y = 0; y < num_classes; ++y) {
        for (const auto& lang : languages) {
            GalleryEntry e;
            e.semantic_id = y;
            e.language = lang;
            e.text = "w" + std::to_string(y) + lang;
            e.embedding = Tensor::zeros({dim});
            e.embedding.at(axis++ % dim) = 1.0;
            g.entries.push_back(std::move(e));
        }
    }
    return g;
}

}  // namespace

TEST_CASE("retrieve: self retrieval and rank validity") {
    Gallery g = toy_gallery(4, {"en"}, 8);
    const RetrievalResult r = retrieve(g.entries[2].embedding, g, 3, 2, std::string("en"));
    CHECK(r.rank_of_ground_truth == 1);
    CHECK(r.top1_text == g.entries[2].text);
    CHECK(r.ranking.size() == 3);

    // rank bounds for a random query
    Rng rng(3);
    Tensor q = testutil::random_unit_rows(1, 8, rng);
    const RetrievalResult r2 =
        retrieve(Tensor::vector(q.data), g, 4, 1, std::string("en"));
    CHECK(r2.rank_of_ground_truth >= 1);
    CHECK(r2.rank_of_ground_truth <= 4);
}

TEST_CASE("retrieve: deterministic tie break by (semantic_id, language)") {
    Gallery g;
    g.languages_in_scope = {"en", "zh"};
    for (int y : {1, 0}) {
        for (const std::string lang : {"zh", "en"}) {
            GalleryEntry e;
            e.semantic_id = y;
            e.language = lang;
            e.text = std::to_string(y) + lang;
            e.embedding = Tensor::vector({1.0, 0.0});
            g.entries.push_back(e);
        }
    }
    Tensor q = Tensor::vector({1.0, 0.0});  // every entry ties
    const RetrievalResult r = retrieve(q, g, 4, 1, std::string("zh"));
    CHECK(g.entries[static_cast<std::size_t>(r.ranking[0])].semantic_id == 0);
    CHECK(g.entries[static_cast<std::size_t>(r.ranking[0])].language == "en");
    CHECK(g.entries[static_cast<std::size_t>(r.ranking[1])].language == "zh");
    CHECK(g.entries[static_cast<std::size_t>(r.ranking[2])].semantic_id == 1);
}

TEST_CASE("retrieve: ranking is scale invariant") {
    Gallery g = toy_gallery(5, {"en"}, 8);
    Rng rng(7);
    Tensor q = testutil::random_unit_rows(1, 8, rng);
    const RetrievalResult a = retrieve(Tensor::vector(q.data), g, 5, 3, std::string("en"));
    Tensor scaled = Tensor::vector(q.data);
    for (double& x : scaled.data) x *= 37.5;
    const RetrievalResult b = retrieve(scaled, g, 5, 3, std::string("en"));
    CHECK(a.ranking == b.ranking);
    CHECK(a.rank_of_ground_truth == b.rank_of_ground_truth);
}

TEST_CASE("retrieve: random query has uniform expected rank") {
    Gallery g = toy_gallery(20, {"en"}, 20);
    Rng rng(13);
    double rank_sum = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const Tensor q = testutil::random_unit_rows(1, 20, rng);
        rank_sum += retrieve(Tensor::vector(q.data), g, 1, t % 20, std::string("en"))
                        .rank_of_ground_truth;
    }
    CHECK(rank_sum / trials == doctest::Approx(10.5).epsilon(0.1));
}

TEST_CASE("retrieve: errors") {
    Gallery empty;
    CHECK_THROWS_AS(retrieve(Tensor::vector({1.0}), empty, 1, 0, std::nullopt), Error);
    Gallery g = toy_gallery(3, {"en"}, 8);
    CHECK_THROWS_AS(retrieve(g.entries[0].embedding, g, 99, 0, std::string("en")), Error);
    // ground truth language absent
    CHECK_THROWS_AS(retrieve(g.entries[0].embedding, g, 1, 0, std::string("zh")), Error);
}

TEST_CASE("protocols over a trained-free model") {
    testutil::TempDir dir("retr_ds");
    Lexicon lex = Lexicon::build(4, {"en", "zh", "es"}, 11);
    GenerateConfig gen_cfg;
    gen_cfg.train_per_class_per_lang = 2;
    gen_cfg.finetune_per_class_per_lang = 2;
    gen_cfg.id_eval_per_class_per_lang = 2;
    gen_cfg.ood_eval_per_class_per_lang = 2;
    gen_cfg.seed = 21;
    generate_dataset(lex, gen_cfg, dir.str());
    Dataset ds = read_dataset(manifest_path_for(dir.str()));

    ModelConfig mc;
    mc.hidden_dim = 8;
    mc.anchor.embed_dim = 8;
    mc.anchor.base_dim = 16;
    const ModelParams params = init_params(3, mc);

    SUBCASE("gallery cardinalities") {
        CHECK(build_gallery(lex, {"en"}, params).entries.size() == 4);
        CHECK(build_gallery(lex, {"en", "zh", "es"}, params).entries.size() == 12);
        const Gallery g1 = build_gallery(lex, {"en"}, params);
        const Gallery g2 = build_gallery(lex, {"en"}, params);
        CHECK(g1.entries[0].embedding.data == g2.entries[0].embedding.data);
    }

    SUBCASE("within-language result count equals query count") {
        const auto results = eval_protocol(ds, Split::ood_eval, Protocol::within("zh"), params);
        CHECK(results.size() == 8);  // 4 classes x 2 ood per cell
    }

    SUBCASE("cross protocol isolates the target language") {
        const auto results = eval_protocol(ds, Split::ood_eval, Protocol::cross("en", "zh"), params);
        CHECK(results.size() == 8);
        for (const auto& r : results) {
            // every ground-truth text is a zh word: all zh characters
            const std::string zh_chars = Lexicon::alphabet("zh");
            for (char c : r.ground_truth_text) CHECK(zh_chars.find(c) != std::string::npos);
        }
    }

    SUBCASE("unknown protocol language is rejected") {
        CHECK_THROWS_AS(eval_protocol(ds, Split::ood_eval, Protocol::within("fr"), params), Error);
        CHECK_THROWS_AS(eval_protocol(ds, Split::ood_eval, Protocol::cross("en", "fr"), params),
                        Error);
    }

    SUBCASE("random ranker hovers at chance") {
        const auto results = eval_protocol_random(ds, Split::ood_eval, Protocol::within("en"),
                                                  lex, lex.languages(), 5);
        CHECK(results.size() == 8);
        for (const auto& r : results) {
            CHECK(r.rank_of_ground_truth >= 1);
            CHECK(r.rank_of_ground_truth <= 4);
        }
    }
}

TEST_CASE("perfectly clustered embeddings retrieve at Acc@1 = 1 under every protocol") {
    // Hand-built gallery + queries where every same-class embedding is
    // identical across modality and language.
    const int classes = 3;
    Gallery g;
    g.languages_in_scope = {"en", "zh"};
    for (int y = 0; y < classes; ++y) {
        for (const std::string lang : {"en", "zh"}) {
            GalleryEntry e;
            e.semantic_id = y;
            e.language = lang;
            e.text = "w" + std::to_string(y) + lang;
            e.embedding = Tensor::zeros({4});
            e.embedding.at(y) = 1.0;
            g.entries.push_back(e);
        }
    }
    for (int y = 0; y < classes; ++y) {
        Tensor q = Tensor::zeros({4});
        q.at(y) = 1.0;
        CHECK(retrieve(q, g, 1, y, std::string("zh")).rank_of_ground_truth <= 2);
        CHECK(retrieve(q, g, 1, y, std::nullopt).rank_of_ground_truth == 1);
    }
}

TEST_CASE("acc_at_k and mrr examples") {
    CHECK(acc_at_k({1, 1, 1}, 1) == doctest::Approx(1.0));
    CHECK(acc_at_k({1, 3, 7}, 3) == doctest::Approx(2.0 / 3.0));
    CHECK(acc_at_k({2}, 1) == doctest::Approx(0.0));
    CHECK_THROWS_AS(acc_at_k({}, 1), Error);

    CHECK(mrr({1, 1}) == doctest::Approx(1.0));
    CHECK(mrr({1, 2, 4}) == doctest::Approx(0.583333).epsilon(1e-6));
    CHECK(mrr({1000000}) == doctest::Approx(1e-6).epsilon(1e-9));

    // acc@k monotone in k; mrr >= acc@1
    Rng rng(31);
    std::vector<int> ranks;
    for (int i = 0; i < 50; ++i) ranks.push_back(1 + static_cast<int>(rng.below(20)));
    double prev = 0.0;
    for (int k = 1; k <= 20; ++k) {
        const double a = acc_at_k(ranks, k);
        CHECK(a >= prev);
        prev = a;
    }
    CHECK(mrr(ranks) >= acc_at_k(ranks, 1));
}

TEST_CASE("levenshtein examples and oracle") {
    CHECK(levenshtein("abc", "abc") == 0);
    CHECK(levenshtein("", "abc") == 3);
    CHECK(levenshtein("Hom", "from") == 2);

    Rng rng(37);
    const std::string alphabet = "abcd";
    auto random_word = [&]() {
        std::string w;
        const int len = static_cast<int>(rng.below(7));
        for (int i = 0; i < len; ++i) w.push_back(alphabet[rng.below(alphabet.size())]);
        return w;
    };
    for (int trial = 0; trial < 500; ++trial) {
        const std::string a = random_word(), b = random_word();
        CHECK(levenshtein(a, b) == testutil::levenshtein_bruteforce(a, b));
    }
}

TEST_CASE("levenshtein is a metric") {
    Rng rng(41);
    const std::string alphabet = "xyz";
    auto random_word = [&]() {
        std::string w;
        const int len = static_cast<int>(rng.below(6));
        for (int i = 0; i < len; ++i) w.push_back(alphabet[rng.below(alphabet.size())]);
        return w;
    };
    for (int trial = 0; trial < 300; ++trial) {
        const std::string a = random_word(), b = random_word(), c = random_word();
        CHECK(levenshtein(a, b) == levenshtein(b, a));
        CHECK((levenshtein(a, b) == 0) == (a == b));
        CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
    }
}

TEST_CASE("levenshtein operates on unicode scalar values") {
    // 3-codepoint CJK strings differing in one position
    CHECK(levenshtein("\xe4\xbd\xa0\xe5\xa5\xbd\xe5\x90\x97",
                      "\xe4\xbd\xa0\xe5\xa5\xbd\xe5\x95\x8a") == 1);
}

TEST_CASE("nes examples and range") {
    CHECK(nes("same", "same") == doctest::Approx(1.0));
    CHECK(nes("Hom", "from") == doctest::Approx(0.5));
    CHECK(nes("", "") == doctest::Approx(1.0));

    Rng rng(43);
    const std::string alphabet = "pqrs";
    auto random_word = [&]() {
        std::string w;
        const int len = static_cast<int>(rng.below(8));
        for (int i = 0; i < len; ++i) w.push_back(alphabet[rng.below(alphabet.size())]);
        return w;
    };
    for (int trial = 0; trial < 300; ++trial) {
        const double v = nes(random_word(), random_word());
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("characterize examples") {
    // collapsed classes
    Tensor collapsed = Tensor::matrix(4, 2, {1, 0, 1, 0, 0, 1, 0, 1});
    const GeometryStats a = characterize(collapsed, {0, 0, 1, 1});
    CHECK(a.r_intra == doctest::Approx(0.0));
    CHECK(a.d_inter == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(a.rd_ratio == doctest::Approx(0.0));

    // centroid geometry by hand
    Tensor spread = Tensor::matrix(4, 2, {1, 0, 0, 1, -1, 0, 0, -1});
    const GeometryStats b = characterize(spread, {0, 0, 1, 1});
    CHECK(b.r_intra == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(b.d_inter == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(b.rd_ratio == doctest::Approx(0.5).epsilon(1e-6));

    // permutation invariance
    Tensor permuted = Tensor::matrix(4, 2, {0, -1, -1, 0, 0, 1, 1, 0});
    const GeometryStats c = characterize(permuted, {1, 1, 0, 0});
    CHECK(c.rd_ratio == doctest::Approx(b.rd_ratio).epsilon(1e-12));

    CHECK_THROWS_AS(characterize(collapsed, {0, 0, 0, 0}), Error);
}

TEST_CASE("characterize is invariant under global rotation") {
    Rng rng(47);
    const int n = 30, d = 2;
    Tensor emb = testutil::random_unit_rows(n, d, rng);
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) labels.push_back(i % 5);
    const GeometryStats before = characterize(emb, labels);

    const double theta = 0.83;
    Tensor rotated = Tensor::zeros({n, d});
    for (int i = 0; i < n; ++i) {
        rotated.at(i, 0) = std::cos(theta) * emb.at(i, 0) - std::sin(theta) * emb.at(i, 1);
        rotated.at(i, 1) = std::sin(theta) * emb.at(i, 0) + std::cos(theta) * emb.at(i, 1);
    }
    const GeometryStats after = characterize(rotated, labels);
    CHECK(after.rd_ratio == doctest::Approx(before.rd_ratio).epsilon(1e-9));
    CHECK(after.r_intra == doctest::Approx(before.r_intra).epsilon(1e-9));
    CHECK(after.d_inter == doctest::Approx(before.d_inter).epsilon(1e-9));
}

TEST_CASE("summarize and report serialization") {
    std::vector<RetrievalResult> results(4);
    for (int i = 0; i < 4; ++i) {
        results[static_cast<std::size_t>(i)].rank_of_ground_truth = i + 1;
        results[static_cast<std::size_t>(i)].top1_text = "aaa";
        results[static_cast<std::size_t>(i)].ground_truth_text = i == 0 ? "aaa" : "bbb";
    }
    const ProtocolMetrics m = summarize("within(en)", results);
    CHECK(m.acc1 == doctest::Approx(0.25));
    CHECK(m.acc3 == doctest::Approx(0.75));
    CHECK(m.mrr == doctest::Approx((1.0 + 0.5 + 1.0 / 3 + 0.25) / 4));
    CHECK(m.acc1 <= m.acc3);
    CHECK(m.acc3 <= m.acc5);

    MetricsReport report;
    report.protocols.push_back(m);
    report.metadata["split"] = "ood_eval";
    const std::string js = report_to_json(report);
    CHECK(js.find("within(en)") != std::string::npos);
    const std::string csv = report_to_csv(report);
    CHECK(csv.find("0.250000") != std::string::npos);
}
