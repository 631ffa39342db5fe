#include "wordspot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

using nlohmann::json;

namespace wordspot {

double acc_at_k(const std::vector<int>& ranks, int k) {
    if (ranks.empty()) raise(ErrorCode::invalid_argument, "acc_at_k: empty rank list");
    if (k < 1) raise(ErrorCode::invalid_argument, "acc_at_k: K must be >= 1");
    std::size_t hits = 0;
    for (int r : ranks) {
        if (r < 1) raise(ErrorCode::invalid_argument, "acc_at_k: ranks must be positive");
        if (r <= k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double mrr(const std::vector<int>& ranks) {
    if (ranks.empty()) raise(ErrorCode::invalid_argument, "mrr: empty rank list");
    double acc = 0.0;
    for (int r : ranks) {
        if (r < 1) raise(ErrorCode::invalid_argument, "mrr: ranks must be positive");
        acc += 1.0 / static_cast<double>(r);
    }
    return acc / static_cast<double>(ranks.size());
}

std::vector<uint32_t> utf8_decode(const std::string& text) {
    std::vector<uint32_t> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        uint32_t cp = 0;
        int extra = 0;
        if (c < 0x80) {
            cp = c;
        } else if ((c >> 5) == 0x6) {
            cp = c & 0x1f;
            extra = 1;
        } else if ((c >> 4) == 0xe) {
            cp = c & 0x0f;
            extra = 2;
        } else if ((c >> 3) == 0x1e) {
            cp = c & 0x07;
            extra = 3;
        } else {
            raise(ErrorCode::format, "utf8_decode: invalid leading byte");
        }
        if (extra > 0 && i + static_cast<std::size_t>(extra) >= text.size()) {
            raise(ErrorCode::format, "utf8_decode: truncated sequence");
        }
        for (int k = 1; k <= extra; ++k) {
            const unsigned char cc = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
            if ((cc >> 6) != 0x2) raise(ErrorCode::format, "utf8_decode: invalid continuation byte");
            cp = (cp << 6) | (cc & 0x3f);
        }
        out.push_back(cp);
        i += static_cast<std::size_t>(1 + extra);
    }
    return out;
}

int levenshtein(const std::string& a, const std::string& b) {
    const std::vector<uint32_t> s = utf8_decode(a);
    const std::vector<uint32_t> t = utf8_decode(b);
    const std::size_t n = s.size(), m = t.size();
    if (n == 0) return static_cast<int>(m);
    if (m == 0) return static_cast<int>(n);
    // Two-row DP.
    std::vector<int> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const int sub = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double nes(const std::string& predicted, const std::string& ground_truth) {
    const std::size_t lp = utf8_decode(predicted).size();
    const std::size_t lg = utf8_decode(ground_truth).size();
    const std::size_t longest = std::max(lp, lg);
    if (longest == 0) return 1.0;  // both empty: identical strings score 1
    return 1.0 - static_cast<double>(levenshtein(predicted, ground_truth)) /
                     static_cast<double>(longest);
}

GeometryStats characterize(const Tensor& embeddings, const std::vector<int>& labels) {
    if (embeddings.ndim() != 2) raise(ErrorCode::dimension, "characterize: expected [N x D]");
    const int n = embeddings.rows(), d = embeddings.cols();
    if (static_cast<int>(labels.size()) != n) {
        raise(ErrorCode::invalid_argument, "characterize: one label per row required");
    }

    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < n; ++i) by_class[labels[static_cast<std::size_t>(i)]].push_back(i);
    if (by_class.size() < 2) {
        raise(ErrorCode::invalid_argument,
              "characterize: need >= 2 classes (D_inter undefined otherwise)");
    }

    std::map<int, std::vector<double>> centroids;
    for (const auto& [label, rows] : by_class) {
        std::vector<double> c(static_cast<std::size_t>(d), 0.0);
        for (int i : rows)
            for (int j = 0; j < d; ++j) c[static_cast<std::size_t>(j)] += embeddings.at(i, j);
        for (double& x : c) x /= static_cast<double>(rows.size());
        centroids[label] = std::move(c);
    }

    GeometryStats stats;
    for (const auto& [label, rows] : by_class) {
        const auto& c = centroids[label];
        for (int i : rows) {
            double sq = 0.0;
            for (int j = 0; j < d; ++j) {
                const double diff = embeddings.at(i, j) - c[static_cast<std::size_t>(j)];
                sq += diff * diff;
            }
            stats.r_intra += std::sqrt(sq);
        }
    }
    stats.r_intra /= static_cast<double>(n);

    double pair_count = 0.0;
    for (auto it1 = centroids.begin(); it1 != centroids.end(); ++it1) {
        for (auto it2 = std::next(it1); it2 != centroids.end(); ++it2) {
            double sq = 0.0;
            for (int j = 0; j < d; ++j) {
                const double diff = it1->second[static_cast<std::size_t>(j)] -
                                    it2->second[static_cast<std::size_t>(j)];
                sq += diff * diff;
            }
            stats.d_inter += std::sqrt(sq);
            pair_count += 1.0;
        }
    }
    stats.d_inter /= pair_count;
    if (stats.d_inter < 1e-12) {
        raise(ErrorCode::degenerate, "characterize: inter-class distance collapsed to zero");
    }
    stats.rd_ratio = stats.r_intra / stats.d_inter;
    return stats;
}

ProtocolMetrics summarize(const std::string& protocol_name,
                          const std::vector<RetrievalResult>& results) {
    if (results.empty()) raise(ErrorCode::invalid_argument, "summarize: no results");
    ProtocolMetrics m;
    m.protocol = protocol_name;
    m.num_queries = static_cast<int>(results.size());
    std::vector<int> ranks;
    ranks.reserve(results.size());
    double nes_acc = 0.0;
    for (const RetrievalResult& r : results) {
        ranks.push_back(r.rank_of_ground_truth);
        nes_acc += nes(r.top1_text, r.ground_truth_text);
    }
    m.acc1 = acc_at_k(ranks, 1);
    m.acc3 = acc_at_k(ranks, 3);
    m.acc5 = acc_at_k(ranks, 5);
    m.mrr = mrr(ranks);
    m.nes = nes_acc / static_cast<double>(results.size());
    return m;
}

namespace {

json protocol_to_json(const ProtocolMetrics& p) {
    return json{{"protocol", p.protocol}, {"num_queries", p.num_queries}, {"acc1", p.acc1},
                {"acc3", p.acc3},         {"acc5", p.acc5},               {"mrr", p.mrr},
                {"nes", p.nes}};
}

std::string fmt6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

}  // namespace

std::string report_to_json(const MetricsReport& report) {
    json j;
    j["metadata"] = report.metadata;
    j["protocols"] = json::array();
    for (const ProtocolMetrics& p : report.protocols) j["protocols"].push_back(protocol_to_json(p));
    if (report.has_geometry) {
        j["geometry"] = json{{"r_intra", report.geometry.r_intra},
                             {"d_inter", report.geometry.d_inter},
                             {"rd_ratio", report.geometry.rd_ratio}};
    }
    return j.dump(2) + "\n";
}

std::string report_to_csv(const MetricsReport& report) {
    std::string out = "protocol,num_queries,acc1,acc3,acc5,mrr,nes\n";
    for (const ProtocolMetrics& p : report.protocols) {
        out += p.protocol + "," + std::to_string(p.num_queries) + "," + fmt6(p.acc1) + "," +
               fmt6(p.acc3) + "," + fmt6(p.acc5) + "," + fmt6(p.mrr) + "," + fmt6(p.nes) + "\n";
    }
    return out;
}

void write_report(const MetricsReport& report, const std::string& json_path,
                  const std::string& csv_path) {
    std::ofstream js(json_path, std::ios::binary);
    if (!js) raise(ErrorCode::io, "cannot open '" + json_path + "' for writing");
    js << report_to_json(report);
    std::ofstream cs(csv_path, std::ios::binary);
    if (!cs) raise(ErrorCode::io, "cannot open '" + csv_path + "' for writing");
    cs << report_to_csv(report);
}

}  // namespace wordspot
