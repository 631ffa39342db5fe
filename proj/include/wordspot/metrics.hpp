#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wordspot/retrieval.hpp"
#include "wordspot/tensor.hpp"

namespace wordspot {

double acc_at_k(const std::vector<int>& ranks, int k);
double mrr(const std::vector<int>& ranks);

// Unit-cost edit distance over unicode scalar values.
int levenshtein(const std::string& a, const std::string& b);

// Normalized edit similarity: 1 - D / max(|a|, |b|); both-empty defined 1.
double nes(const std::string& predicted, const std::string& ground_truth);

struct GeometryStats {
    double r_intra = 0.0;
    double d_inter = 0.0;
    double rd_ratio = 0.0;
};

// Embedding-space characterization: mean intra-class radius over samples,
// mean inter-class centroid distance over unordered pairs (Euclidean,
// centroids not renormalized).
GeometryStats characterize(const Tensor& embeddings, const std::vector<int>& labels);

struct ProtocolMetrics {
    std::string protocol;
    int num_queries = 0;
    double acc1 = 0.0, acc3 = 0.0, acc5 = 0.0;
    double mrr = 0.0;
    double nes = 0.0;
};

ProtocolMetrics summarize(const std::string& protocol_name,
                          const std::vector<RetrievalResult>& results);

struct MetricsReport {
    std::vector<ProtocolMetrics> protocols;
    bool has_geometry = false;
    GeometryStats geometry;
    std::map<std::string, std::string> metadata;  // checkpoint id, seeds, split
};

// Structured report (JSON, sorted keys) plus a flat CSV table, both
// timestamp-free so identical runs serialize byte-identically.
std::string report_to_json(const MetricsReport& report);
std::string report_to_csv(const MetricsReport& report);
void write_report(const MetricsReport& report, const std::string& json_path,
                  const std::string& csv_path);

// Decodes UTF-8 into unicode scalar values (used by levenshtein; exposed
// for tests).
std::vector<uint32_t> utf8_decode(const std::string& text);

}  // namespace wordspot
