#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "irlab/types.hpp"

namespace irlab::io {

// Parse a TREC run stream: "topic Q0 docid rank score tag".
// Lists are re-sorted by descending score (lexicographic doc tie-break) and
// truncated to depth; the rank column is validated but not trusted.
RunSet parse_runs(std::istream& in, std::size_t depth = 1000);
RunSet parse_runs_file(const std::string& path, std::size_t depth = 1000);

// Parse a TREC qrels stream: "topic 0 docid grade".
Qrels parse_qrels(std::istream& in);
Qrels parse_qrels_file(const std::string& path);

// Serialize back to the TREC formats (round-trip identity with the parsers).
void write_runs(std::ostream& out, const RunSet& runs);
void write_qrels(std::ostream& out, const Qrels& qrels);

// Map grades in relevant_levels to 1, everything else to 0.
Qrels binarize(const Qrels& q, const std::set<int>& relevant_levels);

// Union of top-pool_depth documents per topic over all systems.
struct Pool {
  // per topic: distinct docs, plus duplicate counts for the multiset variant
  std::map<std::string, std::map<std::string, int>> docs;
};
Pool build_pool(const RunSet& runs, std::size_t pool_depth);

enum class MetricKind { AP, NDCG };
enum class GainKind { Linear, Exponential };

struct MetricDescriptor {
  MetricKind kind = MetricKind::AP;
  std::size_t cutoff = 1000;
  GainKind gain = GainKind::Linear;  // NDCG only
};

MetricDescriptor parse_metric(const std::string& text);  // "AP@1000", "NDCG@20"

// Score every (system, topic). Topics with no relevant document (no positive
// gain for NDCG) are dropped with a warning collected in `excluded`.
ApMatrix build_ap_matrix(const RunSet& runs, const Qrels& qrels, const MetricDescriptor& metric,
                         std::vector<std::string>* excluded_topics = nullptr);

}  // namespace irlab::io
