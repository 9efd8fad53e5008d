#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irlab/association.hpp"
#include "irlab/collection.hpp"
#include "irlab/types.hpp"

namespace irlab::scales {

struct JudgementRecord {
  std::string worker;
  std::string topic;
  std::string doc;
  int value = 0;
  int position = 0;  // 1..8 inside the HIT
  int attempt = 1;
};

class JudgementTable {
 public:
  void add(const JudgementRecord& r);
  static JudgementTable from_csv(std::istream& in);  // header required

  const std::vector<JudgementRecord>& records() const { return records_; }
  int min_value() const { return min_value_; }
  int max_value() const { return max_value_; }
  int levels() const { return max_value_ - min_value_ + 1; }
  void declare_scale(int lo, int hi);

  std::vector<std::string> topics() const;
  // doc -> judgements, for one topic
  std::map<std::string, std::vector<const JudgementRecord*>> by_doc(const std::string& topic) const;
  // worker -> judgements, for one topic
  std::map<std::string, std::vector<const JudgementRecord*>> by_worker(
      const std::string& topic) const;

 private:
  std::vector<JudgementRecord> records_;
  std::map<std::string, std::map<std::string, std::map<std::string, std::size_t>>> index_;
  int min_value_ = 0;
  int max_value_ = 0;
  bool scale_seen_ = false;
};

// Thresholds mapping a fine source scale onto a coarser one. A value lands
// on the level equal to the number of cut points <= value; points are
// strictly increasing integers in (source_min, source_max].
struct CutSpec {
  int source_min = 0;
  int source_max = 1;
  std::vector<int> points;

  int target_levels() const { return static_cast<int>(points.size()) + 1; }
  int apply(double value) const;
  void validate() const;
  std::string to_string() const;
};

// C(source_levels - 1, target_levels - 1)
std::uint64_t count_cuts(int source_levels, int target_levels);

// Visit every valid cut in lexicographic order.
void for_each_cut(int source_min, int source_max, int target_levels,
                  const std::function<void(const CutSpec&)>& visit);

enum class AggregateFn { Mean, Median, Majority };

double aggregate(std::vector<double> values, AggregateFn fn);
AggregateFn default_aggregate_for_levels(int levels);

enum class TransformFamily {
  HitTransformAggregate,  // H_t+a^1
  HitAggregateTransform,  // H_a+t^1
  TopicWideAlpha,         // Tw_alpha^1
  HitDouble,              // H^2
  DocAggregateTransform,  // D_a+t^2
  DocTransformAggregate,  // D_t+a^2
};
TransformFamily parse_family(const std::string& name);
std::string family_name(TransformFamily f);
bool family_needs_target(TransformFamily f);

enum class UnjudgedPolicy { AssumeNonRelevant, Drop, Error };

struct TransformOptions {
  TransformFamily family = TransformFamily::DocAggregateTransform;
  int target_levels = 2;
  bool per_topic = true;
  assoc::AlphaMetric alpha_metric = assoc::AlphaMetric::Nominal;
  UnjudgedPolicy unjudged = UnjudgedPolicy::AssumeNonRelevant;
  // overrides; unset picks the scale-driven default
  std::optional<AggregateFn> source_aggregate;
  std::optional<AggregateFn> target_aggregate;
  // 0 = full enumeration; otherwise an error is raised when the cut space
  // exceeds the budget
  std::uint64_t max_cut_evaluations = 0;
  bool keep_trace = false;
};

struct AlphaTraceRow {
  std::string topic;  // "*" for the global scan
  CutSpec cut;
  double alpha = 0.0;
};

struct TopicCut {
  std::string topic;
  CutSpec cut;
  double alpha = 0.0;
  std::size_t tied_cuts = 1;          // cuts sharing the best alpha
  std::vector<int> tie_interval_hi;   // per point: highest tied value
};

struct CutSearchResult {
  std::vector<TopicCut> per_topic;
  CutSpec single_cut;        // argmax of mean alpha across topics
  double single_alpha = 0.0;
  std::vector<AlphaTraceRow> trace;
};

// Exhaustively score every cut for the chosen family and return the
// argmax-alpha cuts (lexicographically lowest on ties).
CutSearchResult select_best_cut(const TransformOptions& opts, const JudgementTable& source,
                                const Qrels* target_data);

// Document-centric transformed qrels under per-topic cuts (topics missing
// from the map fall back to `fallback`), aggregate-then-transform or
// transform-then-aggregate per `family`.
Qrels transform_qrels(const JudgementTable& source, const std::map<std::string, CutSpec>& cuts,
                      const CutSpec& fallback, TransformFamily family,
                      std::optional<AggregateFn> source_aggregate = std::nullopt);

// Kendall tau between system rankings under the transformed and the expert
// qrels, systems scored by the mean metric over usable topics.
double evaluate_transformation(const Qrels& transformed, const Qrels& expert, const RunSet& runs,
                               const io::MetricDescriptor& metric);

}  // namespace irlab::scales
