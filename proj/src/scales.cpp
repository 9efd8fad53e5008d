#include "irlab/scales.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

#include "irlab/effectiveness.hpp"

namespace irlab::scales {

void JudgementTable::add(const JudgementRecord& r) {
  auto& slot = index_[r.topic][r.doc][r.worker];
  if (slot != 0) throw DataError("duplicate judgement for (" + r.worker + ", " + r.topic + ", " +
                                 r.doc + ")");
  records_.push_back(r);
  slot = records_.size();
  if (!scale_seen_) {
    min_value_ = max_value_ = r.value;
    scale_seen_ = true;
  } else {
    min_value_ = std::min(min_value_, r.value);
    max_value_ = std::max(max_value_, r.value);
  }
}

void JudgementTable::declare_scale(int lo, int hi) {
  if (lo >= hi) throw ConfigError("declare_scale: empty scale");
  min_value_ = lo;
  max_value_ = hi;
  scale_seen_ = true;
}

JudgementTable JudgementTable::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("judgement csv: empty stream");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    out.push_back(cur);
    return out;
  };
  const auto header = split(line);
  const std::vector<std::string> expected = {"worker_id", "topic", "doc",
                                             "value",     "position", "attempt"};
  if (header != expected)
    throw ParseError("judgement csv: header must be worker_id,topic,doc,value,position,attempt");

  JudgementTable t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = split(line);
    if (cols.size() != 6)
      throw ParseError("judgement csv line " + std::to_string(lineno) + ": expected 6 columns");
    JudgementRecord r;
    r.worker = cols[0];
    r.topic = cols[1];
    r.doc = cols[2];
    try {
      r.value = std::stoi(cols[3]);
      r.position = std::stoi(cols[4]);
      r.attempt = std::stoi(cols[5]);
    } catch (...) {
      throw ParseError("judgement csv line " + std::to_string(lineno) + ": bad integer field");
    }
    t.add(r);
  }
  return t;
}

std::vector<std::string> JudgementTable::topics() const {
  std::vector<std::string> out;
  for (const auto& [t, _] : index_) out.push_back(t);
  return out;
}

std::map<std::string, std::vector<const JudgementRecord*>> JudgementTable::by_doc(
    const std::string& topic) const {
  std::map<std::string, std::vector<const JudgementRecord*>> out;
  auto it = index_.find(topic);
  if (it == index_.end()) return out;
  for (const auto& [doc, workers] : it->second)
    for (const auto& [worker, pos] : workers) out[doc].push_back(&records_[pos - 1]);
  return out;
}

std::map<std::string, std::vector<const JudgementRecord*>> JudgementTable::by_worker(
    const std::string& topic) const {
  std::map<std::string, std::vector<const JudgementRecord*>> out;
  auto it = index_.find(topic);
  if (it == index_.end()) return out;
  for (const auto& [doc, workers] : it->second)
    for (const auto& [worker, pos] : workers) out[worker].push_back(&records_[pos - 1]);
  return out;
}

int CutSpec::apply(double value) const {
  if (value < source_min || value > source_max)
    throw DataError("apply_cut: value " + std::to_string(value) + " outside the source scale");
  int level = 0;
  for (int p : points)
    if (static_cast<double>(p) <= value) ++level;
  return level;
}

void CutSpec::validate() const {
  if (source_min >= source_max) throw ConfigError("cut: degenerate source scale");
  if (points.empty()) throw ConfigError("cut: needs at least one point");
  int prev = source_min;
  for (int p : points) {
    if (p <= prev) throw ConfigError("cut: points must be strictly increasing above the minimum");
    prev = p;
  }
  if (points.back() > source_max) throw ConfigError("cut: point beyond the source maximum");
}

std::string CutSpec::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(points[i]);
  }
  return s + ")";
}

std::uint64_t count_cuts(int source_levels, int target_levels) {
  if (target_levels < 2 || source_levels < 2) throw ConfigError("count_cuts: scales need >= 2 levels");
  if (target_levels >= source_levels)
    throw ConfigError("count_cuts: target scale must be coarser than the source");
  const int n = source_levels - 1;
  const int k = target_levels - 1;
  std::uint64_t num = 1;
  for (int i = 1; i <= k; ++i) num = num * static_cast<std::uint64_t>(n - k + i) / i;
  return num;
}

void for_each_cut(int source_min, int source_max, int target_levels,
                  const std::function<void(const CutSpec&)>& visit) {
  const int k = target_levels - 1;
  CutSpec cut;
  cut.source_min = source_min;
  cut.source_max = source_max;
  cut.points.assign(k, 0);
  // choose k strictly increasing points from (source_min, source_max]
  std::function<void(int, int)> rec = [&](int idx, int from) {
    if (idx == k) {
      visit(cut);
      return;
    }
    for (int p = from; p <= source_max - (k - idx - 1); ++p) {
      cut.points[idx] = p;
      rec(idx + 1, p + 1);
    }
  };
  rec(0, source_min + 1);
}

double aggregate(std::vector<double> values, AggregateFn fn) {
  if (values.empty()) throw ConfigError("aggregate: empty value set");
  switch (fn) {
    case AggregateFn::Mean: {
      double s = 0.0;
      for (double v : values) s += v;
      return s / static_cast<double>(values.size());
    }
    case AggregateFn::Median: {
      std::sort(values.begin(), values.end());
      return values[(values.size() - 1) / 2];  // lower median
    }
    case AggregateFn::Majority: {
      std::sort(values.begin(), values.end());
      double best = values.front();
      std::size_t best_count = 0;
      std::size_t i = 0;
      while (i < values.size()) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        if (j - i > best_count) {  // strict keeps the lowest value on ties
          best_count = j - i;
          best = values[i];
        }
        i = j;
      }
      return best;
    }
  }
  throw ConfigError("aggregate: bad function");
}

AggregateFn default_aggregate_for_levels(int levels) {
  if (levels <= 2) return AggregateFn::Majority;
  if (levels <= 4) return AggregateFn::Median;
  return AggregateFn::Mean;
}

TransformFamily parse_family(const std::string& name) {
  if (name == "H_t+a1" || name == "h_t+a1") return TransformFamily::HitTransformAggregate;
  if (name == "H_a+t1" || name == "h_a+t1") return TransformFamily::HitAggregateTransform;
  if (name == "Tw_a1" || name == "tw_a1") return TransformFamily::TopicWideAlpha;
  if (name == "H2" || name == "h2") return TransformFamily::HitDouble;
  if (name == "D_a+t2" || name == "d_a+t2") return TransformFamily::DocAggregateTransform;
  if (name == "D_t+a2" || name == "d_t+a2") return TransformFamily::DocTransformAggregate;
  throw ConfigError("unknown transform family: " + name);
}

std::string family_name(TransformFamily f) {
  switch (f) {
    case TransformFamily::HitTransformAggregate: return "H_t+a1";
    case TransformFamily::HitAggregateTransform: return "H_a+t1";
    case TransformFamily::TopicWideAlpha: return "Tw_a1";
    case TransformFamily::HitDouble: return "H2";
    case TransformFamily::DocAggregateTransform: return "D_a+t2";
    case TransformFamily::DocTransformAggregate: return "D_t+a2";
  }
  return "?";
}

bool family_needs_target(TransformFamily f) {
  return f == TransformFamily::HitDouble || f == TransformFamily::DocAggregateTransform ||
         f == TransformFamily::DocTransformAggregate;
}

namespace {

// Krippendorff alpha for two paired value sequences (one unit per pair).
// Equivalent to assoc::krippendorff_alpha on a 2 x n matrix; kept local so
// the cut scan can run on compact pair lists.
double alpha_from_pairs(const std::vector<std::pair<double, double>>& pairs,
                        assoc::AlphaMetric metric) {
  if (pairs.empty()) throw DataError("alpha: no overlapping items");
  std::map<double, double> marginal;
  std::map<std::pair<double, double>, double> o;
  for (const auto& [a, b] : pairs) {
    o[{a, b}] += 1.0;
    o[{b, a}] += 1.0;
    marginal[a] += 1.0;
    marginal[b] += 1.0;
  }
  const double n = 2.0 * static_cast<double>(pairs.size());
  std::vector<double> values;
  for (const auto& [v, _] : marginal) values.push_back(v);
  auto delta2 = [&](double c, double k) -> double {
    switch (metric) {
      case assoc::AlphaMetric::Nominal: return c == k ? 0.0 : 1.0;
      case assoc::AlphaMetric::Interval: return (c - k) * (c - k);
      case assoc::AlphaMetric::Ordinal: {
        if (c == k) return 0.0;
        const double lo = std::min(c, k), hi = std::max(c, k);
        double span = 0.0;
        for (double v : values)
          if (v >= lo && v <= hi) span += marginal.at(v);
        span -= (marginal.at(lo) + marginal.at(hi)) / 2.0;
        return span * span;
      }
    }
    return 0.0;
  };
  double d_obs = 0.0;
  for (const auto& [ck, v] : o) d_obs += v * delta2(ck.first, ck.second);
  d_obs /= n;
  double d_exp = 0.0;
  for (double c : values)
    for (double k : values) d_exp += marginal.at(c) * marginal.at(k) * delta2(c, k);
  d_exp /= n * (n - 1.0);
  if (d_exp == 0.0) return 1.0;
  return 1.0 - d_obs / d_exp;
}

struct TopicData {
  std::string topic;
  // D families: one (key, target) pair per doc
  std::vector<std::pair<double, double>> doc_pairs;
  // H families: per worker, (own value or key, counterpart) pairs
  std::vector<std::vector<std::pair<double, double>>> worker_pairs;
  // Tw family: per doc, all raw values
  std::vector<std::vector<double>> doc_values;

  // D-family fast path: cnt_below[p - min][g] = docs with key < p whose
  // target grade is g, for integer thresholds p in [min, max + 1]
  std::vector<std::vector<long>> cnt_below;
  std::vector<double> target_values;  // distinct grades, ascending
  int threshold_min = 0;

  void build_prefix(int source_min, int source_max) {
    std::set<double> grades;
    for (const auto& [_, g] : doc_pairs) grades.insert(g);
    target_values.assign(grades.begin(), grades.end());
    threshold_min = source_min;
    const int span = source_max - source_min + 2;
    cnt_below.assign(span, std::vector<long>(target_values.size(), 0));
    for (const auto& [key, g] : doc_pairs) {
      const std::size_t gi =
          std::lower_bound(target_values.begin(), target_values.end(), g) - target_values.begin();
      // key counts as "below p" for every threshold p > key
      const int first = std::max(source_min, static_cast<int>(std::floor(key)) + 1);
      for (int p = first; p <= source_max + 1; ++p) ++cnt_below[p - source_min][gi];
    }
    // prefix over thresholds is already materialized column-wise above
  }
};

// alpha of a two-rater contingency table: joint[a][b] counts documents with
// transformed level a (indexable 0..L-1) and target value target_values[b]
double alpha_from_contingency(const std::vector<std::vector<long>>& joint,
                              const std::vector<double>& target_values,
                              assoc::AlphaMetric metric) {
  const std::size_t levels = joint.size();
  const std::size_t tn = target_values.size();
  // collect the distinct observed values across both raters
  std::map<double, double> marginal;
  long total = 0;
  for (std::size_t a = 0; a < levels; ++a)
    for (std::size_t b = 0; b < tn; ++b) {
      const long c = joint[a][b];
      if (!c) continue;
      total += c;
      marginal[static_cast<double>(a)] += c;
      marginal[target_values[b]] += c;
    }
  if (total == 0) throw DataError("alpha: no overlapping items");
  const double n = 2.0 * static_cast<double>(total);
  std::vector<double> values;
  values.reserve(marginal.size());
  for (const auto& [v, _] : marginal) values.push_back(v);
  auto delta2 = [&](double c, double k) -> double {
    switch (metric) {
      case assoc::AlphaMetric::Nominal: return c == k ? 0.0 : 1.0;
      case assoc::AlphaMetric::Interval: return (c - k) * (c - k);
      case assoc::AlphaMetric::Ordinal: {
        if (c == k) return 0.0;
        const double lo = std::min(c, k), hi = std::max(c, k);
        double span = 0.0;
        for (double v : values)
          if (v >= lo && v <= hi) span += marginal.at(v);
        span -= (marginal.at(lo) + marginal.at(hi)) / 2.0;
        return span * span;
      }
    }
    return 0.0;
  };
  double d_obs = 0.0;
  for (std::size_t a = 0; a < levels; ++a)
    for (std::size_t b = 0; b < tn; ++b)
      if (joint[a][b])
        d_obs += 2.0 * static_cast<double>(joint[a][b]) *
                 delta2(static_cast<double>(a), target_values[b]);
  d_obs /= n;
  double d_exp = 0.0;
  for (double c : values)
    for (double k : values) d_exp += marginal.at(c) * marginal.at(k) * delta2(c, k);
  d_exp /= n * (n - 1.0);
  if (d_exp == 0.0) return 1.0;
  return 1.0 - d_obs / d_exp;
}

}  // namespace

CutSearchResult select_best_cut(const TransformOptions& opts, const JudgementTable& source,
                                const Qrels* target_data) {
  if (opts.target_levels < 2) throw ConfigError("select_best_cut: target needs >= 2 levels");
  if (family_needs_target(opts.family) && !target_data)
    throw ConfigError("select_best_cut: family " + family_name(opts.family) +
                      " needs a target-scale dataset");
  const int source_levels = source.levels();
  if (opts.target_levels >= source_levels)
    throw ConfigError("select_best_cut: target scale must be coarser than the source");
  const std::uint64_t cut_count = count_cuts(source_levels, opts.target_levels);
  if (opts.max_cut_evaluations && cut_count > opts.max_cut_evaluations)
    throw ConfigError("select_best_cut: " + std::to_string(cut_count) +
                      " cuts exceed the evaluation budget");

  const AggregateFn src_agg = opts.source_aggregate.value_or(
      default_aggregate_for_levels(source_levels));
  // transform-then-aggregate reductions: median (and binary majority, which
  // coincides with it) commutes with the monotone cut map, so the per-doc
  // key is the lower median of the raw values; aggregate-then-transform
  // keys on the source-scale aggregate
  if (opts.target_aggregate && *opts.target_aggregate == AggregateFn::Mean &&
      (opts.family == TransformFamily::DocTransformAggregate ||
       opts.family == TransformFamily::HitTransformAggregate))
    throw ConfigError("select_best_cut: transform-then-aggregate supports median/majority only");
  const double target_min = 0.0;

  // precompute per-topic data
  std::vector<TopicData> topics;
  for (const auto& topic : source.topics()) {
    TopicData td;
    td.topic = topic;
    const auto docs = source.by_doc(topic);

    auto target_value = [&](const std::string& doc) -> std::optional<double> {
      if (!target_data) return std::nullopt;
      auto g = target_data->grade(topic, doc);
      if (g) return static_cast<double>(*g);
      switch (opts.unjudged) {
        case UnjudgedPolicy::AssumeNonRelevant: return target_min;
        case UnjudgedPolicy::Drop: return std::nullopt;
        case UnjudgedPolicy::Error:
          throw DataError("select_best_cut: document " + doc + " unjudged in the target data");
      }
      return std::nullopt;
    };

    switch (opts.family) {
      case TransformFamily::DocAggregateTransform:
      case TransformFamily::DocTransformAggregate: {
        const AggregateFn fn =
            opts.family == TransformFamily::DocAggregateTransform ? src_agg : AggregateFn::Median;
        for (const auto& [doc, recs] : docs) {
          auto tv = target_value(doc);
          if (!tv) continue;
          std::vector<double> vals;
          vals.reserve(recs.size());
          for (const auto* r : recs) vals.push_back(static_cast<double>(r->value));
          td.doc_pairs.emplace_back(aggregate(std::move(vals), fn), *tv);
        }
        td.build_prefix(source.min_value(), source.max_value());
        break;
      }
      case TransformFamily::HitDouble: {
        for (const auto& [worker, recs] : source.by_worker(topic)) {
          std::vector<std::pair<double, double>> pairs;
          for (const auto* r : recs) {
            auto tv = target_value(r->doc);
            if (tv) pairs.emplace_back(static_cast<double>(r->value), *tv);
          }
          if (!pairs.empty()) td.worker_pairs.push_back(std::move(pairs));
        }
        break;
      }
      case TransformFamily::HitTransformAggregate:
      case TransformFamily::HitAggregateTransform: {
        const bool transform_first = opts.family == TransformFamily::HitTransformAggregate;
        for (const auto& [worker, recs] : source.by_worker(topic)) {
          std::vector<std::pair<double, double>> pairs;
          for (const auto* r : recs) {
            // rest of the crowd on this doc, leave-one-out
            std::vector<double> rest;
            for (const auto* other : docs.at(r->doc))
              if (other->worker != worker) rest.push_back(static_cast<double>(other->value));
            if (rest.empty()) continue;
            const double key =
                aggregate(std::move(rest), transform_first ? AggregateFn::Median : src_agg);
            pairs.emplace_back(static_cast<double>(r->value), key);
          }
          if (!pairs.empty()) td.worker_pairs.push_back(std::move(pairs));
        }
        break;
      }
      case TransformFamily::TopicWideAlpha: {
        for (const auto& [doc, recs] : docs) {
          std::vector<double> vals;
          for (const auto* r : recs) vals.push_back(static_cast<double>(r->value));
          td.doc_values.push_back(std::move(vals));
        }
        break;
      }
    }
    topics.push_back(std::move(td));
  }
  if (topics.empty()) throw DataError("select_best_cut: no topics in the source table");

  // alpha of one topic under one cut
  auto score_topic = [&](const TopicData& td, const CutSpec& cut) -> std::optional<double> {
    switch (opts.family) {
      case TransformFamily::DocAggregateTransform:
      case TransformFamily::DocTransformAggregate: {
        if (td.doc_pairs.empty()) return std::nullopt;
        // contingency via the threshold prefix counts; boundaries are the
        // cut points with min and max+1 closing the ends
        const std::size_t levels = cut.points.size() + 1;
        const std::size_t tn = td.target_values.size();
        std::vector<std::vector<long>> joint(levels, std::vector<long>(tn, 0));
        for (std::size_t g = 0; g < tn; ++g) {
          long prev = 0;
          for (std::size_t l = 0; l < levels; ++l) {
            const int upper =
                l + 1 < levels ? cut.points[l] : source.max_value() + 1;
            const long below = td.cnt_below[upper - td.threshold_min][g];
            joint[l][g] = below - prev;
            prev = below;
          }
        }
        return alpha_from_contingency(joint, td.target_values, opts.alpha_metric);
      }
      case TransformFamily::HitDouble:
      case TransformFamily::HitTransformAggregate:
      case TransformFamily::HitAggregateTransform: {
        // H1 counterparts are on the source scale; H2 targets already are
        const bool transform_counterpart = opts.family != TransformFamily::HitDouble;
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& wp : td.worker_pairs) {
          std::vector<std::pair<double, double>> pairs;
          pairs.reserve(wp.size());
          for (const auto& [own, other] : wp)
            pairs.emplace_back(static_cast<double>(cut.apply(own)),
                               transform_counterpart ? static_cast<double>(cut.apply(other))
                                                     : other);
          sum += alpha_from_pairs(pairs, opts.alpha_metric);
          ++count;
        }
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
      }
      case TransformFamily::TopicWideAlpha: {
        if (td.doc_values.empty()) return std::nullopt;
        std::map<double, double> marginal;
        std::map<std::pair<double, double>, double> o;
        bool any = false;
        for (const auto& vals : td.doc_values) {
          if (vals.size() < 2) continue;
          any = true;
          std::vector<int> lv(vals.size());
          for (std::size_t i = 0; i < vals.size(); ++i) lv[i] = cut.apply(vals[i]);
          const double mu = static_cast<double>(vals.size());
          for (std::size_t a = 0; a < lv.size(); ++a)
            for (std::size_t b = 0; b < lv.size(); ++b) {
              if (a == b) continue;
              o[{static_cast<double>(lv[a]), static_cast<double>(lv[b])}] += 1.0 / (mu - 1.0);
            }
        }
        if (!any) return std::nullopt;
        double n = 0.0;
        for (const auto& [ck, v] : o) {
          marginal[ck.first] += v;
          n += v;
        }
        std::vector<double> values;
        for (const auto& [v, _] : marginal) values.push_back(v);
        auto delta2 = [&](double c, double k) -> double {
          switch (opts.alpha_metric) {
            case assoc::AlphaMetric::Nominal: return c == k ? 0.0 : 1.0;
            case assoc::AlphaMetric::Interval: return (c - k) * (c - k);
            case assoc::AlphaMetric::Ordinal: {
              if (c == k) return 0.0;
              const double lo = std::min(c, k), hi = std::max(c, k);
              double span = 0.0;
              for (double v : values)
                if (v >= lo && v <= hi) span += marginal.at(v);
              span -= (marginal.at(lo) + marginal.at(hi)) / 2.0;
              return span * span;
            }
          }
          return 0.0;
        };
        double d_obs = 0.0;
        for (const auto& [ck, v] : o) d_obs += v * delta2(ck.first, ck.second);
        d_obs /= n;
        double d_exp = 0.0;
        for (double c : values)
          for (double k : values) d_exp += marginal.at(c) * marginal.at(k) * delta2(c, k);
        d_exp /= n * (n - 1.0);
        if (d_exp == 0.0) return 1.0;
        return 1.0 - d_obs / d_exp;
      }
    }
    return std::nullopt;
  };

  CutSearchResult result;
  struct Best {
    bool valid = false;
    CutSpec cut;
    double alpha = 0.0;
    std::size_t tied = 0;
    std::vector<int> tie_hi;
  };
  std::vector<Best> best_per_topic(topics.size());
  Best best_global;
  double best_global_mean = 0.0;

  for_each_cut(source.min_value(), source.max_value(), opts.target_levels,
               [&](const CutSpec& cut) {
                 double mean_sum = 0.0;
                 std::size_t mean_count = 0;
                 for (std::size_t ti = 0; ti < topics.size(); ++ti) {
                   const auto a = score_topic(topics[ti], cut);
                   if (!a) continue;
                   mean_sum += *a;
                   ++mean_count;
                   if (opts.keep_trace) result.trace.push_back({topics[ti].topic, cut, *a});
                   Best& b = best_per_topic[ti];
                   if (!b.valid || *a > b.alpha) {
                     b.valid = true;
                     b.cut = cut;
                     b.alpha = *a;
                     b.tied = 1;
                     b.tie_hi = cut.points;
                   } else if (*a == b.alpha) {
                     ++b.tied;  // first-seen (lexicographically lowest) kept
                     for (std::size_t p = 0; p < b.tie_hi.size(); ++p)
                       b.tie_hi[p] = std::max(b.tie_hi[p], cut.points[p]);
                   }
                 }
                 if (mean_count > 0) {
                   const double mean = mean_sum / static_cast<double>(mean_count);
                   if (opts.keep_trace) result.trace.push_back({"*", cut, mean});
                   if (!best_global.valid || mean > best_global_mean) {
                     best_global.valid = true;
                     best_global.cut = cut;
                     best_global_mean = mean;
                   }
                 }
               });

  if (!best_global.valid)
    throw DataError("select_best_cut: no overlapping documents with the target data");
  for (std::size_t ti = 0; ti < topics.size(); ++ti) {
    const Best& b = best_per_topic[ti];
    if (!b.valid) continue;
    result.per_topic.push_back({topics[ti].topic, b.cut, b.alpha, b.tied, b.tie_hi});
  }
  result.single_cut = best_global.cut;
  result.single_alpha = best_global_mean;
  return result;
}

Qrels transform_qrels(const JudgementTable& source, const std::map<std::string, CutSpec>& cuts,
                      const CutSpec& fallback, TransformFamily family,
                      std::optional<AggregateFn> source_aggregate) {
  const AggregateFn src_agg =
      source_aggregate.value_or(default_aggregate_for_levels(source.levels()));
  const bool transform_first = family == TransformFamily::DocTransformAggregate ||
                               family == TransformFamily::HitTransformAggregate;
  Qrels out;
  for (const auto& topic : source.topics()) {
    auto it = cuts.find(topic);
    const CutSpec& cut = it != cuts.end() ? it->second : fallback;
    for (const auto& [doc, recs] : source.by_doc(topic)) {
      std::vector<double> vals;
      vals.reserve(recs.size());
      for (const auto* r : recs) vals.push_back(static_cast<double>(r->value));
      int level;
      if (transform_first) {
        std::vector<double> transformed;
        transformed.reserve(vals.size());
        for (double v : vals) transformed.push_back(static_cast<double>(cut.apply(v)));
        const AggregateFn fn = default_aggregate_for_levels(cut.target_levels());
        level = static_cast<int>(aggregate(std::move(transformed), fn));
      } else {
        level = cut.apply(aggregate(std::move(vals), src_agg));
      }
      out.set(topic, doc, level);
    }
  }
  int lo = 0, hi = 0;
  bool first = true;
  for (const auto& [t, docs] : out.entries())
    for (const auto& [d, g] : docs) {
      if (first) {
        lo = hi = g;
        first = false;
      } else {
        lo = std::min(lo, g);
        hi = std::max(hi, g);
      }
    }
  out.declare_scale(lo, hi);
  return out;
}

double evaluate_transformation(const Qrels& transformed, const Qrels& expert, const RunSet& runs,
                               const io::MetricDescriptor& metric) {
  auto system_means = [&](const Qrels& q) {
    std::vector<std::string> excluded;
    const ApMatrix m = io::build_ap_matrix(runs, q, metric, &excluded);
    std::vector<double> means(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m.cols(); ++j) s += m.at(i, j);
      means[i] = s / static_cast<double>(m.cols());
    }
    return means;
  };
  return assoc::kendall_tau_b(system_means(transformed), system_means(expert));
}

}  // namespace irlab::scales
