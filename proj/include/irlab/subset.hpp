#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irlab/association.hpp"
#include "irlab/rng.hpp"
#include "irlab/types.hpp"

namespace irlab::subset {

// Bit-vector over topics with a cached popcount.
class TopicMask {
 public:
  TopicMask() = default;
  explicit TopicMask(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}
  static TopicMask full(std::size_t n) {
    TopicMask m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, true);
    return m;
  }

  std::size_t size() const { return n_; }
  std::size_t cardinality() const { return cardinality_; }

  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v) {
    const std::uint64_t bit = 1ULL << (i & 63);
    const bool cur = words_[i >> 6] & bit;
    if (cur == v) return;
    if (v) {
      words_[i >> 6] |= bit;
      ++cardinality_;
    } else {
      words_[i >> 6] &= ~bit;
      --cardinality_;
    }
  }
  void flip(std::size_t i) { set(i, !test(i)); }

  TopicMask operator&(const TopicMask& o) const { return combine(o, true); }
  TopicMask operator|(const TopicMask& o) const { return combine(o, false); }
  bool operator==(const TopicMask& o) const { return n_ == o.n_ && words_ == o.words_; }

  std::size_t intersection_count(const TopicMask& o) const;
  std::vector<std::size_t> set_bits() const;
  std::string to_string() const;  // '1'/'0' per topic, leftmost = topic 0

 private:
  TopicMask combine(const TopicMask& o, bool use_and) const;
  std::size_t n_ = 0;
  std::size_t cardinality_ = 0;
  std::vector<std::uint64_t> words_;
};

enum class Direction { Best, Worst };

struct SearchParams {
  std::size_t population_size = 2000;
  std::uint64_t max_evaluations = 10'000'000;
  double mutation_prob = 0.3;
  double crossover_prob = 0.7;
  assoc::CorrelationKind correlation = assoc::CorrelationKind::Kendall;
  Direction direction = Direction::Best;
  std::uint64_t seed = 1;
  std::size_t archive_keep = 10;
  std::size_t workers = 0;  // 0 = all hardware threads
};

struct ArchiveEntry {
  TopicMask mask;
  double correlation = 0.0;
};

// Per-cardinality store of the K best (or worst) subsets seen so far.
class ParetoArchive {
 public:
  ParetoArchive() = default;
  ParetoArchive(std::size_t n_topics, Direction dir, std::size_t keep)
      : n_(n_topics), direction_(dir), keep_(keep), per_card_(n_topics) {}

  void merge(const TopicMask& mask, double correlation);
  void merge_with(const ParetoArchive& other);

  std::size_t topic_count() const { return n_; }
  Direction direction() const { return direction_; }
  const std::vector<ArchiveEntry>& at_cardinality(std::size_t c) const {
    return per_card_.at(c - 1);
  }
  std::optional<double> value_at(std::size_t c) const {
    const auto& v = per_card_.at(c - 1);
    if (v.empty()) return std::nullopt;
    return v.front().correlation;
  }
  std::vector<std::size_t> missing_cardinalities() const;

 private:
  bool better(double a, double b) const {
    return direction_ == Direction::Best ? a > b : a < b;
  }
  std::size_t n_ = 0;
  Direction direction_ = Direction::Best;
  std::size_t keep_ = 10;
  std::vector<std::vector<ArchiveEntry>> per_card_;
};

// correlation(kind, MAP restricted to masked columns, full MAP); the full
// mask scores exactly 1. A zero-variance restricted MAP yields the sentinel
// -2 (dominated by every real score in the Best instance).
double fitness(const TopicMask& mask, const ApMatrix& a, assoc::CorrelationKind kind);

// AND and OR children.
std::pair<TopicMask, TopicMask> crossover(const TopicMask& a, const TopicMask& b);

// Independent per-bit flips; an all-zero result is re-drawn (bounded).
TopicMask mutate(const TopicMask& m, double prob, Rng& rng);

ParetoArchive nsga2_search(const ApMatrix& a, const SearchParams& params);

struct SeriesRow {
  std::size_t cardinality = 0;
  double mean = 0.0;
  double p01 = 0.0;
  double p99 = 0.0;
  double stderr_mean = 0.0;
};

// Mean / 1st / 99th percentile correlation of `reps` uniform c-subsets,
// for every cardinality.
std::vector<SeriesRow> average_series(const ApMatrix& a, std::size_t reps,
                                      assoc::CorrelationKind kind, Rng& rng);

// Guiver stability of a best-or-worst series: masks indexed by cardinality
// (entry c-1 holds the cardinality-c mask, all of 1..n present).
double stability_single(const std::vector<TopicMask>& series);

struct TopkStability {
  std::vector<std::pair<std::size_t, double>> per_cardinality;
  double overall = 0.0;
  std::vector<std::string> warnings;
};

// Generalized counters over the top-p sets at each cardinality: actual is
// the summed intersection of rank-adjacent sets, max = c(p-1), and
// min = (2c-n)(p-1) once c exceeds n/2.
TopkStability stability_topk(const std::vector<std::vector<TopicMask>>& sets_per_cardinality,
                             std::size_t p);

ApMatrix synth_matrix_gaussian(std::size_t m, std::size_t n, double mu, double sigma, Rng& rng);
ApMatrix synth_matrix_resample(std::size_t m, std::size_t n, const ApMatrix& source, Rng& rng);

namespace detail {
// Front indices (0 = non-dominated) for bi-objective minimization via the
// staircase sweep; kept visible for the quadratic-reference test.
std::vector<int> nondominated_ranks(const std::vector<std::pair<double, double>>& objectives);
}  // namespace detail

}  // namespace irlab::subset
