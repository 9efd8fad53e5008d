#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "irlab/effectiveness.hpp"
#include "irlab/subset.hpp"

using namespace irlab;
using subset::TopicMask;

namespace {

ApMatrix random_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return subset::synth_matrix_gaussian(m, n, 0.258, 0.12, rng);
}

// oracle: restricted MAP by direct column averaging, correlation by the
// quadratic Kendall statistics
double fitness_oracle(const TopicMask& mask, const ApMatrix& a) {
  std::vector<double> restricted(a.rows(), 0.0), full(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double rs = 0.0, fs = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      fs += a.at(i, j);
      if (mask.test(j)) rs += a.at(i, j);
    }
    restricted[i] = rs / double(mask.cardinality());
    full[i] = fs / double(a.cols());
  }
  return assoc::kendall_stats_naive(restricted, full).tau_b();
}

}  // namespace

TEST_CASE("mask bit arithmetic") {
  TopicMask a(4), b(4);
  a.set(0, true);
  a.set(1, true);
  b.set(0, true);
  b.set(2, true);
  const auto [land, lor] = subset::crossover(a, b);
  CHECK(land.to_string() == "1000");
  CHECK(lor.to_string() == "1110");
  CHECK(land.cardinality() == 1);
  CHECK(lor.cardinality() == 3);

  const auto [same_and, same_or] = subset::crossover(a, a);
  CHECK(same_and == a);
  CHECK(same_or == a);

  TopicMask c(4), d(4);
  c.set(0, true);
  d.set(3, true);
  const auto [empty_and, union_or] = subset::crossover(c, d);
  CHECK(empty_and.cardinality() == 0);
  CHECK(union_or.cardinality() == 2);
}

TEST_CASE("mutation at the probability extremes") {
  Rng rng(1);
  TopicMask m(6);
  m.set(2, true);
  m.set(4, true);
  CHECK(subset::mutate(m, 0.0, rng) == m);

  const TopicMask flipped = subset::mutate(m, 1.0, rng);
  CHECK(flipped.cardinality() == 4);  // full complement is nonempty here
  for (std::size_t i = 0; i < 6; ++i) CHECK(flipped.test(i) == !m.test(i));

  // complement of the full mask would be empty: result is re-drawn nonempty
  const TopicMask full = TopicMask::full(5);
  const TopicMask redrawn = subset::mutate(full, 1.0, rng);
  CHECK(redrawn.cardinality() > 0);
}

TEST_CASE("mutation flip count follows the binomial") {
  Rng rng(77);
  const std::size_t n = 40;
  const double prob = 0.3;
  const int trials = 10000;
  TopicMask base(n);
  base.set(0, true);
  long long flips = 0;
  for (int t = 0; t < trials; ++t) {
    const TopicMask out = subset::mutate(base, prob, rng);
    for (std::size_t i = 0; i < n; ++i)
      if (out.test(i) != base.test(i)) ++flips;
  }
  const double mean = double(flips) / trials;
  const double expect = n * prob;
  const double sigma = std::sqrt(n * prob * (1 - prob));
  CHECK(std::abs(mean - expect) < 3.0 * sigma / std::sqrt(double(trials)) + 0.05);
}

TEST_CASE("fitness: full mask is exactly 1, oracle agreement, sentinel") {
  const ApMatrix a = random_matrix(10, 8, 5);
  CHECK(subset::fitness(TopicMask::full(8), a, assoc::CorrelationKind::Kendall) == 1.0);
  CHECK(subset::fitness(TopicMask::full(8), a, assoc::CorrelationKind::Pearson) == 1.0);

  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    TopicMask m(8);
    const std::size_t c = 1 + rng.next_below(7);
    for (std::size_t i : rng.sample_without_replacement(8, c)) m.set(i, true);
    CHECK(subset::fitness(m, a, assoc::CorrelationKind::Kendall) ==
          doctest::Approx(fitness_oracle(m, a)).epsilon(1e-12));
  }

  // constant restricted MAP under pearson: sentinel -2
  ApMatrix flat({"s1", "s2"}, {"t1", "t2"});
  flat.at(0, 0) = 0.5;
  flat.at(1, 0) = 0.5;
  flat.at(0, 1) = 0.1;
  flat.at(1, 1) = 0.9;
  TopicMask first(2);
  first.set(0, true);
  CHECK(subset::fitness(first, flat, assoc::CorrelationKind::Pearson) == -2.0);
}

TEST_CASE("singleton fitness equals the per-topic column correlation") {
  const ApMatrix a = random_matrix(12, 6, 8);
  const auto full = eff::aggregate_rows(a, eff::RowAggregate::MAP);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    TopicMask m(6);
    m.set(j, true);
    CHECK(subset::fitness(m, a, assoc::CorrelationKind::Kendall) ==
          doctest::Approx(assoc::kendall_tau_b(a.col(j), full.values)));
  }
}

TEST_CASE("a topic that ranks two systems oppositely gives negative singleton tau") {
  ApMatrix a({"s1", "s2"}, {"t1", "t2", "t3"});
  // s1 is better overall, but t3 prefers s2
  a.at(0, 0) = 0.9;
  a.at(0, 1) = 0.8;
  a.at(0, 2) = 0.1;
  a.at(1, 0) = 0.2;
  a.at(1, 1) = 0.3;
  a.at(1, 2) = 0.7;
  TopicMask t3(3);
  t3.set(2, true);
  CHECK(subset::fitness(t3, a, assoc::CorrelationKind::Kendall) < 0.0);
}

TEST_CASE("archive ordering, dedupe, and direction") {
  subset::ParetoArchive arch(4, subset::Direction::Best, 3);
  TopicMask a(4), b(4), c(4);
  a.set(0, true);
  b.set(1, true);
  c.set(2, true);
  arch.merge(a, 0.3);
  arch.merge(b, 0.7);
  arch.merge(c, 0.5);
  arch.merge(b, 0.7);  // duplicate ignored
  const auto& bucket = arch.at_cardinality(1);
  REQUIRE(bucket.size() == 3);
  CHECK(bucket[0].correlation == 0.7);
  CHECK(bucket[1].correlation == 0.5);
  CHECK(bucket[2].correlation == 0.3);
  CHECK(arch.value_at(1) == 0.7);
  CHECK_FALSE(arch.value_at(2).has_value());
  CHECK(arch.missing_cardinalities() == std::vector<std::size_t>{2, 3, 4});

  // sentinel fitness never enters
  arch.merge(a, -2.0);
  CHECK(arch.at_cardinality(1).size() == 3);

  subset::ParetoArchive worst(4, subset::Direction::Worst, 3);
  worst.merge(a, 0.3);
  worst.merge(b, 0.7);
  CHECK(worst.value_at(1) == 0.3);
}

TEST_CASE("nsga2 matches exhaustive enumeration on a small matrix") {
  const std::size_t n = 10;
  const ApMatrix a = random_matrix(20, n, 21);

  // exhaustive oracle over all 2^n - 1 subsets
  std::vector<double> best_exact(n + 1, -2.0), worst_exact(n + 1, 2.0);
  for (std::uint64_t bits = 1; bits < (1ULL << n); ++bits) {
    TopicMask mask(n);
    for (std::size_t i = 0; i < n; ++i)
      if (bits & (1ULL << i)) mask.set(i, true);
    const double v = fitness_oracle(mask, a);
    best_exact[mask.cardinality()] = std::max(best_exact[mask.cardinality()], v);
    worst_exact[mask.cardinality()] = std::min(worst_exact[mask.cardinality()], v);
  }

  subset::SearchParams p;
  p.population_size = 100;
  p.max_evaluations = 40000;
  p.seed = 9;
  p.workers = 2;
  const auto best = subset::nsga2_search(a, p);
  p.direction = subset::Direction::Worst;
  const auto worst = subset::nsga2_search(a, p);

  CHECK(best.value_at(n) == 1.0);
  std::size_t hits = 0;
  for (std::size_t c = 1; c <= n; ++c) {
    REQUIRE(best.value_at(c).has_value());
    REQUIRE(worst.value_at(c).has_value());
    if (*best.value_at(c) >= best_exact[c] - 0.01) ++hits;
    // worst-direction values never exceed best-direction ones
    CHECK(*worst.value_at(c) <= *best.value_at(c));
  }
  CHECK(hits >= std::size_t(0.9 * n));
}

TEST_CASE("nsga2 is deterministic across worker counts") {
  const ApMatrix a = random_matrix(12, 9, 31);
  subset::SearchParams p;
  p.population_size = 60;
  p.max_evaluations = 3000;
  p.seed = 1234;
  p.workers = 1;
  const auto one = subset::nsga2_search(a, p);
  p.workers = 4;
  const auto four = subset::nsga2_search(a, p);
  for (std::size_t c = 1; c <= 9; ++c) {
    const auto& ea = one.at_cardinality(c);
    const auto& eb = four.at_cardinality(c);
    REQUIRE(ea.size() == eb.size());
    for (std::size_t k = 0; k < ea.size(); ++k) {
      CHECK(ea[k].correlation == eb[k].correlation);
      CHECK(ea[k].mask == eb[k].mask);
    }
  }
}

TEST_CASE("nsga2 rejects a population smaller than the topic count") {
  const ApMatrix a = random_matrix(5, 10, 2);
  subset::SearchParams p;
  p.population_size = 5;
  p.max_evaluations = 100;
  CHECK_THROWS_AS(subset::nsga2_search(a, p), ConfigError);
}

TEST_CASE("average series brackets and c = n degenerates to 1") {
  const ApMatrix a = random_matrix(15, 12, 77);
  Rng rng(5);
  const auto rows = subset::average_series(a, 300, assoc::CorrelationKind::Kendall, rng);
  REQUIRE(rows.size() == 12);
  CHECK(rows.back().mean == doctest::Approx(1.0));
  CHECK(rows.back().p01 == doctest::Approx(1.0));
  for (const auto& r : rows) {
    CHECK(r.p01 <= r.mean + 1e-12);
    CHECK(r.p99 >= r.mean - 1e-12);
  }
}

TEST_CASE("average series is stable across repetition counts") {
  const ApMatrix a = random_matrix(20, 20, 123);
  Rng r1(9), r2(10);
  const auto lo = subset::average_series(a, 1000, assoc::CorrelationKind::Kendall, r1);
  const auto hi = subset::average_series(a, 10000, assoc::CorrelationKind::Kendall, r2);
  for (std::size_t c = 0; c < 20; ++c) CHECK(std::abs(lo[c].mean - hi[c].mean) < 0.01);
}

TEST_CASE("archive extremes bracket the average series") {
  const ApMatrix a = random_matrix(20, 10, 55);
  subset::SearchParams p;
  p.population_size = 80;
  p.max_evaluations = 20000;
  p.seed = 3;
  const auto best = subset::nsga2_search(a, p);
  p.direction = subset::Direction::Worst;
  const auto worst = subset::nsga2_search(a, p);
  Rng rng(4);
  const auto avg = subset::average_series(a, 1000, assoc::CorrelationKind::Kendall, rng);
  for (std::size_t c = 1; c <= 10; ++c) {
    const auto& row = avg[c - 1];
    CHECK(*worst.value_at(c) <= row.mean + 2.0 * row.stderr_mean + 1e-9);
    CHECK(*best.value_at(c) >= row.mean - 2.0 * row.stderr_mean - 1e-9);
  }
}

TEST_CASE("stability counter formula fixtures") {
  // n=50 nested series stays at the maximum overlap
  const std::size_t n = 50;
  std::vector<TopicMask> nested;
  for (std::size_t c = 1; c <= n; ++c) {
    TopicMask m(n);
    for (std::size_t i = 0; i < c; ++i) m.set(i, true);
    nested.push_back(m);
  }
  CHECK(subset::stability_single(nested) == doctest::Approx(1.0));

  // counter formulas: n=50, c=30 -> min 11, max 30; c=10 -> min 0
  CHECK(2 * 30 + 1 - 50 == 11);
  CHECK((10 <= 50 / 2 - 1 ? 0 : 2 * 10 + 1 - 50) == 0);

  // top-k counters: n=50, c=30, p=10 -> min 90, max 270; duplicated
  // identical sets give stability 1
  std::vector<std::vector<TopicMask>> sets(1);
  for (int k = 0; k < 10; ++k) sets[0].push_back(nested[29]);
  const auto topk = subset::stability_topk(sets, 10);
  REQUIRE(topk.per_cardinality.size() == 1);
  CHECK(topk.per_cardinality[0].second == doctest::Approx(1.0));
  CHECK((2 * 30 - 50) * (10 - 1) == 90);
  CHECK(30 * (10 - 1) == 270);
  CHECK((12 > 50 / 2 ? (2 * 12 - 50) * 9 : 0) == 0);
}

TEST_CASE("stability of a rotating series is below the nested one") {
  const std::size_t n = 8;
  std::vector<TopicMask> series;
  for (std::size_t c = 1; c <= n; ++c) {
    TopicMask m(n);
    for (std::size_t i = 0; i < c; ++i) m.set((i + 3 * c) % n, true);
    series.push_back(m);
  }
  const double s = subset::stability_single(series);
  CHECK(s < 0.9);
  CHECK(s >= 0.0);
}

TEST_CASE("stability_topk warns on short buckets") {
  std::vector<std::vector<TopicMask>> sets(1);
  TopicMask m(10);
  m.set(0, true);
  m.set(1, true);
  sets[0] = {m, m, m};
  const auto r = subset::stability_topk(sets, 10);
  CHECK(r.warnings.size() == 1);
  CHECK(r.per_cardinality.size() == 1);
}

TEST_CASE("staircase non-dominated ranking equals the quadratic reference") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.next_below(60);
    std::vector<std::pair<double, double>> pts(n);
    for (auto& p : pts) {
      // coarse grid to provoke ties and duplicates
      p.first = double(rng.next_below(6));
      p.second = double(rng.next_below(6));
    }
    const auto fast = subset::detail::nondominated_ranks(pts);

    // reference: peel non-dominated layers quadratically
    std::vector<int> ref(n, -1);
    int level = 0;
    std::size_t assigned = 0;
    while (assigned < n) {
      for (std::size_t i = 0; i < n; ++i) {
        if (ref[i] != -1) continue;
        bool dominated = false;
        for (std::size_t j = 0; j < n && !dominated; ++j) {
          if (i == j || ref[j] >= 0) continue;  // previous fronts only
          const bool le = pts[j].first <= pts[i].first && pts[j].second <= pts[i].second;
          const bool strict = pts[j].first < pts[i].first || pts[j].second < pts[i].second;
          dominated = le && strict;
        }
        if (!dominated) ref[i] = -2;  // member of the current front
      }
      for (std::size_t i = 0; i < n; ++i)
        if (ref[i] == -2) {
          ref[i] = level;
          ++assigned;
        }
      ++level;
    }
    CHECK(std::vector<int>(fast.begin(), fast.end()) == ref);
  }
}

TEST_CASE("synthetic matrices") {
  Rng rng(6);
  const ApMatrix g = subset::synth_matrix_gaussian(30, 20, 0.258, 0.31, rng);
  for (double v : g.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  ApMatrix constant({"s"}, {"t"});
  constant.at(0, 0) = 0.42;
  const ApMatrix rs = subset::synth_matrix_resample(7, 5, constant, rng);
  for (double v : rs.values()) CHECK(v == 0.42);

  // CLT check on the mean with a sigma small enough to avoid meaningful
  // clipping mass
  Rng big(7);
  const std::size_t cells = 1000000;
  const ApMatrix wide = subset::synth_matrix_gaussian(1000, 1000, 0.5, 0.1, big);
  double mean = 0.0;
  for (double v : wide.values()) mean += v;
  mean /= double(cells);
  CHECK(std::abs(mean - 0.5) < 3.0 * 0.1 / std::sqrt(double(cells)));

  CHECK_THROWS_AS(subset::synth_matrix_gaussian(0, 5, 0.5, 0.1, rng), ConfigError);
}
