#include "irlab/subset.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace irlab::subset {

TopicMask TopicMask::combine(const TopicMask& o, bool use_and) const {
  if (n_ != o.n_) throw ConfigError("mask length mismatch");
  TopicMask r(n_);
  std::size_t card = 0;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    r.words_[w] = use_and ? (words_[w] & o.words_[w]) : (words_[w] | o.words_[w]);
    card += static_cast<std::size_t>(std::popcount(r.words_[w]));
  }
  r.cardinality_ = card;
  return r;
}

std::size_t TopicMask::intersection_count(const TopicMask& o) const {
  if (n_ != o.n_) throw ConfigError("mask length mismatch");
  std::size_t c = 0;
  for (std::size_t w = 0; w < words_.size(); ++w)
    c += static_cast<std::size_t>(std::popcount(words_[w] & o.words_[w]));
  return c;
}

std::vector<std::size_t> TopicMask::set_bits() const {
  std::vector<std::size_t> out;
  out.reserve(cardinality_);
  for (std::size_t i = 0; i < n_; ++i)
    if (test(i)) out.push_back(i);
  return out;
}

std::string TopicMask::to_string() const {
  std::string s(n_, '0');
  for (std::size_t i = 0; i < n_; ++i)
    if (test(i)) s[i] = '1';
  return s;
}

void ParetoArchive::merge(const TopicMask& mask, double correlation) {
  const std::size_t c = mask.cardinality();
  if (c < 1 || c > n_) return;
  if (correlation < -1.0 || correlation > 1.0) return;  // undefined fitness
  auto& bucket = per_card_[c - 1];
  for (const auto& e : bucket)
    if (e.correlation == correlation && e.mask == mask) return;
  // equal-correlation entries keep first-seen order (deterministic)
  auto pos = std::find_if(bucket.begin(), bucket.end(),
                          [&](const ArchiveEntry& e) { return better(correlation, e.correlation); });
  bucket.insert(pos, ArchiveEntry{mask, correlation});
  if (bucket.size() > keep_) bucket.resize(keep_);
}

void ParetoArchive::merge_with(const ParetoArchive& other) {
  if (other.n_ != n_ || other.direction_ != direction_)
    throw ConfigError("archive merge: incompatible archives");
  for (std::size_t c = 1; c <= n_; ++c)
    for (const auto& e : other.at_cardinality(c)) merge(e.mask, e.correlation);
}

std::vector<std::size_t> ParetoArchive::missing_cardinalities() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 1; c <= n_; ++c)
    if (per_card_[c - 1].empty()) out.push_back(c);
  return out;
}

namespace {

// Column-major copy of the matrix plus the full-set MAP, shared by all
// fitness evaluations of one search.
struct Evaluator {
  std::size_t m = 0, n = 0;
  std::vector<double> cols;      // n blocks of m values
  std::vector<double> full_map;  // length m
  assoc::CorrelationKind kind;

  explicit Evaluator(const ApMatrix& a, assoc::CorrelationKind k) : kind(k) {
    m = a.rows();
    n = a.cols();
    cols.resize(m * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < m; ++i) cols[j * m + i] = a.at(i, j);
    full_map.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a.at(i, j);
      full_map[i] = s / static_cast<double>(n);
    }
  }

  double evaluate(const TopicMask& mask, std::vector<double>& scratch) const {
    const std::size_t c = mask.cardinality();
    if (c == 0) throw ConfigError("fitness: empty mask");
    if (c == n) return 1.0;  // self-correlation, exact by contract
    scratch.assign(m, 0.0);
    for (std::size_t j : mask.set_bits()) {
      const double* col = &cols[j * m];
      for (std::size_t i = 0; i < m; ++i) scratch[i] += col[i];
    }
    const double inv = 1.0 / static_cast<double>(c);
    for (double& v : scratch) v *= inv;
    try {
      return assoc::correlation(kind, scratch, full_map);
    } catch (const NumericError&) {
      return -2.0;  // zero-variance restricted MAP
    }
  }
};

}  // namespace

double fitness(const TopicMask& mask, const ApMatrix& a, assoc::CorrelationKind kind) {
  Evaluator ev(a, kind);
  std::vector<double> scratch;
  return ev.evaluate(mask, scratch);
}

std::pair<TopicMask, TopicMask> crossover(const TopicMask& a, const TopicMask& b) {
  return {a & b, a | b};
}

TopicMask mutate(const TopicMask& m, double prob, Rng& rng) {
  if (prob < 0.0 || prob > 1.0) throw ConfigError("mutate: probability out of [0,1]");
  for (int attempt = 0; attempt < 100; ++attempt) {
    TopicMask out = m;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (rng.next_double() < prob) out.flip(i);
    if (out.cardinality() > 0) return out;
  }
  TopicMask out = m;
  out.set(rng.next_below(m.size()), true);
  return out;
}

namespace {

struct Individual {
  TopicMask mask;
  double corr = 0.0;
  double f1 = 0.0, f2 = 0.0;  // minimization objectives
  int rank = 0;
  double crowding = 0.0;
};

void assign_objectives(Individual& ind, Direction dir) {
  const double card = static_cast<double>(ind.mask.cardinality());
  double corr = ind.corr;
  if (dir == Direction::Best) {
    if (corr < -1.0) corr = -2.0;  // undefined stays dominated
    ind.f1 = card;
    ind.f2 = -corr;
  } else {
    if (corr < -1.0) corr = 2.0;
    ind.f1 = -card;
    ind.f2 = corr;
  }
}

void nondominated_sort(std::vector<Individual>& pop) {
  std::vector<std::pair<double, double>> objectives(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) objectives[i] = {pop[i].f1, pop[i].f2};
  const auto ranks = detail::nondominated_ranks(objectives);
  for (std::size_t i = 0; i < pop.size(); ++i) pop[i].rank = ranks[i];
}

void crowding_distance(std::vector<Individual>& pop) {
  const std::size_t n = pop.size();
  for (auto& ind : pop) ind.crowding = 0.0;
  std::map<int, std::vector<std::size_t>> fronts;
  for (std::size_t i = 0; i < n; ++i) fronts[pop[i].rank].push_back(i);
  const double inf = std::numeric_limits<double>::infinity();
  for (auto& [rank, idx] : fronts) {
    if (idx.size() <= 2) {
      for (auto i : idx) pop[i].crowding = inf;
      continue;
    }
    for (int obj = 0; obj < 2; ++obj) {
      auto value = [&](std::size_t i) { return obj == 0 ? pop[i].f1 : pop[i].f2; };
      std::sort(idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
      pop[idx.front()].crowding = inf;
      pop[idx.back()].crowding = inf;
      const double span = value(idx.back()) - value(idx.front());
      if (span <= 0.0) continue;
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        if (pop[idx[k]].crowding != inf)
          pop[idx[k]].crowding += (value(idx[k + 1]) - value(idx[k - 1])) / span;
    }
  }
}

// smaller rank, then larger crowding, then lower index
std::size_t tournament(const std::vector<Individual>& pop, Rng& rng) {
  const std::size_t a = rng.next_below(pop.size());
  const std::size_t b = rng.next_below(pop.size());
  if (pop[a].rank != pop[b].rank) return pop[a].rank < pop[b].rank ? a : b;
  if (pop[a].crowding != pop[b].crowding) return pop[a].crowding > pop[b].crowding ? a : b;
  return std::min(a, b);
}

void evaluate_batch(const Evaluator& ev, std::vector<Individual>& batch, std::size_t workers) {
  if (workers <= 1 || batch.size() < 2) {
    std::vector<double> scratch;
    for (auto& ind : batch) ind.corr = ev.evaluate(ind.mask, scratch);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    std::vector<double> scratch;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= batch.size()) break;
      batch[i].corr = ev.evaluate(batch[i].mask, scratch);
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

TopicMask random_mask_of_cardinality(std::size_t n, std::size_t c, Rng& rng) {
  TopicMask m(n);
  for (std::size_t i : rng.sample_without_replacement(n, c)) m.set(i, true);
  return m;
}

}  // namespace

ParetoArchive nsga2_search(const ApMatrix& a, const SearchParams& params) {
  const std::size_t n = a.cols();
  if (params.population_size < n)
    throw ConfigError("population_size must be at least the number of topics");
  if (params.mutation_prob < 0 || params.mutation_prob > 1 || params.crossover_prob < 0 ||
      params.crossover_prob > 1)
    throw ConfigError("probabilities must lie in [0,1]");

  const std::size_t workers =
      params.workers ? params.workers : std::max(1u, std::thread::hardware_concurrency());
  Evaluator ev(a, params.correlation);
  ParetoArchive archive(n, params.direction, params.archive_keep);
  Rng master(params.seed);

  // initial population covers every cardinality, then random fill
  std::vector<Individual> pop;
  pop.reserve(params.population_size);
  for (std::size_t i = 0; i < params.population_size; ++i) {
    const std::size_t card = (i % n) + 1;
    Rng r = master.fork(0xA11C0DE, i);
    pop.push_back({random_mask_of_cardinality(n, card, r)});
  }
  evaluate_batch(ev, pop, workers);
  std::uint64_t evaluations = pop.size();
  for (auto& ind : pop) {
    assign_objectives(ind, params.direction);
    archive.merge(ind.mask, ind.corr);
  }
  nondominated_sort(pop);
  crowding_distance(pop);

  std::uint64_t generation = 0;
  while (evaluations < params.max_evaluations) {
    ++generation;
    const std::size_t pairs = params.population_size / 2;
    std::vector<Individual> offspring;
    offspring.reserve(pairs * 2);
    for (std::size_t p = 0; p < pairs; ++p) {
      Rng r = master.fork(generation, p);
      const Individual& pa = pop[tournament(pop, r)];
      const Individual& pb = pop[tournament(pop, r)];
      TopicMask c1 = pa.mask, c2 = pb.mask;
      if (r.next_double() < params.crossover_prob) {
        auto [land, lor] = crossover(pa.mask, pb.mask);
        c1 = land.cardinality() > 0 ? land : pa.mask;  // empty AND child discarded
        c2 = lor;
      }
      offspring.push_back({mutate(c1, params.mutation_prob, r)});
      offspring.push_back({mutate(c2, params.mutation_prob, r)});
    }
    evaluate_batch(ev, offspring, workers);
    evaluations += offspring.size();
    for (auto& ind : offspring) {
      assign_objectives(ind, params.direction);
      archive.merge(ind.mask, ind.corr);
    }

    // elitist survival over parents + offspring
    pop.insert(pop.end(), std::make_move_iterator(offspring.begin()),
               std::make_move_iterator(offspring.end()));
    nondominated_sort(pop);
    crowding_distance(pop);
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (pop[x].rank != pop[y].rank) return pop[x].rank < pop[y].rank;
      return pop[x].crowding > pop[y].crowding;
    });
    std::vector<Individual> next;
    next.reserve(params.population_size);
    for (std::size_t i = 0; i < params.population_size; ++i) next.push_back(pop[order[i]]);
    pop = std::move(next);
    nondominated_sort(pop);
    crowding_distance(pop);
  }
  return archive;
}

std::vector<SeriesRow> average_series(const ApMatrix& a, std::size_t reps,
                                      assoc::CorrelationKind kind, Rng& rng) {
  if (reps < 1) throw ConfigError("average_series: reps must be >= 1");
  const std::size_t n = a.cols();
  Evaluator ev(a, kind);
  std::vector<double> scratch;
  std::vector<SeriesRow> rows;
  rows.reserve(n);
  std::vector<double> vals;
  for (std::size_t c = 1; c <= n; ++c) {
    vals.clear();
    vals.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      TopicMask m(n);
      for (std::size_t i : rng.sample_without_replacement(n, c)) m.set(i, true);
      const double v = ev.evaluate(m, scratch);
      if (v >= -1.0) vals.push_back(v);
    }
    if (vals.empty()) vals.push_back(0.0);
    std::sort(vals.begin(), vals.end());
    auto percentile = [&](double q) {
      const double pos = q * static_cast<double>(vals.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(lo);
      if (lo + 1 >= vals.size()) return vals.back();
      return vals[lo] * (1.0 - frac) + vals[lo + 1] * frac;
    };
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var = vals.size() > 1 ? var / static_cast<double>(vals.size() - 1) : 0.0;
    rows.push_back({c, mean, percentile(0.01), percentile(0.99),
                    std::sqrt(var / static_cast<double>(vals.size()))});
  }
  return rows;
}

double stability_single(const std::vector<TopicMask>& series) {
  const std::size_t n = series.size();
  if (n < 2) throw ConfigError("stability_single: need masks for cardinalities 1..n");
  for (std::size_t c = 1; c <= n; ++c)
    if (series[c - 1].cardinality() != c)
      throw DataError("stability_single: mask at index " + std::to_string(c - 1) +
                      " does not have cardinality " + std::to_string(c));
  long long actual = 0, min_sum = 0, max_sum = 0;
  for (std::size_t c = 1; c <= n - 1; ++c) {
    actual += static_cast<long long>(series[c - 1].intersection_count(series[c]));
    const long long cmin =
        (c <= n / 2 - 1) ? 0 : static_cast<long long>(2 * c + 1) - static_cast<long long>(n);
    min_sum += std::max(0LL, cmin);
    max_sum += static_cast<long long>(c);
  }
  return static_cast<double>(actual - min_sum) / static_cast<double>(max_sum - min_sum);
}

TopkStability stability_topk(const std::vector<std::vector<TopicMask>>& sets_per_cardinality,
                             std::size_t p) {
  if (p < 2) throw ConfigError("stability_topk: p must be >= 2");
  TopkStability out;
  long long actual_total = 0, min_total = 0, max_total = 0;
  for (std::size_t idx = 0; idx < sets_per_cardinality.size(); ++idx) {
    const auto& sets = sets_per_cardinality[idx];
    if (sets.empty()) continue;
    const std::size_t c = sets.front().cardinality();
    const std::size_t n = sets.front().size();
    std::size_t avail = std::min(p, sets.size());
    if (sets.size() < p)
      out.warnings.push_back("cardinality " + std::to_string(c) + ": only " +
                             std::to_string(sets.size()) + " of " + std::to_string(p) + " sets");
    if (avail < 2) continue;
    long long actual = 0;
    for (std::size_t k = 0; k + 1 < avail; ++k)
      actual += static_cast<long long>(sets[k].intersection_count(sets[k + 1]));
    const long long per_pair_min =
        c > n / 2 ? static_cast<long long>(2 * c) - static_cast<long long>(n) : 0;
    const long long cmin = per_pair_min * static_cast<long long>(avail - 1);
    const long long cmax = static_cast<long long>(c) * static_cast<long long>(avail - 1);
    actual_total += actual;
    min_total += cmin;
    max_total += cmax;
    if (cmax > cmin)
      out.per_cardinality.emplace_back(
          c, static_cast<double>(actual - cmin) / static_cast<double>(cmax - cmin));
  }
  out.overall = max_total > min_total
                    ? static_cast<double>(actual_total - min_total) /
                          static_cast<double>(max_total - min_total)
                    : 1.0;
  return out;
}

namespace detail {

std::vector<int> nondominated_ranks(const std::vector<std::pair<double, double>>& objectives) {
  const std::size_t n = objectives.size();
  std::vector<int> ranks(n, 0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (objectives[a].first != objectives[b].first)
      return objectives[a].first < objectives[b].first;
    return objectives[a].second < objectives[b].second;
  });

  // staircase: front_min_f2[k] = minimal f2 assigned to front k so far;
  // scanning in (f1, f2) order, a point is dominated by front k iff
  // front_min_f2[k] <= its f2 (equal-(f1,f2) duplicates are grouped and
  // assigned together, so equality always comes from a strict dominator)
  std::vector<double> front_min_f2;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && objectives[order[j]] == objectives[order[i]]) ++j;
    const double f2 = objectives[order[i]].second;
    std::size_t lo = 0, hi = front_min_f2.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (front_min_f2[mid] <= f2)
        lo = mid + 1;
      else
        hi = mid;
    }
    if (lo == front_min_f2.size())
      front_min_f2.push_back(f2);
    else
      front_min_f2[lo] = std::min(front_min_f2[lo], f2);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = static_cast<int>(lo);
    i = j;
  }
  return ranks;
}

}  // namespace detail

namespace {

std::vector<std::string> synthetic_labels(const char* prefix, std::size_t count) {
  std::vector<std::string> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = std::string(prefix) + std::to_string(i + 1);
  return v;
}

}  // namespace

ApMatrix synth_matrix_gaussian(std::size_t m, std::size_t n, double mu, double sigma, Rng& rng) {
  if (m == 0 || n == 0) throw ConfigError("synth_matrix: zero dimension");
  ApMatrix a(synthetic_labels("s", m), synthetic_labels("t", n));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a.at(i, j) = std::clamp(mu + sigma * rng.next_gaussian(), 0.0, 1.0);
  return a;
}

ApMatrix synth_matrix_resample(std::size_t m, std::size_t n, const ApMatrix& source, Rng& rng) {
  if (m == 0 || n == 0) throw ConfigError("synth_matrix: zero dimension");
  if (source.values().empty()) throw ConfigError("synth_matrix: empty source");
  ApMatrix a(synthetic_labels("s", m), synthetic_labels("t", n));
  const auto& cells = source.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a.at(i, j) = cells[rng.next_below(cells.size())];
  return a;
}

}  // namespace irlab::subset
