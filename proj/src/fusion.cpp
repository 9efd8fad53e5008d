#include "irlab/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace irlab::fusion {

Strategy parse_strategy(const std::string& name) {
  if (name == "average") return Strategy::Average;
  if (name == "rank_position" || name == "rp") return Strategy::RankPosition;
  if (name == "borda") return Strategy::Borda;
  if (name == "condorcet") return Strategy::Condorcet;
  throw ConfigError("unknown fusion strategy: " + name);
}

namespace {

void validate(const FusionInput& in) {
  if (in.scores.size() < 2) throw ConfigError("fuse: need at least 2 methods");
  const std::size_t n = in.scores.front().size();
  if (n == 0) throw ConfigError("fuse: empty score vectors");
  for (const auto& v : in.scores)
    if (v.size() != n) throw ConfigError("fuse: method score shapes differ");
}

}  // namespace

std::vector<std::vector<std::size_t>> rank_items(const FusionInput& in) {
  validate(in);
  const std::size_t n = in.scores.front().size();
  std::vector<std::vector<std::size_t>> ranks(in.scores.size(), std::vector<std::size_t>(n));
  for (std::size_t k = 0; k < in.scores.size(); ++k) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return in.scores[k][a] > in.scores[k][b];
    });
    for (std::size_t pos = 0; pos < n; ++pos) ranks[k][order[pos]] = pos + 1;
  }
  return ranks;
}

std::vector<double> fuse_raw(const FusionInput& in, Strategy strategy) {
  validate(in);
  const std::size_t q = in.scores.size();
  const std::size_t n = in.scores.front().size();
  std::vector<double> out(n, 0.0);

  if (strategy == Strategy::Average) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < q; ++k) s += in.scores[k][i];
      out[i] = s / static_cast<double>(q);
    }
    return out;
  }

  const auto ranks = rank_items(in);
  switch (strategy) {
    case Strategy::RankPosition:
      for (std::size_t i = 0; i < n; ++i) {
        double inv = 0.0;
        for (std::size_t k = 0; k < q; ++k) inv += 1.0 / static_cast<double>(ranks[k][i]);
        out[i] = 1.0 / inv;  // lower = better
      }
      break;
    case Strategy::Borda:
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < q; ++k)
          s += static_cast<double>(n) - static_cast<double>(ranks[k][i]);
        out[i] = s;
      }
      break;
    case Strategy::Condorcet: {
      std::vector<long long> wins(n, 0), losses(n, 0), ties(n, 0);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
          long long pa = 0, pb = 0;
          for (std::size_t k = 0; k < q; ++k) {
            if (ranks[k][a] < ranks[k][b])
              ++pa;
            else if (ranks[k][b] < ranks[k][a])
              ++pb;
          }
          if (pa > pb) {
            ++wins[a];
            ++losses[b];
          } else if (pb > pa) {
            ++wins[b];
            ++losses[a];
          } else {
            ++ties[a];
            ++ties[b];
          }
        }
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (wins[a] != wins[b]) return wins[a] > wins[b];
        if (losses[a] != losses[b]) return losses[a] < losses[b];
        return ties[a] > ties[b];
      });
      // scores from the final rank position, best = 1
      for (std::size_t pos = 0; pos < n; ++pos)
        out[order[pos]] =
            n > 1 ? 1.0 - static_cast<double>(pos) / static_cast<double>(n - 1) : 1.0;
      break;
    }
    case Strategy::Average: break;  // handled above
  }
  return out;
}

FusedResult fuse(const FusionInput& in, Strategy strategy) {
  FusedResult r;
  r.raw = fuse_raw(in, strategy);
  r.lower_is_better_raw = strategy == Strategy::RankPosition;
  r.scores = r.raw;
  if (strategy == Strategy::RankPosition)
    for (double& v : r.scores) v = -v;
  if (strategy == Strategy::Borda) {
    double lo = r.scores.front(), hi = lo;
    for (double v : r.scores) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi > lo)
      for (double& v : r.scores) v = (v - lo) / (hi - lo);
  }
  return r;
}

OracleResult oracle(const FusionInput& candidates, const std::vector<double>& truth,
                    assoc::CorrelationKind measure) {
  if (candidates.scores.empty()) throw ConfigError("oracle: no candidates");
  OracleResult best;
  bool first = true;
  for (std::size_t k = 0; k < candidates.scores.size(); ++k) {
    double score;
    try {
      score = assoc::correlation(measure, candidates.scores[k], truth);
    } catch (const NumericError&) {
      score = -2.0;
    }
    if (first || score > best.score) {
      best.index = k;
      best.score = score;
      best.method = k < candidates.method_tags.size() ? candidates.method_tags[k]
                                                      : std::to_string(k);
      first = false;
    }
  }
  return best;
}

RidgeModel ridge_fit(const std::vector<std::vector<double>>& rows, const std::vector<double>& y,
                     double lambda) {
  if (lambda < 0.0) throw ConfigError("ridge_fit: lambda must be >= 0");
  const std::size_t n = rows.size();
  if (n == 0 || n != y.size()) throw ConfigError("ridge_fit: bad training shape");
  const std::size_t d = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != d) throw ConfigError("ridge_fit: ragged design matrix");
  if (lambda == 0.0 && n < d)
    throw ConfigError("ridge_fit: underdetermined system needs lambda > 0");

  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd yv(n);
  for (std::size_t i = 0; i < n; ++i) {
    yv(static_cast<long>(i)) = y[i];
    for (std::size_t j = 0; j < d; ++j) x(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
  }
  const Eigen::RowVectorXd xmean = x.colwise().mean();
  const double ymean = yv.mean();
  x.rowwise() -= xmean;
  yv.array() -= ymean;

  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  Eigen::VectorXd w;
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < static_cast<long>(d))
      throw NumericError("ridge_fit: singular system at lambda = 0");
    w = qr.solve(yv);
  } else {
    w = gram.ldlt().solve(x.transpose() * yv);
  }

  RidgeModel model;
  model.weights.resize(d);
  double dot = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    model.weights[j] = w(static_cast<long>(j));
    dot += model.weights[j] * xmean(static_cast<long>(j));
  }
  model.intercept = ymean - dot;
  return model;
}

double ridge_predict(const RidgeModel& model, const std::vector<double>& features) {
  if (features.size() != model.weights.size()) throw ConfigError("ridge_predict: feature size");
  double s = model.intercept;
  for (std::size_t j = 0; j < features.size(); ++j) s += model.weights[j] * features[j];
  return s;
}

double ks_distance(std::vector<double> sample_a, std::vector<double> sample_b) {
  if (sample_a.empty() || sample_b.empty()) throw ConfigError("ks_distance: empty sample");
  std::sort(sample_a.begin(), sample_a.end());
  std::sort(sample_b.begin(), sample_b.end());
  const double na = static_cast<double>(sample_a.size());
  const double nb = static_cast<double>(sample_b.size());
  std::size_t ia = 0, ib = 0;
  double best = 0.0;
  while (ia < sample_a.size() && ib < sample_b.size()) {
    const double v = std::min(sample_a[ia], sample_b[ib]);
    while (ia < sample_a.size() && sample_a[ia] <= v) ++ia;
    while (ib < sample_b.size() && sample_b[ib] <= v) ++ib;
    best = std::max(best, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  return best;
}

std::vector<std::string> select_similar_collections(const CollectionFeatures& test,
                                                    const std::vector<CollectionFeatures>& historical,
                                                    std::size_t k) {
  if (k < 1) throw ConfigError("select_similar_collections: k must be >= 1");
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& hist : historical) {
    const std::size_t q = std::min(test.method_scores.size(), hist.method_scores.size());
    if (q == 0) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < q; ++i)
      sum += ks_distance(test.method_scores[i], hist.method_scores[i]);
    scored.emplace_back(sum / static_cast<double>(q), hist.id);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace irlab::fusion
