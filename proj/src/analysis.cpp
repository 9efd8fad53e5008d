#include "irlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace irlab::analysis {

TestResult paired_ttest(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("paired_ttest: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw ConfigError("paired_ttest: need at least 2 pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += x[i] - y[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n - 1);

  TestResult r;
  if (var == 0.0) {
    r.degenerate = true;
    r.statistic = mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity() * (mean > 0 ? 1 : -1);
    r.p_value = mean == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.statistic = mean / std::sqrt(var / static_cast<double>(n));
  boost::math::students_t dist(static_cast<double>(n - 1));
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic)));
  return r;
}

TestResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("wilcoxon: length mismatch");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (d != 0.0) diffs.push_back(d);
  }
  TestResult r;
  const std::size_t n = diffs.size();
  if (n == 0) {
    r.degenerate = true;
    r.p_value = 1.0;
    return r;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });
  std::vector<double> ranks(n);
  bool has_ties = false;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
    if (j - i > 1) has_ties = true;
    const double avg = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }

  double w_plus = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (diffs[k] > 0) w_plus += ranks[k];
  const double total = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
  const double w = std::min(w_plus, total - w_plus);
  r.statistic = w;

  if (n <= 25 && !has_ties) {
    // exact null distribution of W+ by subset-sum counting
    const std::size_t max_sum = n * (n + 1) / 2;
    std::vector<double> count(max_sum + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t rank = 1; rank <= n; ++rank)
      for (std::size_t s = max_sum; s + 1 > rank; --s) count[s] += count[s - rank];
    double below = 0.0;
    for (std::size_t s = 0; s <= static_cast<std::size_t>(w); ++s) below += count[s];
    r.p_value = std::min(1.0, 2.0 * below / std::pow(2.0, static_cast<double>(n)));
  } else {
    const double nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    double tie_term = 0.0;
    i = 0;
    std::vector<double> sorted_abs(n);
    for (std::size_t k = 0; k < n; ++k) sorted_abs[k] = std::abs(diffs[order[k]]);
    while (i < n) {
      std::size_t j = i;
      while (j < n && sorted_abs[j] == sorted_abs[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
    const double sd =
        std::sqrt(nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0);
    if (sd == 0.0) {
      r.degenerate = true;
      r.p_value = 1.0;
      return r;
    }
    const double z = (w - mean + 0.5) / sd;  // continuity correction
    boost::math::normal norm;
    r.p_value = std::min(1.0, 2.0 * boost::math::cdf(norm, z));
  }
  return r;
}

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::SSA: return "SSA";
    case Outcome::SSD: return "SSD";
    case Outcome::SN: return "SN";
    case Outcome::NS: return "NS";
    case Outcome::NN: return "NN";
  }
  return "?";
}

OutcomePair outcome_class(const std::vector<double>& run_x_ap, const std::vector<double>& run_y_ap,
                          const subset::TopicMask& subset_mask, double alpha, bool use_wilcoxon) {
  if (run_x_ap.size() != run_y_ap.size() || run_x_ap.size() != subset_mask.size())
    throw ConfigError("outcome_class: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i : subset_mask.set_bits()) {
    xs.push_back(run_x_ap[i]);
    ys.push_back(run_y_ap[i]);
  }
  if (xs.size() < 2) throw ConfigError("outcome_class: subset needs at least 2 topics");

  auto run_test = [&](const std::vector<double>& a, const std::vector<double>& b) {
    return use_wilcoxon ? wilcoxon_signed_rank(a, b) : paired_ttest(a, b);
  };
  auto mean_diff_sign = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] - b[i];
    return d > 0 ? 1 : (d < 0 ? -1 : 0);
  };

  OutcomePair out;
  const TestResult sub = run_test(xs, ys);
  const TestResult full = run_test(run_x_ap, run_y_ap);
  out.p_subset = sub.p_value;
  out.p_full = full.p_value;
  out.direction_subset = mean_diff_sign(xs, ys);
  out.direction_full = mean_diff_sign(run_x_ap, run_y_ap);
  const bool sig_s = sub.p_value < alpha;
  const bool sig_g = full.p_value < alpha;
  if (sig_s && sig_g)
    out.outcome = out.direction_subset == out.direction_full ? Outcome::SSA : Outcome::SSD;
  else if (sig_s)
    out.outcome = Outcome::SN;
  else if (sig_g)
    out.outcome = Outcome::NS;
  else
    out.outcome = Outcome::NN;
  return out;
}

PcaResult pca(const std::vector<std::vector<double>>& points, double variance_threshold) {
  if (points.size() < 2) throw ConfigError("pca: need at least 2 points");
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
    throw ConfigError("pca: variance threshold must be in (0,1]");
  const std::size_t n = points.size();
  const std::size_t d = points.front().size();
  for (const auto& p : points)
    if (p.size() != d) throw ConfigError("pca: ragged point matrix");

  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x(static_cast<long>(i), static_cast<long>(j)) = points[i][j];
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("pca: eigendecomposition failed");

  // eigenvalues ascending from Eigen; flip to descending
  Eigen::VectorXd evals = solver.eigenvalues().reverse();
  Eigen::MatrixXd evecs = solver.eigenvectors().rowwise().reverse();
  double total = 0.0;
  for (long i = 0; i < evals.size(); ++i) total += std::max(0.0, evals(i));

  PcaResult result;
  result.explained_ratio.resize(static_cast<std::size_t>(evals.size()));
  for (long i = 0; i < evals.size(); ++i)
    result.explained_ratio[static_cast<std::size_t>(i)] =
        total > 0.0 ? std::max(0.0, evals(i)) / total : 0.0;

  std::size_t k = 0;
  double cum = 0.0;
  while (k < result.explained_ratio.size() && cum < variance_threshold - 1e-12) {
    cum += result.explained_ratio[k];
    ++k;
  }
  if (k == 0) k = 1;
  result.components = k;

  const Eigen::MatrixXd proj = x * evecs.leftCols(static_cast<long>(k));
  result.projected.assign(n, std::vector<double>(k));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j)
      result.projected[i][j] = proj(static_cast<long>(i), static_cast<long>(j));
  return result;
}

namespace {

double point_distance(const std::vector<double>& a, const std::vector<double>& b,
                      ClusterDistance kind) {
  if (kind == ClusterDistance::Euclidean) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw NumericError(
        "hcluster: zero vector under cosine distance; project with PCA or shift the features");
  return 1.0 - dot / std::sqrt(na * nb);
}

}  // namespace

ClusterModel hcluster(const std::vector<std::vector<double>>& points, std::size_t m,
                      ClusterDistance distance) {
  const std::size_t n = points.size();
  if (n == 0) throw ConfigError("hcluster: no points");
  if (m < 1 || m > n) throw ConfigError("hcluster: cluster count out of range");

  // complete linkage via Lance-Williams on a dense distance matrix
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dist[i * n + j] = dist[j * n + i] = point_distance(points[i], points[j], distance);

  std::vector<bool> alive(n, true);
  std::vector<std::size_t> cluster_of(n);
  std::iota(cluster_of.begin(), cluster_of.end(), 0);

  ClusterModel model;
  std::size_t active = n;
  while (active > m) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!alive[j]) continue;
        if (dist[i * n + j] < best) {  // strict keeps the smallest-index pair
          best = dist[i * n + j];
          bi = i;
          bj = j;
        }
      }
    }
    model.merges.emplace_back(bi, bj);
    for (std::size_t k = 0; k < n; ++k) {
      if (!alive[k] || k == bi || k == bj) continue;
      const double d = std::max(dist[bi * n + k], dist[bj * n + k]);
      dist[bi * n + k] = dist[k * n + bi] = d;
    }
    alive[bj] = false;
    for (std::size_t k = 0; k < n; ++k)
      if (cluster_of[k] == bj) cluster_of[k] = bi;
    --active;
  }

  // renumber alive clusters to 0..m-1 in index order
  std::vector<std::size_t> remap(n, 0);
  std::size_t next_id = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i]) remap[i] = next_id++;
  model.cluster_count = next_id;
  model.assignment.resize(n);
  for (std::size_t k = 0; k < n; ++k) model.assignment[k] = remap[cluster_of[k]];
  return model;
}

subset::TopicMask one_for_cluster(const ClusterModel& model, std::size_t c, Rng& rng) {
  const std::size_t n = model.assignment.size();
  if (c < 1 || c > n) throw ConfigError("one_for_cluster: cardinality out of range");
  const std::size_t m = model.cluster_count;

  std::vector<std::vector<std::size_t>> members(m);
  for (std::size_t t = 0; t < n; ++t) members[model.assignment[t]].push_back(t);

  subset::TopicMask mask(n);
  std::size_t remaining = c;
  while (remaining > 0) {
    std::vector<std::size_t> nonempty;
    for (std::size_t k = 0; k < m; ++k)
      if (!members[k].empty()) nonempty.push_back(k);
    std::vector<std::size_t> chosen;
    if (remaining < nonempty.size()) {
      for (std::size_t idx : rng.sample_without_replacement(nonempty.size(), remaining))
        chosen.push_back(nonempty[idx]);
      std::sort(chosen.begin(), chosen.end());
    } else {
      chosen = nonempty;  // full round; emptied clusters are skipped next time
    }
    for (std::size_t k : chosen) {
      auto& mem = members[k];
      const std::size_t pick = rng.next_below(mem.size());
      mask.set(mem[pick], true);
      mem.erase(mem.begin() + static_cast<long>(pick));
      --remaining;
    }
  }
  return mask;
}

std::vector<double> hits_hubness(const ApMatrix& a, double tolerance,
                                 std::size_t max_iterations) {
  const std::size_t m = a.rows(), n = a.cols();
  double total = 0.0;
  for (double v : a.values()) {
    if (v < 0.0) throw ConfigError("hits_hubness: negative weight");
    total += v;
  }
  if (total == 0.0) throw NumericError("hits_hubness: zero matrix");

  std::vector<double> hub(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> auth(m, 0.0);
  auto l2_normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    if (s > 0.0)
      for (double& x : v) x /= s;
  };

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a.at(i, j) * hub[j];
      auth[i] = s;
    }
    l2_normalize(auth);
    std::vector<double> next(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += a.at(i, j) * auth[i];
      next[j] = s;
    }
    l2_normalize(next);
    double delta = 0.0;
    for (std::size_t j = 0; j < n; ++j) delta = std::max(delta, std::abs(next[j] - hub[j]));
    hub = std::move(next);
    if (delta < tolerance) break;
  }
  return hub;
}

ApMatrix inject_columns(const ApMatrix& artificial, const ApMatrix& real,
                        const std::vector<std::string>& topics) {
  if (!artificial.same_shape(real))
    throw ConfigError("inject_columns: matrices must share shape and labels");
  ApMatrix out = artificial;
  for (const auto& topic : topics) {
    auto it = std::find(real.topics().begin(), real.topics().end(), topic);
    if (it == real.topics().end()) throw DataError("inject_columns: unknown topic " + topic);
    const std::size_t j = static_cast<std::size_t>(it - real.topics().begin());
    for (std::size_t i = 0; i < real.rows(); ++i) out.at(i, j) = real.at(i, j);
  }
  return out;
}

}  // namespace irlab::analysis
