#include "irlab/association.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace irlab::assoc {

CorrelationKind parse_correlation(const std::string& name) {
  if (name == "pearson") return CorrelationKind::Pearson;
  if (name == "kendall") return CorrelationKind::Kendall;
  if (name == "spearman") return CorrelationKind::Spearman;
  if (name == "tau_ap" || name == "tauap") return CorrelationKind::TauAP;
  throw ConfigError("unknown correlation kind: " + name);
}

std::string correlation_name(CorrelationKind k) {
  switch (k) {
    case CorrelationKind::Pearson: return "pearson";
    case CorrelationKind::Kendall: return "kendall";
    case CorrelationKind::Spearman: return "spearman";
    case CorrelationKind::TauAP: return "tau_ap";
  }
  return "?";
}

double KendallStats::tau_b() const {
  const double d1 = static_cast<double>(pairs - ties_x);
  const double d2 = static_cast<double>(pairs - ties_y);
  if (d1 <= 0.0 || d2 <= 0.0)
    throw NumericError("kendall: a vector is constant, tau-b undefined");
  return static_cast<double>(concordant_minus_discordant) / std::sqrt(d1 * d2);
}

namespace {

void check_paired(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("paired vectors differ in length");
  if (x.size() < 2) throw ConfigError("paired vectors need at least 2 elements");
}

// merge sort counting inversions in v
long long count_inversions(std::vector<double>& v, std::vector<double>& tmp, std::size_t lo,
                           std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<long long>(mid - i);
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + static_cast<long>(lo), tmp.begin() + static_cast<long>(hi),
            v.begin() + static_cast<long>(lo));
  return inv;
}

long long tie_pairs(const std::vector<double>& sorted) {
  long long total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const long long t = static_cast<long long>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

}  // namespace

KendallStats kendall_stats_fast(const std::vector<double>& x, const std::vector<double>& y) {
  check_paired(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  KendallStats st;
  st.pairs = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;

  // tie groups in x; joint ties counted inside them
  long long joint = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && x[order[j]] == x[order[i]]) ++j;
      const long long t = static_cast<long long>(j - i);
      st.ties_x += t * (t - 1) / 2;
      std::size_t a = i;
      while (a < j) {
        std::size_t b = a;
        while (b < j && y[order[b]] == y[order[a]]) ++b;
        const long long u = static_cast<long long>(b - a);
        joint += u * (u - 1) / 2;
        a = b;
      }
      i = j;
    }
  }

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> work = ys;
  std::vector<double> tmp(n);
  const long long discordant = count_inversions(work, tmp, 0, n);

  std::vector<double> ysorted = ys;
  std::sort(ysorted.begin(), ysorted.end());
  st.ties_y = tie_pairs(ysorted);

  // S = C - D = n0 - n1 - n2 + n3 - 2*Q, Q = inversions of y after the x-sort
  st.concordant_minus_discordant =
      st.pairs - st.ties_x - st.ties_y + joint - 2 * discordant;
  return st;
}

KendallStats kendall_stats_naive(const std::vector<double>& x, const std::vector<double>& y) {
  check_paired(x, y);
  KendallStats st;
  const std::size_t n = x.size();
  st.pairs = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  long long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++st.ties_x;
      if (dy == 0.0) ++st.ties_y;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0.0) == (dy > 0.0))
        ++concordant;
      else
        ++discordant;
    }
  st.concordant_minus_discordant = concordant - discordant;
  return st;
}

double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  return kendall_stats_fast(x, y).tau_b();
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  check_paired(x, y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> fractional_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  check_paired(x, y);
  return pearson(fractional_ranks(x), fractional_ranks(y));
}

double tau_ap(const std::vector<double>& x, const std::vector<double>& y, bool* had_ties) {
  check_paired(x, y);
  const std::size_t n = x.size();
  if (n < 2) throw ConfigError("tau_ap needs at least 2 elements");

  // reference ranking: sort items by y descending, stable on index
  std::vector<std::size_t> ref(n);
  std::iota(ref.begin(), ref.end(), 0);
  std::stable_sort(ref.begin(), ref.end(),
                   [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
  bool ties = false;
  for (std::size_t i = 1; i < n; ++i)
    if (y[ref[i]] == y[ref[i - 1]]) ties = true;
  if (had_ties) *had_ties = ties;

  std::vector<std::size_t> ref_pos(n);
  for (std::size_t i = 0; i < n; ++i) ref_pos[ref[i]] = i;

  // candidate ranking from x, same convention
  std::vector<std::size_t> cand(n);
  std::iota(cand.begin(), cand.end(), 0);
  std::stable_sort(cand.begin(), cand.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });

  double sum = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t correct = 0;
    for (std::size_t j = 0; j < i; ++j)
      if (ref_pos[cand[j]] < ref_pos[cand[i]]) ++correct;
    sum += static_cast<double>(correct) / static_cast<double>(i);
  }
  return 2.0 * sum / static_cast<double>(n - 1) - 1.0;
}

double tau_ap_bottom(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> xr(x), yr(y);
  for (double& v : xr) v = -v;
  for (double& v : yr) v = -v;
  return tau_ap(xr, yr);
}

double correlation(CorrelationKind kind, const std::vector<double>& x,
                   const std::vector<double>& y) {
  switch (kind) {
    case CorrelationKind::Pearson: return pearson(x, y);
    case CorrelationKind::Kendall: return kendall_tau_b(x, y);
    case CorrelationKind::Spearman: return spearman(x, y);
    case CorrelationKind::TauAP: return tau_ap(x, y);
  }
  throw ConfigError("bad correlation kind");
}

double rbo(const std::vector<std::string>& ranking_a, const std::vector<std::string>& ranking_b,
           double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("rbo: p must be in (0,1)");
  if (ranking_a.size() != ranking_b.size())
    throw ConfigError("rbo: rankings differ in length");
  const std::size_t n = ranking_a.size();
  if (n == 0) throw ConfigError("rbo: empty rankings");
  {
    std::vector<std::string> sa(ranking_a), sb(ranking_b);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) throw ConfigError("rbo: rankings are not over the same label set");
  }

  std::map<std::string, std::size_t> depth_a, depth_b;
  double sum = 0.0;
  double overlap = 0.0;
  double pw = 1.0;  // p^(d-1)
  for (std::size_t d = 1; d <= n; ++d) {
    const auto& ea = ranking_a[d - 1];
    const auto& eb = ranking_b[d - 1];
    if (ea == eb) {
      overlap += 1.0;
    } else {
      if (depth_b.count(ea)) overlap += 1.0;
      if (depth_a.count(eb)) overlap += 1.0;
      depth_a[ea] = d;
      depth_b[eb] = d;
    }
    sum += (overlap / static_cast<double>(d)) * pw;
    pw *= p;
  }
  // extrapolation: agreement held at A_n beyond the lists
  const double a_n = overlap / static_cast<double>(n);
  return (1.0 - p) * sum + a_n * pw;  // pw == p^n here
}

double rbo_bottom(const std::vector<std::string>& a, const std::vector<std::string>& b, double p) {
  std::vector<std::string> ra(a.rbegin(), a.rend()), rb(b.rbegin(), b.rend());
  return rbo(ra, rb, p);
}

double rbo_top_weight(double p, std::size_t d) {
  if (d < 1) throw ConfigError("rbo_top_weight: d must be >= 1");
  // W(1:d) = 1 - p^(d-1) + d*(1-p)/p * ( ln(1/(1-p)) - sum_{i=1}^{d-1} p^i/i )
  double tail = std::log(1.0 / (1.0 - p));
  double pw = 1.0;
  for (std::size_t i = 1; i < d; ++i) {
    pw *= p;
    tail -= pw / static_cast<double>(i);
  }
  return 1.0 - std::pow(p, static_cast<double>(d) - 1.0) +
         (static_cast<double>(d) * (1.0 - p) / p) * tail;
}

double rbo_p_for(double top_fraction, double weight, std::size_t list_len) {
  if (!(top_fraction > 0.0 && top_fraction < 1.0))
    throw ConfigError("rbo_p_for: top_fraction must be in (0,1)");
  if (!(weight > 0.0 && weight < 1.0)) throw ConfigError("rbo_p_for: weight must be in (0,1)");
  const std::size_t d =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::ceil(top_fraction * static_cast<double>(list_len))));
  // W is monotone decreasing in p: p->0 gives all weight to rank 1.
  double lo = 1e-12, hi = 1.0 - 1e-12;
  if (rbo_top_weight(hi, d) > weight || rbo_top_weight(lo, d) < weight)
    throw NumericError("rbo_p_for: no root in (0,1)");
  for (int iter = 0; iter < 200 && hi - lo > 1e-9; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (rbo_top_weight(mid, d) >= weight)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<std::string> ranking_of(const std::vector<std::string>& labels,
                                    const std::vector<double>& values) {
  if (labels.size() != values.size()) throw ConfigError("ranking_of: size mismatch");
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return labels[a] < labels[b];
  });
  std::vector<std::string> out(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) out[i] = labels[order[i]];
  return out;
}

double matrix_delta(const ApMatrix& a, const ApMatrix& b) {
  if (!a.same_shape(b)) throw ConfigError("matrix_delta: shape or label mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    sum += std::abs(a.values()[i] - b.values()[i]);
  return sum / static_cast<double>(a.values().size());
}

double pairwise_agreement(const std::vector<double>& x_baseline, const std::vector<double>& y) {
  check_paired(x_baseline, y);
  const std::size_t n = x_baseline.size();
  long long agree = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (x_baseline[i] == x_baseline[j]) continue;
      const bool x_lt = x_baseline[i] < x_baseline[j];
      if ((x_lt && y[i] < y[j]) || (!x_lt && y[j] < y[i])) ++agree;
    }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(agree) / pairs;
}

double krippendorff_alpha(const AgreementMatrix& m, AlphaMetric metric) {
  // coincidence matrix over the observed values
  std::map<double, std::map<double, double>> o;
  std::map<double, double> marginal;
  double n_total = 0.0;

  for (std::size_t item = 0; item < m.items; ++item) {
    std::vector<double> vals;
    for (std::size_t r = 0; r < m.raters; ++r)
      if (m.at(r, item)) vals.push_back(*m.at(r, item));
    const double mu = static_cast<double>(vals.size());
    if (vals.size() < 2) continue;  // unpaired values are ignored
    for (std::size_t a = 0; a < vals.size(); ++a)
      for (std::size_t b = 0; b < vals.size(); ++b) {
        if (a == b) continue;
        o[vals[a]][vals[b]] += 1.0 / (mu - 1.0);
      }
  }
  for (const auto& [c, row] : o)
    for (const auto& [k, v] : row) {
      marginal[c] += v;
      n_total += v;
    }
  if (n_total <= 0.0)
    throw DataError("krippendorff_alpha: no two raters overlap on any item");

  std::vector<double> values;
  for (const auto& [c, _] : marginal) values.push_back(c);

  auto delta2 = [&](double c, double k) -> double {
    switch (metric) {
      case AlphaMetric::Nominal: return c == k ? 0.0 : 1.0;
      case AlphaMetric::Interval: return (c - k) * (c - k);
      case AlphaMetric::Ordinal: {
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
  for (const auto& [c, row] : o)
    for (const auto& [k, v] : row) d_obs += v * delta2(c, k);
  d_obs /= n_total;

  double d_exp = 0.0;
  for (double c : values)
    for (double k : values) d_exp += marginal.at(c) * marginal.at(k) * delta2(c, k);
  d_exp /= n_total * (n_total - 1.0);

  if (d_exp == 0.0) return 1.0;  // all observed values identical
  return 1.0 - d_obs / d_exp;
}

}  // namespace irlab::assoc
