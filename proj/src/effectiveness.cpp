#include "irlab/effectiveness.hpp"

#include <algorithm>
#include <cmath>

namespace irlab::eff {

double average_precision(const std::vector<std::string>& ranked, const Qrels& qrels,
                         const std::string& topic, std::size_t cutoff) {
  auto it = qrels.entries().find(topic);
  std::size_t total_relevant = 0;
  if (it != qrels.entries().end())
    for (const auto& [_, grade] : it->second)
      if (grade > 0) ++total_relevant;
  if (total_relevant == 0)
    throw DataError("average_precision: topic " + topic + " has no relevant document");

  double sum = 0.0;
  std::size_t found = 0;
  const std::size_t k = std::min(cutoff, ranked.size());
  for (std::size_t p = 0; p < k; ++p) {
    auto g = qrels.grade(topic, ranked[p]);
    if (g && *g > 0) {
      ++found;
      sum += static_cast<double>(found) / static_cast<double>(p + 1);
    }
  }
  return sum / static_cast<double>(total_relevant);
}

double ndcg(const std::vector<std::string>& ranked, const Qrels& qrels, const std::string& topic,
            std::size_t cutoff, bool exponential_gain) {
  auto it = qrels.entries().find(topic);
  if (it == qrels.entries().end())
    throw DataError("ndcg: topic " + topic + " has no judgements");

  auto gain = [exponential_gain](int grade) -> double {
    if (grade <= 0) return 0.0;
    return exponential_gain ? std::pow(2.0, grade) - 1.0 : static_cast<double>(grade);
  };

  std::vector<double> ideal;
  ideal.reserve(it->second.size());
  for (const auto& [_, grade] : it->second) ideal.push_back(gain(grade));
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  if (ideal.empty() || ideal.front() <= 0.0)
    throw DataError("ndcg: topic " + topic + " has no positive gain");

  const std::size_t k = cutoff;
  double idcg = 0.0;
  for (std::size_t p = 0; p < std::min(k, ideal.size()); ++p)
    idcg += ideal[p] / std::log2(static_cast<double>(p) + 2.0);

  double dcg = 0.0;
  for (std::size_t p = 0; p < std::min(k, ranked.size()); ++p) {
    auto g = qrels.grade(topic, ranked[p]);
    if (g) dcg += gain(*g) / std::log2(static_cast<double>(p) + 2.0);
  }
  return dcg / idcg;
}

namespace {

double row_value(const std::vector<double>& vals, RowAggregate kind) {
  const double n = static_cast<double>(vals.size());
  switch (kind) {
    case RowAggregate::MAP: {
      double s = 0.0;
      for (double v : vals) s += v;
      return s / n;
    }
    case RowAggregate::GMAP: {
      double s = 0.0;
      for (double v : vals) s += std::log(std::max(v, kEpsilon));
      return std::exp(s / n);
    }
    case RowAggregate::LogitMAP: {
      double s = 0.0;
      for (double v : vals) {
        const double c = std::clamp(v, kEpsilon, 1.0 - kEpsilon);
        s += std::log(c / (1.0 - c));
      }
      return s / n;
    }
  }
  return 0.0;
}

}  // namespace

EffVector aggregate_rows(const ApMatrix& a, RowAggregate kind) {
  EffVector out;
  out.labels = a.systems();
  out.values.resize(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out.values[i] = row_value(a.row(i), kind);
  return out;
}

EffVector aggregate_cols(const ApMatrix& a, ColAggregate kind) {
  EffVector out;
  out.labels = a.topics();
  out.values.resize(a.cols());
  const RowAggregate rk = kind == ColAggregate::AAP ? RowAggregate::MAP : RowAggregate::GMAP;
  for (std::size_t j = 0; j < a.cols(); ++j) out.values[j] = row_value(a.col(j), rk);
  return out;
}

EffVector wmap(const ApMatrix& a, const std::vector<double>& topic_weights) {
  if (topic_weights.size() != a.cols())
    throw ConfigError("wmap: weight count does not match topic count");
  double wsum = 0.0;
  for (double w : topic_weights) {
    if (w < 0.0) throw ConfigError("wmap: negative weight");
    wsum += w;
  }
  if (wsum <= 0.0) throw ConfigError("wmap: weights sum to zero");

  EffVector out;
  out.labels = a.systems();
  out.values.resize(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += topic_weights[j] * a.at(i, j);
    out.values[i] = s / wsum;
  }
  return out;
}

}  // namespace irlab::eff
