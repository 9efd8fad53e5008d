#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irlab/rng.hpp"
#include "irlab/subset.hpp"
#include "irlab/types.hpp"

namespace irlab::analysis {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // zero-variance convention applied
};

// Paired two-tailed t-test, n-1 degrees of freedom.
TestResult paired_ttest(const std::vector<double>& x, const std::vector<double>& y);

// Wilcoxon signed-rank, two-tailed; exact for n <= 25 without ties, normal
// approximation otherwise.
TestResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y);

enum class Outcome { SSA, SSD, SN, NS, NN };
std::string outcome_name(Outcome o);

struct OutcomePair {
  Outcome outcome = Outcome::NN;
  double p_subset = 1.0;
  double p_full = 1.0;
  int direction_subset = 0;  // sign of mean difference
  int direction_full = 0;
};

// Classify a run pair over subset columns S and the full column set.
OutcomePair outcome_class(const std::vector<double>& run_x_ap, const std::vector<double>& run_y_ap,
                          const subset::TopicMask& subset_mask, double alpha = 0.05,
                          bool use_wilcoxon = false);

struct PcaResult {
  std::vector<std::vector<double>> projected;  // n points x k components
  std::vector<double> explained_ratio;         // all components, descending
  std::size_t components = 0;
};

// Center columns, eigendecompose covariance, keep the fewest components
// reaching variance_threshold.
PcaResult pca(const std::vector<std::vector<double>>& points, double variance_threshold);

struct ClusterModel {
  std::vector<std::size_t> assignment;  // topic -> cluster id in [0, m)
  std::size_t cluster_count = 0;
  // merge tree: (left, right) node ids; leaves are 0..n-1
  std::vector<std::pair<std::size_t, std::size_t>> merges;
};

enum class ClusterDistance { Cosine, Euclidean };

// Agglomerative complete-linkage clustering cut at m clusters.
ClusterModel hcluster(const std::vector<std::vector<double>>& points, std::size_t m,
                      ClusterDistance distance = ClusterDistance::Cosine);

// Topic selection with one representative per cluster, round-robin beyond
// c = m, random cluster choice below it. Result cardinality is exactly c.
subset::TopicMask one_for_cluster(const ClusterModel& model, std::size_t c, Rng& rng);

// HITS hub scores of topics on the bipartite system-topic graph.
std::vector<double> hits_hubness(const ApMatrix& a, double tolerance = 1e-10,
                                 std::size_t max_iterations = 1000);

// Replace the listed topic columns of `artificial` with the ones in `real`.
ApMatrix inject_columns(const ApMatrix& artificial, const ApMatrix& real,
                        const std::vector<std::string>& topics);

}  // namespace irlab::analysis
