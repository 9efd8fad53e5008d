#pragma once

#include <string>
#include <vector>

#include "irlab/association.hpp"
#include "irlab/types.hpp"

namespace irlab::fusion {

enum class Strategy { Average, RankPosition, Borda, Condorcet };
Strategy parse_strategy(const std::string& name);

// Each input is one method's score vector over the same items (systems,
// topics, or vectorized (system, topic) cells).
struct FusionInput {
  std::vector<std::string> method_tags;
  std::vector<std::vector<double>> scores;  // method-major, equal lengths
};

// Ordinal ranks (1 = best), descending scores, ties broken by item index.
std::vector<std::vector<std::size_t>> rank_items(const FusionInput& in);

// Raw strategy scores before any [0,1] normalization. Rank-position scores
// are 1/sum(1/rank) with lower better; Borda sums (n_items - rank);
// Condorcet maps the final (wins, losses, ties) order onto descending
// rank-position scores.
std::vector<double> fuse_raw(const FusionInput& in, Strategy strategy);

struct FusedResult {
  std::vector<double> scores;       // normalized so higher = better
  std::vector<double> raw;          // strategy-native values
  bool lower_is_better_raw = false;
};

FusedResult fuse(const FusionInput& in, Strategy strategy);

// Analysis-only: the method whose prediction best matches the truth.
struct OracleResult {
  std::string method;
  std::size_t index = 0;
  double score = 0.0;
};
OracleResult oracle(const FusionInput& candidates, const std::vector<double>& truth,
                    assoc::CorrelationKind measure);

struct RidgeModel {
  std::vector<double> weights;
  double intercept = 0.0;
};

// Closed-form ridge (X^T X + lambda I)^-1 X^T y with an unpenalized
// intercept via column centering; lambda = 0 is plain least squares.
RidgeModel ridge_fit(const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& y, double lambda);
double ridge_predict(const RidgeModel& model, const std::vector<double>& features);

// Kolmogorov-Smirnov distance of two empirical distributions.
double ks_distance(std::vector<double> sample_a, std::vector<double> sample_b);

struct CollectionFeatures {
  std::string id;
  int year = 0;
  std::vector<std::vector<double>> method_scores;  // per method, any lengths
};

// Collections ordered by mean KS distance to the test features, ascending.
std::vector<std::string> select_similar_collections(const CollectionFeatures& test,
                                                    const std::vector<CollectionFeatures>& historical,
                                                    std::size_t k);

}  // namespace irlab::fusion
