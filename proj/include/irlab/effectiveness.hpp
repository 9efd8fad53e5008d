#pragma once

#include <string>
#include <vector>

#include "irlab/types.hpp"

namespace irlab::eff {

inline constexpr double kEpsilon = 1e-5;  // GMAP / logit floor

// AP@k: (1/R) * sum over relevant retrieved positions p <= k of
// (relevant found so far / p). R counts all relevant docs for the topic.
double average_precision(const std::vector<std::string>& ranked, const Qrels& qrels,
                         const std::string& topic, std::size_t cutoff = 1000);

// NDCG@k with discount 1/log2(rank+1). Gain is the raw grade, or 2^g - 1
// when exponential is set.
double ndcg(const std::vector<std::string>& ranked, const Qrels& qrels, const std::string& topic,
            std::size_t cutoff, bool exponential_gain = false);

enum class RowAggregate { MAP, GMAP, LogitMAP };
enum class ColAggregate { AAP, GAAP };

EffVector aggregate_rows(const ApMatrix& a, RowAggregate kind);
EffVector aggregate_cols(const ApMatrix& a, ColAggregate kind);

// Weighted row means with normalized non-negative topic weights.
EffVector wmap(const ApMatrix& a, const std::vector<double>& topic_weights);

}  // namespace irlab::eff
