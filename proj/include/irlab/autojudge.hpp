#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irlab/collection.hpp"
#include "irlab/rng.hpp"
#include "irlab/types.hpp"

namespace irlab::autojudge {

// Predicted effectiveness scores, same grid as an ApMatrix.
struct PredictedMatrix {
  ApMatrix scores;
  std::string method;
  std::string normalization = "raw";  // or "minmax01"
  std::vector<std::string> notes;
};

struct PseudoQrels {
  Qrels qrels;
  std::string method;
  std::uint64_t seed = 0;
  std::size_t repetition = 0;
};

// Linear estimate of the pool's relevant-document fraction from the run
// count: mu = 1133.3 / runs - 5.1841 (percent, floored at 0.1) and
// sigma = 0.0037 * mu + 0.0242.
std::pair<double, double> estimate_pool_params(std::size_t num_runs);

struct SncOptions {
  double mu_percent = 5.0;   // mean relevant fraction of the pool, percent
  double sigma = 0.05;       // stddev of the fraction
  bool use_duplicates = false;
  std::size_t repetitions = 20;
  std::size_t pool_depth = 100;
  std::uint64_t seed = 1;
  std::size_t ap_cutoff = 1000;
  // optional: sample from judged documents instead of the run pool
  const Qrels* sample_from_qrels = nullptr;
  // optional: per-topic exact-fraction sampling (topic -> mu percent)
  const std::map<std::string, double>* per_topic_mu = nullptr;
};

struct SncResult {
  PredictedMatrix mean_prediction;
  std::vector<PseudoQrels> pseudo_qrels;
  std::vector<std::string> skipped_topics;
};

SncResult snc(const RunSet& runs, const SncOptions& opts);

enum class WucVariant { V0, V1, V2, V3, V4 };
PredictedMatrix wuc(const RunSet& runs, WucVariant variant);

PredictedMatrix aslam_savell(const RunSet& runs, bool* empty_pair_flag = nullptr);

enum class NcSelection { Normal, Bias };
enum class NcVoting { RankPosition, Borda, Condorcet };

struct NcResult {
  PredictedMatrix prediction;
  PseudoQrels pseudo;
};

NcResult nuray_can(const RunSet& runs, NcSelection selection, NcVoting voting,
                   double rel_fraction = 0.3, std::size_t ap_cutoff = 1000);

enum class SpoMeasure { Single, AllFive, SingleMinusAllFive };

// Caller supplies one run per group via `selected`; empty means all runs.
PredictedMatrix spoerri(const RunSet& runs, SpoMeasure measure, std::size_t depth,
                        const std::vector<std::string>& selected, Rng& rng);

NcResult sakai_lin(const RunSet& runs, double rel_fraction = 0.3, std::size_t ap_cutoff = 1000);

// Global min-max into [0,1]; constant matrices are rejected.
PredictedMatrix normalize_minmax01(const PredictedMatrix& p);

// Registry order used by fusion and the CLI; WUCv4 flagged as excluded
// from fusion defaults.
struct MethodInfo {
  std::string name;
  bool fusion_default;
};
const std::vector<MethodInfo>& method_registry();

}  // namespace irlab::autojudge
