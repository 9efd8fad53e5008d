#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irlab/types.hpp"

namespace irlab::assoc {

enum class CorrelationKind { Pearson, Kendall, Spearman, TauAP };

CorrelationKind parse_correlation(const std::string& name);
std::string correlation_name(CorrelationKind k);

// Tie statistics shared by the fast Kendall path and the O(n^2) oracle, so
// equivalence checks can compare integers rather than rounded doubles.
struct KendallStats {
  long long concordant_minus_discordant = 0;  // S = C - D
  long long pairs = 0;                        // n(n-1)/2
  long long ties_x = 0;                       // sum t(t-1)/2 over x tie groups
  long long ties_y = 0;
  double tau_b() const;
};

KendallStats kendall_stats_fast(const std::vector<double>& x, const std::vector<double>& y);
KendallStats kendall_stats_naive(const std::vector<double>& x, const std::vector<double>& y);

double pearson(const std::vector<double>& x, const std::vector<double>& y);
double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Yilmaz AP correlation of x against the reference ranking induced by y
// (ties in the reference broken by position, flagged via *had_ties).
double tau_ap(const std::vector<double>& x, const std::vector<double>& y,
              bool* had_ties = nullptr);

double correlation(CorrelationKind kind, const std::vector<double>& x,
                   const std::vector<double>& y);

// Bottom-heavy variants: both vectors are rank-reversed before the
// top-heavy computation.
double tau_ap_bottom(const std::vector<double>& x, const std::vector<double>& y);

// Extrapolated rank-biased overlap of two rankings over the same label set.
double rbo(const std::vector<std::string>& ranking_a, const std::vector<std::string>& ranking_b,
           double p);
double rbo_bottom(const std::vector<std::string>& a, const std::vector<std::string>& b, double p);

// Weight of the top d ranks under RBO persistence p (Webber's closed form).
double rbo_top_weight(double p, std::size_t d);

// Solve for p so the top ceil(top_fraction*list_len) ranks carry `weight`.
double rbo_p_for(double top_fraction, double weight, std::size_t list_len);

// Rank vectors descending (higher value = better rank 1..n); used to reduce
// score vectors to rankings for RBO.
std::vector<std::string> ranking_of(const std::vector<std::string>& labels,
                                    const std::vector<double>& values);

// Mean absolute elementwise difference of two same-shape matrices.
double matrix_delta(const ApMatrix& a, const ApMatrix& b);

// Fraction of x-untied ordered pairs whose order y preserves; asymmetric,
// x is the baseline.
double pairwise_agreement(const std::vector<double>& x_baseline, const std::vector<double>& y);

enum class AlphaMetric { Nominal, Ordinal, Interval };

// raters x items table with missing cells.
struct AgreementMatrix {
  std::size_t raters = 0;
  std::size_t items = 0;
  std::vector<std::optional<double>> cells;  // rater-major

  std::optional<double>& at(std::size_t r, std::size_t i) { return cells[r * items + i]; }
  const std::optional<double>& at(std::size_t r, std::size_t i) const {
    return cells[r * items + i];
  }
  static AgreementMatrix make(std::size_t raters, std::size_t items) {
    AgreementMatrix m;
    m.raters = raters;
    m.items = items;
    m.cells.assign(raters * items, std::nullopt);
    return m;
  }
};

double krippendorff_alpha(const AgreementMatrix& m, AlphaMetric metric);

}  // namespace irlab::assoc
