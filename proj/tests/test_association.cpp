#include <doctest.h>

#include <cmath>
#include <numeric>

#include "irlab/association.hpp"
#include "irlab/rng.hpp"

using namespace irlab;

TEST_CASE("all correlation kinds score identity as 1") {
  const std::vector<double> x = {0.1, 0.7, 0.3, 0.9, 0.5};
  for (auto kind : {assoc::CorrelationKind::Pearson, assoc::CorrelationKind::Kendall,
                    assoc::CorrelationKind::Spearman, assoc::CorrelationKind::TauAP})
    CHECK(assoc::correlation(kind, x, x) == doctest::Approx(1.0));
}

TEST_CASE("reversal gives -1 for the rank coefficients") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {5, 4, 3, 2, 1};
  CHECK(assoc::kendall_tau_b(x, y) == doctest::Approx(-1.0));
  CHECK(assoc::spearman(x, y) == doctest::Approx(-1.0));
}

TEST_CASE("kendall fast path equals the quadratic oracle on tied data") {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.next_below(40);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = double(rng.next_below(8));  // coarse grid forces ties
      y[i] = double(rng.next_below(8));
    }
    const auto fast = assoc::kendall_stats_fast(x, y);
    const auto naive = assoc::kendall_stats_naive(x, y);
    CHECK(fast.concordant_minus_discordant == naive.concordant_minus_discordant);
    CHECK(fast.ties_x == naive.ties_x);
    CHECK(fast.ties_y == naive.ties_y);
    CHECK(fast.pairs == naive.pairs);
  }
}

TEST_CASE("rank coefficients are invariant under monotone transforms") {
  Rng rng(17);
  std::vector<double> x(20), y(20);
  for (auto& v : x) v = rng.next_double();
  for (auto& v : y) v = rng.next_double();
  std::vector<double> fx(x), gy(y);
  for (auto& v : fx) v = std::exp(3.0 * v);
  for (auto& v : gy) v = std::atan(v) * 10.0 + 2.0;
  CHECK(assoc::kendall_tau_b(fx, gy) == doctest::Approx(assoc::kendall_tau_b(x, y)));
  CHECK(assoc::spearman(fx, gy) == doctest::Approx(assoc::spearman(x, y)));
}

TEST_CASE("pearson rejects constant input") {
  CHECK_THROWS_AS(assoc::pearson({1, 1, 1}, {1, 2, 3}), NumericError);
  CHECK_THROWS_AS(assoc::spearman({1, 2, 3}, {2, 2, 2}), NumericError);
}

TEST_CASE("tau_ap flags reference ties and matches kendall on clean reversals") {
  bool ties = false;
  assoc::tau_ap({1, 2, 3}, {3, 3, 1}, &ties);
  CHECK(ties);
  ties = false;
  CHECK(assoc::tau_ap({1, 2, 3, 4}, {4, 3, 2, 1}, &ties) == doctest::Approx(-1.0));
  CHECK_FALSE(ties);
}

TEST_CASE("rbo basics") {
  const std::vector<std::string> a = {"a", "b", "c"};
  CHECK(assoc::rbo(a, a, 0.5) == doctest::Approx(1.0));
  CHECK(assoc::rbo(a, a, 0.95) == doctest::Approx(1.0));

  // fully reversed 2-element lists: direct partial sum gives exactly p
  const std::vector<std::string> x = {"a", "b"};
  const std::vector<std::string> y = {"b", "a"};
  for (double p : {0.3, 0.5, 0.9}) CHECK(assoc::rbo(x, y, p) == doctest::Approx(p));

  // p -> 0+ concentrates on the first rank
  CHECK(assoc::rbo({"a", "b", "c"}, {"a", "c", "b"}, 1e-6) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(assoc::rbo({"a", "b", "c"}, {"b", "a", "c"}, 1e-6) == doctest::Approx(0.0).epsilon(1e-4));

  CHECK_THROWS_AS(assoc::rbo(a, a, 0.0), ConfigError);
  CHECK_THROWS_AS(assoc::rbo(a, a, 1.0), ConfigError);
  CHECK_THROWS_AS(assoc::rbo(a, {"a", "b", "x"}, 0.5), ConfigError);
}

TEST_CASE("rbo is symmetric") {
  Rng rng(4);
  std::vector<std::string> a, b;
  for (int i = 0; i < 12; ++i) a.push_back("d" + std::to_string(i));
  b = a;
  rng.shuffle(b);
  CHECK(assoc::rbo(a, b, 0.8) == doctest::Approx(assoc::rbo(b, a, 0.8)));
}

TEST_CASE("rbo_p_for solves the weight equation") {
  // 75% of the weight on the top 10% of 129 systems
  const double p = assoc::rbo_p_for(0.1, 0.75, 129);
  CHECK(p > 0.0);
  CHECK(p < 1.0);
  const std::size_t d = std::size_t(std::ceil(0.1 * 129));
  CHECK(assoc::rbo_top_weight(p, d) == doctest::Approx(0.75).epsilon(1e-6));

  // prefix weight decreases in p: a longer prefix holding the same weight
  // needs p closer to 1, a heavier demand on a fixed prefix needs smaller p
  const double p_short = assoc::rbo_p_for(0.1, 0.75, 20);
  const double p_long = assoc::rbo_p_for(0.9, 0.75, 500);
  CHECK(p_short < p_long);
  CHECK(p_long > 0.99);
  CHECK(assoc::rbo_p_for(0.5, 0.999, 20) < assoc::rbo_p_for(0.5, 0.5, 20));

  CHECK_THROWS_AS(assoc::rbo_p_for(0.1, 1.2, 100), ConfigError);
}

TEST_CASE("bottom-heavy variants reverse the emphasis") {
  // identity stays perfect under the reversed computation
  std::vector<std::string> r;
  for (int i = 0; i < 8; ++i) r.push_back("d" + std::to_string(i));
  CHECK(assoc::rbo_bottom(r, r, 0.8) == doctest::Approx(1.0));

  // swapping only the top two hurts the top-heavy score more; swapping only
  // the bottom two hurts the bottom-heavy score more
  std::vector<std::string> top_swapped(r), bottom_swapped(r);
  std::swap(top_swapped[0], top_swapped[1]);
  std::swap(bottom_swapped[6], bottom_swapped[7]);
  CHECK(assoc::rbo(r, top_swapped, 0.6) < assoc::rbo(r, bottom_swapped, 0.6));
  CHECK(assoc::rbo_bottom(r, bottom_swapped, 0.6) < assoc::rbo_bottom(r, top_swapped, 0.6));

  std::vector<double> truth = {8, 7, 6, 5, 4, 3, 2, 1};
  std::vector<double> top_err = {7, 8, 6, 5, 4, 3, 2, 1};
  std::vector<double> bottom_err = {8, 7, 6, 5, 4, 3, 1, 2};
  CHECK(assoc::tau_ap(top_err, truth) < assoc::tau_ap(bottom_err, truth));
  CHECK(assoc::tau_ap_bottom(bottom_err, truth) < assoc::tau_ap_bottom(top_err, truth));
}

TEST_CASE("matrix delta") {
  ApMatrix a({"s"}, {"t1", "t2"});
  ApMatrix b({"s"}, {"t1", "t2"});
  a.at(0, 0) = 0;
  a.at(0, 1) = 1;
  b.at(0, 0) = 1;
  b.at(0, 1) = 0;
  CHECK(assoc::matrix_delta(a, a) == 0.0);
  CHECK(assoc::matrix_delta(a, b) == doctest::Approx(1.0));

  Rng rng(9);
  ApMatrix r1({"s1", "s2", "s3"}, {"t1", "t2"});
  ApMatrix r2({"s1", "s2", "s3"}, {"t1", "t2"});
  for (double& v : r1.values()) v = rng.next_double();
  for (double& v : r2.values()) v = rng.next_double();
  double direct = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) direct += std::abs(r1.at(i, j) - r2.at(i, j));
  direct /= 6.0;
  CHECK(assoc::matrix_delta(r1, r2) == direct);

  ApMatrix other({"s"}, {"t1"});
  CHECK_THROWS_AS(assoc::matrix_delta(a, other), ConfigError);
}

TEST_CASE("pairwise agreement counts consistent untied pairs") {
  CHECK(assoc::pairwise_agreement({0, 1}, {10, 90}) == doctest::Approx(1.0));
  CHECK(assoc::pairwise_agreement({0, 1}, {90, 10}) == doctest::Approx(0.0));
  // the tied-x pair never counts
  CHECK(assoc::pairwise_agreement({0, 0, 1}, {5, 10, 50}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("pairwise agreement is 1 under strictly increasing maps") {
  Rng rng(12);
  std::vector<double> x(15);
  for (auto& v : x) v = double(rng.next_below(10));
  std::vector<double> y(x);
  for (auto& v : y) v = 3.0 * v + 1.0;
  long long untied = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if (x[i] != x[j]) ++untied;
  const double expected = double(untied) / (15.0 * 14.0 / 2.0);
  CHECK(assoc::pairwise_agreement(x, y) == doctest::Approx(expected));
}

namespace {

assoc::AgreementMatrix two_raters(const std::vector<double>& a, const std::vector<double>& b) {
  auto m = assoc::AgreementMatrix::make(2, a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    m.at(0, i) = a[i];
    m.at(1, i) = b[i];
  }
  return m;
}

}  // namespace

TEST_CASE("krippendorff alpha fixtures") {
  // identical ratings: expected disagreement may vanish -> alpha 1
  CHECK(assoc::krippendorff_alpha(two_raters({1, 0, 1, 0, 1}, {1, 0, 1, 0, 1}),
                                  assoc::AlphaMetric::Nominal) == doctest::Approx(1.0));

  // two raters, nominal, ratings (0,1) vs (1,0) on two items; the
  // coincidence matrix gives D_o = 1, D_e = 2/3
  CHECK(assoc::krippendorff_alpha(two_raters({0, 1}, {1, 0}), assoc::AlphaMetric::Nominal) ==
        doctest::Approx(-0.5));

  // missing cells are ignored; a lone rating is unpairable
  auto m = assoc::AgreementMatrix::make(3, 3);
  m.at(0, 0) = 1;
  m.at(1, 0) = 1;
  m.at(0, 1) = 0;
  m.at(1, 1) = 0;
  m.at(2, 2) = 5;  // never paired
  CHECK(assoc::krippendorff_alpha(m, assoc::AlphaMetric::Nominal) == doctest::Approx(1.0));

  auto empty = assoc::AgreementMatrix::make(2, 2);
  empty.at(0, 0) = 1;
  empty.at(1, 1) = 1;
  CHECK_THROWS_AS(assoc::krippendorff_alpha(empty, assoc::AlphaMetric::Nominal), DataError);
}

TEST_CASE("krippendorff alpha known interval example") {
  // classic worked example (Krippendorff 2011): two observers, 10 items
  auto m = two_raters({1, 2, 3, 3, 2, 1, 4, 1, 2, 0}, {1, 2, 3, 3, 2, 2, 4, 1, 2, 0});
  const double nominal = assoc::krippendorff_alpha(m, assoc::AlphaMetric::Nominal);
  const double interval = assoc::krippendorff_alpha(m, assoc::AlphaMetric::Interval);
  CHECK(nominal > 0.8);
  CHECK(interval > 0.9);
  // permutation invariance in raters and items
  auto swapped = two_raters({1, 2, 3, 3, 2, 2, 4, 1, 2, 0}, {1, 2, 3, 3, 2, 1, 4, 1, 2, 0});
  CHECK(assoc::krippendorff_alpha(swapped, assoc::AlphaMetric::Interval) ==
        doctest::Approx(interval));
}
