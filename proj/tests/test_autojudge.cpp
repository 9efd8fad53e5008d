#include <doctest.h>

#include <cmath>
#include <sstream>

#include "irlab/autojudge.hpp"
#include "irlab/effectiveness.hpp"

using namespace irlab;

namespace {

RunSet runs_from(const std::string& text, std::size_t depth = 1000) {
  std::istringstream in(text);
  return io::parse_runs(in, depth);
}

}  // namespace

TEST_CASE("pool parameter estimation fixtures") {
  // TREC-8 row: 129 runs -> (3.60, 0.038); TREC-3 row: 40 runs -> (23.15, 0.110)
  auto [mu8, sd8] = autojudge::estimate_pool_params(129);
  CHECK(mu8 == doctest::Approx(3.60).epsilon(0.002));
  CHECK(sd8 == doctest::Approx(0.038).epsilon(0.02));
  auto [mu3, sd3] = autojudge::estimate_pool_params(40);
  CHECK(mu3 == doctest::Approx(23.15).epsilon(0.001));
  CHECK(sd3 == doctest::Approx(0.110).epsilon(0.01));
  // enormous run counts floor the mean at a positive value
  auto [mu_big, sd_big] = autojudge::estimate_pool_params(1000000);
  CHECK(mu_big == 0.1);
  CHECK(sd_big > 0.0);
}

TEST_CASE("snc degenerate sampling marks the whole pool relevant") {
  const RunSet runs = runs_from(
      "t Q0 a 1 3.0 s1\n"
      "t Q0 b 2 2.0 s1\n"
      "t Q0 b 1 3.0 s2\n"
      "t Q0 c 2 2.0 s2\n");
  autojudge::SncOptions opts;
  opts.mu_percent = 100.0;
  opts.sigma = 0.0;
  opts.repetitions = 2;
  opts.seed = 42;
  const auto res = autojudge::snc(runs, opts);
  for (const auto& pq : res.pseudo_qrels)
    for (const auto& [topic, docs] : pq.qrels.entries())
      for (const auto& [doc, grade] : docs) CHECK(grade == 1);
  // with every pool doc relevant, AP of each run is the metric value itself
  Qrels all_rel;
  for (const auto& doc : {"a", "b", "c"}) all_rel.set("t", doc, 1);
  for (std::size_t s = 0; s < 2; ++s) {
    std::vector<std::string> docs;
    for (const auto& e : runs.list(s, 0)) docs.push_back(e.doc_id);
    CHECK(res.mean_prediction.scores.at(s, 0) ==
          doctest::Approx(eff::average_precision(docs, all_rel, "t")));
  }
}

TEST_CASE("snc sampled fraction tracks mu") {
  // one topic, large pool; fraction of sampled docs over many reps ~ mu/100
  std::ostringstream gen;
  for (int d = 0; d < 200; ++d) gen << "t Q0 d" << d << ' ' << (d + 1) << ' ' << (200 - d) << " s1\n";
  // a second run so AP evaluation has an m > 1 context
  for (int d = 0; d < 200; ++d) gen << "t Q0 d" << d << ' ' << (d + 1) << ' ' << (200 - d) << " s2\n";
  const RunSet runs = runs_from(gen.str());
  autojudge::SncOptions opts;
  opts.mu_percent = 30.0;
  opts.sigma = 0.02;
  opts.repetitions = 300;
  opts.pool_depth = 200;
  opts.seed = 7;
  const auto res = autojudge::snc(runs, opts);
  double frac_sum = 0.0;
  for (const auto& pq : res.pseudo_qrels) {
    std::size_t rel = 0, total = 0;
    for (const auto& [doc, grade] : pq.qrels.entries().at("t")) {
      ++total;
      if (grade == 1) ++rel;
    }
    frac_sum += double(rel) / double(total);
  }
  const double mean_frac = frac_sum / double(res.pseudo_qrels.size());
  // 3 sigma of the mean over 300 reps, sigma_draw ~ 0.02 plus floor rounding
  CHECK(std::abs(mean_frac - 0.30) < 3.0 * 0.02 / std::sqrt(300.0) + 0.01);
}

TEST_CASE("snc with fixed seed is bit-for-bit reproducible") {
  const RunSet runs = runs_from(
      "t Q0 a 1 3.0 s1\n"
      "t Q0 b 2 2.0 s1\n"
      "t Q0 c 1 3.0 s2\n"
      "t Q0 b 2 2.0 s2\n");
  autojudge::SncOptions opts;
  opts.mu_percent = 50.0;
  opts.sigma = 0.2;
  opts.repetitions = 5;
  opts.seed = 99;
  const auto r1 = autojudge::snc(runs, opts);
  const auto r2 = autojudge::snc(runs, opts);
  CHECK(r1.mean_prediction.scores.values() == r2.mean_prediction.scores.values());
}

TEST_CASE("snc mean stabilizes as repetitions grow") {
  // dispersion of the mean prediction across seeds shrinks with more reps
  std::ostringstream gen;
  for (int d = 0; d < 40; ++d) {
    gen << "t Q0 d" << d << ' ' << (d + 1) << ' ' << (40 - d) << " s1\n";
    gen << "t Q0 d" << (39 - d) << ' ' << (d + 1) << ' ' << (40 - d) << " s2\n";
  }
  const RunSet runs = runs_from(gen.str());
  auto dispersion = [&](std::size_t reps) {
    std::vector<double> cell;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      autojudge::SncOptions opts;
      opts.mu_percent = 40.0;
      opts.sigma = 0.1;
      opts.repetitions = reps;
      opts.pool_depth = 40;
      opts.seed = seed;
      cell.push_back(autojudge::snc(runs, opts).mean_prediction.scores.at(0, 0));
    }
    double mean = 0.0;
    for (double v : cell) mean += v;
    mean /= double(cell.size());
    double var = 0.0;
    for (double v : cell) var += (v - mean) * (v - mean);
    return var;
  };
  CHECK(dispersion(64) < dispersion(4));
}

TEST_CASE("wuc variants on the two-identical-list toy") {
  // two identical 2-doc lists; depth = 2
  const RunSet runs = runs_from(
      "t Q0 a 1 2.0 s1\n"
      "t Q0 b 2 1.0 s1\n"
      "t Q0 a 1 2.0 s2\n"
      "t Q0 b 2 1.0 s2\n",
      2);
  // V0: each doc referenced once by the other system -> 2 / (2*1) = 1
  const auto v0 = autojudge::wuc(runs, autojudge::WucVariant::V0);
  CHECK(v0.scores.at(0, 0) == doctest::Approx(1.0));
  CHECK(v0.scores.at(1, 0) == doctest::Approx(1.0));

  // V1: reference weights (2-0)/2 = 1.0 at rank 1 and (2-1)/2 = 0.5 at rank 2
  const auto v1 = autojudge::wuc(runs, autojudge::WucVariant::V1);
  CHECK(v1.scores.at(0, 0) == doctest::Approx((1.0 + 0.5) / 2.0));

  // V2: own-rank weights scale the plain counts
  const auto v2 = autojudge::wuc(runs, autojudge::WucVariant::V2);
  CHECK(v2.scores.at(0, 0) == doctest::Approx((1.0 * 1.0 + 1.0 * 0.5) / 2.0));

  // V3: both weights
  const auto v3 = autojudge::wuc(runs, autojudge::WucVariant::V3);
  CHECK(v3.scores.at(0, 0) == doctest::Approx((1.0 * 1.0 + 0.5 * 0.5) / 2.0));

  // V4: min-max normalized scores as the own weight (2.0 -> 1, 1.0 -> 0)
  const auto v4 = autojudge::wuc(runs, autojudge::WucVariant::V4);
  CHECK(v4.scores.at(0, 0) == doctest::Approx((1.0 * 1.0 + 0.5 * 0.0) / 2.0));
}

TEST_CASE("wuc single system scores zero") {
  const RunSet runs = runs_from("t Q0 a 1 2.0 only\n");
  const auto v0 = autojudge::wuc(runs, autojudge::WucVariant::V0);
  CHECK(v0.scores.at(0, 0) == 0.0);
}

TEST_CASE("wuc v4 rejects lists without usable scores") {
  // constant retrieval scores leave nothing to min-max normalize
  const RunSet runs = runs_from(
      "t Q0 a 1 1.0 s1\n"
      "t Q0 b 2 1.0 s1\n"
      "t Q0 a 1 2.0 s2\n"
      "t Q0 b 2 1.0 s2\n");
  CHECK_THROWS_AS(autojudge::wuc(runs, autojudge::WucVariant::V4), DataError);
}

TEST_CASE("aslam-savell fixtures") {
  // identical systems -> 1.0
  const RunSet same = runs_from(
      "t Q0 a 1 2.0 s1\n"
      "t Q0 b 2 1.0 s1\n"
      "t Q0 a 1 2.0 s2\n"
      "t Q0 b 2 1.0 s2\n");
  const auto eq = autojudge::aslam_savell(same);
  CHECK(eq.scores.at(0, 0) == doctest::Approx(1.0));

  // disjoint lists -> 0.0
  const RunSet disjoint = runs_from(
      "t Q0 a 1 2.0 s1\n"
      "t Q0 b 1 2.0 s2\n");
  CHECK(autojudge::aslam_savell(disjoint).scores.at(0, 0) == doctest::Approx(0.0));

  // {a,b} vs {b,c}: Jaccard 1/3 each
  const RunSet overlap = runs_from(
      "t Q0 a 1 2.0 s1\n"
      "t Q0 b 2 1.0 s1\n"
      "t Q0 b 1 2.0 s2\n"
      "t Q0 c 2 1.0 s2\n");
  const auto ov = autojudge::aslam_savell(overlap);
  CHECK(ov.scores.at(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(ov.scores.at(1, 0) == doctest::Approx(1.0 / 3.0));

  // pairwise ratio is symmetric
  CHECK(ov.scores.at(0, 0) == ov.scores.at(1, 0));

  bool empty_flag = false;
  const RunSet partial = runs_from(
      "t1 Q0 a 1 2.0 s1\n"
      "t1 Q0 a 1 2.0 s2\n"
      "t2 Q0 a 1 2.0 s1\n");
  // on t2, s2 retrieved nothing: the empty-vs-nonempty pair has union > 0
  autojudge::aslam_savell(partial, &empty_flag);
  CHECK_FALSE(empty_flag);
}

TEST_CASE("nuray-can voting rules") {
  // identical runs: order preserved, top 30% relevant
  std::ostringstream gen;
  for (int s = 0; s < 2; ++s)
    for (int d = 0; d < 10; ++d)
      gen << "t Q0 d" << char('a' + d) << ' ' << (d + 1) << ' ' << (10 - d) << " s" << s << '\n';
  const RunSet same = runs_from(gen.str());
  for (auto voting : {autojudge::NcVoting::RankPosition, autojudge::NcVoting::Borda,
                      autojudge::NcVoting::Condorcet}) {
    const auto res = autojudge::nuray_can(same, autojudge::NcSelection::Normal, voting);
    const auto& q = res.pseudo.qrels.entries().at("t");
    CHECK(q.at("da") == 1);
    CHECK(q.at("db") == 1);
    CHECK(q.at("dc") == 1);
    CHECK(q.at("dd") == 0);
    CHECK(q.at("dj") == 0);
  }

  // borda hand computation: 2 runs, 3 docs
  const RunSet toy = runs_from(
      "t Q0 a 1 3.0 s1\n"
      "t Q0 b 2 2.0 s1\n"
      "t Q0 c 3 1.0 s1\n"
      "t Q0 b 1 3.0 s2\n"
      "t Q0 a 2 2.0 s2\n"
      "t Q0 c 3 1.0 s2\n");
  // pool = {a,b,c}; borda mass: a: (3-1)+(3-2)=3, b: (3-2)+(3-1)=3, c: 0+0=0
  // tie between a and b broken by doc id -> order a, b, c; top 30% of 3 = 1
  const auto borda = autojudge::nuray_can(toy, autojudge::NcSelection::Normal,
                                          autojudge::NcVoting::Borda);
  const auto& bq = borda.pseudo.qrels.entries().at("t");
  CHECK(bq.at("a") == 1);
  CHECK(bq.at("b") == 0);
  CHECK(bq.at("c") == 0);

  // condorcet with unanimous preferences reproduces the shared order
  const auto cond = autojudge::nuray_can(same, autojudge::NcSelection::Normal,
                                         autojudge::NcVoting::Condorcet);
  CHECK(cond.pseudo.qrels.entries().at("t").at("da") == 1);

  CHECK_THROWS_AS(
      autojudge::nuray_can(runs_from("t Q0 a 1 1.0 only\n"), autojudge::NcSelection::Normal,
                           autojudge::NcVoting::Borda),
      ConfigError);
}

TEST_CASE("nuray-can bias selection keeps the runs farthest from the norm") {
  // r1 and r2 are identical (the norm); r3 and r4 retrieve disjoint docs
  const RunSet runs = runs_from(
      "t Q0 a 1 2.0 r1\n"
      "t Q0 b 2 1.0 r1\n"
      "t Q0 a 1 2.0 r2\n"
      "t Q0 b 2 1.0 r2\n"
      "t Q0 x 1 2.0 r3\n"
      "t Q0 y 2 1.0 r3\n"
      "t Q0 p 1 2.0 r4\n"
      "t Q0 q 2 1.0 r4\n");
  const auto res = autojudge::nuray_can(runs, autojudge::NcSelection::Bias,
                                        autojudge::NcVoting::Borda);
  // only the outlier runs vote, so the pseudo-qrels cover their docs only
  const auto& q = res.pseudo.qrels.entries().at("t");
  CHECK(q.count("x") == 1);
  CHECK(q.count("p") == 1);
  CHECK(q.count("a") == 0);
  CHECK(q.count("b") == 0);
}

TEST_CASE("borda mass ignores a run that retrieves nothing") {
  // the empty run places every pool doc at the bottom: zero mass for all
  const RunSet base = runs_from(
      "t Q0 a 1 3.0 s1\n"
      "t Q0 b 2 2.0 s1\n"
      "t Q0 a 1 3.0 s2\n"
      "t Q0 b 2 2.0 s2\n");
  const RunSet with_empty = runs_from(
      "t Q0 a 1 3.0 s1\n"
      "t Q0 b 2 2.0 s1\n"
      "t Q0 a 1 3.0 s2\n"
      "t Q0 b 2 2.0 s2\n"
      "u Q0 x 1 1.0 s3\n");  // s3 active on another topic only
  const auto r1 = autojudge::nuray_can(base, autojudge::NcSelection::Normal,
                                       autojudge::NcVoting::Borda);
  const auto r2 = autojudge::nuray_can(with_empty, autojudge::NcSelection::Normal,
                                       autojudge::NcVoting::Borda);
  CHECK(r1.pseudo.qrels.entries().at("t") == r2.pseudo.qrels.entries().at("t"));
}

TEST_CASE("spoerri overlap percentages") {
  // five identical runs: S% = 0, A% = 100 -> scores -0 and +100
  std::ostringstream gen;
  for (int s = 0; s < 5; ++s)
    for (int d = 0; d < 4; ++d)
      gen << "t Q0 d" << d << ' ' << (d + 1) << ' ' << (4 - d) << " s" << s << '\n';
  const RunSet same = runs_from(gen.str());
  Rng rng(3);
  const auto s_same = autojudge::spoerri(same, autojudge::SpoMeasure::Single, 1000, {}, rng);
  const auto a_same = autojudge::spoerri(same, autojudge::SpoMeasure::AllFive, 1000, {}, rng);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(s_same.scores.at(i, 0) == doctest::Approx(0.0));
    CHECK(a_same.scores.at(i, 0) == doctest::Approx(100.0));
  }

  // five pairwise-disjoint runs: S% = 100 (negated), A% = 0
  std::ostringstream dis;
  for (int s = 0; s < 5; ++s)
    for (int d = 0; d < 4; ++d)
      dis << "t Q0 r" << s << "d" << d << ' ' << (d + 1) << ' ' << (4 - d) << " s" << s << '\n';
  const RunSet disjoint = runs_from(dis.str());
  const auto s_dis = autojudge::spoerri(disjoint, autojudge::SpoMeasure::Single, 1000, {}, rng);
  const auto a_dis = autojudge::spoerri(disjoint, autojudge::SpoMeasure::AllFive, 1000, {}, rng);
  const auto sa_dis =
      autojudge::spoerri(disjoint, autojudge::SpoMeasure::SingleMinusAllFive, 1000, {}, rng);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(s_dis.scores.at(i, 0) == doctest::Approx(-100.0));
    CHECK(a_dis.scores.at(i, 0) == doctest::Approx(0.0));
    CHECK(sa_dis.scores.at(i, 0) == doctest::Approx(-100.0));
  }

  // one shared doc among five 2-doc lists: the sharer counts differ
  std::ostringstream mixed;
  for (int s = 0; s < 5; ++s) {
    mixed << "t Q0 shared 1 2.0 s" << s << '\n';
    mixed << "t Q0 own" << s << " 2 1.0 s" << s << '\n';
  }
  const RunSet mix = runs_from(mixed.str());
  const auto s_mix = autojudge::spoerri(mix, autojudge::SpoMeasure::Single, 1000, {}, rng);
  const auto a_mix = autojudge::spoerri(mix, autojudge::SpoMeasure::AllFive, 1000, {}, rng);
  // each run: of its 2 docs, 'own' is retrieved by nobody else (50%),
  // 'shared' by all five (50%)
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(s_mix.scores.at(i, 0) == doctest::Approx(-50.0));
    CHECK(a_mix.scores.at(i, 0) == doctest::Approx(50.0));
  }

  CHECK_THROWS_AS(
      autojudge::spoerri(runs_from("t Q0 a 1 1.0 s1\nt Q0 a 1 1.0 s2\n"),
                         autojudge::SpoMeasure::Single, 1000, {}, rng),
      ConfigError);
}

TEST_CASE("sakai-lin win proportions") {
  // two runs, two docs, unanimous order: win rates 1.0 and 0.0
  const RunSet toy = runs_from(
      "t Q0 a 1 2.0 s1\n"
      "t Q0 b 2 1.0 s1\n"
      "t Q0 a 1 2.0 s2\n"
      "t Q0 b 2 1.0 s2\n");
  const auto res = autojudge::sakai_lin(toy);
  const auto& q = res.pseudo.qrels.entries().at("t");
  CHECK(q.at("a") == 1);  // top 30% of 2 docs = 1 doc
  CHECK(q.at("b") == 0);

  // identical runs give identical predicted scores across systems
  CHECK(res.prediction.scores.at(0, 0) == res.prediction.scores.at(1, 0));

  // document ordering matches condorcet voting when preferences are unanimous
  std::ostringstream gen;
  for (int s = 0; s < 3; ++s)
    for (int d = 0; d < 6; ++d)
      gen << "t Q0 d" << d << ' ' << (d + 1) << ' ' << (6 - d) << " s" << s << '\n';
  const RunSet same = runs_from(gen.str());
  const auto sl = autojudge::sakai_lin(same);
  const auto nc = autojudge::nuray_can(same, autojudge::NcSelection::Normal,
                                       autojudge::NcVoting::Condorcet);
  CHECK(sl.pseudo.qrels.entries().at("t") == nc.pseudo.qrels.entries().at("t"));
}

TEST_CASE("minmax normalization and order preservation") {
  autojudge::PredictedMatrix p;
  p.scores = ApMatrix({"s1", "s2", "s3"}, {"t"});
  p.scores.at(0, 0) = 0.0;
  p.scores.at(1, 0) = 5.0;
  p.scores.at(2, 0) = 10.0;
  const auto n = autojudge::normalize_minmax01(p);
  CHECK(n.scores.at(0, 0) == doctest::Approx(0.0));
  CHECK(n.scores.at(1, 0) == doctest::Approx(0.5));
  CHECK(n.scores.at(2, 0) == doctest::Approx(1.0));
  CHECK(n.normalization == "minmax01");

  // already [0,1] with touched endpoints is the identity
  autojudge::PredictedMatrix unit;
  unit.scores = ApMatrix({"s1", "s2"}, {"t"});
  unit.scores.at(0, 0) = 0.0;
  unit.scores.at(1, 0) = 1.0;
  const auto same = autojudge::normalize_minmax01(unit);
  CHECK(same.scores.values() == unit.scores.values());

  // argmax preserved on random data
  Rng rng(5);
  autojudge::PredictedMatrix r;
  r.scores = ApMatrix({"a", "b", "c", "d"}, {"t1", "t2"});
  for (double& v : r.scores.values()) v = rng.next_double() * 7.0 - 3.0;
  const auto rn = autojudge::normalize_minmax01(r);
  const auto argmax = [](const std::vector<double>& v) {
    return std::max_element(v.begin(), v.end()) - v.begin();
  };
  CHECK(argmax(r.scores.values()) == argmax(rn.scores.values()));

  autojudge::PredictedMatrix flat;
  flat.scores = ApMatrix({"s"}, {"t"});
  flat.scores.at(0, 0) = 0.4;
  CHECK_THROWS_AS(autojudge::normalize_minmax01(flat), NumericError);
}

TEST_CASE("system permutation permutes prediction rows") {
  // same lists under swapped tags: rows swap with them
  const RunSet ab = runs_from(
      "t Q0 a 1 2.0 alpha\n"
      "t Q0 b 2 1.0 alpha\n"
      "t Q0 b 1 2.0 beta\n"
      "t Q0 c 2 1.0 beta\n");
  const RunSet ba = runs_from(
      "t Q0 a 1 2.0 beta\n"
      "t Q0 b 2 1.0 beta\n"
      "t Q0 b 1 2.0 alpha\n"
      "t Q0 c 2 1.0 alpha\n");
  const auto p1 = autojudge::aslam_savell(ab);
  const auto p2 = autojudge::aslam_savell(ba);
  // alpha in p1 holds list {a,b}; in p2 alpha holds {b,c}
  CHECK(p1.scores.at(0, 0) == p2.scores.at(1, 0));
  CHECK(p1.scores.at(1, 0) == p2.scores.at(0, 0));
}

TEST_CASE("method registry excludes WUCv4 from fusion defaults") {
  const auto& reg = autojudge::method_registry();
  CHECK(reg.size() == 17);
  std::size_t fusion_default = 0;
  for (const auto& m : reg) {
    if (m.name == "WUCv4") CHECK_FALSE(m.fusion_default);
    if (m.fusion_default) ++fusion_default;
  }
  CHECK(fusion_default == 16);
}
