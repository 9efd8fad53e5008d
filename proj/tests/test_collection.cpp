#include <doctest.h>

#include <sstream>

#include "irlab/collection.hpp"
#include "irlab/rng.hpp"

using namespace irlab;

TEST_CASE("run parsing maps fields and canonicalizes order") {
  std::istringstream in(
      "401 Q0 FBIS3-1 1 12.5 sysA\n"
      "401 Q0 B 2 7.0 sysA\n"
      "401 Q0 A 3 7.0 sysA\n");
  const RunSet rs = io::parse_runs(in, 1000);
  REQUIRE(rs.systems == std::vector<std::string>{"sysA"});
  REQUIRE(rs.topics == std::vector<std::string>{"401"});
  const auto& list = rs.list(0, 0);
  REQUIRE(list.size() == 3);
  CHECK(list[0].doc_id == "FBIS3-1");
  CHECK(list[0].score == 12.5);
  // equal scores: lexicographic doc tie-break
  CHECK(list[1].doc_id == "A");
  CHECK(list[2].doc_id == "B");
}

TEST_CASE("run parsing rejects malformed lines with the line number") {
  std::istringstream five_cols("401 Q0 FBIS3-1 1 sysA\n");
  CHECK_THROWS_WITH_AS(io::parse_runs(five_cols), doctest::Contains("line 1"), ParseError);

  std::istringstream bad_rank("401 Q0 doc x 1.0 sysA\n");
  CHECK_THROWS_AS(io::parse_runs(bad_rank), ParseError);

  std::istringstream dup(
      "401 Q0 doc 1 2.0 sysA\n"
      "401 Q0 doc 2 1.0 sysA\n");
  CHECK_THROWS_AS(io::parse_runs(dup), ParseError);
}

TEST_CASE("run depth truncation") {
  std::istringstream in(
      "401 Q0 a 1 3.0 s\n"
      "401 Q0 b 2 2.0 s\n"
      "401 Q0 c 3 1.0 s\n");
  const RunSet rs = io::parse_runs(in, 2);
  CHECK(rs.list(0, 0).size() == 2);
}

TEST_CASE("qrels parsing") {
  std::istringstream in("401 0 FBIS3-1 1\n");
  const Qrels q = io::parse_qrels(in);
  CHECK(q.grade("401", "FBIS3-1") == 1);

  std::istringstream empty("");
  const Qrels qe = io::parse_qrels(empty);
  CHECK(qe.empty());
  CHECK_FALSE(qe.scale_defined());

  std::istringstream conflict(
      "401 0 d 1\n"
      "401 0 d 2\n");
  CHECK_THROWS_AS(io::parse_qrels(conflict), ParseError);

  std::istringstream bad_grade("401 0 d x\n");
  CHECK_THROWS_AS(io::parse_qrels(bad_grade), ParseError);
}

TEST_CASE("run round-trip through serialization is a fixed point") {
  Rng rng(7);
  std::ostringstream gen;
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 4; ++t)
      for (int r = 0; r < 20; ++r)
        gen << "t" << t << " Q0 d" << rng.next_below(100) << "x" << s << "x" << t << "x" << r
            << ' ' << (r + 1) << ' ' << rng.next_double() << " sys" << s << '\n';
  std::istringstream first(gen.str());
  const RunSet a = io::parse_runs(first, 50);
  std::ostringstream ser;
  io::write_runs(ser, a);
  std::istringstream second(ser.str());
  const RunSet b = io::parse_runs(second, 50);
  std::ostringstream ser2;
  io::write_runs(ser2, b);
  CHECK(ser.str() == ser2.str());
}

TEST_CASE("binarize maps levels like the WEB14 scheme") {
  Qrels q;
  q.set("t", "a", -2);
  q.set("t", "b", 0);
  q.set("t", "c", 1);
  q.set("t", "d", 2);
  q.set("t", "e", 3);
  const Qrels b = io::binarize(q, {1, 2, 3});
  CHECK(b.grade("t", "a") == 0);
  CHECK(b.grade("t", "b") == 0);
  CHECK(b.grade("t", "c") == 1);
  CHECK(b.grade("t", "d") == 1);
  CHECK(b.grade("t", "e") == 1);
  CHECK(b.min_grade() == 0);
  CHECK(b.max_grade() == 1);

  // rigid variant: only the top level maps to relevant
  Qrels g;
  g.set("t", "a", 0);
  g.set("t", "b", 1);
  g.set("t", "c", 3);
  const Qrels rigid = io::binarize(g, {3});
  CHECK(rigid.grade("t", "b") == 0);
  CHECK(rigid.grade("t", "c") == 1);

  // already binary + {1} is the identity
  const Qrels same = io::binarize(b, {1});
  for (const auto& [topic, docs] : b.entries())
    for (const auto& [doc, grade] : docs) CHECK(same.grade(topic, doc) == grade);

  CHECK_THROWS_AS(io::binarize(q, {}), ConfigError);
}

TEST_CASE("pool union and multiset counts") {
  std::istringstream in(
      "t Q0 a 1 2.0 s1\n"
      "t Q0 b 2 1.0 s1\n"
      "t Q0 b 1 2.0 s2\n"
      "t Q0 c 2 1.0 s2\n");
  const RunSet rs = io::parse_runs(in);
  const io::Pool pool = io::build_pool(rs, 2);
  const auto& docs = pool.docs.at("t");
  REQUIRE(docs.size() == 3);
  CHECK(docs.at("a") == 1);
  CHECK(docs.at("b") == 2);
  CHECK(docs.at("c") == 1);

  // single system: the pool is its own top-k
  std::istringstream single(
      "t Q0 a 1 2.0 s1\n"
      "t Q0 b 2 1.0 s1\n");
  const io::Pool p2 = io::build_pool(io::parse_runs(single), 2);
  CHECK(p2.docs.at("t").size() == 2);
}

TEST_CASE("pool is monotone in depth") {
  Rng rng(11);
  std::ostringstream gen;
  for (int s = 0; s < 4; ++s)
    for (int r = 0; r < 30; ++r)
      gen << "t Q0 d" << rng.next_below(60) << "_" << s << "_" << r << ' ' << (r + 1) << ' '
          << (30 - r) << " sys" << s << '\n';
  std::istringstream in(gen.str());
  const RunSet rs = io::parse_runs(in);
  const auto shallow = io::build_pool(rs, 5).docs.at("t");
  const auto deep = io::build_pool(rs, 20).docs.at("t");
  for (const auto& [doc, _] : shallow) CHECK(deep.count(doc) == 1);
}

TEST_CASE("ap matrix excludes zero-relevant topics and permutes with input") {
  std::istringstream in(
      "1 Q0 a 1 2.0 s1\n"
      "1 Q0 b 2 1.0 s1\n"
      "2 Q0 a 1 2.0 s1\n"
      "1 Q0 b 1 2.0 s2\n"
      "2 Q0 a 1 2.0 s2\n");
  const RunSet rs = io::parse_runs(in);
  Qrels q;
  q.set("1", "a", 1);
  q.set("1", "b", 0);
  q.set("2", "a", 0);  // topic 2 has no relevant document
  std::vector<std::string> excluded;
  const ApMatrix m = io::build_ap_matrix(rs, q, io::parse_metric("AP@1000"), &excluded);
  CHECK(m.cols() == 1);
  REQUIRE(excluded.size() == 1);
  CHECK(excluded[0] == "2");
  CHECK(m.at(0, 0) == doctest::Approx(1.0));  // s1 retrieves a first
  CHECK(m.at(1, 0) == doctest::Approx(0.0));  // s2 misses it

  // identical systems produce identical rows
  std::istringstream twin(
      "1 Q0 a 1 2.0 sA\n"
      "1 Q0 a 1 2.0 sB\n");
  const RunSet t2 = io::parse_runs(twin);
  const ApMatrix m2 = io::build_ap_matrix(t2, q, io::parse_metric("AP@1000"));
  CHECK(m2.at(0, 0) == m2.at(1, 0));
}

TEST_CASE("input line order does not change the matrix") {
  const std::string lines[] = {
      "1 Q0 a 1 2.0 sB\n", "1 Q0 b 2 1.0 sB\n", "1 Q0 b 1 2.0 sA\n", "1 Q0 a 2 1.0 sA\n"};
  std::string fwd, rev;
  for (const auto& l : lines) fwd += l;
  for (auto it = std::rbegin(lines); it != std::rend(lines); ++it) rev += *it;
  Qrels q;
  q.set("1", "a", 1);
  q.set("1", "b", 0);
  std::istringstream in1(fwd), in2(rev);
  const ApMatrix m1 = io::build_ap_matrix(io::parse_runs(in1), q, io::parse_metric("AP@1000"));
  const ApMatrix m2 = io::build_ap_matrix(io::parse_runs(in2), q, io::parse_metric("AP@1000"));
  CHECK(m1.systems() == m2.systems());
  CHECK(m1.values() == m2.values());
}

TEST_CASE("matrix values stay in the unit interval") {
  Rng rng(3);
  std::ostringstream gen;
  for (int s = 0; s < 5; ++s)
    for (int t = 0; t < 3; ++t)
      for (int r = 0; r < 10; ++r)
        gen << "t" << t << " Q0 d" << rng.next_below(30) << "_" << s << "_" << r << ' ' << (r + 1)
            << ' ' << rng.next_double() << " sys" << s << '\n';
  std::istringstream in(gen.str());
  const RunSet rs = io::parse_runs(in);
  Qrels q;
  for (int t = 0; t < 3; ++t)
    for (int d = 0; d < 30; ++d) {
      for (int s = 0; s < 5; ++s)
        for (int r = 0; r < 10; ++r) {
          // judge a scattering of the generated ids
        }
      q.set("t" + std::to_string(t), "d" + std::to_string(d) + "_0_" + std::to_string(d % 10),
            d % 3 == 0 ? 1 : 0);
    }
  std::vector<std::string> excluded;
  const ApMatrix m = io::build_ap_matrix(rs, q, io::parse_metric("AP@1000"), &excluded);
  for (double v : m.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}
