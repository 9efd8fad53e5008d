#include "irlab/collection.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "irlab/effectiveness.hpp"

namespace irlab::io {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_int(const std::string& s, long& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_real(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

RunSet parse_runs(std::istream& in, std::size_t depth) {
  if (depth < 1) throw ConfigError("run depth must be >= 1");

  struct Key {
    std::string tag, topic;
    bool operator<(const Key& o) const {
      return tag != o.tag ? tag < o.tag : topic < o.topic;
    }
  };
  std::map<Key, std::vector<RunSet::Entry>> raw;
  std::map<Key, std::set<std::string>> seen_docs;
  std::set<std::string> tag_order;
  std::set<std::string> topic_order;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto cols = split_ws(line);
    if (cols.empty()) continue;
    if (cols.size() != 6)
      throw ParseError("run line " + std::to_string(lineno) + ": expected 6 columns, got " +
                       std::to_string(cols.size()));
    long rank = 0;
    double score = 0.0;
    if (!parse_int(cols[3], rank) || rank < 1)
      throw ParseError("run line " + std::to_string(lineno) + ": bad rank '" + cols[3] + "'");
    if (!parse_real(cols[4], score))
      throw ParseError("run line " + std::to_string(lineno) + ": bad score '" + cols[4] + "'");
    Key key{cols[5], cols[0]};
    if (!seen_docs[key].insert(cols[2]).second)
      throw ParseError("run line " + std::to_string(lineno) + ": duplicate document '" + cols[2] +
                       "' for (" + cols[5] + ", " + cols[0] + ")");
    raw[key].push_back({cols[2], score});
    tag_order.insert(cols[5]);
    topic_order.insert(cols[0]);
  }

  RunSet rs;
  rs.depth = depth;
  rs.systems.assign(tag_order.begin(), tag_order.end());
  rs.topics.assign(topic_order.begin(), topic_order.end());
  rs.resize_lists();
  for (auto& [key, entries] : raw) {
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.doc_id < b.doc_id;
    });
    if (entries.size() > depth) entries.resize(depth);
    rs.list(rs.system_index(key.tag), rs.topic_index(key.topic)) = std::move(entries);
  }
  return rs;
}

RunSet parse_runs_file(const std::string& path, std::size_t depth) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open run file: " + path);
  return parse_runs(f, depth);
}

Qrels parse_qrels(std::istream& in) {
  Qrels q;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto cols = split_ws(line);
    if (cols.empty()) continue;
    if (cols.size() != 4)
      throw ParseError("qrels line " + std::to_string(lineno) + ": expected 4 columns, got " +
                       std::to_string(cols.size()));
    long grade = 0;
    if (!parse_int(cols[3], grade))
      throw ParseError("qrels line " + std::to_string(lineno) + ": non-integer grade '" + cols[3] +
                       "'");
    try {
      q.set(cols[0], cols[2], static_cast<int>(grade));
    } catch (const DataError& e) {
      throw ParseError("qrels line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return q;
}

Qrels parse_qrels_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open qrels file: " + path);
  return parse_qrels(f);
}

void write_runs(std::ostream& out, const RunSet& runs) {
  for (std::size_t s = 0; s < runs.systems.size(); ++s) {
    for (std::size_t t = 0; t < runs.topics.size(); ++t) {
      const auto& list = runs.list(s, t);
      for (std::size_t r = 0; r < list.size(); ++r) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", list[r].score);
        out << runs.topics[t] << " Q0 " << list[r].doc_id << ' ' << (r + 1) << ' ' << buf << ' '
            << runs.systems[s] << '\n';
      }
    }
  }
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
  for (const auto& [topic, docs] : qrels.entries())
    for (const auto& [doc, grade] : docs) out << topic << " 0 " << doc << ' ' << grade << '\n';
}

Qrels binarize(const Qrels& q, const std::set<int>& relevant_levels) {
  if (relevant_levels.empty()) throw ConfigError("binarize: empty relevant level set");
  Qrels out;
  for (const auto& [topic, docs] : q.entries())
    for (const auto& [doc, grade] : docs)
      out.set(topic, doc, relevant_levels.count(grade) ? 1 : 0);
  out.declare_scale(0, 1);
  return out;
}

Pool build_pool(const RunSet& runs, std::size_t pool_depth) {
  Pool pool;
  for (std::size_t t = 0; t < runs.topics.size(); ++t) {
    auto& topic_docs = pool.docs[runs.topics[t]];
    for (std::size_t s = 0; s < runs.systems.size(); ++s) {
      const auto& list = runs.list(s, t);
      const std::size_t k = std::min(pool_depth, list.size());
      for (std::size_t r = 0; r < k; ++r) topic_docs[list[r].doc_id] += 1;
    }
  }
  return pool;
}

MetricDescriptor parse_metric(const std::string& text) {
  MetricDescriptor m;
  std::string name = text;
  auto at = text.find('@');
  if (at != std::string::npos) {
    name = text.substr(0, at);
    long k = 0;
    if (!parse_int(text.substr(at + 1), k) || k < 1)
      throw ConfigError("bad metric cutoff in '" + text + "'");
    m.cutoff = static_cast<std::size_t>(k);
  }
  std::string upper;
  for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (upper == "AP" || upper == "MAP")
    m.kind = MetricKind::AP;
  else if (upper == "NDCG")
    m.kind = MetricKind::NDCG;
  else
    throw ConfigError("unknown metric '" + text + "' (expected AP@k or NDCG@k)");
  return m;
}

ApMatrix build_ap_matrix(const RunSet& runs, const Qrels& qrels, const MetricDescriptor& metric,
                         std::vector<std::string>* excluded_topics) {
  if (qrels.empty()) throw DataError("build_ap_matrix: empty qrels");

  std::vector<std::string> kept;
  for (const auto& topic : runs.topics) {
    bool usable = false;
    auto it = qrels.entries().find(topic);
    if (it != qrels.entries().end())
      for (const auto& [_, grade] : it->second)
        if (grade > 0) {
          usable = true;
          break;
        }
    if (usable)
      kept.push_back(topic);
    else if (excluded_topics)
      excluded_topics->push_back(topic);
  }
  if (kept.empty()) throw DataError("build_ap_matrix: no topic has a relevant document");

  ApMatrix out(runs.systems, kept);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const std::size_t tj = runs.topic_index(kept[j]);
    for (std::size_t i = 0; i < runs.systems.size(); ++i) {
      const auto& list = runs.list(i, tj);
      std::vector<std::string> docs(list.size());
      for (std::size_t r = 0; r < list.size(); ++r) docs[r] = list[r].doc_id;
      double v = 0.0;
      if (metric.kind == MetricKind::AP)
        v = eff::average_precision(docs, qrels, kept[j], metric.cutoff);
      else
        v = eff::ndcg(docs, qrels, kept[j], metric.cutoff, metric.gain == GainKind::Exponential);
      out.at(i, j) = v;
    }
  }
  return out;
}

}  // namespace irlab::io
