#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace irlab {

// Error taxonomy mirrored by the CLI exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : DataError {
  using DataError::DataError;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One line of a TREC run file.
struct RunRecord {
  std::string topic_id;
  std::string doc_id;
  int rank = 0;
  double score = 0.0;
  std::string run_tag;
};

// Ranked document lists per (system, topic), truncated to a fixed depth.
// Lists are canonical: descending score, lexicographic doc-id tie-break.
class RunSet {
 public:
  struct Entry {
    std::string doc_id;
    double score;
  };

  std::vector<std::string> systems;  // ordered run tags
  std::vector<std::string> topics;   // ordered topic ids
  std::size_t depth = 1000;

  // key: system index * topics.size() + topic index
  const std::vector<Entry>& list(std::size_t sys, std::size_t topic) const {
    return lists_[sys * topics.size() + topic];
  }
  std::vector<Entry>& list(std::size_t sys, std::size_t topic) {
    return lists_[sys * topics.size() + topic];
  }
  void resize_lists() { lists_.assign(systems.size() * topics.size(), {}); }

  std::size_t system_index(const std::string& tag) const {
    for (std::size_t i = 0; i < systems.size(); ++i)
      if (systems[i] == tag) return i;
    throw DataError("unknown system tag: " + tag);
  }
  std::size_t topic_index(const std::string& id) const {
    for (std::size_t i = 0; i < topics.size(); ++i)
      if (topics[i] == id) return i;
    throw DataError("unknown topic id: " + id);
  }

 private:
  std::vector<std::vector<Entry>> lists_;
};

// Relevance judgements: (topic, doc) -> integer grade.
class Qrels {
 public:
  void set(const std::string& topic, const std::string& doc, int grade) {
    auto [it, inserted] = entries_[topic].emplace(doc, grade);
    if (!inserted && it->second != grade)
      throw DataError("conflicting qrels grades for (" + topic + ", " + doc + ")");
    if (!has_scale_) {
      min_grade_ = max_grade_ = grade;
      has_scale_ = true;
    } else {
      if (grade < min_grade_) min_grade_ = grade;
      if (grade > max_grade_) max_grade_ = grade;
    }
  }

  std::optional<int> grade(const std::string& topic, const std::string& doc) const {
    auto t = entries_.find(topic);
    if (t == entries_.end()) return std::nullopt;
    auto d = t->second.find(doc);
    if (d == t->second.end()) return std::nullopt;
    return d->second;
  }

  const std::map<std::string, std::map<std::string, int>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  bool scale_defined() const { return has_scale_; }
  int min_grade() const { return min_grade_; }
  int max_grade() const { return max_grade_; }
  void declare_scale(int lo, int hi) {
    min_grade_ = lo;
    max_grade_ = hi;
    has_scale_ = true;
  }

  std::vector<std::string> topic_ids() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [t, _] : entries_) out.push_back(t);
    return out;
  }

 private:
  std::map<std::string, std::map<std::string, int>> entries_;
  bool has_scale_ = false;
  int min_grade_ = 0;
  int max_grade_ = 0;
};

// Dense systems x topics effectiveness table. Row-major storage.
class ApMatrix {
 public:
  ApMatrix() = default;
  ApMatrix(std::vector<std::string> systems, std::vector<std::string> topics)
      : systems_(std::move(systems)),
        topics_(std::move(topics)),
        values_(systems_.size() * topics_.size(), 0.0) {}

  std::size_t rows() const { return systems_.size(); }
  std::size_t cols() const { return topics_.size(); }
  double& at(std::size_t i, std::size_t j) { return values_[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return values_[i * cols() + j]; }
  const std::vector<std::string>& systems() const { return systems_; }
  const std::vector<std::string>& topics() const { return topics_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  std::vector<double> row(std::size_t i) const {
    return {values_.begin() + static_cast<long>(i * cols()),
            values_.begin() + static_cast<long>((i + 1) * cols())};
  }
  std::vector<double> col(std::size_t j) const {
    std::vector<double> c(rows());
    for (std::size_t i = 0; i < rows(); ++i) c[i] = at(i, j);
    return c;
  }

  bool same_shape(const ApMatrix& o) const {
    return systems_ == o.systems_ && topics_ == o.topics_;
  }

 private:
  std::vector<std::string> systems_;
  std::vector<std::string> topics_;
  std::vector<double> values_;
};

// Labelled value vector (systems for the MAP family, topics for AAP).
struct EffVector {
  std::vector<std::string> labels;
  std::vector<double> values;
};

}  // namespace irlab
