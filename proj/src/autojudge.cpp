#include "irlab/autojudge.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "irlab/effectiveness.hpp"

namespace irlab::autojudge {

std::pair<double, double> estimate_pool_params(std::size_t num_runs) {
  if (num_runs < 1) throw ConfigError("estimate_pool_params: need at least one run");
  double mu = 1133.3 / static_cast<double>(num_runs) - 5.1841;
  if (mu <= 0.0) mu = 0.1;
  const double sigma = 0.0037 * mu + 0.0242;
  return {mu, sigma};
}

namespace {

ApMatrix empty_like(const RunSet& runs) { return ApMatrix(runs.systems, runs.topics); }

// AP of every system list on one topic against binary qrels
void fill_topic_ap(const RunSet& runs, std::size_t topic_idx, const Qrels& qrels, std::size_t cutoff,
                   ApMatrix& out) {
  const std::string& topic = runs.topics[topic_idx];
  for (std::size_t s = 0; s < runs.systems.size(); ++s) {
    const auto& list = runs.list(s, topic_idx);
    std::vector<std::string> docs(list.size());
    for (std::size_t r = 0; r < list.size(); ++r) docs[r] = list[r].doc_id;
    out.at(s, topic_idx) = eff::average_precision(docs, qrels, topic, cutoff);
  }
}

}  // namespace

SncResult snc(const RunSet& runs, const SncOptions& opts) {
  if (!(opts.mu_percent > 0.0 && opts.mu_percent <= 100.0))
    throw ConfigError("snc: mu must be in (0,100]");
  if (!(opts.sigma >= 0.0)) throw ConfigError("snc: sigma must be >= 0");
  if (opts.repetitions < 1) throw ConfigError("snc: need at least one repetition");

  // sampling universe per topic: judged docs, or the run pool (optionally
  // with duplicate multiplicity)
  std::map<std::string, std::vector<std::string>> universe;
  if (opts.sample_from_qrels) {
    for (const auto& [topic, docs] : opts.sample_from_qrels->entries()) {
      auto& u = universe[topic];
      for (const auto& [doc, _] : docs) u.push_back(doc);
    }
  } else {
    const io::Pool pool = io::build_pool(runs, opts.pool_depth);
    for (const auto& [topic, docs] : pool.docs) {
      auto& u = universe[topic];
      for (const auto& [doc, count] : docs) {
        const int times = opts.use_duplicates ? count : 1;
        for (int k = 0; k < times; ++k) u.push_back(doc);
      }
    }
  }

  SncResult result;
  ApMatrix sum = empty_like(runs);
  for (std::size_t rep = 0; rep < opts.repetitions; ++rep) {
    Rng rep_rng = Rng(opts.seed).fork(0x53C0, rep);
    Qrels pseudo;
    for (std::size_t t = 0; t < runs.topics.size(); ++t) {
      const std::string& topic = runs.topics[t];
      auto it = universe.find(topic);
      if (it == universe.end() || it->second.empty()) {
        if (rep == 0) result.skipped_topics.push_back(topic);
        continue;
      }
      Rng rng = rep_rng.fork(0x701C, t);
      double mu = opts.mu_percent;
      if (opts.per_topic_mu) {
        auto pm = opts.per_topic_mu->find(topic);
        if (pm != opts.per_topic_mu->end()) mu = pm->second;
      }
      const double fraction =
          std::clamp(mu / 100.0 + opts.sigma * rng.next_gaussian(), 0.0, 1.0);
      const auto& docs = it->second;
      const std::size_t take =
          static_cast<std::size_t>(fraction * static_cast<double>(docs.size()));
      std::set<std::string> relevant;
      for (std::size_t idx : rng.sample_without_replacement(docs.size(), take))
        relevant.insert(docs[idx]);
      // mark the whole universe judged: sampled docs relevant, rest not
      std::set<std::string> distinct(docs.begin(), docs.end());
      for (const auto& doc : distinct) pseudo.set(topic, doc, relevant.count(doc) ? 1 : 0);
    }
    ApMatrix rep_scores = empty_like(runs);
    for (std::size_t t = 0; t < runs.topics.size(); ++t) {
      const std::string& topic = runs.topics[t];
      bool any_rel = false;
      auto e = pseudo.entries().find(topic);
      if (e != pseudo.entries().end())
        for (const auto& [_, g] : e->second)
          if (g > 0) any_rel = true;
      if (!any_rel) continue;  // degenerate draw, contributes zero
      fill_topic_ap(runs, t, pseudo, opts.ap_cutoff, rep_scores);
    }
    for (std::size_t i = 0; i < sum.values().size(); ++i)
      sum.values()[i] += rep_scores.values()[i];
    result.pseudo_qrels.push_back({std::move(pseudo), "SNC", opts.seed, rep});
  }
  for (double& v : sum.values()) v /= static_cast<double>(opts.repetitions);
  result.mean_prediction = {std::move(sum),
                            opts.use_duplicates ? "SNC-dups" : "SNC", "raw", {}};
  return result;
}

PredictedMatrix wuc(const RunSet& runs, WucVariant variant) {
  const std::size_t m = runs.systems.size();
  ApMatrix scores = empty_like(runs);
  const double depth = static_cast<double>(runs.depth);

  for (std::size_t t = 0; t < runs.topics.size(); ++t) {
    // doc -> (reference count, rank-weighted reference mass) over all systems
    std::map<std::string, std::pair<double, double>> refs;
    for (std::size_t s = 0; s < m; ++s) {
      const auto& list = runs.list(s, t);
      for (std::size_t r = 0; r < list.size(); ++r) {
        auto& e = refs[list[r].doc_id];
        e.first += 1.0;
        e.second += (depth - static_cast<double>(r)) / depth;  // rank r+1
      }
    }
    for (std::size_t s = 0; s < m; ++s) {
      const auto& list = runs.list(s, t);
      if (list.empty() || m < 2) continue;

      double smin = 0.0, smax = 0.0;
      if (variant == WucVariant::V4) {
        smin = smax = list.front().score;
        for (const auto& e : list) {
          smin = std::min(smin, e.score);
          smax = std::max(smax, e.score);
        }
        if (smax == smin)
          throw DataError("wuc V4: run " + runs.systems[s] + " has constant scores on topic " +
                          runs.topics[t]);
      }

      double total = 0.0;
      for (std::size_t r = 0; r < list.size(); ++r) {
        const auto& e = refs.at(list[r].doc_id);
        const double own_rank_weight = (depth - static_cast<double>(r)) / depth;
        // exclude the system's own occurrence from the reference mass
        const double ref_count = e.first - 1.0;
        const double ref_rank_mass = e.second - own_rank_weight;
        double contribution = 0.0;
        switch (variant) {
          case WucVariant::V0: contribution = ref_count; break;
          case WucVariant::V1: contribution = ref_rank_mass; break;
          case WucVariant::V2: contribution = ref_count * own_rank_weight; break;
          case WucVariant::V3: contribution = ref_rank_mass * own_rank_weight; break;
          case WucVariant::V4: {
            const double norm_score = (list[r].score - smin) / (smax - smin);
            contribution = ref_rank_mass * norm_score;
            break;
          }
        }
        total += contribution;
      }
      scores.at(s, t) =
          total / (static_cast<double>(list.size()) * static_cast<double>(m - 1));
    }
  }
  static const char* names[] = {"WUCv0", "WUCv1", "WUCv2", "WUCv3", "WUCv4"};
  return {std::move(scores), names[static_cast<int>(variant)], "raw", {}};
}

PredictedMatrix aslam_savell(const RunSet& runs, bool* empty_pair_flag) {
  const std::size_t m = runs.systems.size();
  if (m < 2) throw ConfigError("aslam_savell: need at least 2 systems");
  ApMatrix scores = empty_like(runs);
  if (empty_pair_flag) *empty_pair_flag = false;

  for (std::size_t t = 0; t < runs.topics.size(); ++t) {
    std::vector<std::set<std::string>> docsets(m);
    for (std::size_t s = 0; s < m; ++s)
      for (const auto& e : runs.list(s, t)) docsets[s].insert(e.doc_id);
    for (std::size_t s = 0; s < m; ++s) {
      double sum = 0.0;
      for (std::size_t o = 0; o < m; ++o) {
        if (o == s) continue;
        std::size_t inter = 0;
        for (const auto& d : docsets[s])
          if (docsets[o].count(d)) ++inter;
        const std::size_t uni = docsets[s].size() + docsets[o].size() - inter;
        if (uni == 0) {
          sum += 1.0;  // identical emptiness
          if (empty_pair_flag) *empty_pair_flag = true;
        } else {
          sum += static_cast<double>(inter) / static_cast<double>(uni);
        }
      }
      scores.at(s, t) = sum / static_cast<double>(m - 1);
    }
  }
  return {std::move(scores), "AS", "raw", {}};
}

namespace {

// rank map for one run list; unretrieved docs rank below everything
std::map<std::string, std::size_t> rank_map(const std::vector<RunSet::Entry>& list) {
  std::map<std::string, std::size_t> r;
  for (std::size_t i = 0; i < list.size(); ++i) r[list[i].doc_id] = i + 1;
  return r;
}

struct VotedTopic {
  std::vector<std::string> ordered_docs;  // best first
};

VotedTopic vote_topic(const RunSet& runs, std::size_t topic_idx,
                      const std::vector<std::size_t>& selected, NcVoting voting) {
  std::set<std::string> pool_set;
  std::vector<std::map<std::string, std::size_t>> ranks;
  ranks.reserve(selected.size());
  for (std::size_t s : selected) {
    const auto& list = runs.list(s, topic_idx);
    for (const auto& e : list) pool_set.insert(e.doc_id);
    ranks.push_back(rank_map(list));
  }
  std::vector<std::string> pool(pool_set.begin(), pool_set.end());
  const std::size_t pn = pool.size();
  VotedTopic out;
  if (pn == 0) return out;

  std::vector<double> score(pn, 0.0);
  if (voting == NcVoting::RankPosition) {
    for (std::size_t d = 0; d < pn; ++d) {
      double inv_sum = 0.0;
      for (const auto& r : ranks) {
        auto it = r.find(pool[d]);
        if (it != r.end()) inv_sum += 1.0 / static_cast<double>(it->second);
      }
      score[d] = inv_sum;  // ordering equivalent of 1/sum(1/rank) ascending
    }
  } else if (voting == NcVoting::Borda) {
    for (std::size_t d = 0; d < pn; ++d) {
      double s = 0.0;
      for (const auto& r : ranks) {
        auto it = r.find(pool[d]);
        const std::size_t rank = it != r.end() ? it->second : pn;  // bottom
        s += static_cast<double>(pn) - static_cast<double>(rank);
      }
      score[d] = s;
    }
  } else {  // Condorcet: pairwise wins desc, losses asc, ties desc
    std::vector<long long> wins(pn, 0), losses(pn, 0), ties(pn, 0);
    std::vector<std::vector<std::size_t>> rank_of(ranks.size(), std::vector<std::size_t>(pn));
    for (std::size_t k = 0; k < ranks.size(); ++k)
      for (std::size_t d = 0; d < pn; ++d) {
        auto it = ranks[k].find(pool[d]);
        rank_of[k][d] = it != ranks[k].end() ? it->second : pn + 1;
      }
    for (std::size_t a = 0; a < pn; ++a)
      for (std::size_t b = a + 1; b < pn; ++b) {
        long long pref_a = 0, pref_b = 0;
        for (std::size_t k = 0; k < ranks.size(); ++k) {
          if (rank_of[k][a] < rank_of[k][b])
            ++pref_a;
          else if (rank_of[k][b] < rank_of[k][a])
            ++pref_b;
        }
        if (pref_a > pref_b) {
          ++wins[a];
          ++losses[b];
        } else if (pref_b > pref_a) {
          ++wins[b];
          ++losses[a];
        } else {
          ++ties[a];
          ++ties[b];
        }
      }
    std::vector<std::size_t> order(pn);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (wins[a] != wins[b]) return wins[a] > wins[b];
      if (losses[a] != losses[b]) return losses[a] < losses[b];
      if (ties[a] != ties[b]) return ties[a] > ties[b];
      return pool[a] < pool[b];
    });
    out.ordered_docs.resize(pn);
    for (std::size_t i = 0; i < pn; ++i) out.ordered_docs[i] = pool[order[i]];
    return out;
  }

  std::vector<std::size_t> order(pn);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return pool[a] < pool[b];
  });
  out.ordered_docs.resize(pn);
  for (std::size_t i = 0; i < pn; ++i) out.ordered_docs[i] = pool[order[i]];
  return out;
}

NcResult evaluate_pseudo_from_order(
    const RunSet& runs, const std::vector<VotedTopic>& per_topic, double rel_fraction,
    std::size_t ap_cutoff, const std::string& method) {
  Qrels pseudo;
  for (std::size_t t = 0; t < runs.topics.size(); ++t) {
    const auto& docs = per_topic[t].ordered_docs;
    if (docs.empty()) continue;
    const std::size_t rel = std::max<std::size_t>(
        1, static_cast<std::size_t>(rel_fraction * static_cast<double>(docs.size())));
    for (std::size_t i = 0; i < docs.size(); ++i) pseudo.set(runs.topics[t], docs[i], i < rel ? 1 : 0);
  }
  ApMatrix scores(runs.systems, runs.topics);
  for (std::size_t t = 0; t < runs.topics.size(); ++t) {
    bool any = false;
    auto e = pseudo.entries().find(runs.topics[t]);
    if (e != pseudo.entries().end())
      for (const auto& [_, g] : e->second)
        if (g > 0) any = true;
    if (any) fill_topic_ap(runs, t, pseudo, ap_cutoff, scores);
  }
  NcResult out;
  out.prediction = {std::move(scores), method, "raw", {}};
  out.pseudo = {std::move(pseudo), method, 0, 0};
  return out;
}

}  // namespace

NcResult nuray_can(const RunSet& runs, NcSelection selection, NcVoting voting,
                   double rel_fraction, std::size_t ap_cutoff) {
  const std::size_t m = runs.systems.size();
  if (m < 2) throw ConfigError("nuray_can: need at least 2 runs");
  if (!(rel_fraction > 0.0 && rel_fraction <= 1.0))
    throw ConfigError("nuray_can: rel_fraction must be in (0,1]");

  std::vector<std::size_t> selected(m);
  std::iota(selected.begin(), selected.end(), 0);
  if (selection == NcSelection::Bias) {
    // distance from the norm: mean Jaccard dissimilarity to all other runs
    std::vector<double> dist(m, 0.0);
    for (std::size_t t = 0; t < runs.topics.size(); ++t) {
      std::vector<std::set<std::string>> docsets(m);
      for (std::size_t s = 0; s < m; ++s)
        for (const auto& e : runs.list(s, t)) docsets[s].insert(e.doc_id);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
          std::size_t inter = 0;
          for (const auto& d : docsets[a])
            if (docsets[b].count(d)) ++inter;
          const std::size_t uni = docsets[a].size() + docsets[b].size() - inter;
          const double dissim = uni == 0 ? 0.0 : 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
          dist[a] += dissim;
          dist[b] += dissim;
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
    const std::size_t keep = (m + 1) / 2;
    selected.assign(order.begin(), order.begin() + static_cast<long>(keep));
    std::sort(selected.begin(), selected.end());
    if (selected.size() < 2) throw DataError("nuray_can: fewer than 2 selected runs");
  }

  std::vector<VotedTopic> per_topic(runs.topics.size());
  for (std::size_t t = 0; t < runs.topics.size(); ++t)
    per_topic[t] = vote_topic(runs, t, selected, voting);

  static const std::map<NcVoting, std::string> vnames = {{NcVoting::RankPosition, "RP"},
                                                         {NcVoting::Borda, "B"},
                                                         {NcVoting::Condorcet, "C"}};
  const std::string method =
      std::string("NC-") + (selection == NcSelection::Normal ? "N" : "B") + vnames.at(voting);
  return evaluate_pseudo_from_order(runs, per_topic, rel_fraction, ap_cutoff, method);
}

PredictedMatrix spoerri(const RunSet& runs, SpoMeasure measure, std::size_t depth,
                        const std::vector<std::string>& selected, Rng& rng) {
  std::vector<std::size_t> idx;
  if (selected.empty()) {
    idx.resize(runs.systems.size());
    std::iota(idx.begin(), idx.end(), 0);
  } else {
    for (const auto& tag : selected) idx.push_back(runs.system_index(tag));
  }
  const std::size_t count = idx.size();
  if (count == 0 || count % 5 != 0)
    throw ConfigError("spoerri: run count must be a positive multiple of 5");

  // five rounds; each round partitions the runs into trials of five, so each
  // run occurs in exactly five trials
  std::vector<std::vector<std::size_t>> trials;
  for (std::size_t round = 0; round < 5; ++round) {
    std::vector<std::size_t> shuffled = idx;
    rng.shuffle(shuffled);
    for (std::size_t g = 0; g + 5 <= shuffled.size(); g += 5)
      trials.emplace_back(shuffled.begin() + static_cast<long>(g),
                          shuffled.begin() + static_cast<long>(g) + 5);
  }

  ApMatrix single(runs.systems, runs.topics);
  ApMatrix allfive(runs.systems, runs.topics);
  ApMatrix counts(runs.systems, runs.topics);

  for (std::size_t t = 0; t < runs.topics.size(); ++t) {
    for (const auto& trial : trials) {
      std::vector<std::set<std::string>> docsets(5);
      for (std::size_t k = 0; k < 5; ++k) {
        const auto& list = runs.list(trial[k], t);
        const std::size_t lim = std::min(depth, list.size());
        for (std::size_t r = 0; r < lim; ++r) docsets[k].insert(list[r].doc_id);
      }
      for (std::size_t k = 0; k < 5; ++k) {
        if (docsets[k].empty()) {
          counts.at(trial[k], t) += 1.0;
          continue;
        }
        std::size_t lone = 0, shared_by_all = 0;
        for (const auto& d : docsets[k]) {
          std::size_t holders = 0;
          for (std::size_t o = 0; o < 5; ++o)
            if (o != k && docsets[o].count(d)) ++holders;
          if (holders == 0) ++lone;
          if (holders == 4) ++shared_by_all;
        }
        const double denom = static_cast<double>(docsets[k].size());
        single.at(trial[k], t) += 100.0 * static_cast<double>(lone) / denom;
        allfive.at(trial[k], t) += 100.0 * static_cast<double>(shared_by_all) / denom;
        counts.at(trial[k], t) += 1.0;
      }
    }
  }

  ApMatrix scores(runs.systems, runs.topics);
  for (std::size_t i = 0; i < scores.values().size(); ++i) {
    const double c = std::max(1.0, counts.values()[i]);
    const double s = single.values()[i] / c;
    const double a = allfive.values()[i] / c;
    switch (measure) {
      case SpoMeasure::Single: scores.values()[i] = -s; break;
      case SpoMeasure::AllFive: scores.values()[i] = a; break;
      case SpoMeasure::SingleMinusAllFive: scores.values()[i] = -(s - a); break;
    }
  }
  static const std::map<SpoMeasure, std::string> names = {
      {SpoMeasure::Single, "SPO-S"},
      {SpoMeasure::AllFive, "SPO-A"},
      {SpoMeasure::SingleMinusAllFive, "SPO-SA"}};
  return {std::move(scores), names.at(measure), "raw", {"sign flipped for S and S-A"}};
}

NcResult sakai_lin(const RunSet& runs, double rel_fraction, std::size_t ap_cutoff) {
  const std::size_t m = runs.systems.size();
  if (m < 2) throw ConfigError("sakai_lin: need at least 2 runs");

  std::vector<VotedTopic> per_topic(runs.topics.size());
  for (std::size_t t = 0; t < runs.topics.size(); ++t) {
    std::set<std::string> pool_set;
    std::vector<std::map<std::string, std::size_t>> ranks;
    for (std::size_t s = 0; s < m; ++s) {
      const auto& list = runs.list(s, t);
      for (const auto& e : list) pool_set.insert(e.doc_id);
      ranks.push_back(rank_map(list));
    }
    std::vector<std::string> pool(pool_set.begin(), pool_set.end());
    const std::size_t pn = pool.size();
    if (pn == 0) continue;
    // win proportion: fraction of (opponent, run) comparisons won; with the
    // unretrieved-below-all convention this is a rank-mass sum per run
    std::vector<double> wins(pn, 0.0);
    for (std::size_t k = 0; k < ranks.size(); ++k) {
      std::vector<std::size_t> r(pn);
      for (std::size_t d = 0; d < pn; ++d) {
        auto it = ranks[k].find(pool[d]);
        r[d] = it != ranks[k].end() ? it->second : pn + 1;
      }
      // docs sharing the bottom rank tie with each other, beat nobody below
      std::vector<std::size_t> sorted = r;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t d = 0; d < pn; ++d) {
        const auto strictly_below =
            sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), r[d]);
        wins[d] += static_cast<double>(strictly_below);
      }
    }
    const double denom = static_cast<double>(ranks.size()) * static_cast<double>(pn - 1);
    std::vector<double> score(pn);
    for (std::size_t d = 0; d < pn; ++d) score[d] = denom > 0 ? wins[d] / denom : 0.0;

    std::vector<std::size_t> order(pn);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (score[a] != score[b]) return score[a] > score[b];
      return pool[a] < pool[b];
    });
    per_topic[t].ordered_docs.resize(pn);
    for (std::size_t i = 0; i < pn; ++i) per_topic[t].ordered_docs[i] = pool[order[i]];
  }
  NcResult out = evaluate_pseudo_from_order(runs, per_topic, rel_fraction, ap_cutoff, "SL");
  out.prediction.notes.push_back("win-proportion variant");
  return out;
}

PredictedMatrix normalize_minmax01(const PredictedMatrix& p) {
  double lo = p.scores.values().front(), hi = lo;
  for (double v : p.scores.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) throw NumericError("normalize: constant matrix");
  PredictedMatrix out = p;
  for (double& v : out.scores.values()) v = (v - lo) / (hi - lo);
  out.normalization = "minmax01";
  return out;
}

const std::vector<MethodInfo>& method_registry() {
  static const std::vector<MethodInfo> registry = {
      {"SNC", true},    {"WUCv0", true},  {"WUCv1", true},  {"WUCv2", true},
      {"WUCv3", true},  {"WUCv4", false}, {"AS", true},     {"NC-NRP", true},
      {"NC-NB", true},  {"NC-NC", true},  {"NC-BRP", true}, {"NC-BB", true},
      {"NC-BC", true},  {"SPO-S", true},  {"SPO-A", true},  {"SPO-SA", true},
      {"SL", true}};
  return registry;
}

}  // namespace irlab::autojudge
