#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "irlab/analysis.hpp"
#include "irlab/association.hpp"
#include "irlab/autojudge.hpp"
#include "irlab/collection.hpp"
#include "irlab/csv.hpp"
#include "irlab/effectiveness.hpp"
#include "irlab/fusion.hpp"
#include "irlab/rng.hpp"
#include "irlab/scales.hpp"
#include "irlab/subset.hpp"
#include "irlab/types.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace irlab;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  std::size_t workers = 0;
};

void write_sidecar(const fs::path& csv_path, const std::string& command, const CommonOpts& common,
                   const json& params) {
  json meta;
  meta["tool"] = "irlab";
  meta["version"] = kVersion;
  meta["command"] = command;
  meta["seed"] = common.seed;
  meta["workers"] = common.workers;
  meta["params"] = params;
  std::ofstream f(csv_path.string() + ".meta.json");
  f << meta.dump(2) << '\n';
}

fs::path out_file(const CommonOpts& common, const std::string& name) {
  fs::create_directories(common.out_dir);
  return fs::path(common.out_dir) / name;
}

ApMatrix load_matrix_arg(const std::string& matrix_csv, const std::string& runs_path,
                         const std::string& qrels_path, const std::string& metric_text,
                         std::size_t depth, const std::string& relevant_levels) {
  if (!matrix_csv.empty()) {
    std::ifstream f(matrix_csv);
    if (!f) throw DataError("cannot open matrix csv: " + matrix_csv);
    return csv::read_matrix(f);
  }
  if (runs_path.empty() || qrels_path.empty())
    throw ConfigError("either --matrix or both --runs and --qrels are required");
  RunSet runs = io::parse_runs_file(runs_path, depth);
  Qrels qrels = io::parse_qrels_file(qrels_path);
  if (!relevant_levels.empty()) {
    std::set<int> levels;
    std::stringstream ss(relevant_levels);
    std::string tok;
    while (std::getline(ss, tok, ',')) levels.insert(std::stoi(tok));
    qrels = io::binarize(qrels, levels);
  }
  return io::build_ap_matrix(runs, qrels, io::parse_metric(metric_text));
}

json archive_to_json(const subset::ParetoArchive& archive,
                     const std::vector<std::string>& topic_labels) {
  json out = json::array();
  for (std::size_t c = 1; c <= archive.topic_count(); ++c) {
    json bucket;
    bucket["cardinality"] = c;
    bucket["entries"] = json::array();
    for (const auto& e : archive.at_cardinality(c)) {
      json entry;
      entry["correlation"] = e.correlation;
      entry["mask"] = e.mask.to_string();
      json topics = json::array();
      for (std::size_t i : e.mask.set_bits()) topics.push_back(topic_labels[i]);
      entry["topics"] = topics;
      bucket["entries"].push_back(entry);
    }
    out.push_back(bucket);
  }
  return out;
}

int cmd_eval(const CommonOpts& common, const std::string& runs_path, const std::string& qrels_path,
             const std::string& metric_text, std::size_t depth,
             const std::string& relevant_levels, bool exp_gain) {
  if (runs_path.empty()) throw ConfigError("eval: --runs is required");
  if (qrels_path.empty()) throw ConfigError("eval: --qrels is required");
  RunSet runs = io::parse_runs_file(runs_path, depth);
  Qrels qrels = io::parse_qrels_file(qrels_path);
  if (!relevant_levels.empty()) {
    std::set<int> levels;
    std::stringstream ss(relevant_levels);
    std::string tok;
    while (std::getline(ss, tok, ',')) levels.insert(std::stoi(tok));
    qrels = io::binarize(qrels, levels);
  }
  io::MetricDescriptor metric = io::parse_metric(metric_text);
  if (exp_gain) metric.gain = io::GainKind::Exponential;
  std::vector<std::string> excluded;
  const ApMatrix m = io::build_ap_matrix(runs, qrels, metric, &excluded);
  for (const auto& t : excluded)
    std::cerr << "warning: topic " << t << " excluded (no relevant document)\n";
  json params = {{"runs", runs_path}, {"qrels", qrels_path}, {"metric", metric_text},
                 {"depth", depth},    {"relevant_levels", relevant_levels},
                 {"exp_gain", exp_gain}};

  auto emit_matrix = [&](const std::string& name, const ApMatrix& mat) {
    const fs::path p = out_file(common, name);
    std::ofstream f(p);
    csv::write_matrix(f, mat);
    write_sidecar(p, "eval", common, params);
  };
  auto emit_vector = [&](const std::string& name, const EffVector& v) {
    const fs::path p = out_file(common, name);
    std::ofstream f(p);
    csv::write_vector(f, v);
    write_sidecar(p, "eval", common, params);
  };
  emit_matrix("ap_matrix.csv", m);
  emit_vector("map.csv", eff::aggregate_rows(m, eff::RowAggregate::MAP));
  emit_vector("gmap.csv", eff::aggregate_rows(m, eff::RowAggregate::GMAP));
  emit_vector("logitmap.csv", eff::aggregate_rows(m, eff::RowAggregate::LogitMAP));
  emit_vector("aap.csv", eff::aggregate_cols(m, eff::ColAggregate::AAP));
  emit_vector("gaap.csv", eff::aggregate_cols(m, eff::ColAggregate::GAAP));
  std::cout << "eval: " << m.rows() << " systems x " << m.cols() << " topics\n";
  return 0;
}

int cmd_bestsub(const CommonOpts& common, const std::string& matrix_csv,
                const std::string& runs_path, const std::string& qrels_path,
                const std::string& metric_text, std::size_t depth,
                const std::string& correlation, std::size_t population,
                std::uint64_t max_evals, double mutation, double crossover, std::size_t reps,
                std::size_t merge_runs, bool exhaustive_check, bool fraction_axis) {
  const ApMatrix m = load_matrix_arg(matrix_csv, runs_path, qrels_path, metric_text, depth, "");
  const auto kind = assoc::parse_correlation(correlation);

  subset::SearchParams sp;
  sp.population_size = std::max(population, m.cols());
  sp.max_evaluations = max_evals;
  sp.mutation_prob = mutation;
  sp.crossover_prob = crossover;
  sp.correlation = kind;
  sp.seed = common.seed;
  sp.workers = common.workers;

  auto run_direction = [&](subset::Direction dir) {
    sp.direction = dir;
    subset::ParetoArchive merged(m.cols(), dir, 10);
    for (std::size_t r = 0; r < merge_runs; ++r) {
      subset::SearchParams p = sp;
      p.seed = sp.seed + r;
      merged.merge_with(subset::nsga2_search(m, p));
    }
    return merged;
  };
  const auto best = run_direction(subset::Direction::Best);
  const auto worst = run_direction(subset::Direction::Worst);

  Rng rng(common.seed);
  const auto series = subset::average_series(m, reps, kind, rng);

  json params = {{"correlation", correlation},   {"population", sp.population_size},
                 {"max_evals", max_evals},       {"mutation", mutation},
                 {"crossover", crossover},       {"reps", reps},
                 {"merge_runs", merge_runs}};

  const fs::path series_path = out_file(common, "series.csv");
  {
    std::ofstream f(series_path);
    csv::write_series(f, series, &best, &worst);
  }
  write_sidecar(series_path, "bestsub", common, params);

  if (fraction_axis) {
    const fs::path p = out_file(common, "series_fraction.csv");
    std::ofstream f(p);
    f << "fraction,best,worst,mean,p01,p99\n";
    for (const auto& r : series) {
      f << csv::format_number(static_cast<double>(r.cardinality) /
                              static_cast<double>(m.cols()));
      auto bv = best.value_at(r.cardinality);
      auto wv = worst.value_at(r.cardinality);
      f << ',' << (bv ? csv::format_number(*bv) : "") << ','
        << (wv ? csv::format_number(*wv) : "") << ',' << csv::format_number(r.mean) << ','
        << csv::format_number(r.p01) << ',' << csv::format_number(r.p99) << '\n';
    }
    write_sidecar(p, "bestsub", common, params);
  }

  for (const auto& [name, archive] : {std::pair<const char*, const subset::ParetoArchive*>{
                                          "archive_best.json", &best},
                                      {"archive_worst.json", &worst}}) {
    const fs::path p = out_file(common, name);
    std::ofstream f(p);
    f << archive_to_json(*archive, m.topics()).dump(2) << '\n';
  }

  for (std::size_t c : best.missing_cardinalities())
    std::cerr << "warning: no archived best subset at cardinality " << c << '\n';

  if (exhaustive_check) {
    if (m.cols() > 12) {
      std::cerr << "exhaustive check skipped: more than 12 topics\n";
    } else {
      const std::size_t n = m.cols();
      std::vector<double> best_exact(n + 1, -2.0);
      for (std::uint64_t bits = 1; bits < (1ULL << n); ++bits) {
        subset::TopicMask mask(n);
        for (std::size_t i = 0; i < n; ++i)
          if (bits & (1ULL << i)) mask.set(i, true);
        const double v = subset::fitness(mask, m, kind);
        auto& slot = best_exact[mask.cardinality()];
        if (v >= -1.0 && v > slot) slot = v;
      }
      std::size_t hits = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        auto got = best.value_at(c);
        if (got && best_exact[c] >= -1.0 && *got >= best_exact[c] - 0.01) ++hits;
      }
      std::cout << "exhaustive agreement: " << hits << "/" << n
                << " cardinalities within 0.01\n";
    }
  }
  std::cout << "bestsub: wrote " << series_path.string() << '\n';
  return 0;
}

struct AccuracyRow {
  std::string method;
  double rho, tau, rs, tauap, rbo_v, delta;
};

int cmd_pseudo(const CommonOpts& common, const std::string& runs_path,
               const std::string& methods_arg, const std::string& truth_qrels,
               double mu, double sigma, std::size_t reps, std::size_t depth,
               std::size_t pool_depth, const std::string& spo_runs, bool exact_fraction,
               double rel_fraction) {
  RunSet runs = io::parse_runs_file(runs_path, depth);

  std::vector<std::string> methods;
  {
    std::stringstream ss(methods_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) methods.push_back(tok);
  }
  if (methods.empty()) throw ConfigError("--methods is empty");

  std::optional<Qrels> truth_q;
  std::optional<ApMatrix> truth;
  if (!truth_qrels.empty()) {
    truth_q = io::parse_qrels_file(truth_qrels);
    truth = io::build_ap_matrix(runs, *truth_q, io::parse_metric("AP@1000"));
  }

  if (mu <= 0.0) {
    auto [m_est, s_est] = autojudge::estimate_pool_params(runs.systems.size());
    mu = m_est;
    if (sigma <= 0.0) sigma = s_est;
  }

  // exact-fraction sampling: per-topic relevant fractions from the qrels
  std::map<std::string, double> per_topic_mu;
  if (exact_fraction) {
    if (!truth_q) throw ConfigError("--exact-fraction needs --qrels for the per-topic fractions");
    for (const auto& [topic, docs] : truth_q->entries()) {
      std::size_t rel = 0;
      for (const auto& [_, g] : docs)
        if (g > 0) ++rel;
      per_topic_mu[topic] = 100.0 * double(rel) / double(docs.size());
    }
  }

  std::vector<std::string> spo_selected;
  if (!spo_runs.empty()) {
    std::stringstream ss(spo_runs);
    std::string tok;
    while (std::getline(ss, tok, ',')) spo_selected.push_back(tok);
  }

  json params = {{"runs", runs_path}, {"methods", methods_arg}, {"mu", mu},
                 {"sigma", sigma},    {"reps", reps},           {"pool_depth", pool_depth}};

  std::vector<AccuracyRow> table;
  auto emit = [&](const autojudge::PredictedMatrix& pred) {
    const fs::path p = out_file(common, "pred_" + pred.method + ".csv");
    std::ofstream f(p);
    csv::write_matrix(f, pred.scores);
    write_sidecar(p, "pseudo", common, params);
    if (truth) {
      const auto map_true = eff::aggregate_rows(*truth, eff::RowAggregate::MAP).values;
      const auto map_pred = eff::aggregate_rows(pred.scores, eff::RowAggregate::MAP).values;
      AccuracyRow row;
      row.method = pred.method;
      // degenerate predictions (constant vectors) record NaN, not a failure
      auto guarded = [&](auto&& fn) {
        try {
          return fn();
        } catch (const NumericError&) {
          return std::numeric_limits<double>::quiet_NaN();
        }
      };
      row.rho = guarded([&] { return assoc::pearson(map_pred, map_true); });
      row.tau = guarded([&] { return assoc::kendall_tau_b(map_pred, map_true); });
      row.rs = guarded([&] { return assoc::spearman(map_pred, map_true); });
      row.tauap = guarded([&] { return assoc::tau_ap(map_pred, map_true); });
      const double p_param = assoc::rbo_p_for(0.1, 0.75, map_true.size());
      row.rbo_v = assoc::rbo(assoc::ranking_of(truth->systems(), map_pred),
                             assoc::ranking_of(truth->systems(), map_true), p_param);
      try {
        auto norm = autojudge::normalize_minmax01(pred);
        // truth may have dropped zero-relevant topics; align the grids
        ApMatrix aligned(truth->systems(), truth->topics());
        for (std::size_t j = 0; j < truth->cols(); ++j) {
          const auto& ts = norm.scores.topics();
          const auto it = std::find(ts.begin(), ts.end(), truth->topics()[j]);
          if (it == ts.end()) throw DataError("topic missing from prediction");
          const std::size_t src = static_cast<std::size_t>(it - ts.begin());
          for (std::size_t i = 0; i < truth->rows(); ++i)
            aligned.at(i, j) = norm.scores.at(i, src);
        }
        row.delta = assoc::matrix_delta(aligned, *truth);
      } catch (const std::exception&) {
        row.delta = std::numeric_limits<double>::quiet_NaN();
      }
      table.push_back(row);
    }
  };

  Rng rng(common.seed);
  for (const auto& name : methods) {
    if (name == "SNC" || name == "SNC-dups") {
      autojudge::SncOptions opts;
      opts.mu_percent = mu;
      opts.sigma = sigma;
      opts.use_duplicates = name == "SNC-dups";
      opts.repetitions = reps;
      opts.pool_depth = pool_depth;
      opts.seed = common.seed;
      if (exact_fraction) opts.per_topic_mu = &per_topic_mu;
      auto res = autojudge::snc(runs, opts);
      emit(res.mean_prediction);
      const fs::path qp = out_file(common, "pseudo_qrels_" + name + ".txt");
      std::ofstream f(qp);
      io::write_qrels(f, res.pseudo_qrels.front().qrels);
    } else if (name.rfind("WUCv", 0) == 0) {
      const int v = name[4] - '0';
      if (v < 0 || v > 4) throw ConfigError("bad WUC variant: " + name);
      emit(autojudge::wuc(runs, static_cast<autojudge::WucVariant>(v)));
    } else if (name == "AS") {
      emit(autojudge::aslam_savell(runs));
    } else if (name.rfind("NC-", 0) == 0) {
      const std::string code = name.substr(3);
      const auto sel = code[0] == 'N' ? autojudge::NcSelection::Normal
                                      : autojudge::NcSelection::Bias;
      autojudge::NcVoting vote;
      const std::string vc = code.substr(1);
      if (vc == "RP") vote = autojudge::NcVoting::RankPosition;
      else if (vc == "B") vote = autojudge::NcVoting::Borda;
      else if (vc == "C") vote = autojudge::NcVoting::Condorcet;
      else throw ConfigError("bad NC method: " + name);
      auto res = autojudge::nuray_can(runs, sel, vote, rel_fraction);
      emit(res.prediction);
      const fs::path qp = out_file(common, "pseudo_qrels_" + name + ".txt");
      std::ofstream f(qp);
      io::write_qrels(f, res.pseudo.qrels);
    } else if (name.rfind("SPO-", 0) == 0) {
      autojudge::SpoMeasure meas;
      const std::string mc = name.substr(4);
      if (mc == "S") meas = autojudge::SpoMeasure::Single;
      else if (mc == "A") meas = autojudge::SpoMeasure::AllFive;
      else if (mc == "SA") meas = autojudge::SpoMeasure::SingleMinusAllFive;
      else throw ConfigError("bad SPO method: " + name);
      Rng spo_rng = rng.fork(0x5190, 0);
      emit(autojudge::spoerri(runs, meas, depth, spo_selected, spo_rng));
    } else if (name == "SL") {
      auto res = autojudge::sakai_lin(runs, rel_fraction);
      emit(res.prediction);
    } else {
      throw ConfigError("unknown method: " + name);
    }
  }

  if (truth) {
    const fs::path p = out_file(common, "accuracy.csv");
    std::ofstream f(p);
    f << "method,rho,tau,r_s,tau_ap,rbo,delta\n";
    for (const auto& r : table)
      f << r.method << ',' << csv::format_number(r.rho) << ',' << csv::format_number(r.tau) << ','
        << csv::format_number(r.rs) << ',' << csv::format_number(r.tauap) << ','
        << csv::format_number(r.rbo_v) << ',' << csv::format_number(r.delta) << '\n';
    write_sidecar(p, "pseudo", common, params);
  }
  std::cout << "pseudo: " << methods.size() << " methods done\n";
  return 0;
}

int cmd_fuse(const CommonOpts& common, const std::vector<std::string>& inputs,
             const std::string& strategy_name, const std::string& truth_csv,
             const std::string& ridge_train, double lambda) {
  if (!ridge_train.empty()) {
    std::ifstream f(ridge_train);
    if (!f) throw DataError("cannot open ridge training spec: " + ridge_train);
    json spec = json::parse(f);
    // temporal discipline: every training collection must predate the test
    const int test_year = spec.at("test_year").get<int>();
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    std::vector<std::string> used;
    for (const auto& coll : spec.at("collections")) {
      const int year = coll.at("year").get<int>();
      if (year >= test_year) continue;
      std::ifstream tf(coll.at("truth").get<std::string>());
      const ApMatrix truth = csv::read_matrix(tf);
      std::vector<ApMatrix> preds;
      for (const auto& path : coll.at("predictions")) {
        std::ifstream pf(path.get<std::string>());
        preds.push_back(csv::read_matrix(pf));
      }
      for (std::size_t i = 0; i < truth.rows(); ++i)
        for (std::size_t j = 0; j < truth.cols(); ++j) {
          std::vector<double> row;
          for (const auto& p : preds) row.push_back(p.at(i, j));
          rows.push_back(std::move(row));
          labels.push_back(truth.at(i, j));
        }
      used.push_back(coll.at("id").get<std::string>());
    }
    if (rows.empty()) throw DataError("ridge training set is empty after the year filter");
    const auto model = fusion::ridge_fit(rows, labels, lambda);
    json out;
    out["lambda"] = lambda;
    out["weights"] = model.weights;
    out["intercept"] = model.intercept;
    out["training_collections"] = used;
    const fs::path p = out_file(common, "ridge_model.json");
    std::ofstream of(p);
    of << out.dump(2) << '\n';
    std::cout << "fuse: ridge model on " << rows.size() << " cells -> " << p.string() << '\n';
    return 0;
  }

  if (inputs.size() < 2) throw ConfigError("fuse: need at least two --inputs");
  fusion::FusionInput fin;
  std::optional<ApMatrix> shape;
  for (const auto& path : inputs) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open prediction csv: " + path);
    ApMatrix m = csv::read_matrix(f);
    if (!shape) shape = m;
    else if (!shape->same_shape(m)) throw DataError("fuse: prediction grids differ: " + path);
    fin.method_tags.push_back(fs::path(path).stem().string());
    fin.scores.push_back(m.values());
  }
  const auto strategy = fusion::parse_strategy(strategy_name);
  const auto fused = fusion::fuse(fin, strategy);

  ApMatrix out_m(shape->systems(), shape->topics());
  out_m.values() = fused.scores;
  const fs::path p = out_file(common, "fused_" + strategy_name + ".csv");
  std::ofstream f(p);
  csv::write_matrix(f, out_m);
  json params = {{"strategy", strategy_name}, {"inputs", inputs}};
  write_sidecar(p, "fuse", common, params);

  if (strategy == fusion::Strategy::Borda) {
    std::cout << "borda raw scores:";
    for (double v : fused.raw) std::cout << ' ' << csv::format_number(v);
    std::cout << '\n';
  }
  if (strategy == fusion::Strategy::RankPosition) {
    std::cout << "rank-position raw scores:";
    for (double v : fused.raw) std::cout << ' ' << csv::format_number(v);
    std::cout << '\n';
  }

  if (!truth_csv.empty()) {
    std::ifstream tf(truth_csv);
    const ApMatrix truth = csv::read_matrix(tf);
    fusion::FusionInput candidates = fin;
    const auto best = fusion::oracle(candidates, truth.values(), assoc::CorrelationKind::Kendall);
    std::cout << "oracle method: " << best.method << " (tau " << csv::format_number(best.score)
              << ")\n";
  }
  std::cout << "fuse: wrote " << p.string() << '\n';
  return 0;
}

int cmd_sig(const CommonOpts& common, const std::string& matrix_csv, const std::string& runs_path,
            const std::string& qrels_path, const std::string& metric_text, std::size_t depth,
            std::size_t pairs, double alpha, bool wilcoxon, bool bonferroni) {
  const ApMatrix m = load_matrix_arg(matrix_csv, runs_path, qrels_path, metric_text, depth, "");
  const std::size_t n = m.cols();
  Rng rng(common.seed);

  const double alpha_eff = bonferroni ? alpha / static_cast<double>(pairs) : alpha;
  json params = {{"pairs", pairs}, {"alpha", alpha}, {"wilcoxon", wilcoxon},
                 {"bonferroni", bonferroni}};

  const fs::path p = out_file(common, "outcomes.csv");
  std::ofstream f(p);
  f << "cardinality,SSA,SSD,SN,NS,NN\n";
  for (std::size_t c = 2; c <= n; ++c) {
    std::size_t counts[5] = {0, 0, 0, 0, 0};
    for (std::size_t rep = 0; rep < pairs; ++rep) {
      const std::size_t x = rng.next_below(m.rows());
      std::size_t y = rng.next_below(m.rows());
      while (y == x) y = rng.next_below(m.rows());
      subset::TopicMask mask(n);
      for (std::size_t i : rng.sample_without_replacement(n, c)) mask.set(i, true);
      const auto out = analysis::outcome_class(m.row(x), m.row(y), mask, alpha_eff, wilcoxon);
      ++counts[static_cast<int>(out.outcome)];
    }
    f << c;
    for (std::size_t k = 0; k < 5; ++k)
      f << ',' << csv::format_number(static_cast<double>(counts[k]) / static_cast<double>(pairs));
    f << '\n';
  }
  write_sidecar(p, "sig", common, params);
  std::cout << "sig: wrote " << p.string() << '\n';
  return 0;
}

int cmd_cluster(const CommonOpts& common, const std::string& matrix_csv,
                const std::string& runs_path, const std::string& qrels_path,
                const std::string& metric_text, std::size_t depth, double pca_threshold,
                std::size_t clusters, std::size_t reps, bool hits, bool use_wmap) {
  const ApMatrix m = load_matrix_arg(matrix_csv, runs_path, qrels_path, metric_text, depth, "");
  const std::size_t n = m.cols();

  // topics as points in run space
  std::vector<std::vector<double>> points(n);
  for (std::size_t j = 0; j < n; ++j) points[j] = m.col(j);
  const auto proj = analysis::pca(points, pca_threshold);
  const auto model = analysis::hcluster(proj.projected, clusters);

  json params = {{"pca_threshold", pca_threshold}, {"clusters", clusters}, {"reps", reps}};
  {
    const fs::path p = out_file(common, "clusters.csv");
    std::ofstream f(p);
    f << "topic,cluster\n";
    for (std::size_t j = 0; j < n; ++j) f << m.topics()[j] << ',' << model.assignment[j] << '\n';
    write_sidecar(p, "cluster", common, params);
  }

  // one-for-cluster series vs the average series
  Rng rng(common.seed);
  const auto avg = subset::average_series(m, reps, assoc::CorrelationKind::Kendall, rng);
  const fs::path p = out_file(common, "one_for_cluster.csv");
  std::ofstream f(p);
  f << "cardinality,one_for_cluster,average\n";
  std::vector<double> cluster_sizes(model.cluster_count, 0.0);
  for (std::size_t j = 0; j < n; ++j) cluster_sizes[model.assignment[j]] += 1.0;
  for (std::size_t c = 1; c <= n; ++c) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      Rng r = rng.fork(c, rep);
      const auto mask = analysis::one_for_cluster(model, c, r);
      double v;
      if (use_wmap) {
        std::vector<double> weights(n, 0.0);
        for (std::size_t j : mask.set_bits()) weights[j] = cluster_sizes[model.assignment[j]];
        try {
          const auto wm = eff::wmap(m, weights);
          const auto full = eff::aggregate_rows(m, eff::RowAggregate::MAP);
          v = assoc::kendall_tau_b(wm.values, full.values);
        } catch (const NumericError&) {
          continue;
        }
      } else {
        v = subset::fitness(mask, m, assoc::CorrelationKind::Kendall);
        if (v < -1.0) continue;
      }
      sum += v;
      ++cnt;
    }
    f << c << ',' << (cnt ? csv::format_number(sum / static_cast<double>(cnt)) : "") << ','
      << csv::format_number(avg[c - 1].mean) << '\n';
  }
  write_sidecar(p, "cluster", common, params);

  if (hits) {
    const auto hub = analysis::hits_hubness(m);
    const fs::path hp = out_file(common, "hubness.csv");
    std::ofstream hf(hp);
    hf << "topic,hubness\n";
    for (std::size_t j = 0; j < n; ++j) hf << m.topics()[j] << ',' << csv::format_number(hub[j]) << '\n';
    write_sidecar(hp, "cluster", common, params);
  }
  std::cout << "cluster: wrote " << p.string() << '\n';
  return 0;
}

int cmd_scales(const CommonOpts& common, const std::string& judgements_path,
               const std::string& family_name_arg, int target_levels,
               const std::string& target_qrels_path, const std::string& unjudged,
               bool single_cut, const std::string& alpha_metric, bool trace,
               const std::string& eval_runs, const std::string& expert_qrels,
               const std::string& eval_metric) {
  std::ifstream jf(judgements_path);
  if (!jf) throw DataError("cannot open judgements csv: " + judgements_path);
  const auto table = scales::JudgementTable::from_csv(jf);

  scales::TransformOptions opts;
  opts.family = scales::parse_family(family_name_arg);
  opts.target_levels = target_levels;
  opts.per_topic = !single_cut;
  opts.keep_trace = trace;
  if (alpha_metric == "nominal") opts.alpha_metric = assoc::AlphaMetric::Nominal;
  else if (alpha_metric == "ordinal") opts.alpha_metric = assoc::AlphaMetric::Ordinal;
  else if (alpha_metric == "interval") opts.alpha_metric = assoc::AlphaMetric::Interval;
  else throw ConfigError("bad --alpha-metric: " + alpha_metric);
  if (unjudged == "assume") opts.unjudged = scales::UnjudgedPolicy::AssumeNonRelevant;
  else if (unjudged == "drop") opts.unjudged = scales::UnjudgedPolicy::Drop;
  else if (unjudged == "error") opts.unjudged = scales::UnjudgedPolicy::Error;
  else throw ConfigError("bad --unjudged: " + unjudged);

  std::optional<Qrels> target;
  if (!target_qrels_path.empty()) target = io::parse_qrels_file(target_qrels_path);

  // small cut spaces get a full per-cut printout (the 3-cut binarization row)
  const bool tiny = scales::count_cuts(table.levels(), target_levels) <= 10;
  if (tiny) opts.keep_trace = true;

  const auto result =
      scales::select_best_cut(opts, table, target ? &*target : nullptr);

  json params = {{"family", family_name_arg},  {"target_levels", target_levels},
                 {"unjudged", unjudged},       {"alpha_metric", alpha_metric},
                 {"per_topic", !single_cut},   {"crowd_aggregate_leave_one_out", true}};

  {
    const fs::path p = out_file(common, "cuts.csv");
    std::ofstream f(p);
    f << "topic,cut,alpha,tied_cuts\n";
    for (const auto& tc : result.per_topic)
      f << tc.topic << ',' << tc.cut.to_string() << ',' << csv::format_number(tc.alpha) << ','
        << tc.tied_cuts << '\n';
    f << "*," << result.single_cut.to_string() << ',' << csv::format_number(result.single_alpha)
      << ",1\n";
    write_sidecar(p, "scales", common, params);
  }
  if (opts.keep_trace) {
    const fs::path p = out_file(common, "alpha_trace.csv");
    std::ofstream f(p);
    f << "method,topic,cut,alpha\n";
    for (const auto& row : result.trace)
      f << family_name_arg << ',' << row.topic << ',' << row.cut.to_string() << ','
        << csv::format_number(row.alpha) << '\n';
    write_sidecar(p, "scales", common, params);
  }
  if (tiny) {
    std::cout << "alpha per cut (mean over topics):";
    for (const auto& row : result.trace)
      if (row.topic == "*")
        std::cout << ' ' << row.cut.to_string() << "=" << csv::format_number(row.alpha);
    std::cout << '\n';
  }

  // transformed qrels under the selected cuts
  std::map<std::string, scales::CutSpec> cuts;
  if (!single_cut)
    for (const auto& tc : result.per_topic) cuts[tc.topic] = tc.cut;
  const Qrels transformed =
      scales::transform_qrels(table, cuts, result.single_cut, opts.family);
  {
    const fs::path p = out_file(common, "transformed_qrels.txt");
    std::ofstream f(p);
    io::write_qrels(f, transformed);
  }

  if (!eval_runs.empty() && !expert_qrels.empty()) {
    const RunSet runs = io::parse_runs_file(eval_runs);
    const Qrels expert = io::parse_qrels_file(expert_qrels);
    const double tau = scales::evaluate_transformation(transformed, expert, runs,
                                                       io::parse_metric(eval_metric));
    std::cout << "system-ranking tau vs expert: " << csv::format_number(tau) << '\n';
  }
  std::cout << "scales: best single cut " << result.single_cut.to_string() << " alpha "
            << csv::format_number(result.single_alpha) << '\n';
  return 0;
}

std::vector<std::string> apply_config_file(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") config_path = args[i + 1];
  if (config_path.empty()) return args;

  std::ifstream f(config_path);
  if (!f) throw ConfigError("cannot open config file: " + config_path);
  json cfg = json::parse(f);
  // config entries become leading flags; explicitly passed flags win and
  // suppress the config value entirely
  std::set<std::string> explicit_flags;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) explicit_flags.insert(a);
  std::vector<std::string> merged;
  if (!args.empty()) merged.push_back(args.front());  // subcommand first
  for (const auto& [key, value] : cfg.items()) {
    if (explicit_flags.count("--" + key)) continue;
    merged.push_back("--" + key);
    if (value.is_string())
      merged.push_back(value.get<std::string>());
    else if (!value.is_boolean())
      merged.push_back(value.dump());
    else if (!value.get<bool>())
      merged.pop_back();  // false boolean: drop the flag
  }
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    merged.push_back(args[i]);
  }
  return merged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"irlab: low-cost IR evaluation research toolkit"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its entries");

  // shared options get registered per subcommand
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out_dir, "output directory");
    sub->add_option("--seed", common.seed, "deterministic seed");
    sub->add_option("--workers", common.workers, "worker threads (0 = all cores)");
  };

  std::string runs_path, qrels_path, matrix_csv, relevant_levels;
  std::string metric_text = "AP@1000";
  std::size_t depth = 1000;
  bool exp_gain = false;

  auto* eval = app.add_subcommand("eval", "build the effectiveness matrix and aggregates");
  add_common(eval);
  eval->add_option("--runs", runs_path, "TREC run file");
  eval->add_option("--qrels", qrels_path, "TREC qrels file");
  eval->add_option("--metric", metric_text, "AP@k or NDCG@k");
  eval->add_option("--depth", depth, "run depth");
  eval->add_option("--relevant-levels", relevant_levels, "binarization levels, e.g. 1,2,3");
  eval->add_flag("--exp-gain", exp_gain, "exponential (2^g - 1) NDCG gain instead of linear");

  std::string correlation = "kendall";
  std::size_t population = 2000, reps = 1000, merge_runs = 1;
  std::uint64_t max_evals = 10'000'000;
  double mutation = 0.3, crossover = 0.7;
  bool exhaustive_check = false, fraction_axis = false;
  auto* bestsub = app.add_subcommand("bestsub", "best/worst/average topic-subset series");
  add_common(bestsub);
  bestsub->add_option("--matrix", matrix_csv, "effectiveness matrix CSV");
  bestsub->add_option("--runs", runs_path, "TREC run file");
  bestsub->add_option("--qrels", qrels_path, "TREC qrels file");
  bestsub->add_option("--metric", metric_text, "AP@k or NDCG@k");
  bestsub->add_option("--depth", depth, "run depth");
  bestsub->add_option("--correlation", correlation, "pearson|kendall|spearman|tau_ap");
  bestsub->add_option("--population", population, "population size");
  bestsub->add_option("--max-evals", max_evals, "evaluation budget");
  bestsub->add_option("--mutation", mutation, "mutation probability");
  bestsub->add_option("--crossover", crossover, "crossover probability");
  bestsub->add_option("--reps", reps, "average-series repetitions");
  bestsub->add_option("--merge-runs", merge_runs, "independent runs merged into the archive");
  bestsub->add_flag("--exhaustive-check", exhaustive_check, "compare with enumeration (n <= 12)");
  bestsub->add_flag("--fraction", fraction_axis, "also emit the fraction-axis series");

  std::string methods_arg = "SNC,AS";
  std::string truth_qrels, spo_runs;
  double mu = 0.0, sigma = 0.0, rel_fraction = 0.3;
  std::size_t pool_depth = 100, snc_reps = 20;
  bool exact_fraction = false;
  auto* pseudo = app.add_subcommand("pseudo", "judgement-free effectiveness prediction");
  add_common(pseudo);
  pseudo->add_option("--runs", runs_path, "TREC run file")->required();
  pseudo->add_option("--methods", methods_arg, "comma list, e.g. SNC,WUCv3,AS,NC-NB,SPO-S,SL");
  pseudo->add_option("--qrels", truth_qrels, "ground-truth qrels for the accuracy table");
  pseudo->add_option("--mu", mu, "SNC mu percent (0 = estimate from run count)");
  pseudo->add_option("--sigma", sigma, "SNC sigma (0 = estimate)");
  pseudo->add_option("--reps", snc_reps, "SNC repetitions");
  pseudo->add_option("--depth", depth, "run depth");
  pseudo->add_option("--pool-depth", pool_depth, "pool depth for SNC");
  pseudo->add_option("--spo-runs", spo_runs, "comma list of runs for SPO (one per group)");
  pseudo->add_flag("--exact-fraction", exact_fraction,
                   "SNC per-topic exact-fraction sampling (needs --qrels)");
  pseudo->add_option("--rel-fraction", rel_fraction, "voting methods' relevant fraction");

  std::vector<std::string> fuse_inputs;
  std::string strategy_name = "average", fuse_truth, ridge_train;
  double lambda = 1.0;
  auto* fuse = app.add_subcommand("fuse", "combine prediction matrices");
  add_common(fuse);
  fuse->add_option("--inputs", fuse_inputs, "prediction CSVs");
  fuse->add_option("--strategy", strategy_name, "average|rank_position|borda|condorcet");
  fuse->add_option("--truth", fuse_truth, "truth matrix CSV for the oracle report");
  fuse->add_option("--ridge-train", ridge_train, "JSON spec for ridge training");
  fuse->add_option("--lambda", lambda, "ridge regularization");

  std::size_t sig_pairs = 1000;
  double sig_alpha = 0.05;
  bool use_wilcoxon = false, bonferroni = false;
  auto* sig = app.add_subcommand("sig", "significance outcome taxonomy");
  add_common(sig);
  sig->add_option("--matrix", matrix_csv, "effectiveness matrix CSV");
  sig->add_option("--runs", runs_path, "TREC run file");
  sig->add_option("--qrels", qrels_path, "TREC qrels file");
  sig->add_option("--metric", metric_text, "AP@k or NDCG@k");
  sig->add_option("--depth", depth, "run depth");
  sig->add_option("--pairs", sig_pairs, "random run pairs per cardinality");
  sig->add_option("--alpha", sig_alpha, "significance level");
  sig->add_flag("--wilcoxon", use_wilcoxon, "Wilcoxon signed-rank instead of the t-test");
  sig->add_flag("--bonferroni", bonferroni, "Bonferroni-correct the level");

  double pca_threshold = 0.9;
  std::size_t clusters = 5, cluster_reps = 1000;
  bool hits = false, use_wmap = false;
  auto* cluster = app.add_subcommand("cluster", "PCA + clustering + one-for-cluster");
  add_common(cluster);
  cluster->add_option("--matrix", matrix_csv, "effectiveness matrix CSV");
  cluster->add_option("--runs", runs_path, "TREC run file");
  cluster->add_option("--qrels", qrels_path, "TREC qrels file");
  cluster->add_option("--metric", metric_text, "AP@k or NDCG@k");
  cluster->add_option("--depth", depth, "run depth");
  cluster->add_option("--pca-threshold", pca_threshold, "explained-variance target");
  cluster->add_option("--clusters", clusters, "cluster count m");
  cluster->add_option("--reps", cluster_reps, "one-for-cluster repetitions");
  cluster->add_flag("--hits", hits, "also emit HITS hubness");
  cluster->add_flag("--wmap", use_wmap, "weight selected topics by cluster size");

  std::string judgements_path, family_arg = "D_a+t2", target_qrels_path;
  std::string unjudged = "assume", alpha_metric = "nominal", eval_runs, expert_qrels;
  std::string eval_metric = "NDCG@10";
  int target_levels = 2;
  bool single_cut = false, keep_trace = false;
  auto* scalescmd = app.add_subcommand("scales", "relevance-scale transformation search");
  add_common(scalescmd);
  scalescmd->add_option("--judgements", judgements_path, "judgement CSV")->required();
  scalescmd->add_option("--family", family_arg, "H_t+a1|H_a+t1|Tw_a1|H2|D_a+t2|D_t+a2");
  scalescmd->add_option("--target-levels", target_levels, "target scale size");
  scalescmd->add_option("--target-qrels", target_qrels_path, "target-scale dataset (2-family)");
  scalescmd->add_option("--unjudged", unjudged, "assume|drop|error");
  scalescmd->add_flag("--single-cut", single_cut, "one cut for the whole collection");
  scalescmd->add_option("--alpha-metric", alpha_metric, "nominal|ordinal|interval");
  scalescmd->add_flag("--trace", keep_trace, "emit the full alpha trace");
  scalescmd->add_option("--eval-runs", eval_runs, "runs for ranking-correlation evaluation");
  scalescmd->add_option("--expert-qrels", expert_qrels, "expert qrels for evaluation");
  scalescmd->add_option("--eval-metric", eval_metric, "metric for evaluation");

  try {
    const auto args = apply_config_file(argc, argv);
    std::vector<const char*> cargs;
    cargs.push_back(argv[0]);
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());

    if (*eval)
      return cmd_eval(common, runs_path, qrels_path, metric_text, depth, relevant_levels,
                      exp_gain);
    if (*bestsub)
      return cmd_bestsub(common, matrix_csv, runs_path, qrels_path, metric_text, depth,
                         correlation, population, max_evals, mutation, crossover, reps, merge_runs,
                         exhaustive_check, fraction_axis);
    if (*pseudo)
      return cmd_pseudo(common, runs_path, methods_arg, truth_qrels, mu, sigma, snc_reps, depth,
                        pool_depth, spo_runs, exact_fraction, rel_fraction);
    if (*fuse) return cmd_fuse(common, fuse_inputs, strategy_name, fuse_truth, ridge_train, lambda);
    if (*sig)
      return cmd_sig(common, matrix_csv, runs_path, qrels_path, metric_text, depth, sig_pairs,
                     sig_alpha, use_wilcoxon, bonferroni);
    if (*cluster)
      return cmd_cluster(common, matrix_csv, runs_path, qrels_path, metric_text, depth,
                         pca_threshold, clusters, cluster_reps, hits, use_wmap);
    if (*scalescmd)
      return cmd_scales(common, judgements_path, family_arg, target_levels, target_qrels_path,
                        unjudged, single_cut, alpha_metric, keep_trace, eval_runs, expert_qrels,
                        eval_metric);
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numerical degeneracy: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
