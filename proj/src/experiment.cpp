#include "addgp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "addgp/error.hpp"

namespace addgp {

using nlohmann::json;

namespace {

std::uint64_t model_seed(ModelKind kind, std::uint64_t seed) {
  return seed * 7919u + 104729u * (static_cast<std::uint64_t>(kind) + 1u);
}

std::string grid_label(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string tying_name(Tying t) {
  switch (t) {
    case Tying::kIndependent: return "independent";
    case Tying::kSharedLengthscale: return "shared-lengthscale";
    case Tying::kSharedAll: return "shared-all";
  }
  return "unknown";
}

// JSON has no infinities; the ROC sentinels are written as strings.
json threshold_json(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return t;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::kIoError, "experiment: cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["data"] = c.synthetic ? json(nullptr) : json(c.data.string());
  j["synthetic"] = c.synthetic ? json{{"rows", c.synthetic->rows}, {"features", c.synthetic->features}}
                               : json(nullptr);
  j["models"] = json::array();
  for (auto k : c.models) j["models"].push_back(model_name(k));
  j["window_proportion"] = c.online.window_proportion;
  j["al_fraction"] = c.online.al_fraction;
  j["recent_fraction"] = c.online.recent_fraction;
  j["batch_min"] = c.online.batch_range.min;
  j["batch_max"] = c.online.batch_range.max;
  j["retrain_every"] = c.online.retrain_every;
  j["prequential"] = c.online.prequential;
  j["test_fraction"] = c.test_fraction;
  j["initial_fraction"] = c.initial_fraction;
  j["standardize"] = c.standardize;
  j["seed"] = c.online.seed;
  j["repeat_seeds"] = c.repeat_seeds;
  j["gp"] = {{"initial_budget", c.settings.initial_budget},
             {"retrain_budget", c.settings.retrain_budget},
             {"tying", tying_name(c.settings.tying)}};
  j["neural"] = {{"epochs", c.settings.train.epochs},
                 {"learning_rate", c.settings.train.learning_rate},
                 {"minibatch_size", c.settings.train.minibatch_size},
                 {"nn_hidden", c.settings.nn_hidden},
                 {"nam_hidden", c.settings.nam_hidden}};
  return j;
}

std::vector<std::size_t> argmax_picks(const std::vector<Attribution>& attrs, bool by_variance) {
  std::vector<std::size_t> picks;
  picks.reserve(attrs.size());
  for (const auto& a : attrs) {
    const auto& v = by_variance ? a.variances : a.means;
    std::size_t best = 0;
    for (std::size_t j = 1; j < v.size(); ++j) {
      const double cur = by_variance ? v[j] : std::abs(v[j]);
      const double top = by_variance ? v[best] : std::abs(v[best]);
      if (cur > top) best = j;
    }
    picks.push_back(best);
  }
  return picks;
}

json outcome_json(const ModelOutcome& o, const std::vector<std::string>& names,
                  std::string_view variance_kind) {
  json m;
  m["auc"] = o.roc.auc;
  m["f1"] = o.f1;
  m["accuracy"] = o.accuracy;
  m["variance_kind"] = variance_kind;
  json roc = json::array();
  for (std::size_t k = 0; k < o.roc.curve.points.size(); ++k) {
    roc.push_back({{"fpr", o.roc.curve.points[k].first},
                   {"tpr", o.roc.curve.points[k].second},
                   {"threshold", threshold_json(o.roc.curve.thresholds[k])}});
  }
  m["roc"] = std::move(roc);
  json traj = json::array();
  std::size_t acquired = 0;
  for (const auto& s : o.steps) {
    acquired += s.labels_acquired.size();
    traj.push_back({{"step", s.step},
                    {"f1", s.f1},
                    {"accuracy", s.accuracy},
                    {"window_size", s.window_size},
                    {"batch_size", s.predictions.size()},
                    {"labels_acquired", s.labels_acquired.size()},
                    {"retrained", s.retrained}});
  }
  m["f1_trajectory"] = std::move(traj);
  m["labels_acquired_total"] = acquired;
  if (o.importance) {
    const auto& imp = *o.importance;
    m["importance"] = {{"feature_names", names},
                       {"top_contributor", imp.contributor_histogram},
                       {"top_variance_feature", imp.variance_histogram},
                       {"top_contributor_entropy", histogram_entropy(imp.contributor_histogram)},
                       {"top_variance_entropy", histogram_entropy(imp.variance_histogram)}};
  } else {
    m["importance"] = nullptr;
  }
  return m;
}

json timings_json(const ModelOutcome& o) {
  json per = json::array();
  double total = 0.0;
  for (const auto& s : o.steps) {
    if (!s.retrained) continue;
    per.push_back(s.retrain_seconds);
    total += s.retrain_seconds;
  }
  return {{"retrain_seconds", per}, {"total_retrain_seconds", total}};
}

void write_csvs(const std::filesystem::path& dir, const ModelOutcome& o,
                const std::vector<std::string>& names) {
  const std::string name(model_name(o.kind));
  {
    auto out = open_out(dir / ("roc_" + name + ".csv"));
    out << "fpr,tpr,threshold\n";
    for (std::size_t k = 0; k < o.roc.curve.points.size(); ++k) {
      out << o.roc.curve.points[k].first << ',' << o.roc.curve.points[k].second << ','
          << o.roc.curve.thresholds[k] << '\n';
    }
  }
  {
    auto out = open_out(dir / ("f1_trajectory_" + name + ".csv"));
    out << "step,f1,accuracy,window_size,batch_size,labels_acquired,retrained\n";
    for (const auto& s : o.steps) {
      out << s.step << ',' << s.f1 << ',' << s.accuracy << ',' << s.window_size << ','
          << s.predictions.size() << ',' << s.labels_acquired.size() << ','
          << (s.retrained ? 1 : 0) << '\n';
    }
  }
  if (o.importance) {
    auto out = open_out(dir / ("importance_" + name + ".csv"));
    out << "feature,name,top_contributor_pct,top_variance_pct\n";
    for (std::size_t j = 0; j < names.size(); ++j) {
      out << j << ',' << names[j] << ',' << o.importance->contributor_histogram[j] << ','
          << o.importance->variance_histogram[j] << '\n';
    }
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (models.empty()) throw Error(Errc::kInvalidArgument, "experiment: model list is empty");
  if (!synthetic && data.empty()) {
    throw Error(Errc::kInvalidArgument, "experiment: give a data file or a synthetic size");
  }
  if (synthetic && (synthetic->rows == 0 || synthetic->features == 0)) {
    throw Error(Errc::kInvalidArgument, "experiment: synthetic rows and features must be positive");
  }
  if (repeat_seeds < 1) throw Error(Errc::kInvalidArgument, "experiment: repeat_seeds must be >= 1");
  online.validate();
}

StreamSplit prepare_split(const ExperimentConfig& config, std::uint64_t seed) {
  const Dataset d = config.synthetic
                        ? make_synthetic(config.synthetic->rows, config.synthetic->features, seed)
                        : load_dataset(config.data, config.load);
  std::mt19937_64 rng(seed);
  StreamSplit split =
      split_stream(d, config.test_fraction, config.initial_fraction, config.online.batch_range, rng);
  if (config.standardize) {
    const Standardizer z(split.initial.features);
    z.apply(split.initial.features);
    z.apply(split.test.features);
    for (auto& b : split.batches) z.apply(b.features);
  }
  return split;
}

ModelOutcome run_model(ModelKind kind, const StreamSplit& split, const ExperimentConfig& config,
                       std::uint64_t seed) {
  ModelSettings settings = config.settings;
  settings.seed = model_seed(kind, seed);
  OnlineConfig online = config.online;
  online.seed = seed;

  auto model = make_model(kind, split.initial.dim(), settings);
  if (config.verbose) {
    std::cerr << "[" << model_name(kind) << "] acquisition ranks by "
              << model->variance_kind() << " variance\n";
  }

  ModelOutcome o;
  o.kind = kind;
  o.steps = run_online(*model, split, online);

  const auto preds = model->predict(split.test.features);
  o.test_probabilities.reserve(preds.size());
  for (const auto& p : preds) o.test_probabilities.push_back(p.probability);
  try {
    o.roc = roc_and_auc(o.test_probabilities, split.test.labels);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("experiment scoring (") + std::string(model_name(kind)) +
                              "): " + e.what());
  }
  o.f1 = f1_score(o.test_probabilities, split.test.labels);
  o.accuracy = accuracy(o.test_probabilities, split.test.labels);

  if (kind == ModelKind::kNAM || kind == ModelKind::kAGP) {
    std::vector<Attribution> attrs;
    attrs.reserve(split.test.size());
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      attrs.push_back(*model->attribute(split.test.features.row(i)));
    }
    ImportanceSummary imp;
    imp.top_contributor = argmax_picks(attrs, false);
    imp.top_variance_feature = argmax_picks(attrs, true);
    imp.contributor_histogram = importance_histogram(imp.top_contributor, split.test.dim());
    imp.variance_histogram = importance_histogram(imp.top_variance_feature, split.test.dim());
    o.importance = std::move(imp);
  }
  if (config.verbose) {
    std::cerr << "[" << model_name(kind) << "] auc " << o.roc.auc << " f1 " << o.f1 << " over "
              << o.steps.size() - 1 << " batches\n";
  }
  return o;
}

json cmd_run(const ExperimentConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.out);

  json doc;
  doc["config"] = config_json(config);
  json repeats = json::array();
  json summary;
  std::map<std::string, std::vector<double>> aucs, f1s;

  for (std::size_t r = 0; r < config.repeat_seeds; ++r) {
    const std::uint64_t seed = config.online.seed + r;
    const StreamSplit split = prepare_split(config, seed);
    const auto& names = split.initial.feature_names;
    if (r == 0) {
      doc["dataset"] = {{"rows", split.training_rows() + split.test.size()},
                        {"features", split.initial.dim()},
                        {"feature_names", names},
                        {"initial_rows", split.initial.size()},
                        {"stream_rows", split.stream_rows()},
                        {"batches", split.batches.size()},
                        {"test_rows", split.test.size()},
                        {"window_capacity", window_capacity(split, config.online.window_proportion)}};
      doc["models"] = json::object();
      doc["timings"] = json::object();
    }
    json rep = {{"seed", seed}, {"models", json::object()}};
    for (ModelKind kind : config.models) {
      const std::string name(model_name(kind));
      const ModelOutcome o = run_model(kind, split, config, seed);
      aucs[name].push_back(o.roc.auc);
      f1s[name].push_back(o.f1);
      rep["models"][name] = {{"auc", o.roc.auc}, {"f1", o.f1}};
      if (r == 0) {
        const auto vk = make_model(kind, split.initial.dim(), config.settings)->variance_kind();
        doc["models"][name] = outcome_json(o, names, vk);
        doc["timings"][name] = timings_json(o);
        write_csvs(config.out, o, names);
      }
    }
    repeats.push_back(std::move(rep));
  }
  if (config.repeat_seeds > 1) {
    for (const auto& [name, v] : aucs) {
      summary[name] = {{"auc_mean", mean_of(v)},
                       {"auc_sd", sd_of(v)},
                       {"f1_mean", mean_of(f1s[name])},
                       {"f1_sd", sd_of(f1s[name])}};
    }
    doc["repeats"] = std::move(repeats);
    doc["repeat_summary"] = std::move(summary);
  }
  write_json(config.out / "results.json", doc);
  return doc;
}

namespace {

json sweep(const ExperimentConfig& config, const std::vector<double>& grid, const char* key,
           const char* tag, double OnlineConfig::*field) {
  if (grid.empty()) throw Error(Errc::kInvalidArgument, std::string("experiment: ") + key + " grid is empty");
  config.validate();
  std::filesystem::create_directories(config.out);
  json doc;
  doc["config"] = config_json(config);
  doc["sweep"] = key;
  doc["grid"] = grid;
  doc["models"] = json::object();
  doc["timings"] = json::object();
  for (double v : grid) {
    ExperimentConfig c = config;
    c.online.*field = v;
    c.out = config.out / (std::string(tag) + "_" + grid_label(v));
    if (config.verbose) std::cerr << "sweep " << key << " = " << v << "\n";
    const json run = cmd_run(c);
    for (ModelKind kind : config.models) {
      const std::string name(model_name(kind));
      doc["models"][name]["f1"].push_back(run["models"][name]["f1"]);
      doc["models"][name]["auc"].push_back(run["models"][name]["auc"]);
      doc["timings"][name]["total_retrain_seconds"].push_back(
          run["timings"][name]["total_retrain_seconds"]);
    }
  }
  const std::string stem = std::string("sweep_") + tag;
  write_json(config.out / (stem + ".json"), doc);
  {
    auto out = open_out(config.out / (stem + ".csv"));
    out << key;
    for (ModelKind kind : config.models) out << ',' << model_name(kind) << "_f1";
    out << '\n';
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out << grid[g];
      for (ModelKind kind : config.models) {
        out << ',' << doc["models"][std::string(model_name(kind))]["f1"][g].get<double>();
      }
      out << '\n';
    }
  }
  return doc;
}

}  // namespace

json cmd_sweep_window(const ExperimentConfig& config) {
  return sweep(config, config.window_grid, "window_proportion", "window",
               &OnlineConfig::window_proportion);
}

json cmd_sweep_al(const ExperimentConfig& config) {
  return sweep(config, config.al_grid, "al_fraction", "al", &OnlineConfig::al_fraction);
}

json without_timings(const json& doc) {
  if (doc.is_object()) {
    json out = json::object();
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (it.key() == "timings") continue;
      out[it.key()] = without_timings(it.value());
    }
    return out;
  }
  if (doc.is_array()) {
    json out = json::array();
    for (const auto& v : doc) out.push_back(without_timings(v));
    return out;
  }
  return doc;
}

}  // namespace addgp
