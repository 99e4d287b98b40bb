#pragma once

// Repeated seeded runs of a task: split, fit the baseline, apply every
// configured method, evaluate on the chosen surface.

#include <atomic>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fairaudit/common.hpp"
#include "fairaudit/data.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/mitigation.hpp"
#include "fairaudit/model.hpp"

namespace fairaudit {

inline constexpr const char* kBaseMethod = "base";

enum class Surface { Test, Train };

inline std::string to_string(Surface s) { return s == Surface::Test ? "test" : "train"; }

inline Surface parse_surface(std::string_view s) {
  if (s == "test") return Surface::Test;
  if (s == "train") return Surface::Train;
  throw DataError(DataError::Kind::InvalidConfig, "surface must be \"test\" or \"train\", got \"" + std::string(s) + "\"");
}

struct MethodSpec {
  enum class Kind { Reweighing, Eop, NaiveBase, CounterfactualEnsemble, Selective, Scores };

  std::string name;
  Kind kind = Kind::Reweighing;
  std::string of;                    // Selective: source method
  std::vector<std::string> targets;  // Selective: group labels or keys; empty = unprivileged side
  std::filesystem::path scores;      // Scores: external score file

  static Kind parse_kind(const std::string& s) {
    if (s == "rew" || s == "reweighing") return Kind::Reweighing;
    if (s == "eop") return Kind::Eop;
    if (s == "naivebase") return Kind::NaiveBase;
    if (s == "cf_ensemble" || s == "counterfactual_ensemble") return Kind::CounterfactualEnsemble;
    throw DataError(DataError::Kind::InvalidConfig, "unknown method \"" + s + "\"");
  }

  static std::string kind_name(Kind k) {
    switch (k) {
      case Kind::Reweighing: return "rew";
      case Kind::Eop: return "eop";
      case Kind::NaiveBase: return "naivebase";
      case Kind::CounterfactualEnsemble: return "cf_ensemble";
      case Kind::Selective: return "selective";
      default: return "scores";
    }
  }
};

struct ExperimentConfig {
  std::string name;
  std::filesystem::path dataset;
  std::filesystem::path schema;
  std::vector<std::string> task;  // sensitive attribute subset; empty = all
  std::vector<MethodSpec> methods;
  int runs = 20;
  SplitConfig split;
  Surface surface = Surface::Test;
  std::uint64_t seed = 0;
  LogisticHyper hyper;

  void validate() const {
    if (runs < 1) throw DataError(DataError::Kind::InvalidConfig, "runs must be >= 1");
    std::set<std::string> names{kBaseMethod};
    for (const auto& m : methods) {
      if (!names.insert(m.name).second)
        throw DataError(DataError::Kind::InvalidConfig, "duplicate method name \"" + m.name + "\"");
      if (m.kind == MethodSpec::Kind::Selective && !names.contains(m.of))
        throw DataError(DataError::Kind::InvalidConfig,
                        "selective method \"" + m.name + "\" must follow its source method \"" + m.of + "\"");
    }
    if (!(split.train_fraction > 0 && split.train_fraction < 1))
      throw DataError(DataError::Kind::InvalidConfig, "train_fraction must lie in (0, 1)");
  }

  /// Relative paths resolve against `base_dir`.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    ExperimentConfig c;
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    try {
      c.name = j.value("name", std::string{});
      c.dataset = resolve(j.at("dataset").get<std::string>());
      c.schema = resolve(j.at("schema").get<std::string>());
      c.task = j.value("task", std::vector<std::string>{});
      c.runs = j.value("runs", 20);
      c.split.train_fraction = j.value("train_fraction", 0.7);
      c.surface = parse_surface(j.value("surface", std::string("test")));
      c.seed = j.value("seed", std::uint64_t{0});
      if (j.contains("model")) {
        const auto& m = j.at("model");
        if (m.value("type", std::string("lr")) != "lr")
          throw DataError(DataError::Kind::InvalidConfig, "only the built-in \"lr\" model is supported");
        c.hyper = m.value("hyper", LogisticHyper{});
      }
      for (const auto& mj : j.value("methods", nlohmann::json::array())) {
        MethodSpec m;
        if (mj.is_string()) {
          m.name = mj.get<std::string>();
          m.kind = MethodSpec::parse_kind(m.name);
        } else {
          m.name = mj.at("name").get<std::string>();
          if (mj.contains("selective")) {
            m.kind = MethodSpec::Kind::Selective;
            m.of = mj.at("selective").at("of").get<std::string>();
            m.targets = mj.at("selective").value("groups", std::vector<std::string>{});
          } else if (mj.contains("scores")) {
            m.kind = MethodSpec::Kind::Scores;
            m.scores = resolve(mj.at("scores").get<std::string>());
          } else {
            m.kind = MethodSpec::parse_kind(mj.value("method", m.name));
          }
        }
        if (m.name == kBaseMethod)
          throw DataError(DataError::Kind::InvalidConfig, "\"base\" is reserved for the unmitigated model");
        c.methods.push_back(std::move(m));
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataError::Kind::InvalidConfig, std::string("config: ") + e.what());
    }
    c.validate();
    return c;
  }

  static ExperimentConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(DataError::Kind::Io, "cannot open config " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataError::Kind::InvalidConfig, "config " + path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
  }

  /// Echo stored in results. Paths are reduced to file names so reports do
  /// not depend on the working directory.
  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["dataset"] = dataset.filename().string();
    j["schema"] = schema.filename().string();
    j["task"] = task;
    j["runs"] = runs;
    j["train_fraction"] = split.train_fraction;
    j["surface"] = to_string(surface);
    j["seed"] = seed;
    j["model"] = {{"type", "lr"}, {"hyper", hyper}};
    j["methods"] = nlohmann::json::array();
    for (const auto& m : methods) {
      nlohmann::json mj{{"name", m.name}, {"method", MethodSpec::kind_name(m.kind)}};
      if (m.kind == MethodSpec::Kind::Selective) mj["selective"] = {{"of", m.of}, {"groups", m.targets}};
      if (m.kind == MethodSpec::Kind::Scores) mj["scores"] = m.scores.filename().string();
      j["methods"].push_back(mj);
    }
    return j;
  }
};

// ------------------------------------------------------------ score files

/// Externally produced predictions: one PredictionSet per run_id, group ids
/// indexing `groups` (ranked by the favorable-label rate within the file).
struct ScoreSet {
  GroupAssignment groups;
  std::vector<PredictionSet> runs;  // ascending run_id
  std::vector<std::vector<std::string>> keys;  // per run, per row group key
};

/// Reads a CSV with columns run_id, y_true, y_pred, y_prob and one column per
/// sensitive attribute (raw values, compared against the schema's privileged
/// values).
inline ScoreSet load_scores(std::istream& in, const DatasetSchema& schema, std::vector<std::string> attributes = {},
                            const std::string& origin = "<scores>") {
  if (attributes.empty())
    for (const auto& s : schema.sensitive) attributes.push_back(s.name);
  std::sort(attributes.begin(), attributes.end(), [&](const auto& x, const auto& y) {
    return schema.sensitive_index(x).value_or(0) < schema.sensitive_index(y).value_or(0);
  });
  std::string line;
  if (!std::getline(in, line) || csv::trim(line).empty())
    throw DataError(DataError::Kind::EmptyFile, origin + ": empty score file");
  const auto header = csv::split_record(line);
  auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw missing_column(name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_run = col("run_id"), c_true = col("y_true"), c_pred = col("y_pred"), c_prob = col("y_prob");
  std::vector<std::pair<std::size_t, std::string>> attr_cols;  // column, privileged value
  for (const auto& a : attributes) {
    auto idx = schema.sensitive_index(a);
    if (!idx) throw DataError(DataError::Kind::InvalidConfig, "\"" + a + "\" is not a declared sensitive attribute");
    attr_cols.emplace_back(col(a), schema.sensitive[*idx].privileged);
  }

  struct Row {
    long long run;
    int y_true, y_pred;
    double y_prob;
    std::string key;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  auto where = [&] { return origin + ":" + std::to_string(line_no); };
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split_record(line);
    if (cells.size() != header.size())
      throw DataError(DataError::Kind::ParseError, where() + ": wrong number of cells");
    auto binary = [&](const std::string& cell, const char* what) {
      if (cell == "0") return 0;
      if (cell == "1") return 1;
      throw DataError(DataError::Kind::RangeError, where() + ": " + what + " must be 0 or 1, got \"" + cell + "\"");
    };
    Row r;
    const auto run = csv::parse_double(cells[c_run]);
    if (!run || *run != std::floor(*run) || *run < 0)
      throw DataError(DataError::Kind::ParseError, where() + ": run_id must be a non-negative integer");
    r.run = static_cast<long long>(*run);
    r.y_true = binary(cells[c_true], "y_true");
    r.y_pred = binary(cells[c_pred], "y_pred");
    const auto prob = csv::parse_double(cells[c_prob]);
    if (!prob) throw DataError(DataError::Kind::ParseError, where() + ": cannot parse y_prob");
    if (*prob < 0.0 || *prob > 1.0)
      throw DataError(DataError::Kind::RangeError, where() + ": y_prob " + cells[c_prob] + " outside [0,1]");
    r.y_prob = *prob;
    for (std::size_t a = 0; a < attr_cols.size(); ++a) {
      if (!r.key.empty()) r.key += '&';
      const bool priv = cells[attr_cols[a].first] == attr_cols[a].second;
      r.key += attributes[a] + (priv ? "=" : "!=") + attr_cols[a].second;
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw DataError(DataError::Kind::EmptyFile, origin + ": no score rows");

  std::vector<std::string> keys;
  std::vector<int> labels;
  for (const auto& r : rows) keys.push_back(r.key), labels.push_back(r.y_true);
  ScoreSet out;
  out.groups = rank_groups(attributes, keys, labels, keys);
  add_flag(out.groups.flags, "groups_ranked_on_score_file_labels");

  std::map<long long, std::vector<std::size_t>> by_run;
  for (std::size_t i = 0; i < rows.size(); ++i) by_run[rows[i].run].push_back(i);
  for (const auto& [run, idx] : by_run) {
    if (idx.size() < 2)
      throw DataError(DataError::Kind::RangeError, origin + ": run " + std::to_string(run) + " has fewer than 2 rows");
    PredictionSet p;
    p.run_id = static_cast<std::size_t>(run);
    std::vector<std::string> run_keys;
    for (auto i : idx) {
      p.y_true.push_back(rows[i].y_true);
      p.y_pred.push_back(rows[i].y_pred);
      p.y_prob.push_back(rows[i].y_prob);
      p.group_of.push_back(out.groups.group_of[i]);
      run_keys.push_back(rows[i].key);
    }
    out.runs.push_back(std::move(p));
    out.keys.push_back(std::move(run_keys));
  }
  return out;
}

inline ScoreSet load_scores(const std::filesystem::path& path, const DatasetSchema& schema,
                            std::vector<std::string> attributes = {}) {
  std::ifstream in(path);
  if (!in) throw DataError(DataError::Kind::Io, "cannot open score file " + path.string());
  return load_scores(in, schema, std::move(attributes), path.string());
}

/// Writes prediction sets in the score-file format. `raw_values[a]` gives,
/// per attribute, the (privileged, unprivileged) raw cell text to emit.
inline void write_scores(std::ostream& out, std::span<const PredictionSet> runs, const GroupAssignment& groups,
                         const DatasetSchema& schema) {
  out << "run_id,y_true,y_pred,y_prob";
  for (const auto& a : groups.attributes) out << ',' << a;
  out << '\n';
  out.precision(17);
  for (const auto& p : runs) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      out << p.run_id << ',' << p.y_true[i] << ',' << p.y_pred[i] << ',' << p.y_prob[i];
      const auto& key = groups.groups.at(p.group_of[i]);
      for (const auto& a : groups.attributes) {
        const auto& priv = schema.sensitive[*schema.sensitive_index(a)].privileged;
        const bool is_priv = key.find(a + "=" + priv) != std::string::npos &&
                             key.find(a + "!=" + priv) == std::string::npos;
        out << ',' << (is_priv ? priv : "not_" + priv);
      }
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------- results

/// One (method, run) outcome, stored as flat named values.
struct RunRecord {
  std::size_t run = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t split_hash = 0;
  bool ok = false;
  std::string error;
  std::map<std::string, std::optional<double>> values;
  std::map<std::string, std::string> groups;  // label -> key
  Flags flags;
  nlohmann::json details;  // fitted policy / ensemble parameters

  [[nodiscard]] std::optional<double> value(const std::string& key) const {
    auto it = values.find(key);
    return it == values.end() ? std::nullopt : it->second;
  }

  static RunRecord from_report(const MetricReport& r) {
    RunRecord rec;
    rec.ok = true;
    const auto j = r.to_json();
    for (const auto& [k, v] : j.items()) {
      if (k == "flags" || k == "groups") continue;
      rec.values[k] = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    }
    for (std::size_t g = 0; g < r.group_labels.size(); ++g) rec.groups[r.group_labels[g]] = r.group_keys[g];
    rec.flags = r.flags;
    return rec;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    j["run"] = run;
    j["split_seed"] = split_seed;
    j["split_hash"] = split_hash;
    j["ok"] = ok;
    if (!ok) j["error"] = error;
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [k, v] : values) metrics[k] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    j["metrics"] = metrics;
    j["groups"] = groups;
    j["flags"] = flags;
    if (!details.is_null()) j["details"] = details;
    return j;
  }

  static RunRecord from_json(const nlohmann::json& j) {
    RunRecord r;
    r.run = j.at("run").get<std::size_t>();
    r.split_seed = j.at("split_seed").get<std::uint64_t>();
    r.split_hash = j.at("split_hash").get<std::uint64_t>();
    r.ok = j.at("ok").get<bool>();
    r.error = j.value("error", std::string{});
    for (const auto& [k, v] : j.at("metrics").items())
      r.values[k] = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    r.groups = j.value("groups", std::map<std::string, std::string>{});
    r.flags = j.value("flags", Flags{});
    if (j.contains("details")) r.details = j.at("details");
    return r;
  }
};

struct MethodResults {
  std::string name;
  std::vector<RunRecord> runs;  // indexed by run

  /// Values of `key` over successful runs where it is defined.
  [[nodiscard]] std::vector<double> sample(const std::string& key) const {
    std::vector<double> out;
    for (const auto& r : runs)
      if (r.ok)
        if (auto v = r.value(key)) out.push_back(*v);
    return out;
  }
};

struct RunResults {
  std::string task;  // display name, e.g. Adult-Sex
  nlohmann::json config;
  std::vector<std::string> group_labels;
  std::vector<MethodResults> methods;  // base first
  Flags flags;

  [[nodiscard]] const MethodResults* find(std::string_view name) const {
    for (const auto& m : methods)
      if (m.name == name) return &m;
    return nullptr;
  }

  [[nodiscard]] const MethodResults& method(std::string_view name) const {
    if (auto* m = find(name)) return *m;
    throw DataError(DataError::Kind::InvalidConfig, "results for task \"" + task + "\" have no method \"" +
                                                        std::string(name) + "\"");
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = "fairaudit-results/1";
    j["task"] = task;
    j["config"] = config;
    j["group_labels"] = group_labels;
    j["methods"] = nlohmann::json::array();
    for (const auto& m : methods) {
      nlohmann::json mj{{"name", m.name}, {"runs", nlohmann::json::array()}};
      for (const auto& r : m.runs) mj["runs"].push_back(r.to_json());
      j["methods"].push_back(mj);
    }
    j["flags"] = flags;
    return j;
  }

  static RunResults from_json(const nlohmann::json& j) {
    RunResults r;
    try {
      r.task = j.at("task").get<std::string>();
      r.config = j.value("config", nlohmann::json::object());
      r.group_labels = j.at("group_labels").get<std::vector<std::string>>();
      for (const auto& mj : j.at("methods")) {
        MethodResults m;
        m.name = mj.at("name").get<std::string>();
        for (const auto& rj : mj.at("runs")) m.runs.push_back(RunRecord::from_json(rj));
        r.methods.push_back(std::move(m));
      }
      r.flags = j.value("flags", Flags{});
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataError::Kind::InvalidConfig, std::string("results json: ") + e.what());
    }
    return r;
  }

  /// Accepts a results.json file or a directory containing one.
  static RunResults load(std::filesystem::path path) {
    if (std::filesystem::is_directory(path)) path /= "results.json";
    std::ifstream in(path);
    if (!in) throw DataError(DataError::Kind::Io, "cannot open results " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataError::Kind::InvalidConfig, "results " + path.string() + ": " + e.what());
    }
    return from_json(j);
  }
};

/// Keys of the group-rate metrics in table order: every SR, then TPR, then FPR.
inline std::vector<std::string> group_metric_keys(std::span<const std::string> labels) {
  std::vector<std::string> out;
  for (const char* rate : {"sr", "tpr", "fpr"})
    for (const auto& l : labels) out.push_back(std::string(rate) + "_" + l);
  return out;
}

// -------------------------------------------------------------- the protocol

namespace detail {

struct RunContext {
  std::size_t run;
  std::uint64_t split_seed;
  std::uint64_t split_hash;
  GroupAssignment groups;
  std::vector<std::size_t> train_groups;
  FeatureEncoder encoder;
  FeatureMatrix X_train;
  std::vector<int> y_train;
  FeatureMatrix X_surface;
  std::vector<int> y_surface;
  std::vector<std::size_t> surface_groups;
};

inline PredictionSet model_predictions(const LogisticModel& m, const RunContext& ctx) {
  PredictionSet p;
  p.run_id = ctx.run;
  p.y_true = ctx.y_surface;
  p.y_prob = predict_proba(m, ctx.X_surface);
  p.y_pred = threshold_labels(p.y_prob);
  p.group_of = ctx.surface_groups;
  return p;
}

inline SelectiveScope resolve_scope(const MethodSpec& spec, const GroupAssignment& groups) {
  SelectiveScope scope;
  if (spec.targets.empty()) {
    // Unprivileged side: U for two groups, the lower half of the ranking otherwise.
    const std::size_t n = groups.size();
    for (std::size_t g = n == 2 ? 1 : n / 2; g < n; ++g) scope.target_groups.insert(g);
  } else {
    for (const auto& t : spec.targets) {
      auto g = groups.find_label(t);
      if (!g) throw DataError(DataError::Kind::InvalidConfig, "selective target \"" + t + "\" names no group");
      scope.target_groups.insert(*g);
    }
  }
  return scope;
}

}  // namespace detail

class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    schema_ = DatasetSchema::load(cfg_.schema);
    data_ = load_dataset(cfg_.dataset, schema_);
    for (const auto& m : cfg_.methods)
      if (m.kind == MethodSpec::Kind::Scores) scores_.emplace(m.name, load_scores(m.scores, schema_, cfg_.task));
  }

  Experiment(ExperimentConfig cfg, DatasetSchema schema, Dataset data)
      : cfg_(std::move(cfg)), schema_(std::move(schema)), data_(std::move(data)) {
    cfg_.validate();
  }

  [[nodiscard]] const ExperimentConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const Dataset& data() const noexcept { return data_; }

  /// Runs are independent given their derived seeds; `jobs` worker threads
  /// share them, and results are ordered by run index.
  [[nodiscard]] RunResults run(unsigned jobs = 1) const {
    const auto runs = static_cast<std::size_t>(cfg_.runs);
    std::vector<std::vector<RunRecord>> per_run(runs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t r = next++; r < runs; r = next++) {
        try {
          per_run[r] = run_one(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(runs)));
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    RunResults res;
    res.task = cfg_.name.empty() ? cfg_.dataset.stem().string() : cfg_.name;
    res.config = cfg_.to_json();
    res.methods.push_back({kBaseMethod, {}});
    for (const auto& m : cfg_.methods) res.methods.push_back({m.name, {}});
    for (std::size_t r = 0; r < runs; ++r)
      for (std::size_t m = 0; m < res.methods.size(); ++m) res.methods[m].runs.push_back(std::move(per_run[r][m]));
    // Label set from the baseline's runs (identical across runs by construction of keys).
    std::set<std::size_t> counts;
    for (const auto& rec : res.methods.front().runs) counts.insert(rec.groups.size());
    if (counts.size() > 1) add_flag(res.flags, "group_count_varies_across_runs");
    std::size_t most = counts.empty() ? 0 : *counts.rbegin();
    GroupAssignment shape;
    shape.groups.resize(most);
    res.group_labels = shape.labels();
    if (cfg_.surface == Surface::Train) add_flag(res.flags, "surface=train");
    for (const auto& m : res.methods)
      for (const auto& rec : m.runs)
        if (!rec.ok) add_flag(res.flags, "excluded_failed_run:" + m.name + ":" + std::to_string(rec.run));
    return res;
  }

  /// Builds the split, groups and encodings for run r.
  [[nodiscard]] detail::RunContext context(std::size_t r) const {
    detail::RunContext ctx;
    ctx.run = r;
    ctx.split_seed = derive_seed(cfg_.seed, r);
    auto [train_rows, test_rows] = split_indices(data_.size(), cfg_.split.train_fraction, ctx.split_seed);
    ctx.split_hash = hash_indices(train_rows);
    const Dataset train = data_.subset(train_rows);
    ctx.groups = assign_groups(train, data_, cfg_.task);
    ctx.train_groups = ctx.groups.ids_for(train);
    ctx.encoder = FeatureEncoder::fit(train);
    ctx.X_train = ctx.encoder.transform(train);
    ctx.y_train = train.labels();
    if (cfg_.surface == Surface::Test) {
      const Dataset test = data_.subset(test_rows);
      ctx.X_surface = ctx.encoder.transform(test);
      ctx.y_surface = test.labels();
      ctx.surface_groups = ctx.groups.ids_for(test);
    } else {
      ctx.X_surface = ctx.X_train;
      ctx.y_surface = ctx.y_train;
      ctx.surface_groups = ctx.train_groups;
    }
    return ctx;
  }

 private:
  [[nodiscard]] std::vector<RunRecord> run_one(std::size_t r) const {
    const auto ctx = context(r);
    const std::uint64_t validation_seed = derive_seed(ctx.split_seed, 1);
    const auto n_groups = ctx.groups.size();

    std::map<std::string, PredictionSet> preds;
    std::vector<RunRecord> out;
    auto record = [&](const std::string& name, const std::function<PredictionSet(nlohmann::json&)>& produce) {
      RunRecord rec;
      nlohmann::json details;
      try {
        auto p = produce(details);
        rec = RunRecord::from_report(evaluate(p, ctx.groups));
        preds.emplace(name, std::move(p));
      } catch (const std::exception& e) {
        rec = RunRecord{};
        rec.ok = false;
        rec.error = e.what();
      }
      rec.run = r;
      rec.split_seed = ctx.split_seed;
      rec.split_hash = ctx.split_hash;
      rec.details = std::move(details);
      for (const auto& f : ctx.groups.flags) add_flag(rec.flags, f);
      out.push_back(std::move(rec));
    };

    const LogisticModel base = fit_logistic(ctx.X_train, ctx.y_train, cfg_.hyper, ctx.split_seed);
    record(kBaseMethod, [&](nlohmann::json& details) {
      details["model_flags"] = base.flags;
      return detail::model_predictions(base, ctx);
    });

    for (const auto& spec : cfg_.methods) {
      record(spec.name, [&](nlohmann::json& details) -> PredictionSet {
        switch (spec.kind) {
          case MethodSpec::Kind::Reweighing: {
            const auto rw = reweigh(ctx.y_train, ctx.train_groups, n_groups);
            details["cell_weights"] = rw.cell;
            details["flags"] = rw.flags;
            const auto m = fit_logistic(ctx.X_train, ctx.y_train, rw.weights, cfg_.hyper, ctx.split_seed);
            return detail::model_predictions(m, ctx);
          }
          case MethodSpec::Kind::Eop: {
            auto [val_rows, fit_rows] = split_indices(ctx.X_train.rows(), 0.2, validation_seed);
            std::vector<int> yfit, yval;
            std::vector<std::size_t> gval;
            for (auto i : fit_rows) yfit.push_back(ctx.y_train[i]);
            for (auto i : val_rows) yval.push_back(ctx.y_train[i]), gval.push_back(ctx.train_groups[i]);
            const auto m = fit_logistic(ctx.X_train.select_rows(fit_rows), yfit, cfg_.hyper, ctx.split_seed);
            PredictionSet val;
            val.y_true = yval;
            val.y_prob = predict_proba(m, ctx.X_train.select_rows(val_rows));
            val.y_pred = threshold_labels(val.y_prob);
            val.group_of = gval;
            const auto pol = eop_fit(val, n_groups);
            details = pol.to_json();
            return eop_apply(pol, detail::model_predictions(m, ctx));
          }
          case MethodSpec::Kind::NaiveBase: {
            if (n_groups != 2)
              throw DataError(DataError::Kind::InvalidConfig, "naivebase requires a single-attribute task");
            const auto nb = naivebase_fit(ctx.X_train, ctx.y_train, ctx.train_groups, cfg_.hyper, validation_seed);
            details = nb.policy.to_json();
            return naivebase_apply(nb.policy, detail::model_predictions(nb.model, ctx));
          }
          case MethodSpec::Kind::CounterfactualEnsemble: {
            std::vector<std::size_t> flip;
            for (const auto& a : ctx.groups.attributes) flip.push_back(ctx.encoder.sensitive_column(a));
            const auto ens = counterfactual_ensemble_fit(ctx.X_train, ctx.y_train, ctx.train_groups, n_groups, flip,
                                                         cfg_.hyper, validation_seed);
            details = ens.to_json();
            auto p = counterfactual_ensemble_predict(ens, ctx.X_surface, ctx.y_surface, ctx.surface_groups);
            p.run_id = r;
            return p;
          }
          case MethodSpec::Kind::Selective: {
            auto base_it = preds.find(kBaseMethod);
            auto src_it = preds.find(spec.of);
            if (src_it == preds.end() || base_it == preds.end())
              throw DataError(DataError::Kind::InvalidConfig, "source method \"" + spec.of + "\" failed in this run");
            const auto scope = detail::resolve_scope(spec, ctx.groups);
            std::vector<std::string> labels;
            for (auto g : scope.target_groups) labels.push_back(ctx.groups.label(g));
            details["targets"] = labels;
            return selective_apply(base_it->second, src_it->second, scope);
          }
          case MethodSpec::Kind::Scores: {
            const auto& ss = scores_.at(spec.name);
            for (std::size_t k = 0; k < ss.runs.size(); ++k) {
              if (ss.runs[k].run_id != r) continue;
              PredictionSet p = ss.runs[k];
              std::map<std::string, std::size_t, std::less<>> index;
              for (std::size_t g = 0; g < ctx.groups.size(); ++g) index.emplace(ctx.groups.groups[g], g);
              for (std::size_t i = 0; i < p.size(); ++i) {
                auto it = index.find(ss.keys[k][i]);
                if (it == index.end())
                  throw DataError(DataError::Kind::Misaligned, "score group \"" + ss.keys[k][i] + "\" unknown");
                p.group_of[i] = it->second;
              }
              details["external"] = true;
              return p;
            }
            throw DataError(DataError::Kind::Misaligned, "score file has no run " + std::to_string(r));
          }
        }
        throw DataError(DataError::Kind::InvalidConfig, "unhandled method kind");
      });
    }
    return out;
  }

  ExperimentConfig cfg_;
  DatasetSchema schema_;
  Dataset data_;
  std::map<std::string, ScoreSet> scores_;
};

inline RunResults run_experiment(const ExperimentConfig& cfg, unsigned jobs = 1) { return Experiment(cfg).run(jobs); }

}  // namespace fairaudit
