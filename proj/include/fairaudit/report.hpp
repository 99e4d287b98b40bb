#pragma once

// Aggregation of run results into frequency, effect, correlation and
// win-tie-loss tables, and their JSON / CSV / markdown renderings.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairaudit/common.hpp"
#include "fairaudit/experiment.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

/// "sr_P" -> "SR_P", "spd" -> "SPD", "accuracy" unchanged.
inline std::string display_metric(const std::string& key) {
  std::string out = key;
  const auto us = out.find('_');
  const auto head = us == std::string::npos ? out.size() : us;
  const std::string stem = out.substr(0, head);
  if (stem == "sr" || stem == "tpr" || stem == "fpr" || stem == "spd" || stem == "eod" || stem == "aod" ||
      stem == "mcc")
    std::transform(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(head), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

/// Group-rate metrics of the first group half (P, or G1..G(n/2)) are the
/// privileged side; the rest are unprivileged.
inline bool is_privileged_metric(const std::string& key, std::size_t group_count) {
  const auto label = key.substr(key.find('_') + 1);
  if (label == "P") return true;
  if (label == "U") return false;
  const auto idx = std::stoul(label.substr(1));  // G<k>, 1-based
  return idx <= group_count / 2;
}

/// Fixed-point with three decimals, negative sign as U+2212.
inline std::string format_signed(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, std::abs(v));
  // Values that round to zero print unsigned.
  const bool negative = v < 0 && std::string(buf).find_first_not_of("0.") != std::string::npos;
  return (negative ? "−" : "") + std::string(buf);
}

// ---------------------------------------------------------------- frequency

struct FrequencyCell {
  int increase = 0, tie = 0, decrease = 0, unavailable = 0;

  [[nodiscard]] int total() const { return increase + tie + decrease + unavailable; }
};

struct FrequencyTable {
  std::vector<std::string> methods;
  std::vector<std::string> metrics;
  std::map<std::string, std::map<std::string, FrequencyCell>> cells;  // method -> metric -> counts
  int tasks = 0;
};

namespace detail {

/// Metric keys across tasks in first-seen order.
inline std::vector<std::string> union_group_metrics(std::span<const RunResults> tasks) {
  std::vector<std::string> out;
  for (const char* rate : {"sr", "tpr", "fpr"})
    for (const auto& t : tasks)
      for (const auto& l : t.group_labels) {
        const auto key = std::string(rate) + "_" + l;
        if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
      }
  return out;
}

inline std::vector<std::string> union_methods(std::span<const RunResults> tasks) {
  std::vector<std::string> out;
  for (const auto& t : tasks)
    for (const auto& m : t.methods)
      if (m.name != kBaseMethod && std::find(out.begin(), out.end(), m.name) == out.end()) out.push_back(m.name);
  return out;
}

inline void require_base(const RunResults& t) {
  if (!t.find(kBaseMethod))
    throw DataError(DataError::Kind::InvalidConfig, "results for task \"" + t.task + "\" lack the baseline");
}

}  // namespace detail

inline FrequencyTable frequency_table(std::span<const RunResults> tasks) {
  FrequencyTable ft;
  ft.methods = detail::union_methods(tasks);
  ft.metrics = detail::union_group_metrics(tasks);
  ft.tasks = static_cast<int>(tasks.size());
  for (const auto& m : ft.methods)
    for (const auto& k : ft.metrics) ft.cells[m][k] = {};
  for (const auto& t : tasks) {
    detail::require_base(t);
    const auto& base = t.method(kBaseMethod);
    for (const auto& m : ft.methods) {
      const auto* mr = t.find(m);
      for (const auto& k : ft.metrics) {
        auto& cell = ft.cells[m][k];
        const auto before = base.sample(k);
        const auto after = mr ? mr->sample(k) : std::vector<double>{};
        if (before.empty() || after.empty()) {
          ++cell.unavailable;
          continue;
        }
        switch (stats::classify_impact(before, after).direction) {
          case stats::Direction::Increase: ++cell.increase; break;
          case stats::Direction::Decrease: ++cell.decrease; break;
          default: ++cell.tie;
        }
      }
    }
  }
  return ft;
}

inline FrequencyTable frequency_table(const RunResults& task) { return frequency_table(std::span(&task, 1)); }

// ------------------------------------------------------------------- effect

struct EffectCell {
  std::optional<double> mean_change;  // mean over tasks of mean(after) - mean(before)
  std::optional<double> before, after;  // absolute values, mean over tasks
  std::optional<double> extreme_change;  // min for privileged metrics, max for unprivileged
  double large_share = 0;  // fraction of tasks with a significant, large change
  int tasks = 0;

  /// "−0.026 (0.462−0.489)": change, then after and before.
  [[nodiscard]] std::string render() const {
    if (!mean_change) return "n/a";
    return format_signed(*mean_change) + " (" + format_signed(*after) + "−" + format_signed(*before) + ")";
  }
};

struct EffectTable {
  std::vector<std::string> methods;
  std::vector<std::string> metrics;
  std::map<std::string, std::map<std::string, EffectCell>> cells;
};

inline EffectTable effect_table(std::span<const RunResults> tasks) {
  EffectTable et;
  et.methods = detail::union_methods(tasks);
  et.metrics = detail::union_group_metrics(tasks);
  struct Acc {
    std::vector<double> change, before, after;
    int large = 0;
    bool privileged = true;
  };
  std::map<std::string, std::map<std::string, Acc>> acc;
  for (const auto& t : tasks) {
    detail::require_base(t);
    const auto& base = t.method(kBaseMethod);
    for (const auto& m : et.methods) {
      const auto* mr = t.find(m);
      if (!mr) continue;
      for (const auto& k : et.metrics) {
        const auto before = base.sample(k);
        const auto after = mr->sample(k);
        if (before.empty() || after.empty()) continue;
        auto& a = acc[m][k];
        a.privileged = is_privileged_metric(k, t.group_labels.size());
        const double mb = stats::mean(before), ma = stats::mean(after);
        a.change.push_back(ma - mb);
        a.before.push_back(mb);
        a.after.push_back(ma);
        const auto v = stats::classify_impact(before, after);
        if (v.direction != stats::Direction::Tie && v.large) ++a.large;
      }
    }
  }
  for (const auto& m : et.methods) {
    for (const auto& k : et.metrics) {
      EffectCell c;
      if (auto it = acc[m].find(k); it != acc[m].end() && !it->second.change.empty()) {
        const auto& a = it->second;
        c.tasks = static_cast<int>(a.change.size());
        c.mean_change = stats::mean(a.change);
        c.before = stats::mean(a.before);
        c.after = stats::mean(a.after);
        c.extreme_change = a.privileged ? *std::min_element(a.change.begin(), a.change.end())
                                        : *std::max_element(a.change.begin(), a.change.end());
        c.large_share = static_cast<double>(a.large) / c.tasks;
      }
      et.cells[m][k] = c;
    }
  }
  return et;
}

inline EffectTable effect_table(const RunResults& task) { return effect_table(std::span(&task, 1)); }

// -------------------------------------------------------------- correlation

inline const std::vector<std::string>& delta_series_keys() {
  static const std::vector<std::string> keys{"sr_P", "tpr_P", "fpr_P", "sr_U", "tpr_U",
                                             "fpr_U", "spd",   "eod",   "aod"};
  return keys;
}

struct CorrelationMatrix {
  std::vector<std::string> metrics;
  std::vector<std::string> observations;  // "task/method"
  std::vector<std::vector<double>> series;  // per metric, per observation
  std::vector<std::vector<stats::Correlation>> cells;
  Flags flags;

  [[nodiscard]] const stats::Correlation& at(const std::string& a, const std::string& b) const {
    auto idx = [&](const std::string& k) {
      auto it = std::find(metrics.begin(), metrics.end(), k);
      if (it == metrics.end()) throw DataError(DataError::Kind::InvalidConfig, "no series \"" + k + "\"");
      return static_cast<std::size_t>(it - metrics.begin());
    };
    return cells[idx(a)][idx(b)];
  }
};

/// Spearman correlation between the nine run-mean delta series, one
/// observation per (two-group task, method).
inline CorrelationMatrix correlation_matrix(std::span<const RunResults> tasks) {
  CorrelationMatrix cm;
  cm.metrics = delta_series_keys();
  cm.series.resize(cm.metrics.size());
  for (const auto& t : tasks) {
    if (t.group_labels.size() != 2) {
      add_flag(cm.flags, "skipped_multi_group_task:" + t.task);
      continue;
    }
    detail::require_base(t);
    const auto& base = t.method(kBaseMethod);
    for (const auto& m : t.methods) {
      if (m.name == kBaseMethod) continue;
      std::vector<double> deltas;
      for (const auto& k : cm.metrics) {
        const auto before = base.sample(k), after = m.sample(k);
        if (before.empty() || after.empty()) break;
        deltas.push_back(stats::mean(after) - stats::mean(before));
      }
      if (deltas.size() != cm.metrics.size()) {
        add_flag(cm.flags, "skipped_incomplete_observation:" + t.task + "/" + m.name);
        continue;
      }
      cm.observations.push_back(t.task + "/" + m.name);
      for (std::size_t k = 0; k < deltas.size(); ++k) cm.series[k].push_back(deltas[k]);
    }
  }
  if (cm.observations.size() < 3)
    throw DataError(DataError::Kind::RangeError, "correlation_matrix: need at least 3 (task, method) observations, got " +
                                                     std::to_string(cm.observations.size()));
  const std::size_t n = cm.metrics.size();
  cm.cells.assign(n, std::vector<stats::Correlation>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      auto c = stats::spearman(cm.series[a], cm.series[b]);
      if (a == b && c.defined) c = {1.0, 0.0, true};
      cm.cells[a][b] = cm.cells[b][a] = c;
    }
    if (!cm.cells[a][a].defined) add_flag(cm.flags, "constant_delta_series:" + cm.metrics[a]);
  }
  return cm;
}

// ----------------------------------------------------------- win-tie-loss

struct ComparisonRow {
  std::string metric;
  int win = 0, tie = 0, loss = 0;
  std::vector<stats::WtlVerdict> verdicts;  // per task
};

struct Comparison {
  std::string a_method, b_method;
  std::vector<std::string> tasks;
  std::vector<ComparisonRow> rows;
  std::vector<double> overall_sr_delta;  // per task: mean(a) - mean(b)
  Flags flags;

  [[nodiscard]] double mean_overall_sr_delta() const { return stats::mean(overall_sr_delta); }

  [[nodiscard]] const ComparisonRow& row(const std::string& metric) const {
    for (const auto& r : rows)
      if (r.metric == metric) return r;
    throw DataError(DataError::Kind::InvalidConfig, "comparison has no metric \"" + metric + "\"");
  }
};

inline std::vector<std::string> comparison_metrics(std::span<const std::string> labels) {
  auto keys = group_metric_keys(labels);
  for (const char* k : {"spd", "eod", "aod", "accuracy", "macro_precision", "macro_recall", "macro_f1", "mcc"}) keys.emplace_back(k);
  return keys;
}

/// Pairs (a_task, b_task) must share run splits; a mismatch is fatal.
inline Comparison compare_methods(std::span<const RunResults> a_tasks, const std::string& a_method,
                                  std::span<const RunResults> b_tasks, const std::string& b_method) {
  if (a_tasks.size() != b_tasks.size())
    throw DataError(DataError::Kind::SplitMismatch, "compare: task lists differ in length");
  Comparison cmp;
  cmp.a_method = a_method;
  cmp.b_method = b_method;
  std::map<std::string, std::size_t> row_of;
  for (std::size_t t = 0; t < a_tasks.size(); ++t) {
    const auto& ma = a_tasks[t].method(a_method);
    const auto& mb = b_tasks[t].method(b_method);
    if (ma.runs.size() != mb.runs.size())
      throw DataError(DataError::Kind::SplitMismatch, "compare: run counts differ for task " + a_tasks[t].task);
    for (std::size_t r = 0; r < ma.runs.size(); ++r)
      if (ma.runs[r].split_hash != mb.runs[r].split_hash)
        throw DataError(DataError::Kind::SplitMismatch,
                        "compare: run " + std::to_string(r) + " of task " + a_tasks[t].task + " uses different splits");
    cmp.tasks.push_back(a_tasks[t].task);
    for (const auto& k : comparison_metrics(a_tasks[t].group_labels)) {
      const auto sa = ma.sample(k), sb = mb.sample(k);
      if (sa.empty() || sb.empty()) {
        add_flag(cmp.flags, "metric_unavailable:" + a_tasks[t].task + ":" + k);
        continue;
      }
      auto [it, inserted] = row_of.emplace(k, cmp.rows.size());
      if (inserted) cmp.rows.push_back(ComparisonRow{k, 0, 0, 0, {}});
      auto& row = cmp.rows[it->second];
      const auto v = stats::win_tie_loss(sa, sb, stats::orientation_of(k));
      row.verdicts.push_back(v);
      switch (v.outcome) {
        case stats::Outcome::Win: ++row.win; break;
        case stats::Outcome::Loss: ++row.loss; break;
        default: ++row.tie;
      }
    }
    const auto oa = ma.sample("overall_sr"), ob = mb.sample("overall_sr");
    cmp.overall_sr_delta.push_back(oa.empty() || ob.empty() ? 0.0 : stats::mean(oa) - stats::mean(ob));
  }
  return cmp;
}

inline Comparison compare_methods(const RunResults& a, const std::string& a_method, const RunResults& b,
                                  const std::string& b_method) {
  return compare_methods(std::span(&a, 1), a_method, std::span(&b, 1), b_method);
}

// ------------------------------------------------------------------ report

struct Report {
  std::vector<std::string> tasks;
  std::optional<FrequencyTable> frequency;
  std::optional<EffectTable> effect;
  std::optional<CorrelationMatrix> correlation;
  std::optional<Comparison> comparison;
  Flags flags;
};

/// Frequency and effect tables for the tasks, plus the correlation matrix
/// when enough two-group observations exist.
inline Report build_report(std::span<const RunResults> tasks) {
  Report r;
  for (const auto& t : tasks) {
    r.tasks.push_back(t.task);
    for (const auto& f : t.flags) add_flag(r.flags, t.task + ":" + f);
  }
  r.frequency = frequency_table(tasks);
  r.effect = effect_table(tasks);
  try {
    r.correlation = correlation_matrix(tasks);
  } catch (const DataError& e) {
    if (e.kind() != DataError::Kind::RangeError) throw;
    add_flag(r.flags, "correlation_skipped_too_few_observations");
  }
  return r;
}

namespace detail {

inline nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace detail

inline nlohmann::json to_json(const Report& r) {
  using nlohmann::json;
  json j;
  j["format"] = "fairaudit-report/1";
  j["tasks"] = r.tasks;
  j["flags"] = r.flags;
  if (r.frequency) {
    const auto& ft = *r.frequency;
    json f{{"methods", ft.methods}, {"metrics", ft.metrics}, {"tasks", ft.tasks}, {"cells", json::object()}};
    for (const auto& m : ft.methods)
      for (const auto& k : ft.metrics) {
        const auto& c = ft.cells.at(m).at(k);
        f["cells"][m][k] = {{"increase", c.increase}, {"tie", c.tie}, {"decrease", c.decrease},
                            {"unavailable", c.unavailable}};
      }
    j["frequency"] = f;
  }
  if (r.effect) {
    const auto& et = *r.effect;
    json e{{"methods", et.methods}, {"metrics", et.metrics}, {"cells", json::object()}};
    for (const auto& m : et.methods)
      for (const auto& k : et.metrics) {
        const auto& c = et.cells.at(m).at(k);
        e["cells"][m][k] = {{"mean_change", detail::opt(c.mean_change)},
                            {"before", detail::opt(c.before)},
                            {"after", detail::opt(c.after)},
                            {"extreme_change", detail::opt(c.extreme_change)},
                            {"large_share", c.large_share},
                            {"tasks", c.tasks}};
      }
    j["effect"] = e;
  }
  if (r.correlation) {
    const auto& cm = *r.correlation;
    json c{{"metrics", cm.metrics}, {"observations", cm.observations}, {"flags", cm.flags}};
    json rho = json::array(), p = json::array();
    for (const auto& row : cm.cells) {
      json rr = json::array(), pr = json::array();
      for (const auto& cell : row) {
        rr.push_back(cell.defined ? json(cell.rho) : json(nullptr));
        pr.push_back(cell.defined ? json(cell.p_value) : json(nullptr));
      }
      rho.push_back(rr);
      p.push_back(pr);
    }
    c["rho"] = rho;
    c["p_value"] = p;
    j["correlation"] = c;
  }
  if (r.comparison) {
    const auto& cmp = *r.comparison;
    json c{{"a", cmp.a_method},
           {"b", cmp.b_method},
           {"tasks", cmp.tasks},
           {"overall_sr_delta", cmp.overall_sr_delta},
           {"mean_overall_sr_delta", cmp.mean_overall_sr_delta()},
           {"flags", cmp.flags},
           {"rows", json::array()}};
    for (const auto& row : cmp.rows) {
      json verdicts = json::array();
      for (const auto& v : row.verdicts)
        verdicts.push_back({{"outcome", stats::to_string(v.outcome)}, {"p_value", v.p_value}, {"delta", v.delta}});
      c["rows"].push_back(
          {{"metric", row.metric}, {"win", row.win}, {"tie", row.tie}, {"loss", row.loss}, {"verdicts", verdicts}});
    }
    j["comparison"] = c;
  }
  return j;
}

/// One line per table cell: section,row,column,field,value.
inline std::string to_csv(const Report& r) {
  std::ostringstream out;
  out.precision(17);
  out << "section,row,column,field,value\n";
  auto put = [&](const std::string& s, const std::string& row, const std::string& col, const std::string& field,
                 const auto& v) { out << s << ',' << row << ',' << col << ',' << field << ',' << v << '\n'; };
  if (r.frequency)
    for (const auto& m : r.frequency->methods)
      for (const auto& k : r.frequency->metrics) {
        const auto& c = r.frequency->cells.at(m).at(k);
        put("frequency", m, k, "increase", c.increase);
        put("frequency", m, k, "tie", c.tie);
        put("frequency", m, k, "decrease", c.decrease);
        put("frequency", m, k, "unavailable", c.unavailable);
      }
  if (r.effect)
    for (const auto& m : r.effect->methods)
      for (const auto& k : r.effect->metrics) {
        const auto& c = r.effect->cells.at(m).at(k);
        if (!c.mean_change) continue;
        put("effect", m, k, "mean_change", *c.mean_change);
        put("effect", m, k, "before", *c.before);
        put("effect", m, k, "after", *c.after);
        put("effect", m, k, "extreme_change", *c.extreme_change);
        put("effect", m, k, "large_share", c.large_share);
      }
  if (r.correlation) {
    const auto& cm = *r.correlation;
    for (std::size_t a = 0; a < cm.metrics.size(); ++a)
      for (std::size_t b = 0; b < cm.metrics.size(); ++b) {
        const auto& c = cm.cells[a][b];
        if (!c.defined) continue;
        put("correlation", cm.metrics[a], cm.metrics[b], "rho", c.rho);
        put("correlation", cm.metrics[a], cm.metrics[b], "p_value", c.p_value);
      }
  }
  if (r.comparison) {
    for (const auto& row : r.comparison->rows) {
      put("comparison", row.metric, "", "win", row.win);
      put("comparison", row.metric, "", "tie", row.tie);
      put("comparison", row.metric, "", "loss", row.loss);
    }
    put("comparison", "overall_sr", "", "mean_delta", r.comparison->mean_overall_sr_delta());
  }
  return out.str();
}

inline std::string to_markdown(const Report& r) {
  std::ostringstream out;
  auto header = [&](const std::string& first, const std::vector<std::string>& cols) {
    out << "| " << first;
    for (const auto& c : cols) out << " | " << display_metric(c);
    out << " |\n|---";
    for (std::size_t i = 0; i < cols.size(); ++i) out << "|---";
    out << "|\n";
  };
  if (r.frequency) {
    const auto& ft = *r.frequency;
    out << "## Significant changes (" << ft.tasks << (ft.tasks == 1 ? " task" : " tasks") << ")\n\n";
    header("Method", ft.metrics);
    for (const auto& m : ft.methods) {
      out << "| " << m;
      for (const auto& k : ft.metrics) {
        const auto& c = ft.cells.at(m).at(k);
        out << " | ↑" << c.increase << " −" << c.tie << " ↓" << c.decrease;
        if (c.unavailable) out << " n/a" << c.unavailable;
      }
      out << " |\n";
    }
    out << '\n';
  }
  if (r.effect) {
    const auto& et = *r.effect;
    out << "## Mean change (after−before)\n\n";
    header("Method", et.metrics);
    for (const auto& m : et.methods) {
      out << "| " << m;
      for (const auto& k : et.metrics) out << " | " << et.cells.at(m).at(k).render();
      out << " |\n";
    }
    out << "\n## Extreme change and share of large effects\n\n";
    header("Method", et.metrics);
    for (const auto& m : et.methods) {
      out << "| " << m;
      for (const auto& k : et.metrics) {
        const auto& c = et.cells.at(m).at(k);
        if (!c.extreme_change) {
          out << " | n/a";
          continue;
        }
        char pct[16];
        std::snprintf(pct, sizeof pct, "%.0f%%", 100.0 * c.large_share);
        out << " | " << format_signed(*c.extreme_change) << " / " << pct;
      }
      out << " |\n";
    }
    out << '\n';
  }
  if (r.correlation) {
    const auto& cm = *r.correlation;
    out << "## Spearman correlation of deltas (" << cm.observations.size()
        << " observations; * marks p >= 0.05)\n\n";
    std::vector<std::string> cols;
    for (const auto& k : cm.metrics) cols.push_back("Δ" + display_metric(k));
    out << "| ";
    for (const auto& c : cols) out << " | " << c;
    out << " |\n|---";
    for (std::size_t i = 0; i < cols.size(); ++i) out << "|---";
    out << "|\n";
    for (std::size_t a = 0; a < cm.metrics.size(); ++a) {
      out << "| " << cols[a];
      for (std::size_t b = 0; b < cm.metrics.size(); ++b) {
        const auto& c = cm.cells[a][b];
        if (!c.defined) {
          out << " | n/a";
          continue;
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", c.rho);
        out << " | " << buf << (c.p_value >= stats::kAlpha ? "*" : "");
      }
      out << " |\n";
    }
    out << '\n';
  }
  if (r.comparison) {
    const auto& cmp = *r.comparison;
    out << "## " << cmp.a_method << " vs. " << cmp.b_method << "\n\n| Metric | Win | Tie | Loss |\n|---|---|---|---|\n";
    for (const auto& row : cmp.rows)
      out << "| " << display_metric(row.metric) << " | " << row.win << " | " << row.tie << " | " << row.loss << " |\n";
    out << "\nMean overall SR difference: " << format_signed(cmp.mean_overall_sr_delta(), 4) << "\n\n";
  }
  if (!r.flags.empty()) {
    out << "Flags:\n\n";
    for (const auto& f : r.flags) out << "- " << f << '\n';
  }
  return out.str();
}

enum class ReportFormat { Json, Csv, Markdown };

inline ReportFormat parse_format(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw DataError(DataError::Kind::InvalidConfig, "unknown report format \"" + std::string(s) + "\"");
}

inline std::string render(const Report& r, ReportFormat f) {
  switch (f) {
    case ReportFormat::Json: return to_json(r).dump(2) + "\n";
    case ReportFormat::Csv: return to_csv(r);
    default: return to_markdown(r);
  }
}

inline std::string extension(ReportFormat f) {
  switch (f) {
    case ReportFormat::Json: return ".json";
    case ReportFormat::Csv: return ".csv";
    default: return ".md";
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw DataError(DataError::Kind::Io, "cannot write " + path.string());
}

/// Writes `<dir>/<stem>.<ext>` and returns its path.
inline std::filesystem::path emit_report(const Report& r, ReportFormat f, const std::filesystem::path& dir,
                                         const std::string& stem = "report") {
  const auto path = dir / (stem + extension(f));
  write_text(path, render(r, f));
  return path;
}

}  // namespace fairaudit
