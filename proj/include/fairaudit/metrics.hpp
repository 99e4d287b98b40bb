#pragma once

// Group-disaggregated benefit rates (SR/TPR/FPR), group fairness scores
// (SPD/EOD/AOD with the max-disparity extension to n groups) and overall
// classification performance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairaudit/common.hpp"
#include "fairaudit/data.hpp"

namespace fairaudit {

/// Aligned outcomes of one evaluation run. Group ids index a
/// GroupAssignment's ranked group list.
struct PredictionSet {
  std::vector<int> y_true;
  std::vector<int> y_pred;
  std::vector<double> y_prob;
  std::vector<std::size_t> group_of;
  std::size_t run_id = 0;

  [[nodiscard]] std::size_t size() const noexcept { return y_true.size(); }

  void validate() const {
    const auto n = y_true.size();
    if (y_pred.size() != n || y_prob.size() != n || group_of.size() != n)
      throw DataError(DataError::Kind::Misaligned, "prediction set: vectors differ in length");
    for (std::size_t i = 0; i < n; ++i) {
      if ((y_true[i] != 0 && y_true[i] != 1) || (y_pred[i] != 0 && y_pred[i] != 1))
        throw DataError(DataError::Kind::RangeError, "prediction set: non-binary label at row " + std::to_string(i));
      if (!std::isfinite(y_prob[i]) || y_prob[i] < 0.0 || y_prob[i] > 1.0)
        throw DataError(DataError::Kind::RangeError, "prediction set: probability outside [0,1] at row " +
                                                         std::to_string(i));
    }
  }

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  [[nodiscard]] std::size_t total() const noexcept { return tp + fp + fn + tn; }
  [[nodiscard]] std::size_t positives() const noexcept { return tp + fn; }
  [[nodiscard]] std::size_t negatives() const noexcept { return fp + tn; }
  [[nodiscard]] std::size_t selected() const noexcept { return tp + fp; }

  void add(int truth, int pred) noexcept {
    if (truth == 1) {
      (pred == 1 ? tp : fn) += 1;
    } else {
      (pred == 1 ? fp : tn) += 1;
    }
  }
};

struct GroupRate {
  Confusion counts;
  std::optional<double> sr;   // undefined: empty group
  std::optional<double> tpr;  // undefined: no Y=1 members
  std::optional<double> fpr;  // undefined: no Y=0 members
};

struct GroupRates {
  std::vector<GroupRate> groups;
  Flags flags;

  [[nodiscard]] std::size_t size() const noexcept { return groups.size(); }
};

inline std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

inline GroupRates group_rates(const PredictionSet& p, std::size_t group_count) {
  if (p.size() == 0) throw DataError(DataError::Kind::RangeError, "group_rates: empty prediction set");
  GroupRates r;
  r.groups.resize(group_count);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.group_of[i] >= group_count)
      throw DataError(DataError::Kind::Misaligned, "group_rates: group id out of range at row " + std::to_string(i));
    r.groups[p.group_of[i]].counts.add(p.y_true[i], p.y_pred[i]);
  }
  for (std::size_t g = 0; g < group_count; ++g) {
    auto& gr = r.groups[g];
    gr.sr = ratio(gr.counts.selected(), gr.counts.total());
    gr.tpr = ratio(gr.counts.tp, gr.counts.positives());
    gr.fpr = ratio(gr.counts.fp, gr.counts.negatives());
    const auto tag = std::to_string(g);
    if (!gr.sr) add_flag(r.flags, "sr_undefined:group" + tag + ":no_members");
    if (!gr.tpr) add_flag(r.flags, "tpr_undefined:group" + tag + ":no_positive_labels");
    if (!gr.fpr) add_flag(r.flags, "fpr_undefined:group" + tag + ":no_negative_labels");
  }
  return r;
}

inline GroupRates group_rates(const PredictionSet& p, const GroupAssignment& groups) {
  return group_rates(p, groups.size());
}

namespace detail {

inline const GroupRate& pair_member(const GroupRates& r, std::size_t g, const char* op) {
  if (r.size() != 2)
    throw DataError(DataError::Kind::RangeError, std::string(op) + ": requires exactly two groups, got " +
                                                     std::to_string(r.size()));
  return r.groups[g];
}

inline double need(const std::optional<double>& v, const char* op, const char* what) {
  if (!v) throw DataError(DataError::Kind::RangeError, std::string(op) + ": " + what + " undefined");
  return *v;
}

}  // namespace detail

/// |SR_P - SR_U|; group 0 is privileged.
inline double spd(const GroupRates& r) {
  const auto& P = detail::pair_member(r, 0, "spd");
  const auto& U = detail::pair_member(r, 1, "spd");
  return std::abs(detail::need(P.sr, "spd", "SR_P") - detail::need(U.sr, "spd", "SR_U"));
}

inline double eod(const GroupRates& r) {
  const auto& P = detail::pair_member(r, 0, "eod");
  const auto& U = detail::pair_member(r, 1, "eod");
  return std::abs(detail::need(P.tpr, "eod", "TPR_P") - detail::need(U.tpr, "eod", "TPR_U"));
}

/// |((TPR_i - TPR_j) + (FPR_i - FPR_j)) / 2|
inline double average_odds(double tpr_i, double tpr_j, double fpr_i, double fpr_j) noexcept {
  return std::abs(0.5 * ((tpr_i - tpr_j) + (fpr_i - fpr_j)));
}

inline double aod(const GroupRates& r) {
  const auto& P = detail::pair_member(r, 0, "aod");
  const auto& U = detail::pair_member(r, 1, "aod");
  return average_odds(detail::need(P.tpr, "aod", "TPR_P"), detail::need(U.tpr, "aod", "TPR_U"),
                      detail::need(P.fpr, "aod", "FPR_P"), detail::need(U.fpr, "aod", "FPR_U"));
}

struct FairnessScores {
  std::optional<double> spd;
  std::optional<double> eod;
  std::optional<double> aod;
  Flags flags;
};

/// Max-disparity fairness over any number of groups. Groups with an
/// undefined rate drop out of that component; a component with fewer than
/// two contributing groups is left empty and flagged.
inline FairnessScores fairness_scores(const GroupRates& r) {
  FairnessScores out;
  auto spread = [&](auto pick, const char* name) -> std::optional<double> {
    std::optional<double> lo, hi;
    std::size_t used = 0;
    for (std::size_t g = 0; g < r.size(); ++g) {
      const auto v = pick(r.groups[g]);
      if (!v) {
        add_flag(out.flags, std::string(name) + "_excludes_group" + std::to_string(g));
        continue;
      }
      ++used;
      lo = lo ? std::min(*lo, *v) : *v;
      hi = hi ? std::max(*hi, *v) : *v;
    }
    if (used < 2) {
      add_flag(out.flags, std::string(name) + "_undefined");
      return std::nullopt;
    }
    return *hi - *lo;
  };
  out.spd = spread([](const GroupRate& g) { return g.sr; }, "spd");
  out.eod = spread([](const GroupRate& g) { return g.tpr; }, "eod");

  std::size_t used = 0;
  double best = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto& a = r.groups[i];
    if (!a.tpr || !a.fpr) {
      add_flag(out.flags, "aod_excludes_group" + std::to_string(i));
      continue;
    }
    ++used;
    for (std::size_t j = i + 1; j < r.size(); ++j) {
      const auto& b = r.groups[j];
      if (!b.tpr || !b.fpr) continue;
      best = std::max(best, average_odds(*a.tpr, *b.tpr, *a.fpr, *b.fpr));
    }
  }
  if (used >= 2) {
    out.aod = best;
  } else {
    add_flag(out.flags, "aod_undefined");
  }
  return out;
}

inline FairnessScores multi_fairness(const GroupRates& r) {
  if (r.size() < 2)
    throw DataError(DataError::Kind::RangeError, "multi_fairness: needs at least two groups");
  auto s = fairness_scores(r);
  if (!s.spd || !s.eod || !s.aod)
    throw DataError(DataError::Kind::RangeError, "multi_fairness: fewer than two groups with defined rates");
  return s;
}

struct PerformanceScores {
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  double mcc = 0;
};

inline PerformanceScores performance(const Confusion& c) {
  auto safe = [](double num, double den) { return den > 0 ? num / den : 0.0; };
  const auto tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  PerformanceScores s;
  s.accuracy = safe(tp + tn, tp + fp + fn + tn);
  // Class 1 and class 0 views of the same confusion matrix.
  const double p1 = safe(tp, tp + fp), r1 = safe(tp, tp + fn);
  const double p0 = safe(tn, tn + fn), r0 = safe(tn, tn + fp);
  const double f1 = safe(2 * p1 * r1, p1 + r1), f0 = safe(2 * p0 * r0, p0 + r0);
  s.macro_precision = (p1 + p0) / 2;
  s.macro_recall = (r1 + r0) / 2;
  s.macro_f1 = (f1 + f0) / 2;
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  s.mcc = den > 0 ? (tp * tn - fp * fn) / std::sqrt(den) : 0.0;
  return s;
}

inline PerformanceScores performance(const PredictionSet& p) {
  if (p.size() == 0) throw DataError(DataError::Kind::RangeError, "performance: empty prediction set");
  Confusion c;
  for (std::size_t i = 0; i < p.size(); ++i) c.add(p.y_true[i], p.y_pred[i]);
  return performance(c);
}

inline double selection_rate(const PredictionSet& p) {
  if (p.size() == 0) return 0.0;
  std::size_t s = 0;
  for (int v : p.y_pred) s += v == 1 ? 1U : 0U;
  return static_cast<double>(s) / static_cast<double>(p.size());
}

/// Everything measured for one (method, run).
struct MetricReport {
  std::vector<std::string> group_labels;  // P/U or G1..Gn, rank order
  std::vector<std::string> group_keys;
  GroupRates rates;
  FairnessScores fairness;
  PerformanceScores perf;
  double overall_sr = 0;
  Flags flags;

  /// Named scalar lookup: sr_P, tpr_G3, spd, accuracy, overall_sr, ...
  [[nodiscard]] std::optional<double> value(std::string_view key) const {
    for (std::size_t g = 0; g < group_labels.size(); ++g) {
      const auto& gr = rates.groups[g];
      if (key == "sr_" + group_labels[g]) return gr.sr;
      if (key == "tpr_" + group_labels[g]) return gr.tpr;
      if (key == "fpr_" + group_labels[g]) return gr.fpr;
    }
    if (key == "spd") return fairness.spd;
    if (key == "eod") return fairness.eod;
    if (key == "aod") return fairness.aod;
    if (key == "accuracy") return perf.accuracy;
    if (key == "macro_precision") return perf.macro_precision;
    if (key == "macro_recall") return perf.macro_recall;
    if (key == "macro_f1") return perf.macro_f1;
    if (key == "mcc") return perf.mcc;
    if (key == "overall_sr") return overall_sr;
    return std::nullopt;
  }

  /// Flat JSON: sr_<group>, tpr_<group>, fpr_<group>, fairness, performance,
  /// overall_sr, groups (label -> key) and flags. Undefined values are null.
  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    auto put = [&](const std::string& k, const std::optional<double>& v) {
      j[k] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    for (std::size_t g = 0; g < group_labels.size(); ++g) {
      put("sr_" + group_labels[g], rates.groups[g].sr);
      put("tpr_" + group_labels[g], rates.groups[g].tpr);
      put("fpr_" + group_labels[g], rates.groups[g].fpr);
      j["groups"][group_labels[g]] = group_keys[g];
    }
    put("spd", fairness.spd);
    put("eod", fairness.eod);
    put("aod", fairness.aod);
    j["accuracy"] = perf.accuracy;
    j["macro_precision"] = perf.macro_precision;
    j["macro_recall"] = perf.macro_recall;
    j["macro_f1"] = perf.macro_f1;
    j["mcc"] = perf.mcc;
    j["overall_sr"] = overall_sr;
    j["flags"] = flags;
    return j;
  }
};

inline MetricReport evaluate(const PredictionSet& p, const GroupAssignment& groups) {
  p.validate();
  MetricReport r;
  r.group_labels = groups.labels();
  r.group_keys = groups.groups;
  r.rates = group_rates(p, groups.size());
  r.fairness = fairness_scores(r.rates);
  r.perf = performance(p);
  r.overall_sr = selection_rate(p);
  r.flags = r.rates.flags;
  for (const auto& f : r.fairness.flags) add_flag(r.flags, f);
  return r;
}

}  // namespace fairaudit
