#pragma once

// Bias mitigation: reweighing, group-threshold post-processing (EOP),
// NaiveBase equal-selection-rate thresholds, selective application of a
// mitigator to designated groups, and a counterfactual two-model ensemble.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairaudit/common.hpp"
#include "fairaudit/data.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/model.hpp"

namespace fairaudit {

// ---------------------------------------------------------------- reweighing

struct Reweighing {
  std::vector<double> weights;                // per instance
  std::vector<std::array<double, 2>> cell;    // [group][label]
  Flags flags;
};

/// w(g, l) = P(g) P(l) / P(g, l) from empirical frequencies; empty cells get
/// weight 0 and a flag.
inline Reweighing reweigh(std::span<const int> labels, std::span<const std::size_t> group_of, std::size_t group_count) {
  if (labels.empty()) throw DataError(DataError::Kind::RangeError, "reweigh: empty training set");
  if (labels.size() != group_of.size()) throw DataError(DataError::Kind::Misaligned, "reweigh: misaligned inputs");
  const auto n = static_cast<double>(labels.size());
  std::vector<std::array<std::size_t, 2>> joint(group_count, {0, 0});
  std::array<std::size_t, 2> label_count{0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto l = static_cast<std::size_t>(labels[i] == 1);
    joint.at(group_of[i])[l] += 1;
    label_count[l] += 1;
  }
  Reweighing r;
  r.cell.resize(group_count);
  for (std::size_t g = 0; g < group_count; ++g) {
    const auto group_total = static_cast<double>(joint[g][0] + joint[g][1]);
    for (std::size_t l = 0; l < 2; ++l) {
      if (joint[g][l] == 0) {
        r.cell[g][l] = 0.0;
        if (group_total > 0)
          add_flag(r.flags, "empty_cell:group" + std::to_string(g) + ":label" + std::to_string(l));
        continue;
      }
      // (n_g / n)(n_l / n) / (n_gl / n) = n_g n_l / (n n_gl)
      r.cell[g][l] = group_total * static_cast<double>(label_count[l]) / (n * static_cast<double>(joint[g][l]));
    }
  }
  r.weights.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) r.weights[i] = r.cell[group_of[i]][labels[i] == 1 ? 1 : 0];
  return r;
}

inline Reweighing reweigh(const Dataset& train, const GroupAssignment& groups) {
  const auto ids = groups.ids_for(train);
  return reweigh(train.labels(), ids, groups.size());
}

// ----------------------------------------------------------------------- EOP

struct EOPolicy {
  std::vector<double> thresholds;  // per group
  Flags flags;

  [[nodiscard]] nlohmann::json to_json() const { return {{"thresholds", thresholds}, {"flags", flags}}; }
};

namespace detail {

inline constexpr int kGridSteps = 100;
inline double grid_value(int i) { return static_cast<double>(i) / kGridSteps; }

struct RateCurve {
  bool present = false;
  std::vector<std::optional<double>> tpr, fpr;  // indexed by grid step
};

/// |spread(TPR)| + |spread(FPR)| over groups with defined rates.
inline double eop_objective(const std::vector<RateCurve>& curves, const std::vector<int>& steps) {
  double tlo = std::numeric_limits<double>::infinity(), thi = -tlo, flo = tlo, fhi = -tlo;
  std::size_t nt = 0, nf = 0;
  for (std::size_t g = 0; g < curves.size(); ++g) {
    if (!curves[g].present) continue;
    if (const auto& t = curves[g].tpr[static_cast<std::size_t>(steps[g])]) {
      tlo = std::min(tlo, *t), thi = std::max(thi, *t), ++nt;
    }
    if (const auto& f = curves[g].fpr[static_cast<std::size_t>(steps[g])]) {
      flo = std::min(flo, *f), fhi = std::max(fhi, *f), ++nf;
    }
  }
  return (nt >= 2 ? thi - tlo : 0.0) + (nf >= 2 ? fhi - flo : 0.0);
}

inline constexpr double kTieTolerance = 1e-12;

/// True when candidate (objective, steps) beats incumbent under: lower
/// objective, then thresholds closer to 0.5 in total, then lower thresholds.
inline bool better(double obj, const std::vector<int>& steps, double best_obj, const std::vector<int>& best_steps) {
  if (obj < best_obj - kTieTolerance) return true;
  if (obj > best_obj + kTieTolerance) return false;
  auto dist = [](const std::vector<int>& s) {
    int d = 0;
    for (int v : s) d += std::abs(v - kGridSteps / 2);
    return d;
  };
  const int d = dist(steps), bd = dist(best_steps);
  if (d != bd) return d < bd;
  return steps < best_steps;
}

}  // namespace detail

/// Per-group thresholds on the grid {0.00, 0.01, ..., 1.00} minimizing the
/// validation |dTPR| + |dFPR|, with the top-ranked group anchored at 0.5.
/// Exhaustive for two groups; coordinate descent from all-0.5 for more.
inline EOPolicy eop_fit(const PredictionSet& val, std::size_t group_count) {
  val.validate();
  using detail::kGridSteps;
  std::vector<detail::RateCurve> curves(group_count);
  EOPolicy pol;
  for (std::size_t g = 0; g < group_count; ++g) {
    auto& c = curves[g];
    c.tpr.resize(kGridSteps + 1);
    c.fpr.resize(kGridSteps + 1);
    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < val.size(); ++i) {
      if (val.group_of[i] != g) continue;
      (val.y_true[i] == 1 ? pos : neg) += 1;
    }
    c.present = pos + neg > 0;
    if (!c.present) {
      add_flag(pol.flags, "group_missing_from_validation:group" + std::to_string(g));
      continue;
    }
    for (int s = 0; s <= kGridSteps; ++s) {
      const double t = detail::grid_value(s);
      std::size_t tp = 0, fp = 0;
      for (std::size_t i = 0; i < val.size(); ++i) {
        if (val.group_of[i] != g || !(val.y_prob[i] > t)) continue;
        (val.y_true[i] == 1 ? tp : fp) += 1;
      }
      c.tpr[static_cast<std::size_t>(s)] = ratio(tp, pos);
      c.fpr[static_cast<std::size_t>(s)] = ratio(fp, neg);
    }
  }

  std::vector<int> best(group_count, kGridSteps / 2);
  double best_obj = detail::eop_objective(curves, best);
  // The highest-ranked present group stays at 0.5. Freeing every threshold
  // admits the trivial optimum where all groups accept everyone.
  std::vector<std::size_t> free;
  for (std::size_t g = 0; g < group_count; ++g)
    if (curves[g].present) free.push_back(g);
  if (!free.empty()) free.erase(free.begin());

  // One free group: a single sweep is exhaustive. More: coordinate descent.
  for (int sweep = 0; sweep < 100 && !free.empty(); ++sweep) {
    bool moved = false;
    for (auto g : free) {
      std::vector<int> s = best;
      for (int a = 0; a <= kGridSteps; ++a) {
        s[g] = a;
        const double obj = detail::eop_objective(curves, s);
        if (detail::better(obj, s, best_obj, best)) best_obj = obj, best = s, moved = true;
      }
    }
    if (!moved || free.size() == 1) break;
  }
  for (int s : best) pol.thresholds.push_back(detail::grid_value(s));
  return pol;
}

/// Relabels y_pred by group-specific thresholding of y_prob.
inline PredictionSet eop_apply(const EOPolicy& pol, const PredictionSet& p) {
  PredictionSet out = p;
  for (std::size_t i = 0; i < p.size(); ++i)
    out.y_pred[i] = p.y_prob[i] > pol.thresholds.at(p.group_of[i]) ? 1 : 0;
  return out;
}

/// Validation |dTPR| + |dFPR| of `p` as labeled.
inline double odds_gap(const PredictionSet& p, std::size_t group_count) {
  const auto r = group_rates(p, group_count);
  auto spread = [&](auto pick) {
    std::optional<double> lo, hi;
    std::size_t n = 0;
    for (const auto& g : r.groups)
      if (auto v = pick(g)) lo = lo ? std::min(*lo, *v) : *v, hi = hi ? std::max(*hi, *v) : *v, ++n;
    return n >= 2 ? *hi - *lo : 0.0;
  };
  return spread([](const GroupRate& g) { return g.tpr; }) + spread([](const GroupRate& g) { return g.fpr; });
}

// ----------------------------------------------------------------- NaiveBase

struct NaiveBasePolicy {
  std::optional<double> threshold;  // nullopt: select none of the unprivileged group
  double privileged_sr = 0;         // x
  std::size_t top_k = 0;
  std::size_t unprivileged_validation_size = 0;

  [[nodiscard]] bool select_none() const noexcept { return !threshold.has_value(); }

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"threshold", threshold ? nlohmann::json(*threshold) : nlohmann::json("select-none")},
            {"privileged_sr", privileged_sr},
            {"top_k", top_k},
            {"unprivileged_validation_size", unprivileged_validation_size}};
  }
};

inline constexpr std::size_t kPrivileged = 0;
inline constexpr std::size_t kUnprivileged = 1;

/// x = privileged validation SR at threshold 0.5; the unprivileged threshold
/// is the k-th largest unprivileged validation probability, k = round(x |U|).
inline NaiveBasePolicy naivebase_policy(std::span<const double> val_prob, std::span<const std::size_t> val_group) {
  if (val_prob.size() != val_group.size())
    throw DataError(DataError::Kind::Misaligned, "naivebase: misaligned validation inputs");
  std::size_t priv = 0, priv_selected = 0;
  std::vector<double> unpriv;
  for (std::size_t i = 0; i < val_prob.size(); ++i) {
    if (val_group[i] == kPrivileged) {
      ++priv;
      priv_selected += val_prob[i] > 0.5 ? 1U : 0U;
    } else if (val_group[i] == kUnprivileged) {
      unpriv.push_back(val_prob[i]);
    } else {
      throw DataError(DataError::Kind::RangeError, "naivebase: defined for two-group tasks only");
    }
  }
  if (priv == 0 || unpriv.empty())
    throw DataError(DataError::Kind::RangeError, "naivebase: validation set lacks one of the two groups");
  NaiveBasePolicy pol;
  pol.privileged_sr = static_cast<double>(priv_selected) / static_cast<double>(priv);
  pol.unprivileged_validation_size = unpriv.size();
  pol.top_k = static_cast<std::size_t>(std::llround(pol.privileged_sr * static_cast<double>(unpriv.size())));
  if (pol.top_k > 0) {
    std::sort(unpriv.begin(), unpriv.end(), std::greater<>());
    pol.threshold = unpriv[pol.top_k - 1];
  }
  return pol;
}

/// Privileged rows keep the model's 0.5 decision; unprivileged rows are
/// selected when their probability is >= the policy threshold.
inline PredictionSet naivebase_apply(const NaiveBasePolicy& pol, const PredictionSet& model_out) {
  PredictionSet out = model_out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.group_of[i] == kPrivileged) {
      out.y_pred[i] = out.y_prob[i] > 0.5 ? 1 : 0;
    } else {
      out.y_pred[i] = (pol.threshold && out.y_prob[i] >= *pol.threshold) ? 1 : 0;
    }
  }
  return out;
}

struct NaiveBaseModel {
  LogisticModel model;
  NaiveBasePolicy policy;
  std::vector<std::size_t> fit_rows;         // the 80% used for training
  std::vector<std::size_t> validation_rows;  // the 20% used for the policy
};

/// Seeded 80/20 split of the training rows: the model is fit on 80%, the
/// policy on the 20% validation rows.
inline NaiveBaseModel naivebase_fit(const FeatureMatrix& X, std::span<const int> y,
                                    std::span<const std::size_t> group_of, const LogisticHyper& hyper,
                                    std::uint64_t seed) {
  if (y.size() != X.rows() || group_of.size() != X.rows())
    throw DataError(DataError::Kind::DimensionMismatch, "naivebase_fit: misaligned inputs");
  auto [val_rows, fit_rows] = split_indices(X.rows(), 0.2, seed);
  NaiveBaseModel nb;
  const auto Xfit = X.select_rows(fit_rows);
  std::vector<int> yfit;
  for (auto r : fit_rows) yfit.push_back(y[r]);
  nb.model = fit_logistic(Xfit, yfit, hyper, seed);
  const auto prob = predict_proba(nb.model, X.select_rows(val_rows));
  std::vector<std::size_t> gval;
  for (auto r : val_rows) gval.push_back(group_of[r]);
  nb.policy = naivebase_policy(prob, gval);
  nb.fit_rows = std::move(fit_rows);
  nb.validation_rows = std::move(val_rows);
  return nb;
}

// ------------------------------------------------------- selective application

struct SelectiveScope {
  std::set<std::size_t> target_groups;
};

/// Rows in scope take the mitigated prediction and probability; every other
/// row is copied from `base` unchanged.
inline PredictionSet selective_apply(const PredictionSet& base, const PredictionSet& mitigated,
                                     const SelectiveScope& scope) {
  if (scope.target_groups.empty())
    throw DataError(DataError::Kind::InvalidConfig, "selective_apply: empty scope");
  if (base.size() != mitigated.size() || base.y_true != mitigated.y_true || base.group_of != mitigated.group_of)
    throw DataError(DataError::Kind::Misaligned, "selective_apply: base and mitigated sets are not aligned");
  PredictionSet out = base;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (scope.target_groups.contains(base.group_of[i])) {
      out.y_pred[i] = mitigated.y_pred[i];
      out.y_prob[i] = mitigated.y_prob[i];
    }
  }
  return out;
}

// ----------------------------------------------- counterfactual ensemble

struct LambdaChoice {
  double lambda = 1.0;
  double spd = 0;
  double accuracy = 0;
  double factual_accuracy = 0;
  Flags flags;
};

inline constexpr double kAccuracyGuard = 0.02;

inline std::vector<double> blend(std::span<const double> p_factual, std::span<const double> p_counterfactual,
                                 double lambda) {
  std::vector<double> out(p_factual.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = lambda * p_factual[i] + (1.0 - lambda) * p_counterfactual[i];
  return out;
}

/// Picks lambda in {0, 0.1, ..., 1} minimizing validation SPD (max-min group
/// SR) subject to accuracy >= factual accuracy - 0.02; ties go to the lambda
/// closest to 0.5, then the smaller one.
inline LambdaChoice select_lambda(std::span<const double> p_factual, std::span<const double> p_counterfactual,
                                  std::span<const int> y, std::span<const std::size_t> group_of,
                                  std::size_t group_count) {
  if (p_factual.size() != y.size() || p_counterfactual.size() != y.size() || group_of.size() != y.size())
    throw DataError(DataError::Kind::Misaligned, "select_lambda: misaligned inputs");
  auto evaluate_at = [&](double lambda) {
    PredictionSet p;
    p.y_true.assign(y.begin(), y.end());
    p.y_prob = blend(p_factual, p_counterfactual, lambda);
    p.y_pred = threshold_labels(p.y_prob);
    p.group_of.assign(group_of.begin(), group_of.end());
    const auto rates = group_rates(p, group_count);
    return std::pair{fairness_scores(rates).spd, performance(p).accuracy};
  };
  LambdaChoice best;
  const auto [factual_spd, factual_acc] = evaluate_at(1.0);
  best.factual_accuracy = factual_acc;
  best.accuracy = factual_acc;
  if (!factual_spd) {
    add_flag(best.flags, "spd_undefined_on_validation");
    return best;
  }
  best.spd = *factual_spd;
  int best_step = 10;
  for (int step = 0; step <= 10; ++step) {
    const double lambda = step / 10.0;
    const auto [spd, acc] = evaluate_at(lambda);
    if (!spd || acc < factual_acc - kAccuracyGuard) continue;
    const bool lower = *spd < best.spd - detail::kTieTolerance;
    const bool tie = std::abs(*spd - best.spd) <= detail::kTieTolerance;
    const bool closer = std::abs(step - 5) < std::abs(best_step - 5) ||
                        (std::abs(step - 5) == std::abs(best_step - 5) && step < best_step);
    if (lower || (tie && closer)) {
      best_step = step;
      best.lambda = lambda;
      best.spd = *spd;
      best.accuracy = acc;
    }
  }
  return best;
}

/// Copy of X with each listed 0/1 indicator column flipped.
inline FeatureMatrix counterfactual(const FeatureMatrix& X, std::span<const std::size_t> columns) {
  FeatureMatrix out = X;
  for (auto c : columns) {
    auto col = out.values.col(static_cast<Eigen::Index>(c));
    col = (1.0 - col.array()).matrix();
  }
  return out;
}

struct EnsembleModel {
  LogisticModel factual;
  LogisticModel counterfactual;
  LambdaChoice choice;
  std::vector<std::size_t> flip_columns;
  Flags flags;

  [[nodiscard]] double lambda() const noexcept { return choice.lambda; }

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"lambda", choice.lambda},
            {"validation_spd", choice.spd},
            {"validation_accuracy", choice.accuracy},
            {"factual_accuracy", choice.factual_accuracy},
            {"flip_columns", flip_columns},
            {"flags", flags}};
  }
};

/// Factual and counterfactual logistic models fit on a seeded 80% of the
/// training rows; lambda chosen on the remaining 20%. The counterfactual
/// training set flips every listed sensitive indicator column.
inline EnsembleModel counterfactual_ensemble_fit(const FeatureMatrix& X, std::span<const int> y,
                                                 std::span<const std::size_t> group_of, std::size_t group_count,
                                                 std::vector<std::size_t> flip_columns, const LogisticHyper& hyper,
                                                 std::uint64_t seed) {
  if (y.size() != X.rows() || group_of.size() != X.rows())
    throw DataError(DataError::Kind::DimensionMismatch, "counterfactual_ensemble_fit: misaligned inputs");
  auto [val_rows, fit_rows] = split_indices(X.rows(), 0.2, seed);
  EnsembleModel m;
  m.flip_columns = flip_columns;
  const auto Xfit = X.select_rows(fit_rows);
  std::vector<int> yfit;
  for (auto r : fit_rows) yfit.push_back(y[r]);
  m.factual = fit_logistic(Xfit, yfit, hyper, seed);

  bool varies = false;
  for (auto c : flip_columns) {
    const auto col = X.values.col(static_cast<Eigen::Index>(c));
    varies = varies || col.minCoeff() != col.maxCoeff();
  }
  if (!varies) {
    // Flipping a constant attribute produces an unobserved value; keep the
    // factual model alone.
    m.counterfactual = m.factual;
    m.choice.lambda = 1.0;
    add_flag(m.flags, "degenerate_sensitive_attribute:lambda_forced_to_1");
    return m;
  }
  m.counterfactual = fit_logistic(counterfactual(Xfit, flip_columns), yfit, hyper, seed);

  const auto Xval = X.select_rows(val_rows);
  std::vector<int> yval;
  std::vector<std::size_t> gval;
  for (auto r : val_rows) yval.push_back(y[r]), gval.push_back(group_of[r]);
  m.choice = select_lambda(predict_proba(m.factual, Xval), predict_proba(m.counterfactual, Xval), yval, gval,
                           group_count);
  for (const auto& f : m.choice.flags) add_flag(m.flags, f);
  return m;
}

inline std::vector<double> counterfactual_ensemble_proba(const EnsembleModel& m, const FeatureMatrix& X) {
  return blend(predict_proba(m.factual, X), predict_proba(m.counterfactual, X), m.choice.lambda);
}

inline PredictionSet counterfactual_ensemble_predict(const EnsembleModel& m, const FeatureMatrix& X,
                                                     std::span<const int> y_true,
                                                     std::span<const std::size_t> group_of) {
  PredictionSet p;
  p.y_true.assign(y_true.begin(), y_true.end());
  p.y_prob = counterfactual_ensemble_proba(m, X);
  p.y_pred = threshold_labels(p.y_prob);
  p.group_of.assign(group_of.begin(), group_of.end());
  return p;
}

}  // namespace fairaudit
