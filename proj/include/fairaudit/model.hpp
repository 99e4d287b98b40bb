#pragma once

// Weighted L2-regularized logistic regression trained by full-batch gradient
// descent from zero initialization. Fully deterministic: no data-dependent
// stopping, no randomness in the optimizer.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "fairaudit/common.hpp"
#include "fairaudit/data.hpp"

namespace fairaudit {

struct LogisticHyper {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2_penalty = 1e-4;

  friend bool operator==(const LogisticHyper&, const LogisticHyper&) = default;
};

inline void to_json(nlohmann::json& j, const LogisticHyper& h) {
  j = {{"learning_rate", h.learning_rate}, {"epochs", h.epochs}, {"l2_penalty", h.l2_penalty}};
}

inline void from_json(const nlohmann::json& j, LogisticHyper& h) {
  h.learning_rate = j.value("learning_rate", h.learning_rate);
  h.epochs = j.value("epochs", h.epochs);
  h.l2_penalty = j.value("l2_penalty", h.l2_penalty);
}

struct LogisticModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  LogisticHyper hyper;
  std::uint64_t seed = 0;
  std::uint64_t feature_hash = 0;  // FeatureEncoder::dictionary_hash of the training encoding
  Flags flags;

  [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(weights.size()); }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    j["weights"] = std::vector<double>(weights.data(), weights.data() + weights.size());
    j["bias"] = bias;
    j["hyper"] = hyper;
    j["seed"] = seed;
    j["feature_hash"] = feature_hash;
    j["flags"] = flags;
    return j;
  }

  static LogisticModel from_json(const nlohmann::json& j) {
    LogisticModel m;
    try {
      const auto w = j.at("weights").get<std::vector<double>>();
      m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      m.bias = j.at("bias").get<double>();
      m.hyper = j.at("hyper").get<LogisticHyper>();
      m.seed = j.at("seed").get<std::uint64_t>();
      m.feature_hash = j.value("feature_hash", std::uint64_t{0});
      m.flags = j.value("flags", Flags{});
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataError::Kind::InvalidConfig, std::string("model json: ") + e.what());
    }
    return m;
  }
};

/// Logistic function clamped to the open interval (0, 1).
inline double sigmoid(double z) noexcept {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(p, lo, hi);
}

/// Minimizes sum_i w_i * logloss_i / sum_i w_i + (l2/2) * |weights|^2 (bias
/// unpenalized). `seed` is recorded for provenance; the optimizer itself
/// draws no random numbers.
inline LogisticModel fit_logistic(const FeatureMatrix& X, std::span<const int> y, std::span<const double> w,
                                  const LogisticHyper& hyper = {}, std::uint64_t seed = 0) {
  const auto n = X.rows();
  if (y.size() != n || w.size() != n)
    throw DataError(DataError::Kind::DimensionMismatch,
                    "fit_logistic: X has " + std::to_string(n) + " rows, y " + std::to_string(y.size()) + ", w " +
                        std::to_string(w.size()));
  if (n == 0) throw DataError(DataError::Kind::DimensionMismatch, "fit_logistic: no training rows");
  double total = 0;
  for (double wi : w) {
    if (!(wi >= 0) || !std::isfinite(wi))
      throw DataError(DataError::Kind::RangeError, "fit_logistic: instance weights must be finite and >= 0");
    total += wi;
  }
  if (!(total > 0)) throw DataError(DataError::Kind::RangeError, "fit_logistic: instance weights sum to zero");
  if (hyper.epochs < 0 || !(hyper.learning_rate > 0))
    throw DataError(DataError::Kind::InvalidConfig, "fit_logistic: invalid hyperparameters");

  LogisticModel m;
  m.hyper = hyper;
  m.seed = seed;
  m.weights = Eigen::VectorXd::Zero(X.values.cols());

  std::size_t positives = 0;
  for (int yi : y) positives += yi == 1 ? 1U : 0U;
  if (positives == 0 || positives == n) add_flag(m.flags, "single_class_training_labels");

  const Eigen::Index rows = X.values.rows();
  Eigen::VectorXd target(rows), weight(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    target[i] = y[static_cast<std::size_t>(i)];
    weight[i] = w[static_cast<std::size_t>(i)] / total;
  }
  Eigen::VectorXd residual(rows);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const Eigen::VectorXd z = (X.values * m.weights).array() + m.bias;
    for (Eigen::Index i = 0; i < rows; ++i) residual[i] = weight[i] * (sigmoid(z[i]) - target[i]);
    const Eigen::VectorXd grad = X.values.transpose() * residual + hyper.l2_penalty * m.weights;
    m.weights -= hyper.learning_rate * grad;
    m.bias -= hyper.learning_rate * residual.sum();
  }
  return m;
}

inline LogisticModel fit_logistic(const FeatureMatrix& X, std::span<const int> y, const LogisticHyper& hyper = {},
                                  std::uint64_t seed = 0) {
  const std::vector<double> ones(y.size(), 1.0);
  return fit_logistic(X, y, ones, hyper, seed);
}

inline std::vector<double> predict_proba(const LogisticModel& m, const FeatureMatrix& X) {
  if (X.cols() != m.dimension())
    throw DataError(DataError::Kind::DimensionMismatch, "predict_proba: model has " + std::to_string(m.dimension()) +
                                                            " weights, input has " + std::to_string(X.cols()) +
                                                            " columns");
  const Eigen::VectorXd z = (X.values * m.weights).array() + m.bias;
  std::vector<double> p(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) p[static_cast<std::size_t>(i)] = sigmoid(z[i]);
  return p;
}

inline std::vector<int> threshold_labels(std::span<const double> prob, double threshold = 0.5) {
  std::vector<int> out(prob.size());
  for (std::size_t i = 0; i < prob.size(); ++i) out[i] = prob[i] > threshold ? 1 : 0;
  return out;
}

inline std::vector<int> predict(const LogisticModel& m, const FeatureMatrix& X, double threshold = 0.5) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw DataError(DataError::Kind::RangeError, "predict: threshold must lie in [0, 1]");
  return threshold_labels(predict_proba(m, X), threshold);
}

inline void save_model(const LogisticModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(DataError::Kind::Io, "cannot write " + path.string());
  out << m.to_json().dump(2) << '\n';
}

inline LogisticModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataError::Kind::Io, "cannot open " + path.string());
  return LogisticModel::from_json(nlohmann::json::parse(in));
}

}  // namespace fairaudit
