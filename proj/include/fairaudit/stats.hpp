#pragma once

// Nonparametric two-sample statistics and the significance-gated verdicts
// built on them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "fairaudit/common.hpp"

namespace fairaudit::stats {

inline constexpr double kAlpha = 0.05;
inline constexpr double kLargeEffect = 0.428;

struct TestResult {
  double statistic = 0;
  double p_value = 1;
  bool exact = false;
};

/// 1-based ranks with ties replaced by their average rank.
template <typename T>
std::vector<double> average_ranks(std::span<const T> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && !(values[order[i]] < values[order[j]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

namespace detail {

inline void require_nonempty(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.empty() || b.empty()) throw DataError(DataError::Kind::RangeError, std::string(op) + ": empty sample");
}

/// counts[u] = number of placements of n1 "a" items among n1+n2 slots whose
/// U statistic equals u (Mann-Whitney recurrence).
inline std::vector<std::uint64_t> u_distribution(std::size_t n1, std::size_t n2) {
  // table[i][j] holds the distribution for sizes (i, j).
  std::vector<std::vector<std::vector<std::uint64_t>>> table(n1 + 1, std::vector<std::vector<std::uint64_t>>(n2 + 1));
  for (std::size_t i = 0; i <= n1; ++i) {
    for (std::size_t j = 0; j <= n2; ++j) {
      auto& d = table[i][j];
      d.assign(i * j + 1, 0);
      if (i == 0 || j == 0) {
        d[0] = 1;
        continue;
      }
      // Largest element is from a (adds j to U) or from b (adds 0).
      const auto& from_a = table[i - 1][j];
      const auto& from_b = table[i][j - 1];
      for (std::size_t u = 0; u < from_a.size(); ++u) d[u + j] += from_a[u];
      for (std::size_t u = 0; u < from_b.size(); ++u) d[u] += from_b[u];
    }
  }
  return table[n1][n2];
}

}  // namespace detail

inline constexpr std::size_t kExactMaxTotal = 16;

/// Two-sided Mann-Whitney U test. The statistic is U for sample `a`. Exact
/// null distribution when |a|+|b| <= 16 and no value is tied; otherwise the
/// normal approximation with tie and continuity corrections.
inline TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  detail::require_nonempty(a, b, "mann_whitney_u");
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = average_ranks<double>(pooled);
  double r1 = 0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  const double u1 = r1 - 0.5 * static_cast<double>(n1 * (n1 + 1));

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0;
  bool ties = false;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    if (j - i > 1) ties = true;
    tie_term += t * t * t - t;
    i = j;
  }

  TestResult res;
  res.statistic = u1;
  if (!ties && n <= kExactMaxTotal) {
    const auto dist = detail::u_distribution(n1, n2);
    const auto u = static_cast<std::size_t>(std::llround(u1));
    std::uint64_t total = 0, le = 0, ge = 0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
      total += dist[k];
      if (k <= u) le += dist[k];
      if (k >= u) ge += dist[k];
    }
    const std::uint64_t tail = std::min(total, 2 * std::min(le, ge));
    res.p_value = static_cast<double>(tail) / static_cast<double>(total);
    res.exact = true;
    return res;
  }

  const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2), dn = static_cast<double>(n);
  const double mu = dn1 * dn2 / 2;
  const double var = dn1 * dn2 / 12.0 * ((dn + 1) - tie_term / (dn * (dn - 1)));
  if (!(var > 0)) {
    res.p_value = 1.0;
    return res;
  }
  const double z = std::max(0.0, std::abs(u1 - mu) - 0.5) / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

/// Cliff's delta: (#{a > b} - #{a < b}) / (|a| |b|) over all cross pairs.
inline double cliffs_delta(std::span<const double> a, std::span<const double> b) {
  detail::require_nonempty(a, b, "cliffs_delta");
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sb.begin(), sb.end());
  std::int64_t greater = 0, less = 0;
  for (double x : a) {
    greater += std::lower_bound(sb.begin(), sb.end(), x) - sb.begin();
    less += sb.end() - std::upper_bound(sb.begin(), sb.end(), x);
  }
  return static_cast<double>(greater - less) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

struct Correlation {
  double rho = 0;
  double p_value = 1;
  bool defined = false;  // false when either input is constant
};

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Spearman's rho (Pearson on average ranks) with a two-sided p-value from
/// t = rho * sqrt((n-2)/(1-rho^2)) on n-2 degrees of freedom.
inline Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DataError(DataError::Kind::DimensionMismatch, "spearman: samples differ in length");
  if (x.size() < 3) throw DataError(DataError::Kind::RangeError, "spearman: need at least 3 observations");
  const auto rx = average_ranks<double>(x);
  const auto ry = average_ranks<double>(y);
  auto constant = [](const std::vector<double>& r) {
    return std::all_of(r.begin(), r.end(), [&](double v) { return v == r.front(); });
  };
  Correlation c;
  if (constant(rx) || constant(ry)) return c;
  c.defined = true;
  c.rho = std::clamp(pearson(rx, ry), -1.0, 1.0);
  if (std::abs(c.rho) >= 1.0) {
    c.p_value = 0.0;
    return c;
  }
  const double dof = static_cast<double>(x.size()) - 2;
  const double t = c.rho * std::sqrt(dof / (1.0 - c.rho * c.rho));
  boost::math::students_t dist(dof);
  c.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  return c;
}

inline double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

enum class Direction { Increase, Tie, Decrease };

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Increase: return "increase";
    case Direction::Decrease: return "decrease";
    default: return "tie";
  }
}

struct ImpactVerdict {
  Direction direction = Direction::Tie;
  double p_value = 1;
  double delta = 0;
  bool large = false;
};

/// Significance gate first (p < 0.05), then the sign of mean(after) -
/// mean(before). Delta is Cliff's delta of after over before.
inline ImpactVerdict classify_impact(std::span<const double> before, std::span<const double> after) {
  detail::require_nonempty(before, after, "classify_impact");
  ImpactVerdict v;
  v.p_value = mann_whitney_u(after, before).p_value;
  v.delta = cliffs_delta(after, before);
  v.large = std::abs(v.delta) >= kLargeEffect;
  const double diff = mean(after) - mean(before);
  if (v.p_value < kAlpha && diff != 0) v.direction = diff > 0 ? Direction::Increase : Direction::Decrease;
  return v;
}

enum class Orientation { HigherBetter, LowerBetter };
enum class Outcome { Win, Tie, Loss };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Win: return "win";
    case Outcome::Loss: return "loss";
    default: return "tie";
  }
}

struct WtlVerdict {
  Outcome outcome = Outcome::Tie;
  Orientation orientation = Orientation::HigherBetter;
  double p_value = 1;
  double delta = 0;
};

inline WtlVerdict win_tie_loss(std::span<const double> candidate, std::span<const double> reference,
                               Orientation orientation) {
  detail::require_nonempty(candidate, reference, "win_tie_loss");
  WtlVerdict v;
  v.orientation = orientation;
  v.p_value = mann_whitney_u(candidate, reference).p_value;
  v.delta = cliffs_delta(candidate, reference);
  double diff = mean(candidate) - mean(reference);
  if (orientation == Orientation::LowerBetter) diff = -diff;
  if (v.p_value < kAlpha && diff != 0) v.outcome = diff > 0 ? Outcome::Win : Outcome::Loss;
  return v;
}

/// Orientation of a report metric key: FPR and the fairness gaps are
/// lower-better, everything else higher-better.
inline Orientation orientation_of(std::string_view metric) {
  if (metric.starts_with("fpr_") || metric == "spd" || metric == "eod" || metric == "aod")
    return Orientation::LowerBetter;
  return Orientation::HigherBetter;
}

}  // namespace fairaudit::stats
