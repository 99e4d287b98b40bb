#pragma once

// Tabular dataset ingestion: schema, CSV loading, seeded splits, demographic
// groups and feature encoding.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "fairaudit/common.hpp"

namespace fairaudit {

enum class FeatureKind { Numeric, Categorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
};

struct SensitiveSpec {
  std::string name;
  std::string privileged;
};

struct DatasetSchema {
  std::string label;
  std::string favorable;
  std::vector<FeatureSpec> features;
  std::vector<SensitiveSpec> sensitive;

  void validate() const {
    auto bad = [](const std::string& msg) { return DataError(DataError::Kind::InvalidSchema, msg); };
    if (label.empty()) throw bad("schema: empty label column name");
    if (sensitive.empty()) throw bad("schema: at least one sensitive attribute is required");
    std::vector<std::string> seen{label};
    auto claim = [&](const std::string& name) {
      if (std::find(seen.begin(), seen.end(), name) != seen.end())
        throw bad("schema: column \"" + name + "\" declared more than once");
      seen.push_back(name);
    };
    for (const auto& s : sensitive) claim(s.name);
    for (const auto& f : features) claim(f.name);
  }

  [[nodiscard]] std::optional<std::size_t> sensitive_index(std::string_view name) const {
    for (std::size_t i = 0; i < sensitive.size(); ++i)
      if (sensitive[i].name == name) return i;
    return std::nullopt;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    j["label"] = label;
    j["favorable"] = favorable;
    j["features"] = nlohmann::json::array();
    for (const auto& f : features)
      j["features"].push_back({{"name", f.name}, {"kind", f.kind == FeatureKind::Numeric ? "numeric" : "categorical"}});
    j["sensitive"] = nlohmann::json::array();
    for (const auto& s : sensitive) j["sensitive"].push_back({{"name", s.name}, {"privileged", s.privileged}});
    return j;
  }

  static DatasetSchema from_json(const nlohmann::json& j) {
    DatasetSchema s;
    try {
      s.label = j.at("label").get<std::string>();
      s.favorable = j.at("favorable").get<std::string>();
      for (const auto& f : j.value("features", nlohmann::json::array())) {
        const auto kind = f.at("kind").get<std::string>();
        if (kind != "numeric" && kind != "categorical")
          throw DataError(DataError::Kind::InvalidSchema, "schema: unknown feature kind \"" + kind + "\"");
        s.features.push_back({f.at("name").get<std::string>(),
                              kind == "numeric" ? FeatureKind::Numeric : FeatureKind::Categorical});
      }
      for (const auto& a : j.at("sensitive")) {
        // Privileged values are compared as raw CSV text.
        const auto& v = a.at("privileged");
        s.sensitive.push_back({a.at("name").get<std::string>(), v.is_string() ? v.get<std::string>() : v.dump()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataError::Kind::InvalidSchema, std::string("schema: ") + e.what());
    }
    s.validate();
    return s;
  }

  static DatasetSchema load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(DataError::Kind::Io, "cannot open schema file " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataError::Kind::InvalidSchema, "schema " + path.string() + ": " + e.what());
    }
    return from_json(j);
  }
};

namespace csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Splits one comma-separated record. Double-quoted fields may contain
/// commas and "" escapes; embedded newlines are not supported.
inline std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.emplace_back(trim(cell));
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace csv

/// One declared feature column. Categorical cells are codes into a level
/// table shared by every subset of the same load.
struct Column {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  std::vector<double> numeric;
  std::vector<std::int32_t> codes;
  std::shared_ptr<const std::vector<std::string>> levels;
};

class Dataset {
 public:
  Dataset() = default;

  [[nodiscard]] const DatasetSchema& schema() const noexcept { return schema_; }
  [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
  [[nodiscard]] const std::vector<int>& labels() const noexcept { return labels_; }
  [[nodiscard]] const std::vector<Column>& features() const noexcept { return features_; }
  /// Per sensitive attribute (schema order): 1 where the row holds the privileged value.
  [[nodiscard]] const std::vector<std::vector<std::uint8_t>>& privileged() const noexcept { return privileged_; }
  /// Row positions in the originally loaded file.
  [[nodiscard]] const std::vector<std::size_t>& row_ids() const noexcept { return row_ids_; }

  [[nodiscard]] Dataset subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.schema_ = schema_;
    out.labels_.reserve(rows.size());
    out.row_ids_.reserve(rows.size());
    for (auto r : rows) {
      out.labels_.push_back(labels_.at(r));
      out.row_ids_.push_back(row_ids_[r]);
    }
    out.features_.reserve(features_.size());
    for (const auto& col : features_) {
      Column c{col.name, col.kind, {}, {}, col.levels};
      if (col.kind == FeatureKind::Numeric) {
        c.numeric.reserve(rows.size());
        for (auto r : rows) c.numeric.push_back(col.numeric[r]);
      } else {
        c.codes.reserve(rows.size());
        for (auto r : rows) c.codes.push_back(col.codes[r]);
      }
      out.features_.push_back(std::move(c));
    }
    out.privileged_.reserve(privileged_.size());
    for (const auto& attr : privileged_) {
      std::vector<std::uint8_t> v;
      v.reserve(rows.size());
      for (auto r : rows) v.push_back(attr[r]);
      out.privileged_.push_back(std::move(v));
    }
    return out;
  }

  friend Dataset load_dataset(std::istream& in, const DatasetSchema& schema, const std::string& origin);

 private:
  DatasetSchema schema_;
  std::vector<int> labels_;
  std::vector<Column> features_;
  std::vector<std::vector<std::uint8_t>> privileged_;
  std::vector<std::size_t> row_ids_;
};

inline Dataset load_dataset(std::istream& in, const DatasetSchema& schema, const std::string& origin = "<stream>") {
  schema.validate();
  std::string line;
  if (!std::getline(in, line) || csv::trim(line).empty())
    throw DataError(DataError::Kind::EmptyFile, origin + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = csv::split_record(line);
  auto column_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw missing_column(name);
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t label_col = column_of(schema.label);
  std::vector<std::size_t> sens_cols;
  for (const auto& s : schema.sensitive) sens_cols.push_back(column_of(s.name));
  std::vector<std::size_t> feat_cols;
  for (const auto& f : schema.features) feat_cols.push_back(column_of(f.name));

  Dataset d;
  d.schema_ = schema;
  d.privileged_.resize(schema.sensitive.size());
  std::vector<std::vector<std::string>> level_tables(schema.features.size());
  std::vector<std::unordered_map<std::string, std::int32_t>> level_index(schema.features.size());
  for (const auto& f : schema.features) d.features_.push_back(Column{f.name, f.kind, {}, {}, nullptr});

  std::vector<std::string> label_values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split_record(line);
    if (cells.size() != header.size())
      throw DataError(DataError::Kind::ParseError, origin + ":" + std::to_string(line_no) + ": expected " +
                                                       std::to_string(header.size()) + " cells, found " +
                                                       std::to_string(cells.size()));
    const auto& raw_label = cells[label_col];
    if (std::find(label_values.begin(), label_values.end(), raw_label) == label_values.end()) {
      label_values.push_back(raw_label);
      if (label_values.size() > 2)
        throw DataError(DataError::Kind::NonBinaryLabel,
                        origin + ": label column \"" + schema.label + "\" has more than two distinct values");
    }
    d.labels_.push_back(raw_label == schema.favorable ? 1 : 0);
    for (std::size_t a = 0; a < sens_cols.size(); ++a)
      d.privileged_[a].push_back(cells[sens_cols[a]] == schema.sensitive[a].privileged ? 1 : 0);
    for (std::size_t f = 0; f < feat_cols.size(); ++f) {
      const auto& cell = cells[feat_cols[f]];
      auto& col = d.features_[f];
      if (col.kind == FeatureKind::Numeric) {
        auto v = csv::parse_double(cell);
        if (!v)
          throw DataError(DataError::Kind::ParseError, origin + ":" + std::to_string(line_no) + ": column \"" +
                                                           col.name + "\": cannot parse \"" + cell + "\" as a number");
        col.numeric.push_back(*v);
      } else {
        auto [it, inserted] = level_index[f].try_emplace(cell, static_cast<std::int32_t>(level_tables[f].size()));
        if (inserted) level_tables[f].push_back(cell);
        col.codes.push_back(it->second);
      }
    }
    d.row_ids_.push_back(d.row_ids_.size());
  }
  if (d.labels_.empty()) throw DataError(DataError::Kind::EmptyFile, origin + ": no data rows");
  for (std::size_t f = 0; f < d.features_.size(); ++f)
    if (d.features_[f].kind == FeatureKind::Categorical)
      d.features_[f].levels = std::make_shared<const std::vector<std::string>>(std::move(level_tables[f]));
  return d;
}

inline Dataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError(DataError::Kind::Io, "cannot open dataset " + path.string());
  return load_dataset(in, schema, path.string());
}

inline Dataset load_dataset_from_string(const std::string& text, const DatasetSchema& schema) {
  std::istringstream in(text);
  return load_dataset(in, schema);
}

struct SplitConfig {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;  // positions in the split input, ascending
  std::vector<std::size_t> test_rows;
};

/// Row positions of a seeded random partition of n rows: round(fraction * n)
/// go to the first side. Both sides are returned in ascending order.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double fraction,
                                                                                   std::uint64_t seed) {
  if (n < 2) throw DataError(DataError::Kind::RangeError, "split: need at least 2 rows, got " + std::to_string(n));
  if (!(fraction > 0.0 && fraction < 1.0))
    throw DataError(DataError::Kind::InvalidConfig, "split: train_fraction must lie in (0, 1)");
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (k == 0 || k == n)
    throw DataError(DataError::Kind::RangeError, "split: fraction " + std::to_string(fraction) + " of " +
                                                     std::to_string(n) + " rows leaves one side empty");
  auto perm = seeded_permutation(n, seed);
  std::vector<std::size_t> first(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> second(perm.begin() + static_cast<std::ptrdiff_t>(k), perm.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {std::move(first), std::move(second)};
}

inline Split split(const Dataset& d, const SplitConfig& cfg) {
  auto [tr, te] = split_indices(d.size(), cfg.train_fraction, cfg.seed);
  Split s{d.subset(tr), d.subset(te), std::move(tr), std::move(te)};
  return s;
}

/// Demographic groups for a task (a subset of the schema's sensitive
/// attributes). Groups are ordered Group_1..Group_n, most favored first.
struct GroupAssignment {
  std::vector<std::string> attributes;
  std::vector<std::string> groups;
  std::vector<std::optional<double>> favored_rate;  // train-only; nullopt when unseen in train
  std::vector<std::size_t> group_of;                // for the `full` dataset
  Flags flags;

  [[nodiscard]] std::size_t size() const noexcept { return groups.size(); }

  /// Short label used in report keys: P/U for two groups, G1..Gn otherwise.
  [[nodiscard]] std::string label(std::size_t g) const {
    if (groups.size() == 2) return g == 0 ? "P" : "U";
    return "G" + std::to_string(g + 1);
  }

  [[nodiscard]] std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (std::size_t g = 0; g < groups.size(); ++g) out.push_back(label(g));
    return out;
  }

  [[nodiscard]] std::optional<std::size_t> find_label(std::string_view l) const {
    for (std::size_t g = 0; g < groups.size(); ++g)
      if (label(g) == l || groups[g] == l) return g;
    return std::nullopt;
  }

  [[nodiscard]] std::string key_of(const Dataset& d, std::size_t row) const {
    std::string key;
    for (const auto& attr : attributes) {
      const auto a = *d.schema().sensitive_index(attr);
      const auto& spec = d.schema().sensitive[a];
      if (!key.empty()) key += '&';
      key += spec.name + (d.privileged()[a][row] ? "=" : "!=") + spec.privileged;
    }
    return key;
  }

  /// Group ids for any dataset sharing the schema.
  [[nodiscard]] std::vector<std::size_t> ids_for(const Dataset& d) const {
    std::map<std::string, std::size_t, std::less<>> index;
    for (std::size_t g = 0; g < groups.size(); ++g) index.emplace(groups[g], g);
    std::vector<std::size_t> ids(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto it = index.find(key_of(d, i));
      if (it == index.end())
        throw DataError(DataError::Kind::Misaligned, "group \"" + key_of(d, i) + "\" is not part of this assignment");
      ids[i] = it->second;
    }
    return ids;
  }
};

/// Builds a ranked assignment from per-row group keys: favored rates come
/// from (train_keys, train_labels), ids are assigned to full_keys.
inline GroupAssignment rank_groups(std::vector<std::string> attributes, std::span<const std::string> train_keys,
                                   std::span<const int> train_labels, std::span<const std::string> full_keys) {
  GroupAssignment ga;
  ga.attributes = std::move(attributes);
  std::map<std::string, std::pair<std::size_t, std::size_t>> train_counts;  // key -> (favorable, total)
  for (std::size_t i = 0; i < train_keys.size(); ++i) {
    auto& c = train_counts[train_keys[i]];
    c.first += train_labels[i] == 1 ? 1U : 0U;
    c.second += 1;
  }
  std::vector<std::string> distinct(full_keys.begin(), full_keys.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  struct Entry {
    std::string key;
    std::optional<double> rate;
    bool privileged;
  };
  std::vector<Entry> entries;
  for (const auto& k : distinct) {
    auto it = train_counts.find(k);
    std::optional<double> rate;
    if (it != train_counts.end())
      rate = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    else
      add_flag(ga.flags, "group_unseen_in_train:" + k);
    entries.push_back({k, rate, k.find("!=") == std::string::npos});
  }

  const bool dichotomy = ga.attributes.size() == 1;
  std::stable_sort(entries.begin(), entries.end(), [&](const Entry& x, const Entry& y) {
    if (dichotomy && x.privileged != y.privileged) return x.privileged;
    if (x.rate.has_value() != y.rate.has_value()) return x.rate.has_value();
    if (x.rate && y.rate && *x.rate != *y.rate) return *x.rate > *y.rate;
    return x.key < y.key;
  });
  if (dichotomy && entries.size() == 2 && entries[0].rate && entries[1].rate && *entries[0].rate < *entries[1].rate)
    add_flag(ga.flags, "privileged_group_less_favored_in_train");

  std::map<std::string, std::size_t, std::less<>> index;
  for (const auto& e : entries) {
    index.emplace(e.key, ga.groups.size());
    ga.groups.push_back(e.key);
    ga.favored_rate.push_back(e.rate);
  }
  ga.group_of.reserve(full_keys.size());
  for (const auto& k : full_keys) ga.group_of.push_back(index.find(k)->second);
  return ga;
}

/// Assigns every row of `full` to a group over `attributes` (empty = all
/// sensitive attributes of the schema) and ranks groups by the training
/// proportion of favorable labels. With one attribute the privileged value
/// is always Group_1.
inline GroupAssignment assign_groups(const Dataset& train, const Dataset& full,
                                     std::vector<std::string> attributes = {}) {
  const auto& schema = full.schema();
  if (attributes.empty())
    for (const auto& s : schema.sensitive) attributes.push_back(s.name);
  for (const auto& a : attributes) {
    if (!schema.sensitive_index(a) || !train.schema().sensitive_index(a))
      throw DataError(DataError::Kind::InvalidConfig, "\"" + a + "\" is not a declared sensitive attribute");
  }
  // Keep schema order so group keys do not depend on how the task lists them.
  std::sort(attributes.begin(), attributes.end(), [&](const auto& x, const auto& y) {
    return *schema.sensitive_index(x) < *schema.sensitive_index(y);
  });
  attributes.erase(std::unique(attributes.begin(), attributes.end()), attributes.end());

  GroupAssignment ga;
  ga.attributes = attributes;
  std::vector<std::string> train_keys, full_keys;
  train_keys.reserve(train.size());
  full_keys.reserve(full.size());
  for (std::size_t i = 0; i < train.size(); ++i) train_keys.push_back(ga.key_of(train, i));
  for (std::size_t i = 0; i < full.size(); ++i) full_keys.push_back(ga.key_of(full, i));
  return rank_groups(std::move(attributes), train_keys, train.labels(), full_keys);
}

/// Dense row-major design matrix with column names.
struct FeatureMatrix {
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix values;
  std::vector<std::string> columns;

  [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }

  [[nodiscard]] FeatureMatrix select_rows(std::span<const std::size_t> rows) const {
    FeatureMatrix out;
    out.columns = columns;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(rows[i]));
    return out;
  }
};

/// Encoding dictionary fit on training rows: numeric columns are
/// standardized (population std; constant columns dropped), categorical
/// columns become one indicator per level observed in training, and every
/// sensitive attribute becomes a 0/1 privileged indicator.
class FeatureEncoder {
 public:
  struct NumericEntry {
    std::size_t column;
    double mean;
    double stddev;
  };
  struct CategoricalEntry {
    std::size_t column;
    std::vector<std::string> levels;  // sorted
  };

  static FeatureEncoder fit(const Dataset& train) {
    FeatureEncoder enc;
    const auto n = static_cast<double>(train.size());
    for (std::size_t c = 0; c < train.features().size(); ++c) {
      const auto& col = train.features()[c];
      if (col.kind == FeatureKind::Numeric) {
        double mean = 0;
        for (double v : col.numeric) mean += v;
        mean /= n;
        double var = 0;
        for (double v : col.numeric) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / n);
        if (sd > 0) {
          enc.numeric_.push_back({c, mean, sd});
        } else {
          enc.dropped_.push_back(col.name);
        }
      } else {
        std::vector<char> seen(col.levels ? col.levels->size() : 0, 0);
        for (auto code : col.codes) seen[static_cast<std::size_t>(code)] = 1;
        std::vector<std::string> levels;
        for (std::size_t l = 0; l < seen.size(); ++l)
          if (seen[l]) levels.push_back((*col.levels)[l]);
        std::sort(levels.begin(), levels.end());
        enc.categorical_.push_back({c, std::move(levels)});
      }
    }
    for (const auto& s : train.schema().sensitive) enc.sensitive_.push_back(s.name);
    enc.build_names(train);
    return enc;
  }

  [[nodiscard]] FeatureMatrix transform(const Dataset& d) const {
    FeatureMatrix m;
    m.columns = names_;
    m.values = FeatureMatrix::Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(names_.size()));
    Eigen::Index out = 0;
    for (const auto& e : numeric_) {
      const auto& col = d.features().at(e.column);
      for (std::size_t i = 0; i < d.size(); ++i)
        m.values(static_cast<Eigen::Index>(i), out) = (col.numeric[i] - e.mean) / e.stddev;
      ++out;
    }
    for (const auto& e : categorical_) {
      const auto& col = d.features().at(e.column);
      std::vector<std::ptrdiff_t> slot(col.levels ? col.levels->size() : 0, -1);
      for (std::size_t l = 0; l < slot.size(); ++l) {
        auto it = std::lower_bound(e.levels.begin(), e.levels.end(), (*col.levels)[l]);
        if (it != e.levels.end() && *it == (*col.levels)[l]) slot[l] = it - e.levels.begin();
      }
      for (std::size_t i = 0; i < d.size(); ++i) {
        const auto s = slot[static_cast<std::size_t>(col.codes[i])];
        if (s >= 0) m.values(static_cast<Eigen::Index>(i), out + s) = 1.0;
      }
      out += static_cast<Eigen::Index>(e.levels.size());
    }
    for (std::size_t a = 0; a < sensitive_.size(); ++a) {
      const auto& flags = d.privileged().at(a);
      for (std::size_t i = 0; i < d.size(); ++i) m.values(static_cast<Eigen::Index>(i), out) = flags[i];
      ++out;
    }
    return m;
  }

  [[nodiscard]] std::size_t dimension() const noexcept { return names_.size(); }
  [[nodiscard]] const std::vector<std::string>& column_names() const noexcept { return names_; }
  [[nodiscard]] const std::vector<std::string>& dropped_columns() const noexcept { return dropped_; }

  /// Column index of the privileged indicator for a sensitive attribute.
  [[nodiscard]] std::size_t sensitive_column(std::string_view attribute) const {
    for (std::size_t a = 0; a < sensitive_.size(); ++a)
      if (sensitive_[a] == attribute) return names_.size() - sensitive_.size() + a;
    throw DataError(DataError::Kind::InvalidConfig, "no sensitive attribute \"" + std::string(attribute) + "\"");
  }

  [[nodiscard]] std::uint64_t dictionary_hash() const { return fnv1a(to_json().dump()); }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    j["numeric"] = nlohmann::json::array();
    for (const auto& e : numeric_) j["numeric"].push_back({{"column", source_names_.at(e.column)}, {"mean", e.mean}, {"std", e.stddev}});
    j["categorical"] = nlohmann::json::array();
    for (const auto& e : categorical_) j["categorical"].push_back({{"column", source_names_.at(e.column)}, {"levels", e.levels}});
    j["sensitive"] = sensitive_;
    j["dropped"] = dropped_;
    return j;
  }

 private:
  void build_names(const Dataset& d) {
    for (const auto& c : d.features()) source_names_.push_back(c.name);
    for (const auto& e : numeric_) names_.push_back(source_names_[e.column]);
    for (const auto& e : categorical_)
      for (const auto& l : e.levels) names_.push_back(source_names_[e.column] + "=" + l);
    for (const auto& s : sensitive_) names_.push_back(s);
  }

  std::vector<NumericEntry> numeric_;
  std::vector<CategoricalEntry> categorical_;
  std::vector<std::string> sensitive_;
  std::vector<std::string> dropped_;
  std::vector<std::string> source_names_;
  std::vector<std::string> names_;
};

/// Fits the encoding dictionary on `d` and encodes `d` with it.
inline FeatureMatrix encode_features(const Dataset& d) { return FeatureEncoder::fit(d).transform(d); }

}  // namespace fairaudit
