#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fairaudit/data.hpp"

using namespace fairaudit;

namespace {

DatasetSchema toy_schema() {
  DatasetSchema s;
  s.label = "y";
  s.favorable = "yes";
  s.features = {{"x", FeatureKind::Numeric}, {"color", FeatureKind::Categorical}};
  s.sensitive = {{"sex", "m"}};
  return s;
}

DatasetSchema two_attribute_schema() {
  DatasetSchema s;
  s.label = "y";
  s.favorable = "1";
  s.features = {{"x", FeatureKind::Numeric}};
  s.sensitive = {{"sex", "m"}, {"race", "w"}};
  return s;
}

// Builds a CSV where each (sex, race) cell has `n` rows of which `pos` are favorable.
std::string cells_csv(const std::vector<std::tuple<std::string, std::string, int, int>>& cells) {
  std::string out = "x,sex,race,y\n";
  int x = 0;
  for (const auto& [sex, race, n, pos] : cells)
    for (int i = 0; i < n; ++i) out += std::to_string(x++) + "," + sex + "," + race + "," + (i < pos ? "1" : "0") + "\n";
  return out;
}

}  // namespace

TEST(LoadDataset, AdultRowCount) {
  const auto schema = DatasetSchema::load(FAIRAUDIT_DATA_DIR "/adult.schema.json");
  const auto d = load_dataset(FAIRAUDIT_DATA_DIR "/adult.csv", schema);
  EXPECT_EQ(d.size(), 45222U);
}

TEST(LoadDataset, GermanRowCount) {
  const auto schema = DatasetSchema::load(FAIRAUDIT_DATA_DIR "/german.schema.json");
  const auto d = load_dataset(FAIRAUDIT_DATA_DIR "/german.csv", schema);
  EXPECT_EQ(d.size(), 1000U);
}

TEST(LoadDataset, SingleFavorableRow) {
  const auto d = load_dataset_from_string("x,color,sex,y\n1,red,m,yes\n", toy_schema());
  ASSERT_EQ(d.size(), 1U);
  EXPECT_EQ(d.labels(), std::vector<int>{1});
}

TEST(LoadDataset, MissingSensitiveColumnIsNamed) {
  auto schema = toy_schema();
  schema.sensitive = {{"race", "w"}};
  try {
    load_dataset_from_string("x,color,sex,y\n1,red,m,yes\n", schema);
    FAIL() << "expected MissingColumn";
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataError::Kind::MissingColumn);
    EXPECT_STREQ(e.what(), "MissingColumn(\"race\")");
  }
}

TEST(LoadDataset, RejectsThirdLabelValue) {
  try {
    load_dataset_from_string("x,color,sex,y\n1,a,m,yes\n2,a,f,no\n3,a,f,maybe\n", toy_schema());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataError::Kind::NonBinaryLabel);
  }
}

TEST(LoadDataset, RejectsUnparsableNumber) {
  try {
    load_dataset_from_string("x,color,sex,y\nabc,a,m,yes\n", toy_schema());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataError::Kind::ParseError);
  }
}

TEST(LoadDataset, EmptyFile) {
  try {
    load_dataset_from_string("", toy_schema());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataError::Kind::EmptyFile);
  }
}

TEST(Csv, QuotedFieldsKeepCommas) {
  const auto cells = csv::split_record(R"(1,"a, b",c)");
  ASSERT_EQ(cells.size(), 3U);
  EXPECT_EQ(cells[1], "a, b");
}

TEST(Schema, RoundTripsThroughJson) {
  const auto s = toy_schema();
  const auto back = DatasetSchema::from_json(s.to_json());
  EXPECT_EQ(back.to_json(), s.to_json());
}

TEST(Schema, RejectsUnknownFeatureKind) {
  auto j = toy_schema().to_json();
  j["features"][0]["kind"] = "ordinal";
  EXPECT_THROW(DatasetSchema::from_json(j), DataError);
}

TEST(Split, TenRowsSeventyPercent) {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    auto [train, test] = split_indices(10, 0.7, seed);
    EXPECT_EQ(train.size(), 7U);
    EXPECT_EQ(test.size(), 3U);
  }
}

TEST(Split, SameSeedSamePartition) {
  EXPECT_EQ(split_indices(1000, 0.7, 42), split_indices(1000, 0.7, 42));
}

TEST(Split, DifferentSeedsDiffer) {
  EXPECT_NE(split_indices(1000, 0.7, 1).first, split_indices(1000, 0.7, 2).first);
}

TEST(Split, IsAPartition) {
  auto [a, b] = split_indices(257, 0.3, 7);
  std::vector<std::size_t> all = a;
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
}

TEST(Split, EmptySideIsAnError) {
  EXPECT_THROW(split_indices(1, 0.7, 0), DataError);
  EXPECT_THROW(split_indices(2, 0.1, 0), DataError);
}

TEST(Split, SubsetsFollowIndices) {
  const auto d = load_dataset_from_string("x,color,sex,y\n0,a,m,yes\n1,b,f,no\n2,a,m,no\n3,c,f,yes\n", toy_schema());
  const auto s = split(d, {0.5, 3});
  EXPECT_EQ(s.train.size(), 2U);
  EXPECT_EQ(s.test.size(), 2U);
  for (std::size_t i = 0; i < s.train.size(); ++i)
    EXPECT_EQ(s.train.features()[0].numeric[i], static_cast<double>(s.train_rows[i]));
}

TEST(AssignGroups, SingleAttributeOrdersByTrainRate) {
  // male 3/10 favorable, female 1/9.
  std::string csv = "x,color,sex,y\n";
  for (int i = 0; i < 10; ++i) csv += "0,a,m," + std::string(i < 3 ? "yes" : "no") + "\n";
  for (int i = 0; i < 9; ++i) csv += "0,a,f," + std::string(i < 1 ? "yes" : "no") + "\n";
  const auto d = load_dataset_from_string(csv, toy_schema());
  const auto g = assign_groups(d, d);
  ASSERT_EQ(g.size(), 2U);
  EXPECT_EQ(g.groups[0], "sex=m");
  EXPECT_EQ(g.groups[1], "sex!=m");
  EXPECT_EQ(g.label(0), "P");
  EXPECT_EQ(g.label(1), "U");
  EXPECT_NEAR(*g.favored_rate[0], 0.3, 1e-15);
  EXPECT_TRUE(g.flags.empty());
}

TEST(AssignGroups, PrivilegedStaysFirstWhenItsRateIsLower) {
  std::string csv = "x,color,sex,y\n0,a,m,no\n0,a,m,no\n0,a,f,yes\n0,a,f,no\n";
  const auto d = load_dataset_from_string(csv, toy_schema());
  const auto g = assign_groups(d, d);
  EXPECT_EQ(g.groups[0], "sex=m");
  EXPECT_FALSE(g.flags.empty());
}

TEST(AssignGroups, FourGroupsSortedByRate) {
  // Rates: wm .31, ww .12, nm .19, nw .08 (over 100 rows each).
  const auto csv = cells_csv({{"m", "w", 100, 31}, {"f", "w", 100, 12}, {"m", "b", 100, 19}, {"f", "b", 100, 8}});
  const auto d = load_dataset_from_string(csv, two_attribute_schema());
  const auto g = assign_groups(d, d);
  const std::vector<std::string> want{"sex=m&race=w", "sex=m&race!=w", "sex!=m&race=w", "sex!=m&race!=w"};
  EXPECT_EQ(g.groups, want);
  EXPECT_EQ(g.label(2), "G3");
}

TEST(AssignGroups, SingleObservedCellGivesOneGroup) {
  const auto d = load_dataset_from_string(cells_csv({{"m", "w", 5, 2}}), two_attribute_schema());
  EXPECT_EQ(assign_groups(d, d).size(), 1U);
}

TEST(AssignGroups, TiesBreakByKey) {
  const auto csv = cells_csv({{"f", "b", 10, 5}, {"m", "b", 10, 5}, {"f", "w", 10, 5}, {"m", "w", 10, 5}});
  const auto d = load_dataset_from_string(csv, two_attribute_schema());
  auto g = assign_groups(d, d);
  EXPECT_TRUE(std::is_sorted(g.groups.begin(), g.groups.end()));
}

TEST(AssignGroups, UnseenInTrainRankedLastAndFlagged) {
  const auto csv = cells_csv({{"m", "w", 10, 5}, {"f", "w", 10, 2}, {"m", "b", 4, 1}});
  const auto full = load_dataset_from_string(csv, two_attribute_schema());
  std::vector<std::size_t> rows(20);
  std::iota(rows.begin(), rows.end(), 0);
  const auto g = assign_groups(full.subset(rows), full);
  ASSERT_EQ(g.size(), 3U);
  EXPECT_EQ(g.groups.back(), "sex=m&race!=w");
  EXPECT_FALSE(g.favored_rate.back().has_value());
  EXPECT_FALSE(g.flags.empty());
}

TEST(AssignGroups, ShuffleInvariant) {
  const auto csv = cells_csv({{"m", "w", 40, 13}, {"f", "w", 30, 5}, {"m", "b", 20, 7}, {"f", "b", 25, 2}});
  const auto d = load_dataset_from_string(csv, two_attribute_schema());
  std::vector<std::size_t> rows(d.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::mt19937_64 rng(5);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto shuffled = d.subset(rows);
  const auto a = assign_groups(d, d), b = assign_groups(shuffled, shuffled);
  EXPECT_EQ(a.groups, b.groups);
  EXPECT_EQ(a.favored_rate, b.favored_rate);
}

TEST(Encoder, StandardizesWithPopulationStd) {
  const auto d = load_dataset_from_string("x,color,sex,y\n1,a,m,yes\n2,a,f,no\n3,a,m,no\n", toy_schema());
  const auto enc = FeatureEncoder::fit(d);
  const auto X = enc.transform(d);
  // color is constant (one level) but categorical levels are kept; x is column 0.
  EXPECT_NEAR(X.values(0, 0), -1.224744871391589, 1e-12);
  EXPECT_NEAR(X.values(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(X.values(2, 0), 1.224744871391589, 1e-12);
}

TEST(Encoder, ThreeLevelsThreeIndicators) {
  const auto d = load_dataset_from_string("x,color,sex,y\n1,red,m,yes\n2,green,f,no\n3,blue,m,no\n", toy_schema());
  const auto enc = FeatureEncoder::fit(d);
  const auto& names = enc.column_names();
  EXPECT_EQ(std::count_if(names.begin(), names.end(), [](const auto& n) { return n.starts_with("color="); }), 3);
  const auto X = enc.transform(d);
  for (std::size_t r = 0; r < 3; ++r) {
    double sum = 0;
    for (std::size_t c = 0; c < names.size(); ++c)
      if (names[c].starts_with("color=")) sum += X.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    EXPECT_EQ(sum, 1.0);
  }
}

TEST(Encoder, ConstantNumericDropped) {
  const auto d = load_dataset_from_string("x,color,sex,y\n5,a,m,yes\n5,b,f,no\n", toy_schema());
  const auto enc = FeatureEncoder::fit(d);
  EXPECT_EQ(enc.dropped_columns(), std::vector<std::string>{"x"});
}

TEST(Encoder, UnseenLevelEncodesToZeros) {
  const auto train = load_dataset_from_string("x,color,sex,y\n1,a,m,yes\n2,b,f,no\n", toy_schema());
  const auto test = load_dataset_from_string("x,color,sex,y\n1,z,m,yes\n", toy_schema());
  const auto enc = FeatureEncoder::fit(train);
  const auto X = enc.transform(test);
  const auto& names = enc.column_names();
  for (std::size_t c = 0; c < names.size(); ++c)
    if (names[c].starts_with("color=")) {
      EXPECT_EQ(X.values(0, static_cast<Eigen::Index>(c)), 0.0);
    }
}

TEST(Encoder, SensitiveIndicatorColumn) {
  const auto d = load_dataset_from_string("x,color,sex,y\n1,a,m,yes\n2,b,f,no\n", toy_schema());
  const auto enc = FeatureEncoder::fit(d);
  const auto X = enc.transform(d);
  const auto c = static_cast<Eigen::Index>(enc.sensitive_column("sex"));
  EXPECT_EQ(X.values(0, c), 1.0);
  EXPECT_EQ(X.values(1, c), 0.0);
}

TEST(Encoder, ReencodingIsPure) {
  const auto d = load_dataset_from_string("x,color,sex,y\n1,a,m,yes\n2,b,f,no\n7,c,f,yes\n", toy_schema());
  const auto enc = FeatureEncoder::fit(d);
  EXPECT_EQ(enc.transform(d).values, enc.transform(d).values);
  EXPECT_EQ(enc.dictionary_hash(), FeatureEncoder::fit(d).dictionary_hash());
}
