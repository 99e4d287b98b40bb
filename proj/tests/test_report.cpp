#include <random>

#include <gtest/gtest.h>

#include "fairaudit/report.hpp"

using namespace fairaudit;

namespace {

using Values = std::map<std::string, double>;

// One task with two groups; each method gets `runs` records built by `gen(run)`.
RunResults toy_task(const std::string& name, const std::vector<std::pair<std::string, std::function<Values(int)>>>& methods,
                    int runs = 20) {
  RunResults res;
  res.task = name;
  res.group_labels = {"P", "U"};
  for (const auto& [mname, gen] : methods) {
    MethodResults m{mname, {}};
    for (int r = 0; r < runs; ++r) {
      RunRecord rec;
      rec.run = static_cast<std::size_t>(r);
      rec.split_seed = static_cast<std::uint64_t>(r);
      rec.split_hash = 1000 + static_cast<std::uint64_t>(r);
      rec.ok = true;
      for (const auto& [k, v] : gen(r)) rec.values[k] = v;
      rec.groups = {{"P", "sex=m"}, {"U", "sex!=m"}};
      m.runs.push_back(rec);
    }
    res.methods.push_back(std::move(m));
  }
  return res;
}

Values noisy(int r, double shift = 0.0) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(r) * 31 + 7);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  Values v;
  for (const char* k : {"sr_P", "tpr_P", "fpr_P", "sr_U", "tpr_U", "fpr_U", "spd", "eod", "aod", "accuracy",
                        "macro_precision", "macro_recall", "macro_f1", "mcc", "overall_sr"})
    v[k] = 0.3 + u(rng) + shift;
  return v;
}

}  // namespace

TEST(Frequency, IdenticalMethodAllTies) {
  const auto t = toy_task("T", {{"base", [](int r) { return noisy(r); }}, {"same", [](int r) { return noisy(r); }}});
  const auto ft = frequency_table(t);
  for (const auto& k : ft.metrics) {
    const auto& c = ft.cells.at("same").at(k);
    EXPECT_EQ(c.tie, 1);
    EXPECT_EQ(c.total(), 1);
  }
  EXPECT_EQ(ft.metrics, group_metric_keys(std::vector<std::string>{"P", "U"}));
}

TEST(Frequency, RowsSumToTaskCount) {
  std::vector<RunResults> tasks;
  for (int t = 0; t < 3; ++t)
    tasks.push_back(toy_task("T" + std::to_string(t), {{"base", [](int r) { return noisy(r); }},
                                                       {"up", [t](int r) { return noisy(r, 0.1 * t); }}}));
  const auto ft = frequency_table(tasks);
  int increases = 0;
  for (const auto& k : ft.metrics) {
    const auto& c = ft.cells.at("up").at(k);
    EXPECT_EQ(c.total(), 3);
    increases += c.increase;
  }
  EXPECT_EQ(increases, 2 * 6);
}

TEST(Frequency, MissingBaselineIsAnError) {
  const auto t = toy_task("T", {{"rew", [](int r) { return noisy(r); }}});
  EXPECT_THROW(frequency_table(t), DataError);
}

TEST(Effect, IdenticalMethodIsZero) {
  const auto t = toy_task("T", {{"base", [](int r) { return noisy(r); }}, {"same", [](int r) { return noisy(r); }}});
  const auto et = effect_table(t);
  for (const auto& k : et.metrics) {
    const auto& c = et.cells.at("same").at(k);
    EXPECT_EQ(*c.mean_change, 0.0);
    EXPECT_EQ(c.large_share, 0.0);
  }
}

TEST(Effect, ConstantShift) {
  const auto t = toy_task("T", {{"base", [](int) { return noisy(0); }}, {"up", [](int) { return noisy(0, 0.1); }}}, 2);
  const auto et = effect_table(t);
  const auto& c = et.cells.at("up").at("sr_U");
  EXPECT_NEAR(*c.mean_change, 0.1, 1e-12);
  EXPECT_NEAR(*c.extreme_change, 0.1, 1e-12);
}

TEST(Effect, ExtremeIsMinForPrivilegedMaxForUnprivileged) {
  std::vector<RunResults> tasks;
  for (double shift : {-0.1, 0.05})
    tasks.push_back(toy_task("T", {{"base", [](int) { return noisy(0); }},
                                   {"m", [shift](int) { return noisy(0, shift); }}}, 2));
  const auto et = effect_table(tasks);
  EXPECT_NEAR(*et.cells.at("m").at("sr_P").extreme_change, -0.1, 1e-12);
  EXPECT_NEAR(*et.cells.at("m").at("sr_U").extreme_change, 0.05, 1e-12);
}

TEST(Effect, CellRendering) {
  EffectCell c;
  c.mean_change = -0.026;
  c.after = 0.462;
  c.before = 0.489;
  EXPECT_EQ(c.render(), "−0.026 (0.462−0.489)");
  EXPECT_EQ(format_signed(-0.0001), "0.000");
}

TEST(Effect, LargeShareCountsSignificantLargeChanges) {
  const auto t = toy_task("T", {{"base", [](int r) { return noisy(r); }}, {"up", [](int r) { return noisy(r, 0.2); }}});
  EXPECT_EQ(effect_table(t).cells.at("up").at("tpr_P").large_share, 1.0);
}

TEST(Correlation, DuplicateAndNegatedSeries) {
  // Method m_i shifts every metric by d_i, except fpr_U which moves by -d_i.
  std::vector<RunResults> tasks;
  for (int i = 0; i < 6; ++i) {
    const double d = 0.01 * (i + 1) * (i % 2 ? 1 : -1);
    tasks.push_back(toy_task("T" + std::to_string(i), {{"base", [](int) { return noisy(0); }},
                                                       {"m", [d](int r) {
                                                          auto v = noisy(0);
                                                          for (auto& [k, x] : v) x += k == "fpr_U" ? -d : d;
                                                          v["eod"] += 0.001 * r;
                                                          return v;
                                                        }}},
                             3));
  }
  const auto cm = correlation_matrix(tasks);
  EXPECT_EQ(cm.observations.size(), 6U);
  EXPECT_NEAR(cm.at("sr_P", "sr_U").rho, 1.0, 1e-12);
  EXPECT_NEAR(cm.at("sr_P", "fpr_U").rho, -1.0, 1e-12);
  for (std::size_t a = 0; a < cm.metrics.size(); ++a) {
    EXPECT_EQ(cm.cells[a][a].rho, 1.0);
    for (std::size_t b = 0; b < cm.metrics.size(); ++b) EXPECT_EQ(cm.cells[a][b].rho, cm.cells[b][a].rho);
  }
}

TEST(Correlation, TooFewObservations) {
  const auto t = toy_task("T", {{"base", [](int r) { return noisy(r); }}, {"m", [](int r) { return noisy(r); }}});
  EXPECT_THROW(correlation_matrix(std::span(&t, 1)), DataError);
}

TEST(Correlation, ConstantSeriesFlagged) {
  std::vector<RunResults> tasks;
  for (int i = 0; i < 4; ++i)
    tasks.push_back(toy_task("T" + std::to_string(i), {{"base", [](int) { return noisy(0); }},
                                                       {"m", [i](int) {
                                                          auto v = noisy(0, 0.01 * i);
                                                          v["spd"] = noisy(0)["spd"];
                                                          return v;
                                                        }}},
                             2));
  const auto cm = correlation_matrix(tasks);
  EXPECT_FALSE(cm.at("spd", "spd").defined);
  EXPECT_FALSE(cm.flags.empty());
}

TEST(Compare, SelfComparisonIsAllTies) {
  const auto t = toy_task("T", {{"base", [](int r) { return noisy(r); }}, {"m", [](int r) { return noisy(r, 0.1); }}});
  const auto c = compare_methods(t, "m", t, "m");
  for (const auto& row : c.rows) {
    EXPECT_EQ(row.tie, 1);
    EXPECT_EQ(row.win + row.loss, 0);
  }
  EXPECT_EQ(c.mean_overall_sr_delta(), 0.0);
}

TEST(Compare, OrientationAndSrDelta) {
  const auto t = toy_task("T", {{"base", [](int r) { return noisy(r); }}, {"m", [](int r) { return noisy(r, 0.1); }}});
  const auto c = compare_methods(t, "m", t, "base");
  EXPECT_EQ(c.row("sr_U").win, 1);
  EXPECT_EQ(c.row("fpr_U").loss, 1);
  EXPECT_EQ(c.row("spd").loss, 1);
  EXPECT_NEAR(c.mean_overall_sr_delta(), 0.1, 1e-12);
}

TEST(Compare, SplitMismatchIsFatal) {
  auto a = toy_task("T", {{"base", [](int r) { return noisy(r); }}});
  auto b = a;
  b.methods[0].runs[3].split_hash ^= 1;
  try {
    compare_methods(a, "base", b, "base");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataError::Kind::SplitMismatch);
  }
}

TEST(Emit, StableBytesAndLayouts) {
  std::vector<RunResults> tasks;
  for (int i = 0; i < 3; ++i)
    tasks.push_back(toy_task("T" + std::to_string(i), {{"base", [](int r) { return noisy(r); }},
                                                       {"rew", [i](int r) { return noisy(r, 0.02 * i); }},
                                                       {"eop", [i](int r) { return noisy(r, -0.03 * i); }}}));
  const auto r1 = build_report(tasks), r2 = build_report(tasks);
  EXPECT_EQ(render(r1, ReportFormat::Json), render(r2, ReportFormat::Json));
  EXPECT_EQ(render(r1, ReportFormat::Csv), render(r2, ReportFormat::Csv));
  const auto md = to_markdown(r1);
  EXPECT_NE(md.find("| rew | ↑"), std::string::npos);
  EXPECT_NE(md.find("| eop | ↑"), std::string::npos);
  // One frequency row per method: count rows before the second heading.
  const auto first = md.find("## Significant");
  const auto second = md.find("## Mean change");
  int rows = 0;
  for (auto p = md.find("\n| ", first); p < second; p = md.find("\n| ", p + 1)) ++rows;
  EXPECT_EQ(rows, 1 + 2);  // header + methods
}

TEST(Emit, WritesFiles) {
  const auto t = toy_task("T", {{"base", [](int r) { return noisy(r); }}, {"m", [](int r) { return noisy(r, 0.1); }}});
  const auto dir = std::filesystem::temp_directory_path() / "fairaudit_emit_test";
  std::filesystem::remove_all(dir);
  const auto r = build_report(std::span(&t, 1));
  const auto path = emit_report(r, ReportFormat::Markdown, dir);
  EXPECT_TRUE(std::filesystem::exists(path));
  EXPECT_EQ(path.extension(), ".md");
  std::filesystem::remove_all(dir);
}

TEST(Emit, UnwritablePath) {
  const auto t = toy_task("T", {{"base", [](int r) { return noisy(r); }}, {"m", [](int r) { return noisy(r); }}});
  EXPECT_THROW(emit_report(build_report(std::span(&t, 1)), ReportFormat::Json, "/proc/fairaudit/nope"), DataError);
}
