// Command-line front end: run experiments, compare methods, correlate
// deltas, audit external score files, and render reports.

#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "fairaudit/fairaudit.hpp"

namespace fs = std::filesystem;
using namespace fairaudit;

namespace {

std::vector<RunResults> load_all(const std::vector<std::string>& paths) {
  std::vector<RunResults> out;
  for (const auto& p : paths) out.push_back(RunResults::load(p));
  return out;
}

void emit_all(const Report& r, const fs::path& dir) {
  for (auto f : {ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown}) emit_report(r, f, dir);
}

std::string last_method(const RunResults& r) {
  if (r.methods.size() < 2)
    throw DataError(DataError::Kind::InvalidConfig, "results for \"" + r.task + "\" hold only the baseline");
  return r.methods.back().name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-fairness audit of bias mitigation methods"};
  app.require_subcommand(1);

  std::string config, out, surface;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  auto* run = app.add_subcommand("run", "Run a configured experiment");
  run->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--runs", runs, "Override the run count");
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--surface", surface, "Evaluation surface")->check(CLI::IsMember({"test", "train"}));
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1U, 256U));

  std::vector<std::string> a_paths, b_paths;
  std::string a_method, b_method;
  auto* compare = app.add_subcommand("compare", "Win-tie-loss comparison of two methods");
  compare->add_option("--a", a_paths, "Results for the candidate (file or directory)")->required();
  compare->add_option("--b", b_paths, "Results for the reference, task-aligned with --a")->required();
  compare->add_option("--a-method", a_method, "Candidate method (default: last method in --a)");
  compare->add_option("--b-method", b_method, "Reference method (default: last method in --b)");
  compare->add_option("--out", out, "Output directory")->required();

  std::vector<std::string> results;
  auto* correlate = app.add_subcommand("correlate", "Spearman matrix of metric deltas across tasks");
  correlate->add_option("--results", results, "Results files or directories")->required();
  correlate->add_option("--out", out, "Output directory")->required();

  std::string scores, schema;
  auto* audit = app.add_subcommand("audit", "Evaluate an external score file");
  audit->add_option("--scores", scores, "Score CSV")->required()->check(CLI::ExistingFile);
  audit->add_option("--schema", schema, "Dataset schema (JSON)")->required()->check(CLI::ExistingFile);
  audit->add_option("--out", out, "Output directory")->required();

  std::string format = "markdown";
  auto* report = app.add_subcommand("report", "Aggregate tables over one or more tasks");
  report->add_option("--results", results, "Results files or directories")->required();
  report->add_option("--format", format, "json, csv or markdown")->check(CLI::IsMember({"json", "csv", "markdown"}));
  report->add_option("--out", out, "Output directory (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      auto cfg = ExperimentConfig::load(config);
      if (runs) cfg.runs = *runs;
      if (seed) cfg.seed = *seed;
      if (!surface.empty()) cfg.surface = parse_surface(surface);
      cfg.validate();
      const auto res = Experiment(cfg).run(jobs);
      write_text(fs::path(out) / "results.json", res.to_json().dump(2) + "\n");
      emit_all(build_report(std::span(&res, 1)), out);
      std::cerr << "wrote " << out << "/results.json (" << res.methods.size() << " methods x " << cfg.runs
                << " runs)\n";
    } else if (*compare) {
      const auto a = load_all(a_paths), b = load_all(b_paths);
      if (a_method.empty()) a_method = last_method(a.front());
      if (b_method.empty()) b_method = last_method(b.front());
      Report r;
      for (const auto& t : a) r.tasks.push_back(t.task);
      r.comparison = compare_methods(a, a_method, b, b_method);
      emit_all(r, out);
      std::cout << to_markdown(r);
    } else if (*correlate) {
      const auto tasks = load_all(results);
      Report r;
      for (const auto& t : tasks) r.tasks.push_back(t.task);
      r.correlation = correlation_matrix(tasks);
      emit_all(r, out);
      std::cout << to_markdown(r);
    } else if (*audit) {
      const auto sch = DatasetSchema::load(schema);
      const auto ss = load_scores(fs::path(scores), sch);
      nlohmann::json j{{"format", "fairaudit-audit/1"}, {"groups", ss.groups.groups}, {"flags", ss.groups.flags}};
      j["runs"] = nlohmann::json::array();
      std::map<std::string, std::vector<double>> sums;
      for (const auto& p : ss.runs) {
        const auto rep = evaluate(p, ss.groups);
        auto rj = rep.to_json();
        rj["run_id"] = p.run_id;
        j["runs"].push_back(rj);
        for (const auto& [k, v] : rj.items())
          if (v.is_number_float()) sums[k].push_back(v.get<double>());
      }
      nlohmann::json mean = nlohmann::json::object();
      for (const auto& [k, v] : sums) mean[k] = stats::mean(v);
      j["mean"] = mean;
      write_text(fs::path(out) / "audit.json", j.dump(2) + "\n");
      std::cout << mean.dump(2) << '\n';
    } else if (*report) {
      const auto tasks = load_all(results);
      const auto r = build_report(tasks);
      const auto f = parse_format(format);
      if (out.empty())
        std::cout << render(r, f);
      else
        std::cerr << "wrote " << emit_report(r, f, out).string() << '\n';
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
