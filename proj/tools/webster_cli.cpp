// webster: RG, invariant and numerical solutions of the modified generalized
// Webster equation, figure presets and comparison reports.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <webster/cli.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace webster;

struct Flags {
  std::string config;
  std::string out;
  std::size_t jobs = 1;
  std::optional<double> tol;
};

cli::RunConfig load(const Flags& f, const std::string& command) {
  if (f.config.empty()) throw ConfigError(command + " needs --config <path>");
  return cli::make_run_config(cli::ConfigText::load(f.config));
}

void apply_flags(cli::RunConfig& c, const Flags& f) {
  if (!f.out.empty()) c.out = f.out;
  if (f.tol) {
    c.solver_tol = *f.tol;
    c.rg_tol = *f.tol;
  }
}

// Keeps the configured outputs that belong to `allowed`, or all of `allowed`
// when the config names none of them.
void restrict_outputs(cli::RunConfig& c, const std::vector<std::string>& allowed) {
  std::vector<std::string> keep;
  for (const auto& o : c.outputs)
    if (std::find(allowed.begin(), allowed.end(), o) != allowed.end()) keep.push_back(o);
  c.outputs = keep.empty() ? allowed : keep;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& p : c.comparisons)
    if (c.wants(p.first) && c.wants(p.second)) pairs.push_back(p);
  c.comparisons = pairs;
}

void print_report(const cli::ComparisonReport& rep) {
  if (rep.rows.empty()) return;
  std::printf("%-10s %-10s %10s %14s %14s\n", "field", "reference", "nu_x", "max_rel",
              "l2_rel");
  for (const auto& r : rep.rows) {
    std::printf("%-10s %-10s %10.4g %14.6e %14.6e%s\n", r.field.c_str(), r.reference.c_str(),
                r.nu_x, r.max_rel, r.l2_rel, r.skipped ? "  (masked points skipped)" : "");
  }
}

int execute(const cli::RunConfig& c, const Flags& f) {
  const auto result = cli::run(c, f.jobs);
  cli::write(result, c.out);
  std::printf("%s: %zu stations -> %s\n", c.name.c_str(), result.stations.size(),
              c.out.c_str());
  print_report(result.report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear acoustic waves in lossy channels of variable cross section"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "Run configuration file");
  app.add_option("--out", flags.out, "Output directory");
  app.add_option("--jobs", flags.jobs, "Worker threads for station-level parallelism")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol", flags.tol, "Relative tolerance for the solver and the RG x' integral")
      ->check(CLI::PositiveNumber);

  auto* profile = app.add_subcommand("profile", "Tabulate x, S, zeta, mu, d");
  auto* analytic = app.add_subcommand("analytic", "RG fields q0, q1, qpt");
  auto* solve = app.add_subcommand("solve", "Numerical march qnum");
  auto* invariant = app.add_subcommand("invariant", "Exact invariant solution");
  auto* compare = app.add_subcommand("compare", "Fields plus comparison report");
  app.add_subcommand("run", "Everything the config requests");
  std::vector<std::pair<CLI::App*, std::string>> presets;
  for (const char* name : {"fig1", "fig1b", "fig2"}) {
    std::string help = std::string("Preset ") + name;
    presets.emplace_back(app.add_subcommand(name, help), name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (profile->parsed()) {
      auto c = load(flags, "profile");
      apply_flags(c, flags);
      std::filesystem::create_directories(c.out);
      cli::write_text(std::filesystem::path(c.out) / "profile.csv", cli::profile_csv(c));
      std::printf("profile -> %s\n", (std::filesystem::path(c.out) / "profile.csv").c_str());
      return 0;
    }
    for (const auto& [sub, name] : presets) {
      if (!sub->parsed()) continue;
      auto c = cli::preset(name);
      apply_flags(c, flags);
      return execute(c, flags);
    }
    auto c = load(flags, app.get_subcommands().front()->get_name());
    apply_flags(c, flags);
    if (analytic->parsed()) {
      restrict_outputs(c, {"q0", "q1", "qpt"});
    } else if (solve->parsed()) {
      restrict_outputs(c, {"qnum"});
    } else if (invariant->parsed()) {
      restrict_outputs(c, {"invariant"});
    } else if (compare->parsed()) {
      if (c.outputs.empty()) c.outputs = {"q0", "q1", "qnum"};
      if (c.comparisons.empty()) {
        c.comparisons = {{"q1", "qnum"}};
        if (c.wants("q0")) c.comparisons.emplace_back("q0", "qnum");
      }
    }
    return execute(c, flags);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  }
}
