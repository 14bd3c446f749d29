#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "distmin/error.hpp"
#include "distmin/experiment/runner.hpp"

namespace fs = std::filesystem;
using namespace distmin;
using namespace distmin::experiment;

namespace {

struct SpecArgs {
  std::string spec_path;
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::optional<double> scale;

  void add_to(CLI::App* cmd) {
    auto* spec = cmd->add_option("--spec", spec_path, "experiment spec (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--kind", kind, "use the default spec of l2regression, multiclass or optimalTransport")
        ->excludes(spec);
    cmd->add_option("--seed", seed, "override the spec's seed");
    cmd->add_option("--scale", scale, "override the spec's scale factor");
  }

  ExperimentSpec resolve() const {
    if (spec_path.empty() && kind.empty()) throw InvalidArgument("one of --spec or --kind is required");
    ExperimentSpec s = spec_path.empty() ? default_spec(parse_experiment_kind(kind)) : load_spec(spec_path);
    if (seed) s.seed = *seed;
    if (scale) s.scale = *scale;
    s.validate();
    return s;
  }
};

void print_summary(const RunReport& r) {
  std::printf("iterations  %zu\n", r.iterations());
  std::printf("final loss  %.17g\n", r.final_loss());
  std::printf("grad norm   %.17g\n", r.final_grad_norm());
  std::printf("reason      %s\n", r.reason.describe().c_str());
  std::printf("seconds     %.3f\n", r.seconds);
  for (const auto& [k, v] : r.metrics) std::printf("%-11s %.17g\n", k.c_str(), v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic experiments for distributed minimization"};
  app.require_subcommand(1);

  SpecArgs gen_args;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate an experiment's data set");
  gen_args.add_to(gen);
  gen->add_option("--out", gen_out, "output directory")->required();

  SpecArgs run_args;
  std::string run_out;
  std::string run_data;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run an experiment and write report.csv and summary.json");
  run_args.add_to(run);
  run->add_option("--out", run_out, "report directory")->required();
  run->add_option("--data", run_data, "read data written by 'gen' instead of generating it")
      ->check(CLI::ExistingDirectory);
  run->add_flag("--quiet", quiet, "do not print iterations");

  std::string report_in;
  bool as_json = false;
  auto* report = app.add_subcommand("report", "print the summary of a written report");
  report->add_option("--in", report_in, "report directory")->required()->check(CLI::ExistingDirectory);
  report->add_flag("--json", as_json, "print summary.json instead of text");

  std::string spec_kind;
  auto* spec = app.add_subcommand("spec", "print the default spec of an experiment kind");
  spec->add_option("kind", spec_kind, "l2regression, multiclass or optimalTransport")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto s = gen_args.resolve();
      write_dataset(generate(s), gen_out);
      std::ofstream(fs::path(gen_out) / "spec.json") << to_json(s).dump(2) << '\n';
      std::printf("wrote %s data to %s\n", to_string(s.kind).c_str(), gen_out.c_str());
    } else if (*run) {
      const auto s = run_args.resolve();
      Dataset data = run_data.empty() ? generate(s) : read_dataset(s, run_data);
      opt::IterationObserver echo;
      if (!quiet) {
        echo = [](const opt::IterationRecord& r) {
          std::printf("iter %3zu  loss %.10g  grad %.4g  batch %zu  %.2fs\n", r.iter, static_cast<double>(r.value),
                      static_cast<double>(r.grad_norm), r.batch_index, r.seconds);
          std::fflush(stdout);
        };
      }
      const auto result = run_experiment(s, std::move(data), echo);
      emit_report(result.report, run_out);
      print_summary(result.report);
    } else if (*report) {
      const auto r = read_report(report_in);
      if (as_json) {
        std::cout << summary_json(r).dump(2) << '\n';
      } else {
        print_summary(r);
      }
    } else if (*spec) {
      std::cout << to_json(default_spec(parse_experiment_kind(spec_kind))).dump(2) << '\n';
    }
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 3;
  }
  return 0;
}
