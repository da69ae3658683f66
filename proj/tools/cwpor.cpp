// cwpor: run persuasion-override debate experiments and summarize their logs.
//
//   cwpor run --config <file> [--resume]
//   cwpor report --log <file> --out <dir> [--charts]
//
// Exit codes: 0 success, 1 usage or unexpected failure, 2 config error,
// 3 dataset error, 4 fatal backend error, 5 unreadable run log.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cwpor/error.hpp"
#include "cwpor/report.hpp"
#include "cwpor/runner.hpp"
#include "cwpor/svg_charts.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDatasetError = 3,
  kBackendError = 4,
  kLogError = 5,
};

int run_command(const std::string& config_path, bool resume) {
  try {
    const auto config = cwpor::load_run_config(config_path);
    const auto summary = cwpor::run_experiment(config, resume);
    std::cout << "instances: " << summary.expected << " (executed " << summary.executed << ", reused "
              << summary.reused << ")\n"
              << "trials: " << summary.tally.trials << "  parse failures: " << summary.tally.parse_failures
              << "  instance errors: " << summary.tally.instance_errors << '\n'
              << "log: " << config.output.string() << '\n';
    return kOk;
  } catch (const cwpor::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const cwpor::DatasetError& e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return kDatasetError;
  } catch (const cwpor::FatalBackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kBackendError;
  } catch (const cwpor::BackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kBackendError;
  } catch (const cwpor::LogError& e) {
    std::cerr << "run log error: " << e.what() << '\n';
    return kLogError;
  }
}

int report_command(const std::string& log_path, const std::string& out_dir, bool charts) {
  try {
    const auto tables = cwpor::summarize(std::filesystem::path(log_path));
    cwpor::write_tables(tables, out_dir);
    if (charts) {
      if (tables.by_category.empty()) {
        std::cerr << "no usable trials in " << log_path << "; charts skipped\n";
      } else {
        cwpor::write_charts(tables, out_dir);
      }
    }
    const auto& o = tables.overview;
    std::cout << "trials: " << o.tally.trials << "  parse failures: " << o.tally.parse_failures
              << "  instance errors: " << o.tally.instance_errors << '\n';
    if (o.overall) {
      std::cout << "POR: " << cwpor::format_number(o.overall->por)
                << "  CW-POR: " << cwpor::format_number(o.overall->cw_por) << " ["
                << cwpor::format_number(o.overall->ci_low) << ", " << cwpor::format_number(o.overall->ci_high)
                << "]\n";
    }
    return kOk;
  } catch (const cwpor::LogError& e) {
    std::cerr << "run log error: " << e.what() << '\n';
    return kLogError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persuasion override (POR / CW-POR) debate harness"};
  app.require_subcommand(1);

  std::string config_path;
  bool resume = false;
  auto* run = app.add_subcommand("run", "Run or resume a debate experiment");
  run->add_option("--config", config_path, "JSON run configuration")->required();
  run->add_flag("--resume", resume, "Continue an existing run log, executing only missing cells");

  std::string log_path;
  std::string out_dir;
  bool charts = false;
  auto* report = app.add_subcommand("report", "Summarize a run log into CSV tables and SVG charts");
  report->add_option("--log", log_path, "Run log (JSON lines)")->required();
  report->add_option("--out", out_dir, "Output directory")->required();
  report->add_flag("--charts", charts, "Also render SVG charts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kFailure;
  }

  try {
    if (run->parsed()) return run_command(config_path, resume);
    return report_command(log_path, out_dir, charts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
