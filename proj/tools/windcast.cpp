// windcast: batch driver for the simulate -> fit -> forecast -> trajectories
// -> trade/reserve -> verify pipeline.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "windcast/app/config.hpp"
#include "windcast/app/pipeline.hpp"
#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"

namespace {

using namespace windcast;

int report(int code, std::string_view kind, std::string message) {
  for (char& c : message)
    if (c == '\n' || c == '\r') c = ' ';
  std::string quoted;
  for (char c : message) {
    if (c == '"' || c == '\\') quoted += '\\';
    quoted += c;
  }
  std::cerr << "windcast: error code=" << code << " kind=" << kind << " message=\"" << quoted << "\"\n";
  return code;
}

unsigned thread_cap() {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("WINDCAST_THREADS")) {
    long n = 0;
    try {
      n = csv::parse_long(env, "WINDCAST_THREADS");
    } catch (const DataError&) {
      throw ConfigError("WINDCAST_THREADS must be a positive integer");
    }
    if (n < 1) throw ConfigError("WINDCAST_THREADS must be a positive integer");
    threads = static_cast<unsigned>(n);
  }
  return threads;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Wind power forecasting and decision pipeline.\n"
               "Subcommands: simulate, fit, forecast, trajectories, trade, reserve, verify, pipeline.\n"
               "Environment: WINDCAST_THREADS caps per-site parallelism.\n"
               "Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure."};
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  std::string from;
  int hours = 0;
  bool plots = false;

  std::vector<std::string> commands = {"pipeline"};
  for (auto s : app::all_stages()) commands.emplace_back(app::stage_name(s));

  cli.add_option("command", command, "Stage to run, or 'pipeline' for all stages")
      ->required()
      ->check(CLI::IsMember(commands));
  auto* config_opt = cli.add_option("--config", config_path, "Run configuration (INI); defaults when omitted");
  auto* seed_opt = cli.add_option("--seed", seed, "Override [run] seed");
  auto* out_opt = cli.add_option("--out", out, "Override [run] out (output directory)");
  auto* from_opt = cli.add_option("--from", from, "With 'pipeline': first stage to run")
                       ->check(CLI::IsMember(std::vector<std::string>(commands.begin() + 1, commands.end())));
  auto* hours_opt = cli.add_option("--hours", hours, "Override [run] hours (simulated length)");
  cli.add_flag("--emit-plots-data", plots, "Write fan-chart data (central 10-90% intervals) in forecast");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << cli.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return report(2, "config", e.what());
  }

  try {
    app::RunConfig config = *config_opt ? app::parse_config(config_path) : app::default_config();
    if (*seed_opt) config.run.seed = seed;
    if (*out_opt) config.run.out = out;
    if (*hours_opt) config.run.hours = hours;
    if (*from_opt && command != "pipeline") throw ConfigError("--from only applies to 'pipeline'");

    app::RunOptions options{plots, thread_cap()};
    if (command == "pipeline") {
      std::optional<app::Stage> first;
      if (*from_opt) first = app::parse_stage(from);
      app::run_pipeline(config, options, first);
    } else {
      app::run_stage(app::parse_stage(command), config, options);
    }
  } catch (const ConfigError& e) {
    return report(2, "config", e.what());
  } catch (const DataError& e) {
    return report(3, "data", e.what());
  } catch (const NumericError& e) {
    return report(4, "numeric", e.what());
  } catch (const std::invalid_argument& e) {
    return report(2, "config", e.what());
  } catch (const std::exception& e) {
    return report(3, "data", e.what());
  }
  return 0;
}
