// fireline: run simulated missions, replay mission logs, probe radio range,
// or listen to a live line feed.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "fireline/api_server.hpp"
#include "fireline/config.hpp"
#include "fireline/mission_service.hpp"
#include "fireline/runner.hpp"
#include "fireline/scenario.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

fireline::ServiceConfig config_or_default(const std::string& path) {
  if (path.empty()) return {};
  return fireline::load_config(path);
}

bool write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return static_cast<bool>(std::cout);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  return static_cast<bool>(out);
}

int cmd_run(const std::string& scenario_path, const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<double> speed, const std::string& serve, const std::string& out_path,
            const std::string& report_path, bool as_json) {
  using namespace fireline;
  const sim::Scenario scenario = sim::load_scenario(scenario_path);
  const ServiceConfig config = config_or_default(config_path);

  std::ofstream log(out_path, std::ios::binary | std::ios::trunc);
  if (!log) {
    std::cerr << "error: cannot open log file " << out_path << " for writing\n";
    return 2;
  }

  runner::RunOptions opts;
  opts.seed = seed;
  opts.log_sink = &log;
  opts.speed = speed.value_or(serve.empty() ? 0.0 : 1.0);
  runner::ScenarioRunner run(scenario, config, opts);

  std::unique_ptr<api::Server> server;
  if (!serve.empty()) {
    server = std::make_unique<api::Server>(run.service(), api::parse_endpoint(serve));
    server->start();
    std::cerr << "serving mission API on port " << server->port() << '\n';
  }

  std::thread watcher([&] {
    while (!g_interrupted) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
      if (g_interrupted) run.request_stop();
    }
  });
  auto result = run.run();

  log.flush();
  const bool log_ok = static_cast<bool>(log);
  const std::string report = as_json ? runner::to_json(result.report).dump(2) + "\n" : runner::render_table(result.report);
  const bool report_ok = write_text(report_path, report);

  if (server && !g_interrupted) {
    std::cerr << "run complete; still serving, interrupt to exit\n";
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  g_interrupted = true;
  watcher.join();
  if (server) server->stop();

  if (!log_ok) {
    std::cerr << "error: failed while writing log " << out_path << '\n';
    return 2;
  }
  return report_ok ? 0 : 2;
}

int cmd_replay(const std::string& log_path, const std::string& report_path, bool as_json) {
  using namespace fireline;
  const auto records = mission::read_log(log_path);
  const auto outcome = runner::replay_log(records);
  const std::string report =
      as_json ? runner::to_json(outcome.report).dump(2) + "\n" : runner::render_table(outcome.report);
  if (!write_text(report_path, report)) return 2;
  if (!outcome.timeline_matches) {
    std::cerr << "error: replayed alert/geofence timeline differs from the recorded one\n";
    return 1;
  }
  std::cerr << "replay: alert/geofence timeline reproduced exactly\n";
  return 0;
}

int cmd_range_probe(const std::string& config_path, double from, double to, double step, int frames, bool as_json) {
  using namespace fireline;
  const ServiceConfig config = config_or_default(config_path);
  const auto rows = runner::range_probe(config.incident.channel, from, to, step, frames);
  std::cout << (as_json ? runner::to_json(rows).dump(2) + "\n" : runner::render_table(rows));
  return 0;
}

int cmd_listen(const std::string& config_path, std::string input, const std::string& serve,
               const std::string& out_path) {
  using namespace fireline;
  const ServiceConfig config = config_or_default(config_path);
  if (input.empty()) input = config.input;

  std::ofstream log(out_path, std::ios::binary | std::ios::trunc);
  if (!log) {
    std::cerr << "error: cannot open log file " << out_path << " for writing\n";
    return 2;
  }
  mission::MissionService svc(config.incident, &log, config.recall_grace_s);

  std::ifstream device_in;
  std::ofstream device_out;
  std::istream* in = &std::cin;
  std::ostream* uplink = &std::cout;
  if (input != "-") {
    device_in.open(input, std::ios::binary);
    if (!device_in) {
      std::cerr << "error: cannot open input " << input << '\n';
      return 2;
    }
    in = &device_in;
    if (std::filesystem::is_character_file(input)) {
      device_out.open(input, std::ios::binary);
      if (device_out) uplink = &device_out;
    }
  }
  svc.set_uplink([uplink](const std::string& line, double) {
    *uplink << line << '\n';
    uplink->flush();
  });

  const auto start = std::chrono::steady_clock::now();
  const auto wall = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  std::unique_ptr<api::Server> server;
  if (!serve.empty()) {
    server = std::make_unique<api::Server>(svc, api::parse_endpoint(serve));
    server->start();
    std::cerr << "serving mission API on port " << server->port() << '\n';
  }

  svc.open(0.0);
  std::atomic<bool> done{false};
  std::thread clock([&] {
    while (!done && !g_interrupted) {
      std::this_thread::sleep_for(std::chrono::milliseconds(250));
      svc.advance(wall());
    }
  });
  std::string line;
  while (!g_interrupted && std::getline(*in, line)) svc.ingest(line, wall());
  done = true;
  clock.join();
  svc.close(wall());
  if (server) server->stop();
  log.flush();
  return log ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  CLI::App app{"fireline - firefighter telemetry mission control"};
  app.require_subcommand(1);

  std::string scenario_path, config_path, serve, out_path = "mission.jsonl", report_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> speed;
  bool as_json = false;
  auto* run = app.add_subcommand("run", "run a scenario through the simulated channel and mission service");
  run->add_option("scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--config", config_path, "service config file")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "channel RNG seed");
  run->add_option("--speed", speed, "sim seconds per wall second (0 = as fast as possible)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--serve", serve, "serve the HTTP/stream API on ADDR (host:port)");
  run->add_option("--out", out_path, "JSON-lines log path")->capture_default_str();
  run->add_option("--report", report_path, "write the report here instead of stdout");
  run->add_flag("--json", as_json, "machine-readable report");

  std::string log_path, replay_report;
  bool replay_json = false;
  auto* replay = app.add_subcommand("replay", "re-derive alerts and geofence events from a mission log");
  replay->add_option("log", log_path, "JSON-lines log")->required()->check(CLI::ExistingFile);
  replay->add_option("--report", replay_report, "write the report here instead of stdout");
  replay->add_flag("--json", replay_json, "machine-readable report");

  double from = 0.0, to = 1000.0, step = 10.0;
  int frames = 5;
  std::string probe_config;
  bool probe_json = false;
  auto* probe = app.add_subcommand("range-probe", "delivery rate against base-station distance");
  probe->add_option("--from", from, "first distance (m)")->capture_default_str();
  probe->add_option("--to", to, "last distance (m)")->capture_default_str();
  probe->add_option("--step", step, "distance step (m)")->capture_default_str()->check(CLI::PositiveNumber);
  probe->add_option("--frames", frames, "frames per distance")->capture_default_str()->check(CLI::PositiveNumber);
  probe->add_option("--config", probe_config, "service config file")->check(CLI::ExistingFile);
  probe->add_flag("--json", probe_json, "machine-readable output");

  std::string listen_config, listen_input, listen_serve, listen_out = "mission.jsonl";
  auto* listen = app.add_subcommand("listen", "ingest newline-delimited frames from stdin or a device");
  listen->add_option("--config", listen_config, "service config file")->check(CLI::ExistingFile);
  listen->add_option("--input", listen_input, "'-' for stdin or a device path (default from config)");
  listen->add_option("--serve", listen_serve, "serve the HTTP/stream API on ADDR (host:port)");
  listen->add_option("--out", listen_out, "JSON-lines log path")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario_path, config_path, seed, speed, serve, out_path, report_path, as_json);
    if (*replay) return cmd_replay(log_path, replay_report, replay_json);
    if (*probe) return cmd_range_probe(probe_config, from, to, step, frames, probe_json);
    if (*listen) return cmd_listen(listen_config, listen_input, listen_serve, listen_out);
  } catch (const fireline::sim::SchemaError& e) {
    std::cerr << "error: scenario: " << e.what() << '\n';
    return 2;
  } catch (const fireline::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
