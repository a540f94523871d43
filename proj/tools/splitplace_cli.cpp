// splitplace: experiment runner for the split-placement edge simulator.
//
//   splitplace gen-trace --config run.json --out trace.jsonl
//   splitplace run       --config run.json [--policy all_layer] [--out dir]
//   splitplace compare   --config run.json --policy all_layer --policy splitplace
//   splitplace report    out/*_aggregate.json --format csv
//   splitplace init      --out data/

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "splitplace/metrics.hpp"
#include "splitplace/model.hpp"
#include "splitplace/runner.hpp"
#include "splitplace/trace.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

using namespace splitplace;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> trace;
  std::vector<std::string> policies;
};

RunConfig apply(RunConfig c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.trace) c.trace = std::filesystem::path(*o.trace);
  return c;
}

SchedClock parse_clock(const std::string& name) {
  if (name == "wall") return SchedClock::Wall;
  return SchedClock::Virtual;
}

std::vector<MetricsReport> read_reports(const std::vector<std::string>& paths) {
  std::vector<MetricsReport> out;
  for (const auto& p : paths) {
    const std::string text = read_text_file(p);
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError(p + ": not valid JSON");
    if (j.is_array()) {
      for (const auto& item : j) out.push_back(report_from_json(item.dump(), p));
    } else {
      out.push_back(report_from_json(text, p));
    }
  }
  return out;
}

void print_reports(const std::vector<MetricsReport>& reports, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    std::cout << reports_to_csv(reports);
    return;
  }
  for (const auto& r : reports) std::cout << report_to_json(r);
}

int write_defaults(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "cluster.json", serialize_cluster(default_cluster()));
  write_text_file(dir / "profiles.json", serialize_profiles(default_profiles()));
  RunConfig rc;
  rc.cluster = "cluster.json";
  rc.profiles = "profiles.json";
  TraceSpec spec;
  spec.horizon_s = 600.0;
  spec.lambda_per_interval = 1.0;
  spec.app_mix = {{"inceptionv3", 1.0 / 3}, {"mobilenetv2", 1.0 / 3}, {"resnet50v2", 1.0 / 3}};
  spec.app_mix[2].second = 1.0 - spec.app_mix[0].second - spec.app_mix[1].second;
  spec.sla_multiplier_min = 0.5;
  spec.sla_multiplier_max = 2.0;
  rc.trace = spec;
  rc.out = "out";
  write_text_file(dir / "run.json", serialize_run_config(rc));
  std::cout << "wrote " << (dir / "cluster.json").string() << ", "
            << (dir / "profiles.json").string() << ", " << (dir / "run.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-cluster simulator for split DNN inference"};
  app.require_subcommand(1);

  Overrides overrides;
  std::vector<std::string> configs;
  std::string format = "csv";
  std::string clock = "virtual";
  std::string events_path;
  std::vector<std::string> report_inputs;
  std::string single_out;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", configs, "Run config JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", overrides.seed, "Base seed override");
    cmd->add_option("--out", overrides.out, "Output directory override");
    cmd->add_option("--trace", overrides.trace, "Trace file override (JSON lines)");
  };

  auto* gen = app.add_subcommand("gen-trace", "Generate a workload trace from a run config");
  gen->add_option("--config", configs, "Run config whose trace is a trace spec")
      ->required()
      ->expected(1)
      ->check(CLI::ExistingFile);
  gen->add_option("--seed", overrides.seed, "Seed (defaults to the config seed)");
  gen->add_option("--out", single_out, "Output trace path")->required();

  auto* run_cmd = app.add_subcommand("run", "Run one policy over all replications");
  add_common(run_cmd);
  run_cmd->add_option("--policy", overrides.policies, "Policy override")
      ->expected(0, 1)
      ->check(CLI::IsMember({"splitplace", "all_layer", "all_semantic", "compressed"}));
  run_cmd->add_option("--format", format, "Stdout format")->check(CLI::IsMember({"json", "csv"}));
  run_cmd->add_option("--events", events_path, "Write the first replication's event log here");
  run_cmd->add_option("--sched-clock", clock, "Scheduling-time source")
      ->check(CLI::IsMember({"virtual", "wall"}));

  auto* cmp = app.add_subcommand("compare", "Compare policies on a shared trace");
  add_common(cmp);
  cmp->add_option("--policy", overrides.policies, "Policies to derive from a single config")
      ->check(CLI::IsMember({"splitplace", "all_layer", "all_semantic", "compressed"}));
  cmp->add_option("--format", format, "Stdout format")->check(CLI::IsMember({"json", "csv"}));
  cmp->add_option("--sched-clock", clock, "Scheduling-time source")
      ->check(CLI::IsMember({"virtual", "wall"}));

  auto* rep = app.add_subcommand("report", "Re-emit saved JSON reports as a table");
  rep->add_option("reports", report_inputs, "Report JSON files")->required()->check(CLI::ExistingFile);
  rep->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  rep->add_option("--out", single_out, "Write to this file instead of stdout");

  auto* init = app.add_subcommand("init", "Write the default cluster, profiles and run config");
  init->add_option("--out", single_out, "Target directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*init) return write_defaults(single_out);

    if (*gen) {
      const RunConfig rc = load_run_config(configs.front());
      const auto* spec = std::get_if<TraceSpec>(&rc.trace);
      if (spec == nullptr) throw ConfigError("gen-trace needs a config whose trace is a spec");
      const LoadedRun loaded = prepare_run(rc);
      const auto trace = generate_trace(*spec, loaded.profiles, loaded.cluster.interval_s,
                                        overrides.seed.value_or(rc.seed));
      save_trace(single_out, trace);
      std::cerr << "wrote " << trace.size() << " workloads to " << single_out << "\n";
      return 0;
    }

    if (*rep) {
      const auto reports = read_reports(report_inputs);
      const auto fmt = parse_report_format(format);
      if (single_out.empty()) {
        print_reports(reports, fmt);
      } else {
        export_reports(reports, fmt, single_out);
      }
      return 0;
    }

    if (*run_cmd) {
      if (configs.size() != 1) throw ConfigError("run takes exactly one --config");
      RunConfig rc = apply(load_run_config(configs.front()), overrides);
      if (!overrides.policies.empty()) rc.policy = parse_policy(overrides.policies.front());
      RunResult result;
      if (events_path.empty()) {
        result = run(rc, parse_clock(clock));
      } else {
        // Event logs stream during simulation; replay replication 0 with a sink.
        result = run(rc, parse_clock(clock));
        const LoadedRun loaded = prepare_run(rc);
        std::ofstream log(events_path, std::ios::trunc);
        if (!log) throw std::runtime_error(events_path + ": cannot open for writing");
        SimulationOptions options;
        options.policy = rc.policy;
        options.scheduler = rc.scheduler;
        options.decider = DeciderOptions{rc.alpha, rc.ucb_c};
        options.events = [&log](const EngineEvent& e) { log << to_json_line(e) << '\n'; };
        simulate(loaded.cluster, loaded.profiles, trace_for(loaded, rc.seed), options, rc.seed);
      }
      print_reports({result.aggregate}, parse_report_format(format));
      return 0;
    }

    if (*cmp) {
      std::vector<RunConfig> rcs;
      for (const auto& path : configs) rcs.push_back(apply(load_run_config(path), overrides));
      if (rcs.size() == 1) {
        if (overrides.policies.size() < 2) {
          throw ConfigError("compare needs >= 2 configs or >= 2 --policy values");
        }
        const RunConfig base = rcs.front();
        rcs.clear();
        for (const auto& p : overrides.policies) {
          RunConfig c = base;
          c.policy = parse_policy(p);
          rcs.push_back(std::move(c));
        }
      }
      const auto rows = compare_and_write(rcs, parse_clock(clock));
      print_reports(rows, parse_report_format(format));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
