#include "splitplace/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "json.hpp"
#include "splitplace/schedulers.hpp"

namespace splitplace {

using nlohmann::json;

std::string_view to_string(Policy p) noexcept {
  switch (p) {
    case Policy::SplitPlace: return "splitplace";
    case Policy::AllLayer: return "all_layer";
    case Policy::AllSemantic: return "all_semantic";
    case Policy::Compressed: return "compressed";
  }
  return "unknown";
}

Policy parse_policy(std::string_view name) {
  for (Policy p : {Policy::SplitPlace, Policy::AllLayer, Policy::AllSemantic, Policy::Compressed}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir,
                           std::string_view source) {
  const std::string src(source);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(src + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(src + ": run config must be a JSON object");
  static constexpr std::string_view keys[] = {"cluster", "profiles", "trace", "policy",
                                              "scheduler", "alpha", "ucb_c", "replications",
                                              "seed", "out"};
  for (auto key : keys) {
    if (!j.contains(std::string(key))) {
      throw ConfigError(src + ": missing key '" + std::string(key) + "'");
    }
  }
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(keys), std::end(keys), key) == std::end(keys)) {
      throw ConfigError(src + ": unknown key '" + key + "'");
    }
  }
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : (base_dir / path).lexically_normal();
  };
  RunConfig c;
  try {
    c.cluster = resolve(j.at("cluster").get<std::string>());
    c.profiles = resolve(j.at("profiles").get<std::string>());
    const auto& trace = j.at("trace");
    if (trace.is_string()) {
      c.trace = resolve(trace.get<std::string>());
    } else {
      c.trace = parse_trace_spec(trace.dump(), src + ".trace");
    }
    c.policy = parse_policy(j.at("policy").get<std::string>());
    c.scheduler = j.at("scheduler").get<std::string>();
    c.alpha = j.at("alpha").get<double>();
    c.ucb_c = j.at("ucb_c").get<double>();
    if (!j.at("replications").is_number_unsigned() || !j.at("seed").is_number_unsigned()) {
      throw ConfigError(src + ": replications and seed must be non-negative integers");
    }
    c.replications = j.at("replications").get<std::uint64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.out = resolve(j.at("out").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(src + ": " + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(src + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(src + ": " + e.what());
  }
  if (!is_scheduler_name(c.scheduler)) {
    throw ConfigError(src + ": unknown scheduler '" + c.scheduler + "'");
  }
  if (c.replications < 1) throw ConfigError(src + ": replications must be >= 1");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError(src + ": alpha must lie in (0, 1]");
  if (!(c.ucb_c >= 0.0)) throw ConfigError(src + ": ucb_c must be >= 0");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text, path.parent_path(), path.string());
}

std::string serialize_run_config(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["cluster"] = c.cluster.string();
  j["profiles"] = c.profiles.string();
  if (const auto* path = std::get_if<std::filesystem::path>(&c.trace)) {
    j["trace"] = path->string();
  } else {
    j["trace"] = nlohmann::ordered_json::parse(serialize_trace_spec(std::get<TraceSpec>(c.trace)));
  }
  j["policy"] = std::string(to_string(c.policy));
  j["scheduler"] = c.scheduler;
  j["alpha"] = c.alpha;
  j["ucb_c"] = c.ucb_c;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  return j.dump(2) + "\n";
}

namespace {

struct Admitted {
  Workload workload;
  SplitDecision decision;
  double accuracy;
  FragmentGraph graph;
};

WorkloadRecord unfinished_record(const Admitted& a) {
  WorkloadRecord r;
  r.workload = a.workload;
  r.decision = a.decision;
  r.accuracy = a.accuracy;
  r.dispatch_s = -1.0;
  return r;
}

}  // namespace

ReplicationResult simulate(const ClusterConfig& cluster,
                           const std::vector<ApplicationProfile>& profiles,
                           const std::vector<Workload>& trace, const SimulationOptions& options,
                           std::uint64_t seed) {
  for (const auto& w : trace) {
    if (find_profile(profiles, w.app) == nullptr) {
      throw ConfigError("trace references unknown application '" + w.app + "'");
    }
  }
  const double dt = cluster.interval_s;

  std::vector<Workload> arrivals = trace;
  std::stable_sort(arrivals.begin(), arrivals.end(),
                   [](const Workload& a, const Workload& b) { return a.arrival_s < b.arrival_s; });
  const double last_arrival = arrivals.empty() ? 0.0 : arrivals.back().arrival_s;
  const double horizon =
      options.horizon_s.value_or(last_arrival + std::max(last_arrival, 1000.0 * dt));

  Simulator sim(cluster, seed);
  if (options.events) sim.set_event_sink(options.events);
  auto scheduler = make_scheduler(options.scheduler, seed);

  std::optional<Decider> own_decider;
  Decider* decider = options.decider_override;
  if (options.policy == Policy::SplitPlace && decider == nullptr) {
    own_decider.emplace(profiles, options.decider);
    decider = &*own_decider;
  }

  const auto emit = [&](std::string_view kind, double t, WorkloadId w) {
    if (options.events) options.events(EngineEvent{t, std::string(kind), w, std::nullopt, std::nullopt});
  };

  ReplicationResult result;
  result.seed = seed;
  std::deque<Admitted> queue;
  std::size_t next_arrival = 0;
  std::uint64_t ops_before = 0;

  for (std::uint64_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t > horizon) break;
    if (next_arrival == arrivals.size() && queue.empty() && sim.active_workloads() == 0) break;

    const auto wall_start = std::chrono::steady_clock::now();
    bool scheduled_anything = false;

    while (next_arrival < arrivals.size() && arrivals[next_arrival].arrival_s <= t) {
      const Workload& w = arrivals[next_arrival++];
      const ApplicationProfile& p = *find_profile(profiles, w.app);
      emit("arrive", t, w.id);
      Admitted a{w, SplitDecision::Layer, 0.0, {}};
      switch (options.policy) {
        case Policy::SplitPlace: a.decision = decider->decide(w); break;
        case Policy::AllLayer: a.decision = SplitDecision::Layer; break;
        case Policy::AllSemantic: a.decision = SplitDecision::Semantic; break;
        case Policy::Compressed: a.decision = SplitDecision::Layer; break;
      }
      if (options.policy == Policy::Compressed) {
        a.graph = instantiate_compressed(p);
        a.accuracy = compressed_accuracy(p);
      } else {
        a.graph = instantiate(a.decision, p);
        a.accuracy = a.decision == SplitDecision::Layer ? p.accuracy_layer : p.accuracy_semantic;
      }
      queue.push_back(std::move(a));
      scheduled_anything = true;
    }

    for (auto it = queue.begin(); it != queue.end();) {
      scheduled_anything = true;
      const Placement placement = scheduler->place(it->graph, sim.view());
      if (placement.queued()) {
        ++it;
        continue;
      }
      sim.admit(it->workload, it->decision, it->accuracy, it->graph, *placement.hosts);
      it = queue.erase(it);
    }

    if (scheduled_anything) {
      double ms = 0.0;
      if (options.clock == SchedClock::Wall) {
        ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                       wall_start)
                 .count();
      } else {
        const std::uint64_t ops =
            scheduler->evaluations() + (decider != nullptr ? decider->operations() : 0);
        ms = static_cast<double>(ops - ops_before) * kVirtualMsPerOperation;
      }
      result.sched_times_ms.push_back(ms);
    }
    ops_before = scheduler->evaluations() + (decider != nullptr ? decider->operations() : 0);

    sim.advance_to(static_cast<double>(k + 1) * dt);

    for (auto& rec : sim.take_completed()) {
      if (options.policy == Policy::SplitPlace) decider->feedback(rec.workload.id, outcome_of(rec));
      result.completed.push_back(std::move(rec));
    }
  }

  result.horizon_s = sim.now();
  result.unfinished = sim.in_flight();
  for (const auto& a : queue) result.unfinished.push_back(unfinished_record(a));
  for (std::size_t i = next_arrival; i < arrivals.size(); ++i) {
    WorkloadRecord r;
    r.workload = arrivals[i];
    r.dispatch_s = -1.0;
    result.unfinished.push_back(std::move(r));
  }
  std::sort(result.unfinished.begin(), result.unfinished.end(),
            [](const WorkloadRecord& a, const WorkloadRecord& b) {
              return a.workload.id < b.workload.id;
            });

  result.energy_joules = sim.energy().total_joules();
  if (decider != nullptr) result.bandits = decider->bandits();
  if (!result.completed.empty()) {
    result.report = summarize(std::string(to_string(options.policy)), result.completed,
                              result.unfinished.size(), result.energy_joules,
                              result.sched_times_ms, result.bandits);
  }
  return result;
}

LoadedRun prepare_run(const RunConfig& config) {
  LoadedRun run;
  run.config = config;
  try {
    run.cluster = load_cluster(config.cluster);
    run.profiles = load_profiles(config.profiles);
    if (const auto* path = std::get_if<std::filesystem::path>(&config.trace)) {
      run.fixed_trace = load_trace(*path);
      for (const auto& w : *run.fixed_trace) {
        if (find_profile(run.profiles, w.app) == nullptr) {
          throw ConfigError(path->string() + ": unknown application '" + w.app + "'");
        }
      }
    } else {
      for (const auto& [name, _] : std::get<TraceSpec>(config.trace).app_mix) {
        if (find_profile(run.profiles, name) == nullptr) {
          throw ConfigError("trace app_mix names unknown application '" + name + "'");
        }
      }
    }
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (!is_scheduler_name(config.scheduler)) {
    throw ConfigError("unknown scheduler '" + config.scheduler + "'");
  }
  if (config.replications < 1) throw ConfigError("replications must be >= 1");
  return run;
}

std::vector<Workload> trace_for(const LoadedRun& run, std::uint64_t seed) {
  if (run.fixed_trace) return *run.fixed_trace;
  return generate_trace(std::get<TraceSpec>(run.config.trace), run.profiles,
                        run.cluster.interval_s, seed);
}

RunResult execute(const LoadedRun& run, SchedClock clock) {
  RunResult out;
  SimulationOptions options;
  options.policy = run.config.policy;
  options.scheduler = run.config.scheduler;
  options.decider = DeciderOptions{run.config.alpha, run.config.ucb_c};
  options.clock = clock;
  std::vector<MetricsReport> reports;
  for (std::uint64_t r = 0; r < run.config.replications; ++r) {
    const std::uint64_t seed = run.config.seed + r;
    auto rep = simulate(run.cluster, run.profiles, trace_for(run, seed), options, seed);
    if (rep.completed.empty()) {
      throw std::runtime_error("replication " + std::to_string(r) + " completed no workloads");
    }
    reports.push_back(rep.report);
    out.replications.push_back(std::move(rep));
  }
  out.aggregate = aggregate_reports(reports);
  return out;
}

RunResult run(const RunConfig& config, SchedClock clock) {
  const LoadedRun loaded = prepare_run(config);
  RunResult result = execute(loaded, clock);
  const std::string name(to_string(config.policy));
  std::filesystem::create_directories(config.out);
  for (std::size_t r = 0; r < result.replications.size(); ++r) {
    export_report(result.replications[r].report, ReportFormat::Json,
                  config.out / (name + "_rep" + std::to_string(r) + ".json"));
  }
  export_report(result.aggregate, ReportFormat::Json, config.out / (name + "_aggregate.json"));
  export_report(result.aggregate, ReportFormat::Csv, config.out / (name + "_aggregate.csv"));
  return result;
}

namespace {

bool same_trace(const RunConfig& a, const RunConfig& b) {
  if (a.trace.index() != b.trace.index()) return false;
  if (const auto* pa = std::get_if<std::filesystem::path>(&a.trace)) {
    const auto& pb = std::get<std::filesystem::path>(b.trace);
    std::error_code ec;
    if (std::filesystem::equivalent(*pa, pb, ec)) return true;
    return read_text_file(*pa) == read_text_file(pb);
  }
  return std::get<TraceSpec>(a.trace) == std::get<TraceSpec>(b.trace) && a.seed == b.seed &&
         a.replications == b.replications;
}

}  // namespace

std::vector<MetricsReport> compare(const std::vector<RunConfig>& configs, SchedClock clock) {
  if (configs.size() < 2) throw ConfigError("comparison requires at least two configs");
  std::vector<LoadedRun> loaded;
  for (const auto& c : configs) loaded.push_back(prepare_run(c));
  for (std::size_t i = 1; i < configs.size(); ++i) {
    bool shared = false;
    try {
      shared = same_trace(configs.front(), configs[i]);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
    if (!shared) throw ConfigError("comparison requires a shared trace");
    if (!(loaded[i].cluster == loaded.front().cluster)) {
      throw ConfigError("comparison requires a shared cluster");
    }
  }
  std::vector<MetricsReport> rows;
  for (const auto& l : loaded) rows.push_back(execute(l, clock).aggregate);
  return baseline_first(std::move(rows));
}

std::vector<MetricsReport> compare_and_write(const std::vector<RunConfig>& configs,
                                             SchedClock clock) {
  auto rows = compare(configs, clock);
  const auto& out = configs.front().out;
  std::filesystem::create_directories(out);
  export_reports(rows, ReportFormat::Csv, out / "comparison.csv");
  export_reports(rows, ReportFormat::Json, out / "comparison.json");
  return rows;
}

}  // namespace splitplace
