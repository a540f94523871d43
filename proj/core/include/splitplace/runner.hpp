#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "splitplace/decider.hpp"
#include "splitplace/engine.hpp"
#include "splitplace/metrics.hpp"
#include "splitplace/model.hpp"
#include "splitplace/trace.hpp"

namespace splitplace {

enum class Policy { SplitPlace, AllLayer, AllSemantic, Compressed };

std::string_view to_string(Policy p) noexcept;
/// Throws std::invalid_argument for names outside
/// {splitplace, all_layer, all_semantic, compressed}.
Policy parse_policy(std::string_view name);

/// Source of the "Sched. Time" metric. Virtual charges a fixed cost per
/// decider call and per scheduler host evaluation, which keeps reports
/// reproducible; Wall measures the elapsed steady-clock time.
enum class SchedClock { Virtual, Wall };

inline constexpr double kVirtualMsPerOperation = 0.001;

/// Raised for any configuration problem detected before a simulation starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::filesystem::path cluster;
  std::filesystem::path profiles;
  std::variant<std::filesystem::path, TraceSpec> trace;
  Policy policy = Policy::SplitPlace;
  std::string scheduler = "least_loaded";
  double alpha = 0.1;
  double ucb_c = 1.4142135623730951;
  std::uint64_t replications = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
};

/// Parses a run config; relative paths resolve against base_dir. Throws
/// ConfigError.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir,
                           std::string_view source = "<string>");
RunConfig load_run_config(const std::filesystem::path& path);
std::string serialize_run_config(const RunConfig& c);

struct SimulationOptions {
  Policy policy = Policy::SplitPlace;
  std::string scheduler = "least_loaded";
  DeciderOptions decider;
  SchedClock clock = SchedClock::Virtual;
  // Simulation stops here even if workloads remain; defaults to twice the
  // arrival span, at least 1000 intervals past the last arrival.
  std::optional<double> horizon_s;
  // Optional pre-trained decider for the splitplace policy (not owned).
  Decider* decider_override = nullptr;
  EventSink events;
};

struct ReplicationResult {
  std::uint64_t seed = 0;
  MetricsReport report;
  std::vector<WorkloadRecord> completed;   // in completion order
  std::vector<WorkloadRecord> unfinished;  // in-flight or queued at the horizon
  std::optional<BanditState> bandits;
  std::vector<double> sched_times_ms;
  double energy_joules = 0.0;
  double horizon_s = 0.0;
};

/// Runs one replication: per interval admit arrivals, decide the split,
/// place queued workloads FIFO, advance the engine, feed completions back.
ReplicationResult simulate(const ClusterConfig& cluster,
                           const std::vector<ApplicationProfile>& profiles,
                           const std::vector<Workload>& trace, const SimulationOptions& options,
                           std::uint64_t seed);

struct LoadedRun {
  RunConfig config;
  ClusterConfig cluster;
  std::vector<ApplicationProfile> profiles;
  std::optional<std::vector<Workload>> fixed_trace;  // when the config names a file
};

/// Loads and validates every input referenced by the config. Throws
/// ConfigError.
LoadedRun prepare_run(const RunConfig& config);

/// Workloads for replication seed `seed`: the fixed file, or a trace generated
/// from the spec with that seed.
std::vector<Workload> trace_for(const LoadedRun& run, std::uint64_t seed);

struct RunResult {
  std::vector<ReplicationResult> replications;
  MetricsReport aggregate;
};

/// Executes replications seed = config.seed + r for r in [0, replications).
RunResult execute(const LoadedRun& run, SchedClock clock = SchedClock::Virtual);

/// Runs and writes <out>/<policy>_rep<r>.json plus <out>/<policy>_aggregate.{json,csv}.
/// Nothing is written when any replication fails.
RunResult run(const RunConfig& config, SchedClock clock = SchedClock::Virtual);

/// Runs every config on the shared trace and cluster and returns one aggregate
/// row per config, baseline rows first. Throws ConfigError("comparison requires
/// a shared trace") when traces differ, or when clusters differ.
std::vector<MetricsReport> compare(const std::vector<RunConfig>& configs,
                                   SchedClock clock = SchedClock::Virtual);

/// compare() and write <out>/comparison.csv and <out>/comparison.json, where
/// out is the first config's output directory.
std::vector<MetricsReport> compare_and_write(const std::vector<RunConfig>& configs,
                                             SchedClock clock = SchedClock::Virtual);

}  // namespace splitplace
