#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "splitplace/decider.hpp"
#include "splitplace/engine.hpp"

namespace splitplace {

struct ResponseTimeStats {
  double mean = 0.0;
  double p95 = 0.0;
  double max = 0.0;

  bool operator==(const ResponseTimeStats&) const = default;
};

struct ArmSummary {
  std::uint64_t pulls = 0;
  double mean_reward = 0.0;

  bool operator==(const ArmSummary&) const = default;
};

struct ContextSummary {
  Context context = Context::Tight;
  ArmSummary layer;
  ArmSummary semantic;

  bool operator==(const ContextSummary&) const = default;
};

/// Outcome of one run (or the mean over replications).
struct MetricsReport {
  std::string model;
  std::uint64_t replications = 1;
  std::uint64_t workloads = 0;   // completed + unfinished
  std::uint64_t completed = 0;
  std::uint64_t unfinished = 0;  // still running or queued at the horizon
  std::uint64_t violations = 0;  // includes unfinished
  double energy_wh = 0.0;
  double sched_time_ms_mean = 0.0;
  double sched_time_ms_std = 0.0;
  double sla_violation_rate = 0.0;
  double sla_violation_std = 0.0;
  double accuracy_mean = 0.0;
  double reward = 0.0;
  ResponseTimeStats response_time;
  std::vector<ContextSummary> bandits;  // empty for fixed policies

  bool operator==(const MetricsReport&) const = default;
};

std::vector<ContextSummary> summarize_bandits(const BanditState& b);

WorkloadOutcome outcome_of(const WorkloadRecord& r);

/// Builds a single-run report. Unfinished workloads count as SLA violations
/// and contribute zero reward; accuracy_mean and response times cover
/// completed workloads only. Throws std::invalid_argument when nothing
/// completed.
MetricsReport summarize(std::string model, std::span<const WorkloadRecord> completed,
                        std::size_t unfinished, double energy_joules,
                        std::span<const double> sched_times_ms,
                        std::optional<BanditState> bandits = std::nullopt);

/// Reward restricted to workloads with id >= first_id; unfinished ones count
/// as zero. Throws std::invalid_argument when the window is empty.
double windowed_reward(std::span<const WorkloadRecord> completed,
                       std::span<const WorkloadRecord> unfinished, WorkloadId first_id);

/// Mean over replications with sample standard deviations for scheduling time
/// and SLA violation rate. Throws std::invalid_argument on an empty list.
MetricsReport aggregate_reports(std::span<const MetricsReport> reports);

double percentile_nearest_rank(std::vector<double> values, double q);
double sample_std(std::span<const double> values);

std::string report_to_json(const MetricsReport& r);
MetricsReport report_from_json(std::string_view text, std::string_view source = "<string>");

inline constexpr std::string_view kCsvHeader =
    "model,energy_wh,sched_time_ms_mean,sched_time_ms_std,sla_violation_rate,"
    "sla_violation_std,accuracy_mean,reward";

/// Header plus one row per report, in the given order.
std::string reports_to_csv(std::span<const MetricsReport> reports);

/// Orders comparison rows with baseline (fixed-policy) rows first, keeping the
/// relative order of each group.
std::vector<MetricsReport> baseline_first(std::vector<MetricsReport> reports);

enum class ReportFormat { Json, Csv };
ReportFormat parse_report_format(std::string_view name);

/// Writes one report (json) or a CSV table. Throws std::runtime_error when the
/// path is not writable.
void export_report(const MetricsReport& r, ReportFormat format, const std::filesystem::path& path);
void export_reports(std::span<const MetricsReport> reports, ReportFormat format,
                    const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

}  // namespace splitplace
