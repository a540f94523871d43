#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "splitplace/model.hpp"

namespace splitplace {

struct TraceSpec {
  double horizon_s = 0.0;
  double lambda_per_interval = 0.0;
  // Ordered by application name so draws do not depend on input ordering.
  std::vector<std::pair<std::string, double>> app_mix;
  double sla_multiplier_min = 1.0;
  double sla_multiplier_max = 1.0;
  std::uint64_t seed = 0;

  bool operator==(const TraceSpec&) const = default;
};

std::vector<std::string> validate_trace_spec(const TraceSpec& spec);

/// Poisson(lambda) arrivals per interval, spread uniformly inside it; app drawn
/// from app_mix; SLA = u * prior layer time with u ~ U[min, max]. Workloads
/// are sorted by arrival and numbered densely from 0. `seed` overrides
/// spec.seed. Throws std::invalid_argument when app_mix names an unknown app.
std::vector<Workload> generate_trace(const TraceSpec& spec,
                                     const std::vector<ApplicationProfile>& profiles,
                                     double interval_s, std::uint64_t seed);
std::vector<Workload> generate_trace(const TraceSpec& spec,
                                     const std::vector<ApplicationProfile>& profiles,
                                     double interval_s);

/// JSON-lines, one workload per line with keys id, arrival_s, app, sla_s.
std::string format_trace(const std::vector<Workload>& trace);
/// Throws ParseError naming the 1-based line of the first malformed entry.
std::vector<Workload> parse_trace(std::string_view text, std::string_view source = "<string>");

void save_trace(const std::filesystem::path& path, const std::vector<Workload>& trace);
std::vector<Workload> load_trace(const std::filesystem::path& path);

// TraceSpec as a JSON object with keys horizon_s, lambda_per_interval,
// app_mix, sla_multiplier_range and an optional seed.
std::string serialize_trace_spec(const TraceSpec& spec);
TraceSpec parse_trace_spec(std::string_view json_text, std::string_view source = "<string>");

}  // namespace splitplace
