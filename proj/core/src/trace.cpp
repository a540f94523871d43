#include "splitplace/trace.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "splitplace/rng.hpp"

namespace splitplace {

using nlohmann::json;

std::vector<std::string> validate_trace_spec(const TraceSpec& spec) {
  std::vector<std::string> out;
  if (!(std::isfinite(spec.horizon_s) && spec.horizon_s > 0)) out.push_back("horizon_s must be > 0");
  if (!(std::isfinite(spec.lambda_per_interval) && spec.lambda_per_interval >= 0)) {
    out.push_back("lambda_per_interval must be >= 0");
  }
  if (spec.app_mix.empty()) out.push_back("app_mix empty");
  double total = 0.0;
  for (const auto& [name, prob] : spec.app_mix) {
    if (!(std::isfinite(prob) && prob >= 0)) out.push_back("app_mix[" + name + "] must be >= 0");
    total += prob;
  }
  if (!spec.app_mix.empty() && std::abs(total - 1.0) > 1e-9) {
    out.push_back("app_mix probabilities must sum to 1");
  }
  if (!(spec.sla_multiplier_min > 0 && spec.sla_multiplier_min <= spec.sla_multiplier_max &&
        std::isfinite(spec.sla_multiplier_max))) {
    out.push_back("sla_multiplier_range must satisfy 0 < min <= max");
  }
  return out;
}

std::vector<Workload> generate_trace(const TraceSpec& spec,
                                     const std::vector<ApplicationProfile>& profiles,
                                     double interval_s, std::uint64_t seed) {
  require_valid(validate_trace_spec(spec));
  if (!(interval_s > 0)) throw std::invalid_argument("interval_s must be > 0");

  std::vector<const ApplicationProfile*> apps;
  std::vector<double> weights;
  for (const auto& [name, prob] : spec.app_mix) {
    const auto* p = find_profile(profiles, name);
    if (p == nullptr) throw std::invalid_argument("app_mix names unknown application '" + name + "'");
    apps.push_back(p);
    weights.push_back(prob);
  }

  Rng rng = make_stream(seed, Stream::Trace);
  std::vector<Workload> out;
  if (spec.lambda_per_interval == 0.0) return out;

  std::poisson_distribution<int> count(spec.lambda_per_interval);
  std::discrete_distribution<std::size_t> pick_app(weights.begin(), weights.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> multiplier(spec.sla_multiplier_min,
                                                    spec.sla_multiplier_max);

  const auto intervals = static_cast<std::uint64_t>(std::ceil(spec.horizon_s / interval_s));
  for (std::uint64_t i = 0; i < intervals; ++i) {
    const double start = static_cast<double>(i) * interval_s;
    const double width = std::min(interval_s, spec.horizon_s - start);
    const int n = count(rng);
    std::vector<Workload> batch;
    for (int k = 0; k < n; ++k) {
      Workload w;
      w.arrival_s = start + unit(rng) * width;
      const auto* p = apps[pick_app(rng)];
      w.app = p->name;
      // collapsed range: multiplier is exactly the bound
      const double u = spec.sla_multiplier_min == spec.sla_multiplier_max ? spec.sla_multiplier_min
                                                                         : multiplier(rng);
      w.sla_s = u * p->prior_layer_time_s();
      batch.push_back(std::move(w));
    }
    std::stable_sort(batch.begin(), batch.end(),
                     [](const Workload& a, const Workload& b) { return a.arrival_s < b.arrival_s; });
    for (auto& w : batch) {
      w.id = out.size();
      out.push_back(std::move(w));
    }
  }
  return out;
}

std::vector<Workload> generate_trace(const TraceSpec& spec,
                                     const std::vector<ApplicationProfile>& profiles,
                                     double interval_s) {
  return generate_trace(spec, profiles, interval_s, spec.seed);
}

std::string format_trace(const std::vector<Workload>& trace) {
  std::string out;
  for (const auto& w : trace) {
    nlohmann::ordered_json j;
    j["id"] = w.id;
    j["arrival_s"] = w.arrival_s;
    j["app"] = w.app;
    j["sla_s"] = w.sla_s;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Workload> parse_trace(std::string_view text, std::string_view source) {
  std::vector<Workload> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!j.is_object() || j.size() != 4 || !j.contains("id") || !j.contains("arrival_s") ||
        !j.contains("app") || !j.contains("sla_s")) {
      throw ParseError(where + ": expected keys exactly id, arrival_s, app, sla_s");
    }
    if (!j["id"].is_number_unsigned() || !j["arrival_s"].is_number() || !j["app"].is_string() ||
        !j["sla_s"].is_number()) {
      throw ParseError(where + ": field has the wrong type");
    }
    Workload w{j["id"].get<WorkloadId>(), j["arrival_s"].get<double>(),
               j["app"].get<std::string>(), j["sla_s"].get<double>()};
    const auto violations = validate_workload(w);
    if (!violations.empty()) throw ParseError(where + ": " + violations.front());
    out.push_back(std::move(w));
  }
  return out;
}

void save_trace(const std::filesystem::path& path, const std::vector<Workload>& trace) {
  write_text_file(path, format_trace(trace));
}

std::vector<Workload> load_trace(const std::filesystem::path& path) {
  return parse_trace(read_text_file(path), path.string());
}

std::string serialize_trace_spec(const TraceSpec& spec) {
  nlohmann::ordered_json mix = nlohmann::ordered_json::object();
  for (const auto& [name, prob] : spec.app_mix) mix[name] = prob;
  nlohmann::ordered_json j;
  j["horizon_s"] = spec.horizon_s;
  j["lambda_per_interval"] = spec.lambda_per_interval;
  j["app_mix"] = mix;
  j["sla_multiplier_range"] = {spec.sla_multiplier_min, spec.sla_multiplier_max};
  j["seed"] = spec.seed;
  return j.dump(2);
}

TraceSpec parse_trace_spec(std::string_view json_text, std::string_view source) {
  const std::string src(source);
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(src + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(src + ": trace spec must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "horizon_s" && key != "lambda_per_interval" && key != "app_mix" &&
        key != "sla_multiplier_range" && key != "seed") {
      throw ParseError(src + ": unknown trace spec key '" + key + "'");
    }
  }
  TraceSpec spec;
  try {
    spec.horizon_s = j.at("horizon_s").get<double>();
    spec.lambda_per_interval = j.at("lambda_per_interval").get<double>();
    for (const auto& [name, prob] : j.at("app_mix").items()) {
      spec.app_mix.emplace_back(name, prob.get<double>());
    }
    const auto& range = j.at("sla_multiplier_range");
    if (!range.is_array() || range.size() != 2) {
      throw ParseError(src + ".sla_multiplier_range: expected [min, max]");
    }
    spec.sla_multiplier_min = range[0].get<double>();
    spec.sla_multiplier_max = range[1].get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(src + ": " + e.what());
  }
  std::sort(spec.app_mix.begin(), spec.app_mix.end());
  require_valid(validate_trace_spec(spec));
  return spec;
}

}  // namespace splitplace
