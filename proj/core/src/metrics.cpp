#include "splitplace/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace splitplace {

using ojson = nlohmann::ordered_json;

namespace {

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

ArmSummary arm_from(const ArmStats& a) { return ArmSummary{a.pulls, a.mean_reward}; }

ojson arm_json(const ArmSummary& a) {
  ojson j;
  j["pulls"] = a.pulls;
  j["mean_reward"] = a.mean_reward;
  return j;
}

ArmSummary arm_parse(const nlohmann::json& j) {
  return ArmSummary{j.at("pulls").get<std::uint64_t>(), j.at("mean_reward").get<double>()};
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

std::vector<ContextSummary> summarize_bandits(const BanditState& b) {
  std::vector<ContextSummary> out;
  for (Context c : {Context::Tight, Context::Loose}) {
    out.push_back(ContextSummary{c, arm_from(b.at(c, SplitDecision::Layer)),
                                 arm_from(b.at(c, SplitDecision::Semantic))});
  }
  return out;
}

WorkloadOutcome outcome_of(const WorkloadRecord& r) {
  return WorkloadOutcome{response_time(r), r.workload.sla_s, r.accuracy, r.decision,
                         r.workload.app};
}

double percentile_nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = std::ceil(q * static_cast<double>(values.size()));
  const auto idx = static_cast<std::size_t>(std::max(1.0, rank)) - 1;
  return values[std::min(idx, values.size() - 1)];
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

MetricsReport summarize(std::string model, std::span<const WorkloadRecord> completed,
                        std::size_t unfinished, double energy_joules,
                        std::span<const double> sched_times_ms,
                        std::optional<BanditState> bandits) {
  if (completed.empty()) throw std::invalid_argument("no completed workloads to summarize");
  MetricsReport r;
  r.model = std::move(model);
  r.completed = completed.size();
  r.unfinished = unfinished;
  r.workloads = r.completed + r.unfinished;

  std::vector<WorkloadOutcome> outcomes;
  std::vector<double> rts;
  double accuracy_sum = 0.0;
  std::uint64_t missed = 0;
  outcomes.reserve(completed.size());
  for (const auto& rec : completed) {
    outcomes.push_back(outcome_of(rec));
    rts.push_back(outcomes.back().response_time_s);
    accuracy_sum += rec.accuracy;
    if (outcomes.back().response_time_s > rec.workload.sla_s) ++missed;
  }
  r.violations = missed + unfinished;
  r.sla_violation_rate = static_cast<double>(r.violations) / static_cast<double>(r.workloads);
  r.accuracy_mean = accuracy_sum / static_cast<double>(r.completed);
  // Stragglers contribute (0 + 0) / 2.
  r.reward = aggregate_reward(outcomes);
  if (unfinished > 0) {
    r.reward = r.reward * static_cast<double>(r.completed) / static_cast<double>(r.workloads);
  }
  r.energy_wh = energy_joules / 3600.0;
  r.sched_time_ms_mean = mean_of(sched_times_ms);
  r.sched_time_ms_std = sample_std(sched_times_ms);
  r.response_time.mean = mean_of(rts);
  r.response_time.max = *std::max_element(rts.begin(), rts.end());
  r.response_time.p95 = percentile_nearest_rank(std::move(rts), 0.95);
  if (bandits) r.bandits = summarize_bandits(*bandits);
  return r;
}

double windowed_reward(std::span<const WorkloadRecord> completed,
                       std::span<const WorkloadRecord> unfinished, WorkloadId first_id) {
  std::vector<WorkloadOutcome> outcomes;
  for (const auto& rec : completed) {
    if (rec.workload.id >= first_id) outcomes.push_back(outcome_of(rec));
  }
  std::size_t stragglers = 0;
  for (const auto& rec : unfinished) {
    if (rec.workload.id >= first_id) ++stragglers;
  }
  const std::size_t total = outcomes.size() + stragglers;
  if (total == 0) throw std::invalid_argument("reward window is empty");
  if (outcomes.empty()) return 0.0;
  const double reward = aggregate_reward(outcomes);
  if (stragglers == 0) return reward;
  return reward * static_cast<double>(outcomes.size()) / static_cast<double>(total);
}

MetricsReport aggregate_reports(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw std::invalid_argument("no reports to aggregate");
  MetricsReport out;
  out.model = reports.front().model;
  out.replications = reports.size();
  std::vector<double> sched, sla, energy, acc, reward, rt_mean, rt_p95;
  double rt_max = 0.0;
  for (const auto& r : reports) {
    out.workloads += r.workloads;
    out.completed += r.completed;
    out.unfinished += r.unfinished;
    out.violations += r.violations;
    sched.push_back(r.sched_time_ms_mean);
    sla.push_back(r.sla_violation_rate);
    energy.push_back(r.energy_wh);
    acc.push_back(r.accuracy_mean);
    reward.push_back(r.reward);
    rt_mean.push_back(r.response_time.mean);
    rt_p95.push_back(r.response_time.p95);
    rt_max = std::max(rt_max, r.response_time.max);
  }
  out.energy_wh = mean_of(energy);
  out.sched_time_ms_mean = mean_of(sched);
  out.sched_time_ms_std = sample_std(sched);
  out.sla_violation_rate = mean_of(sla);
  out.sla_violation_std = sample_std(sla);
  out.accuracy_mean = mean_of(acc);
  out.reward = mean_of(reward);
  out.response_time = ResponseTimeStats{mean_of(rt_mean), mean_of(rt_p95), rt_max};

  if (!reports.front().bandits.empty()) {
    out.bandits = reports.front().bandits;
    for (auto& ctx : out.bandits) {
      ctx.layer = ctx.semantic = ArmSummary{};
    }
    // Pull-weighted means of Q across replications.
    for (std::size_t c = 0; c < out.bandits.size(); ++c) {
      double layer_sum = 0.0, semantic_sum = 0.0;
      for (const auto& r : reports) {
        if (c >= r.bandits.size()) continue;
        const auto& src = r.bandits[c];
        out.bandits[c].layer.pulls += src.layer.pulls;
        out.bandits[c].semantic.pulls += src.semantic.pulls;
        layer_sum += src.layer.mean_reward * static_cast<double>(src.layer.pulls);
        semantic_sum += src.semantic.mean_reward * static_cast<double>(src.semantic.pulls);
      }
      auto& dst = out.bandits[c];
      if (dst.layer.pulls) dst.layer.mean_reward = layer_sum / static_cast<double>(dst.layer.pulls);
      if (dst.semantic.pulls) {
        dst.semantic.mean_reward = semantic_sum / static_cast<double>(dst.semantic.pulls);
      }
    }
  }
  return out;
}

std::string report_to_json(const MetricsReport& r) {
  ojson j;
  j["model"] = r.model;
  j["replications"] = r.replications;
  j["workloads"] = r.workloads;
  j["completed"] = r.completed;
  j["unfinished"] = r.unfinished;
  j["violations"] = r.violations;
  j["energy_wh"] = r.energy_wh;
  j["sched_time_ms_mean"] = r.sched_time_ms_mean;
  j["sched_time_ms_std"] = r.sched_time_ms_std;
  j["sla_violation_rate"] = r.sla_violation_rate;
  j["sla_violation_std"] = r.sla_violation_std;
  j["accuracy_mean"] = r.accuracy_mean;
  j["reward"] = r.reward;
  j["response_time_s"] = ojson{
      {"mean", r.response_time.mean}, {"p95", r.response_time.p95}, {"max", r.response_time.max}};
  ojson bandits = ojson::array();
  for (const auto& c : r.bandits) {
    ojson cj;
    cj["context"] = std::string(to_string(c.context));
    cj["layer"] = arm_json(c.layer);
    cj["semantic"] = arm_json(c.semantic);
    bandits.push_back(std::move(cj));
  }
  j["bandits"] = std::move(bandits);
  return j.dump(2) + "\n";
}

MetricsReport report_from_json(std::string_view text, std::string_view source) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.model = j.at("model").get<std::string>();
    r.replications = j.at("replications").get<std::uint64_t>();
    r.workloads = j.at("workloads").get<std::uint64_t>();
    r.completed = j.at("completed").get<std::uint64_t>();
    r.unfinished = j.at("unfinished").get<std::uint64_t>();
    r.violations = j.at("violations").get<std::uint64_t>();
    r.energy_wh = j.at("energy_wh").get<double>();
    r.sched_time_ms_mean = j.at("sched_time_ms_mean").get<double>();
    r.sched_time_ms_std = j.at("sched_time_ms_std").get<double>();
    r.sla_violation_rate = j.at("sla_violation_rate").get<double>();
    r.sla_violation_std = j.at("sla_violation_std").get<double>();
    r.accuracy_mean = j.at("accuracy_mean").get<double>();
    r.reward = j.at("reward").get<double>();
    const auto& rt = j.at("response_time_s");
    r.response_time = {rt.at("mean").get<double>(), rt.at("p95").get<double>(),
                       rt.at("max").get<double>()};
    for (const auto& cj : j.at("bandits")) {
      const auto name = cj.at("context").get<std::string>();
      if (name != "tight" && name != "loose") {
        throw ParseError(std::string(source) + ": unknown context '" + name + "'");
      }
      r.bandits.push_back(ContextSummary{name == "tight" ? Context::Tight : Context::Loose,
                                         arm_parse(cj.at("layer")), arm_parse(cj.at("semantic"))});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(source) + ": " + e.what());
  }
}

std::string reports_to_csv(std::span<const MetricsReport> reports) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : reports) {
    out += r.model;
    for (double v : {r.energy_wh, r.sched_time_ms_mean, r.sched_time_ms_std, r.sla_violation_rate,
                     r.sla_violation_std, r.accuracy_mean, r.reward}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<MetricsReport> baseline_first(std::vector<MetricsReport> reports) {
  std::stable_partition(reports.begin(), reports.end(),
                        [](const MetricsReport& r) { return r.model != "splitplace"; });
  return reports;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw std::invalid_argument("unknown report format '" + std::string(name) + "'");
}

void export_report(const MetricsReport& r, ReportFormat format, const std::filesystem::path& path) {
  export_reports(std::span<const MetricsReport>(&r, 1), format, path);
}

void export_reports(std::span<const MetricsReport> reports, ReportFormat format,
                    const std::filesystem::path& path) {
  if (format == ReportFormat::Csv) {
    write_text_file(path, reports_to_csv(reports));
    return;
  }
  if (reports.size() == 1) {
    write_text_file(path, report_to_json(reports.front()));
    return;
  }
  std::string out = "[\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out += report_to_json(reports[i]);
    if (i + 1 < reports.size()) out += ",";
  }
  out += "]\n";
  write_text_file(path, out);
}

}  // namespace splitplace
