#include "splitplace/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace splitplace {

namespace {

void link(FragmentGraph& g, std::size_t from, std::size_t to) {
  g.nodes[from].successors.push_back(to);
  g.nodes[to].predecessors.push_back(from);
}

}  // namespace

std::size_t FragmentGraph::edge_count() const {
  std::size_t edges = 0;
  for (const auto& n : nodes) edges += n.successors.size();
  return edges;
}

FragmentGraph instantiate(SplitDecision d, const ApplicationProfile& p) {
  FragmentGraph g;
  if (d == SplitDecision::Layer) {
    for (std::size_t i = 0; i < p.layer_chain.size(); ++i) {
      g.nodes.push_back(GraphNode{p.layer_chain[i], {}, {}, -1, i});
      if (i > 0) link(g, i - 1, i);
      g.placement_order.push_back(i);
    }
    g.terminal = g.nodes.size() - 1;
    return g;
  }

  std::vector<std::vector<std::size_t>> branch_nodes;
  std::size_t deepest = 0;
  for (std::size_t b = 0; b < p.semantic_branches.size(); ++b) {
    const auto& branch = p.semantic_branches[b];
    branch_nodes.emplace_back();
    for (std::size_t i = 0; i < branch.size(); ++i) {
      const std::size_t id = g.nodes.size();
      g.nodes.push_back(GraphNode{branch[i], {}, {}, static_cast<int>(b), i});
      if (i > 0) link(g, id - 1, id);
      branch_nodes.back().push_back(id);
    }
    deepest = std::max(deepest, branch.size());
  }
  const std::size_t agg = g.nodes.size();
  g.nodes.push_back(GraphNode{p.aggregation, {}, {}, -1, deepest});
  for (const auto& nodes : branch_nodes) {
    if (!nodes.empty()) link(g, nodes.back(), agg);
  }
  g.terminal = agg;
  for (std::size_t depth = 0; depth < deepest; ++depth) {
    for (const auto& nodes : branch_nodes) {
      if (depth < nodes.size()) g.placement_order.push_back(nodes[depth]);
    }
  }
  g.placement_order.push_back(agg);
  return g;
}

FragmentGraph instantiate_compressed(const ApplicationProfile& p) {
  double ram = 0.0;
  for (const auto& f : p.layer_chain) ram = std::max(ram, f.ram_mb);
  FragmentGraph g;
  g.nodes.push_back(GraphNode{Fragment{0.5 * p.layer_compute_mi(), ram, 0.0}, {}, {}, -1, 0});
  g.terminal = 0;
  g.placement_order = {0};
  return g;
}

double compressed_accuracy(const ApplicationProfile& p) {
  return std::clamp(p.accuracy_layer - p.compressed_accuracy_penalty, 0.0, 1.0);
}

double transfer_duration(const Host& src, const Host& dst, double size_mb, Rng& jitter) {
  if (src.id == dst.id) return 0.0;
  const double bandwidth = std::min(src.bandwidth_mbps, dst.bandwidth_mbps);
  const double base = std::max(src.latency_base_s, dst.latency_base_s);
  const double sigma = std::max(src.latency_jitter_std_s, dst.latency_jitter_std_s);
  double latency = base;
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    latency += noise(jitter);
  }
  return size_mb / bandwidth + std::max(0.0, latency);
}

double EnergyAccount::total_joules() const {
  double total = 0.0;
  for (double j : joules) total += j;
  return total;
}

double interval_energy(const Host& h, double utilization, double duration_s) {
  return (h.power_idle_w + (h.power_max_w - h.power_idle_w) * utilization) * duration_s;
}

double response_time(const WorkloadRecord& r) {
  if (!r.completion_s) {
    throw std::logic_error("workload " + std::to_string(r.workload.id) + " has not completed");
  }
  return *r.completion_s - r.workload.arrival_s;
}

std::string to_json_line(const EngineEvent& e) {
  nlohmann::ordered_json j;
  j["t"] = e.t;
  j["kind"] = e.kind;
  j["workload"] = e.workload ? nlohmann::ordered_json(*e.workload) : nlohmann::ordered_json();
  j["fragment"] = e.fragment ? nlohmann::ordered_json(*e.fragment) : nlohmann::ordered_json();
  j["host"] = e.host ? nlohmann::ordered_json(*e.host) : nlohmann::ordered_json();
  return j.dump();
}

Simulator::Simulator(ClusterConfig cluster, std::uint64_t seed)
    : cluster_(std::move(cluster)), jitter_(make_stream(seed, Stream::Jitter)) {
  require_valid(validate_cluster(cluster_));
  const std::size_t n = cluster_.hosts.size();
  running_.resize(n);
  ram_used_.assign(n, 0.0);
  load_.assign(n, 0);
  busy_s_.assign(n, 0.0);
  energy_.joules.assign(n, 0.0);
  energy_.last_utilization.assign(n, 0.0);
}

void Simulator::emit(std::string_view kind, std::optional<WorkloadId> w,
                     std::optional<std::size_t> f, std::optional<HostId> h) {
  if (sink_) sink_(EngineEvent{now_, std::string(kind), w, f, h});
}

std::vector<HostView> Simulator::view() const {
  std::vector<HostView> out;
  out.reserve(cluster_.hosts.size());
  for (const auto& h : cluster_.hosts) {
    out.push_back(HostView{h.id, h.capacity_mips, h.ram_mb, h.ram_mb - ram_used_[h.id],
                           load_[h.id]});
  }
  return out;
}

void Simulator::admit(const Workload& w, SplitDecision d, double accuracy, const FragmentGraph& g,
                      const std::vector<HostId>& hosts) {
  if (hosts.size() != g.nodes.size()) {
    throw std::invalid_argument("placement size does not match fragment graph");
  }
  if (active_.contains(w.id)) {
    throw std::invalid_argument("workload " + std::to_string(w.id) + " already admitted");
  }
  std::vector<double> demand(cluster_.hosts.size(), 0.0);
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    if (hosts[i] >= cluster_.hosts.size()) throw std::invalid_argument("unknown host id");
    demand[hosts[i]] += g.nodes[i].spec.ram_mb;
  }
  for (std::size_t h = 0; h < demand.size(); ++h) {
    if (demand[h] > 0.0 && ram_used_[h] + demand[h] > cluster_.hosts[h].ram_mb) {
      throw std::invalid_argument("placement exceeds RAM of host " + std::to_string(h));
    }
  }

  const std::size_t base = fragments_.size();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& node = g.nodes[i];
    FragmentInstance f;
    f.id = base + i;
    f.workload = w.id;
    f.node = i;
    f.spec = node.spec;
    f.host = hosts[i];
    f.remaining_mi = node.spec.compute_mi;
    f.state = FragmentState::Blocked;
    for (auto p : node.predecessors) f.predecessors.push_back(base + p);
    for (auto s : node.successors) f.successors.push_back(base + s);
    f.predecessors_pending = node.predecessors.size();
    f.inputs_ready_s = now_;
    ram_used_[f.host] += f.spec.ram_mb;
    load_[f.host] += 1;
    blocked_.push_back(f.id);
    fragments_.push_back(std::move(f));
  }

  ActiveWorkload a;
  a.record.workload = w;
  a.record.decision = d;
  a.record.accuracy = accuracy;
  a.record.dispatch_s = now_;
  a.terminal_fragment = base + g.terminal;
  active_.emplace(w.id, std::move(a));
  for (std::size_t i = 0; i < g.nodes.size(); ++i) emit("admit", w.id, base + i, hosts[i]);
}

void Simulator::activate_ready() {
  auto ready = [this](std::size_t id) {
    const auto& f = fragments_[id];
    return f.predecessors_pending == 0 && f.transfers_pending == 0;
  };
  std::vector<std::size_t> still_blocked;
  still_blocked.reserve(blocked_.size());
  for (std::size_t id : blocked_) {
    if (!ready(id)) {
      still_blocked.push_back(id);
      continue;
    }
    auto& f = fragments_[id];
    f.state = FragmentState::Running;
    f.start_s = now_;
    running_[f.host].push_back(id);
    emit("start", f.workload, id, f.host);
  }
  blocked_ = std::move(still_blocked);
}

void Simulator::finish_fragment(std::size_t id) {
  auto& f = fragments_[id];
  f.state = FragmentState::Done;
  f.remaining_mi = 0.0;
  f.finish_s = now_;
  auto& run = running_[f.host];
  run.erase(std::find(run.begin(), run.end(), id));
  ram_used_[f.host] -= f.spec.ram_mb;
  if (load_[f.host] == 1) ram_used_[f.host] = 0.0;  // clear accumulated rounding
  load_[f.host] -= 1;
  emit("finish", f.workload, id, f.host);

  for (std::size_t s : f.successors) {
    auto& succ = fragments_[s];
    succ.predecessors_pending -= 1;
    succ.inputs_ready_s = std::max(succ.inputs_ready_s, now_);
    if (succ.host == f.host) continue;
    const double duration = transfer_duration(cluster_.hosts[f.host], cluster_.hosts[succ.host],
                                              f.spec.output_mb, jitter_);
    transfers_.push_back(TransferEvent{f.host, succ.host, f.spec.output_mb, now_, duration, s});
    emit("transfer_start", f.workload, s, succ.host);
    if (duration <= 0.0) {
      emit("transfer_end", f.workload, s, succ.host);
      continue;
    }
    succ.transfers_pending += 1;
    in_flight_transfers_.push_back(InFlight{now_ + duration, transfers_.size() - 1});
  }

  auto it = active_.find(f.workload);
  if (it != active_.end() && it->second.terminal_fragment == id) {
    WorkloadRecord rec = std::move(it->second.record);
    active_.erase(it);
    rec.completion_s = now_;
    rec.response_time_s = now_ - rec.workload.arrival_s;
    rec.sla_met = rec.response_time_s <= rec.workload.sla_s;
    emit("complete", rec.workload.id, id, f.host);
    completed_.push_back(std::move(rec));
  }
}

void Simulator::arrive_transfer(std::size_t transfer) {
  const auto& t = transfers_[transfer];
  auto& dst = fragments_[t.to_fragment];
  dst.transfers_pending -= 1;
  dst.inputs_ready_s = std::max(dst.inputs_ready_s, now_);
  emit("transfer_end", dst.workload, dst.id, dst.host);
}

void Simulator::step(double dt) { advance_to(now_ + dt); }

void Simulator::advance_to(double t_end) {
  if (!(t_end >= now_)) throw std::invalid_argument("cannot advance simulation backwards");
  const double t_begin = now_;
  const std::vector<double> busy_before = busy_s_;

  struct Candidate {
    std::size_t id;
    double finish;
  };
  std::vector<Candidate> candidates;

  for (;;) {
    activate_ready();

    double next = t_end;
    candidates.clear();
    for (std::size_t h = 0; h < running_.size(); ++h) {
      if (running_[h].empty()) continue;
      const double rate = cluster_.hosts[h].capacity_mips / static_cast<double>(running_[h].size());
      for (std::size_t id : running_[h]) {
        const double finish = now_ + fragments_[id].remaining_mi / rate;
        candidates.push_back(Candidate{id, finish});
        next = std::min(next, finish);
      }
    }
    for (const auto& t : in_flight_transfers_) next = std::min(next, t.end_s);
    next = std::max(next, now_);

    const double span = next - now_;
    if (span > 0.0) {
      for (std::size_t h = 0; h < running_.size(); ++h) {
        if (running_[h].empty()) continue;
        const double rate =
            cluster_.hosts[h].capacity_mips / static_cast<double>(running_[h].size());
        for (std::size_t id : running_[h]) {
          auto& f = fragments_[id];
          f.remaining_mi = std::max(0.0, f.remaining_mi - rate * span);
        }
        busy_s_[h] += span;
      }
    }
    now_ = next;

    bool progressed = false;
    std::vector<std::size_t> done;
    for (const auto& c : candidates) {
      if (c.finish <= now_) done.push_back(c.id);
    }
    std::sort(done.begin(), done.end());
    for (std::size_t id : done) {
      finish_fragment(id);
      progressed = true;
    }

    std::vector<InFlight> arrived;
    std::erase_if(in_flight_transfers_, [&](const InFlight& t) {
      if (t.end_s <= now_) {
        arrived.push_back(t);
        return true;
      }
      return false;
    });
    std::sort(arrived.begin(), arrived.end(), [](const InFlight& a, const InFlight& b) {
      return a.end_s != b.end_s ? a.end_s < b.end_s : a.transfer < b.transfer;
    });
    for (const auto& t : arrived) {
      arrive_transfer(t.transfer);
      progressed = true;
    }

    if (!progressed && now_ >= t_end) break;
  }
  activate_ready();

  const double duration = t_end - t_begin;
  if (duration > 0.0) {
    for (std::size_t h = 0; h < cluster_.hosts.size(); ++h) {
      const double u = std::clamp((busy_s_[h] - busy_before[h]) / duration, 0.0, 1.0);
      energy_.last_utilization[h] = u;
      energy_.joules[h] += interval_energy(cluster_.hosts[h], u, duration);
    }
  }
}

std::vector<WorkloadRecord> Simulator::take_completed() {
  std::vector<WorkloadRecord> out;
  out.swap(completed_);
  return out;
}

std::vector<WorkloadRecord> Simulator::in_flight() const {
  std::vector<WorkloadRecord> out;
  out.reserve(active_.size());
  for (const auto& [_, a] : active_) out.push_back(a.record);
  return out;
}

double Simulator::work_processed_mi() const {
  double total = 0.0;
  for (const auto& f : fragments_) total += f.spec.compute_mi - f.remaining_mi;
  return total;
}

double Simulator::capacity_busy_mi() const {
  double total = 0.0;
  for (std::size_t h = 0; h < cluster_.hosts.size(); ++h) {
    total += cluster_.hosts[h].capacity_mips * busy_s_[h];
  }
  return total;
}

double Simulator::resident_ram_mb(HostId h) const {
  double total = 0.0;
  for (const auto& f : fragments_) {
    if (f.host == h && f.state != FragmentState::Done) total += f.spec.ram_mb;
  }
  return total;
}

}  // namespace splitplace
