#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "splitplace/model.hpp"
#include "splitplace/rng.hpp"

namespace splitplace {

/// One node of a workload's fragment graph.
struct GraphNode {
  Fragment spec;
  std::vector<std::size_t> predecessors;
  std::vector<std::size_t> successors;
  // Semantic branch index, or -1 for layer fragments and the aggregation.
  int branch = -1;
  // Position within the branch (or chain).
  std::size_t depth = 0;
};

/// Precedence graph of one workload's fragments. Exactly one terminal node.
struct FragmentGraph {
  std::vector<GraphNode> nodes;
  std::size_t terminal = 0;
  // Order in which placement policies assign nodes: chain order for layer
  // splits, breadth-first across branches (aggregation last) for semantic.
  std::vector<std::size_t> placement_order;

  std::size_t edge_count() const;
};

/// Layer: f1 -> ... -> fk. Semantic: independent branch chains, all feeding
/// one aggregation node.
FragmentGraph instantiate(SplitDecision d, const ApplicationProfile& p);

/// A single fragment carrying half the layer-chain compute with a reduced
/// memory footprint; stands in for a model-compression baseline.
FragmentGraph instantiate_compressed(const ApplicationProfile& p);
double compressed_accuracy(const ApplicationProfile& p);

/// A read-only snapshot of one host as seen by placement policies.
struct HostView {
  HostId id = 0;
  double capacity_mips = 0.0;
  double ram_total_mb = 0.0;
  double ram_free_mb = 0.0;
  // Resident unfinished fragments (running or waiting on predecessors).
  std::size_t load = 0;
};

enum class FragmentState : std::uint8_t { Blocked, Running, Done };

struct FragmentInstance {
  std::size_t id = 0;
  WorkloadId workload = 0;
  std::size_t node = 0;  // index into the workload's graph
  Fragment spec;
  HostId host = 0;
  double remaining_mi = 0.0;
  FragmentState state = FragmentState::Blocked;
  std::vector<std::size_t> predecessors;  // fragment-instance ids
  std::vector<std::size_t> successors;
  std::size_t predecessors_pending = 0;   // not yet Done
  std::size_t transfers_pending = 0;      // inbound transfers not yet arrived
  double start_s = -1.0;   // instant the fragment became Running
  double finish_s = -1.0;
  double inputs_ready_s = 0.0;  // latest predecessor finish or inbound arrival
};

struct TransferEvent {
  HostId src = 0;
  HostId dst = 0;
  double size_mb = 0.0;
  double start_s = 0.0;
  double duration_s = 0.0;
  std::size_t to_fragment = 0;
};

/// size / min(bandwidth) + max(0, latency + N(0, sigma)); zero when src == dst.
/// Latency base and sigma are the larger of the two endpoints' values. The
/// generator is only drawn from when sigma > 0.
double transfer_duration(const Host& src, const Host& dst, double size_mb, Rng& jitter);

struct EnergyAccount {
  std::vector<double> joules;                // cumulative per host
  std::vector<double> last_utilization;      // utilization of the last step per host
  double total_joules() const;
};

/// Energy of one host over `duration` with utilization u in [0,1].
double interval_energy(const Host& h, double utilization, double duration_s);

struct WorkloadRecord {
  Workload workload;
  SplitDecision decision = SplitDecision::Layer;
  double accuracy = 0.0;
  double dispatch_s = 0.0;
  std::optional<double> completion_s;
  double response_time_s = 0.0;
  bool sla_met = false;
};

/// completion - arrival. Throws std::logic_error for an incomplete workload.
double response_time(const WorkloadRecord& r);

struct EngineEvent {
  double t = 0.0;
  std::string kind;
  std::optional<WorkloadId> workload;
  std::optional<std::size_t> fragment;
  std::optional<HostId> host;
};

/// Formats an event as one JSON object line with keys t, kind, workload,
/// fragment and host (absent values are null).
std::string to_json_line(const EngineEvent& e);

using EventSink = std::function<void(const EngineEvent&)>;

/// Interval-stepped fluid processor-sharing simulation of fragment graphs on a
/// cluster.
///
/// Inside a step, each host splits its capacity equally among its running
/// fragments and time advances from event to event (fragment completion,
/// transfer arrival), so completion times do not depend on the step length.
/// RAM is reserved when a workload is admitted and released as each fragment
/// finishes.
class Simulator {
 public:
  Simulator(ClusterConfig cluster, std::uint64_t seed);

  const ClusterConfig& cluster() const noexcept { return cluster_; }
  double now() const noexcept { return now_; }

  std::vector<HostView> view() const;

  /// Starts a workload under an explicit host assignment (one host per graph
  /// node). Throws std::invalid_argument when the assignment does not fit.
  void admit(const Workload& w, SplitDecision d, double accuracy, const FragmentGraph& g,
             const std::vector<HostId>& hosts);

  /// Advances by dt (or to absolute time t).
  void step(double dt);
  void advance_to(double t);

  /// Records of workloads completed since the last call, in completion order.
  std::vector<WorkloadRecord> take_completed();
  /// Workloads admitted but not finished.
  std::vector<WorkloadRecord> in_flight() const;
  std::size_t active_workloads() const noexcept { return active_.size(); }

  const EnergyAccount& energy() const noexcept { return energy_; }
  const std::vector<FragmentInstance>& fragments() const noexcept { return fragments_; }
  const std::vector<TransferEvent>& transfers() const noexcept { return transfers_; }

  /// Sum over fragments of processed MI and sum over hosts of capacity x busy
  /// time. Equal in exact arithmetic.
  double work_processed_mi() const;
  double capacity_busy_mi() const;
  double resident_ram_mb(HostId h) const;

  void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

 private:
  struct ActiveWorkload {
    WorkloadRecord record;
    std::size_t terminal_fragment = 0;
  };
  struct InFlight {
    double end_s = 0.0;
    std::size_t transfer = 0;
  };

  void emit(std::string_view kind, std::optional<WorkloadId> w, std::optional<std::size_t> f,
            std::optional<HostId> h);
  void activate_ready();
  void finish_fragment(std::size_t id);
  void arrive_transfer(std::size_t transfer);

  ClusterConfig cluster_;
  Rng jitter_;
  double now_ = 0.0;
  std::vector<FragmentInstance> fragments_;
  std::vector<std::vector<std::size_t>> running_;  // per host
  std::vector<std::size_t> blocked_;
  std::vector<double> ram_used_;
  std::vector<std::size_t> load_;
  std::vector<double> busy_s_;
  std::vector<TransferEvent> transfers_;
  std::vector<InFlight> in_flight_transfers_;
  std::map<WorkloadId, ActiveWorkload> active_;
  std::vector<WorkloadRecord> completed_;
  EnergyAccount energy_;
  EventSink sink_;
};

}  // namespace splitplace
