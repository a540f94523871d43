#pragma once

// Builders shared by the unit and acceptance suites.

#include <cstddef>
#include <utility>
#include <vector>

#include "splitplace/engine.hpp"
#include "splitplace/model.hpp"

namespace splitplace::testing {

inline Host make_host(HostId id, double mips = 1000.0, double ram = 8192.0, double bw = 10.0,
                      double latency = 0.0, double jitter = 0.0) {
  Host h;
  h.id = id;
  h.capacity_mips = mips;
  h.ram_mb = ram;
  h.power_idle_w = 3.0;
  h.power_max_w = 7.0;
  h.bandwidth_mbps = bw;
  h.latency_base_s = latency;
  h.latency_jitter_std_s = jitter;
  return h;
}

inline ClusterConfig make_cluster(std::vector<Host> hosts, double interval = 1.0) {
  ClusterConfig c;
  for (std::size_t i = 0; i < hosts.size(); ++i) hosts[i].id = i;
  c.hosts = std::move(hosts);
  c.interval_s = interval;
  return c;
}

/// Single-node graph.
inline FragmentGraph single(double mi, double ram = 100.0, double out = 0.0) {
  FragmentGraph g;
  g.nodes.push_back(GraphNode{Fragment{mi, ram, out}, {}, {}, -1, 0});
  g.placement_order = {0};
  g.terminal = 0;
  return g;
}

/// Linear chain; outputs[i] is forwarded from node i to node i+1.
inline FragmentGraph chain(const std::vector<double>& mi, const std::vector<double>& outputs = {}) {
  FragmentGraph g;
  for (std::size_t i = 0; i < mi.size(); ++i) {
    const double out = i < outputs.size() ? outputs[i] : 0.0;
    g.nodes.push_back(GraphNode{Fragment{mi[i], 100.0, out}, {}, {}, -1, i});
    if (i > 0) {
      g.nodes[i - 1].successors.push_back(i);
      g.nodes[i].predecessors.push_back(i - 1);
    }
    g.placement_order.push_back(i);
  }
  g.terminal = mi.size() - 1;
  return g;
}

/// Branch chains (each a list of MI) feeding one aggregation node; every
/// branch-final fragment forwards `out` MB.
inline FragmentGraph star(const std::vector<std::vector<double>>& branches, double agg_mi,
                          double out = 0.0) {
  FragmentGraph g;
  std::vector<std::size_t> tails;
  for (std::size_t b = 0; b < branches.size(); ++b) {
    for (std::size_t i = 0; i < branches[b].size(); ++i) {
      const std::size_t id = g.nodes.size();
      const bool tail = i + 1 == branches[b].size();
      g.nodes.push_back(GraphNode{Fragment{branches[b][i], 100.0, tail ? out : 0.0}, {}, {},
                                  static_cast<int>(b), i});
      if (i > 0) {
        g.nodes[id - 1].successors.push_back(id);
        g.nodes[id].predecessors.push_back(id - 1);
      }
      g.placement_order.push_back(id);
      if (tail) tails.push_back(id);
    }
  }
  const std::size_t agg = g.nodes.size();
  g.nodes.push_back(GraphNode{Fragment{agg_mi, 50.0, 0.0}, {}, {}, -1, 0});
  for (std::size_t t : tails) {
    g.nodes[t].successors.push_back(agg);
    g.nodes[agg].predecessors.push_back(t);
  }
  g.placement_order.push_back(agg);
  g.terminal = agg;
  return g;
}

inline Workload workload(WorkloadId id, double arrival = 0.0, double sla = 100.0) {
  return Workload{id, arrival, "app", sla};
}

}  // namespace splitplace::testing
