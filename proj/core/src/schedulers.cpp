#include "splitplace/schedulers.hpp"

#include <algorithm>
#include <stdexcept>

namespace splitplace {

namespace {

// Shared driver: walks the placement order, tracking RAM and load consumed
// by nodes already assigned from this graph. `choose` returns the index of the
// chosen host among `hosts`, or nothing when no host is feasible.
template <typename Choose>
Placement place_with(const FragmentGraph& graph, std::span<const HostView> hosts,
                     std::uint64_t& evaluations, Choose choose) {
  std::vector<double> free(hosts.size());
  std::vector<std::size_t> load(hosts.size());
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    free[i] = hosts[i].ram_free_mb;
    load[i] = hosts[i].load;
  }
  std::vector<HostId> assignment(graph.nodes.size(), 0);
  for (std::size_t node : graph.placement_order) {
    const double need = graph.nodes[node].spec.ram_mb;
    std::vector<std::size_t> feasible;
    for (std::size_t i = 0; i < hosts.size(); ++i) {
      ++evaluations;
      if (free[i] >= need) feasible.push_back(i);
    }
    if (feasible.empty()) return Placement::queue();
    const std::size_t pick = choose(feasible, load);
    assignment[node] = hosts[pick].id;
    free[pick] -= need;
    load[pick] += 1;
  }
  return Placement{std::move(assignment)};
}

Placement first_fit(const FragmentGraph& g, std::span<const HostView> hosts, std::uint64_t& ev) {
  return place_with(g, hosts, ev, [](const std::vector<std::size_t>& feasible,
                                     const std::vector<std::size_t>&) { return feasible.front(); });
}

Placement least_loaded(const FragmentGraph& g, std::span<const HostView> hosts,
                       std::uint64_t& ev) {
  return place_with(g, hosts, ev,
                    [](const std::vector<std::size_t>& feasible,
                       const std::vector<std::size_t>& load) {
                      // feasible is ascending, so min_element keeps the lowest id on ties
                      return *std::min_element(
                          feasible.begin(), feasible.end(),
                          [&](std::size_t a, std::size_t b) { return load[a] < load[b]; });
                    });
}

Placement random_fit(const FragmentGraph& g, std::span<const HostView> hosts, Rng& rng,
                     std::uint64_t& ev) {
  return place_with(g, hosts, ev,
                    [&rng](const std::vector<std::size_t>& feasible,
                           const std::vector<std::size_t>&) {
                      std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
                      return feasible[pick(rng)];
                    });
}

}  // namespace

Placement place_first_fit(const FragmentGraph& graph, std::span<const HostView> hosts) {
  std::uint64_t ev = 0;
  return first_fit(graph, hosts, ev);
}

Placement place_least_loaded(const FragmentGraph& graph, std::span<const HostView> hosts) {
  std::uint64_t ev = 0;
  return least_loaded(graph, hosts, ev);
}

Placement place_random(const FragmentGraph& graph, std::span<const HostView> hosts, Rng& rng) {
  std::uint64_t ev = 0;
  return random_fit(graph, hosts, rng, ev);
}

Placement FirstFitScheduler::place(const FragmentGraph& graph, std::span<const HostView> hosts) {
  return first_fit(graph, hosts, evaluations_);
}

Placement LeastLoadedScheduler::place(const FragmentGraph& graph,
                                      std::span<const HostView> hosts) {
  return least_loaded(graph, hosts, evaluations_);
}

Placement RandomScheduler::place(const FragmentGraph& graph, std::span<const HostView> hosts) {
  return random_fit(graph, hosts, rng_, evaluations_);
}

bool is_scheduler_name(std::string_view name) noexcept {
  return std::find(std::begin(kSchedulerNames), std::end(kSchedulerNames), name) !=
         std::end(kSchedulerNames);
}

std::unique_ptr<Scheduler> make_scheduler(std::string_view name, std::uint64_t seed) {
  if (name == "first_fit") return std::make_unique<FirstFitScheduler>();
  if (name == "least_loaded") return std::make_unique<LeastLoadedScheduler>();
  if (name == "random") {
    return std::make_unique<RandomScheduler>(make_stream(seed, Stream::Scheduler));
  }
  throw std::invalid_argument("unknown scheduler '" + std::string(name) + "'");
}

}  // namespace splitplace
