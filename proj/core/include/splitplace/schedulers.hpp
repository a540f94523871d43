#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "splitplace/engine.hpp"
#include "splitplace/rng.hpp"

namespace splitplace {

/// Host per graph node, or nothing when the workload has to wait (queued).
/// Assignments are all-or-nothing.
struct Placement {
  std::optional<std::vector<HostId>> hosts;

  bool queued() const noexcept { return !hosts.has_value(); }
  static Placement queue() { return Placement{}; }
};

/// Placement policy over an immutable cluster snapshot.
///
/// Implementations assign graph nodes in FragmentGraph::placement_order and
/// must only choose hosts whose free RAM covers everything already assigned to
/// them from the same graph. This is the extension point for learned
/// schedulers.
class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual std::string_view name() const noexcept = 0;
  virtual Placement place(const FragmentGraph& graph, std::span<const HostView> hosts) = 0;

  /// Host evaluations performed so far; drives the virtual scheduling clock.
  std::uint64_t evaluations() const noexcept { return evaluations_; }

 protected:
  std::uint64_t evaluations_ = 0;
};

class FirstFitScheduler final : public Scheduler {
 public:
  std::string_view name() const noexcept override { return "first_fit"; }
  Placement place(const FragmentGraph& graph, std::span<const HostView> hosts) override;
};

class LeastLoadedScheduler final : public Scheduler {
 public:
  std::string_view name() const noexcept override { return "least_loaded"; }
  Placement place(const FragmentGraph& graph, std::span<const HostView> hosts) override;
};

class RandomScheduler final : public Scheduler {
 public:
  explicit RandomScheduler(Rng rng) : rng_(std::move(rng)) {}
  std::string_view name() const noexcept override { return "random"; }
  Placement place(const FragmentGraph& graph, std::span<const HostView> hosts) override;

 private:
  Rng rng_;
};

Placement place_first_fit(const FragmentGraph& graph, std::span<const HostView> hosts);
Placement place_least_loaded(const FragmentGraph& graph, std::span<const HostView> hosts);
Placement place_random(const FragmentGraph& graph, std::span<const HostView> hosts, Rng& rng);

inline constexpr std::string_view kSchedulerNames[] = {"first_fit", "least_loaded", "random"};

bool is_scheduler_name(std::string_view name) noexcept;

/// Throws std::invalid_argument for an unknown name. `seed` feeds the
/// scheduler random stream.
std::unique_ptr<Scheduler> make_scheduler(std::string_view name, std::uint64_t seed);

}  // namespace splitplace
