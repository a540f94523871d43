#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "splitplace/model.hpp"

namespace splitplace {

/// Deadline context of a workload relative to the layer-split time estimate.
enum class Context : std::uint8_t { Tight = 0, Loose = 1 };

std::string_view to_string(Context c) noexcept;

inline constexpr std::size_t kContextCount = 2;
inline constexpr std::size_t kArmCount = 2;

inline constexpr std::size_t index_of(Context c) noexcept { return static_cast<std::size_t>(c); }
inline constexpr std::size_t index_of(SplitDecision d) noexcept {
  return static_cast<std::size_t>(d);
}

struct WorkloadOutcome {
  double response_time_s = 0.0;
  double sla_s = 0.0;
  double accuracy = 0.0;
  SplitDecision decision = SplitDecision::Layer;
  std::string app;
};

/// Per-workload reward: (1[RT <= SLA] + accuracy) / 2.
double reward_of(const WorkloadOutcome& o);

/// Mean per-workload reward over a non-empty set. Throws std::invalid_argument
/// on an empty set.
double aggregate_reward(std::span<const WorkloadOutcome> outcomes);

/// Exponential moving average of layer-split response time per application.
///
/// A prior may be seeded per application so estimates exist before the first
/// observation. The first real observation replaces the prior; later ones are
/// blended with weight alpha.
class EmaEstimator {
 public:
  explicit EmaEstimator(double alpha = 0.1);

  double alpha() const noexcept { return alpha_; }

  void seed_prior(const std::string& app, double prior_s);
  void update(const std::string& app, double observed_s);

  bool known(std::string_view app) const;
  bool initialized(std::string_view app) const;
  /// Throws std::out_of_range for an unknown application.
  double value(std::string_view app) const;

 private:
  struct Entry {
    double value = 0.0;
    bool initialized = false;
  };
  const Entry* find(std::string_view app) const;

  double alpha_;
  std::map<std::string, Entry, std::less<>> entries_;
};

/// Functional form of EmaEstimator::update.
EmaEstimator ema_update(EmaEstimator e, const std::string& app, double observed_s);

/// Tight iff the workload's SLA is strictly below E_a for its application.
Context context_of(const EmaEstimator& e, const Workload& w);

struct ArmStats {
  std::uint64_t pulls = 0;
  double mean_reward = 0.0;

  bool operator==(const ArmStats&) const = default;
};

/// Two UCB1 bandits, one per Context, each over arms {Layer, Semantic}.
struct BanditState {
  std::array<std::array<ArmStats, kArmCount>, kContextCount> arms{};
  std::array<std::uint64_t, kContextCount> total_pulls{};
  double exploration = 1.4142135623730951;

  const ArmStats& at(Context c, SplitDecision d) const { return arms[index_of(c)][index_of(d)]; }
  ArmStats& at(Context c, SplitDecision d) { return arms[index_of(c)][index_of(d)]; }

  bool operator==(const BanditState&) const = default;
};

/// UCB1 arm choice for ctx. Untried arms go first (Layer before Semantic);
/// otherwise argmax of Q + c * sqrt(ln N / n), ties toward Layer.
SplitDecision select_arm(const BanditState& b, Context ctx);

/// Greedy choice by mean reward only, ties toward Layer.
SplitDecision greedy_arm(const BanditState& b, Context ctx);

/// Incremental-mean update of one arm. Throws std::invalid_argument when the
/// reward lies outside [0,1].
BanditState update_arm(BanditState b, Context ctx, SplitDecision arm, double reward);
void update_arm_in_place(BanditState& b, Context ctx, SplitDecision arm, double reward);

struct DeciderOptions {
  double alpha = 0.1;
  double ucb_c = 1.4142135623730951;
};

/// The split decision core: EMA context, per-context bandits, and a pending
/// table routing completion feedback back to the (context, arm) that chose it.
class Decider {
 public:
  Decider(const std::vector<ApplicationProfile>& profiles, DeciderOptions options = {});

  /// Throws std::invalid_argument for an unknown app or an id already pending.
  SplitDecision decide(const Workload& w);

  /// Routes the reward of a completed workload; when the workload ran as a
  /// layer split the EMA of its application is updated with the response
  /// time. Returns the reward applied. Throws std::out_of_range when the id is
  /// not pending.
  double feedback(WorkloadId id, const WorkloadOutcome& outcome);

  /// Drops a pending entry without learning from it.
  void forget(WorkloadId id);

  /// With frozen bandits decisions are greedy on Q and feedback leaves the
  /// bandit statistics untouched.
  void set_frozen(bool frozen) noexcept { frozen_ = frozen; }
  bool frozen() const noexcept { return frozen_; }

  const BanditState& bandits() const noexcept { return bandits_; }
  BanditState& mutable_bandits() noexcept { return bandits_; }
  const EmaEstimator& estimates() const noexcept { return ema_; }
  std::size_t pending() const noexcept { return pending_.size(); }

  /// Count of decide() calls; one unit of the virtual scheduling clock each.
  std::uint64_t operations() const noexcept { return operations_; }

 private:
  struct Pending {
    Context context;
    SplitDecision arm;
  };

  EmaEstimator ema_;
  BanditState bandits_;
  std::unordered_map<WorkloadId, Pending> pending_;
  bool frozen_ = false;
  std::uint64_t operations_ = 0;
};

}  // namespace splitplace
