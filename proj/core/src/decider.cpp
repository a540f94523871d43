#include "splitplace/decider.hpp"

#include <cmath>
#include <stdexcept>

namespace splitplace {

std::string_view to_string(Context c) noexcept {
  return c == Context::Tight ? "tight" : "loose";
}

double reward_of(const WorkloadOutcome& o) {
  const double met = o.response_time_s <= o.sla_s ? 1.0 : 0.0;
  return (met + o.accuracy) / 2.0;
}

double aggregate_reward(std::span<const WorkloadOutcome> outcomes) {
  if (outcomes.empty()) {
    throw std::invalid_argument("aggregate reward undefined for empty workload set");
  }
  double sum = 0.0;
  for (const auto& o : outcomes) sum += reward_of(o);
  return sum / static_cast<double>(outcomes.size());
}

EmaEstimator::EmaEstimator(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("EMA alpha must lie in (0, 1]");
  }
}

const EmaEstimator::Entry* EmaEstimator::find(std::string_view app) const {
  auto it = entries_.find(app);
  return it == entries_.end() ? nullptr : &it->second;
}

void EmaEstimator::seed_prior(const std::string& app, double prior_s) {
  if (!(std::isfinite(prior_s) && prior_s > 0.0)) {
    throw std::invalid_argument("EMA prior must be positive");
  }
  entries_[app] = Entry{prior_s, false};
}

void EmaEstimator::update(const std::string& app, double observed_s) {
  if (!(std::isfinite(observed_s) && observed_s > 0.0)) {
    throw std::invalid_argument("EMA observation must be positive");
  }
  auto& e = entries_[app];
  if (!e.initialized) {
    e.value = observed_s;
    e.initialized = true;
  } else {
    e.value = alpha_ * observed_s + (1.0 - alpha_) * e.value;
  }
}

bool EmaEstimator::known(std::string_view app) const { return find(app) != nullptr; }

bool EmaEstimator::initialized(std::string_view app) const {
  const auto* e = find(app);
  return e != nullptr && e->initialized;
}

double EmaEstimator::value(std::string_view app) const {
  const auto* e = find(app);
  if (e == nullptr) throw std::out_of_range("no estimate for application '" + std::string(app) + "'");
  return e->value;
}

EmaEstimator ema_update(EmaEstimator e, const std::string& app, double observed_s) {
  e.update(app, observed_s);
  return e;
}

Context context_of(const EmaEstimator& e, const Workload& w) {
  return w.sla_s < e.value(w.app) ? Context::Tight : Context::Loose;
}

SplitDecision select_arm(const BanditState& b, Context ctx) {
  const auto& layer = b.at(ctx, SplitDecision::Layer);
  const auto& semantic = b.at(ctx, SplitDecision::Semantic);
  if (layer.pulls == 0) return SplitDecision::Layer;
  if (semantic.pulls == 0) return SplitDecision::Semantic;
  const double log_total = std::log(static_cast<double>(b.total_pulls[index_of(ctx)]));
  const auto score = [&](const ArmStats& a) {
    return a.mean_reward + b.exploration * std::sqrt(log_total / static_cast<double>(a.pulls));
  };
  return score(semantic) > score(layer) ? SplitDecision::Semantic : SplitDecision::Layer;
}

SplitDecision greedy_arm(const BanditState& b, Context ctx) {
  return b.at(ctx, SplitDecision::Semantic).mean_reward > b.at(ctx, SplitDecision::Layer).mean_reward
             ? SplitDecision::Semantic
             : SplitDecision::Layer;
}

void update_arm_in_place(BanditState& b, Context ctx, SplitDecision arm, double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw std::invalid_argument("reward must lie in [0, 1]");
  }
  auto& a = b.at(ctx, arm);
  a.pulls += 1;
  a.mean_reward += (reward - a.mean_reward) / static_cast<double>(a.pulls);
  b.total_pulls[index_of(ctx)] += 1;
}

BanditState update_arm(BanditState b, Context ctx, SplitDecision arm, double reward) {
  update_arm_in_place(b, ctx, arm, reward);
  return b;
}

Decider::Decider(const std::vector<ApplicationProfile>& profiles, DeciderOptions options)
    : ema_(options.alpha) {
  if (!(options.ucb_c >= 0.0)) throw std::invalid_argument("ucb_c must be >= 0");
  bandits_.exploration = options.ucb_c;
  for (const auto& p : profiles) ema_.seed_prior(p.name, p.prior_layer_time_s());
}

SplitDecision Decider::decide(const Workload& w) {
  if (!ema_.known(w.app)) {
    throw std::invalid_argument("unknown application '" + w.app + "'");
  }
  if (pending_.contains(w.id)) {
    throw std::invalid_argument("workload " + std::to_string(w.id) + " already pending");
  }
  ++operations_;
  const Context ctx = context_of(ema_, w);
  const SplitDecision arm = frozen_ ? greedy_arm(bandits_, ctx) : select_arm(bandits_, ctx);
  pending_.emplace(w.id, Pending{ctx, arm});
  return arm;
}

double Decider::feedback(WorkloadId id, const WorkloadOutcome& outcome) {
  auto it = pending_.find(id);
  if (it == pending_.end()) {
    throw std::out_of_range("workload " + std::to_string(id) + " has no pending decision");
  }
  const Pending p = it->second;
  pending_.erase(it);
  const double reward = reward_of(outcome);
  if (!frozen_) update_arm_in_place(bandits_, p.context, p.arm, reward);
  if (p.arm == SplitDecision::Layer) ema_.update(outcome.app, outcome.response_time_s);
  return reward;
}

void Decider::forget(WorkloadId id) { pending_.erase(id); }

}  // namespace splitplace
