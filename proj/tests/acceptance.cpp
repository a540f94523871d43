// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "splitplace/decider.hpp"
#include "splitplace/engine.hpp"
#include "splitplace/metrics.hpp"
#include "splitplace/runner.hpp"
#include "splitplace/schedulers.hpp"
#include "support.hpp"

using namespace splitplace;
using namespace splitplace::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, double elapsed, double limit, const std::string& detail) {
  const bool pass = ok && elapsed < limit;
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s [%.3fs, limit %.0fs]\n", pass ? "PASS" : "FAIL", id,
              detail.c_str(), elapsed, limit);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. reward formula

void reward_exactness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int set = 0; set < 1000; ++set) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<WorkloadOutcome> outcomes;
    for (std::size_t i = 0; i < n; ++i) {
      const double sla = 0.1 + 10 * u(rng);
      // a few exact boundary hits
      const double rt = rng() % 10 == 0 ? sla : 20 * u(rng);
      outcomes.push_back(WorkloadOutcome{rt, sla, u(rng), SplitDecision::Layer, "a"});
    }
    long double sum = 0.0L;
    for (const auto& o : outcomes) {
      sum += (o.response_time_s <= o.sla_s ? 1.0L : 0.0L) + static_cast<long double>(o.accuracy);
    }
    const long double oracle = sum / (2.0L * static_cast<long double>(n));
    worst = std::max(worst, static_cast<double>(std::fabs(aggregate_reward(outcomes) - oracle)));
  }
  report(1, worst < 1e-12, seconds_since(t0), 1,
         fmt("reward matches direct summation on 1000 sets, max abs error %.3g", worst));
}

// ---------------------------------------------------------------------------
// 2. fluid engine against hand-traced oracles

struct Admission {
  double at;
  FragmentGraph graph;
  std::vector<HostId> hosts;
  double expected_completion;
};

struct Scenario {
  std::string name;
  std::vector<Host> hosts;
  std::vector<Admission> admissions;
  double step = 1.0;
};

FragmentGraph with_outputs(FragmentGraph g, const std::vector<double>& out) {
  for (std::size_t i = 0; i < out.size(); ++i) g.nodes[i].spec.output_mb = out[i];
  return g;
}

std::vector<Scenario> scenarios() {
  const Host h0 = make_host(0);
  const Host h1 = make_host(1);
  const Host h2 = make_host(2);
  std::vector<Scenario> s;

  s.push_back({"single fragment", {h0}, {{0, single(2000), {0}, 2.0}}});
  s.push_back({"two shares", {h0}, {{0, single(1000), {0}, 2.0}, {0, single(3000), {0}, 4.0}}});
  s.push_back({"three equal shares",
               {h0},
               {{0, single(1000), {0}, 3.0}, {0, single(1000), {0}, 3.0}, {0, single(1000), {0}, 3.0}}});
  // 1/3 each to t=3, then halves to t=5, then alone to t=6
  s.push_back({"three unequal shares",
               {h0},
               {{0, single(1000), {0}, 3.0}, {0, single(2000), {0}, 5.0}, {0, single(3000), {0}, 6.0}}});
  s.push_back({"three unequal shares, ragged steps",
               {h0},
               {{0, single(1000), {0}, 3.0}, {0, single(2000), {0}, 5.0}, {0, single(3000), {0}, 6.0}},
               0.37});
  s.push_back({"chain on one host", {h0}, {{0, chain({1000, 1000}, {5}), {0, 0}, 2.0}}});
  s.push_back({"chain across hosts",
               {make_host(0, 1000, 8192, 10, 0.1), make_host(1, 1000, 8192, 10, 0.1)},
               {{0, chain({1000, 1000}, {5}), {0, 1}, 2.6}}});
  // 0.5 + 1/10 + 1.0 + 2/10 + 1.5
  s.push_back({"three-host chain", {h0, h1, h2}, {{0, chain({500, 1000, 1500}, {1, 2}), {0, 1, 2}, 3.3}}});
  s.push_back({"star, aggregation with slow branch", {h0, h1},
               {{0, star({{2000}, {3000}}, 100), {0, 1, 1}, 3.1}}});
  s.push_back({"star, aggregation with fast branch", {h0, h1},
               {{0, star({{2000}, {3000}}, 100), {0, 1, 0}, 3.1}}});
  // 1 MB at 10 MB/s + 0.05 s; branches land at 0.65 and 1.15
  s.push_back({"star with transfers",
               {make_host(0, 1000, 8192, 10, 0.05), make_host(1, 1000, 8192, 10, 0.05),
                make_host(2, 1000, 8192, 10, 0.05)},
               {{0, star({{500}, {1000}}, 100, 1.0), {0, 1, 2}, 1.25}}});
  s.push_back({"co-located star", {h0}, {{0, star({{1000}, {2000}}, 300), {0, 0, 0}, 3.3}}});
  s.push_back({"chain beside independent work", {h0},
               {{0, chain({1000, 1000}), {0, 0}, 3.0}, {0, single(1000), {0}, 2.0}}});
  s.push_back({"bandwidth is the slower endpoint",
               {make_host(0, 1000, 8192, 10, 0.1), make_host(1, 1000, 8192, 20, 0.0)},
               {{0, chain({1000, 1000}, {5}), {0, 1}, 2.6}}});
  s.push_back({"heterogeneous capacity", {make_host(0, 2000), make_host(1, 500)},
               {{0, single(4000), {0}, 2.0}, {0, single(1000), {1}, 2.0}}});
  // A alone to t=1 (2000 left), halves until B ends at 3, A alone to 4
  s.push_back({"staggered admission", {h0},
               {{0, single(3000), {0}, 4.0}, {1, single(1000), {0}, 3.0}}});
  s.push_back({"independent hosts", {h0, h1},
               {{0, single(1500), {0}, 1.5}, {0, single(2500), {1}, 2.5}}});
  s.push_back({"two-fragment branches", {h0, h1},
               {{0, star({{500, 500}, {1000, 1000}}, 200), {0, 0, 1, 1, 0}, 2.2}}});
  s.push_back({"branches sharing a host", {h0, h1},
               {{0, star({{1000}, {1000}, {1000}}, 100), {0, 0, 1, 1}, 2.1}}});
  s.push_back({"latency-only transfer",
               {make_host(0, 1000, 8192, 10, 0.25), make_host(1, 1000, 8192, 10, 0.25)},
               {{0, chain({1000, 1000}), {0, 1}, 2.25}}});
  // B joins h1 at t=1 with 1000 MI left on the resident job; both end at 3
  s.push_back({"successor on a busy host", {h0, h1},
               {{0, chain({1000, 1000}), {0, 1}, 3.0}, {0, single(2000), {1}, 3.0}}});
  // transfer lands at 1.2; A has 1800 left, shares until B ends at 3.2
  s.push_back({"transfer into a busy host", {h0, h1},
               {{0, single(3000), {0}, 4.0}, {0, with_outputs(chain({1000, 1000}), {2}), {1, 0}, 3.2}}});
  s.push_back({"layer chain of three", {h0, h1, h2}, {{0, chain({1000, 1000, 1000}), {0, 0, 0}, 3.0}}});
  s.push_back({"semantic of the same work", {h0, h1, h2},
               {{0, star({{1000}, {1000}, {1000}}, 30), {0, 1, 2, 0}, 1.03}}});
  return s;
}

void fluid_oracle() {
  const auto t0 = Clock::now();
  const auto all = scenarios();
  double worst = 0.0;
  int mismatched = 0;
  for (const auto& sc : all) {
    Simulator sim(make_cluster(sc.hosts, sc.step), 0);
    std::vector<double> got(sc.admissions.size(), -1.0);
    std::vector<Admission> pending = sc.admissions;
    std::size_t next = 0;
    std::vector<std::size_t> order(pending.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pending[a].at < pending[b].at; });
    while (sim.now() < 50.0) {
      while (next < order.size() && pending[order[next]].at <= sim.now() + 1e-12) {
        const auto& a = pending[order[next]];
        sim.admit(workload(order[next], a.at), SplitDecision::Layer, 0.9, a.graph, a.hosts);
        ++next;
      }
      double until = sim.now() + sc.step;
      if (next < order.size()) until = std::min(until, pending[order[next]].at);
      sim.advance_to(until);
      for (const auto& rec : sim.take_completed()) got[rec.workload.id] = *rec.completion_s;
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      const double err = std::fabs(got[i] - sc.admissions[i].expected_completion);
      worst = std::max(worst, err);
      if (!(err <= 1e-9)) {
        ++mismatched;
        std::printf("  scenario '%s' workload %zu: got %.12f expected %.12f\n", sc.name.c_str(), i,
                    got[i], sc.admissions[i].expected_completion);
      }
    }
  }
  report(2, mismatched == 0 && all.size() >= 20, seconds_since(t0), 1,
         fmt("%.0f hand-traced scenarios, max completion error %.3g s", static_cast<double>(all.size()),
             worst));
}

// ---------------------------------------------------------------------------
// 3. UCB1 on a stationary Bernoulli pair

void bandit_convergence() {
  const auto t0 = Clock::now();
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution layer(0.2), semantic(0.8);
    BanditState b;
    int late_better = 0;
    for (int pull = 1; pull <= 1000; ++pull) {
      const auto arm = select_arm(b, Context::Tight);
      const double r = arm == SplitDecision::Layer ? layer(rng) : semantic(rng);
      update_arm_in_place(b, Context::Tight, arm, r);
      if (pull > 500 && arm == SplitDecision::Semantic) ++late_better;
    }
    if (late_better > 450) ++good;
  }
  report(3, good >= 95, seconds_since(t0), 5,
         fmt("better arm on >90%% of pulls 501-1000 in %.0f/100 seeds", good));
}

// ---------------------------------------------------------------------------
// 4-6. benchmark comparison

struct PolicyRuns {
  Policy policy;
  RunResult result;
};

std::vector<PolicyRuns> run_benchmark(const RunConfig& base) {
  std::vector<PolicyRuns> out;
  for (Policy p : {Policy::SplitPlace, Policy::AllLayer, Policy::AllSemantic}) {
    RunConfig c = base;
    c.policy = p;
    out.push_back({p, execute(prepare_run(c))});
  }
  return out;
}

void benchmark_criteria() {
  const auto t0 = Clock::now();
  const RunConfig base = load_run_config(fs::path(SPLITPLACE_DATA_DIR) / "benchmark" / "run.json");
  const auto runs = run_benchmark(base);
  const double elapsed = seconds_since(t0);
  const auto& sp = runs[0].result;
  const auto& layer = runs[1].result;
  const auto& sem = runs[2].result;

  std::uint64_t min_workloads = ~0ULL;
  for (const auto& rep : sp.replications) min_workloads = std::min(min_workloads, rep.report.workloads);
  const bool shape = sp.replications.size() == 5 && min_workloads >= 2000;
  const bool c4 = shape && sp.aggregate.sla_violation_rate < layer.aggregate.sla_violation_rate &&
                  sp.aggregate.accuracy_mean > sem.aggregate.accuracy_mean;
  report(4, c4, elapsed, 120,
         fmt("violation splitplace %.4f < all_layer %.4f; accuracy splitplace %.4f > all_semantic %.4f",
             sp.aggregate.sla_violation_rate, layer.aggregate.sla_violation_rate,
             sp.aggregate.accuracy_mean, sem.aggregate.accuracy_mean) +
             " (" + std::to_string(sp.replications.size()) + " seeds, >= " +
             std::to_string(min_workloads) + " workloads each)");

  int wins = 0;
  std::string margins;
  for (std::size_t r = 0; r < sp.replications.size(); ++r) {
    auto windowed = [&](const RunResult& rr) {
      return windowed_reward(rr.replications[r].completed, rr.replications[r].unfinished, 200);
    };
    const double mine = windowed(sp);
    const double best = std::max(windowed(layer), windowed(sem));
    if (mine >= best - 0.02) ++wins;
    margins += (r ? ", " : "") + fmt("%+.4f", mine - best);
  }
  report(5, shape && wins >= 4, elapsed, 120,
         fmt("warm reward within 0.02 of the best fixed policy in %.0f/5 seeds", wins) +
             " (margins " + margins + ")");
}

void determinism() {
  const auto t0 = Clock::now();
  RunConfig base = load_run_config(fs::path(SPLITPLACE_DATA_DIR) / "benchmark" / "run.json");
  const fs::path scratch = fs::temp_directory_path() / "splitplace_acceptance_determinism";
  fs::remove_all(scratch);
  std::vector<std::string> csv;
  for (const char* tag : {"a", "b"}) {
    std::vector<RunConfig> configs;
    for (Policy p : {Policy::SplitPlace, Policy::AllLayer, Policy::AllSemantic, Policy::Compressed}) {
      RunConfig c = base;
      c.policy = p;
      c.out = scratch / tag;
      configs.push_back(c);
    }
    compare_and_write(configs);
    csv.push_back(read_text_file(scratch / tag / "comparison.csv"));
  }
  fs::remove_all(scratch);
  const bool ok = csv[0] == csv[1] && !csv[0].empty();
  report(6, ok, seconds_since(t0), 120,
         fmt("two compare runs, %.0f-byte CSV byte-identical", static_cast<double>(csv[0].size())));
}

// ---------------------------------------------------------------------------
// 7. conservation under random load

struct Violations {
  long work = 0, ram = 0, precedence = 0, jitter = 0;
  double worst_work = 0.0;
};

void check_state(const Simulator& sim, Violations& v) {
  const double done = sim.work_processed_mi();
  const double busy = sim.capacity_busy_mi();
  const double rel = std::fabs(done - busy) / std::max({done, busy, 1e-300});
  if (done > 0 || busy > 0) v.worst_work = std::max(v.worst_work, rel);
  if (rel > 1e-9 && (done > 0 || busy > 0)) ++v.work;

  for (const auto& h : sim.cluster().hosts) {
    if (sim.resident_ram_mb(h.id) > h.ram_mb * (1 + 1e-12)) ++v.ram;
  }

  const auto& frags = sim.fragments();
  std::vector<double> inbound(frags.size(), 0.0);
  for (const auto& t : sim.transfers()) {
    const Host& a = sim.cluster().hosts[t.src];
    const Host& b = sim.cluster().hosts[t.dst];
    if (t.duration_s < t.size_mb / std::min(a.bandwidth_mbps, b.bandwidth_mbps) - 1e-15) ++v.jitter;
    if (t.duration_s < 0) ++v.jitter;
    inbound[t.to_fragment] = std::max(inbound[t.to_fragment], t.start_s + t.duration_s);
  }
  for (const auto& f : frags) {
    if (f.state == FragmentState::Blocked) {
      if (f.remaining_mi != f.spec.compute_mi) ++v.precedence;
      continue;
    }
    for (std::size_t p : f.predecessors) {
      if (frags[p].state != FragmentState::Done || frags[p].finish_s > f.start_s) ++v.precedence;
    }
    if (inbound[f.id] > f.start_s) ++v.precedence;
  }
}

void conservation() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Violations v;
  long steps = 0;
  while (steps < 100000) {
    std::vector<Host> hosts;
    const std::size_t n = 1 + rng() % 4;
    for (std::size_t i = 0; i < n; ++i) {
      hosts.push_back(make_host(i, 200 + 3000 * u(rng), 500 + 4000 * u(rng), 1 + 30 * u(rng),
                                0.05 * u(rng), 0.05 * u(rng)));
    }
    Simulator sim(make_cluster(hosts, 0.05 + u(rng)), rng());
    auto sched = make_scheduler(kSchedulerNames[rng() % 3], rng());
    for (int s = 0; s < 100 && steps < 100000; ++s, ++steps) {
      const int arrivals = static_cast<int>(rng() % 3);
      for (int a = 0; a < arrivals; ++a) {
        FragmentGraph g;
        if (rng() % 2) {
          std::vector<double> mi(1 + rng() % 4), out(mi.size());
          for (auto& m : mi) m = 10 + 2000 * u(rng);
          for (auto& o : out) o = 5 * u(rng);
          g = chain(mi, out);
        } else {
          std::vector<std::vector<double>> br(2 + rng() % 3);
          for (auto& b : br) b = {10 + 1500 * u(rng)};
          g = star(br, 5 + 50 * u(rng), 2 * u(rng));
        }
        for (auto& node : g.nodes) node.spec.ram_mb = 20 + 800 * u(rng);
        const auto p = sched->place(g, sim.view());
        if (p.queued()) continue;
        sim.admit(workload(static_cast<WorkloadId>(steps * 4 + a), sim.now()), SplitDecision::Layer,
                  0.9, g, *p.hosts);
      }
      sim.step(rng() % 5 == 0 ? 1e-4 * u(rng) : 0.05 + u(rng));
      check_state(sim, v);
      sim.take_completed();
    }
  }
  const bool ok = v.work == 0 && v.ram == 0 && v.precedence == 0 && v.jitter == 0;
  report(7, ok, seconds_since(t0), 60,
         fmt("%.0f steps: work %.0f (worst rel %.2g), ", static_cast<double>(steps),
             static_cast<double>(v.work), v.worst_work) +
             fmt("RAM %.0f, precedence %.0f, jitter %.0f violations", static_cast<double>(v.ram),
                 static_cast<double>(v.precedence), static_cast<double>(v.jitter)));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{reward_exactness, fluid_oracle,
                                                    bandit_convergence, benchmark_criteria,
                                                    determinism, conservation};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL criterion: uncaught exception: %s\n", e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}
