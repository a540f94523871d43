#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace splitplace {

using HostId = std::size_t;
using WorkloadId = std::uint64_t;

/// Raised when a configuration or data file fails to parse. The message
/// carries the offending file, line or field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when parsed data violates a domain invariant. Every violated
/// invariant is listed in violations().
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// An edge node. Ids are implied by position in ClusterConfig::hosts.
struct Host {
  HostId id = 0;
  double capacity_mips = 0.0;
  double ram_mb = 0.0;
  double power_idle_w = 0.0;
  double power_max_w = 0.0;
  double bandwidth_mbps = 0.0;  // megabytes per second
  double latency_base_s = 0.0;
  double latency_jitter_std_s = 0.0;

  bool operator==(const Host&) const = default;
};

/// A unit of split-model work: compute demand, resident memory and the size
/// of the intermediate it forwards to its successor.
struct Fragment {
  double compute_mi = 0.0;
  double ram_mb = 0.0;
  double output_mb = 0.0;

  bool operator==(const Fragment&) const = default;
};

inline constexpr double kDefaultCompressedPenalty = 0.02;

struct ApplicationProfile {
  std::string name;
  std::vector<Fragment> layer_chain;
  std::vector<std::vector<Fragment>> semantic_branches;
  Fragment aggregation;
  double accuracy_layer = 0.0;
  double accuracy_semantic = 0.0;
  double reference_mips = 0.0;
  // Accuracy lost by the single-fragment compressed variant. Optional in
  // profile files.
  double compressed_accuracy_penalty = kDefaultCompressedPenalty;

  /// Total layer-chain compute over reference_mips; the a-priori estimate of
  /// the layer-split execution time.
  double prior_layer_time_s() const;
  double layer_compute_mi() const;
  double semantic_compute_mi() const;

  bool operator==(const ApplicationProfile&) const = default;
};

struct Workload {
  WorkloadId id = 0;
  double arrival_s = 0.0;
  std::string app;
  double sla_s = 0.0;  // relative deadline

  bool operator==(const Workload&) const = default;
};

enum class SplitDecision : std::uint8_t { Layer = 0, Semantic = 1 };

std::string_view to_string(SplitDecision d) noexcept;

struct ClusterConfig {
  std::vector<Host> hosts;
  double interval_s = 1.0;
  std::uint64_t seed = 0;

  bool operator==(const ClusterConfig&) const = default;
};

// Validation. An empty result means every invariant holds.
std::vector<std::string> validate_fragment(const Fragment& f, bool terminal, std::string_view where);
std::vector<std::string> validate_profile(const ApplicationProfile& p);
std::vector<std::string> validate_host(const Host& h);
std::vector<std::string> validate_cluster(const ClusterConfig& c);
std::vector<std::string> validate_workload(const Workload& w);

/// Throws ValidationError listing every violation, if any.
void require_valid(const std::vector<std::string>& violations);

/// Ten Raspberry-Pi-class hosts with RAM alternating 4096 / 8192 MB.
ClusterConfig default_cluster();

/// Synthetic resnet50v2 / mobilenetv2 / inceptionv3 profiles. Fragment demands
/// are illustrative numbers, not measurements of the real networks.
std::vector<ApplicationProfile> default_profiles();

/// Builds a profile with `layers` equal layer fragments and `branches` equal
/// semantic branches splitting the same total work; aggregation costs 1% of
/// the branch compute.
ApplicationProfile make_uniform_profile(std::string name, double total_mi, std::size_t layers,
                                        std::size_t branches, double accuracy_layer,
                                        double accuracy_semantic, double reference_mips);

// JSON text (de)serialization. Parse functions throw ParseError on malformed
// input and ValidationError on invariant violations.
std::string serialize_cluster(const ClusterConfig& c);
ClusterConfig parse_cluster(std::string_view text, std::string_view source = "<string>");
ClusterConfig load_cluster(const std::filesystem::path& path);

std::string serialize_profiles(const std::vector<ApplicationProfile>& profiles);
std::vector<ApplicationProfile> parse_profiles(std::string_view text,
                                               std::string_view source = "<string>");
std::vector<ApplicationProfile> load_profiles(const std::filesystem::path& path);

const ApplicationProfile* find_profile(const std::vector<ApplicationProfile>& profiles,
                                       std::string_view name);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace splitplace
