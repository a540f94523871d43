#include "splitplace/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace splitplace {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += "; ";
    out += item;
  }
  return out;
}

bool finite_all(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void append(std::vector<std::string>& into, std::vector<std::string> from) {
  into.insert(into.end(), std::make_move_iterator(from.begin()),
              std::make_move_iterator(from.end()));
}

// Strict key checking: every required key present, no unknown keys.
void check_keys(const json& obj, std::initializer_list<std::string_view> required,
                std::initializer_list<std::string_view> optional, std::string_view where) {
  if (!obj.is_object()) throw ParseError(std::string(where) + ": expected a JSON object");
  for (auto key : required) {
    if (!obj.contains(std::string(key))) {
      throw ParseError(std::string(where) + ": missing key '" + std::string(key) + "'");
    }
  }
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto k : required) known = known || key == k;
    for (auto k : optional) known = known || key == k;
    if (!known) throw ParseError(std::string(where) + ": unknown key '" + key + "'");
  }
}

double number_at(const json& obj, const char* key, std::string_view where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    throw ParseError(std::string(where) + "." + key + ": expected a number");
  }
  return v.get<double>();
}

json fragment_to_json(const Fragment& f) {
  return json{{"compute_mi", f.compute_mi}, {"ram_mb", f.ram_mb}, {"output_mb", f.output_mb}};
}

Fragment fragment_from_json(const json& j, const std::string& where) {
  check_keys(j, {"compute_mi", "ram_mb", "output_mb"}, {}, where);
  return Fragment{number_at(j, "compute_mi", where), number_at(j, "ram_mb", where),
                  number_at(j, "output_mb", where)};
}

json parse_json_text(std::string_view text, std::string_view source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(source) + ": " + e.what());
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error("validation failed: " + join(violations)),
      violations_(std::move(violations)) {}

double ApplicationProfile::layer_compute_mi() const {
  return std::accumulate(layer_chain.begin(), layer_chain.end(), 0.0,
                         [](double acc, const Fragment& f) { return acc + f.compute_mi; });
}

double ApplicationProfile::semantic_compute_mi() const {
  double total = aggregation.compute_mi;
  for (const auto& branch : semantic_branches) {
    for (const auto& f : branch) total += f.compute_mi;
  }
  return total;
}

double ApplicationProfile::prior_layer_time_s() const {
  return layer_compute_mi() / reference_mips;
}

std::string_view to_string(SplitDecision d) noexcept {
  return d == SplitDecision::Layer ? "layer" : "semantic";
}

std::vector<std::string> validate_fragment(const Fragment& f, bool terminal,
                                           std::string_view where) {
  std::vector<std::string> out;
  const std::string at(where);
  if (!finite_all({f.compute_mi, f.ram_mb, f.output_mb})) {
    out.push_back(at + ": non-finite field");
    return out;
  }
  if (f.compute_mi <= 0) out.push_back(at + ": compute_mi must be > 0");
  if (f.ram_mb <= 0) out.push_back(at + ": ram_mb must be > 0");
  if (f.output_mb < 0) out.push_back(at + ": output_mb must be >= 0");
  if (f.output_mb == 0 && !terminal) {
    out.push_back(at + ": output_mb = 0 only allowed for terminal fragments");
  }
  return out;
}

std::vector<std::string> validate_profile(const ApplicationProfile& p) {
  std::vector<std::string> out;
  if (p.name.empty()) out.push_back("name empty");
  if (p.layer_chain.empty()) {
    out.push_back("layer_chain empty");
  }
  for (std::size_t i = 0; i < p.layer_chain.size(); ++i) {
    const bool terminal = i + 1 == p.layer_chain.size();
    append(out, validate_fragment(p.layer_chain[i], terminal,
                                  "layer_chain[" + std::to_string(i) + "]"));
  }
  if (p.semantic_branches.size() < 2) out.push_back("semantic_branches needs >= 2 branches");
  for (std::size_t b = 0; b < p.semantic_branches.size(); ++b) {
    const auto& branch = p.semantic_branches[b];
    if (branch.empty()) out.push_back("semantic_branches[" + std::to_string(b) + "] empty");
    for (std::size_t i = 0; i < branch.size(); ++i) {
      append(out, validate_fragment(branch[i], false,
                                    "semantic_branches[" + std::to_string(b) + "][" +
                                        std::to_string(i) + "]"));
    }
  }
  append(out, validate_fragment(p.aggregation, true, "aggregation"));
  const auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!in_unit(p.accuracy_layer)) out.push_back("accuracy_layer outside [0,1]");
  if (!in_unit(p.accuracy_semantic)) out.push_back("accuracy_semantic outside [0,1]");
  if (in_unit(p.accuracy_layer) && in_unit(p.accuracy_semantic) &&
      p.accuracy_layer < p.accuracy_semantic) {
    out.push_back("accuracy ordering violated");
  }
  if (!(std::isfinite(p.reference_mips) && p.reference_mips > 0)) {
    out.push_back("reference_mips must be > 0");
  }
  if (!in_unit(p.compressed_accuracy_penalty)) {
    out.push_back("compressed_accuracy_penalty outside [0,1]");
  }
  return out;
}

std::vector<std::string> validate_host(const Host& h) {
  std::vector<std::string> out;
  const std::string at = "hosts[" + std::to_string(h.id) + "]";
  if (!finite_all({h.capacity_mips, h.ram_mb, h.power_idle_w, h.power_max_w, h.bandwidth_mbps,
                   h.latency_base_s, h.latency_jitter_std_s})) {
    out.push_back(at + ": non-finite field");
    return out;
  }
  if (h.capacity_mips <= 0) out.push_back(at + ": capacity_mips must be > 0");
  if (h.ram_mb <= 0) out.push_back(at + ": ram_mb must be > 0");
  if (h.power_idle_w < 0) out.push_back(at + ": power_idle_w must be >= 0");
  if (h.power_max_w < h.power_idle_w) out.push_back(at + ": power_max_w < power_idle_w");
  if (h.bandwidth_mbps <= 0) out.push_back(at + ": bandwidth_mbps must be > 0");
  if (h.latency_base_s < 0) out.push_back(at + ": latency_base_s must be >= 0");
  if (h.latency_jitter_std_s < 0) out.push_back(at + ": latency_jitter_std_s must be >= 0");
  return out;
}

std::vector<std::string> validate_cluster(const ClusterConfig& c) {
  std::vector<std::string> out;
  if (c.hosts.empty()) out.push_back(">=1 host required");
  for (std::size_t i = 0; i < c.hosts.size(); ++i) {
    if (c.hosts[i].id != i) out.push_back("host ids must be contiguous from 0");
    append(out, validate_host(c.hosts[i]));
  }
  if (!(std::isfinite(c.interval_s) && c.interval_s > 0)) out.push_back("interval_s must be > 0");
  return out;
}

std::vector<std::string> validate_workload(const Workload& w) {
  std::vector<std::string> out;
  if (!(std::isfinite(w.arrival_s) && w.arrival_s >= 0)) out.push_back("arrival_s must be >= 0");
  if (!(std::isfinite(w.sla_s) && w.sla_s > 0)) out.push_back("sla_s must be > 0");
  if (w.app.empty()) out.push_back("app empty");
  return out;
}

void require_valid(const std::vector<std::string>& violations) {
  if (!violations.empty()) throw ValidationError(violations);
}

ClusterConfig default_cluster() {
  ClusterConfig c;
  c.interval_s = 0.5;
  c.seed = 0;
  for (HostId i = 0; i < 10; ++i) {
    Host h;
    h.id = i;
    h.capacity_mips = 2000.0;
    h.ram_mb = i % 2 == 0 ? 4096.0 : 8192.0;
    h.power_idle_w = 2.7;
    h.power_max_w = 6.4;
    h.bandwidth_mbps = 10.0;
    h.latency_base_s = 0.02;
    h.latency_jitter_std_s = 0.01;
    c.hosts.push_back(h);
  }
  return c;
}

ApplicationProfile make_uniform_profile(std::string name, double total_mi, std::size_t layers,
                                        std::size_t branches, double accuracy_layer,
                                        double accuracy_semantic, double reference_mips) {
  ApplicationProfile p;
  p.name = std::move(name);
  const double per_layer = total_mi / static_cast<double>(layers);
  const double per_branch = total_mi / static_cast<double>(branches);
  for (std::size_t i = 0; i < layers; ++i) {
    const bool last = i + 1 == layers;
    p.layer_chain.push_back(Fragment{per_layer, per_layer * 0.3, last ? 0.0 : per_layer * 0.0003});
  }
  for (std::size_t b = 0; b < branches; ++b) {
    p.semantic_branches.push_back({Fragment{per_branch, per_branch * 0.25, per_branch * 0.00002}});
  }
  p.aggregation = Fragment{total_mi * 0.01, 64.0, 0.0};
  p.accuracy_layer = accuracy_layer;
  p.accuracy_semantic = accuracy_semantic;
  p.reference_mips = reference_mips;
  return p;
}

std::vector<ApplicationProfile> default_profiles() {
  return {
      make_uniform_profile("resnet50v2", 12000.0, 4, 4, 0.93, 0.87, 2000.0),
      make_uniform_profile("mobilenetv2", 4000.0, 4, 4, 0.90, 0.85, 2000.0),
      make_uniform_profile("inceptionv3", 10000.0, 4, 4, 0.94, 0.88, 2000.0),
  };
}

std::string serialize_cluster(const ClusterConfig& c) {
  json hosts = json::array();
  for (const auto& h : c.hosts) {
    hosts.push_back(json{{"capacity_mips", h.capacity_mips},
                         {"ram_mb", h.ram_mb},
                         {"power_idle_w", h.power_idle_w},
                         {"power_max_w", h.power_max_w},
                         {"bandwidth_mbps", h.bandwidth_mbps},
                         {"latency_base_s", h.latency_base_s},
                         {"latency_jitter_std_s", h.latency_jitter_std_s}});
  }
  json root{{"hosts", hosts}, {"interval_s", c.interval_s}, {"seed", c.seed}};
  return root.dump(2) + "\n";
}

ClusterConfig parse_cluster(std::string_view text, std::string_view source) {
  const json root = parse_json_text(text, source);
  const std::string src(source);
  check_keys(root, {"hosts", "interval_s", "seed"}, {}, src);
  if (!root.at("hosts").is_array()) throw ParseError(src + ".hosts: expected an array");
  if (!root.at("seed").is_number_unsigned()) {
    throw ParseError(src + ".seed: expected a non-negative integer");
  }
  ClusterConfig c;
  c.interval_s = number_at(root, "interval_s", src);
  c.seed = root.at("seed").get<std::uint64_t>();
  HostId id = 0;
  for (const auto& hj : root.at("hosts")) {
    const std::string where = src + ".hosts[" + std::to_string(id) + "]";
    check_keys(hj,
               {"capacity_mips", "ram_mb", "power_idle_w", "power_max_w", "bandwidth_mbps",
                "latency_base_s", "latency_jitter_std_s"},
               {}, where);
    Host h;
    h.id = id++;
    h.capacity_mips = number_at(hj, "capacity_mips", where);
    h.ram_mb = number_at(hj, "ram_mb", where);
    h.power_idle_w = number_at(hj, "power_idle_w", where);
    h.power_max_w = number_at(hj, "power_max_w", where);
    h.bandwidth_mbps = number_at(hj, "bandwidth_mbps", where);
    h.latency_base_s = number_at(hj, "latency_base_s", where);
    h.latency_jitter_std_s = number_at(hj, "latency_jitter_std_s", where);
    c.hosts.push_back(h);
  }
  require_valid(validate_cluster(c));
  return c;
}

ClusterConfig load_cluster(const std::filesystem::path& path) {
  return parse_cluster(read_text_file(path), path.string());
}

std::string serialize_profiles(const std::vector<ApplicationProfile>& profiles) {
  json arr = json::array();
  for (const auto& p : profiles) {
    json chain = json::array();
    for (const auto& f : p.layer_chain) chain.push_back(fragment_to_json(f));
    json branches = json::array();
    for (const auto& branch : p.semantic_branches) {
      json b = json::array();
      for (const auto& f : branch) b.push_back(fragment_to_json(f));
      branches.push_back(b);
    }
    json pj{{"name", p.name},
            {"layer_chain", chain},
            {"semantic_branches", branches},
            {"aggregation", fragment_to_json(p.aggregation)},
            {"accuracy_layer", p.accuracy_layer},
            {"accuracy_semantic", p.accuracy_semantic},
            {"reference_mips", p.reference_mips}};
    if (p.compressed_accuracy_penalty != kDefaultCompressedPenalty) {
      pj["compressed_accuracy_penalty"] = p.compressed_accuracy_penalty;
    }
    arr.push_back(std::move(pj));
  }
  return arr.dump(2) + "\n";
}

std::vector<ApplicationProfile> parse_profiles(std::string_view text, std::string_view source) {
  const json root = parse_json_text(text, source);
  const std::string src(source);
  if (!root.is_array()) throw ParseError(src + ": expected an array of profiles");
  std::vector<ApplicationProfile> out;
  std::vector<std::string> violations;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto& pj = root[i];
    const std::string where = src + "[" + std::to_string(i) + "]";
    check_keys(pj,
               {"name", "layer_chain", "semantic_branches", "aggregation", "accuracy_layer",
                "accuracy_semantic", "reference_mips"},
               {"compressed_accuracy_penalty"}, where);
    ApplicationProfile p;
    if (!pj.at("name").is_string()) throw ParseError(where + ".name: expected a string");
    p.name = pj.at("name").get<std::string>();
    if (!pj.at("layer_chain").is_array()) {
      throw ParseError(where + ".layer_chain: expected an array");
    }
    for (std::size_t k = 0; k < pj.at("layer_chain").size(); ++k) {
      p.layer_chain.push_back(fragment_from_json(
          pj.at("layer_chain")[k], where + ".layer_chain[" + std::to_string(k) + "]"));
    }
    if (!pj.at("semantic_branches").is_array()) {
      throw ParseError(where + ".semantic_branches: expected an array");
    }
    for (std::size_t b = 0; b < pj.at("semantic_branches").size(); ++b) {
      const auto& bj = pj.at("semantic_branches")[b];
      const std::string bwhere = where + ".semantic_branches[" + std::to_string(b) + "]";
      if (!bj.is_array()) throw ParseError(bwhere + ": expected an array");
      std::vector<Fragment> branch;
      for (std::size_t k = 0; k < bj.size(); ++k) {
        branch.push_back(fragment_from_json(bj[k], bwhere + "[" + std::to_string(k) + "]"));
      }
      p.semantic_branches.push_back(std::move(branch));
    }
    p.aggregation = fragment_from_json(pj.at("aggregation"), where + ".aggregation");
    p.accuracy_layer = number_at(pj, "accuracy_layer", where);
    p.accuracy_semantic = number_at(pj, "accuracy_semantic", where);
    p.reference_mips = number_at(pj, "reference_mips", where);
    if (pj.contains("compressed_accuracy_penalty")) {
      p.compressed_accuracy_penalty = number_at(pj, "compressed_accuracy_penalty", where);
    }
    for (auto& v : validate_profile(p)) violations.push_back(p.name + ": " + v);
    for (const auto& prev : out) {
      if (prev.name == p.name) violations.push_back("duplicate profile name '" + p.name + "'");
    }
    out.push_back(std::move(p));
  }
  require_valid(violations);
  return out;
}

std::vector<ApplicationProfile> load_profiles(const std::filesystem::path& path) {
  return parse_profiles(read_text_file(path), path.string());
}

const ApplicationProfile* find_profile(const std::vector<ApplicationProfile>& profiles,
                                       std::string_view name) {
  for (const auto& p : profiles) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace splitplace
