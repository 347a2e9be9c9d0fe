#include "causelog/pipeline_config.hpp"

#include <set>

#include "causelog/errors.hpp"
#include "causelog/hashing.hpp"

namespace causelog {

Json PipelineConfig::to_json() const {
  return Json{
      {"merge_threshold", merge_threshold},
      {"assume_year", assume_year},
      {"layer_map_path", layer_map_path},
      {"slack_seconds", slack_seconds},
      {"vlan_timer_seconds", vlan_timer_seconds},
      {"physical_lag_seconds", physical_lag_seconds},
      {"default_ospf_dead_interval", default_ospf_dead_interval},
      {"default_bgp_hold_time", default_bgp_hold_time},
      {"alpha", alpha},
      {"significance", significance},
      {"min_support", min_support},
      {"min_trials", min_trials},
      {"min_bins", min_bins},
      {"intra_device_lag_seconds", intra_device_lag_seconds},
      {"bin_seconds", bin_seconds},
      {"seed", seed},
      {"window_emission", window_emission},
      {"window_delta_seconds", window_delta_seconds},
      {"window_gap_seconds", window_gap_seconds},
      {"threads", threads},
  };
}

PipelineConfig PipelineConfig::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");

  static const std::set<std::string> known = {
      "merge_threshold", "assume_year", "layer_map_path",
      "slack_seconds", "vlan_timer_seconds", "physical_lag_seconds",
      "default_ospf_dead_interval", "default_bgp_hold_time",
      "alpha", "significance", "min_support", "min_trials", "min_bins",
      "intra_device_lag_seconds", "bin_seconds", "seed",
      "window_emission", "window_delta_seconds", "window_gap_seconds",
      "threads"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw Error(ErrorCode::ConfigError, "unknown config key '" + it.key() + "'");
    }
  }

  PipelineConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("merge_threshold", c.merge_threshold);
  get("assume_year", c.assume_year);
  get("layer_map_path", c.layer_map_path);
  get("slack_seconds", c.slack_seconds);
  get("vlan_timer_seconds", c.vlan_timer_seconds);
  get("physical_lag_seconds", c.physical_lag_seconds);
  get("default_ospf_dead_interval", c.default_ospf_dead_interval);
  get("default_bgp_hold_time", c.default_bgp_hold_time);
  get("alpha", c.alpha);
  get("significance", c.significance);
  get("min_support", c.min_support);
  get("min_trials", c.min_trials);
  get("min_bins", c.min_bins);
  get("intra_device_lag_seconds", c.intra_device_lag_seconds);
  get("bin_seconds", c.bin_seconds);
  get("seed", c.seed);
  get("window_emission", c.window_emission);
  get("window_delta_seconds", c.window_delta_seconds);
  get("window_gap_seconds", c.window_gap_seconds);
  get("threads", c.threads);

  if (c.merge_threshold <= 0.0 || c.merge_threshold > 1.0) {
    throw Error(ErrorCode::ConfigError, "merge_threshold must be in (0, 1]");
  }
  if (c.window_emission != "GAP_BASED" && c.window_emission != "TUMBLING") {
    throw Error(ErrorCode::ConfigError, "window_emission must be GAP_BASED or TUMBLING");
  }
  if (c.window_delta_seconds <= 0 || c.window_gap_seconds <= 0) {
    throw Error(ErrorCode::ConfigError, "window delta and gap must be positive");
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  return from_json(read_json_file(path));
}

std::string PipelineConfig::hash() const {
  // threads is an execution detail: outputs are identical across worker
  // counts, so it must not perturb the hash embedded in them.
  Json j = to_json();
  j.erase("threads");
  return to_hex(fnv1a64(j.dump()));
}

} // namespace causelog
