#pragma once

#include <string>

#include "causelog/meta.hpp"

namespace causelog {

// Every tunable in the pipeline lives here. The resolved configuration is
// hashed and the hash is embedded in every output file, so any artifact can
// be traced back to the exact knob settings that produced it.
struct PipelineConfig {
  // templates
  double merge_threshold = 0.75;
  int assume_year = 2000; // year for RFC-3164 timestamps, which omit one
  std::string layer_map_path = "data/layer_keywords.conf";

  // domain model
  double slack_seconds = 1.0;        // clock-skew allowance added to delay bounds
  double vlan_timer_seconds = 30.0;  // VLAN has no configured timer
  double physical_lag_seconds = 5.0; // propagation window on physical edges
  double default_ospf_dead_interval = 40.0;
  double default_bgp_hold_time = 90.0;

  // causality
  double alpha = 0.5;        // correlation gate
  double significance = 0.01;
  int min_support = 10;
  int min_trials = 20;
  int min_bins = 30;
  double intra_device_lag_seconds = 5.0;
  double bin_seconds = 10.0;
  uint64_t seed = 0;

  // graph builder
  std::string window_emission = "GAP_BASED"; // or TUMBLING
  double window_delta_seconds = 300.0;
  double window_gap_seconds = 30.0;

  // execution
  int threads = 0; // 0 = all hardware threads, 1 = serial

  Json to_json() const;
  static PipelineConfig from_json(const Json& j);
  static PipelineConfig load(const std::string& path);

  // FNV hash of the canonical JSON form; embedded in output metadata.
  std::string hash() const;
};

} // namespace causelog
