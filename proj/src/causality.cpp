#include "causelog/causality.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "causelog/errors.hpp"
#include "causelog/exec.hpp"
#include "causelog/rng.hpp"
#include "causelog/stats.hpp"

namespace causelog {

std::string Channel::name() const {
  switch (kind) {
    case ChannelKind::WithinDevice: return "WITHIN_DEVICE";
    case ChannelKind::Physical: return "PHYSICAL";
    case ChannelKind::ProtocolOverlay: return std::string("PROTOCOL:") + protocol_name(protocol);
  }
  return "WITHIN_DEVICE";
}

Channel Channel::parse(const std::string& name) {
  Channel c;
  if (name == "WITHIN_DEVICE") {
    c.kind = ChannelKind::WithinDevice;
  } else if (name == "PHYSICAL") {
    c.kind = ChannelKind::Physical;
  } else if (name.rfind("PROTOCOL:", 0) == 0) {
    c.kind = ChannelKind::ProtocolOverlay;
    c.protocol = protocol_from_name(name.substr(9));
  } else {
    throw Error(ErrorCode::ParseError, "unknown channel '" + name + "'");
  }
  return c;
}

const char* discard_reason_name(DiscardReason r) {
  switch (r) {
    case DiscardReason::LowCorrelation: return "LOW_CORRELATION";
    case DiscardReason::InsufficientData: return "INSUFFICIENT_DATA";
    case DiscardReason::NoControl: return "NO_CONTROL";
    case DiscardReason::Underpowered: return "UNDERPOWERED";
    case DiscardReason::NotSignificant: return "NOT_SIGNIFICANT";
  }
  return "UNKNOWN";
}

CausalityEngine::CausalityEngine(std::vector<TemplateEvent> events, const DomainModel& model,
                                 const PipelineConfig& cfg, size_t template_count)
    : events_(std::move(events)), model_(model), cfg_(cfg), template_count_(template_count) {
  std::stable_sort(events_.begin(), events_.end(),
                   [](const TemplateEvent& a, const TemplateEvent& b) {
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     return a.raw_index < b.raw_index;
                   });
  for (const auto& ev : events_) {
    if (ev.template_id < 0 || static_cast<size_t>(ev.template_id) >= template_count_) {
      throw Error(ErrorCode::UnknownTemplate,
                  "event references template " + std::to_string(ev.template_id) +
                      " outside the dictionary of size " + std::to_string(template_count_));
    }
  }
  build_indexes();
  build_keys();
  build_candidates();
}

void CausalityEngine::set_dict(const std::string& dict_hash,
                               std::vector<std::string> signatures) {
  dict_hash_ = dict_hash;
  signatures_ = std::move(signatures);
}

void CausalityEngine::build_indexes() {
  template_devices_.assign(template_count_, {});
  bin_counts_.assign(template_count_, {});
  global_series_cache_.assign(template_count_, {});
  global_series_ready_.assign(template_count_, false);

  if (!events_.empty()) {
    bin_lo_ = static_cast<int64_t>(std::floor(events_.front().timestamp / cfg_.bin_seconds));
    bin_hi_ = static_cast<int64_t>(std::floor(events_.back().timestamp / cfg_.bin_seconds));
  }

  for (size_t i = 0; i < events_.size(); ++i) {
    const auto& ev = events_[i];
    by_device_[ev.device].push_back(i);
    by_device_template_[{ev.device, ev.template_id}].push_back(i);
    template_devices_[static_cast<size_t>(ev.template_id)].insert(ev.device);
    int64_t bin = static_cast<int64_t>(std::floor(ev.timestamp / cfg_.bin_seconds));
    bin_counts_[static_cast<size_t>(ev.template_id)][ev.device][bin] += 1.0;
  }

  for (const auto& pair : model_.physical) {
    double bound = cfg_.physical_lag_seconds + cfg_.slack_seconds;
    phys_neighbors_[pair.a].emplace_back(pair.b, bound);
    phys_neighbors_[pair.b].emplace_back(pair.a, bound);
  }
  for (const auto& [proto, edges] : model_.overlays) {
    for (const auto& pair : edges) {
      double bound = model_.delay_bound(proto, pair.a, pair.b).value_or(cfg_.slack_seconds);
      overlay_neighbors_[proto][pair.a].emplace_back(pair.b, bound);
      overlay_neighbors_[proto][pair.b].emplace_back(pair.a, bound);
    }
  }

  for (const auto& change : model_.changes) {
    // effective_date is YYYY-MM-DD; convert to an epoch day for comparisons.
    const std::string& d = change.effective_date;
    if (d.size() != 10) continue;
    int y = std::stoi(d.substr(0, 4));
    int mo = std::stoi(d.substr(5, 2));
    int da = std::stoi(d.substr(8, 2));
    // days_from_civil, inline to avoid a dependency cycle with syslog.cpp
    int yy = y - (mo <= 2);
    int64_t era = (yy >= 0 ? yy : yy - 399) / 400;
    unsigned yoe = static_cast<unsigned>(yy - era * 400);
    unsigned doy = (153u * static_cast<unsigned>(mo + (mo > 2 ? -3 : 9)) + 2u) / 5u +
                   static_cast<unsigned>(da) - 1u;
    unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    change_days_[change.device].push_back(era * 146097 + static_cast<int64_t>(doe) - 719468);
  }
  for (auto& [dev, days] : change_days_) std::sort(days.begin(), days.end());
}

std::string CausalityEngine::epoch_label(const std::string& device, double ts) const {
  auto it = change_days_.find(device);
  if (it == change_days_.end()) return "e0";
  int64_t day = static_cast<int64_t>(std::floor(ts / 86400.0));
  size_t n = static_cast<size_t>(
      std::upper_bound(it->second.begin(), it->second.end(), day) - it->second.begin());
  return "e" + std::to_string(n);
}

void CausalityEngine::build_keys() {
  keys_.assign(template_count_, {});
  std::vector<bool> seen(template_count_, false);
  for (const auto& ev : events_) {
    size_t t = static_cast<size_t>(ev.template_id);
    ConfoundingKey k;
    auto dit = model_.devices.find(ev.device);
    if (dit != model_.devices.end()) {
      k.vendor = dit->second.vendor.empty() ? "UNKNOWN" : dit->second.vendor;
      k.os_version = dit->second.os_version.empty() ? "UNKNOWN" : dit->second.os_version;
      k.tier = tier_name(dit->second.tier);
      k.topology_class = std::string(tier_name(dit->second.tier)) + "/pod" +
                         std::to_string(dit->second.pod);
    }
    k.config_epoch = epoch_label(ev.device, ev.timestamp);

    if (!seen[t]) {
      keys_[t] = k;
      seen[t] = true;
      continue;
    }
    auto merge = [](std::string& field, const std::string& value) {
      if (field != value) field = "UNKNOWN";
    };
    merge(keys_[t].vendor, k.vendor);
    merge(keys_[t].os_version, k.os_version);
    merge(keys_[t].tier, k.tier);
    merge(keys_[t].topology_class, k.topology_class);
    merge(keys_[t].config_epoch, k.config_epoch);
  }
}

void CausalityEngine::build_candidates() {
  std::map<std::tuple<int, int, Channel>, CandidatePair> acc;

  auto bump = [&](int cause, int effect, Channel channel, double lag_bound,
                  const std::string& cause_dev, const std::string& effect_dev) {
    auto key = std::make_tuple(cause, effect, channel);
    auto it = acc.find(key);
    if (it == acc.end()) {
      CandidatePair p;
      p.cause = cause;
      p.effect = effect;
      p.channel = channel;
      p.max_lag = lag_bound;
      it = acc.emplace(key, std::move(p)).first;
    }
    CandidatePair& p = it->second;
    p.support += 1;
    p.max_lag = std::max(p.max_lag, lag_bound);
    p.cause_devices.insert(cause_dev);
    p.effect_devices.insert(effect_dev);
    if (channel.kind != ChannelKind::WithinDevice) {
      p.device_pairs.insert(DevicePairKey(cause_dev, effect_dev));
    }
  };

  // Within-device happens-before: the per-device stream is strictly ordered,
  // so direction follows stream order. One support unit per cause occurrence
  // that sees the effect at least once inside the lag.
  Channel within{ChannelKind::WithinDevice, Protocol::OSPF};
  for (const auto& [device, idxs] : by_device_) {
    for (size_t a = 0; a < idxs.size(); ++a) {
      const auto& cause_ev = events_[idxs[a]];
      std::set<int> seen_effects;
      for (size_t b = a + 1; b < idxs.size(); ++b) {
        const auto& effect_ev = events_[idxs[b]];
        if (effect_ev.timestamp - cause_ev.timestamp > cfg_.intra_device_lag_seconds) break;
        if (effect_ev.template_id == cause_ev.template_id) continue;
        if (seen_effects.insert(effect_ev.template_id).second) {
          bump(cause_ev.template_id, effect_ev.template_id, within,
               cfg_.intra_device_lag_seconds, device, device);
        }
      }
    }
  }

  // Cross-device: only pairs of devices adjacent in the domain model, with
  // the channel's delay bound as the lag window.
  auto scan_edge = [&](const std::string& x, const std::string& y, double bound,
                       Channel channel) {
    auto xe = by_device_.find(x);
    auto ye = by_device_.find(y);
    if (xe == by_device_.end() || ye == by_device_.end()) return;
    const auto& xv = xe->second;
    const auto& yv = ye->second;
    size_t lo = 0;
    for (size_t a = 0; a < xv.size(); ++a) {
      const auto& cause_ev = events_[xv[a]];
      while (lo < yv.size() && events_[yv[lo]].timestamp < cause_ev.timestamp) ++lo;
      std::set<int> seen_effects;
      for (size_t b = lo; b < yv.size(); ++b) {
        const auto& effect_ev = events_[yv[b]];
        if (effect_ev.timestamp - cause_ev.timestamp > bound) break;
        if (effect_ev.template_id == cause_ev.template_id) continue;
        if (seen_effects.insert(effect_ev.template_id).second) {
          bump(cause_ev.template_id, effect_ev.template_id, channel, bound, x, y);
        }
      }
    }
  };

  Channel physical{ChannelKind::Physical, Protocol::OSPF};
  double phys_bound = cfg_.physical_lag_seconds + cfg_.slack_seconds;
  for (const auto& pair : model_.physical) {
    scan_edge(pair.a, pair.b, phys_bound, physical);
    scan_edge(pair.b, pair.a, phys_bound, physical);
  }
  for (const auto& [proto, edges] : model_.overlays) {
    Channel channel{ChannelKind::ProtocolOverlay, proto};
    for (const auto& pair : edges) {
      double bound = model_.delay_bound(proto, pair.a, pair.b).value_or(cfg_.slack_seconds);
      scan_edge(pair.a, pair.b, bound, channel);
      scan_edge(pair.b, pair.a, bound, channel);
    }
  }

  candidates_.clear();
  for (auto& [key, pair] : acc) {
    if (pair.support >= cfg_.min_support) candidates_.push_back(std::move(pair));
  }
  // std::map iteration already gives (cause, effect, channel) order.
}

std::vector<double> CausalityEngine::series_for(int t,
                                                const std::set<std::string>& devices) const {
  size_t n = static_cast<size_t>(bin_hi_ - bin_lo_ + 1);
  std::vector<double> out(events_.empty() ? 0 : n, 0.0);
  const auto& per_device = bin_counts_[static_cast<size_t>(t)];
  for (const auto& dev : devices) {
    auto it = per_device.find(dev);
    if (it == per_device.end()) continue;
    for (const auto& [bin, count] : it->second) {
      out[static_cast<size_t>(bin - bin_lo_)] += count;
    }
  }
  return out;
}

const std::vector<double>& CausalityEngine::global_series(int t) const {
  size_t idx = static_cast<size_t>(t);
  if (!global_series_ready_[idx]) {
    global_series_cache_[idx] = series_for(t, template_devices_[idx]);
    global_series_ready_[idx] = true;
  }
  return global_series_cache_[idx];
}

CausalityEngine::CorrelationOutcome CausalityEngine::correlate(const CandidatePair& pair) const {
  std::vector<double> a, b;
  if (pair.channel.kind == ChannelKind::WithinDevice) {
    std::set<std::string> shared;
    for (const auto& d : pair.cause_devices) {
      if (template_devices_[static_cast<size_t>(pair.effect)].count(d)) shared.insert(d);
    }
    a = series_for(pair.cause, shared);
    b = series_for(pair.effect, shared);
  } else {
    a = series_for(pair.cause, pair.cause_devices);
    b = series_for(pair.effect, pair.effect_devices);
  }

  size_t nonempty = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0 || b[i] > 0) ++nonempty;
  }
  if (nonempty < static_cast<size_t>(cfg_.min_bins)) return {std::nullopt};
  auto rho = stats::spearman(a, b);
  if (!rho) return {std::nullopt};
  return {rho};
}

double CausalityEngine::global_rho(int x, int y) const {
  auto rho = stats::spearman(global_series(x), global_series(y));
  return rho.value_or(0.0);
}

std::vector<int> CausalityEngine::build_confounding_set(int treatment) const {
  std::vector<int> out;
  const ConfoundingKey& key = keys_[static_cast<size_t>(treatment)];
  for (size_t t = 0; t < template_count_; ++t) {
    if (static_cast<int>(t) == treatment) continue;
    if (template_devices_[t].empty()) continue;
    if (!(keys_[t] == key)) continue;
    if (global_rho(treatment, static_cast<int>(t)) > cfg_.alpha) {
      out.push_back(static_cast<int>(t));
    }
  }
  return out;
}

std::optional<int> CausalityEngine::select_untreated(const std::vector<int>& pool,
                                                     uint64_t seed) {
  if (pool.empty()) return std::nullopt;
  std::vector<int> sorted = pool;
  std::sort(sorted.begin(), sorted.end());
  SplitMix64 rng(seed);
  return sorted[static_cast<size_t>(rng.below(sorted.size()))];
}

bool CausalityEngine::trial_success(const CandidatePair& pair, const std::string& device,
                                    double ts, size_t raw_index) const {
  if (pair.channel.kind == ChannelKind::WithinDevice) {
    auto it = by_device_template_.find({device, pair.effect});
    if (it == by_device_template_.end()) return false;
    const auto& idxs = it->second;
    // Effect must follow the trial event in the device's stream order.
    auto pos = std::upper_bound(idxs.begin(), idxs.end(), raw_index,
                                [&](size_t value, size_t idx) {
                                  return value < events_[idx].raw_index;
                                });
    if (pos == idxs.end()) return false;
    return events_[*pos].timestamp - ts <= pair.max_lag;
  }

  const auto* neighbors = [&]() -> const std::vector<std::pair<std::string, double>>* {
    if (pair.channel.kind == ChannelKind::Physical) {
      auto it = phys_neighbors_.find(device);
      return it == phys_neighbors_.end() ? nullptr : &it->second;
    }
    auto pit = overlay_neighbors_.find(pair.channel.protocol);
    if (pit == overlay_neighbors_.end()) return nullptr;
    auto it = pit->second.find(device);
    return it == pit->second.end() ? nullptr : &it->second;
  }();
  if (!neighbors) return false;

  for (const auto& [peer, bound] : *neighbors) {
    auto it = by_device_template_.find({peer, pair.effect});
    if (it == by_device_template_.end()) continue;
    const auto& idxs = it->second;
    auto pos = std::lower_bound(idxs.begin(), idxs.end(), ts, [&](size_t idx, double value) {
      return events_[idx].timestamp < value;
    });
    if (pos == idxs.end()) continue;
    if (events_[*pos].timestamp - ts <= bound) return true;
  }
  return false;
}

CausalityEngine::QedOutcome CausalityEngine::qed_test(const CandidatePair& pair,
                                                      int control) const {
  auto has_channel_exposure = [&](const std::string& device) {
    switch (pair.channel.kind) {
      case ChannelKind::WithinDevice: return true;
      case ChannelKind::Physical: return phys_neighbors_.count(device) > 0;
      case ChannelKind::ProtocolOverlay: {
        auto pit = overlay_neighbors_.find(pair.channel.protocol);
        return pit != overlay_neighbors_.end() && pit->second.count(device) > 0;
      }
    }
    return false;
  };

  auto run_arm = [&](int arm_template, size_t& trials, size_t& successes) {
    const ConfoundingKey& key = keys_[static_cast<size_t>(arm_template)];
    for (const auto& dev : template_devices_[static_cast<size_t>(arm_template)]) {
      if (!has_channel_exposure(dev)) continue;
      auto it = by_device_template_.find({dev, arm_template});
      if (it == by_device_template_.end()) continue;
      for (size_t idx : it->second) {
        const auto& ev = events_[idx];
        // Trials are matched within the template's config epoch when known.
        if (key.config_epoch != "UNKNOWN" &&
            epoch_label(ev.device, ev.timestamp) != key.config_epoch) {
          continue;
        }
        ++trials;
        if (trial_success(pair, ev.device, ev.timestamp, ev.raw_index)) ++successes;
      }
    }
  };

  QedOutcome out;
  size_t s1 = 0, s2 = 0;
  run_arm(pair.cause, out.treated_trials, s1);
  run_arm(control, out.untreated_trials, s2);

  if (out.treated_trials < static_cast<size_t>(cfg_.min_trials) ||
      out.untreated_trials < static_cast<size_t>(cfg_.min_trials)) {
    return out;
  }

  CausalTestResult result;
  result.control_template = control;
  result.treated_trials = out.treated_trials;
  result.untreated_trials = out.untreated_trials;
  result.treated_successes = s1;
  result.untreated_successes = s2;
  result.treated_rate = static_cast<double>(s1) / static_cast<double>(out.treated_trials);
  result.untreated_rate = static_cast<double>(s2) / static_cast<double>(out.untreated_trials);

  // Fisher exact replaces the z approximation when any contingency cell < 5.
  size_t n1 = out.treated_trials, n2 = out.untreated_trials;
  bool small_cell = s1 < 5 || s2 < 5 || (n1 - s1) < 5 || (n2 - s2) < 5;
  result.p_value = small_cell ? stats::fisher_exact_p_value(s1, n1, s2, n2)
                              : stats::two_proportion_p_value(s1, n1, s2, n2);
  out.result = result;
  return out;
}

template <typename ForIndex>
CausalityResult CausalityEngine::run_with(ForIndex&& for_index) const {
  const size_t n = candidates_.size();
  std::vector<PairStage> stages(n);

  // Stage 1: correlation gate. Pure per pair.
  for_index(n, [&](size_t i) {
    auto outcome = correlate(candidates_[i]);
    if (!outcome.rho) {
      stages[i].early_discard = DiscardReason::InsufficientData;
      return;
    }
    stages[i].rho = outcome.rho;
    if (*outcome.rho < cfg_.alpha) {
      stages[i].early_discard = DiscardReason::LowCorrelation;
    }
  });

  // Stage 2: confounding sets per distinct surviving treatment (serial: the
  // set of treatments is small; the underlying series cache is shared).
  std::map<int, std::vector<int>> confounders;
  for (size_t i = 0; i < n; ++i) {
    if (!stages[i].early_discard) confounders[candidates_[i].cause] = {};
  }
  std::vector<int> treatments;
  for (const auto& [t, _] : confounders) treatments.push_back(t);
  // Warm the global series cache serially: lazy init is not thread-safe.
  for (size_t t = 0; t < template_count_; ++t) global_series(static_cast<int>(t));
  std::vector<std::vector<int>> ksets(treatments.size());
  for_index(treatments.size(),
            [&](size_t i) { ksets[i] = build_confounding_set(treatments[i]); });
  for (size_t i = 0; i < treatments.size(); ++i) confounders[treatments[i]] = ksets[i];

  // Stage 3: control selection and the hypothesis test. Pure per pair; the
  // control draw is seeded from the pair identity so parallel order cannot
  // change it.
  for_index(n, [&](size_t i) {
    if (stages[i].early_discard) return;
    const CandidatePair& pair = candidates_[i];
    // The outcome template is a degenerate control for its own pair (its
    // trials measure self-recurrence); prefer any other member of K and fall
    // back to it only when K holds nothing else.
    std::vector<int> pool = confounders.at(pair.cause);
    std::vector<int> without_outcome = pool;
    without_outcome.erase(
        std::remove(without_outcome.begin(), without_outcome.end(), pair.effect),
        without_outcome.end());
    if (!without_outcome.empty()) pool = std::move(without_outcome);
    uint64_t channel_tag = static_cast<uint64_t>(pair.channel.kind) * 4 +
                           static_cast<uint64_t>(pair.channel.protocol);
    auto control = select_untreated(
        pool, mix_seed(cfg_.seed, static_cast<uint64_t>(pair.cause),
                       static_cast<uint64_t>(pair.effect), channel_tag));
    if (!control) {
      stages[i].early_discard = DiscardReason::NoControl;
      return;
    }
    stages[i].control = control;
    stages[i].qed = qed_test(pair, *control);
    if (!stages[i].qed.result) {
      stages[i].early_discard = DiscardReason::Underpowered;
    }
  });

  return assemble(stages);
}

CausalityResult CausalityEngine::assemble(const std::vector<PairStage>& stages) const {
  const size_t n = candidates_.size();

  // Benjamini-Hochberg across every pair that produced a p-value.
  std::vector<size_t> tested;
  std::vector<double> p_values;
  for (size_t i = 0; i < n; ++i) {
    if (!stages[i].early_discard && stages[i].qed.result) {
      tested.push_back(i);
      p_values.push_back(stages[i].qed.result->p_value);
    }
  }
  std::vector<bool> bh = stats::benjamini_hochberg(p_values, cfg_.significance);

  CausalityResult out;
  out.candidate_count = n;
  out.tested_count = tested.size();
  out.matrix.template_count = template_count_;
  out.matrix.dict_hash = dict_hash_;
  out.matrix.template_signatures = signatures_;

  std::vector<bool> accepted(n, false);
  for (size_t k = 0; k < tested.size(); ++k) {
    size_t i = tested[k];
    const CausalTestResult& r = *stages[i].qed.result;
    accepted[i] = bh[k] && r.p_value < cfg_.significance && r.treated_rate > r.untreated_rate;
  }

  for (size_t i = 0; i < n; ++i) {
    const CandidatePair& pair = candidates_[i];
    if (accepted[i]) {
      MatrixEntry entry;
      entry.pair = pair;
      entry.result = *stages[i].qed.result;
      entry.result.correlation = *stages[i].rho;
      entry.result.accepted = true;
      out.matrix.entries.push_back(std::move(entry));
    } else {
      AuditRecord rec;
      rec.pair = pair;
      rec.correlation = stages[i].rho;
      rec.control_template = stages[i].control;
      if (stages[i].early_discard) {
        rec.reason = *stages[i].early_discard;
      } else {
        rec.reason = DiscardReason::NotSignificant;
        rec.p_value = stages[i].qed.result->p_value;
      }
      out.audit.push_back(std::move(rec));
    }
  }
  return out;
}

CausalityResult CausalityEngine::run_serial() const {
  return run_with([](size_t n, auto&& fn) {
    for (size_t i = 0; i < n; ++i) fn(i);
  });
}

CausalityResult CausalityEngine::run_parallel(int threads) const {
  return run_with([threads](size_t n, auto&& fn) {
    parallel_for_index(n, threads, fn);
  });
}

CausalityResult CausalityEngine::run() const {
  if (cfg_.threads == 1) return run_serial();
  return run_parallel(cfg_.threads);
}

const MatrixEntry* CausalityMatrix::find(int cause, int effect, const Channel& channel) const {
  for (const auto& e : entries) {
    if (e.pair.cause == cause && e.pair.effect == effect && e.pair.channel == channel) {
      return &e;
    }
  }
  return nullptr;
}

std::vector<const MatrixEntry*> CausalityMatrix::entries_for_effect(int effect) const {
  std::vector<const MatrixEntry*> out;
  for (const auto& e : entries) {
    if (e.pair.effect == effect) out.push_back(&e);
  }
  return out;
}

bool CausalityMatrix::any_entry(int cause, int effect) const {
  for (const auto& e : entries) {
    if (e.pair.cause == cause && e.pair.effect == effect) return true;
  }
  return false;
}

Json CausalityMatrix::to_json(const PipelineConfig& cfg) const {
  FileMeta meta;
  meta.format = "causality-matrix";
  meta.config_hash = cfg.hash();

  Json entries_json = Json::array();
  for (const auto& e : entries) {
    Json pairs = Json::array();
    for (const auto& dp : e.pair.device_pairs) pairs.push_back(Json::array({dp.a, dp.b}));
    Json ej{{"cause", e.pair.cause},
            {"effect", e.pair.effect},
            {"channel", e.pair.channel.name()},
            {"max_lag", e.pair.max_lag},
            {"support", e.pair.support},
            {"device_pairs", pairs},
            {"correlation", e.result.correlation},
            {"p_value", e.result.p_value},
            {"treated_rate", e.result.treated_rate},
            {"untreated_rate", e.result.untreated_rate},
            {"treated_trials", e.result.treated_trials},
            {"untreated_trials", e.result.untreated_trials},
            {"control_template", e.result.control_template}};
    if (static_cast<size_t>(e.pair.cause) < template_signatures.size()) {
      ej["cause_signature"] = template_signatures[static_cast<size_t>(e.pair.cause)];
      ej["effect_signature"] = template_signatures[static_cast<size_t>(e.pair.effect)];
    }
    entries_json.push_back(std::move(ej));
  }

  return Json{{"meta", meta.to_json()},
              {"dict_hash", dict_hash},
              {"template_count", template_count},
              {"templates", template_signatures},
              {"entries", entries_json}};
}

CausalityMatrix CausalityMatrix::from_json(const Json& j) {
  FileMeta meta = FileMeta::from_json(j.at("meta"));
  check_meta(meta, "causality-matrix", 1);

  CausalityMatrix m;
  m.dict_hash = j.at("dict_hash").get<std::string>();
  m.template_count = j.at("template_count").get<size_t>();
  for (const auto& s : j.value("templates", Json::array())) {
    m.template_signatures.push_back(s.get<std::string>());
  }
  for (const auto& ej : j.at("entries")) {
    MatrixEntry e;
    e.pair.cause = ej.at("cause").get<int>();
    e.pair.effect = ej.at("effect").get<int>();
    e.pair.channel = Channel::parse(ej.at("channel").get<std::string>());
    e.pair.max_lag = ej.at("max_lag").get<double>();
    e.pair.support = ej.value("support", 0);
    for (const auto& dp : ej.value("device_pairs", Json::array())) {
      e.pair.device_pairs.insert(
          DevicePairKey(dp.at(0).get<std::string>(), dp.at(1).get<std::string>()));
    }
    e.result.correlation = ej.value("correlation", 0.0);
    e.result.p_value = ej.value("p_value", 0.0);
    e.result.treated_rate = ej.value("treated_rate", 0.0);
    e.result.untreated_rate = ej.value("untreated_rate", 0.0);
    e.result.treated_trials = ej.value("treated_trials", size_t{0});
    e.result.untreated_trials = ej.value("untreated_trials", size_t{0});
    e.result.control_template = ej.value("control_template", -1);
    e.result.accepted = true;
    m.entries.push_back(std::move(e));
  }
  return m;
}

CausalityMatrix CausalityMatrix::load(const std::string& path) {
  return from_json(read_json_file(path));
}

void CausalityMatrix::save(const std::string& path, const PipelineConfig& cfg) const {
  write_json_file(path, to_json(cfg));
}

void save_audit(const std::string& path, const std::vector<AuditRecord>& audit,
                const PipelineConfig& cfg) {
  FileMeta meta;
  meta.format = "causality-audit";
  meta.config_hash = cfg.hash();

  std::ostringstream out;
  out << Json{{"meta", meta.to_json()}, {"discarded", audit.size()}}.dump() << "\n";
  for (const auto& rec : audit) {
    Json j{{"cause", rec.pair.cause},
           {"effect", rec.pair.effect},
           {"channel", rec.pair.channel.name()},
           {"support", rec.pair.support},
           {"reason", discard_reason_name(rec.reason)}};
    if (rec.correlation) j["correlation"] = *rec.correlation;
    if (rec.p_value) j["p_value"] = *rec.p_value;
    if (rec.control_template) j["control_template"] = *rec.control_template;
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

CausalityResult build_causality_matrix(const EventStream& stream, const DomainModel& model,
                                       const PipelineConfig& cfg) {
  CausalityEngine engine(stream.events, model, cfg, stream.template_count);
  engine.set_dict(stream.dict_hash, stream.template_signatures);
  return engine.run();
}

} // namespace causelog
