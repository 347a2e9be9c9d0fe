#include "causelog/graph_builder.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "causelog/errors.hpp"
#include "causelog/exec.hpp"

namespace causelog {

WindowConfig WindowConfig::from_pipeline(const PipelineConfig& cfg) {
  WindowConfig w;
  w.delta = cfg.window_delta_seconds;
  w.gap = cfg.window_gap_seconds;
  w.emission = cfg.window_emission == "TUMBLING" ? WindowEmission::Tumbling
                                                 : WindowEmission::GapBased;
  return w;
}

void WindowedStream::close_pending() {
  if (pending_.empty()) return;
  EventWindow w;
  if (cfg_.emission == WindowEmission::Tumbling) {
    w.start = static_cast<double>(*current_bucket) * cfg_.delta;
    w.end = w.start + cfg_.delta;
  } else {
    w.start = pending_.front().timestamp;
    w.end = pending_.back().timestamp + cfg_.gap;
  }
  w.events = std::move(pending_);
  pending_.clear();
  ready_.push_back(std::move(w));
}

void WindowedStream::feed(const TemplateEvent& event) {
  if (cfg_.emission == WindowEmission::Tumbling) {
    int64_t bucket = static_cast<int64_t>(std::floor(event.timestamp / cfg_.delta));
    if (current_bucket && bucket != *current_bucket) close_pending();
    current_bucket = bucket;
  } else {
    // A window closes once `gap` seconds pass with no event.
    if (last_ts_ && event.timestamp - *last_ts_ >= cfg_.gap) close_pending();
    last_ts_ = event.timestamp;
  }
  pending_.push_back(event);
}

std::vector<EventWindow> WindowedStream::take_ready() {
  std::vector<EventWindow> out;
  out.swap(ready_);
  return out;
}

std::vector<EventWindow> WindowedStream::finish() {
  close_pending();
  return take_ready();
}

std::vector<EventWindow> window_stream(const std::vector<TemplateEvent>& events,
                                       const WindowConfig& cfg) {
  WindowedStream stream(cfg);
  std::vector<EventWindow> out;
  for (const auto& ev : events) {
    stream.feed(ev);
    auto ready = stream.take_ready();
    std::move(ready.begin(), ready.end(), std::back_inserter(out));
  }
  auto tail = stream.finish();
  std::move(tail.begin(), tail.end(), std::back_inserter(out));
  return out;
}

EventGraph connect_window(const EventWindow& window, const CausalityMatrix& matrix) {
  EventGraph g;
  g.events = window.events;
  g.window_start = window.start;
  g.window_end = window.end;

  std::stable_sort(g.events.begin(), g.events.end(),
                   [](const TemplateEvent& a, const TemplateEvent& b) {
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     return a.raw_index < b.raw_index;
                   });

  for (const auto& ev : g.events) {
    if (ev.template_id < 0 ||
        static_cast<size_t>(ev.template_id) >= matrix.template_count) {
      throw Error(ErrorCode::UnknownTemplate,
                  "window event references template " + std::to_string(ev.template_id) +
                      " absent from the matrix dictionary");
    }
  }

  // Events of one template, in stream order.
  std::map<int, std::vector<size_t>> by_template;
  for (size_t i = 0; i < g.events.size(); ++i) {
    by_template[g.events[i].template_id].push_back(i);
  }

  auto channel_ok = [&](const MatrixEntry& entry, const TemplateEvent& cause,
                        const TemplateEvent& effect) {
    switch (entry.pair.channel.kind) {
      case ChannelKind::WithinDevice:
        return cause.device == effect.device;
      case ChannelKind::Physical:
      case ChannelKind::ProtocolOverlay:
        return cause.device != effect.device &&
               entry.pair.device_pairs.count(DevicePairKey(cause.device, effect.device)) > 0;
    }
    return false;
  };

  // Nearest preceding cause per effect event, which keeps bursty windows from
  // exploding quadratically.
  for (size_t y = 0; y < g.events.size(); ++y) {
    const TemplateEvent& effect_ev = g.events[y];
    for (const MatrixEntry* entry : matrix.entries_for_effect(effect_ev.template_id)) {
      auto it = by_template.find(entry->pair.cause);
      if (it == by_template.end()) continue;
      const auto& causes = it->second; // stream order, so timestamp-sorted
      auto first = std::lower_bound(causes.begin(), causes.end(),
                                    effect_ev.timestamp - entry->pair.max_lag,
                                    [&](size_t idx, double v) {
                                      return g.events[idx].timestamp < v;
                                    });
      std::optional<size_t> best;
      for (auto ci = first; ci != causes.end(); ++ci) {
        size_t x = *ci;
        if (x == y) continue;
        const TemplateEvent& cause_ev = g.events[x];
        bool before = cause_ev.timestamp < effect_ev.timestamp ||
                      (cause_ev.timestamp == effect_ev.timestamp &&
                       cause_ev.raw_index < effect_ev.raw_index);
        if (!before) break; // stream order: no later cause can precede
        if (!channel_ok(*entry, cause_ev, effect_ev)) continue;
        best = x;
      }
      if (best) {
        g.edges.push_back({*best, y, effect_ev.timestamp - g.events[*best].timestamp, false,
                           entry->pair.channel.name()});
      }
    }
  }

  // When both M_ij and M_ji produced edges in this window, keep the
  // direction whose contributing event pair has the smaller lag; an exact
  // tie keeps both directions, marked ambiguous.
  std::map<std::pair<int, int>, std::vector<size_t>> by_template_pair;
  for (size_t i = 0; i < g.edges.size(); ++i) {
    int tu = g.events[g.edges[i].from].template_id;
    int tv = g.events[g.edges[i].to].template_id;
    if (tu == tv) continue; // self-template chains have no direction conflict
    by_template_pair[{std::min(tu, tv), std::max(tu, tv)}].push_back(i);
  }
  std::set<size_t> drop;
  for (const auto& [key, idxs] : by_template_pair) {
    double min_fwd = -1, min_bwd = -1;
    for (size_t i : idxs) {
      bool fwd = g.events[g.edges[i].from].template_id == key.first;
      double& slot = fwd ? min_fwd : min_bwd;
      if (slot < 0 || g.edges[i].lag < slot) slot = g.edges[i].lag;
    }
    if (min_fwd < 0 || min_bwd < 0) continue; // one direction only
    for (size_t i : idxs) {
      bool fwd = g.events[g.edges[i].from].template_id == key.first;
      if (min_fwd < min_bwd) {
        if (!fwd) drop.insert(i);
      } else if (min_bwd < min_fwd) {
        if (fwd) drop.insert(i);
      } else {
        g.edges[i].ambiguous = true;
      }
    }
  }
  if (!drop.empty()) {
    std::vector<EventGraph::Edge> kept;
    for (size_t i = 0; i < g.edges.size(); ++i) {
      if (!drop.count(i)) kept.push_back(g.edges[i]);
    }
    g.edges = std::move(kept);
  }
  return g;
}

std::vector<ProblemGraph> merge_duplicates(const EventGraph& graph) {
  // Collapse vertices by template id.
  std::map<int, int> vertex_of_template;
  std::vector<PgVertex> vertices;
  std::vector<int> event_vertex(graph.events.size());
  for (size_t i = 0; i < graph.events.size(); ++i) {
    const auto& ev = graph.events[i];
    auto it = vertex_of_template.find(ev.template_id);
    if (it == vertex_of_template.end()) {
      PgVertex v;
      v.template_id = ev.template_id;
      v.first_ts = ev.timestamp;
      v.last_ts = ev.timestamp;
      it = vertex_of_template.emplace(ev.template_id, static_cast<int>(vertices.size())).first;
      vertices.push_back(std::move(v));
    }
    PgVertex& v = vertices[static_cast<size_t>(it->second)];
    v.devices.insert(ev.device);
    v.occurrence_count += 1;
    v.first_ts = std::min(v.first_ts, ev.timestamp);
    v.last_ts = std::max(v.last_ts, ev.timestamp);
    event_vertex[i] = it->second;
  }

  // Dedupe edges at the merged level; edges between collapsed twins become
  // self-loops.
  std::map<std::pair<int, int>, PgEdge> merged_edges;
  for (const auto& e : graph.edges) {
    int u = event_vertex[e.from];
    int v = event_vertex[e.to];
    auto key = std::make_pair(u, v);
    auto it = merged_edges.find(key);
    if (it == merged_edges.end()) {
      PgEdge edge;
      edge.from = u;
      edge.to = v;
      edge.self_loop = u == v;
      it = merged_edges.emplace(key, std::move(edge)).first;
    }
    it->second.ambiguous |= e.ambiguous;
    it->second.channels.insert(e.channel);
  }

  // Component split (self-loops connect nothing).
  std::vector<int> parent(vertices.size());
  for (size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  for (const auto& [key, e] : merged_edges) {
    if (e.self_loop) continue;
    parent[static_cast<size_t>(find(e.from))] = find(e.to);
  }

  std::map<int, std::vector<int>> components; // root -> vertex indexes
  for (size_t i = 0; i < vertices.size(); ++i) {
    components[find(static_cast<int>(i))].push_back(static_cast<int>(i));
  }

  std::vector<ProblemGraph> out;
  for (const auto& [root, members] : components) {
    ProblemGraph pg;
    pg.window_start = graph.window_start;
    pg.window_end = graph.window_end;
    std::map<int, int> remap;
    for (int idx : members) {
      remap[idx] = static_cast<int>(pg.vertices.size());
      pg.vertices.push_back(vertices[static_cast<size_t>(idx)]);
    }
    for (const auto& [key, e] : merged_edges) {
      auto fu = remap.find(e.from);
      if (fu == remap.end()) continue;
      PgEdge edge = e;
      edge.from = fu->second;
      edge.to = remap.at(e.to);
      pg.edges.push_back(std::move(edge));
    }
    assign_roots(pg);
    out.push_back(std::move(pg));
  }
  // Components come out keyed by union-find roots; order them by their
  // earliest vertex first-timestamp, then smallest template id.
  std::sort(out.begin(), out.end(), [](const ProblemGraph& a, const ProblemGraph& b) {
    double fa = a.first_ts(), fb = b.first_ts();
    if (fa != fb) return fa < fb;
    int ta = a.vertices.empty() ? 0 : a.vertices.front().template_id;
    int tb = b.vertices.empty() ? 0 : b.vertices.front().template_id;
    return ta < tb;
  });
  return out;
}

void assign_roots(ProblemGraph& pg) {
  const size_t n = pg.vertices.size();
  pg.roots.clear();
  pg.cyclic = false;
  if (n == 0) return;

  // Tarjan SCCs on the graph without self-loops; source components of the
  // condensation yield the roots.
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : pg.edges) {
    if (!e.self_loop) adj[static_cast<size_t>(e.from)].push_back(e.to);
  }

  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0, comp_count = 0;

  std::function<void(int)> strongconnect = [&](int v) {
    index[static_cast<size_t>(v)] = low[static_cast<size_t>(v)] = next_index++;
    stack.push_back(v);
    on_stack[static_cast<size_t>(v)] = true;
    for (int w : adj[static_cast<size_t>(v)]) {
      if (index[static_cast<size_t>(w)] < 0) {
        strongconnect(w);
        low[static_cast<size_t>(v)] = std::min(low[static_cast<size_t>(v)],
                                               low[static_cast<size_t>(w)]);
      } else if (on_stack[static_cast<size_t>(w)]) {
        low[static_cast<size_t>(v)] = std::min(low[static_cast<size_t>(v)],
                                               index[static_cast<size_t>(w)]);
      }
    }
    if (low[static_cast<size_t>(v)] == index[static_cast<size_t>(v)]) {
      for (;;) {
        int w = stack.back();
        stack.pop_back();
        on_stack[static_cast<size_t>(w)] = false;
        comp[static_cast<size_t>(w)] = comp_count;
        if (w == v) break;
      }
      ++comp_count;
    }
  };
  for (size_t v = 0; v < n; ++v) {
    if (index[v] < 0) strongconnect(static_cast<int>(v));
  }

  std::vector<bool> has_incoming(static_cast<size_t>(comp_count), false);
  std::vector<size_t> comp_size(static_cast<size_t>(comp_count), 0);
  std::vector<bool> comp_cycle(static_cast<size_t>(comp_count), false);
  for (size_t v = 0; v < n; ++v) comp_size[static_cast<size_t>(comp[v])]++;
  for (size_t v = 0; v < n; ++v) {
    for (int w : adj[v]) {
      if (comp[v] != comp[static_cast<size_t>(w)]) {
        has_incoming[static_cast<size_t>(comp[static_cast<size_t>(w)])] = true;
      } else {
        comp_cycle[static_cast<size_t>(comp[v])] = true; // intra-component edge
      }
    }
  }

  for (int c = 0; c < comp_count; ++c) {
    if (has_incoming[static_cast<size_t>(c)]) continue;
    if (comp_size[static_cast<size_t>(c)] == 1 && !comp_cycle[static_cast<size_t>(c)]) {
      for (size_t v = 0; v < n; ++v) {
        if (comp[v] == c) pg.roots.push_back(static_cast<int>(v));
      }
      continue;
    }
    // A source component that is a real cycle: fall back to its earliest
    // vertex and flag the graph.
    pg.cyclic = true;
    int best = -1;
    for (size_t v = 0; v < n; ++v) {
      if (comp[v] != c) continue;
      if (best < 0 || pg.vertices[v].first_ts < pg.vertices[static_cast<size_t>(best)].first_ts ||
          (pg.vertices[v].first_ts == pg.vertices[static_cast<size_t>(best)].first_ts &&
           pg.vertices[v].template_id < pg.vertices[static_cast<size_t>(best)].template_id)) {
        best = static_cast<int>(v);
      }
    }
    pg.roots.push_back(best);
  }
  std::sort(pg.roots.begin(), pg.roots.end());
}

std::vector<ProblemGraph> build_pg(const EventWindow& window, const CausalityMatrix& matrix) {
  return merge_duplicates(connect_window(window, matrix));
}

std::vector<ProblemGraph> build_pgs_serial(const std::vector<EventWindow>& windows,
                                           const CausalityMatrix& matrix) {
  std::vector<ProblemGraph> out;
  for (const auto& w : windows) {
    auto pgs = build_pg(w, matrix);
    std::move(pgs.begin(), pgs.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<ProblemGraph> build_pgs_parallel(const std::vector<EventWindow>& windows,
                                             const CausalityMatrix& matrix, int threads) {
  std::vector<std::vector<ProblemGraph>> per_window(windows.size());
  parallel_for_index(windows.size(), threads,
                     [&](size_t i) { per_window[i] = build_pg(windows[i], matrix); });
  std::vector<ProblemGraph> out;
  for (auto& pgs : per_window) {
    std::move(pgs.begin(), pgs.end(), std::back_inserter(out));
  }
  return out;
}

size_t ProblemGraph::message_count() const {
  size_t n = 0;
  for (const auto& v : vertices) n += v.occurrence_count;
  return n;
}

double ProblemGraph::first_ts() const {
  double t = vertices.empty() ? 0.0 : vertices.front().first_ts;
  for (const auto& v : vertices) t = std::min(t, v.first_ts);
  return t;
}

double ProblemGraph::last_ts() const {
  double t = vertices.empty() ? 0.0 : vertices.front().last_ts;
  for (const auto& v : vertices) t = std::max(t, v.last_ts);
  return t;
}

std::set<std::string> ProblemGraph::device_union() const {
  std::set<std::string> out;
  for (const auto& v : vertices) out.insert(v.devices.begin(), v.devices.end());
  return out;
}

namespace {

const char* layer_color(StackLayer layer) {
  switch (layer) {
    case StackLayer::PHY: return "gray80";
    case StackLayer::L2: return "lightblue";
    case StackLayer::L3: return "palegreen";
    case StackLayer::L4: return "orange";
    case StackLayer::HW: return "lightcoral";
    case StackLayer::OTHER: return "white";
  }
  return "white";
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

} // namespace

std::string pg_to_dot(const ProblemGraph& pg, const TemplateDictionary& dict, size_t pg_id) {
  std::ostringstream out;
  out << "digraph pg" << pg_id << " {\n";
  out << "  rankdir=TB;\n";
  for (size_t i = 0; i < pg.vertices.size(); ++i) {
    const PgVertex& v = pg.vertices[i];
    const Template& t = dict.at(v.template_id);
    out << "  v" << i << " [label=\"" << dot_escape(t.signature_text()) << "\\nx"
        << v.occurrence_count << "\", shape=box, style=filled, fillcolor="
        << layer_color(t.stack_layer) << "];\n";
  }
  for (const auto& e : pg.edges) {
    out << "  v" << e.from << " -> v" << e.to;
    if (e.ambiguous) out << " [style=dashed]";
    out << ";\n";
  }
  for (int r : pg.roots) {
    out << "  v" << r << " [penwidth=2];\n";
  }
  out << "}\n";
  return out.str();
}

Json pg_to_json(const ProblemGraph& pg, const TemplateDictionary& dict, size_t pg_id) {
  Json verts = Json::array();
  for (const auto& v : pg.vertices) {
    verts.push_back(Json{{"template_id", v.template_id},
                         {"signature", dict.at(v.template_id).signature_text()},
                         {"layer", layer_name(dict.at(v.template_id).stack_layer)},
                         {"devices", v.devices},
                         {"count", v.occurrence_count},
                         {"first_ts", v.first_ts},
                         {"last_ts", v.last_ts}});
  }
  Json edges = Json::array();
  for (const auto& e : pg.edges) {
    edges.push_back(Json{{"from", e.from},
                         {"to", e.to},
                         {"self_loop", e.self_loop},
                         {"ambiguous", e.ambiguous},
                         {"channels", e.channels}});
  }
  return Json{{"id", pg_id},
              {"window", Json::array({pg.window_start, pg.window_end})},
              {"vertices", verts},
              {"edges", edges},
              {"roots", pg.roots},
              {"cyclic", pg.cyclic}};
}

ProblemGraph pg_from_json(const Json& j) {
  ProblemGraph pg;
  pg.window_start = j.at("window").at(0).get<double>();
  pg.window_end = j.at("window").at(1).get<double>();
  for (const auto& vj : j.at("vertices")) {
    PgVertex v;
    v.template_id = vj.at("template_id").get<int>();
    for (const auto& d : vj.at("devices")) v.devices.insert(d.get<std::string>());
    v.occurrence_count = vj.at("count").get<size_t>();
    v.first_ts = vj.at("first_ts").get<double>();
    v.last_ts = vj.at("last_ts").get<double>();
    pg.vertices.push_back(std::move(v));
  }
  for (const auto& ej : j.at("edges")) {
    PgEdge e;
    e.from = ej.at("from").get<int>();
    e.to = ej.at("to").get<int>();
    e.self_loop = ej.at("self_loop").get<bool>();
    e.ambiguous = ej.at("ambiguous").get<bool>();
    for (const auto& c : ej.at("channels")) e.channels.insert(c.get<std::string>());
    pg.edges.push_back(std::move(e));
  }
  for (const auto& r : j.at("roots")) pg.roots.push_back(r.get<int>());
  pg.cyclic = j.at("cyclic").get<bool>();
  return pg;
}

void save_pg_stream(const std::string& path, const std::vector<ProblemGraph>& pgs,
                    const TemplateDictionary& dict, const PipelineConfig& cfg) {
  FileMeta meta;
  meta.format = "problem-graphs";
  meta.config_hash = cfg.hash();

  Json tpl = Json::array();
  for (const auto& t : dict.templates()) {
    tpl.push_back(Json{{"signature", t.signature_text()}, {"layer", layer_name(t.stack_layer)}});
  }

  std::ostringstream out;
  out << Json{{"meta", meta.to_json()},
              {"dict_hash", dict.dict_hash()},
              {"count", pgs.size()},
              {"templates", tpl}}
             .dump()
      << "\n";
  for (size_t i = 0; i < pgs.size(); ++i) {
    out << pg_to_json(pgs[i], dict, i).dump() << "\n";
  }
  write_text_file(path, out.str());
}

PgStream load_pg_stream(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty PG stream " + path);
  Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded()) throw Error(ErrorCode::ParseError, "bad PG stream header");

  PgStream stream;
  stream.meta = FileMeta::from_json(header.at("meta"));
  check_meta(stream.meta, "problem-graphs", 1);
  stream.dict_hash = header.value("dict_hash", "");
  std::vector<std::pair<std::string, std::string>> sigs;
  for (const auto& tj : header.value("templates", Json::array())) {
    sigs.emplace_back(tj.at("signature").get<std::string>(), tj.at("layer").get<std::string>());
  }
  stream.dict = TemplateDictionary::from_signatures(sigs);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ParseError, "bad PG stream line");
    stream.pgs.push_back(pg_from_json(j));
  }
  return stream;
}

} // namespace causelog
