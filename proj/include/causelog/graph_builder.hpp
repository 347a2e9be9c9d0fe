#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causelog/causality.hpp"
#include "causelog/meta.hpp"
#include "causelog/templates.hpp"

namespace causelog {

enum class WindowEmission { Tumbling, GapBased };

struct WindowConfig {
  double delta = 300.0; // tumbling width, seconds
  WindowEmission emission = WindowEmission::GapBased;
  double gap = 30.0; // silence that closes a gap-based window

  static WindowConfig from_pipeline(const PipelineConfig& cfg);
};

struct EventWindow {
  double start = 0.0;
  double end = 0.0; // [start, end)
  std::vector<TemplateEvent> events;
};

// One pass over a time-sorted stream. Every event lands in exactly one
// window.
std::vector<EventWindow> window_stream(const std::vector<TemplateEvent>& events,
                                       const WindowConfig& cfg);

// Incremental windowing with the same output as the batch form regardless of
// how the stream is chunked.
class WindowedStream {
public:
  explicit WindowedStream(const WindowConfig& cfg) : cfg_(cfg) {}

  void feed(const TemplateEvent& event);
  std::vector<EventWindow> take_ready();
  std::vector<EventWindow> finish();

private:
  WindowConfig cfg_;
  std::vector<EventWindow> ready_;
  std::vector<TemplateEvent> pending_;
  std::optional<int64_t> current_bucket; // tumbling
  std::optional<double> last_ts_;        // gap-based
  void close_pending();
};

struct PgVertex {
  int template_id = 0;
  std::set<std::string> devices;
  size_t occurrence_count = 0;
  double first_ts = 0.0;
  double last_ts = 0.0;
};

struct PgEdge {
  int from = 0; // vertex index
  int to = 0;
  bool self_loop = false;
  bool ambiguous = false;
  std::set<std::string> channels;
};

struct ProblemGraph {
  std::vector<PgVertex> vertices;
  std::vector<PgEdge> edges;
  std::vector<int> roots; // vertex indexes, in-degree 0 ignoring self-loops
  bool cyclic = false;    // roots fell back to earliest vertex of a cycle
  double window_start = 0.0;
  double window_end = 0.0;

  size_t message_count() const;
  double duration() const { return vertices.empty() ? 0.0 : last_ts() - first_ts(); }
  double first_ts() const;
  double last_ts() const;
  std::set<std::string> device_union() const;
};

// Pre-merge graph: one vertex per event. Exposed so merge_duplicates can be
// tested on its own.
struct EventGraph {
  std::vector<TemplateEvent> events;
  struct Edge {
    size_t from, to;
    double lag;
    bool ambiguous = false;
    std::string channel;
  };
  std::vector<Edge> edges;
  double window_start = 0.0;
  double window_end = 0.0;
};

EventGraph connect_window(const EventWindow& window, const CausalityMatrix& matrix);

// Collapses same-template vertices, dedupes parallel edges, turns edges
// between collapsed twins into self-loops, then splits connected components
// into separate problem graphs.
std::vector<ProblemGraph> merge_duplicates(const EventGraph& graph);

// connect + merge + component split + roots.
std::vector<ProblemGraph> build_pg(const EventWindow& window, const CausalityMatrix& matrix);

// Root vertexes: in-degree 0 ignoring self-loops; on non-self cycles, the
// earliest-first-timestamp vertex of each source cycle, with `cyclic` set.
void assign_roots(ProblemGraph& pg);

// Serial reference: windows processed one after another.
std::vector<ProblemGraph> build_pgs_serial(const std::vector<EventWindow>& windows,
                                           const CausalityMatrix& matrix);

// OpenMP kernel over independent windows; output order matches the serial
// reference.
std::vector<ProblemGraph> build_pgs_parallel(const std::vector<EventWindow>& windows,
                                             const CausalityMatrix& matrix, int threads);

// DOT rendering, one graph per file. Vertices are labeled with the template
// signature and colored by stack layer.
std::string pg_to_dot(const ProblemGraph& pg, const TemplateDictionary& dict, size_t pg_id);

Json pg_to_json(const ProblemGraph& pg, const TemplateDictionary& dict, size_t pg_id);
ProblemGraph pg_from_json(const Json& j);

void save_pg_stream(const std::string& path, const std::vector<ProblemGraph>& pgs,
                    const TemplateDictionary& dict, const PipelineConfig& cfg);

// The stream is self-describing: the header carries the template table so
// downstream reporting needs no separate dictionary file.
struct PgStream {
  FileMeta meta;
  std::string dict_hash;
  TemplateDictionary dict;
  std::vector<ProblemGraph> pgs;
};

PgStream load_pg_stream(const std::string& path);

} // namespace causelog
