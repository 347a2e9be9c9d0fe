#include "causelog/templates.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "causelog/errors.hpp"
#include "causelog/exec.hpp"
#include "causelog/hashing.hpp"

namespace causelog {
namespace {

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

SlotKind slot_kind_for(TokenKind kind) {
  switch (kind) {
    case TokenKind::Num: return SlotKind::Num;
    case TokenKind::Ip: return SlotKind::Ip;
    case TokenKind::Mac: return SlotKind::Mac;
    case TokenKind::Iface: return SlotKind::Iface;
    case TokenKind::Word: return SlotKind::Constant;
  }
  return SlotKind::Constant;
}

const char* slot_marker(SlotKind kind) {
  switch (kind) {
    case SlotKind::Any: return "<*>";
    case SlotKind::Num: return "<NUM>";
    case SlotKind::Ip: return "<IP>";
    case SlotKind::Mac: return "<MAC>";
    case SlotKind::Iface: return "<IFACE>";
    case SlotKind::Constant: return "";
  }
  return "";
}

SlotKind slot_kind_from_marker(const std::string& s) {
  if (s == "<*>") return SlotKind::Any;
  if (s == "<NUM>") return SlotKind::Num;
  if (s == "<IP>") return SlotKind::Ip;
  if (s == "<MAC>") return SlotKind::Mac;
  if (s == "<IFACE>") return SlotKind::Iface;
  return SlotKind::Constant;
}

uint64_t constant_multiset_key(const std::vector<std::string>& constants) {
  std::vector<std::string> sorted = constants;
  std::sort(sorted.begin(), sorted.end());
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& s : sorted) {
    h = fnv1a64(s, h);
    h = fnv1a64("\x1f", h);
  }
  return h;
}

} // namespace

const char* layer_name(StackLayer layer) {
  switch (layer) {
    case StackLayer::PHY: return "PHY";
    case StackLayer::L2: return "L2";
    case StackLayer::L3: return "L3";
    case StackLayer::L4: return "L4";
    case StackLayer::HW: return "HW";
    case StackLayer::OTHER: return "OTHER";
  }
  return "OTHER";
}

StackLayer layer_from_name(const std::string& name) {
  if (name == "PHY") return StackLayer::PHY;
  if (name == "L2") return StackLayer::L2;
  if (name == "L3") return StackLayer::L3;
  if (name == "L4") return StackLayer::L4;
  if (name == "HW") return StackLayer::HW;
  if (name == "OTHER") return StackLayer::OTHER;
  throw Error(ErrorCode::ParseError, "unknown stack layer '" + name + "'");
}

LayerMap LayerMap::load(const std::string& path) {
  return from_text(read_text_file(path));
}

LayerMap LayerMap::from_text(const std::string& text) {
  LayerMap map;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "version") {
      ls >> map.version_;
      continue;
    }
    StackLayer layer = layer_from_name(first);
    std::string kw;
    bool any = false;
    while (ls >> kw) {
      map.rules_.push_back({layer, to_lower(kw)});
      any = true;
    }
    if (!any) {
      throw Error(ErrorCode::ParseError,
                  "layer map line " + std::to_string(lineno) + " has no keywords");
    }
  }
  return map;
}

std::optional<std::pair<StackLayer, std::string>> LayerMap::match(
    const std::vector<std::string>& constant_tokens) const {
  std::vector<std::string> lowered;
  lowered.reserve(constant_tokens.size());
  for (const auto& t : constant_tokens) lowered.push_back(to_lower(t));
  for (const auto& rule : rules_) {
    for (const auto& tok : lowered) {
      if (tok.find(rule.keyword) != std::string::npos) {
        return std::make_pair(rule.layer, rule.keyword);
      }
    }
  }
  return std::nullopt;
}

StackLayer LayerMap::classify(const std::vector<std::string>& constant_tokens) const {
  auto m = match(constant_tokens);
  return m ? m->first : StackLayer::OTHER;
}

std::vector<std::string> Template::constant_tokens() const {
  std::vector<std::string> out;
  for (const auto& slot : signature) {
    if (slot.kind == SlotKind::Constant) out.push_back(slot.text);
  }
  return out;
}

std::string Template::signature_text() const {
  std::string out;
  for (size_t i = 0; i < signature.size(); ++i) {
    if (i) out.push_back(' ');
    out += signature[i].kind == SlotKind::Constant ? signature[i].text
                                                   : slot_marker(signature[i].kind);
  }
  return out;
}

size_t Template::constant_count() const {
  size_t n = 0;
  for (const auto& slot : signature) n += slot.kind == SlotKind::Constant;
  return n;
}

namespace {

// Extraction-time cluster: per position, the agreed masked token or a
// variant marker once disagreement is seen.
struct Cluster {
  std::vector<std::string> fixed;  // masked token text; empty when variant
  std::vector<bool> variant;
  std::vector<SlotKind> mask_kind; // kind of the agreed mask, Constant = word
  size_t lines = 0;

  size_t constant_positions() const {
    size_t n = 0;
    for (size_t i = 0; i < fixed.size(); ++i) {
      if (!variant[i] && mask_kind[i] == SlotKind::Constant) ++n;
    }
    return n;
  }
};

} // namespace

TemplateDictionary extract_templates(const std::vector<SyslogRecord>& corpus,
                                     const PipelineConfig& cfg, const LayerMap& layers,
                                     ExtractStats* stats) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "no syslog records to extract from");

  std::map<size_t, std::vector<size_t>> buckets; // token count -> cluster ids
  std::vector<Cluster> clusters;
  std::vector<size_t> creation_order;

  ExtractStats local;
  for (const auto& rec : corpus) {
    local.lines_in++;
    std::vector<Token> tokens;
    try {
      tokens = tokenize_line(rec.message);
    } catch (const Error&) {
      local.dropped_no_constant++;
      continue;
    }

    std::vector<std::string> masked = masked_tokens(tokens);
    bool has_word = false;
    for (const auto& t : tokens) has_word |= t.kind == TokenKind::Word;

    auto& bucket = buckets[tokens.size()];
    size_t best = SIZE_MAX;
    double best_agreement = -1.0;
    for (size_t cid : bucket) {
      const Cluster& c = clusters[cid];
      size_t agree = 0;
      for (size_t p = 0; p < masked.size(); ++p) {
        if (!c.variant[p] && c.fixed[p] == masked[p]) ++agree;
      }
      double ratio = static_cast<double>(agree) / static_cast<double>(masked.size());
      if (ratio >= cfg.merge_threshold && ratio > best_agreement) {
        // Joining must not erase the cluster's last constant token.
        size_t surviving = 0;
        for (size_t p = 0; p < masked.size(); ++p) {
          if (!c.variant[p] && c.mask_kind[p] == SlotKind::Constant && c.fixed[p] == masked[p]) {
            ++surviving;
          }
        }
        if (surviving == 0) continue;
        best_agreement = ratio;
        best = cid;
      }
    }

    if (best != SIZE_MAX) {
      Cluster& c = clusters[best];
      for (size_t p = 0; p < masked.size(); ++p) {
        if (!c.variant[p] && c.fixed[p] != masked[p]) {
          c.variant[p] = true;
          c.fixed[p].clear();
          c.mask_kind[p] = SlotKind::Any;
        }
      }
      c.lines++;
      local.lines_used++;
      continue;
    }

    if (!has_word) {
      // A fully masked line would yield a template without constant tokens.
      local.dropped_no_constant++;
      continue;
    }
    Cluster c;
    c.fixed = masked;
    c.variant.assign(masked.size(), false);
    c.mask_kind.resize(masked.size());
    for (size_t p = 0; p < masked.size(); ++p) {
      c.mask_kind[p] = slot_kind_for(tokens[p].kind);
    }
    c.lines = 1;
    local.lines_used++;
    clusters.push_back(std::move(c));
    bucket.push_back(clusters.size() - 1);
    creation_order.push_back(clusters.size() - 1);
  }

  TemplateDictionary dict;
  dict.merge_threshold_ = cfg.merge_threshold;
  for (size_t cid : creation_order) {
    const Cluster& c = clusters[cid];
    Template t;
    t.id = static_cast<int>(dict.templates_.size());
    t.signature.reserve(c.fixed.size());
    for (size_t p = 0; p < c.fixed.size(); ++p) {
      Slot slot;
      if (c.variant[p]) {
        slot.kind = SlotKind::Any;
      } else if (c.mask_kind[p] == SlotKind::Constant) {
        slot.kind = SlotKind::Constant;
        slot.text = c.fixed[p];
      } else {
        slot.kind = c.mask_kind[p];
      }
      t.signature.push_back(std::move(slot));
    }
    t.stack_layer = layers.classify(t.constant_tokens());
    dict.templates_.push_back(std::move(t));
  }
  dict.rebuild_index();

  if (stats) *stats = local;
  return dict;
}

void TemplateDictionary::rebuild_index() {
  token_index_.clear();
  by_token_count_.clear();
  for (const auto& t : templates_) {
    token_index_[constant_multiset_key(t.constant_tokens())].push_back(t.id);
    by_token_count_[t.signature.size()].push_back(t.id);
  }
}

std::optional<int> TemplateDictionary::match_tokens(const std::vector<Token>& tokens) const {
  auto it = by_token_count_.find(tokens.size());
  if (it == by_token_count_.end()) return std::nullopt;

  int best = -1;
  size_t best_constants = 0;
  for (int id : it->second) {
    const Template& t = templates_[static_cast<size_t>(id)];
    bool ok = true;
    for (size_t p = 0; p < tokens.size() && ok; ++p) {
      const Slot& slot = t.signature[p];
      switch (slot.kind) {
        case SlotKind::Constant:
          ok = tokens[p].kind == TokenKind::Word && tokens[p].text == slot.text;
          break;
        case SlotKind::Any:
          break;
        case SlotKind::Num: ok = tokens[p].kind == TokenKind::Num; break;
        case SlotKind::Ip: ok = tokens[p].kind == TokenKind::Ip; break;
        case SlotKind::Mac: ok = tokens[p].kind == TokenKind::Mac; break;
        case SlotKind::Iface: ok = tokens[p].kind == TokenKind::Iface; break;
      }
    }
    if (!ok) continue;
    size_t constants = t.constant_count();
    if (best < 0 || constants > best_constants) {
      best = id;
      best_constants = constants;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

std::optional<TemplateEvent> TemplateDictionary::match(const SyslogRecord& record,
                                                       size_t raw_index) const {
  std::vector<Token> tokens;
  try {
    tokens = tokenize_line(record.message);
  } catch (const Error&) {
    return std::nullopt;
  }
  auto id = match_tokens(tokens);
  if (!id) return std::nullopt;

  TemplateEvent ev;
  ev.template_id = *id;
  ev.timestamp = record.timestamp;
  ev.device = record.device;
  ev.raw_index = raw_index;
  const Template& t = templates_[static_cast<size_t>(*id)];
  for (size_t p = 0; p < tokens.size(); ++p) {
    if (t.signature[p].kind != SlotKind::Constant) ev.variables.push_back(tokens[p].text);
  }
  return ev;
}

std::string TemplateDictionary::dict_hash() const {
  std::vector<std::string> sigs;
  sigs.reserve(templates_.size());
  for (const auto& t : templates_) sigs.push_back(t.signature_text());
  std::sort(sigs.begin(), sigs.end());
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& s : sigs) {
    h = fnv1a64(s, h);
    h = fnv1a64("\n", h);
  }
  return to_hex(h);
}

Json TemplateDictionary::to_json(const PipelineConfig& cfg) const {
  FileMeta meta;
  meta.format = "template-dictionary";
  meta.config_hash = cfg.hash();

  Json tpls = Json::array();
  for (const auto& t : templates_) {
    Json sig = Json::array();
    for (const auto& slot : t.signature) {
      sig.push_back(slot.kind == SlotKind::Constant ? slot.text : slot_marker(slot.kind));
    }
    tpls.push_back(Json{{"id", t.id},
                        {"signature", sig},
                        {"layer", layer_name(t.stack_layer)},
                        {"vendor_tag", t.vendor_tag}});
  }
  return Json{{"meta", meta.to_json()},
              {"merge_threshold", merge_threshold_},
              {"dict_hash", dict_hash()},
              {"templates", tpls}};
}

TemplateDictionary TemplateDictionary::from_json(const Json& j) {
  FileMeta meta = FileMeta::from_json(j.at("meta"));
  check_meta(meta, "template-dictionary", 1);

  TemplateDictionary dict;
  dict.merge_threshold_ = j.value("merge_threshold", 0.75);
  for (const auto& tj : j.at("templates")) {
    Template t;
    t.id = tj.at("id").get<int>();
    for (const auto& sj : tj.at("signature")) {
      Slot slot;
      std::string text = sj.get<std::string>();
      slot.kind = slot_kind_from_marker(text);
      if (slot.kind == SlotKind::Constant) slot.text = text;
      t.signature.push_back(std::move(slot));
    }
    t.stack_layer = layer_from_name(tj.at("layer").get<std::string>());
    t.vendor_tag = tj.value("vendor_tag", "");
    if (t.id != static_cast<int>(dict.templates_.size())) {
      throw Error(ErrorCode::ParseError, "dictionary ids are not dense");
    }
    dict.templates_.push_back(std::move(t));
  }
  dict.rebuild_index();
  return dict;
}

TemplateDictionary TemplateDictionary::load(const std::string& path) {
  return from_json(read_json_file(path));
}

TemplateDictionary TemplateDictionary::from_signatures(
    const std::vector<std::pair<std::string, std::string>>& sig_and_layer) {
  TemplateDictionary dict;
  for (const auto& [sig, layer] : sig_and_layer) {
    Template t;
    t.id = static_cast<int>(dict.templates_.size());
    std::istringstream in(sig);
    std::string tok;
    while (in >> tok) {
      Slot slot;
      slot.kind = slot_kind_from_marker(tok);
      if (slot.kind == SlotKind::Constant) slot.text = tok;
      t.signature.push_back(std::move(slot));
    }
    t.stack_layer = layer_from_name(layer);
    dict.templates_.push_back(std::move(t));
  }
  dict.rebuild_index();
  return dict;
}

void TemplateDictionary::save(const std::string& path, const PipelineConfig& cfg) const {
  write_json_file(path, to_json(cfg));
}

std::vector<std::optional<TemplateEvent>> match_stream_serial(
    const TemplateDictionary& dict, const std::vector<SyslogRecord>& corpus, MatchStats* stats) {
  std::vector<std::optional<TemplateEvent>> out(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    out[i] = dict.match(corpus[i], i);
  }
  if (stats) {
    for (const auto& ev : out) {
      if (ev) stats->matched++;
      else stats->no_match++;
    }
  }
  return out;
}

std::vector<std::optional<TemplateEvent>> match_stream_parallel(
    const TemplateDictionary& dict, const std::vector<SyslogRecord>& corpus, int threads,
    MatchStats* stats) {
  std::vector<std::optional<TemplateEvent>> out(corpus.size());
  parallel_for_index(corpus.size(), threads,
                     [&](size_t i) { out[i] = dict.match(corpus[i], i); });
  if (stats) {
    for (const auto& ev : out) {
      if (ev) stats->matched++;
      else stats->no_match++;
    }
  }
  return out;
}

void save_events(const std::string& path, const std::vector<std::optional<TemplateEvent>>& events,
                 const TemplateDictionary& dict, const PipelineConfig& cfg) {
  FileMeta meta;
  meta.format = "template-events";
  meta.config_hash = cfg.hash();

  size_t no_match = 0;
  for (const auto& ev : events) no_match += !ev;

  Json sigs = Json::array();
  for (const auto& t : dict.templates()) sigs.push_back(t.signature_text());

  std::ostringstream out;
  out << Json{{"meta", meta.to_json()},
              {"dict_hash", dict.dict_hash()},
              {"template_count", dict.size()},
              {"no_match_count", no_match},
              {"templates", sigs}}
             .dump()
      << "\n";
  for (const auto& ev : events) {
    if (ev) {
      out << Json{{"ts", ev->timestamp},
                  {"device", ev->device},
                  {"template_id", ev->template_id},
                  {"raw_index", ev->raw_index}}
                 .dump()
          << "\n";
    } else {
      out << Json{{"no_match", true}}.dump() << "\n";
    }
  }
  write_text_file(path, out.str());
}

EventStream load_events(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty event stream " + path);

  Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded()) throw Error(ErrorCode::ParseError, "bad event stream header");

  EventStream stream;
  stream.meta = FileMeta::from_json(header.at("meta"));
  check_meta(stream.meta, "template-events", 1);
  stream.dict_hash = header.at("dict_hash").get<std::string>();
  stream.template_count = header.at("template_count").get<size_t>();
  stream.no_match_count = header.value("no_match_count", size_t{0});
  for (const auto& s : header.value("templates", Json::array())) {
    stream.template_signatures.push_back(s.get<std::string>());
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ParseError, "bad event stream line");
    if (j.value("no_match", false)) continue;
    TemplateEvent ev;
    ev.timestamp = j.at("ts").get<double>();
    ev.device = j.at("device").get<std::string>();
    ev.template_id = j.at("template_id").get<int>();
    ev.raw_index = j.at("raw_index").get<size_t>();
    stream.events.push_back(std::move(ev));
  }
  return stream;
}

} // namespace causelog
