#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "aqsim/core/errors.hpp"
#include "aqsim/core/hash.hpp"

namespace aqsim::validation {

using Json = nlohmann::json;
using Params = std::map<std::string, double>;
using Observables = std::map<std::string, std::vector<double>>;
using Runner = std::function<Observables(const Params&)>;

enum class Side { kSource, kTarget };
enum class Level { kSystem, kSimulation };

inline std::string to_string(Side s) { return s == Side::kSource ? "source" : "target"; }
inline std::string to_string(Level l) { return l == Level::kSystem ? "system" : "simulation"; }

inline Side parse_side(const std::string& s) {
  if (s == "source") return Side::kSource;
  if (s == "target") return Side::kTarget;
  throw ConfigError("unknown side '" + s + "' (source|target)");
}

inline Level parse_level(const std::string& s) {
  if (s == "system") return Level::kSystem;
  if (s == "simulation") return Level::kSimulation;
  throw ConfigError("unknown level '" + s + "' (system|simulation)");
}

inline std::string format_params(const Params& p) {
  std::ostringstream ss;
  ss.precision(17);
  ss << '{';
  bool first = true;
  for (const auto& [k, v] : p) {
    ss << (first ? "" : ", ") << k << '=' << v;
    first = false;
  }
  ss << '}';
  return ss.str();
}

/// Reference measurements: one row of observables per parameter point.
struct Dataset {
  struct Point {
    Params params;
    Observables values;
  };
  std::vector<Point> points;
  std::optional<std::string> pinned_digest;  // expected sha256 of canonical()

  bool empty() const { return points.empty(); }

  Json to_json() const {
    Json pts = Json::array();
    for (const auto& p : points) pts.push_back({{"params", p.params}, {"values", p.values}});
    return {{"points", pts}};
  }

  std::string canonical() const { return to_json().dump(); }
  std::string digest() const { return sha256_hex(canonical()); }

  /// Throws ConfigError when a pinned digest no longer matches the content.
  void verify() const {
    if (pinned_digest && *pinned_digest != digest())
      throw ConfigError("dataset digest mismatch: pinned " + *pinned_digest + ", content " + digest());
  }

  static Dataset from_json(const Json& j) {
    Dataset d;
    try {
      for (const auto& p : j.at("points"))
        d.points.push_back({p.at("params").get<Params>(), p.at("values").get<Observables>()});
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("malformed dataset: ") + e.what());
    }
    return d;
  }
};

struct ModelNode {
  std::string id;
  Side side = Side::kSource;
  Level level = Level::kSimulation;
  std::string runner_name;  // key into a RunnerRegistry when persisted
  Runner runner;
  std::optional<Dataset> dataset;
  std::map<std::string, std::pair<double, double>> domain;  // closed parameter ranges
  std::string description;

  std::string role() const { return to_string(side) + " " + to_string(level); }

  void validate() const {
    detail::require(!id.empty(), "model node needs an id");
    detail::require(static_cast<bool>(runner) || dataset.has_value(),
                    "model node '" + id + "' needs a runner or a dataset");
    for (const auto& [k, r] : domain)
      detail::require(r.first <= r.second, "empty parameter range '" + k + "' on node '" + id + "'");
  }

  /// Throws InvalidArgument when p leaves the declared domain.
  void check_domain(const Params& p) const {
    for (const auto& [k, r] : domain) {
      auto it = p.find(k);
      if (it == p.end()) continue;
      if (!(it->second >= r.first && it->second <= r.second))
        throw InvalidArgument("parameter " + k + "=" + std::to_string(it->second) + " outside the domain of '" +
                              id + "'");
    }
  }
};

enum class RelationKind { kLimiting, kIsomorphism };

inline std::string to_string(RelationKind k) {
  return k == RelationKind::kLimiting ? "limiting_relation" : "partial_isomorphism";
}

inline RelationKind parse_relation_kind(const std::string& s) {
  if (s == "limiting_relation") return RelationKind::kLimiting;
  if (s == "partial_isomorphism") return RelationKind::kIsomorphism;
  throw ConfigError("unknown relation kind '" + s + "'");
}

/// Parameter transform from the source simulation model to the target one.
/// `observables` converts source outputs into target units (identity when empty).
struct Mapping {
  std::string name;
  std::function<Params(const Params&)> params;
  std::function<Observables(const Observables&)> observables;
  std::map<std::string, std::pair<double, double>> domain;

  Params apply(const Params& p) const {
    for (const auto& [k, r] : domain) {
      auto it = p.find(k);
      if (it == p.end())
        throw InvalidArgument("mapping '" + name + "' needs parameter " + k);
      if (!(it->second >= r.first && it->second <= r.second))
        throw InvalidArgument("mapping '" + name + "' domain violation: " + k + "=" + std::to_string(it->second));
    }
    return params ? params(p) : p;
  }

  Observables convert(const Observables& o) const { return observables ? observables(o) : o; }
};

enum class EdgeStatus { kUnvalidated, kValidated, kValidatedByCitation };

inline std::string to_string(EdgeStatus s) {
  switch (s) {
    case EdgeStatus::kUnvalidated: return "unvalidated";
    case EdgeStatus::kValidated: return "validated";
    case EdgeStatus::kValidatedByCitation: return "validated_by_citation";
  }
  return "unvalidated";
}

inline EdgeStatus parse_edge_status(const std::string& s) {
  if (s == "unvalidated") return EdgeStatus::kUnvalidated;
  if (s == "validated") return EdgeStatus::kValidated;
  if (s == "validated_by_citation") return EdgeStatus::kValidatedByCitation;
  throw ConfigError("unknown edge status '" + s + "'");
}

struct RelationEdge {
  std::string from, to;
  RelationKind kind = RelationKind::kLimiting;
  std::vector<Params> regime;  // grid of parameter points the relation is claimed for
  std::optional<Mapping> mapping;
  EdgeStatus status = EdgeStatus::kUnvalidated;
  double tolerance = 0.0;  // set when validated
  std::string evidence;    // report digest or citation text

  static RelationEdge limiting(std::string from, std::string to, std::vector<Params> regime = {}) {
    RelationEdge e;
    e.from = std::move(from);
    e.to = std::move(to);
    e.regime = std::move(regime);
    return e;
  }

  static RelationEdge isomorphism(std::string from, std::string to, std::vector<Params> regime = {},
                                  std::optional<Mapping> mapping = std::nullopt) {
    RelationEdge e = limiting(std::move(from), std::move(to), std::move(regime));
    e.kind = RelationKind::kIsomorphism;
    e.mapping = std::move(mapping);
    return e;
  }
};

enum class GraphShape { kIncomplete, kComputation, kEmulation };

inline std::string to_string(GraphShape s) {
  switch (s) {
    case GraphShape::kComputation: return "computation";
    case GraphShape::kEmulation: return "emulation";
    default: return "incomplete";
  }
}

/// Model schema: up to four nodes (one per role) joined by relation edges.
/// Append-only apart from edge status upgrades.
class ModelGraph {
 public:
  std::size_t add_node(ModelNode node) {
    node.validate();
    for (const auto& n : nodes_) {
      detail::require(n.id != node.id, "duplicate model id '" + node.id + "'");
      detail::require(n.side != node.side || n.level != node.level,
                      "role '" + node.role() + "' already taken by '" + n.id + "'");
    }
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  std::size_t add_edge(RelationEdge edge) {
    const ModelNode& a = node(edge.from);
    const ModelNode& b = node(edge.to);
    detail::require(edge.from != edge.to, "relation edge cannot be a self loop");
    if (edge.kind == RelationKind::kLimiting) {
      detail::require(a.side == b.side && a.level != b.level,
                      "limiting relation must join system and simulation models of one side ('" + a.id + "' " +
                          a.role() + ", '" + b.id + "' " + b.role() + ")");
    } else {
      detail::require(a.level == Level::kSimulation && b.level == Level::kSimulation && a.side != b.side,
                      "isomorphism must join the source and target simulation models ('" + a.id + "' " + a.role() +
                          ", '" + b.id + "' " + b.role() + ")");
    }
    if (edge.status == EdgeStatus::kValidatedByCitation)
      detail::require(!edge.evidence.empty(), "citation status needs evidence text");
    // union-find over existing edges; an edge joining one component closes a cycle
    std::vector<std::size_t> parent(nodes_.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& e : edges_) parent[find(index_of(e.from))] = find(index_of(e.to));
    detail::require(find(index_of(edge.from)) != find(index_of(edge.to)),
                    "relation " + edge.from + " - " + edge.to + " would close a cycle");
    edges_.push_back(std::move(edge));
    return edges_.size() - 1;
  }

  const std::vector<ModelNode>& nodes() const { return nodes_; }
  const std::vector<RelationEdge>& edges() const { return edges_; }
  bool empty() const { return nodes_.empty(); }

  const ModelNode& node(const std::string& id) const { return nodes_[index_of(id)]; }

  const ModelNode* find_role(Side s, Level l) const {
    for (const auto& n : nodes_)
      if (n.side == s && n.level == l) return &n;
    return nullptr;
  }

  const ModelNode& require_role(Side s, Level l) const {
    const ModelNode* n = find_role(s, l);
    if (!n) throw InvalidArgument("graph has no " + to_string(s) + " " + to_string(l) + " model");
    return *n;
  }

  /// Index of the edge joining a and b in either direction.
  std::optional<std::size_t> edge_between(const std::string& a, const std::string& b) const {
    for (std::size_t k = 0; k < edges_.size(); ++k)
      if ((edges_[k].from == a && edges_[k].to == b) || (edges_[k].from == b && edges_[k].to == a)) return k;
    return std::nullopt;
  }

  GraphShape shape() const {
    const bool ss = find_role(Side::kSource, Level::kSystem), si = find_role(Side::kSource, Level::kSimulation);
    const bool ts = find_role(Side::kTarget, Level::kSystem), ti = find_role(Side::kTarget, Level::kSimulation);
    if (!(ss && si && ti)) return GraphShape::kIncomplete;
    const bool iso = std::any_of(edges_.begin(), edges_.end(),
                                 [](const RelationEdge& e) { return e.kind == RelationKind::kIsomorphism; });
    if (!iso) return GraphShape::kIncomplete;
    if (ts && nodes_.size() == 4 && edges_.size() >= 3) return GraphShape::kEmulation;
    if (!ts && nodes_.size() == 3 && edges_.size() >= 2) return GraphShape::kComputation;
    return GraphShape::kIncomplete;
  }

  void require_shape(GraphShape expected) const {
    const GraphShape s = shape();
    detail::require(s == expected,
                    "graph is " + to_string(s) + "-shaped, expected " + to_string(expected) + "-shaped");
  }

  /// Upgrades an unvalidated edge; validated edges are never downgraded.
  void mark_validated(std::size_t edge, double tolerance, std::string evidence) {
    detail::require(edge < edges_.size(), "edge index out of range");
    detail::require(!evidence.empty(), "validation evidence must be non-empty");
    RelationEdge& e = edges_[edge];
    detail::require(e.status == EdgeStatus::kUnvalidated, "edge " + e.from + " - " + e.to + " is already " +
                                                              to_string(e.status));
    e.status = EdgeStatus::kValidated;
    e.tolerance = tolerance;
    e.evidence = std::move(evidence);
  }

 private:
  std::size_t index_of(const std::string& id) const {
    for (std::size_t k = 0; k < nodes_.size(); ++k)
      if (nodes_[k].id == id) return k;
    throw InvalidArgument("unknown model id '" + id + "'");
  }

  std::vector<ModelNode> nodes_;
  std::vector<RelationEdge> edges_;
};

/// DOT diagram: source column left, target right, system row on top.
inline std::string render_schema(const ModelGraph& g) {
  detail::require(!g.empty(), "cannot render an empty model graph");
  std::ostringstream out;
  out << "digraph schema {\n  rankdir=TB;\n  node [shape=box, fontname=\"Helvetica\"];\n";
  for (Side s : {Side::kSource, Side::kTarget}) {
    out << "  subgraph cluster_" << to_string(s) << " {\n    label=\"" << to_string(s) << "\";\n";
    for (Level l : {Level::kSystem, Level::kSimulation}) {
      const ModelNode* n = g.find_role(s, l);
      if (!n) continue;
      out << "    \"" << n->id << "\" [label=\"" << n->id << "\\n" << n->role() << "\""
          << (n->dataset ? ", style=dashed" : "") << "];\n";
    }
    out << "  }\n";
  }
  for (const auto& e : g.edges()) {
    out << "  \"" << e.from << "\" -> \"" << e.to << "\" [label=\""
        << (e.kind == RelationKind::kLimiting ? "limit" : "iso") << "\", dir=none";
    switch (e.status) {
      case EdgeStatus::kValidated: out << ", style=bold, color=\"darkgreen\""; break;
      case EdgeStatus::kValidatedByCitation: out << ", style=dotted, color=\"blue\""; break;
      default: out << ", style=dashed, color=\"gray40\""; break;
    }
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

/// Runners and mappings by name, so persisted graphs can be reattached to code.
struct RunnerRegistry {
  std::map<std::string, Runner> runners;
  std::map<std::string, Mapping> mappings;
};

inline Json graph_to_json(const ModelGraph& g) {
  Json nodes = Json::array(), edges = Json::array();
  for (const auto& n : g.nodes()) {
    Json j = {{"id", n.id}, {"side", to_string(n.side)}, {"level", to_string(n.level)},
              {"runner", n.runner_name}, {"description", n.description}};
    Json dom = Json::object();
    for (const auto& [k, r] : n.domain) dom[k] = {r.first, r.second};
    j["domain"] = dom;
    if (n.dataset) {
      j["dataset"] = n.dataset->to_json();
      j["dataset_sha256"] = n.dataset->digest();
    }
    nodes.push_back(j);
  }
  for (const auto& e : g.edges()) {
    Json j = {{"from", e.from},
              {"to", e.to},
              {"kind", to_string(e.kind)},
              {"regime", e.regime},
              {"status", to_string(e.status)},
              {"tolerance", e.tolerance},
              {"evidence", e.evidence}};
    j["mapping"] = e.mapping ? Json(e.mapping->name) : Json(nullptr);
    edges.push_back(j);
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

/// Rebuilds a graph; runner and mapping names must resolve in the registry.
inline ModelGraph graph_from_json(const Json& j, const RunnerRegistry& reg) {
  ModelGraph g;
  try {
    for (const auto& jn : j.at("nodes")) {
      ModelNode n;
      n.id = jn.at("id").get<std::string>();
      n.side = parse_side(jn.at("side").get<std::string>());
      n.level = parse_level(jn.at("level").get<std::string>());
      n.runner_name = jn.value("runner", std::string());
      n.description = jn.value("description", std::string());
      if (!n.runner_name.empty()) {
        auto it = reg.runners.find(n.runner_name);
        if (it == reg.runners.end()) throw ConfigError("unknown runner '" + n.runner_name + "' on node " + n.id);
        n.runner = it->second;
      }
      if (jn.contains("domain"))
        for (const auto& [k, r] : jn.at("domain").items()) n.domain[k] = {r.at(0).get<double>(), r.at(1).get<double>()};
      if (jn.contains("dataset")) {
        n.dataset = Dataset::from_json(jn.at("dataset"));
        if (jn.contains("dataset_sha256")) n.dataset->pinned_digest = jn.at("dataset_sha256").get<std::string>();
        n.dataset->verify();
      }
      g.add_node(std::move(n));
    }
    for (const auto& je : j.at("edges")) {
      RelationEdge e;
      e.from = je.at("from").get<std::string>();
      e.to = je.at("to").get<std::string>();
      e.kind = parse_relation_kind(je.at("kind").get<std::string>());
      e.regime = je.value("regime", std::vector<Params>{});
      e.status = parse_edge_status(je.value("status", std::string("unvalidated")));
      e.tolerance = je.value("tolerance", 0.0);
      e.evidence = je.value("evidence", std::string());
      if (je.contains("mapping") && !je.at("mapping").is_null()) {
        const auto name = je.at("mapping").get<std::string>();
        auto it = reg.mappings.find(name);
        if (it == reg.mappings.end()) throw ConfigError("unknown mapping '" + name + "'");
        e.mapping = it->second;
      }
      g.add_edge(std::move(e));
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed model graph: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid model graph: ") + e.what());
  }
  return g;
}

}  // namespace aqsim::validation
