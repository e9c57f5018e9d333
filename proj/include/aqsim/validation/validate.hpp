#pragma once

#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "aqsim/core/parallel.hpp"
#include "aqsim/validation/graph.hpp"
#include "aqsim/validation/report.hpp"

namespace aqsim::validation {

struct ValidationOptions {
  Metric metric = Metric::kAbsolute;
  std::size_t jobs = 1;
  std::optional<std::string> norm;  // defaults from the graph shape
  std::optional<std::string> timestamp;
  std::map<std::string, std::string> config;
  std::optional<SpeedupClass> speedup;
};

namespace vdetail {

struct Evaluation {
  std::vector<Observables> candidate, reference;
};

inline void rethrow_with_context(std::exception_ptr e, const std::string& ctx) {
  try {
    std::rethrow_exception(e);
  } catch (const PhysicsGuardError& x) {
    throw PhysicsGuardError(ctx + ": " + x.what());
  } catch (const ConfigError& x) {
    throw ConfigError(ctx + ": " + x.what());
  } catch (const DimensionMismatch& x) {
    throw DimensionMismatch(ctx + ": " + x.what());
  } catch (const InvalidArgument& x) {
    throw InvalidArgument(ctx + ": " + x.what());
  } catch (const std::exception& x) {
    throw Error(ctx + ": " + x.what());
  }
}

/// Runs both sides at every point. Failures are reported for the lowest
/// failing index so the message does not depend on thread scheduling.
template <class Cand, class Ref>
Evaluation evaluate(const std::vector<Params>& regime, std::size_t jobs, Cand cand, Ref ref) {
  Evaluation ev;
  ev.candidate.resize(regime.size());
  ev.reference.resize(regime.size());
  std::vector<std::exception_ptr> errors(regime.size());
  std::vector<std::string> where(regime.size());
  parallel_for(regime.size(), jobs, [&](std::size_t i) {
    try {
      where[i] = "candidate";
      ev.candidate[i] = cand(regime[i]);
      where[i] = "reference";
      ev.reference[i] = ref(i, regime[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < regime.size(); ++i)
    if (errors[i])
      rethrow_with_context(errors[i], where[i] + " runner failed at point " + std::to_string(i) + " " +
                                          format_params(regime[i]));
  return ev;
}

inline ObservableComparison compare_observable(const std::string& name, const std::vector<Params>& regime,
                                               const Evaluation& ev, Metric metric, double tol) {
  ObservableComparison c;
  c.name = name;
  double cr = 0.0, rr = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < regime.size(); ++i) {
    auto ic = ev.candidate[i].find(name);
    auto ir = ev.reference[i].find(name);
    if (ic == ev.candidate[i].end() || ir == ev.reference[i].end())
      throw DimensionMismatch("observable '" + name + "' missing from the " +
                              (ic == ev.candidate[i].end() ? "candidate" : "reference") + " at point " +
                              std::to_string(i) + " " + format_params(regime[i]));
    const auto& a = ic->second;
    const auto& b = ir->second;
    if (a.size() != b.size() || a.empty())
      throw DimensionMismatch("observable '" + name + "' has " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + " components at point " + std::to_string(i));
    double scale = 1.0;
    if (metric == Metric::kScaled) {
      scale = 0.0;
      for (double v : b) scale = std::max(scale, std::abs(v));
      if (scale == 0.0) scale = 1.0;
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      cr += a[k] * b[k];
      rr += b[k] * b[k];
      const double d = std::abs(a[k] - b[k]) / scale;
      if (std::isnan(d)) throw PhysicsGuardError("non-finite value in observable '" + name + "'");
      if (first || d > c.max_discrepancy) {
        c.max_discrepancy = d;
        c.worst_point = i;
        c.worst_params = regime[i];
        c.worst_component = k;
        c.candidate_value = a[k];
        c.reference_value = b[k];
        first = false;
      }
    }
  }
  c.scale_estimate = rr > 0.0 ? cr / rr : 1.0;
  c.pass = c.max_discrepancy <= tol;
  return c;
}

inline void check_request(const std::vector<std::string>& observables, double tol) {
  detail::require(!observables.empty(), "no observables requested");
  detail::require(tol >= 0.0, "tolerance must be >= 0");
}

inline Json regime_json(const std::vector<Params>& regime) {
  Json j = Json::array();
  for (const auto& p : regime) j.push_back(p);
  return j;
}

inline ReportData start(const std::string& kind, const std::string& norm, const ModelNode& cand,
                        const std::string& reference, const std::vector<std::string>& observables,
                        const std::vector<Params>& regime, double tol, const ValidationOptions& opt,
                        Json extra) {
  ReportData d;
  d.kind = kind;
  d.norm = check_norm_id(opt.norm.value_or(norm));
  d.candidate = cand.id;
  d.reference = reference;
  d.metric = opt.metric;
  d.tolerance = tol;
  d.points = regime.size();
  d.timestamp = opt.timestamp;
  d.config = opt.config;
  d.speedup = opt.speedup;
  if (d.speedup && !d.speedup->justification.empty())
    d.notes.push_back("speedup class " + to_string(d.speedup->letter) + ": " + d.speedup->justification);
  Json in = {{"kind", kind},
             {"norm", d.norm},
             {"candidate", cand.id},
             {"candidate_runner", cand.runner_name},
             {"reference", reference},
             {"observables", observables},
             {"regime", regime_json(regime)},
             {"tolerance", tol},
             {"metric", to_string(opt.metric)},
             {"config", opt.config},
             {"extra", std::move(extra)}};
  d.inputs_digest = sha256_hex(in.dump());
  return d;
}

inline void finish(ReportData& d, const std::vector<std::string>& observables, const std::vector<Params>& regime,
                   const Evaluation& ev) {
  d.max_discrepancy = 0.0;
  bool all = true;
  for (const auto& name : observables) {
    d.observables.push_back(compare_observable(name, regime, ev, d.metric, d.tolerance));
    d.max_discrepancy = std::max(d.max_discrepancy, d.observables.back().max_discrepancy);
    all = all && d.observables.back().pass;
  }
  d.verdict = all ? Verdict::kPass : Verdict::kFail;
}

inline std::string default_norm(const ModelGraph& g, const char* computation, const char* emulation) {
  return g.shape() == GraphShape::kEmulation ? emulation : computation;
}

}  // namespace vdetail

/// Source simulation model against the source system model over a regime grid.
/// An empty regime falls back to the grid stored on the limiting edge.
inline ValidationReport internal_validate(const ModelGraph& g, const std::vector<std::string>& observables,
                                          std::vector<Params> regime, double tol,
                                          const ValidationOptions& opt = {}) {
  vdetail::check_request(observables, tol);
  const ModelNode& sim = g.require_role(Side::kSource, Level::kSimulation);
  const ModelNode& sys = g.require_role(Side::kSource, Level::kSystem);
  detail::require(static_cast<bool>(sim.runner) && static_cast<bool>(sys.runner),
                  "internal validation needs runners on both source models");
  if (regime.empty())
    if (auto e = g.edge_between(sim.id, sys.id)) regime = g.edges()[*e].regime;
  detail::require(!regime.empty(), "internal validation needs a non-empty regime grid");
  for (const auto& p : regime) {
    sim.check_domain(p);
    sys.check_domain(p);
  }
  ReportData d = vdetail::start("internal", vdetail::default_norm(g, "1a", "2a"), sim, sys.id, observables,
                                regime, tol, opt, {{"reference_runner", sys.runner_name}});
  d.substitution = "No laboratory data: the source system is represented by the system model '" + sys.id +
                   "' (perturbed lattice model plus any injected noise), standing in for the experiment.";
  const auto ev = vdetail::evaluate(regime, opt.jobs, sim.runner,
                                    [&](std::size_t, const Params& p) { return sys.runner(p); });
  vdetail::finish(d, observables, regime, ev);
  return ValidationReport(std::move(d));
}

/// Source simulation model, mapped, against the target simulation model.
/// `override_mapping` replaces the mapping stored on the isomorphism edge.
inline ValidationReport formal_external_validate(const ModelGraph& g, const std::vector<std::string>& observables,
                                                 double tol, const ValidationOptions& opt = {},
                                                 std::optional<Mapping> override_mapping = std::nullopt,
                                                 std::vector<Params> regime = {}) {
  vdetail::check_request(observables, tol);
  const ModelNode& src = g.require_role(Side::kSource, Level::kSimulation);
  const ModelNode& tgt = g.require_role(Side::kTarget, Level::kSimulation);
  const auto ei = g.edge_between(src.id, tgt.id);
  detail::require(ei.has_value(), "no isomorphism edge between '" + src.id + "' and '" + tgt.id + "'");
  const RelationEdge& edge = g.edges()[*ei];
  if (regime.empty()) regime = edge.regime;
  const std::string norm = vdetail::default_norm(g, "1b", "2b");

  if (edge.status == EdgeStatus::kValidatedByCitation && !override_mapping) {
    ReportData d = vdetail::start("formal_external", norm, src, tgt.id, observables, regime, tol, opt,
                                  {{"citation", edge.evidence}});
    d.verdict = Verdict::kCitation;
    d.max_discrepancy = std::numeric_limits<double>::quiet_NaN();
    d.substitution = "Relation established analytically; no runner comparison was performed.";
    d.notes.push_back("citation: " + edge.evidence);
    return ValidationReport(std::move(d));
  }

  const Mapping mapping = override_mapping ? *override_mapping
                          : edge.mapping   ? *edge.mapping
                                           : throw InvalidArgument("isomorphism edge carries no mapping");
  detail::require(static_cast<bool>(src.runner) && static_cast<bool>(tgt.runner),
                  "formal validation needs runners on both simulation models");
  detail::require(!regime.empty(), "formal validation needs a non-empty regime grid");
  for (const auto& p : regime) src.check_domain(p);
  ReportData d = vdetail::start("formal_external", norm, src, tgt.id, observables, regime, tol, opt,
                                {{"mapping", mapping.name}, {"reference_runner", tgt.runner_name}});
  d.substitution = "Model-to-model comparison under mapping '" + mapping.name + "'; no experiment is involved.";
  const auto ev = vdetail::evaluate(
      regime, opt.jobs, [&](const Params& p) { return mapping.convert(src.runner(p)); },
      [&](std::size_t, const Params& p) {
        const Params q = mapping.apply(p);
        tgt.check_domain(q);
        return tgt.runner(q);
      });
  vdetail::finish(d, observables, regime, ev);
  if (d.verdict == Verdict::kFail)
    for (const auto& o : d.observables)
      if (!o.pass)
        d.notes.push_back("observable '" + o.name + "': least-squares factor candidate/reference = " +
                          std::to_string(o.scale_estimate));
  return ValidationReport(std::move(d));
}

/// Target simulation model against reference data. Without an explicit dataset
/// the one attached to the target system node is used.
inline ValidationReport empirical_external_validate(const ModelGraph& g, const std::vector<std::string>& observables,
                                                    double tol, const ValidationOptions& opt = {},
                                                    std::optional<Dataset> dataset = std::nullopt) {
  vdetail::check_request(observables, tol);
  const ModelNode& tgt = g.require_role(Side::kTarget, Level::kSimulation);
  detail::require(static_cast<bool>(tgt.runner), "empirical validation needs a target simulation runner");
  std::string reference;
  if (!dataset) {
    const ModelNode* sys = g.find_role(Side::kTarget, Level::kSystem);
    detail::require(sys && sys->dataset, "no reference dataset supplied or attached to a target system node");
    dataset = *sys->dataset;
    reference = sys->id;
  }
  dataset->verify();
  detail::require(!dataset->empty(), "reference dataset is empty; nothing to validate against");
  const std::string digest = dataset->digest();
  if (reference.empty()) reference = "dataset:" + digest.substr(0, 16);
  std::vector<Params> regime;
  for (const auto& p : dataset->points) {
    tgt.check_domain(p.params);
    regime.push_back(p.params);
  }
  ReportData d = vdetail::start("empirical_external", "2c", tgt, reference, observables, regime, tol, opt,
                                {{"dataset_sha256", digest}});
  d.substitution = "Reference values come from dataset sha256:" + digest +
                   "; they are model-generated or synthetic, not laboratory measurements.";
  d.notes.push_back("the norm text reads 'model of the source system'; validated here against target data");
  const auto ev = vdetail::evaluate(regime, opt.jobs, tgt.runner,
                                    [&](std::size_t i, const Params&) { return dataset->points[i].values; });
  vdetail::finish(d, observables, regime, ev);
  return ValidationReport(std::move(d));
}

/// Marks the edge the report speaks for as validated when it passed.
/// Returns true when the graph changed.
inline bool record_report(ModelGraph& g, const ValidationReport& r) {
  if (!r.passed()) return false;
  const auto& j = r.to_json();
  const auto e = g.edge_between(j.at("candidate").get<std::string>(), j.at("reference").get<std::string>());
  if (!e || g.edges()[*e].status != EdgeStatus::kUnvalidated) return false;
  g.mark_validated(*e, r.tolerance(), "report sha256:" + r.content_hash());
  return true;
}

}  // namespace aqsim::validation
