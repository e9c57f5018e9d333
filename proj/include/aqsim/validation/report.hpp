#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aqsim/validation/graph.hpp"

namespace aqsim::validation {

inline constexpr std::array<std::string_view, 12> kNormIds = {"1a", "1b", "2a", "2b", "2c", "3a",
                                                              "3b", "3c", "4a", "4b", "4c", "4d"};

inline std::string check_norm_id(const std::string& id) {
  if (std::find(kNormIds.begin(), kNormIds.end(), id) == kNormIds.end())
    throw InvalidArgument("unknown norm id '" + id + "'");
  return id;
}

enum class Tri { kNo, kYes, kUnknown };

/// Slots for the speedup norm. `classical_efficient` refers to the best known
/// classical algorithm; `scales_up` to the quantum device keeping accuracy at size.
struct ProblemMetadata {
  bool proven_hard = false;
  bool classical_efficient = false;
  Tri scales_up = Tri::kUnknown;
  bool favourable_quantum_scaling = false;
  std::string justification;
};

enum class SpeedupLetter { kA, kB, kC, kD, kNone };

inline std::string to_string(SpeedupLetter l) {
  switch (l) {
    case SpeedupLetter::kA: return "a";
    case SpeedupLetter::kB: return "b";
    case SpeedupLetter::kC: return "c";
    case SpeedupLetter::kD: return "d";
    default: return "none";
  }
}

struct SpeedupClass {
  SpeedupLetter letter = SpeedupLetter::kNone;
  std::string justification;

  /// Norm id for classes a-d; none has no id.
  std::optional<std::string> norm_id() const {
    if (letter == SpeedupLetter::kNone) return std::nullopt;
    return "4" + to_string(letter);
  }
};

/// First matching class in the order a, b, c, d.
inline SpeedupClass classify_speedup(const ProblemMetadata& m) {
  detail::require(!(m.proven_hard && m.classical_efficient),
                  "contradictory metadata: proven hardness together with an efficient classical algorithm");
  SpeedupClass c;
  c.justification = m.justification;
  if (m.proven_hard)
    c.letter = SpeedupLetter::kA;
  else if (!m.classical_efficient && m.scales_up == Tri::kYes)
    c.letter = SpeedupLetter::kB;
  else if (!m.classical_efficient && m.scales_up == Tri::kUnknown)
    c.letter = SpeedupLetter::kC;
  else if (m.classical_efficient && m.favourable_quantum_scaling)
    c.letter = SpeedupLetter::kD;
  return c;
}

enum class Verdict { kPass, kFail, kCitation };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    default: return "validated_by_citation";
  }
}

enum class Metric { kAbsolute, kScaled };

inline std::string to_string(Metric m) { return m == Metric::kAbsolute ? "absolute" : "scaled"; }

/// Largest deviation of one observable over the regime.
struct ObservableComparison {
  std::string name;
  double max_discrepancy = 0.0;
  double scale_estimate = 1.0;  // least-squares factor candidate/reference
  std::size_t worst_point = 0;
  Params worst_params;
  std::size_t worst_component = 0;
  double candidate_value = 0.0;
  double reference_value = 0.0;
  bool pass = false;
};

struct ReportData {
  std::string norm;
  std::string kind;  // internal | formal_external | empirical_external
  std::string candidate, reference;
  std::string inputs_digest;
  Metric metric = Metric::kAbsolute;
  double tolerance = 0.0;
  double max_discrepancy = 0.0;
  Verdict verdict = Verdict::kFail;
  std::vector<ObservableComparison> observables;
  std::size_t points = 0;
  std::string substitution;
  std::vector<std::string> notes;
  std::optional<std::string> timestamp;
  std::map<std::string, std::string> config;
  std::optional<SpeedupClass> speedup;
};

/// Immutable outcome of one norm check. Serialization is byte-deterministic.
class ValidationReport {
 public:
  explicit ValidationReport(ReportData d) : d_(std::move(d)) {
    check_norm_id(d_.norm);
    if (d_.verdict != Verdict::kCitation) {
      bool all = !d_.observables.empty();
      for (const auto& o : d_.observables) all = all && o.pass;
      detail::require<ContractViolation>((d_.verdict == Verdict::kPass) == all,
                                         "report verdict disagrees with its observables");
    }
    json_ = body();
    hash_ = sha256_hex(json_.dump());
    json_["content_sha256"] = hash_;
  }

  const std::string& norm() const { return d_.norm; }
  const std::string& kind() const { return d_.kind; }
  Verdict verdict() const { return d_.verdict; }
  bool passed() const { return d_.verdict == Verdict::kPass; }
  double tolerance() const { return d_.tolerance; }
  double max_discrepancy() const { return d_.max_discrepancy; }
  const std::vector<ObservableComparison>& observables() const { return d_.observables; }
  const std::string& inputs_digest() const { return d_.inputs_digest; }
  const std::string& substitution() const { return d_.substitution; }
  const std::vector<std::string>& notes() const { return d_.notes; }
  const std::optional<SpeedupClass>& speedup() const { return d_.speedup; }
  const std::string& content_hash() const { return hash_; }
  const ObservableComparison* worst() const {
    const ObservableComparison* w = nullptr;
    for (const auto& o : d_.observables)
      if (!w || o.max_discrepancy > w->max_discrepancy) w = &o;
    return w;
  }

  const Json& to_json() const { return json_; }
  std::string dump() const { return json_.dump(2) + "\n"; }

  /// Reports are write-once: an existing file is never overwritten.
  void write(const std::filesystem::path& path) const {
    if (std::filesystem::exists(path))
      throw InvalidArgument("refusing to overwrite existing report " + path.string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write report " + path.string());
    out << dump();
  }

 private:
  Json body() const {
    Json obs = Json::array();
    for (const auto& o : d_.observables)
      obs.push_back({{"name", o.name},
                     {"max_discrepancy", o.max_discrepancy},
                     {"scale_estimate", o.scale_estimate},
                     {"pass", o.pass},
                     {"worst",
                      {{"point", o.worst_point},
                       {"params", o.worst_params},
                       {"component", o.worst_component},
                       {"candidate", o.candidate_value},
                       {"reference", o.reference_value}}}});
    Json j = {{"norm", d_.norm},
              {"kind", d_.kind},
              {"candidate", d_.candidate},
              {"reference", d_.reference},
              {"inputs_sha256", d_.inputs_digest},
              {"metric", to_string(d_.metric)},
              {"tolerance", d_.tolerance},
              {"max_discrepancy", d_.max_discrepancy},
              {"verdict", to_string(d_.verdict)},
              {"observables", obs},
              {"points", d_.points},
              {"substitution", d_.substitution},
              {"notes", d_.notes},
              {"config", d_.config}};
    j["timestamp"] = d_.timestamp ? Json(*d_.timestamp) : Json(nullptr);
    if (d_.speedup)
      j["speedup"] = {{"class", to_string(d_.speedup->letter)}, {"justification", d_.speedup->justification}};
    return j;
  }

  ReportData d_;
  Json json_;
  std::string hash_;
};

}  // namespace aqsim::validation
