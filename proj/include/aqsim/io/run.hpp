#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "aqsim/core/errors.hpp"
#include "aqsim/core/hash.hpp"
#include "aqsim/io/config.hpp"

namespace aqsim::io {

inline constexpr const char* kArtifactName = "aqsim";
inline constexpr const char* kArtifactVersion = "0.1.0";

using Json = nlohmann::json;

/// Output directory of one run. Every file goes through write() so the
/// manifest can list its hash.
class RunDirectory {
 public:
  RunDirectory(std::filesystem::path dir, std::string subcommand, Config resolved, std::string format)
      : dir_(std::move(dir)), subcommand_(std::move(subcommand)), config_(std::move(resolved)),
        format_(std::move(format)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  const std::filesystem::path& path() const { return dir_; }
  const std::string& format() const { return format_; }
  bool csv() const { return format_ == "csv"; }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (dir_ / name).string());
    out << content;
    artifacts_[name] = sha256_hex(content);
  }

  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  Json manifest() const {
    return {{"artifact", kArtifactName},
            {"version", kArtifactVersion},
            {"subcommand", subcommand_},
            {"format", format_},
            {"config", config_.values()},
            {"artifacts", artifacts_}};
  }

  /// Writes manifest.json (not listed in itself).
  void finish() {
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    if (!out) throw ConfigError("cannot write manifest");
    out << manifest().dump(2) << "\n";
  }

 private:
  std::filesystem::path dir_;
  std::string subcommand_;
  Config config_;
  std::string format_;
  std::map<std::string, std::string> artifacts_;
};

/// Config echoed in a manifest; the manifest must belong to `subcommand`.
inline Config config_from_manifest(const std::string& path, const std::string& subcommand) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest '" + path + "'");
  try {
    const Json j = Json::parse(in);
    const auto sub = j.at("subcommand").get<std::string>();
    if (sub != subcommand)
      throw ConfigError("manifest '" + path + "' belongs to '" + sub + "', not '" + subcommand + "'");
    return Config::from_map(j.at("config").get<std::map<std::string, std::string>>());
  } catch (const Json::exception& e) {
    throw ConfigError("malformed manifest '" + path + "': " + e.what());
  }
}

struct PlotSpec {
  std::string csv;
  std::string script;
  std::string title;
  bool log_x = false;
  bool log_y = false;
};

inline const std::vector<PlotSpec>& plot_catalog() {
  static const std::vector<PlotSpec> specs = {
      {"imbalance.csv", "plot_imbalance.py", "imbalance vs time", false, false},
      {"response.csv", "plot_response.py", "absorbed energy S(nu)", false, false},
      {"efficiency.csv", "plot_efficiency.py", "transport efficiency vs dephasing", true, false},
      {"populations.csv", "plot_populations.py", "mode populations vs propagation length", false, false},
      {"spectrum.csv", "plot_spectrum.py", "occupation N(omega)", false, true},
      {"bogoliubov.csv", "plot_bogoliubov.py", "|beta(omega)|", false, true},
      {"trace.csv", "plot_trace.py", "annealing energy trace", false, false},
  };
  return specs;
}

inline std::string plot_script(const PlotSpec& s) {
  std::ostringstream py;
  py << "#!/usr/bin/env python3\n"
     << "# Reads " << s.csv << " next to this script; first column is the abscissa.\n"
     << "import csv, os\n"
     << "import matplotlib\n"
     << "matplotlib.use('Agg')\n"
     << "import matplotlib.pyplot as plt\n\n"
     << "here = os.path.dirname(os.path.abspath(__file__))\n"
     << "with open(os.path.join(here, '" << s.csv << "'), newline='') as f:\n"
     << "    rows = list(csv.reader(f))\n"
     << "head, data = rows[0], [[float(v) for v in r] for r in rows[1:] if r]\n"
     << "x = [r[0] for r in data]\n"
     << "fig, ax = plt.subplots(figsize=(6, 4))\n"
     << "for k, name in enumerate(head[1:], start=1):\n"
     << "    if name.endswith('_err'):\n"
     << "        continue\n"
     << "    y = [r[k] for r in data]\n"
     << "    err = head.index(name + '_err') if name + '_err' in head else None\n"
     << "    if err is None:\n"
     << "        ax.plot(x, y, label=name)\n"
     << "    else:\n"
     << "        ax.errorbar(x, y, yerr=[r[err] for r in data], label=name, capsize=2)\n"
     << "ax.set_xlabel(head[0])\n"
     << "ax.set_title('" << s.title << "')\n";
  if (s.log_x) py << "ax.set_xscale('log')\n";
  if (s.log_y) py << "ax.set_yscale('log')\n";
  py << "if len(head) > 2:\n"
     << "    ax.legend(fontsize='small')\n"
     << "fig.tight_layout()\n"
     << "fig.savefig(os.path.join(here, '" << s.script.substr(0, s.script.size() - 3) << ".png'), dpi=150)\n";
  return py.str();
}

/// Writes one plotting script per recognised CSV. Scripts load the CSVs at
/// run time and never embed data.
inline std::vector<std::string> emit_plots(const std::filesystem::path& dir) {
  std::vector<std::string> written;
  if (!std::filesystem::is_directory(dir)) throw ConfigError("run directory " + dir.string() + " does not exist");
  for (const auto& s : plot_catalog()) {
    if (!std::filesystem::exists(dir / s.csv)) continue;
    std::ofstream out(dir / s.script, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (dir / s.script).string());
    out << plot_script(s);
    written.push_back(s.script);
  }
  if (written.empty()) {
    std::string expected;
    for (const auto& s : plot_catalog()) expected += (expected.empty() ? "" : ", ") + s.csv;
    throw ConfigError("no plottable artifacts in " + dir.string() + "; expected one of: " + expected);
  }
  return written;
}

}  // namespace aqsim::io
