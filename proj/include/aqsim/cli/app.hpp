#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aqsim/cli/commands.hpp"

namespace aqsim::cli {

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<long long> seed;
  std::size_t jobs = 1;
  std::string out;
  std::string format = "csv";
  bool plots = false;
  bool print_defaults = false;
};

/// Merges file, manifest, --seed and --set layers and resolves against the schema.
inline Config assemble_config(const Command& c, const CommonOptions& o) {
  Config raw;
  if (!o.config.empty()) {
    raw = std::filesystem::path(o.config).extension() == ".json" ? io::config_from_manifest(o.config, c.name)
                                                                 : Config::load(o.config);
  }
  if (o.seed) raw.set("run.seed", std::to_string(*o.seed));
  for (const auto& s : o.sets) raw.set(s);
  return raw.resolve(c.schema, "'" + c.name + "'");
}

inline std::string describe_schema(const Command& c) {
  std::string s;
  std::string section;
  for (const auto& k : c.schema) {
    const auto dot = k.name.find('.');
    if (k.name.substr(0, dot) != section) {
      section = k.name.substr(0, dot);
      s += (s.empty() ? "" : "\n") + ("[" + section + "]\n");
    }
    s += k.name.substr(dot + 1) + " = " + k.default_value + "    # " + k.description + "\n";
  }
  return s;
}

/// Runs one subcommand end to end; returns the output directory.
inline std::filesystem::path execute(const Command& c, const CommonOptions& o, std::ostream& out) {
  const Config cfg = assemble_config(c, o);
  if (o.format != "csv" && o.format != "json") throw ConfigError("--format must be csv or json");
  if (o.jobs == 0) throw ConfigError("--jobs must be >= 1");
  const std::filesystem::path dir = o.out.empty() ? std::filesystem::path("aqsim-out") / c.name : std::filesystem::path(o.out);
  io::RunDirectory rd(dir, c.name, cfg, o.format);
  Context ctx{cfg, rd, o.jobs};
  Json summary = c.run(ctx);
  summary["subcommand"] = c.name;
  rd.write_json("summary.json", summary);
  rd.finish();
  if (o.plots && o.format == "csv") {
    try {
      io::emit_plots(dir);
    } catch (const ConfigError&) {
      // nothing plottable for this subcommand
    }
  }
  out << summary.dump(2) << "\n" << "wrote " << dir.string() << "\n";
  return dir;
}

/// Exit codes: 0 success, 1 physics or runtime failure, 2 configuration error.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"aqsim: analog quantum simulation toolkit"};
  app.set_version_flag("--version", std::string(io::kArtifactName) + " " + io::kArtifactVersion);
  app.require_subcommand(0, 1);
  std::string emit_dir;
  app.add_option("--emit-plots", emit_dir, "write plotting scripts for the CSVs in a run directory");

  const auto commands = all_commands();
  std::vector<CommonOptions> opts(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto* sub = app.add_subcommand(commands[i].name, commands[i].help);
    auto& o = opts[i];
    sub->add_option("--config", o.config, "config file, or a manifest.json to rerun");
    sub->add_option("--set", o.sets, "override section.key=value (repeatable)");
    sub->add_option("--seed", o.seed, "shorthand for --set run.seed=N");
    sub->add_option("--jobs", o.jobs, "worker threads; results do not depend on it");
    sub->add_option("--out", o.out, "output directory (default aqsim-out/<subcommand>)");
    sub->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--plots", o.plots, "also write plotting scripts");
    sub->add_flag("--print-defaults", o.print_defaults, "print the default config and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (!emit_dir.empty()) {
      for (const auto& s : io::emit_plots(emit_dir)) out << "wrote " << (std::filesystem::path(emit_dir) / s).string() << "\n";
      return 0;
    }
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (!app.got_subcommand(commands[i].name)) continue;
      if (opts[i].print_defaults) {
        out << describe_schema(commands[i]);
        return 0;
      }
      execute(commands[i], opts[i], out);
      return 0;
    }
    out << app.help();
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PhysicsGuardError& e) {
    err << "physics guard: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace aqsim::cli
