#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "aqsim/core/spectral.hpp"
#include "aqsim/enaqt/network.hpp"
#include "aqsim/enaqt/transport.hpp"
#include "aqsim/horizon/metric.hpp"
#include "aqsim/horizon/mode_mixing.hpp"
#include "aqsim/hubbard/higgs.hpp"
#include "aqsim/hubbard/model.hpp"
#include "aqsim/hubbard/quench.hpp"
#include "aqsim/io/config.hpp"
#include "aqsim/io/csv.hpp"
#include "aqsim/io/run.hpp"
#include "aqsim/ising/model.hpp"
#include "aqsim/ising/monte_carlo.hpp"
#include "aqsim/ising/tsp.hpp"
#include "aqsim/validation/runners.hpp"
#include "aqsim/validation/validate.hpp"
#include "aqsim/waveguide/waveguide.hpp"

namespace aqsim::cli {

using io::Config;
using io::ConfigSchema;
using io::Json;

struct Context {
  const Config& cfg;
  io::RunDirectory& out;
  std::size_t jobs = 1;
};

struct Command {
  std::string name;
  std::string help;
  ConfigSchema schema;
  std::function<Json(Context&)> run;  // returns summary.json content
};

namespace cmd_detail {

using Table = std::vector<std::vector<double>>;

/// CSV file in csv mode, embedded table in json mode.
inline void emit_table(Context& ctx, Json& summary, const std::string& name, const std::vector<std::string>& header,
                       const Table& rows) {
  if (ctx.out.csv()) {
    std::ostringstream s;
    io::CsvWriter w(s);
    w.row(header);
    for (const auto& r : rows) w.numbers(r);
    ctx.out.write(name + ".csv", s.str());
  } else {
    summary["tables"][name] = {{"columns", header}, {"rows", rows}};
  }
}

inline std::size_t positive_count(const Config& c, const std::string& key, std::size_t min = 1) {
  const std::size_t v = c.count(key);
  if (v < min) throw ConfigError("key '" + key + "' must be >= " + std::to_string(min));
  return v;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return x;
}

inline std::vector<double> logspace(double a, double b, std::size_t n) {
  if (!(a > 0.0 && b >= a)) throw ConfigError("log grid needs 0 < min <= max");
  auto e = linspace(std::log10(a), std::log10(b), n);
  for (double& v : e) v = std::pow(10.0, v);
  return e;
}

inline hubbard::HubbardParams hubbard_model(const Config& c) {
  hubbard::HubbardParams p;
  p.L = c.count("model.L");
  p.particles = static_cast<int>(c.integer("model.particles"));
  p.max_occupancy = static_cast<int>(c.integer("model.max_occupancy"));
  p.J = c.number("model.J");
  p.U = c.number("model.U");
  try {
    p.geometry = hubbard::parse_geometry(c.str("model.geometry"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("model.geometry: ") + e.what());
  }
  return p;
}

inline ising::IsingModel ising_model(const Config& c) {
  if (!c.str("model.file").empty()) return ising::load_edge_list(c.str("model.file"));
  const std::size_t rows = positive_count(c, "model.rows"), cols = positive_count(c, "model.cols");
  return ising::IsingModel::grid(rows, cols, c.number("model.coupling"), c.number("model.field"));
}

inline const ConfigSchema ising_model_keys = {
    {"model.file", "", "edge-list file; empty builds an open grid"},
    {"model.rows", "3", "grid rows"},
    {"model.cols", "3", "grid columns"},
    {"model.coupling", "1", "nearest-neighbour coupling V"},
    {"model.field", "0", "uniform field b"},
};

inline ConfigSchema join(ConfigSchema a, const ConfigSchema& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline Json spins_json(const ising::Spins& s) { return Json(s); }

}  // namespace cmd_detail

// ---------------------------------------------------------------- mbl

inline Command mbl_command() {
  using namespace cmd_detail;
  ConfigSchema s = {
      {"run.seed", "1", "seed for uniform disorder"},
      {"model.L", "8", "sites"},
      {"model.particles", "4", "bosons (one per initially occupied site)"},
      {"model.max_occupancy", "1", "per-site cap; 1 is hard-core"},
      {"model.J", "1", "hopping"},
      {"model.U", "0", "on-site interaction"},
      {"model.geometry", "chain", "chain | ladder"},
      {"disorder.kind", "quasiperiodic", "quasiperiodic | uniform"},
      {"disorder.deltas", "0,20", "disorder strengths to scan"},
      {"disorder.beta", "0.721", "quasiperiodic wave number"},
      {"disorder.phi", "0", "phase of realization 0"},
      {"disorder.realizations", "20", "realizations per strength"},
      {"protocol.t_max", "100", "final time in units of 1/J"},
      {"protocol.samples", "101", "equally spaced sample times including t = 0"},
      {"protocol.initial", "odd", "initially occupied sublattice: odd | even"},
      {"protocol.fit_t_min", "1", "zeta fit window start"},
      {"protocol.fit_t_max", "10", "zeta fit window end"},
      {"analysis.gap_ratio", "true", "mean gap ratio per strength"},
  };
  return {"mbl", "disordered Bose-Hubbard quench: imbalance and gap statistics", s, [](Context& ctx) {
            const Config& c = ctx.cfg;
            const auto params = hubbard_model(c);
            hubbard::DisorderSpec d;
            const std::string kind = c.str("disorder.kind");
            if (kind == "quasiperiodic")
              d.kind = hubbard::DisorderKind::kQuasiperiodic;
            else if (kind == "uniform")
              d.kind = hubbard::DisorderKind::kUniform;
            else
              throw ConfigError("disorder.kind must be quasiperiodic or uniform");
            d.beta = c.number("disorder.beta");
            d.phi = c.number("disorder.phi");
            d.seed = static_cast<std::uint64_t>(c.integer("run.seed"));
            d.realizations = positive_count(c, "disorder.realizations");
            const auto deltas = c.numbers("disorder.deltas");
            if (deltas.empty()) throw ConfigError("disorder.deltas is empty");
            const auto times = linspace(0.0, c.number("protocol.t_max"), positive_count(c, "protocol.samples", 2));
            const std::string init = c.str("protocol.initial");
            if (init != "odd" && init != "even") throw ConfigError("protocol.initial must be odd or even");
            const auto sub = init == "odd" ? hubbard::Sublattice::kOdd : hubbard::Sublattice::kEven;
            const hubbard::FitWindow win{c.number("protocol.fit_t_min"), c.number("protocol.fit_t_max")};
            const auto scan = hubbard::mbl_scan(params, d, deltas, times, sub, win, ctx.jobs);

            Json summary = {{"monotone_nondecreasing", scan.monotone_nondecreasing}};
            std::vector<std::string> header{"t"};
            for (double dl : deltas) {
              header.push_back("delta=" + io::format_number(dl));
              header.push_back("delta=" + io::format_number(dl) + "_err");
            }
            Table rows;
            for (std::size_t k = 0; k < times.size(); ++k) {
              std::vector<double> r{times[k]};
              for (const auto& q : scan.runs) {
                r.push_back(q.mean[k]);
                r.push_back(q.error[k]);
              }
              rows.push_back(std::move(r));
            }
            emit_table(ctx, summary, "imbalance", header, rows);

            const FockBasis basis = build_fock_basis(params.L, params.particles, params.max_occupancy);
            for (std::size_t i = 0; i < deltas.size(); ++i) {
              const auto& row = scan.rows[i];
              Json j = {{"delta", row.delta},
                        {"plateau", row.plateau.mean},
                        {"plateau_error", row.plateau.error},
                        {"realizations", row.realizations},
                        {"zeta_ok", row.zeta.ok},
                        {"zeta", row.zeta.zeta},
                        {"zeta_ci95", row.zeta.ci95}};
              if (!row.zeta.note.empty()) j["zeta_note"] = row.zeta.note;
              if (c.flag("analysis.gap_ratio")) {
                std::vector<double> r(d.realizations);
                hubbard::DisorderSpec spec = d;
                spec.delta = row.delta;
                parallel_for(r.size(), ctx.jobs, [&](std::size_t q) {
                  hubbard::HubbardParams p = params;
                  p.mu = hubbard::make_disorder(spec, p.L, q);
                  r[q] = gap_ratio_statistics(diagonalize(hubbard::build_bose_hubbard(p, basis)).energies).mean_r;
                });
                j["gap_ratio"] = mean_and_error(r).mean;
                j["gap_ratio_error"] = mean_and_error(r).error;
              }
              summary["rows"].push_back(j);
            }
            return summary;
          }};
}

// ---------------------------------------------------------------- higgs

inline Command higgs_command() {
  using namespace cmd_detail;
  ConfigSchema s = {
      {"run.seed", "1", "unused; kept for a uniform interface"},
      {"model.L", "6", "sites"},
      {"model.particles", "6", "bosons"},
      {"model.max_occupancy", "2", "per-site cap"},
      {"model.J", "0.2", "hopping"},
      {"model.U", "1", "on-site interaction"},
      {"model.geometry", "chain", "chain | ladder"},
      {"drive.amplitude", "0.03", "relative modulation of J"},
      {"drive.cycles", "20", "drive periods"},
      {"drive.steps_per_period", "64", "piecewise-constant steps per period"},
      {"scan.nu_min", "0.05", "lowest drive frequency"},
      {"scan.nu_max", "1.0", "highest drive frequency"},
      {"scan.points", "96", "frequency grid points"},
  };
  return {"higgs", "lattice-modulation spectroscopy S(nu) of the Bose-Hubbard chain", s, [](Context& ctx) {
            const Config& c = ctx.cfg;
            const auto p = hubbard_model(c);
            const FockBasis basis = build_fock_basis(p.L, p.particles, p.max_occupancy);
            hubbard::Modulation m;
            m.amplitude = c.number("drive.amplitude");
            m.cycles = static_cast<int>(c.integer("drive.cycles"));
            m.steps_per_period = static_cast<int>(c.integer("drive.steps_per_period"));
            const auto nus = linspace(c.number("scan.nu_min"), c.number("scan.nu_max"), positive_count(c, "scan.points", 2));
            const hubbard::HiggsProbe probe(p, basis, m);
            const auto sv = probe.scan(nus, ctx.jobs);
            Json summary;
            Table rows;
            for (std::size_t i = 0; i < nus.size(); ++i) rows.push_back({nus[i], sv[i]});
            emit_table(ctx, summary, "response", {"nu", "S"}, rows);
            const auto gap = hubbard::lowest_coupled_gap(p, basis);
            const std::size_t peak = hubbard::peak_index(sv);
            const double step = nus[1] - nus[0];
            summary["basis_dim"] = basis.dim();
            summary["peak_nu"] = nus[peak];
            summary["peak_S"] = sv[peak];
            summary["min_S"] = *std::min_element(sv.begin(), sv.end());
            summary["exact_gap"] = gap.gap;
            summary["exact_frequency"] = gap.frequency;
            summary["grid_step"] = step;
            summary["peak_within_one_step"] = std::abs(nus[peak] - gap.frequency) <= step * (1.0 + 1e-12);
            return summary;
          }};
}

// ---------------------------------------------------------------- enaqt

inline const ConfigSchema network_keys = {
    {"network.file", "", "network file; empty generates one"},
    {"network.shape", "chain", "generated network: chain | random"},
    {"network.sites", "5", "generated network size"},
    {"network.coupling", "1", "chain coupling or random coupling bound"},
    {"network.spread", "5", "site-energy spread (max - min for chains)"},
    {"network.trap_rate", "1", "sink trapping rate"},
    {"network.recombination", "0.05", "recombination rate"},
};

inline enaqt::ExcitonNetwork network_from(const Config& c) {
  if (!c.str("network.file").empty()) return enaqt::load_network(c.str("network.file"));
  const std::size_t n = cmd_detail::positive_count(c, "network.sites", 2);
  const auto seed = static_cast<std::uint64_t>(c.integer("run.seed"));
  const std::string shape = c.str("network.shape");
  if (shape == "chain")
    return enaqt::make_disordered_chain(n, c.number("network.coupling"), c.number("network.spread"), seed,
                                        c.number("network.trap_rate"), c.number("network.recombination"));
  if (shape == "random")
    return enaqt::make_random_network(n, c.number("network.coupling"), c.number("network.spread"), seed,
                                      c.number("network.trap_rate"), c.number("network.recombination"));
  throw ConfigError("network.shape must be chain or random");
}

inline Json network_json(const enaqt::ExcitonNetwork& net) {
  std::vector<std::vector<double>> v;
  for (Eigen::Index i = 0; i < net.V.rows(); ++i) {
    v.emplace_back();
    for (Eigen::Index j = 0; j < net.V.cols(); ++j) v.back().push_back(net.V(i, j));
  }
  return {{"epsilon", net.epsilon}, {"V", v}, {"input", net.input_site}, {"sink", net.sink_site},
          {"trap_rate", net.trap_rate}, {"recombination_rate", net.recombination_rate}};
}

inline Command enaqt_command() {
  using namespace cmd_detail;
  ConfigSchema s = join({{"run.seed", "1", "network generator seed"},
                         {"scan.gamma_min", "1e-3", "smallest dephasing rate"},
                         {"scan.gamma_max", "1e3", "largest dephasing rate"},
                         {"scan.points", "25", "log-spaced rates"},
                         {"scan.t_max", "400", "integration window"}},
                        network_keys);
  return {"enaqt", "noise-assisted transport efficiency scan", s, [](Context& ctx) {
            const Config& c = ctx.cfg;
            const auto net = network_from(c);
            const auto gammas = logspace(c.number("scan.gamma_min"), c.number("scan.gamma_max"),
                                         positive_count(c, "scan.points"));
            const auto curve = enaqt::goldilocks_scan(net, gammas, c.number("scan.t_max"), ctx.jobs);
            Json summary = {{"network", network_json(net)},
                            {"gamma_star", curve.gamma_star()},
                            {"eta_star", curve.eta[curve.argmax]},
                            {"interior_max", curve.interior_max()},
                            {"goldilocks_margin", curve.goldilocks_margin()},
                            {"max_bookkeeping", curve.max_bookkeeping}};
            Table rows;
            std::size_t unconverged = 0;
            for (std::size_t i = 0; i < gammas.size(); ++i) {
              rows.push_back({gammas[i], curve.eta[i]});
              unconverged += !curve.converged[i];
            }
            summary["unconverged_points"] = unconverged;
            emit_table(ctx, summary, "efficiency", {"gamma", "eta"}, rows);
            return summary;
          }};
}

// ---------------------------------------------------------------- walk

inline Command walk_command() {
  using namespace cmd_detail;
  ConfigSchema s = join({{"run.seed", "1", "network generator seed"},
                         {"array.scale", "1", "energy to inverse-length scale"},
                         {"array.refractive_index", "1.5", "refractive index n"},
                         {"array.c", "1", "speed of light"},
                         {"array.length", "10", "array length"},
                         {"array.samples", "101", "z samples including 0 and the full length"},
                         {"check.tolerance", "1e-9", "population distance accepted by the mapping check"}},
                        network_keys);
  for (auto& k : s) {
    if (k.name == "network.shape") k.default_value = "random";
    if (k.name == "network.sites") k.default_value = "7";
    if (k.name == "network.spread") k.default_value = "4";
  }
  return {"walk", "single-photon walk in a waveguide array mapped from an exciton network", s, [](Context& ctx) {
            const Config& c = ctx.cfg;
            const auto net = network_from(c);
            const units::Length len(c.number("array.length"));
            auto [array, record] = waveguide::map_fmo_to_waveguide(
                net, c.number("array.scale"), c.number("array.refractive_index"), units::Speed(c.number("array.c")), len);
            const auto zs = linspace(0.0, len.value, positive_count(c, "array.samples", 2));
            const std::size_t input = record.permutation[net.input_site];
            std::vector<std::string> header{"z"};
            for (std::size_t m = 0; m < array.size(); ++m) header.push_back("P" + std::to_string(m));
            Table rows;
            for (double z : zs) {
              const RVector p = waveguide::propagate(array, input, units::Length(z)).cwiseAbs2();
              std::vector<double> r{z};
              r.insert(r.end(), p.data(), p.data() + p.size());
              rows.push_back(std::move(r));
            }
            Json summary = {{"network", network_json(net)}, {"scale", record.scale}, {"mapping_residual", record.residual}};
            emit_table(ctx, summary, "populations", header, rows);
            const auto chk = waveguide::check_isomorphism(net, array, record, zs, c.number("check.tolerance"));
            summary["isomorphism"] = {{"max_distance", chk.max_distance}, {"tolerance", chk.tolerance},
                                      {"pass", chk.pass}, {"worst_input", chk.worst_input},
                                      {"worst_site", chk.worst_site}, {"worst_z", chk.worst_z}};
            return summary;
          }};
}

// ---------------------------------------------------------------- hawking

inline Command hawking_command() {
  using namespace cmd_detail;
  ConfigSchema s = {
      {"run.seed", "1", "unused; kept for a uniform interface"},
      {"profile.file", "", "profile CSV; empty samples v = v_mid + amplitude tanh(x / width), c = 1"},
      {"profile.v_mid", "1", "tanh profile centre velocity"},
      {"profile.amplitude", "0.5", "tanh profile amplitude; positive gives a black-hole horizon at x = 0"},
      {"profile.width", "2", "tanh profile width"},
      {"profile.points", "8000", "grid points"},
      {"profile.length", "1600", "domain length"},
      {"spectrum.omega_min", "0.01", "lowest frequency"},
      {"spectrum.omega_max", "2", "highest frequency"},
      {"spectrum.points", "100", "frequency points"},
      {"mode_mixing.enabled", "false", "run the wave-packet scattering simulation"},
      {"mode_mixing.omega0", "0.2", "packet carrier frequency"},
      {"mode_mixing.width", "25", "packet spatial width"},
      {"mode_mixing.center", "-400", "packet start position"},
      {"mode_mixing.cfl", "0.3", "CFL number"},
      {"mode_mixing.duration", "450", "evolution time; <= 0 picks the transit time"},
  };
  return {"hawking", "horizons, surface gravity, thermal spectra and mode mixing of a flow profile", s, [](Context& ctx) {
            const Config& c = ctx.cfg;
            const horizon::FlowProfile p =
                !c.str("profile.file").empty()
                    ? horizon::load_profile_csv(c.str("profile.file"))
                    : horizon::tanh_profile(c.number("profile.v_mid"), c.number("profile.amplitude"),
                                            c.number("profile.width"), positive_count(c, "profile.points", 3),
                                            c.number("profile.length"));
            const auto hs = horizon::find_horizons(horizon::effective_metric(p));
            Json summary = {{"kind", horizon::to_string(p.kind)}, {"horizons", Json::array()}};
            std::optional<double> kappa;
            for (const auto& h : hs) {
              Json j = {{"x", h.x}, {"type", horizon::to_string(h.type)}};
              if (p.kind == horizon::ProfileKind::kAcoustic) {
                const double k = horizon::surface_gravity(p, h.x);
                j["kappa"] = k;
                if (!kappa) kappa = k;
              }
              summary["horizons"].push_back(j);
            }
            if (kappa && *kappa > 0.0) {
              const auto om = linspace(c.number("spectrum.omega_min"), c.number("spectrum.omega_max"),
                                       positive_count(c, "spectrum.points", 2));
              const auto n = horizon::hawking_spectrum(*kappa, om);
              Table rows;
              for (std::size_t i = 0; i < om.size(); ++i) rows.push_back({om[i], n[i]});
              emit_table(ctx, summary, "spectrum", {"omega", "N"}, rows);
              const auto fit = horizon::fit_temperature(om, n);
              summary["fit"] = {{"kappa", fit.kappa}, {"r_squared", fit.r_squared}, {"points", fit.points},
                                {"poor", fit.poor}};
              summary["temperature"] = *kappa / (2.0 * std::numbers::pi);
            } else {
              summary["note"] = hs.empty() ? "no horizon on the grid" : "surface gravity unavailable for this profile";
            }
            if (c.flag("mode_mixing.enabled")) {
              horizon::WavePacket w{c.number("mode_mixing.omega0"), c.number("mode_mixing.width"),
                                    c.number("mode_mixing.center")};
              horizon::ModeMixingSettings st;
              st.cfl = c.number("mode_mixing.cfl");
              st.duration = c.number("mode_mixing.duration");
              const auto r = horizon::mode_mixing_sim(p, w, st);
              Table rows;
              for (std::size_t i = 0; i < r.omega.size(); ++i)
                rows.push_back({r.omega[i], r.alpha[i], r.beta[i], r.residual[i], r.accepted[i] ? 1.0 : 0.0});
              emit_table(ctx, summary, "bogoliubov", {"omega", "alpha", "beta", "residual", "accepted"}, rows);
              summary["mode_mixing"] = {{"max_beta", r.max_beta}, {"max_residual", r.max_residual},
                                        {"rejected", r.rejected}, {"kg_drift", r.kg_drift}, {"steps", r.steps},
                                        {"dt", r.dt}, {"duration", r.duration}};
            }
            return summary;
          }};
}

// ---------------------------------------------------------------- ising

inline Command ising_command() {
  using namespace cmd_detail;
  ConfigSchema s = join({{"run.seed", "1", "Markov-chain seed"},
                         {"estimate.beta", "0.4", "inverse temperature"},
                         {"estimate.samples", "2000", "samples per ratio"},
                         {"estimate.burn_in", "50", "sweeps before sampling at each level"},
                         {"estimate.thin", "2", "sweeps between samples"},
                         {"estimate.ladder_q", "1.15", "geometric ladder growth"},
                         {"estimate.step_budget", "1.0", "max (delta beta) x energy scale per ratio"},
                         {"estimate.exact", "true", "also enumerate exactly when n <= 24"}},
                        ising_model_keys);
  return {"ising", "partition function of an Ising model by a temperature ladder", s, [](Context& ctx) {
            const Config& c = ctx.cfg;
            const auto m = ising_model(c);
            ising::EstimatorOptions o;
            o.samples = positive_count(c, "estimate.samples");
            o.burn_in = c.count("estimate.burn_in");
            o.thin = positive_count(c, "estimate.thin");
            o.ladder_q = c.number("estimate.ladder_q");
            o.step_budget = c.number("estimate.step_budget");
            o.seed = static_cast<std::uint64_t>(c.integer("run.seed"));
            const double beta = c.number("estimate.beta");
            const auto est = ising::estimate_partition(m, beta, o);
            Json summary = {{"spins", m.size()},      {"beta", beta},
                            {"z", est.z},             {"log_z", est.log_z},
                            {"relative_error", est.relative_error},
                            {"ladder_levels", est.ladder.size()},
                            {"warnings", est.warnings}};
            Table rows;
            for (std::size_t k = 0; k < est.log_ratios.size(); ++k)
              rows.push_back({est.ladder[k + 1], est.log_ratios[k], est.ratio_relative_errors[k]});
            emit_table(ctx, summary, "ladder", {"beta", "log_ratio", "relative_error"}, rows);
            if (c.flag("estimate.exact") && m.size() <= 24) {
              const auto ex = ising::exact_partition(m, beta);
              summary["exact_log_z"] = ex.log_z;
              summary["exact_z"] = ex.z;
              summary["deviation"] = std::expm1(est.log_z - ex.log_z);
            }
            return summary;
          }};
}

// ---------------------------------------------------------------- anneal

inline Command anneal_command() {
  using namespace cmd_detail;
  ConfigSchema s = join({{"run.seed", "1", "annealing seed"},
                         {"schedule.beta_start", "0.1", "initial inverse temperature"},
                         {"schedule.beta_end", "10", "final inverse temperature"},
                         {"schedule.levels", "200", "geometric levels"},
                         {"schedule.sweeps", "10", "sweeps per level"}},
                        ising_model_keys);
  return {"anneal", "simulated annealing of an Ising model", s, [](Context& ctx) {
            const Config& c = ctx.cfg;
            const auto m = ising_model(c);
            const auto sched = ising::AnnealSchedule::geometric(
                c.number("schedule.beta_start"), c.number("schedule.beta_end"), positive_count(c, "schedule.levels"),
                positive_count(c, "schedule.sweeps"), static_cast<std::uint64_t>(c.integer("run.seed")));
            const auto r = ising::simulated_annealing(m, sched);
            Json summary = {{"spins", m.size()},
                            {"best_energy", r.best_energy},
                            {"initial_energy", r.initial_energy},
                            {"best_state", spins_json(r.best)}};
            Table rows;
            for (std::size_t k = 0; k < r.trace.size(); ++k)
              rows.push_back({static_cast<double>(k + 1), r.trace[k], r.best_trace[k]});
            emit_table(ctx, summary, "trace", {"sweep", "energy", "best"}, rows);
            if (m.size() <= 24) {
              const auto ex = ising::exact_partition(m, 1.0);
              summary["ground_energy"] = ex.ground_energy;
              summary["found_ground_state"] = std::abs(r.best_energy - ex.ground_energy) <= 1e-9 * (1.0 + std::abs(ex.ground_energy));
            }
            return summary;
          }};
}

// ---------------------------------------------------------------- tsp

inline Command tsp_command() {
  using namespace cmd_detail;
  ConfigSchema s = {
      {"run.seed", "1", "city generator and annealing seed"},
      {"cities.file", "", "city CSV (x,y or name,x,y); empty draws cities in the unit square"},
      {"cities.n", "8", "generated city count"},
      {"encoding.A", "0", "constraint penalty; <= 0 picks the default"},
      {"encoding.B", "1", "tour-length weight"},
      {"schedule.levels", "2000", "geometric levels"},
      {"schedule.sweeps", "50", "sweeps per level"},
      {"schedule.beta_start", "0.2", "initial beta in units of 1 / (B max d)"},
      {"schedule.beta_end", "100", "final beta in units of 1 / (B max d)"},
      {"check.brute_force", "true", "exact optimum for up to 10 cities"},
  };
  return {"tsp", "travelling salesman through its one-hot Ising encoding", s, [](Context& ctx) {
            const Config& c = ctx.cfg;
            const auto seed = static_cast<std::uint64_t>(c.integer("run.seed"));
            ising::TspInstance inst = !c.str("cities.file").empty()
                                          ? ising::load_cities_csv(c.str("cities.file"))
                                          : ising::TspInstance::random(positive_count(c, "cities.n", 3), seed);
            inst.A = c.number("encoding.A");
            inst.B = c.number("encoding.B");
            const auto [model, enc] = ising::tsp_to_ising(inst);
            const double unit = enc.B * enc.distances.maxCoeff();
            const auto sched = ising::AnnealSchedule::geometric(
                c.number("schedule.beta_start") / unit, c.number("schedule.beta_end") / unit,
                positive_count(c, "schedule.levels"), positive_count(c, "schedule.sweeps"), seed);
            const auto r = ising::anneal_tsp(model, enc, sched);
            Json summary = {{"cities", inst.size()},
                            {"A", enc.A},
                            {"B", enc.B},
                            {"dominance_guaranteed", enc.dominance_guaranteed},
                            {"feasible", r.decoded.feasible()},
                            {"length", r.length},
                            {"best_energy", r.anneal.best_energy}};
            if (r.decoded.feasible()) {
              summary["tour"] = *r.decoded.tour;
              Table rows;
              const auto& t = *r.decoded.tour;
              for (std::size_t k = 0; k < t.size(); ++k) {
                std::vector<double> row{static_cast<double>(k), static_cast<double>(t[k])};
                if (!inst.coordinates.empty()) {
                  row.push_back(inst.coordinates[t[k]].first);
                  row.push_back(inst.coordinates[t[k]].second);
                }
                rows.push_back(std::move(row));
              }
              std::vector<std::string> header{"position", "city"};
              if (!inst.coordinates.empty()) header.insert(header.end(), {"x", "y"});
              emit_table(ctx, summary, "tour", header, rows);
            } else {
              for (const auto& v : r.decoded.violations) summary["violations"].push_back(v.describe());
            }
            if (c.flag("check.brute_force") && inst.size() <= 10) {
              const auto bf = ising::brute_force_tsp(inst.distances);
              summary["optimum_length"] = bf.length;
              summary["tours_checked"] = bf.tours_checked;
              summary["optimal"] = r.decoded.feasible() && r.length <= bf.length * (1.0 + 1e-12);
            }
            return summary;
          }};
}

// ---------------------------------------------------------------- validate / schema

inline const ConfigSchema graph_keys = {
    {"run.seed", "1", "photonic network seed and fabrication jitter seed"},
    {"graph.kind", "mbl", "mbl (computation) | photonic (emulation)"},
    {"mbl.L", "6", "lattice sites"},
    {"mbl.particles", "3", "bosons"},
    {"mbl.max_occupancy", "2", "per-site cap"},
    {"mbl.t_max", "10", "quench duration"},
    {"mbl.samples", "21", "quench samples"},
    {"mbl.trap_curvature", "0", "system-model trap curvature"},
    {"mbl.trap_center", "2.5", "trap centre in lattice units"},
    {"mbl.nnn_hopping", "0", "system-model next-nearest hopping"},
    {"mbl.regime_U", "0,2", "interaction values of the regime grid"},
    {"mbl.regime_delta", "0,5", "disorder values of the regime grid"},
    {"photonic.sites", "7", "exciton network size"},
    {"photonic.spread", "4", "site-energy spread"},
    {"photonic.coupling", "1", "coupling bound"},
    {"photonic.scale", "2", "fabricated energy-to-inverse-length scale"},
    {"photonic.assumed_scale", "0", "scale assumed by the mapping; <= 0 uses the fabricated one"},
    {"photonic.refractive_index", "1.5", "refractive index"},
    {"photonic.jitter", "0", "relative coupler fabrication error in the system model"},
    {"photonic.regime_z", "2,5", "array lengths of the regime grid"},
    {"photonic.samples", "11", "samples per run"},
};

namespace cmd_detail {

struct BuiltGraph {
  validation::ModelGraph graph;
  std::optional<validation::Mapping> mapping_override;
  std::vector<std::string> observables;
};

inline BuiltGraph build_graph(const Config& c) {
  using namespace validation;
  BuiltGraph b;
  const std::string kind = c.str("graph.kind");
  if (kind == "mbl") {
    MblSetup s;
    s.lattice.L = positive_count(c, "mbl.L", 2);
    s.lattice.particles = static_cast<int>(c.integer("mbl.particles"));
    s.lattice.max_occupancy = static_cast<int>(c.integer("mbl.max_occupancy"));
    s.lattice.t_max = c.number("mbl.t_max");
    s.lattice.samples = positive_count(c, "mbl.samples", 2);
    s.perturbation.trap_curvature = c.number("mbl.trap_curvature");
    s.perturbation.trap_center = c.number("mbl.trap_center");
    s.perturbation.nnn_hopping = c.number("mbl.nnn_hopping");
    s.regime.clear();
    for (double u : c.numbers("mbl.regime_U"))
      for (double d : c.numbers("mbl.regime_delta")) s.regime.push_back({{"U", u}, {"delta", d}});
    if (s.regime.empty()) throw ConfigError("mbl regime grid is empty");
    b.graph = mbl_graph(s);
    b.observables = {"imbalance"};
  } else if (kind == "photonic") {
    PhotonicSetup s;
    s.seed = static_cast<std::uint64_t>(c.integer("run.seed"));
    s.network = enaqt::make_random_network(positive_count(c, "photonic.sites", 2), c.number("photonic.coupling"),
                                           c.number("photonic.spread"), s.seed);
    s.scale = c.number("photonic.scale");
    s.refractive_index = c.number("photonic.refractive_index");
    s.fabrication_jitter = c.number("photonic.jitter");
    s.regime.clear();
    for (double z : c.numbers("photonic.regime_z"))
      s.regime.push_back({{"z_max", z}, {"samples", static_cast<double>(positive_count(c, "photonic.samples", 2))}});
    if (s.regime.empty()) throw ConfigError("photonic regime grid is empty");
    b.graph = enaqt_graph(s);
    if (c.number("photonic.assumed_scale") > 0.0)
      b.mapping_override = waveguide_to_exciton_mapping(c.number("photonic.assumed_scale"), s.refractive_index, s.c,
                                                        "waveguide_to_exciton(assumed)");
    b.observables = {"population", "spectrum"};
  } else {
    throw ConfigError("graph.kind must be mbl or photonic");
  }
  return b;
}

inline validation::Tri parse_tri(const std::string& key, const std::string& v) {
  if (v == "yes" || v == "true") return validation::Tri::kYes;
  if (v == "no" || v == "false") return validation::Tri::kNo;
  if (v == "unknown") return validation::Tri::kUnknown;
  throw ConfigError("key '" + key + "' must be yes, no or unknown");
}

}  // namespace cmd_detail

inline Command validate_command() {
  using namespace cmd_detail;
  ConfigSchema s = join(graph_keys, {{"check.norms", "internal,formal,empirical", "checks to run"},
                                     {"check.tolerance", "1e-9", "accepted discrepancy"},
                                     {"check.metric", "absolute", "absolute | scaled"},
                                     {"speedup.proven_hard", "false", "proven harder than classically simulable"},
                                     {"speedup.classical_efficient", "true", "best known classical algorithm efficient"},
                                     {"speedup.scales_up", "unknown", "device scales without losing accuracy: yes | no | unknown"},
                                     {"speedup.favourable_scaling", "false", "quantum resource scaling more favourable"},
                                     {"speedup.justification", "desk-scale classical rerun exists", "free text echoed into reports"}});
  return {"validate", "run validation norms over a model graph and write reports", s, [](Context& ctx) {
            using namespace validation;
            const Config& c = ctx.cfg;
            auto b = build_graph(c);
            ValidationOptions o;
            o.jobs = ctx.jobs;
            const std::string metric = c.str("check.metric");
            if (metric == "absolute")
              o.metric = Metric::kAbsolute;
            else if (metric == "scaled")
              o.metric = Metric::kScaled;
            else
              throw ConfigError("check.metric must be absolute or scaled");
            o.config = c.values();
            ProblemMetadata meta;
            meta.proven_hard = c.flag("speedup.proven_hard");
            meta.classical_efficient = c.flag("speedup.classical_efficient");
            meta.scales_up = parse_tri("speedup.scales_up", c.str("speedup.scales_up"));
            meta.favourable_quantum_scaling = c.flag("speedup.favourable_scaling");
            meta.justification = c.str("speedup.justification");
            try {
              o.speedup = classify_speedup(meta);
            } catch (const InvalidArgument& e) {
              throw ConfigError(std::string("speedup metadata: ") + e.what());
            }
            const double tol = c.number("check.tolerance");
            Json summary = {{"shape", to_string(b.graph.shape())},
                            {"speedup_class", to_string(o.speedup->letter)},
                            {"reports", Json::array()}};
            std::stringstream norms(c.str("check.norms"));
            std::string n;
            while (std::getline(norms, n, ',')) {
              n = io::cfg_detail::trim(n);
              if (n.empty()) continue;
              std::optional<ValidationReport> r;
              if (n == "internal") {
                r = internal_validate(b.graph, b.observables, {}, tol, o);
              } else if (n == "formal") {
                r = formal_external_validate(b.graph, b.observables, tol, o, b.mapping_override);
              } else if (n == "empirical") {
                if (!b.graph.find_role(Side::kTarget, Level::kSystem)) {
                  summary["skipped"].push_back("empirical: graph has no target system data");
                  continue;
                }
                r = empirical_external_validate(b.graph, b.observables, tol, o);
              } else {
                throw ConfigError("check.norms: unknown check '" + n + "' (internal|formal|empirical)");
              }
              record_report(b.graph, *r);
              ctx.out.write("report_" + n + ".json", r->dump());
              Json e = {{"check", n},
                        {"norm", r->norm()},
                        {"verdict", to_string(r->verdict())},
                        {"max_discrepancy", r->max_discrepancy()},
                        {"content_sha256", r->content_hash()}};
              if (const auto* w = r->worst(); w && !r->passed()) {
                e["worst_observable"] = w->name;
                e["worst_params"] = w->worst_params;
              }
              summary["reports"].push_back(e);
            }
            ctx.out.write("schema.dot", render_schema(b.graph));
            ctx.out.write_json("graph.json", graph_to_json(b.graph));
            return summary;
          }};
}

inline Command schema_command() {
  return {"schema", "render the model graph as DOT and JSON", graph_keys, [](Context& ctx) {
            const auto b = cmd_detail::build_graph(ctx.cfg);
            ctx.out.write("schema.dot", validation::render_schema(b.graph));
            ctx.out.write_json("graph.json", validation::graph_to_json(b.graph));
            return Json{{"shape", validation::to_string(b.graph.shape())},
                        {"nodes", b.graph.nodes().size()},
                        {"edges", b.graph.edges().size()}};
          }};
}

inline std::vector<Command> all_commands() {
  return {mbl_command(),   higgs_command(), enaqt_command(),  walk_command(),     hawking_command(),
          ising_command(), anneal_command(), tsp_command(),   validate_command(), schema_command()};
}

}  // namespace aqsim::cli
