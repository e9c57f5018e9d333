#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aqsim/cli/app.hpp"
#include "aqsim/io/config.hpp"
#include "aqsim/io/csv.hpp"
#include "aqsim/io/run.hpp"

using namespace aqsim;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aqsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aqsim_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

io::Json read_json(const fs::path& p) { return io::Json::parse(slurp(p)); }

}  // namespace

TEST(Csv, QuotingRoundTrip) {
  const std::vector<std::string> fields = {"plain", "a,b", "say \"hi\"", "two\nlines", "", " padded "};
  std::ostringstream s;
  io::CsvWriter w(s);
  w.row(fields);
  w.row({"x", "y"});
  std::istringstream in(s.str());
  const auto rows = io::parse_csv(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], fields);
  EXPECT_EQ(rows[1], (std::vector<std::string>{"x", "y"}));
  EXPECT_NE(s.str().find("\"say \"\"hi\"\"\""), std::string::npos);
}

TEST(Csv, NumbersRoundTripExactly) {
  const std::vector<double> v = {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0};
  for (double x : v) EXPECT_EQ(std::stod(io::format_number(x)), x);
  EXPECT_EQ(io::format_number(std::nan("")), "nan");
  EXPECT_EQ(io::format_number(-INFINITY), "-inf");
}

TEST(Config, ParsesSectionsAndComments) {
  std::istringstream in("# top\n[model]\nL = 8   # sites\nname = \"a b\"\n\n[run]\nseed=3\n");
  const auto c = io::Config::parse(in);
  EXPECT_EQ(c.count("model.L"), 8u);
  EXPECT_EQ(c.str("model.name"), "a b");
  EXPECT_EQ(c.integer("run.seed"), 3);
  std::istringstream back(c.format());
  EXPECT_EQ(io::Config::parse(back).values(), c.values());
}

TEST(Config, RejectsMalformedInput) {
  std::istringstream outside("L = 3\n");
  EXPECT_THROW(io::Config::parse(outside), ConfigError);
  std::istringstream dup("[a]\nx=1\nx=2\n");
  EXPECT_THROW(io::Config::parse(dup), ConfigError);
  std::istringstream noeq("[a]\nx\n");
  EXPECT_THROW(io::Config::parse(noeq), ConfigError);
  auto c = io::Config::from_map({{"a.x", "1.5q"}, {"a.f", "maybe"}, {"a.n", "-2"}});
  EXPECT_THROW(c.number("a.x"), ConfigError);
  EXPECT_THROW(c.flag("a.f"), ConfigError);
  EXPECT_THROW(c.count("a.n"), ConfigError);
  EXPECT_THROW(c.set("nodot=1"), ConfigError);
}

TEST(Config, UnknownKeyNamesTheKey) {
  const io::ConfigSchema s = {{"model.L", "8", ""}};
  auto c = io::Config::from_map({{"model.Lx", "4"}});
  try {
    c.resolve(s, "mbl");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("model.Lx"), std::string::npos);
  }
}

TEST(Cli, UnknownConfigKeyExitsTwo) {
  const auto r = run_cli({"mbl", "--set", "model.sites=4", "--out", scratch("unknown").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("model.sites"), std::string::npos);
}

TEST(Cli, BadOptionExitsTwo) {
  EXPECT_EQ(run_cli({"mbl", "--format", "xml"}).code, 2);
  EXPECT_EQ(run_cli({"nosuch"}).code, 2);
  EXPECT_EQ(run_cli({"enaqt", "--config", "/nonexistent/file.cfg"}).code, 2);
}

TEST(Cli, PhysicsGuardExitsOne) {
  // more bosons than the hard-core lattice can hold
  const auto r = run_cli({"mbl", "--set", "model.particles=9", "--out", scratch("guard").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.code, 2);
}

TEST(Cli, RunWritesManifestWithHashes) {
  const auto dir = scratch("enaqt");
  const auto r = run_cli({"enaqt", "--set", "scan.points=5", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = read_json(dir / "manifest.json");
  EXPECT_EQ(m["artifact"], "aqsim");
  EXPECT_EQ(m["subcommand"], "enaqt");
  EXPECT_EQ(m["config"]["scan.points"], "5");
  EXPECT_EQ(m["artifacts"]["efficiency.csv"], sha256_hex(slurp(dir / "efficiency.csv")));
  EXPECT_EQ(m["artifacts"]["summary.json"], sha256_hex(slurp(dir / "summary.json")));
  EXPECT_EQ(slurp(dir / "manifest.json").find("timestamp"), std::string::npos);
}

TEST(Cli, RerunFromManifestIsBitIdentical) {
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  ASSERT_EQ(run_cli({"mbl", "--set", "model.L=6", "--set", "model.particles=3", "--set", "disorder.realizations=3",
                     "--set", "protocol.samples=11", "--set", "protocol.t_max=10", "--seed", "7", "--jobs", "2",
                     "--out", a.string()})
                .code,
            0);
  const auto r = run_cli({"mbl", "--config", (a / "manifest.json").string(), "--out", b.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(a / "manifest.json")["artifacts"], read_json(b / "manifest.json")["artifacts"]);
  EXPECT_EQ(slurp(a / "imbalance.csv"), slurp(b / "imbalance.csv"));
}

TEST(Cli, ManifestOfOtherSubcommandIsRejected) {
  const auto a = scratch("other");
  ASSERT_EQ(run_cli({"schema", "--out", a.string()}).code, 0);
  EXPECT_EQ(run_cli({"enaqt", "--config", (a / "manifest.json").string()}).code, 2);
}

TEST(Cli, JsonFormatEmbedsTables) {
  const auto dir = scratch("json");
  ASSERT_EQ(run_cli({"anneal", "--format", "json", "--out", dir.string()}).code, 0);
  EXPECT_FALSE(fs::exists(dir / "trace.csv"));
  const auto s = read_json(dir / "summary.json");
  EXPECT_EQ(s["tables"]["trace"]["columns"][0], "sweep");
  EXPECT_FALSE(s["tables"]["trace"]["rows"].empty());
  EXPECT_TRUE(s["found_ground_state"].get<bool>());
}

TEST(Cli, EmitPlotsOnEmptyDirectoryFails) {
  const auto dir = scratch("empty_plots");
  fs::create_directories(dir);
  const auto r = run_cli({"--emit-plots", dir.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("imbalance.csv"), std::string::npos);
}

TEST(Cli, EmitPlotsWritesScriptPerCsv) {
  const auto dir = scratch("plots");
  ASSERT_EQ(run_cli({"anneal", "--out", dir.string()}).code, 0);
  const auto r = run_cli({"--emit-plots", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string py = slurp(dir / "plot_trace.py");
  EXPECT_NE(py.find("trace.csv"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "plot_imbalance.py"));
}

TEST(Cli, FailingValidationStillExitsZero) {
  const auto dir = scratch("validate");
  const auto r = run_cli({"validate", "--set", "graph.kind=photonic", "--set", "photonic.assumed_scale=1.6", "--out",
                          dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = read_json(dir / "summary.json");
  bool saw_fail = false;
  for (const auto& e : s["reports"]) saw_fail |= e["verdict"] == "fail";
  EXPECT_TRUE(saw_fail);
  EXPECT_TRUE(fs::exists(dir / "report_formal.json"));
  EXPECT_NE(slurp(dir / "schema.dot").find("digraph"), std::string::npos);
}

TEST(Cli, PrintDefaultsListsSchema) {
  const auto r = run_cli({"hawking", "--print-defaults"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("[mode_mixing]"), std::string::npos);
  EXPECT_NE(r.out.find("cfl = 0.3"), std::string::npos);
}

TEST(Cli, JobsDoNotChangeResults) {
  const auto a = scratch("jobs1"), b = scratch("jobs3");
  for (auto [dir, jobs] : {std::pair{a, "1"}, std::pair{b, "3"}})
    ASSERT_EQ(run_cli({"enaqt", "--set", "scan.points=6", "--jobs", jobs, "--out", dir.string()}).code, 0);
  EXPECT_EQ(slurp(a / "efficiency.csv"), slurp(b / "efficiency.csv"));
}
