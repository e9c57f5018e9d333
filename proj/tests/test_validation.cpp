#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "aqsim/validation/graph.hpp"
#include "aqsim/validation/report.hpp"
#include "aqsim/validation/runners.hpp"
#include "aqsim/validation/validate.hpp"

using namespace aqsim;
using namespace aqsim::validation;

namespace {

enaqt::ExcitonNetwork random_network(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  enaqt::ExcitonNetwork net;
  net.epsilon.resize(n);
  for (auto& e : net.epsilon) e = 2.0 * u(g);
  net.V = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < net.V.rows(); ++i)
    for (Eigen::Index j = i + 1; j < net.V.cols(); ++j) net.V(i, j) = net.V(j, i) = u(g);
  net.sink_site = n - 1;
  return net;
}

MblSetup trap_setup(double curvature) {
  MblSetup s;
  s.perturbation.trap_curvature = curvature;
  s.perturbation.trap_center = 2.5;
  return s;
}

PhotonicSetup photonic(double scale = 2.0) {
  PhotonicSetup s;
  s.network = random_network(7, 4);
  s.scale = scale;
  s.refractive_index = 1.5;
  return s;
}

// Two-node source pair returning a fixed synthetic value, for boundary tests.
ModelGraph synthetic_graph(double sim_value, double sys_value) {
  ModelGraph g;
  g.add_node({"sys", Side::kSource, Level::kSystem, "const_sys",
              [=](const Params&) { return Observables{{"x", {sys_value}}}; }, std::nullopt, {}, ""});
  g.add_node({"sim", Side::kSource, Level::kSimulation, "const_sim",
              [=](const Params&) { return Observables{{"x", {sim_value}}}; }, std::nullopt, {}, ""});
  g.add_edge(RelationEdge::limiting("sys", "sim", {{{"a", 0.0}}}));
  return g;
}

ValidationOptions scaled() {
  ValidationOptions o;
  o.metric = Metric::kScaled;
  return o;
}

Runner constant_runner(double v) {
  return [v](const Params&) { return Observables{{"x", {v}}}; };
}

}  // namespace

TEST(Hash, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Graph, MblIsComputationShaped) {
  const ModelGraph g = mbl_graph(trap_setup(0.0));
  EXPECT_EQ(g.shape(), GraphShape::kComputation);
  EXPECT_NO_THROW(g.require_shape(GraphShape::kComputation));
  EXPECT_THROW(g.require_shape(GraphShape::kEmulation), InvalidArgument);
  EXPECT_EQ(g.find_role(Side::kTarget, Level::kSystem), nullptr);
}

TEST(Graph, EnaqtIsEmulationShaped) {
  const ModelGraph g = enaqt_graph(photonic());
  EXPECT_EQ(g.shape(), GraphShape::kEmulation);
  EXPECT_EQ(g.nodes().size(), 4u);
  EXPECT_EQ(g.edges().size(), 3u);
}

TEST(Graph, RoleConstraints) {
  ModelGraph g;
  auto r = constant_runner(0.0);
  g.add_node({"ss", Side::kSource, Level::kSystem, "", r, std::nullopt, {}, ""});
  g.add_node({"ts", Side::kTarget, Level::kSystem, "", r, std::nullopt, {}, ""});
  g.add_node({"si", Side::kSource, Level::kSimulation, "", r, std::nullopt, {}, ""});
  g.add_node({"ti", Side::kTarget, Level::kSimulation, "", r, std::nullopt, {}, ""});
  // isomorphism between two system models
  EXPECT_THROW(g.add_edge(RelationEdge::isomorphism("ss", "ts", {})), InvalidArgument);
  // limiting relation across sides
  EXPECT_THROW(g.add_edge(RelationEdge::limiting("ss", "ti", {})), InvalidArgument);
  // limiting relation between two simulation models
  EXPECT_THROW(g.add_edge(RelationEdge::limiting("si", "ti", {})), InvalidArgument);
  // isomorphism within one side
  EXPECT_THROW(g.add_edge(RelationEdge::isomorphism("ss", "si", {})), InvalidArgument);
  EXPECT_THROW(g.add_edge(RelationEdge::limiting("ss", "nope", {})), InvalidArgument);
  EXPECT_TRUE(g.edges().empty());
  g.add_edge(RelationEdge::limiting("ss", "si", {}));
  // a second relation between the same pair closes a cycle
  EXPECT_THROW(g.add_edge(RelationEdge::limiting("si", "ss", {})), InvalidArgument);
}

TEST(Graph, NodeInvariants) {
  ModelGraph g;
  g.add_node({"a", Side::kSource, Level::kSystem, "", constant_runner(0), std::nullopt, {}, ""});
  EXPECT_THROW(g.add_node({"a", Side::kTarget, Level::kSystem, "", constant_runner(0), std::nullopt, {}, ""}),
               InvalidArgument);
  EXPECT_THROW(g.add_node({"b", Side::kSource, Level::kSystem, "", constant_runner(0), std::nullopt, {}, ""}),
               InvalidArgument);
  EXPECT_THROW(g.add_node({"c", Side::kSource, Level::kSimulation, "", Runner{}, std::nullopt, {}, ""}),
               InvalidArgument);
}

TEST(Graph, IncompleteShapes) {
  const ModelGraph g = synthetic_graph(0, 0);
  EXPECT_EQ(g.shape(), GraphShape::kIncomplete);
}

TEST(Schema, ComputationDiagramHasThreeNodes) {
  const std::string dot = render_schema(mbl_graph(trap_setup(0.0)));
  std::size_t boxes = 0, pos = 0;
  while ((pos = dot.find("\\n", pos)) != std::string::npos) ++boxes, ++pos;
  EXPECT_EQ(boxes, 3u);
  EXPECT_NE(dot.find("label=\"limit\""), std::string::npos);
  EXPECT_NE(dot.find("label=\"iso\""), std::string::npos);
}

TEST(Schema, EmulationDiagramEdges) {
  const std::string dot = render_schema(enaqt_graph(photonic()));
  auto count = [&](const std::string& s) {
    std::size_t n = 0, pos = 0;
    while ((pos = dot.find(s, pos)) != std::string::npos) ++n, ++pos;
    return n;
  };
  EXPECT_EQ(count("label=\"limit\""), 2u);
  EXPECT_EQ(count("label=\"iso\""), 1u);
}

TEST(Schema, ByteStableAndStyled) {
  ModelGraph g = mbl_graph(trap_setup(0.0));
  const std::string a = render_schema(g), b = render_schema(mbl_graph(trap_setup(0.0)));
  EXPECT_EQ(a, b);
  g.mark_validated(0, 1e-12, "test");
  const std::string c = render_schema(g);
  EXPECT_NE(a, c);
  EXPECT_NE(c.find("style=bold"), std::string::npos);
  EXPECT_THROW(render_schema(ModelGraph{}), InvalidArgument);
}

TEST(Internal, ZeroPerturbationPassesAtMachineTolerance) {
  const ModelGraph g = mbl_graph(trap_setup(0.0));
  const auto r = internal_validate(g, {"imbalance"}, {}, 1e-12);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.norm(), "1a");
  EXPECT_LE(r.max_discrepancy(), 1e-12);
  EXPECT_EQ(r.observables().front().name, "imbalance");
  EXPECT_NE(r.substitution().find("system model"), std::string::npos);
}

TEST(Internal, WeakTrapPassesStrongTrapFailsWithWorstPoint) {
  const auto weak = internal_validate(mbl_graph(trap_setup(0.001)), {"imbalance"}, {}, 0.05,
                                      scaled());
  EXPECT_TRUE(weak.passed()) << weak.max_discrepancy();
  EXPECT_GT(weak.max_discrepancy(), 0.0);

  const MblSetup strong = trap_setup(0.5);
  const auto r = internal_validate(mbl_graph(strong), {"imbalance"}, {}, 0.05, scaled());
  EXPECT_FALSE(r.passed());
  const ObservableComparison* w = r.worst();
  ASSERT_NE(w, nullptr);
  // independent recomputation of the reported worst point
  const auto sim = hubbard_simulation_runner(strong.lattice)(w->worst_params).at("imbalance");
  const auto sys = hubbard_system_runner(strong.lattice, strong.perturbation)(w->worst_params).at("imbalance");
  double worst = 0.0;
  for (const auto& p : strong.regime) {
    const auto a = hubbard_simulation_runner(strong.lattice)(p).at("imbalance");
    const auto b = hubbard_system_runner(strong.lattice, strong.perturbation)(p).at("imbalance");
    double scale = 0.0;
    for (double v : b) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]) / scale);
  }
  EXPECT_NEAR(w->max_discrepancy, worst, 1e-14);
  EXPECT_DOUBLE_EQ(w->candidate_value, sim[w->worst_component]);
  EXPECT_DOUBLE_EQ(w->reference_value, sys[w->worst_component]);
  EXPECT_EQ(r.to_json().at("verdict"), "fail");
}

TEST(Internal, VerdictFlipsAtToleranceBoundary) {
  const ModelGraph g = synthetic_graph(1.25, 1.0);
  EXPECT_TRUE(internal_validate(g, {"x"}, {}, 0.25).passed());
  EXPECT_FALSE(internal_validate(g, {"x"}, {}, std::nextafter(0.25, 0.0)).passed());
}

TEST(Internal, ToleranceMonotone) {
  const ModelGraph g = mbl_graph(trap_setup(0.05));
  const auto r = internal_validate(g, {"imbalance"}, {}, 0.0);
  const double d = r.max_discrepancy();
  for (double tau : {d, 1.01 * d, 2.0 * d, 1.0, 1e3}) EXPECT_TRUE(internal_validate(g, {"imbalance"}, {}, tau).passed());
}

TEST(Internal, ParallelMatchesSerial) {
  const ModelGraph g = mbl_graph(trap_setup(0.1));
  ValidationOptions serial, par;
  par.jobs = 3;
  EXPECT_EQ(internal_validate(g, {"imbalance"}, {}, 0.05, serial).dump(),
            internal_validate(g, {"imbalance"}, {}, 0.05, par).dump());
}

TEST(Internal, RunnerFailureCarriesContext) {
  const ModelGraph g = mbl_graph(trap_setup(0.0));
  try {
    internal_validate(g, {"imbalance"}, {{{"U", 1.0}}, {{"bogus", 1.0}}}, 1e-9);
    FAIL() << "expected an error";
  } catch (const InvalidArgument& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("point 1"), std::string::npos) << m;
    EXPECT_NE(m.find("bogus"), std::string::npos) << m;
  }
  EXPECT_THROW(internal_validate(g, {"missing"}, {}, 1e-9), DimensionMismatch);
  EXPECT_THROW(internal_validate(g, {}, {}, 1e-9), InvalidArgument);
}

TEST(Report, DeterministicBytes) {
  const ModelGraph g = mbl_graph(trap_setup(0.2));
  ValidationOptions o;
  o.config["seed"] = "7";
  const auto a = internal_validate(g, {"imbalance"}, {}, 0.01, o);
  const auto b = internal_validate(mbl_graph(trap_setup(0.2)), {"imbalance"}, {}, 0.01, o);
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a.content_hash(), b.content_hash());
  EXPECT_EQ(a.content_hash().size(), 64u);
  EXPECT_TRUE(a.to_json().at("timestamp").is_null());
  o.config["seed"] = "8";
  EXPECT_NE(internal_validate(g, {"imbalance"}, {}, 0.01, o).inputs_digest(), a.inputs_digest());
}

TEST(Report, NormIds) {
  for (auto id : kNormIds) EXPECT_NO_THROW(check_norm_id(std::string(id)));
  EXPECT_THROW(check_norm_id("5a"), InvalidArgument);
  EXPECT_THROW(check_norm_id("1c"), InvalidArgument);
  ValidationOptions o;
  o.norm = "9z";
  EXPECT_THROW(internal_validate(synthetic_graph(0, 0), {"x"}, {}, 1.0, o), InvalidArgument);
}

TEST(Report, WriteOnce) {
  const auto r = internal_validate(synthetic_graph(1, 1), {"x"}, {}, 0.0);
  const auto path = std::filesystem::temp_directory_path() / "aqsim_report_once.json";
  std::filesystem::remove(path);
  r.write(path);
  EXPECT_THROW(r.write(path), InvalidArgument);
  std::filesystem::remove(path);
}

TEST(Report, RecordUpgradesEdge) {
  ModelGraph g = mbl_graph(trap_setup(0.0));
  const auto r = internal_validate(g, {"imbalance"}, {}, 1e-12);
  EXPECT_TRUE(record_report(g, r));
  EXPECT_EQ(g.edges()[0].status, EdgeStatus::kValidated);
  EXPECT_NE(g.edges()[0].evidence.find(r.content_hash()), std::string::npos);
  EXPECT_FALSE(record_report(g, r));
}

TEST(Formal, ExactScalingPasses) {
  const auto g = enaqt_graph(photonic(2.0));
  const auto r = formal_external_validate(g, {"population", "spectrum"}, 1e-10);
  EXPECT_TRUE(r.passed()) << r.max_discrepancy();
  EXPECT_EQ(r.norm(), "2b");
}

TEST(Formal, WrongScaleFailsWithFactorEstimate) {
  const auto s = photonic(2.0);
  const auto g = enaqt_graph(s);
  const auto r = formal_external_validate(g, {"population", "spectrum"}, 1e-6, {},
                                          waveguide_to_exciton_mapping(1.6, s.refractive_index, s.c, "wrong"));
  EXPECT_FALSE(r.passed());
  const auto& spec = r.observables()[1];
  EXPECT_EQ(spec.name, "spectrum");
  // fabricated 2.0, assumed 1.6: spectra differ by exactly 2.0 / 1.6
  EXPECT_NEAR(spec.scale_estimate, 1.25, 1e-12);
  bool noted = false;
  for (const auto& n : r.notes()) noted = noted || n.find("spectrum") != std::string::npos;
  EXPECT_TRUE(noted);
}

TEST(Formal, MappingDomainViolation) {
  const auto s = photonic();
  const auto g = enaqt_graph(s);
  EXPECT_THROW(formal_external_validate(g, {"spectrum"}, 1e-10, {}, std::nullopt, {{{"z_max", -1.0}}}),
               InvalidArgument);
}

TEST(Formal, CitationSkipsRunners) {
  ModelGraph g;
  int calls = 0;
  Runner counted = [&](const Params&) {
    ++calls;
    return Observables{{"x", {0.0}}};
  };
  g.add_node({"lattice_system", Side::kSource, Level::kSystem, "", counted, std::nullopt, {}, ""});
  g.add_node({"bose_hubbard", Side::kSource, Level::kSimulation, "", counted, std::nullopt, {}, ""});
  g.add_node({"o2_field_theory", Side::kTarget, Level::kSimulation, "", counted, std::nullopt, {}, ""});
  g.add_edge(RelationEdge::limiting("lattice_system", "bose_hubbard", {}));
  RelationEdge iso = RelationEdge::isomorphism("bose_hubbard", "o2_field_theory", {});
  iso.status = EdgeStatus::kValidatedByCitation;
  iso.evidence = "near the SF-MI transition the lattice is described by an O(2) field theory";
  g.add_edge(iso);
  const auto r = formal_external_validate(g, {"x"}, 1e-3);
  EXPECT_EQ(calls, 0);
  EXPECT_EQ(r.verdict(), Verdict::kCitation);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.norm(), "1b");
  ModelGraph g2 = g;
  EXPECT_FALSE(record_report(g2, r));

  RelationEdge bad = RelationEdge::isomorphism("x", "y", {});
  bad.status = EdgeStatus::kValidatedByCitation;
  ModelGraph g3 = synthetic_graph(0, 0);
  EXPECT_THROW(g3.add_edge(bad), InvalidArgument);
}

TEST(Empirical, SelfGeneratedDatasetPasses) {
  const auto g = enaqt_graph(photonic());
  const auto r = empirical_external_validate(g, {"population", "spectrum"}, 1e-12);
  EXPECT_TRUE(r.passed()) << r.max_discrepancy();
  EXPECT_EQ(r.norm(), "2c");
}

TEST(Empirical, BiasedDatasetFails) {
  const auto s = photonic();
  Dataset d = exciton_reference_dataset(s);
  for (auto& p : d.points)
    for (double& v : p.values.at("population")) v *= 1.1;
  const auto g = enaqt_graph(s, d);
  const auto r = empirical_external_validate(g, {"population"}, 0.05, scaled());
  EXPECT_FALSE(r.passed());
  EXPECT_NEAR(r.observables()[0].scale_estimate, 1.0 / 1.1, 1e-12);
}

TEST(Empirical, EmptyAndMismatchedDatasets) {
  const auto g = enaqt_graph(photonic());
  EXPECT_THROW(empirical_external_validate(g, {"population"}, 1.0, {}, Dataset{}), InvalidArgument);
  Dataset d = exciton_reference_dataset(photonic());
  d.points[0].values.erase("spectrum");
  EXPECT_THROW(empirical_external_validate(g, {"spectrum"}, 1.0, {}, d), DimensionMismatch);
  Dataset e = exciton_reference_dataset(photonic());
  e.points[0].values.at("spectrum").pop_back();
  EXPECT_THROW(empirical_external_validate(g, {"spectrum"}, 1.0, {}, e), DimensionMismatch);
}

TEST(Empirical, PinnedDigest) {
  Dataset d = exciton_reference_dataset(photonic());
  d.pinned_digest = d.digest();
  EXPECT_NO_THROW(d.verify());
  d.points[0].values.at("population")[0] += 1e-9;
  EXPECT_THROW(d.verify(), ConfigError);
  const auto g = enaqt_graph(photonic());
  EXPECT_THROW(empirical_external_validate(g, {"population"}, 1.0, {}, d), ConfigError);
}

TEST(Speedup, Classes) {
  ProblemMetadata mbl2d;
  mbl2d.classical_efficient = false;
  mbl2d.scales_up = Tri::kUnknown;
  mbl2d.justification = "full simulation requires a quantum device";
  EXPECT_EQ(classify_speedup(mbl2d).letter, SpeedupLetter::kC);
  EXPECT_EQ(classify_speedup(mbl2d).norm_id(), "4c");
  EXPECT_EQ(classify_speedup(mbl2d).justification, mbl2d.justification);

  ProblemMetadata desk;
  desk.classical_efficient = true;
  desk.scales_up = Tri::kNo;
  EXPECT_EQ(classify_speedup(desk).letter, SpeedupLetter::kNone);
  EXPECT_FALSE(classify_speedup(desk).norm_id().has_value());

  ProblemMetadata hard;
  hard.proven_hard = true;
  hard.scales_up = Tri::kYes;
  EXPECT_EQ(classify_speedup(hard).letter, SpeedupLetter::kA);

  ProblemMetadata b;
  b.scales_up = Tri::kYes;
  EXPECT_EQ(classify_speedup(b).letter, SpeedupLetter::kB);

  ProblemMetadata d;
  d.classical_efficient = true;
  d.favourable_quantum_scaling = true;
  EXPECT_EQ(classify_speedup(d).letter, SpeedupLetter::kD);

  ProblemMetadata bad;
  bad.proven_hard = true;
  bad.classical_efficient = true;
  EXPECT_THROW(classify_speedup(bad), InvalidArgument);
}

TEST(Speedup, EchoedIntoReport) {
  ValidationOptions o;
  ProblemMetadata m;
  m.justification = "no efficient classical algorithm known";
  o.speedup = classify_speedup(m);
  const auto r = internal_validate(synthetic_graph(0, 0), {"x"}, {}, 0.0, o);
  EXPECT_EQ(r.to_json().at("speedup").at("class"), "c");
  EXPECT_EQ(r.to_json().at("speedup").at("justification"), m.justification);
}

TEST(Persistence, GraphRoundTrip) {
  const auto s = photonic();
  ModelGraph g = enaqt_graph(s);
  g.mark_validated(1, 1e-10, "report sha256:abc");
  const Json j = graph_to_json(g);
  const ModelGraph h = graph_from_json(j, photonic_registry(s));
  EXPECT_EQ(graph_to_json(h).dump(), j.dump());
  EXPECT_EQ(render_schema(h), render_schema(g));
  EXPECT_TRUE(formal_external_validate(h, {"spectrum"}, 1e-10).passed());
  EXPECT_THROW(graph_from_json(j, RunnerRegistry{}), ConfigError);
  Json tampered = j;
  tampered["nodes"][3]["dataset_sha256"] = "00";
  EXPECT_THROW(graph_from_json(tampered, photonic_registry(s)), ConfigError);
}
