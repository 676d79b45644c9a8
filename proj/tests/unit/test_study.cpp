#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "uwrb/errors.hpp"
#include "uwrb/persistence.hpp"
#include "uwrb/study.hpp"

using namespace uwrb;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("uwrb_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

StudyConfig tiny_greedy(Testcase t, const fs::path& dir) {
  StudyConfig c;
  c.testcase = t;
  c.level = 0;
  c.darcy_level = 2;
  c.n_train = 21;
  c.n_test = 6;
  c.n_max = 4;
  c.rom_reps = 3;
  c.fom_reps = 1;
  c.output_dir = dir;
  return c;
}

}  // namespace

TEST(Testcases, ParseAndProperties) {
  EXPECT_EQ(parse_testcase("T.1"), Testcase::t1);
  EXPECT_EQ(parse_testcase("p3"), Testcase::p3);
  EXPECT_EQ(parse_testcase("P2"), Testcase::p2);
  EXPECT_THROW(parse_testcase("Q.7"), InvalidArgument);
  EXPECT_STREQ(to_string(Testcase::t3), "T.3");
  EXPECT_FALSE(is_parametric(Testcase::t2));
  EXPECT_TRUE(is_parametric(Testcase::p1));
  EXPECT_EQ(testcase_geometry(Testcase::t1), Geometry::poiseuille);
  EXPECT_EQ(testcase_geometry(Testcase::t3), Geometry::darcy);
  EXPECT_EQ(testcase_geometry(Testcase::p2), Geometry::darcy);
  EXPECT_EQ(testcase_profile(Testcase::t2), InflowProfile::indicator_quarter);
  EXPECT_EQ(testcase_profile(Testcase::p3), InflowProfile::sin_pi_sq);
  EXPECT_EQ(testcase_domain(Testcase::p2), ParameterDomain::p2);
  EXPECT_EQ(testcase_parameter(Testcase::t1), (Parameter{0.5, 0.1, 1.0}));
  EXPECT_EQ(default_training_size(Testcase::p1), 500u);
  EXPECT_EQ(default_training_size(Testcase::p2), 630u);
  EXPECT_EQ(default_training_size(Testcase::p3), 6300u);
}

TEST(TrainingSets, SizesAndAdmissibility) {
  const auto p1 = training_set(ParameterDomain::p1, 500);
  EXPECT_EQ(p1.size(), 500u);
  EXPECT_EQ(p1.front().c_w, 0.0);
  EXPECT_EQ(p1.back().c_w, 1.0);
  const auto p2 = training_set(ParameterDomain::p2, 630);
  EXPECT_EQ(p2.size(), 630u);
  const auto p3 = training_set(ParameterDomain::p3, 6300);
  EXPECT_EQ(p3.size(), 6300u);
  std::set<double> g0;
  for (const auto& mu : p3) {
    EXPECT_TRUE(is_admissible(ParameterDomain::p3, mu));
    g0.insert(mu.g_0);
  }
  EXPECT_EQ(g0.size(), 10u);
  for (const auto& mu : p2) EXPECT_TRUE(is_admissible(ParameterDomain::p2, mu));
  EXPECT_GE(training_set(ParameterDomain::p2, 600).size(), 600u);
}

TEST(TrainingSets, RandomParametersAreDeterministic) {
  const auto a = random_parameters(ParameterDomain::p3, 100, 7);
  const auto b = random_parameters(ParameterDomain::p3, 100, 7);
  const auto c = random_parameters(ParameterDomain::p3, 100, 8);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (const auto& mu : a) EXPECT_TRUE(is_admissible(ParameterDomain::p3, mu));
}

TEST(Fits, PowerLawAndExponential) {
  const std::vector<double> h{0.5, 0.25, 0.125};
  EXPECT_NEAR(fit_eoc(h, {3.0 * 0.25, 3.0 * 0.0625, 3.0 * 0.015625}), 2.0, 1e-12);
  std::vector<double> n;
  std::vector<double> e;
  for (int i = 1; i <= 10; ++i) {
    n.push_back(i);
    e.push_back(0.3 * std::exp(-1.25 * i));
  }
  const ExponentialFit f = fit_exponential(n, e);
  EXPECT_NEAR(f.alpha, 0.3, 1e-12);
  EXPECT_NEAR(f.beta, 1.25, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
}

TEST(Config, SettingsAndErrors) {
  StudyConfig c;
  apply_setting(c, "testcase = P.2");
  apply_setting(c, "orders=1,2,3");
  apply_setting(c, "poincare=12.5");
  apply_setting(c, "mode=strong");
  apply_setting(c, "seed=99");
  EXPECT_EQ(c.testcase, Testcase::p2);
  EXPECT_EQ(c.orders, (std::vector<int>{1, 2, 3}));
  ASSERT_TRUE(c.poincare.has_value());
  EXPECT_EQ(*c.poincare, 12.5);
  EXPECT_EQ(c.mode, GreedyMode::strong);
  EXPECT_EQ(c.seed, 99u);
  apply_setting(c, "poincare=auto");
  EXPECT_FALSE(c.poincare.has_value());
  EXPECT_THROW(apply_setting(c, "nonsense=1"), InvalidArgument);
  EXPECT_THROW(apply_setting(c, "level=abc"), InvalidArgument);
  EXPECT_THROW(apply_setting(c, "no equals sign"), InvalidArgument);
  EXPECT_THROW(apply_setting(c, "mode=medium"), InvalidArgument);
}

TEST(Config, FormatRoundTrips) {
  StudyConfig c;
  c.testcase = Testcase::p3;
  c.k_w = 0.3;
  c.n_test = 17;
  c.poincare = 4.25;
  c.output_dir = "out/dir";
  std::istringstream in(format_config(c));
  StudyConfig back;
  apply_config_stream(back, in);
  EXPECT_EQ(format_config(back), format_config(c));
  EXPECT_EQ(back.k_w, 0.3);
  EXPECT_EQ(back.n_test, 17u);
}

TEST(Config, StreamIgnoresCommentsAndReportsLine) {
  StudyConfig c;
  std::istringstream ok("# comment\n\nlevel = 3  # trailing\n");
  apply_config_stream(c, ok);
  EXPECT_EQ(c.level, 3);
  std::istringstream bad("level=1\nbogus=2\n");
  try {
    apply_config_stream(c, bad);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
  }
  EXPECT_THROW(apply_config_file(c, "/nonexistent/uwrb.cfg"), InvalidArgument);
}

TEST(Config, ValidateRejectsInconsistentSettings) {
  StudyConfig c;
  c.validate();
  StudyConfig empty_range = c;
  empty_range.r_min = 3;
  empty_range.r_max = 2;
  EXPECT_THROW(empty_range.validate(), InvalidArgument);
  StudyConfig perm = c;
  perm.k_c = 0.5;
  EXPECT_THROW(perm.validate(), InvalidArgument);
  StudyConfig stop = c;
  stop.n_max = 0;
  EXPECT_THROW(stop.validate(), InvalidArgument);
}

TEST(Config, DumpDefaultsListsTables) {
  std::ostringstream out;
  dump_defaults(out);
  const std::string s = out.str();
  for (const char* needle : {"R = 0.5", "k_w", "n_train", "testcase=", "seed=20220214"})
    EXPECT_NE(s.find(needle), std::string::npos) << needle;
}

TEST(Convergence, EmptyRangeIsAnError) {
  StudyConfig c;
  c.r_min = 2;
  c.r_max = 1;
  c.output_dir = scratch_dir("empty_range");
  EXPECT_THROW(run_convergence(c), StageError);
  c.r_min = 0;
  c.r_max = 1;
  c.testcase = Testcase::p1;
  EXPECT_THROW(run_convergence(c), StageError);
}

TEST(Convergence, WritesOneCsvPerOrder) {
  StudyConfig c;
  c.testcase = Testcase::t1;
  c.r_min = 0;
  c.r_max = 2;
  c.orders = {1, 2};
  c.output_dir = scratch_dir("convergence");
  const ConvergenceResult r = run_convergence(c);
  ASSERT_EQ(r.series.size(), 2u);
  for (const auto& s : r.series) {
    const auto lines = read_lines(s.csv);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "gridwidth,l2error");
    for (std::size_t i = 1; i < s.l2error.size(); ++i) EXPECT_LT(s.l2error[i], s.l2error[i - 1]);
    EXPECT_EQ(s.gridwidth.front(), 0.125);
    EXPECT_GT(s.eoc, 0.5);
  }
}

TEST(GreedyStudy, RejectsNonParametricTestcase) {
  StudyConfig c = tiny_greedy(Testcase::t3, scratch_dir("reject"));
  EXPECT_THROW(run_greedy_study(c), StageError);
}

TEST(GreedyStudy, ArtifactsAndDeterminism) {
  const fs::path d1 = scratch_dir("greedy_a");
  const fs::path d2 = scratch_dir("greedy_b");
  const GreedyStudyResult a = run_greedy_study(tiny_greedy(Testcase::p2, d1));
  const GreedyStudyResult b = run_greedy_study(tiny_greedy(Testcase::p2, d2));
  EXPECT_EQ(a.training.model.size(), 4u);
  EXPECT_EQ(a.test_parameters.size(), 6u);
  EXPECT_EQ(a.errors.size(), 6u);
  EXPECT_EQ(a.errors[0].size(), 4u);
  EXPECT_EQ(a.median_error.size(), 4u);
  EXPECT_GT(a.speedup, 0.0);
  EXPECT_EQ(read_lines(a.decay_csv), read_lines(b.decay_csv));
  const auto ea = read_lines(a.evaluation_csv);
  const auto eb = read_lines(b.evaluation_csv);
  ASSERT_EQ(ea.size(), 7u);
  EXPECT_EQ(ea[0].rfind("error_dim_1,error_dim_2,error_dim_3,error_dim_4,rom_time_dim_1", 0), 0u);
  for (std::size_t i = 1; i < ea.size(); ++i) {
    // error columns precede the timing columns
    std::size_t pos = 0;
    for (int k = 0; k < 4; ++k) pos = ea[i].find(',', pos) + 1;
    EXPECT_EQ(ea[i].substr(0, pos), eb[i].substr(0, pos));
  }
  EXPECT_EQ(read_lines(a.decay_csv)[0], "N,max_indicator,max_true_error");
  EXPECT_TRUE(fs::exists(a.model_file));
  const ReducedModel m = load_model(a.model_file);
  EXPECT_EQ(m.provenance.testcase, "P.2");
  EXPECT_EQ(m.provenance.domain, "P.2");
}

TEST(RomEval, CertificatesAndDomainChecks) {
  const fs::path dir = scratch_dir("eval");
  const GreedyStudyResult r = run_greedy_study(tiny_greedy(Testcase::p2, dir));
  const Parameter snapshot = r.training.basis.parameters.front();
  ReducedModel unrestricted = load_model(r.model_file);
  unrestricted.provenance.domain.clear();
  const auto zero = rom_eval(unrestricted, {{0.5, 0.1, 0.0}});
  const auto results = rom_eval(r.model_file, {snapshot, {0.3, 0.1, 1.0}});
  EXPECT_EQ(zero[0].coefficients.norm(), 0.0);
  EXPECT_EQ(zero[0].certificate.estimate, 0.0);
  EXPECT_EQ(zero[0].outflow_norm, 0.0);
  EXPECT_THROW(rom_eval(r.model_file, {{0.5, 0.1, 0.0}}), DomainError);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_LE(results[0].certificate.estimate, 1e-8);
  EXPECT_TRUE(std::isfinite(results[1].certificate.estimate));
  EXPECT_GT(results[1].certificate.estimate, 0.0);
  EXPECT_GT(results[1].outflow_norm, 0.0);
  EXPECT_THROW(rom_eval(r.model_file, {{0.1, 0.5, 1.0}}), DomainError);
  EXPECT_THROW(rom_eval(dir / "missing.json", {{0.1, 0.0, 1.0}}), ModelLoadError);
  std::ofstream(dir / "corrupt.json") << "{\"format\": 3";
  EXPECT_THROW(rom_eval(dir / "corrupt.json", {{0.1, 0.0, 1.0}}), ModelLoadError);
}

TEST(DarcyField, WritesVelocityCsv) {
  StudyConfig c;
  c.darcy_level = 2;
  const fs::path dir = scratch_dir("darcy");
  const DarcyDiagnostics d = run_darcy_field(c, dir / "v.csv", 8);
  EXPECT_LE(d.flux_imbalance(), 1e-6);
  const auto lines = read_lines(dir / "v.csv");
  EXPECT_EQ(lines.size(), 65u);
  EXPECT_EQ(lines[0], "x,y,bx,by");
}
