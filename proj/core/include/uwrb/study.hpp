#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uwrb/flow.hpp"
#include "uwrb/rom.hpp"
#include "uwrb/transport.hpp"

namespace uwrb {

enum class Testcase { t1, t2, t3, p1, p2, p3 };

const char* to_string(Testcase t);
Testcase parse_testcase(const std::string& s);
bool is_parametric(Testcase t);
Geometry testcase_geometry(Testcase t);
InflowProfile testcase_profile(Testcase t);
ParameterDomain testcase_domain(Testcase t);
/// Fixed reaction rates of the non-parametric testcases.
Parameter testcase_parameter(Testcase t);
std::size_t default_training_size(Testcase t);

struct StudyConfig {
  Testcase testcase = Testcase::t1;
  std::vector<int> orders{1, 2};  ///< convergence: one CSV per order
  int r_min = 0;
  int r_max = 3;
  int level = 2;  ///< greedy: FOM refinement level
  int order = 1;  ///< greedy: FOM polynomial order
  int darcy_level = 4;
  int darcy_order = 2;
  double k_w = 0.2;
  double k_c = 0.05;
  GreedyMode mode = GreedyMode::weak;
  double tol = 0.0;
  std::size_t n_max = 14;
  std::size_t n_train = 0;  ///< 0 selects the default of the testcase
  std::size_t n_test = 500;
  std::uint64_t seed = 20220214;
  std::optional<double> poincare;  ///< C_p override; estimated from streamlines if absent
  std::size_t n_seeds = 64;
  double t_cap = 100.0;
  std::size_t threads = 1;
  std::size_t rom_reps = 100;
  std::size_t fom_reps = 3;
  bool log_true_error = true;
  int reference_level = -1;  ///< >= 0: also report ROM error against a (level, order+1) reference
  bool plots = false;
  std::filesystem::path output_dir = "results";

  std::size_t training_size() const { return n_train > 0 ? n_train : default_training_size(testcase); }
  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
};

/// Applies one `key=value` assignment; throws InvalidArgument for unknown keys or bad values.
void apply_setting(StudyConfig& config, const std::string& assignment);
/// Reads `key=value` lines; blank lines and `#` comments are ignored.
void apply_config_stream(StudyConfig& config, std::istream& in);
void apply_config_file(StudyConfig& config, const std::filesystem::path& path);
/// All settings as `key=value` lines, readable by apply_config_stream.
std::string format_config(const StudyConfig& config);
/// Model defaults (geometry, flow, data, parameter domains) followed by the study defaults.
void dump_defaults(std::ostream& out);

/// Training sets: P.1 uniform grid in c_w; P.2 smallest triangular lattice on
/// 0 <= c_c <= c_w <= 1 with at least n points; P.3 that lattice times 10 uniform g_0 in [1,10].
std::vector<Parameter> training_set(ParameterDomain d, std::size_t n);
/// n i.i.d. uniform samples of the domain.
std::vector<Parameter> random_parameters(ParameterDomain d, std::size_t n, std::uint64_t seed);

/// Least-squares slope of log(error) against log(h).
double fit_eoc(const std::vector<double>& h, const std::vector<double>& error);

struct ExponentialFit {
  double alpha = 0.0;
  double beta = 0.0;
  double r_squared = 0.0;
};
/// Fits error(N) = alpha exp(-beta N) by least squares on log(error).
ExponentialFit fit_exponential(const std::vector<double>& n, const std::vector<double>& error);

double median(std::vector<double> values);

/// Velocity field of a testcase; Darcy fields are solved on config.darcy_level.
FlowField make_flow(const StudyConfig& config, Geometry geometry);
EstimatorConstants make_constants(const StudyConfig& config, const FlowField& flow);

struct ConvergenceSeries {
  int order = 0;
  std::vector<double> gridwidth;
  std::vector<double> l2error;
  double eoc = 0.0;
  std::filesystem::path csv;
};

struct ConvergenceResult {
  std::vector<ConvergenceSeries> series;
};

/// h-convergence of the primal L2 error, writing one `gridwidth,l2error` CSV per order.
ConvergenceResult run_convergence(const StudyConfig& config, std::ostream* log = nullptr);

struct GreedyStudyResult {
  GreedyResult training;
  std::vector<Parameter> test_parameters;
  std::vector<std::vector<double>> errors;          ///< [test][N-1], L2 error of pr(u_fom - u_rom)
  std::vector<std::vector<double>> rom_times;       ///< [test][N-1], seconds
  std::vector<std::vector<double>> reference_errors;  ///< optional, same layout
  std::vector<double> fom_times;
  std::vector<double> median_error;                 ///< per N
  ExponentialFit fit;
  double speedup = 0.0;         ///< median FOM time / median ROM time at the largest N
  double max_condition = 0.0;   ///< max online condition at the largest N over the test set
  EstimatorConstants constants;
  std::filesystem::path decay_csv;
  std::filesystem::path evaluation_csv;
  std::filesystem::path model_file;
};

GreedyStudyResult run_greedy_study(const StudyConfig& config, std::ostream* log = nullptr);

struct EvalResult {
  Parameter mu;
  Eigen::VectorXd coefficients;
  Certificate certificate;
  double outflow_norm = 0.0;  ///< L2(Gamma_out) norm of the reconstructed trace
  double seconds = 0.0;
};

/// Evaluates a stored model; throws DomainError for parameters outside its domain.
std::vector<EvalResult> rom_eval(const ReducedModel& model, const std::vector<Parameter>& mus);
std::vector<EvalResult> rom_eval(const std::filesystem::path& model_file, const std::vector<Parameter>& mus);

/// Solves the Darcy problem and writes velocity samples (x,y,bx,by).
DarcyDiagnostics run_darcy_field(const StudyConfig& config, const std::filesystem::path& csv, int samples_per_axis);

}  // namespace uwrb
