#include "uwrb/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "uwrb/csv.hpp"
#include "uwrb/errors.hpp"
#include "uwrb/parallel.hpp"
#include "uwrb/persistence.hpp"

namespace uwrb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string file_tag(Testcase t) {
  std::string s = to_string(t);
  s.erase(std::remove(s.begin(), s.end(), '.'), s.end());
  return s;
}

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

AffineSystem build_system(const FlowField& flow, int level, int order, InflowProfile profile, std::size_t threads) {
  auto mesh = std::make_shared<const Mesh>(build_mesh(level));
  auto space = std::make_shared<const LagrangeSpace>(mesh, order);
  auto facets = classify_boundary(*mesh, flow.geometry());
  AssemblyOptions options;
  options.threads = threads;
  return assemble_affine(space, flow, std::move(facets), profile, options);
}

void write_convergence_plot(const std::filesystem::path& script, const ConvergenceResult& result, Testcase t) {
  std::ofstream out = open_output(script);
  out << "set logscale xy\nset xlabel 'gridwidth h'\nset ylabel 'L2 error'\nset key left top\n"
      << "set datafile separator ','\nset title '" << to_string(t) << "'\nplot ";
  for (std::size_t i = 0; i < result.series.size(); ++i) {
    const auto& s = result.series[i];
    out << (i ? ", " : "") << "'" << s.csv.filename().string() << "' every ::1 using 1:2 with linespoints title 'Q"
        << s.order << "'";
  }
  out << '\n';
}

void write_greedy_plot(const std::filesystem::path& script, const GreedyStudyResult& r, Testcase t) {
  std::ofstream out = open_output(script);
  out << "set logscale y\nset xlabel 'N'\nset ylabel 'error'\nset datafile separator ','\n"
      << "set title '" << to_string(t) << "'\n"
      << "plot '" << r.decay_csv.filename().string() << "' every ::1 using 1:2 with linespoints title 'max indicator', \\\n"
      << "     '" << r.decay_csv.filename().string() << "' every ::1 using 1:3 with linespoints title 'max true error'\n";
}

void log_line(std::ostream* log, const std::string& s) {
  if (log) *log << s << '\n';
}

}  // namespace

FlowField make_flow(const StudyConfig& config, Geometry geometry) {
  if (geometry == Geometry::poiseuille) return FlowField::poiseuille();
  auto mesh = std::make_shared<const Mesh>(build_mesh(config.darcy_level));
  return solve_darcy(mesh, config.k_w, config.k_c, config.darcy_order);
}

EstimatorConstants make_constants(const StudyConfig& config, const FlowField& flow) {
  if (config.poincare) return constants_from_override(*config.poincare);
  return constants_from_traverse_times(estimate_traverse_times(flow, config.n_seeds, config.t_cap));
}

ConvergenceResult run_convergence(const StudyConfig& config, std::ostream* log) {
  staged("config", [&] {
    config.validate();
    if (is_parametric(config.testcase))
      throw InvalidArgument("convergence studies need testcase T.1, T.2 or T.3");
    return 0;
  });
  const Testcase tc = config.testcase;
  const Geometry geometry = testcase_geometry(tc);
  const InflowProfile profile = testcase_profile(tc);
  const Parameter mu = testcase_parameter(tc);
  const FlowField flow = staged("flow", [&] { return make_flow(config, geometry); });
  staged("output", [&] {
    std::filesystem::create_directories(config.output_dir);
    return 0;
  });

  ConvergenceResult result;
  for (int k : config.orders) {
    ConvergenceSeries series;
    series.order = k;

    std::shared_ptr<const Mesh> ref_mesh;
    int ref_qord = 0;
    std::optional<PrimalField> reference;
    if (geometry == Geometry::darcy) {
      staged("reference", [&] {
        const AffineSystem ref = build_system(flow, config.r_max + 1, k + 1, profile, config.threads);
        const FomSolution sol = solve_fom(ref, mu);
        reference = PrimalReconstructor(ref)(sol.coefficients, mu);
        ref_mesh = ref.space->mesh_ptr();
        ref_qord = ref.quadrature_order;
        return 0;
      });
    }

    for (int r = config.r_min; r <= config.r_max; ++r) {
      const AffineSystem sys = staged("assemble", [&] { return build_system(flow, r, k, profile, config.threads); });
      const FomSolution sol = staged("solve", [&] { return solve_fom(sys, mu); });
      const double err = staged("error", [&] {
        if (reference) {
          const PrimalReconstructor rec(sys, ref_mesh, ref_qord);
          return l2_error(rec(sol.coefficients, mu), *reference);
        }
        const PrimalReconstructor rec(sys);
        return l2_error(rec(sol.coefficients, mu),
                        [&](const Vec2& p) { return exact_poiseuille(p, mu.c_w, mu.c_c, profile); });
      });
      series.gridwidth.push_back(sys.space->mesh().h());
      series.l2error.push_back(err);
      std::ostringstream msg;
      msg << to_string(tc) << " Q" << k << " r=" << r << " h=" << format_number(sys.space->mesh().h())
          << " dofs=" << sys.num_dofs() << " l2error=" << format_number(err);
      log_line(log, msg.str());
    }
    series.eoc = series.gridwidth.size() >= 2 ? fit_eoc(series.gridwidth, series.l2error)
                                              : std::numeric_limits<double>::quiet_NaN();
    series.csv = config.output_dir / ("convergence_" + file_tag(tc) + "_k" + std::to_string(k) + ".csv");
    staged("output", [&] {
      std::ofstream out = open_output(series.csv);
      write_csv_header(out, {"gridwidth", "l2error"});
      for (std::size_t i = 0; i < series.gridwidth.size(); ++i) write_csv_row(out, {series.gridwidth[i], series.l2error[i]});
      return 0;
    });
    log_line(log, std::string(to_string(tc)) + " Q" + std::to_string(k) + " EOC=" + format_number(series.eoc));
    result.series.push_back(std::move(series));
  }
  if (config.plots)
    staged("output", [&] {
      write_convergence_plot(config.output_dir / ("convergence_" + file_tag(tc) + ".gp"), result, tc);
      return 0;
    });
  return result;
}

GreedyStudyResult run_greedy_study(const StudyConfig& config, std::ostream* log) {
  staged("config", [&] {
    config.validate();
    if (!is_parametric(config.testcase)) throw InvalidArgument("greedy studies need testcase P.1, P.2 or P.3");
    if (config.reference_level >= 0 && config.reference_level < config.level)
      throw InvalidArgument("reference_level must not be coarser than level");
    return 0;
  });
  const Testcase tc = config.testcase;
  const ParameterDomain domain = testcase_domain(tc);
  const InflowProfile profile = testcase_profile(tc);

  GreedyStudyResult out;
  const FlowField flow = staged("flow", [&] { return make_flow(config, Geometry::darcy); });
  out.constants = staged("constants", [&] { return make_constants(config, flow); });
  {
    std::ostringstream msg;
    msg << "C_p=" << format_number(out.constants.poincare);
    if (!out.constants.overridden)
      msg << " (T_min=" << format_number(out.constants.t_min) << ", T_max=" << format_number(out.constants.t_max)
          << (out.constants.capped ? ", capped" : "") << ")";
    log_line(log, msg.str());
  }
  const AffineSystem sys =
      staged("assemble", [&] { return build_system(flow, config.level, config.order, profile, config.threads); });
  const SpdFactorization gram_factor = staged("assemble", [&] { return SpdFactorization(sys.gram); });

  const std::vector<Parameter> training = training_set(domain, config.training_size());
  std::vector<Eigen::VectorXd> snapshots;
  if (config.log_true_error || config.mode == GreedyMode::strong) {
    staged("snapshots", [&] {
      snapshots.resize(training.size());
      parallel_for(training.size(), config.threads,
                   [&](std::size_t i) { snapshots[i] = solve_fom(sys, training[i]).coefficients; });
      return 0;
    });
  }
  GreedyOptions options;
  options.mode = config.mode;
  options.tolerance = config.tol;
  options.max_basis_size = config.n_max > 0 ? config.n_max : std::numeric_limits<std::size_t>::max();
  options.threads = config.threads;
  options.constants = out.constants;
  options.snapshots = snapshots.empty() ? nullptr : &snapshots;
  out.training = staged("train", [&] { return greedy_train(sys, gram_factor, training, options); });
  ReducedModel& model = out.training.model;
  model.provenance = {to_string(tc), to_string(Geometry::darcy), to_string(profile), to_string(domain),
                      config.level, config.order, config.seed};
  const std::size_t nb = model.size();
  {
    std::ostringstream msg;
    msg << "greedy: N=" << nb << " stop=" << to_string(out.training.reason) << " training=" << training.size()
        << " dofs=" << sys.num_dofs();
    log_line(log, msg.str());
  }
  if (nb == 0) throw StageError("train", "greedy produced an empty basis");

  staged("evaluate", [&] {
    std::vector<ReducedModel> prefixes;
    for (std::size_t n = 1; n <= nb; ++n) prefixes.push_back(model.prefix(n));
    const PrimalReconstructor rec(sys);
    out.test_parameters = random_parameters(domain, config.n_test, config.seed);
    const std::size_t nt = out.test_parameters.size();
    out.errors.assign(nt, std::vector<double>(nb, 0.0));
    out.rom_times.assign(nt, std::vector<double>(nb, 0.0));
    out.fom_times.assign(nt, 0.0);
    std::vector<double> conditions(nt, 0.0);
    for (std::size_t t = 0; t < nt; ++t) {
      const Parameter& mu = out.test_parameters[t];
      std::vector<double> fom_times;
      Eigen::VectorXd w_fom;
      for (std::size_t rep = 0; rep < config.fom_reps; ++rep) {
        FomSolution sol = solve_fom(sys, mu);
        fom_times.push_back(sol.seconds);
        w_fom = std::move(sol.coefficients);
      }
      out.fom_times[t] = median(fom_times);
      for (std::size_t n = 1; n <= nb; ++n) {
        const ReducedModel& m = prefixes[n - 1];
        std::vector<double> times(config.rom_reps);
        RomSolution rs;
        for (std::size_t rep = 0; rep < config.rom_reps; ++rep) {
          const auto t0 = Clock::now();
          rs = rom_solve(m, mu);
          times[rep] = seconds_since(t0);
        }
        out.rom_times[t][n - 1] = median(times);
        const Eigen::VectorXd diff = w_fom - lift(out.training.basis, rs.coefficients);
        out.errors[t][n - 1] = l2_norm(rec(diff, mu));
      }
      conditions[t] = online_condition(model, mu);
    }
    out.max_condition = nt ? *std::max_element(conditions.begin(), conditions.end()) : 0.0;
    std::vector<double> ns;
    for (std::size_t n = 1; n <= nb; ++n) {
      std::vector<double> col;
      for (std::size_t t = 0; t < nt; ++t) col.push_back(out.errors[t][n - 1]);
      out.median_error.push_back(nt ? median(col) : 0.0);
      ns.push_back(static_cast<double>(n));
    }
    if (nb >= 2 && nt > 0) out.fit = fit_exponential(ns, out.median_error);
    if (nt > 0) {
      std::vector<double> rom_last;
      for (std::size_t t = 0; t < nt; ++t) rom_last.push_back(out.rom_times[t][nb - 1]);
      out.speedup = median(out.fom_times) / median(rom_last);
    }
    return 0;
  });

  if (config.reference_level >= 0) {
    staged("reference", [&] {
      const AffineSystem ref = build_system(flow, config.reference_level, config.order + 1, profile, config.threads);
      const PrimalReconstructor ref_rec(ref);
      const PrimalReconstructor rom_rec(sys, ref.space->mesh_ptr(), ref.quadrature_order);
      const std::size_t nt = out.test_parameters.size();
      out.reference_errors.assign(nt, std::vector<double>(nb, 0.0));
      for (std::size_t t = 0; t < nt; ++t) {
        const Parameter& mu = out.test_parameters[t];
        const PrimalField ref_primal = ref_rec(solve_fom(ref, mu).coefficients, mu);
        for (std::size_t n = 1; n <= nb; ++n) {
          const RomSolution rs = rom_solve(model.prefix(n), mu);
          out.reference_errors[t][n - 1] = l2_error(rom_rec(lift(out.training.basis, rs.coefficients), mu), ref_primal);
        }
      }
      return 0;
    });
  }

  staged("output", [&] {
    std::filesystem::create_directories(config.output_dir);
    const std::string tag = file_tag(tc);
    out.decay_csv = config.output_dir / ("decay_" + tag + ".csv");
    {
      std::ofstream f = open_output(out.decay_csv);
      write_csv_header(f, {"N", "max_indicator", "max_true_error"});
      for (const auto& rec : out.training.log)
        write_csv_row(f, {static_cast<double>(rec.basis_size), rec.max_indicator, rec.max_true_error});
    }
    std::vector<std::string> header;
    for (std::size_t n = 1; n <= nb; ++n) header.push_back("error_dim_" + std::to_string(n));
    for (std::size_t n = 1; n <= nb; ++n) header.push_back("rom_time_dim_" + std::to_string(n));
    out.evaluation_csv = config.output_dir / ("evaluation_" + tag + ".csv");
    {
      std::ofstream f = open_output(out.evaluation_csv);
      write_csv_header(f, header);
      for (std::size_t t = 0; t < out.errors.size(); ++t) {
        std::vector<double> row = out.errors[t];
        row.insert(row.end(), out.rom_times[t].begin(), out.rom_times[t].end());
        write_csv_row(f, row);
      }
    }
    {
      std::ofstream f = open_output(config.output_dir / ("fom_times_" + tag + ".csv"));
      write_csv_header(f, {"c_w", "c_c", "g_0", "fom_time"});
      for (std::size_t t = 0; t < out.fom_times.size(); ++t) {
        const Parameter& mu = out.test_parameters[t];
        write_csv_row(f, {mu.c_w, mu.c_c, mu.g_0, out.fom_times[t]});
      }
    }
    if (!out.reference_errors.empty()) {
      std::ofstream f = open_output(config.output_dir / ("reference_evaluation_" + tag + ".csv"));
      write_csv_header(f, std::vector<std::string>(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(nb)));
      for (const auto& row : out.reference_errors) write_csv_row(f, row);
    }
    out.model_file = config.output_dir / ("model_" + tag + ".json");
    save_model(model, out.model_file);
    {
      std::ofstream f = open_output(config.output_dir / ("summary_" + tag + ".txt"));
      f << "testcase=" << to_string(tc) << '\n'
        << "basis_size=" << nb << '\n'
        << "stop_reason=" << to_string(out.training.reason) << '\n'
        << "fom_solves=" << out.training.fom_solves << '\n'
        << "poincare=" << format_number(out.constants.poincare) << '\n'
        << "t_min=" << format_number(out.constants.t_min) << '\n'
        << "t_max=" << format_number(out.constants.t_max) << '\n'
        << "capped=" << (out.constants.capped ? "true" : "false") << '\n'
        << "beta=" << format_number(out.fit.beta) << '\n'
        << "alpha=" << format_number(out.fit.alpha) << '\n'
        << "r_squared=" << format_number(out.fit.r_squared) << '\n'
        << "speedup=" << format_number(out.speedup) << '\n'
        << "max_condition=" << format_number(out.max_condition) << '\n';
    }
    if (config.plots) write_greedy_plot(config.output_dir / ("decay_" + tag + ".gp"), out, tc);
    return 0;
  });

  std::ostringstream msg;
  msg << to_string(tc) << " beta=" << format_number(out.fit.beta) << " R2=" << format_number(out.fit.r_squared)
      << " speedup=" << format_number(out.speedup) << " max_condition=" << format_number(out.max_condition);
  log_line(log, msg.str());
  return out;
}

std::vector<EvalResult> rom_eval(const ReducedModel& model, const std::vector<Parameter>& mus) {
  std::optional<ParameterDomain> domain;
  if (!model.provenance.domain.empty()) {
    const std::string& d = model.provenance.domain;
    if (d == "P.1") domain = ParameterDomain::p1;
    else if (d == "P.2") domain = ParameterDomain::p2;
    else if (d == "P.3") domain = ParameterDomain::p3;
    else throw ModelLoadError("model names an unknown parameter domain '" + d + "'");
  }
  std::vector<EvalResult> out;
  for (const Parameter& mu : mus) {
    if (domain) require_admissible(*domain, mu);
    EvalResult r;
    r.mu = mu;
    const auto t0 = Clock::now();
    RomSolution sol = rom_solve(model, mu);
    r.seconds = seconds_since(t0);
    r.coefficients = std::move(sol.coefficients);
    r.certificate = sol.certificate;
    r.outflow_norm = std::sqrt(std::max(r.coefficients.dot(model.outflow_gram * r.coefficients), 0.0));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EvalResult> rom_eval(const std::filesystem::path& model_file, const std::vector<Parameter>& mus) {
  return rom_eval(load_model(model_file), mus);
}

DarcyDiagnostics run_darcy_field(const StudyConfig& config, const std::filesystem::path& csv, int samples_per_axis) {
  staged("config", [&] {
    config.validate();
    if (samples_per_axis < 1) throw InvalidArgument("samples per axis must be positive");
    return 0;
  });
  const FlowField flow = staged("flow", [&] { return make_flow(config, Geometry::darcy); });
  staged("output", [&] {
    if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
    std::ofstream out = open_output(csv);
    write_velocity_csv(flow, out, samples_per_axis);
    return 0;
  });
  return flow.darcy_field()->diagnostics;
}

}  // namespace uwrb
