// Command line driver for the convergence and reduced-basis studies.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uwrb/csv.hpp"
#include "uwrb/errors.hpp"
#include "uwrb/study.hpp"

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string testcase;
  std::string output_dir;
  std::size_t threads = 0;
};

uwrb::StudyConfig load_config(const Common& common) {
  uwrb::StudyConfig config;
  if (!common.config_file.empty()) uwrb::apply_config_file(config, common.config_file);
  for (const auto& s : common.overrides) uwrb::apply_setting(config, s);
  if (!common.testcase.empty()) config.testcase = uwrb::parse_testcase(common.testcase);
  if (!common.output_dir.empty()) config.output_dir = common.output_dir;
  if (common.threads > 0) config.threads = common.threads;
  config.validate();
  return config;
}

uwrb::Parameter parse_mu(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0) throw uwrb::InvalidArgument("bad parameter component '" + item + "'");
    v.push_back(x);
  }
  if (v.size() < 2 || v.size() > 3) throw uwrb::InvalidArgument("parameter must be c_w,c_c[,g_0]: '" + text + "'");
  return {v[0], v[1], v.size() == 3 ? v[2] : 1.0};
}

int fail(const std::string& stage, const std::string& what) {
  std::cerr << "uwrb: error [" << stage << "]: " << what << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced basis toolkit for ultraweak advection-reaction transport"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  Common common;
  bool dump = false;
  app.add_option("-c,--config", common.config_file, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", common.overrides, "override a setting, key=value (repeatable)");
  app.add_option("-t,--testcase", common.testcase, "testcase T.1, T.2, T.3, P.1, P.2 or P.3");
  app.add_option("-o,--output-dir", common.output_dir, "directory for CSV and model files");
  app.add_option("-j,--threads", common.threads, "worker threads");
  app.add_flag("--dump-defaults", dump, "print model and study defaults and exit");

  auto* convergence = app.add_subcommand("convergence", "h-convergence of the L2 error (T.1, T.2, T.3)");
  auto* greedy = app.add_subcommand("greedy", "greedy training and test-set evaluation (P.1, P.2, P.3)");

  auto* eval = app.add_subcommand("eval", "evaluate a stored reduced model");
  std::string model_file;
  std::vector<std::string> mus;
  std::string eval_csv;
  eval->add_option("-m,--model", model_file, "model file written by 'greedy'")->required();
  eval->add_option("-p,--mu", mus, "parameter c_w,c_c[,g_0] (repeatable)")->required();
  eval->add_option("--csv", eval_csv, "also write results to this CSV");

  auto* darcy = app.add_subcommand("darcy-field", "solve the Darcy problem and sample the velocity");
  std::string darcy_csv = "darcy_velocity.csv";
  int samples = 64;
  darcy->add_option("--csv", darcy_csv, "output CSV (x,y,bx,by)");
  darcy->add_option("--samples", samples, "samples per axis")->check(CLI::PositiveNumber);

  auto* defaults = app.add_subcommand("dump-defaults", "print model and study defaults");

  CLI11_PARSE(app, argc, argv);

  if (dump || defaults->parsed()) {
    uwrb::dump_defaults(std::cout);
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 2;
  }

  uwrb::StudyConfig config;
  try {
    config = load_config(common);
  } catch (const std::exception& e) {
    return fail("config", e.what());
  }

  try {
    if (convergence->parsed()) {
      const auto result = uwrb::run_convergence(config, &std::cout);
      for (const auto& s : result.series)
        std::cout << "EOC Q" << s.order << " = " << uwrb::format_number(s.eoc) << "  (" << s.csv.string() << ")\n";
    } else if (greedy->parsed()) {
      const auto r = uwrb::run_greedy_study(config, &std::cout);
      std::cout << "basis size      " << r.training.model.size() << " (" << uwrb::to_string(r.training.reason) << ")\n"
                << "fitted beta     " << uwrb::format_number(r.fit.beta) << " (R^2 " << uwrb::format_number(r.fit.r_squared)
                << ")\n"
                << "median speedup  " << uwrb::format_number(r.speedup) << '\n'
                << "max condition   " << uwrb::format_number(r.max_condition) << '\n'
                << "decay log       " << r.decay_csv.string() << '\n'
                << "evaluation      " << r.evaluation_csv.string() << '\n'
                << "model           " << r.model_file.string() << '\n';
    } else if (eval->parsed()) {
      std::vector<uwrb::Parameter> params;
      for (const auto& m : mus) params.push_back(parse_mu(m));
      std::vector<uwrb::EvalResult> results;
      try {
        results = uwrb::rom_eval(std::filesystem::path(model_file), params);
      } catch (const uwrb::ModelLoadError& e) {
        return fail("load", e.what());
      } catch (const uwrb::DomainError& e) {
        return fail("domain", e.what());
      }
      std::ofstream csv;
      if (!eval_csv.empty()) {
        csv.open(eval_csv);
        if (!csv) return fail("output", "cannot open " + eval_csv);
        uwrb::write_csv_header(csv, {"c_w", "c_c", "g_0", "estimate", "residual_norm", "alpha_lb", "outflow_norm", "seconds"});
      }
      for (const auto& r : results) {
        std::cout << "mu=(" << uwrb::format_number(r.mu.c_w) << ", " << uwrb::format_number(r.mu.c_c) << ", "
                  << uwrb::format_number(r.mu.g_0) << ")\n"
                  << "  w_N           =";
        for (Eigen::Index i = 0; i < r.coefficients.size(); ++i) std::cout << ' ' << uwrb::format_number(r.coefficients(i));
        std::cout << "\n  Delta_N       = " << uwrb::format_number(r.certificate.estimate) << '\n'
                  << "  residual norm = " << uwrb::format_number(r.certificate.residual_norm) << '\n'
                  << "  alpha_LB      = " << uwrb::format_number(r.certificate.alpha_lb) << '\n'
                  << "  |u_hat|_out   = " << uwrb::format_number(r.outflow_norm) << '\n'
                  << "  time [s]      = " << uwrb::format_number(r.seconds) << '\n';
        if (csv.is_open())
          uwrb::write_csv_row(csv, {r.mu.c_w, r.mu.c_c, r.mu.g_0, r.certificate.estimate, r.certificate.residual_norm,
                                    r.certificate.alpha_lb, r.outflow_norm, r.seconds});
      }
    } else if (darcy->parsed()) {
      const auto d = uwrb::run_darcy_field(config, darcy_csv, samples);
      std::cout << "inflow flux      " << uwrb::format_number(d.inflow_flux) << '\n'
                << "outflow flux     " << uwrb::format_number(d.outflow_flux) << '\n'
                << "flux imbalance   " << uwrb::format_number(d.flux_imbalance()) << '\n'
                << "pressure range   [" << uwrb::format_number(d.pressure_min) << ", "
                << uwrb::format_number(d.pressure_max) << "]\n"
                << "velocity samples " << darcy_csv << '\n';
    }
  } catch (const uwrb::StageError& e) {
    std::cerr << "uwrb: error " << e.what() << '\n';
    return 1;
  } catch (const uwrb::InvalidArgument& e) {
    return fail("input", e.what());
  } catch (const std::exception& e) {
    return fail("run", e.what());
  }
  return 0;
}
