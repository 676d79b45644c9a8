#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "uwrb/csv.hpp"
#include "uwrb/errors.hpp"
#include "uwrb/study.hpp"

namespace uwrb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(x)) throw InvalidArgument(key + ": not a number: '" + v + "'");
  return x;
}

long long parse_integer(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw InvalidArgument(key + ": not an integer: '" + v + "'");
  return x;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  const long long x = parse_integer(key, v);
  if (x < 0) throw InvalidArgument(key + ": must be non-negative");
  return static_cast<std::size_t>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw InvalidArgument(key + ": not a boolean: '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(parse_integer(key, trim(item))));
  return out;
}

/// Shortest representation that round-trips.
std::string short_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

using Setter = std::function<void(StudyConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"testcase", [](StudyConfig& c, const std::string&, const std::string& v) { c.testcase = parse_testcase(v); }},
      {"orders", [](StudyConfig& c, const std::string& k, const std::string& v) { c.orders = parse_int_list(k, v); }},
      {"r_min", [](StudyConfig& c, const std::string& k, const std::string& v) { c.r_min = static_cast<int>(parse_integer(k, v)); }},
      {"r_max", [](StudyConfig& c, const std::string& k, const std::string& v) { c.r_max = static_cast<int>(parse_integer(k, v)); }},
      {"level", [](StudyConfig& c, const std::string& k, const std::string& v) { c.level = static_cast<int>(parse_integer(k, v)); }},
      {"order", [](StudyConfig& c, const std::string& k, const std::string& v) { c.order = static_cast<int>(parse_integer(k, v)); }},
      {"darcy_level", [](StudyConfig& c, const std::string& k, const std::string& v) { c.darcy_level = static_cast<int>(parse_integer(k, v)); }},
      {"darcy_order", [](StudyConfig& c, const std::string& k, const std::string& v) { c.darcy_order = static_cast<int>(parse_integer(k, v)); }},
      {"k_w", [](StudyConfig& c, const std::string& k, const std::string& v) { c.k_w = parse_double(k, v); }},
      {"k_c", [](StudyConfig& c, const std::string& k, const std::string& v) { c.k_c = parse_double(k, v); }},
      {"mode",
       [](StudyConfig& c, const std::string& k, const std::string& v) {
         if (v == "weak") c.mode = GreedyMode::weak;
         else if (v == "strong") c.mode = GreedyMode::strong;
         else throw InvalidArgument(k + ": expected weak or strong");
       }},
      {"tol", [](StudyConfig& c, const std::string& k, const std::string& v) { c.tol = parse_double(k, v); }},
      {"n_max", [](StudyConfig& c, const std::string& k, const std::string& v) { c.n_max = parse_count(k, v); }},
      {"n_train", [](StudyConfig& c, const std::string& k, const std::string& v) { c.n_train = parse_count(k, v); }},
      {"n_test", [](StudyConfig& c, const std::string& k, const std::string& v) { c.n_test = parse_count(k, v); }},
      {"seed", [](StudyConfig& c, const std::string& k, const std::string& v) { c.seed = parse_count(k, v); }},
      {"poincare",
       [](StudyConfig& c, const std::string& k, const std::string& v) {
         if (v == "auto") c.poincare.reset();
         else c.poincare = parse_double(k, v);
       }},
      {"n_seeds", [](StudyConfig& c, const std::string& k, const std::string& v) { c.n_seeds = parse_count(k, v); }},
      {"t_cap", [](StudyConfig& c, const std::string& k, const std::string& v) { c.t_cap = parse_double(k, v); }},
      {"threads", [](StudyConfig& c, const std::string& k, const std::string& v) { c.threads = parse_count(k, v); }},
      {"rom_reps", [](StudyConfig& c, const std::string& k, const std::string& v) { c.rom_reps = parse_count(k, v); }},
      {"fom_reps", [](StudyConfig& c, const std::string& k, const std::string& v) { c.fom_reps = parse_count(k, v); }},
      {"log_true_error", [](StudyConfig& c, const std::string& k, const std::string& v) { c.log_true_error = parse_bool(k, v); }},
      {"reference_level", [](StudyConfig& c, const std::string& k, const std::string& v) { c.reference_level = static_cast<int>(parse_integer(k, v)); }},
      {"plots", [](StudyConfig& c, const std::string& k, const std::string& v) { c.plots = parse_bool(k, v); }},
      {"output_dir", [](StudyConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
  };
  return table;
}

}  // namespace

const char* to_string(Testcase t) {
  switch (t) {
    case Testcase::t1: return "T.1";
    case Testcase::t2: return "T.2";
    case Testcase::t3: return "T.3";
    case Testcase::p1: return "P.1";
    case Testcase::p2: return "P.2";
    case Testcase::p3: return "P.3";
  }
  return "?";
}

Testcase parse_testcase(const std::string& s) {
  std::string key;
  for (char ch : s)
    if (ch != '.') key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  if (key == "T1") return Testcase::t1;
  if (key == "T2") return Testcase::t2;
  if (key == "T3") return Testcase::t3;
  if (key == "P1") return Testcase::p1;
  if (key == "P2") return Testcase::p2;
  if (key == "P3") return Testcase::p3;
  throw InvalidArgument("unknown testcase '" + s + "' (expected T.1, T.2, T.3, P.1, P.2 or P.3)");
}

bool is_parametric(Testcase t) { return t == Testcase::p1 || t == Testcase::p2 || t == Testcase::p3; }

Geometry testcase_geometry(Testcase t) {
  return (t == Testcase::t1 || t == Testcase::t2) ? Geometry::poiseuille : Geometry::darcy;
}

InflowProfile testcase_profile(Testcase t) {
  switch (t) {
    case Testcase::t1: return InflowProfile::sin4pi_sq;
    case Testcase::t2: return InflowProfile::indicator_quarter;
    default: return InflowProfile::sin_pi_sq;
  }
}

ParameterDomain testcase_domain(Testcase t) {
  switch (t) {
    case Testcase::p1: return ParameterDomain::p1;
    case Testcase::p2: return ParameterDomain::p2;
    case Testcase::p3: return ParameterDomain::p3;
    default: throw InvalidArgument(std::string("testcase ") + to_string(t) + " has no parameter domain");
  }
}

Parameter testcase_parameter(Testcase t) {
  if (is_parametric(t)) throw InvalidArgument(std::string("testcase ") + to_string(t) + " is parametric");
  return {0.5, 0.1, 1.0};
}

std::size_t default_training_size(Testcase t) {
  switch (t) {
    case Testcase::p1: return 500;
    case Testcase::p2: return 630;
    case Testcase::p3: return 6300;
    default: return 0;
  }
}

void StudyConfig::validate() const {
  if (orders.empty()) throw InvalidArgument("orders: empty list");
  for (int k : orders)
    if (k < 1 || k > 5) throw InvalidArgument("orders: polynomial order must lie in 1..5");
  if (r_min < 0) throw InvalidArgument("r_min must be non-negative");
  if (r_max < r_min) throw InvalidArgument("empty refinement range r_min..r_max");
  if (level < 0) throw InvalidArgument("level must be non-negative");
  if (order < 1 || order > 6) throw InvalidArgument("order must lie in 1..6");
  if (darcy_level < 0) throw InvalidArgument("darcy_level must be non-negative");
  if (darcy_order < 1 || darcy_order > 6) throw InvalidArgument("darcy_order must lie in 1..6");
  if (!(k_c > 0.0 && k_c <= k_w && k_w < 1.0)) throw InvalidArgument("permeabilities must satisfy 0 < k_c <= k_w < 1");
  if (!(tol >= 0.0)) throw InvalidArgument("tol must be non-negative");
  if (n_max == 0 && tol == 0.0) throw InvalidArgument("greedy needs n_max > 0 or tol > 0");
  if (n_seeds < 2) throw InvalidArgument("n_seeds must be at least 2");
  if (!(t_cap > 0.0)) throw InvalidArgument("t_cap must be positive");
  if (poincare && !(*poincare > 0.0)) throw InvalidArgument("poincare override must be positive");
  if (threads == 0) throw InvalidArgument("threads must be positive");
  if (rom_reps == 0 || fom_reps == 0) throw InvalidArgument("timing repetitions must be positive");
}

void apply_setting(StudyConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InvalidArgument("expected key=value, got '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto it = setters().find(key);
  if (it == setters().end()) throw InvalidArgument("unknown configuration key '" + key + "'");
  it->second(config, key, value);
}

void apply_config_stream(StudyConfig& config, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_setting(config, line);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(StudyConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path.string());
  apply_config_stream(config, in);
}

std::string format_config(const StudyConfig& c) {
  std::ostringstream out;
  std::string orders;
  for (std::size_t i = 0; i < c.orders.size(); ++i) orders += (i ? "," : "") + std::to_string(c.orders[i]);
  out << "testcase=" << to_string(c.testcase) << '\n'
      << "orders=" << orders << '\n'
      << "r_min=" << c.r_min << '\n'
      << "r_max=" << c.r_max << '\n'
      << "level=" << c.level << '\n'
      << "order=" << c.order << '\n'
      << "darcy_level=" << c.darcy_level << '\n'
      << "darcy_order=" << c.darcy_order << '\n'
      << "k_w=" << short_number(c.k_w) << '\n'
      << "k_c=" << short_number(c.k_c) << '\n'
      << "mode=" << (c.mode == GreedyMode::weak ? "weak" : "strong") << '\n'
      << "tol=" << short_number(c.tol) << '\n'
      << "n_max=" << c.n_max << '\n'
      << "n_train=" << c.n_train << '\n'
      << "n_test=" << c.n_test << '\n'
      << "seed=" << c.seed << '\n'
      << "poincare=" << (c.poincare ? short_number(*c.poincare) : std::string("auto")) << '\n'
      << "n_seeds=" << c.n_seeds << '\n'
      << "t_cap=" << short_number(c.t_cap) << '\n'
      << "threads=" << c.threads << '\n'
      << "rom_reps=" << c.rom_reps << '\n'
      << "fom_reps=" << c.fom_reps << '\n'
      << "log_true_error=" << (c.log_true_error ? "true" : "false") << '\n'
      << "reference_level=" << c.reference_level << '\n'
      << "plots=" << (c.plots ? "true" : "false") << '\n'
      << "output_dir=" << c.output_dir.string() << '\n';
  return out.str();
}

void dump_defaults(std::ostream& out) {
  out << "# Poiseuille flow\n"
         "#   Omega_w = [0,1] x [3/8,5/8]\n"
         "#   Omega_c = ([0,1] x [1/4,3/4]) \\ Omega_w\n"
         "#   Gamma_in = [0,1] x {1}, Gamma_out = [0,1] x {0}\n"
         "#   R = 0.5, eta = 0.2\n"
         "# Darcy flow\n"
         "#   Omega_w, Omega_c as above\n"
         "#   Gamma_in = {0} x (3/4,1), Gamma_out = {1} x (0,1/4)\n"
         "#   k_w = 0.2, k_c = 0.05\n"
         "# Advection-reaction data (f = 0, c_w = 0.5, c_c = 0.1)\n"
         "#   T.1: Poiseuille, g(s) = sin(4 pi s)^2\n"
         "#   T.2: Poiseuille, g(s) = 1_[0.25,0.75](s)\n"
         "#   T.3: Darcy,      g(s) = sin(pi s)^2\n"
         "# Parameter domains (Darcy flow, data of T.3)\n"
         "#   P.1: [0,1] x {0} x {1},                 n_train = 500\n"
         "#   P.2: {0 <= c_c <= c_w <= 1} x {1},      n_train = 630\n"
         "#   P.3: {0 <= c_c <= c_w <= 1} x [1,10],   n_train = 6300\n"
         "# Gridwidths h_r = 2^-(r+3); validation on n_test = 500 random parameters\n";
  out << format_config(StudyConfig{});
}

std::vector<Parameter> training_set(ParameterDomain d, std::size_t n) {
  if (n == 0) throw InvalidArgument("training_set: size must be positive");
  std::vector<Parameter> out;
  if (d == ParameterDomain::p1) {
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      out.push_back({n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1), 0.0, 1.0});
    return out;
  }
  const std::size_t g_count = d == ParameterDomain::p3 ? 10 : 1;
  const std::size_t base = (n + g_count - 1) / g_count;
  std::size_t m = 1;
  while (m * (m + 1) / 2 < base) ++m;
  std::vector<Parameter> lattice;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double cw = m == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(m - 1);
      const double cc = m == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(m - 1);
      lattice.push_back({cw, cc, 1.0});
    }
  for (std::size_t g = 0; g < g_count; ++g) {
    const double g0 = g_count == 1 ? 1.0 : 1.0 + 9.0 * static_cast<double>(g) / static_cast<double>(g_count - 1);
    for (Parameter mu : lattice) {
      mu.g_0 = g0;
      out.push_back(mu);
    }
  }
  return out;
}

std::vector<Parameter> random_parameters(ParameterDomain d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Parameter> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Parameter mu;
    mu.c_w = unit(rng);
    if (d != ParameterDomain::p1) {
      mu.c_c = unit(rng);
      if (mu.c_c > mu.c_w) std::swap(mu.c_c, mu.c_w);
    }
    if (d == ParameterDomain::p3) mu.g_0 = 1.0 + 9.0 * unit(rng);
    out.push_back(mu);
  }
  return out;
}

namespace {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw InvalidArgument("fit: need at least two matching samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit: abscissae must not all coincide");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    sse += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

std::vector<double> logs(const std::vector<double>& v, const char* what) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) {
    if (!(x > 0.0)) throw InvalidArgument(std::string("fit: ") + what + " must be positive");
    out.push_back(std::log(x));
  }
  return out;
}

}  // namespace

double fit_eoc(const std::vector<double>& h, const std::vector<double>& error) {
  return fit_line(logs(h, "gridwidths"), logs(error, "errors")).slope;
}

ExponentialFit fit_exponential(const std::vector<double>& n, const std::vector<double>& error) {
  const LineFit f = fit_line(n, logs(error, "errors"));
  return {std::exp(f.intercept), -f.slope, f.r_squared};
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace uwrb
