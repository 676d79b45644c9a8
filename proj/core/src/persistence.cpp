#include "uwrb/persistence.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "uwrb/errors.hpp"

namespace uwrb {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "uwrb-reduced-model";
constexpr int kVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* name) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
    throw ModelLoadError(std::string("matrix '") + name + "' has inconsistent dimensions");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = data[k++].get<double>();
  return m;
}

void require_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) throw ModelLoadError(std::string("matrix '") + name + "' has wrong shape");
}

}  // namespace

void save_model(const ReducedModel& model, std::ostream& out) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["N"] = model.size();
  j["Q_a"] = 3;
  const auto& p = model.provenance;
  j["provenance"] = {{"testcase", p.testcase}, {"geometry", p.geometry}, {"profile", p.profile},
                     {"domain", p.domain},     {"level", p.level},       {"order", p.order},
                     {"seed", p.seed}};
  const auto& c = model.constants;
  j["constants"] = {{"poincare", c.poincare}, {"t_min", c.t_min},   {"t_max", c.t_max},
                    {"capped", c.capped},     {"overridden", c.overridden}};
  json params = json::array();
  for (const auto& mu : model.parameters) params.push_back({mu.c_w, mu.c_c, mu.g_0});
  j["parameters"] = std::move(params);
  json blocks = json::array();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) blocks.push_back(matrix_to_json(model.blocks[a][b]));
  j["blocks"] = std::move(blocks);
  j["rhs"] = matrix_to_json(model.rhs);
  j["residual_factor"] = matrix_to_json(model.residual_factor);
  j["residual_gram"] = matrix_to_json(model.residual_gram);
  j["outflow_gram"] = matrix_to_json(model.outflow_gram);
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("save_model: write failed");
}

void save_model(const ReducedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
  save_model(model, out);
}

ReducedModel load_model(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ModelLoadError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) throw ModelLoadError("unknown model format");
    if (j.at("version").get<int>() != kVersion) throw ModelLoadError("unsupported model version");
    if (j.at("Q_a").get<int>() != 3) throw ModelLoadError("unsupported number of operator components");
    const auto n = j.at("N").get<Eigen::Index>();
    if (n < 0) throw ModelLoadError("negative basis size");

    ReducedModel m;
    const auto& p = j.at("provenance");
    m.provenance.testcase = p.at("testcase").get<std::string>();
    m.provenance.geometry = p.at("geometry").get<std::string>();
    m.provenance.profile = p.at("profile").get<std::string>();
    m.provenance.domain = p.at("domain").get<std::string>();
    m.provenance.level = p.at("level").get<int>();
    m.provenance.order = p.at("order").get<int>();
    m.provenance.seed = p.at("seed").get<std::uint64_t>();
    const auto& c = j.at("constants");
    m.constants.poincare = c.at("poincare").get<double>();
    m.constants.t_min = c.at("t_min").get<double>();
    m.constants.t_max = c.at("t_max").get<double>();
    m.constants.capped = c.at("capped").get<bool>();
    m.constants.overridden = c.at("overridden").get<bool>();
    if (!(m.constants.poincare > 0.0)) throw ModelLoadError("Poincare constant must be positive");
    for (const auto& mu : j.at("parameters")) {
      if (mu.size() != 3) throw ModelLoadError("parameter entries must have three components");
      m.parameters.push_back({mu[0].get<double>(), mu[1].get<double>(), mu[2].get<double>()});
    }
    const auto& blocks = j.at("blocks");
    if (blocks.size() != 9) throw ModelLoadError("expected 9 reduced blocks");
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        m.blocks[a][b] = matrix_from_json(blocks[static_cast<std::size_t>(3 * a + b)], "blocks");
        require_shape(m.blocks[a][b], n, n, "blocks");
      }
    const Eigen::MatrixXd rhs = matrix_from_json(j.at("rhs"), "rhs");
    require_shape(rhs, n, 1, "rhs");
    m.rhs = rhs.col(0);
    const Eigen::Index cols = 1 + 6 * n;
    m.residual_factor = matrix_from_json(j.at("residual_factor"), "residual_factor");
    if (m.residual_factor.cols() != cols) throw ModelLoadError("matrix 'residual_factor' has wrong shape");
    m.residual_gram = matrix_from_json(j.at("residual_gram"), "residual_gram");
    require_shape(m.residual_gram, cols, cols, "residual_gram");
    m.outflow_gram = matrix_from_json(j.at("outflow_gram"), "outflow_gram");
    require_shape(m.outflow_gram, n, n, "outflow_gram");
    return m;
  } catch (const json::exception& e) {
    throw ModelLoadError(std::string("model file is missing or has malformed fields: ") + e.what());
  }
}

ReducedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelLoadError("cannot open model file " + path.string());
  return load_model(in);
}

}  // namespace uwrb
