#include "scn/design_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace scn {

using nlohmann::json;

namespace {

json matrix_json(const MatrixXd& M) {
  json a = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    a.push_back(row);
  }
  return a;
}

MatrixXd matrix_from(const json& a, const std::string& what) {
  if (!a.is_array()) throw ConfigError("design file: '" + what + "' must be a matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(a.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(a[0].size()) : 0;
  MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!a[r].is_array() || static_cast<Eigen::Index>(a[r].size()) != cols)
      throw ConfigError("design file: '" + what + "' has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = a[r][c].get<double>();
  }
  return M;
}

lmi::SolveStatus parse_status(const std::string& s) {
  for (auto st : {lmi::SolveStatus::Optimal, lmi::SolveStatus::Infeasible, lmi::SolveStatus::NumericalFailure})
    if (s == lmi::to_string(st)) return st;
  throw ConfigError("design file: unknown status '" + s + "'");
}

json local_json(const LocalDesign& d) {
  json grid = json::array();
  for (const auto& g : d.grid)
    grid.push_back({{"rho", g.rho},
                    {"status", lmi::to_string(g.status)},
                    {"gamma_tilde", g.gamma_tilde},
                    {"note", g.note}});
  return {{"method", d.method == LocalMethod::Basic ? "basic" : "improved"},
          {"extended_output", d.extended_output},
          {"L", matrix_json(d.L)},
          {"K", matrix_json(d.K)},
          {"P", matrix_json(d.P)},
          {"nu", d.nu},
          {"passivity_rho", d.passivity_rho},
          {"rho_tilde", d.rho_tilde},
          {"gamma_tilde", d.gamma_tilde},
          {"p_used", d.p_used},
          {"min_eigenvalue", d.min_eigenvalue},
          {"grid", grid}};
}

LocalDesign local_from(const json& j) {
  LocalDesign d;
  const std::string m = j.at("method").get<std::string>();
  if (m == "basic") d.method = LocalMethod::Basic;
  else if (m == "improved") d.method = LocalMethod::Improved;
  else throw ConfigError("design file: unknown local method '" + m + "'");
  d.extended_output = j.at("extended_output").get<bool>();
  d.L = matrix_from(j.at("L"), "L");
  d.K = matrix_from(j.at("K"), "K");
  d.P = matrix_from(j.at("P"), "P");
  d.nu = j.at("nu").get<double>();
  d.passivity_rho = j.at("passivity_rho").get<double>();
  d.rho_tilde = j.at("rho_tilde").get<double>();
  d.gamma_tilde = j.at("gamma_tilde").get<double>();
  d.p_used = j.at("p_used").get<double>();
  d.min_eigenvalue = j.at("min_eigenvalue").get<double>();
  for (const auto& g : j.at("grid"))
    d.grid.push_back({g.at("rho").get<double>(), parse_status(g.at("status").get<std::string>()),
                      g.at("gamma_tilde").get<double>(), g.at("note").get<std::string>()});
  if (d.P.rows() != d.P.cols() || d.L.cols() != d.P.rows())
    throw ConfigError("design file: local design dimensions are inconsistent");
  return d;
}

json global_json(const GlobalDesign& g) {
  return {{"N", g.N},
          {"n", g.n},
          {"Kbar", matrix_json(g.Kbar)},
          {"K", matrix_json(g.K)},
          {"L", matrix_json(g.L)},
          {"p", std::vector<double>(g.p.data(), g.p.data() + g.p.size())},
          {"gamma_tilde", g.gamma_tilde},
          {"objective", g.objective},
          {"min_eigenvalue", g.min_eigenvalue},
          {"constrained", g.constrained},
          {"gamma_binding", g.gamma_binding}};
}

GlobalDesign global_from(const json& j) {
  GlobalDesign g;
  g.N = j.at("N").get<int>();
  g.n = j.at("n").get<int>();
  g.Kbar = matrix_from(j.at("Kbar"), "Kbar");
  g.K = matrix_from(j.at("K"), "K");
  g.L = matrix_from(j.at("L"), "L");
  const auto p = j.at("p").get<std::vector<double>>();
  g.p = Eigen::Map<const VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  g.gamma_tilde = j.at("gamma_tilde").get<double>();
  g.objective = j.at("objective").get<double>();
  g.min_eigenvalue = j.at("min_eigenvalue").get<double>();
  g.constrained = j.at("constrained").get<bool>();
  g.gamma_binding = j.at("gamma_binding").get<bool>();
  const int m = g.N * g.n;
  if (g.N < 1 || g.n < 1 || g.K.rows() != m || g.K.cols() != m || g.Kbar.rows() != m ||
      g.L.rows() != m || g.p.size() != g.N)
    throw ConfigError("design file: global design dimensions are inconsistent");
  return g;
}

}  // namespace

std::string design_to_json(const NetworkDesign& d, int indent) {
  json local = json::array();
  for (const auto& l : d.local) local.push_back(local_json(l));
  json root = {{"format", "scn-design"},
               {"version", 1},
               {"strategy", to_string(d.kind)},
               {"local", local},
               {"global", d.global ? global_json(*d.global) : json(nullptr)}};
  return root.dump(indent) + "\n";
}

NetworkDesign design_from_json(const std::string& text) {
  try {
    const json root = json::parse(text);
    if (root.at("format").get<std::string>() != "scn-design" || root.at("version").get<int>() != 1)
      throw ConfigError("not an scn-design version 1 file");
    NetworkDesign d;
    try {
      d.kind = parse_strategy(root.at("strategy").get<std::string>());
    } catch (const InvalidParameter& e) {
      throw ConfigError(e.what());
    }
    for (const auto& l : root.at("local")) d.local.push_back(local_from(l));
    if (!root.at("global").is_null()) d.global = global_from(root.at("global"));
    return d;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed design file: ") + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot move " + tmp + " to " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_design(const std::string& path, const NetworkDesign& d) {
  write_file_atomic(path, design_to_json(d));
}

NetworkDesign load_design(const std::string& path) { return design_from_json(read_file(path)); }

}  // namespace scn
