// Copyright 2026 The qpopf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qpopf/grid_model.h"

#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>

#include "absl/strings/str_cat.h"
#include "qpopf/util.h"

namespace qpopf {
namespace {

using nlohmann::json;

absl::StatusOr<double> GetNumber(const json& obj, const char* key,
                                 const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_number()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": missing or non-numeric field '", key, "'"));
  }
  return obj[key].get<double>();
}

absl::StatusOr<int> GetInt(const json& obj, const char* key,
                           const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) ||
      !obj[key].is_number_integer()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": missing or non-integer field '", key, "'"));
  }
  return obj[key].get<int>();
}

absl::StatusOr<const json*> GetArray(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    return absl::InvalidArgumentError(
        absl::StrCat("case: missing array '", key, "'"));
  }
  return &j[key];
}

}  // namespace

absl::StatusOr<GridCase> ParseCase(const json& j) {
  if (!j.is_object()) return absl::InvalidArgumentError("case: not an object");
  GridCase grid;
  QPOPF_ASSIGN_OR_RETURN(grid.schema_version, GetInt(j, "schema_version", "case"));
  if (grid.schema_version != kCaseSchemaVersion) {
    return absl::InvalidArgumentError(absl::StrCat(
        "case: unsupported schema_version ", grid.schema_version));
  }
  grid.name = j.value("name", "");
  QPOPF_ASSIGN_OR_RETURN(grid.base_mva, GetNumber(j, "base_mva", "case"));
  if (j.contains("voltage")) {
    const json& v = j["voltage"];
    QPOPF_ASSIGN_OR_RETURN(grid.v_root_pu, GetNumber(v, "root_pu", "voltage"));
    QPOPF_ASSIGN_OR_RETURN(grid.v_min_pu, GetNumber(v, "min_pu", "voltage"));
    QPOPF_ASSIGN_OR_RETURN(grid.v_max_pu, GetNumber(v, "max_pu", "voltage"));
  }

  const json* arr = nullptr;
  QPOPF_ASSIGN_OR_RETURN(arr, GetArray(j, "buses"));
  for (const auto& b : *arr) {
    if (!b.is_number_integer()) {
      return absl::InvalidArgumentError("buses: non-integer bus id");
    }
    grid.buses.push_back(b.get<int>());
  }

  QPOPF_ASSIGN_OR_RETURN(arr, GetArray(j, "lines"));
  for (size_t i = 0; i < arr->size(); ++i) {
    const json& e = (*arr)[i];
    const std::string where = absl::StrCat("lines[", i, "]");
    Line line;
    QPOPF_ASSIGN_OR_RETURN(line.from_bus, GetInt(e, "from", where));
    QPOPF_ASSIGN_OR_RETURN(line.to_bus, GetInt(e, "to", where));
    QPOPF_ASSIGN_OR_RETURN(line.r_pu, GetNumber(e, "r_pu", where));
    QPOPF_ASSIGN_OR_RETURN(line.x_pu, GetNumber(e, "x_pu", where));
    QPOPF_ASSIGN_OR_RETURN(line.limit_mw, GetNumber(e, "limit_mw", where));
    line.monitored = e.value("monitored", false);
    grid.lines.push_back(line);
  }

  QPOPF_ASSIGN_OR_RETURN(arr, GetArray(j, "generators"));
  for (size_t i = 0; i < arr->size(); ++i) {
    const json& e = (*arr)[i];
    const std::string where = absl::StrCat("generators[", i, "]");
    Generator g;
    QPOPF_ASSIGN_OR_RETURN(g.bus, GetInt(e, "bus", where));
    QPOPF_ASSIGN_OR_RETURN(g.cost, GetNumber(e, "cost", where));
    QPOPF_ASSIGN_OR_RETURN(g.p_min_mw, GetNumber(e, "p_min_mw", where));
    QPOPF_ASSIGN_OR_RETURN(g.p_max_mw, GetNumber(e, "p_max_mw", where));
    grid.generators.push_back(g);
  }

  QPOPF_ASSIGN_OR_RETURN(arr, GetArray(j, "demands"));
  for (size_t i = 0; i < arr->size(); ++i) {
    const json& e = (*arr)[i];
    const std::string where = absl::StrCat("demands[", i, "]");
    if (e.value("elastic", false)) {
      ElasticDemand d;
      QPOPF_ASSIGN_OR_RETURN(d.bus, GetInt(e, "bus", where));
      QPOPF_ASSIGN_OR_RETURN(d.p_min_mw, GetNumber(e, "p_min_mw", where));
      QPOPF_ASSIGN_OR_RETURN(d.p_max_mw, GetNumber(e, "p_max_mw", where));
      grid.elastic_demands.push_back(d);
    } else {
      FixedDemand d;
      QPOPF_ASSIGN_OR_RETURN(d.bus, GetInt(e, "bus", where));
      QPOPF_ASSIGN_OR_RETURN(d.p_mw, GetNumber(e, "p_mw", where));
      d.q_mvar = e.value("q_mvar", 0.0);
      grid.demands.push_back(d);
    }
  }

  QPOPF_ASSIGN_OR_RETURN(arr, GetArray(j, "renewables"));
  for (size_t i = 0; i < arr->size(); ++i) {
    const json& e = (*arr)[i];
    const std::string where = absl::StrCat("renewables[", i, "]");
    RenewableUnit r;
    QPOPF_ASSIGN_OR_RETURN(r.bus, GetInt(e, "bus", where));
    QPOPF_ASSIGN_OR_RETURN(r.forecast_mw, GetNumber(e, "forecast_mw", where));
    QPOPF_ASSIGN_OR_RETURN(r.deviation_kw, GetNumber(e, "deviation_kw", where));
    grid.renewables.push_back(r);
  }

  if (auto st = ValidateCase(grid); !st.ok()) return st;
  return grid;
}

absl::StatusOr<GridCase> LoadCase(const std::string& path) {
  auto j = ReadJsonFile(path);
  if (!j.ok()) return j.status();
  auto grid = ParseCase(*j);
  if (!grid.ok()) {
    return absl::Status(grid.status().code(),
                        absl::StrCat(path, ": ", grid.status().message()));
  }
  return grid;
}

absl::Status ValidateCase(const GridCase& grid) {
  if (grid.buses.empty()) return absl::InvalidArgumentError("case: no buses");
  if (!(grid.base_mva > 0)) {
    return absl::InvalidArgumentError("case: base_mva must be positive");
  }
  if (!(grid.v_min_pu <= grid.v_max_pu)) {
    return absl::InvalidArgumentError("voltage: min_pu > max_pu");
  }
  std::set<int> ids;
  for (int b : grid.buses) {
    if (!ids.insert(b).second) {
      return absl::InvalidArgumentError(absl::StrCat("buses: duplicate id ", b));
    }
  }
  auto check_bus = [&](int bus, const std::string& where) -> absl::Status {
    if (!ids.count(bus)) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": unknown bus ", bus));
    }
    return absl::OkStatus();
  };
  for (size_t i = 0; i < grid.lines.size(); ++i) {
    const Line& l = grid.lines[i];
    const std::string where = absl::StrCat("lines[", i, "] (", l.from_bus,
                                           "-", l.to_bus, ")");
    if (auto st = check_bus(l.from_bus, where); !st.ok()) return st;
    if (auto st = check_bus(l.to_bus, where); !st.ok()) return st;
    if (l.from_bus == l.to_bus) {
      return absl::InvalidArgumentError(absl::StrCat(where, ": self loop"));
    }
    if (!(l.limit_mw >= 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": negative flow limit"));
    }
  }
  for (size_t i = 0; i < grid.generators.size(); ++i) {
    const Generator& g = grid.generators[i];
    const std::string where = absl::StrCat("generators[", i, "]");
    if (auto st = check_bus(g.bus, where); !st.ok()) return st;
    if (!(g.p_min_mw <= g.p_max_mw)) {
      return absl::InvalidArgumentError(absl::StrCat(where, ": p_min > p_max"));
    }
  }
  for (size_t i = 0; i < grid.demands.size(); ++i) {
    if (auto st = check_bus(grid.demands[i].bus, absl::StrCat("demands[", i, "]"));
        !st.ok()) {
      return st;
    }
  }
  for (size_t i = 0; i < grid.elastic_demands.size(); ++i) {
    const ElasticDemand& d = grid.elastic_demands[i];
    const std::string where = absl::StrCat("elastic demand at bus ", d.bus);
    if (auto st = check_bus(d.bus, where); !st.ok()) return st;
    if (!(d.p_min_mw <= d.p_max_mw)) {
      return absl::InvalidArgumentError(absl::StrCat(where, ": min > max"));
    }
  }
  for (size_t i = 0; i < grid.renewables.size(); ++i) {
    const RenewableUnit& r = grid.renewables[i];
    const std::string where = absl::StrCat("renewables[", i, "]");
    if (auto st = check_bus(r.bus, where); !st.ok()) return st;
    if (!(r.deviation_kw >= 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": negative deviation bound"));
    }
  }

  // Radiality: a connected graph with |lines| = |buses| - 1 is a tree.
  std::map<int, std::vector<int>> adj;
  for (const Line& l : grid.lines) {
    adj[l.from_bus].push_back(l.to_bus);
    adj[l.to_bus].push_back(l.from_bus);
  }
  std::set<int> seen{grid.buses.front()};
  std::queue<int> todo;
  todo.push(grid.buses.front());
  while (!todo.empty()) {
    const int b = todo.front();
    todo.pop();
    for (int nb : adj[b]) {
      if (seen.insert(nb).second) todo.push(nb);
    }
  }
  if (seen.size() != ids.size()) {
    for (int b : grid.buses) {
      if (!seen.count(b)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "case: network is not connected (bus ", b, " unreachable)"));
      }
    }
  }
  if (grid.lines.size() + 1 != grid.buses.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "case: network is not radial (", grid.lines.size(), " lines for ",
        grid.buses.size(), " buses)"));
  }
  return absl::OkStatus();
}

bool ThetaBox::Contains(const Eigen::VectorXd& theta, double tol) const {
  if (theta.size() != lower.size()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (theta(i) < lower(i) - tol || theta(i) > upper(i) + tol) return false;
  }
  return true;
}

absl::Status ValidateLp(const ParametricLp& lp) {
  const int n = lp.num_variables();
  const int q = lp.num_constraints();
  const int m = lp.theta_box.dim();
  if (lp.W.rows() != q || lp.W.cols() != n) {
    return absl::InvalidArgumentError("lp: W must be q x n");
  }
  if (lp.T.rows() != q || lp.T.cols() != m || lp.theta_box.upper.size() != m) {
    return absl::InvalidArgumentError("lp: T must be q x m");
  }
  if (static_cast<int>(lp.mirror_row.size()) != q) {
    return absl::InvalidArgumentError("lp: mirror table size mismatch");
  }
  for (int i = 0; i < q; ++i) {
    const int j = lp.mirror_row[i];
    if (j < 0) continue;
    if (j >= q || lp.mirror_row[j] != i ||
        !(lp.W.row(i) + lp.W.row(j)).isZero(0) || lp.S(i) != -lp.S(j) ||
        !(lp.T.row(i) + lp.T.row(j)).isZero(0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("lp: row ", i, " is not a mirrored equality pair"));
    }
  }
  for (int i = 0; i < m; ++i) {
    if (!(lp.theta_box.lower(i) <= lp.theta_box.upper(i))) {
      return absl::InvalidArgumentError("lp: theta box lower > upper");
    }
  }
  if (!lp.W.allFinite() || !lp.S.allFinite() || !lp.T.allFinite() ||
      !lp.c.allFinite()) {
    return absl::InvalidArgumentError("lp: non-finite coefficient");
  }
  return absl::OkStatus();
}

std::string HashLp(const ParametricLp& lp) {
  std::string text;
  auto put_matrix = [&](const char* tag, const Eigen::MatrixXd& a) {
    absl::StrAppend(&text, tag, ":", a.rows(), "x", a.cols(), ":");
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        absl::StrAppend(&text, FormatDouble(a(r, c)), ",");
      }
    }
  };
  put_matrix("c", lp.c);
  put_matrix("W", lp.W);
  put_matrix("S", lp.S);
  put_matrix("T", lp.T);
  put_matrix("lo", lp.theta_box.lower);
  put_matrix("hi", lp.theta_box.upper);
  for (int r : lp.mirror_row) absl::StrAppend(&text, r, ",");
  return Sha256Hex(text);
}

namespace {

void AppendRow(ParametricLp& lp, const Eigen::RowVectorXd& coeffs, double rhs,
               const Eigen::RowVectorXd& t_row, const std::string& name,
               int mirror) {
  const Eigen::Index q = lp.W.rows();
  lp.W.conservativeResize(q + 1, coeffs.size());
  lp.W.row(q) = coeffs;
  lp.S.conservativeResize(q + 1);
  lp.S(q) = rhs;
  lp.T.conservativeResize(q + 1, t_row.size());
  lp.T.row(q) = t_row;
  lp.constraint_names.push_back(name);
  lp.mirror_row.push_back(mirror);
}

}  // namespace

void AddEqualityRows(ParametricLp& lp, const Eigen::RowVectorXd& coeffs,
                     double rhs, const Eigen::RowVectorXd& t_row,
                     const std::string& name) {
  const int q = static_cast<int>(lp.W.rows());
  AppendRow(lp, coeffs, rhs, t_row, name + "(<=)", q + 1);
  AppendRow(lp, -coeffs, -rhs, -t_row, name + "(>=)", q);
}

void AddInequalityRow(ParametricLp& lp, const Eigen::RowVectorXd& coeffs,
                      double rhs, const Eigen::RowVectorXd& t_row,
                      const std::string& name) {
  AppendRow(lp, coeffs, rhs, t_row, name, -1);
}

absl::StatusOr<ParametricLp> Linearize(const GridCase& grid) {
  if (auto st = ValidateCase(grid); !st.ok()) return st;
  const int num_gen = static_cast<int>(grid.generators.size());
  const int num_el = static_cast<int>(grid.elastic_demands.size());
  const int num_line = static_cast<int>(grid.lines.size());
  const int num_ren = static_cast<int>(grid.renewables.size());
  const int n = num_gen + num_el + num_line;
  const int m = num_ren;
  const int gen0 = 0, el0 = num_gen, flow0 = num_gen + num_el;
  constexpr double kMwPerKw = 1e-3;

  for (int l = 0; l < num_line; ++l) {
    const Line& line = grid.lines[l];
    if (line.r_pu == 0.0 && line.x_pu == 0.0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line.from_bus, "-", line.to_bus, ": zero impedance"));
    }
  }
  for (const Generator& g : grid.generators) {
    if (!std::isfinite(g.p_min_mw) || !std::isfinite(g.p_max_mw)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "generator at bus ", g.bus, ": unbounded variable has no box"));
    }
  }
  for (const ElasticDemand& d : grid.elastic_demands) {
    if (!std::isfinite(d.p_min_mw) || !std::isfinite(d.p_max_mw)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "elastic demand at bus ", d.bus, ": unbounded variable has no box"));
    }
  }
  for (const Line& line : grid.lines) {
    if (!std::isfinite(line.limit_mw)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line.from_bus, "-", line.to_bus,
          ": unbounded flow has no limit"));
    }
  }

  ParametricLp lp;
  lp.c = Eigen::VectorXd::Zero(n);
  lp.W.resize(0, n);
  lp.S.resize(0);
  lp.T.resize(0, m);
  for (int g = 0; g < num_gen; ++g) {
    lp.c(gen0 + g) = grid.generators[g].cost;
    lp.variable_names.push_back(
        absl::StrCat("gen", g + 1, "@bus", grid.generators[g].bus));
    lp.tracked_variables.push_back(gen0 + g);
  }
  for (int e = 0; e < num_el; ++e) {
    lp.variable_names.push_back(
        absl::StrCat("elastic@bus", grid.elastic_demands[e].bus));
  }
  for (int l = 0; l < num_line; ++l) {
    const Line& line = grid.lines[l];
    lp.variable_names.push_back(
        absl::StrCat("flow", l + 1, "(", line.from_bus, "-", line.to_bus, ")"));
    if (line.monitored) lp.tracked_variables.push_back(flow0 + l);
  }

  const Eigen::RowVectorXd zero_t = Eigen::RowVectorXd::Zero(m);

  // Nodal active-power balance.
  for (int bus : grid.buses) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    Eigen::RowVectorXd t_row = Eigen::RowVectorXd::Zero(m);
    double rhs = 0.0;
    for (int l = 0; l < num_line; ++l) {
      if (grid.lines[l].to_bus == bus) row(flow0 + l) += 1.0;
      if (grid.lines[l].from_bus == bus) row(flow0 + l) -= 1.0;
    }
    for (int g = 0; g < num_gen; ++g) {
      if (grid.generators[g].bus == bus) row(gen0 + g) += 1.0;
    }
    for (int e = 0; e < num_el; ++e) {
      if (grid.elastic_demands[e].bus == bus) row(el0 + e) -= 1.0;
    }
    for (const FixedDemand& d : grid.demands) {
      if (d.bus == bus) rhs += d.p_mw;
    }
    for (int r = 0; r < num_ren; ++r) {
      if (grid.renewables[r].bus == bus) {
        rhs -= grid.renewables[r].forecast_mw;
        t_row(r) -= kMwPerKw;
      }
    }
    AddEqualityRows(lp, row, rhs, t_row, absl::StrCat("balance@bus", bus));
  }

  // Boxes.
  for (int g = 0; g < num_gen; ++g) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    row(gen0 + g) = 1.0;
    AddInequalityRow(lp, row, grid.generators[g].p_max_mw, zero_t,
                     absl::StrCat(lp.variable_names[gen0 + g], "<=max"));
    AddInequalityRow(lp, -row, -grid.generators[g].p_min_mw, zero_t,
                     absl::StrCat(lp.variable_names[gen0 + g], ">=min"));
  }
  for (int e = 0; e < num_el; ++e) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    row(el0 + e) = 1.0;
    AddInequalityRow(lp, row, grid.elastic_demands[e].p_max_mw, zero_t,
                     absl::StrCat(lp.variable_names[el0 + e], "<=max"));
    AddInequalityRow(lp, -row, -grid.elastic_demands[e].p_min_mw, zero_t,
                     absl::StrCat(lp.variable_names[el0 + e], ">=min"));
  }
  for (int l = 0; l < num_line; ++l) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    row(flow0 + l) = 1.0;
    AddInequalityRow(lp, row, grid.lines[l].limit_mw, zero_t,
                     absl::StrCat(lp.variable_names[flow0 + l], "<=limit"));
    AddInequalityRow(lp, -row, grid.lines[l].limit_mw, zero_t,
                     absl::StrCat(lp.variable_names[flow0 + l], ">=-limit"));
  }

  // Voltage drops along the tree. Orient each line away from the root.
  const int root = grid.buses.front();
  std::map<int, std::vector<int>> incident;
  for (int l = 0; l < num_line; ++l) {
    incident[grid.lines[l].from_bus].push_back(l);
    incident[grid.lines[l].to_bus].push_back(l);
  }
  std::map<int, int> parent_line;  // bus -> line towards root
  std::map<int, double> away_sign;  // line -> +1 if from_bus is parent side
  std::vector<int> order{root};
  std::set<int> visited{root};
  for (size_t k = 0; k < order.size(); ++k) {
    const int b = order[k];
    for (int l : incident[b]) {
      const Line& line = grid.lines[l];
      const int other = line.from_bus == b ? line.to_bus : line.from_bus;
      if (visited.insert(other).second) {
        parent_line[other] = l;
        away_sign[l] = line.from_bus == b ? 1.0 : -1.0;
        order.push_back(other);
      }
    }
  }
  // Reactive flow on each line (away from root) is the subtree's demand.
  std::map<int, double> subtree_q;
  for (const FixedDemand& d : grid.demands) subtree_q[d.bus] += d.q_mvar;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (*it == root) continue;
    const Line& line = grid.lines[parent_line[*it]];
    const int parent = line.from_bus == *it ? line.to_bus : line.from_bus;
    subtree_q[parent] += subtree_q[*it];
  }

  const double v0 = grid.v_root_pu * grid.v_root_pu;
  const double vmin = grid.v_min_pu * grid.v_min_pu;
  const double vmax = grid.v_max_pu * grid.v_max_pu;
  std::map<int, Eigen::RowVectorXd> drop_coeff;
  std::map<int, double> drop_const;
  drop_coeff[root] = Eigen::RowVectorXd::Zero(n);
  drop_const[root] = 0.0;
  for (size_t k = 1; k < order.size(); ++k) {
    const int b = order[k];
    const int l = parent_line[b];
    const Line& line = grid.lines[l];
    const int parent = line.from_bus == b ? line.to_bus : line.from_bus;
    Eigen::RowVectorXd coeff = drop_coeff[parent];
    coeff(flow0 + l) += 2.0 * line.r_pu * away_sign[l] / grid.base_mva;
    drop_coeff[b] = coeff;
    drop_const[b] = drop_const[parent] +
                    2.0 * line.x_pu * subtree_q[b] / grid.base_mva;
  }
  for (size_t k = 1; k < order.size(); ++k) {
    const int b = order[k];
    const Eigen::RowVectorXd& a = drop_coeff[b];
    const double kappa = drop_const[b];
    // v_b = v0 - a x - kappa within [vmin, vmax].
    if (a.isZero(0)) {
      if (v0 - kappa < vmin || v0 - kappa > vmax) {
        return absl::InvalidArgumentError(
            absl::StrCat("bus ", b, ": voltage limits unsatisfiable"));
      }
      continue;
    }
    AddInequalityRow(lp, a, v0 - kappa - vmin, zero_t,
                     absl::StrCat("vmin@bus", b));
    AddInequalityRow(lp, -a, vmax - v0 + kappa, zero_t,
                     absl::StrCat("vmax@bus", b));
  }

  lp.theta_box.lower.resize(m);
  lp.theta_box.upper.resize(m);
  for (int r = 0; r < num_ren; ++r) {
    lp.theta_box.lower(r) = -grid.renewables[r].deviation_kw;
    lp.theta_box.upper(r) = grid.renewables[r].deviation_kw;
    if (grid.renewables[r].deviation_kw == 0.0) lp.single_point_theta = true;
  }
  if (auto st = ValidateLp(lp); !st.ok()) return st;
  return lp;
}

absl::StatusOr<Eigen::VectorXd> NormalizeTheta(const Eigen::VectorXd& theta,
                                               const ThetaBox& box) {
  if (theta.size() != box.dim()) {
    return absl::InvalidArgumentError("theta dimension mismatch");
  }
  if (!box.Contains(theta, 1e-9)) {
    return absl::OutOfRangeError("theta outside the parameter box");
  }
  Eigen::VectorXd out(theta.size());
  const Eigen::VectorXd center = box.Center();
  const Eigen::VectorXd half = box.HalfWidth();
  for (int i = 0; i < box.dim(); ++i) {
    if (half(i) <= 0) {
      return absl::FailedPreconditionError(
          absl::StrCat("parameter ", i, " has a zero-width range"));
    }
    out(i) = (theta(i) - center(i)) / half(i);
  }
  return out;
}

Eigen::VectorXd DenormalizeTheta(const Eigen::VectorXd& theta_normalized,
                                 const ThetaBox& box) {
  return box.Center() + box.HalfWidth().cwiseProduct(theta_normalized);
}

absl::StatusOr<ParametricLp> NormalizeParameters(const ParametricLp& lp) {
  if (auto st = ValidateLp(lp); !st.ok()) return st;
  const Eigen::VectorXd center = lp.theta_box.Center();
  const Eigen::VectorXd half = lp.theta_box.HalfWidth();
  for (int i = 0; i < lp.num_parameters(); ++i) {
    if (!(half(i) > 0)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "parameter ", i,
          " has a degenerate (zero-width) range; the parameter space must be "
          "full-dimensional"));
    }
  }
  ParametricLp out = lp;
  out.S = lp.S + lp.T * center;
  out.T = lp.T * half.asDiagonal();
  // Mirrored rows must stay exact negatives after the affine change.
  for (int i = 0; i < out.num_constraints(); ++i) {
    const int j = out.mirror_row[i];
    if (j > i) {
      out.S(j) = -out.S(i);
      out.T.row(j) = -out.T.row(i);
    }
  }
  out.theta_box.lower = -Eigen::VectorXd::Ones(lp.num_parameters());
  out.theta_box.upper = Eigen::VectorXd::Ones(lp.num_parameters());
  out.single_point_theta = false;
  return out;
}

}  // namespace qpopf
