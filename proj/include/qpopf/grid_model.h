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

// Distribution-network case data and its LinDistFlow parametric LP.

#ifndef QPOPF_GRID_MODEL_H_
#define QPOPF_GRID_MODEL_H_

#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include <Eigen/Dense>
#include "json.hpp"

namespace qpopf {

inline constexpr int kCaseSchemaVersion = 1;

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double r_pu = 0.0;
  double x_pu = 0.0;
  double limit_mw = 0.0;
  bool monitored = false;
};

struct Generator {
  int bus = 0;
  double cost = 0.0;  // $/MWh
  double p_min_mw = 0.0;
  double p_max_mw = 0.0;
};

struct FixedDemand {
  int bus = 0;
  double p_mw = 0.0;
  double q_mvar = 0.0;
};

// Zero-cost demand that can be dispatched anywhere within its bounds.
struct ElasticDemand {
  int bus = 0;
  double p_min_mw = 0.0;
  double p_max_mw = 0.0;
};

// Deviation bounds are in kW; everything else in the case is MW.
struct RenewableUnit {
  int bus = 0;
  double forecast_mw = 0.0;
  double deviation_kw = 0.0;
};

struct GridCase {
  int schema_version = kCaseSchemaVersion;
  std::string name;
  double base_mva = 1.0;
  double v_root_pu = 1.0;
  double v_min_pu = 0.9;
  double v_max_pu = 1.1;
  std::vector<int> buses;  // buses[0] is the substation (root)
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<FixedDemand> demands;
  std::vector<ElasticDemand> elastic_demands;
  std::vector<RenewableUnit> renewables;
};

absl::StatusOr<GridCase> ParseCase(const nlohmann::json& j);
absl::StatusOr<GridCase> LoadCase(const std::string& path);

// Checks bus references, bound ordering and radiality.
absl::Status ValidateCase(const GridCase& grid);

struct ThetaBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool Contains(const Eigen::VectorXd& theta, double tol = 1e-9) const;
  Eigen::VectorXd Center() const { return 0.5 * (lower + upper); }
  Eigen::VectorXd HalfWidth() const { return 0.5 * (upper - lower); }
};

// min c'x  s.t.  W x <= S + T theta,  theta in theta_box.
//
// Equalities are stored as two opposing rows; mirror_row[i] holds the index
// of the partner row (or -1 for plain inequalities).
struct ParametricLp {
  Eigen::VectorXd c;
  Eigen::MatrixXd W;
  Eigen::VectorXd S;
  Eigen::MatrixXd T;
  ThetaBox theta_box;
  std::vector<std::string> variable_names;
  std::vector<std::string> constraint_names;
  std::vector<int> mirror_row;
  // Variables reported by the dispatch metrics (generators and monitored
  // line flows for grid models).
  std::vector<int> tracked_variables;
  // Set when some parameter has a zero-width range.
  bool single_point_theta = false;

  int num_variables() const { return static_cast<int>(c.size()); }
  int num_constraints() const { return static_cast<int>(S.size()); }
  int num_parameters() const { return static_cast<int>(T.cols()); }

  Eigen::VectorXd Rhs(const Eigen::VectorXd& theta) const { return S + T * theta; }
};

absl::Status ValidateLp(const ParametricLp& lp);

// SHA-256 over the numeric content of the LP, used to tie atlases and
// models to the LP they were built from.
std::string HashLp(const ParametricLp& lp);

// Appends `coeffs x == rhs + t_row theta` as a mirrored pair of rows.
void AddEqualityRows(ParametricLp& lp, const Eigen::RowVectorXd& coeffs,
                     double rhs, const Eigen::RowVectorXd& t_row,
                     const std::string& name);

// Appends `coeffs x <= rhs + t_row theta`.
void AddInequalityRow(ParametricLp& lp, const Eigen::RowVectorXd& coeffs,
                      double rhs, const Eigen::RowVectorXd& t_row,
                      const std::string& name);

// Builds the LinDistFlow OPF. Decision vector: generator outputs, elastic
// demands, then branch active-power flows (MW). Parameters are renewable
// deviations in kW. Reactive flows follow from the fixed reactive demands,
// so squared-voltage limits become rows on the active-power block.
absl::StatusOr<ParametricLp> Linearize(const GridCase& grid);

absl::StatusOr<Eigen::VectorXd> NormalizeTheta(const Eigen::VectorXd& theta,
                                               const ThetaBox& box);
Eigen::VectorXd DenormalizeTheta(const Eigen::VectorXd& theta_normalized,
                                 const ThetaBox& box);

// Re-expresses the LP over normalized parameters in [-1, 1]^m. Rejects
// zero-width parameter ranges.
absl::StatusOr<ParametricLp> NormalizeParameters(const ParametricLp& lp);

}  // namespace qpopf

#endif  // QPOPF_GRID_MODEL_H_
