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

// Critical-region atlas for parametric LPs: affine optimizer maps, region
// polyhedra, sampling-based enumeration and point location.

#ifndef QPOPF_MPLP_REGIONS_H_
#define QPOPF_MPLP_REGIONS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include <Eigen/Dense>
#include "json.hpp"
#include "qpopf/grid_model.h"
#include "qpopf/lp_engine.h"

namespace qpopf {

// x*(theta) = F theta + f.
struct AffineMap {
  Eigen::MatrixXd F;
  Eigen::VectorXd f;
};

// {theta : A theta <= b}, rows scaled to unit Euclidean norm.
struct Polyhedron {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  bool Contains(const Eigen::VectorXd& theta, double tol = 1e-9) const;
  int num_rows() const { return static_cast<int>(b.size()); }
};

struct CriticalRegion {
  int id = 0;  // 1-based
  std::vector<int> active_set;
  AffineMap map;
  Polyhedron polyhedron;
  Eigen::VectorXd chebyshev_center;
  double chebyshev_radius = 0.0;
  // Built from a perturbed right-hand side because the sample that found it
  // had more than n active rows.
  bool degenerate = false;
};

struct RegionAtlas {
  std::vector<CriticalRegion> regions;
  ThetaBox theta_box;
  double coverage = 0.0;
  int sampling_budget = 0;
  int validation_samples = 0;
  uint64_t seed = 0;
  std::string lp_hash;

  int num_regions() const { return static_cast<int>(regions.size()); }
  const CriticalRegion* Find(int id) const;
};

// Solves W_A x = S_A + T_A theta for the active rows, using one row from each
// mirrored equality pair. Needs exactly n independent rows; anything else is
// a FailedPrecondition (degenerate).
absl::StatusOr<AffineMap> ComputeAffineMap(const ParametricLp& lp,
                                           const std::vector<int>& active_set);

// Inactive-row conditions on theta, intersected with the parameter box, with
// duplicate and redundant rows removed. Empty or flat regions are errors.
absl::StatusOr<Polyhedron> RegionPolyhedron(const ParametricLp& lp,
                                            const std::vector<int>& active_set,
                                            const AffineMap& map);

struct Ball {
  Eigen::VectorXd center;
  double radius = 0.0;
};

// Largest inscribed ball (radius capped at 1e3).
absl::StatusOr<Ball> ChebyshevBall(const Polyhedron& poly);

struct EnumerationOptions {
  int sampling_budget = 3000;
  uint64_t seed = 0;
  int validation_samples = 4000;
  int threads = 1;
  LpOptions lp;
};

// Samples theta on a shifted Halton sequence, solves the LP at each sample
// and keeps one region per distinct active set, numbered in discovery order.
// Coverage is the fraction of independent uniform samples that fall in some
// region.
absl::StatusOr<RegionAtlas> EnumerateRegions(const ParametricLp& lp,
                                             const EnumerationOptions& options);

// Smallest id whose polyhedron contains theta; NotFound if none does.
absl::StatusOr<int> LocateRegion(const RegionAtlas& atlas,
                                 const Eigen::VectorXd& theta,
                                 double tol = 1e-9);

absl::StatusOr<Eigen::VectorXd> ReconstructSolution(
    const RegionAtlas& atlas, int id, const Eigen::VectorXd& theta);

inline constexpr double kDispatchViolationTol = 1e-4;

struct DispatchResult {
  Eigen::VectorXd reconstructed;
  Eigen::VectorXd x;  // reconstructed, or its projection when infeasible
  double max_violation = 0.0;
  bool infeasible = false;
};

// Reconstructs region `id`'s map at theta; if some row is violated by more
// than `violation_tol`, projects onto the feasible set.
absl::StatusOr<DispatchResult> DispatchRegion(
    const RegionAtlas& atlas, const ParametricLp& lp, int id,
    const Eigen::VectorXd& theta, double violation_tol = kDispatchViolationTol,
    const LpOptions& options = {});

nlohmann::json AtlasToJson(const RegionAtlas& atlas);
// Rejects atlases whose stored hash does not match `lp`.
absl::StatusOr<RegionAtlas> AtlasFromJson(const nlohmann::json& j,
                                          const ParametricLp& lp);

}  // namespace qpopf

#endif  // QPOPF_MPLP_REGIONS_H_
