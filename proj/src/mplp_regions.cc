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

#include "qpopf/mplp_regions.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "absl/strings/str_cat.h"
#include "qpopf/util.h"

namespace qpopf {
namespace {

constexpr double kRowZeroTol = 1e-12;
constexpr double kFacetTol = 1e-9;
constexpr double kMinChebyshevRadius = 1e-9;
constexpr double kMapResidualTol = 1e-9;
constexpr int kAtlasSchemaVersion = 1;

// One representative per mirrored pair.
std::vector<int> CollapseMirrors(const std::vector<int>& rows,
                                 const std::vector<int>& mirror_row) {
  std::vector<int> out;
  for (int i : rows) {
    const int j = mirror_row[i];
    if (j >= 0 && j < i && std::binary_search(rows.begin(), rows.end(), j)) {
      continue;
    }
    out.push_back(i);
  }
  return out;
}

std::vector<int> WithMirrors(std::vector<int> rows,
                             const std::vector<int>& mirror_row) {
  const size_t base = rows.size();
  for (size_t k = 0; k < base; ++k) {
    if (mirror_row[rows[k]] >= 0) rows.push_back(mirror_row[rows[k]]);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

// max a'theta over the rows of `poly` except `skip`, inside a box enlarged by
// one unit on each side so the LP stays bounded.
absl::StatusOr<LpSolution> MaximizeRow(const Eigen::MatrixXd& A,
                                       const Eigen::VectorXd& b,
                                       const std::vector<char>& keep, int skip,
                                       const ThetaBox& box) {
  const int m = static_cast<int>(A.cols());
  std::vector<int> rows;
  for (int i = 0; i < A.rows(); ++i) {
    if (keep[i] && i != skip) rows.push_back(i);
  }
  const int r = static_cast<int>(rows.size());
  Eigen::MatrixXd W(r + 2 * m, m);
  Eigen::VectorXd rhs(r + 2 * m);
  for (int k = 0; k < r; ++k) {
    W.row(k) = A.row(rows[k]);
    rhs(k) = b(rows[k]);
  }
  W.bottomRows(2 * m).setZero();
  for (int d = 0; d < m; ++d) {
    W(r + 2 * d, d) = 1.0;
    rhs(r + 2 * d) = box.upper(d) + 1.0;
    W(r + 2 * d + 1, d) = -1.0;
    rhs(r + 2 * d + 1) = -(box.lower(d) - 1.0);
  }
  const std::vector<int> mirror(r + 2 * m, -1);
  return SolveDenseLp(W, rhs, -A.row(skip).transpose(), mirror);
}

}  // namespace

bool Polyhedron::Contains(const Eigen::VectorXd& theta, double tol) const {
  if (theta.size() != A.cols()) return false;
  return ((A * theta - b).array() <= tol).all();
}

const CriticalRegion* RegionAtlas::Find(int id) const {
  if (id < 1 || id > num_regions()) return nullptr;
  return &regions[id - 1];
}

absl::StatusOr<AffineMap> ComputeAffineMap(const ParametricLp& lp,
                                           const std::vector<int>& active_set) {
  const int n = lp.num_variables();
  std::vector<int> sorted = active_set;
  std::sort(sorted.begin(), sorted.end());
  for (int i : sorted) {
    if (i < 0 || i >= lp.num_constraints()) {
      return absl::InvalidArgumentError(absl::StrCat("row ", i, " out of range"));
    }
  }
  const std::vector<int> rows = CollapseMirrors(sorted, lp.mirror_row);
  if (static_cast<int>(rows.size()) != n) {
    return absl::FailedPreconditionError(absl::StrCat(
        "degenerate active set: ", rows.size(), " independent rows, need ", n));
  }
  Eigen::MatrixXd WA(n, n), TA(n, lp.num_parameters());
  Eigen::VectorXd SA(n);
  for (int k = 0; k < n; ++k) {
    WA.row(k) = lp.W.row(rows[k]);
    TA.row(k) = lp.T.row(rows[k]);
    SA(k) = lp.S(rows[k]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(WA);
  if (!lu.isInvertible()) {
    return absl::FailedPreconditionError("degenerate active set: singular W_A");
  }
  AffineMap map{lu.solve(TA), lu.solve(SA)};
  const double residual = (WA * map.F - TA).cwiseAbs().maxCoeff();
  if (residual > kMapResidualTol) {
    return absl::FailedPreconditionError(
        absl::StrCat("ill-conditioned W_A, residual ", residual));
  }
  return map;
}

absl::StatusOr<Ball> ChebyshevBall(const Polyhedron& poly) {
  const int m = static_cast<int>(poly.A.cols());
  const int r = poly.num_rows();
  // Variables (theta, radius); rows a_i theta + |a_i| radius <= b_i.
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(r + 2, m + 1);
  Eigen::VectorXd rhs(r + 2);
  for (int i = 0; i < r; ++i) {
    W.row(i).head(m) = poly.A.row(i);
    W(i, m) = poly.A.row(i).norm();
    rhs(i) = poly.b(i);
  }
  W(r, m) = 1.0;
  rhs(r) = 1e3;
  W(r + 1, m) = -1.0;
  rhs(r + 1) = 1e3;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m + 1);
  c(m) = -1.0;
  QPOPF_ASSIGN_OR_RETURN(LpSolution sol,
                         SolveDenseLp(W, rhs, c, std::vector<int>(r + 2, -1)));
  if (sol.status != LpStatus::kOptimal) {
    return absl::InternalError("Chebyshev LP not optimal");
  }
  return Ball{sol.x.head(m), sol.x(m)};
}

absl::StatusOr<Polyhedron> RegionPolyhedron(const ParametricLp& lp,
                                            const std::vector<int>& active_set,
                                            const AffineMap& map) {
  const int m = lp.num_parameters();
  const ThetaBox& box = lp.theta_box;
  std::vector<char> active(lp.num_constraints(), 0);
  for (int i : active_set) active[i] = 1;

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  auto add_row = [&](const Eigen::RowVectorXd& a, double beta) -> absl::Status {
    const double norm = a.norm();
    if (norm <= kRowZeroTol) {
      if (beta < -kFacetTol) {
        return absl::FailedPreconditionError(
            "empty region: a parameter-independent row is violated");
      }
      return absl::OkStatus();
    }
    const Eigen::RowVectorXd u = a / norm;
    const double v = beta / norm;
    // Rows satisfied on the whole box add nothing.
    const double box_max =
        u.dot(box.Center()) + u.cwiseAbs().dot(box.HalfWidth());
    if (box_max <= v + kFacetTol && box.dim() > 0) {
      return absl::OkStatus();
    }
    for (size_t k = 0; k < rows.size(); ++k) {
      if ((rows[k] - u).cwiseAbs().maxCoeff() <= kFacetTol) {
        rhs[k] = std::min(rhs[k], v);
        return absl::OkStatus();
      }
    }
    rows.push_back(u);
    rhs.push_back(v);
    return absl::OkStatus();
  };

  for (int i = 0; i < lp.num_constraints(); ++i) {
    if (active[i]) continue;
    const Eigen::RowVectorXd wi = lp.W.row(i);
    QPOPF_RETURN_IF_ERROR(add_row(wi * map.F - lp.T.row(i),
                                  lp.S(i) - wi.dot(map.f)));
  }
  // Box faces are always kept as candidates.
  for (int d = 0; d < m; ++d) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(m);
    e(d) = 1.0;
    rows.push_back(e);
    rhs.push_back(box.upper(d));
    rows.push_back(-e);
    rhs.push_back(-box.lower(d));
  }

  Polyhedron all;
  all.A.resize(static_cast<Eigen::Index>(rows.size()), m);
  all.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t k = 0; k < rows.size(); ++k) {
    all.A.row(k) = rows[k];
    all.b(k) = rhs[k];
  }
  QPOPF_ASSIGN_OR_RETURN(Ball ball, ChebyshevBall(all));
  if (ball.radius <= kMinChebyshevRadius) {
    return absl::FailedPreconditionError(absl::StrCat(
        "region is empty or not full-dimensional (radius ", ball.radius, ")"));
  }

  std::vector<char> keep(rows.size(), 1);
  for (int i = 0; i < all.num_rows(); ++i) {
    QPOPF_ASSIGN_OR_RETURN(LpSolution sol,
                           MaximizeRow(all.A, all.b, keep, i, box));
    if (sol.status == LpStatus::kOptimal &&
        -sol.objective <= all.b(i) + kFacetTol) {
      keep[i] = 0;
    }
  }
  Polyhedron poly;
  const int kept = static_cast<int>(std::count(keep.begin(), keep.end(), 1));
  poly.A.resize(kept, m);
  poly.b.resize(kept);
  for (int i = 0, k = 0; i < all.num_rows(); ++i) {
    if (!keep[i]) continue;
    poly.A.row(k) = all.A.row(i);
    poly.b(k) = all.b(i);
    ++k;
  }
  return poly;
}

absl::StatusOr<RegionAtlas> EnumerateRegions(
    const ParametricLp& lp, const EnumerationOptions& options) {
  QPOPF_RETURN_IF_ERROR(ValidateLp(lp));
  if (options.sampling_budget < 1) {
    return absl::InvalidArgumentError("sampling budget must be positive");
  }
  const int m = lp.num_parameters();
  const ThetaBox& box = lp.theta_box;
  Rng shift_rng = StreamRng(options.seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd shift(m);
  for (int d = 0; d < m; ++d) shift(d) = unit(shift_rng);

  // Perturbed right-hand side for degenerate samples.
  ParametricLp perturbed = lp;
  for (int i = 0; i < lp.num_constraints(); ++i) perturbed.S(i) += 1e-9 * (i + 1);

  struct Sample {
    absl::Status status;
    bool usable = false;
    bool degenerate = false;
    std::vector<int> key;
  };
  std::vector<Sample> samples(options.sampling_budget);
  ParallelFor(options.sampling_budget, options.threads, [&](int s) {
    Sample& out = samples[s];
    const Eigen::VectorXd u = HaltonPoint(s, shift);
    const Eigen::VectorXd theta =
        box.lower.array() + u.array() * (box.upper - box.lower).array();
    auto sol = SolveLp(lp, theta, options.lp);
    if (!sol.ok()) {
      out.status = sol.status();
      return;
    }
    if (sol->status != LpStatus::kOptimal) return;
    if (!sol->degenerate) {
      out.usable = true;
      out.key = sol->active_set;
      return;
    }
    auto alt = SolveLp(perturbed, theta, options.lp);
    if (!alt.ok()) {
      out.status = alt.status();
      return;
    }
    if (alt->status != LpStatus::kOptimal) return;
    out.usable = true;
    out.degenerate = true;
    out.key = WithMirrors(alt->basis, lp.mirror_row);
  });

  RegionAtlas atlas;
  atlas.theta_box = box;
  atlas.sampling_budget = options.sampling_budget;
  atlas.validation_samples = options.validation_samples;
  atlas.seed = options.seed;
  atlas.lp_hash = HashLp(lp);
  std::map<std::vector<int>, bool> seen;
  for (const Sample& s : samples) {
    if (!s.status.ok()) return s.status;
    if (!s.usable || seen.count(s.key)) continue;
    seen[s.key] = true;
    auto map = ComputeAffineMap(lp, s.key);
    if (!map.ok()) continue;
    auto poly = RegionPolyhedron(lp, s.key, *map);
    if (!poly.ok()) continue;
    QPOPF_ASSIGN_OR_RETURN(Ball ball, ChebyshevBall(*poly));
    CriticalRegion region;
    region.id = atlas.num_regions() + 1;
    region.active_set = s.key;
    region.map = *std::move(map);
    region.polyhedron = *std::move(poly);
    region.chebyshev_center = ball.center;
    region.chebyshev_radius = ball.radius;
    region.degenerate = s.degenerate;
    atlas.regions.push_back(std::move(region));
  }
  if (atlas.regions.empty()) {
    return absl::FailedPreconditionError(
        "no critical region found; the LP may be infeasible on the box");
  }

  Rng val_rng = StreamRng(options.seed, 1);
  int matched = 0;
  for (int s = 0; s < options.validation_samples; ++s) {
    Eigen::VectorXd theta(m);
    for (int d = 0; d < m; ++d) {
      theta(d) = box.lower(d) + unit(val_rng) * (box.upper(d) - box.lower(d));
    }
    if (LocateRegion(atlas, theta).ok()) ++matched;
  }
  atlas.coverage = options.validation_samples > 0
                       ? static_cast<double>(matched) / options.validation_samples
                       : 0.0;
  return atlas;
}

absl::StatusOr<int> LocateRegion(const RegionAtlas& atlas,
                                 const Eigen::VectorXd& theta, double tol) {
  for (const CriticalRegion& region : atlas.regions) {
    if (region.polyhedron.Contains(theta, tol)) return region.id;
  }
  return absl::NotFoundError("parameter lies outside every known region");
}

absl::StatusOr<Eigen::VectorXd> ReconstructSolution(
    const RegionAtlas& atlas, int id, const Eigen::VectorXd& theta) {
  const CriticalRegion* region = atlas.Find(id);
  if (region == nullptr) {
    return absl::NotFoundError(absl::StrCat("unknown region id ", id));
  }
  if (theta.size() != region->map.F.cols()) {
    return absl::InvalidArgumentError("theta dimension mismatch");
  }
  return Eigen::VectorXd(region->map.F * theta + region->map.f);
}

absl::StatusOr<DispatchResult> DispatchRegion(const RegionAtlas& atlas,
                                              const ParametricLp& lp, int id,
                                              const Eigen::VectorXd& theta,
                                              double violation_tol,
                                              const LpOptions& options) {
  DispatchResult out;
  QPOPF_ASSIGN_OR_RETURN(out.reconstructed,
                         ReconstructSolution(atlas, id, theta));
  out.max_violation = MaxViolation(lp, out.reconstructed, theta);
  out.infeasible = out.max_violation > violation_tol;
  if (out.infeasible) {
    QPOPF_ASSIGN_OR_RETURN(out.x,
                           ProjectFeasible(out.reconstructed, lp, theta, options));
  } else {
    out.x = out.reconstructed;
  }
  return out;
}

nlohmann::json AtlasToJson(const RegionAtlas& atlas) {
  nlohmann::json j;
  j["schema_version"] = kAtlasSchemaVersion;
  j["lp_hash"] = atlas.lp_hash;
  j["theta_box"] = {{"lower", ToJson(atlas.theta_box.lower)},
                    {"upper", ToJson(atlas.theta_box.upper)}};
  j["coverage"] = atlas.coverage;
  j["sampling_budget"] = atlas.sampling_budget;
  j["validation_samples"] = atlas.validation_samples;
  j["seed"] = atlas.seed;
  nlohmann::json regions = nlohmann::json::array();
  for (const CriticalRegion& r : atlas.regions) {
    regions.push_back({{"id", r.id},
                       {"active_set", r.active_set},
                       {"F", ToJson(r.map.F)},
                       {"f", ToJson(r.map.f)},
                       {"polyhedron",
                        {{"A", ToJson(r.polyhedron.A)},
                         {"b", ToJson(r.polyhedron.b)}}},
                       {"chebyshev_center", ToJson(r.chebyshev_center)},
                       {"chebyshev_radius", r.chebyshev_radius},
                       {"degenerate", r.degenerate}});
  }
  j["regions"] = std::move(regions);
  return j;
}

absl::StatusOr<RegionAtlas> AtlasFromJson(const nlohmann::json& j,
                                          const ParametricLp& lp) {
  try {
    if (j.at("schema_version").get<int>() != kAtlasSchemaVersion) {
      return absl::InvalidArgumentError("unsupported atlas schema_version");
    }
    RegionAtlas atlas;
    atlas.lp_hash = j.at("lp_hash").get<std::string>();
    if (atlas.lp_hash != HashLp(lp)) {
      return absl::FailedPreconditionError(
          "atlas was built for a different LP (hash mismatch)");
    }
    QPOPF_ASSIGN_OR_RETURN(atlas.theta_box.lower,
                           VectorFromJson(j.at("theta_box").at("lower")));
    QPOPF_ASSIGN_OR_RETURN(atlas.theta_box.upper,
                           VectorFromJson(j.at("theta_box").at("upper")));
    atlas.coverage = j.at("coverage").get<double>();
    atlas.sampling_budget = j.at("sampling_budget").get<int>();
    atlas.validation_samples = j.at("validation_samples").get<int>();
    atlas.seed = j.at("seed").get<uint64_t>();
    for (const auto& jr : j.at("regions")) {
      CriticalRegion r;
      r.id = jr.at("id").get<int>();
      if (r.id != atlas.num_regions() + 1) {
        return absl::InvalidArgumentError("atlas region ids must be 1..K");
      }
      r.active_set = jr.at("active_set").get<std::vector<int>>();
      QPOPF_ASSIGN_OR_RETURN(r.map.F, MatrixFromJson(jr.at("F")));
      QPOPF_ASSIGN_OR_RETURN(r.map.f, VectorFromJson(jr.at("f")));
      QPOPF_ASSIGN_OR_RETURN(r.polyhedron.A,
                             MatrixFromJson(jr.at("polyhedron").at("A")));
      QPOPF_ASSIGN_OR_RETURN(r.polyhedron.b,
                             VectorFromJson(jr.at("polyhedron").at("b")));
      QPOPF_ASSIGN_OR_RETURN(r.chebyshev_center,
                             VectorFromJson(jr.at("chebyshev_center")));
      r.chebyshev_radius = jr.at("chebyshev_radius").get<double>();
      r.degenerate = jr.at("degenerate").get<bool>();
      atlas.regions.push_back(std::move(r));
    }
    return atlas;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed atlas: ", e.what()));
  }
}

}  // namespace qpopf
