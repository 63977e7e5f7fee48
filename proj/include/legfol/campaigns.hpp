#pragma once

#include "legfol/foliation.hpp"

#include <random>

namespace legfol {

/// Uniform sample of the polar region |zeta| <= |z| <= 1, |t| <= 1/2 with |z| >= z_min.
Point5 sample_polar_region(std::mt19937_64& rng, const ComplexCoords& cc, double z_min = 0.05);
/// Uniform sample of |zeta| <= 1, |z| <= 1, |t| <= 1/2.
Point5 sample_parallel_region(std::mt19937_64& rng, const ComplexCoords& cc);

struct CoverageEntry {
  Point5 q;
  bool ok = false;
  LookupResult lookup;
  double rebuild_error = 0.0;
  std::string error;
  nlohmann::json to_json() const;
};

struct CoverageReport {
  LeafKind kind = LeafKind::Polar;
  int successes = 0;
  int failures = 0;
  double max_rebuild_error = 0.0;
  int max_iterations = 0;
  double tolerance = 1e-6;
  std::vector<CoverageEntry> entries;
  nlohmann::json to_json() const;
};

/// Leaf lookup for each point followed by an independent rebuild of the disk
/// (no warm start) that must contain the point within tol.
CoverageReport coverage_campaign(LeafKind kind, const std::vector<Point5>& points, const ACSField& field,
                                 const FoliationConfig& cfg, const PlaneChart& parallel_X = PlaneChart{},
                                 double tol = 1e-6);

struct PositivityReport {
  int pairs = 0;
  int found = 0;         // pairs whose intersection at the seeded point was recovered
  int transversal = 0;
  int positive = 0;
  int negative = 0;
  int total_records = 0;
  double min_rcond = 1.0;
  nlohmann::json records;
  nlohmann::json to_json() const;
};

/// Random polar leaves and transversal J-holomorphic patches through a
/// random point of each leaf; every intersection sign is recorded.
PositivityReport positivity_campaign(const ACSField& field, const FoliationConfig& cfg, int n_pairs,
                                     unsigned seed, int pairs_per_leaf = 10);

struct DisjointnessReport {
  int trials = 0;
  int disjoint = 0;
  double min_ratio = 0.0;  // smallest gap / (separation * expected scale)
  nlohmann::json entries;
  nlohmann::json to_json() const;
};

/// Gaps between a leaf point and the leaves at parameter separations
/// 1e-3, 1e-2 and 1e-1 (polar: X, parallel: P). A trial counts as disjoint
/// when the gap exceeds a tenth of the first-order prediction.
DisjointnessReport disjointness_campaign(LeafKind kind, const ACSField& field, const FoliationConfig& cfg,
                                         int n_points, unsigned seed);

}  // namespace legfol
