#include "legfol/campaigns.hpp"

#include "legfol/parallel.hpp"

#include <cmath>
#include <numbers>

namespace legfol {

namespace {

nlohmann::json point_json(const Point5& p) { return {p.x1, p.y1, p.x2, p.y2, p.t}; }
nlohmann::json cplx_json(cplx c) { return {c.real(), c.imag()}; }

cplx unit_disk(std::mt19937_64& rng, double radius = 1.0) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (;;) {
    const cplx c(U(rng), U(rng));
    if (std::abs(c) <= 1.0) return radius * c;
  }
}

double uniform(std::mt19937_64& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

cplx phase(std::mt19937_64& rng) { return std::polar(1.0, uniform(rng, 0.0, 2.0 * std::numbers::pi)); }

}  // namespace

Point5 sample_polar_region(std::mt19937_64& rng, const ComplexCoords& cc, double z_min) {
  cplx z;
  do z = unit_disk(rng);
  while (std::abs(z) < z_min);
  const cplx zeta = z * unit_disk(rng);
  return Point5::from(cc.point(zeta, z), uniform(rng, -0.5, 0.5));
}

Point5 sample_parallel_region(std::mt19937_64& rng, const ComplexCoords& cc) {
  const cplx z = unit_disk(rng);
  const cplx zeta = unit_disk(rng);
  return Point5::from(cc.point(zeta, z), uniform(rng, -0.5, 0.5));
}

nlohmann::json CoverageEntry::to_json() const {
  nlohmann::json j{{"q", point_json(q)}, {"ok", ok}, {"rebuild_error", rebuild_error}};
  if (!error.empty()) j["error"] = error;
  else j["lookup"] = lookup.to_json();
  return j;
}

nlohmann::json CoverageReport::to_json() const {
  nlohmann::json e = nlohmann::json::array();
  for (const auto& x : entries) e.push_back(x.to_json());
  return {{"kind", kind == LeafKind::Polar ? "polar" : "parallel"},
          {"points", entries.size()},
          {"successes", successes},
          {"failures", failures},
          {"max_rebuild_error", max_rebuild_error},
          {"max_iterations", max_iterations},
          {"tolerance", tolerance},
          {"entries", e}};
}

CoverageReport coverage_campaign(LeafKind kind, const std::vector<Point5>& points, const ACSField& field,
                                 const FoliationConfig& cfg, const PlaneChart& parallel_X, double tol) {
  CoverageReport rep;
  rep.kind = kind;
  rep.tolerance = tol;
  rep.entries.resize(points.size());
  const ComplexCoords cc(field);
  parallel_for(static_cast<int>(points.size()), [&](int i) {
    CoverageEntry& e = rep.entries[static_cast<std::size_t>(i)];
    e.q = points[static_cast<std::size_t>(i)];
    try {
      LeafDisk d;
      if (kind == LeafKind::Polar) {
        e.lookup = leaf_through_polar(e.q, field, cfg);
        d = polar_disk(e.lookup.X, e.lookup.tau, field, cfg);
      } else {
        e.lookup = leaf_through_parallel(e.q, parallel_X, field, cfg);
        d = parallel_disk(e.lookup.P, parallel_X, e.lookup.tau, field, cfg);
      }
      const auto [zeta, z] = cc.of(e.q);
      const auto ov = disk_over(d.patch, cc, z);
      if (!ov) throw ConvergenceError("rebuilt disk does not reach z_q");
      e.rebuild_error = std::max(std::abs(ov->first - zeta), std::abs(ov->second - e.q.t));
      e.ok = e.rebuild_error <= tol;
    } catch (const Error& ex) {
      e.error = ex.what();
    }
  });
  for (const auto& e : rep.entries) {
    (e.ok ? rep.successes : rep.failures)++;
    rep.max_rebuild_error = std::max(rep.max_rebuild_error, e.rebuild_error);
    rep.max_iterations = std::max(rep.max_iterations, e.lookup.iterations);
  }
  return rep;
}

nlohmann::json PositivityReport::to_json() const {
  return {{"pairs", pairs},       {"found", found},       {"transversal", transversal},
          {"positive", positive}, {"negative", negative}, {"total_records", total_records},
          {"min_rcond", min_rcond}, {"records", records}};
}

PositivityReport positivity_campaign(const ACSField& field, const FoliationConfig& cfg, int n_pairs, unsigned seed,
                                     int pairs_per_leaf) {
  PositivityReport rep;
  rep.records = nlohmann::json::array();
  std::mt19937_64 rng(seed);
  const int n_leaves = (n_pairs + pairs_per_leaf - 1) / pairs_per_leaf;
  int done = 0;
  for (int l = 0; l < n_leaves; ++l) {
    const PlaneChart X(unit_disk(rng, 0.5));
    const Leaf leaf = build_polar_leaf(X, field, cfg);
    const int m = std::min(pairs_per_leaf, n_pairs - done);
    struct Draw {
      double tau;
      cplx s;
      double y_radius;
      cplx y_phase;
    };
    std::vector<Draw> draws;
    for (int k = 0; k < m; ++k)
      draws.push_back({uniform(rng, -0.5, 0.5), unit_disk(rng, 0.7), uniform(rng, 0.3, 0.6), phase(rng)});
    std::vector<nlohmann::json> out(static_cast<std::size_t>(m));
    std::vector<std::vector<IntersectionRecord>> recs(static_cast<std::size_t>(m));
    std::vector<Point5> qs(static_cast<std::size_t>(m));
    parallel_for(m, [&](int k) {
      const Draw& d = draws[static_cast<std::size_t>(k)];
      nlohmann::json& j = out[static_cast<std::size_t>(k)];
      j["leaf_X"] = cplx_json(X.w);
      try {
        const auto s = leaf.sample(d.tau, d.s.real(), d.s.imag());
        if (!s) throw DomainError("sample outside the leaf");
        const Point5 q = s->p;
        qs[static_cast<std::size_t>(k)] = q;
        const PlaneChart T =
            PlaneChart::from_vectors(s->d_s1.head<4>(), s->d_s2.head<4>(), ComplexFrame(acs::j_matrix(field, q)));
        // Transversal tangent at distance y_radius from the leaf's own tangent.
        const PlaneChart Y(T.w + d.y_radius * d.y_phase);
        j["q"] = point_json(q);
        j["Y"] = cplx_json(Y.w);
        const PsiInverse inv = psi_invert(q, Y, field, cfg.solver, cfg.params, std::nullopt, cfg.psi_tol);
        recs[static_cast<std::size_t>(k)] = intersect(leaf, inv.solution.patch);
      } catch (const Error& ex) {
        j["error"] = ex.what();
      }
    });
    for (int k = 0; k < m; ++k) {
      auto& j = out[static_cast<std::size_t>(k)];
      const auto& rs = recs[static_cast<std::size_t>(k)];
      j["intersections"] = nlohmann::json::array();
      bool found = false;
      for (const auto& r : rs) {
        j["intersections"].push_back(r.to_json());
        ++rep.total_records;
        rep.transversal += r.transversal ? 1 : 0;
        rep.positive += r.sign > 0 ? 1 : 0;
        rep.negative += r.sign < 0 ? 1 : 0;
        rep.min_rcond = std::min(rep.min_rcond, r.rcond);
        found = found || (r.point.vec() - qs[static_cast<std::size_t>(k)].vec()).norm() < 1e-6;
      }
      j["found"] = found;
      rep.found += found ? 1 : 0;
      rep.records.push_back(std::move(j));
    }
    done += m;
  }
  rep.pairs = done;
  return rep;
}

nlohmann::json DisjointnessReport::to_json() const {
  return {{"trials", trials}, {"disjoint", disjoint}, {"min_ratio", min_ratio}, {"entries", entries}};
}

DisjointnessReport disjointness_campaign(LeafKind kind, const ACSField& field, const FoliationConfig& cfg,
                                         int n_points, unsigned seed) {
  DisjointnessReport rep;
  rep.entries = nlohmann::json::array();
  rep.min_ratio = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  const ComplexCoords cc(field);
  const std::array<double, 3> seps{1e-3, 1e-2, 1e-1};
  struct Draw {
    cplx X, P, s;
    double tau;
    std::array<cplx, 3> dirs;
  };
  std::vector<Draw> draws;
  for (int k = 0; k < n_points; ++k) {
    Draw d{unit_disk(rng, 0.5), unit_disk(rng, 0.5), unit_disk(rng, 0.7), uniform(rng, -0.4, 0.4), {}};
    for (auto& c : d.dirs) c = phase(rng);
    draws.push_back(d);
  }
  std::vector<nlohmann::json> out(static_cast<std::size_t>(n_points));
  parallel_for(n_points, [&](int k) {
    const Draw& d = draws[static_cast<std::size_t>(k)];
    nlohmann::json& j = out[static_cast<std::size_t>(k)];
    j["trials"] = nlohmann::json::array();
    try {
      const PlaneChart X(d.X);
      const LeafDisk disk = kind == LeafKind::Polar ? polar_disk(X, d.tau, field, cfg)
                                                    : parallel_disk(d.P, X, d.tau, field, cfg);
      const auto s = disk.patch.sample(d.s.real(), d.s.imag());
      if (!s) throw DomainError("sample outside the disk");
      const Point5 q = s->p;
      const auto [zeta, z] = cc.of(q);
      j["q"] = point_json(q);
      for (std::size_t m = 0; m < seps.size(); ++m) {
        const double delta = seps[m];
        double gap = 0.0, expected = 0.0;
        if (kind == LeafKind::Polar) {
          gap = polar_gap(q, PlaneChart(d.X + delta * d.dirs[m]), field, cfg);
          expected = delta * std::abs(z);
        } else {
          gap = parallel_gap(q, d.P + delta * d.dirs[m], X, field, cfg);
          expected = delta;
        }
        // Same leaf, shifted height.
        const LeafDisk up = kind == LeafKind::Polar ? polar_disk(X, d.tau + delta, field, cfg)
                                                    : parallel_disk(d.P, X, d.tau + delta, field, cfg);
        const auto ov = disk_over(up.patch, cc, z);
        const double tgap = ov ? std::abs(ov->second - q.t) : 0.0;
        j["trials"].push_back({{"separation", delta}, {"gap", gap}, {"expected", expected}, {"t_gap", tgap}});
      }
    } catch (const Error& ex) {
      j["error"] = ex.what();
    }
  });
  for (auto& j : out) {
    if (j.contains("error")) {
      rep.trials += 2 * static_cast<int>(seps.size());
      rep.min_ratio = 0.0;
    }
    for (const auto& t : j["trials"]) {
      const double delta = t["separation"];
      const double r1 = t["gap"].get<double>() / t["expected"].get<double>();
      const double r2 = t["t_gap"].get<double>() / delta;
      rep.trials += 2;
      rep.disjoint += (r1 >= 0.1 ? 1 : 0) + (r2 >= 0.1 ? 1 : 0);
      rep.min_ratio = std::min({rep.min_ratio, r1, r2});
    }
    rep.entries.push_back(std::move(j));
  }
  return rep;
}

}  // namespace legfol
