// SPDX-License-Identifier: Apache-2.0
//
// Seeded synthetic scenes for tests, benchmarks and the shipped fixtures: a
// furnished room made of planar patches and spheres, sampled with Gaussian
// noise, and cropped into partially overlapping views with known poses.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cloudreg/geometry.hpp"

namespace cloudreg::synthetic {

/// Axis-aligned rectangle: `origin + s * edge_a + t * edge_b`, s, t in [0, 1].
struct Patch {
  Vec3 origin;
  Vec3 edge_a;
  Vec3 edge_b;
  double area() const { return edge_a.cross(edge_b).norm(); }
};

struct Sphere {
  Vec3 center;
  double radius = 0.0;
  double area() const { return 4.0 * std::numbers::pi * radius * radius; }
};

struct Scene {
  std::vector<Patch> patches;
  std::vector<Sphere> spheres;
  Vec3 lo = Vec3::Zero();  // bounding box
  Vec3 hi = Vec3::Zero();
};

inline void add_box(Scene& s, const Vec3& lo, const Vec3& hi, bool with_bottom = false) {
  const Vec3 d = hi - lo;
  const Vec3 ex(d.x(), 0, 0), ey(0, d.y(), 0), ez(0, 0, d.z());
  s.patches.push_back({Vec3(lo.x(), lo.y(), hi.z()), ex, ey});  // top
  if (with_bottom) s.patches.push_back({lo, ex, ey});
  s.patches.push_back({lo, ex, ez});                            // y = lo
  s.patches.push_back({Vec3(lo.x(), hi.y(), lo.z()), ex, ez});  // y = hi
  s.patches.push_back({lo, ey, ez});                            // x = lo
  s.patches.push_back({Vec3(hi.x(), lo.y(), lo.z()), ey, ez});  // x = hi
}

/// Room of `width` x `depth` x `height` meters centered on the origin,
/// furnished so that no direction or sub-region looks like another.
inline Scene make_room(double width = 3.0, double depth = 2.4, double height = 1.6) {
  Scene s;
  const double w = width / 2, d = depth / 2, h = height / 2;
  s.lo = Vec3(-w, -d, -h);
  s.hi = Vec3(w, d, h);
  s.patches.push_back({Vec3(-w, -d, -h), Vec3(width, 0, 0), Vec3(0, depth, 0)});   // floor
  s.patches.push_back({Vec3(-w, d, -h), Vec3(width, 0, 0), Vec3(0, 0, height)});   // back wall
  s.patches.push_back({Vec3(-w, -d, -h), Vec3(0, depth, 0), Vec3(0, 0, height)});  // left wall
  s.patches.push_back({Vec3(w, -d, -h), Vec3(0, depth, 0), Vec3(0, 0, height * 0.6)});  // low right wall
  // Furniture, scaled with the room.
  add_box(s, Vec3(-0.55 * w, 0.15 * d, -h), Vec3(-0.05 * w, 0.75 * d, -h + 0.45 * height));  // table
  add_box(s, Vec3(0.45 * w, 0.55 * d, -h), Vec3(0.85 * w, 0.95 * d, -h + 0.8 * height));    // cabinet
  add_box(s, Vec3(0.05 * w, -0.85 * d, -h), Vec3(0.55 * w, -0.35 * d, -h + 0.2 * height));  // step
  add_box(s, Vec3(-0.1 * w, -0.1 * d, -h), Vec3(0.1 * w, 0.05 * d, -h + 0.7 * height));      // pillar
  add_box(s, Vec3(-0.9 * w, -0.9 * d, -h), Vec3(-0.7 * w, -0.6 * d, -h + 0.35 * height));   // crate
  add_box(s, Vec3(0.2 * w, 0.1 * d, -h), Vec3(0.3 * w, 0.3 * d, -h + 0.3 * height));        // stool
  s.spheres.push_back({Vec3(-0.5 * w, -0.4 * d, -h + 0.18 * height), 0.15 * height});
  s.spheres.push_back({Vec3(0.35 * w, -0.1 * d, -h + 0.1 * height), 0.1 * height});
  return s;
}

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double gaussian(double sigma) { return sigma > 0 ? std::normal_distribution<double>(0.0, sigma)(rng_) : 0.0; }
  Vec3 unit_vector() {
    Vec3 v;
    do {
      v = Vec3(gaussian(1.0), gaussian(1.0), gaussian(1.0));
    } while (v.norm() < 1e-9);
    return v.normalized();
  }

  /// Uniform-by-area surface samples, jittered by isotropic noise, keeping
  /// only points whose noise-free position passes `keep`.
  PointCloud sample(const Scene& s, std::size_t n, double noise,
                    const std::function<bool(const Vec3&)>& keep = {}) {
    std::vector<double> cumulative;
    double total = 0.0;
    for (const auto& p : s.patches) cumulative.push_back(total += p.area());
    for (const auto& sp : s.spheres) cumulative.push_back(total += sp.area());
    PointCloud out;
    out.reserve(n);
    std::size_t guard = 0;
    while (out.size() < n) {
      if (++guard > 1000 * n + 1000) break;  // `keep` rejects (almost) everything
      const double pick = uniform(0.0, total);
      const auto idx = static_cast<std::size_t>(
          std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
      Vec3 p;
      if (idx < s.patches.size()) {
        const auto& patch = s.patches[idx];
        p = patch.origin + uniform() * patch.edge_a + uniform() * patch.edge_b;
      } else {
        const auto& sp = s.spheres[std::min(idx - s.patches.size(), s.spheres.size() - 1)];
        p = sp.center + sp.radius * unit_vector();
      }
      if (keep && !keep(p)) continue;
      out.push_back(Vec3(p.x() + gaussian(noise), p.y() + gaussian(noise), p.z() + gaussian(noise)));
    }
    return out;
  }

  /// Rotation of up to `max_rotation_deg` about a random axis and a
  /// translation of up to `max_translation` in a random direction.
  RigidTransform random_transform(double max_rotation_deg, double max_translation) {
    const double angle = uniform(0.0, max_rotation_deg) * std::numbers::pi / 180.0;
    const Vec3 axis = unit_vector();
    const Vec3 t = uniform(0.0, max_translation) * unit_vector();
    return RigidTransform::from_axis_angle(axis, angle, t);
  }

 private:
  std::mt19937_64 rng_;
};

struct PairSpec {
  std::size_t points = 1000;
  double max_rotation_deg = 30.0;
  double max_translation = 0.5;
  double min_overlap = 0.6;  // shared fraction of each view's samples
  double noise = 0.005;
  double width = 3.0;
  double depth = 2.4;
  double height = 1.6;
  std::optional<RigidTransform> truth;  // drawn from the seed when unset
};

/// Two overlapping views of the room. `truth` maps the source frame into the
/// target frame (target = world).
struct SyntheticPair {
  PointCloud source;
  PointCloud target;
  RigidTransform truth;
  double overlap = 0.0;  // realized shared fraction, the smaller of the two views
};

namespace detail {

inline PointCloud jitter(Sampler& rng, const std::vector<Vec3>& points, double noise) {
  PointCloud out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(Vec3(p.x() + rng.gaussian(noise), p.y() + rng.gaussian(noise), p.z() + rng.gaussian(noise)));
  return out;
}

}  // namespace detail

/// Both views crop one shared pool of surface samples (the first `points`
/// pool entries inside each view), then get independent noise. Each view
/// keeps a fraction f of the room along x from opposite ends; f grows until
/// both views share at least min_overlap of their points.
inline SyntheticPair make_pair(const PairSpec& spec, std::uint64_t seed) {
  Sampler rng(seed);
  const Scene scene = make_room(spec.width, spec.depth, spec.height);
  const double x0 = scene.lo.x(), x1 = scene.hi.x(), span = x1 - x0;

  SyntheticPair pair;
  pair.truth = rng.random_transform(spec.max_rotation_deg, spec.max_translation);
  if (spec.truth) pair.truth = *spec.truth;
  double f = rng.uniform(1.0 / (2.0 - spec.min_overlap), 0.85);
  const PointCloud pool = rng.sample(scene, 8 * spec.points, 0.0);
  std::vector<Vec3> src_world, tgt_world;
  for (;; f = std::min(1.0, f + 0.02)) {
    const double src_hi = x0 + f * span;
    const double tgt_lo = x1 - f * span;
    src_world.clear();
    tgt_world.clear();
    std::size_t src_shared = 0, tgt_shared = 0;
    for (const auto& p : pool.positions()) {
      if (p.x() <= src_hi && src_world.size() < spec.points) {
        src_world.push_back(p);
        src_shared += p.x() >= tgt_lo ? 1 : 0;
      }
      if (p.x() >= tgt_lo && tgt_world.size() < spec.points) {
        tgt_world.push_back(p);
        tgt_shared += p.x() <= src_hi ? 1 : 0;
      }
    }
    pair.overlap = std::min(static_cast<double>(src_shared) / static_cast<double>(std::max<std::size_t>(1, src_world.size())),
                            static_cast<double>(tgt_shared) / static_cast<double>(std::max<std::size_t>(1, tgt_world.size())));
    if (pair.overlap >= spec.min_overlap || f >= 1.0) break;
  }
  pair.source = apply(inverse(pair.truth), detail::jitter(rng, src_world, spec.noise));
  pair.target = detail::jitter(rng, tgt_world, spec.noise);
  pair.source.set_frame_id("source");
  pair.target.set_frame_id("target");
  return pair;
}

/// Four views covering the room's quadrants (in chain order around the room),
/// each expressed in its own frame. `poses[i]` maps view i into the world.
struct QuadrantSet {
  std::vector<PointCloud> clouds;
  std::vector<RigidTransform> poses;
};

inline QuadrantSet make_quadrants(std::size_t points_per_view, double pairwise_overlap, double noise,
                                  double max_rotation_deg, double max_translation, std::uint64_t seed,
                                  double width = 3.0, double depth = 2.4, double height = 1.6) {
  Sampler rng(seed);
  const Scene scene = make_room(width, depth, height);
  const PointCloud pool = rng.sample(scene, 16 * points_per_view, 0.0);
  // A view spans half the room plus a margin m along each axis; neighbors share
  // a 2m strip, so overlap ~ 2m / (half + m).
  const double mx = pairwise_overlap * (width / 2) / (2.0 - pairwise_overlap);
  const double my = pairwise_overlap * (depth / 2) / (2.0 - pairwise_overlap);
  const int sx[4] = {-1, 1, 1, -1};
  const int sy[4] = {-1, -1, 1, 1};
  QuadrantSet set;
  for (int q = 0; q < 4; ++q) {
    std::vector<Vec3> world;
    for (const auto& p : pool.positions()) {
      if (world.size() == points_per_view) break;
      const bool in_x = sx[q] < 0 ? p.x() <= mx : p.x() >= -mx;
      const bool in_y = sy[q] < 0 ? p.y() <= my : p.y() >= -my;
      if (in_x && in_y) world.push_back(p);
    }
    const RigidTransform pose = q == 0 ? RigidTransform::identity()
                                       : rng.random_transform(max_rotation_deg, max_translation);
    PointCloud local = apply(inverse(pose), detail::jitter(rng, world, noise));
    local.set_frame_id("view" + std::to_string(q));
    set.clouds.push_back(std::move(local));
    set.poses.push_back(pose);
  }
  return set;
}

}  // namespace cloudreg::synthetic
