#include "kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "rng.hpp"

namespace rp {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::vector<std::vector<double>> seed_plusplus(const std::vector<std::vector<double>>& pts, int k,
                                               Rng& rng) {
  const size_t n = pts.size();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(pts[rng.below(n)]);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<double> cumulative(n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], sq_dist(pts[i], centroids.back()));
      total += dist[i];
      cumulative[i] = total;
    }
    size_t pick = total > 0.0 ? rng.weighted(cumulative) : rng.below(n);
    centroids.push_back(pts[pick]);
  }
  return centroids;
}

struct Attempt {
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignments;
  double inertia = 0.0;
  std::vector<double> trace;
};

Attempt lloyd(const std::vector<std::vector<double>>& pts, int k, int max_iters, Rng rng) {
  const size_t n = pts.size();
  const size_t d = pts[0].size();
  Attempt a;
  a.centroids = seed_plusplus(pts, k, rng);
  a.assignments.assign(n, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    a.inertia = 0.0;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(pts[i], a.centroids[0]);
      for (int c = 1; c < k; ++c) {
        double dd = sq_dist(pts[i], a.centroids[c]);
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      if (a.assignments[i] != best) {
        a.assignments[i] = best;
        changed = true;
      }
      a.inertia += best_d;
    }
    a.trace.push_back(a.inertia);
    if (!changed && iter > 0)
      break;

    // mean as reference + mean of deltas: clusters of identical points get
    // exactly that point back, so already-quantized inputs are fixed points
    std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
    std::vector<const std::vector<double>*> refs(k, nullptr);
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      int c = a.assignments[i];
      if (!refs[c])
        refs[c] = &pts[i];
      for (size_t j = 0; j < d; ++j)
        sums[c][j] += pts[i][j] - (*refs[c])[j];
      ++counts[a.assignments[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // re-seed on the point farthest from its current centroid
        size_t far_i = 0;
        double far_d = -1.0;
        for (size_t i = 0; i < n; ++i) {
          double dd = sq_dist(pts[i], a.centroids[a.assignments[i]]);
          if (dd > far_d) {
            far_d = dd;
            far_i = i;
          }
        }
        a.centroids[c] = pts[far_i];
        a.assignments[far_i] = c;
        changed = true;
      } else {
        for (size_t j = 0; j < d; ++j)
          a.centroids[c][j] = (*refs[c])[j] + sums[c][j] / static_cast<double>(counts[c]);
      }
    }
  }
  // final inertia under the final centroids
  a.inertia = 0.0;
  for (size_t i = 0; i < n; ++i) {
    int best = 0;
    double best_d = sq_dist(pts[i], a.centroids[0]);
    for (int c = 1; c < k; ++c) {
      double dd = sq_dist(pts[i], a.centroids[c]);
      if (dd < best_d) {
        best_d = dd;
        best = c;
      }
    }
    a.assignments[i] = best;
    a.inertia += best_d;
  }
  return a;
}

} // namespace

KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k, int max_iters,
                    int restarts, uint64_t seed) {
  if (k <= 0)
    fail(Errc::invalid_argument, "k must be positive");
  if (max_iters < 1 || restarts < 1)
    fail(Errc::invalid_argument, "max_iters and restarts must be positive");
  if (points.empty())
    fail(Errc::invalid_argument, "no points to cluster");
  if (static_cast<size_t>(k) > points.size())
    fail(Errc::infeasible, "k=" + std::to_string(k) + " exceeds point count " +
                               std::to_string(points.size()));
  const size_t d = points[0].size();
  for (const auto& p : points)
    if (p.size() != d)
      fail(Errc::shape_mismatch, "points have mixed dimensionality");

  Rng root(seed);
  Attempt best;
  bool have_best = false;
  for (int r = 0; r < restarts; ++r) {
    Attempt a = lloyd(points, k, max_iters, root.derive(static_cast<uint64_t>(r)));
    if (!have_best || a.inertia < best.inertia) {
      best = std::move(a);
      have_best = true;
    }
  }
  return {std::move(best.centroids), std::move(best.assignments), best.inertia,
          std::move(best.trace)};
}

} // namespace rp
