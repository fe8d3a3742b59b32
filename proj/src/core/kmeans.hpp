#pragma once

#include <cstdint>
#include <vector>

namespace rp {

struct KmeansResult {
  std::vector<std::vector<double>> centroids; // k x d
  std::vector<int> assignments;               // n
  double inertia = 0.0;                       // sum of squared distances
  std::vector<double> inertia_trace;          // per Lloyd iteration, winning restart
};

// Lloyd's algorithm with k-means++ seeding. Runs `restarts` independent
// seeded attempts and keeps the lowest-inertia one (ties: lowest restart
// index). Clusters that empty out are re-seeded to the point farthest
// from its assigned centroid.
KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k, int max_iters,
                    int restarts, uint64_t seed);

} // namespace rp
