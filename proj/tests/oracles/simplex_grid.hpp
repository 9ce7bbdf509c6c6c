#pragma once

// Exhaustive search over the probability simplex on a lattice of spacing
// 1/steps.

#include <functional>
#include <span>
#include <vector>

namespace oracle {

struct GridBest {
  double value = -1.0;
  std::vector<double> x;
};

inline GridBest simplex_grid_max(int dim, int steps, const std::function<double(std::span<const double>)>& f) {
  GridBest best;
  std::vector<int> counts(dim, 0);
  std::vector<double> x(dim, 0.0);
  auto visit = [&](auto&& self, int pos, int left) -> void {
    if (pos == dim - 1) {
      counts[pos] = left;
      for (int i = 0; i < dim; ++i) x[i] = double(counts[i]) / steps;
      const double v = f(x);
      if (v > best.value) {
        best.value = v;
        best.x = x;
      }
      return;
    }
    for (int k = 0; k <= left; ++k) {
      counts[pos] = k;
      self(self, pos + 1, left - k);
    }
  };
  visit(visit, 0, steps);
  return best;
}

}  // namespace oracle
