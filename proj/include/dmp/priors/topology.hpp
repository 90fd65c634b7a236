#pragma once

#include <cstddef>
#include <vector>

#include "dmp/common/error.hpp"

namespace dmp::priors {

/// Neighbor lists over the sample positions of a parameter grid.
struct GridTopology {
  std::vector<std::vector<std::size_t>> neighbors;

  std::size_t size() const noexcept { return neighbors.size(); }

  bool symmetric() const {
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      for (std::size_t j : neighbors[i]) {
        if (j >= neighbors.size()) return false;
        bool back = false;
        for (std::size_t k : neighbors[j]) back = back || k == i;
        if (!back) return false;
      }
    }
    return true;
  }
};

/// 2-connected chain over m positions.
inline GridTopology chain_topology(std::size_t m) {
  if (m < 2) throw InvalidArgument("chain topology needs at least two positions");
  GridTopology t;
  t.neighbors.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0) t.neighbors[i].push_back(i - 1);
    if (i + 1 < m) t.neighbors[i].push_back(i + 1);
  }
  return t;
}

/// 4-connected rows x cols grid, row-major indices i * cols + j.
inline GridTopology grid_topology(std::size_t rows, std::size_t cols) {
  if (rows < 2 || cols < 2) throw InvalidArgument("grid topology needs at least 2x2 positions");
  GridTopology t;
  t.neighbors.resize(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      auto& n = t.neighbors[i * cols + j];
      if (i > 0) n.push_back((i - 1) * cols + j);
      if (j > 0) n.push_back(i * cols + j - 1);
      if (j + 1 < cols) n.push_back(i * cols + j + 1);
      if (i + 1 < rows) n.push_back((i + 1) * cols + j);
    }
  }
  return t;
}

}  // namespace dmp::priors
