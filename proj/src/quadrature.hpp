#pragma once

#include <cstddef>
#include <span>

namespace nlft::detail {

// Composite Simpson on a uniform grid, with a 3/8 tail for an odd cell count.
template <typename T>
T simpson(std::span<const T> v, double h) {
  const std::size_t n = v.size();
  if (n < 2) return T{};
  if (n == 2) return 0.5 * h * (v[0] + v[1]);
  const std::size_t cells = n - 1;
  const std::size_t simpson_cells = (cells % 2 == 0) ? cells : cells - 3;
  T acc{};
  for (std::size_t i = 0; i + 2 <= simpson_cells; i += 2) acc += v[i] + 4.0 * v[i + 1] + v[i + 2];
  acc *= h / 3.0;
  if (simpson_cells != cells) {
    const std::size_t j = simpson_cells;
    acc += 3.0 * h / 8.0 * (v[j] + 3.0 * v[j + 1] + 3.0 * v[j + 2] + v[j + 3]);
  }
  return acc;
}

}  // namespace nlft::detail
