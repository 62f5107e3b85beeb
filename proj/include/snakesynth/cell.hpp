#pragma once

#include <cstddef>

namespace snakesynth {

/// Grid cell; `i` indexes the horizontal axis, `j` the vertical.
struct Cell {
  std::size_t i = 0;
  std::size_t j = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

}  // namespace snakesynth
