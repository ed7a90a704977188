#pragma once

#include "exprelax/kernels.hpp"
#include "exprelax/mesh.hpp"

namespace exprelax::detail {

inline kernels::Layout layout_of(const Grid& g) {
  return {g.cells(0), g.cells(1), g.h(0), g.h(1), g.dim() == 2};
}

}  // namespace exprelax::detail
