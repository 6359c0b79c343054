#pragma once

#include <cstddef>
#include <functional>

namespace robustde {

int hardware_threads();

// Runs body(i) for i in [0, count). threads <= 1 stays on the calling
// thread; threads == 0 uses the hardware count. Work is handed out through a
// shared atomic counter, so results must not depend on execution order (all
// call sites write to preallocated slots). The first exception thrown by a
// body is rethrown after the pool joins.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace robustde
