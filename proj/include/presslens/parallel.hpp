#pragma once

#include <functional>

namespace presslens {

/// Runs body(i) for i in [0, n) on up to `threads` workers.  Each index is
/// processed exactly once; callers write results into per-index slots, so the
/// output does not depend on scheduling.  The first exception is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace presslens
