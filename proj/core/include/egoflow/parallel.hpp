#pragma once

#include <cstddef>
#include <functional>

namespace egoflow {

/// Worker count for internal loops. Reads EGOFLOW_THREADS on every call;
/// falls back to the hardware concurrency when unset or invalid.
int thread_count();

/// Runs body(begin, end) over a static partition of [0, n). Chunks never
/// overlap, so callers that write only to their own indices get output that
/// does not depend on the thread count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace egoflow
