#pragma once

#include <functional>

namespace npgraph {

// Worker cap: the NPGRAPH_THREADS environment variable when set (minimum 1),
// otherwise the hardware concurrency.
int max_workers();

// Runs body(0..jobs-1) across up to max_workers() threads. Jobs must write
// to disjoint state; the first exception thrown by any job is rethrown on
// the calling thread after all workers finish.
void parallel_for(int jobs, const std::function<void(int)>& body);

}  // namespace npgraph
