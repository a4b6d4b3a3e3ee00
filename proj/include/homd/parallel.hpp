#pragma once

namespace homd {

/// Threads used by the parallel loops. n <= 0 keeps the runtime default.
void set_thread_count(int n);
int thread_count();

}  // namespace homd
