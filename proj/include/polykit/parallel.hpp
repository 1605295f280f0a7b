// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace polykit {

/// Worker cap: POLYKIT_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int thread_budget();

/// Runs fn(i) for i in [0, n).  Work is split into contiguous chunks across
/// at most thread_budget() threads; callers keep results deterministic by
/// writing to disjoint, index-addressed slots.  Exceptions from workers are
/// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace polykit
