// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Process-level tuning for long training runs.

#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace pinnkit {

/// Keeps freed tape buffers inside the heap instead of returning them to
/// the OS after every iteration. Every iteration allocates and frees the
/// same large matrices; without this glibc maps and unmaps them each time
/// and the page faults roughly double the step time. Call once from main.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 << 20);  // the largest value glibc accepts
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
}

}  // namespace pinnkit
