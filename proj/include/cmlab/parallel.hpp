// Copyright (C) 2026 The cmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace cmlab {

// Rows handled by one work item. Random streams are keyed by chunk index,
// so results do not depend on how many threads execute the chunks.
inline constexpr std::size_t kChunkRows = 8192;

// Worker cap. Defaults to $CMLAB_THREADS, else hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);  // 0 restores the default

// SplitMix64 finalizer over (seed, stream, chunk).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t chunk);

// Runs body(chunk, begin, end) for every kChunkRows-sized slice of [0, n).
// Exceptions thrown by a body are rethrown on the calling thread.
void parallel_chunks(
    std::size_t n,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

}  // namespace cmlab
