// Copyright 2026 The LTSS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "ltss/error.hpp"

#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <new>
#include <type_traits>

namespace ltss {

inline constexpr std::size_t kCacheLine = 64;

inline bool is_power_of_two(std::size_t n) noexcept { return n != 0 && std::has_single_bit(n); }

/// Bounded lock-free ring for exactly one producer thread and one consumer
/// thread. Each side caches the other's index to avoid cross-core traffic on
/// the fast path.
template <typename T>
class SpscRing {
    static_assert(std::is_trivially_copyable_v<T>);

public:
    explicit SpscRing(std::size_t capacity)
        : mask_(capacity - 1), buffer_(std::make_unique<T[]>(capacity)) {
        if (!is_power_of_two(capacity)) throw ConfigError("queue capacity must be a power of two");
    }

    SpscRing(const SpscRing&) = delete;
    SpscRing& operator=(const SpscRing&) = delete;

    bool try_push(const T& item) noexcept {
        const std::size_t tail = tail_.load(std::memory_order_relaxed);
        if (tail - head_cache_ > mask_) {
            head_cache_ = head_.load(std::memory_order_acquire);
            if (tail - head_cache_ > mask_) return false;
        }
        buffer_[tail & mask_] = item;
        tail_.store(tail + 1, std::memory_order_release);
        return true;
    }

    bool try_pop(T& out) noexcept {
        const std::size_t head = head_.load(std::memory_order_relaxed);
        if (head == tail_cache_) {
            tail_cache_ = tail_.load(std::memory_order_acquire);
            if (head == tail_cache_) return false;
        }
        out = buffer_[head & mask_];
        head_.store(head + 1, std::memory_order_release);
        return true;
    }

    std::size_t capacity() const noexcept { return mask_ + 1; }

    std::size_t size_approx() const noexcept {
        return tail_.load(std::memory_order_acquire) - head_.load(std::memory_order_acquire);
    }

private:
    const std::size_t mask_;
    std::unique_ptr<T[]> buffer_;
    alignas(kCacheLine) std::atomic<std::size_t> tail_{0};
    std::size_t head_cache_ = 0; // producer-local
    alignas(kCacheLine) std::atomic<std::size_t> head_{0};
    std::size_t tail_cache_ = 0; // consumer-local
};

/// Bounded lock-free ring for any number of producers and consumers
/// (per-cell sequence numbers, after Vyukov).
template <typename T>
class MpmcRing {
    static_assert(std::is_trivially_copyable_v<T>);

    struct Cell {
        std::atomic<std::size_t> sequence;
        T value;
    };

public:
    explicit MpmcRing(std::size_t capacity) : mask_(capacity - 1), cells_(new Cell[capacity]) {
        if (!is_power_of_two(capacity)) throw ConfigError("queue capacity must be a power of two");
        for (std::size_t i = 0; i < capacity; ++i) cells_[i].sequence.store(i, std::memory_order_relaxed);
    }

    MpmcRing(const MpmcRing&) = delete;
    MpmcRing& operator=(const MpmcRing&) = delete;

    bool try_push(const T& item) noexcept {
        std::size_t pos = enqueue_.load(std::memory_order_relaxed);
        for (;;) {
            Cell& cell = cells_[pos & mask_];
            const std::size_t seq = cell.sequence.load(std::memory_order_acquire);
            const auto diff = static_cast<std::intptr_t>(seq) - static_cast<std::intptr_t>(pos);
            if (diff == 0) {
                if (enqueue_.compare_exchange_weak(pos, pos + 1, std::memory_order_relaxed)) {
                    cell.value = item;
                    cell.sequence.store(pos + 1, std::memory_order_release);
                    return true;
                }
            } else if (diff < 0) {
                return false;
            } else {
                pos = enqueue_.load(std::memory_order_relaxed);
            }
        }
    }

    bool try_pop(T& out) noexcept {
        std::size_t pos = dequeue_.load(std::memory_order_relaxed);
        for (;;) {
            Cell& cell = cells_[pos & mask_];
            const std::size_t seq = cell.sequence.load(std::memory_order_acquire);
            const auto diff = static_cast<std::intptr_t>(seq) - static_cast<std::intptr_t>(pos + 1);
            if (diff == 0) {
                if (dequeue_.compare_exchange_weak(pos, pos + 1, std::memory_order_relaxed)) {
                    out = cell.value;
                    cell.sequence.store(pos + mask_ + 1, std::memory_order_release);
                    return true;
                }
            } else if (diff < 0) {
                return false;
            } else {
                pos = dequeue_.load(std::memory_order_relaxed);
            }
        }
    }

    std::size_t capacity() const noexcept { return mask_ + 1; }

    std::size_t size_approx() const noexcept {
        const std::size_t e = enqueue_.load(std::memory_order_acquire);
        const std::size_t d = dequeue_.load(std::memory_order_acquire);
        return e >= d ? e - d : 0;
    }

private:
    const std::size_t mask_;
    std::unique_ptr<Cell[]> cells_;
    alignas(kCacheLine) std::atomic<std::size_t> enqueue_{0};
    alignas(kCacheLine) std::atomic<std::size_t> dequeue_{0};
};

enum class QueueDiscipline : std::uint8_t { spsc, mpmc };

/// Bounded queue whose producer/consumer discipline is chosen at runtime.
template <typename T>
class BoundedQueue {
public:
    BoundedQueue(QueueDiscipline discipline, std::size_t capacity) : discipline_(discipline) {
        if (discipline == QueueDiscipline::spsc) {
            spsc_ = std::make_unique<SpscRing<T>>(capacity);
        } else {
            mpmc_ = std::make_unique<MpmcRing<T>>(capacity);
        }
    }

    bool try_push(const T& item) noexcept { return spsc_ ? spsc_->try_push(item) : mpmc_->try_push(item); }
    bool try_pop(T& out) noexcept { return spsc_ ? spsc_->try_pop(out) : mpmc_->try_pop(out); }
    std::size_t capacity() const noexcept { return spsc_ ? spsc_->capacity() : mpmc_->capacity(); }
    std::size_t size_approx() const noexcept { return spsc_ ? spsc_->size_approx() : mpmc_->size_approx(); }
    QueueDiscipline discipline() const noexcept { return discipline_; }

private:
    QueueDiscipline discipline_;
    std::unique_ptr<SpscRing<T>> spsc_;
    std::unique_ptr<MpmcRing<T>> mpmc_;
};

} // namespace ltss
