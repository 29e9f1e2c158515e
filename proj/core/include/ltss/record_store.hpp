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

#include "ltss/composite_time.hpp"
#include "ltss/schema.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ltss {

inline constexpr std::size_t kBlockSize = 4096;
inline constexpr std::uint8_t kStoreFormatVersion = 1;
inline constexpr std::size_t kMaxZones = 16;

/// Contiguous byte range of the backing file or device.
struct Zone {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
};

/// Decoded contents of one 4 KiB metadata copy.
struct BlockMetadata {
    std::uint64_t generation = 0;
    std::uint64_t head = 0;
    bool wrapped = false;
    std::uint64_t record_count_total = 0;
    std::uint32_t record_size = 0;
    std::uint64_t schema_hash = 0;
    EpochMicros min_time = 0;
    EpochMicros max_time = 0;

    friend bool operator==(const BlockMetadata&, const BlockMetadata&) = default;
};

/// Serialises to exactly one block; bytes 4092..4095 hold the CRC-32 of the
/// first 4092 bytes.
void encode_metadata(const BlockMetadata& meta, std::span<std::byte, kBlockSize> block) noexcept;
std::optional<BlockMetadata> decode_metadata(std::span<const std::byte, kBlockSize> block) noexcept;

struct StoreOptions {
    std::uint32_t rolling_count = 3;
    /// fdatasync after every appended batch.
    bool sync_each_batch = true;
    std::uint32_t partition_index = 0;
    std::uint32_t partition_count = 1;
};

enum class OpenMode : std::uint8_t { read_write, read_only };

/// Half-open range of record sequence numbers.
struct RecordRange {
    std::uint64_t begin = 0;
    std::uint64_t end = 0;

    std::uint64_t size() const noexcept { return end > begin ? end - begin : 0; }
    bool empty() const noexcept { return end <= begin; }
    friend bool operator==(const RecordRange&, const RecordRange&) = default;
};

/// Append-only, time-ordered log of fixed-size records with roll-around.
///
/// Layout (all regions 4 KiB aligned, little-endian):
///
///     [header][metadata copy 0 .. N-1][record region][composite time region]
///
/// Records are addressed by a monotonically increasing sequence number; the
/// physical slot is `seq % capacity`. The live window is the last
/// min(total, capacity) sequence numbers. The composite time computed at
/// ingest is persisted next to each record so queries never convert.
///
/// One writer thread appends; any number of readers may call the const
/// read functions concurrently. Readers validate each read against the live
/// window after copying, so a slot overwritten mid-read is reported as gone.
class RecordStore {
public:
    static std::unique_ptr<RecordStore> create(const std::string& path, const Schema& schema,
                                               std::uint64_t capacity_records, StoreOptions options = {});

    /// Opens an existing store, selecting the newest checksum-valid metadata
    /// copy. Throws StoreError when no copy is valid or, if `expected` is
    /// given, when its layout hash differs from the stored schema.
    static std::unique_ptr<RecordStore> recover(const std::string& path, OpenMode mode = OpenMode::read_write,
                                                const Schema* expected = nullptr);

    ~RecordStore();
    RecordStore(const RecordStore&) = delete;
    RecordStore& operator=(const RecordStore&) = delete;

    /// Appends a batch sorted by time whose first record is not older than
    /// the newest stored record. Returns the sequence number of the first
    /// record. An empty batch is a no-op that returns total().
    std::uint64_t append_batch(std::span<const std::span<const std::byte>> records,
                               std::span<const CompositeTime> ctimes);
    /// Contiguous variant; composite times are derived from the time field.
    std::uint64_t append_batch(std::span<const std::byte> records);

    /// Throws StoreError when `seq` is outside the live window.
    std::vector<std::byte> read_at(std::uint64_t seq) const;
    /// Copies the record and its composite time; false if `seq` is not live.
    bool try_read(std::uint64_t seq, std::span<std::byte> out, CompositeTime* ctime = nullptr) const noexcept;

    /// Direct pointers into the mapped log. Callers must confirm with
    /// is_live() after using the bytes.
    const std::byte* record_ptr(std::uint64_t seq) const noexcept;
    CompositeTime ctime_at(std::uint64_t seq) const noexcept;
    EpochMicros time_at(std::uint64_t seq) const noexcept;
    bool is_live(std::uint64_t seq) const noexcept;

    /// [oldest live, total) as currently published to readers.
    RecordRange live_window() const noexcept;

    std::uint64_t total() const noexcept { return published_total_.load(std::memory_order_acquire); }
    std::uint64_t head() const noexcept { return total() % capacity_; }
    bool wrapped() const noexcept { return total() > capacity_; }
    std::uint64_t capacity() const noexcept { return capacity_; }
    std::uint64_t generation() const noexcept;
    BlockMetadata metadata() const;

    const Schema& schema() const noexcept { return *schema_; }
    const std::string& path() const noexcept { return path_; }
    const StoreOptions& options() const noexcept { return options_; }
    const std::vector<Zone>& zones() const noexcept { return zones_; }
    OpenMode mode() const noexcept { return mode_; }

    /// Read-only handles: re-reads the metadata copies to pick up appends
    /// made by another process. Returns true if the total changed.
    bool refresh();

    void sync();

    /// Count of record reads served from the mapped log (for cache tests).
    std::uint64_t storage_reads() const noexcept { return storage_reads_.load(std::memory_order_relaxed); }
    void count_storage_reads(std::uint64_t n) const noexcept {
        storage_reads_.fetch_add(n, std::memory_order_relaxed);
    }

    static std::uint64_t record_region_offset(std::uint32_t rolling_count) noexcept;
    static std::uint64_t file_size_for(std::size_t record_size, std::uint64_t capacity,
                                       std::uint32_t rolling_count) noexcept;
    static std::uint64_t metadata_offset(std::uint32_t copy) noexcept { return kBlockSize * (1 + copy); }

private:
    RecordStore() = default;
    void map_file();
    void write_metadata_locked();
    std::uint64_t append_impl(std::span<const std::span<const std::byte>> records,
                              std::span<const CompositeTime> ctimes);
    void load_best_metadata();
    void exclude_overwritten();

    std::string path_;
    int fd_ = -1;
    OpenMode mode_ = OpenMode::read_write;
    std::unique_ptr<Schema> schema_;
    StoreOptions options_;
    std::uint64_t capacity_ = 0;
    std::size_t record_size_ = 0;
    std::uint64_t record_offset_ = 0;
    std::uint64_t ctime_offset_ = 0;
    std::uint64_t file_size_ = 0;
    std::vector<Zone> zones_;

    std::byte* map_ = nullptr;
    std::size_t map_len_ = 0;

    mutable std::mutex meta_mutex_; // guards meta_ for metadata()/generation()
    BlockMetadata meta_;

    std::atomic<std::uint64_t> published_total_{0};
    std::atomic<std::uint64_t> reserved_end_{0};
    mutable std::atomic<std::uint64_t> storage_reads_{0};
};

} // namespace ltss
