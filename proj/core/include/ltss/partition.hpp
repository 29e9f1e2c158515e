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

#include "ltss/directory_index.hpp"
#include "ltss/record_store.hpp"
#include "ltss/schema.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace ltss {

inline constexpr std::uint64_t kSnapshotEveryBatches = 1024;

/// One record log and its directory index.
class Partition {
public:
    Partition(std::unique_ptr<RecordStore> store, std::unique_ptr<DirectoryIndex> index, std::string index_path);

    const RecordStore& store() const noexcept { return *store_; }
    RecordStore& store() noexcept { return *store_; }
    std::shared_ptr<const IndexView> view() const noexcept { return index()->view(); }
    std::shared_ptr<const DirectoryIndex> index() const noexcept {
        return std::atomic_load_explicit(&index_, std::memory_order_acquire);
    }
    std::uint32_t id() const noexcept { return store_->options().partition_index; }
    const std::string& index_path() const noexcept { return index_path_; }

    /// Writer thread only: store append, index append, publish. Returns the
    /// first sequence number of the batch.
    std::uint64_t append_batch(std::span<const std::span<const std::byte>> records,
                               std::span<const CompositeTime> ctimes);

    /// Read-only handles: picks up records appended by another process.
    /// Returns the number of newly visible records.
    std::uint64_t refresh();

    void snapshot_index();
    std::uint64_t batches() const noexcept { return batches_; }

private:
    std::unique_ptr<RecordStore> store_;
    std::shared_ptr<DirectoryIndex> index_; // swapped atomically on rebuild
    std::string index_path_;
    std::uint64_t batches_ = 0;
    std::mutex refresh_mutex_;
};

using UpdateCallback = std::function<void(std::uint64_t inserted)>;

class Table;

/// Handle returned by Table::register_update_callback.
class Subscription {
public:
    Subscription() = default;
    Subscription(Table* table, std::uint64_t id) : table_(table), id_(id) {}
    void unsubscribe();
    bool active() const noexcept { return table_ != nullptr; }
    std::uint64_t id() const noexcept { return id_; }

private:
    Table* table_ = nullptr;
    std::uint64_t id_ = 0;
};

struct TableOptions {
    std::uint32_t partitions = 1;
    std::uint64_t capacity_records = 1'000'000; ///< Per partition.
    StoreOptions store;
};

/// A schema plus one partition per pipeline. Partition 0 lives at `path`,
/// partition i > 0 at `path.p<i>`.
class Table {
public:
    static std::unique_ptr<Table> create(const std::string& path, const Schema& schema, TableOptions options);
    static std::unique_ptr<Table> open(const std::string& path, OpenMode mode = OpenMode::read_write,
                                       const Schema* expected = nullptr);
    static std::string partition_path(const std::string& base, std::uint32_t index);

    ~Table();
    Table(const Table&) = delete;
    Table& operator=(const Table&) = delete;

    const Schema& schema() const noexcept { return partitions_.front()->store().schema(); }
    const std::string& name() const noexcept { return schema().name(); }
    const std::string& path() const noexcept { return path_; }
    std::size_t partition_count() const noexcept { return partitions_.size(); }
    Partition& partition(std::size_t i) noexcept { return *partitions_[i]; }
    const Partition& partition(std::size_t i) const noexcept { return *partitions_[i]; }
    OpenMode mode() const noexcept { return mode_; }

    /// Appends to partition `p` and fires update callbacks.
    std::uint64_t append_batch(std::size_t p, std::span<const std::span<const std::byte>> records,
                               std::span<const CompositeTime> ctimes);

    /// `action(inserted)` runs once per append batch that crosses a multiple
    /// of `every_n`, where `inserted` counts records appended through this
    /// handle. Throws ConfigError if every_n is 0.
    Subscription register_update_callback(std::uint64_t every_n, UpdateCallback action);
    void unsubscribe(std::uint64_t id);

    std::uint64_t inserted() const noexcept { return inserted_.load(std::memory_order_acquire); }
    /// Sum of live records across partitions.
    std::uint64_t live_records() const noexcept;

    std::uint64_t refresh();
    void snapshot_indexes();
    std::size_t index_memory_bytes() const noexcept;

private:
    Table() = default;

    struct Callback {
        std::uint64_t id;
        std::uint64_t every_n;
        UpdateCallback action;
    };

    std::string path_;
    OpenMode mode_ = OpenMode::read_write;
    std::vector<std::unique_ptr<Partition>> partitions_;
    std::atomic<std::uint64_t> inserted_{0};

    std::mutex callbacks_mutex_;
    std::shared_ptr<const std::vector<Callback>> callbacks_ = std::make_shared<std::vector<Callback>>();
    std::uint64_t next_callback_id_ = 1;
};

} // namespace ltss
