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

#include "ltss/partition.hpp"

#include "ltss/error.hpp"

#include <cstdio>
#include <filesystem>

namespace ltss {

Partition::Partition(std::unique_ptr<RecordStore> store, std::unique_ptr<DirectoryIndex> index,
                     std::string index_path)
    : store_(std::move(store)), index_(std::move(index)), index_path_(std::move(index_path)) {}

std::uint64_t Partition::append_batch(std::span<const std::span<const std::byte>> records,
                                      std::span<const CompositeTime> ctimes) {
    const std::uint64_t first = store_->append_batch(records, ctimes);
    index_->append_batch(first, ctimes, store_->live_window().begin);
    if (++batches_ % kSnapshotEveryBatches == 0) snapshot_index();
    return first;
}

std::uint64_t Partition::refresh() {
    std::lock_guard lock(refresh_mutex_);
    const std::uint64_t before = index_->high_water();
    store_->refresh();
    const RecordRange live = store_->live_window();
    if (index_->high_water() > live.end || (index_->high_water() < live.begin)) {
        std::shared_ptr<DirectoryIndex> fresh = DirectoryIndex::rebuild(*store_);
        std::atomic_store_explicit(&index_, std::move(fresh), std::memory_order_release);
        return live.size();
    }
    for (std::uint64_t seq = index_->high_water(); seq < live.end; ++seq) index_->append(seq, store_->ctime_at(seq));
    index_->publish(live.begin);
    return index_->high_water() - before;
}

void Partition::snapshot_index() {
    index_->snapshot(index_path_, store_->schema().layout_hash(), store_->generation());
}

void Subscription::unsubscribe() {
    if (table_) table_->unsubscribe(id_);
    table_ = nullptr;
}

std::string Table::partition_path(const std::string& base, std::uint32_t index) {
    return index == 0 ? base : base + ".p" + std::to_string(index);
}

std::unique_ptr<Table> Table::create(const std::string& path, const Schema& schema, TableOptions options) {
    if (options.partitions < 1) throw ConfigError("a table needs at least one partition");
    std::unique_ptr<Table> t(new Table());
    t->path_ = path;
    for (std::uint32_t i = 0; i < options.partitions; ++i) {
        StoreOptions so = options.store;
        so.partition_index = i;
        so.partition_count = options.partitions;
        const std::string p = partition_path(path, i);
        std::error_code ec;
        std::filesystem::remove(p + ".idx", ec);
        auto store = RecordStore::create(p, schema, options.capacity_records, so);
        auto index = std::make_unique<DirectoryIndex>(0);
        t->partitions_.push_back(std::make_unique<Partition>(std::move(store), std::move(index), p + ".idx"));
    }
    return t;
}

std::unique_ptr<Table> Table::open(const std::string& path, OpenMode mode, const Schema* expected) {
    std::unique_ptr<Table> t(new Table());
    t->path_ = path;
    t->mode_ = mode;
    auto first = RecordStore::recover(path, mode, expected);
    const std::uint32_t count = first->options().partition_count;
    if (first->options().partition_index != 0) {
        throw StoreError("'" + path + "' is partition " + std::to_string(first->options().partition_index) +
                         ", open the base path instead");
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string p = partition_path(path, i);
        auto store = i == 0 ? std::move(first) : RecordStore::recover(p, mode, &t->schema());
        if (store->options().partition_index != i || store->options().partition_count != count) {
            throw StoreError("partition file '" + p + "' does not belong to this table");
        }
        auto loaded = DirectoryIndex::load_snapshot(p + ".idx", *store);
        t->partitions_.push_back(std::make_unique<Partition>(std::move(store), std::move(loaded.index), p + ".idx"));
    }
    return t;
}

Table::~Table() {
    if (mode_ == OpenMode::read_write) {
        try {
            snapshot_indexes();
        } catch (const std::exception&) {
            // Best effort; the index is rebuilt from the log on the next open.
        }
    }
}

std::uint64_t Table::append_batch(std::size_t p, std::span<const std::span<const std::byte>> records,
                                  std::span<const CompositeTime> ctimes) {
    const std::uint64_t first = partitions_[p]->append_batch(records, ctimes);
    const std::uint64_t n = records.size();
    const std::uint64_t before = inserted_.fetch_add(n, std::memory_order_acq_rel);
    const std::uint64_t after = before + n;

    std::shared_ptr<const std::vector<Callback>> cbs;
    {
        std::lock_guard lock(callbacks_mutex_);
        cbs = callbacks_;
    }
    for (const auto& cb : *cbs) {
        if (after / cb.every_n > before / cb.every_n) cb.action(after);
    }
    return first;
}

Subscription Table::register_update_callback(std::uint64_t every_n, UpdateCallback action) {
    if (every_n == 0) throw ConfigError("update callback interval must be at least 1");
    std::lock_guard lock(callbacks_mutex_);
    auto next = std::make_shared<std::vector<Callback>>(*callbacks_);
    const std::uint64_t id = next_callback_id_++;
    next->push_back(Callback{id, every_n, std::move(action)});
    callbacks_ = std::move(next);
    return Subscription(this, id);
}

void Table::unsubscribe(std::uint64_t id) {
    std::lock_guard lock(callbacks_mutex_);
    auto next = std::make_shared<std::vector<Callback>>();
    for (const auto& cb : *callbacks_) {
        if (cb.id != id) next->push_back(cb);
    }
    callbacks_ = std::move(next);
}

std::uint64_t Table::live_records() const noexcept {
    std::uint64_t n = 0;
    for (const auto& p : partitions_) n += p->store().live_window().size();
    return n;
}

std::uint64_t Table::refresh() {
    std::uint64_t n = 0;
    for (auto& p : partitions_) n += p->refresh();
    return n;
}

void Table::snapshot_indexes() {
    for (auto& p : partitions_) p->snapshot_index();
}

std::size_t Table::index_memory_bytes() const noexcept {
    std::size_t n = 0;
    for (const auto& p : partitions_) n += p->index()->memory_bytes();
    return n;
}

} // namespace ltss
