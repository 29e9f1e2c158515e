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

#include "ltss/record_store.hpp"

#include "ltss/bytes.hpp"
#include "ltss/checksum.hpp"
#include "ltss/error.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <climits>
#include <cstring>

#include <fcntl.h>
#include <linux/fs.h>
#include <sys/ioctl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <sys/uio.h>
#include <unistd.h>

namespace ltss {

namespace {

constexpr std::array<char, 4> kHeaderMagic{'L', 'T', 'S', 'S'};
constexpr std::array<char, 4> kMetaMagic{'L', 'T', 'S', 'M'};
constexpr std::size_t kChecksumOffset = kBlockSize - 4;

// Header block field offsets.
constexpr std::size_t kHdrVersion = 4;
constexpr std::size_t kHdrSchemaHash = 8;
constexpr std::size_t kHdrRecordSize = 16;
constexpr std::size_t kHdrRollingCount = 20;
constexpr std::size_t kHdrCapacity = 24;
constexpr std::size_t kHdrPartitionIndex = 32;
constexpr std::size_t kHdrPartitionCount = 36;
constexpr std::size_t kHdrRecordOffset = 40;
constexpr std::size_t kHdrCtimeOffset = 48;
constexpr std::size_t kHdrZoneCount = 56;
constexpr std::size_t kHdrZones = 64;
constexpr std::size_t kHdrSchemaLen = kHdrZones + kMaxZones * 16;
constexpr std::size_t kHdrSchemaText = kHdrSchemaLen + 4;
constexpr std::size_t kMaxSchemaText = kChecksumOffset - kHdrSchemaText;

// Metadata block field offsets.
constexpr std::size_t kMetaVersion = 4;
constexpr std::size_t kMetaGeneration = 8;
constexpr std::size_t kMetaHead = 16;
constexpr std::size_t kMetaWrapped = 24;
constexpr std::size_t kMetaTotal = 32;
constexpr std::size_t kMetaRecordSize = 40;
constexpr std::size_t kMetaSchemaHash = 48;
constexpr std::size_t kMetaMinTime = 56;
constexpr std::size_t kMetaMaxTime = 64;

constexpr std::uint64_t align_up(std::uint64_t n) noexcept { return (n + kBlockSize - 1) / kBlockSize * kBlockSize; }

void pwrite_all(int fd, const std::byte* data, std::size_t len, std::uint64_t offset, const char* what) {
    while (len > 0) {
        const ssize_t n = ::pwrite(fd, data, len, static_cast<off_t>(offset));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError(what, errno);
        }
        data += n;
        len -= static_cast<std::size_t>(n);
        offset += static_cast<std::uint64_t>(n);
    }
}

void pread_all(int fd, std::byte* data, std::size_t len, std::uint64_t offset, const char* what) {
    while (len > 0) {
        const ssize_t n = ::pread(fd, data, len, static_cast<off_t>(offset));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError(what, errno);
        }
        if (n == 0) throw StoreError(std::string(what) + ": unexpected end of file");
        data += n;
        len -= static_cast<std::size_t>(n);
        offset += static_cast<std::uint64_t>(n);
    }
}

// Gather-writes `iov` at `offset`, splitting into IOV_MAX-sized calls and
// resuming after short writes.
void pwritev_all(int fd, std::vector<iovec>& iov, std::uint64_t offset) {
    std::size_t first = 0;
    while (first < iov.size()) {
        const int count = static_cast<int>(std::min<std::size_t>(iov.size() - first, IOV_MAX));
        const ssize_t n = ::pwritev(fd, iov.data() + first, count, static_cast<off_t>(offset));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError("write records", errno);
        }
        auto left = static_cast<std::size_t>(n);
        offset += left;
        while (left > 0 && first < iov.size()) {
            if (left >= iov[first].iov_len) {
                left -= iov[first].iov_len;
                ++first;
            } else {
                iov[first].iov_base = static_cast<char*>(iov[first].iov_base) + left;
                iov[first].iov_len -= left;
                left = 0;
            }
        }
    }
}

bool is_block_device(int fd) {
    struct stat st {};
    return ::fstat(fd, &st) == 0 && S_ISBLK(st.st_mode);
}

std::uint64_t device_size(int fd) {
    struct stat st {};
    if (::fstat(fd, &st) != 0) throw IoError("stat store", errno);
    if (S_ISBLK(st.st_mode)) {
        std::uint64_t bytes = 0;
        if (::ioctl(fd, BLKGETSIZE64, &bytes) != 0) throw IoError("query block device size", errno);
        return bytes;
    }
    return static_cast<std::uint64_t>(st.st_size);
}

} // namespace

void encode_metadata(const BlockMetadata& m, std::span<std::byte, kBlockSize> block) noexcept {
    std::memset(block.data(), 0, kBlockSize);
    std::memcpy(block.data(), kMetaMagic.data(), kMetaMagic.size());
    block[kMetaVersion] = std::byte{kStoreFormatVersion};
    store_le(block.data() + kMetaGeneration, m.generation);
    store_le(block.data() + kMetaHead, m.head);
    block[kMetaWrapped] = std::byte{static_cast<unsigned char>(m.wrapped ? 1 : 0)};
    store_le(block.data() + kMetaTotal, m.record_count_total);
    store_le(block.data() + kMetaRecordSize, m.record_size);
    store_le(block.data() + kMetaSchemaHash, m.schema_hash);
    store_le(block.data() + kMetaMinTime, m.min_time);
    store_le(block.data() + kMetaMaxTime, m.max_time);
    store_le(block.data() + kChecksumOffset, crc32(block.first(kChecksumOffset)));
}

std::optional<BlockMetadata> decode_metadata(std::span<const std::byte, kBlockSize> block) noexcept {
    if (std::memcmp(block.data(), kMetaMagic.data(), kMetaMagic.size()) != 0) return std::nullopt;
    if (load_le<std::uint32_t>(block.data() + kChecksumOffset) != crc32(block.first(kChecksumOffset))) {
        return std::nullopt;
    }
    if (block[kMetaVersion] != std::byte{kStoreFormatVersion}) return std::nullopt;
    BlockMetadata m;
    m.generation = load_le<std::uint64_t>(block.data() + kMetaGeneration);
    m.head = load_le<std::uint64_t>(block.data() + kMetaHead);
    m.wrapped = block[kMetaWrapped] != std::byte{0};
    m.record_count_total = load_le<std::uint64_t>(block.data() + kMetaTotal);
    m.record_size = load_le<std::uint32_t>(block.data() + kMetaRecordSize);
    m.schema_hash = load_le<std::uint64_t>(block.data() + kMetaSchemaHash);
    m.min_time = load_le<std::uint64_t>(block.data() + kMetaMinTime);
    m.max_time = load_le<std::uint64_t>(block.data() + kMetaMaxTime);
    return m;
}

std::uint64_t RecordStore::record_region_offset(std::uint32_t rolling_count) noexcept {
    return kBlockSize * (1 + std::uint64_t{rolling_count});
}

std::uint64_t RecordStore::file_size_for(std::size_t record_size, std::uint64_t capacity,
                                         std::uint32_t rolling_count) noexcept {
    return record_region_offset(rolling_count) + align_up(capacity * record_size) +
           align_up(capacity * sizeof(std::uint64_t));
}

std::unique_ptr<RecordStore> RecordStore::create(const std::string& path, const Schema& schema,
                                                 std::uint64_t capacity, StoreOptions options) {
    if (capacity < 1) throw StoreError("capacity must hold at least one record");
    if (options.rolling_count < 1) throw StoreError("rolling count must be at least 1");
    if (options.partition_count < 1 || options.partition_index >= options.partition_count) {
        throw StoreError("invalid partition index/count");
    }
    const std::string schema_text = schema.to_config();
    if (schema_text.size() > kMaxSchemaText) throw StoreError("schema text too large for the store header");

    std::unique_ptr<RecordStore> s(new RecordStore());
    s->path_ = path;
    s->mode_ = OpenMode::read_write;
    s->schema_ = std::make_unique<Schema>(schema);
    s->options_ = options;
    s->capacity_ = capacity;
    s->record_size_ = schema.record_size();
    s->record_offset_ = record_region_offset(options.rolling_count);
    s->ctime_offset_ = s->record_offset_ + align_up(capacity * s->record_size_);
    s->file_size_ = file_size_for(s->record_size_, capacity, options.rolling_count);
    s->zones_ = {Zone{s->record_offset_, s->file_size_ - s->record_offset_}};

    s->fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (s->fd_ < 0) throw IoError("create store '" + path + "'", errno);
    if (is_block_device(s->fd_)) {
        if (device_size(s->fd_) < s->file_size_) throw StoreError("block device too small for requested capacity");
    } else {
        if (::ftruncate(s->fd_, 0) != 0 || ::ftruncate(s->fd_, static_cast<off_t>(s->file_size_)) != 0) {
            throw IoError("size store '" + path + "'", errno);
        }
    }

    std::array<std::byte, kBlockSize> header{};
    std::memcpy(header.data(), kHeaderMagic.data(), kHeaderMagic.size());
    header[kHdrVersion] = std::byte{kStoreFormatVersion};
    store_le(header.data() + kHdrSchemaHash, schema.layout_hash());
    store_le(header.data() + kHdrRecordSize, static_cast<std::uint32_t>(s->record_size_));
    store_le(header.data() + kHdrRollingCount, options.rolling_count);
    store_le(header.data() + kHdrCapacity, capacity);
    store_le(header.data() + kHdrPartitionIndex, options.partition_index);
    store_le(header.data() + kHdrPartitionCount, options.partition_count);
    store_le(header.data() + kHdrRecordOffset, s->record_offset_);
    store_le(header.data() + kHdrCtimeOffset, s->ctime_offset_);
    store_le(header.data() + kHdrZoneCount, static_cast<std::uint32_t>(s->zones_.size()));
    for (std::size_t i = 0; i < s->zones_.size(); ++i) {
        store_le(header.data() + kHdrZones + i * 16, s->zones_[i].offset);
        store_le(header.data() + kHdrZones + i * 16 + 8, s->zones_[i].length);
    }
    store_le(header.data() + kHdrSchemaLen, static_cast<std::uint32_t>(schema_text.size()));
    std::memcpy(header.data() + kHdrSchemaText, schema_text.data(), schema_text.size());
    store_le(header.data() + kChecksumOffset, crc32(std::span(header).first(kChecksumOffset)));
    pwrite_all(s->fd_, header.data(), header.size(), 0, "write store header");

    s->meta_.record_size = static_cast<std::uint32_t>(s->record_size_);
    s->meta_.schema_hash = schema.layout_hash();
    std::array<std::byte, kBlockSize> block{};
    encode_metadata(s->meta_, block);
    for (std::uint32_t i = 0; i < options.rolling_count; ++i) {
        pwrite_all(s->fd_, block.data(), block.size(), metadata_offset(i), "write metadata");
    }
    if (::fsync(s->fd_) != 0) throw IoError("sync store", errno);
    s->map_file();
    return s;
}

std::unique_ptr<RecordStore> RecordStore::recover(const std::string& path, OpenMode mode, const Schema* expected) {
    std::unique_ptr<RecordStore> s(new RecordStore());
    s->path_ = path;
    s->mode_ = mode;
    s->fd_ = ::open(path.c_str(), (mode == OpenMode::read_write ? O_RDWR : O_RDONLY) | O_CLOEXEC);
    if (s->fd_ < 0) throw IoError("open store '" + path + "'", errno);

    std::array<std::byte, kBlockSize> header{};
    pread_all(s->fd_, header.data(), header.size(), 0, "read store header");
    if (std::memcmp(header.data(), kHeaderMagic.data(), kHeaderMagic.size()) != 0) {
        throw StoreError("'" + path + "' is not a store (bad magic)");
    }
    if (header[kHdrVersion] != std::byte{kStoreFormatVersion}) throw StoreError("unsupported store format version");
    if (load_le<std::uint32_t>(header.data() + kChecksumOffset) !=
        crc32(std::span(header).first(kChecksumOffset))) {
        throw StoreError("store header checksum mismatch");
    }
    const auto schema_len = load_le<std::uint32_t>(header.data() + kHdrSchemaLen);
    if (schema_len > kMaxSchemaText) throw StoreError("corrupt store header");
    s->schema_ = std::make_unique<Schema>(parse_schema(
        std::string_view(reinterpret_cast<const char*>(header.data() + kHdrSchemaText), schema_len)));
    const auto stored_hash = load_le<std::uint64_t>(header.data() + kHdrSchemaHash);
    if (stored_hash != s->schema_->layout_hash()) throw StoreError("store header schema hash mismatch");
    if (expected && expected->layout_hash() != stored_hash) {
        throw StoreError("schema '" + expected->name() + "' does not match the schema stored in '" + path + "'");
    }

    s->record_size_ = load_le<std::uint32_t>(header.data() + kHdrRecordSize);
    s->options_.rolling_count = load_le<std::uint32_t>(header.data() + kHdrRollingCount);
    s->capacity_ = load_le<std::uint64_t>(header.data() + kHdrCapacity);
    s->options_.partition_index = load_le<std::uint32_t>(header.data() + kHdrPartitionIndex);
    s->options_.partition_count = load_le<std::uint32_t>(header.data() + kHdrPartitionCount);
    s->record_offset_ = load_le<std::uint64_t>(header.data() + kHdrRecordOffset);
    s->ctime_offset_ = load_le<std::uint64_t>(header.data() + kHdrCtimeOffset);
    const auto zone_count = std::min<std::uint32_t>(load_le<std::uint32_t>(header.data() + kHdrZoneCount), kMaxZones);
    for (std::uint32_t i = 0; i < zone_count; ++i) {
        s->zones_.push_back(Zone{load_le<std::uint64_t>(header.data() + kHdrZones + i * 16),
                                 load_le<std::uint64_t>(header.data() + kHdrZones + i * 16 + 8)});
    }
    if (s->record_size_ != s->schema_->record_size() || s->capacity_ == 0 || s->options_.rolling_count == 0) {
        throw StoreError("corrupt store header");
    }
    s->file_size_ = file_size_for(s->record_size_, s->capacity_, s->options_.rolling_count);
    if (device_size(s->fd_) < s->file_size_) throw StoreError("store file is truncated");

    s->load_best_metadata();
    s->map_file();
    s->exclude_overwritten();
    return s;
}

// A batch written after the chosen metadata copy may already have overwritten
// the oldest slots of its window. Those slots hold records newer than the
// copy's max_time; keep them out of the live window until appends refill them.
void RecordStore::exclude_overwritten() {
    const std::uint64_t end = total();
    if (end == 0) return;
    const EpochMicros max_time = metadata().max_time;
    const auto max_ctime = CompositeTime::try_from_epoch(max_time);
    std::uint64_t seq = end > capacity_ ? end - capacity_ : 0;
    std::uint64_t skipped = 0;
    while (seq < end && (time_at(seq) > max_time || (max_ctime && *max_ctime < ctime_at(seq)))) {
        ++seq;
        ++skipped;
    }
    if (skipped > 0) reserved_end_.store(end + skipped, std::memory_order_release);
}

void RecordStore::load_best_metadata() {
    std::optional<BlockMetadata> best;
    std::array<std::byte, kBlockSize> block{};
    for (std::uint32_t i = 0; i < options_.rolling_count; ++i) {
        pread_all(fd_, block.data(), block.size(), metadata_offset(i), "read metadata");
        auto m = decode_metadata(block);
        if (!m || m->schema_hash != schema_->layout_hash() || m->record_size != record_size_) continue;
        if (!best || m->generation > best->generation) best = m;
    }
    if (!best) throw StoreError("no valid metadata copy in '" + path_ + "'");
    {
        std::lock_guard lock(meta_mutex_);
        meta_ = *best;
    }
    reserved_end_.store(best->record_count_total, std::memory_order_relaxed);
    published_total_.store(best->record_count_total, std::memory_order_release);
}

bool RecordStore::refresh() {
    const std::uint64_t before = total();
    load_best_metadata();
    exclude_overwritten();
    return total() != before;
}

void RecordStore::map_file() {
    map_len_ = static_cast<std::size_t>(file_size_);
    void* p = ::mmap(nullptr, map_len_, PROT_READ, MAP_SHARED, fd_, 0);
    if (p == MAP_FAILED) throw IoError("map store '" + path_ + "'", errno);
    map_ = static_cast<std::byte*>(p);
}

RecordStore::~RecordStore() {
    if (map_) ::munmap(map_, map_len_);
    if (fd_ >= 0) {
        if (mode_ == OpenMode::read_write) ::fdatasync(fd_);
        ::close(fd_);
    }
}

std::uint64_t RecordStore::generation() const noexcept {
    std::lock_guard lock(meta_mutex_);
    return meta_.generation;
}

BlockMetadata RecordStore::metadata() const {
    std::lock_guard lock(meta_mutex_);
    return meta_;
}

std::uint64_t RecordStore::append_batch(std::span<const std::span<const std::byte>> records,
                                        std::span<const CompositeTime> ctimes) {
    if (ctimes.size() != records.size()) throw StoreError("append_batch: one composite time per record required");
    return append_impl(records, ctimes);
}

std::uint64_t RecordStore::append_batch(std::span<const std::byte> records) {
    if (records.size() % record_size_ != 0) throw StoreError("append_batch: buffer is not a whole number of records");
    const std::size_t n = records.size() / record_size_;
    std::vector<std::span<const std::byte>> views(n);
    std::vector<CompositeTime> ctimes(n);
    for (std::size_t i = 0; i < n; ++i) {
        views[i] = records.subspan(i * record_size_, record_size_);
        ctimes[i] = CompositeTime::from_epoch(read_time(*schema_, views[i]));
    }
    return append_impl(views, ctimes);
}

std::uint64_t RecordStore::append_impl(std::span<const std::span<const std::byte>> records,
                                       std::span<const CompositeTime> ctimes) {
    if (mode_ != OpenMode::read_write) throw StoreError("store opened read-only");
    const std::uint64_t first = total();
    if (records.empty()) return first;

    EpochMicros prev = first > 0 ? meta_.max_time : 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].size() != record_size_) throw StoreError("append_batch: record has wrong size");
        const EpochMicros t = read_time(*schema_, records[i]);
        if (t < prev) throw StoreError("append_batch: records must be non-decreasing in time");
        prev = t;
    }
    const std::size_t n = records.size();
    if (n > capacity_) throw StoreError("append_batch: batch larger than store capacity");

    // Announce the overwrite before touching any slot so concurrent readers
    // can detect it.
    reserved_end_.store(std::max(reserved_end_.load(std::memory_order_relaxed), first + n),
                        std::memory_order_relaxed);
    std::atomic_thread_fence(std::memory_order_seq_cst);

    std::vector<std::uint64_t> ctime_words(n);
    for (std::size_t i = 0; i < n; ++i) store_le(reinterpret_cast<std::byte*>(&ctime_words[i]), ctimes[i].bits());

    std::size_t done = 0;
    while (done < n) {
        const std::uint64_t slot = (first + done) % capacity_;
        const std::size_t run = static_cast<std::size_t>(std::min<std::uint64_t>(n - done, capacity_ - slot));
        std::vector<iovec> iov(run);
        for (std::size_t i = 0; i < run; ++i) {
            iov[i].iov_base = const_cast<std::byte*>(records[done + i].data());
            iov[i].iov_len = record_size_;
        }
        pwritev_all(fd_, iov, record_offset_ + slot * record_size_);
        pwrite_all(fd_, reinterpret_cast<const std::byte*>(ctime_words.data() + done), run * sizeof(std::uint64_t),
                   ctime_offset_ + slot * sizeof(std::uint64_t), "write composite times");
        done += run;
    }

    const std::uint64_t new_total = first + n;
    {
        std::lock_guard lock(meta_mutex_);
        meta_.generation += 1;
        meta_.record_count_total = new_total;
        meta_.head = new_total % capacity_;
        meta_.wrapped = new_total > capacity_;
        meta_.max_time = read_time(*schema_, records.back());
        const std::uint64_t oldest = new_total > capacity_ ? new_total - capacity_ : 0;
        meta_.min_time = oldest >= first ? read_time(*schema_, records[oldest - first])
                                         : load_le<std::uint64_t>(map_ + record_offset_ +
                                                                  (oldest % capacity_) * record_size_ +
                                                                  schema_->time_field().offset);
    }
    write_metadata_locked();
    if (options_.sync_each_batch && ::fdatasync(fd_) != 0) throw IoError("sync store", errno);

    published_total_.store(new_total, std::memory_order_release);
    return first;
}

void RecordStore::write_metadata_locked() {
    std::array<std::byte, kBlockSize> block{};
    BlockMetadata m;
    {
        std::lock_guard lock(meta_mutex_);
        m = meta_;
    }
    encode_metadata(m, block);
    const auto copy = static_cast<std::uint32_t>(m.generation % options_.rolling_count);
    pwrite_all(fd_, block.data(), block.size(), metadata_offset(copy), "write metadata");
}

void RecordStore::sync() {
    if (mode_ == OpenMode::read_write && ::fdatasync(fd_) != 0) throw IoError("sync store", errno);
}

RecordRange RecordStore::live_window() const noexcept {
    const std::uint64_t end = total();
    const std::uint64_t reach = std::max(end, reserved_end_.load(std::memory_order_acquire));
    return {std::min(end, reach > capacity_ ? reach - capacity_ : 0), end};
}

bool RecordStore::is_live(std::uint64_t seq) const noexcept {
    std::atomic_thread_fence(std::memory_order_acquire);
    const std::uint64_t reserved = reserved_end_.load(std::memory_order_relaxed);
    const std::uint64_t end = total();
    return seq < end && seq + capacity_ >= std::max(reserved, end);
}

const std::byte* RecordStore::record_ptr(std::uint64_t seq) const noexcept {
    return map_ + record_offset_ + (seq % capacity_) * record_size_;
}

CompositeTime RecordStore::ctime_at(std::uint64_t seq) const noexcept {
    return CompositeTime::from_bits(load_le<std::uint64_t>(map_ + ctime_offset_ + (seq % capacity_) * 8));
}

EpochMicros RecordStore::time_at(std::uint64_t seq) const noexcept {
    return load_le<std::uint64_t>(record_ptr(seq) + schema_->time_field().offset);
}

bool RecordStore::try_read(std::uint64_t seq, std::span<std::byte> out, CompositeTime* ctime) const noexcept {
    if (out.size() < record_size_ || !is_live(seq)) return false;
    std::memcpy(out.data(), record_ptr(seq), record_size_);
    if (ctime) *ctime = ctime_at(seq);
    count_storage_reads(1);
    return is_live(seq);
}

std::vector<std::byte> RecordStore::read_at(std::uint64_t seq) const {
    std::vector<std::byte> out(record_size_);
    if (!try_read(seq, out)) {
        const RecordRange live = live_window();
        throw StoreError("record " + std::to_string(seq) + " is outside the live window [" +
                         std::to_string(live.begin) + ", " + std::to_string(live.end) + ")");
    }
    return out;
}

} // namespace ltss
