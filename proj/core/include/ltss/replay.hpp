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

#include "ltss/datasets.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ltss {

enum class RateMode : std::uint8_t {
    fidelity, ///< original inter-arrival gaps from source timestamps
    fixed,    ///< `rate` records per second
    max,      ///< back to back
};

enum class OooMode : std::uint8_t { none, fixed, random };

struct ReplaySpec {
    RateMode rate_mode = RateMode::max;
    double rate = 0.0;    ///< records/s for RateMode::fixed
    double speedup = 1.0; ///< fidelity: gaps divided by this
    /// Rewrite the primary time to the wall clock at the record's nominal
    /// send time. Delayed records therefore arrive with older stamps.
    bool restamp = false;

    OooMode ooo = OooMode::none;
    std::uint32_t ooo_ratio = 0; ///< one in K records delayed; 0 disables
    double fixed_delay_ms = 80.0;
    double random_lo_ms = 1.0;
    double random_hi_ms = 100.0;
    std::uint64_t seed = 42;

    std::uint32_t senders = 1; ///< sender threads, records split round robin

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

/// Per-record hold time in microseconds; 0 for records sent on time. With a
/// ratio K every K-th record (indices K-1, 2K-1, ...) is delayed, so a run
/// of n records delays exactly floor(n / K). Deterministic for a seed.
std::vector<EpochMicros> delay_schedule(std::size_t count, const ReplaySpec& spec);

/// Nominal send offset of each record from the start of the run.
std::vector<EpochMicros> nominal_offsets(const Dataset& data, const ReplaySpec& spec);

struct Emission {
    std::size_t index = 0;    ///< record in the dataset
    EpochMicros nominal = 0;  ///< when it would have been sent
    EpochMicros emit = 0;     ///< nominal + hold
};

/// The full send order, sorted by emit time (ties keep dataset order).
std::vector<Emission> plan_emissions(const Dataset& data, const ReplaySpec& spec);

struct ReplayStats {
    std::uint64_t sent = 0;
    std::uint64_t send_errors = 0;
    std::uint64_t delayed = 0;
    double seconds = 0.0;
    double achieved_rate() const noexcept { return seconds > 0 ? static_cast<double>(sent) / seconds : 0.0; }
};

/// Sends every record as one UDP datagram to host:ports (records spread
/// over ports round robin). `stop` ends the run early.
ReplayStats replay(const Dataset& data, const ReplaySpec& spec, const std::string& host,
                   const std::vector<std::uint16_t>& ports, const std::atomic<bool>* stop = nullptr);

/// Wall clock in epoch microseconds.
EpochMicros wall_clock_micros() noexcept;

} // namespace ltss
