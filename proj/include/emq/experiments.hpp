// Copyright 2026 The emq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

namespace emq {

/// Exit codes of every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

inline constexpr int kReportSchemaVersion = 1;

/// Bad user input; maps to kExitConfig.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunContext {
    std::filesystem::path out_dir = ".";
    unsigned jobs = 1;
    bool timestamp = true;
    std::ostream* log = nullptr;  // human-readable summary, optional
};

/// EMQ_OUTPUT_DIR when set and non-empty, else ".".
std::filesystem::path default_output_dir();

/// fn(0..count-1) on a pool of `jobs` threads; results in index order. The
/// first exception thrown by any task is rethrown after the pool drains.
template <class R>
std::vector<R> parallel_map(std::size_t count, unsigned jobs, const std::function<R(std::size_t)>& fn) {
    std::vector<std::optional<R>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    std::vector<R> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

/// First line of every JSONL file.
nlohmann::json report_header(const std::string& schema, bool timestamp);

struct CommandResult {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> files;
    nlohmann::json summary;
};

struct AttackConfig {
    std::uint32_t n = 6;
    std::optional<std::uint64_t> m;  // defaults to n + 4
    std::uint64_t trials = 200;
    std::uint64_t seed = 1;
    bool allow_zero_k1 = false;
};
/// attack.jsonl (one record per trial) and attack.csv
/// (n, m, trials, success_rate, mean_queries, orthogonality_rate).
CommandResult cmd_attack(const AttackConfig& cfg, const RunContext& ctx);

struct SubgroupsConfig {
    std::vector<std::uint32_t> primes{2, 3};
    std::uint32_t n_max = 4;
    std::uint64_t cap = 4096;  // enumeration skipped (SKIPPED) above this many subgroups
};
/// subgroups.csv: p, n, k, beta, enumerated, status.
CommandResult cmd_subgroups(const SubgroupsConfig& cfg, const RunContext& ctx);

struct QDegreeConfig {
    std::uint32_t p = 2;
    std::uint32_t n = 3;
    std::optional<std::uint32_t> N;  // defaults to p^n
    std::vector<std::uint64_t> Ds;   // defaults to every p^d <= min(N, p^n)
    std::uint64_t corpus = 50;
    std::uint64_t seed = 1;
    double tolerance = 1e-6;
    std::uint64_t samples = 20000;
};
/// qdegree.json (degree report), qdegree.jsonl (one record per corpus
/// entry) and qdegree.csv (per check).
CommandResult cmd_qdegree(const QDegreeConfig& cfg, const RunContext& ctx);

struct BoundConfig {
    std::uint32_t p = 2;
    double epsilon = 1.0 / 3.0;
    std::uint32_t n_min = 8;
    std::uint32_t n_max = 256;
    std::uint32_t n_step = 8;
    std::optional<std::filesystem::path> gnuplot_script;
};
/// bound.csv: n, bound, branch; plus the optional plotting script.
CommandResult cmd_bound(const BoundConfig& cfg, const RunContext& ctx);

struct ReduceConfig {
    std::uint64_t circuits = 20;
    std::uint32_t p = 2;
    std::uint32_t n = 3;
    std::uint32_t N = 2;
    std::uint32_t max_queries = 2;
    std::uint64_t seed = 1;
    double tolerance = 1e-9;
};
/// reduce.jsonl (one record per circuit) and reduce.csv.
CommandResult cmd_reduce(const ReduceConfig& cfg, const RunContext& ctx);

/// Text of a gnuplot script plotting bound.csv.
std::string gnuplot_script(const std::string& csv_name, const BoundConfig& cfg);

}  // namespace emq
