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

#include <complex>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace emq {

enum class QueryModel { kStandard, kSynchronized };

std::string to_string(QueryModel m);
QueryModel query_model_from_string(const std::string& s);

/// Contiguous digits [begin, begin + len).
struct Range {
    std::uint32_t begin = 0;
    std::uint32_t len = 0;

    std::uint32_t end() const { return begin + len; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Digit order: [selector][query x][answer block 0]...[answer block B-1][work].
/// Every answer block is query_digits wide.
struct RegisterLayout {
    std::uint32_t p = 2;
    std::uint32_t selector_digits = 0;
    std::uint32_t query_digits = 0;
    std::uint32_t answer_blocks = 1;
    std::uint32_t work_digits = 0;

    std::uint32_t total_digits() const {
        return selector_digits + query_digits * (1 + answer_blocks) + work_digits;
    }
    Range selector() const { return {0, selector_digits}; }
    Range query() const { return {selector_digits, query_digits}; }
    Range block(std::uint32_t b) const {
        return {selector_digits + query_digits * (1 + b), query_digits};
    }
    Range work() const { return {selector_digits + query_digits * (1 + answer_blocks), work_digits}; }

    friend bool operator==(const RegisterLayout&, const RegisterLayout&) = default;
};

/// Per-digit Fourier transform over Z_p on digits [begin, end).
struct QftGate {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    bool inverse = false;
};

/// Row-major p^k x p^k unitary on the listed digits (first listed digit most
/// significant). At most kMaxDenseDigits digits.
struct DenseGate {
    std::vector<std::uint32_t> digits;
    std::vector<std::complex<double>> matrix;
};

/// Basis permutation v -> table[v] on the sub-register formed by the digits.
struct PermutationGate {
    std::vector<std::uint32_t> digits;
    std::vector<std::uint64_t> table;
};

/// target += sign * source, digitwise mod p.
struct AddGate {
    Range source;
    Range target;
    int sign = 1;
};

/// target += sign * block[s], where s is the selector value. Selector values
/// with no block act as the identity.
struct SelectAddGate {
    Range selector;
    std::uint32_t blocks_begin = 0;
    std::uint32_t block_len = 0;
    std::uint32_t count = 0;
    std::uint32_t target_begin = 0;
    int sign = 1;
};

/// target += sign * min(block codes).
struct BlockMinGate {
    std::uint32_t blocks_begin = 0;
    std::uint32_t block_len = 0;
    std::uint32_t count = 0;
    std::uint32_t target_begin = 0;
    int sign = 1;
};

/// One oracle query; the inverse variant subtracts the answers.
struct OracleCall {
    bool inverse = false;
};

using Stage = std::variant<QftGate, DenseGate, PermutationGate, AddGate, SelectAddGate, BlockMinGate, OracleCall>;

inline constexpr std::uint32_t kMaxDenseDigits = 12;
inline constexpr int kCircuitSchemaVersion = 1;

/// A T-query algorithm: stages interleaving unitaries with oracle calls,
/// the measured digits and the accepting outcomes. An outcome is the code of
/// the measured digits read in listed order, first digit most significant.
struct QueryAlgorithm {
    RegisterLayout layout;
    QueryModel model = QueryModel::kStandard;
    std::vector<Stage> stages;
    std::vector<std::uint32_t> measured;
    std::vector<std::uint64_t> accept;

    std::uint64_t query_count() const;
    std::uint64_t outcome_space() const;
    /// Throws std::invalid_argument on any malformed stage, including (when
    /// requested) a dense matrix that is not unitary within 1e-9.
    void validate(bool check_unitarity = true) const;
};

/// Digits a stage reads or writes under the given model.
std::vector<std::uint32_t> touched_digits(const Stage& s, const RegisterLayout& layout, QueryModel model);

/// Accept set with every nonzero outcome.
std::vector<std::uint64_t> nonzero_outcomes(std::uint64_t space);

nlohmann::json to_json(const QueryAlgorithm& alg);
QueryAlgorithm query_algorithm_from_json(const nlohmann::json& j);

}  // namespace emq
