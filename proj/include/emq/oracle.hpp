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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "emq/group.hpp"
#include "json.hpp"

namespace emq {

/// Table of outputs; entry x is the code of O(x).
using OracleTable = std::vector<std::uint32_t>;

/// A bijection on Z_p^n stored as a full table.
class PermutationOracle {
public:
    PermutationOracle() = default;
    /// Throws std::invalid_argument if the table is not a bijection.
    PermutationOracle(Ambient ambient, OracleTable table);

    static PermutationOracle identity(Ambient ambient);
    static PermutationOracle random(Ambient ambient, Rng& rng);

    const Ambient& ambient() const { return ambient_; }
    const OracleTable& table() const { return table_; }
    std::size_t size() const { return table_.size(); }
    std::uint32_t operator()(Code x) const { return table_[x]; }
    GroupVector apply(const GroupVector& x) const;
    PermutationOracle inverse() const;

    friend bool operator==(const PermutationOracle&, const PermutationOracle&) = default;

private:
    Ambient ambient_{};
    OracleTable table_;
};

/// O = (O_0, ..., O_{D-1}), optionally with the subgroup it hides.
class OracleSequence {
public:
    OracleSequence() = default;
    /// When hidden is given, O_i(x) = O_0(x + k_i) is checked for every x, i.
    OracleSequence(Ambient ambient, std::vector<PermutationOracle> oracles,
                   std::optional<Subgroup> hidden = std::nullopt);

    const Ambient& ambient() const { return ambient_; }
    std::size_t size() const { return oracles_.size(); }
    const std::vector<PermutationOracle>& oracles() const { return oracles_; }
    const PermutationOracle& operator[](std::size_t i) const { return oracles_[i]; }
    const std::optional<Subgroup>& hidden() const { return hidden_; }

    /// The tuple O(x) = (O_0(x), ..., O_{D-1}(x)) as codes.
    std::vector<Code> tuple_at(Code x) const;
    std::vector<std::span<const std::uint32_t>> tables() const;

    friend bool operator==(const OracleSequence&, const OracleSequence&) = default;

private:
    Ambient ambient_{};
    std::vector<PermutationOracle> oracles_;
    std::optional<Subgroup> hidden_;
};

/// A length-D core followed by N - D unrelated permutations.
struct PaddedSequence {
    OracleSequence core;
    std::vector<PermutationOracle> padding;

    std::size_t total() const { return core.size() + padding.size(); }
    std::vector<std::span<const std::uint32_t>> tables() const;
};

/// An Even-Mansour instance over Z_2^n with its encryption table.
struct EmInstance {
    PermutationOracle pi;
    GroupVector k1;
    GroupVector k2;
    PermutationOracle em;  // em(x) = pi(x + k1) + k2

    std::uint32_t n() const { return pi.ambient().n; }
};

/// The member of Pi_K whose values at the coset representatives are
/// rep_values (in representative order). Remaining inputs, taken in
/// increasing order, receive the unused values in increasing order.
PermutationOracle complete_pi_K(const Subgroup& k, std::span<const std::uint32_t> rep_values);

/// Uniform member of Pi_K.
PermutationOracle sample_pi_K(const Subgroup& k, std::uint64_t seed);
PermutationOracle sample_pi_K(const Subgroup& k, Rng& rng);

/// |Pi_K| = p^n (p^n - 1) ... (p^n - N/D + 1).
BigInt pi_K_count(const Subgroup& k);

/// Whether the permutation lies in Pi_K.
bool in_pi_K(const Subgroup& k, const PermutationOracle& o);

inline constexpr std::uint64_t kEnumerationCap = 10'000'000;

/// Walks Pi_K in lexicographic order of the representative values.
class PiKEnumerator {
public:
    explicit PiKEnumerator(const Subgroup& k);
    std::optional<PermutationOracle> next();

private:
    Subgroup k_;
    std::uint64_t size_;
    std::size_t slots_;
    std::vector<std::uint32_t> current_;
    bool started_ = false;
    bool done_ = false;
};

/// All of Pi_K. Throws std::length_error past kEnumerationCap.
std::vector<PermutationOracle> enumerate_pi_K(const Subgroup& k);

/// (O_0(x + k_0), ..., O_0(x + k_{D-1})).
OracleSequence build_sequence(const PermutationOracle& o0, const Subgroup& k);

/// True iff O_i(x) = O_0(x + k_i) for every x and i.
bool hides(const OracleSequence& o, const Subgroup& k);

/// The subgroup hidden by O, if any.
std::optional<Subgroup> verify_hidden_subgroup(const OracleSequence& o);

struct ShiftEquivalenceReport {
    std::uint64_t checked = 0;             // (x, x', i) triples examined
    std::uint64_t forward_violations = 0;  // x' = x + k_i but O(x') != sigma_i O(x)
    std::uint64_t converse_violations = 0; // O(x') = sigma_i O(x) but x' != x + k_i
    bool ok() const { return forward_violations == 0 && converse_violations == 0; }
};

/// Exhaustive check of x' = x + k_i <=> O(x') = sigma_i O(x).
ShiftEquivalenceReport check_shift_equivalence(const OracleSequence& o, const Subgroup& k);

std::uint32_t log_p_exact(std::uint32_t p, std::uint64_t d_value);

/// Uniform member of F_D*: uniform K of order D, then uniform O_0 in Pi_K.
OracleSequence sample_F_D_star(std::uint32_t p, std::uint32_t n, std::uint64_t D, std::uint64_t seed);
OracleSequence sample_F_D_star(std::uint32_t p, std::uint32_t n, std::uint64_t D, Rng& rng);

BigInt F_D_star_count(std::uint32_t p, std::uint32_t n, std::uint64_t D);

/// Every member of F_D* exactly once, subgroup-major.
class FDStarEnumeration {
public:
    FDStarEnumeration(std::uint32_t p, std::uint32_t n, std::uint64_t D);
    std::optional<OracleSequence> next();
    const BigInt& count() const { return count_; }
    /// Subgroup of the sequence most recently returned.
    const Subgroup& current_subgroup() const { return subgroups_[sub_index_]; }

private:
    std::vector<Subgroup> subgroups_;
    std::size_t sub_index_ = 0;
    std::optional<PiKEnumerator> inner_;
    BigInt count_;
};

/// Appends N - D independent uniform permutations.
PaddedSequence pad_sequence(const OracleSequence& o, std::size_t N, std::uint64_t seed);
PaddedSequence pad_sequence(const OracleSequence& o, std::size_t N, Rng& rng);

struct EmKeyPolicy {
    bool allow_zero_k1 = false;
};

/// Uniform pi, k1, k2 over Z_2^n; k1 != 0 unless the policy allows it.
EmInstance make_em_instance(std::uint32_t n, std::uint64_t seed, EmKeyPolicy policy = {});
/// Instance with explicit keys.
EmInstance make_em_instance(const PermutationOracle& pi, const GroupVector& k1, const GroupVector& k2);

/// {p, n, D, hidden_basis?, tables}; D is the core length and tables may be
/// longer when padding is present.
nlohmann::json to_json(const OracleSequence& o);
nlohmann::json to_json(const PaddedSequence& o);
PaddedSequence padded_sequence_from_json(const nlohmann::json& j);
OracleSequence oracle_sequence_from_json(const nlohmann::json& j);

}  // namespace emq
