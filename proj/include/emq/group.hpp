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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emq/exact.hpp"

namespace emq {

class Rng;

/// Integer code of a vector in Z_p^n: base-p digits, coordinate 0 most
/// significant, so code order is lexicographic order.
using Code = std::uint64_t;

/// base^exp; throws std::overflow_error past 2^62.
std::uint64_t checked_pow(std::uint64_t base, std::uint32_t exp);

bool is_prime(std::uint32_t p);

/// The group Z_p^n.
struct Ambient {
    std::uint32_t p = 2;
    std::uint32_t n = 0;

    std::uint64_t size() const { return checked_pow(p, n); }
    /// Throws std::invalid_argument unless p is prime.
    void validate() const;
    friend bool operator==(const Ambient&, const Ambient&) = default;
};

/// Digit-level arithmetic on codes of a fixed Z_p^len. Used on hot paths
/// where materializing GroupVector objects would dominate.
class DigitArithmetic {
public:
    DigitArithmetic(std::uint32_t p, std::uint32_t len);
    explicit DigitArithmetic(const Ambient& a) : DigitArithmetic(a.p, a.n) {}

    std::uint32_t p() const { return p_; }
    std::uint32_t length() const { return len_; }
    std::uint64_t size() const { return size_; }

    std::uint32_t digit(Code c, std::uint32_t i) const {
        return static_cast<std::uint32_t>((c / pow_[len_ - 1 - i]) % p_);
    }
    Code add(Code a, Code b) const;
    Code sub(Code a, Code b) const;
    Code neg(Code a) const { return sub(0, a); }
    Code scale(Code a, std::uint32_t s) const;
    std::uint32_t dot(Code a, Code b) const;

private:
    std::uint32_t p_;
    std::uint32_t len_;
    std::uint64_t size_;
    std::vector<std::uint64_t> pow_;  // pow_[k] = p^k
};

/// An element of Z_p^n.
class GroupVector {
public:
    GroupVector() = default;
    GroupVector(Ambient ambient, std::vector<std::uint32_t> coords);

    static GroupVector zero(Ambient ambient);
    static GroupVector from_code(Ambient ambient, Code code);
    /// Digit string such as "101" (p <= 10) or comma-separated residues.
    static GroupVector parse(Ambient ambient, std::string_view text);

    const Ambient& ambient() const { return ambient_; }
    std::span<const std::uint32_t> coords() const { return coords_; }
    std::uint32_t operator[](std::size_t i) const { return coords_[i]; }
    Code code() const;
    bool is_zero() const;
    std::string to_string() const;

    GroupVector operator+(const GroupVector& o) const;
    GroupVector operator-(const GroupVector& o) const;
    GroupVector operator-() const;
    GroupVector scaled(std::uint32_t s) const;
    /// Sum of coordinate products mod p.
    std::uint32_t dot(const GroupVector& o) const;

    friend bool operator==(const GroupVector&, const GroupVector&) = default;
    friend auto operator<=>(const GroupVector& a, const GroupVector& b) {
        return a.coords_ <=> b.coords_;
    }

private:
    void require_same(const GroupVector& o) const;

    Ambient ambient_{};
    std::vector<std::uint32_t> coords_;
};

/// i in I = Z_p^d. Identified with {0,...,p^d - 1} by reading the digits
/// base p, digit 0 most significant.
class IndexVector {
public:
    IndexVector() = default;
    IndexVector(std::uint32_t p, std::vector<std::uint32_t> digits);

    static IndexVector from_index(std::uint32_t p, std::uint32_t d, std::uint64_t index);

    std::uint32_t p() const { return p_; }
    std::uint32_t dim() const { return static_cast<std::uint32_t>(digits_.size()); }
    std::span<const std::uint32_t> digits() const { return digits_; }
    std::uint64_t index() const;

    IndexVector operator+(const IndexVector& o) const;
    friend bool operator==(const IndexVector&, const IndexVector&) = default;

private:
    std::uint32_t p_ = 2;
    std::vector<std::uint32_t> digits_;
};

/// A subgroup K <= Z_p^n held by its reduced row-echelon basis, pivots
/// strictly increasing. Two Subgroups compare equal iff they are the same set.
class Subgroup {
public:
    static Subgroup trivial(Ambient ambient);
    static Subgroup full(Ambient ambient);

    const Ambient& ambient() const { return ambient_; }
    const std::vector<GroupVector>& basis() const { return basis_; }
    const std::vector<std::uint32_t>& pivots() const { return pivots_; }
    std::uint32_t dim() const { return static_cast<std::uint32_t>(basis_.size()); }
    std::uint64_t order() const { return checked_pow(ambient_.p, dim()); }

    /// k_i = sum_j i_j g_j.
    GroupVector element_at(const IndexVector& i) const;
    GroupVector element_at(std::uint64_t index) const;
    /// Codes of k_0, ..., k_{D-1} in index order.
    std::vector<Code> element_codes() const;
    bool contains(const GroupVector& v) const;
    bool contains_code(Code c) const;
    /// Index of v in the index system, or -1 when v is not in K.
    std::int64_t index_of(const GroupVector& v) const;
    bool is_subgroup_of(const Subgroup& other) const;

    /// Coordinates of the coset v + K in Z_p^n / K, identified with
    /// Z_p^(n-d) through the non-pivot coordinates of the reduced vector.
    GroupVector quotient_coordinates(const GroupVector& v) const;
    /// Reduction of v modulo K: zero on every pivot coordinate.
    GroupVector reduce(const GroupVector& v) const;

    std::string to_string() const;

    friend bool operator==(const Subgroup& a, const Subgroup& b) {
        return a.ambient_ == b.ambient_ && a.basis_ == b.basis_;
    }
    friend bool operator<(const Subgroup& a, const Subgroup& b);

private:
    friend Subgroup canonical_basis(Ambient, std::span<const GroupVector>);
    Subgroup(Ambient ambient, std::vector<GroupVector> basis, std::vector<std::uint32_t> pivots)
        : ambient_(ambient), basis_(std::move(basis)), pivots_(std::move(pivots)) {}

    Ambient ambient_{};
    std::vector<GroupVector> basis_;
    std::vector<std::uint32_t> pivots_;
};

/// Span of the generators, in canonical form. Idempotent.
Subgroup canonical_basis(Ambient ambient, std::span<const GroupVector> generators);
inline Subgroup canonical_basis(Ambient ambient, const std::vector<GroupVector>& generators) {
    return canonical_basis(ambient, std::span<const GroupVector>(generators));
}

/// The permutation j -> i + j of I. Applied to a tuple t, (sigma_i t)_j = t_{i+j}.
std::vector<std::uint64_t> sigma_perm(const IndexVector& i);
std::vector<std::uint64_t> sigma_perm(std::uint32_t p, std::uint32_t d, std::uint64_t i);

/// Lexicographic minimum of each coset, sorted; c_0 = 0^n.
std::vector<GroupVector> coset_representatives(const Subgroup& k);
std::vector<Code> coset_representative_codes(const Subgroup& k);

inline constexpr std::uint64_t kSubgroupEnumerationCap = 4096;

/// All subgroups of order p^d, sorted. Requires p^n <= kSubgroupEnumerationCap.
std::vector<Subgroup> enumerate_subgroups(std::uint32_t p, std::uint32_t n, std::uint32_t d);

/// A uniformly random subgroup of order p^d.
Subgroup random_subgroup(Ambient ambient, std::uint32_t d, Rng& rng);

/// Number of subgroups of Z_p^n of order p^k.
BigInt beta(std::uint32_t p, std::uint32_t n, std::uint32_t k);

/// {k : z.k = 0 for all samples z}.
Subgroup nullspace_dual(Ambient ambient, std::span<const GroupVector> samples);
inline Subgroup nullspace_dual(Ambient ambient, const std::vector<GroupVector>& samples) {
    return nullspace_dual(ambient, std::span<const GroupVector>(samples));
}

/// Rank over GF(p) of the given vectors.
std::uint32_t rank(Ambient ambient, std::span<const GroupVector> vectors);

}  // namespace emq
