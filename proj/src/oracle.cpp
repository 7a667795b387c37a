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

#include "emq/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "emq/rng.hpp"

namespace emq {

namespace {

constexpr std::uint64_t kTableCap = std::uint64_t{1} << 26;

std::uint64_t table_size(const Ambient& a) {
    const std::uint64_t n = a.size();
    if (n > kTableCap) throw std::length_error("oracle table exceeds memory cap");
    return n;
}

std::vector<std::uint32_t> shifted_table(const PermutationOracle& o0, Code shift) {
    const DigitArithmetic arith(o0.ambient());
    std::vector<std::uint32_t> t(o0.size());
    for (Code x = 0; x < t.size(); ++x) t[x] = o0(arith.add(x, shift));
    return t;
}

}  // namespace

PermutationOracle::PermutationOracle(Ambient ambient, OracleTable table)
    : ambient_(ambient), table_(std::move(table)) {
    const std::uint64_t n = table_size(ambient_);
    if (table_.size() != n) throw std::invalid_argument("oracle table length != p^n");
    std::vector<bool> seen(n, false);
    for (auto y : table_) {
        if (y >= n || seen[y]) throw std::invalid_argument("oracle table is not a permutation");
        seen[y] = true;
    }
}

PermutationOracle PermutationOracle::identity(Ambient ambient) {
    OracleTable t(table_size(ambient));
    std::iota(t.begin(), t.end(), 0u);
    return PermutationOracle(ambient, std::move(t));
}

PermutationOracle PermutationOracle::random(Ambient ambient, Rng& rng) {
    OracleTable t(table_size(ambient));
    std::iota(t.begin(), t.end(), 0u);
    rng.shuffle(std::span<std::uint32_t>(t));
    return PermutationOracle(ambient, std::move(t));
}

GroupVector PermutationOracle::apply(const GroupVector& x) const {
    if (!(x.ambient() == ambient_)) throw std::invalid_argument("vector ambient mismatch");
    return GroupVector::from_code(ambient_, table_[x.code()]);
}

PermutationOracle PermutationOracle::inverse() const {
    OracleTable inv(table_.size());
    for (std::uint32_t x = 0; x < table_.size(); ++x) inv[table_[x]] = x;
    return PermutationOracle(ambient_, std::move(inv));
}

OracleSequence::OracleSequence(Ambient ambient, std::vector<PermutationOracle> oracles,
                               std::optional<Subgroup> hidden)
    : ambient_(ambient), oracles_(std::move(oracles)), hidden_(std::move(hidden)) {
    if (oracles_.empty()) throw std::invalid_argument("oracle sequence must be nonempty");
    for (const auto& o : oracles_) {
        if (!(o.ambient() == ambient_)) throw std::invalid_argument("oracle ambient mismatch");
    }
    if (hidden_) {
        if (!(hidden_->ambient() == ambient_) || hidden_->order() != oracles_.size()) {
            throw std::invalid_argument("hidden subgroup order != sequence length");
        }
        if (!hides(*this, *hidden_)) throw std::invalid_argument("sequence does not hide the given subgroup");
    }
}

std::vector<Code> OracleSequence::tuple_at(Code x) const {
    std::vector<Code> t(oracles_.size());
    for (std::size_t i = 0; i < oracles_.size(); ++i) t[i] = oracles_[i](x);
    return t;
}

std::vector<std::span<const std::uint32_t>> OracleSequence::tables() const {
    std::vector<std::span<const std::uint32_t>> out;
    for (const auto& o : oracles_) out.emplace_back(o.table());
    return out;
}

std::vector<std::span<const std::uint32_t>> PaddedSequence::tables() const {
    auto out = core.tables();
    for (const auto& o : padding) out.emplace_back(o.table());
    return out;
}

PermutationOracle complete_pi_K(const Subgroup& k, std::span<const std::uint32_t> rep_values) {
    const Ambient& a = k.ambient();
    const std::uint64_t n = table_size(a);
    const auto reps = coset_representative_codes(k);
    if (rep_values.size() != reps.size()) throw std::invalid_argument("need one value per coset representative");
    constexpr std::uint32_t kUnset = 0xFFFFFFFFu;
    OracleTable t(n, kUnset);
    std::vector<bool> used(n, false);
    for (std::size_t r = 0; r < reps.size(); ++r) {
        const std::uint32_t v = rep_values[r];
        if (v >= n || used[v]) throw std::invalid_argument("representative values must be distinct");
        used[v] = true;
        t[reps[r]] = v;
    }
    std::uint32_t next = 0;
    for (Code x = 0; x < n; ++x) {
        if (t[x] != kUnset) continue;
        while (used[next]) ++next;
        t[x] = next++;
    }
    return PermutationOracle(a, std::move(t));
}

PermutationOracle sample_pi_K(const Subgroup& k, Rng& rng) {
    const std::uint64_t n = table_size(k.ambient());
    const std::uint64_t m = n / k.order();
    // Partial Fisher-Yates: the first m entries are a uniform m-arrangement.
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::uint64_t i = 0; i < m; ++i) std::swap(pool[i], pool[i + rng.below(n - i)]);
    return complete_pi_K(k, std::span<const std::uint32_t>(pool.data(), m));
}

PermutationOracle sample_pi_K(const Subgroup& k, std::uint64_t seed) {
    Rng rng(seed);
    return sample_pi_K(k, rng);
}

BigInt pi_K_count(const Subgroup& k) {
    const std::uint64_t n = k.ambient().size();
    const std::uint64_t m = n / k.order();
    BigInt c = 1;
    for (std::uint64_t i = 0; i < m; ++i) c *= BigInt(n - i);
    return c;
}

bool in_pi_K(const Subgroup& k, const PermutationOracle& o) {
    const auto reps = coset_representative_codes(k);
    std::vector<std::uint32_t> vals;
    for (Code r : reps) vals.push_back(o(r));
    return complete_pi_K(k, vals) == o;
}

PiKEnumerator::PiKEnumerator(const Subgroup& k)
    : k_(k), size_(table_size(k.ambient())), slots_(size_ / k.order()) {}

std::optional<PermutationOracle> PiKEnumerator::next() {
    if (done_) return std::nullopt;
    if (!started_) {
        started_ = true;
        current_.resize(slots_);
        std::iota(current_.begin(), current_.end(), 0u);
        return complete_pi_K(k_, current_);
    }
    // Next arrangement in lexicographic order: bump the rightmost slot that
    // has a larger unused value, then refill the tail with the smallest.
    std::vector<bool> used(size_, false);
    for (auto v : current_) used[v] = true;
    for (std::size_t j = slots_; j-- > 0;) {
        used[current_[j]] = false;
        std::uint64_t cand = current_[j] + 1;
        while (cand < size_ && used[cand]) ++cand;
        if (cand < size_) {
            current_[j] = static_cast<std::uint32_t>(cand);
            used[cand] = true;
            std::uint32_t fill = 0;
            for (std::size_t q = j + 1; q < slots_; ++q) {
                while (used[fill]) ++fill;
                current_[q] = fill;
                used[fill] = true;
            }
            return complete_pi_K(k_, current_);
        }
    }
    done_ = true;
    return std::nullopt;
}

std::vector<PermutationOracle> enumerate_pi_K(const Subgroup& k) {
    if (pi_K_count(k) > kEnumerationCap) throw std::length_error("enumerate_pi_K: count exceeds cap");
    std::vector<PermutationOracle> out;
    PiKEnumerator it(k);
    while (auto o = it.next()) out.push_back(std::move(*o));
    return out;
}

OracleSequence build_sequence(const PermutationOracle& o0, const Subgroup& k) {
    if (!(o0.ambient() == k.ambient())) throw std::invalid_argument("ambient mismatch");
    std::vector<PermutationOracle> seq;
    for (Code ki : k.element_codes()) seq.emplace_back(o0.ambient(), shifted_table(o0, ki));
    return OracleSequence(o0.ambient(), std::move(seq), k);
}

bool hides(const OracleSequence& o, const Subgroup& k) {
    if (!(k.ambient() == o.ambient()) || k.order() != o.size()) return false;
    const DigitArithmetic arith(o.ambient());
    const auto ks = k.element_codes();
    const auto& o0 = o[0];
    for (std::size_t i = 0; i < ks.size(); ++i) {
        for (Code x = 0; x < o0.size(); ++x) {
            if (o[i](x) != o0(arith.add(x, ks[i]))) return false;
        }
    }
    return true;
}

std::optional<Subgroup> verify_hidden_subgroup(const OracleSequence& o) {
    const Ambient& a = o.ambient();
    std::uint32_t d = 0;
    try {
        d = log_p_exact(a.p, o.size());
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    if (d > a.n) return std::nullopt;
    // O_0 is injective, so k_i is forced to be O_0^{-1}(O_i(0)).
    const PermutationOracle inv = o[0].inverse();
    std::vector<GroupVector> ks;
    for (std::size_t i = 0; i < o.size(); ++i) ks.push_back(GroupVector::from_code(a, inv(o[i](0))));
    const Subgroup k = canonical_basis(a, ks);
    if (k.dim() != d) return std::nullopt;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (!(k.element_at(i) == ks[i])) return std::nullopt;
    }
    if (!hides(o, k) || !check_shift_equivalence(o, k).ok()) return std::nullopt;
    return k;
}

ShiftEquivalenceReport check_shift_equivalence(const OracleSequence& o, const Subgroup& k) {
    const Ambient& a = o.ambient();
    const DigitArithmetic arith(a);
    const std::uint64_t n = a.size();
    const std::uint64_t D = o.size();
    if (k.order() != D) throw std::invalid_argument("subgroup order != sequence length");
    const std::uint32_t d = k.dim();
    const auto ks = k.element_codes();

    std::vector<std::vector<Code>> tuples(n);
    for (Code x = 0; x < n; ++x) tuples[x] = o.tuple_at(x);
    std::vector<std::vector<std::uint64_t>> sigmas(D);
    for (std::uint64_t i = 0; i < D; ++i) sigmas[i] = sigma_perm(a.p, d, i);

    ShiftEquivalenceReport rep;
    std::vector<Code> shifted(D);
    for (Code x = 0; x < n; ++x) {
        for (std::uint64_t i = 0; i < D; ++i) {
            for (std::uint64_t j = 0; j < D; ++j) shifted[j] = tuples[x][sigmas[i][j]];
            const Code target = arith.add(x, ks[i]);
            for (Code xp = 0; xp < n; ++xp) {
                ++rep.checked;
                const bool lhs = xp == target;
                const bool rhs = tuples[xp] == shifted;
                if (lhs && !rhs) ++rep.forward_violations;
                if (rhs && !lhs) ++rep.converse_violations;
            }
        }
    }
    return rep;
}

std::uint32_t log_p_exact(std::uint32_t p, std::uint64_t d_value) {
    std::uint32_t d = 0;
    std::uint64_t v = 1;
    while (v < d_value) {
        v *= p;
        ++d;
    }
    if (v != d_value) throw std::invalid_argument("D must be a power of p");
    return d;
}

OracleSequence sample_F_D_star(std::uint32_t p, std::uint32_t n, std::uint64_t D, Rng& rng) {
    const Ambient a{p, n};
    a.validate();
    const std::uint32_t d = log_p_exact(p, D);
    if (d > n) throw std::invalid_argument("D exceeds p^n");
    const Subgroup k = random_subgroup(a, d, rng);
    return build_sequence(sample_pi_K(k, rng), k);
}

OracleSequence sample_F_D_star(std::uint32_t p, std::uint32_t n, std::uint64_t D, std::uint64_t seed) {
    Rng rng(seed);
    return sample_F_D_star(p, n, D, rng);
}

BigInt F_D_star_count(std::uint32_t p, std::uint32_t n, std::uint64_t D) {
    const std::uint32_t d = log_p_exact(p, D);
    if (d > n) throw std::invalid_argument("D exceeds p^n");
    const Ambient a{p, n};
    BigInt per = 1;
    const std::uint64_t size = a.size();
    for (std::uint64_t i = 0; i < size / D; ++i) per *= BigInt(size - i);
    return beta(p, n, d) * per;
}

FDStarEnumeration::FDStarEnumeration(std::uint32_t p, std::uint32_t n, std::uint64_t D)
    : count_(F_D_star_count(p, n, D)) {
    if (count_ > kEnumerationCap) throw std::length_error("F_D* enumeration exceeds cap");
    subgroups_ = enumerate_subgroups(p, n, log_p_exact(p, D));
    inner_.emplace(subgroups_[0]);
}

std::optional<OracleSequence> FDStarEnumeration::next() {
    while (sub_index_ < subgroups_.size()) {
        if (auto o0 = inner_->next()) return build_sequence(*o0, subgroups_[sub_index_]);
        if (sub_index_ + 1 == subgroups_.size()) return std::nullopt;
        ++sub_index_;
        inner_.emplace(subgroups_[sub_index_]);
    }
    return std::nullopt;
}

PaddedSequence pad_sequence(const OracleSequence& o, std::size_t N, Rng& rng) {
    if (N < o.size()) throw std::invalid_argument("N < D");
    PaddedSequence out{o, {}};
    for (std::size_t i = o.size(); i < N; ++i) out.padding.push_back(PermutationOracle::random(o.ambient(), rng));
    return out;
}

PaddedSequence pad_sequence(const OracleSequence& o, std::size_t N, std::uint64_t seed) {
    Rng rng(seed);
    return pad_sequence(o, N, rng);
}

EmInstance make_em_instance(const PermutationOracle& pi, const GroupVector& k1, const GroupVector& k2) {
    const Ambient& a = pi.ambient();
    if (a.p != 2) throw std::invalid_argument("Even-Mansour instances require p = 2");
    if (!(k1.ambient() == a) || !(k2.ambient() == a)) throw std::invalid_argument("key ambient mismatch");
    OracleTable em(pi.size());
    const Code c1 = k1.code(), c2 = k2.code();
    for (Code x = 0; x < em.size(); ++x) em[x] = static_cast<std::uint32_t>(pi(x ^ c1) ^ c2);
    return EmInstance{pi, k1, k2, PermutationOracle(a, std::move(em))};
}

EmInstance make_em_instance(std::uint32_t n, std::uint64_t seed, EmKeyPolicy policy) {
    const Ambient a{2, n};
    Rng rng(seed);
    PermutationOracle pi = PermutationOracle::random(a, rng);
    const std::uint64_t size = a.size();
    Code c1 = 0;
    if (policy.allow_zero_k1) {
        c1 = rng.below(size);
    } else {
        if (size < 2) throw std::invalid_argument("n = 0 admits no nonzero key");
        c1 = 1 + rng.below(size - 1);
    }
    const Code c2 = rng.below(size);
    return make_em_instance(pi, GroupVector::from_code(a, c1), GroupVector::from_code(a, c2));
}

namespace {

nlohmann::json header(const OracleSequence& o) {
    nlohmann::json j;
    j["p"] = o.ambient().p;
    j["n"] = o.ambient().n;
    j["D"] = o.size();
    if (o.hidden()) {
        nlohmann::json basis = nlohmann::json::array();
        for (const auto& g : o.hidden()->basis()) basis.push_back(g.to_string());
        j["hidden_basis"] = basis;
    }
    return j;
}

}  // namespace

nlohmann::json to_json(const OracleSequence& o) {
    PaddedSequence p{o, {}};
    return to_json(p);
}

nlohmann::json to_json(const PaddedSequence& o) {
    nlohmann::json j = header(o.core);
    nlohmann::json tables = nlohmann::json::array();
    for (auto t : o.tables()) tables.push_back(std::vector<std::uint32_t>(t.begin(), t.end()));
    j["tables"] = tables;
    return j;
}

PaddedSequence padded_sequence_from_json(const nlohmann::json& j) {
    const Ambient a{j.at("p").get<std::uint32_t>(), j.at("n").get<std::uint32_t>()};
    a.validate();
    const auto D = j.at("D").get<std::size_t>();
    const auto& tables = j.at("tables");
    if (tables.size() < D || D == 0) throw std::invalid_argument("tables must hold at least D >= 1 oracles");
    std::vector<PermutationOracle> core, pad;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        PermutationOracle o(a, tables[i].get<OracleTable>());
        (i < D ? core : pad).push_back(std::move(o));
    }
    std::optional<Subgroup> hidden;
    if (j.contains("hidden_basis")) {
        std::vector<GroupVector> gens;
        for (const auto& g : j["hidden_basis"]) gens.push_back(GroupVector::parse(a, g.get<std::string>()));
        hidden = canonical_basis(a, gens);
    }
    return PaddedSequence{OracleSequence(a, std::move(core), std::move(hidden)), std::move(pad)};
}

OracleSequence oracle_sequence_from_json(const nlohmann::json& j) {
    PaddedSequence p = padded_sequence_from_json(j);
    if (!p.padding.empty()) throw std::invalid_argument("expected an unpadded sequence");
    return p.core;
}

}  // namespace emq
