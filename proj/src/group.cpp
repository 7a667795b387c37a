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

#include "emq/group.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "emq/rng.hpp"

namespace emq {

namespace {

std::uint32_t inverse_mod(std::uint32_t a, std::uint32_t p) {
    // Fermat; p is prime and small.
    std::uint64_t result = 1, base = a % p;
    for (std::uint32_t e = p - 2; e > 0; e >>= 1) {
        if (e & 1) result = result * base % p;
        base = base * base % p;
    }
    return static_cast<std::uint32_t>(result);
}

struct Echelon {
    std::vector<std::vector<std::uint32_t>> rows;
    std::vector<std::uint32_t> pivots;
};

// Gauss-Jordan elimination over GF(p). Rows come back normalized (pivot 1),
// with zeros above and below every pivot.
Echelon row_reduce(std::uint32_t p, std::uint32_t n, std::vector<std::vector<std::uint32_t>> m) {
    Echelon out;
    std::size_t r = 0;
    for (std::uint32_t c = 0; c < n && r < m.size(); ++c) {
        std::size_t sel = r;
        while (sel < m.size() && m[sel][c] == 0) ++sel;
        if (sel == m.size()) continue;
        std::swap(m[r], m[sel]);
        const std::uint32_t inv = inverse_mod(m[r][c], p);
        for (auto& v : m[r]) v = static_cast<std::uint32_t>(std::uint64_t{v} * inv % p);
        for (std::size_t q = 0; q < m.size(); ++q) {
            if (q == r || m[q][c] == 0) continue;
            const std::uint32_t f = m[q][c];
            for (std::uint32_t j = 0; j < n; ++j) {
                m[q][j] = static_cast<std::uint32_t>((m[q][j] + std::uint64_t{p - f} * m[r][j]) % p);
            }
        }
        out.pivots.push_back(c);
        ++r;
    }
    m.resize(r);
    out.rows = std::move(m);
    return out;
}

void require_ambient(const Ambient& a, const GroupVector& v) {
    if (!(v.ambient() == a)) throw std::invalid_argument("vector ambient mismatch");
}

}  // namespace

std::uint64_t checked_pow(std::uint64_t base, std::uint32_t exp) {
    std::uint64_t r = 1;
    for (std::uint32_t i = 0; i < exp; ++i) {
        if (base != 0 && r > (std::uint64_t{1} << 62) / base) {
            throw std::overflow_error("checked_pow overflow");
        }
        r *= base;
    }
    return r;
}

bool is_prime(std::uint32_t p) {
    if (p < 2) return false;
    for (std::uint32_t q = 2; q * q <= p; ++q) {
        if (p % q == 0) return false;
    }
    return true;
}

void Ambient::validate() const {
    if (!is_prime(p)) throw std::invalid_argument("p must be prime, got " + std::to_string(p));
}

DigitArithmetic::DigitArithmetic(std::uint32_t p, std::uint32_t len)
    : p_(p), len_(len), size_(checked_pow(p, len)) {
    pow_.resize(len + 1);
    pow_[0] = 1;
    for (std::uint32_t k = 1; k <= len; ++k) pow_[k] = pow_[k - 1] * p;
}

Code DigitArithmetic::add(Code a, Code b) const {
    if (p_ == 2) return a ^ b;
    Code out = 0;
    for (std::uint32_t k = 0; k < len_; ++k) {
        const std::uint64_t s = (a % p_ + b % p_) % p_;
        out += s * pow_[k];
        a /= p_;
        b /= p_;
    }
    return out;
}

Code DigitArithmetic::sub(Code a, Code b) const {
    if (p_ == 2) return a ^ b;
    Code out = 0;
    for (std::uint32_t k = 0; k < len_; ++k) {
        const std::uint64_t s = (a % p_ + p_ - b % p_) % p_;
        out += s * pow_[k];
        a /= p_;
        b /= p_;
    }
    return out;
}

Code DigitArithmetic::scale(Code a, std::uint32_t s) const {
    Code out = 0;
    for (std::uint32_t k = 0; k < len_; ++k) {
        out += (a % p_) * s % p_ * pow_[k];
        a /= p_;
    }
    return out;
}

std::uint32_t DigitArithmetic::dot(Code a, Code b) const {
    std::uint64_t acc = 0;
    for (std::uint32_t k = 0; k < len_; ++k) {
        acc += (a % p_) * (b % p_);
        a /= p_;
        b /= p_;
    }
    return static_cast<std::uint32_t>(acc % p_);
}

GroupVector::GroupVector(Ambient ambient, std::vector<std::uint32_t> coords)
    : ambient_(ambient), coords_(std::move(coords)) {
    if (coords_.size() != ambient_.n) throw std::invalid_argument("coordinate count != n");
    for (auto c : coords_) {
        if (c >= ambient_.p) throw std::invalid_argument("coordinate out of range");
    }
}

GroupVector GroupVector::zero(Ambient ambient) {
    return GroupVector(ambient, std::vector<std::uint32_t>(ambient.n, 0));
}

GroupVector GroupVector::from_code(Ambient ambient, Code code) {
    if (code >= ambient.size()) throw std::out_of_range("code outside Z_p^n");
    std::vector<std::uint32_t> c(ambient.n);
    for (std::uint32_t k = ambient.n; k-- > 0;) {
        c[k] = static_cast<std::uint32_t>(code % ambient.p);
        code /= ambient.p;
    }
    return GroupVector(ambient, std::move(c));
}

GroupVector GroupVector::parse(Ambient ambient, std::string_view text) {
    std::vector<std::uint32_t> c;
    if (text.find(',') != std::string_view::npos) {
        std::string item;
        std::istringstream in{std::string(text)};
        while (std::getline(in, item, ',')) c.push_back(static_cast<std::uint32_t>(std::stoul(item)));
    } else {
        for (char ch : text) {
            if (ch < '0' || ch > '9') throw std::invalid_argument("bad digit in vector literal");
            c.push_back(static_cast<std::uint32_t>(ch - '0'));
        }
    }
    return GroupVector(ambient, std::move(c));
}

Code GroupVector::code() const {
    Code out = 0;
    for (auto c : coords_) out = out * ambient_.p + c;
    return out;
}

bool GroupVector::is_zero() const {
    return std::all_of(coords_.begin(), coords_.end(), [](auto c) { return c == 0; });
}

std::string GroupVector::to_string() const {
    std::string s;
    for (std::size_t k = 0; k < coords_.size(); ++k) {
        if (ambient_.p > 10 && k > 0) s += ',';
        s += std::to_string(coords_[k]);
    }
    return s;
}

void GroupVector::require_same(const GroupVector& o) const {
    if (!(ambient_ == o.ambient_)) throw std::invalid_argument("vector ambient mismatch");
}

GroupVector GroupVector::operator+(const GroupVector& o) const {
    require_same(o);
    GroupVector r = *this;
    for (std::size_t k = 0; k < coords_.size(); ++k) r.coords_[k] = (coords_[k] + o.coords_[k]) % ambient_.p;
    return r;
}

GroupVector GroupVector::operator-(const GroupVector& o) const {
    require_same(o);
    GroupVector r = *this;
    for (std::size_t k = 0; k < coords_.size(); ++k) {
        r.coords_[k] = (coords_[k] + ambient_.p - o.coords_[k]) % ambient_.p;
    }
    return r;
}

GroupVector GroupVector::operator-() const { return zero(ambient_) - *this; }

GroupVector GroupVector::scaled(std::uint32_t s) const {
    GroupVector r = *this;
    for (auto& c : r.coords_) c = static_cast<std::uint32_t>(std::uint64_t{c} * s % ambient_.p);
    return r;
}

std::uint32_t GroupVector::dot(const GroupVector& o) const {
    require_same(o);
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < coords_.size(); ++k) acc += std::uint64_t{coords_[k]} * o.coords_[k];
    return static_cast<std::uint32_t>(acc % ambient_.p);
}

IndexVector::IndexVector(std::uint32_t p, std::vector<std::uint32_t> digits)
    : p_(p), digits_(std::move(digits)) {
    for (auto d : digits_) {
        if (d >= p_) throw std::invalid_argument("index digit out of range");
    }
}

IndexVector IndexVector::from_index(std::uint32_t p, std::uint32_t d, std::uint64_t index) {
    if (index >= checked_pow(p, d)) throw std::out_of_range("index outside I");
    std::vector<std::uint32_t> digits(d);
    for (std::uint32_t k = d; k-- > 0;) {
        digits[k] = static_cast<std::uint32_t>(index % p);
        index /= p;
    }
    return IndexVector(p, std::move(digits));
}

std::uint64_t IndexVector::index() const {
    std::uint64_t out = 0;
    for (auto d : digits_) out = out * p_ + d;
    return out;
}

IndexVector IndexVector::operator+(const IndexVector& o) const {
    if (p_ != o.p_ || digits_.size() != o.digits_.size()) {
        throw std::invalid_argument("index dimension mismatch");
    }
    IndexVector r = *this;
    for (std::size_t k = 0; k < digits_.size(); ++k) r.digits_[k] = (digits_[k] + o.digits_[k]) % p_;
    return r;
}

Subgroup Subgroup::trivial(Ambient ambient) { return Subgroup(ambient, {}, {}); }

Subgroup Subgroup::full(Ambient ambient) {
    std::vector<GroupVector> gens;
    for (std::uint32_t k = 0; k < ambient.n; ++k) {
        std::vector<std::uint32_t> c(ambient.n, 0);
        c[k] = 1;
        gens.emplace_back(ambient, std::move(c));
    }
    return canonical_basis(ambient, gens);
}

GroupVector Subgroup::element_at(const IndexVector& i) const {
    if (i.dim() != dim() || i.p() != ambient_.p) throw std::invalid_argument("index dimension mismatch");
    GroupVector acc = GroupVector::zero(ambient_);
    for (std::uint32_t j = 0; j < dim(); ++j) {
        if (i.digits()[j] != 0) acc = acc + basis_[j].scaled(i.digits()[j]);
    }
    return acc;
}

GroupVector Subgroup::element_at(std::uint64_t index) const {
    return element_at(IndexVector::from_index(ambient_.p, dim(), index));
}

std::vector<Code> Subgroup::element_codes() const {
    const std::uint64_t order = this->order();
    std::vector<Code> out(order);
    for (std::uint64_t i = 0; i < order; ++i) out[i] = element_at(i).code();
    return out;
}

GroupVector Subgroup::reduce(const GroupVector& v) const {
    require_ambient(ambient_, v);
    GroupVector r = v;
    for (std::size_t j = 0; j < basis_.size(); ++j) {
        const std::uint32_t f = r[pivots_[j]];
        if (f != 0) r = r - basis_[j].scaled(f);
    }
    return r;
}

bool Subgroup::contains(const GroupVector& v) const { return reduce(v).is_zero(); }

bool Subgroup::contains_code(Code c) const { return contains(GroupVector::from_code(ambient_, c)); }

std::int64_t Subgroup::index_of(const GroupVector& v) const {
    if (!contains(v)) return -1;
    std::uint64_t idx = 0;
    for (auto piv : pivots_) idx = idx * ambient_.p + v[piv];
    return static_cast<std::int64_t>(idx);
}

bool Subgroup::is_subgroup_of(const Subgroup& other) const {
    return std::all_of(basis_.begin(), basis_.end(), [&](const auto& g) { return other.contains(g); });
}

GroupVector Subgroup::quotient_coordinates(const GroupVector& v) const {
    const GroupVector r = reduce(v);
    std::vector<std::uint32_t> c;
    std::size_t next = 0;
    for (std::uint32_t k = 0; k < ambient_.n; ++k) {
        if (next < pivots_.size() && pivots_[next] == k) {
            ++next;
            continue;
        }
        c.push_back(r[k]);
    }
    return GroupVector(Ambient{ambient_.p, ambient_.n - dim()}, std::move(c));
}

std::string Subgroup::to_string() const {
    std::string s = "span{";
    for (std::size_t j = 0; j < basis_.size(); ++j) {
        if (j) s += ",";
        s += basis_[j].to_string();
    }
    return s + "}";
}

bool operator<(const Subgroup& a, const Subgroup& b) {
    if (a.dim() != b.dim()) return a.dim() < b.dim();
    return a.basis_ < b.basis_;
}

Subgroup canonical_basis(Ambient ambient, std::span<const GroupVector> generators) {
    ambient.validate();
    std::vector<std::vector<std::uint32_t>> m;
    for (const auto& g : generators) {
        require_ambient(ambient, g);
        m.emplace_back(g.coords().begin(), g.coords().end());
    }
    Echelon e = row_reduce(ambient.p, ambient.n, std::move(m));
    std::vector<GroupVector> basis;
    for (auto& row : e.rows) basis.emplace_back(ambient, std::move(row));
    return Subgroup(ambient, std::move(basis), std::move(e.pivots));
}

std::vector<std::uint64_t> sigma_perm(const IndexVector& i) {
    const std::uint64_t count = checked_pow(i.p(), i.dim());
    std::vector<std::uint64_t> out(count);
    for (std::uint64_t j = 0; j < count; ++j) {
        out[j] = (i + IndexVector::from_index(i.p(), i.dim(), j)).index();
    }
    return out;
}

std::vector<std::uint64_t> sigma_perm(std::uint32_t p, std::uint32_t d, std::uint64_t i) {
    return sigma_perm(IndexVector::from_index(p, d, i));
}

std::vector<Code> coset_representative_codes(const Subgroup& k) {
    // The reduced vector of a coset is its lexicographic minimum, so the
    // representatives are exactly the vectors vanishing on every pivot.
    const Ambient& a = k.ambient();
    const std::uint32_t free = a.n - k.dim();
    const std::uint64_t count = checked_pow(a.p, free);
    if (count > (std::uint64_t{1} << 32)) throw std::length_error("too many coset representatives");
    std::vector<std::uint32_t> free_cols;
    for (std::uint32_t c = 0, next = 0; c < a.n; ++c) {
        if (next < k.pivots().size() && k.pivots()[next] == c) {
            ++next;
        } else {
            free_cols.push_back(c);
        }
    }
    DigitArithmetic arith(a);
    std::vector<std::uint64_t> weight(free);
    for (std::uint32_t j = 0; j < free; ++j) weight[j] = checked_pow(a.p, a.n - 1 - free_cols[j]);
    std::vector<Code> out(count);
    for (std::uint64_t q = 0; q < count; ++q) {
        std::uint64_t rest = q;
        Code c = 0;
        for (std::uint32_t j = free; j-- > 0;) {
            c += (rest % a.p) * weight[j];
            rest /= a.p;
        }
        out[q] = c;
    }
    return out;
}

std::vector<GroupVector> coset_representatives(const Subgroup& k) {
    std::vector<GroupVector> out;
    for (Code c : coset_representative_codes(k)) out.push_back(GroupVector::from_code(k.ambient(), c));
    return out;
}

std::vector<Subgroup> enumerate_subgroups(std::uint32_t p, std::uint32_t n, std::uint32_t d) {
    const Ambient ambient{p, n};
    ambient.validate();
    if (d > n) throw std::invalid_argument("subgroup dimension exceeds n");
    if (ambient.size() > kSubgroupEnumerationCap) {
        throw std::length_error("enumerate_subgroups: p^n exceeds cap");
    }
    std::vector<Subgroup> out;
    // Walk every pivot set, then every filling of the free entries of the
    // reduced echelon form. Each subgroup has exactly one such form.
    std::vector<std::uint32_t> piv(d);
    for (std::uint32_t j = 0; j < d; ++j) piv[j] = j;
    while (true) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> slots;  // (row, col)
        for (std::uint32_t r = 0; r < d; ++r) {
            for (std::uint32_t c = piv[r] + 1; c < n; ++c) {
                if (std::find(piv.begin(), piv.end(), c) == piv.end()) slots.emplace_back(r, c);
            }
        }
        const std::uint64_t fills = checked_pow(p, static_cast<std::uint32_t>(slots.size()));
        for (std::uint64_t f = 0; f < fills; ++f) {
            std::vector<std::vector<std::uint32_t>> rows(d, std::vector<std::uint32_t>(n, 0));
            for (std::uint32_t r = 0; r < d; ++r) rows[r][piv[r]] = 1;
            std::uint64_t rest = f;
            for (const auto& [r, c] : slots) {
                rows[r][c] = static_cast<std::uint32_t>(rest % p);
                rest /= p;
            }
            std::vector<GroupVector> gens;
            for (auto& row : rows) gens.emplace_back(ambient, std::move(row));
            out.push_back(canonical_basis(ambient, gens));
        }
        // Next d-combination of {0..n-1}.
        std::int64_t j = static_cast<std::int64_t>(d) - 1;
        while (j >= 0 && piv[j] == n - d + static_cast<std::uint32_t>(j)) --j;
        if (j < 0) break;
        ++piv[j];
        for (std::uint32_t q = static_cast<std::uint32_t>(j) + 1; q < d; ++q) piv[q] = piv[q - 1] + 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

Subgroup random_subgroup(Ambient ambient, std::uint32_t d, Rng& rng) {
    ambient.validate();
    if (d > ambient.n) throw std::invalid_argument("subgroup dimension exceeds n");
    // A uniformly random ordered basis spans a uniformly random subgroup:
    // every subgroup of order p^d has the same number of ordered bases.
    std::vector<GroupVector> gens;
    while (gens.size() < d) {
        std::vector<std::uint32_t> c(ambient.n);
        for (auto& x : c) x = static_cast<std::uint32_t>(rng.below(ambient.p));
        gens.emplace_back(ambient, std::move(c));
        if (canonical_basis(ambient, gens).dim() != gens.size()) gens.pop_back();
    }
    return canonical_basis(ambient, gens);
}

BigInt beta(std::uint32_t p, std::uint32_t n, std::uint32_t k) {
    if (k > n) throw std::invalid_argument("beta: k > n");
    BigInt num = 1, den = 1;
    for (std::uint32_t i = 0; i < k; ++i) {
        num *= boost::multiprecision::pow(BigInt(p), n - i) - 1;
        den *= boost::multiprecision::pow(BigInt(p), k - i) - 1;
    }
    return num / den;
}

Subgroup nullspace_dual(Ambient ambient, std::span<const GroupVector> samples) {
    ambient.validate();
    std::vector<std::vector<std::uint32_t>> m;
    for (const auto& z : samples) {
        require_ambient(ambient, z);
        m.emplace_back(z.coords().begin(), z.coords().end());
    }
    const Echelon e = row_reduce(ambient.p, ambient.n, std::move(m));
    std::vector<GroupVector> gens;
    std::size_t next = 0;
    for (std::uint32_t f = 0; f < ambient.n; ++f) {
        if (next < e.pivots.size() && e.pivots[next] == f) {
            ++next;
            continue;
        }
        std::vector<std::uint32_t> v(ambient.n, 0);
        v[f] = 1;
        for (std::size_t r = 0; r < e.rows.size(); ++r) {
            v[e.pivots[r]] = (ambient.p - e.rows[r][f]) % ambient.p;
        }
        gens.emplace_back(ambient, std::move(v));
    }
    return canonical_basis(ambient, gens);
}

std::uint32_t rank(Ambient ambient, std::span<const GroupVector> vectors) {
    return canonical_basis(ambient, vectors).dim();
}

Rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(BigInt(text));
    const BigInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(BigInt(text.substr(0, slash)), den);
}

}  // namespace emq
