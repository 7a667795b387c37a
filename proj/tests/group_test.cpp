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

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "emq/group.hpp"
#include "emq/rng.hpp"
#include "test_support.hpp"

namespace emq {
namespace {

TEST(GroupVectorTest, ParseAndPrint) {
    const Ambient a{2, 3};
    const auto v = GroupVector::parse(a, "101");
    EXPECT_EQ(v.code(), 5u);
    EXPECT_EQ(v.to_string(), "101");
    EXPECT_EQ(GroupVector::from_code(a, 6).to_string(), "110");
    EXPECT_THROW(GroupVector::parse(a, "1012"), std::invalid_argument);
    EXPECT_THROW(GroupVector::parse(a, "10"), std::invalid_argument);

    const Ambient b{3, 2};
    const auto w = GroupVector::parse(b, "21");
    EXPECT_EQ(w.code(), 7u);
    EXPECT_EQ((w + w).to_string(), "12");
    EXPECT_EQ((-w).to_string(), "12");
    EXPECT_TRUE((w - w).is_zero());
    EXPECT_EQ(w.scaled(2), w + w);
}

TEST(GroupVectorTest, CodeOrderIsLexicographic) {
    const Ambient a{3, 3};
    for (Code c = 0; c + 1 < a.size(); ++c) {
        EXPECT_LT(GroupVector::from_code(a, c), GroupVector::from_code(a, c + 1));
    }
}

TEST(DigitArithmeticTest, AgreesWithVectors) {
    for (std::uint32_t p : {2u, 3u, 5u}) {
        const Ambient a{p, 3};
        const DigitArithmetic arith(a);
        for (Code x = 0; x < a.size(); x += 3) {
            for (Code y = 0; y < a.size(); y += 2) {
                const auto gx = GroupVector::from_code(a, x), gy = GroupVector::from_code(a, y);
                EXPECT_EQ(arith.add(x, y), (gx + gy).code());
                EXPECT_EQ(arith.sub(x, y), (gx - gy).code());
                EXPECT_EQ(arith.dot(x, y), gx.dot(gy));
            }
        }
    }
}

TEST(BetaTest, KnownValues) {
    EXPECT_EQ(beta(2, 3, 1), 7);
    EXPECT_EQ(beta(2, 3, 2), 7);
    EXPECT_EQ(beta(2, 4, 2), 35);
    EXPECT_EQ(beta(3, 3, 1), 13);
    EXPECT_EQ(beta(5, 4, 0), 1);
    EXPECT_EQ(beta(5, 4, 4), 1);
    EXPECT_THROW(beta(2, 3, 4), std::invalid_argument);
}

// Counting by closure, independent of echelon forms.
TEST(BetaTest, MatchesClosureEnumeration) {
    const std::vector<std::pair<std::uint32_t, std::uint32_t>> cases{{2, 1}, {2, 2}, {2, 3}, {2, 4}, {3, 1}, {3, 2}, {3, 3}};
    for (auto [p, n] : cases) {
        const auto all = testing_support::all_subgroups_by_closure(Ambient{p, n});
        for (std::uint32_t k = 0; k <= n; ++k) {
            const auto order = checked_pow(p, k);
            const auto count = std::count_if(all.begin(), all.end(), [&](const auto& s) { return s.size() == order; });
            EXPECT_EQ(BigInt(count), beta(p, n, k)) << "p=" << p << " n=" << n << " k=" << k;
            EXPECT_EQ(enumerate_subgroups(p, n, k).size(), static_cast<std::size_t>(count));
        }
    }
}

TEST(SubgroupTest, EnumerationMatchesClosureSets) {
    for (auto [p, n] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 3}, {3, 2}}) {
        const auto all = testing_support::all_subgroups_by_closure(Ambient{p, n});
        std::set<std::vector<Code>> ours;
        for (std::uint32_t k = 0; k <= n; ++k) {
            for (const auto& s : enumerate_subgroups(p, n, k)) {
                auto codes = s.element_codes();
                std::sort(codes.begin(), codes.end());
                ours.insert(codes);
            }
        }
        EXPECT_EQ(ours, std::set<std::vector<Code>>(all.begin(), all.end()));
    }
}

TEST(SubgroupTest, CanonicalBasisIsGeneratorIndependent) {
    const Ambient a{2, 3};
    const auto x = GroupVector::parse(a, "101"), y = GroupVector::parse(a, "011");
    const auto s1 = canonical_basis(a, std::vector<GroupVector>{x, y});
    const auto s2 = canonical_basis(a, std::vector<GroupVector>{y, x + y, x});
    EXPECT_EQ(s1, s2);
    EXPECT_EQ(s1.dim(), 2u);
    EXPECT_EQ(s1.to_string(), "span{101,011}");

    Rng rng(3);
    const Ambient b{3, 3};
    for (int t = 0; t < 50; ++t) {
        std::vector<GroupVector> gens;
        for (int j = 0; j < 3; ++j) gens.push_back(GroupVector::from_code(b, rng.below(b.size())));
        const auto s = canonical_basis(b, gens);
        std::vector<GroupVector> mixed;
        for (const auto& g : s.basis()) mixed.push_back(g.scaled(2) + s.basis().front());
        mixed.push_back(s.basis().empty() ? GroupVector::zero(b) : s.basis().back());
        if (rank(b, mixed) == s.dim()) EXPECT_EQ(canonical_basis(b, mixed), s);
    }
}

TEST(SubgroupTest, ElementIndexRoundTrip) {
    for (const auto& k : enumerate_subgroups(3, 3, 2)) {
        const auto codes = k.element_codes();
        ASSERT_EQ(codes.size(), 9u);
        for (std::uint64_t i = 0; i < codes.size(); ++i) {
            const auto v = GroupVector::from_code(k.ambient(), codes[i]);
            EXPECT_EQ(k.index_of(v), static_cast<std::int64_t>(i));
            EXPECT_TRUE(k.contains(v));
        }
        EXPECT_EQ(codes[0], 0u);
    }
    const auto k = enumerate_subgroups(2, 3, 1).front();
    for (Code c = 0; c < 8; ++c) {
        const auto v = GroupVector::from_code(k.ambient(), c);
        EXPECT_EQ(k.contains(v), k.index_of(v) >= 0);
    }
}

TEST(SubgroupTest, IndexSystemIsLinear) {
    const Subgroup k = enumerate_subgroups(3, 3, 2)[4];
    for (std::uint64_t i = 0; i < 9; ++i) {
        for (std::uint64_t j = 0; j < 9; ++j) {
            const auto ii = IndexVector::from_index(3, 2, i), jj = IndexVector::from_index(3, 2, j);
            EXPECT_EQ(k.element_at(ii + jj), k.element_at(ii) + k.element_at(jj));
        }
    }
}

TEST(CosetTest, RepresentativesAreCosetMinima) {
    for (auto [p, n] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 3}, {2, 4}, {3, 2}}) {
        const Ambient a{p, n};
        for (std::uint32_t d = 0; d <= n; ++d) {
            for (const auto& k : enumerate_subgroups(p, n, d)) {
                const auto reps = coset_representative_codes(k);
                const auto elems = k.element_codes();
                const DigitArithmetic arith(a);
                std::set<Code> expected;
                for (Code x = 0; x < a.size(); ++x) {
                    Code lo = x;
                    for (auto e : elems) lo = std::min(lo, arith.add(x, e));
                    expected.insert(lo);
                }
                EXPECT_EQ(std::set<Code>(reps.begin(), reps.end()), expected);
                EXPECT_EQ(reps.size(), a.size() / k.order());
            }
        }
    }
}

TEST(CosetTest, QuotientCoordinatesSeparateCosets) {
    const Ambient a{3, 3};
    const Subgroup k = enumerate_subgroups(3, 3, 1)[7];
    for (Code x = 0; x < a.size(); ++x) {
        for (Code y = 0; y < a.size(); ++y) {
            const auto gx = GroupVector::from_code(a, x), gy = GroupVector::from_code(a, y);
            EXPECT_EQ(k.quotient_coordinates(gx) == k.quotient_coordinates(gy), k.contains(gx - gy));
        }
        EXPECT_EQ(k.quotient_coordinates(GroupVector::from_code(a, x)).ambient(), (Ambient{3, 2}));
    }
}

TEST(SigmaTest, GroupAction) {
    for (auto [p, d] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 0}, {2, 2}, {3, 2}}) {
        const auto D = checked_pow(p, d);
        const auto id = sigma_perm(p, d, 0);
        for (std::uint64_t j = 0; j < D; ++j) EXPECT_EQ(id[j], j);
        for (std::uint64_t i = 0; i < D; ++i) {
            const auto si = sigma_perm(p, d, i);
            std::vector<std::uint64_t> sorted = si;
            std::sort(sorted.begin(), sorted.end());
            for (std::uint64_t j = 0; j < D; ++j) EXPECT_EQ(sorted[j], j);
            for (std::uint64_t l = 0; l < D; ++l) {
                const auto sl = sigma_perm(p, d, l);
                const auto sil = sigma_perm(IndexVector::from_index(p, d, i) + IndexVector::from_index(p, d, l));
                for (std::uint64_t j = 0; j < D; ++j) EXPECT_EQ(sl[si[j]], sil[j]);
            }
        }
    }
    // p = 2, d = 2: sigma_1 swaps 0<->1 and 2<->3.
    EXPECT_EQ(sigma_perm(2, 2, 1), (std::vector<std::uint64_t>{1, 0, 3, 2}));
    EXPECT_EQ(sigma_perm(2, 2, 3), (std::vector<std::uint64_t>{3, 2, 1, 0}));
}

TEST(NullspaceTest, MatchesBruteForce) {
    Rng rng(11);
    for (std::uint32_t p : {2u, 3u}) {
        const Ambient a{p, 3};
        for (int t = 0; t < 30; ++t) {
            std::vector<GroupVector> samples;
            const auto m = rng.below(4);
            for (std::uint64_t j = 0; j < m; ++j) samples.push_back(GroupVector::from_code(a, rng.below(a.size())));
            const Subgroup ns = nullspace_dual(a, samples);
            for (Code x = 0; x < a.size(); ++x) {
                const auto v = GroupVector::from_code(a, x);
                const bool orth = std::all_of(samples.begin(), samples.end(), [&](const auto& z) { return z.dot(v) == 0; });
                EXPECT_EQ(ns.contains(v), orth);
            }
        }
    }
}

TEST(RandomSubgroupTest, UniformOverSubgroups) {
    // 7 subgroups of order 2 in Z_2^3; chi-square with 6 degrees of freedom.
    Rng rng(5);
    const Ambient a{2, 3};
    const auto subs = enumerate_subgroups(2, 3, 1);
    std::vector<double> counts(subs.size(), 0);
    const int draws = 7000;
    for (int t = 0; t < draws; ++t) {
        const auto k = random_subgroup(a, 1, rng);
        const auto it = std::find(subs.begin(), subs.end(), k);
        ASSERT_NE(it, subs.end());
        counts[it - subs.begin()] += 1;
    }
    EXPECT_LT(testing_support::chi_square(counts), 22.46);  // p = 0.001
}

TEST(GroupErrorsTest, RejectsBadInput) {
    EXPECT_THROW(Ambient({4, 2}).validate(), std::invalid_argument);
    EXPECT_THROW(enumerate_subgroups(2, 3, 4), std::invalid_argument);
    EXPECT_THROW(GroupVector(Ambient{3, 2}, {1, 3}), std::invalid_argument);
    EXPECT_THROW(GroupVector::parse(Ambient{2, 2}, "1x"), std::invalid_argument);
}

}  // namespace
}  // namespace emq
