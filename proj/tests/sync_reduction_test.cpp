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
#include <tuple>

#include <gtest/gtest.h>

#include "emq/oracle.hpp"
#include "emq/rng.hpp"
#include "emq/simon.hpp"
#include "emq/sync_reduction.hpp"

namespace emq {
namespace {

struct Check {
    double tv = 0;
    double residue = 0;
    std::uint64_t original_queries = 0;
    std::uint64_t compiled_queries = 0;
};

Check compile_and_compare(const QueryAlgorithm& a, std::uint32_t N, Rng& rng) {
    std::vector<PermutationOracle> os;
    for (std::uint32_t b = 0; b < N; ++b) os.push_back(PermutationOracle::random(Ambient{a.layout.p, a.layout.query_digits}, rng));
    std::vector<std::span<const std::uint32_t>> tables;
    for (const auto& o : os) tables.emplace_back(o.table());

    const CompiledAlgorithm c = compile_to_sync(a, N);
    EXPECT_EQ(c.compiled.model, QueryModel::kSynchronized);
    EXPECT_EQ(c.query_map.size(), a.query_count());
    EXPECT_EQ(c.sandwich_ends.size(), a.query_count());

    Check out;
    SimOptions opts;
    opts.observer = [&](std::size_t stage, const StateVector& s) {
        if (std::find(c.sandwich_ends.begin(), c.sandwich_ends.end(), stage) != c.sandwich_ends.end()) {
            out.residue = std::max(out.residue, answer_block_residue(s, c.compiled.layout));
        }
    };
    const RunResult r = run(c.compiled, tables, opts);
    const Distribution got{c.compiled.outcome_space(), r.state.marginal(c.compiled.measured)};
    out.tv = tv_distance(output_distribution(a, tables), got);
    out.original_queries = a.query_count();
    out.compiled_queries = r.queries;
    return out;
}

TEST(SyncReductionTest, RandomCircuitsMatchWithTwiceTheQueries) {
    for (auto [p, n, N] : std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>>{{2, 3, 2}, {2, 2, 3}, {3, 1, 3}}) {
        Rng rng(40 + p * 10 + N);
        for (int c = 0; c < 8; ++c) {
            const auto a = random_standard_circuit(RandomCircuitParams{p, n, 1, 1, 2, 3}, rng);
            const Check k = compile_and_compare(a, N, rng);
            EXPECT_LE(k.tv, 1e-9);
            EXPECT_LE(k.residue, 1e-9);
            EXPECT_EQ(k.compiled_queries, 2 * k.original_queries);
        }
    }
}

TEST(SyncReductionTest, QueryFreeCircuitIsUnchanged) {
    Rng rng(3);
    RandomCircuitParams params;
    params.max_queries = 0;
    const auto a = random_standard_circuit(params, rng);
    ASSERT_EQ(a.query_count(), 0u);
    const Check k = compile_and_compare(a, 2, rng);
    EXPECT_EQ(k.tv, 0.0);
    EXPECT_EQ(k.compiled_queries, 0u);
}

TEST(SyncReductionTest, SimonCircuitCompiles) {
    // No selector: every call addresses O_0.
    Rng rng(8);
    const Check k = compile_and_compare(simon_circuit(2, 3), 3, rng);
    EXPECT_LE(k.tv, 1e-9);
    EXPECT_LE(k.residue, 1e-9);
    EXPECT_EQ(k.compiled_queries, 2u);
}

TEST(SyncReductionTest, RejectsBadInputs) {
    Rng rng(1);
    const auto a = random_standard_circuit(RandomCircuitParams{3, 1, 1, 1, 1, 2}, rng);
    EXPECT_THROW(compile_to_sync(a, 0), std::invalid_argument);
    EXPECT_THROW(compile_to_sync(a, 2), std::invalid_argument);  // selector ranges over 3 oracles
    EXPECT_THROW(compile_to_sync(sum_combine_circuit(2, 2, 2), 2), std::invalid_argument);
}

TEST(TvDistanceTest, Basics) {
    const Distribution a{4, {0.5, 0.5, 0, 0}};
    const Distribution b{4, {0, 0.5, 0.5, 0}};
    EXPECT_DOUBLE_EQ(tv_distance(a, a), 0.0);
    EXPECT_DOUBLE_EQ(tv_distance(a, b), 0.5);
    EXPECT_THROW(tv_distance(a, Distribution{2, {1, 0}}), std::invalid_argument);
}

}  // namespace
}  // namespace emq
