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

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

#include <gtest/gtest.h>

#include "emq/oracle.hpp"
#include "emq/rng.hpp"
#include "emq/simon.hpp"
#include "emq/simulator.hpp"
#include "emq/statevector.hpp"
#include "emq/sync_reduction.hpp"
#include "test_support.hpp"

namespace emq {
namespace {

namespace ts = testing_support;

void randomize(StateVector& s, Rng& rng) {
    double norm = 0;
    for (auto& a : s.amplitudes()) {
        a = {rng.uniform01() - 0.5, rng.uniform01() - 0.5};
        norm += std::norm(a);
    }
    for (auto& a : s.amplitudes()) a /= std::sqrt(norm);
}

double max_diff(const StateVector& a, const StateVector& b) {
    double m = 0;
    for (std::uint64_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::vector<std::span<const std::uint32_t>> spans(const std::vector<PermutationOracle>& os) {
    std::vector<std::span<const std::uint32_t>> out;
    for (const auto& o : os) out.emplace_back(o.table());
    return out;
}

TEST(StateVectorTest, StartsInZeroAndRespectsCap) {
    StateVector s(3, 2);
    EXPECT_EQ(s.size(), 9u);
    EXPECT_EQ(s[0], Amplitude(1.0));
    EXPECT_DOUBLE_EQ(s.norm_squared(), 1.0);
    EXPECT_THROW(StateVector(2, 30, 1u << 20), std::length_error);
}

TEST(StateVectorTest, RegisterReadWrite) {
    StateVector s(3, 4);
    // index 2*27 + 1*9 + 0*3 + 2 = 65
    EXPECT_EQ(s.read(65, Range{0, 2}), 7u);
    EXPECT_EQ(s.read(65, Range{2, 2}), 2u);
    EXPECT_EQ(s.write(65, Range{1, 2}, 5), 2u * 27 + 1 * 9 + 2 * 3 + 2);
    EXPECT_EQ(s.digit(65, 0), 2u);
}

TEST(QftTest, MatchesCharacterFormula) {
    for (std::uint32_t p : {2u, 3u, 5u}) {
        const std::uint32_t n = p == 5 ? 2 : 3;
        const std::uint64_t size = checked_pow(p, n);
        for (Code x = 0; x < size; ++x) {
            StateVector s(p, n);
            s.set_basis(x);
            s.apply_qft(0, n);
            const GroupVector gx = GroupVector::from_code(Ambient{p, n}, x);
            for (Code y = 0; y < size; ++y) {
                const GroupVector gy = GroupVector::from_code(Ambient{p, n}, y);
                const double angle = 2 * std::numbers::pi * gx.dot(gy) / p;
                const Amplitude want = std::polar(std::pow(p, -0.5 * n), angle);
                EXPECT_NEAR(std::abs(s[y] - want), 0.0, 1e-12) << p << ' ' << x << ' ' << y;
            }
        }
    }
}

TEST(QftTest, InverseUndoesForward) {
    Rng rng(5);
    for (std::uint32_t p : {2u, 3u}) {
        StateVector s(p, 4);
        randomize(s, rng);
        const StateVector orig = s;
        s.apply_qft(1, 3);
        EXPECT_GT(max_diff(s, orig), 1e-3);
        s.apply_qft(1, 3, true);
        EXPECT_LT(max_diff(s, orig), 1e-12);
    }
}

TEST(OracleApplicationTest, StandardModelOnBasisStates) {
    const Ambient a{3, 1};
    Rng rng(2);
    const std::vector<PermutationOracle> os{PermutationOracle::random(a, rng), PermutationOracle::random(a, rng),
                                            PermutationOracle::random(a, rng)};
    const RegisterLayout L{3, 1, 1, 1, 0};
    const auto t = spans(os);
    for (std::uint64_t idx = 0; idx < 27; ++idx) {
        StateVector s(3, L.total_digits());
        s.set_basis(idx);
        apply_oracle_standard(s, L, t);
        const std::uint32_t i = idx / 9, x = idx / 3 % 3, y = idx % 3;
        const std::uint64_t want = i * 9 + x * 3 + (y + os[i](x)) % 3;
        EXPECT_NEAR(std::abs(s[want]), 1.0, 1e-15);
    }
    EXPECT_THROW(apply_oracle_standard(*std::make_unique<StateVector>(3, 3), L, std::span(t).first(2)),
                 std::invalid_argument);
}

TEST(OracleApplicationTest, SynchronizedUpdatesEveryBlock) {
    // Even-Mansour pair: blocks receive pi(x) and E(x) from one query.
    const auto inst = make_em_instance(3, 11);
    const std::vector<PermutationOracle> os{inst.pi, inst.em};
    const RegisterLayout L{2, 0, 3, 2, 0};
    for (Code x = 0; x < 8; ++x) {
        StateVector s(2, L.total_digits());
        const std::uint64_t idx = s.write(0, L.query(), x);
        s.set_basis(idx);
        apply_oracle_sync(s, L, spans(os));
        std::uint64_t want = s.write(idx, L.block(0), inst.pi(x));
        want = s.write(want, L.block(1), inst.em(x));
        EXPECT_NEAR(std::abs(s[want]), 1.0, 1e-15);
        EXPECT_EQ(inst.em(x), inst.pi(x ^ inst.k1.code()) ^ inst.k2.code());
    }
    StateVector s(2, L.total_digits());
    const auto all = spans(os);
    EXPECT_THROW(apply_oracle_sync(s, L, std::span(all).first(1)), std::invalid_argument);
}

TEST(OracleApplicationTest, OrderPAndInverse) {
    Rng rng(9);
    for (std::uint32_t p : {2u, 3u}) {
        const Ambient a{p, 2};
        const std::vector<PermutationOracle> os{PermutationOracle::random(a, rng), PermutationOracle::random(a, rng)};
        const RegisterLayout sync{p, 0, 2, 2, 1};
        StateVector s(p, sync.total_digits());
        randomize(s, rng);
        const StateVector orig = s;
        for (std::uint32_t k = 0; k < p; ++k) apply_oracle_sync(s, sync, spans(os));
        EXPECT_LT(max_diff(s, orig), 1e-12);
        apply_oracle_sync(s, sync, spans(os));
        EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
        apply_oracle_sync(s, sync, spans(os), true);
        EXPECT_LT(max_diff(s, orig), 1e-12);

        const std::vector<PermutationOracle> sel(p, os[0]);
        const RegisterLayout std_layout{p, 1, 2, 1, 0};
        StateVector t(p, std_layout.total_digits());
        randomize(t, rng);
        const StateVector torig = t;
        for (std::uint32_t k = 0; k < p; ++k) apply_oracle_standard(t, std_layout, spans(sel));
        EXPECT_LT(max_diff(t, torig), 1e-12);
    }
}

TEST(RunTest, RandomCircuitsPreserveNorm) {
    Rng rng(21);
    for (int c = 0; c < 20; ++c) {
        const auto alg = random_standard_circuit(RandomCircuitParams{3, 1, 1, 1, 3, 3}, rng);
        const std::vector<PermutationOracle> os{PermutationOracle::random(Ambient{3, 1}, rng),
                                                PermutationOracle::random(Ambient{3, 1}, rng),
                                                PermutationOracle::random(Ambient{3, 1}, rng)};
        const auto r = run(alg, spans(os));
        EXPECT_NEAR(r.state.norm_squared(), 1.0, 1e-9);
        EXPECT_EQ(r.queries, alg.query_count());
        const auto d = output_distribution(alg, spans(os));
        EXPECT_NEAR(d.total(), 1.0, 1e-9);
    }
}

TEST(RunTest, SampledRunsAreReproducible) {
    const auto alg = simon_circuit(2, 3);
    Rng rng(4);
    const auto f = PermutationOracle::random(Ambient{2, 3}, rng);
    const std::vector<std::span<const std::uint32_t>> t{f.table()};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = run_sampled(alg, t, seed);
        const auto b = run_sampled(alg, t, seed);
        EXPECT_EQ(a.value, b.value);
        EXPECT_EQ(a.accepted, b.accepted);
        EXPECT_EQ(a.queries, 1u);
    }
}

TEST(SimonCircuitTest, OutcomesAreOrthogonalToPeriod) {
    Rng rng(13);
    for (std::uint32_t p : {2u, 3u}) {
        const Ambient a{p, 2};
        for (Code kc = 1; kc < a.size(); ++kc) {
            const GroupVector k = GroupVector::from_code(a, kc);
            const auto f = ts::periodic_function(a, ts::closure(a, {kc}));
            const std::vector<std::span<const std::uint32_t>> t{f};
            const auto d = output_distribution(simon_circuit(p, 2), t);
            for (Code z = 0; z < a.size(); ++z) {
                const bool orth = GroupVector::from_code(a, z).dot(k) == 0;
                EXPECT_NEAR(d.probabilities[z], orth ? 1.0 / p : 0.0, 1e-12);
            }
        }
    }
}

TEST(InertReductionTest, SameDistributionAsFullSimulation) {
    Rng rng(17);
    const std::uint32_t N = 4;
    const auto alg = gdikem_distinguisher_1q(2, 2, N);
    const auto red = reduce_inert_blocks(alg);
    EXPECT_LT(red.kept_blocks.size(), N);
    EXPECT_LT(red.reduced.layout.total_digits(), alg.layout.total_digits());
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<PermutationOracle> os;
        for (std::uint32_t b = 0; b < N; ++b) os.push_back(PermutationOracle::random(Ambient{2, 2}, rng));
        const auto full = output_distribution(alg, spans(os));
        std::vector<std::span<const std::uint32_t>> kept;
        for (auto b : red.kept_blocks) kept.emplace_back(os[b].table());
        const auto small = output_distribution(red.reduced, kept);
        EXPECT_LT(tv_distance(full, small), 1e-12);
        EXPECT_NEAR(acceptance_probability(alg, full), acceptance_probability(red.reduced, small), 1e-12);
    }
}

TEST(CircuitValidationTest, RejectsMalformedStages) {
    QueryAlgorithm a;
    a.layout = RegisterLayout{2, 0, 2, 1, 0};
    a.stages = {QftGate{0, 9, false}};
    EXPECT_THROW(a.validate(), std::invalid_argument);
    a.stages = {DenseGate{{0}, {1.0, 1.0, 1.0, 1.0}}};
    EXPECT_THROW(a.validate(), std::invalid_argument);
    a.stages = {DenseGate{{0}, {0.0, 1.0, 1.0, 0.0}}};
    EXPECT_NO_THROW(a.validate());
}

TEST(CircuitJsonTest, RoundTrip) {
    Rng rng(3);
    const auto alg = random_standard_circuit(RandomCircuitParams{}, rng);
    const auto j = to_json(alg);
    EXPECT_EQ(to_json(query_algorithm_from_json(j)).dump(), j.dump());
}

}  // namespace
}  // namespace emq
