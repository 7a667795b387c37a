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

#include "emq/circuit.hpp"
#include "emq/group.hpp"
#include "emq/oracle.hpp"
#include "emq/simulator.hpp"

namespace emq {

// Sampling circuits. Each measures the query register after a final QFT,
// so an outcome is a dual vector z.

/// Standard model, one function: QFT, query, QFT.
QueryAlgorithm simon_circuit(std::uint32_t p, std::uint32_t n);

/// Synchronized model over `blocks` answer blocks. One query leaves the last
/// block holding sum_b O_b(x) and the other blocks in an x-independent state.
QueryAlgorithm sum_combine_circuit(std::uint32_t p, std::uint32_t n, std::uint32_t blocks);

/// Synchronized model over `blocks` answer blocks plus an n-digit work
/// register. Writes min_b O_b(x) to work and uncomputes the blocks with a
/// second (inverse) query.
QueryAlgorithm min_combine_circuit(std::uint32_t p, std::uint32_t n, std::uint32_t blocks);

/// Draws dual vectors from the exact output distribution of a sampling
/// circuit. Each draw stands for one independent run of the circuit.
std::vector<GroupVector> draw_samples(const QueryAlgorithm& circuit, OracleTables tables, std::size_t m, Rng& rng);

/// One dual vector z for f; one query.
GroupVector simon_sample(std::span<const std::uint32_t> f, std::uint32_t p, std::uint32_t n, Rng& rng);

struct SimonRun {
    std::vector<GroupVector> samples;
    Subgroup candidate;
    std::uint64_t queries = 0;
};

/// m samples and their common nullspace.
SimonRun simon_run(std::span<const std::uint32_t> f, std::uint32_t p, std::uint32_t n, std::size_t m,
                   std::uint64_t seed);
Subgroup simon_solve(std::span<const std::uint32_t> f, std::uint32_t p, std::uint32_t n, std::size_t m,
                     std::uint64_t seed);

/// Generalized Simon on an oracle sequence via the min-combine circuit.
/// Two queries per sample.
SimonRun gs_run(const OracleSequence& o, std::size_t m, std::uint64_t seed);
Subgroup gs_solve(const OracleSequence& o, std::size_t m, std::uint64_t seed);

struct KmOptions {
    std::size_t m = 0;
    bool allow_zero_inner_key = false;
    /// Candidate nullspaces above this dimension are reported as failures.
    std::uint32_t max_candidate_dim = 4;
};

struct AttackReport {
    std::optional<GroupVector> recovered_k1;
    std::optional<GroupVector> recovered_k2;
    std::uint64_t queries_used = 0;
    std::uint64_t classical_evaluations = 0;
    std::uint32_t candidate_dim = 0;
    std::vector<GroupVector> samples;
    bool success = false;
    std::uint64_t seed = 0;
};

/// Probe inputs used to accept a key candidate.
std::vector<Code> km_probe_points(std::uint32_t n);

/// Key recovery on an Even-Mansour instance: m synchronized queries to
/// (pi, EM), nullspace of the samples, candidate verification on the probes.
AttackReport km_attack(const EmInstance& inst, const KmOptions& opts, std::uint64_t seed);

/// The one-query distinguisher: uniform query, one synchronized call,
/// block 1 minus block 0 measured, accept any nonzero difference. Blocks 2
/// and up are Fourier-prepared and never read. Requires N >= 2.
QueryAlgorithm gdikem_distinguisher_1q(std::uint32_t p, std::uint32_t n, std::uint32_t N);

}  // namespace emq
