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
#include <utility>
#include <vector>

#include "emq/circuit.hpp"
#include "emq/simulator.hpp"

namespace emq {

class Rng;

struct CompiledAlgorithm {
    QueryAlgorithm original;
    QueryAlgorithm compiled;
    /// For original call t, the ordinals of its two compiled calls.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> query_map;
    /// Compiled stage indices that close a query/copy/uncompute sandwich.
    std::vector<std::size_t> sandwich_ends;
};

/// Rewrites a standard-model algorithm for the synchronized model with N
/// answer blocks. Layout: [selector][query][N blocks][original answer and
/// work]. Each call becomes call, selector-indexed copy, inverse call.
CompiledAlgorithm compile_to_sync(const QueryAlgorithm& a, std::uint32_t N);

/// Half the L1 distance. Throws std::invalid_argument on a space mismatch.
double tv_distance(const Distribution& a, const Distribution& b);

/// Probability mass on basis states whose synchronized answer blocks are not
/// all zero.
double answer_block_residue(const StateVector& s, const RegisterLayout& layout);

struct RandomCircuitParams {
    std::uint32_t p = 2;
    std::uint32_t n = 3;
    std::uint32_t selector_digits = 1;
    std::uint32_t work_digits = 1;
    std::uint32_t max_queries = 2;
    std::uint32_t gates_per_layer = 3;
};

/// A random standard-model circuit with 0..max_queries calls separated by
/// layers of random QFT, permutation, dense and add gates.
QueryAlgorithm random_standard_circuit(const RandomCircuitParams& params, Rng& rng);

}  // namespace emq
