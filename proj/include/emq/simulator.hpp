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
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "emq/circuit.hpp"
#include "emq/statevector.hpp"

namespace emq {

class Rng;

/// One table per oracle; entry x is the code of O_i(x). Tables need not be
/// bijections, which lets Simon-type functions be queried directly.
using OracleTables = std::span<const std::span<const std::uint32_t>>;

struct SimOptions {
    std::uint64_t amplitude_cap = kDefaultAmplitudeCap;
    /// Called after every stage with the stage index.
    std::function<void(std::size_t, const StateVector&)> observer;
};

/// |i,x>|y> -> |i,x>|y + O_i(x)> on answer block 0.
void apply_oracle_standard(StateVector& s, const RegisterLayout& layout, OracleTables tables,
                           bool inverse = false);
/// |x>|y_0..y_{N-1}> -> |x>|y_0 + O_0(x), ..., y_{N-1} + O_{N-1}(x)>.
void apply_oracle_sync(StateVector& s, const RegisterLayout& layout, OracleTables tables,
                       bool inverse = false);

void apply_stage(StateVector& s, const Stage& stage, const RegisterLayout& layout, QueryModel model,
                 OracleTables tables);

struct RunResult {
    StateVector state;
    std::uint64_t queries = 0;
};

/// Full simulation from |0...0>, no reductions.
RunResult run(const QueryAlgorithm& alg, OracleTables tables, const SimOptions& opts = {});

struct Distribution {
    std::uint64_t space_size = 0;
    std::vector<double> probabilities;  // indexed by outcome code

    double total() const;
    std::map<std::uint64_t, double> support(double threshold = 1e-15) const;
};

/// Synchronized answer blocks that can be dropped without changing the
/// output distribution: unmeasured, and touched only by forward QFTs ahead
/// of the first oracle call that cover the whole block. Such a block sits in
/// a translation-invariant state.
struct InertReduction {
    QueryAlgorithm reduced;
    std::vector<std::uint32_t> kept_blocks;
};
InertReduction reduce_inert_blocks(const QueryAlgorithm& alg);

/// Exact distribution of the measured digits. Inert blocks are removed first.
Distribution output_distribution(const QueryAlgorithm& alg, OracleTables tables, const SimOptions& opts = {});
double acceptance_probability(const QueryAlgorithm& alg, OracleTables tables, const SimOptions& opts = {});
double acceptance_probability(const QueryAlgorithm& alg, const Distribution& d);

struct Outcome {
    std::uint64_t value = 0;
    bool accepted = false;
    std::uint64_t queries = 0;
};

/// One measurement sample; reproducible per seed.
Outcome run_sampled(const QueryAlgorithm& alg, OracleTables tables, std::uint64_t seed,
                    const SimOptions& opts = {});

std::uint64_t sample_outcome(const Distribution& d, Rng& rng);

}  // namespace emq
