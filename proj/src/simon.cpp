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

#include "emq/simon.hpp"

#include <stdexcept>

#include "emq/rng.hpp"

namespace emq {

namespace {

std::vector<std::uint32_t> range_list(Range r) {
    std::vector<std::uint32_t> v;
    for (std::uint32_t d = r.begin; d < r.end(); ++d) v.push_back(d);
    return v;
}

QftGate qft_on(Range r) { return QftGate{r.begin, r.end(), false}; }

}  // namespace

QueryAlgorithm simon_circuit(std::uint32_t p, std::uint32_t n) {
    QueryAlgorithm a;
    a.layout = RegisterLayout{p, 0, n, 1, 0};
    a.model = QueryModel::kStandard;
    a.stages = {qft_on(a.layout.query()), OracleCall{}, qft_on(a.layout.query())};
    a.measured = range_list(a.layout.query());
    a.validate();
    return a;
}

QueryAlgorithm sum_combine_circuit(std::uint32_t p, std::uint32_t n, std::uint32_t blocks) {
    if (blocks == 0) throw std::invalid_argument("sum_combine_circuit needs at least one block");
    QueryAlgorithm a;
    a.layout = RegisterLayout{p, 0, n, blocks, 0};
    a.model = QueryModel::kSynchronized;
    const Range last = a.layout.block(blocks - 1);
    a.stages.push_back(qft_on(a.layout.query()));
    for (std::uint32_t b = 0; b + 1 < blocks; ++b) a.stages.push_back(qft_on(a.layout.block(b)));
    for (std::uint32_t b = 0; b + 1 < blocks; ++b) a.stages.push_back(AddGate{a.layout.block(b), last, -1});
    a.stages.push_back(OracleCall{});
    for (std::uint32_t b = 0; b + 1 < blocks; ++b) a.stages.push_back(AddGate{a.layout.block(b), last, +1});
    a.stages.push_back(qft_on(a.layout.query()));
    a.measured = range_list(a.layout.query());
    a.validate();
    return a;
}

QueryAlgorithm min_combine_circuit(std::uint32_t p, std::uint32_t n, std::uint32_t blocks) {
    if (blocks == 0) throw std::invalid_argument("min_combine_circuit needs at least one block");
    QueryAlgorithm a;
    a.layout = RegisterLayout{p, 0, n, blocks, n};
    a.model = QueryModel::kSynchronized;
    a.stages = {
        qft_on(a.layout.query()),
        OracleCall{},
        BlockMinGate{a.layout.block(0).begin, n, blocks, a.layout.work().begin, +1},
        OracleCall{true},
        qft_on(a.layout.query()),
    };
    a.measured = range_list(a.layout.query());
    a.validate();
    return a;
}

std::vector<GroupVector> draw_samples(const QueryAlgorithm& circuit, OracleTables tables, std::size_t m, Rng& rng) {
    std::vector<GroupVector> out;
    if (m == 0) return out;
    const Distribution d = output_distribution(circuit, tables);
    const Ambient a{circuit.layout.p, static_cast<std::uint32_t>(circuit.measured.size())};
    for (std::size_t j = 0; j < m; ++j) out.push_back(GroupVector::from_code(a, sample_outcome(d, rng)));
    return out;
}

GroupVector simon_sample(std::span<const std::uint32_t> f, std::uint32_t p, std::uint32_t n, Rng& rng) {
    const std::span<const std::uint32_t> tables[] = {f};
    return draw_samples(simon_circuit(p, n), tables, 1, rng).front();
}

SimonRun simon_run(std::span<const std::uint32_t> f, std::uint32_t p, std::uint32_t n, std::size_t m,
                   std::uint64_t seed) {
    Rng rng(seed);
    const std::span<const std::uint32_t> tables[] = {f};
    const QueryAlgorithm c = simon_circuit(p, n);
    SimonRun r{draw_samples(c, tables, m, rng), Subgroup::trivial(Ambient{p, n}), m * c.query_count()};
    r.candidate = nullspace_dual(Ambient{p, n}, r.samples);
    return r;
}

Subgroup simon_solve(std::span<const std::uint32_t> f, std::uint32_t p, std::uint32_t n, std::size_t m,
                     std::uint64_t seed) {
    return simon_run(f, p, n, m, seed).candidate;
}

SimonRun gs_run(const OracleSequence& o, std::size_t m, std::uint64_t seed) {
    const Ambient& a = o.ambient();
    Rng rng(seed);
    const QueryAlgorithm c = min_combine_circuit(a.p, a.n, static_cast<std::uint32_t>(o.size()));
    const auto tables = o.tables();
    SimonRun r{draw_samples(c, tables, m, rng), Subgroup::trivial(a), m * c.query_count()};
    r.candidate = nullspace_dual(a, r.samples);
    return r;
}

Subgroup gs_solve(const OracleSequence& o, std::size_t m, std::uint64_t seed) { return gs_run(o, m, seed).candidate; }

std::vector<Code> km_probe_points(std::uint32_t n) {
    const std::uint64_t size = checked_pow(2, n);
    std::vector<Code> probes;
    for (Code x = 1; x <= 8 && x < size; ++x) probes.push_back(x);
    return probes;
}

AttackReport km_attack(const EmInstance& inst, const KmOptions& opts, std::uint64_t seed) {
    const Ambient a = inst.pi.ambient();
    if (a.p != 2) throw std::invalid_argument("km_attack requires p = 2");
    AttackReport rep;
    rep.seed = seed;

    Rng rng(seed);
    const QueryAlgorithm c = sum_combine_circuit(2, a.n, 2);
    const std::span<const std::uint32_t> tables[] = {inst.pi.table(), inst.em.table()};
    rep.samples = draw_samples(c, tables, opts.m, rng);
    rep.queries_used = opts.m * c.query_count();

    const Subgroup cand = nullspace_dual(a, rep.samples);
    rep.candidate_dim = cand.dim();
    if (cand.dim() > opts.max_candidate_dim) return rep;

    const auto probes = km_probe_points(a.n);
    const Code em0 = inst.em(0);
    ++rep.classical_evaluations;
    for (std::uint64_t idx = 0; idx < cand.order(); ++idx) {
        const GroupVector k1 = cand.element_at(idx);
        if (k1.is_zero() && !opts.allow_zero_inner_key) continue;
        const Code k2 = em0 ^ inst.pi(k1.code());
        ++rep.classical_evaluations;
        bool ok = true;
        for (Code x : probes) {
            rep.classical_evaluations += 2;
            if (inst.em(x) != (inst.pi(x ^ k1.code()) ^ k2)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            rep.recovered_k1 = k1;
            rep.recovered_k2 = GroupVector::from_code(a, k2);
            rep.success = true;
            break;
        }
    }
    return rep;
}

QueryAlgorithm gdikem_distinguisher_1q(std::uint32_t p, std::uint32_t n, std::uint32_t N) {
    if (N < 2) throw std::invalid_argument("distinguisher needs at least two answer blocks");
    QueryAlgorithm a;
    a.layout = RegisterLayout{p, 0, n, N, 0};
    a.model = QueryModel::kSynchronized;
    a.stages.push_back(qft_on(a.layout.query()));
    for (std::uint32_t b = 2; b < N; ++b) a.stages.push_back(qft_on(a.layout.block(b)));
    a.stages.push_back(OracleCall{});
    a.stages.push_back(AddGate{a.layout.block(0), a.layout.block(1), -1});
    a.measured = range_list(a.layout.block(1));
    a.accept = nonzero_outcomes(a.outcome_space());
    a.validate();
    return a;
}

}  // namespace emq
