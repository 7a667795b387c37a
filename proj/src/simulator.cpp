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

#include "emq/simulator.hpp"

#include <algorithm>
#include <stdexcept>

#include "emq/group.hpp"
#include "emq/rng.hpp"

namespace emq {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_tables(const RegisterLayout& layout, OracleTables tables) {
    const std::uint64_t size = checked_pow(layout.p, layout.query_digits);
    for (auto t : tables) {
        if (t.size() != size) throw std::invalid_argument("oracle table length != p^n");
        for (auto y : t) {
            if (y >= size) throw std::invalid_argument("oracle output outside Z_p^n");
        }
    }
}

Code combine(const DigitArithmetic& a, Code y, Code v, int sign) { return sign > 0 ? a.add(y, v) : a.sub(y, v); }

}  // namespace

void apply_oracle_standard(StateVector& s, const RegisterLayout& layout, OracleTables tables, bool inverse) {
    if (layout.answer_blocks < 1) throw std::invalid_argument("standard oracle needs an answer block");
    if (tables.size() < checked_pow(layout.p, layout.selector_digits)) {
        throw std::invalid_argument("selector range exceeds the number of oracles");
    }
    check_tables(layout, tables);
    const DigitArithmetic arith(layout.p, layout.query_digits);
    const Range sel = layout.selector(), q = layout.query(), y = layout.block(0);
    const int sign = inverse ? -1 : 1;
    s.permute_basis([&](std::uint64_t idx) {
        const auto i = s.read(idx, sel);
        const auto x = s.read(idx, q);
        return s.write(idx, y, combine(arith, s.read(idx, y), tables[i][x], sign));
    });
}

void apply_oracle_sync(StateVector& s, const RegisterLayout& layout, OracleTables tables, bool inverse) {
    if (tables.size() != layout.answer_blocks) throw std::invalid_argument("answer block count != number of oracles");
    check_tables(layout, tables);
    const DigitArithmetic arith(layout.p, layout.query_digits);
    const Range q = layout.query();
    const int sign = inverse ? -1 : 1;
    s.permute_basis([&](std::uint64_t idx) {
        const auto x = s.read(idx, q);
        for (std::uint32_t b = 0; b < layout.answer_blocks; ++b) {
            const Range y = layout.block(b);
            idx = s.write(idx, y, combine(arith, s.read(idx, y), tables[b][x], sign));
        }
        return idx;
    });
}

void apply_stage(StateVector& s, const Stage& stage, const RegisterLayout& layout, QueryModel model,
                 OracleTables tables) {
    const std::uint32_t p = layout.p;
    std::visit(Overloaded{
                   [&](const QftGate& g) { s.apply_qft(g.begin, g.end, g.inverse); },
                   [&](const DenseGate& g) { s.apply_dense(g.digits, g.matrix); },
                   [&](const PermutationGate& g) {
                       const std::size_t m = g.digits.size();
                       s.permute_basis([&](std::uint64_t idx) {
                           std::uint64_t v = 0;
                           for (auto d : g.digits) v = v * p + s.digit(idx, d);
                           std::uint64_t w = g.table[v];
                           for (std::size_t j = m; j-- > 0;) {
                               const auto d = g.digits[j];
                               idx = idx - std::uint64_t{s.digit(idx, d)} * s.stride(d) + (w % p) * s.stride(d);
                               w /= p;
                           }
                           return idx;
                       });
                   },
                   [&](const AddGate& g) {
                       const DigitArithmetic arith(p, g.target.len);
                       s.permute_basis([&](std::uint64_t idx) {
                           return s.write(idx, g.target,
                                          combine(arith, s.read(idx, g.target), s.read(idx, g.source), g.sign));
                       });
                   },
                   [&](const SelectAddGate& g) {
                       const DigitArithmetic arith(p, g.block_len);
                       const Range target{g.target_begin, g.block_len};
                       s.permute_basis([&](std::uint64_t idx) {
                           const auto i = s.read(idx, g.selector);
                           if (i >= g.count) return idx;
                           const Range block{g.blocks_begin + static_cast<std::uint32_t>(i) * g.block_len, g.block_len};
                           return s.write(idx, target, combine(arith, s.read(idx, target), s.read(idx, block), g.sign));
                       });
                   },
                   [&](const BlockMinGate& g) {
                       const DigitArithmetic arith(p, g.block_len);
                       const Range target{g.target_begin, g.block_len};
                       s.permute_basis([&](std::uint64_t idx) {
                           std::uint64_t lo = s.read(idx, Range{g.blocks_begin, g.block_len});
                           for (std::uint32_t b = 1; b < g.count; ++b) {
                               lo = std::min(lo, s.read(idx, Range{g.blocks_begin + b * g.block_len, g.block_len}));
                           }
                           return s.write(idx, target, combine(arith, s.read(idx, target), lo, g.sign));
                       });
                   },
                   [&](const OracleCall& c) {
                       if (model == QueryModel::kStandard) {
                           apply_oracle_standard(s, layout, tables, c.inverse);
                       } else {
                           apply_oracle_sync(s, layout, tables, c.inverse);
                       }
                   },
               },
               stage);
}

RunResult run(const QueryAlgorithm& alg, OracleTables tables, const SimOptions& opts) {
    alg.validate(/*check_unitarity=*/false);
    RunResult r{StateVector(alg.layout.p, alg.layout.total_digits(), opts.amplitude_cap), 0};
    for (std::size_t i = 0; i < alg.stages.size(); ++i) {
        apply_stage(r.state, alg.stages[i], alg.layout, alg.model, tables);
        if (std::holds_alternative<OracleCall>(alg.stages[i])) ++r.queries;
        if (opts.observer) opts.observer(i, r.state);
    }
    return r;
}

double Distribution::total() const {
    double t = 0;
    for (auto v : probabilities) t += v;
    return t;
}

std::map<std::uint64_t, double> Distribution::support(double threshold) const {
    std::map<std::uint64_t, double> m;
    for (std::uint64_t o = 0; o < probabilities.size(); ++o) {
        if (probabilities[o] > threshold) m[o] = probabilities[o];
    }
    return m;
}

InertReduction reduce_inert_blocks(const QueryAlgorithm& alg) {
    InertReduction out{alg, {}};
    const RegisterLayout& L = alg.layout;
    for (std::uint32_t b = 0; b < L.answer_blocks; ++b) out.kept_blocks.push_back(b);
    if (alg.model != QueryModel::kSynchronized || L.query_digits == 0) return out;

    std::vector<std::uint32_t> removed_blocks;
    for (std::uint32_t b = 0; b < L.answer_blocks; ++b) {
        const Range blk = L.block(b);
        auto in_block = [&](std::uint32_t d) { return d >= blk.begin && d < blk.end(); };
        if (std::any_of(alg.measured.begin(), alg.measured.end(), in_block)) continue;
        std::vector<int> cover(blk.len, 0);
        bool seen_oracle = false, inert = true;
        for (const auto& st : alg.stages) {
            if (std::holds_alternative<OracleCall>(st)) {
                seen_oracle = true;
                continue;
            }
            const auto digits = touched_digits(st, L, alg.model);
            if (std::none_of(digits.begin(), digits.end(), in_block)) continue;
            const auto* q = std::get_if<QftGate>(&st);
            if (q == nullptr || q->inverse || seen_oracle) {
                inert = false;
                break;
            }
            for (auto d : digits) {
                if (in_block(d)) ++cover[d - blk.begin];
            }
        }
        if (inert && std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; })) {
            removed_blocks.push_back(b);
        }
    }
    if (removed_blocks.empty()) return out;

    std::vector<bool> removed(L.total_digits(), false);
    for (auto b : removed_blocks) {
        for (std::uint32_t d = L.block(b).begin; d < L.block(b).end(); ++d) removed[d] = true;
    }
    std::vector<std::uint32_t> remap(L.total_digits(), 0);
    for (std::uint32_t d = 0, next = 0; d < L.total_digits(); ++d) {
        remap[d] = next;
        if (!removed[d]) ++next;
    }
    auto map_range = [&](Range r) { return Range{remap[r.begin], r.len}; };

    QueryAlgorithm red;
    red.layout = L;
    red.layout.answer_blocks = L.answer_blocks - static_cast<std::uint32_t>(removed_blocks.size());
    red.model = alg.model;
    for (const auto& st : alg.stages) {
        std::visit(Overloaded{
                       [&](const QftGate& g) {
                           // Split around removed digits.
                           std::uint32_t d = g.begin;
                           while (d < g.end) {
                               while (d < g.end && removed[d]) ++d;
                               const std::uint32_t start = d;
                               while (d < g.end && !removed[d]) ++d;
                               if (d > start) red.stages.push_back(QftGate{remap[start], remap[start] + (d - start), g.inverse});
                           }
                       },
                       [&](DenseGate g) {
                           for (auto& d : g.digits) d = remap[d];
                           red.stages.push_back(std::move(g));
                       },
                       [&](PermutationGate g) {
                           for (auto& d : g.digits) d = remap[d];
                           red.stages.push_back(std::move(g));
                       },
                       [&](AddGate g) {
                           g.source = map_range(g.source);
                           g.target = map_range(g.target);
                           red.stages.push_back(g);
                       },
                       [&](SelectAddGate g) {
                           g.selector = map_range(g.selector);
                           g.blocks_begin = remap[g.blocks_begin];
                           g.target_begin = remap[g.target_begin];
                           red.stages.push_back(g);
                       },
                       [&](BlockMinGate g) {
                           g.blocks_begin = remap[g.blocks_begin];
                           g.target_begin = remap[g.target_begin];
                           red.stages.push_back(g);
                       },
                       [&](const OracleCall& c) { red.stages.push_back(c); },
                   },
                   st);
    }
    for (auto d : alg.measured) red.measured.push_back(remap[d]);
    red.accept = alg.accept;
    out.reduced = std::move(red);
    out.kept_blocks.clear();
    for (std::uint32_t b = 0; b < L.answer_blocks; ++b) {
        if (std::find(removed_blocks.begin(), removed_blocks.end(), b) == removed_blocks.end()) {
            out.kept_blocks.push_back(b);
        }
    }
    return out;
}

Distribution output_distribution(const QueryAlgorithm& alg, OracleTables tables, const SimOptions& opts) {
    std::vector<std::span<const std::uint32_t>> kept;
    const QueryAlgorithm* target = &alg;
    InertReduction red;
    if (alg.model == QueryModel::kSynchronized) {
        if (tables.size() != alg.layout.answer_blocks) {
            throw std::invalid_argument("answer block count != number of oracles");
        }
        red = reduce_inert_blocks(alg);
        for (auto b : red.kept_blocks) kept.push_back(tables[b]);
        target = &red.reduced;
        tables = kept;
    }
    const RunResult r = run(*target, tables, opts);
    return Distribution{target->outcome_space(), r.state.marginal(target->measured)};
}

double acceptance_probability(const QueryAlgorithm& alg, const Distribution& d) {
    double acc = 0;
    for (auto o : alg.accept) acc += d.probabilities.at(o);
    return std::clamp(acc, 0.0, 1.0);
}

double acceptance_probability(const QueryAlgorithm& alg, OracleTables tables, const SimOptions& opts) {
    return acceptance_probability(alg, output_distribution(alg, tables, opts));
}

std::uint64_t sample_outcome(const Distribution& d, Rng& rng) {
    const double u = rng.uniform01() * d.total();
    double acc = 0;
    std::uint64_t last = 0;
    for (std::uint64_t o = 0; o < d.probabilities.size(); ++o) {
        if (d.probabilities[o] <= 0) continue;
        acc += d.probabilities[o];
        last = o;
        if (u < acc) return o;
    }
    return last;
}

Outcome run_sampled(const QueryAlgorithm& alg, OracleTables tables, std::uint64_t seed, const SimOptions& opts) {
    const Distribution d = output_distribution(alg, tables, opts);
    Rng rng(seed);
    Outcome out;
    out.value = sample_outcome(d, rng);
    out.accepted = std::binary_search(alg.accept.begin(), alg.accept.end(), out.value);
    out.queries = alg.query_count();
    return out;
}

}  // namespace emq
