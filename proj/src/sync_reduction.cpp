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

#include "emq/sync_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

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

// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
// of R's diagonal folded back into Q.
std::vector<std::complex<double>> random_unitary(std::uint64_t dim, Rng& rng) {
    auto gauss = [&] {
        const double u1 = std::max(rng.uniform01(), 1e-300), u2 = rng.uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    };
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = {gauss(), gauss()};
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd rr = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < q.cols(); ++c) {
        const auto d = rr(c, c);
        if (std::abs(d) > 0) q.col(c) *= d / std::abs(d);
    }
    std::vector<std::complex<double>> out(dim * dim);
    for (std::uint64_t r = 0; r < dim; ++r) {
        for (std::uint64_t c = 0; c < dim; ++c) out[r * dim + c] = q(r, c);
    }
    return out;
}

std::vector<std::uint32_t> pick_digits(std::uint32_t total, std::uint32_t count, Rng& rng) {
    std::vector<std::uint32_t> all(total);
    std::iota(all.begin(), all.end(), 0u);
    rng.shuffle(std::span<std::uint32_t>(all));
    all.resize(std::min(count, total));
    return all;
}

}  // namespace

CompiledAlgorithm compile_to_sync(const QueryAlgorithm& a, std::uint32_t N) {
    if (a.model != QueryModel::kStandard) throw std::invalid_argument("compile_to_sync expects a standard-model algorithm");
    a.validate(false);
    if (N == 0) throw std::invalid_argument("N must be positive");
    if (checked_pow(a.layout.p, a.layout.selector_digits) > N) {
        throw std::invalid_argument("selector range exceeds N");
    }
    const RegisterLayout& L = a.layout;
    const std::uint32_t n = L.query_digits;
    const std::uint32_t shift = N * n;
    const std::uint32_t moved_from = L.selector_digits + n;  // original answer begins here
    auto m = [&](std::uint32_t d) { return d >= moved_from ? d + shift : d; };
    auto mr = [&](Range r) { return Range{m(r.begin), r.len}; };

    CompiledAlgorithm out;
    out.original = a;
    QueryAlgorithm& c = out.compiled;
    c.model = QueryModel::kSynchronized;
    c.layout = RegisterLayout{L.p, L.selector_digits, n, N, L.answer_blocks * n + L.work_digits};
    const std::uint32_t answer_target = m(L.block(0).begin);

    std::uint64_t call = 0;
    for (const auto& st : a.stages) {
        std::visit(Overloaded{
                       [&](QftGate g) {
                           // Ranges never straddle the insertion point: split if they do.
                           if (g.begin < moved_from && g.end > moved_from) {
                               c.stages.push_back(QftGate{g.begin, moved_from, g.inverse});
                               c.stages.push_back(QftGate{m(moved_from), m(g.end - 1) + 1, g.inverse});
                           } else if (g.begin < g.end) {
                               c.stages.push_back(QftGate{m(g.begin), m(g.end - 1) + 1, g.inverse});
                           }
                       },
                       [&](DenseGate g) {
                           for (auto& d : g.digits) d = m(d);
                           c.stages.push_back(std::move(g));
                       },
                       [&](PermutationGate g) {
                           for (auto& d : g.digits) d = m(d);
                           c.stages.push_back(std::move(g));
                       },
                       [&](AddGate g) {
                           if ((g.source.begin < moved_from && g.source.end() > moved_from) ||
                               (g.target.begin < moved_from && g.target.end() > moved_from)) {
                               throw std::invalid_argument("add register straddles the answer boundary");
                           }
                           g.source = mr(g.source);
                           g.target = mr(g.target);
                           c.stages.push_back(g);
                       },
                       [&](SelectAddGate g) {
                           g.selector = mr(g.selector);
                           g.blocks_begin = m(g.blocks_begin);
                           g.target_begin = m(g.target_begin);
                           c.stages.push_back(g);
                       },
                       [&](BlockMinGate g) {
                           g.blocks_begin = m(g.blocks_begin);
                           g.target_begin = m(g.target_begin);
                           c.stages.push_back(g);
                       },
                       [&](const OracleCall& g) {
                           c.stages.push_back(OracleCall{false});
                           c.stages.push_back(SelectAddGate{c.layout.selector(), c.layout.block(0).begin, n, N,
                                                            answer_target, g.inverse ? -1 : +1});
                           c.stages.push_back(OracleCall{true});
                           out.sandwich_ends.push_back(c.stages.size() - 1);
                           out.query_map.emplace_back(2 * call, 2 * call + 1);
                           ++call;
                       },
                   },
                   st);
    }
    for (auto d : a.measured) c.measured.push_back(m(d));
    c.accept = a.accept;
    c.validate(false);
    return out;
}

double tv_distance(const Distribution& a, const Distribution& b) {
    if (a.space_size != b.space_size || a.probabilities.size() != b.probabilities.size()) {
        throw std::invalid_argument("distributions live on different outcome spaces");
    }
    double acc = 0;
    for (std::size_t i = 0; i < a.probabilities.size(); ++i) acc += std::abs(a.probabilities[i] - b.probabilities[i]);
    return 0.5 * acc;
}

double answer_block_residue(const StateVector& s, const RegisterLayout& layout) {
    const Range blocks{layout.block(0).begin, layout.answer_blocks * layout.query_digits};
    double mass = 0;
    for (std::uint64_t i = 0; i < s.size(); ++i) {
        if (s.read(i, blocks) != 0) mass += std::norm(s[i]);
    }
    return mass;
}

QueryAlgorithm random_standard_circuit(const RandomCircuitParams& params, Rng& rng) {
    QueryAlgorithm a;
    a.layout = RegisterLayout{params.p, params.selector_digits, params.n, 1, params.work_digits};
    a.model = QueryModel::kStandard;
    const std::uint32_t total = a.layout.total_digits();
    const auto calls = static_cast<std::uint32_t>(rng.below(params.max_queries + 1));

    auto layer = [&] {
        for (std::uint32_t g = 0; g < params.gates_per_layer; ++g) {
            switch (rng.below(4)) {
                case 0: {
                    const auto b = static_cast<std::uint32_t>(rng.below(total));
                    const auto e = b + 1 + static_cast<std::uint32_t>(rng.below(total - b));
                    a.stages.push_back(QftGate{b, e, rng.below(2) == 1});
                    break;
                }
                case 1: {
                    PermutationGate pg;
                    pg.digits = pick_digits(total, 1 + static_cast<std::uint32_t>(rng.below(3)), rng);
                    pg.table.resize(checked_pow(params.p, static_cast<std::uint32_t>(pg.digits.size())));
                    std::iota(pg.table.begin(), pg.table.end(), 0u);
                    rng.shuffle(std::span<std::uint64_t>(pg.table));
                    a.stages.push_back(std::move(pg));
                    break;
                }
                case 2: {
                    DenseGate dg;
                    dg.digits = pick_digits(total, 1 + static_cast<std::uint32_t>(rng.below(2)), rng);
                    dg.matrix = random_unitary(checked_pow(params.p, static_cast<std::uint32_t>(dg.digits.size())), rng);
                    a.stages.push_back(std::move(dg));
                    break;
                }
                default: {
                    // Query register into the answer register, or the reverse.
                    const bool forward = rng.below(2) == 0;
                    const Range q = a.layout.query(), y = a.layout.block(0);
                    a.stages.push_back(AddGate{forward ? q : y, forward ? y : q, rng.below(2) == 0 ? 1 : -1});
                    break;
                }
            }
        }
    };

    layer();
    for (std::uint32_t t = 0; t < calls; ++t) {
        a.stages.push_back(OracleCall{rng.below(4) == 0});
        layer();
    }
    a.measured = pick_digits(total, 2 + static_cast<std::uint32_t>(rng.below(3)), rng);
    std::sort(a.measured.begin(), a.measured.end());
    for (std::uint64_t o = 0; o < a.outcome_space(); ++o) {
        if (rng.below(2) == 0) a.accept.push_back(o);
    }
    a.validate();
    return a;
}

}  // namespace emq
