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

#include "emq/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "emq/group.hpp"

namespace emq {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void append_range(std::vector<std::uint32_t>& out, std::uint32_t begin, std::uint32_t len) {
    for (std::uint32_t k = 0; k < len; ++k) out.push_back(begin + k);
}

[[noreturn]] void fail(std::size_t stage, const std::string& what) {
    throw std::invalid_argument("stage " + std::to_string(stage) + ": " + what);
}

void require_disjoint(std::size_t stage, std::vector<std::uint32_t> a, std::vector<std::uint32_t> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::uint32_t> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    if (!both.empty()) fail(stage, "register ranges overlap");
}

void require_distinct(std::size_t stage, std::vector<std::uint32_t> d) {
    std::sort(d.begin(), d.end());
    if (std::adjacent_find(d.begin(), d.end()) != d.end()) fail(stage, "repeated digit");
}

void require_sign(std::size_t stage, int sign) {
    if (sign != 1 && sign != -1) fail(stage, "sign must be +1 or -1");
}

std::vector<std::uint32_t> range_digits(std::uint32_t begin, std::uint32_t len) {
    std::vector<std::uint32_t> v;
    append_range(v, begin, len);
    return v;
}

nlohmann::json range_json(const Range& r) { return nlohmann::json::array({r.begin, r.len}); }
Range range_from(const nlohmann::json& j) { return Range{j.at(0).get<std::uint32_t>(), j.at(1).get<std::uint32_t>()}; }

}  // namespace

std::string to_string(QueryModel m) { return m == QueryModel::kStandard ? "standard" : "synchronized"; }

QueryModel query_model_from_string(const std::string& s) {
    if (s == "standard") return QueryModel::kStandard;
    if (s == "synchronized") return QueryModel::kSynchronized;
    throw std::invalid_argument("unknown query model: " + s);
}

std::vector<std::uint32_t> touched_digits(const Stage& s, const RegisterLayout& layout, QueryModel model) {
    std::vector<std::uint32_t> out;
    std::visit(Overloaded{
                   [&](const QftGate& g) { append_range(out, g.begin, g.end - g.begin); },
                   [&](const DenseGate& g) { out = g.digits; },
                   [&](const PermutationGate& g) { out = g.digits; },
                   [&](const AddGate& g) {
                       append_range(out, g.source.begin, g.source.len);
                       append_range(out, g.target.begin, g.target.len);
                   },
                   [&](const SelectAddGate& g) {
                       append_range(out, g.selector.begin, g.selector.len);
                       append_range(out, g.blocks_begin, g.block_len * g.count);
                       append_range(out, g.target_begin, g.block_len);
                   },
                   [&](const BlockMinGate& g) {
                       append_range(out, g.blocks_begin, g.block_len * g.count);
                       append_range(out, g.target_begin, g.block_len);
                   },
                   [&](const OracleCall&) {
                       if (model == QueryModel::kStandard) {
                           append_range(out, 0, layout.selector_digits);
                           append_range(out, layout.query().begin, layout.query_digits);
                           append_range(out, layout.block(0).begin, layout.query_digits);
                       } else {
                           append_range(out, layout.query().begin, layout.query_digits * (1 + layout.answer_blocks));
                       }
                   },
               },
               s);
    return out;
}

std::uint64_t QueryAlgorithm::query_count() const {
    return static_cast<std::uint64_t>(std::count_if(
        stages.begin(), stages.end(), [](const Stage& s) { return std::holds_alternative<OracleCall>(s); }));
}

std::uint64_t QueryAlgorithm::outcome_space() const {
    return checked_pow(layout.p, static_cast<std::uint32_t>(measured.size()));
}

void QueryAlgorithm::validate(bool check_unitarity) const {
    const std::uint32_t p = layout.p;
    if (!is_prime(p)) throw std::invalid_argument("layout p must be prime");
    const std::uint32_t total = layout.total_digits();
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const Stage& st = stages[i];
        for (auto d : touched_digits(st, layout, model)) {
            if (d >= total) fail(i, "digit " + std::to_string(d) + " outside layout");
        }
        std::visit(Overloaded{
                       [&](const QftGate& g) {
                           if (g.begin > g.end) fail(i, "qft range reversed");
                       },
                       [&](const DenseGate& g) {
                           require_distinct(i, g.digits);
                           if (g.digits.size() > kMaxDenseDigits) fail(i, "dense gate exceeds digit limit");
                           const std::uint64_t dim = checked_pow(p, static_cast<std::uint32_t>(g.digits.size()));
                           if (g.matrix.size() != dim * dim) fail(i, "dense matrix has wrong size");
                           if (!check_unitarity) return;
                           for (std::uint64_t a = 0; a < dim; ++a) {
                               for (std::uint64_t b = 0; b < dim; ++b) {
                                   std::complex<double> acc{};
                                   for (std::uint64_t r = 0; r < dim; ++r) {
                                       acc += std::conj(g.matrix[r * dim + a]) * g.matrix[r * dim + b];
                                   }
                                   if (std::abs(acc - (a == b ? 1.0 : 0.0)) > 1e-9) fail(i, "dense matrix is not unitary");
                               }
                           }
                       },
                       [&](const PermutationGate& g) {
                           require_distinct(i, g.digits);
                           const std::uint64_t dim = checked_pow(p, static_cast<std::uint32_t>(g.digits.size()));
                           if (g.table.size() != dim) fail(i, "permutation table has wrong size");
                           std::vector<bool> seen(dim, false);
                           for (auto v : g.table) {
                               if (v >= dim || seen[v]) fail(i, "permutation table is not a bijection");
                               seen[v] = true;
                           }
                       },
                       [&](const AddGate& g) {
                           require_sign(i, g.sign);
                           if (g.source.len != g.target.len) fail(i, "add registers differ in length");
                           require_disjoint(i, range_digits(g.source.begin, g.source.len),
                                            range_digits(g.target.begin, g.target.len));
                       },
                       [&](const SelectAddGate& g) {
                           require_sign(i, g.sign);
                           const auto sel = range_digits(g.selector.begin, g.selector.len);
                           const auto blocks = range_digits(g.blocks_begin, g.block_len * g.count);
                           const auto target = range_digits(g.target_begin, g.block_len);
                           require_disjoint(i, sel, blocks);
                           require_disjoint(i, sel, target);
                           require_disjoint(i, blocks, target);
                       },
                       [&](const BlockMinGate& g) {
                           require_sign(i, g.sign);
                           if (g.count == 0) fail(i, "block_min needs at least one block");
                           require_disjoint(i, range_digits(g.blocks_begin, g.block_len * g.count),
                                            range_digits(g.target_begin, g.block_len));
                       },
                       [&](const OracleCall&) {
                           if (layout.answer_blocks == 0) fail(i, "oracle call without answer blocks");
                       },
                   },
                   st);
    }
    for (auto d : measured) {
        if (d >= total) throw std::invalid_argument("measured digit outside layout");
    }
    require_distinct(stages.size(), measured);
    const std::uint64_t space = outcome_space();
    for (std::size_t k = 0; k < accept.size(); ++k) {
        if (accept[k] >= space) throw std::invalid_argument("accepting outcome outside outcome space");
        if (k > 0 && accept[k] <= accept[k - 1]) throw std::invalid_argument("accept set must be sorted and unique");
    }
}

std::vector<std::uint64_t> nonzero_outcomes(std::uint64_t space) {
    std::vector<std::uint64_t> v;
    for (std::uint64_t o = 1; o < space; ++o) v.push_back(o);
    return v;
}

nlohmann::json to_json(const QueryAlgorithm& alg) {
    nlohmann::json j;
    j["schema"] = "emq-circuit";
    j["version"] = kCircuitSchemaVersion;
    j["p"] = alg.layout.p;
    j["model"] = to_string(alg.model);
    j["layout"] = {{"selector_digits", alg.layout.selector_digits},
                   {"query_digits", alg.layout.query_digits},
                   {"answer_blocks", alg.layout.answer_blocks},
                   {"work_digits", alg.layout.work_digits}};
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& st : alg.stages) {
        nlohmann::json s;
        std::visit(Overloaded{
                       [&](const QftGate& g) {
                           s = {{"op", "qft"}, {"begin", g.begin}, {"end", g.end}, {"inverse", g.inverse}};
                       },
                       [&](const DenseGate& g) {
                           nlohmann::json m = nlohmann::json::array();
                           for (auto z : g.matrix) m.push_back({z.real(), z.imag()});
                           s = {{"op", "dense"}, {"digits", g.digits}, {"matrix", m}};
                       },
                       [&](const PermutationGate& g) {
                           s = {{"op", "permute"}, {"digits", g.digits}, {"table", g.table}};
                       },
                       [&](const AddGate& g) {
                           s = {{"op", "add"}, {"source", range_json(g.source)}, {"target", range_json(g.target)},
                                {"sign", g.sign}};
                       },
                       [&](const SelectAddGate& g) {
                           s = {{"op", "select_add"}, {"selector", range_json(g.selector)},
                                {"blocks_begin", g.blocks_begin}, {"block_len", g.block_len},
                                {"count", g.count}, {"target_begin", g.target_begin}, {"sign", g.sign}};
                       },
                       [&](const BlockMinGate& g) {
                           s = {{"op", "block_min"}, {"blocks_begin", g.blocks_begin}, {"block_len", g.block_len},
                                {"count", g.count}, {"target_begin", g.target_begin}, {"sign", g.sign}};
                       },
                       [&](const OracleCall& g) { s = {{"op", "oracle"}, {"inverse", g.inverse}}; },
                   },
                   st);
        stages.push_back(s);
    }
    j["stages"] = stages;
    j["measure"] = alg.measured;
    j["accept"] = alg.accept;
    return j;
}

QueryAlgorithm query_algorithm_from_json(const nlohmann::json& j) {
    if (j.value("schema", std::string{}) != "emq-circuit") throw std::invalid_argument("not an emq-circuit document");
    if (j.value("version", 0) != kCircuitSchemaVersion) throw std::invalid_argument("unsupported circuit schema version");
    QueryAlgorithm alg;
    alg.layout.p = j.at("p").get<std::uint32_t>();
    alg.model = query_model_from_string(j.at("model").get<std::string>());
    const auto& l = j.at("layout");
    alg.layout.selector_digits = l.value("selector_digits", 0u);
    alg.layout.query_digits = l.at("query_digits").get<std::uint32_t>();
    alg.layout.answer_blocks = l.value("answer_blocks", 1u);
    alg.layout.work_digits = l.value("work_digits", 0u);
    for (const auto& s : j.at("stages")) {
        const std::string op = s.at("op").get<std::string>();
        if (op == "qft") {
            alg.stages.push_back(QftGate{s.at("begin").get<std::uint32_t>(), s.at("end").get<std::uint32_t>(),
                                         s.value("inverse", false)});
        } else if (op == "dense") {
            DenseGate g;
            g.digits = s.at("digits").get<std::vector<std::uint32_t>>();
            for (const auto& z : s.at("matrix")) g.matrix.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
            alg.stages.push_back(std::move(g));
        } else if (op == "permute") {
            alg.stages.push_back(PermutationGate{s.at("digits").get<std::vector<std::uint32_t>>(),
                                                 s.at("table").get<std::vector<std::uint64_t>>()});
        } else if (op == "add") {
            alg.stages.push_back(AddGate{range_from(s.at("source")), range_from(s.at("target")), s.value("sign", 1)});
        } else if (op == "select_add") {
            alg.stages.push_back(SelectAddGate{range_from(s.at("selector")), s.at("blocks_begin").get<std::uint32_t>(),
                                               s.at("block_len").get<std::uint32_t>(), s.at("count").get<std::uint32_t>(),
                                               s.at("target_begin").get<std::uint32_t>(), s.value("sign", 1)});
        } else if (op == "block_min") {
            alg.stages.push_back(BlockMinGate{s.at("blocks_begin").get<std::uint32_t>(),
                                              s.at("block_len").get<std::uint32_t>(), s.at("count").get<std::uint32_t>(),
                                              s.at("target_begin").get<std::uint32_t>(), s.value("sign", 1)});
        } else if (op == "oracle") {
            alg.stages.push_back(OracleCall{s.value("inverse", false)});
        } else {
            throw std::invalid_argument("unknown stage op: " + op);
        }
    }
    alg.measured = j.at("measure").get<std::vector<std::uint32_t>>();
    alg.accept = j.at("accept").get<std::vector<std::uint64_t>>();
    std::sort(alg.accept.begin(), alg.accept.end());
    alg.accept.erase(std::unique(alg.accept.begin(), alg.accept.end()), alg.accept.end());
    alg.validate();
    return alg;
}

}  // namespace emq
