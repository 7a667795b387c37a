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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 0 only
// when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <thread>

#include "../test_support.hpp"
#include "emq/experiments.hpp"
#include "emq/oracle.hpp"
#include "emq/polymethod.hpp"
#include "emq/rng.hpp"
#include "emq/simon.hpp"
#include "emq/simulator.hpp"
#include "emq/sync_reduction.hpp"

namespace {

using namespace emq;
namespace ts = emq::testing_support;

struct Verdict {
    bool pass = false;
    std::string detail;
};

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1. beta(p, n, k) against closure-based enumeration.
Verdict subgroup_counting() {
    std::size_t cells = 0, bad = 0;
    for (auto [p, nmax] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 4}, {3, 3}}) {
        for (std::uint32_t n = 1; n <= nmax; ++n) {
            const Ambient a{p, n};
            std::vector<std::uint64_t> by_k(n + 1, 0);
            for (const auto& h : ts::all_subgroups_by_closure(a)) {
                std::uint32_t k = 0;
                for (std::size_t s = h.size(); s > 1; s /= p) ++k;
                ++by_k[k];
            }
            for (std::uint32_t k = 0; k <= n; ++k) {
                ++cells;
                bad += beta(p, n, k) != BigInt(by_k[k]);
            }
        }
    }
    return {bad == 0, std::to_string(cells - bad) + "/" + std::to_string(cells) + " (p,n,k) cells equal"};
}

// 2. Both directions of the shift/sigma equivalence over every F_D^*(2,3,D).
Verdict shift_equivalence() {
    std::uint64_t sequences = 0, violations = 0;
    for (std::uint64_t D : {1u, 2u, 4u, 8u}) {
        FDStarEnumeration e(2, 3, D);
        while (auto o = e.next()) {
            const auto rep = check_shift_equivalence(*o, e.current_subgroup());
            violations += rep.forward_violations + rep.converse_violations;
            ++sequences;
        }
    }
    return {violations == 0 && sequences == 40320 + 11760 + 392 + 8,
            std::to_string(sequences) + " sequences, " + std::to_string(violations) + " violations"};
}

// 3. Key recovery at n = 6, m = 10, 200 trials.
Verdict km_success() {
    const std::uint32_t n = 6;
    const std::uint64_t m = n + 4, trials = 200;
    struct Row {
        bool success;
        std::uint64_t samples, orthogonal, queries;
    };
    const auto rows = parallel_map<Row>(trials, jobs(), [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(1, i);
        const EmInstance inst = make_em_instance(n, seed);
        const AttackReport rep = km_attack(inst, KmOptions{m}, derive_seed(seed, 1));
        std::uint64_t orth = 0;
        for (const auto& z : rep.samples) orth += z.dot(inst.k1) == 0;
        const bool exact = rep.success && rep.recovered_k1 == inst.k1 && rep.recovered_k2 == inst.k2;
        return Row{exact, rep.samples.size(), orth, rep.queries_used};
    });
    std::uint64_t ok = 0, samples = 0, orth = 0, bad_queries = 0;
    for (const auto& r : rows) {
        ok += r.success;
        samples += r.samples;
        orth += r.orthogonal;
        bad_queries += r.queries != m;
    }
    const double rate = static_cast<double>(ok) / trials;
    return {rate >= 0.90 && orth == samples && bad_queries == 0,
            "success " + fmt("%.3f", rate) + ", orthogonal " + std::to_string(orth) + "/" + std::to_string(samples) +
                ", query mismatches " + std::to_string(bad_queries)};
}

// 4. Standard-to-synchronized compilation of 20 random circuits.
Verdict sync_compilation() {
    double max_tv = 0, max_res = 0;
    std::uint64_t bad_queries = 0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        Rng rng(derive_seed(1, i));
        const QueryAlgorithm a = random_standard_circuit(RandomCircuitParams{2, 3, 1, 1, 2, 3}, rng);
        std::vector<PermutationOracle> os;
        for (int b = 0; b < 2; ++b) os.push_back(PermutationOracle::random(Ambient{2, 3}, rng));
        std::vector<std::span<const std::uint32_t>> tables;
        for (const auto& o : os) tables.emplace_back(o.table());
        const CompiledAlgorithm c = compile_to_sync(a, 2);
        SimOptions opts;
        opts.observer = [&](std::size_t stage, const StateVector& s) {
            if (std::find(c.sandwich_ends.begin(), c.sandwich_ends.end(), stage) != c.sandwich_ends.end()) {
                max_res = std::max(max_res, answer_block_residue(s, c.compiled.layout));
            }
        };
        const RunResult r = run(c.compiled, tables, opts);
        const Distribution got{c.compiled.outcome_space(), r.state.marginal(c.compiled.measured)};
        max_tv = std::max(max_tv, tv_distance(output_distribution(a, tables), got));
        bad_queries += r.queries != 2 * a.query_count() || c.compiled.query_count() != 2 * a.query_count();
    }
    return {max_tv <= 1e-9 && max_res <= 1e-9 && bad_queries == 0,
            "max TV " + fmt("%.3g", max_tv) + ", max residue " + fmt("%.3g", max_res) + ", query mismatches " +
                std::to_string(bad_queries)};
}

// 5. Factored versus enumerated Q_s and the degree bounds, 50 partial functions.
Verdict degree_bounds() {
    const auto corpus = make_corpus(2, 3, 50, {1, 2, 4, 8}, 1);
    const auto records = parallel_map<DegreeRecord>(corpus.size(), jobs(), [&](std::size_t i) { return degree_record(corpus[i]); });
    std::size_t equal = 0, bounds = 0;
    std::map<std::uint64_t, std::size_t> equal_by_D;
    for (const auto& r : records) {
        equal += r.all_equal();
        bounds += r.bounds_ok();
        for (const auto& [D, eq] : r.equal) equal_by_D[D] += eq;
    }
    std::string per_D;
    for (const auto& [D, c] : equal_by_D) per_D += " D=" + std::to_string(D) + ":" + std::to_string(c);
    return {equal == records.size() && bounds == records.size(),
            "exact equality " + std::to_string(equal) + "/" + std::to_string(records.size()) + " (per D" + per_D +
                "), bounds " + std::to_string(bounds) + "/" + std::to_string(records.size())};
}

// 6. Quadratic through Q(1), Q(2), Q(4) predicts Q(8) for the distinguisher.
Verdict quadratic_prediction() {
    const std::uint32_t n = 3, N = 8;
    const auto alg = gdikem_distinguisher_1q(2, n, N);
    std::vector<std::pair<double, double>> pts;
    std::string values;
    double q8 = 0;
    for (std::uint64_t D : {1u, 2u, 4u, 8u}) {
        QOfDOptions opts;
        opts.allow_sampling = false;
        const auto r = q_of_d_enumerated(alg, 2, n, D, N, opts);
        values += (values.empty() ? "" : ", ") + fmt("%.9f", r.value);
        if (D < 8) pts.emplace_back(static_cast<double>(D), r.value);
        else q8 = r.value;
    }
    const double pred = lagrange_predict(pts, 8.0);
    return {std::abs(pred - q8) <= 1e-6,
            "Q = [" + values + "], predicted Q(8) " + fmt("%.9f", pred) + ", error " + fmt("%.3g", std::abs(pred - q8))};
}

// 7. Degree lower bound: spot value and linear growth.
Verdict koiran() {
    const double b64 = koiran_bound(2, 64, 1.0 / 3);
    const double hand = (67 + std::log2(2.0 / 3) - 1) / 4;
    const double ratio = koiran_bound(2, 128, 1.0 / 3) / b64;
    return {std::abs(b64 - 16.35) <= 1e-2 && std::abs(b64 - hand) <= 1e-2 && ratio >= 1.9 && ratio <= 2.1,
            "bound(64) " + fmt("%.4f", b64) + ", ratio(128/64) " + fmt("%.4f", ratio)};
}

// 8. Norm, oracle order p and QFT inversion on 100 random circuits.
Verdict simulator_integrity() {
    double worst_norm = 0, worst_order = 0, worst_qft = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        Rng rng(derive_seed(8, i));
        const std::uint32_t p = i % 3 == 2 ? 3 : 2;
        const std::uint32_t n = p == 2 ? 3 : 1;
        const QueryAlgorithm a = random_standard_circuit(RandomCircuitParams{p, n, 1, 1, 3, 3}, rng);
        std::vector<PermutationOracle> os;
        for (std::uint32_t b = 0; b < p; ++b) os.push_back(PermutationOracle::random(Ambient{p, n}, rng));
        std::vector<std::span<const std::uint32_t>> tables;
        for (const auto& o : os) tables.emplace_back(o.table());

        StateVector s = run(a, tables).state;
        worst_norm = std::max(worst_norm, std::abs(s.norm_squared() - 1));

        const StateVector before = s;
        auto diff = [&](const StateVector& x) {
            double d = 0;
            for (std::uint64_t j = 0; j < x.size(); ++j) d = std::max(d, std::abs(x[j] - before[j]));
            return d;
        };
        for (std::uint32_t k = 0; k < p; ++k) apply_oracle_standard(s, a.layout, tables);
        worst_order = std::max(worst_order, diff(s));

        s.apply_qft(0, s.digits());
        s.apply_qft(0, s.digits(), true);
        worst_qft = std::max(worst_qft, diff(s));
    }
    return {worst_norm <= 1e-9 && worst_order <= 1e-9 && worst_qft <= 1e-9,
            "max |norm-1| " + fmt("%.3g", worst_norm) + ", oracle^p " + fmt("%.3g", worst_order) + ", QFT round trip " +
                fmt("%.3g", worst_qft)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Verdict()> check;
        double time_limit;  // seconds; 0 means none
    };
    const std::vector<Criterion> criteria{
        {"subgroup counting", subgroup_counting, 60},
        {"shift/sigma equivalence over F_D*", shift_equivalence, 300},
        {"key recovery success", km_success, 600},
        {"synchronized compilation", sync_compilation, 0},
        {"partial-function degree bounds", degree_bounds, 0},
        {"Q(D) quadratic prediction", quadratic_prediction, 0},
        {"degree lower bound", koiran, 0},
        {"simulator integrity", simulator_integrity, 0},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (criteria[i].time_limit > 0 && secs > criteria[i].time_limit) {
            v.pass = false;
            v.detail += ", over the " + fmt("%.0f", criteria[i].time_limit) + " s limit";
        }
        std::printf("%s %zu %s: %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, v.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !v.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
