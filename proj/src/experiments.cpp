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

#include "emq/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include "emq/group.hpp"
#include "emq/oracle.hpp"
#include "emq/polymethod.hpp"
#include "emq/rng.hpp"
#include "emq/simon.hpp"
#include "emq/simulator.hpp"
#include "emq/sync_reduction.hpp"

namespace emq {

namespace {

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    return out;
}

void log_line(const RunContext& ctx, const std::string& line) {
    if (ctx.log) *ctx.log << line << '\n';
}

void require(bool cond, const std::string& what) {
    if (!cond) throw ConfigError(what);
}

void require_prime(std::uint32_t p) { require(is_prime(p), "p = " + std::to_string(p) + " is not prime"); }

std::string timestamp_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::filesystem::path default_output_dir() {
    const char* env = std::getenv("EMQ_OUTPUT_DIR");
    return env && *env ? std::filesystem::path(env) : std::filesystem::path(".");
}

nlohmann::json report_header(const std::string& schema, bool timestamp) {
    nlohmann::json h;
    h["schema"] = schema;
    h["version"] = kReportSchemaVersion;
    h["timestamp"] = timestamp ? nlohmann::json(timestamp_now()) : nlohmann::json(nullptr);
    return h;
}

// ---------------------------------------------------------------------------
// attack

CommandResult cmd_attack(const AttackConfig& cfg, const RunContext& ctx) {
    // Two synchronized blocks plus the query register: 3n qubits.
    require(cfg.n >= 1 && 3 * cfg.n <= 26, "attack: n must lie in [1, 8] (simulator cap)");
    const std::uint64_t m = cfg.m.value_or(cfg.n + 4);
    require(m >= 1, "attack: m must be positive");

    struct Trial {
        nlohmann::json record;
        bool success;
        std::uint64_t queries;
        std::uint64_t samples;
        std::uint64_t orthogonal;
    };
    const auto trials = parallel_map<Trial>(cfg.trials, ctx.jobs, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(cfg.seed, i);
        const EmInstance inst = make_em_instance(cfg.n, seed, EmKeyPolicy{cfg.allow_zero_k1});
        const AttackReport rep = km_attack(inst, KmOptions{m, cfg.allow_zero_k1, 4}, derive_seed(seed, 1));
        const bool exact = rep.success && rep.recovered_k1 == inst.k1 && rep.recovered_k2 == inst.k2;
        std::uint64_t orth = 0;
        nlohmann::json zs = nlohmann::json::array();
        for (const auto& z : rep.samples) {
            orth += z.dot(inst.k1) == 0;
            zs.push_back(z.to_string());
        }
        nlohmann::json rec{
            {"trial", i},
            {"seed", seed},
            {"k1", inst.k1.to_string()},
            {"k2", inst.k2.to_string()},
            {"recovered_k1", rep.recovered_k1 ? nlohmann::json(rep.recovered_k1->to_string()) : nlohmann::json(nullptr)},
            {"recovered_k2", rep.recovered_k2 ? nlohmann::json(rep.recovered_k2->to_string()) : nlohmann::json(nullptr)},
            {"success", exact},
            {"queries", rep.queries_used},
            {"classical_evaluations", rep.classical_evaluations},
            {"candidate_dim", rep.candidate_dim},
            {"orthogonal_samples", orth},
            {"samples", zs},
        };
        return Trial{std::move(rec), exact, rep.queries_used, rep.samples.size(), orth};
    });

    CommandResult res;
    const auto jsonl = ctx.out_dir / "attack.jsonl";
    const auto csv = ctx.out_dir / "attack.csv";
    {
        auto out = open_out(jsonl);
        out << report_header("emq-attack-trials", ctx.timestamp).dump() << '\n';
        for (const auto& t : trials) out << t.record.dump() << '\n';
    }
    std::uint64_t ok = 0, queries = 0, samples = 0, orth = 0;
    for (const auto& t : trials) {
        ok += t.success;
        queries += t.queries;
        samples += t.samples;
        orth += t.orthogonal;
    }
    {
        auto out = open_out(csv);
        out << "schema_version,n,m,trials,success_rate,mean_queries,orthogonality_rate\n";
        if (cfg.trials > 0) {
            const double T = static_cast<double>(cfg.trials);
            out << kReportSchemaVersion << ',' << cfg.n << ',' << m << ',' << cfg.trials << ','
                << fmt(static_cast<double>(ok) / T) << ',' << fmt(static_cast<double>(queries) / T) << ','
                << fmt(samples ? static_cast<double>(orth) / static_cast<double>(samples) : 1.0) << '\n';
        }
    }
    res.files = {jsonl, csv};
    res.summary = {{"n", cfg.n},
                   {"m", m},
                   {"trials", cfg.trials},
                   {"successes", ok},
                   {"orthogonal_samples", orth},
                   {"samples", samples}};
    log_line(ctx, "attack: n=" + std::to_string(cfg.n) + " m=" + std::to_string(m) + " trials=" +
                      std::to_string(cfg.trials) + " successes=" + std::to_string(ok) + " orthogonal=" +
                      std::to_string(orth) + "/" + std::to_string(samples));
    return res;
}

// ---------------------------------------------------------------------------
// subgroups

CommandResult cmd_subgroups(const SubgroupsConfig& cfg, const RunContext& ctx) {
    require(!cfg.primes.empty(), "subgroups: no primes given");
    for (auto p : cfg.primes) require_prime(p);
    require(cfg.n_max >= 1 && cfg.n_max <= 16, "subgroups: n_max must lie in [1, 16]");

    struct Row {
        std::uint32_t p, n, k;
    };
    std::vector<Row> rows;
    for (auto p : cfg.primes) {
        for (std::uint32_t n = 1; n <= cfg.n_max; ++n) {
            for (std::uint32_t k = 0; k <= n; ++k) rows.push_back({p, n, k});
        }
    }
    struct Result {
        std::string line;
        bool mismatch;
    };
    const auto results = parallel_map<Result>(rows.size(), ctx.jobs, [&](std::size_t i) {
        const auto [p, n, k] = rows[i];
        const BigInt b = beta(p, n, k);
        std::string enumerated = "", status;
        if (b > cfg.cap || b > kSubgroupEnumerationCap) {
            status = "SKIPPED";
        } else {
            const auto subs = enumerate_subgroups(p, n, k);
            enumerated = std::to_string(subs.size());
            status = BigInt(subs.size()) == b ? "MATCH" : "MISMATCH";
        }
        return Result{std::to_string(p) + ',' + std::to_string(n) + ',' + std::to_string(k) + ',' + b.str() + ',' +
                          enumerated + ',' + status,
                      status == "MISMATCH"};
    });
    const auto csv = ctx.out_dir / "subgroups.csv";
    std::uint64_t match = 0, mismatch = 0, skipped = 0;
    {
        auto out = open_out(csv);
        out << "p,n,k,beta,enumerated,status\n";
        for (const auto& r : results) {
            out << r.line << '\n';
            if (r.mismatch) {
                ++mismatch;
            } else if (r.line.ends_with("MATCH")) {
                ++match;
            } else {
                ++skipped;
            }
        }
    }
    CommandResult res;
    res.files = {csv};
    res.summary = {{"match", match}, {"mismatch", mismatch}, {"skipped", skipped}};
    res.exit_code = mismatch ? kExitViolation : kExitOk;
    log_line(ctx, "subgroups: " + std::to_string(match) + " MATCH, " + std::to_string(mismatch) + " MISMATCH, " +
                      std::to_string(skipped) + " SKIPPED");
    return res;
}

// ---------------------------------------------------------------------------
// qdegree

CommandResult cmd_qdegree(const QDegreeConfig& cfg, const RunContext& ctx) {
    require_prime(cfg.p);
    require(cfg.n >= 1 && checked_pow(cfg.p, cfg.n) <= 16, "qdegree: p^n must lie in [2, 16] for exact enumeration");
    const std::uint64_t size = checked_pow(cfg.p, cfg.n);
    const std::uint32_t N = cfg.N.value_or(static_cast<std::uint32_t>(size));
    require(N >= 2, "qdegree: N must be at least 2");
    std::vector<std::uint64_t> Ds = cfg.Ds;
    if (Ds.empty()) {
        for (std::uint64_t D = 1; D <= std::min<std::uint64_t>(N, size); D *= cfg.p) Ds.push_back(D);
    }
    std::sort(Ds.begin(), Ds.end());
    Ds.erase(std::unique(Ds.begin(), Ds.end()), Ds.end());
    require(Ds.size() >= 2, "qdegree: need at least two D values");
    for (auto D : Ds) {
        try {
            (void)log_p_exact(cfg.p, D);
        } catch (const std::invalid_argument&) {
            throw ConfigError("qdegree: D = " + std::to_string(D) + " is not a power of p");
        }
        require(D <= size && D <= N, "qdegree: D = " + std::to_string(D) + " exceeds min(N, p^n)");
    }
    require(cfg.tolerance > 0, "qdegree: tolerance must be positive");

    nlohmann::json checks = nlohmann::json::array();
    bool violation = false;
    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
        checks.push_back({{"check", name}, {"status", pass ? "PASS" : "FAIL"}, {"detail", detail}});
        violation = violation || !pass;
        log_line(ctx, std::string(pass ? "PASS " : "FAIL ") + name + ": " + detail);
    };

    // Corpus of partial functions.
    const auto corpus = make_corpus(cfg.p, cfg.n, cfg.corpus, Ds, cfg.seed);
    const auto records =
        parallel_map<DegreeRecord>(corpus.size(), ctx.jobs, [&](std::size_t i) { return degree_record(corpus[i]); });
    std::uint64_t equal_all = 0, bounds_all = 0;
    std::map<std::uint64_t, std::uint64_t> equal_at;
    for (const auto& r : records) {
        equal_all += r.all_equal();
        bounds_all += r.bounds_ok();
        for (const auto& [D, eq] : r.equal) equal_at[D] += eq;
    }
    std::string per_d;
    for (const auto& [D, c] : equal_at) per_d += " D=" + std::to_string(D) + ":" + std::to_string(c);
    check("corpus_factored_equals_enumerated", equal_all == records.size(),
          std::to_string(equal_all) + "/" + std::to_string(records.size()) + " entries equal at every D;" + per_d);
    check("corpus_degree_bounds", bounds_all == records.size(),
          std::to_string(bounds_all) + "/" + std::to_string(records.size()) + " entries within all degree bounds");

    // Empty partial function: Q_s = 1 at every D.
    {
        std::vector<std::pair<Rational, Rational>> pts;
        for (auto D : Ds) pts.emplace_back(Rational(BigInt(D)), q_s_enumerated(PartialFunction(Ambient{cfg.p, cfg.n}, D)));
        const auto fit = fit_degree_exact(pts);
        check("empty_s_degree", fit.degree == 0, "degree " + std::to_string(fit.degree));
    }

    // Reference distinguisher.
    const QueryAlgorithm alg = gdikem_distinguisher_1q(cfg.p, cfg.n, N);
    QOfDOptions qo;
    qo.samples = cfg.samples;
    qo.seed = cfg.seed;
    std::vector<std::pair<double, double>> qpts;
    nlohmann::json qvals = nlohmann::json::array();
    for (auto D : Ds) {
        const QOfDResult q = q_of_d_enumerated(alg, cfg.p, cfg.n, D, N, qo);
        qpts.emplace_back(static_cast<double>(D), q.value);
        qvals.push_back({{"D", D}, {"Q", q.value}, {"std_error", q.std_error}, {"exact", q.exact}, {"method", q.method}});
        log_line(ctx, "Q(" + std::to_string(D) + ") = " + fmt(q.value, 9) + " [" + q.method + "]");
    }
    const auto qfit = fit_degree_float(qpts, cfg.tolerance);
    const std::uint64_t T = alg.query_count();
    check("distinguisher_degree", qfit.degree <= 2 * T,
          "fitted degree " + std::to_string(qfit.degree) + " vs bound " + std::to_string(2 * T));
    double prediction_error = std::nan("");
    if (qpts.size() >= 4) {
        const std::vector<std::pair<double, double>> first3(qpts.begin(), qpts.begin() + 3);
        const double pred = lagrange_predict(first3, qpts.back().first);
        prediction_error = std::abs(pred - qpts.back().second);
        check("distinguisher_quadratic_prediction", prediction_error <= cfg.tolerance,
              "predicted Q(" + fmt(qpts.back().first, 0) + ") = " + fmt(pred, 9) + ", actual " +
                  fmt(qpts.back().second, 9) + ", error " + sci(prediction_error));
    }
    if (qpts.size() >= 2 && qpts[0].first == 1 && qpts[1].first == cfg.p) {
        check("distinguisher_gap", qpts[1].second > qpts[0].second,
              "Q(p) = " + fmt(qpts[1].second, 9) + " vs Q(1) = " + fmt(qpts[0].second, 9));
    }

    CommandResult res;
    const auto json_path = ctx.out_dir / "qdegree.json";
    const auto jsonl = ctx.out_dir / "qdegree.jsonl";
    const auto csv = ctx.out_dir / "qdegree.csv";
    nlohmann::json report{
        {"schema", "emq-degree-report"},
        {"version", kReportSchemaVersion},
        {"p", cfg.p},
        {"n", cfg.n},
        {"N", N},
        {"Ds", Ds},
        {"corpus", {{"size", records.size()}, {"seed", cfg.seed}, {"equal", equal_all}, {"bounds_ok", bounds_all}}},
        {"distinguisher", {{"T", T}, {"values", qvals}, {"fit", to_json(qfit)}}},
        {"checks", checks},
    };
    if (!std::isnan(prediction_error)) report["distinguisher"]["prediction_error"] = prediction_error;
    {
        auto out = open_out(json_path);
        out << report.dump(2) << '\n';
    }
    {
        auto out = open_out(jsonl);
        out << report_header("emq-degree-corpus", ctx.timestamp).dump() << '\n';
        for (std::size_t i = 0; i < records.size(); ++i) {
            nlohmann::json rec = to_json(records[i]);
            rec["entry"] = i;
            nlohmann::json dom = nlohmann::json::array();
            for (auto x : records[i].domain) dom.push_back(GroupVector::from_code(Ambient{cfg.p, cfg.n}, x).to_string());
            rec["domain"] = dom;
            out << rec.dump() << '\n';
        }
    }
    {
        auto out = open_out(csv);
        out << "check,status,detail\n";
        for (const auto& c : checks) {
            out << c["check"].get<std::string>() << ',' << c["status"].get<std::string>() << ",\""
                << c["detail"].get<std::string>() << "\"\n";
        }
    }
    res.files = {json_path, jsonl, csv};
    res.summary = report;
    res.exit_code = violation ? kExitViolation : kExitOk;
    return res;
}

// ---------------------------------------------------------------------------
// bound

std::string gnuplot_script(const std::string& csv_name, const BoundConfig& cfg) {
    std::string s;
    s += "# Degree lower bound against n, p = " + std::to_string(cfg.p) + ", epsilon = " + fmt(cfg.epsilon) + "\n";
    s += "set datafile separator ','\n";
    s += "set key top left\n";
    s += "set xlabel 'n'\n";
    s += "set ylabel 'degree bound'\n";
    s += "plot '" + csv_name + "' using 1:($3 ne \"switch\" ? $2 : 1/0) every ::1 with linespoints title 'bound', \\\n";
    s += "     x/2 with lines dashtype 2 title 'n/2'\n";
    return s;
}

CommandResult cmd_bound(const BoundConfig& cfg, const RunContext& ctx) {
    require_prime(cfg.p);
    require(cfg.epsilon > 0 && cfg.epsilon <= 0.5, "bound: epsilon must lie in (0, 1/2]");
    require(cfg.n_step >= 1, "bound: n_step must be positive");
    require(cfg.n_min <= cfg.n_max, "bound: n_min exceeds n_max");

    const double L = std::log2(static_cast<double>(cfg.p));
    const double den = std::log2(std::pow(cfg.p, 3.0) / (cfg.p - 1)) + 1;
    const double c = (2 - 4 * cfg.epsilon) / (cfg.p - 1);
    // n/2 equals the affine branch where n (den/2 - L) = 3L + log2 c - 1.
    std::optional<double> switch_n;
    if (c > 0 && den / 2 - L > 0) switch_n = (3 * L + std::log2(c) - 1) / (den / 2 - L);

    const auto csv = ctx.out_dir / "bound.csv";
    nlohmann::json rows = nlohmann::json::array();
    {
        auto out = open_out(csv);
        out << "n,bound,branch\n";
        for (std::uint64_t n = cfg.n_min; n <= cfg.n_max; n += cfg.n_step) {
            const double b = koiran_bound(cfg.p, static_cast<double>(n), cfg.epsilon);
            const char* branch = b == 0 ? "zero" : (b >= static_cast<double>(n) / 2 ? "n/2" : "affine");
            out << n << ',' << fmt(b) << ',' << branch << '\n';
            rows.push_back({{"n", n}, {"bound", b}, {"branch", branch}});
        }
        if (switch_n) out << fmt(*switch_n) << ',' << fmt(std::max(0.0, *switch_n / 2)) << ",switch\n";
    }
    CommandResult res;
    res.files = {csv};
    if (cfg.gnuplot_script) {
        auto out = open_out(*cfg.gnuplot_script);
        out << gnuplot_script(csv.filename().string(), cfg);
        res.files.push_back(*cfg.gnuplot_script);
    }
    res.summary = {{"p", cfg.p}, {"epsilon", cfg.epsilon}, {"rows", rows}};
    res.summary["switch_n"] = switch_n ? nlohmann::json(*switch_n) : nlohmann::json(nullptr);
    log_line(ctx, "bound: " + std::to_string(rows.size()) + " rows" +
                      (switch_n ? ", branch switch at n = " + fmt(*switch_n, 4) : std::string()));
    return res;
}

// ---------------------------------------------------------------------------
// reduce

CommandResult cmd_reduce(const ReduceConfig& cfg, const RunContext& ctx) {
    require_prime(cfg.p);
    require(cfg.n >= 1, "reduce: n must be positive");
    require(cfg.N >= cfg.p, "reduce: N must be at least p (one selector digit)");
    require(cfg.tolerance > 0, "reduce: tolerance must be positive");
    const RegisterLayout probe{cfg.p, 1, cfg.n, cfg.N, cfg.n + 1};
    require(probe.total_digits() * std::log2(static_cast<double>(cfg.p)) <= 26, "reduce: compiled circuit exceeds the simulator cap");

    struct Row {
        nlohmann::json record;
        double tv;
        double residue;
        bool queries_ok;
    };
    const auto rows = parallel_map<Row>(cfg.circuits, ctx.jobs, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(cfg.seed, i);
        Rng rng(seed);
        const QueryAlgorithm a = random_standard_circuit(
            RandomCircuitParams{cfg.p, cfg.n, 1, 1, cfg.max_queries, 3}, rng);
        std::vector<PermutationOracle> oracles;
        for (std::uint32_t b = 0; b < cfg.N; ++b) oracles.push_back(PermutationOracle::random(Ambient{cfg.p, cfg.n}, rng));
        std::vector<std::span<const std::uint32_t>> tables;
        for (const auto& o : oracles) tables.push_back(o.table());

        const CompiledAlgorithm c = compile_to_sync(a, cfg.N);
        const Distribution want = output_distribution(a, tables);
        double residue = 0;
        SimOptions opts;
        std::size_t next_end = 0;
        opts.observer = [&](std::size_t stage, const StateVector& s) {
            if (next_end < c.sandwich_ends.size() && stage == c.sandwich_ends[next_end]) {
                residue = std::max(residue, answer_block_residue(s, c.compiled.layout));
                ++next_end;
            }
        };
        const RunResult r = run(c.compiled, tables, opts);
        const Distribution got{c.compiled.outcome_space(), r.state.marginal(c.compiled.measured)};
        const double tv = tv_distance(want, got);
        const bool queries_ok = c.compiled.query_count() == 2 * a.query_count() && r.queries == 2 * a.query_count();
        nlohmann::json rec{
            {"circuit", i},       {"seed", seed},           {"T", a.query_count()}, {"compiled_queries", r.queries},
            {"tv", tv},           {"residue", residue},     {"queries_ok", queries_ok},
            {"ok", tv <= cfg.tolerance && residue <= cfg.tolerance && queries_ok},
        };
        return Row{std::move(rec), tv, residue, queries_ok};
    });

    const auto jsonl = ctx.out_dir / "reduce.jsonl";
    const auto csv = ctx.out_dir / "reduce.csv";
    double max_tv = 0, max_res = 0;
    std::uint64_t bad_queries = 0;
    {
        auto out = open_out(jsonl);
        out << report_header("emq-reduce-circuits", ctx.timestamp).dump() << '\n';
        for (const auto& r : rows) {
            out << r.record.dump() << '\n';
            max_tv = std::max(max_tv, r.tv);
            max_res = std::max(max_res, r.residue);
            bad_queries += !r.queries_ok;
        }
    }
    const bool ok = max_tv <= cfg.tolerance && max_res <= cfg.tolerance && bad_queries == 0;
    {
        auto out = open_out(csv);
        out << "schema_version,circuits,p,n,N,max_tv,max_residue,query_mismatches,status\n";
        out << kReportSchemaVersion << ',' << cfg.circuits << ',' << cfg.p << ',' << cfg.n << ',' << cfg.N << ','
            << sci(max_tv) << ',' << sci(max_res) << ',' << bad_queries << ',' << (ok ? "PASS" : "FAIL") << '\n';
    }
    CommandResult res;
    res.files = {jsonl, csv};
    res.summary = {{"circuits", cfg.circuits}, {"max_tv", max_tv}, {"max_residue", max_res}, {"query_mismatches", bad_queries}};
    res.exit_code = ok ? kExitOk : kExitViolation;
    log_line(ctx, "reduce: " + std::to_string(cfg.circuits) + " circuits, max TV " + sci(max_tv) + ", max residue " +
                      sci(max_res) + ", query mismatches " + std::to_string(bad_queries));
    return res;
}

}  // namespace emq
