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

// emq: experiment runner.
//
//   emq attack    --n 6 --m 10 --trials 200 --seed 1
//   emq subgroups --primes 2,3 --n-max 4
//   emq qdegree   --p 2 --n 3 --corpus 50
//   emq bound     --p 2 --epsilon 0.3333 --n-min 8 --n-max 256 --gnuplot-script bound.gp
//   emq reduce    --circuits 20 --n 3 --N 2
//
// Options may also come from a key=value file given with --config; keys
// inside a subcommand use the "[attack]" section form or "attack.n=6".

#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "emq/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Hidden-subgroup oracle experiments: attacks, reductions and polynomial-method checks"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value configuration file");

    std::string out_dir = emq::default_output_dir().string();
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    bool no_timestamp = false;
    app.add_option("--out-dir", out_dir, "Output directory (default: $EMQ_OUTPUT_DIR or .)");
    app.add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--no-timestamp", no_timestamp, "Write a null timestamp in JSONL headers");

    emq::AttackConfig attack;
    std::uint64_t attack_m = 0;
    auto* a = app.add_subcommand("attack", "Key recovery on Even-Mansour with synchronized queries");
    a->add_option("--n", attack.n, "Block size in bits");
    a->add_option("--m", attack_m, "Queries per trial (default n + 4)");
    a->add_option("--trials", attack.trials, "Number of seeded trials");
    a->add_option("--seed", attack.seed, "Base seed");
    a->add_flag("--allow-zero-k1", attack.allow_zero_k1, "Allow k1 = 0 in instances and candidates");

    emq::SubgroupsConfig subgroups;
    auto* s = app.add_subcommand("subgroups", "Subgroup counts against enumeration");
    s->add_option("--primes", subgroups.primes, "Primes to tabulate")->delimiter(',');
    s->add_option("--n-max", subgroups.n_max, "Largest n");
    s->add_option("--cap", subgroups.cap, "Skip enumeration above this many subgroups");

    emq::QDegreeConfig qdegree;
    std::uint32_t q_N = 0;
    auto* q = app.add_subcommand("qdegree", "Degree report for Q(D) and the partial-function corpus");
    q->add_option("--p", qdegree.p, "Prime");
    q->add_option("--n", qdegree.n, "Dimension");
    q->add_option("--N", q_N, "Synchronized blocks (default p^n)");
    q->add_option("--D", qdegree.Ds, "Hidden orders (default all p^d)")->delimiter(',');
    q->add_option("--corpus", qdegree.corpus, "Corpus size");
    q->add_option("--seed", qdegree.seed, "Corpus seed");
    q->add_option("--tolerance", qdegree.tolerance, "Float fit tolerance");
    q->add_option("--samples", qdegree.samples, "Samples when enumeration is out of reach");

    emq::BoundConfig bound;
    std::string gp;
    auto* b = app.add_subcommand("bound", "Tabulate the degree lower bound over n");
    b->add_option("--p", bound.p, "Prime");
    b->add_option("--epsilon", bound.epsilon, "Error epsilon in (0, 1/2]");
    b->add_option("--n-min", bound.n_min, "First n");
    b->add_option("--n-max", bound.n_max, "Last n");
    b->add_option("--n-step", bound.n_step, "Step in n");
    b->add_option("--gnuplot-script", gp, "Also write a gnuplot script to this path");

    emq::ReduceConfig reduce;
    auto* r = app.add_subcommand("reduce", "Compile random standard circuits to the synchronized model");
    r->add_option("--circuits", reduce.circuits, "Number of random circuits");
    r->add_option("--p", reduce.p, "Prime");
    r->add_option("--n", reduce.n, "Dimension");
    r->add_option("--N", reduce.N, "Synchronized blocks");
    r->add_option("--max-queries", reduce.max_queries, "Largest T per circuit");
    r->add_option("--seed", reduce.seed, "Base seed");
    r->add_option("--tolerance", reduce.tolerance, "TV and residue tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return emq::kExitConfig;
    }

    emq::RunContext ctx;
    ctx.out_dir = out_dir;
    ctx.jobs = jobs;
    ctx.timestamp = !no_timestamp;
    ctx.log = &std::cout;
    try {
        emq::CommandResult res;
        if (*a) {
            if (a->count("--m")) attack.m = attack_m;
            res = emq::cmd_attack(attack, ctx);
        } else if (*s) {
            res = emq::cmd_subgroups(subgroups, ctx);
        } else if (*q) {
            if (q->count("--N")) qdegree.N = q_N;
            res = emq::cmd_qdegree(qdegree, ctx);
        } else if (*b) {
            if (!gp.empty()) bound.gnuplot_script = gp;
            res = emq::cmd_bound(bound, ctx);
        } else {
            res = emq::cmd_reduce(reduce, ctx);
        }
        for (const auto& f : res.files) std::cout << "wrote " << f.string() << '\n';
        return res.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return emq::kExitConfig;
    }
}
