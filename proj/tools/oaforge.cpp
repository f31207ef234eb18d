// oaforge: construction and evaluation of space-filling order-of-addition
// designs over permutation spaces, plus the benchmark and surrogate demos.

#include "oaforge/anneal.hpp"
#include "oaforge/bo.hpp"
#include "oaforge/criteria.hpp"
#include "oaforge/error.hpp"
#include "oaforge/foldover.hpp"
#include "oaforge/gp.hpp"
#include "oaforge/io.hpp"
#include "oaforge/tsp.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace oaforge;

namespace {

using Clock = std::chrono::steady_clock;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kDefaultInstanceSeed = 1729;

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = base;
    std::uint64_t out = splitmix64(state);
    for (std::uint64_t p : parts) {
        state ^= p + 0x9e3779b97f4a7c15ULL;
        out = splitmix64(state);
    }
    return out;
}

int default_jobs() {
    if (const char* env = std::getenv("OAFORGE_JOBS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            return 1;
        }
    }
    return 1;
}

template <typename Task, typename Fn>
void run_parallel(std::vector<Task>& tasks, int jobs, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) {
                break;
            }
            fn(tasks[i]);
        }
    };
    if (jobs <= 1 || tasks.size() <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> threads;
    const int count = std::min<std::size_t>(jobs, tasks.size());
    threads.reserve(count);
    for (int j = 0; j < count; ++j) {
        threads.emplace_back(worker);
    }
    for (std::thread& t : threads) {
        t.join();
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string default_report_path(const std::string& out) {
    const auto dot = out.find_last_of('.');
    const auto slash = out.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return out + ".json";
    }
    return out.substr(0, dot) + ".json";
}

// ---------------------------------------------------------------------------
// construct
// ---------------------------------------------------------------------------

struct ConstructArgs {
    int m = 0;
    long long n = 0;
    double lambda = 0.5;
    std::uint64_t seed = 0;
    std::string method = "fsa-kd";
    std::string out;
    std::string report;
    double t0 = 1.0;
    double t_min = 1e-8;
    double alpha = 0.997;
    long long n_max = 6000;
};

int cmd_construct(const ConstructArgs& args) {
    if (args.lambda < 0.0 || args.lambda > 1.0) {
        throw UsageError("--lambda must lie in [0,1]");
    }
    if (args.method == "fsa-kd" && args.n % 2 != 0) {
        throw UsageError("method fsa-kd requires an even run size n");
    }
    if (args.method == "odd" && args.n % 2 == 0) {
        throw UsageError("method odd requires an odd run size n");
    }

    AnnealConfig cfg;
    cfg.m = args.m;
    cfg.n = args.n;
    cfg.lambda = args.lambda;
    cfg.seed = args.seed;
    cfg.t0 = args.t0;
    cfg.t_min = args.t_min;
    cfg.alpha = args.alpha;
    cfg.n_max = args.n_max;

    const auto start = Clock::now();
    std::mt19937_64 rng(args.seed);
    std::optional<Design> design;
    long long updates = 0;
    if (args.method == "fsa-kd") {
        SearchOptions options;
        options.record_trace = false;
        FsaResult result = run_fsa_kd(cfg, rng, options);
        updates = result.updates;
        design = std::move(result.design);
    } else if (args.method == "srs") {
        design = srs_design(args.n, args.m, rng);
    } else if (args.method == "ordinary-sa") {
        OrdinaryResult result = ordinary_sa(cfg, rng, OrdinaryUpdate::Full);
        updates = result.updates;
        design = std::move(result.design);
    } else if (args.method == "odd") {
        SearchOptions options;
        options.record_trace = false;
        design = odd_run_design(cfg, rng, options, &updates);
    } else {
        throw UsageError("unknown method '" + args.method + "'");
    }

    MetricsReport report;
    report.m = args.m;
    report.n = design->n();
    report.method = args.method;
    report.seed = args.seed;
    report.lambda = args.lambda;
    report.summary = evaluate_design(*design, args.lambda);
    report.foldover = is_foldover_design(*design);
    report.update_count = updates;
    report.elapsed_seconds =
        std::chrono::duration<double>(Clock::now() - start).count();

    DesignFileMeta meta{{"m", std::to_string(args.m)},
                        {"n", std::to_string(design->n())},
                        {"seed", std::to_string(args.seed)},
                        {"method", args.method},
                        {"lambda", format_double(args.lambda)}};
    write_design_csv(args.out, *design, meta);
    const std::string report_path =
        args.report.empty() ? default_report_path(args.out) : args.report;
    write_metrics_json(report_path, report);
    std::cout << metrics_to_json(report).dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string in;
    double lambda = 0.5;
    std::string report;
};

int cmd_evaluate(const EvaluateArgs& args) {
    if (args.lambda < 0.0 || args.lambda > 1.0) {
        throw UsageError("--lambda must lie in [0,1]");
    }
    const auto start = Clock::now();
    const DesignFile file = read_design_csv(args.in);
    const Design& d = file.design;

    MetricsReport report;
    report.m = d.m();
    report.n = d.n();
    if (auto it = file.meta.find("method"); it != file.meta.end()) {
        report.method = it->second;
    }
    if (auto it = file.meta.find("seed"); it != file.meta.end()) {
        try {
            report.seed = std::stoull(it->second);
        } catch (const std::exception&) {
        }
    }
    report.lambda = args.lambda;
    report.summary = evaluate_design(d, args.lambda);
    report.foldover = is_foldover_design(d);
    if (d.has_duplicate_runs()) {
        report.warnings.push_back("design contains duplicate runs; k_min is 0");
        std::cerr << "oaforge: warning: design contains duplicate runs\n";
    }
    if (!report.summary.bounds) {
        report.warnings.push_back(
            "bounds and phi are defined only for even n >= 4 with m >= 3");
    }
    report.elapsed_seconds =
        std::chrono::duration<double>(Clock::now() - start).count();

    if (!args.report.empty()) {
        write_metrics_json(args.report, report);
    }
    std::cout << metrics_to_json(report).dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct Budget {
    enum class Kind { Updates, Seconds } kind = Kind::Updates;
    long long updates = 1200;
    double seconds = 2.0;
};

Budget parse_budget(const std::string& text) {
    Budget b;
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw UsageError("budget must be updates:N or seconds:S");
    }
    const std::string kind = text.substr(0, colon);
    const std::string value = text.substr(colon + 1);
    try {
        if (kind == "updates") {
            b.kind = Budget::Kind::Updates;
            b.updates = std::stoll(value);
            if (b.updates < 1) {
                throw UsageError("budget updates must be >= 1");
            }
        } else if (kind == "seconds") {
            b.kind = Budget::Kind::Seconds;
            b.seconds = std::stod(value);
            if (b.seconds <= 0) {
                throw UsageError("budget seconds must be > 0");
            }
        } else {
            throw UsageError("budget must be updates:N or seconds:S");
        }
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("invalid budget value '" + value + "'");
    }
    return b;
}

// Run sizes may be absolute ("16") or multiples of m ("2m", "m").
long long resolve_run_size(const std::string& token, int m) {
    std::string t = token;
    if (!t.empty() && (t.back() == 'm' || t.back() == 'M')) {
        t.pop_back();
        const long long mult = t.empty() ? 1 : std::stoll(t);
        return mult * m;
    }
    return std::stoll(t);
}

struct BenchArgs {
    std::vector<int> m_list{6, 8, 10};
    std::vector<std::string> n_list{"m", "2m", "3m", "4m"};
    int reps = 10;
    std::string budget_text = "updates:1200";
    std::vector<std::string> methods{"ordinary-sa", "foldover-full", "foldover-incremental"};
    std::string out;
    std::uint64_t seed = 1;
    double lambda = 0.5;
    int jobs = default_jobs();
};

struct BenchCell {
    int m = 0;
    long long n = 0;
    std::string method;
    int rep = 0;
    std::uint64_t seed = 0;
    // results
    bool failed = false;
    std::string error;
    double elapsed = 0.0;
    long long updates = 0;
    long long k_min = 0;
    Rat k_m2;
    double phi = 0.0;
};

void run_bench_cell(BenchCell& cell, const Budget& budget, double lambda) {
    const auto start = Clock::now();
    std::mt19937_64 rng(cell.seed);

    AnnealConfig cfg;
    cfg.m = cell.m;
    cfg.n = cell.n;
    cfg.lambda = lambda;
    cfg.seed = cell.seed;

    SearchOptions options;
    options.record_trace = false;
    std::optional<Clock::time_point> deadline;
    if (budget.kind == Budget::Kind::Updates) {
        cfg.n_max = budget.updates;
    } else {
        deadline = start + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(budget.seconds));
        options.deadline = deadline;
        cfg.n_max = std::numeric_limits<long long>::max();
    }

    std::optional<Design> best;
    double best_phi = 0.0;
    long long updates = 0;

    auto consider = [&](Design d, double phi, long long u) {
        updates += u;
        if (!best || phi > best_phi) {
            best_phi = phi;
            best = std::move(d);
        }
    };

    // Under a wall-clock budget the schedule restarts until time is
    // exhausted, keeping the incumbent across restarts.
    do {
        if (cell.method == "ordinary-sa") {
            OrdinaryResult r = ordinary_sa(cfg, rng, OrdinaryUpdate::Full, options);
            consider(std::move(r.design), r.phi, r.updates);
        } else if (cell.method == "foldover-full") {
            SearchOptions o = options;
            o.mode = UpdateMode::FullRecompute;
            FsaResult r = run_fsa_kd(cfg, rng, o);
            consider(std::move(r.design), r.phi, r.updates);
        } else if (cell.method == "foldover-incremental") {
            FsaResult r = run_fsa_kd(cfg, rng, options);
            consider(std::move(r.design), r.phi, r.updates);
        } else {
            throw UsageError("unknown bench method '" + cell.method + "'");
        }
    } while (deadline && Clock::now() < *deadline);

    // Final metric evaluation is inside the measured window.
    const DistanceHistogram h = distance_histogram(*best);
    cell.k_min = k_min(h);
    cell.k_m2 = k_m2(h);
    cell.phi = best_phi;
    cell.updates = updates;
    cell.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
}

int cmd_bench(const BenchArgs& args) {
    const Budget budget = parse_budget(args.budget_text);

    std::vector<BenchCell> cells;
    for (int m : args.m_list) {
        for (const std::string& token : args.n_list) {
            const long long n = resolve_run_size(token, m);
            if (n % 2 != 0) {
                throw UsageError("bench run sizes must be even (foldover methods); got " +
                                 std::to_string(n));
            }
            for (std::size_t mi = 0; mi < args.methods.size(); ++mi) {
                for (int rep = 0; rep < args.reps; ++rep) {
                    BenchCell cell;
                    cell.m = m;
                    cell.n = n;
                    cell.method = args.methods[mi];
                    cell.rep = rep;
                    cell.seed = mix_seed(args.seed, {static_cast<std::uint64_t>(m),
                                                     static_cast<std::uint64_t>(n), mi,
                                                     static_cast<std::uint64_t>(rep)});
                    cells.push_back(std::move(cell));
                }
            }
        }
    }

    run_parallel(cells, args.jobs, [&](BenchCell& cell) {
        try {
            run_bench_cell(cell, budget, args.lambda);
        } catch (const std::exception& e) {
            cell.failed = true;
            cell.error = e.what();
        }
    });

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!args.out.empty()) {
        file.open(args.out);
        if (!file) {
            throw std::runtime_error("cannot write bench output: " + args.out);
        }
        out = &file;
    }
    *out << "m,n,method,rep,seed,elapsed_seconds,update_count,k_min,k_m2,phi\n";
    for (const BenchCell& cell : cells) {
        if (cell.failed) {
            continue;
        }
        *out << cell.m << "," << cell.n << "," << cell.method << "," << cell.rep << ","
             << cell.seed << "," << format_double(cell.elapsed) << "," << cell.updates << ","
             << cell.k_min << "," << rat_to_string(cell.k_m2) << "," << format_double(cell.phi)
             << "\n";
    }

    // Per-method summary over the grid.
    std::map<std::string, std::pair<double, double>> sums; // elapsed, k_min
    std::map<std::string, long long> counts;
    bool any_failed = false;
    for (const BenchCell& cell : cells) {
        if (cell.failed) {
            any_failed = true;
            std::cerr << "oaforge: bench cell failed (m=" << cell.m << " n=" << cell.n
                      << " method=" << cell.method << " rep=" << cell.rep << "): " << cell.error
                      << "\n";
            continue;
        }
        sums[cell.method].first += cell.elapsed;
        sums[cell.method].second += static_cast<double>(cell.k_min);
        ++counts[cell.method];
    }
    std::cerr << "budget=" << args.budget_text << "\n";
    std::cerr << "method,mean_elapsed_seconds,mean_k_min\n";
    for (const std::string& method : args.methods) {
        if (counts[method] == 0) {
            continue;
        }
        const double inv = 1.0 / static_cast<double>(counts[method]);
        std::fprintf(stderr, "%s,%.6f,%.3f\n", method.c_str(), sums[method].first * inv,
                     sums[method].second * inv);
    }
    return any_failed ? 2 : 0;
}

// ---------------------------------------------------------------------------
// bo-demo
// ---------------------------------------------------------------------------

struct BoDemoArgs {
    int m = 10;
    int n_init = 20;
    int n_seq = 60;
    std::string init = "fsa-kd";
    int reps = 20;
    std::uint64_t seed = 1;
    int restarts = 10;
    std::string out;
    std::string instance_path;
    std::string instance_kind = "asymmetric";
    std::uint64_t instance_seed = kDefaultInstanceSeed;
    std::string save_instance;
    int jobs = default_jobs();
};

int cmd_bo_demo(const BoDemoArgs& args) {
    if (args.init != "fsa-kd" && args.init != "srs") {
        throw UsageError("--init must be fsa-kd or srs");
    }
    if (args.instance_kind != "asymmetric" && args.instance_kind != "euclidean") {
        throw UsageError("--instance-kind must be asymmetric or euclidean");
    }
    const TspInstance instance = [&] {
        if (!args.instance_path.empty()) {
            return TspInstance::load_csv(args.instance_path);
        }
        return args.instance_kind == "euclidean"
                   ? TspInstance::random_euclidean(args.m, args.instance_seed)
                   : TspInstance::random_asymmetric(args.m, args.instance_seed);
    }();
    if (instance.m() != args.m) {
        throw UsageError("instance size does not match --m");
    }
    if (!args.save_instance.empty()) {
        instance.save_csv(args.save_instance);
    }

    struct Rep {
        int rep = 0;
        std::uint64_t seed = 0;
        std::vector<double> best_so_far;
        bool failed = false;
        std::string error;
    };
    std::vector<Rep> reps(args.reps);
    for (int r = 0; r < args.reps; ++r) {
        reps[r].rep = r;
        reps[r].seed = mix_seed(args.seed, {static_cast<std::uint64_t>(r)});
    }

    run_parallel(reps, args.jobs, [&](Rep& rep) {
        try {
            BoConfig cfg;
            cfg.n_init = args.n_init;
            cfg.n_seq = args.n_seq;
            cfg.init_mode = args.init == "fsa-kd" ? BoInitMode::FsaKd : BoInitMode::Srs;
            cfg.restarts = args.restarts;
            cfg.seed = rep.seed;
            rep.best_so_far = run_bo(instance, cfg).best_so_far;
        } catch (const std::exception& e) {
            rep.failed = true;
            rep.error = e.what();
        }
    });

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!args.out.empty()) {
        file.open(args.out);
        if (!file) {
            throw std::runtime_error("cannot write trace output: " + args.out);
        }
        out = &file;
    }
    *out << "rep,iteration,best_so_far\n";
    for (const Rep& rep : reps) {
        if (rep.failed) {
            continue;
        }
        for (std::size_t i = 0; i < rep.best_so_far.size(); ++i) {
            *out << rep.rep << "," << i + 1 << "," << format_double(rep.best_so_far[i]) << "\n";
        }
    }

    bool any_failed = false;
    for (const Rep& rep : reps) {
        if (rep.failed) {
            any_failed = true;
            std::cerr << "oaforge: bo rep " << rep.rep << " failed: " << rep.error << "\n";
        }
    }

    // Mean best-so-far at a few milestones.
    const int total = args.n_init + args.n_seq;
    std::cerr << "init=" << args.init << " instance_seed=" << args.instance_seed << "\n";
    std::cerr << "iteration,mean_best_so_far\n";
    for (int it : {args.n_init, args.n_init + args.n_seq / 4, args.n_init + args.n_seq / 2,
                   total}) {
        if (it < 1 || it > total) {
            continue;
        }
        double sum = 0.0;
        long long count = 0;
        for (const Rep& rep : reps) {
            if (!rep.failed && static_cast<int>(rep.best_so_far.size()) >= it) {
                sum += rep.best_so_far[it - 1];
                ++count;
            }
        }
        if (count > 0) {
            std::fprintf(stderr, "%d,%.6f\n", it, sum / static_cast<double>(count));
        }
    }
    return any_failed ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"space-filling order-of-addition designs under the Kendall tau distance"};
    app.require_subcommand(1);

    ConstructArgs construct;
    CLI::App* c = app.add_subcommand("construct", "construct a design and report its metrics");
    c->add_option("--m", construct.m, "number of components")->required();
    c->add_option("--n", construct.n, "number of runs")->required();
    c->add_option("--lambda", construct.lambda, "objective weight in [0,1]");
    c->add_option("--seed", construct.seed, "random seed");
    c->add_option("--method", construct.method, "fsa-kd | srs | ordinary-sa | odd");
    c->add_option("--out", construct.out, "design CSV path")->required();
    c->add_option("--report", construct.report, "metrics JSON path (default: out with .json)");
    c->add_option("--t0", construct.t0, "initial temperature");
    c->add_option("--t-min", construct.t_min, "stopping temperature");
    c->add_option("--alpha", construct.alpha, "cooling factor");
    c->add_option("--n-max", construct.n_max, "maximum iterations");

    EvaluateArgs evaluate;
    CLI::App* e = app.add_subcommand("evaluate", "evaluate a design file");
    e->add_option("--in", evaluate.in, "design CSV path")->required();
    e->add_option("--lambda", evaluate.lambda, "objective weight in [0,1]");
    e->add_option("--report", evaluate.report, "also write the metrics JSON here");

    BenchArgs bench;
    CLI::App* b = app.add_subcommand("bench", "budget-fair runtime benchmark");
    b->add_option("--m-list", bench.m_list, "component counts")->delimiter(',');
    b->add_option("--n-list", bench.n_list, "run sizes; absolute or multiples like 2m")
        ->delimiter(',');
    b->add_option("--reps", bench.reps, "repetitions per cell");
    b->add_option("--budget", bench.budget_text, "updates:N or seconds:S");
    b->add_option("--methods", bench.methods,
                  "ordinary-sa | foldover-full | foldover-incremental")
        ->delimiter(',');
    b->add_option("--out", bench.out, "results CSV path (default: stdout)");
    b->add_option("--seed", bench.seed, "base seed");
    b->add_option("--lambda", bench.lambda, "objective weight");
    b->add_option("--jobs", bench.jobs, "parallel cells (default: OAFORGE_JOBS or 1)");

    BoDemoArgs bo;
    CLI::App* o = app.add_subcommand("bo-demo", "surrogate optimization demo on a tour objective");
    o->add_option("--m", bo.m, "number of cities");
    o->add_option("--n-init", bo.n_init, "initial evaluations");
    o->add_option("--n-seq", bo.n_seq, "sequential evaluations");
    o->add_option("--init", bo.init, "initial design: fsa-kd | srs");
    o->add_option("--reps", bo.reps, "independent repetitions");
    o->add_option("--seed", bo.seed, "base seed");
    o->add_option("--restarts", bo.restarts, "acquisition local-search restarts");
    o->add_option("--out", bo.out, "trace CSV path (default: stdout)");
    o->add_option("--instance", bo.instance_path, "load a cost matrix instead of generating one");
    o->add_option("--instance-kind", bo.instance_kind,
                  "generated instance type: asymmetric | euclidean");
    o->add_option("--instance-seed", bo.instance_seed, "seed for the generated instance");
    o->add_option("--save-instance", bo.save_instance, "write the generated instance here");
    o->add_option("--jobs", bo.jobs, "parallel repetitions (default: OAFORGE_JOBS or 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::CallForAllHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& err) {
        std::cerr << "oaforge: " << err.what() << "\n";
        return 1;
    }

    try {
        if (c->parsed()) {
            return cmd_construct(construct);
        }
        if (e->parsed()) {
            return cmd_evaluate(evaluate);
        }
        if (b->parsed()) {
            return cmd_bench(bench);
        }
        if (o->parsed()) {
            return cmd_bo_demo(bo);
        }
        return 1;
    } catch (const UsageError& err) {
        std::cerr << "oaforge: usage error: " << err.what() << "\n";
        return 1;
    } catch (const ParseError& err) {
        std::cerr << "oaforge: parse error: " << err.what() << "\n";
        return 2;
    } catch (const InfeasibleError& err) {
        std::cerr << "oaforge: infeasible: " << err.what() << "\n";
        return 2;
    } catch (const ConditioningError& err) {
        std::cerr << "oaforge: " << err.what() << "\n";
        return 2;
    } catch (const CapabilityError& err) {
        std::cerr << "oaforge: " << err.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& err) {
        std::cerr << "oaforge: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "oaforge: internal error: " << err.what() << "\n";
        return 3;
    }
}
