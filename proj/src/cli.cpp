#include "bimax/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "bimax/constrained.hpp"
#include "bimax/driver.hpp"
#include "bimax/dro.hpp"
#include "bimax/instances.hpp"
#include "bimax/serialize.hpp"

namespace bimax {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string &path, const std::string &bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << bytes))
        throw std::runtime_error("cannot write " + path);
}

// ---- instances ----

Json toy_unconstrained_json() {
    Json j;
    j["family"] = "toy-unconstrained";
    j["seed"] = 0;
    j["dims"] = {{"n_x1", 1}, {"n_x2", 1}, {"n_y1", 1}, {"n_y2", 1}};
    j["analytic_solution"] = {{"x1", 0.15}, {"y1", 0.15}, {"y2", 0.0}};
    return j;
}

Json toy_constrained_json() {
    const auto toy = make_toy_constrained();
    Json j;
    j["family"] = "toy-constrained";
    j["seed"] = 0;
    j["dims"] = {{"n_x1", 1}, {"n_y1", 1}, {"l", 1}};
    j["constants"] = {{"B", toy.problem.dual_bound()}, {"G", toy.problem.slater_margin}};
    j["analytic_solution"] = {{"x1", toy.analytic_solution[0]},
                              {"y1", toy.analytic_solution[1]},
                              {"upper_value", toy.upper_value}};
    return j;
}

Json dro_json(const DroInstance &inst) {
    Json j;
    j["family"] = "dro";
    j["seed"] = inst.config.seed;
    j["dims"] = {{"groups", inst.config.groups},
                 {"n_x1", inst.problem.layout.n_x1},
                 {"n_y1", inst.problem.layout.n_y1}};
    j["config"] = to_json(inst.config);
    Json train = Json::array(), val = Json::array();
    for (const auto &g : inst.groups) {
        train.push_back(g.train.rows());
        val.push_back(g.val.rows());
    }
    j["group_sizes"] = {{"train", train}, {"val", val}};
    j["constants"] = {{"feature_scale", inst.feature_scale},
                      {"delta_f", inst.delta_f},
                      {"delta_ftilde", inst.delta_ftilde}};
    return j;
}

struct LoadedInstance {
    std::string family, digest, id;
    BilevelMinimaxProblem problem;
    std::optional<ConstrainedBilevelProblem> constrained;
    std::shared_ptr<const DroInstance> dro;
};

LoadedInstance load_instance(const std::string &path) {
    const std::string bytes = read_file(path);
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const Json::parse_error &e) {
        throw UsageError(path + ": " + e.what());
    }
    LoadedInstance li;
    li.digest = content_digest(bytes);
    li.id = fs::path(path).stem().string();
    try {
        li.family = j.at("family").get<std::string>();
        if (li.family == "linear") {
            li.constrained = linear_problem(linear_from_json(j));
            li.problem = reformulate(*li.constrained);
        } else if (li.family == "toy-constrained") {
            li.constrained = make_toy_constrained().problem;
            li.problem = reformulate(*li.constrained);
        } else if (li.family == "toy-unconstrained") {
            li.problem = make_toy_unconstrained().problem;
        } else if (li.family == "dro") {
            auto inst = std::make_shared<DroInstance>(gen_dro(dro_config_from_json(j.at("config"))));
            const auto &sizes = j.at("group_sizes");
            for (size_t g = 0; g < inst->groups.size(); ++g)
                if (sizes.at("train").at(g).get<Index>() != inst->groups[g].train.rows() ||
                    sizes.at("val").at(g).get<Index>() != inst->groups[g].val.rows())
                    throw UsageError(path + ": group sizes do not match the config");
            li.problem = inst->problem;
            li.dro = inst;
        } else {
            throw UsageError(path + ": unknown family '" + li.family + "'");
        }
    } catch (const Json::exception &e) {
        throw UsageError(path + ": " + e.what());
    } catch (const std::invalid_argument &e) {
        throw UsageError(path + ": " + e.what());
    }
    return li;
}

// ---- gen ----

struct GenArgs {
    std::string family;
    std::vector<Index> dims;
    std::optional<Index> n, m, l;
    std::uint64_t seed = 0;
    std::string out;
    int groups = 4;
    double minority = 0.03;
    Index n_train = 600, n_val = 200;
    double B_dual = 200;
};

int cmd_gen(const GenArgs &a, std::ostream &out) {
    Json j;
    if (a.family == "linear") {
        Index dims[3] = {100, 100, 5};
        if (!a.dims.empty() && a.dims.size() != 3)
            throw UsageError("linear takes three dims n m l");
        for (size_t i = 0; i < a.dims.size(); ++i)
            dims[i] = a.dims[i];
        if (a.n)
            dims[0] = *a.n;
        if (a.m)
            dims[1] = *a.m;
        if (a.l)
            dims[2] = *a.l;
        if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
            throw UsageError("dims must be positive");
        j = to_json(gen_linear(dims[0], dims[1], dims[2], a.seed, a.B_dual));
    } else if (a.family == "toy-unconstrained") {
        j = toy_unconstrained_json();
    } else if (a.family == "toy-constrained") {
        j = toy_constrained_json();
    } else if (a.family == "dro") {
        DroConfig cfg;
        cfg.groups = a.groups;
        cfg.minority = a.minority;
        cfg.n_train = a.n_train;
        cfg.n_val = a.n_val;
        cfg.seed = a.seed;
        try {
            j = dro_json(gen_dro(cfg));
        } catch (const std::invalid_argument &e) {
            throw UsageError(e.what());
        }
    } else {
        throw UsageError("unknown family '" + a.family + "'");
    }
    const std::string path = a.out.empty() ? a.family + "-" + std::to_string(a.seed) + ".json" : a.out;
    const std::string bytes = dump_stable(j, 1) + "\n";
    write_file(path, bytes);
    out << content_digest(bytes) << "  " << path << "\n";
    return kExitOk;
}

// ---- solve ----

struct SolveArgs {
    std::string instance;
    double eps = 1e-2;
    std::string mode = "det";
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;
    std::int64_t max_oracles = 10'000'000;
    std::optional<double> L_override, rho, eps_hat;
    std::optional<std::int64_t> optfom_max_iters, K, sapd_T;
    std::string trace_out, result_out;
    std::string init = "lower";
    double stop_eps_k = 0.01, stop_infeasibility = 0.01, stop_gap = 0.01;
    bool no_stop_rule = false;
    double delta_f = 0, delta_ftilde = 0;
    std::int64_t checkpoint_every = 0;
    bool wall_time = false;
};

std::string per_seed_path(const std::string &path, std::uint64_t seed, bool many) {
    if (path.empty())
        return path;
    const auto pos = path.find("{seed}");
    if (pos != std::string::npos)
        return path.substr(0, pos) + std::to_string(seed) + path.substr(pos + 6);
    if (!many)
        return path;
    fs::path p(path);
    return (p.parent_path() / (p.stem().string() + ".seed" + std::to_string(seed) +
                               p.extension().string()))
        .string();
}

bool budget_reason(TerminationReason r) {
    return r == TerminationReason::OracleBudget || r == TerminationReason::OuterBudget;
}

struct RunOutcome {
    std::string summary;
    int code = kExitOk;
};

RunOutcome run_one(const LoadedInstance &li, const SolveArgs &a, std::uint64_t seed, bool many) {
    SolverConfig cfg;
    cfg.eps = a.eps;
    cfg.mode = a.mode == "stoch" ? SolveMode::Stochastic : SolveMode::Deterministic;
    cfg.seed = seed;
    cfg.max_oracle_calls = a.max_oracles;
    cfg.L_override = a.L_override;
    cfg.rho = a.rho;
    cfg.eps_hat = a.eps_hat;
    cfg.K = a.K;
    cfg.sapd_T = a.sapd_T;
    cfg.checkpoint_every = a.checkpoint_every;
    cfg.record_wall_time = a.wall_time;
    // OptFOM is capped at 200 iterations per subproblem on the linear family by default.
    cfg.optfom_max_iterations = a.optfom_max_iters.value_or(li.family == "linear" ? 200 : 0);
    if (li.dro)
        cfg.x1_init = li.dro->x1_init;
    const auto &P = li.problem;
    if (a.init == "zero") {
        const auto &L = P.layout;
        const Vector x1 = prox(P.prox_f2, Vector::Zero(L.n_x1), 1.0);
        const Vector y1 = prox(P.prox_ftilde2, Vector::Zero(L.n_y1), 1.0);
        const Vector y2 = prox(P.prox_ftilde3, Vector::Zero(L.n_y2), 1.0);
        const Vector x2 = prox(P.prox_f3, Vector::Zero(L.n_x2), 1.0);
        cfg.primal_init = L.primal(x1, y1, y2);
        cfg.dual_init = L.dual(x2, y1, y2);
    }

    TraceMetrics metrics =
        li.constrained ? constrained_metrics(*li.constrained) : default_metrics(P);
    StopRule stop;
    if (li.constrained && !a.no_stop_rule)
        stop = composite_stop_rule(a.stop_eps_k, a.stop_infeasibility, a.stop_gap);

    SolveResult res;
    if (cfg.mode == SolveMode::Deterministic) {
        res = solve_deterministic(P, cfg, metrics, stop);
    } else if (li.dro) {
        auto oracle = dro_oracle(*li.dro, seed);
        res = solve_stochastic(oracle, cfg, metrics);
    } else {
        auto oracle = make_noisy(P, a.delta_f, a.delta_ftilde, seed);
        res = solve_stochastic(oracle, cfg, metrics);
    }

    if (!a.trace_out.empty()) {
        Json head;
        head["run"] = {{"family", li.family}, {"instance", li.id},   {"digest", li.digest},
                       {"seed", seed},        {"mode", a.mode},      {"eps", a.eps}};
        std::string bytes = dump_stable(head) + "\n";
        for (const auto &r : res.trace)
            bytes += dump_stable(to_json(r)) + "\n";
        write_file(per_seed_path(a.trace_out, seed, many), bytes);
    }
    Json rj;
    rj["family"] = li.family;
    rj["instance"] = li.id;
    rj["digest"] = li.digest;
    rj["seed"] = seed;
    rj["mode"] = a.mode;
    rj["eps"] = a.eps;
    const Json summary = result_to_json(res);
    for (auto it = summary.begin(); it != summary.end(); ++it)
        rj[it.key()] = it.value();
    if (li.constrained) {
        const auto &L = P.layout;
        const Vector x1 = L.x1(res.primal), y1 = L.y1(res.primal);
        rj["constrained_kkt"] = to_json(constrained_kkt(*li.constrained, res.primal, res.dual,
                                                        res.rho, a.eps));
        rj["lower_suboptimality"] = lower_suboptimality(*li.constrained, x1, y1);
        rj["constraint_violation"] = constraint_violation(*li.constrained, x1, y1);
    }
    if (li.dro) {
        const auto &L = P.layout;
        const Vector x1 = L.x1(res.primal);
        auto base = dro_lower_solution(*li.dro, li.dro->x1_init);
        rj["worst_group_val_loss"] = dro_worst_group_loss(*li.dro, x1, L.y1(res.primal));
        rj["baseline_worst_group_val_loss"] =
            dro_worst_group_loss(*li.dro, li.dro->x1_init, base.first);
        rj["eta"] = dro_eta(x1);
    }
    if (!a.result_out.empty())
        write_file(per_seed_path(a.result_out, seed, many), dump_stable(rj, 1) + "\n");

    std::ostringstream s;
    s << "seed=" << seed << " terminated_by=" << to_string(res.terminated_by)
      << " outer=" << res.outer_iterations << " oracle_calls=" << res.oracle.total()
      << " kkt_max=" << res.kkt.max_residual();
    if (!res.trace.empty())
        s << " upper=" << res.trace.back().upper_objective
          << " infeasibility=" << res.trace.back().infeasibility;
    return {s.str(), budget_reason(res.terminated_by) ? kExitBudget : kExitOk};
}

unsigned worker_slots(size_t jobs) {
    unsigned cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("BIMAX_THREADS")) {
        char *end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0)
            cap = static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(std::min<size_t>(cap, std::max<size_t>(jobs, 1)));
}

int cmd_solve(const SolveArgs &a, std::ostream &out, std::ostream &err) {
    if (!(a.eps > 0 && a.eps <= 0.25))
        throw UsageError("--eps must lie in (0, 1/4]");
    if (a.mode != "det" && a.mode != "stoch")
        throw UsageError("--mode must be det or stoch");
    if (a.init != "lower" && a.init != "zero")
        throw UsageError("--init must be lower or zero");
    const LoadedInstance li = load_instance(a.instance);

    std::vector<std::uint64_t> seeds = a.seeds.empty() ? std::vector<std::uint64_t>{a.seed} : a.seeds;
    const bool many = seeds.size() > 1;
    std::vector<RunOutcome> outcomes(seeds.size());
    std::vector<std::string> errors(seeds.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next++) < seeds.size();) {
            try {
                outcomes[i] = run_one(li, a, seeds[i], many);
            } catch (const std::exception &e) {
                errors[i] = e.what();
            }
        }
    };
    const unsigned slots = worker_slots(seeds.size());
    if (slots <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < slots; ++t)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }

    int code = kExitOk;
    for (size_t i = 0; i < seeds.size(); ++i) {
        if (!errors[i].empty()) {
            err << "seed " << seeds[i] << ": " << errors[i] << "\n";
            code = kExitUsage;
            continue;
        }
        out << outcomes[i].summary << "\n";
        if (outcomes[i].code == kExitBudget && code == kExitOk)
            code = kExitBudget;
    }
    return code;
}

// ---- report ----

struct RunSummary {
    std::string family, instance, mode;
    std::uint64_t seed = 0;
    TraceRecord last;
};

std::optional<RunSummary> read_trace(const std::string &path, std::ostream &err) {
    std::ifstream in(path);
    if (!in) {
        err << path << ": cannot open\n";
        return std::nullopt;
    }
    RunSummary run;
    run.family = "unknown";
    run.instance = fs::path(path).stem().string();
    bool have_record = false;
    std::int64_t prev_calls = -1;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (line.empty())
            continue;
        try {
            const Json j = Json::parse(line);
            if (j.contains("run")) {
                const Json &h = j["run"];
                run.family = h.at("family").get<std::string>();
                run.instance = h.at("instance").get<std::string>();
                run.mode = h.at("mode").get<std::string>();
                run.seed = h.at("seed").get<std::uint64_t>();
                continue;
            }
            TraceRecord r = trace_record_from_json(j);
            if (r.oracle_calls_total < prev_calls)
                throw std::runtime_error("oracle total decreases");
            prev_calls = r.oracle_calls_total;
            run.last = r;
            have_record = true;
        } catch (const std::exception &e) {
            err << path << ":" << lineno << ": malformed record (" << e.what() << "), run skipped\n";
            return std::nullopt;
        }
    }
    if (!have_record) {
        err << path << ": no trace records, run skipped\n";
        return std::nullopt;
    }
    return run;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_report(const std::vector<std::string> &paths, std::ostream &out, std::ostream &err) {
    std::map<std::string, std::map<std::string, std::vector<RunSummary>>> grouped;
    bool any_skipped = false;
    for (const auto &p : paths) {
        auto run = read_trace(p, err);
        if (!run) {
            any_skipped = true;
            continue;
        }
        grouped[run->family][run->instance].push_back(*run);
    }
    out << "family,instance,seed,mode,row,final_upper_objective,final_lower_optimality_gap,"
           "final_infeasibility,oracle_calls_total,outer_iterations,wall_ms\n";
    for (auto &[family, instances] : grouped) {
        if (grouped.size() > 1)
            out << "# " << family << "\n";
        for (auto &[instance, runs] : instances) {
            std::sort(runs.begin(), runs.end(),
                      [](const RunSummary &x, const RunSummary &y) { return x.seed < y.seed; });
            std::vector<double> cols[6];
            for (const auto &r : runs) {
                const double vals[6] = {r.last.upper_objective,
                                        r.last.lower_optimality_gap,
                                        r.last.infeasibility,
                                        static_cast<double>(r.last.oracle_calls_total),
                                        static_cast<double>(r.last.outer_k),
                                        static_cast<double>(r.last.wall_ms)};
                out << family << "," << instance << "," << r.seed << "," << r.mode << ",run";
                for (int c = 0; c < 6; ++c) {
                    cols[c].push_back(vals[c]);
                    out << "," << fmt(vals[c]);
                }
                out << "\n";
            }
            if (runs.size() < 2)
                continue;
            out << family << "," << instance << ",," << runs.front().mode << ",mean";
            for (auto &c : cols) {
                double s = 0;
                for (double v : c)
                    s += v;
                out << "," << fmt(s / static_cast<double>(c.size()));
            }
            out << "\n" << family << "," << instance << ",," << runs.front().mode << ",median";
            for (auto &c : cols)
                out << "," << fmt(median(c));
            out << "\n";
        }
    }
    if (grouped.empty())
        return kExitUsage;
    return any_skipped ? kExitUsage : kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Bilevel minimax experiments"};
    app.require_subcommand(1);

    GenArgs g;
    auto *gen = app.add_subcommand("gen", "Generate an instance file and print its digest");
    gen->add_option("family_pos", g.family, "linear | toy-unconstrained | toy-constrained | dro");
    gen->add_option("dims", g.dims, "n m l for the linear family");
    gen->add_option("--family", g.family);
    gen->add_option("--n", g.n);
    gen->add_option("--m", g.m);
    gen->add_option("--l", g.l);
    gen->add_option("--seed", g.seed);
    gen->add_option("--out", g.out);
    gen->add_option("--groups", g.groups);
    gen->add_option("--minority", g.minority);
    gen->add_option("--n-train", g.n_train);
    gen->add_option("--n-val", g.n_val);
    gen->add_option("--B", g.B_dual, "Multiplier bound of the linear family");

    SolveArgs s;
    std::string seeds_csv;
    auto *solve = app.add_subcommand("solve", "Run the solver on an instance file");
    solve->add_option("--instance", s.instance)->required();
    solve->add_option("--eps", s.eps);
    solve->add_option("--mode", s.mode)->check(CLI::IsMember({"det", "stoch"}));
    solve->add_option("--seed", s.seed);
    solve->add_option("--seeds", seeds_csv, "Comma-separated seeds run in parallel");
    solve->add_option("--max-oracles", s.max_oracles);
    solve->add_option("--L-override", s.L_override);
    solve->add_option("--rho", s.rho);
    solve->add_option("--eps-hat", s.eps_hat);
    solve->add_option("--optfom-max-iters", s.optfom_max_iters);
    solve->add_option("--K", s.K);
    solve->add_option("--sapd-T", s.sapd_T);
    solve->add_option("--trace-out", s.trace_out, "JSONL trace; {seed} expands to the seed");
    solve->add_option("--result-out", s.result_out);
    solve->add_option("--init", s.init)->check(CLI::IsMember({"lower", "zero"}));
    solve->add_option("--stop-eps-k", s.stop_eps_k);
    solve->add_option("--stop-infeasibility", s.stop_infeasibility);
    solve->add_option("--stop-gap", s.stop_gap);
    solve->add_flag("--no-stop-rule", s.no_stop_rule);
    solve->add_option("--delta-f", s.delta_f);
    solve->add_option("--delta-ftilde", s.delta_ftilde);
    solve->add_option("--checkpoint-every", s.checkpoint_every);
    solve->add_flag("--wall-time", s.wall_time, "Record wall-clock time in traces");

    std::vector<std::string> traces;
    auto *report = app.add_subcommand("report", "Summarize trace files as CSV");
    report->add_option("traces", traces)->required();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) {
            if (g.family.empty())
                throw UsageError("gen needs a family");
            return cmd_gen(g, out);
        }
        if (*solve) {
            std::stringstream ss(seeds_csv);
            for (std::string tok; std::getline(ss, tok, ',');) {
                if (tok.empty())
                    continue;
                try {
                    s.seeds.push_back(std::stoull(tok));
                } catch (const std::exception &) {
                    throw UsageError("bad seed '" + tok + "'");
                }
            }
            return cmd_solve(s, out, err);
        }
        return cmd_report(traces, out, err);
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

} // namespace bimax
