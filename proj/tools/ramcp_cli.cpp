#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "ramcp/bench.hpp"
#include "ramcp/harness.hpp"
#include "ramcp/model_io.hpp"

using namespace ramcp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;

struct ModelArgs {
    std::string model_file;
    std::string bench;
    std::string hallway_file;
    bool mdp = false;

    void add(CLI::App* app) {
        auto* m = app->add_option("--model", model_file, "model file");
        auto* b = app->add_option("--bench", bench, "built-in benchmark (tiger, example1, hallway3, hallway3-mdp)");
        auto* h = app->add_option("--hallway", hallway_file, "hallway map file");
        app->add_flag("--mdp", mdp, "fully observable variant of --hallway");
        m->excludes(b)->excludes(h);
        b->excludes(h);
    }

    Pomdp load() const {
        if (!model_file.empty()) return load_model(model_file);
        if (!hallway_file.empty()) return gen_hallway(load_hallway_spec(hallway_file), mdp).model;
        if (!bench.empty()) return make_bench(bench).model;
        throw CLI::ValidationError("one of --model, --bench or --hallway is required");
    }
};

struct HorizonArgs {
    std::optional<int> horizon;
    std::optional<double> epsilon;

    void add(CLI::App* app) {
        auto* h = app->add_option("--horizon", horizon, "horizon N (N+1 rewards are summed)")->check(CLI::NonNegativeNumber);
        auto* e = app->add_option("--epsilon", epsilon, "approximation error; picks N(epsilon) and lowers tau by epsilon/2")
                      ->check(CLI::PositiveNumber);
        h->excludes(e);
    }

    HorizonSpec spec() const {
        if (horizon) return HorizonSpec::fixed(*horizon);
        if (epsilon) return HorizonSpec::from_epsilon(*epsilon);
        throw CLI::ValidationError("one of --horizon or --epsilon is required");
    }
};

struct PlanArgs {
    double tau = 0.0;
    std::string budget_first = "5000ms";
    std::string budget_step = "100ms";
    int trials = 1000;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string out;
    bool timing = false;
    std::string dump_tree;
    std::string dump_lp;

    void add(CLI::App* app) {
        app->add_option("--tau", tau, "payoff threshold")->required();
        app->add_option("--budget-first", budget_first, "first-step budget (Nms or Nsims)")->capture_default_str();
        app->add_option("--budget-step", budget_step, "per-step budget (Nms or Nsims)")->capture_default_str();
        app->add_option("--trials", trials, "number of trials")->check(CLI::NonNegativeNumber)->capture_default_str();
        app->add_option("--seed", seed, "base seed; trial i uses seed + i")->capture_default_str();
        app->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--out", out, "CSV output file (default stdout)");
        app->add_flag("--timing", timing, "report wall_ms for simulation budgets too");
        app->add_option("--dump-tree", dump_tree, "write explicit-tree dumps to this file (forces --jobs 1)");
        app->add_option("--dump-lp", dump_lp, "write decision LPs to this file (forces --jobs 1)");
    }
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw std::runtime_error("cannot open " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

struct Dumps {
    std::unique_ptr<std::ofstream> tree, lp;

    void attach(const PlanArgs& args, RunOptions& opts) {
        if (!args.dump_tree.empty()) {
            tree = std::make_unique<std::ofstream>(args.dump_tree);
            opts.config.tree_dump = tree.get();
            opts.jobs = 1;
        }
        if (!args.dump_lp.empty()) {
            lp = std::make_unique<std::ofstream>(args.dump_lp);
            opts.config.solve.lp_dump = lp.get();
            opts.jobs = 1;
        }
    }
};

RunOptions make_options(const PlanArgs& args, const HorizonArgs& horizon, double alpha) {
    RunOptions o;
    o.spec.tau = args.tau;
    o.spec.alpha = alpha;
    o.spec.horizon = horizon.spec();
    o.spec.budget = {BudgetAmount::parse(args.budget_first), BudgetAmount::parse(args.budget_step)};
    o.trials = args.trials;
    o.seed = args.seed;
    o.jobs = args.jobs;
    o.timing = args.timing;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk-aware online planner for POMDPs with payoff guarantees"};
    app.require_subcommand(1);

    ModelArgs model_args;
    HorizonArgs horizon_args;
    PlanArgs plan_args;

    auto* run = app.add_subcommand("run", "run trials and print one CSV row per trial plus a summary");
    double alpha = 1.0;
    model_args.add(run);
    horizon_args.add(run);
    plan_args.add(run);
    run->add_option("--alpha", alpha, "risk bound")->check(CLI::Range(0.0, 1.0))->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "run trials for each risk bound and print one summary row per bound");
    std::vector<double> alphas;
    model_args.add(sweep);
    horizon_args.add(sweep);
    plan_args.add(sweep);
    sweep->add_option("--alphas", alphas, "risk bounds")->required()->delimiter(',')->check(CLI::Range(0.0, 1.0));

    auto* oracle = app.add_subcommand("oracle", "exact values on a small model");
    double oracle_tau = 0.0, oracle_alpha = 1.0;
    int oracle_horizon = 0;
    OracleOptions oracle_opts;
    model_args.add(oracle);
    oracle->add_option("--tau", oracle_tau, "payoff threshold")->required();
    oracle->add_option("--alpha", oracle_alpha, "risk bound")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    oracle->add_option("--horizon", oracle_horizon, "horizon N")->required()->check(CLI::NonNegativeNumber);
    oracle->add_option("--max-nodes", oracle_opts.max_nodes, "size guard on history nodes")->capture_default_str();

    auto* validate_cmd = app.add_subcommand("validate", "check a model and list violations");
    model_args.add(validate_cmd);

    auto* export_cmd = app.add_subcommand("export", "write a model in the model file format");
    std::string export_out;
    model_args.add(export_cmd);
    export_cmd->add_option("--out", export_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*validate_cmd) {
            std::unique_ptr<Pomdp> m;
            if (!model_args.model_file.empty()) {
                std::ifstream in(model_args.model_file);
                if (!in) throw ModelError("cannot open " + model_args.model_file);
                m = std::make_unique<Pomdp>(parse_model(in));
            } else {
                m = std::make_unique<Pomdp>(model_args.load());
            }
            const auto violations = validate(*m);
            for (const auto& v : violations)
                std::cout << to_string(v.kind) << " at " << v.location << ": " << v.message << '\n';
            if (violations.empty()) std::cout << "ok: " << m->num_states() << " states, " << m->num_actions()
                                              << " actions, " << m->num_observations() << " observations\n";
            return violations.empty() ? kExitOk : kExitUsage;
        }

        const Pomdp model = model_args.load();

        if (*export_cmd) {
            Output out(export_out);
            write_model(out.stream(), model);
            return kExitOk;
        }
        if (*oracle) {
            try {
                const OracleReport rep = run_oracle(model, oracle_tau, oracle_alpha, oracle_horizon, oracle_opts);
                write_oracle_report(std::cout, model, rep);
                return rep.eopg.feasible ? kExitOk : kExitInfeasible;
            } catch (const SizeGuardExceeded& e) {
                std::cerr << "size guard: " << e.what() << '\n';
                return kExitUsage;
            }
        }
        if (*run) {
            RunOptions opts = make_options(plan_args, horizon_args, alpha);
            Dumps dumps;
            dumps.attach(plan_args, opts);
            const auto records = run_trials(model, opts);
            const RunSummary summary = summarize(records);
            Output out(plan_args.out);
            write_run_csv(out.stream(), records, summary, opts.timing || opts.spec.budget.wall_clock());
            return summary.trials > 0 && summary.infeasible_fraction == 1.0 ? kExitInfeasible : kExitOk;
        }
        if (*sweep) {
            RunOptions opts = make_options(plan_args, horizon_args, 1.0);
            Dumps dumps;
            dumps.attach(plan_args, opts);
            const auto rows = run_sweep(model, opts, alphas);
            Output out(plan_args.out);
            write_sweep_csv(out.stream(), rows);
            bool all_infeasible = !rows.empty();
            for (const auto& r : rows)
                if (!(r.summary.trials > 0 && r.summary.infeasible_fraction == 1.0)) all_infeasible = false;
            return all_infeasible ? kExitInfeasible : kExitOk;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ModelError& e) {
        std::cerr << "invalid model: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}
