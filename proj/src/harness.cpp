#include "ramcp/harness.hpp"

#include <atomic>
#include <charconv>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace ramcp {

std::string format_number(double v) {
    if (v == 0.0) return "0";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<TrialRecord> run_trials(const Pomdp& model, const RunOptions& options) {
    const int n = std::max(0, options.trials);
    std::vector<TrialRecord> records(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                records[static_cast<std::size_t>(i)] =
                    run_trial(model, options.spec, options.seed + static_cast<std::uint64_t>(i), options.config);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    const int jobs = std::max(1, std::min(options.jobs, n));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return records;
}

RunSummary summarize(const std::vector<TrialRecord>& records) {
    RunSummary s;
    s.trials = static_cast<int>(records.size());
    if (records.empty()) return s;
    for (const auto& r : records) {
        s.avg_payoff += r.payoff;
        s.empirical_risk += r.safe ? 0.0 : 1.0;
        s.avg_stated_risk += r.stated_risk;
        s.infeasible_fraction += r.infeasible ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(records.size());
    s.avg_payoff /= n;
    s.empirical_risk /= n;
    s.avg_stated_risk /= n;
    s.infeasible_fraction /= n;
    return s;
}

namespace {

void write_summary(std::ostream& out, const RunSummary& s) {
    out << s.trials << ',' << format_number(s.avg_payoff) << ',' << format_number(s.empirical_risk) << ','
        << format_number(s.avg_stated_risk) << ',' << format_number(s.infeasible_fraction) << '\n';
}

}  // namespace

void write_run_csv(std::ostream& out, const std::vector<TrialRecord>& records, const RunSummary& summary,
                   bool with_wall_ms) {
    out << "trial,seed,payoff,safe,stated_risk,modes,steps,wall_ms\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        out << i << ',' << r.seed << ',' << format_number(r.payoff) << ',' << (r.safe ? 1 : 0) << ','
            << format_number(r.stated_risk) << ',' << encode_modes(r.modes) << ',' << r.steps << ',';
        if (with_wall_ms) out << format_number(r.wall_ms);
        out << '\n';
    }
    out << "\ntrials,avg_payoff,empirical_risk,avg_stated_risk,infeasible_fraction\n";
    write_summary(out, summary);
}

std::vector<SweepRow> run_sweep(const Pomdp& model, const RunOptions& options, const std::vector<double>& alphas) {
    std::vector<SweepRow> rows;
    for (double alpha : alphas) {
        RunOptions o = options;
        o.spec.alpha = alpha;
        rows.push_back({alpha, summarize(run_trials(model, o))});
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "alpha,trials,avg_payoff,empirical_risk,avg_stated_risk,infeasible_fraction\n";
    for (const auto& r : rows) {
        out << format_number(r.alpha) << ',';
        write_summary(out, r.summary);
    }
}

OracleReport run_oracle(const Pomdp& model, double tau, double alpha, int horizon, const OracleOptions& options) {
    OracleReport rep;
    rep.horizon = horizon;
    rep.tau = tau;
    rep.alpha = alpha;
    const HistoryDag dag = build_history_dag(model, model.initial_belief(), tau, decision_steps(horizon), options);
    rep.min_risk = exact_min_risk(dag);
    rep.eopg = exact_eopg(dag, alpha);
    try {
        rep.deterministic = best_deterministic(dag, alpha, options);
        rep.deterministic_checked = true;
    } catch (const SizeGuardExceeded&) {
        rep.deterministic_checked = false;
    }
    rep.unconstrained = unconstrained_value(model, model.initial_belief(), decision_steps(horizon));
    return rep;
}

void write_oracle_report(std::ostream& out, const Pomdp& model, const OracleReport& r) {
    out << "horizon: " << r.horizon << "\n"
        << "tau: " << format_number(r.tau) << "\n"
        << "alpha: " << format_number(r.alpha) << "\n"
        << "min_risk: " << format_number(r.min_risk) << "\n";
    if (r.eopg.feasible) {
        out << "rho: " << format_number(r.eopg.value) << "\n"
            << "root_distribution:";
        for (std::size_t a = 0; a < r.eopg.root_distribution.size(); ++a)
            out << ' ' << model.action_names()[a] << '=' << format_number(r.eopg.root_distribution[a]);
        out << "\n";
    } else {
        out << "rho: Infeasible\n";
    }
    if (!r.deterministic_checked)
        out << "best_deterministic: skipped (size guard)\n";
    else if (r.deterministic.feasible)
        out << "best_deterministic: " << format_number(r.deterministic.value) << "\n";
    else
        out << "best_deterministic: Infeasible\n";
    out << "unconstrained: " << format_number(r.unconstrained) << "\n"
        << "verdict: " << (r.eopg.feasible ? "Feasible" : "Infeasible") << "\n";
}

}  // namespace ramcp
