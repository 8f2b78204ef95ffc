#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ramcp/agent.hpp"
#include "ramcp/oracle.hpp"

namespace ramcp {

struct RunOptions {
    TrialSpec spec;
    int trials = 1000;
    std::uint64_t seed = 1;  // trial i uses seed + i
    int jobs = 1;
    bool timing = false;     // fill wall_ms even for simulation budgets
    PlannerConfig config;
};

struct RunSummary {
    int trials = 0;
    double avg_payoff = 0.0;
    double empirical_risk = 0.0;
    double avg_stated_risk = 0.0;
    double infeasible_fraction = 0.0;
};

/// Runs the trials on `jobs` worker threads; records come back in trial order.
std::vector<TrialRecord> run_trials(const Pomdp& model, const RunOptions& options);
RunSummary summarize(const std::vector<TrialRecord>& records);

/// Trial rows, a blank line, then the summary header and row.
void write_run_csv(std::ostream& out, const std::vector<TrialRecord>& records, const RunSummary& summary,
                   bool with_wall_ms);

struct SweepRow {
    double alpha;
    RunSummary summary;
};

std::vector<SweepRow> run_sweep(const Pomdp& model, const RunOptions& options, const std::vector<double>& alphas);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Shortest decimal text that reads back as the same double.
std::string format_number(double v);

struct OracleReport {
    int horizon = 0;
    double tau = 0.0;
    double alpha = 0.0;
    double min_risk = 1.0;
    EopgResult eopg;
    bool deterministic_checked = false;
    DeterministicResult deterministic;
    double unconstrained = 0.0;
};

/// Throws SizeGuardExceeded if the history DAG itself is too large.
OracleReport run_oracle(const Pomdp& model, double tau, double alpha, int horizon, const OracleOptions& options = {});
void write_oracle_report(std::ostream& out, const Pomdp& model, const OracleReport& report);

}  // namespace ramcp
