#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agri/simenv.hpp"

namespace agri {

struct ScheduledTask {
    TaskKey key;
    ResourceId resource = 0;
    int start = 0; ///< first active interval
    int end = 0;   ///< last active interval (inclusive)

    friend bool operator==(const ScheduledTask&, const ScheduledTask&) = default;
};

/// Assignment plus contiguous processing window per task.
struct Schedule {
    std::vector<ScheduledTask> tasks;

    const ScheduledTask* find(const TaskKey& key) const;
    friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// One broken constraint. `equation` names the constraint family
/// ("6", "7", "8-11", "12", "13", "14").
struct Finding {
    std::string equation;
    std::string message;
    TaskKey task;
    ResourceId resource = -1;
    int interval = -1;
};

/// Length of the time index set: T plus room for the longest hop and for
/// every task of the trace running back to back on an ABS, so that any
/// schedule the simulator can emit fits.
int processing_horizon(const Scenario& scenario, const EpisodeTrace& trace);

Schedule schedule_from_records(std::span<const CompletionRecord> records);

std::vector<Finding> validate(const Scenario& scenario, const EpisodeTrace& trace, const Schedule& schedule);

struct ObjectiveWeights {
    double w = 0.5;
    double theta_m = 1.0;
    double theta_d = 1.0;
    int violation_limit = 3; ///< V, P2 only
};

enum class Problem { P1, P2 };

std::string to_string(Problem p);
std::optional<Problem> parse_problem(const std::string& name);

struct ObjectiveBreakdown {
    Problem problem = Problem::P1;
    ObjectiveWeights weights;
    double min_remaining_energy = 0;      ///< min over ABSs, energy units
    std::vector<double> remaining_energy; ///< per ABS
    double mean_delay = 0;                ///< delta, seconds
    int violations = 0;
    bool feasible = true; ///< P2: violations <= V
    double value = 0;
};

double objective_value(Problem problem, const ObjectiveWeights& weights, double min_remaining_energy,
                       double mean_delay, int violations);

/// Throws InfeasibleSchedule when validate() reports anything.
ObjectiveBreakdown evaluate(const Scenario& scenario, const EpisodeTrace& trace, const Schedule& schedule,
                            Problem problem, const ObjectiveWeights& weights);

struct BruteForceBudget {
    int max_tasks = 6;
    int max_resources = 3;
    int max_horizon = 64;
    std::uint64_t max_leaves = 2'000'000; ///< bound on assignments x orderings
};

struct BruteForceResult {
    bool feasible = false; ///< false only for P2 with no schedule within V
    Schedule schedule;
    ObjectiveBreakdown breakdown;
    std::uint64_t leaves = 0;
};

/// Exhaustive optimum over every assignment and every per-resource order.
/// Throws BudgetExceeded when the instance is larger than `budget`.
BruteForceResult brute_force(const Scenario& scenario, const EpisodeTrace& trace, Problem problem,
                             const ObjectiveWeights& weights, const BruteForceBudget& budget = {});

// --- LP export --------------------------------------------------------------

void export_lp(const Scenario& scenario, const EpisodeTrace& trace, Problem problem, const ObjectiveWeights& weights,
               const std::filesystem::path& path);
std::string lp_text(const Scenario& scenario, const EpisodeTrace& trace, Problem problem,
                    const ObjectiveWeights& weights);

struct ImportedSolution {
    Schedule schedule;
    std::optional<double> objective; ///< from an "objective <value>" line, if any
};

/// Reads "name value" lines written by an external solver for a model from
/// export_lp() on the same trace.
ImportedSolution import_solution(const Scenario& scenario, const EpisodeTrace& trace,
                                 const std::filesystem::path& path);

} // namespace agri
