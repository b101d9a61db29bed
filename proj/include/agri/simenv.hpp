#pragma once

#include <span>
#include <vector>

#include "agri/scenario.hpp"

namespace agri {

struct CompletionRecord {
    TaskKey key;
    int type_id = 0;
    ResourceId resource = 0;
    int start = 0;      ///< first processing interval
    int end = 0;        ///< last processing interval (inclusive)
    double delay = 0;   ///< end-to-end delay, seconds
    bool violated = false;
};

struct KpiReport {
    double min_remaining_fraction = 1.0;
    double mean_delay = 0;   ///< seconds; 0 when there are no tasks
    bool no_tasks = true;    ///< mean_delay was defined, not measured
    int violation_count = 0;
    int task_count = 0;
    std::vector<int> tasks_per_resource;
    std::vector<int> violations_per_resource;
    std::vector<double> mean_delay_per_resource;
    std::vector<double> remaining_fraction; ///< per ABS
    std::vector<double> remaining_energy;   ///< per ABS, energy units
};

/// Live state of one episode: a serial processing timeline per resource and
/// an energy ledger per ABS. Tasks must be committed in non-decreasing
/// arrival order; the elapsed horizon follows the latest commit.
class SimEnv {
public:
    /// `pending` lists the tasks that must all be committed before finalize().
    explicit SimEnv(const Scenario& scenario, std::span<const TaskRecord> pending = {});

    const Scenario& scenario() const { return *scenario_; }

    int now() const { return now_; }
    void advance_to(int interval);

    /// Interval at which the task is available at `target` after the hop.
    int ready_interval(const TaskRecord& task, ResourceId target) const;
    int busy_until(ResourceId r) const;
    /// Backlog in seconds at the current interval, excluding any new task.
    double queue_time(ResourceId r) const;

    /// alpha^I + hop + queue wait + processing time at `target`.
    double expected_delay(const TaskRecord& task, ResourceId target) const;

    CompletionRecord commit(const TaskRecord& task, ResourceId target);
    bool committed(const TaskKey& key) const;

    int busy_intervals(ResourceId abs) const;
    double remaining_energy(ResourceId abs) const;
    double remaining_fraction(ResourceId abs) const;
    /// Remaining energy if a task of `type_id` were additionally processed here.
    double expected_remaining_energy(ResourceId abs, int type_id) const;

    const std::vector<CompletionRecord>& records() const { return records_; }
    /// Indices into records() of the tasks assigned to `r`, in FIFO order.
    const std::vector<std::size_t>& fifo(ResourceId r) const;

    /// Advances the elapsed horizon to T and reports the KPIs.
    KpiReport finalize();

private:
    void check_resource(ResourceId r) const;
    std::size_t slot(const TaskKey& key) const;

    const Scenario* scenario_;
    int now_ = 0;
    std::vector<int> busy_until_;
    std::vector<int> busy_count_;
    std::vector<std::vector<std::size_t>> fifo_;
    std::vector<CompletionRecord> records_;
    // 0 = unknown, 1 = pending, 2 = committed; indexed by origin * T + arrival.
    std::vector<unsigned char> task_state_;
};

/// KPIs as a pure function of completion records and ABS busy counts.
KpiReport compute_kpis(const Scenario& scenario, std::span<const CompletionRecord> records,
                       std::span<const int> busy_counts, int elapsed);

/// Capacity minus fixed drain over elapsed intervals and the compute surcharge over busy ones.
double remaining_energy(const EnergyParams& e, int elapsed_intervals, int busy_intervals);

} // namespace agri
