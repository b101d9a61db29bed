#include "agri/simenv.hpp"

#include <algorithm>
#include <limits>

#include "agri/error.hpp"

namespace agri {

double remaining_energy(const EnergyParams& e, int elapsed_intervals, int busy_intervals)
{
    return e.capacity - e.fixed_rate() * elapsed_intervals - e.busy_surcharge() * busy_intervals;
}

SimEnv::SimEnv(const Scenario& scenario, std::span<const TaskRecord> pending)
    : scenario_(&scenario),
      busy_until_(static_cast<std::size_t>(scenario.resource_count()), 0),
      busy_count_(static_cast<std::size_t>(scenario.resource_count()), 0),
      fifo_(static_cast<std::size_t>(scenario.resource_count())),
      task_state_(static_cast<std::size_t>(scenario.abs_count) * static_cast<std::size_t>(scenario.horizon), 0)
{
    for (const TaskRecord& task : pending)
        task_state_[slot(task.key())] = 1;
    records_.reserve(pending.size());
}

std::size_t SimEnv::slot(const TaskKey& key) const
{
    if (!scenario_->is_abs(key.origin) || key.arrival < 0 || key.arrival >= scenario_->horizon)
        fail(ErrorCode::InvariantViolation, "task key outside the (ABS, interval) grid");
    return static_cast<std::size_t>(key.origin) * static_cast<std::size_t>(scenario_->horizon) +
           static_cast<std::size_t>(key.arrival);
}

void SimEnv::check_resource(ResourceId r) const
{
    if (!scenario_->is_resource(r))
        fail(ErrorCode::UnknownResource, "resource " + std::to_string(r));
}

void SimEnv::advance_to(int interval)
{
    now_ = std::max(now_, interval);
}

int SimEnv::ready_interval(const TaskRecord& task, ResourceId target) const
{
    check_resource(target);
    return task.arrival + scenario_->hop_intervals(task.origin, target);
}

int SimEnv::busy_until(ResourceId r) const
{
    check_resource(r);
    return busy_until_[static_cast<std::size_t>(r)];
}

double SimEnv::queue_time(ResourceId r) const
{
    return std::max(0, busy_until(r) - now_) * scenario_->interval_len;
}

double SimEnv::expected_delay(const TaskRecord& task, ResourceId target) const
{
    const int ready = ready_interval(task, target);
    const int wait = std::max(0, busy_until_[static_cast<std::size_t>(target)] - ready);
    return task.iot_delay + scenario_->hop_delay(task.origin, target) + wait * scenario_->interval_len +
           scenario_->task_type(task.type_id).proc_time(scenario_->kind(target));
}

CompletionRecord SimEnv::commit(const TaskRecord& task, ResourceId target)
{
    check_resource(target);
    auto& state = task_state_[slot(task.key())];
    if (state == 2)
        fail(ErrorCode::DoubleCommit,
             "task <" + std::to_string(task.origin) + "," + std::to_string(task.arrival) + "> already assigned");
    advance_to(task.arrival);

    const auto r = static_cast<std::size_t>(target);
    const int duration = scenario_->proc_intervals(task.type_id, scenario_->kind(target));
    const TaskType& type = scenario_->task_type(task.type_id);

    CompletionRecord rec;
    rec.key = task.key();
    rec.type_id = task.type_id;
    rec.resource = target;
    rec.start = std::max(busy_until_[r], ready_interval(task, target));
    rec.end = rec.start + duration - 1;
    rec.delay = (rec.start - task.arrival) * scenario_->interval_len + task.iot_delay + type.proc_time(scenario_->kind(target));
    rec.violated = rec.delay > type.deadline;

    busy_until_[r] = rec.end + 1;
    if (scenario_->is_abs(target))
        busy_count_[r] += duration;
    state = 2;
    fifo_[r].push_back(records_.size());
    records_.push_back(rec);
    return rec;
}

bool SimEnv::committed(const TaskKey& key) const
{
    return task_state_[slot(key)] == 2;
}

int SimEnv::busy_intervals(ResourceId abs) const
{
    if (!scenario_->is_abs(abs))
        fail(ErrorCode::NotAnAbs, "resource " + std::to_string(abs) + " is not an ABS");
    return busy_count_[static_cast<std::size_t>(abs)];
}

double SimEnv::remaining_energy(ResourceId abs) const
{
    return agri::remaining_energy(scenario_->energy(abs), now_, busy_intervals(abs));
}

double SimEnv::remaining_fraction(ResourceId abs) const
{
    return remaining_energy(abs) / scenario_->energy(abs).capacity;
}

double SimEnv::expected_remaining_energy(ResourceId abs, int type_id) const
{
    const EnergyParams& e = scenario_->energy(abs);
    return remaining_energy(abs) - e.busy_surcharge() * scenario_->proc_intervals(type_id, ResourceKind::Abs);
}

const std::vector<std::size_t>& SimEnv::fifo(ResourceId r) const
{
    check_resource(r);
    return fifo_[static_cast<std::size_t>(r)];
}

KpiReport SimEnv::finalize()
{
    const auto pending = std::count(task_state_.begin(), task_state_.end(), static_cast<unsigned char>(1));
    if (pending > 0)
        fail(ErrorCode::IncompleteRun, std::to_string(pending) + " task(s) never committed");
    now_ = std::max(now_, scenario_->horizon);
    return compute_kpis(*scenario_, records_, busy_count_, now_);
}

KpiReport compute_kpis(const Scenario& scenario, std::span<const CompletionRecord> records,
                       std::span<const int> busy_counts, int elapsed)
{
    const auto n_res = static_cast<std::size_t>(scenario.resource_count());
    KpiReport k;
    k.tasks_per_resource.assign(n_res, 0);
    k.violations_per_resource.assign(n_res, 0);
    k.mean_delay_per_resource.assign(n_res, 0.0);

    double total = 0;
    for (const CompletionRecord& rec : records) {
        const auto r = static_cast<std::size_t>(rec.resource);
        total += rec.delay;
        k.mean_delay_per_resource[r] += rec.delay;
        ++k.tasks_per_resource[r];
        if (rec.violated) {
            ++k.violation_count;
            ++k.violations_per_resource[r];
        }
    }
    k.task_count = static_cast<int>(records.size());
    k.no_tasks = records.empty();
    k.mean_delay = records.empty() ? 0.0 : total / static_cast<double>(records.size());
    for (std::size_t r = 0; r < n_res; ++r)
        if (k.tasks_per_resource[r] > 0)
            k.mean_delay_per_resource[r] /= k.tasks_per_resource[r];

    k.min_remaining_fraction = std::numeric_limits<double>::infinity();
    for (ResourceId j = 0; j < scenario.abs_count; ++j) {
        const EnergyParams& e = scenario.energy(j);
        const double left = remaining_energy(e, elapsed, busy_counts[static_cast<std::size_t>(j)]);
        k.remaining_energy.push_back(left);
        k.remaining_fraction.push_back(left / e.capacity);
        k.min_remaining_fraction = std::min(k.min_remaining_fraction, left / e.capacity);
    }
    return k;
}

} // namespace agri
