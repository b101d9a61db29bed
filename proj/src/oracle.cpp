#include "agri/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "agri/error.hpp"

namespace agri {

namespace {

std::string task_label(const TaskKey& k)
{
    return "<" + std::to_string(k.origin) + "," + std::to_string(k.arrival) + ">";
}

// Placement of task i (trace order) as parallel arrays; shared by evaluate()
// and the brute-force inner loop so both produce bit-identical values.
struct Placement {
    std::vector<ResourceId> resource;
    std::vector<int> start;
};

ObjectiveBreakdown breakdown_of(const Scenario& sc, const EpisodeTrace& trace, const Placement& p, Problem problem,
                                const ObjectiveWeights& weights)
{
    ObjectiveBreakdown b;
    b.problem = problem;
    b.weights = weights;

    std::vector<int> busy(static_cast<std::size_t>(sc.abs_count), 0);
    double total_delay = 0;
    for (std::size_t i = 0; i < trace.tasks.size(); ++i) {
        const TaskRecord& task = trace.tasks[i];
        const ResourceId r = p.resource[i];
        const ResourceKind kind = sc.kind(r);
        const TaskType& type = sc.task_type(task.type_id);
        const double delay = (p.start[i] - task.arrival) * sc.interval_len + task.iot_delay + type.proc_time(kind);
        total_delay += delay;
        if (delay > type.deadline)
            ++b.violations;
        if (sc.is_abs(r))
            busy[static_cast<std::size_t>(r)] += sc.proc_intervals(task.type_id, kind);
    }
    b.mean_delay = trace.tasks.empty() ? 0.0 : total_delay / static_cast<double>(trace.tasks.size());

    b.min_remaining_energy = std::numeric_limits<double>::infinity();
    for (ResourceId j = 0; j < sc.abs_count; ++j) {
        const double left = remaining_energy(sc.energy(j), sc.horizon, busy[static_cast<std::size_t>(j)]);
        b.remaining_energy.push_back(left);
        b.min_remaining_energy = std::min(b.min_remaining_energy, left);
    }
    b.feasible = problem == Problem::P1 || b.violations <= weights.violation_limit;
    b.value = objective_value(problem, weights, b.min_remaining_energy, b.mean_delay, b.violations);
    return b;
}

} // namespace

const ScheduledTask* Schedule::find(const TaskKey& key) const
{
    for (const ScheduledTask& t : tasks)
        if (t.key == key)
            return &t;
    return nullptr;
}

std::string to_string(Problem p)
{
    return p == Problem::P1 ? "p1" : "p2";
}

std::optional<Problem> parse_problem(const std::string& name)
{
    if (name == "p1" || name == "P1")
        return Problem::P1;
    if (name == "p2" || name == "P2")
        return Problem::P2;
    return std::nullopt;
}

int processing_horizon(const Scenario& scenario, const EpisodeTrace& trace)
{
    int h = scenario.horizon + scenario.max_hop_intervals();
    for (const TaskRecord& t : trace.tasks)
        h += std::max(scenario.proc_intervals(t.type_id, ResourceKind::Abs),
                      scenario.proc_intervals(t.type_id, ResourceKind::Mec));
    return h;
}

Schedule schedule_from_records(std::span<const CompletionRecord> records)
{
    Schedule s;
    s.tasks.reserve(records.size());
    for (const CompletionRecord& r : records)
        s.tasks.push_back({r.key, r.resource, r.start, r.end});
    return s;
}

std::vector<Finding> validate(const Scenario& scenario, const EpisodeTrace& trace, const Schedule& schedule)
{
    std::vector<Finding> out;
    const int horizon = processing_horizon(scenario, trace);

    std::map<TaskKey, const TaskRecord*> by_key;
    for (const TaskRecord& t : trace.tasks)
        by_key[t.key()] = &t;

    std::map<TaskKey, std::vector<const ScheduledTask*>> seen;
    for (const ScheduledTask& st : schedule.tasks)
        seen[st.key].push_back(&st);

    for (const auto& [key, entries] : seen) {
        if (!by_key.contains(key))
            out.push_back({"14", "task " + task_label(key) + " is not in the trace", key, entries.front()->resource, -1});
        if (entries.size() > 1) {
            out.push_back({"14", "task " + task_label(key) + " assigned " + std::to_string(entries.size()) + " times",
                           key, entries[1]->resource, entries[1]->start});
            for (std::size_t i = 1; i < entries.size(); ++i)
                if (entries[i]->resource != entries[0]->resource) {
                    out.push_back({"7", "task " + task_label(key) + " processed by more than one resource", key,
                                   entries[i]->resource, entries[i]->start});
                    break;
                }
        }
    }
    for (const TaskRecord& t : trace.tasks)
        if (!seen.contains(t.key()))
            out.push_back({"14", "task " + task_label(t.key()) + " is never assigned", t.key(), -1, -1});

    // Occupancy per resource-interval, for the capacity check.
    std::vector<std::vector<const ScheduledTask*>> owner(
        static_cast<std::size_t>(scenario.resource_count()),
        std::vector<const ScheduledTask*>(static_cast<std::size_t>(horizon), nullptr));

    for (const ScheduledTask& st : schedule.tasks) {
        const auto it = by_key.find(st.key);
        if (it == by_key.end())
            continue;
        const TaskRecord& task = *it->second;
        if (!scenario.is_resource(st.resource)) {
            out.push_back({"14", "task " + task_label(st.key) + " assigned to unknown resource " +
                                     std::to_string(st.resource),
                           st.key, st.resource, -1});
            continue;
        }
        if (st.end < st.start || st.start < 0 || st.end >= horizon) {
            out.push_back({"8-11",
                           "task " + task_label(st.key) + " has no single contiguous window inside [0," +
                               std::to_string(horizon) + ")",
                           st.key, st.resource, st.start});
            continue;
        }
        const int need = scenario.proc_intervals(task.type_id, scenario.kind(st.resource));
        if (st.end - st.start + 1 != need)
            out.push_back({"12",
                           "task " + task_label(st.key) + " active for " + std::to_string(st.end - st.start + 1) +
                               " intervals, needs " + std::to_string(need),
                           st.key, st.resource, st.start});
        if (st.start < task.arrival)
            out.push_back({"13", "task " + task_label(st.key) + " starts before it is received", st.key, st.resource,
                           st.start});

        auto& row = owner[static_cast<std::size_t>(st.resource)];
        for (int t = st.start; t <= st.end; ++t) {
            auto& slot = row[static_cast<std::size_t>(t)];
            if (slot != nullptr && slot != &st) {
                out.push_back({"6",
                               "resource " + std::to_string(st.resource) + " runs " + task_label(slot->key) +
                                   " and " + task_label(st.key) + " in the same interval",
                               st.key, st.resource, t});
                break;
            }
            slot = &st;
        }
    }
    return out;
}

double objective_value(Problem problem, const ObjectiveWeights& wt, double min_remaining_energy, double mean_delay,
                       int violations)
{
    if (problem == Problem::P1)
        return wt.w * min_remaining_energy - (1 - wt.w) / (2 * wt.theta_m) * mean_delay -
               (1 - wt.w) / (2 * wt.theta_d) * violations;
    return wt.w * min_remaining_energy - (1 - wt.w) / wt.theta_m * mean_delay;
}

ObjectiveBreakdown evaluate(const Scenario& scenario, const EpisodeTrace& trace, const Schedule& schedule,
                            Problem problem, const ObjectiveWeights& weights)
{
    const auto findings = validate(scenario, trace, schedule);
    if (!findings.empty())
        fail(ErrorCode::InfeasibleSchedule,
             std::to_string(findings.size()) + " constraint finding(s), first: constraint " + findings.front().equation +
                 ": " + findings.front().message);

    Placement p;
    for (const TaskRecord& t : trace.tasks) {
        const ScheduledTask* st = schedule.find(t.key());
        p.resource.push_back(st->resource);
        p.start.push_back(st->start);
    }
    return breakdown_of(scenario, trace, p, problem, weights);
}

namespace {

struct Search {
    const Scenario& sc;
    const EpisodeTrace& trace;
    Problem problem;
    const ObjectiveWeights& weights;

    std::vector<std::vector<int>> order; // per resource, task indices in processing order
    Placement current;
    bool have_best = false;
    double best_value = 0;
    Placement best;
    std::uint64_t leaves = 0;

    // Lexicographic (resource, start) encoding in trace order.
    bool encodes_before(const Placement& a, const Placement& b) const
    {
        for (std::size_t i = 0; i < a.resource.size(); ++i) {
            if (a.resource[i] != b.resource[i])
                return a.resource[i] < b.resource[i];
            if (a.start[i] != b.start[i])
                return a.start[i] < b.start[i];
        }
        return false;
    }

    void leaf()
    {
        ++leaves;
        // Left-justified packing: for a fixed order on each resource, starting
        // every task as early as possible can only lower delays and violations,
        // and energy depends on the assignment alone, so it is optimal per order.
        for (std::size_t r = 0; r < order.size(); ++r) {
            int cursor = 0;
            for (const int i : order[r]) {
                const TaskRecord& t = trace.tasks[static_cast<std::size_t>(i)];
                const int s = std::max(cursor, t.arrival);
                current.start[static_cast<std::size_t>(i)] = s;
                cursor = s + sc.proc_intervals(t.type_id, sc.kind(static_cast<ResourceId>(r)));
            }
        }
        const ObjectiveBreakdown b = breakdown_of(sc, trace, current, problem, weights);
        if (!b.feasible)
            return;
        const double tol = 1e-12 * std::max(1.0, std::abs(b.value));
        if (!have_best || b.value > best_value + tol ||
            (std::abs(b.value - best_value) <= tol && encodes_before(current, best))) {
            have_best = true;
            best_value = b.value;
            best = current;
        }
    }

    void permute(std::size_t r)
    {
        if (r == order.size()) {
            leaf();
            return;
        }
        auto& seq = order[r];
        std::sort(seq.begin(), seq.end());
        do {
            permute(r + 1);
        } while (std::next_permutation(seq.begin(), seq.end()));
    }
};

std::uint64_t factorial(int n)
{
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i)
        f *= static_cast<std::uint64_t>(i);
    return f;
}

std::uint64_t binomial(int n, int k)
{
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i)
        c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return c;
}

} // namespace

BruteForceResult brute_force(const Scenario& scenario, const EpisodeTrace& trace, Problem problem,
                             const ObjectiveWeights& weights, const BruteForceBudget& budget)
{
    const int n = static_cast<int>(trace.tasks.size());
    const int res = scenario.resource_count();
    if (n > budget.max_tasks)
        fail(ErrorCode::BudgetExceeded, std::to_string(n) + " tasks exceed the limit of " +
                                            std::to_string(budget.max_tasks));
    if (res > budget.max_resources)
        fail(ErrorCode::BudgetExceeded, std::to_string(res) + " resources exceed the limit of " +
                                            std::to_string(budget.max_resources));
    if (scenario.horizon > budget.max_horizon)
        fail(ErrorCode::BudgetExceeded, "horizon " + std::to_string(scenario.horizon) + " exceeds " +
                                            std::to_string(budget.max_horizon));
    // Sum over assignments of the product of per-resource orderings is
    // n! times the number of ways to split n into res ordered groups.
    const std::uint64_t leaves = factorial(n) * binomial(n + res - 1, res - 1);
    if (leaves > budget.max_leaves)
        fail(ErrorCode::BudgetExceeded, std::to_string(leaves) + " leaves exceed the budget");

    Search s{scenario, trace, problem, weights, {}, {}, false, 0, {}, 0};
    s.current.resource.assign(static_cast<std::size_t>(n), 0);
    s.current.start.assign(static_cast<std::size_t>(n), 0);

    std::vector<int> digits(static_cast<std::size_t>(n), 0);
    while (true) {
        s.order.assign(static_cast<std::size_t>(res), {});
        for (int i = 0; i < n; ++i) {
            s.current.resource[static_cast<std::size_t>(i)] = digits[static_cast<std::size_t>(i)];
            s.order[static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])].push_back(i);
        }
        s.permute(0);

        int pos = n - 1;
        while (pos >= 0 && ++digits[static_cast<std::size_t>(pos)] == res) {
            digits[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0)
            break;
    }

    BruteForceResult out;
    out.leaves = s.leaves;
    out.feasible = s.have_best;
    if (!s.have_best) {
        out.breakdown.problem = problem;
        out.breakdown.weights = weights;
        out.breakdown.feasible = false;
        return out;
    }
    for (std::size_t i = 0; i < trace.tasks.size(); ++i) {
        const TaskRecord& t = trace.tasks[i];
        const ResourceId r = s.best.resource[i];
        const int start = s.best.start[i];
        out.schedule.tasks.push_back({t.key(), r, start, start + scenario.proc_intervals(t.type_id, scenario.kind(r)) - 1});
    }
    out.breakdown = breakdown_of(scenario, trace, s.best, problem, weights);
    return out;
}

} // namespace agri
