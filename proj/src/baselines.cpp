#include "agri/baselines.hpp"

#include "agri/error.hpp"

namespace agri {

EpisodeResult run_episode(const Scenario& scenario, const EpisodeTrace& trace, Policy& policy)
{
    policy.reset();
    SimEnv env(scenario, trace.tasks);
    for (const TaskRecord& task : trace.tasks) {
        env.advance_to(task.arrival);
        const PolicyDecision d = policy.decide(env, task);
        env.commit(task, d.target);
    }
    EpisodeResult out;
    out.kpi = env.finalize();
    out.records = env.records();
    for (ResourceId r = 0; r < scenario.resource_count(); ++r)
        out.busy_intervals.push_back(scenario.is_abs(r) ? env.busy_intervals(r) : 0);
    return out;
}

ResourceId round_robin_decide(RoundRobinState& state, int resource_count)
{
    state.last = (state.last + 1) % resource_count;
    return state.last;
}

PolicyDecision RoundRobinPolicy::decide(const SimEnv& env, const TaskRecord& task)
{
    return {task.key(), round_robin_decide(state_, env.scenario().resource_count())};
}

PolicyDecision lqhe_decide(const SimEnv& env, const TaskRecord& task, const LqheThresholds& th)
{
    const Scenario& s = env.scenario();
    const ResourceId origin = task.origin;
    const double origin_queue = env.queue_time(origin);

    // Step 1: lowest neighbour queue counts only if it undercuts the origin
    // by the threshold.
    ResourceId best_neighbour = -1;
    double best_queue = 0;
    for (ResourceId r = 0; r < s.resource_count(); ++r) {
        if (r == origin)
            continue;
        const double q = env.queue_time(r);
        if (best_neighbour < 0 || q < best_queue) {
            best_neighbour = r;
            best_queue = q;
        }
    }
    const bool undercut = best_neighbour >= 0 && origin_queue - best_queue >= th.queue_undercut - 1e-12;
    const double lowest = undercut ? best_queue : origin_queue;

    // Step 2: highest-energy ABS among those at or below the lowest queue time.
    const double origin_energy = env.remaining_fraction(origin);
    ResourceId richest = -1;
    double richest_energy = 0;
    for (ResourceId r = 0; r < s.abs_count; ++r) {
        if (r == origin || env.queue_time(r) > lowest + 1e-12)
            continue;
        const double e = env.remaining_fraction(r);
        if (richest < 0 || e > richest_energy) {
            richest = r;
            richest_energy = e;
        }
    }

    // Step 3: offload only on a clear energy lead.
    if (richest >= 0 && richest_energy - origin_energy >= th.energy_margin - 1e-12)
        return {task.key(), richest};

    // MEC has no battery: it wins when it alone supplied the undercut.
    if (undercut && !s.is_abs(best_neighbour))
        return {task.key(), best_neighbour};
    return {task.key(), origin};
}

PolicyDecision always_local_decide(const TaskRecord& task)
{
    return {task.key(), task.origin};
}

PolicyDecision always_mec_decide(const Scenario& scenario, const TaskRecord& task)
{
    return {task.key(), scenario.abs_count};
}

PolicyDecision RandomPolicy::decide(const SimEnv& env, const TaskRecord& task)
{
    const auto n = static_cast<std::uint64_t>(env.scenario().resource_count());
    return {task.key(), static_cast<ResourceId>(rng_.below(n))};
}

std::unique_ptr<Policy> make_baseline(const std::string& name)
{
    if (name == "rr")
        return std::make_unique<RoundRobinPolicy>();
    if (name == "lqhe")
        return std::make_unique<LqhePolicy>();
    if (name == "local")
        return std::make_unique<LocalPolicy>();
    if (name == "mec")
        return std::make_unique<MecPolicy>();
    return nullptr;
}

} // namespace agri
