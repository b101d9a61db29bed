#include "agri/encoding.hpp"

#include "agri/error.hpp"
#include "agri/rewards.hpp"

namespace agri {

Observation observe(const SimEnv& env, const TaskRecord& task)
{
    const Scenario& s = env.scenario();
    Observation obs;
    obs.type_id = task.type_id;
    obs.deadline = s.task_type(task.type_id).deadline;
    obs.origin = task.origin;
    obs.abs_count = s.abs_count;
    obs.expected_delay.reserve(static_cast<std::size_t>(s.resource_count()));
    for (ResourceId r = 0; r < s.resource_count(); ++r)
        obs.expected_delay.push_back(env.expected_delay(task, r));
    for (ResourceId j = 0; j < s.abs_count; ++j) {
        obs.energy_now.push_back(env.remaining_energy(j));
        obs.energy_if_chosen.push_back(env.expected_remaining_energy(j, task.type_id));
        obs.capacity.push_back(s.energy(j).capacity);
    }
    return obs;
}

int delay_bucket(double expected_delay, double deadline)
{
    if (expected_delay <= 0.5 * deadline)
        return 0;
    if (expected_delay <= deadline)
        return 1;
    return 2;
}

StateSpace::StateSpace(int task_types, int abs_count, int mec_count, bool with_prev_action)
    : task_types_(task_types), abs_count_(abs_count), mec_count_(mec_count), with_prev_action_(with_prev_action)
{
    if (task_types < 1 || abs_count < 1 || mec_count < 0)
        fail(ErrorCode::InvalidParams, "state space dimensions must be positive");
    size_ = static_cast<std::size_t>(task_types);
    for (int i = 0; i < abs_count + mec_count + abs_count; ++i)
        size_ *= 3;
    if (with_prev_action)
        size_ *= static_cast<std::size_t>(abs_count + mec_count);
}

std::size_t StateSpace::index(const EncodedState& s) const
{
    const auto n_res = static_cast<std::size_t>(actions());
    if (s.delay_bucket.size() != n_res || s.battery_level.size() != static_cast<std::size_t>(abs_count_))
        fail(ErrorCode::InvalidParams, "encoded state does not match the state space");
    std::size_t idx = static_cast<std::size_t>(s.type_id);
    for (int b : s.delay_bucket)
        idx = idx * 3 + static_cast<std::size_t>(b);
    for (int l : s.battery_level)
        idx = idx * 3 + static_cast<std::size_t>(l);
    if (with_prev_action_)
        idx = idx * n_res + static_cast<std::size_t>(s.prev_action);
    return idx;
}

EncodedState StateSpace::decode(std::size_t index) const
{
    EncodedState s;
    const auto n_res = static_cast<std::size_t>(actions());
    if (with_prev_action_) {
        s.prev_action = static_cast<int>(index % n_res);
        index /= n_res;
    }
    s.battery_level.assign(static_cast<std::size_t>(abs_count_), 0);
    for (auto it = s.battery_level.rbegin(); it != s.battery_level.rend(); ++it) {
        *it = static_cast<int>(index % 3);
        index /= 3;
    }
    s.delay_bucket.assign(n_res, 0);
    for (auto it = s.delay_bucket.rbegin(); it != s.delay_bucket.rend(); ++it) {
        *it = static_cast<int>(index % 3);
        index /= 3;
    }
    s.type_id = static_cast<int>(index);
    return s;
}

EncodedState encode_state(const Observation& obs, double eps_hyst_fraction, int prev_action)
{
    EncodedState s;
    s.type_id = obs.type_id;
    for (double d : obs.expected_delay)
        s.delay_bucket.push_back(delay_bucket(d, obs.deadline));
    for (ResourceId j = 0; j < obs.abs_count; ++j)
        s.battery_level.push_back(battery_level_for(obs, j, eps_hyst_fraction));
    s.prev_action = prev_action;
    return s;
}

EncodedState encode_state(const SimEnv& env, const TaskRecord& task, double eps_hyst_fraction, int prev_action)
{
    return encode_state(observe(env, task), eps_hyst_fraction, prev_action);
}

} // namespace agri
