#pragma once

#include <cstddef>
#include <vector>

#include "agri/simenv.hpp"

namespace agri {

/// Everything an agent sees about the world when a task arrives.
struct Observation {
    int type_id = 0;
    double deadline = 0;
    ResourceId origin = 0;
    int abs_count = 0;
    std::vector<double> expected_delay;  ///< per resource, seconds
    std::vector<double> energy_now;      ///< per ABS, remaining energy
    std::vector<double> energy_if_chosen; ///< per ABS, remaining energy after this task
    std::vector<double> capacity;        ///< per ABS

    int resource_count() const { return static_cast<int>(expected_delay.size()); }
    /// Expected violation I(deadline <= expected delay) for a target.
    bool expects_violation(ResourceId r) const { return deadline <= expected_delay[static_cast<std::size_t>(r)]; }
};

Observation observe(const SimEnv& env, const TaskRecord& task);

struct EncodedState {
    int type_id = 0;
    std::vector<int> delay_bucket;  ///< per resource, {0,1,2}
    std::vector<int> battery_level; ///< per ABS, {0,1,2}
    int prev_action = -1;           ///< only with the previous-action component

    friend bool operator==(const EncodedState&, const EncodedState&) = default;
};

/// 0 if delay <= deadline/2, 1 if delay <= deadline, 2 otherwise.
int delay_bucket(double expected_delay, double deadline);

/// Mixed-radix layout of the tabular state space:
/// K * 3^(J+L) * 3^J, times (J+L) when the previous action is included.
class StateSpace {
public:
    StateSpace() = default;
    StateSpace(int task_types, int abs_count, int mec_count, bool with_prev_action);

    std::size_t size() const { return size_; }
    int actions() const { return abs_count_ + mec_count_; }
    int task_types() const { return task_types_; }
    int abs_count() const { return abs_count_; }
    int mec_count() const { return mec_count_; }
    bool with_prev_action() const { return with_prev_action_; }

    std::size_t index(const EncodedState& s) const;
    EncodedState decode(std::size_t index) const;

    friend bool operator==(const StateSpace&, const StateSpace&) = default;

private:
    int task_types_ = 0;
    int abs_count_ = 0;
    int mec_count_ = 0;
    bool with_prev_action_ = false;
    std::size_t size_ = 0;
};

/// Bucketed state for the task's origin agent. Battery levels use the
/// three-level battery reward with hysteresis `eps_hyst_fraction` of the chosen ABS's capacity.
EncodedState encode_state(const Observation& obs, double eps_hyst_fraction, int prev_action = -1);
EncodedState encode_state(const SimEnv& env, const TaskRecord& task, double eps_hyst_fraction, int prev_action = -1);

} // namespace agri
