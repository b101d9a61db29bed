#pragma once

#include <array>
#include <span>
#include <vector>

#include "agri/encoding.hpp"

namespace agri {

/// Severity values P^4..P^1, indexed [0] = P^4 (MEC could have avoided it)
/// through [3] = P^1 (nothing could have).
using SeverityLevels = std::array<int, 4>;
inline constexpr SeverityLevels kDefaultSeverity{-4, -3, -2, -1};

/// Battery reward level: 0, 1 or 2. `expected_energy` holds E(Upsilon^R) per
/// ABS under the candidate action; a `chosen` index past the ABSs is a MEC
/// and always scores 2.
int battery_reward_level(std::span<const double> expected_energy, ResourceId chosen, double eps_hyst);

/// E(Upsilon^R) per ABS when the task goes to `chosen`.
std::vector<double> expected_energies(const Observation& obs, ResourceId chosen);

/// Battery level for `chosen` with hysteresis eps = fraction * capacity.
int battery_level_for(const Observation& obs, ResourceId chosen, double eps_hyst_fraction);

/// Violation severity cascade. Throws CalledOnSafeAction when the
/// chosen target is not expected to violate.
int violation_severity(const Observation& obs, ResourceId chosen, const SeverityLevels& levels = kDefaultSeverity);
int violation_severity(const SimEnv& env, const TaskRecord& task, ResourceId chosen,
                       const SeverityLevels& levels = kDefaultSeverity);

/// Q-Learning immediate reward.
double q_reward(int battery_level, double delay, bool expected_violation, int severity, double w, double theta_m,
                double theta_d);

/// Risk-sensitive reward; minimized by the agent.
double rs_reward(int battery_level, double delay, double w, double theta_m);

/// Cost for risk: the severity when in a risk state, else 0.
double rs_risk_cost(bool in_risk_state, int severity);

/// One ζ step, clamped to [0, 1].
double zeta_update(double zeta, int episode_violations, int gap, int violation_limit, double step);

/// Energy-centric risk: spread of remaining fractions above `gap_threshold`.
bool energy_centric_risk(std::span<const double> remaining_fraction, double gap_threshold);
bool energy_centric_risk(const SimEnv& env, double gap_threshold);

} // namespace agri
