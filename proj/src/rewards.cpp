#include "agri/rewards.hpp"

#include <algorithm>

#include "agri/error.hpp"

namespace agri {

int battery_reward_level(std::span<const double> expected_energy, ResourceId chosen, double eps_hyst)
{
    if (chosen < 0)
        fail(ErrorCode::UnknownResource, "negative resource id");
    if (static_cast<std::size_t>(chosen) >= expected_energy.size())
        return 2; // mains-powered MEC
    const double best = *std::max_element(expected_energy.begin(), expected_energy.end());
    const double diff = expected_energy[static_cast<std::size_t>(chosen)] - best;
    if (diff >= -eps_hyst)
        return 2;
    if (diff <= -2 * eps_hyst)
        return 0;
    return 1;
}

std::vector<double> expected_energies(const Observation& obs, ResourceId chosen)
{
    std::vector<double> e = obs.energy_now;
    if (chosen >= 0 && chosen < obs.abs_count)
        e[static_cast<std::size_t>(chosen)] = obs.energy_if_chosen[static_cast<std::size_t>(chosen)];
    return e;
}

int battery_level_for(const Observation& obs, ResourceId chosen, double eps_hyst_fraction)
{
    if (chosen >= obs.abs_count)
        return 2;
    const double eps = eps_hyst_fraction * obs.capacity[static_cast<std::size_t>(chosen)];
    return battery_reward_level(expected_energies(obs, chosen), chosen, eps);
}

int violation_severity(const Observation& obs, ResourceId chosen, const SeverityLevels& levels)
{
    if (!obs.expects_violation(chosen))
        fail(ErrorCode::CalledOnSafeAction, "resource " + std::to_string(chosen) + " meets the deadline");
    for (ResourceId m = obs.abs_count; m < obs.resource_count(); ++m)
        if (m != chosen && !obs.expects_violation(m))
            return levels[0];
    if (obs.origin != chosen && !obs.expects_violation(obs.origin))
        return levels[1];
    for (ResourceId j = 0; j < obs.abs_count; ++j)
        if (j != obs.origin && j != chosen && !obs.expects_violation(j))
            return levels[2];
    return levels[3];
}

int violation_severity(const SimEnv& env, const TaskRecord& task, ResourceId chosen, const SeverityLevels& levels)
{
    return violation_severity(observe(env, task), chosen, levels);
}

double q_reward(int battery_level, double delay, bool expected_violation, int severity, double w, double theta_m,
                double theta_d)
{
    const double ev = expected_violation ? 1.0 : 0.0;
    return w * (battery_level - 1) - (1 - w) / (2 * theta_m) * delay +
           (1 - w) / (2 * theta_d) * ((1 - ev) + severity * ev);
}

double rs_reward(int battery_level, double delay, double w, double theta_m)
{
    return -(w * (battery_level - 1) - (1 - w) / theta_m * delay);
}

double rs_risk_cost(bool in_risk_state, int severity)
{
    return in_risk_state ? -static_cast<double>(severity) : -1.0;
}

double zeta_update(double zeta, int episode_violations, int gap, int violation_limit, double step)
{
    // Snap accumulated rounding so k steps of size step land exactly on a bound.
    constexpr double snap = 1e-9;
    double next = episode_violations + gap <= violation_limit ? zeta - step : zeta + step;
    if (next < snap)
        next = 0.0;
    if (next > 1.0 - snap)
        next = 1.0;
    return next;
}

bool energy_centric_risk(std::span<const double> remaining_fraction, double gap_threshold)
{
    if (remaining_fraction.size() < 2)
        return false;
    const auto [lo, hi] = std::minmax_element(remaining_fraction.begin(), remaining_fraction.end());
    return *hi - *lo > gap_threshold;
}

bool energy_centric_risk(const SimEnv& env, double gap_threshold)
{
    std::vector<double> fractions;
    for (ResourceId j = 0; j < env.scenario().abs_count; ++j)
        fractions.push_back(env.remaining_fraction(j));
    return energy_centric_risk(fractions, gap_threshold);
}

} // namespace agri
