#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "agri/agents.hpp"

namespace agri {

struct CurvePoint {
    int episode = 0;
    int agent = 0;
    double cum_reward = 0;
    double cum_risk = 0;
    double zeta = 0;
};

struct TrainingRun {
    AgentSet agents;
    std::vector<CurvePoint> curve;    ///< episode-major, one row per agent
    std::vector<double> zeta;         ///< ζ after each episode
    std::vector<int> update_signal;   ///< Σ fed to each ζ update, in order
};

/// Offline multi-agent training. Episode e replays traces[e % n]; each ABS
/// agent learns from the tasks it receives. Risk-based kinds update ζ every
/// N^UP episodes from a greedy replay of the current trace.
TrainingRun train(AgentKind kind, const Scenario& scenario, std::span<const EpisodeTrace> traces,
                  const LearningParams& params);

/// Continues training an existing agent set for params().episodes episodes.
void train_in_place(TrainingRun& run, const Scenario& scenario, std::span<const EpisodeTrace> traces);

/// Violation count (risk) or energy-risk decision count (energy-centric) of
/// the greedy policy on one trace: the Σ compared against V + G.
int greedy_constraint_signal(const AgentSet& agents, const Scenario& scenario, const EpisodeTrace& trace);

/// Per-episode cumulative reward summed over agents.
std::vector<double> episode_rewards(const std::vector<CurvePoint>& curve);
std::vector<double> episode_risks(const std::vector<CurvePoint>& curve);

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path,
                     const std::string& manifest = {});

} // namespace agri
