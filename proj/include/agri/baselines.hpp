#pragma once

#include <memory>
#include <string>
#include <vector>

#include "agri/simenv.hpp"

namespace agri {

struct PolicyDecision {
    TaskKey key;
    ResourceId target = 0;
};

/// An offloading policy queried once per task, in trace order.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual PolicyDecision decide(const SimEnv& env, const TaskRecord& task) = 0;
    /// Clears per-episode state (cursors, previous actions).
    virtual void reset() {}
};

struct EpisodeResult {
    KpiReport kpi;
    std::vector<CompletionRecord> records;
    std::vector<int> busy_intervals; ///< per resource; MEC entries are 0
};

/// Runs `policy` over every task of `trace` and finalizes the episode.
EpisodeResult run_episode(const Scenario& scenario, const EpisodeTrace& trace, Policy& policy);

// --- Round Robin -----------------------------------------------------------

struct RoundRobinState {
    ResourceId last = -1; ///< global cursor over all resources
};

ResourceId round_robin_decide(RoundRobinState& state, int resource_count);

class RoundRobinPolicy final : public Policy {
public:
    std::string name() const override { return "rr"; }
    PolicyDecision decide(const SimEnv& env, const TaskRecord& task) override;
    void reset() override { state_ = {}; }

private:
    RoundRobinState state_;
};

// --- Lowest Queue time and Highest Energy first ----------------------------

struct LqheThresholds {
    double queue_undercut = 0.5;  ///< seconds a neighbour must undercut the origin by
    double energy_margin = 0.01;  ///< remaining-fraction lead required to offload
};

PolicyDecision lqhe_decide(const SimEnv& env, const TaskRecord& task, const LqheThresholds& th = {});

class LqhePolicy final : public Policy {
public:
    explicit LqhePolicy(LqheThresholds th = {}) : th_(th) {}
    std::string name() const override { return "lqhe"; }
    PolicyDecision decide(const SimEnv& env, const TaskRecord& task) override { return lqhe_decide(env, task, th_); }

private:
    LqheThresholds th_;
};

// --- Diagnostic constant policies -------------------------------------------

PolicyDecision always_local_decide(const TaskRecord& task);
PolicyDecision always_mec_decide(const Scenario& scenario, const TaskRecord& task);

class LocalPolicy final : public Policy {
public:
    std::string name() const override { return "local"; }
    PolicyDecision decide(const SimEnv&, const TaskRecord& task) override { return always_local_decide(task); }
};

class MecPolicy final : public Policy {
public:
    std::string name() const override { return "mec"; }
    PolicyDecision decide(const SimEnv& env, const TaskRecord& task) override
    {
        return always_mec_decide(env.scenario(), task);
    }
};

/// Uniformly random target; used by property tests.
class RandomPolicy final : public Policy {
public:
    explicit RandomPolicy(std::uint64_t seed) : seed_(seed), rng_(seed) {}
    std::string name() const override { return "random"; }
    PolicyDecision decide(const SimEnv& env, const TaskRecord& task) override;
    void reset() override { rng_ = Rng(seed_); }

private:
    std::uint64_t seed_;
    Rng rng_;
};

/// Heuristic policy by CLI name: rr, lqhe, local, mec. Returns null otherwise.
std::unique_ptr<Policy> make_baseline(const std::string& name);

} // namespace agri
