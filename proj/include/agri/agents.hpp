#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agri/baselines.hpp"
#include "agri/encoding.hpp"
#include "agri/rewards.hpp"

namespace agri {

/// Dense tabular action-value function with per-entry visit counters.
class QTable {
public:
    QTable() = default;
    QTable(std::size_t states, int actions);

    std::size_t states() const { return states_; }
    int actions() const { return actions_; }

    double value(std::size_t s, int a) const { return values_[offset(s, a)]; }
    double& value(std::size_t s, int a) { return values_[offset(s, a)]; }
    std::uint32_t visits(std::size_t s, int a) const { return visits_[offset(s, a)]; }
    void visit(std::size_t s, int a) { ++visits_[offset(s, a)]; }

    double max_value(std::size_t s) const;
    double min_value(std::size_t s) const;
    /// Ties resolve to the lowest resource id.
    int argmax(std::size_t s) const;
    int argmin(std::size_t s) const;

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    const std::vector<std::uint32_t>& visit_counts() const { return visits_; }
    std::vector<std::uint32_t>& visit_counts() { return visits_; }

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::size_t offset(std::size_t s, int a) const { return s * static_cast<std::size_t>(actions_) + static_cast<std::size_t>(a); }

    std::size_t states_ = 0;
    int actions_ = 0;
    std::vector<double> values_;
    std::vector<std::uint32_t> visits_;
};

/// Q[s,a] <- (1-alpha) Q[s,a] + alpha (R + gamma max_a' Q[s',a']); terminal when next is empty.
void q_update(QTable& table, std::size_t s, int a, double reward, std::optional<std::size_t> next, double alpha,
              double gamma);
/// Same blend with a min-over-next-actions bootstrap, for minimizing tables.
void q_update_min(QTable& table, std::size_t s, int a, double cost, std::optional<std::size_t> next, double alpha,
                  double gamma);

enum class AgentKind { QLearning, RiskSensitive, EnergyCentric };

std::string to_string(AgentKind kind);
std::optional<AgentKind> parse_agent_kind(const std::string& name);

struct LearningParams {
    double alpha = 0.05;
    double gamma = 0.85;
    int episodes = 100000;    ///< N^EP
    int update_every = 1000;  ///< N^UP
    double zeta_init = 0.0;
    double zeta_step = 0.02;  ///< lambda
    int violation_limit = 3;  ///< V
    int violation_gap = 2;    ///< G
    double w = 0.5;
    double theta_m = 1.0;
    double theta_d = 1.0;
    SeverityLevels severity = kDefaultSeverity;
    double epsilon_start = 0.1; ///< exploration rate, linearly decayed
    double epsilon_end = 0.01;
    double eps_hyst_fraction = 0.02;    ///< battery-level hysteresis, fraction of capacity
    double energy_gap_threshold = 0.02; ///< energy-centric risk threshold
    std::uint64_t seed = 1;

    void validate() const;
    double epsilon_at(int episode) const;

    friend bool operator==(const LearningParams&, const LearningParams&) = default;
};

void to_json(nlohmann::json& j, const LearningParams& p);
void from_json(const nlohmann::json& j, LearningParams& p);

/// Tables of one ABS agent. Q-Learning only uses `reward` (its Q).
struct AgentTables {
    QTable reward; ///< Q^R (or Q for Q-Learning)
    QTable risk;   ///< Q^D

    friend bool operator==(const AgentTables&, const AgentTables&) = default;
};

/// What one decision is worth to the learner.
struct DecisionSignal {
    int battery_level = 0;
    double delay = 0;
    bool in_risk = false;
    int severity = 0;
    double reward = 0;
    double risk_cost = 0; ///< zero for Q-Learning
};

/// One independent learner per ABS plus the shared ζ weighting value.
class AgentSet {
public:
    AgentSet() = default;
    AgentSet(AgentKind kind, StateSpace space, LearningParams params);
    static AgentSet for_scenario(AgentKind kind, const Scenario& scenario, const LearningParams& params);

    AgentKind kind() const { return kind_; }
    bool risk_based() const { return kind_ != AgentKind::QLearning; }
    const StateSpace& space() const { return space_; }
    const LearningParams& params() const { return params_; }
    LearningParams& params() { return params_; }
    int agent_count() const { return static_cast<int>(agents_.size()); }
    AgentTables& agent(int j) { return agents_.at(static_cast<std::size_t>(j)); }
    const AgentTables& agent(int j) const { return agents_.at(static_cast<std::size_t>(j)); }

    double zeta() const { return zeta_; }
    void set_zeta(double zeta) { zeta_ = zeta; }

    /// Q^C[s,a] = ζ Q^D[s,a] + (1-ζ) Q^R[s,a], composed on read.
    double combined(int j, std::size_t s, int a) const;
    QTable combined_table(int j) const;

    /// Greedy action: argmax Q for Q-Learning, argmin Q^C otherwise.
    int greedy(int j, std::size_t s) const;

    std::size_t encode(const Observation& obs, int prev_action) const;
    DecisionSignal assess(const Observation& obs, ResourceId action) const;

    /// Risk-sensitive value iteration step on Q^D and Q^R.
    void rs_step(int j, std::size_t s, int a, double reward, double risk_cost, std::optional<std::size_t> next);
    /// Applies the kind-appropriate update for a finished transition.
    void learn(int j, std::size_t s, int a, const DecisionSignal& signal, std::optional<std::size_t> next);

    friend bool operator==(const AgentSet&, const AgentSet&) = default;

private:
    AgentKind kind_ = AgentKind::QLearning;
    StateSpace space_;
    LearningParams params_;
    double zeta_ = 0;
    std::vector<AgentTables> agents_;
};

/// ε-greedy: uniform over all resources with probability eps, else greedy.
int select_action(const AgentSet& set, int j, std::size_t s, double eps, Rng& rng);

/// Frozen greedy policy over trained tables.
class LearnedPolicy final : public Policy {
public:
    explicit LearnedPolicy(const AgentSet& agents) : agents_(&agents) {}
    std::string name() const override { return to_string(agents_->kind()); }
    PolicyDecision decide(const SimEnv& env, const TaskRecord& task) override;
    void reset() override
    {
        prev_.clear();
        risk_decisions_ = 0;
    }

    /// Decisions since reset() whose (state, action) fell in the risk set.
    int risk_decisions() const { return risk_decisions_; }

private:
    const AgentSet* agents_;
    std::vector<int> prev_;
    int risk_decisions_ = 0;
};

void save_tables(const AgentSet& agents, const std::filesystem::path& path);
/// Throws VersionMismatch on a foreign file or, when `expected` is given, on
/// a state space that differs from it.
AgentSet load_tables(const std::filesystem::path& path, const std::optional<StateSpace>& expected = std::nullopt);

} // namespace agri
