#include "agri/training.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include "agri/error.hpp"

namespace agri {

namespace {

struct PendingTransition {
    bool valid = false;
    std::size_t state = 0;
    int action = 0;
    DecisionSignal signal;
};

void learning_episode(AgentSet& agents, const Scenario& scenario, const EpisodeTrace& trace, double eps, Rng& rng,
                      std::vector<double>& cum_reward, std::vector<double>& cum_risk)
{
    const auto n_agents = static_cast<std::size_t>(scenario.abs_count);
    std::vector<PendingTransition> pending(n_agents);
    std::vector<int> prev(n_agents);
    for (std::size_t j = 0; j < n_agents; ++j)
        prev[j] = static_cast<int>(j);
    cum_reward.assign(n_agents, 0.0);
    cum_risk.assign(n_agents, 0.0);

    SimEnv env(scenario, trace.tasks);
    for (const TaskRecord& task : trace.tasks) {
        env.advance_to(task.arrival);
        const auto j = static_cast<std::size_t>(task.origin);
        const Observation obs = observe(env, task);
        const std::size_t s = agents.encode(obs, prev[j]);
        if (pending[j].valid)
            agents.learn(task.origin, pending[j].state, pending[j].action, pending[j].signal, s);

        const int a = select_action(agents, task.origin, s, eps, rng);
        const DecisionSignal sig = agents.assess(obs, a);
        cum_reward[j] += sig.reward;
        cum_risk[j] += sig.risk_cost;
        env.commit(task, a);
        pending[j] = {true, s, a, sig};
        prev[j] = a;
    }
    for (std::size_t j = 0; j < n_agents; ++j)
        if (pending[j].valid)
            agents.learn(static_cast<int>(j), pending[j].state, pending[j].action, pending[j].signal, std::nullopt);
}

} // namespace

int greedy_constraint_signal(const AgentSet& agents, const Scenario& scenario, const EpisodeTrace& trace)
{
    LearnedPolicy policy(agents);
    const EpisodeResult result = run_episode(scenario, trace, policy);
    if (agents.kind() == AgentKind::EnergyCentric)
        return policy.risk_decisions();
    return result.kpi.violation_count;
}

void train_in_place(TrainingRun& run, const Scenario& scenario, std::span<const EpisodeTrace> traces)
{
    AgentSet& agents = run.agents;
    const LearningParams& p = agents.params();
    p.validate();
    if (traces.empty())
        fail(ErrorCode::InvalidParams, "training needs at least one trace");
    if (agents.space().abs_count() != scenario.abs_count || agents.space().mec_count() != scenario.mec_count ||
        agents.space().task_types() != scenario.task_type_count())
        fail(ErrorCode::InvalidParams, "agent state space does not match the scenario");

    Rng rng(mix_seed(p.seed, 0x7261696eULL));
    const int first = static_cast<int>(run.zeta.size());
    std::vector<double> cum_reward;
    std::vector<double> cum_risk;
    for (int e = 0; e < p.episodes; ++e) {
        const EpisodeTrace& trace = traces[static_cast<std::size_t>(e) % traces.size()];
        learning_episode(agents, scenario, trace, p.epsilon_at(e), rng, cum_reward, cum_risk);

        if (agents.risk_based() && (e + 1) % p.update_every == 0) {
            const int signal = greedy_constraint_signal(agents, scenario, trace);
            run.update_signal.push_back(signal);
            agents.set_zeta(zeta_update(agents.zeta(), signal, p.violation_gap, p.violation_limit, p.zeta_step));
        }
        run.zeta.push_back(agents.zeta());
        for (int j = 0; j < scenario.abs_count; ++j)
            run.curve.push_back({first + e, j, cum_reward[static_cast<std::size_t>(j)],
                                 cum_risk[static_cast<std::size_t>(j)], agents.zeta()});
    }
}

TrainingRun train(AgentKind kind, const Scenario& scenario, std::span<const EpisodeTrace> traces,
                  const LearningParams& params)
{
    params.validate();
    TrainingRun run;
    run.agents = AgentSet::for_scenario(kind, scenario, params);
    if (params.episodes > 0)
        train_in_place(run, scenario, traces);
    return run;
}

std::vector<double> episode_rewards(const std::vector<CurvePoint>& curve)
{
    std::map<int, double> sums;
    for (const CurvePoint& c : curve)
        sums[c.episode] += c.cum_reward;
    std::vector<double> out;
    for (const auto& [e, v] : sums)
        out.push_back(v);
    return out;
}

std::vector<double> episode_risks(const std::vector<CurvePoint>& curve)
{
    std::map<int, double> sums;
    for (const CurvePoint& c : curve)
        sums[c.episode] += c.cum_risk;
    std::vector<double> out;
    for (const auto& [e, v] : sums)
        out.push_back(v);
    return out;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path,
                     const std::string& manifest)
{
    std::ofstream out(path);
    if (!out)
        fail(ErrorCode::IoFailure, "cannot write " + path.string());
    if (!manifest.empty())
        out << "# manifest=" << manifest << "\n";
    out << "episode,agent,cum_reward,cum_risk,zeta\n";
    char line[160];
    for (const CurvePoint& c : curve) {
        std::snprintf(line, sizeof line, "%d,%d,%.9g,%.9g,%.6f\n", c.episode, c.agent, c.cum_reward, c.cum_risk,
                      c.zeta);
        out << line;
    }
    if (!out)
        fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

} // namespace agri
