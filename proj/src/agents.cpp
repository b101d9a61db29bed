#include "agri/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "agri/error.hpp"

namespace agri {

namespace {

constexpr char kTableMagic[8] = {'A', 'G', 'R', 'I', 'Q', 'T', 'A', 'B'};
constexpr std::uint32_t kTableVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in)
        fail(ErrorCode::IoFailure, "truncated table file");
    return v;
}

template <typename T>
void put_array(std::ostream& out, const std::vector<T>& v)
{
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
void get_array(std::istream& in, std::vector<T>& v)
{
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
    if (!in)
        fail(ErrorCode::IoFailure, "truncated table file");
}

} // namespace

QTable::QTable(std::size_t states, int actions)
    : states_(states), actions_(actions), values_(states * static_cast<std::size_t>(actions), 0.0),
      visits_(states * static_cast<std::size_t>(actions), 0)
{
}

double QTable::max_value(std::size_t s) const
{
    return value(s, argmax(s));
}

double QTable::min_value(std::size_t s) const
{
    return value(s, argmin(s));
}

int QTable::argmax(std::size_t s) const
{
    int best = 0;
    for (int a = 1; a < actions_; ++a)
        if (value(s, a) > value(s, best))
            best = a;
    return best;
}

int QTable::argmin(std::size_t s) const
{
    int best = 0;
    for (int a = 1; a < actions_; ++a)
        if (value(s, a) < value(s, best))
            best = a;
    return best;
}

void q_update(QTable& table, std::size_t s, int a, double reward, std::optional<std::size_t> next, double alpha,
              double gamma)
{
    const double target = reward + (next ? gamma * table.max_value(*next) : 0.0);
    double& q = table.value(s, a);
    q = (1 - alpha) * q + alpha * target;
    table.visit(s, a);
}

void q_update_min(QTable& table, std::size_t s, int a, double cost, std::optional<std::size_t> next, double alpha,
                  double gamma)
{
    const double target = cost + (next ? gamma * table.min_value(*next) : 0.0);
    double& q = table.value(s, a);
    q = (1 - alpha) * q + alpha * target;
    table.visit(s, a);
}

std::string to_string(AgentKind kind)
{
    switch (kind) {
    case AgentKind::QLearning: return "qlearning";
    case AgentKind::RiskSensitive: return "risk";
    case AgentKind::EnergyCentric: return "energy";
    }
    return "unknown";
}

std::optional<AgentKind> parse_agent_kind(const std::string& name)
{
    if (name == "qlearning")
        return AgentKind::QLearning;
    if (name == "risk")
        return AgentKind::RiskSensitive;
    if (name == "energy")
        return AgentKind::EnergyCentric;
    return std::nullopt;
}

void LearningParams::validate() const
{
    auto check = [](bool ok, const char* what) {
        if (!ok)
            fail(ErrorCode::InvalidParams, what);
    };
    check(alpha > 0 && alpha <= 1, "alpha must lie in (0, 1]");
    check(gamma >= 0 && gamma < 1, "gamma must lie in [0, 1)");
    check(episodes >= 0, "episodes must be >= 0");
    check(update_every >= 1, "update_every must be >= 1");
    check(zeta_init >= 0 && zeta_init <= 1, "zeta_init must lie in [0, 1]");
    check(zeta_step > 0 && zeta_step <= 1, "zeta step must lie in (0, 1]");
    check(violation_limit >= 0 && violation_gap >= 0, "violation limit and gap must be >= 0");
    check(w >= 0 && w <= 1, "W must lie in [0, 1]");
    check(theta_m > 0 && theta_d > 0, "scaling factors must be positive");
    check(epsilon_start >= 0 && epsilon_start <= 1 && epsilon_end >= 0 && epsilon_end <= 1,
          "exploration rates must lie in [0, 1]");
    check(eps_hyst_fraction >= 0, "hysteresis must be >= 0");
    check(energy_gap_threshold >= 0, "energy gap threshold must be >= 0");
}

double LearningParams::epsilon_at(int episode) const
{
    if (episodes <= 1)
        return epsilon_start;
    const double progress = std::clamp(static_cast<double>(episode) / (episodes - 1), 0.0, 1.0);
    return epsilon_start + (epsilon_end - epsilon_start) * progress;
}

void to_json(nlohmann::json& j, const LearningParams& p)
{
    j = {{"alpha", p.alpha},
         {"gamma", p.gamma},
         {"episodes", p.episodes},
         {"update_every", p.update_every},
         {"zeta_init", p.zeta_init},
         {"zeta_step", p.zeta_step},
         {"violation_limit", p.violation_limit},
         {"violation_gap", p.violation_gap},
         {"w", p.w},
         {"theta_m", p.theta_m},
         {"theta_d", p.theta_d},
         {"severity", p.severity},
         {"epsilon_start", p.epsilon_start},
         {"epsilon_end", p.epsilon_end},
         {"eps_hyst_fraction", p.eps_hyst_fraction},
         {"energy_gap_threshold", p.energy_gap_threshold},
         {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, LearningParams& p)
{
    try {
        // Absent keys keep their defaults so partial override documents work.
        auto read = [&](const char* key, auto& field) {
            if (j.contains(key))
                j.at(key).get_to(field);
        };
        read("alpha", p.alpha);
        read("gamma", p.gamma);
        read("episodes", p.episodes);
        read("update_every", p.update_every);
        read("zeta_init", p.zeta_init);
        read("zeta_step", p.zeta_step);
        read("violation_limit", p.violation_limit);
        read("violation_gap", p.violation_gap);
        read("w", p.w);
        read("theta_m", p.theta_m);
        read("theta_d", p.theta_d);
        read("severity", p.severity);
        read("epsilon_start", p.epsilon_start);
        read("epsilon_end", p.epsilon_end);
        read("eps_hyst_fraction", p.eps_hyst_fraction);
        read("energy_gap_threshold", p.energy_gap_threshold);
        read("seed", p.seed);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidParams, e.what());
    }
}

AgentSet::AgentSet(AgentKind kind, StateSpace space, LearningParams params)
    : kind_(kind), space_(space), params_(params), zeta_(params.zeta_init)
{
    params_.validate();
    agents_.resize(static_cast<std::size_t>(space_.abs_count()));
    for (AgentTables& t : agents_) {
        t.reward = QTable(space_.size(), space_.actions());
        if (risk_based())
            t.risk = QTable(space_.size(), space_.actions());
    }
}

AgentSet AgentSet::for_scenario(AgentKind kind, const Scenario& scenario, const LearningParams& params)
{
    const bool with_prev = kind != AgentKind::QLearning;
    return AgentSet(kind, StateSpace(scenario.task_type_count(), scenario.abs_count, scenario.mec_count, with_prev),
                    params);
}

double AgentSet::combined(int j, std::size_t s, int a) const
{
    const AgentTables& t = agent(j);
    return zeta_ * t.risk.value(s, a) + (1 - zeta_) * t.reward.value(s, a);
}

QTable AgentSet::combined_table(int j) const
{
    const AgentTables& t = agent(j);
    QTable c(space_.size(), space_.actions());
    for (std::size_t i = 0; i < c.values().size(); ++i)
        c.values()[i] = zeta_ * t.risk.values()[i] + (1 - zeta_) * t.reward.values()[i];
    return c;
}

int AgentSet::greedy(int j, std::size_t s) const
{
    if (!risk_based())
        return agent(j).reward.argmax(s);
    int best = 0;
    double best_value = combined(j, s, 0);
    for (int a = 1; a < space_.actions(); ++a) {
        const double v = combined(j, s, a);
        if (v < best_value) {
            best = a;
            best_value = v;
        }
    }
    return best;
}

std::size_t AgentSet::encode(const Observation& obs, int prev_action) const
{
    return space_.index(encode_state(obs, params_.eps_hyst_fraction, space_.with_prev_action() ? prev_action : -1));
}

DecisionSignal AgentSet::assess(const Observation& obs, ResourceId action) const
{
    DecisionSignal sig;
    sig.battery_level = battery_level_for(obs, action, params_.eps_hyst_fraction);
    sig.delay = obs.expected_delay[static_cast<std::size_t>(action)];
    const bool expects_violation = obs.expects_violation(action);

    switch (kind_) {
    case AgentKind::QLearning:
        sig.in_risk = expects_violation;
        sig.severity = expects_violation ? violation_severity(obs, action, params_.severity) : 0;
        sig.reward = q_reward(sig.battery_level, sig.delay, expects_violation, sig.severity, params_.w,
                              params_.theta_m, params_.theta_d);
        break;
    case AgentKind::RiskSensitive:
        sig.in_risk = expects_violation;
        sig.severity = expects_violation ? violation_severity(obs, action, params_.severity) : 0;
        sig.reward = rs_reward(sig.battery_level, sig.delay, params_.w, params_.theta_m);
        sig.risk_cost = rs_risk_cost(sig.in_risk, sig.severity);
        break;
    case AgentKind::EnergyCentric: {
        // Risk is the battery spread after the action; deepening the
        // weakest battery is the most severe case.
        const std::vector<double> energy = expected_energies(obs, action);
        std::vector<double> fraction(energy.size());
        for (std::size_t i = 0; i < energy.size(); ++i)
            fraction[i] = energy[i] / obs.capacity[i];
        sig.in_risk = energy_centric_risk(fraction, params_.energy_gap_threshold);
        if (sig.in_risk) {
            const auto weakest = std::min_element(fraction.begin(), fraction.end()) - fraction.begin();
            sig.severity = action == weakest ? params_.severity[0] : params_.severity[3];
        }
        sig.reward = rs_reward(sig.battery_level, sig.delay, params_.w, params_.theta_m);
        sig.risk_cost = rs_risk_cost(sig.in_risk, sig.severity);
        break;
    }
    }
    return sig;
}

void AgentSet::rs_step(int j, std::size_t s, int a, double reward, double risk_cost, std::optional<std::size_t> next)
{
    AgentTables& t = agent(j);
    q_update_min(t.risk, s, a, risk_cost, next, params_.alpha, params_.gamma);
    q_update_min(t.reward, s, a, reward, next, params_.alpha, params_.gamma);
}

void AgentSet::learn(int j, std::size_t s, int a, const DecisionSignal& signal, std::optional<std::size_t> next)
{
    if (risk_based())
        rs_step(j, s, a, signal.reward, signal.risk_cost, next);
    else
        q_update(agent(j).reward, s, a, signal.reward, next, params_.alpha, params_.gamma);
}

int select_action(const AgentSet& set, int j, std::size_t s, double eps, Rng& rng)
{
    if (eps > 0 && rng.uniform() < eps)
        return static_cast<int>(rng.below(static_cast<std::uint64_t>(set.space().actions())));
    return set.greedy(j, s);
}

PolicyDecision LearnedPolicy::decide(const SimEnv& env, const TaskRecord& task)
{
    if (prev_.empty())
        for (int j = 0; j < env.scenario().abs_count; ++j)
            prev_.push_back(j);
    const Observation obs = observe(env, task);
    const auto j = static_cast<std::size_t>(task.origin);
    const std::size_t s = agents_->encode(obs, prev_[j]);
    const int a = agents_->greedy(task.origin, s);
    if (agents_->assess(obs, a).in_risk)
        ++risk_decisions_;
    prev_[j] = a;
    return {task.key(), a};
}

void save_tables(const AgentSet& agents, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorCode::IoFailure, "cannot write tables " + path.string());
    const StateSpace& sp = agents.space();
    out.write(kTableMagic, sizeof kTableMagic);
    put(out, kTableVersion);
    put(out, static_cast<std::uint32_t>(agents.kind()));
    put(out, static_cast<std::int32_t>(sp.task_types()));
    put(out, static_cast<std::int32_t>(sp.abs_count()));
    put(out, static_cast<std::int32_t>(sp.mec_count()));
    put(out, static_cast<std::uint8_t>(sp.with_prev_action()));
    put(out, agents.zeta());
    const std::string params = nlohmann::json(agents.params()).dump();
    put(out, static_cast<std::uint32_t>(params.size()));
    out.write(params.data(), static_cast<std::streamsize>(params.size()));
    put(out, static_cast<std::uint32_t>(agents.agent_count()));
    for (int j = 0; j < agents.agent_count(); ++j) {
        const AgentTables& t = agents.agent(j);
        put(out, static_cast<std::uint64_t>(t.reward.values().size()));
        put_array(out, t.reward.values());
        put_array(out, t.reward.visit_counts());
        if (agents.risk_based()) {
            put_array(out, t.risk.values());
            put_array(out, t.risk.visit_counts());
        }
    }
    if (!out)
        fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

AgentSet load_tables(const std::filesystem::path& path, const std::optional<StateSpace>& expected)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::IoFailure, "cannot read tables " + path.string());
    char magic[sizeof kTableMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kTableMagic, sizeof magic) != 0)
        fail(ErrorCode::VersionMismatch, path.string() + " is not a table file");
    const auto version = get<std::uint32_t>(in);
    if (version != kTableVersion)
        fail(ErrorCode::VersionMismatch, "table format version " + std::to_string(version));
    const auto kind_raw = get<std::uint32_t>(in);
    if (kind_raw > static_cast<std::uint32_t>(AgentKind::EnergyCentric))
        fail(ErrorCode::VersionMismatch, "unknown agent kind");
    const auto kind = static_cast<AgentKind>(kind_raw);
    const auto k = get<std::int32_t>(in);
    const auto j = get<std::int32_t>(in);
    const auto l = get<std::int32_t>(in);
    const bool with_prev = get<std::uint8_t>(in) != 0;
    const auto zeta = get<double>(in);
    const StateSpace space(k, j, l, with_prev);
    if (expected && !(*expected == space))
        fail(ErrorCode::VersionMismatch, "table state space does not match the scenario");

    std::string params_text(get<std::uint32_t>(in), '\0');
    in.read(params_text.data(), static_cast<std::streamsize>(params_text.size()));
    LearningParams params;
    try {
        params = nlohmann::json::parse(params_text).get<LearningParams>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::VersionMismatch, std::string("bad parameter block: ") + e.what());
    }

    AgentSet agents(kind, space, params);
    agents.set_zeta(zeta);
    const auto n_agents = get<std::uint32_t>(in);
    if (static_cast<int>(n_agents) != agents.agent_count())
        fail(ErrorCode::VersionMismatch, "agent count does not match the state space");
    for (int a = 0; a < agents.agent_count(); ++a) {
        AgentTables& t = agents.agent(a);
        const auto n = get<std::uint64_t>(in);
        if (n != t.reward.values().size())
            fail(ErrorCode::VersionMismatch, "table size does not match the state space");
        get_array(in, t.reward.values());
        get_array(in, t.reward.visit_counts());
        if (agents.risk_based()) {
            get_array(in, t.risk.values());
            get_array(in, t.risk.visit_counts());
        }
    }
    return agents;
}

} // namespace agri
