#include <doctest.h>

#include <cmath>

#include "agri/agents.hpp"
#include "agri/error.hpp"
#include "agri/training.hpp"
#include "helpers.hpp"

using namespace agri;
using nlohmann::json;

namespace {

LearningParams quick_params(int episodes = 100)
{
    LearningParams p;
    p.episodes = episodes;
    p.update_every = 10;
    return p;
}

Scenario small_world()
{
    return build_scenario(default_config(2, 1, 200));
}

} // namespace

TEST_CASE("q_update: a single step from zero gives alpha times the reward")
{
    QTable t(4, 3);
    q_update(t, 1, 2, 1.0, std::nullopt, 0.05, 0.85);
    CHECK(t.value(1, 2) == doctest::Approx(0.05));
    // bootstrap from the best next action: 0.05*(1 + 0.85*0.05)
    q_update(t, 0, 0, 1.0, 1, 0.05, 0.85);
    CHECK(t.value(0, 0) == doctest::Approx(0.05 * (1 + 0.85 * 0.05)));
    q_update_min(t, 3, 0, 2.0, 1, 0.5, 0.5);
    CHECK(t.value(3, 0) == doctest::Approx(0.5 * (2 + 0.5 * 0.0)));
}

TEST_CASE("q_update: zero rewards keep the table at zero")
{
    QTable t(3, 2);
    for (int i = 0; i < 100; ++i)
        q_update(t, static_cast<std::size_t>(i % 3), i % 2, 0.0, static_cast<std::size_t>((i + 1) % 3), 0.05, 0.85);
    for (double v : t.values())
        CHECK(v == 0.0);
}

TEST_CASE("q_update: repeated terminal updates close the gap by (1 - alpha) each visit")
{
    const double alpha = 0.05, reward = 3.0;
    QTable t(1, 1);
    for (int n = 1; n <= 50; ++n) {
        q_update(t, 0, 0, reward, std::nullopt, alpha, 0.85);
        CHECK(t.value(0, 0) == doctest::Approx(reward * (1 - std::pow(1 - alpha, n))).epsilon(1e-12));
    }
    const int visits = static_cast<int>(std::ceil(std::log(1e-6) / std::log(1 - alpha)));
    QTable u(1, 1);
    for (int n = 0; n < visits; ++n)
        q_update(u, 0, 0, 1.0, std::nullopt, alpha, 0.85);
    CHECK(std::abs(u.value(0, 0) - 1.0) < 1e-6);
}

TEST_CASE("rs_step from zero tables with unit costs gives -0.05 everywhere it touches")
{
    const Scenario s = small_world();
    AgentSet set = AgentSet::for_scenario(AgentKind::RiskSensitive, s, quick_params());
    set.rs_step(0, 7, 1, -1.0, -1.0, std::nullopt);
    CHECK(set.agent(0).risk.value(7, 1) == doctest::Approx(-0.05));
    CHECK(set.agent(0).reward.value(7, 1) == doctest::Approx(-0.05));
    for (double z : {0.0, 0.3, 1.0}) {
        set.set_zeta(z);
        CHECK(set.combined(0, 7, 1) == doctest::Approx(-0.05));
    }
    CHECK(set.agent(1).risk.value(7, 1) == 0.0);
}

TEST_CASE("zeta at the extremes ranks actions by one table alone")
{
    const Scenario s = small_world();
    AgentSet set = AgentSet::for_scenario(AgentKind::RiskSensitive, s, quick_params());
    // risk prefers action 2, reward prefers action 0
    set.agent(0).risk.value(5, 0) = 1.0;
    set.agent(0).risk.value(5, 1) = 0.5;
    set.agent(0).risk.value(5, 2) = -1.0;
    set.agent(0).reward.value(5, 0) = -2.0;
    set.agent(0).reward.value(5, 1) = 0.0;
    set.agent(0).reward.value(5, 2) = 3.0;
    set.set_zeta(1.0);
    CHECK(set.greedy(0, 5) == set.agent(0).risk.argmin(5));
    set.set_zeta(0.0);
    CHECK(set.greedy(0, 5) == set.agent(0).reward.argmin(5));
}

TEST_CASE("combined table equals zeta blend of risk and reward tables")
{
    const Scenario s = small_world();
    const EpisodeTrace trace = generate_trace(s, 1);
    const TrainingRun run = train(AgentKind::RiskSensitive, s, std::span(&trace, 1), quick_params(30));
    const double z = run.agents.zeta();
    for (int j = 0; j < run.agents.agent_count(); ++j) {
        const QTable c = run.agents.combined_table(j);
        const AgentTables& t = run.agents.agent(j);
        for (std::size_t i = 0; i < c.values().size(); ++i)
            REQUIRE(c.values()[i] == doctest::Approx(z * t.risk.values()[i] + (1 - z) * t.reward.values()[i])
                                         .epsilon(1e-15)
                                         .scale(1.0));
    }
}

TEST_CASE("select_action: greedy, uniform and tie-breaking behaviour")
{
    const Scenario s = small_world();
    AgentSet q = AgentSet::for_scenario(AgentKind::QLearning, s, quick_params());
    Rng rng(3);
    CHECK(select_action(q, 0, 4, 0.0, rng) == 0); // all-equal: lowest id
    q.agent(0).reward.value(4, 2) = 1.0;
    for (int i = 0; i < 50; ++i)
        CHECK(select_action(q, 0, 4, 0.0, rng) == 2);

    AgentSet r = AgentSet::for_scenario(AgentKind::RiskSensitive, s, quick_params());
    r.agent(1).reward.value(4, 1) = -1.0;
    CHECK(select_action(r, 1, 4, 0.0, rng) == 1);

    // eps = 1: multinomial counts within 3 sigma of n/3
    const int n = 10000;
    std::vector<int> counts(3, 0);
    for (int i = 0; i < n; ++i)
        ++counts[static_cast<std::size_t>(select_action(q, 0, 4, 1.0, rng))];
    const double p = 1.0 / 3, sigma = std::sqrt(n * p * (1 - p));
    for (int c : counts)
        CHECK(std::abs(c - n * p) <= 3 * sigma);
}

TEST_CASE("learned policy decisions use the origin agent's table")
{
    const Scenario s = small_world();
    AgentSet q = AgentSet::for_scenario(AgentKind::QLearning, s, quick_params());
    for (std::size_t st = 0; st < q.space().size(); ++st)
        q.agent(1).reward.value(st, 2) = 1.0; // ABS 1 always offloads to the MEC
    LearnedPolicy policy(q);
    const EpisodeTrace trace = generate_trace(s, 4);
    const EpisodeResult res = run_episode(s, trace, policy);
    for (std::size_t i = 0; i < trace.tasks.size(); ++i)
        CHECK(res.records[i].resource == (trace.tasks[i].origin == 1 ? 2 : 0));
}

TEST_CASE("training with zero episodes leaves every table at zero")
{
    const Scenario s = small_world();
    const EpisodeTrace trace = generate_trace(s, 1);
    for (AgentKind k : {AgentKind::QLearning, AgentKind::RiskSensitive, AgentKind::EnergyCentric}) {
        const TrainingRun run = train(k, s, std::span(&trace, 1), quick_params(0));
        CHECK(run.curve.empty());
        CHECK(run.agents == AgentSet::for_scenario(k, s, quick_params(0)));
    }
}

TEST_CASE("training on one trace for 100 episodes yields a full curve and a bounded zeta")
{
    const Scenario s = small_world();
    const EpisodeTrace trace = generate_trace(s, 1);
    const TrainingRun run = train(AgentKind::RiskSensitive, s, std::span(&trace, 1), quick_params(100));
    CHECK(run.curve.size() == 100u * 2u);
    CHECK(run.zeta.size() == 100);
    CHECK(run.update_signal.size() == 10);
    for (const CurvePoint& p : run.curve) {
        CHECK(std::isfinite(p.cum_reward));
        CHECK(std::isfinite(p.cum_risk));
        CHECK(p.zeta >= 0.0);
        CHECK(p.zeta <= 1.0);
    }
    CHECK(episode_rewards(run.curve).size() == 100);
    for (double v : run.agents.agent(0).reward.values())
        REQUIRE(std::isfinite(v));
}

TEST_CASE("zeta moves by one step per update in the direction of the signal")
{
    const Scenario s = small_world();
    const EpisodeTrace trace = generate_trace(s, 2);
    LearningParams p = quick_params(60);
    p.zeta_init = 0.5;
    p.zeta_step = 0.1;
    const TrainingRun run = train(AgentKind::RiskSensitive, s, std::span(&trace, 1), p);
    double z = 0.5;
    for (std::size_t u = 0; u < run.update_signal.size(); ++u) {
        z = zeta_update(z, run.update_signal[u], p.violation_gap, p.violation_limit, p.zeta_step);
        CHECK(run.zeta[(u + 1) * 10 - 1] == doctest::Approx(z));
    }
}

TEST_CASE("training is deterministic given traces, parameters and seed")
{
    const Scenario s = small_world();
    const std::vector<EpisodeTrace> traces{generate_trace(s, 1), generate_trace(s, 2)};
    const TrainingRun a = train(AgentKind::QLearning, s, traces, quick_params(40));
    const TrainingRun b = train(AgentKind::QLearning, s, traces, quick_params(40));
    CHECK(a.agents == b.agents);
    LearningParams other = quick_params(40);
    other.seed = 2;
    CHECK_FALSE(train(AgentKind::QLearning, s, traces, other).agents == a.agents);
}

TEST_CASE("independent learners: agent 1 never touches agent 0's tables")
{
    // Every task originates at ABS 1, so ABS 0's tables stay at zero.
    const Scenario s = small_world();
    EpisodeTrace trace = generate_trace(s, 3);
    std::vector<TaskRecord> only_one;
    for (const TaskRecord& t : trace.tasks)
        if (t.origin == 1)
            only_one.push_back(t);
    trace.tasks = only_one;
    const TrainingRun run = train(AgentKind::RiskSensitive, s, std::span(&trace, 1), quick_params(20));
    for (double v : run.agents.agent(0).reward.values())
        REQUIRE(v == 0.0);
    for (double v : run.agents.agent(0).risk.values())
        REQUIRE(v == 0.0);
}

TEST_CASE("tables round-trip through disk")
{
    testing::TempDir dir("tables");
    const Scenario s = small_world();
    const EpisodeTrace trace = generate_trace(s, 1);
    const TrainingRun run = train(AgentKind::RiskSensitive, s, std::span(&trace, 1), quick_params(20));
    save_tables(run.agents, dir / "rs.qtab");
    const AgentSet back = load_tables(dir / "rs.qtab", run.agents.space());
    CHECK(back == run.agents);
    CHECK(back.zeta() == run.agents.zeta());
    CHECK(back.params() == run.agents.params());

    const AgentSet fresh = AgentSet::for_scenario(AgentKind::QLearning, s, quick_params());
    save_tables(fresh, dir / "fresh.qtab");
    CHECK(load_tables(dir / "fresh.qtab") == fresh);
}

TEST_CASE("loading tables into the wrong world fails with VersionMismatch")
{
    testing::TempDir dir("tables_bad");
    const Scenario s = small_world();
    save_tables(AgentSet::for_scenario(AgentKind::RiskSensitive, s, quick_params()), dir / "a.qtab");
    const StateSpace other(3, 3, 1, true);
    auto code = [&](const std::filesystem::path& p, std::optional<StateSpace> space) {
        try {
            load_tables(p, space);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoFailure;
    };
    CHECK(code(dir / "a.qtab", other) == ErrorCode::VersionMismatch);
    testing::TempDir junk("tables_junk");
    {
        std::FILE* f = std::fopen((junk / "x.qtab").c_str(), "wb");
        std::fputs("not a table", f);
        std::fclose(f);
    }
    CHECK(code(junk / "x.qtab", std::nullopt) == ErrorCode::VersionMismatch);
}

TEST_CASE("invalid learning parameters are rejected")
{
    const Scenario s = small_world();
    const EpisodeTrace trace = generate_trace(s, 1);
    auto rejects = [&](auto mutate) {
        LearningParams p = quick_params(1);
        mutate(p);
        try {
            train(AgentKind::QLearning, s, std::span(&trace, 1), p);
        } catch (const Error& e) {
            return e.code() == ErrorCode::InvalidParams;
        }
        return false;
    };
    CHECK(rejects([](LearningParams& p) { p.alpha = 0; }));
    CHECK(rejects([](LearningParams& p) { p.gamma = 1; }));
    CHECK(rejects([](LearningParams& p) { p.episodes = -1; }));
    CHECK(rejects([](LearningParams& p) { p.update_every = 0; }));
    CHECK(rejects([](LearningParams& p) { p.w = 1.5; }));
    CHECK(rejects([](LearningParams& p) { p.zeta_init = 2; }));
    CHECK_THROWS_AS(train(AgentKind::QLearning, s, std::span<const EpisodeTrace>(), quick_params(1)), Error);
}

TEST_CASE("learning parameters survive a JSON round trip and accept partial documents")
{
    LearningParams p = quick_params(77);
    p.w = 0.25;
    p.severity = {-5, -3, -2, -1};
    const json j = p;
    CHECK(j.get<LearningParams>() == p);
    const LearningParams partial = json{{"episodes", 12}}.get<LearningParams>();
    CHECK(partial.episodes == 12);
    CHECK(partial.alpha == 0.05);
}

TEST_CASE("exploration decays linearly from 0.1 to 0.01")
{
    const LearningParams p = quick_params(101);
    CHECK(p.epsilon_at(0) == doctest::Approx(0.1));
    CHECK(p.epsilon_at(50) == doctest::Approx(0.055));
    CHECK(p.epsilon_at(100) == doctest::Approx(0.01));
}
