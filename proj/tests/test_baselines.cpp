#include <doctest.h>

#include <algorithm>

#include "agri/baselines.hpp"
#include "helpers.hpp"

using namespace agri;
using nlohmann::json;

namespace {

// J=2, L=1, zero hops, capacity 600, unit energy scale.
// Types: 0 = 8/4 intervals, 1 = 4/2 intervals, 2 = 8/8 intervals.
Scenario lqhe_world(double surcharge0 = 1, double surcharge1 = 1)
{
    json types = json::array({testing::type_json(0, "long", 1.0, 10.0, 0.4, 0.2),
                              testing::type_json(1, "short", 1.0, 10.0, 0.2, 0.1),
                              testing::type_json(2, "heavy", 1.0, 10.0, 0.4, 0.4)});
    json c = testing::manual_config(2, 1, 100, types, 0.0, 0.0);
    c["abs_energy"][0]["compute"] = surcharge0;
    c["abs_energy"][1]["compute"] = surcharge1;
    return build_scenario(c);
}

// Origin ABS 0 busy through interval 23, MEC busy through 17. The decision
// is taken at interval 4, so the origin queue is 1.0 s and the MEC queue 0.7 s.
void load_origin_and_mec(SimEnv& env)
{
    env.commit({0, 0, 0, 0.0}, 0);
    env.commit({1, 0, 0, 0.0}, 1);
    env.commit({0, 1, 0, 0.0}, 0);
    env.commit({0, 2, 0, 0.0}, 0);
    env.commit({1, 2, 0, 0.0}, 2);
    env.commit({1, 3, 0, 0.0}, 2);
    env.commit({0, 3, 2, 0.0}, 2);
}

} // namespace

TEST_CASE("round robin cycles over every resource from resource 0")
{
    RoundRobinState st;
    std::vector<ResourceId> seen;
    for (int i = 0; i < 7; ++i)
        seen.push_back(round_robin_decide(st, 5));
    CHECK(seen == std::vector<ResourceId>{0, 1, 2, 3, 4, 0, 1});
}

TEST_CASE("round robin spreads n tasks as floor or ceil of n over J+L")
{
    const Scenario s = build_scenario(default_config());
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const EpisodeTrace trace = generate_trace(s, seed);
        RoundRobinPolicy rr;
        const EpisodeResult res = run_episode(s, trace, rr);
        const auto n = static_cast<int>(trace.tasks.size());
        const int R = s.resource_count();
        for (int r = 0; r < R; ++r) {
            const int got = res.kpi.tasks_per_resource[static_cast<std::size_t>(r)];
            CHECK(got >= n / R);
            CHECK(got <= (n + R - 1) / R);
        }
        for (std::size_t i = 0; i < res.records.size(); ++i)
            CHECK(res.records[i].resource == static_cast<ResourceId>(i % static_cast<std::size_t>(R)));
    }
}

TEST_CASE("round robin restarts after reset")
{
    const Scenario s = build_scenario(default_config());
    const EpisodeTrace trace = generate_trace(s, 2);
    RoundRobinPolicy rr;
    const EpisodeResult a = run_episode(s, trace, rr);
    const EpisodeResult b = run_episode(s, trace, rr);
    CHECK(a.records.front().resource == 0);
    CHECK(b.records.front().resource == 0);
}

TEST_CASE("lqhe: neighbour undercuts the origin queue and leads on energy")
{
    const Scenario s = lqhe_world();
    SimEnv env(s);
    load_origin_and_mec(env);
    env.commit({1, 1, 1, 0.0}, 1); // ABS 1 busy through 11
    env.advance_to(4);
    CHECK(env.queue_time(0) == doctest::Approx(1.0));
    CHECK(env.queue_time(1) == doctest::Approx(0.4));
    CHECK(env.queue_time(2) == doctest::Approx(0.7));
    CHECK(lqhe_decide(env, {0, 4, 1, 0.0}).target == 1);
}

TEST_CASE("lqhe: a 0.4 s gain below the threshold keeps the task local at equal energy")
{
    // ABS 0 spends 24 busy intervals at surcharge 2, ABS 1 spends 16 at 3.
    const Scenario s = lqhe_world(2, 3);
    SimEnv env(s);
    load_origin_and_mec(env);
    env.commit({1, 1, 0, 0.0}, 1); // ABS 1 busy through 15
    env.advance_to(4);
    CHECK(env.queue_time(1) == doctest::Approx(0.6));
    CHECK(env.remaining_energy(0) == doctest::Approx(env.remaining_energy(1)));
    CHECK(lqhe_decide(env, {0, 4, 1, 0.0}).target == 0);
}

TEST_CASE("lqhe: an energy lead alone moves the task to a shorter neighbour queue")
{
    // Same queues as above with equal surcharges: ABS 1 leads by 8/600.
    const Scenario s = lqhe_world();
    SimEnv env(s);
    load_origin_and_mec(env);
    env.commit({1, 1, 0, 0.0}, 1);
    env.advance_to(4);
    CHECK(env.remaining_fraction(1) - env.remaining_fraction(0) == doctest::Approx(8.0 / 600));
    CHECK(lqhe_decide(env, {0, 4, 1, 0.0}).target == 1);
}

TEST_CASE("lqhe: MEC wins when it supplies the undercut and no ABS leads on energy")
{
    const Scenario s = lqhe_world(2, 3);
    SimEnv env(s);
    env.commit({0, 0, 0, 0.0}, 0);
    env.commit({1, 0, 0, 0.0}, 1);
    env.commit({0, 1, 0, 0.0}, 0);
    env.commit({0, 2, 0, 0.0}, 0); // ABS 0 busy through 23
    env.commit({1, 1, 0, 0.0}, 1); // ABS 1 busy through 15
    env.advance_to(4);
    CHECK(env.queue_time(2) == 0.0);
    CHECK(lqhe_decide(env, {0, 4, 1, 0.0}).target == 2);
}

TEST_CASE("lqhe: an idle world keeps the task local")
{
    const Scenario s = build_scenario(default_config());
    SimEnv env(s);
    for (int j = 0; j < s.abs_count; ++j)
        CHECK(lqhe_decide(env, {j, 0, 0, 0.01}).target == j);
}

namespace {

// Checks the rule's guarantees at every decision it makes.
class CheckedLqhe final : public Policy {
public:
    std::string name() const override { return "checked"; }
    PolicyDecision decide(const SimEnv& env, const TaskRecord& task) override
    {
        const PolicyDecision d = lqhe_decide(env, task);
        const Scenario& s = env.scenario();
        CHECK(s.is_resource(d.target));
        if (d.target != task.origin) {
            CHECK(env.queue_time(d.target) <= env.queue_time(task.origin) + 1e-12);
            if (s.is_abs(d.target))
                CHECK(env.remaining_fraction(d.target) - env.remaining_fraction(task.origin) >= 0.01 - 1e-12);
            else
                CHECK(env.queue_time(task.origin) - env.queue_time(d.target) >= 0.5 - 1e-12);
            ++offloads;
        }
        return d;
    }
    int offloads = 0;
};

} // namespace

TEST_CASE("lqhe only offloads to shorter queues and to richer ABSs")
{
    const Scenario s = build_scenario(default_config());
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        CheckedLqhe policy;
        run_episode(s, generate_trace(s, seed), policy);
        CHECK(policy.offloads > 0);
    }
}

TEST_CASE("diagnostic policies: local keeps everything home, mec sends everything away")
{
    const Scenario s = build_scenario(default_config());
    const EpisodeTrace trace = generate_trace(s, 3);
    LocalPolicy local;
    const EpisodeResult l = run_episode(s, trace, local);
    CHECK(l.kpi.tasks_per_resource[4] == 0);
    for (std::size_t i = 0; i < l.records.size(); ++i)
        CHECK(l.records[i].resource == trace.tasks[i].origin);

    MecPolicy mec;
    const EpisodeResult m = run_episode(s, trace, mec);
    CHECK(m.kpi.tasks_per_resource[4] == static_cast<int>(trace.tasks.size()));
    for (int j = 0; j < s.abs_count; ++j) {
        CHECK(m.busy_intervals[static_cast<std::size_t>(j)] == 0);
        CHECK(m.kpi.remaining_energy[static_cast<std::size_t>(j)] ==
              doctest::Approx(remaining_energy(s.energy(j), s.horizon, 0)));
    }
}

TEST_CASE("baseline factory knows the CLI names")
{
    for (const char* n : {"rr", "lqhe", "local", "mec"}) {
        auto p = make_baseline(n);
        REQUIRE(p);
        CHECK(p->name() == n);
    }
    CHECK_FALSE(make_baseline("oracle"));
}
