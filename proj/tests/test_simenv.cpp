#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "agri/baselines.hpp"
#include "agri/error.hpp"
#include "agri/simenv.hpp"
#include "helpers.hpp"

using namespace agri;
using nlohmann::json;

namespace {

Scenario default_world(double abs_to_abs = 0.1, double abs_to_mec = 0.05)
{
    json c = default_config();
    c["delay_model"]["abs_to_abs"] = abs_to_abs;
    c["delay_model"]["abs_to_mec"] = abs_to_mec;
    return build_scenario(c);
}

ErrorCode code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an agri::Error");
    return ErrorCode::IoFailure;
}

} // namespace

TEST_CASE("expected delay to an idle MEC: 0.02 + 0.01 + 0.05 = 0.08 s")
{
    const Scenario s = default_world(0.1, 0.01);
    SimEnv env(s);
    const TaskRecord fire{0, 0, 0, 0.02};
    CHECK(env.expected_delay(fire, 4) == doctest::Approx(0.08));
}

TEST_CASE("expected delay on the idle origin ABS is IoT delay plus processing")
{
    const Scenario s = default_world();
    SimEnv env(s);
    CHECK(env.expected_delay({2, 5, 0, 0.013}, 2) == doctest::Approx(0.113));
    CHECK(env.expected_delay({2, 5, 1, 0.013}, 2) == doctest::Approx(0.213));
    CHECK(env.expected_delay({2, 5, 2, 0.013}, 2) == doctest::Approx(1.513));
}

TEST_CASE("a busy ABS adds its remaining queue to the expected delay")
{
    const Scenario s = default_world(0.0, 0.05);
    SimEnv env(s);
    env.commit({0, 10, 1, 0.0}, 0); // pesticide, 4 intervals: busy through 13
    const TaskRecord next{1, 10, 0, 0.01};
    CHECK(env.expected_delay(next, 0) == doctest::Approx(0.01 + 0.2 + 0.1));
    CHECK(env.queue_time(0) == doctest::Approx(0.2));
    CHECK(env.queue_time(1) == 0.0);
}

TEST_CASE("commit: local fire task finishes in 0.12 s, the next one in line in 0.22 s")
{
    const Scenario s = default_world(0.0, 0.05);
    SimEnv env(s);
    const CompletionRecord a = env.commit({0, 10, 0, 0.02}, 0);
    CHECK(a.start == 10);
    CHECK(a.end == 11);
    CHECK(a.delay == doctest::Approx(0.12));
    CHECK_FALSE(a.violated);

    const CompletionRecord b = env.commit({1, 10, 0, 0.02}, 0);
    CHECK(b.start == 12);
    CHECK(b.end == 13);
    CHECK(b.delay == doctest::Approx(0.22));
    CHECK(env.busy_intervals(0) == 4);
    CHECK(env.fifo(0).size() == 2);
}

TEST_CASE("commit: a growth task with 14.5 s IoT delay misses its 15 s deadline")
{
    const Scenario s = default_world();
    SimEnv env(s);
    const CompletionRecord r = env.commit({3, 0, 2, 14.5}, 3);
    CHECK(r.delay == doctest::Approx(16.0));
    CHECK(r.violated);
}

TEST_CASE("commit: deadline equal to the delay is met")
{
    const Scenario s = default_world(0.0, 0.05);
    SimEnv env(s);
    // fire on ABS: 0.9 + 0.1 = 1.0 which is not greater than 1.0
    CHECK_FALSE(env.commit({0, 0, 0, 0.9}, 0).violated);
}

TEST_CASE("commit: hop to a neighbour rounds up to whole intervals")
{
    const Scenario s = default_world(0.07, 0.05);
    SimEnv env(s);
    const CompletionRecord r = env.commit({0, 4, 0, 0.0}, 1);
    CHECK(r.start == 6);
    CHECK(r.delay == doctest::Approx(0.1 + 0.1));
}

TEST_CASE("double commit and unknown resources are rejected")
{
    const Scenario s = default_world();
    const TaskRecord t{0, 3, 0, 0.01};
    SimEnv env(s, std::span<const TaskRecord>(&t, 1));
    env.commit(t, 0);
    CHECK(env.committed(t.key()));
    CHECK(code_of([&] { env.commit(t, 1); }) == ErrorCode::DoubleCommit);
    CHECK(code_of([&] { env.commit({1, 3, 0, 0.01}, 9); }) == ErrorCode::UnknownResource);
    CHECK(code_of([&] { (void)env.expected_delay({1, 3, 0, 0.01}, -1); }) == ErrorCode::UnknownResource);
}

TEST_CASE("remaining energy follows capacity minus fixed and compute drain")
{
    const Scenario s = build_scenario(default_config());
    const double k = 9e-6;
    // ABS 0 after 1000 intervals, 40 busy intervals
    const double expected = 570 - (211 + 17 + 4320) * k * 1000 - (12960 - 4320) * k * 40;
    CHECK(remaining_energy(s.energy(0), 1000, 40) == doctest::Approx(expected));
    // ABS 2 idle for 500 intervals
    CHECK(remaining_energy(s.energy(2), 500, 0) == doctest::Approx(627 - 4548 * k * 500));
    // fully busy ABS 3
    CHECK(remaining_energy(s.energy(3), 1000, 1000) == doctest::Approx(627 - (211 + 17 + 12960) * k * 1000));

    SimEnv env(s);
    env.commit({0, 0, 2, 0.0}, 0); // 30 busy intervals
    env.advance_to(100);
    CHECK(env.remaining_energy(0) == doctest::Approx(570 - 4548 * k * 100 - 8640 * k * 30));
    CHECK(env.remaining_fraction(0) == doctest::Approx(env.remaining_energy(0) / 570));
    CHECK(env.expected_remaining_energy(1, 1) == doctest::Approx(570 - 4548 * k * 100 - 8640 * k * 4));
    CHECK(code_of([&] { (void)env.remaining_energy(4); }) == ErrorCode::NotAnAbs);
    CHECK(code_of([&] { (void)env.busy_intervals(4); }) == ErrorCode::NotAnAbs);
}

TEST_CASE("mean delay of 0.1 s and 0.3 s is 0.2 s")
{
    const Scenario s = default_world(0.0, 0.05);
    SimEnv env(s);
    env.commit({0, 0, 0, 0.0}, 0);  // 0.1
    env.commit({1, 0, 0, 0.1}, 0);  // waits 2 intervals: 0.1 + 0.1 + 0.1
    const KpiReport k = env.finalize();
    CHECK(k.mean_delay == doctest::Approx(0.2));
    CHECK_FALSE(k.no_tasks);
    CHECK(k.task_count == 2);
    CHECK(k.tasks_per_resource[0] == 2);
    CHECK(k.mean_delay_per_resource[0] == doctest::Approx(0.2));
}

TEST_CASE("an empty episode reports zero mean delay with the no-task flag")
{
    const Scenario s = build_scenario(default_config());
    SimEnv env(s);
    const KpiReport k = env.finalize();
    CHECK(k.no_tasks);
    CHECK(k.mean_delay == 0.0);
    CHECK(k.violation_count == 0);
    // idle drain only; the 570-capacity ABSs are the weakest
    CHECK(k.min_remaining_fraction == doctest::Approx((570 - 4548 * 9e-6 * 1000) / 570));
}

TEST_CASE("finalize refuses to report while tasks are still pending")
{
    const Scenario s = build_scenario(default_config());
    const std::vector<TaskRecord> tasks{{0, 1, 0, 0.01}, {1, 1, 0, 0.01}};
    SimEnv env(s, tasks);
    env.commit(tasks[0], 0);
    CHECK(code_of([&] { env.finalize(); }) == ErrorCode::IncompleteRun);
}

TEST_CASE("random episodes respect timeline, energy and KPI invariants")
{
    const Scenario s = build_scenario(default_config());
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const EpisodeTrace trace = generate_trace(s, seed);
        RandomPolicy policy(seed * 7);
        const EpisodeResult res = run_episode(s, trace, policy);
        REQUIRE(res.records.size() == trace.tasks.size());

        std::vector<std::vector<std::pair<int, int>>> windows(static_cast<std::size_t>(s.resource_count()));
        int violations = 0;
        double total = 0;
        for (std::size_t i = 0; i < res.records.size(); ++i) {
            const CompletionRecord& r = res.records[i];
            const TaskRecord& t = trace.tasks[i];
            CHECK(r.key == t.key());
            const int dur = s.proc_intervals(t.type_id, s.kind(r.resource));
            CHECK(r.end - r.start + 1 == dur);
            CHECK(r.start >= t.arrival + s.hop_intervals(t.origin, r.resource));
            // the delay identity, recomputed from the window
            const double delay =
                (r.start - t.arrival) * s.interval_len + t.iot_delay + s.task_type(t.type_id).proc_time(s.kind(r.resource));
            CHECK(r.delay == doctest::Approx(delay).epsilon(1e-12));
            CHECK(r.violated == (r.delay > s.task_type(t.type_id).deadline));
            violations += r.violated ? 1 : 0;
            total += r.delay;
            windows[static_cast<std::size_t>(r.resource)].push_back({r.start, r.end});
        }
        for (auto& w : windows) {
            // FIFO on each resource and no overlap
            for (std::size_t i = 1; i < w.size(); ++i)
                CHECK(w[i].first > w[i - 1].second);
        }
        CHECK(res.kpi.violation_count == violations);
        CHECK(res.kpi.task_count == static_cast<int>(trace.tasks.size()));
        if (!trace.tasks.empty())
            CHECK(res.kpi.mean_delay == doctest::Approx(total / static_cast<double>(trace.tasks.size())));
        for (int j = 0; j < s.abs_count; ++j) {
            const double rem = res.kpi.remaining_energy[static_cast<std::size_t>(j)];
            CHECK(rem <= s.energy(j).capacity);
            CHECK(rem == doctest::Approx(remaining_energy(s.energy(j), s.horizon,
                                                          res.busy_intervals[static_cast<std::size_t>(j)])));
        }
        CHECK(res.kpi.min_remaining_fraction ==
              doctest::Approx(*std::min_element(res.kpi.remaining_fraction.begin(), res.kpi.remaining_fraction.end())));
    }
}

TEST_CASE("replaying the same decisions reproduces the episode exactly")
{
    const Scenario s = build_scenario(default_config());
    const EpisodeTrace trace = generate_trace(s, 5);
    RandomPolicy a(9), b(9);
    const EpisodeResult ra = run_episode(s, trace, a);
    const EpisodeResult rb = run_episode(s, trace, b);
    REQUIRE(ra.records.size() == rb.records.size());
    for (std::size_t i = 0; i < ra.records.size(); ++i) {
        CHECK(ra.records[i].resource == rb.records[i].resource);
        CHECK(ra.records[i].start == rb.records[i].start);
    }
    CHECK(ra.kpi.mean_delay == rb.kpi.mean_delay);
}
