#include <doctest.h>

#include <cmath>
#include <set>

#include "agri/error.hpp"
#include "agri/scenario.hpp"
#include "helpers.hpp"

using namespace agri;
using nlohmann::json;

namespace {

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

TEST_CASE("default scenario matches the published task and energy tables")
{
    const Scenario s = build_scenario(default_config());
    CHECK(s.abs_count == 4);
    CHECK(s.mec_count == 1);
    CHECK(s.horizon == 1000);
    CHECK(s.interval_len == doctest::Approx(0.05));
    REQUIRE(s.task_type_count() == 3);
    CHECK(s.task_type(0).mean_interarrival == 0.25);
    CHECK(s.task_type(0).deadline == 1.0);
    CHECK(s.task_type(1).deadline == 2.0);
    CHECK(s.task_type(2).mean_interarrival == 0.5);
    CHECK(s.task_type(2).deadline == 15.0);
    CHECK(s.proc_intervals(0, ResourceKind::Abs) == 2);
    CHECK(s.proc_intervals(0, ResourceKind::Mec) == 1);
    CHECK(s.proc_intervals(1, ResourceKind::Abs) == 4);
    CHECK(s.proc_intervals(1, ResourceKind::Mec) == 2);
    CHECK(s.proc_intervals(2, ResourceKind::Abs) == 30);
    CHECK(s.proc_intervals(2, ResourceKind::Mec) == 15);
    CHECK(s.energy(0).capacity == 570);
    CHECK(s.energy(2).capacity == 627);
    CHECK(s.energy(1).compute == doctest::Approx(12960 * 9e-6));
    CHECK(s.energy(3).fixed_rate() == doctest::Approx((211 + 17 + 4320) * 9e-6));
    CHECK(s.kind(4) == ResourceKind::Mec);
    CHECK(s.fingerprint.size() == 16);
}

TEST_CASE("interval length must divide every processing time")
{
    json c = default_config();
    c["interval_len"] = 0.03;
    CHECK(code_of([&] { build_scenario(c); }) == ErrorCode::InvariantViolation);
}

TEST_CASE("smallest legal world builds")
{
    const json c = testing::manual_config(1, 1, 8, json::array({testing::type_json(0, "only", 1.0, 1.0, 0.1, 0.05)}));
    const Scenario s = build_scenario(c);
    CHECK(s.resource_count() == 2);
    CHECK(s.horizon == 8);
}

TEST_CASE("malformed configs are rejected with the right code")
{
    json c = default_config();
    c.erase("horizon");
    CHECK(code_of([&] { build_scenario(c); }) == ErrorCode::MalformedConfig);

    c = default_config();
    c["horizon"] = "long";
    CHECK(code_of([&] { build_scenario(c); }) == ErrorCode::MalformedConfig);

    c = default_config();
    c["task_types"][0]["proc_time_mec"] = 0.2;
    CHECK(code_of([&] { build_scenario(c); }) == ErrorCode::InvariantViolation);

    c = default_config();
    c["task_types"][0]["deadline"] = 0.05;
    CHECK(code_of([&] { build_scenario(c); }) == ErrorCode::InvariantViolation);

    c = default_config();
    c["abs_energy"][0]["compute"] = 1.0;
    CHECK(code_of([&] { build_scenario(c); }) == ErrorCode::InvariantViolation);

    c = default_config();
    c["mec_count"] = 0;
    CHECK(code_of([&] { build_scenario(c); }) == ErrorCode::InvariantViolation);

    CHECK(code_of([&] { build_scenario(json::array()); }) == ErrorCode::MalformedConfig);
}

TEST_CASE("trace generation is a pure function of scenario and seed")
{
    const Scenario s = build_scenario(default_config());
    const EpisodeTrace a = generate_trace(s, 42);
    const EpisodeTrace b = generate_trace(s, 42);
    const EpisodeTrace c = generate_trace(s, 43);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.fingerprint == s.fingerprint);
}

TEST_CASE("trace keys are unique and sorted by arrival then origin")
{
    const Scenario s = build_scenario(default_config());
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const EpisodeTrace t = generate_trace(s, seed);
        std::set<TaskKey> keys;
        for (std::size_t i = 0; i < t.tasks.size(); ++i) {
            const TaskRecord& r = t.tasks[i];
            CHECK(keys.insert(r.key()).second);
            CHECK(r.arrival >= 0);
            CHECK(r.arrival < s.horizon);
            CHECK(r.iot_delay >= 0);
            CHECK(std::abs(r.iot_delay * 1e6 - std::round(r.iot_delay * 1e6)) < 1e-6);
            if (i > 0) {
                const TaskRecord& p = t.tasks[i - 1];
                CHECK(std::tie(p.arrival, p.origin) < std::tie(r.arrival, r.origin));
            }
        }
    }
}

TEST_CASE("per-ABS Poisson counts: 0.25 s interarrival over 50 s averages 200 per stream")
{
    json c = default_config();
    c["arrival_scope"] = "per_abs";
    const Scenario s = build_scenario(c);
    // Poisson(200): the mean of 10 independent counts has sigma sqrt(200/10).
    const double expected = 50.0 / 0.25;
    const double sigma_of_mean = std::sqrt(expected / 10.0);
    for (int j = 0; j < s.abs_count; ++j)
        for (int k = 0; k < 2; ++k) {
            double total = 0;
            for (std::uint64_t seed = 1; seed <= 10; ++seed)
                for (const TaskRecord& t : generate_trace(s, seed).tasks)
                    total += (t.origin == j && t.type_id == k) ? 1 : 0;
            CHECK(std::abs(total / 10.0 - expected) <= 3 * sigma_of_mean);
        }
}

TEST_CASE("farm-scope arrivals: one stream per type spread over the ABSs")
{
    const Scenario s = build_scenario(default_config());
    std::vector<double> per_type(3, 0.0);
    std::vector<double> per_abs(4, 0.0);
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
        for (const TaskRecord& t : generate_trace(s, seed).tasks) {
            per_type[static_cast<std::size_t>(t.type_id)] += 1;
            per_abs[static_cast<std::size_t>(t.origin)] += 1;
        }
    const double expect[] = {200, 200, 100};
    for (int k = 0; k < 3; ++k)
        CHECK(std::abs(per_type[static_cast<std::size_t>(k)] / 10 - expect[k]) <= 3 * std::sqrt(expect[k] / 10));
    const double total = per_type[0] + per_type[1] + per_type[2];
    for (double n : per_abs)
        CHECK(n / total == doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("long-run interarrival mean converges within 5 percent")
{
    json c = default_config(1, 1, 200000);
    c["arrival_scope"] = "per_abs";
    c["task_types"] = json::array({testing::type_json(0, "only", 0.25, 1.0, 0.1, 0.05)});
    const Scenario s = build_scenario(c);
    const EpisodeTrace t = generate_trace(s, 7);
    REQUIRE(t.tasks.size() >= 10000);
    const double span = s.horizon * s.interval_len;
    CHECK(span / static_cast<double>(t.tasks.size()) == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("vanishing arrival rate yields an empty trace")
{
    json c = default_config();
    for (auto& t : c["task_types"])
        t["mean_interarrival"] = 1e12;
    CHECK(generate_trace(build_scenario(c), 3).tasks.empty());
}

TEST_CASE("trace files round-trip and check the fingerprint")
{
    testing::TempDir dir("trace");
    const Scenario s = build_scenario(default_config());
    const EpisodeTrace t = generate_trace(s, 11);
    save_trace(t, dir / "a.csv");
    CHECK(load_trace(dir / "a.csv") == t);
    CHECK(load_trace(dir / "a.csv", s) == t);

    const std::string text = testing::slurp(dir / "a.csv");
    CHECK(text.rfind("#fingerprint=" + s.fingerprint + "\nj,t,k,alpha_I\n", 0) == 0);

    EpisodeTrace empty;
    empty.fingerprint = s.fingerprint;
    save_trace(empty, dir / "empty.csv");
    CHECK(load_trace(dir / "empty.csv") == empty);

    const Scenario other = build_scenario(default_config(3, 1, 1000));
    CHECK(code_of([&] { load_trace(dir / "a.csv", other); }) == ErrorCode::FingerprintMismatch);
    CHECK(code_of([&] { load_trace(dir / "missing.csv"); }) == ErrorCode::IoFailure);
}

TEST_CASE("hop delays: zero to self, ceil to whole intervals elsewhere")
{
    const Scenario s = build_scenario(default_config());
    CHECK(s.hop_delay(1, 1) == 0.0);
    CHECK(s.hop_intervals(1, 1) == 0);
    CHECK(s.hop_intervals(0, 2) == 2);
    CHECK(s.hop_intervals(0, 4) == 1);

    json c = default_config();
    c["delay_model"]["abs_to_mec"] = 0.01;
    CHECK(build_scenario(c).hop_intervals(0, 4) == 1);
}

TEST_CASE("energy query on a MEC is refused")
{
    const Scenario s = build_scenario(default_config());
    CHECK(code_of([&] { (void)s.energy(4); }) == ErrorCode::NotAnAbs);
}
