#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agri/rng.hpp"

namespace agri {

// Index into the resource set: ABSs occupy [0, J), MECs [J, J+L).
using ResourceId = int;

enum class ResourceKind { Abs, Mec };

struct TaskType {
    int id = 0;
    std::string name;
    double mean_interarrival = 0; ///< 1/lambda, seconds
    double deadline = 0;          ///< seconds
    double proc_time_abs = 0;     ///< seconds
    double proc_time_mec = 0;     ///< seconds

    double proc_time(ResourceKind kind) const
    {
        return kind == ResourceKind::Abs ? proc_time_abs : proc_time_mec;
    }
};

/// Battery parameters of one ABS. Consumption rates are energy units per
/// time interval, i.e. the raw table value times energy_time_scale.
struct EnergyParams {
    double capacity = 0;
    double hover = 0;
    double transmit = 0;
    double idle = 0;
    double compute = 0;

    /// Drain per elapsed interval independent of the offloading decisions.
    double fixed_rate() const { return hover + transmit + idle; }
    /// Extra drain per interval in which the CPU is busy.
    double busy_surcharge() const { return compute - idle; }
};

struct ResourceSpec {
    ResourceId id = 0;
    ResourceKind kind = ResourceKind::Abs;
    std::optional<EnergyParams> energy; ///< present iff kind == Abs
};

/// Transmission delays. The IoT-to-ABS delay is base + Exp(jitter_mean),
/// drawn once per task at trace generation. Hops are deterministic.
struct DelayModel {
    double iot_base = 0.01;
    double iot_jitter_mean = 0.005;
    double abs_to_abs = 0.1;
    double abs_to_mec = 0.05;

    double sample_iot(Rng& rng) const;
};

/// How the per-type Poisson streams map onto ABSs.
///  - Farm: one stream per task type for the whole farm; each arrival is
///    received by a uniformly drawn ABS.
///  - PerAbs: one stream per (ABS, task type).
enum class ArrivalScope { Farm, PerAbs };

struct Scenario {
    double interval_len = 0.05; ///< seconds
    int horizon = 0;            ///< T, number of intervals
    int abs_count = 0;          ///< J
    int mec_count = 0;          ///< L
    std::vector<TaskType> task_types;
    std::vector<ResourceSpec> resources;
    DelayModel delay;
    double energy_time_scale = 0;
    ArrivalScope arrival_scope = ArrivalScope::Farm;
    std::uint64_t seed = 0;

    nlohmann::json config;   ///< canonical config this scenario was built from
    std::string fingerprint; ///< 16 hex digits, FNV-1a over the canonical config

    int resource_count() const { return abs_count + mec_count; }
    int task_type_count() const { return static_cast<int>(task_types.size()); }
    bool is_abs(ResourceId r) const { return r >= 0 && r < abs_count; }
    bool is_resource(ResourceId r) const { return r >= 0 && r < resource_count(); }
    ResourceKind kind(ResourceId r) const { return is_abs(r) ? ResourceKind::Abs : ResourceKind::Mec; }

    const TaskType& task_type(int id) const { return task_types.at(static_cast<std::size_t>(id)); }
    const EnergyParams& energy(ResourceId abs) const;

    /// Processing duration in whole intervals on a resource of the given kind.
    int proc_intervals(int type_id, ResourceKind kind) const;
    double hop_delay(ResourceId from, ResourceId to) const;
    /// Intervals by which a hop postpones the task's ready interval.
    int hop_intervals(ResourceId from, ResourceId to) const;
    int max_hop_intervals() const;
};

struct TaskKey {
    ResourceId origin = 0;
    int arrival = 0;

    friend bool operator==(const TaskKey&, const TaskKey&) = default;
    friend auto operator<=>(const TaskKey&, const TaskKey&) = default;
};

struct TaskRecord {
    ResourceId origin = 0; ///< receiving ABS j
    int arrival = 0;       ///< interval index t
    int type_id = 0;       ///< k
    double iot_delay = 0;  ///< alpha^I, seconds, 6-decimal resolution

    TaskKey key() const { return {origin, arrival}; }
    friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

struct EpisodeTrace {
    std::string fingerprint;
    std::vector<TaskRecord> tasks; ///< sorted by (arrival, origin)

    friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

/// Default farm: 4 ABS, 1 MEC, three task types, desk-scale delay model.
nlohmann::json default_config(int abs_count = 4, int mec_count = 1, int horizon = 1000);

/// Stressed configuration used for upper-bound comparisons: interarrival
/// 0.125 s for every type, fire/pesticide deadlines 0.2 s / 0.6 s, T = 4 s.
nlohmann::json upper_bound_config();

/// Smallest instances the brute-force oracle can enumerate: 2 ABS + 1 MEC.
nlohmann::json tiny_config(int horizon = 48);

Scenario build_scenario(const nlohmann::json& config);
Scenario load_scenario(const std::filesystem::path& path);

EpisodeTrace generate_trace(const Scenario& scenario, std::uint64_t seed);

void save_trace(const EpisodeTrace& trace, const std::filesystem::path& path);
EpisodeTrace load_trace(const std::filesystem::path& path);
/// Loads and checks the header fingerprint against the scenario.
EpisodeTrace load_trace(const std::filesystem::path& path, const Scenario& scenario);

std::string fnv1a_hex(const std::string& bytes);

} // namespace agri
