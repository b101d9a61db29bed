#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agri/agents.hpp"
#include "agri/error.hpp"
#include "agri/oracle.hpp"
#include "agri/report.hpp"
#include "agri/training.hpp"

namespace agri {

inline constexpr const char* kToolVersion = "1.0.0";

/// Process exit status for an error: 2 config/validation, 3 budget or
/// infeasibility, 4 I/O.
int exit_code_for(ErrorCode code);

/// Worker pool size: hardware concurrency, capped by AGRI_OFFLOAD_THREADS.
int worker_count();
/// Runs fn(0..n-1) on the worker pool; rethrows the first failure.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Seed of the i-th generated training trace.
std::uint64_t training_trace_seed(std::uint64_t base, std::size_t i);
/// Seed of the fresh trace an evaluation run with `seed` replays.
std::uint64_t evaluation_trace_seed(std::uint64_t seed);

std::vector<EpisodeTrace> generate_traces(const Scenario& scenario, std::size_t n, std::uint64_t base);

/// Scenario source: a JSON file, a named preset (default, upper_bound, tiny)
/// or, when both are empty, the default preset.
struct ScenarioSource {
    std::optional<std::filesystem::path> config;
    std::optional<std::string> preset;
};

nlohmann::json resolve_config(const ScenarioSource& src);
nlohmann::json preset_config(const std::string& name);

struct Manifest {
    std::string command;
    nlohmann::json config;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> policies;
    nlohmann::json overrides = nlohmann::json::object();
    std::vector<std::string> outputs;
};

/// manifest_<command>.json, the name every output of the command cites.
std::string manifest_name(const std::string& command);
void write_manifest(const std::filesystem::path& dir, const Manifest& m);

// --- gen --------------------------------------------------------------------

struct GenOptions {
    ScenarioSource scenario;
    std::size_t n_traces = 100;
    std::uint64_t seed = 1;
    std::filesystem::path out = "traces";
};

/// Writes scenario.json, trace_NNNN.csv files and the manifest.
void cmd_gen(const GenOptions& opt);

/// Scenario stored alongside generated traces, or the explicit source.
Scenario scenario_for_dir(const std::filesystem::path& dir, const ScenarioSource& src);
std::vector<EpisodeTrace> load_trace_dir(const std::filesystem::path& dir, const Scenario& scenario);

// --- train ------------------------------------------------------------------

struct TrainOptions {
    ScenarioSource scenario;
    std::filesystem::path traces;
    AgentKind kind = AgentKind::RiskSensitive;
    LearningParams params;
    nlohmann::json overrides = nlohmann::json::object();
    std::filesystem::path out = "train";
    bool svg = true;
};

std::filesystem::path tables_path(const std::filesystem::path& dir, AgentKind kind);

/// Writes <kind>.qtab, <kind>_curve.csv, <kind>_zeta.csv, an optional SVG
/// and the manifest.
TrainingRun cmd_train(const TrainOptions& opt);

// --- eval -------------------------------------------------------------------

/// A named heuristic or a tables file.
struct PolicySpec {
    std::string name;
    std::optional<std::filesystem::path> tables;
};

struct LoadedPolicies {
    std::vector<std::string> names;
    std::vector<std::shared_ptr<const AgentSet>> tables; ///< null for heuristics
    std::unique_ptr<Policy> make(std::size_t i) const;
};

LoadedPolicies load_policies(const std::vector<PolicySpec>& specs, const Scenario& scenario);

/// Evaluates every policy on the fresh trace of every seed, in (policy,
/// seed) order.
std::vector<KpiRow> evaluate_policies(const Scenario& scenario, const LoadedPolicies& policies,
                                      const std::vector<std::uint64_t>& seeds);

struct EvalOptions {
    ScenarioSource scenario;
    std::vector<PolicySpec> policies;
    std::uint64_t seed = 1;
    int seeds = 10;
    std::filesystem::path out = "eval";
};

std::vector<KpiRow> cmd_eval(const EvalOptions& opt);

// --- sweep ------------------------------------------------------------------

struct SweepRange {
    double from = 0;
    double to = 0;
    double step = 0;
    std::vector<double> points() const;
};

/// Parses "a:b:step" or a single value. Throws InvalidRange.
SweepRange parse_range(const std::string& text);

/// Config with the pesticide-detection axis set to `value`. For the
/// processing-time axis the MEC time is half the ABS time.
nlohmann::json apply_axis(const nlohmann::json& config, const std::string& axis, double value);

struct SweepOptions {
    ScenarioSource scenario;
    std::string axis;
    std::string range;
    std::vector<PolicySpec> policies;
    std::uint64_t seed = 1;
    int seeds = 10;
    std::filesystem::path out = "sweep";
};

struct SweepPoint {
    double value = 0;
    std::vector<KpiRow> rows;
};

std::vector<SweepPoint> cmd_sweep(const SweepOptions& opt);

// --- oracle -----------------------------------------------------------------

struct OracleRow {
    std::string method;
    double w = 0;
    int instance = 0;
    std::uint64_t seed = 0;
    bool feasible = true;
    double min_remaining_energy = 0;
    double min_remaining_fraction = 0;
    double mean_delay = 0;
    int violations = 0;
    double objective = 0;
    bool dominated = true; ///< objective <= oracle optimum (policies only)
};

struct OracleOptions {
    ScenarioSource scenario; ///< defaults to the tiny preset
    Problem problem = Problem::P1;
    std::vector<double> w{0.0, 0.5, 1.0};
    double theta_m = 1.0;
    double theta_d = 1.0;
    int violation_limit = 3;
    std::vector<PolicySpec> policies;
    std::uint64_t seed = 1;
    int instances = 1;
    std::filesystem::path out = "oracle";
};

/// Instances whose trace exceeds the brute-force budget are skipped in
/// favour of the next seed.
std::vector<OracleRow> cmd_oracle(const OracleOptions& opt);

std::vector<std::string> oracle_columns();

} // namespace agri
