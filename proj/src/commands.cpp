#include "agri/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "agri/svg.hpp"
#include "agri/training.hpp"

namespace agri {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::BudgetExceeded:
    case ErrorCode::InfeasibleSchedule:
        return 3;
    case ErrorCode::IoFailure:
        return 4;
    default:
        return 2;
    }
}

int worker_count()
{
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("AGRI_OFFLOAD_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1)
            n = std::min(n, static_cast<int>(cap));
    }
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(worker_count()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!first)
                        first = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (first)
        std::rethrow_exception(first);
}

std::uint64_t training_trace_seed(std::uint64_t base, std::size_t i)
{
    return mix_seed(base, 0x7472616365000000ULL + i);
}

std::uint64_t evaluation_trace_seed(std::uint64_t seed)
{
    return mix_seed(seed, 0x6576616cULL);
}

std::vector<EpisodeTrace> generate_traces(const Scenario& scenario, std::size_t n, std::uint64_t base)
{
    std::vector<EpisodeTrace> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = generate_trace(scenario, training_trace_seed(base, i)); });
    return out;
}

json preset_config(const std::string& name)
{
    if (name == "default")
        return default_config();
    if (name == "upper_bound")
        return upper_bound_config();
    if (name == "tiny")
        return tiny_config();
    fail(ErrorCode::MalformedConfig, "unknown preset '" + name + "' (default, upper_bound, tiny)");
}

json resolve_config(const ScenarioSource& src)
{
    if (src.config) {
        std::ifstream in(*src.config);
        if (!in)
            fail(ErrorCode::IoFailure, "cannot read " + src.config->string());
        try {
            return json::parse(in);
        } catch (const json::exception& e) {
            fail(ErrorCode::MalformedConfig, src.config->string() + ": " + e.what());
        }
    }
    return preset_config(src.preset.value_or("default"));
}

std::string manifest_name(const std::string& command)
{
    return "manifest_" + command + ".json";
}

void write_manifest(const fs::path& dir, const Manifest& m)
{
    const Scenario sc = build_scenario(m.config);
    json doc{{"command", m.command},
             {"tool_version", kToolVersion},
             {"scenario_fingerprint", sc.fingerprint},
             {"config", m.config},
             {"seeds", m.seeds},
             {"policies", m.policies},
             {"overrides", m.overrides},
             {"outputs", m.outputs}};
    write_json(dir / manifest_name(m.command), doc);
}

namespace {

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        fail(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

std::string trace_name(std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "trace_%04zu.csv", i);
    return buf;
}

std::vector<std::uint64_t> seed_list(std::uint64_t first, int count)
{
    if (count < 0)
        fail(ErrorCode::InvalidParams, "seed count must be non-negative");
    std::vector<std::uint64_t> s;
    for (int i = 0; i < count; ++i)
        s.push_back(first + static_cast<std::uint64_t>(i));
    return s;
}

std::vector<std::string> names_of(const LoadedPolicies& p)
{
    return p.names;
}

std::vector<PolicySpec> default_heuristics()
{
    return {{"rr", {}}, {"lqhe", {}}, {"local", {}}, {"mec", {}}};
}

} // namespace

void cmd_gen(const GenOptions& opt)
{
    const json config = resolve_config(opt.scenario);
    const Scenario sc = build_scenario(config);
    ensure_dir(opt.out);

    Manifest m{"gen", config, {opt.seed}, {}, {{"n_traces", opt.n_traces}}, {"scenario.json"}};
    write_json(opt.out / "scenario.json", config);
    const auto traces = generate_traces(sc, opt.n_traces, opt.seed);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        save_trace(traces[i], opt.out / trace_name(i));
        m.outputs.push_back(trace_name(i));
    }
    write_manifest(opt.out, m);
}

Scenario scenario_for_dir(const fs::path& dir, const ScenarioSource& src)
{
    if (!src.config && !src.preset && fs::exists(dir / "scenario.json"))
        return load_scenario(dir / "scenario.json");
    return build_scenario(resolve_config(src));
}

std::vector<EpisodeTrace> load_trace_dir(const fs::path& dir, const Scenario& scenario)
{
    if (!fs::is_directory(dir))
        fail(ErrorCode::IoFailure, "trace directory " + dir.string() + " does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.rfind("trace_", 0) == 0 && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<EpisodeTrace> traces;
    for (const auto& f : files)
        traces.push_back(load_trace(f, scenario));
    return traces;
}

fs::path tables_path(const fs::path& dir, AgentKind kind)
{
    return dir / (to_string(kind) + ".qtab");
}

TrainingRun cmd_train(const TrainOptions& opt)
{
    opt.params.validate();
    const Scenario sc = scenario_for_dir(opt.traces, opt.scenario);
    const auto traces = load_trace_dir(opt.traces, sc);
    if (traces.empty())
        fail(ErrorCode::InvalidParams, "no trace_*.csv files in " + opt.traces.string());
    ensure_dir(opt.out);

    TrainingRun run = train(opt.kind, sc, traces, opt.params);

    const std::string kind = to_string(opt.kind);
    const std::string manifest = manifest_name("train");
    Manifest m{"train", sc.config, {opt.params.seed}, {kind}, opt.overrides, {}};
    m.overrides["learning_params"] = opt.params;
    m.overrides["traces"] = opt.traces.string();

    save_tables(run.agents, tables_path(opt.out, opt.kind));
    m.outputs.push_back(tables_path(opt.out, opt.kind).filename().string());

    write_curve_csv(run.curve, opt.out / (kind + "_curve.csv"), manifest);
    m.outputs.push_back(kind + "_curve.csv");

    std::string zeta = "# manifest=" + manifest + "\nepisode,zeta\n";
    for (std::size_t e = 0; e < run.zeta.size(); ++e)
        zeta += std::to_string(e) + "," + format_number(run.zeta[e]) + "\n";
    write_text(opt.out / (kind + "_zeta.csv"), zeta);
    m.outputs.push_back(kind + "_zeta.csv");

    if (opt.svg) {
        Series s{"sum over agents", {}, episode_rewards(run.curve)};
        for (std::size_t e = 0; e < s.y.size(); ++e)
            s.x.push_back(static_cast<double>(e));
        write_text(opt.out / (kind + "_curve.svg"),
                   line_chart_svg(kind + " cumulative reward per episode", "episode", "cumulative reward", {s}));
        m.outputs.push_back(kind + "_curve.svg");
    }
    write_manifest(opt.out, m);
    return run;
}

std::unique_ptr<Policy> LoadedPolicies::make(std::size_t i) const
{
    if (tables[i])
        return std::make_unique<LearnedPolicy>(*tables[i]);
    if (names[i] == "random")
        return std::make_unique<RandomPolicy>(1);
    return make_baseline(names[i]);
}

LoadedPolicies load_policies(const std::vector<PolicySpec>& specs, const Scenario& scenario)
{
    LoadedPolicies out;
    for (const PolicySpec& spec : specs) {
        if (spec.tables) {
            auto set = std::make_shared<AgentSet>(load_tables(*spec.tables));
            const StateSpace& sp = set->space();
            if (sp.abs_count() != scenario.abs_count || sp.mec_count() != scenario.mec_count ||
                sp.task_types() != scenario.task_type_count())
                fail(ErrorCode::InvalidParams, spec.tables->string() + " was trained for a different resource set");
            out.names.push_back(spec.name.empty() ? to_string(set->kind()) : spec.name);
            out.tables.push_back(set);
            continue;
        }
        if (spec.name != "random" && !make_baseline(spec.name))
            fail(ErrorCode::InvalidParams, "unknown policy '" + spec.name + "' (rr, lqhe, local, mec, random)");
        out.names.push_back(spec.name);
        out.tables.push_back(nullptr);
    }
    return out;
}

std::vector<KpiRow> evaluate_policies(const Scenario& scenario, const LoadedPolicies& policies,
                                      const std::vector<std::uint64_t>& seeds)
{
    std::vector<EpisodeTrace> traces(seeds.size());
    parallel_for(seeds.size(),
                 [&](std::size_t s) { traces[s] = generate_trace(scenario, evaluation_trace_seed(seeds[s])); });

    const std::size_t n = policies.names.size() * seeds.size();
    std::vector<KpiRow> rows(n);
    parallel_for(n, [&](std::size_t k) {
        const std::size_t p = k / seeds.size();
        const std::size_t s = k % seeds.size();
        auto policy = policies.make(p);
        rows[k] = {policies.names[p], seeds[s], run_episode(scenario, traces[s], *policy).kpi};
    });
    return rows;
}

std::vector<KpiRow> cmd_eval(const EvalOptions& opt)
{
    const json config = resolve_config(opt.scenario);
    const Scenario sc = build_scenario(config);
    const auto specs = opt.policies.empty() ? default_heuristics() : opt.policies;
    const LoadedPolicies policies = load_policies(specs, sc);
    const auto seeds = seed_list(opt.seed, opt.seeds);
    ensure_dir(opt.out);

    const auto rows = evaluate_policies(sc, policies, seeds);
    const std::string manifest = manifest_name("eval");
    write_kpi_csv(rows, sc.abs_count, sc.mec_count, opt.out / "kpi.csv", manifest);
    json report = kpi_json(rows, sc.abs_count, sc.mec_count);
    report["manifest"] = manifest;
    write_json(opt.out / "report.json", report);

    Manifest m{"eval", config, seeds, names_of(policies), json::object(), {"kpi.csv", "report.json"}};
    for (const PolicySpec& s : specs)
        if (s.tables)
            m.overrides["tables"].push_back(s.tables->string());
    write_manifest(opt.out, m);
    return rows;
}

std::vector<double> SweepRange::points() const
{
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((to - from) / step + 1e-9));
    for (int i = 0; i <= n; ++i)
        out.push_back(std::round((from + step * i) * 1e9) / 1e9);
    return out;
}

SweepRange parse_range(const std::string& text)
{
    SweepRange r;
    double a = 0, b = 0, step = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &a, &b, &step, &tail) == 3) {
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(step) || step <= 0 || b < a)
            fail(ErrorCode::InvalidRange, "range '" + text + "' needs a <= b and step > 0");
        if ((b - a) / step > 10000)
            fail(ErrorCode::InvalidRange, "range '" + text + "' has too many points");
        r = {a, b, step};
    } else if (std::sscanf(text.c_str(), "%lf%c", &a, &tail) == 1 && std::isfinite(a)) {
        r = {a, a, 1.0};
    } else {
        fail(ErrorCode::InvalidRange, "cannot parse range '" + text + "' (expected a:b:step)");
    }
    return r;
}

json apply_axis(const json& config, const std::string& axis, double value)
{
    json c = config;
    if (!c.contains("task_types") || !c["task_types"].is_array())
        fail(ErrorCode::MalformedConfig, "config has no task_types");
    json* pd = nullptr;
    for (auto& t : c["task_types"])
        if (t.value("name", "").find("pesticide") != std::string::npos)
            pd = &t;
    if (!pd)
        fail(ErrorCode::MalformedConfig, "config has no pesticide task type");
    if (value <= 0)
        fail(ErrorCode::InvalidRange, "sweep values must be positive");
    if (axis == "pd_proc_time") {
        (*pd)["proc_time_abs"] = value;
        (*pd)["proc_time_mec"] = value / 2;
    } else if (axis == "pd_deadline") {
        (*pd)["deadline"] = value;
    } else {
        fail(ErrorCode::InvalidRange, "unknown axis '" + axis + "' (pd_proc_time, pd_deadline)");
    }
    return c;
}

std::vector<SweepPoint> cmd_sweep(const SweepOptions& opt)
{
    const json base = resolve_config(opt.scenario);
    const SweepRange range = parse_range(opt.range);
    const auto values = range.points();
    std::vector<Scenario> scenarios;
    for (const double v : values)
        scenarios.push_back(build_scenario(apply_axis(base, opt.axis, v)));

    const auto specs = opt.policies.empty() ? default_heuristics() : opt.policies;
    // Tables are read once and stay frozen across every point.
    const LoadedPolicies policies = load_policies(specs, scenarios.front());
    const auto seeds = seed_list(opt.seed, opt.seeds);
    ensure_dir(opt.out);

    std::vector<SweepPoint> points;
    for (std::size_t i = 0; i < values.size(); ++i)
        points.push_back({values[i], evaluate_policies(scenarios[i], policies, seeds)});

    const std::string manifest = manifest_name("sweep");
    std::string text = "# manifest=" + manifest + "\naxis,value,policy,runs";
    for (const char* k : {"min_remaining_fraction", "mean_delay_s", "violations"})
        text += std::string(",") + k + "_mean," + k + "_std";
    text += "\n";
    for (const SweepPoint& p : points)
        for (const KpiAggregate& a : aggregate(p.rows)) {
            const auto runs = std::count_if(p.rows.begin(), p.rows.end(),
                                            [&](const KpiRow& r) { return r.policy == a.policy; });
            text += opt.axis + "," + format_number(p.value) + "," + a.policy + "," + std::to_string(runs);
            for (std::size_t c = 0; c < 3; ++c)
                text += "," + format_number(a.mean[c]) + "," + format_number(a.stddev[c]);
            text += "\n";
        }
    write_text(opt.out / "sweep.csv", text);

    std::string runs = "# manifest=" + manifest + "\naxis,value";
    for (const auto& c : kpi_columns(scenarios.front().abs_count, scenarios.front().mec_count))
        runs += "," + c;
    runs += "\n";
    for (const SweepPoint& p : points)
        for (const KpiRow& r : p.rows) {
            runs += opt.axis + "," + format_number(p.value) + "," + r.policy + "," + std::to_string(r.seed);
            for (const double v : kpi_values(r.kpi))
                runs += "," + format_number(v);
            runs += "\n";
        }
    write_text(opt.out / "sweep_runs.csv", runs);

    Manifest m{"sweep", base, seeds, names_of(policies), {{"axis", opt.axis}, {"range", opt.range}},
               {"sweep.csv", "sweep_runs.csv"}};
    for (const PolicySpec& s : specs)
        if (s.tables)
            m.overrides["tables"].push_back(s.tables->string());
    write_manifest(opt.out, m);
    return points;
}

std::vector<std::string> oracle_columns()
{
    return {"method",       "problem",      "w",           "instance",           "seed",
            "status",       "min_remaining_energy",        "min_remaining_fraction", "mean_delay_s",
            "violations",   "objective",    "dominated"};
}

std::vector<OracleRow> cmd_oracle(const OracleOptions& opt)
{
    ScenarioSource src = opt.scenario;
    if (!src.config && !src.preset)
        src.preset = "tiny";
    const json config = resolve_config(src);
    const Scenario sc = build_scenario(config);
    const auto specs = opt.policies.empty() ? default_heuristics() : opt.policies;
    const LoadedPolicies policies = load_policies(specs, sc);
    if (opt.instances < 1)
        fail(ErrorCode::InvalidParams, "need at least one instance");
    for (const double w : opt.w)
        if (!(w >= 0 && w <= 1))
            fail(ErrorCode::InvalidParams, "W must lie in [0, 1]");

    const BruteForceBudget budget;
    if (sc.resource_count() > budget.max_resources || sc.horizon > budget.max_horizon)
        fail(ErrorCode::BudgetExceeded, "scenario is larger than the brute-force budget (" +
                                            std::to_string(budget.max_resources) + " resources, " +
                                            std::to_string(budget.max_horizon) + " intervals)");

    std::vector<std::uint64_t> seeds;
    std::vector<EpisodeTrace> traces;
    for (std::uint64_t s = opt.seed; static_cast<int>(traces.size()) < opt.instances; ++s) {
        if (s - opt.seed > 1000)
            fail(ErrorCode::BudgetExceeded, "no trace within the task budget in 1000 draws");
        EpisodeTrace t = generate_trace(sc, evaluation_trace_seed(s));
        if (static_cast<int>(t.tasks.size()) <= budget.max_tasks) {
            seeds.push_back(s);
            traces.push_back(std::move(t));
        }
    }

    struct Cell {
        std::vector<OracleRow> rows;
    };
    std::vector<Cell> cells(opt.w.size() * traces.size());
    parallel_for(cells.size(), [&](std::size_t k) {
        const std::size_t wi = k / traces.size();
        const std::size_t ti = k % traces.size();
        const ObjectiveWeights wt{opt.w[wi], opt.theta_m, opt.theta_d, opt.violation_limit};
        const EpisodeTrace& trace = traces[ti];

        const auto fill = [&](OracleRow& row, const ObjectiveBreakdown& b) {
            row.feasible = b.feasible;
            row.min_remaining_energy = b.min_remaining_energy;
            row.min_remaining_fraction = 1.0;
            for (ResourceId j = 0; j < sc.abs_count; ++j)
                row.min_remaining_fraction =
                    std::min(row.min_remaining_fraction,
                             b.remaining_energy[static_cast<std::size_t>(j)] / sc.energy(j).capacity);
            row.mean_delay = b.mean_delay;
            row.violations = b.violations;
            row.objective = b.value;
        };

        const BruteForceResult best = brute_force(sc, trace, opt.problem, wt, budget);
        OracleRow orow{"oracle", wt.w, static_cast<int>(ti), seeds[ti]};
        if (best.feasible)
            fill(orow, best.breakdown);
        else
            orow.feasible = false;
        cells[k].rows.push_back(orow);

        for (std::size_t p = 0; p < policies.names.size(); ++p) {
            auto policy = policies.make(p);
            const EpisodeResult r = run_episode(sc, trace, *policy);
            const ObjectiveBreakdown b = evaluate(sc, trace, schedule_from_records(r.records), opt.problem, wt);
            OracleRow row{policies.names[p], wt.w, static_cast<int>(ti), seeds[ti]};
            fill(row, b);
            if (b.feasible)
                row.dominated = best.feasible && b.value <= best.breakdown.value + 1e-9;
            cells[k].rows.push_back(row);
        }
    });

    std::vector<OracleRow> rows;
    for (const Cell& c : cells)
        rows.insert(rows.end(), c.rows.begin(), c.rows.end());

    ensure_dir(opt.out);
    const std::string manifest = manifest_name("oracle");
    std::string text = "# manifest=" + manifest + "\n";
    const auto cols = oracle_columns();
    for (std::size_t c = 0; c < cols.size(); ++c)
        text += (c ? "," : "") + cols[c];
    text += "\n";
    for (const OracleRow& r : rows) {
        const bool blank = r.method == "oracle" && !r.feasible;
        text += r.method + "," + to_string(opt.problem) + "," + format_number(r.w) + "," + std::to_string(r.instance) +
                "," + std::to_string(r.seed) + "," + (r.feasible ? "feasible" : "infeasible");
        if (blank) {
            text += ",,,,,,";
        } else {
            text += "," + format_number(r.min_remaining_energy) + "," + format_number(r.min_remaining_fraction) + "," +
                    format_number(r.mean_delay) + "," + std::to_string(r.violations) + "," +
                    format_number(r.objective);
            text += r.method == "oracle" ? std::string(",") : std::string(",") + (r.dominated ? "true" : "false");
        }
        text += "\n";
    }
    write_text(opt.out / "oracle.csv", text);

    Manifest m{"oracle",
               config,
               seeds,
               names_of(policies),
               {{"problem", to_string(opt.problem)},
                {"w", opt.w},
                {"theta_m", opt.theta_m},
                {"theta_d", opt.theta_d},
                {"violation_limit", opt.violation_limit},
                {"instances", opt.instances}},
               {"oracle.csv"}};
    write_manifest(opt.out, m);
    return rows;
}

} // namespace agri
