#include "agri/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "agri/error.hpp"

namespace agri {

using nlohmann::json;

namespace {

// Divisibility tolerance for "processing time is a whole number of intervals".
constexpr double kIntervalTolerance = 1e-6;

const json& require(const json& node, const char* key)
{
    if (!node.is_object() || !node.contains(key))
        fail(ErrorCode::MalformedConfig, std::string("missing field '") + key + "'");
    return node.at(key);
}

double number(const json& node, const char* key)
{
    const json& v = require(node, key);
    if (!v.is_number())
        fail(ErrorCode::MalformedConfig, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

long long integer(const json& node, const char* key)
{
    const json& v = require(node, key);
    if (!v.is_number_integer())
        fail(ErrorCode::MalformedConfig, std::string("field '") + key + "' must be an integer");
    return v.get<long long>();
}

std::string text(const json& node, const char* key)
{
    const json& v = require(node, key);
    if (!v.is_string())
        fail(ErrorCode::MalformedConfig, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

void ensure(bool ok, const std::string& invariant)
{
    if (!ok)
        fail(ErrorCode::InvariantViolation, invariant);
}

bool whole_intervals(double duration, double interval_len)
{
    const double ratio = duration / interval_len;
    return std::abs(ratio - std::round(ratio)) < kIntervalTolerance && std::round(ratio) >= 1;
}

json task_type_json(int id, const char* name, double interarrival, double deadline, double abs, double mec)
{
    return {{"id", id},
            {"name", name},
            {"mean_interarrival", interarrival},
            {"deadline", deadline},
            {"proc_time_abs", abs},
            {"proc_time_mec", mec}};
}

// Default battery rows; ABSs beyond the fourth reuse the rows cyclically.
json table_energy(int abs_count)
{
    const double capacities[] = {570, 570, 627, 627};
    json rows = json::array();
    for (int j = 0; j < abs_count; ++j)
        rows.push_back({{"capacity", capacities[j % 4]},
                        {"hover", 211},
                        {"transmit", 17},
                        {"idle", 4320},
                        {"compute", 12960}});
    return rows;
}

} // namespace

double DelayModel::sample_iot(Rng& rng) const
{
    const double jitter = iot_jitter_mean > 0 ? rng.exponential(iot_jitter_mean) : 0.0;
    return std::round((iot_base + jitter) * 1e6) / 1e6;
}

const EnergyParams& Scenario::energy(ResourceId abs) const
{
    if (!is_abs(abs))
        fail(ErrorCode::NotAnAbs, "resource " + std::to_string(abs) + " is not an ABS");
    return *resources[static_cast<std::size_t>(abs)].energy;
}

int Scenario::proc_intervals(int type_id, ResourceKind k) const
{
    return static_cast<int>(std::lround(task_type(type_id).proc_time(k) / interval_len));
}

double Scenario::hop_delay(ResourceId from, ResourceId to) const
{
    if (from == to)
        return 0.0;
    return is_abs(to) ? delay.abs_to_abs : delay.abs_to_mec;
}

int Scenario::hop_intervals(ResourceId from, ResourceId to) const
{
    const double ratio = hop_delay(from, to) / interval_len;
    // Guard against 0.1/0.05 landing a hair above 2.
    return static_cast<int>(std::ceil(ratio - 1e-9));
}

int Scenario::max_hop_intervals() const
{
    int worst = 0;
    if (abs_count > 1)
        worst = std::max(worst, hop_intervals(0, 1));
    if (mec_count > 0)
        worst = std::max(worst, hop_intervals(0, abs_count));
    return worst;
}

json default_config(int abs_count, int mec_count, int horizon)
{
    return {
        {"interval_len", 0.05},
        {"horizon", horizon},
        {"abs_count", abs_count},
        {"mec_count", mec_count},
        {"arrival_scope", "farm"},
        {"seed", 1},
        {"energy_time_scale", 9.0e-6},
        {"task_types",
         json::array({task_type_json(0, "fire_detection", 0.25, 1.0, 0.1, 0.05),
                      task_type_json(1, "pesticide_detection", 0.25, 2.0, 0.2, 0.1),
                      task_type_json(2, "growth_monitoring", 0.5, 15.0, 1.5, 0.75)})},
        {"abs_energy", table_energy(abs_count)},
        {"delay_model",
         {{"iot_base", 0.01}, {"iot_jitter_mean", 0.005}, {"abs_to_abs", 0.1}, {"abs_to_mec", 0.05}}},
    };
}

json upper_bound_config()
{
    json config = default_config(4, 1, 80);
    config["task_types"] = json::array({task_type_json(0, "fire_detection", 0.125, 0.2, 0.1, 0.05),
                                        task_type_json(1, "pesticide_detection", 0.125, 0.6, 0.2, 0.1),
                                        task_type_json(2, "growth_monitoring", 0.125, 15.0, 1.5, 0.75)});
    return config;
}

json tiny_config(int horizon)
{
    json config = upper_bound_config();
    config["abs_count"] = 2;
    config["mec_count"] = 1;
    config["horizon"] = horizon;
    config["abs_energy"] = table_energy(2);
    // Roughly four arrivals per trace across the three types.
    const double interarrival = 3.0 * horizon * 0.05 / 4.0;
    for (auto& type : config["task_types"])
        type["mean_interarrival"] = interarrival;
    return config;
}

Scenario build_scenario(const json& config)
{
    if (!config.is_object())
        fail(ErrorCode::MalformedConfig, "config must be an object");

    Scenario s;
    s.interval_len = number(config, "interval_len");
    s.horizon = static_cast<int>(integer(config, "horizon"));
    s.abs_count = static_cast<int>(integer(config, "abs_count"));
    s.mec_count = static_cast<int>(integer(config, "mec_count"));
    s.energy_time_scale = number(config, "energy_time_scale");
    const long long seed = integer(config, "seed");

    const std::string scope = text(config, "arrival_scope");
    if (scope == "farm")
        s.arrival_scope = ArrivalScope::Farm;
    else if (scope == "per_abs")
        s.arrival_scope = ArrivalScope::PerAbs;
    else
        fail(ErrorCode::MalformedConfig, "arrival_scope must be 'farm' or 'per_abs'");

    ensure(s.interval_len > 0, "interval_len > 0");
    ensure(s.horizon >= 1, "T >= 1");
    ensure(s.abs_count >= 1, "J >= 1");
    ensure(s.mec_count >= 1, "L >= 1");
    ensure(s.energy_time_scale > 0, "energy_time_scale > 0");
    ensure(seed >= 0, "seed >= 0");
    s.seed = static_cast<std::uint64_t>(seed);

    const json& types = require(config, "task_types");
    if (!types.is_array())
        fail(ErrorCode::MalformedConfig, "task_types must be an array");
    ensure(!types.empty(), "at least one task type");
    for (std::size_t i = 0; i < types.size(); ++i) {
        const json& node = types[i];
        TaskType t;
        t.id = static_cast<int>(integer(node, "id"));
        t.name = node.contains("name") && node["name"].is_string() ? node["name"].get<std::string>()
                                                                   : "type" + std::to_string(i);
        t.mean_interarrival = number(node, "mean_interarrival");
        t.deadline = number(node, "deadline");
        t.proc_time_abs = number(node, "proc_time_abs");
        t.proc_time_mec = number(node, "proc_time_mec");
        const std::string tag = "task type " + std::to_string(i) + ": ";
        ensure(t.id == static_cast<int>(i), tag + "ids are dense and ordered (id == position)");
        ensure(t.mean_interarrival > 0 && t.deadline > 0 && t.proc_time_abs > 0 && t.proc_time_mec > 0,
               tag + "all durations strictly positive");
        ensure(t.proc_time_mec <= t.proc_time_abs, tag + "proc_time_mec <= proc_time_abs");
        ensure(t.deadline > t.proc_time_abs, tag + "deadline > proc_time_abs");
        ensure(whole_intervals(t.proc_time_abs, s.interval_len) && whole_intervals(t.proc_time_mec, s.interval_len),
               tag + "interval_len divides every processing time");
        s.task_types.push_back(std::move(t));
    }

    const json& energy = require(config, "abs_energy");
    if (!energy.is_array())
        fail(ErrorCode::MalformedConfig, "abs_energy must be an array");
    ensure(static_cast<int>(energy.size()) == s.abs_count, "abs_energy has exactly J rows");
    for (int j = 0; j < s.resource_count(); ++j) {
        ResourceSpec r;
        r.id = j;
        r.kind = j < s.abs_count ? ResourceKind::Abs : ResourceKind::Mec;
        if (r.kind == ResourceKind::Abs) {
            const json& row = energy[static_cast<std::size_t>(j)];
            EnergyParams e;
            e.capacity = number(row, "capacity");
            e.hover = number(row, "hover") * s.energy_time_scale;
            e.transmit = number(row, "transmit") * s.energy_time_scale;
            e.idle = number(row, "idle") * s.energy_time_scale;
            e.compute = number(row, "compute") * s.energy_time_scale;
            const std::string tag = "ABS " + std::to_string(j) + ": ";
            ensure(e.capacity > 0, tag + "capacity > 0");
            ensure(e.hover >= 0 && e.transmit >= 0 && e.idle >= 0, tag + "energy values >= 0");
            ensure(e.compute > e.idle, tag + "compute > idle");
            r.energy = e;
        }
        s.resources.push_back(r);
    }

    const json& delay = require(config, "delay_model");
    s.delay.iot_base = number(delay, "iot_base");
    s.delay.iot_jitter_mean = number(delay, "iot_jitter_mean");
    s.delay.abs_to_abs = number(delay, "abs_to_abs");
    s.delay.abs_to_mec = number(delay, "abs_to_mec");
    ensure(s.delay.iot_base >= 0 && s.delay.iot_jitter_mean >= 0 && s.delay.abs_to_abs >= 0 &&
               s.delay.abs_to_mec >= 0,
           "delay model values >= 0");

    s.config = config;
    s.fingerprint = fnv1a_hex(config.dump());
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::IoFailure, "cannot read config " + path.string());
    json config;
    try {
        config = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedConfig, path.string() + ": " + e.what());
    }
    return build_scenario(config);
}

EpisodeTrace generate_trace(const Scenario& scenario, std::uint64_t seed)
{
    struct Arrival {
        int abs;
        int interval;
        int type;
        int seq;
    };
    std::vector<Arrival> raw;
    Rng arrivals(mix_seed(seed, 1));
    const double horizon_s = scenario.horizon * scenario.interval_len;

    auto draw_stream = [&](int type, int fixed_abs) {
        const double mean = scenario.task_type(type).mean_interarrival;
        double epoch = 0;
        while (true) {
            epoch += arrivals.exponential(mean);
            if (!(epoch < horizon_s))
                break;
            const int t = std::min(static_cast<int>(epoch / scenario.interval_len), scenario.horizon - 1);
            const int j = fixed_abs >= 0 ? fixed_abs
                                         : static_cast<int>(arrivals.below(static_cast<std::uint64_t>(scenario.abs_count)));
            raw.push_back({j, t, type, static_cast<int>(raw.size())});
        }
    };
    if (scenario.arrival_scope == ArrivalScope::Farm) {
        for (int k = 0; k < scenario.task_type_count(); ++k)
            draw_stream(k, -1);
    } else {
        for (int j = 0; j < scenario.abs_count; ++j)
            for (int k = 0; k < scenario.task_type_count(); ++k)
                draw_stream(k, j);
    }

    // One task per (ABS, interval): on a clash the smaller type id keeps the
    // slot and the other moves to the ABS's next free interval.
    std::sort(raw.begin(), raw.end(), [](const Arrival& a, const Arrival& b) {
        return std::tie(a.abs, a.interval, a.type, a.seq) < std::tie(b.abs, b.interval, b.type, b.seq);
    });
    std::vector<std::vector<bool>> occupied(static_cast<std::size_t>(scenario.abs_count),
                                            std::vector<bool>(static_cast<std::size_t>(scenario.horizon)));
    EpisodeTrace trace;
    trace.fingerprint = scenario.fingerprint;
    for (const Arrival& a : raw) {
        auto& slots = occupied[static_cast<std::size_t>(a.abs)];
        int t = a.interval;
        while (t < scenario.horizon && slots[static_cast<std::size_t>(t)])
            ++t;
        if (t >= scenario.horizon)
            continue;
        slots[static_cast<std::size_t>(t)] = true;
        trace.tasks.push_back({a.abs, t, a.type, 0.0});
    }
    std::sort(trace.tasks.begin(), trace.tasks.end(), [](const TaskRecord& a, const TaskRecord& b) {
        return std::tie(a.arrival, a.origin) < std::tie(b.arrival, b.origin);
    });

    Rng delays(mix_seed(seed, 2));
    for (TaskRecord& task : trace.tasks)
        task.iot_delay = scenario.delay.sample_iot(delays);
    return trace;
}

void save_trace(const EpisodeTrace& trace, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorCode::IoFailure, "cannot write trace " + path.string());
    out << "#fingerprint=" << trace.fingerprint << "\n";
    out << "j,t,k,alpha_I\n";
    char line[96];
    for (const TaskRecord& task : trace.tasks) {
        std::snprintf(line, sizeof line, "%d,%d,%d,%.6f\n", task.origin, task.arrival, task.type_id, task.iot_delay);
        out << line;
    }
    if (!out)
        fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

EpisodeTrace load_trace(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::IoFailure, "cannot read trace " + path.string());
    EpisodeTrace trace;
    std::string line;
    const std::string prefix = "#fingerprint=";
    if (!std::getline(in, line) || line.rfind(prefix, 0) != 0)
        fail(ErrorCode::IoFailure, path.string() + ": missing fingerprint header");
    trace.fingerprint = line.substr(prefix.size());
    if (!std::getline(in, line) || line != "j,t,k,alpha_I")
        fail(ErrorCode::IoFailure, path.string() + ": missing column header");
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        TaskRecord task;
        char tail = 0;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%lf%c", &task.origin, &task.arrival, &task.type_id,
                        &task.iot_delay, &tail) != 4)
            fail(ErrorCode::IoFailure, path.string() + ":" + std::to_string(lineno) + ": malformed row");
        trace.tasks.push_back(task);
    }
    return trace;
}

EpisodeTrace load_trace(const std::filesystem::path& path, const Scenario& scenario)
{
    EpisodeTrace trace = load_trace(path);
    if (trace.fingerprint != scenario.fingerprint)
        fail(ErrorCode::FingerprintMismatch,
             path.string() + " was generated for " + trace.fingerprint + ", not " + scenario.fingerprint);
    return trace;
}

std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace agri
