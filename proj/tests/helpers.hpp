#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "agri/scenario.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("agri_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline nlohmann::json type_json(int id, const std::string& name, double interarrival, double deadline, double abs,
                                double mec)
{
    return {{"id", id},
            {"name", name},
            {"mean_interarrival", interarrival},
            {"deadline", deadline},
            {"proc_time_abs", abs},
            {"proc_time_mec", mec}};
}

inline nlohmann::json energy_row(double capacity, double hover, double transmit, double idle, double compute)
{
    return {{"capacity", capacity}, {"hover", hover}, {"transmit", transmit}, {"idle", idle}, {"compute", compute}};
}

// Hand-built world: unit energy scale, configurable hops, no jitter.
inline nlohmann::json manual_config(int abs_count, int mec_count, int horizon, nlohmann::json types,
                                    double abs_to_abs = 0.1, double abs_to_mec = 0.05)
{
    nlohmann::json energy = nlohmann::json::array();
    for (int j = 0; j < abs_count; ++j)
        energy.push_back(energy_row(600, 0, 0, 0, 1));
    return {{"interval_len", 0.05},
            {"horizon", horizon},
            {"abs_count", abs_count},
            {"mec_count", mec_count},
            {"arrival_scope", "farm"},
            {"seed", 1},
            {"energy_time_scale", 1.0},
            {"task_types", std::move(types)},
            {"abs_energy", energy},
            {"delay_model",
             {{"iot_base", 0.01}, {"iot_jitter_mean", 0.0}, {"abs_to_abs", abs_to_abs}, {"abs_to_mec", abs_to_mec}}}};
}

inline std::string slurp(const std::filesystem::path& p)
{
    std::string out;
    if (FILE* f = std::fopen(p.c_str(), "rb")) {
        char buf[4096];
        std::size_t n;
        while ((n = std::fread(buf, 1, sizeof buf, f)) > 0)
            out.append(buf, n);
        std::fclose(f);
    }
    return out;
}

} // namespace testing
