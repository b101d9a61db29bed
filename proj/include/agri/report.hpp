#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "agri/simenv.hpp"

namespace agri {

/// KPIs of one policy on one evaluation seed.
struct KpiRow {
    std::string policy;
    std::uint64_t seed = 0;
    KpiReport kpi;
};

struct KpiAggregate {
    std::string policy;
    std::vector<double> mean; ///< one entry per numeric column of kpi_columns()
    std::vector<double> stddev;
};

/// Column names of the KPI CSV for a scenario, leading with policy and seed.
std::vector<std::string> kpi_columns(int abs_count, int mec_count);
/// Numeric cells of a row, aligned with kpi_columns() minus the first two.
std::vector<double> kpi_values(const KpiReport& kpi);

/// Population mean and standard deviation per numeric column, per policy,
/// in first-appearance order.
std::vector<KpiAggregate> aggregate(const std::vector<KpiRow>& rows);

std::string format_number(double v);

/// One row per seed, then a "mean" and a "std" row per policy.
void write_kpi_csv(const std::vector<KpiRow>& rows, int abs_count, int mec_count, const std::filesystem::path& path,
                   const std::string& manifest = {});

nlohmann::json kpi_json(const std::vector<KpiRow>& rows, int abs_count, int mec_count);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

} // namespace agri
