#include "agri/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "agri/error.hpp"

namespace agri {

std::vector<std::string> kpi_columns(int abs_count, int mec_count)
{
    std::vector<std::string> cols{"policy", "seed", "min_remaining_fraction", "mean_delay_s", "violations", "tasks"};
    for (int r = 0; r < abs_count + mec_count; ++r) {
        const std::string p = "r" + std::to_string(r);
        cols.push_back(p + "_tasks");
        cols.push_back(p + "_violations");
        cols.push_back(p + "_mean_delay_s");
    }
    for (int j = 0; j < abs_count; ++j)
        cols.push_back("abs" + std::to_string(j) + "_remaining_fraction");
    return cols;
}

std::vector<double> kpi_values(const KpiReport& k)
{
    std::vector<double> v{k.min_remaining_fraction, k.mean_delay, static_cast<double>(k.violation_count),
                          static_cast<double>(k.task_count)};
    for (std::size_t r = 0; r < k.tasks_per_resource.size(); ++r) {
        v.push_back(k.tasks_per_resource[r]);
        v.push_back(k.violations_per_resource[r]);
        v.push_back(k.mean_delay_per_resource[r]);
    }
    for (const double f : k.remaining_fraction)
        v.push_back(f);
    return v;
}

std::vector<KpiAggregate> aggregate(const std::vector<KpiRow>& rows)
{
    std::vector<KpiAggregate> out;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<std::vector<double>>> samples;
    for (const KpiRow& row : rows) {
        auto [it, added] = index.try_emplace(row.policy, out.size());
        if (added) {
            out.push_back({row.policy, {}, {}});
            samples.emplace_back();
        }
        samples[it->second].push_back(kpi_values(row.kpi));
    }
    for (std::size_t p = 0; p < out.size(); ++p) {
        const auto& s = samples[p];
        const std::size_t cols = s.front().size();
        out[p].mean.assign(cols, 0.0);
        out[p].stddev.assign(cols, 0.0);
        for (const auto& v : s)
            for (std::size_t c = 0; c < cols; ++c)
                out[p].mean[c] += v[c];
        for (std::size_t c = 0; c < cols; ++c)
            out[p].mean[c] /= static_cast<double>(s.size());
        for (const auto& v : s)
            for (std::size_t c = 0; c < cols; ++c)
                out[p].stddev[c] += (v[c] - out[p].mean[c]) * (v[c] - out[p].mean[c]);
        for (std::size_t c = 0; c < cols; ++c)
            out[p].stddev[c] = std::sqrt(out[p].stddev[c] / static_cast<double>(s.size()));
    }
    return out;
}

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorCode::IoFailure, "cannot write " + path.string());
    out << text;
    if (!out)
        fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc)
{
    write_text(path, doc.dump(2) + "\n");
}

void write_kpi_csv(const std::vector<KpiRow>& rows, int abs_count, int mec_count, const std::filesystem::path& path,
                   const std::string& manifest)
{
    std::string text;
    if (!manifest.empty())
        text += "# manifest=" + manifest + "\n";
    const auto cols = kpi_columns(abs_count, mec_count);
    for (std::size_t c = 0; c < cols.size(); ++c)
        text += (c ? "," : "") + cols[c];
    text += "\n";

    const auto line = [&](const std::string& policy, const std::string& seed, const std::vector<double>& v) {
        text += policy + "," + seed;
        for (const double x : v)
            text += "," + format_number(x);
        text += "\n";
    };
    for (const KpiRow& row : rows)
        line(row.policy, std::to_string(row.seed), kpi_values(row.kpi));
    for (const KpiAggregate& a : aggregate(rows)) {
        line(a.policy, "mean", a.mean);
        line(a.policy, "std", a.stddev);
    }
    write_text(path, text);
}

nlohmann::json kpi_json(const std::vector<KpiRow>& rows, int abs_count, int mec_count)
{
    const auto cols = kpi_columns(abs_count, mec_count);
    nlohmann::json runs = nlohmann::json::array();
    for (const KpiRow& row : rows) {
        nlohmann::json r{{"policy", row.policy}, {"seed", row.seed}};
        const auto v = kpi_values(row.kpi);
        for (std::size_t c = 0; c < v.size(); ++c)
            r[cols[c + 2]] = v[c];
        runs.push_back(r);
    }
    nlohmann::json agg = nlohmann::json::object();
    for (const KpiAggregate& a : aggregate(rows)) {
        nlohmann::json m = nlohmann::json::object();
        nlohmann::json s = nlohmann::json::object();
        for (std::size_t c = 0; c < a.mean.size(); ++c) {
            m[cols[c + 2]] = a.mean[c];
            s[cols[c + 2]] = a.stddev[c];
        }
        agg[a.policy] = {{"mean", m}, {"std", s}, {"runs", std::count_if(rows.begin(), rows.end(), [&](const KpiRow& r) {
                              return r.policy == a.policy;
                          })}};
    }
    return {{"runs", runs}, {"aggregate", agg}};
}

} // namespace agri
