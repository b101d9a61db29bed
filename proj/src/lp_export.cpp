#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "agri/error.hpp"
#include "agri/oracle.hpp"

namespace agri {

namespace {

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string var(const char* stem, std::size_t i, ResourceId r, int t)
{
    return std::string(stem) + "_i" + std::to_string(i) + "_r" + std::to_string(r) + "_t" + std::to_string(t);
}

std::string xvar(std::size_t i, ResourceId r)
{
    return "x_i" + std::to_string(i) + "_r" + std::to_string(r);
}

// Accumulates one linear row and wraps it well under the 510 character line
// limit of the LP dialect.
class Row {
public:
    void add(double coef, const std::string& name)
    {
        if (coef == 0)
            return;
        std::string term = coef < 0 ? " - " : " + ";
        const double mag = std::abs(coef);
        if (mag != 1)
            term += num(mag) + " ";
        term += name;
        if (line_.size() + term.size() > 200) {
            lines_.push_back(line_);
            line_.clear();
        }
        line_ += term;
        empty_ = false;
    }
    bool empty() const { return empty_; }

    void emit(std::ostream& out, const std::string& label, const char* sense, double rhs)
    {
        out << " " << label << ":";
        for (const auto& l : lines_)
            out << l << "\n  ";
        out << line_ << " " << sense << " " << num(rhs) << "\n";
    }

    void emit_objective(std::ostream& out)
    {
        out << " obj:";
        for (const auto& l : lines_)
            out << l << "\n  ";
        out << (empty_ ? " 0 zmin" : line_) << "\n";
    }

private:
    std::vector<std::string> lines_;
    std::string line_;
    bool empty_ = true;
};

} // namespace

std::string lp_text(const Scenario& sc, const EpisodeTrace& trace, Problem problem, const ObjectiveWeights& wt)
{
    if (trace.tasks.empty())
        fail(ErrorCode::InvalidParams, "LP export needs at least one task");

    const int horizon = processing_horizon(sc, trace);
    const std::size_t n = trace.tasks.size();
    const int res = sc.resource_count();
    const double len = sc.interval_len;

    double max_iot = 0;
    double max_deadline = 0;
    for (const TaskRecord& t : trace.tasks) {
        max_iot = std::max(max_iot, t.iot_delay);
        max_deadline = std::max(max_deadline, sc.task_type(t.type_id).deadline);
    }
    // Largest delay any schedule over the index set can produce, plus slack.
    const double big_m = horizon * len + max_iot + max_deadline + 1;
    const double strict = 1e-6;

    std::ostringstream out;
    out << "\\ task offloading model, " << n << " tasks, " << res << " resources, " << horizon
        << " intervals, problem " << to_string(problem) << "\n";
    out << "Maximize\n";
    {
        Row obj;
        obj.add(wt.w, "zmin");
        const double delay_coef = problem == Problem::P1 ? (1 - wt.w) / (2 * wt.theta_m) : (1 - wt.w) / wt.theta_m;
        for (std::size_t i = 0; i < n; ++i)
            obj.add(-delay_coef / static_cast<double>(n), "d_i" + std::to_string(i));
        if (problem == Problem::P1)
            for (std::size_t i = 0; i < n; ++i)
                obj.add(-(1 - wt.w) / (2 * wt.theta_d), "v_i" + std::to_string(i));
        obj.emit_objective(out);
    }

    out << "Subject To\n";

    // Capacity: one active, starting and ending task per resource-interval.
    for (ResourceId r = 0; r < res; ++r)
        for (int t = 0; t < horizon; ++t) {
            Row a, s, e;
            for (std::size_t i = 0; i < n; ++i) {
                a.add(1, var("pa", i, r, t));
                s.add(1, var("ps", i, r, t));
                if (t > 0)
                    e.add(1, var("pe", i, r, t));
            }
            a.emit(out, "eq6_r" + std::to_string(r) + "_t" + std::to_string(t), "<=", 1);
            s.emit(out, "eq6s_r" + std::to_string(r) + "_t" + std::to_string(t), "<=", 1);
            if (!e.empty())
                e.emit(out, "eq6e_r" + std::to_string(r) + "_t" + std::to_string(t), "<=", 1);
        }

    for (std::size_t i = 0; i < n; ++i) {
        const TaskRecord& task = trace.tasks[i];
        const std::string is = "_i" + std::to_string(i);

        // A task occupies at most one resource per interval.
        for (int t = 0; t < horizon; ++t) {
            Row a, s, e;
            for (ResourceId r = 0; r < res; ++r) {
                a.add(1, var("pa", i, r, t));
                s.add(1, var("ps", i, r, t));
                if (t > 0)
                    e.add(1, var("pe", i, r, t));
            }
            a.emit(out, "eq7" + is + "_t" + std::to_string(t), "<=", 1);
            s.emit(out, "eq7s" + is + "_t" + std::to_string(t), "<=", 1);
            if (!e.empty())
                e.emit(out, "eq7e" + is + "_t" + std::to_string(t), "<=", 1);
        }

        for (ResourceId r = 0; r < res; ++r) {
            const std::string ir = is + "_r" + std::to_string(r);
            // pa(t+1) = pa(t) + ps(t+1) - pe(t+1); pa beyond the index set is 0.
            for (int t = 0; t < horizon; ++t) {
                Row row;
                if (t + 1 < horizon) {
                    row.add(1, var("pa", i, r, t + 1));
                    row.add(-1, var("ps", i, r, t + 1));
                }
                row.add(-1, var("pa", i, r, t));
                row.add(1, var("pe", i, r, t + 1));
                row.emit(out, "eq8" + ir + "_t" + std::to_string(t), "=", 0);
            }
            for (int t = 1; t < horizon; ++t) {
                Row row;
                row.add(1, var("ps", i, r, t));
                row.add(1, var("pe", i, r, t));
                row.emit(out, "eq9" + ir + "_t" + std::to_string(t), "<=", 1);
            }
            {
                Row row;
                row.add(1, var("pa", i, r, 0));
                row.add(-1, var("ps", i, r, 0));
                row.emit(out, "eq10" + ir, "=", 0);
            }
            {
                Row s, e;
                for (int t = 0; t < horizon; ++t)
                    s.add(1, var("ps", i, r, t));
                for (int t = 1; t <= horizon; ++t)
                    e.add(1, var("pe", i, r, t));
                s.emit(out, "eq11s" + ir, "<=", 1);
                e.emit(out, "eq11e" + ir, "<=", 1);
            }
            {
                // Per-resource form of the duration constraint: the product
                // pa * x collapses because pa may only be active where x = 1.
                Row row;
                for (int t = task.arrival; t < horizon; ++t)
                    row.add(1, var("pa", i, r, t));
                row.add(-sc.proc_intervals(task.type_id, sc.kind(r)), xvar(i, r));
                row.emit(out, "eq12" + ir, "=", 0);
            }
        }
        if (task.arrival > 0) {
            Row row;
            for (ResourceId r = 0; r < res; ++r)
                for (int t = 0; t < task.arrival; ++t)
                    row.add(1, var("pa", i, r, t));
            row.emit(out, "eq13" + is, "=", 0);
        }
        {
            Row row;
            for (ResourceId r = 0; r < res; ++r)
                row.add(1, xvar(i, r));
            row.emit(out, "eq14" + is, "=", 1);
        }

        // d = len * sum t ps - len * arrival + alpha^I + alpha^P
        {
            Row row;
            row.add(1, "d" + is);
            for (ResourceId r = 0; r < res; ++r)
                for (int t = 1; t < horizon; ++t)
                    row.add(-len * t, var("ps", i, r, t));
            for (ResourceId r = 0; r < res; ++r)
                row.add(-sc.task_type(task.type_id).proc_time(sc.kind(r)), xvar(i, r));
            row.emit(out, "delay" + is, "=", task.iot_delay - len * task.arrival);
        }
        const double deadline = sc.task_type(task.type_id).deadline;
        {
            Row row;
            row.add(1, "d" + is);
            row.add(-big_m, "v" + is);
            row.emit(out, "eq4" + is, "<=", deadline);
        }
        {
            Row row;
            row.add(-1, "d" + is);
            row.add(big_m, "v" + is);
            row.emit(out, "eq5" + is, "<=", big_m - strict - deadline);
        }
    }

    // zmin <= remaining energy of every ABS.
    for (ResourceId j = 0; j < sc.abs_count; ++j) {
        const EnergyParams& e = sc.energy(j);
        Row row;
        row.add(1, "zmin");
        for (std::size_t i = 0; i < n; ++i)
            for (int t = 0; t < horizon; ++t)
                row.add(e.busy_surcharge(), var("pa", i, j, t));
        row.emit(out, "emin_j" + std::to_string(j), "<=", e.capacity - e.fixed_rate() * sc.horizon);
    }

    if (problem == Problem::P2) {
        Row row;
        for (std::size_t i = 0; i < n; ++i)
            row.add(1, "v_i" + std::to_string(i));
        row.emit(out, "eq17", "<=", wt.violation_limit);
    }

    out << "Bounds\n zmin free\n";
    for (std::size_t i = 0; i < n; ++i)
        out << " d_i" << i << " free\n";

    out << "Binaries\n";
    for (std::size_t i = 0; i < n; ++i) {
        out << " v_i" << i << "\n";
        for (ResourceId r = 0; r < res; ++r) {
            out << " " << xvar(i, r) << "\n";
            for (int t = 0; t < horizon; ++t)
                out << " " << var("pa", i, r, t) << " " << var("ps", i, r, t) << "\n";
            for (int t = 1; t <= horizon; ++t)
                out << " " << var("pe", i, r, t) << "\n";
        }
    }
    out << "End\n";
    return out.str();
}

void export_lp(const Scenario& scenario, const EpisodeTrace& trace, Problem problem, const ObjectiveWeights& weights,
               const std::filesystem::path& path)
{
    const std::string text = lp_text(scenario, trace, problem, weights);
    std::ofstream out(path);
    if (!out)
        fail(ErrorCode::IoFailure, "cannot write " + path.string());
    out << text;
    if (!out)
        fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

ImportedSolution import_solution(const Scenario& sc, const EpisodeTrace& trace, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::IoFailure, "cannot read " + path.string());

    ImportedSolution sol;
    std::map<std::string, double> values;
    std::string name;
    double value = 0;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        if (!(ls >> name >> value))
            continue;
        if (name == "objective")
            sol.objective = value;
        else
            values[name] = value;
    }
    const auto get = [&](const std::string& key) {
        const auto it = values.find(key);
        return it == values.end() ? 0.0 : it->second;
    };

    const int horizon = processing_horizon(sc, trace);
    for (std::size_t i = 0; i < trace.tasks.size(); ++i) {
        ScheduledTask st;
        st.key = trace.tasks[i].key();
        st.resource = -1;
        for (ResourceId r = 0; r < sc.resource_count(); ++r)
            if (get(xvar(i, r)) > 0.5)
                st.resource = r;
        if (st.resource < 0)
            fail(ErrorCode::InvariantViolation, "solution leaves task " + std::to_string(i) + " unassigned");
        int first = -1;
        int last = -1;
        int count = 0;
        for (int t = 0; t < horizon; ++t)
            if (get(var("pa", i, st.resource, t)) > 0.5) {
                if (first < 0)
                    first = t;
                last = t;
                ++count;
            }
        if (count == 0 || last - first + 1 != count)
            fail(ErrorCode::InvariantViolation, "solution window of task " + std::to_string(i) + " is not contiguous");
        st.start = first;
        st.end = last;
        sol.schedule.tasks.push_back(st);
    }
    return sol;
}

} // namespace agri
