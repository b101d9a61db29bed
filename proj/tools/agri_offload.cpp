// Command-line front end: gen, train, eval, sweep, oracle.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "agri/commands.hpp"

namespace {

using namespace agri;

struct Common {
    std::string config;
    std::string preset;

    ScenarioSource source() const
    {
        ScenarioSource s;
        if (!config.empty())
            s.config = config;
        if (!preset.empty())
            s.preset = preset;
        return s;
    }
};

void add_scenario(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "scenario JSON file");
    cmd->add_option("--preset", c.preset, "default | upper_bound | tiny");
}

std::vector<PolicySpec> policy_specs(const std::vector<std::string>& names, const std::vector<std::string>& tables)
{
    std::vector<PolicySpec> out;
    for (const auto& n : names)
        out.push_back({n, {}});
    for (const auto& t : tables)
        out.push_back({"", t});
    return out;
}

LearningParams params_from_file(const std::string& path)
{
    LearningParams p;
    if (path.empty())
        return p;
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::IoFailure, "cannot read " + path);
    try {
        p = nlohmann::json::parse(in).get<LearningParams>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidParams, path + ": " + e.what());
    }
    return p;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Task offloading simulator, learners and exact oracle for smart-farm aerial base stations"};
    app.set_version_flag("--version", std::string(agri::kToolVersion));
    app.require_subcommand(1);

    // gen
    Common gen_c;
    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a scenario file and arrival traces");
    add_scenario(gen_cmd, gen_c);
    gen_cmd->add_option("--n,--traces", gen.n_traces, "number of traces")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "base seed")->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "output directory")->capture_default_str();

    // train
    Common train_c;
    TrainOptions train;
    std::string agent = "risk";
    std::string params_file;
    std::optional<int> episodes, update_every, violation_limit, violation_gap;
    std::optional<double> w, alpha, gamma, zeta_step;
    std::optional<std::uint64_t> train_seed;
    bool no_svg = false;
    auto* train_cmd = app.add_subcommand("train", "train one agent kind on a trace directory");
    add_scenario(train_cmd, train_c);
    train_cmd->add_option("--agent", agent, "qlearning | risk | energy")->capture_default_str();
    train_cmd->add_option("--traces", train.traces, "directory written by gen")->required();
    train_cmd->add_option("--out", train.out, "output directory")->capture_default_str();
    train_cmd->add_option("--params", params_file, "learning parameters JSON (partial allowed)");
    train_cmd->add_option("--episodes", episodes, "number of training episodes");
    train_cmd->add_option("--update-every", update_every, "episodes between zeta updates");
    train_cmd->add_option("--w", w, "energy weight W");
    train_cmd->add_option("--alpha", alpha, "learning rate");
    train_cmd->add_option("--gamma", gamma, "discount factor");
    train_cmd->add_option("--zeta-step", zeta_step, "zeta step size");
    train_cmd->add_option("--violation-limit", violation_limit, "allowed violations per episode");
    train_cmd->add_option("--violation-gap", violation_gap, "safety gap added to the violation count");
    train_cmd->add_option("--seed", train_seed, "exploration seed");
    train_cmd->add_flag("--no-svg", no_svg, "skip the SVG learning curve");

    // eval
    Common eval_c;
    EvalOptions eval;
    std::vector<std::string> eval_policies, eval_tables;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate frozen policies on fresh traces");
    add_scenario(eval_cmd, eval_c);
    eval_cmd->add_option("--policy", eval_policies, "rr | lqhe | local | mec | random (repeatable)");
    eval_cmd->add_option("--tables", eval_tables, "trained tables file (repeatable)");
    eval_cmd->add_option("--seed", eval.seed, "first evaluation seed")->capture_default_str();
    eval_cmd->add_option("--seeds", eval.seeds, "number of seeds")->capture_default_str();
    eval_cmd->add_option("--out", eval.out, "output directory")->capture_default_str();

    // sweep
    Common sweep_c;
    SweepOptions sweep;
    std::vector<std::string> sweep_policies, sweep_tables;
    auto* sweep_cmd = app.add_subcommand("sweep", "stress frozen policies over a pesticide-detection axis");
    add_scenario(sweep_cmd, sweep_c);
    sweep_cmd->add_option("--axis", sweep.axis, "pd_proc_time | pd_deadline")->required();
    sweep_cmd->add_option("--range", sweep.range, "a:b:step in seconds")->required();
    sweep_cmd->add_option("--policy", sweep_policies, "heuristic policy (repeatable)");
    sweep_cmd->add_option("--tables", sweep_tables, "trained tables file (repeatable)");
    sweep_cmd->add_option("--seed", sweep.seed, "first evaluation seed")->capture_default_str();
    sweep_cmd->add_option("--seeds", sweep.seeds, "number of seeds")->capture_default_str();
    sweep_cmd->add_option("--out", sweep.out, "output directory")->capture_default_str();

    // oracle
    Common oracle_c;
    OracleOptions oracle;
    std::string problem = "p1";
    std::vector<double> w_grid;
    std::vector<std::string> oracle_policies, oracle_tables;
    auto* oracle_cmd = app.add_subcommand("oracle", "compare policies with the exhaustive optimum on tiny traces");
    add_scenario(oracle_cmd, oracle_c);
    oracle_cmd->add_option("--problem", problem, "p1 | p2")->capture_default_str();
    oracle_cmd->add_option("--w", w_grid, "energy weight W (repeatable; default 0, 0.5, 1)");
    oracle_cmd->add_option("--violation-limit", oracle.violation_limit, "V for p2")->capture_default_str();
    oracle_cmd->add_option("--theta-m", oracle.theta_m, "delay scaling")->capture_default_str();
    oracle_cmd->add_option("--theta-d", oracle.theta_d, "violation scaling")->capture_default_str();
    oracle_cmd->add_option("--policy", oracle_policies, "heuristic policy (repeatable)");
    oracle_cmd->add_option("--tables", oracle_tables, "trained tables file (repeatable)");
    oracle_cmd->add_option("--seed", oracle.seed, "first instance seed")->capture_default_str();
    oracle_cmd->add_option("--instances", oracle.instances, "number of tiny traces")->capture_default_str();
    oracle_cmd->add_option("--out", oracle.out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gen_cmd->parsed()) {
            gen.scenario = gen_c.source();
            cmd_gen(gen);
            std::printf("wrote %zu trace(s) to %s\n", gen.n_traces, gen.out.string().c_str());
        } else if (train_cmd->parsed()) {
            const auto kind = parse_agent_kind(agent);
            if (!kind)
                fail(ErrorCode::InvalidParams, "unknown agent '" + agent + "' (qlearning, risk, energy)");
            train.kind = *kind;
            train.scenario = train_c.source();
            train.params = params_from_file(params_file);
            auto set = [&](const char* key, auto& field, const auto& opt) {
                if (opt) {
                    field = *opt;
                    train.overrides[key] = *opt;
                }
            };
            set("episodes", train.params.episodes, episodes);
            set("update_every", train.params.update_every, update_every);
            set("w", train.params.w, w);
            set("alpha", train.params.alpha, alpha);
            set("gamma", train.params.gamma, gamma);
            set("zeta_step", train.params.zeta_step, zeta_step);
            set("violation_limit", train.params.violation_limit, violation_limit);
            set("violation_gap", train.params.violation_gap, violation_gap);
            set("seed", train.params.seed, train_seed);
            train.svg = !no_svg;
            const TrainingRun run = cmd_train(train);
            std::printf("trained %s for %d episode(s), final zeta %.4f, tables at %s\n", agent.c_str(),
                        train.params.episodes, run.agents.zeta(),
                        tables_path(train.out, train.kind).string().c_str());
        } else if (eval_cmd->parsed()) {
            eval.scenario = eval_c.source();
            eval.policies = policy_specs(eval_policies, eval_tables);
            const auto rows = cmd_eval(eval);
            for (const KpiAggregate& a : aggregate(rows))
                std::printf("%-10s min_remaining %.4f  mean_delay %.4f s  violations %.2f\n", a.policy.c_str(),
                            a.mean[0], a.mean[1], a.mean[2]);
        } else if (sweep_cmd->parsed()) {
            sweep.scenario = sweep_c.source();
            sweep.policies = policy_specs(sweep_policies, sweep_tables);
            const auto points = cmd_sweep(sweep);
            std::printf("swept %zu point(s) of %s into %s\n", points.size(), sweep.axis.c_str(),
                        (sweep.out / "sweep.csv").string().c_str());
        } else if (oracle_cmd->parsed()) {
            const auto p = parse_problem(problem);
            if (!p)
                fail(ErrorCode::InvalidParams, "unknown problem '" + problem + "' (p1, p2)");
            oracle.problem = *p;
            oracle.scenario = oracle_c.source();
            if (!w_grid.empty())
                oracle.w = w_grid;
            oracle.policies = policy_specs(oracle_policies, oracle_tables);
            const auto rows = cmd_oracle(oracle);
            bool all = true;
            for (const OracleRow& r : rows)
                all = all && r.dominated;
            std::printf("%zu row(s) in %s, dominance %s\n", rows.size(), (oracle.out / "oracle.csv").string().c_str(),
                        all ? "holds" : "BROKEN");
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.code())).c_str(), e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}
