// qpower: train, evaluate and inspect per-antenna discrete power control.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qpower/actions.hpp"
#include "qpower/error.hpp"
#include "qpower/runner.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> thin;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "experiment configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "override the configuration seed");
    cmd->add_option("--out", args.out, "output directory (default: output_dir from config)");
    cmd->add_option("--thin", args.thin, "write every n-th step to the metrics file");
}

qpower::SimConfig resolve(const CommonArgs& args) {
    qpower::SimConfig c = qpower::load_config(args.config);
    if (args.seed) c.seed = *args.seed;
    if (args.out) c.output_dir = *args.out;
    if (args.thin) {
        if (*args.thin == 0) throw qpower::ConfigError("--thin must be >= 1");
        c.thin = *args.thin;
    }
    return c;
}

void print_summary(const qpower::TrainSummary& s) {
    std::cout << s.to_json().dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Q-learning per-antenna power allocation for multi-user MIMO downlinks"};
    app.require_subcommand(1);

    CommonArgs train_args;
    std::size_t runs = 1;
    auto* train = app.add_subcommand("train", "train a Q-table and write metrics");
    add_common(train, train_args);
    train->add_option("--runs", runs, "independent seeds to train concurrently")
        ->check(CLI::PositiveNumber);

    CommonArgs eval_args;
    std::string eval_qtable;
    std::size_t eval_steps = 10000;
    auto* evaluate = app.add_subcommand("evaluate", "greedy rollout of a trained Q-table");
    add_common(evaluate, eval_args);
    evaluate->add_option("--qtable", eval_qtable, "Q-table file")->required();
    evaluate->add_option("--steps", eval_steps, "rollout length");

    CommonArgs oracle_args;
    std::optional<std::string> oracle_qtable;
    auto* oracle = app.add_subcommand("oracle", "exact value iteration with the true transitions");
    add_common(oracle, oracle_args);
    oracle->add_option("--qtable", oracle_qtable, "Q-table to compare against the exact solution");

    CommonArgs enum_args;
    std::optional<std::string> enum_csv;
    auto* enumerate = app.add_subcommand("enumerate-actions", "size and optionally dump the action space");
    add_common(enumerate, enum_args);
    enumerate->add_option("--csv", enum_csv, "write action_index,p_1..p_M rows here");

    CommonArgs curve_args;
    std::size_t window = 500;
    std::optional<std::string> metrics_in;
    auto* curves = app.add_subcommand("curves", "moving-average curves from a metrics file");
    add_common(curves, curve_args);
    curves->add_option("--window", window, "moving-average window")->check(CLI::PositiveNumber);
    curves->add_option("--metrics", metrics_in, "metrics file (default: <out>/metrics.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            const auto c = resolve(train_args);
            if (runs > 1) {
                const auto all = qpower::run_train_many(c, c.output_dir, runs);
                for (const auto& s : all) print_summary(s);
            } else {
                print_summary(qpower::run_train(c, c.output_dir).summary);
            }
        } else if (*evaluate) {
            const auto c = resolve(eval_args);
            const auto s = qpower::run_evaluate(c, eval_qtable, eval_steps, c.output_dir);
            std::cout << s.to_json(false).dump(2) << '\n';
        } else if (*oracle) {
            const auto c = resolve(oracle_args);
            const auto r = qpower::run_oracle(c, c.output_dir, oracle_qtable);
            std::cout << "sweeps " << r.solution.deltas.size() << '\n';
            for (std::size_t s = 0; s < r.solution.policy.size(); ++s)
                std::cout << "state " << s << " action " << r.solution.policy[s] << " value "
                          << r.solution.v[s] << '\n';
            if (r.comparison)
                std::cout << "sup_gap " << r.comparison->sup_gap << " relative_gap "
                          << r.comparison->sup_gap / r.comparison->reference_sup
                          << " policy_agreement " << r.comparison->policy_agreement << '\n';
        } else if (*enumerate) {
            const auto c = resolve(enum_args);
            const auto levels = qpower::make_level_set(c.p_per_max, c.level_count);
            const auto count =
                qpower::count_reduced(levels, c.m_antennas, c.k_users, c.p_min(), c.trace_cap());
            std::cout << "actions " << count << '\n'
                      << "p_min " << c.p_min() << '\n'
                      << "trace_cap " << c.trace_cap() << '\n'
                      << "levels";
            for (double l : levels.values()) std::cout << ' ' << l;
            std::cout << '\n';
            if (enum_csv) {
                if (count > c.max_actions)
                    throw qpower::InfeasibleError("refusing to dump " + std::to_string(count) +
                                                  " actions (max_actions = " +
                                                  std::to_string(c.max_actions) + ")");
                const auto space = qpower::enumerate_reduced(levels, c.m_antennas, c.k_users,
                                                             c.p_min(), c.trace_cap());
                std::ofstream out(*enum_csv);
                if (!out) throw qpower::Error("cannot write " + *enum_csv);
                out << "action_index";
                for (std::size_t m = 1; m <= c.m_antennas; ++m) out << ",p_" << m;
                out << '\n';
                char buf[40];
                for (std::size_t a = 0; a < space.size(); ++a) {
                    out << a;
                    const auto action = space.action(a);
                    for (double p : action.values()) {
                        std::snprintf(buf, sizeof buf, "%.17g", p);
                        out << ',' << buf;
                    }
                    out << '\n';
                }
            }
        } else if (*curves) {
            const auto c = resolve(curve_args);
            const std::string metrics =
                metrics_in ? *metrics_in : (std::filesystem::path(c.output_dir) / "metrics.csv").string();
            const auto dest = (std::filesystem::path(c.output_dir) / "curves.csv").string();
            qpower::aggregate_curves(metrics, window, c, dest);
            std::cout << "wrote " << dest << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
