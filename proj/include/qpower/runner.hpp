#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpower/actions.hpp"
#include "qpower/channel.hpp"
#include "qpower/rl.hpp"

namespace qpower {

/// Experiment configuration. dB fields are converted to linear once, on load.
struct SimConfig {
    std::size_t m_antennas = 0;
    std::size_t k_users = 0;
    std::size_t level_count = 0;
    double p_per_max_db = 0.0;
    double p_total_db = 0.0;
    std::vector<double> sinr_target_db;  // one per user
    double noise_var = 1.0;
    std::size_t channel_cardinality = 0;
    double self_bias = 0.5;
    PrecoderKind precoder = PrecoderKind::ZF;
    std::size_t episodes = 1000;
    std::size_t iters_per_episode = 2000;
    Schedules schedules;
    double denom_floor = 1e-6;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::size_t thin = 1;
    std::size_t max_actions = 2'000'000;
    std::size_t oracle_cell_cap = 1'000'000;

    // linear, derived
    double p_per_max = 0.0;
    double p_total = 0.0;
    std::vector<double> sinr_target;

    double max_sinr_target() const;
    double max_sinr_target_db() const;
    double p_min() const;
    double trace_cap() const { return static_cast<double>(m_antennas) * p_total; }
    RewardParams reward_params() const;
};

/// Parses and validates; unknown keys, missing required keys and infeasible
/// bounds raise ConfigError naming the culprit.
SimConfig config_from_json(const nlohmann::json& j);
SimConfig load_config(const std::string& path);
nlohmann::json config_to_json(const SimConfig& c);

/// Hex FNV-1a digest of the fields that define the MDP (not the schedule).
std::string config_hash(const SimConfig& c);

/// Channel, action space and reward parameters assembled from a config.
struct Experiment {
    SimConfig config;
    ChannelStateSet states;
    TransitionMatrix transitions;
    PowerLevelSet levels;
    ActionSpace actions;
    RewardParams reward;

    MarkovChannel make_channel(std::uint64_t stream) const;
};

Experiment build_experiment(const SimConfig& config);

/// Per-step series kept for the summary statistics.
struct StepSeries {
    std::vector<double> reward;
    std::vector<double> mean_sinr_db;
    std::vector<double> min_sinr_db;
    std::vector<double> total_power;
    std::vector<bool> per_antenna_violation;
    std::vector<bool> singular;
};

struct TrainSummary {
    std::size_t action_space_size = 0;
    double final_avg_reward = 0.0;
    double qos_satisfaction_rate = 0.0;
    double all_users_qos_rate = 0.0;
    double power_satisfaction_rate = 0.0;
    double per_antenna_satisfaction_rate = 0.0;
    double plateau_ratio = 0.0;
    std::size_t singular_steps = 0;
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    double wall_time_s = 0.0;

    nlohmann::json to_json(bool include_wall_time = true) const;
};

/// Statistics over the final `tail_fraction` of the series.
TrainSummary summarize(const StepSeries& series, const SimConfig& config,
                       std::size_t action_space_size, double tail_fraction = 0.1);

/// Max over every window of length w of the window mean (prefix sums).
double max_window_mean(const std::vector<double>& x, std::size_t w);

struct TrainReport {
    TrainSummary summary;
    StepSeries series;
    QTable q;
};

/// Builds the experiment, trains, and writes metrics.csv, summary.json,
/// qtable.json and channel.json under `out_dir`.
TrainReport run_train(const SimConfig& config, const std::string& out_dir);

/// Independent seeds seed, seed+1, ... trained concurrently into
/// out_dir/run_<i>; writes out_dir/runs_summary.json.
std::vector<TrainSummary> run_train_many(const SimConfig& config, const std::string& out_dir,
                                         std::size_t runs);

struct OracleReport {
    ValueIterationResult solution;
    std::optional<QComparison> comparison;
};

/// Exact Bellman solution over the full reward table; writes oracle.json.
OracleReport run_oracle(const SimConfig& config, const std::string& out_dir,
                        const std::optional<std::string>& qtable_path);

/// Greedy rollout of a stored Q-table; writes eval_metrics.csv and
/// eval_summary.json.
TrainSummary run_evaluate(const SimConfig& config, const std::string& qtable_path,
                          std::size_t steps, const std::string& out_dir);

struct CurveRow {
    double reward = 0.0;
    double sinr_db = 0.0;
    double total_power_db = 0.0;
};

/// Trailing moving averages (shorter windows at the start) of reward, mean
/// user SINR in dB and total power (averaged linearly, reported in dB).
std::vector<CurveRow> moving_curves(const std::string& metrics_path, std::size_t window);

/// Writes the curves with constant reference columns for the SINR target and
/// the total power constraint.
void aggregate_curves(const std::string& metrics_path, std::size_t window,
                      const SimConfig& config, const std::string& curves_path);

/// CSV header line for metrics files.
std::string metrics_header(std::size_t k_users);
std::string metrics_row(const MetricsRecord& r);

}  // namespace qpower
