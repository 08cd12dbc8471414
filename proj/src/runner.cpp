#include "qpower/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "qpower/error.hpp"
#include "qpower/kernels.hpp"

namespace qpower {

namespace fs = std::filesystem;

namespace {

enum Stream : std::uint64_t {
    kStatesStream = 0,
    kTransitionsStream = 1,
    kChannelStepStream = 2,
    kTrainerStream = 3,
    kEvalStream = 4,
};

const std::set<std::string> kRequiredKeys = {
    "m_antennas",   "k_users",        "level_count", "p_per_max_db",
    "p_total_db",   "sinr_target_db", "noise_var",   "channel_cardinality",
};

const std::set<std::string> kOptionalKeys = {
    "self_bias",     "precoder",      "episodes",           "iters_per_episode",
    "gamma",         "epsilon0",      "epsilon_decay",      "epsilon_decay_mode",
    "epsilon_floor", "beta_mode",     "beta_param",         "denom_floor",
    "seed",          "output_dir",    "thin",               "max_actions",
    "oracle_cell_cap",
};

template <typename T>
T field(const nlohmann::json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config field '" + key + "' is missing or has the wrong type");
    }
}

template <typename T>
T field_or(const nlohmann::json& j, const std::string& key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

std::size_t count_field(const nlohmann::json& j, const std::string& key, std::size_t fallback,
                        bool required = false) {
    if (!j.contains(key)) {
        if (required) throw ConfigError("config field '" + key + "' is missing");
        return fallback;
    }
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw ConfigError("config field '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

std::string beta_mode_name(BetaSchedule::Kind k) {
    switch (k) {
        case BetaSchedule::Kind::VisitInverse: return "visit_inverse";
        case BetaSchedule::Kind::VisitPower: return "visit_power";
        case BetaSchedule::Kind::Constant: return "constant";
    }
    return "visit_power";
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

struct SeriesRecorder {
    StepSeries series;

    void add(const MetricsRecord& r) {
        series.reward.push_back(r.reward);
        series.mean_sinr_db.push_back(mean_of(r.sinr_db));
        series.min_sinr_db.push_back(r.sinr_db.empty()
                                         ? 0.0
                                         : *std::min_element(r.sinr_db.begin(), r.sinr_db.end()));
        series.total_power.push_back(r.total_power);
        series.per_antenna_violation.push_back(r.per_antenna_violation);
        series.singular.push_back(r.singular);
    }
};

/// Streams metrics rows, keeping every `thin`-th step.
class MetricsWriter {
public:
    MetricsWriter(const fs::path& path, std::size_t k_users, std::size_t thin)
        : out_(path), thin_(std::max<std::size_t>(thin, 1)) {
        if (!out_) throw Error("cannot write " + path.string());
        out_ << metrics_header(k_users) << '\n';
    }

    void add(const MetricsRecord& r) {
        if (step_++ % thin_ == 0) out_ << metrics_row(r) << '\n';
    }

private:
    std::ofstream out_;
    std::size_t thin_;
    std::size_t step_ = 0;
};

}  // namespace

double SimConfig::max_sinr_target() const {
    return *std::max_element(sinr_target.begin(), sinr_target.end());
}

double SimConfig::max_sinr_target_db() const {
    return *std::max_element(sinr_target_db.begin(), sinr_target_db.end());
}

double SimConfig::p_min() const {
    return min_power_bound(k_users, m_antennas, noise_var, max_sinr_target());
}

RewardParams SimConfig::reward_params() const {
    return {sinr_target, noise_var, denom_floor, p_per_max};
}

SimConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!kRequiredKeys.contains(key) && !kOptionalKeys.contains(key))
            throw ConfigError("unknown config field '" + key + "'");

    SimConfig c;
    c.m_antennas = count_field(j, "m_antennas", 0, true);
    c.k_users = count_field(j, "k_users", 0, true);
    c.level_count = count_field(j, "level_count", 0, true);
    c.p_per_max_db = field<double>(j, "p_per_max_db");
    c.p_total_db = field<double>(j, "p_total_db");
    c.noise_var = field<double>(j, "noise_var");
    c.channel_cardinality = count_field(j, "channel_cardinality", 0, true);

    if (c.k_users < 1) throw ConfigError("config field 'k_users' must be >= 1");
    if (c.m_antennas < c.k_users)
        throw ConfigError("config field 'm_antennas' must be >= k_users (M=" +
                          std::to_string(c.m_antennas) + ", K=" + std::to_string(c.k_users) + ")");
    if (c.level_count < 2) throw ConfigError("config field 'level_count' must be >= 2");
    if (c.channel_cardinality < 1)
        throw ConfigError("config field 'channel_cardinality' must be >= 1");
    if (!(c.noise_var > 0.0)) throw ConfigError("config field 'noise_var' must be positive");

    const auto& st = j.at("sinr_target_db");
    if (st.is_number()) {
        c.sinr_target_db.assign(c.k_users, st.get<double>());
    } else if (st.is_array()) {
        c.sinr_target_db = field<std::vector<double>>(j, "sinr_target_db");
        if (c.sinr_target_db.size() != c.k_users)
            throw ConfigError("config field 'sinr_target_db' needs one entry per user");
    } else {
        throw ConfigError("config field 'sinr_target_db' must be a number or an array");
    }

    c.self_bias = field_or<double>(j, "self_bias", c.self_bias);
    if (!(c.self_bias >= 0.0 && c.self_bias <= 1.0))
        throw ConfigError("config field 'self_bias' must lie in [0, 1]");
    const auto prec = field_or<std::string>(j, "precoder", "zf");
    if (prec == "zf") c.precoder = PrecoderKind::ZF;
    else if (prec == "mrt") c.precoder = PrecoderKind::MRT;
    else throw ConfigError("config field 'precoder' must be \"zf\" or \"mrt\"");

    c.episodes = count_field(j, "episodes", c.episodes);
    c.iters_per_episode = count_field(j, "iters_per_episode", c.iters_per_episode);
    auto& s = c.schedules;
    s.gamma = field_or<double>(j, "gamma", s.gamma);
    s.epsilon0 = field_or<double>(j, "epsilon0", s.epsilon0);
    s.epsilon_decay = field_or<double>(j, "epsilon_decay", s.epsilon_decay);
    s.epsilon_floor = field_or<double>(j, "epsilon_floor", s.epsilon_floor);
    const auto mode = field_or<std::string>(j, "epsilon_decay_mode", "complement");
    if (mode == "complement") s.decay_mode = EpsilonDecayMode::Complement;
    else if (mode == "scale") s.decay_mode = EpsilonDecayMode::Scale;
    else throw ConfigError("config field 'epsilon_decay_mode' must be \"complement\" or \"scale\"");
    const auto beta = field_or<std::string>(j, "beta_mode", "visit_power");
    if (beta == "visit_inverse") s.beta = {BetaSchedule::Kind::VisitInverse, 0.0};
    else if (beta == "visit_power") s.beta = {BetaSchedule::Kind::VisitPower, 0.8};
    else if (beta == "constant") s.beta = {BetaSchedule::Kind::Constant, 0.1};
    else throw ConfigError("config field 'beta_mode' must be visit_inverse, visit_power or constant");
    s.beta.param = field_or<double>(j, "beta_param", s.beta.param);
    try {
        s.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("config schedules: ") + e.what());
    }

    c.denom_floor = field_or<double>(j, "denom_floor", c.denom_floor);
    if (!(c.denom_floor > 0.0)) throw ConfigError("config field 'denom_floor' must be positive");
    c.seed = field_or<std::uint64_t>(j, "seed", c.seed);
    c.output_dir = field_or<std::string>(j, "output_dir", c.output_dir);
    c.thin = count_field(j, "thin", c.thin);
    if (c.thin < 1) throw ConfigError("config field 'thin' must be >= 1");
    c.max_actions = count_field(j, "max_actions", c.max_actions);
    c.oracle_cell_cap = count_field(j, "oracle_cell_cap", c.oracle_cell_cap);

    c.p_per_max = db_to_linear(c.p_per_max_db);
    c.p_total = db_to_linear(c.p_total_db);
    c.sinr_target.clear();
    for (double db : c.sinr_target_db) c.sinr_target.push_back(db_to_linear(db));

    if (c.p_min() > c.trace_cap())
        throw ConfigError("infeasible bounds: p_min = " + fmt_double(c.p_min()) +
                          " exceeds M*P_T = " + fmt_double(c.trace_cap()));
    return c;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

nlohmann::json config_to_json(const SimConfig& c) {
    const auto& s = c.schedules;
    return {
        {"m_antennas", c.m_antennas},
        {"k_users", c.k_users},
        {"level_count", c.level_count},
        {"p_per_max_db", c.p_per_max_db},
        {"p_total_db", c.p_total_db},
        {"sinr_target_db", c.sinr_target_db},
        {"noise_var", c.noise_var},
        {"channel_cardinality", c.channel_cardinality},
        {"self_bias", c.self_bias},
        {"precoder", c.precoder == PrecoderKind::ZF ? "zf" : "mrt"},
        {"episodes", c.episodes},
        {"iters_per_episode", c.iters_per_episode},
        {"gamma", s.gamma},
        {"epsilon0", s.epsilon0},
        {"epsilon_decay", s.epsilon_decay},
        {"epsilon_decay_mode", s.decay_mode == EpsilonDecayMode::Complement ? "complement" : "scale"},
        {"epsilon_floor", s.epsilon_floor},
        {"beta_mode", beta_mode_name(s.beta.kind)},
        {"beta_param", s.beta.param},
        {"denom_floor", c.denom_floor},
        {"seed", c.seed},
        {"output_dir", c.output_dir},
        {"thin", c.thin},
        {"max_actions", c.max_actions},
        {"oracle_cell_cap", c.oracle_cell_cap},
    };
}

std::string config_hash(const SimConfig& c) {
    const nlohmann::json key = {
        {"m", c.m_antennas},          {"k", c.k_users},
        {"levels", c.level_count},    {"p_per_db", c.p_per_max_db},
        {"p_tot_db", c.p_total_db},   {"sinr_db", c.sinr_target_db},
        {"noise", c.noise_var},       {"card", c.channel_cardinality},
        {"bias", c.self_bias},        {"precoder", c.precoder == PrecoderKind::ZF ? "zf" : "mrt"},
        {"seed", c.seed},             {"floor", c.denom_floor},
        {"gamma", c.schedules.gamma},
    };
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : key.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

MarkovChannel Experiment::make_channel(std::uint64_t stream) const {
    return MarkovChannel(states, transitions, derive_seed(config.seed, stream));
}

Experiment build_experiment(const SimConfig& config) {
    const auto states = generate_state_set(config.m_antennas, config.k_users,
                                           config.channel_cardinality,
                                           derive_seed(config.seed, kStatesStream));
    const auto transitions = generate_transition_matrix(
        config.channel_cardinality, config.self_bias, derive_seed(config.seed, kTransitionsStream));
    const auto levels = make_level_set(config.p_per_max, config.level_count);
    const auto count = count_reduced(levels, config.m_antennas, config.k_users, config.p_min(),
                                     config.trace_cap());
    if (count > config.max_actions)
        throw InfeasibleError("reduced action space has " + std::to_string(count) +
                              " actions, above max_actions = " +
                              std::to_string(config.max_actions));
    auto actions = enumerate_reduced(levels, config.m_antennas, config.k_users, config.p_min(),
                                     config.trace_cap(), nullptr, config.max_actions);
    return Experiment{config, states, transitions, levels, std::move(actions),
                      config.reward_params()};
}

nlohmann::json TrainSummary::to_json(bool include_wall_time) const {
    nlohmann::json j = {
        {"action_space_size", action_space_size},
        {"final_avg_reward", final_avg_reward},
        {"qos_satisfaction_rate", qos_satisfaction_rate},
        {"power_satisfaction_rate", power_satisfaction_rate},
        {"steps", steps},
        {"seed", seed},
        {"config_hash", config_hash},
        {"all_users_qos_rate", all_users_qos_rate},
        {"per_antenna_satisfaction_rate", per_antenna_satisfaction_rate},
        {"plateau_ratio", plateau_ratio},
        {"singular_steps", singular_steps},
    };
    if (include_wall_time) j["wall_time_s"] = wall_time_s;
    return j;
}

double max_window_mean(const std::vector<double>& x, std::size_t w) {
    if (w == 0 || w > x.size()) throw Error("max_window_mean: window outside 1..n");
    std::vector<double> prefix(x.size() + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + x[i];
    double best = -INFINITY;
    for (std::size_t end = w; end <= x.size(); ++end)
        best = std::max(best, (prefix[end] - prefix[end - w]) / static_cast<double>(w));
    return best;
}

TrainSummary summarize(const StepSeries& series, const SimConfig& config,
                       std::size_t action_space_size, double tail_fraction) {
    TrainSummary s;
    s.action_space_size = action_space_size;
    s.steps = series.reward.size();
    s.seed = config.seed;
    s.config_hash = config_hash(config);
    s.singular_steps = static_cast<std::size_t>(
        std::count(series.singular.begin(), series.singular.end(), true));
    if (s.steps == 0) return s;

    const auto tail = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(s.steps))));
    const std::size_t begin = s.steps - tail;
    const double target_db = config.max_sinr_target_db();
    std::size_t qos = 0, all_qos = 0, power_ok = 0, antenna_ok = 0;
    double reward_sum = 0.0;
    for (std::size_t i = begin; i < s.steps; ++i) {
        reward_sum += series.reward[i];
        qos += series.mean_sinr_db[i] >= target_db ? 1 : 0;
        all_qos += series.min_sinr_db[i] >= target_db ? 1 : 0;
        power_ok += series.total_power[i] <= config.p_total * (1.0 + 1e-12) ? 1 : 0;
        antenna_ok += series.per_antenna_violation[i] ? 0 : 1;
    }
    const double n = static_cast<double>(tail);
    s.final_avg_reward = reward_sum / n;
    s.qos_satisfaction_rate = static_cast<double>(qos) / n;
    s.all_users_qos_rate = static_cast<double>(all_qos) / n;
    s.power_satisfaction_rate = static_cast<double>(power_ok) / n;
    s.per_antenna_satisfaction_rate = static_cast<double>(antenna_ok) / n;
    const double best = max_window_mean(series.reward, tail);
    s.plateau_ratio = best > 0.0 ? s.final_avg_reward / best : 0.0;
    return s;
}

std::string metrics_header(std::size_t k_users) {
    std::string h = "episode,iteration,state,action,reward,ee";
    for (std::size_t k = 1; k <= k_users; ++k) h += ",sinr_db_user" + std::to_string(k);
    h += ",total_power,per_antenna_violation,epsilon";
    return h;
}

std::string metrics_row(const MetricsRecord& r) {
    std::string row = std::to_string(r.episode) + ',' + std::to_string(r.iteration) + ',' +
                      std::to_string(r.state) + ',' + std::to_string(r.action) + ',' +
                      fmt_double(r.reward) + ',' + fmt_double(r.energy_efficiency);
    for (double x : r.sinr_db) row += ',' + fmt_double(x);
    row += ',' + fmt_double(r.total_power) + ',' + (r.per_antenna_violation ? "1" : "0") + ',' +
           fmt_double(r.epsilon);
    return row;
}

TrainReport run_train(const SimConfig& config, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const Experiment ex = build_experiment(config);
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    save_channel((dir / "channel.json").string(),
                 ChannelDocument{config.seed, config.self_bias, ex.states, ex.transitions});

    MarkovChannel env = ex.make_channel(kChannelStepStream);
    MetricsWriter writer(dir / "metrics.csv", config.k_users, config.thin);
    SeriesRecorder recorder;
    const TrainPlan plan{config.episodes, config.iters_per_episode,
                         derive_seed(config.seed, kTrainerStream)};
    QTable q = train(env, ex.actions, config.precoder, config.schedules, ex.reward, plan,
                     [&](const MetricsRecord& r) {
                         writer.add(r);
                         recorder.add(r);
                     });
    const std::string hash = config_hash(config);
    save_qtable((dir / "qtable.json").string(), q, hash);

    TrainSummary summary = summarize(recorder.series, config, ex.actions.size());
    summary.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_json(dir / "summary.json", summary.to_json());
    return {std::move(summary), std::move(recorder.series), std::move(q)};
}

std::vector<TrainSummary> run_train_many(const SimConfig& config, const std::string& out_dir,
                                         std::size_t runs) {
    if (runs == 0) throw ConfigError("--runs must be >= 1");
    std::vector<TrainSummary> out(runs);
    std::vector<std::string> errors(runs);
    const auto n = static_cast<std::int64_t>(runs);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) {
        SimConfig c = config;
        c.seed = config.seed + static_cast<std::uint64_t>(i);
        const auto dir = (fs::path(out_dir) / ("run_" + std::to_string(i))).string();
        try {
            out[static_cast<std::size_t>(i)] = run_train(c, dir).summary;
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (std::size_t i = 0; i < runs; ++i)
        if (!errors[i].empty()) throw Error("run " + std::to_string(i) + ": " + errors[i]);

    nlohmann::json per_run = nlohmann::json::array();
    double reward = 0.0, qos = 0.0, power = 0.0;
    for (const auto& s : out) {
        per_run.push_back(s.to_json());
        reward += s.final_avg_reward;
        qos += s.qos_satisfaction_rate;
        power += s.power_satisfaction_rate;
    }
    const double r = static_cast<double>(runs);
    write_json(fs::path(out_dir) / "runs_summary.json",
               {{"runs", runs},
                {"mean_final_avg_reward", reward / r},
                {"mean_qos_satisfaction_rate", qos / r},
                {"mean_power_satisfaction_rate", power / r},
                {"per_run", per_run}});
    return out;
}

OracleReport run_oracle(const SimConfig& config, const std::string& out_dir,
                        const std::optional<std::string>& qtable_path) {
    const Experiment ex = build_experiment(config);
    const std::size_t cells = ex.states.size() * ex.actions.size();
    if (cells > config.oracle_cell_cap)
        throw InfeasibleError("oracle needs " + std::to_string(cells) +
                              " reward cells, above oracle_cell_cap = " +
                              std::to_string(config.oracle_cell_cap) +
                              "; use a desk-scale configuration");
    const RewardTable rewards =
        kernels::reward_table_parallel(ex.states, ex.actions, config.precoder, ex.reward);
    const double r_max = *std::max_element(rewards.values.begin(), rewards.values.end());
    const double scale = std::max(r_max, 1e-300) / (1.0 - config.schedules.gamma);
    OracleReport report{value_iteration(ex.transitions, rewards, config.schedules.gamma,
                                        1e-12 * scale),
                        std::nullopt};

    const auto& sol = report.solution;
    nlohmann::json j = {
        {"config_hash", config_hash(config)},
        {"num_states", sol.q.num_states()},
        {"num_actions", sol.q.num_actions()},
        {"sweeps", sol.deltas.size()},
        {"v", sol.v},
        {"policy", sol.policy},
        {"q", sol.q.values()},
    };
    if (qtable_path) {
        const QTable learned = load_qtable(*qtable_path, config_hash(config));
        report.comparison = compare_q(learned, sol.q);
        const auto& c = *report.comparison;
        j["comparison"] = {
            {"qtable", *qtable_path},
            {"sup_gap", c.sup_gap},
            {"relative_gap", c.reference_sup > 0.0 ? c.sup_gap / c.reference_sup : 0.0},
            {"policy_agreement", c.policy_agreement},
        };
    }
    fs::create_directories(out_dir);
    write_json(fs::path(out_dir) / "oracle.json", j);
    return report;
}

TrainSummary run_evaluate(const SimConfig& config, const std::string& qtable_path,
                          std::size_t steps, const std::string& out_dir) {
    const Experiment ex = build_experiment(config);
    const QTable q = load_qtable(qtable_path, config_hash(config));
    fs::create_directories(out_dir);
    MetricsWriter writer(fs::path(out_dir) / "eval_metrics.csv", config.k_users, config.thin);
    SeriesRecorder recorder;
    evaluate_policy(q, ex.make_channel(kEvalStream), ex.actions, config.precoder, ex.reward, steps,
                    [&](const MetricsRecord& r) {
                        writer.add(r);
                        recorder.add(r);
                    });
    TrainSummary s = summarize(recorder.series, config, ex.actions.size(), 1.0);
    write_json(fs::path(out_dir) / "eval_summary.json", s.to_json(false));
    return s;
}

std::vector<CurveRow> moving_curves(const std::string& metrics_path, std::size_t window) {
    if (window == 0) throw Error("curves: window must be >= 1");
    std::ifstream in(metrics_path);
    if (!in) throw Error("cannot read " + metrics_path);
    std::string line;
    if (!std::getline(in, line)) throw Error("curves: " + metrics_path + " is empty");

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) header.push_back(col);
    }
    std::size_t reward_col = header.size(), power_col = header.size();
    std::vector<std::size_t> sinr_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "reward") reward_col = i;
        else if (header[i] == "total_power") power_col = i;
        else if (header[i].rfind("sinr_db_user", 0) == 0) sinr_cols.push_back(i);
    }
    if (reward_col == header.size() || power_col == header.size() || sinr_cols.empty())
        throw Error("curves: " + metrics_path + " lacks reward/total_power/sinr columns");

    std::vector<double> reward, sinr, power;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size()) throw Error("curves: malformed row in " + metrics_path);
        reward.push_back(std::stod(cells[reward_col]));
        power.push_back(std::stod(cells[power_col]));
        double s = 0.0;
        for (auto c : sinr_cols) s += std::stod(cells[c]);
        sinr.push_back(s / static_cast<double>(sinr_cols.size()));
    }
    if (reward.empty()) throw Error("curves: " + metrics_path + " has no data rows");

    std::vector<CurveRow> rows(reward.size());
    for (std::size_t i = 0; i < reward.size(); ++i) {
        const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
        double rs = 0.0, ss = 0.0, ps = 0.0;
        for (std::size_t t = first; t <= i; ++t) {
            rs += reward[t];
            ss += sinr[t];
            ps += power[t];
        }
        const double n = static_cast<double>(i + 1 - first);
        rows[i] = {rs / n, ss / n, linear_to_db(ps / n)};
    }
    return rows;
}

void aggregate_curves(const std::string& metrics_path, std::size_t window,
                      const SimConfig& config, const std::string& curves_path) {
    const auto rows = moving_curves(metrics_path, window);
    std::ofstream out(curves_path);
    if (!out) throw Error("cannot write " + curves_path);
    out << "row,reward_avg,sinr_db_avg,total_power_db_avg,sinr_target_db,p_total_db\n";
    const std::string target = fmt_double(config.max_sinr_target_db());
    const std::string cap = fmt_double(config.p_total_db);
    for (std::size_t i = 0; i < rows.size(); ++i)
        out << i << ',' << fmt_double(rows[i].reward) << ',' << fmt_double(rows[i].sinr_db) << ','
            << fmt_double(rows[i].total_power_db) << ',' << target << ',' << cap << '\n';
}

}  // namespace qpower
