#include "qpower/rl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "qpower/error.hpp"
#include "qpower/kernels.hpp"

namespace qpower {

QTable::QTable(std::size_t num_states, std::size_t num_actions)
    : states_(num_states),
      actions_(num_actions),
      values_(num_states * num_actions, 0.0),
      visits_(num_states * num_actions, 0) {
    if (num_states == 0 || num_actions == 0) throw DimensionError("QTable: empty dimension");
}

ActionIndex QTable::greedy(StateIndex s) const {
    const auto r = row(s);
    return static_cast<ActionIndex>(std::max_element(r.begin(), r.end()) - r.begin());
}

double QTable::row_max(StateIndex s) const {
    const auto r = row(s);
    return *std::max_element(r.begin(), r.end());
}

void QTable::record(StateIndex s, ActionIndex a, double value) {
    values_[s * actions_ + a] = value;
    ++visits_[s * actions_ + a];
}

QTable QTable::from_raw(std::size_t num_states, std::size_t num_actions,
                        std::vector<double> values, std::vector<std::uint64_t> visits) {
    QTable q(num_states, num_actions);
    if (values.size() != q.values_.size() || visits.size() != q.visits_.size())
        throw DimensionError("QTable: raw data does not match " + std::to_string(num_states) +
                             "x" + std::to_string(num_actions));
    q.values_ = std::move(values);
    q.visits_ = std::move(visits);
    return q;
}

double BetaSchedule::rate(std::uint64_t prior_visits, double gamma) const {
    const double n = static_cast<double>(prior_visits);
    switch (kind) {
        case Kind::VisitInverse:
            return 1.0 / (1.0 + (1.0 - gamma) * n);
        case Kind::VisitPower:
            return 1.0 / std::pow(1.0 + n, param);
        case Kind::Constant:
            return param;
    }
    return param;
}

double Schedules::next_epsilon(double eps) const {
    const double factor =
        decay_mode == EpsilonDecayMode::Complement ? 1.0 - epsilon_decay : epsilon_decay;
    return std::clamp(eps * factor, std::min(epsilon_floor, epsilon0), epsilon0);
}

double Schedules::epsilon_at(std::size_t episode) const {
    double eps = epsilon0;
    for (std::size_t e = 0; e < episode; ++e) eps = next_epsilon(eps);
    return eps;
}

void Schedules::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) throw ConfigError("epsilon0 must lie in [0, 1]");
    if (!(epsilon_floor >= 0.0 && epsilon_floor <= epsilon0))
        throw ConfigError("epsilon_floor must lie in [0, epsilon0]");
    if (!(epsilon_decay >= 0.0 && epsilon_decay <= 1.0))
        throw ConfigError("epsilon_decay must lie in [0, 1]");
    if (beta.kind == BetaSchedule::Kind::Constant && !(beta.param > 0.0 && beta.param <= 1.0))
        throw ConfigError("constant beta must lie in (0, 1]");
    if (beta.kind == BetaSchedule::Kind::VisitPower && !(beta.param > 0.0 && beta.param <= 1.0))
        throw ConfigError("beta omega must lie in (0, 1]");
}

StepEvaluation evaluate_step(const CMatrix& h, const PowerVector& action, PrecoderKind kind,
                             const RewardParams& params) {
    StepEvaluation out;
    const std::size_t k_users = h.cols();
    if (params.sinr_targets.size() != k_users)
        throw DimensionError("RewardParams: " + std::to_string(params.sinr_targets.size()) +
                             " SINR targets for " + std::to_string(k_users) + " users");
    Precoder v;
    try {
        v = make_precoder(kind, h, action);
    } catch (const SingularMatrixError&) {
        out.singular = true;
    } catch (const DegenerateUserError&) {
        out.singular = true;
    }
    if (out.singular) {
        out.link.sinr.assign(k_users, 0.0);
        out.link.per_antenna_power.assign(action.size(), 0.0);
        return out;
    }
    out.link = link_metrics(h, action, v, params.noise_var);
    double deviation = 0.0;
    for (std::size_t k = 0; k < k_users; ++k)
        deviation += std::abs(out.link.sinr[k] - params.sinr_targets[k]);
    out.reward = 1.0 / (std::max(deviation, params.denom_floor) * out.link.total_power);
    if (params.p_per_max > 0.0)
        out.per_antenna_violation = !check_per_antenna(action, v, k_users, params.p_per_max).ok;
    return out;
}

double reward(const CMatrix& h, const PowerVector& action, PrecoderKind kind,
              const RewardParams& params) {
    return evaluate_step(h, action, kind, params).reward;
}

double reward_upper_bound(const PowerLevelSet& levels, const RewardParams& params) {
    return 1.0 / (params.denom_floor * levels.min_positive());
}

ActionIndex select_action(const QTable& q, StateIndex state, double epsilon, Rng& rng) {
    if (state >= q.num_states()) throw std::out_of_range("select_action: state index");
    if (rng.uniform() < epsilon) return static_cast<ActionIndex>(rng.below(q.num_actions()));
    return q.greedy(state);
}

double q_update(QTable& q, StateIndex s, ActionIndex a, double r, StateIndex s_next,
                const Schedules& schedules) {
    const double beta = schedules.beta.rate(q.visits(s, a), schedules.gamma);
    const double target = r + schedules.gamma * q.row_max(s_next);
    const double updated = (1.0 - beta) * q.value(s, a) + beta * target;
    q.record(s, a, updated);
    return updated;
}

namespace {

MetricsRecord make_record(std::size_t episode, std::size_t iteration, StateIndex s,
                          ActionIndex a, const StepEvaluation& ev, double epsilon) {
    MetricsRecord rec;
    rec.episode = episode;
    rec.iteration = iteration;
    rec.state = s;
    rec.action = a;
    rec.reward = ev.reward;
    rec.energy_efficiency = ev.link.energy_efficiency;
    rec.sum_rate = ev.link.sum_rate;
    rec.sinr_db.reserve(ev.link.sinr.size());
    for (double x : ev.link.sinr) rec.sinr_db.push_back(linear_to_db(x));
    rec.total_power = ev.link.total_power;
    rec.per_antenna_violation = ev.per_antenna_violation;
    rec.singular = ev.singular;
    rec.epsilon = epsilon;
    return rec;
}

}  // namespace

QTable train(MarkovChannel& env, const ActionSpace& actions, PrecoderKind kind,
             const Schedules& schedules, const RewardParams& params, const TrainPlan& plan,
             const MetricsSink& sink) {
    if (actions.size() == 0) throw InfeasibleError("train: empty action space");
    schedules.validate();

    QTable q(env.num_states(), actions.size());
    Rng rng(plan.seed);
    const double q_bound =
        reward_upper_bound(actions.levels(), params) / (1.0 - schedules.gamma);

    // Action vectors are reused every step; build them once.
    std::vector<PowerVector> powers;
    powers.reserve(actions.size());
    for (ActionIndex a = 0; a < actions.size(); ++a) powers.push_back(actions.action(a));

    double eps = schedules.epsilon0;
    for (std::size_t ep = 0; ep < plan.episodes; ++ep) {
        if (ep > 0) eps = schedules.next_epsilon(eps);
        StateIndex s = env.reset_random();
        for (std::size_t it = 0; it < plan.iters_per_episode; ++it) {
            const ActionIndex a = select_action(q, s, eps, rng);
            const StepEvaluation ev = evaluate_step(env.state_matrix(s), powers[a], kind, params);
            const StateIndex s_next = env.step();
            const double updated = q_update(q, s, a, ev.reward, s_next, schedules);
            if (!(updated <= q_bound * (1.0 + 1e-12)) || !std::isfinite(updated))
                throw std::logic_error("train: Q-value " + std::to_string(updated) +
                                       " exceeds the bound " + std::to_string(q_bound));
            if (sink) sink(make_record(ep, it, s, a, ev, eps));
            s = s_next;
        }
    }
    return q;
}

void evaluate_policy(const QTable& q, MarkovChannel env, const ActionSpace& actions,
                     PrecoderKind kind, const RewardParams& params, std::size_t steps,
                     const MetricsSink& sink) {
    if (q.num_states() != env.num_states() || q.num_actions() != actions.size())
        throw DimensionError("evaluate_policy: Q-table does not match environment");
    StateIndex s = env.reset_random();
    for (std::size_t it = 0; it < steps; ++it) {
        const ActionIndex a = q.greedy(s);
        const StepEvaluation ev =
            evaluate_step(env.state_matrix(s), actions.action(a), kind, params);
        if (sink) sink(make_record(0, it, s, a, ev, 0.0));
        s = env.step();
    }
}

ValueIterationResult value_iteration(const TransitionMatrix& transitions,
                                     const RewardTable& rewards, double gamma, double tol,
                                     std::size_t max_sweeps) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("value_iteration: gamma must be < 1");
    if (transitions.size() != rewards.num_states)
        throw DimensionError("value_iteration: reward table has " +
                             std::to_string(rewards.num_states) + " states, transitions " +
                             std::to_string(transitions.size()));
    if (rewards.values.size() != rewards.num_states * rewards.num_actions)
        throw DimensionError("value_iteration: malformed reward table");

    std::vector<double> cur(rewards.values.size(), 0.0);
    std::vector<double> next(cur.size());
    std::vector<double> deltas;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        const double delta = kernels::bellman_sweep_parallel(transitions, rewards, gamma, cur, next);
        cur.swap(next);
        deltas.push_back(delta);
        if (delta < tol) break;
    }

    QTable q = QTable::from_raw(rewards.num_states, rewards.num_actions, std::move(cur),
                                std::vector<std::uint64_t>(rewards.values.size(), 0));
    std::vector<double> v(rewards.num_states);
    std::vector<ActionIndex> policy(rewards.num_states);
    for (StateIndex s = 0; s < rewards.num_states; ++s) {
        policy[s] = q.greedy(s);
        v[s] = q.value(s, policy[s]);
    }
    return {std::move(v), std::move(q), std::move(policy), std::move(deltas)};
}

QComparison compare_q(const QTable& learned, const QTable& reference) {
    if (learned.num_states() != reference.num_states() ||
        learned.num_actions() != reference.num_actions())
        throw DimensionError("compare_q: table shapes differ");
    QComparison c;
    const auto a = learned.values();
    const auto b = reference.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        c.sup_gap = std::max(c.sup_gap, std::abs(a[i] - b[i]));
        c.reference_sup = std::max(c.reference_sup, std::abs(b[i]));
    }
    std::size_t same = 0;
    for (StateIndex s = 0; s < learned.num_states(); ++s) {
        const bool eq = learned.greedy(s) == reference.greedy(s);
        c.agrees.push_back(eq);
        same += eq ? 1 : 0;
    }
    c.policy_agreement = static_cast<double>(same) / static_cast<double>(learned.num_states());
    return c;
}

void save_qtable(const std::string& path, const QTable& q, const std::string& config_hash) {
    const nlohmann::json j = {
        {"config_hash", config_hash},
        {"num_states", q.num_states()},
        {"num_actions", q.num_actions()},
        {"values", q.values()},
        {"visit_counts", q.visit_counts()},
    };
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump() << '\n';
}

QTable load_qtable(const std::string& path, const std::string& expected_hash) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    try {
        const auto j = nlohmann::json::parse(in);
        const auto hash = j.at("config_hash").get<std::string>();
        if (hash != expected_hash)
            throw ConfigError("Q-table " + path + " was trained under config " + hash +
                              ", active config is " + expected_hash);
        return QTable::from_raw(j.at("num_states").get<std::size_t>(),
                                j.at("num_actions").get<std::size_t>(),
                                j.at("values").get<std::vector<double>>(),
                                j.at("visit_counts").get<std::vector<std::uint64_t>>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("Q-table " + path + ": " + e.what());
    }
}

}  // namespace qpower
