#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qpower/actions.hpp"
#include "qpower/channel.hpp"
#include "qpower/phy.hpp"
#include "qpower/rng.hpp"

namespace qpower {

/// Q-value estimates and per-entry visit counts, |H| x |A| row-major.
class QTable {
public:
    QTable(std::size_t num_states, std::size_t num_actions);

    std::size_t num_states() const { return states_; }
    std::size_t num_actions() const { return actions_; }

    double value(StateIndex s, ActionIndex a) const { return values_[s * actions_ + a]; }
    std::uint64_t visits(StateIndex s, ActionIndex a) const { return visits_[s * actions_ + a]; }
    std::span<const double> row(StateIndex s) const {
        return {values_.data() + s * actions_, actions_};
    }

    /// Smallest index among the maximisers of row s.
    ActionIndex greedy(StateIndex s) const;
    double row_max(StateIndex s) const;

    std::span<const double> values() const { return values_; }
    std::span<const std::uint64_t> visit_counts() const { return visits_; }

    /// Overwrites entry (s, a) and bumps its visit count.
    void record(StateIndex s, ActionIndex a, double value);

    static QTable from_raw(std::size_t num_states, std::size_t num_actions,
                           std::vector<double> values, std::vector<std::uint64_t> visits);

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::size_t states_;
    std::size_t actions_;
    std::vector<double> values_;
    std::vector<std::uint64_t> visits_;
};

/// Step size beta as a function of how often (s, a) was updated before.
struct BetaSchedule {
    enum class Kind {
        VisitInverse,  // 1 / (1 + (1 - gamma) n)
        VisitPower,    // 1 / (1 + n)^omega
        Constant,      // c
    };
    Kind kind = Kind::VisitPower;
    double param = 0.8;

    double rate(std::uint64_t prior_visits, double gamma) const;
};

enum class EpsilonDecayMode {
    Complement,  // eps <- eps * (1 - decay)
    Scale,       // eps <- eps * decay
};

struct Schedules {
    double gamma = 0.9;
    double epsilon0 = 1.0;
    double epsilon_decay = 0.1;
    EpsilonDecayMode decay_mode = EpsilonDecayMode::Complement;
    double epsilon_floor = 0.01;
    BetaSchedule beta;

    /// Exploration rate in force during episode `episode` (0-based).
    double epsilon_at(std::size_t episode) const;
    double next_epsilon(double eps) const;
    void validate() const;
};

struct RewardParams {
    std::vector<double> sinr_targets;  // linear, one per user
    double noise_var = 1.0;
    double denom_floor = 1e-6;
    double p_per_max = 0.0;  // linear; only used for the per-antenna audit flag
};

/// Everything computed for one (state, action) pair.
struct StepEvaluation {
    double reward = 0.0;
    LinkMetrics link;
    bool singular = false;
    bool per_antenna_violation = false;
};

StepEvaluation evaluate_step(const CMatrix& h, const PowerVector& action, PrecoderKind kind,
                             const RewardParams& params);

/// 1 / (max(sum_k |xi_k - target_k|, floor) * T_tot); 0 when the precoder
/// cannot be formed.
double reward(const CMatrix& h, const PowerVector& action, PrecoderKind kind,
              const RewardParams& params);

/// Upper bound on any reward: the denominator floor times the smallest
/// achievable T_tot (the lowest positive level).
double reward_upper_bound(const PowerLevelSet& levels, const RewardParams& params);

ActionIndex select_action(const QTable& q, StateIndex state, double epsilon, Rng& rng);

/// One Q-learning update of entry (s, a); returns the new value.
double q_update(QTable& q, StateIndex s, ActionIndex a, double r, StateIndex s_next,
                const Schedules& schedules);

struct MetricsRecord {
    std::size_t episode = 0;
    std::size_t iteration = 0;
    StateIndex state = 0;
    ActionIndex action = 0;
    double reward = 0.0;
    double energy_efficiency = 0.0;
    double sum_rate = 0.0;
    std::vector<double> sinr_db;
    double total_power = 0.0;
    bool per_antenna_violation = false;
    bool singular = false;
    double epsilon = 0.0;
};

using MetricsSink = std::function<void(const MetricsRecord&)>;

struct TrainPlan {
    std::size_t episodes = 0;
    std::size_t iters_per_episode = 0;
    std::uint64_t seed = 0;
};

/// Tabular Q-learning with epsilon-greedy exploration. Each episode starts
/// from a uniformly drawn channel state. The learner sees state indices and
/// rewards only; the transition matrix stays inside `env`.
QTable train(MarkovChannel& env, const ActionSpace& actions, PrecoderKind kind,
             const Schedules& schedules, const RewardParams& params, const TrainPlan& plan,
             const MetricsSink& sink = {});

/// Greedy (epsilon = 0) rollout of a learned table.
void evaluate_policy(const QTable& q, MarkovChannel env, const ActionSpace& actions,
                     PrecoderKind kind, const RewardParams& params, std::size_t steps,
                     const MetricsSink& sink);

/// Deterministic reward r(s, a) for every pair, |H| x |A| row-major.
struct RewardTable {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<double> values;

    double operator()(StateIndex s, ActionIndex a) const { return values[s * num_actions + a]; }
};

struct ValueIterationResult {
    std::vector<double> v;            // |H|
    QTable q;                         // visits unused
    std::vector<ActionIndex> policy;  // |H|
    std::vector<double> deltas;       // sup-norm change per sweep
};

/// Q(s,a) <- r(s,a) + gamma sum_s' Pr(s,s') max_a' Q(s',a') until the
/// sup-norm change drops below `tol`.
ValueIterationResult value_iteration(const TransitionMatrix& transitions,
                                     const RewardTable& rewards, double gamma, double tol,
                                     std::size_t max_sweeps = 100'000);

struct QComparison {
    double sup_gap = 0.0;          // max |Q - Q*|
    double reference_sup = 0.0;    // max |Q*|
    double policy_agreement = 0.0; // fraction of states with equal greedy action
    std::vector<bool> agrees;
};

QComparison compare_q(const QTable& learned, const QTable& reference);

/// Q-table file with the hash of the configuration that produced it.
void save_qtable(const std::string& path, const QTable& q, const std::string& config_hash);
/// Refuses a file whose hash differs from `expected_hash`.
QTable load_qtable(const std::string& path, const std::string& expected_hash);

}  // namespace qpower
