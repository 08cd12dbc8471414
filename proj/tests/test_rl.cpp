#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "qpower/error.hpp"
#include "qpower/kernels.hpp"
#include "qpower/rl.hpp"

using namespace qpower;

namespace {

// |H|=4, M=4, K=2, levels {0, 1000}, trace cap 4000: eleven actions.
struct TinyMdp {
    ChannelStateSet states = generate_state_set(4, 2, 4, 101);
    TransitionMatrix transitions = generate_transition_matrix(4, 0.5, 102);
    PowerLevelSet levels = make_level_set(1000.0, 2);
    ActionSpace actions = enumerate_reduced(levels, 4, 2, min_power_bound(2, 4, 1.0, 100.0), 4000.0);
    RewardParams params{{100.0, 100.0}, 1.0, 1e-6, 1000.0};
    RewardTable table = kernels::reward_table_serial(states, actions, PrecoderKind::ZF, params);

    MarkovChannel channel(std::uint64_t seed) const { return {states, transitions, seed}; }
};

Schedules oracle_schedules() {
    Schedules s;
    s.gamma = 0.9;
    s.epsilon0 = 0.2;
    s.epsilon_decay = 0.0;
    s.epsilon_floor = 0.2;
    s.beta = {BetaSchedule::Kind::VisitInverse, 0.0};
    return s;
}

RewardTable identity_table(std::vector<double> values, std::size_t ns, std::size_t na) {
    return {ns, na, std::move(values)};
}

TransitionMatrix identity_transitions(std::size_t n) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) rows[i][i] = 1.0;
    return TransitionMatrix(rows);
}

}  // namespace

TEST_CASE("q_update") {
    Schedules s;
    SUBCASE("beta 0 leaves the entry unchanged") {
        QTable q(1, 2);
        q.record(0, 0, 1.5);
        s.beta = {BetaSchedule::Kind::Constant, 0.0};
        CHECK(q_update(q, 0, 0, 10.0, 0, s) == 1.5);
        CHECK(q.visits(0, 0) == 2);
    }
    SUBCASE("beta 1 and gamma 0 overwrite with the reward") {
        QTable q(2, 2);
        q.record(1, 0, 50.0);
        s.gamma = 0.0;
        s.beta = {BetaSchedule::Kind::Constant, 1.0};
        CHECK(q_update(q, 0, 1, 7.0, 1, s) == 7.0);
    }
    SUBCASE("direct substitution") {
        QTable q(2, 2);
        q.record(0, 0, 1.0);
        q.record(1, 1, 3.0);
        q.record(1, 0, -4.0);
        s.gamma = 0.9;
        s.beta = {BetaSchedule::Kind::Constant, 0.5};
        CHECK(q_update(q, 0, 0, 2.0, 1, s) == doctest::Approx(2.85).epsilon(1e-15));
        CHECK(q.value(1, 1) == 3.0);
        CHECK(q.value(0, 1) == 0.0);
        CHECK(q.visits(0, 0) == 2);
        CHECK(q.visits(0, 1) == 0);
    }
}

TEST_CASE("beta schedules") {
    const BetaSchedule inv{BetaSchedule::Kind::VisitInverse, 0.0};
    CHECK(inv.rate(0, 0.9) == 1.0);
    CHECK(inv.rate(10, 0.9) == doctest::Approx(0.5));
    const BetaSchedule pw{BetaSchedule::Kind::VisitPower, 0.8};
    CHECK(pw.rate(0, 0.9) == 1.0);
    CHECK(pw.rate(31, 0.9) == doctest::Approx(std::pow(32.0, -0.8)));
    const BetaSchedule c{BetaSchedule::Kind::Constant, 0.3};
    CHECK(c.rate(1000, 0.9) == 0.3);
}

TEST_CASE("epsilon stays in [floor, epsilon0]") {
    for (auto mode : {EpsilonDecayMode::Complement, EpsilonDecayMode::Scale}) {
        Schedules s;
        s.decay_mode = mode;
        double prev = s.epsilon0;
        for (std::size_t ep = 0; ep < 200; ++ep) {
            const double e = s.epsilon_at(ep);
            CHECK(e >= s.epsilon_floor);
            CHECK(e <= s.epsilon0);
            CHECK(e <= prev);
            prev = e;
        }
        CHECK(s.epsilon_at(199) == s.epsilon_floor);
    }
    Schedules s;
    CHECK(s.epsilon_at(1) == doctest::Approx(0.9));
    s.decay_mode = EpsilonDecayMode::Scale;
    CHECK(s.epsilon_at(1) == doctest::Approx(0.1));
    s.epsilon_floor = 2.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("select_action") {
    SUBCASE("greedy picks the smallest maximiser") {
        const QTable q = QTable::from_raw(1, 3, {1.0, 3.0, 2.0}, {0, 0, 0});
        Rng rng(1);
        CHECK(select_action(q, 0, 0.0, rng) == 1);
        const QTable tie = QTable::from_raw(1, 4, {0.0, 5.0, 2.0, 5.0}, {0, 0, 0, 0});
        CHECK(select_action(tie, 0, 0.0, rng) == 1);
    }
    SUBCASE("epsilon 1 is uniform") {
        const QTable q(1, 10);
        Rng rng(2);
        std::vector<int> counts(10, 0);
        const int n = 10000;
        for (int i = 0; i < n; ++i) ++counts[select_action(q, 0, 1.0, rng)];
        double chi2 = 0.0;
        for (int c : counts) chi2 += (c - n / 10.0) * (c - n / 10.0) / (n / 10.0);
        CHECK(chi2 < 21.666);  // chi-square, 9 dof, p = 0.01
    }
    SUBCASE("epsilon 0.5 mixes greedy and uniform") {
        std::vector<double> row(10, 0.0);
        row[7] = 1.0;
        const QTable q = QTable::from_raw(1, 10, row, std::vector<std::uint64_t>(10, 0));
        Rng rng(3);
        const int n = 10000;
        int greedy = 0;
        for (int i = 0; i < n; ++i) greedy += select_action(q, 0, 0.5, rng) == 7 ? 1 : 0;
        const double f = static_cast<double>(greedy) / n;
        CHECK(std::abs(f - 0.55) <= 3.0 * std::sqrt(0.55 * 0.45 / n));
    }
}

TEST_CASE("reward") {
    const CMatrix h = CMatrix::identity(2);
    RewardParams params{{1.0, 2.0}, 1.0, 1e-6, 0.0};
    SUBCASE("substitution: deviation 2, total power 5") {
        // V = I, SINR_k = p_k / K, T_tot = (p_1 + p_2) / K
        CHECK(reward(h, PowerVector({4.0, 6.0}), PrecoderKind::ZF, params) ==
              doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("exact QoS hits the floor") {
        params.sinr_targets = {2.0, 3.0};
        CHECK(reward(h, PowerVector({4.0, 6.0}), PrecoderKind::ZF, params) ==
              doctest::Approx(1.0 / (1e-6 * 5.0)).epsilon(1e-9));
    }
    SUBCASE("singular precoder gives zero and a flag") {
        const auto ev = evaluate_step(h, PowerVector({4.0, 0.0}), PrecoderKind::ZF, params);
        CHECK(ev.reward == 0.0);
        CHECK(ev.singular);
        CHECK(ev.link.sinr == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("seed 42 instance against scalar loops") {
        Rng rng(42);
        const CMatrix hh = oracle::random_matrix(4, 2, rng);
        const std::vector<double> p{1.0, 1.0, 0.0, 1.0};
        const RewardParams rp{{3.0, 0.5}, 0.2, 1e-6, 0.0};
        const CMatrix v = oracle::zf_two_users(hh, p);
        double dev = 0.0;
        for (std::size_t k = 0; k < 2; ++k)
            dev += std::abs(oracle::naive_sinr(hh, p, v, 0.2, k) - rp.sinr_targets[k]);
        const double expected = 1.0 / (std::max(dev, 1e-6) * oracle::naive_total_power(p, v));
        CHECK(std::abs(reward(hh, PowerVector(p), PrecoderKind::ZF, rp) - expected) <=
              1e-10 * expected);
    }
}

TEST_CASE("train") {
    SUBCASE("zero episodes gives a zero table") {
        TinyMdp mdp;
        auto env = mdp.channel(1);
        const auto q = train(env, mdp.actions, PrecoderKind::ZF, Schedules{}, mdp.params, {0, 10, 1});
        CHECK(std::all_of(q.values().begin(), q.values().end(), [](double x) { return x == 0.0; }));
        CHECK(std::all_of(q.visit_counts().begin(), q.visit_counts().end(),
                          [](std::uint64_t x) { return x == 0; }));
    }
    SUBCASE("single state, single action converges to r / (1 - gamma)") {
        Schedules s;
        s.beta = {BetaSchedule::Kind::VisitInverse, 0.0};
        QTable q(1, 1);
        for (int i = 0; i < 10000; ++i) q_update(q, 0, 0, 2.0, 0, s);
        CHECK(std::abs(q.value(0, 0) - 20.0) <= 0.01 * 20.0);
    }
    SUBCASE("record stream and reproducibility") {
        TinyMdp mdp;
        std::vector<MetricsRecord> log;
        auto env1 = mdp.channel(5);
        const auto q1 = train(env1, mdp.actions, PrecoderKind::ZF, Schedules{}, mdp.params, {3, 50, 9},
                              [&](const MetricsRecord& r) { log.push_back(r); });
        REQUIRE(log.size() == 150);
        for (std::size_t i = 0; i < log.size(); ++i) {
            CHECK(log[i].episode == i / 50);
            CHECK(log[i].iteration == i % 50);
            CHECK(log[i].reward == mdp.table(log[i].state, log[i].action));
        }
        CHECK(log[0].epsilon == 1.0);
        CHECK(log[50].epsilon == doctest::Approx(0.9));
        std::uint64_t visits = 0;
        for (auto v : q1.visit_counts()) visits += v;
        CHECK(visits == 150);

        auto env2 = mdp.channel(5);
        const auto q2 = train(env2, mdp.actions, PrecoderKind::ZF, Schedules{}, mdp.params, {3, 50, 9});
        CHECK(q1 == q2);
    }
    SUBCASE("tiny MDP agrees with value iteration") {
        TinyMdp mdp;
        REQUIRE(mdp.actions.size() == 11);
        const Schedules s = oracle_schedules();
        auto env = mdp.channel(7);
        const auto q = train(env, mdp.actions, PrecoderKind::ZF, s, mdp.params, {1, 200000, 8});
        double scale = *std::max_element(mdp.table.values.begin(), mdp.table.values.end());
        const auto vi = value_iteration(mdp.transitions, mdp.table, 0.9, 1e-12 * scale);
        const auto cmp = compare_q(q, vi.q);
        CHECK(cmp.policy_agreement == 1.0);
        CHECK(cmp.sup_gap <= 0.05 * cmp.reference_sup);
        const double bound = reward_upper_bound(mdp.levels, mdp.params) / (1.0 - s.gamma);
        for (double x : q.values()) CHECK(x <= bound);
    }
}

TEST_CASE("value_iteration") {
    SUBCASE("one state, one action") {
        const auto r = value_iteration(identity_transitions(1), identity_table({3.0}, 1, 1), 0.9, 1e-13);
        CHECK(r.v[0] == doctest::Approx(30.0).epsilon(1e-12));
    }
    SUBCASE("myopic") {
        const auto r = value_iteration(generate_transition_matrix(3, 0.2, 5),
                                       identity_table({1, 5, 2, 9, 0, 3, 4, 4, 7}, 3, 3), 0.0, 1e-13);
        CHECK(r.policy == std::vector<ActionIndex>{1, 0, 2});
    }
    SUBCASE("absorbing two-state chain") {
        const auto r = value_iteration(identity_transitions(2), identity_table({1, 0, 0, 1}, 2, 2), 0.8,
                                       1e-13);
        CHECK(r.policy == std::vector<ActionIndex>{0, 1});
        CHECK(r.v[0] == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(r.v[1] == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(r.q.value(0, 1) == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("sweeps contract at rate gamma") {
        TinyMdp mdp;
        const double scale = *std::max_element(mdp.table.values.begin(), mdp.table.values.end());
        const auto r = value_iteration(mdp.transitions, mdp.table, 0.9, 1e-12 * scale);
        REQUIRE(r.deltas.size() > 10);
        // below ~1e-4 of the reward scale, rounding in the deltas themselves
        // (about 1e-15 of Q) exceeds the 1e-9 slack on the ratio
        CHECK(r.deltas[60] > 1e-4 * scale);
        for (std::size_t i = 1; i < r.deltas.size(); ++i)
            if (r.deltas[i - 1] > 1e-4 * scale) CHECK(r.deltas[i] / r.deltas[i - 1] <= 0.9 + 1e-9);
    }
    SUBCASE("positive reward scaling") {
        TinyMdp mdp;
        const double scale = *std::max_element(mdp.table.values.begin(), mdp.table.values.end());
        const auto base = value_iteration(mdp.transitions, mdp.table, 0.9, 1e-13 * scale);
        RewardTable scaled = mdp.table;
        for (double& x : scaled.values) x *= 7.5;
        const auto big = value_iteration(mdp.transitions, scaled, 0.9, 1e-13 * scale * 7.5);
        CHECK(big.policy == base.policy);
        for (std::size_t i = 0; i < scaled.values.size(); ++i)
            CHECK(std::abs(big.q.values()[i] - 7.5 * base.q.values()[i]) <=
                  1e-9 * std::abs(7.5 * base.q.values()[i]) + 1e-12 * scale);
    }
    SUBCASE("rejects gamma 1") {
        CHECK_THROWS_AS(value_iteration(identity_transitions(1), identity_table({1.0}, 1, 1), 1.0, 1e-9),
                        ConfigError);
    }
}

TEST_CASE("evaluate_policy") {
    TinyMdp mdp;
    const double scale = *std::max_element(mdp.table.values.begin(), mdp.table.values.end());
    const auto vi = value_iteration(mdp.transitions, mdp.table, 0.9, 1e-12 * scale);

    SUBCASE("greedy beats a uniformly random policy") {
        double greedy = 0.0;
        evaluate_policy(vi.q, mdp.channel(11), mdp.actions, PrecoderKind::ZF, mdp.params, 20000,
                        [&](const MetricsRecord& r) { greedy += r.reward; });
        auto env = mdp.channel(11);
        Rng rng(12);
        double random = 0.0;
        StateIndex s = env.reset_random();
        for (int i = 0; i < 20000; ++i) {
            random += mdp.table(s, rng.below(mdp.actions.size()));
            s = env.step();
        }
        CHECK(greedy >= random);
    }
    SUBCASE("deterministic") {
        std::vector<double> a, b;
        evaluate_policy(vi.q, mdp.channel(3), mdp.actions, PrecoderKind::ZF, mdp.params, 500,
                        [&](const MetricsRecord& r) { a.push_back(r.reward); a.push_back(r.state); });
        evaluate_policy(vi.q, mdp.channel(3), mdp.actions, PrecoderKind::ZF, mdp.params, 500,
                        [&](const MetricsRecord& r) { b.push_back(r.reward); b.push_back(r.state); });
        CHECK(a == b);
    }
    SUBCASE("identity transitions repeat one action") {
        MarkovChannel env(mdp.states, identity_transitions(4), 4);
        std::set<ActionIndex> seen;
        evaluate_policy(vi.q, env, mdp.actions, PrecoderKind::ZF, mdp.params, 200,
                        [&](const MetricsRecord& r) { seen.insert(r.action); });
        CHECK(seen.size() == 1);
    }
}

TEST_CASE("qtable persistence") {
    const auto dir = std::filesystem::temp_directory_path() / "qpower_test_rl";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "q.json").string();
    QTable q(3, 4);
    q.record(2, 3, 0.1 + 0.2);
    q.record(0, 1, -1e-300);
    q.record(2, 3, 1.0 / 3.0);
    save_qtable(path, q, "abc123");
    CHECK(load_qtable(path, "abc123") == q);
    CHECK_THROWS_AS(load_qtable(path, "other"), ConfigError);
}

TEST_CASE("compare_q") {
    const QTable a = QTable::from_raw(2, 2, {1.0, 2.0, 3.0, 0.0}, {0, 0, 0, 0});
    const QTable b = QTable::from_raw(2, 2, {1.0, 2.5, 3.0, 4.0}, {0, 0, 0, 0});
    const auto self = compare_q(a, a);
    CHECK(self.sup_gap == 0.0);
    CHECK(self.policy_agreement == 1.0);
    const auto c = compare_q(a, b);
    CHECK(c.sup_gap == 4.0);
    CHECK(c.reference_sup == 4.0);
    CHECK(c.policy_agreement == 0.5);
}
