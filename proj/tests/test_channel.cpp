#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "qpower/channel.hpp"
#include "qpower/error.hpp"

using namespace qpower;

namespace {

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

}  // namespace

TEST_CASE("generate_state_set") {
    SUBCASE("deterministic in the seed") {
        CHECK(generate_state_set(2, 1, 1, 7) == generate_state_set(2, 1, 1, 7));
        CHECK_FALSE(generate_state_set(2, 1, 1, 7) == generate_state_set(2, 1, 1, 8));
    }
    SUBCASE("shape") {
        const auto s = generate_state_set(8, 4, 16, 3);
        CHECK(s.size() == 16);
        for (const auto& h : s.states()) {
            CHECK(h.rows() == 8);
            CHECK(h.cols() == 4);
        }
    }
    SUBCASE("unit per-entry variance") {
        const auto s = generate_state_set(32, 4, 64, 11);
        double power = 0.0, mean_re = 0.0;
        std::size_t n = 0;
        for (const auto& h : s.states())
            for (const auto& z : h.values()) {
                power += std::norm(z);
                mean_re += z.real();
                ++n;
            }
        CHECK(std::abs(power / n - 1.0) <= 0.05);
        CHECK(std::abs(mean_re / n) <= 0.05);
    }
    SUBCASE("M < K rejected") {
        CHECK_THROWS_AS(generate_state_set(2, 3, 1, 1), DimensionError);
    }
}

TEST_CASE("generate_transition_matrix") {
    SUBCASE("self_bias 1 gives the identity") {
        const auto t = generate_transition_matrix(5, 1.0, 2);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) CHECK(t(i, j) == (i == j ? 1.0 : 0.0));
    }
    SUBCASE("single state") {
        CHECK(generate_transition_matrix(1, 0.3, 2).rows() ==
              std::vector<std::vector<double>>{{1.0}});
    }
    SUBCASE("rows are stochastic with the requested diagonal") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto t = generate_transition_matrix(4, 0.5, seed);
            for (std::size_t i = 0; i < 4; ++i) {
                double sum = 0.0;
                for (double p : t.row(i)) {
                    CHECK(p >= 0.0);
                    sum += p;
                }
                CHECK(std::abs(sum - 1.0) <= 1e-12);
                CHECK(t(i, i) >= 0.5 - 1e-15);
            }
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(generate_transition_matrix(0, 0.5, 1), DimensionError);
        CHECK_THROWS_AS(generate_transition_matrix(3, 1.5, 1), DimensionError);
        CHECK_THROWS_AS(TransitionMatrix({{0.5, 0.4}, {0.5, 0.5}}), DimensionError);
        CHECK_THROWS_AS(TransitionMatrix({{1.2, -0.2}, {0.5, 0.5}}), DimensionError);
    }
}

TEST_CASE("MarkovChannel::step") {
    const auto states = generate_state_set(2, 1, 8, 1);

    SUBCASE("identity transitions never move") {
        MarkovChannel ch(states, generate_transition_matrix(8, 1.0, 1), 9, 3);
        for (int i = 0; i < 10000; ++i) REQUIRE(ch.step() == 3);
    }
    SUBCASE("swap matrix alternates") {
        MarkovChannel ch(generate_state_set(2, 1, 2, 1), TransitionMatrix({{0.0, 1.0}, {1.0, 0.0}}),
                         4, 0);
        for (int i = 1; i <= 1000; ++i) REQUIRE(ch.step() == static_cast<StateIndex>(i % 2));
    }
    SUBCASE("empirical rows match the true rows") {
        const auto t = generate_transition_matrix(8, 0.5, 21);
        MarkovChannel ch(states, t, 5, 0);
        std::vector<std::vector<double>> counts(8, std::vector<double>(8, 0.0));
        std::vector<double> visits(8, 0.0);
        StateIndex s = ch.current_state();
        for (int i = 0; i < 100000; ++i) {
            const StateIndex n = ch.step();
            counts[s][n] += 1.0;
            visits[s] += 1.0;
            s = n;
        }
        for (std::size_t i = 0; i < 8; ++i) {
            if (visits[i] < 5000) continue;
            for (double& c : counts[i]) c /= visits[i];
            CHECK(total_variation(counts[i], t.row(i)) <= 0.02);
        }
    }
    SUBCASE("long-run occupancy matches the stationary distribution") {
        const auto t = generate_transition_matrix(8, 0.5, 22);
        const auto pi = t.stationary();
        MarkovChannel ch(states, t, 6, 0);
        std::vector<double> occ(8, 0.0);
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) occ[ch.step()] += 1.0 / n;
        CHECK(total_variation(occ, pi) <= 0.02);
    }
    SUBCASE("trajectories reproduce bit-exactly") {
        const auto t = generate_transition_matrix(8, 0.3, 2);
        MarkovChannel a(states, t, 77), b(states, t, 77);
        for (int i = 0; i < 5000; ++i) REQUIRE(a.step() == b.step());
        CHECK(a.reset_random() == b.reset_random());
    }
}

TEST_CASE("state_matrix and persistence") {
    const auto states = generate_state_set(4, 2, 3, 12);
    const auto t = generate_transition_matrix(3, 0.5, 13);
    MarkovChannel ch(states, t, 1);

    CHECK(ch.state_matrix(0) == states.states().front());
    const StateIndex s = ch.step();
    CHECK(&ch.state_matrix(s) == &ch.state_set().states()[s]);
    CHECK_THROWS_AS(ch.state_set()[3], std::out_of_range);

    const auto path = std::filesystem::temp_directory_path() / "qpower_channel_roundtrip.json";
    save_channel(path.string(), ChannelDocument{12, 0.5, states, t});
    const ChannelDocument back = load_channel(path.string());
    CHECK(back.states == states);  // exact double equality
    CHECK(back.transitions == t);
    CHECK(back.seed == 12);
    CHECK(back.self_bias == 0.5);
    std::filesystem::remove(path);
}

TEST_CASE("MarkovChannel rejects mismatched sizes") {
    CHECK_THROWS_AS(MarkovChannel(generate_state_set(2, 1, 3, 1), generate_transition_matrix(2, 0.5, 1), 1),
                    DimensionError);
}
