#include "qpower/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "qpower/error.hpp"

namespace qpower::kernels {

namespace {

RewardTable empty_table(const ChannelStateSet& states, const ActionSpace& actions) {
    return {states.size(), actions.size(), std::vector<double>(states.size() * actions.size())};
}

void check_sweep_args(const TransitionMatrix& transitions, const RewardTable& rewards,
                      std::span<const double> q_in, std::span<double> q_out) {
    if (transitions.size() != rewards.num_states || q_in.size() != rewards.values.size() ||
        q_out.size() != rewards.values.size())
        throw DimensionError("bellman_sweep: inconsistent sizes");
}

}  // namespace

RewardTable reward_table_serial(const ChannelStateSet& states, const ActionSpace& actions,
                                PrecoderKind kind, const RewardParams& params) {
    RewardTable t = empty_table(states, actions);
    for (std::size_t s = 0; s < t.num_states; ++s)
        for (std::size_t a = 0; a < t.num_actions; ++a)
            t.values[s * t.num_actions + a] = reward(states[s], actions.action(a), kind, params);
    return t;
}

RewardTable reward_table_parallel(const ChannelStateSet& states, const ActionSpace& actions,
                                  PrecoderKind kind, const RewardParams& params) {
    RewardTable t = empty_table(states, actions);
    const auto cells = static_cast<std::int64_t>(t.values.size());
    const std::size_t na = t.num_actions;
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t c = 0; c < cells; ++c) {
        const auto s = static_cast<std::size_t>(c) / na;
        const auto a = static_cast<std::size_t>(c) % na;
        t.values[static_cast<std::size_t>(c)] = reward(states[s], actions.action(a), kind, params);
    }
    return t;
}

double bellman_sweep_serial(const TransitionMatrix& transitions, const RewardTable& rewards,
                            double gamma, std::span<const double> q_in, std::span<double> q_out) {
    check_sweep_args(transitions, rewards, q_in, q_out);
    const std::size_t ns = rewards.num_states;
    const std::size_t na = rewards.num_actions;
    std::vector<double> vmax(ns);
    for (std::size_t s = 0; s < ns; ++s)
        vmax[s] = *std::max_element(q_in.begin() + s * na, q_in.begin() + (s + 1) * na);
    double delta = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
        double cont = 0.0;
        const auto& row = transitions.row(s);
        for (std::size_t sp = 0; sp < ns; ++sp) cont += row[sp] * vmax[sp];
        for (std::size_t a = 0; a < na; ++a) {
            const std::size_t i = s * na + a;
            q_out[i] = rewards.values[i] + gamma * cont;
            delta = std::max(delta, std::abs(q_out[i] - q_in[i]));
        }
    }
    return delta;
}

double bellman_sweep_parallel(const TransitionMatrix& transitions, const RewardTable& rewards,
                              double gamma, std::span<const double> q_in,
                              std::span<double> q_out) {
    check_sweep_args(transitions, rewards, q_in, q_out);
    const auto ns = static_cast<std::int64_t>(rewards.num_states);
    const std::size_t na = rewards.num_actions;
    std::vector<double> vmax(rewards.num_states);
#pragma omp parallel for
    for (std::int64_t s = 0; s < ns; ++s) {
        const auto base = static_cast<std::size_t>(s) * na;
        vmax[static_cast<std::size_t>(s)] =
            *std::max_element(q_in.begin() + base, q_in.begin() + base + na);
    }
    double delta = 0.0;
#pragma omp parallel for reduction(max : delta)
    for (std::int64_t s = 0; s < ns; ++s) {
        double cont = 0.0;
        const auto& row = transitions.row(static_cast<std::size_t>(s));
        for (std::size_t sp = 0; sp < vmax.size(); ++sp) cont += row[sp] * vmax[sp];
        for (std::size_t a = 0; a < na; ++a) {
            const std::size_t i = static_cast<std::size_t>(s) * na + a;
            q_out[i] = rewards.values[i] + gamma * cont;
            delta = std::max(delta, std::abs(q_out[i] - q_in[i]));
        }
    }
    return delta;
}

}  // namespace qpower::kernels
