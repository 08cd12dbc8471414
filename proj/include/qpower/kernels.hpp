#pragma once

// Data-parallel kernels. Each OpenMP version has a serial twin that the tests
// compare against bit for bit.

#include <span>
#include <vector>

#include "qpower/actions.hpp"
#include "qpower/channel.hpp"
#include "qpower/rl.hpp"

namespace qpower::kernels {

RewardTable reward_table_serial(const ChannelStateSet& states, const ActionSpace& actions,
                                PrecoderKind kind, const RewardParams& params);
RewardTable reward_table_parallel(const ChannelStateSet& states, const ActionSpace& actions,
                                  PrecoderKind kind, const RewardParams& params);

/// One synchronous Bellman optimality sweep q_out = T(q_in). Returns
/// max |q_out - q_in|.
double bellman_sweep_serial(const TransitionMatrix& transitions, const RewardTable& rewards,
                            double gamma, std::span<const double> q_in, std::span<double> q_out);
double bellman_sweep_parallel(const TransitionMatrix& transitions, const RewardTable& rewards,
                              double gamma, std::span<const double> q_in,
                              std::span<double> q_out);

}  // namespace qpower::kernels
