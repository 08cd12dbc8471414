#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpower/linalg.hpp"
#include "qpower/rng.hpp"

namespace qpower {

using StateIndex = std::size_t;

/// The finite set of channel realisations visited by the Markov chain. Each
/// state is an M x K matrix whose column k is the channel h_k of user k.
class ChannelStateSet {
public:
    ChannelStateSet(std::size_t m_antennas, std::size_t k_users, std::vector<CMatrix> states);

    std::size_t m_antennas() const { return m_; }
    std::size_t k_users() const { return k_; }
    std::size_t size() const { return states_.size(); }
    const CMatrix& operator[](StateIndex i) const;
    const std::vector<CMatrix>& states() const { return states_; }

    friend bool operator==(const ChannelStateSet&, const ChannelStateSet&) = default;

private:
    std::size_t m_;
    std::size_t k_;
    std::vector<CMatrix> states_;
};

/// Row-stochastic transition matrix.
class TransitionMatrix {
public:
    explicit TransitionMatrix(std::vector<std::vector<double>> rows);

    std::size_t size() const { return rows_.size(); }
    const std::vector<double>& row(StateIndex i) const { return rows_[i]; }
    double operator()(StateIndex i, StateIndex j) const { return rows_[i][j]; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

    /// Stationary distribution by power iteration.
    std::vector<double> stationary(double tol = 1e-14, std::size_t max_iter = 1'000'000) const;

    friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

private:
    std::vector<std::vector<double>> rows_;
};

/// i.i.d. CN(0,1) entries, deterministic in `seed`.
ChannelStateSet generate_state_set(std::size_t m, std::size_t k, std::size_t cardinality,
                                   std::uint64_t seed);

/// Row i puts `self_bias` on the diagonal and spreads the rest over the other
/// states with normalised positive random weights.
TransitionMatrix generate_transition_matrix(std::size_t cardinality, double self_bias,
                                            std::uint64_t seed);

class MarkovChannel {
public:
    MarkovChannel(ChannelStateSet states, TransitionMatrix transitions, std::uint64_t seed,
                  StateIndex initial_state = 0);

    /// Advances one slot by inverse-CDF sampling of the current row.
    StateIndex step();

    /// Moves to a uniformly drawn state (episode start).
    StateIndex reset_random();

    StateIndex current_state() const { return current_; }
    std::size_t num_states() const { return states_.size(); }
    const CMatrix& state_matrix(StateIndex idx) const { return states_[idx]; }

    const ChannelStateSet& state_set() const { return states_; }
    const TransitionMatrix& transitions() const { return transitions_; }

private:
    ChannelStateSet states_;
    TransitionMatrix transitions_;
    Rng rng_;
    StateIndex current_;
};

/// Persisted channel description. Entries are written as [re, im] pairs.
struct ChannelDocument {
    std::uint64_t seed = 0;
    double self_bias = 0.0;
    ChannelStateSet states;
    TransitionMatrix transitions;
};

nlohmann::json to_json(const ChannelDocument& doc);
ChannelDocument channel_from_json(const nlohmann::json& j);
void save_channel(const std::string& path, const ChannelDocument& doc);
ChannelDocument load_channel(const std::string& path);

}  // namespace qpower
