#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qpower/phy.hpp"

namespace qpower {

using ActionIndex = std::size_t;

/// Discrete per-antenna power levels, 0 = levels[0] < ... < levels[n-1] = max.
class PowerLevelSet {
public:
    explicit PowerLevelSet(std::vector<double> levels);

    std::size_t size() const { return levels_.size(); }
    double operator[](std::size_t i) const { return levels_[i]; }
    double max() const { return levels_.back(); }
    /// Smallest strictly positive level.
    double min_positive() const { return levels_[1]; }
    std::span<const double> values() const { return levels_; }

    friend bool operator==(const PowerLevelSet&, const PowerLevelSet&) = default;

private:
    std::vector<double> levels_;
};

/// Uniformly spaced {0, p/(n-1), ..., p}.
PowerLevelSet make_level_set(double p_per_max, std::size_t cardinality);

/// tr(P) lower bound K M sigma^2 xi from the large-array ZF SINR estimate.
double min_power_bound(std::size_t k_users, std::size_t m_antennas, double noise_var,
                       double sinr_target);

/// The reduced action list: every vector in levels^M whose trace lies in
/// [p_min, trace_cap] and which has at least K active antennas. Actions are
/// stored as level indices in lexicographic order.
class ActionSpace {
public:
    ActionSpace(PowerLevelSet levels, std::size_t m_antennas, std::size_t k_users, double p_min,
                double trace_cap, std::vector<std::uint8_t> level_indices);

    std::size_t size() const { return count_; }
    std::size_t m_antennas() const { return m_; }
    std::size_t k_users() const { return k_; }
    double p_min() const { return p_min_; }
    double trace_cap() const { return trace_cap_; }
    const PowerLevelSet& levels() const { return levels_; }

    std::span<const std::uint8_t> level_indices(ActionIndex a) const {
        return {indices_.data() + a * m_, m_};
    }
    PowerVector action(ActionIndex a) const;

private:
    PowerLevelSet levels_;
    std::size_t m_;
    std::size_t k_;
    double p_min_;
    double trace_cap_;
    std::vector<std::uint8_t> indices_;
    std::size_t count_;
};

struct EnumerationStats {
    std::uint64_t nodes_visited = 0;
};

/// Depth-first enumeration with sum and support pruning. Throws
/// InfeasibleError if the result is empty or exceeds `max_actions`.
ActionSpace enumerate_reduced(const PowerLevelSet& levels, std::size_t m_antennas,
                              std::size_t k_users, double p_min, double trace_cap,
                              EnumerationStats* stats = nullptr,
                              std::size_t max_actions = 50'000'000);

/// Size of the reduced action space without materialising it.
std::uint64_t count_reduced(const PowerLevelSet& levels, std::size_t m_antennas,
                            std::size_t k_users, double p_min, double trace_cap);

/// Inclusive bound test shared by the enumerator and its callers.
bool trace_within(double trace, double p_min, double trace_cap);

struct PerAntennaReport {
    bool ok = true;
    std::vector<double> margins;           // P_per - T_per(p_m), per antenna
    std::vector<std::size_t> violations;   // antennas with negative margin
};

PerAntennaReport check_per_antenna(const PowerVector& action, const Precoder& v,
                                   std::size_t k_users, double p_per_max);

}  // namespace qpower
