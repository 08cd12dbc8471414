#include "qpower/actions.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "qpower/error.hpp"

namespace qpower {

namespace {

constexpr double kBoundRelTol = 1e-12;

bool leq(double a, double b) { return a <= b + kBoundRelTol * std::max(1.0, std::abs(b)); }

struct Enumerator {
    const PowerLevelSet& levels;
    std::size_t m;
    std::size_t k;
    double p_min;
    double cap;
    std::size_t max_actions;
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> current;
    std::uint64_t nodes = 0;
    std::size_t found = 0;

    bool feasible(std::size_t depth, double sum, std::size_t positives) const {
        const std::size_t remaining = m - depth;
        const std::size_t need = positives >= k ? 0 : k - positives;
        if (need > remaining) return false;
        const double lo = sum + static_cast<double>(need) * levels.min_positive();
        const double hi = sum + static_cast<double>(remaining) * levels.max();
        return leq(lo, cap) && leq(p_min, hi);
    }

    void visit(std::size_t depth, double sum, std::size_t positives) {
        ++nodes;
        if (depth == m) {
            if (positives >= k && trace_within(sum, p_min, cap)) {
                if (++found > max_actions)
                    throw InfeasibleError("reduced action space exceeds the limit of " +
                                          std::to_string(max_actions) + " actions");
                out.insert(out.end(), current.begin(), current.end());
            }
            return;
        }
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const double s = sum + levels[l];
            const std::size_t c = positives + (l > 0 ? 1 : 0);
            if (!feasible(depth + 1, s, c)) continue;
            current[depth] = static_cast<std::uint8_t>(l);
            visit(depth + 1, s, c);
        }
    }
};

std::string infeasibility_reason(const PowerLevelSet& levels, std::size_t m, std::size_t k,
                                 double p_min, double cap) {
    std::ostringstream os;
    os << "reduced action space is empty: ";
    if (k > m)
        os << "K=" << k << " active antennas required but only M=" << m << " exist";
    else if (!leq(p_min, cap))
        os << "p_min=" << p_min << " exceeds the trace cap M*P_T=" << cap;
    else if (!leq(p_min, static_cast<double>(m) * levels.max()))
        os << "p_min=" << p_min << " exceeds the full-power trace " << m * levels.max();
    else if (!leq(static_cast<double>(k) * levels.min_positive(), cap))
        os << "K active antennas at the lowest level need trace "
           << k * levels.min_positive() << " > cap " << cap;
    else
        os << "no level combination has a trace in [" << p_min << ", " << cap << "]";
    return os.str();
}

}  // namespace

PowerLevelSet::PowerLevelSet(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.size() < 2) throw ConfigError("PowerLevelSet: need at least two levels");
    if (levels_.size() > std::numeric_limits<std::uint8_t>::max())
        throw ConfigError("PowerLevelSet: too many levels");
    if (levels_[0] != 0.0) throw ConfigError("PowerLevelSet: first level must be 0");
    for (std::size_t i = 1; i < levels_.size(); ++i)
        if (!(levels_[i] > levels_[i - 1]) || !std::isfinite(levels_[i]))
            throw ConfigError("PowerLevelSet: levels must be strictly increasing");
}

PowerLevelSet make_level_set(double p_per_max, std::size_t cardinality) {
    if (cardinality < 2) throw ConfigError("make_level_set: cardinality must be >= 2");
    if (!(p_per_max > 0.0)) throw ConfigError("make_level_set: p_per_max must be positive");
    std::vector<double> levels(cardinality);
    const double n = static_cast<double>(cardinality - 1);
    for (std::size_t i = 0; i < cardinality; ++i)
        levels[i] = p_per_max * static_cast<double>(i) / n;
    levels.back() = p_per_max;
    return PowerLevelSet(std::move(levels));
}

double min_power_bound(std::size_t k_users, std::size_t m_antennas, double noise_var,
                       double sinr_target) {
    return static_cast<double>(k_users) * static_cast<double>(m_antennas) * noise_var *
           sinr_target;
}

bool trace_within(double trace, double p_min, double trace_cap) {
    return leq(p_min, trace) && leq(trace, trace_cap);
}

ActionSpace::ActionSpace(PowerLevelSet levels, std::size_t m_antennas, std::size_t k_users,
                         double p_min, double trace_cap, std::vector<std::uint8_t> level_indices)
    : levels_(std::move(levels)),
      m_(m_antennas),
      k_(k_users),
      p_min_(p_min),
      trace_cap_(trace_cap),
      indices_(std::move(level_indices)),
      count_(m_ ? indices_.size() / m_ : 0) {
    if (m_ == 0 || indices_.size() % m_ != 0)
        throw DimensionError("ActionSpace: index table is not a multiple of M");
}

PowerVector ActionSpace::action(ActionIndex a) const {
    if (a >= count_) throw std::out_of_range("action index " + std::to_string(a));
    std::vector<double> p(m_);
    const auto idx = level_indices(a);
    for (std::size_t m = 0; m < m_; ++m) p[m] = levels_[idx[m]];
    return PowerVector(std::move(p));
}

ActionSpace enumerate_reduced(const PowerLevelSet& levels, std::size_t m_antennas,
                              std::size_t k_users, double p_min, double trace_cap,
                              EnumerationStats* stats, std::size_t max_actions) {
    if (m_antennas == 0) throw ConfigError("enumerate_reduced: M must be >= 1");
    Enumerator e{levels, m_antennas, k_users, p_min, trace_cap, max_actions, {}, {}, 0, 0};
    e.current.assign(m_antennas, 0);
    if (e.feasible(0, 0.0, 0)) e.visit(0, 0.0, 0);
    if (stats) stats->nodes_visited = e.nodes;
    if (e.out.empty())
        throw InfeasibleError(infeasibility_reason(levels, m_antennas, k_users, p_min, trace_cap));
    return ActionSpace(levels, m_antennas, k_users, p_min, trace_cap, std::move(e.out));
}

std::uint64_t count_reduced(const PowerLevelSet& levels, std::size_t m_antennas,
                            std::size_t k_users, double p_min, double trace_cap) {
    // (partial trace, active antennas capped at K) -> number of prefixes.
    // Partial traces are accumulated in the same order as the enumerator so
    // the final bound test sees identical doubles.
    std::map<std::pair<double, std::size_t>, std::uint64_t> frontier{{{0.0, 0}, 1}};
    for (std::size_t d = 0; d < m_antennas; ++d) {
        std::map<std::pair<double, std::size_t>, std::uint64_t> next;
        for (const auto& [key, n] : frontier)
            for (std::size_t l = 0; l < levels.size(); ++l) {
                const double s = key.first + levels[l];
                if (!leq(s, trace_cap)) continue;
                const std::size_t c = std::min(k_users, key.second + (l > 0 ? 1 : 0));
                next[{s, c}] += n;
            }
        frontier.swap(next);
    }
    std::uint64_t total = 0;
    for (const auto& [key, n] : frontier)
        if (key.second >= k_users && trace_within(key.first, p_min, trace_cap)) total += n;
    return total;
}

PerAntennaReport check_per_antenna(const PowerVector& action, const Precoder& v,
                                   std::size_t k_users, double p_per_max) {
    PerAntennaReport r;
    r.margins.resize(action.size());
    for (std::size_t m = 0; m < action.size(); ++m) {
        const double t = per_antenna_power(action, v, k_users, m);
        r.margins[m] = p_per_max - t;
        if (!leq(t, p_per_max)) {
            r.ok = false;
            r.violations.push_back(m);
        }
    }
    return r;
}

}  // namespace qpower
