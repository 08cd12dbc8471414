#include "qpower/channel.hpp"

#include <cmath>
#include <fstream>

#include "qpower/error.hpp"

namespace qpower {

namespace {

constexpr double kRowSumTol = 1e-12;

}  // namespace

ChannelStateSet::ChannelStateSet(std::size_t m_antennas, std::size_t k_users,
                                 std::vector<CMatrix> states)
    : m_(m_antennas), k_(k_users), states_(std::move(states)) {
    if (states_.empty()) throw DimensionError("ChannelStateSet: no states");
    for (std::size_t i = 0; i < states_.size(); ++i) {
        const auto& s = states_[i];
        if (s.rows() != m_ || s.cols() != k_)
            throw DimensionError("ChannelStateSet: state " + std::to_string(i) +
                                 " is not " + std::to_string(m_) + "x" + std::to_string(k_));
        if (!s.all_finite())
            throw DimensionError("ChannelStateSet: state " + std::to_string(i) +
                                 " has non-finite entries");
    }
}

const CMatrix& ChannelStateSet::operator[](StateIndex i) const {
    if (i >= states_.size())
        throw std::out_of_range("state index " + std::to_string(i) + " >= " +
                                std::to_string(states_.size()));
    return states_[i];
}

TransitionMatrix::TransitionMatrix(std::vector<std::vector<double>> rows)
    : rows_(std::move(rows)) {
    if (rows_.empty()) throw DimensionError("TransitionMatrix: empty");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& r = rows_[i];
        if (r.size() != rows_.size())
            throw DimensionError("TransitionMatrix: row " + std::to_string(i) + " has " +
                                 std::to_string(r.size()) + " entries");
        double sum = 0.0;
        for (double p : r) {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw DimensionError("TransitionMatrix: row " + std::to_string(i) +
                                     " has a negative or non-finite entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw DimensionError("TransitionMatrix: row " + std::to_string(i) + " sums to " +
                                 std::to_string(sum));
    }
}

std::vector<double> TransitionMatrix::stationary(double tol, std::size_t max_iter) const {
    const std::size_t n = rows_.size();
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    for (std::size_t it = 0; it < max_iter; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * rows_[i][j];
        double diff = 0.0;
        for (std::size_t j = 0; j < n; ++j) diff += std::abs(next[j] - pi[j]);
        pi.swap(next);
        if (diff < tol) break;
    }
    return pi;
}

ChannelStateSet generate_state_set(std::size_t m, std::size_t k, std::size_t cardinality,
                                   std::uint64_t seed) {
    if (k < 1) throw DimensionError("generate_state_set: need at least one user");
    if (m < k)
        throw DimensionError("generate_state_set: M=" + std::to_string(m) + " < K=" +
                             std::to_string(k) + " (zero-forcing needs M >= K)");
    if (cardinality < 1) throw DimensionError("generate_state_set: cardinality must be >= 1");

    Rng rng(seed);
    // CN(0,1): real and imaginary parts each N(0, 1/2).
    const double s = std::sqrt(0.5);
    std::vector<CMatrix> states;
    states.reserve(cardinality);
    for (std::size_t c = 0; c < cardinality; ++c) {
        CMatrix h(m, k);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                const double re = s * rng.normal();
                const double im = s * rng.normal();
                h(i, j) = {re, im};
            }
        states.push_back(std::move(h));
    }
    return ChannelStateSet(m, k, std::move(states));
}

TransitionMatrix generate_transition_matrix(std::size_t cardinality, double self_bias,
                                            std::uint64_t seed) {
    if (cardinality == 0) throw DimensionError("generate_transition_matrix: cardinality 0");
    if (!(self_bias >= 0.0 && self_bias <= 1.0))
        throw DimensionError("generate_transition_matrix: self_bias outside [0,1]");

    Rng rng(seed);
    std::vector<std::vector<double>> rows(cardinality, std::vector<double>(cardinality, 0.0));
    for (std::size_t i = 0; i < cardinality; ++i) {
        auto& row = rows[i];
        if (cardinality == 1) {
            row[0] = 1.0;
            continue;
        }
        std::vector<double> w(cardinality, 0.0);
        double total = 0.0;
        for (std::size_t j = 0; j < cardinality; ++j) {
            if (j == i) continue;
            // strictly positive so the chain stays irreducible
            w[j] = 0.05 + rng.uniform();
            total += w[j];
        }
        const double off = 1.0 - self_bias;
        for (std::size_t j = 0; j < cardinality; ++j)
            row[j] = (j == i) ? self_bias : off * w[j] / total;
        // fold rounding residue into the diagonal
        double sum = 0.0;
        for (double p : row) sum += p;
        row[i] = std::max(0.0, row[i] + (1.0 - sum));
    }
    return TransitionMatrix(std::move(rows));
}

MarkovChannel::MarkovChannel(ChannelStateSet states, TransitionMatrix transitions,
                             std::uint64_t seed, StateIndex initial_state)
    : states_(std::move(states)),
      transitions_(std::move(transitions)),
      rng_(seed),
      current_(initial_state) {
    if (transitions_.size() != states_.size())
        throw DimensionError("MarkovChannel: " + std::to_string(states_.size()) +
                             " states but transition matrix of size " +
                             std::to_string(transitions_.size()));
    if (current_ >= states_.size()) throw std::out_of_range("MarkovChannel: initial state");
}

StateIndex MarkovChannel::step() {
    const auto& row = transitions_.row(current_);
    const double u = rng_.uniform();
    double cum = 0.0;
    StateIndex next = row.size();
    StateIndex last_positive = 0;
    for (StateIndex j = 0; j < row.size(); ++j) {
        if (row[j] > 0.0) last_positive = j;
        cum += row[j];
        if (u < cum) {
            next = j;
            break;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    if (next == row.size()) next = last_positive;
    current_ = next;
    return current_;
}

StateIndex MarkovChannel::reset_random() {
    current_ = static_cast<StateIndex>(rng_.below(states_.size()));
    return current_;
}

nlohmann::json to_json(const ChannelDocument& doc) {
    nlohmann::json states = nlohmann::json::array();
    for (const auto& h : doc.states.states()) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < h.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t j = 0; j < h.cols(); ++j)
                row.push_back({h(i, j).real(), h(i, j).imag()});
            rows.push_back(std::move(row));
        }
        states.push_back(std::move(rows));
    }
    return {
        {"m_antennas", doc.states.m_antennas()},
        {"k_users", doc.states.k_users()},
        {"cardinality", doc.states.size()},
        {"seed", doc.seed},
        {"self_bias", doc.self_bias},
        {"states", std::move(states)},
        {"transitions", doc.transitions.rows()},
    };
}

ChannelDocument channel_from_json(const nlohmann::json& j) {
    try {
        const auto m = j.at("m_antennas").get<std::size_t>();
        const auto k = j.at("k_users").get<std::size_t>();
        const auto card = j.at("cardinality").get<std::size_t>();
        std::vector<CMatrix> states;
        for (const auto& js : j.at("states")) {
            if (js.size() != m) throw DimensionError("channel document: state row count");
            CMatrix h(m, k);
            for (std::size_t r = 0; r < m; ++r) {
                if (js[r].size() != k) throw DimensionError("channel document: state col count");
                for (std::size_t c = 0; c < k; ++c)
                    h(r, c) = {js[r][c].at(0).get<double>(), js[r][c].at(1).get<double>()};
            }
            states.push_back(std::move(h));
        }
        if (states.size() != card)
            throw DimensionError("channel document: cardinality does not match state count");
        return ChannelDocument{
            j.at("seed").get<std::uint64_t>(),
            j.at("self_bias").get<double>(),
            ChannelStateSet(m, k, std::move(states)),
            TransitionMatrix(j.at("transitions").get<std::vector<std::vector<double>>>()),
        };
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("channel document: ") + e.what());
    }
}

void save_channel(const std::string& path, const ChannelDocument& doc) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << to_json(doc).dump(1) << '\n';
}

ChannelDocument load_channel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    return channel_from_json(nlohmann::json::parse(in));
}

}  // namespace qpower
