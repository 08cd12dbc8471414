#include "qpower/phy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qpower/error.hpp"

namespace qpower {

namespace {

void check_dims(const CMatrix& h, const PowerVector& p) {
    if (h.rows() != p.size())
        throw DimensionError("channel has " + std::to_string(h.rows()) +
                             " antennas but power vector has " + std::to_string(p.size()));
    if (h.cols() == 0) throw DimensionError("channel has no users");
}

void check_dims(const CMatrix& h, const PowerVector& p, const Precoder& v) {
    check_dims(h, p);
    if (v.v.rows() != h.rows() || v.v.cols() != h.cols())
        throw DimensionError("precoder shape does not match channel");
}

// h_k^H P^{1/2} v_j
cplx effective_gain(const CMatrix& h, const PowerVector& p, const CMatrix& v, std::size_t k,
                    std::size_t j) {
    cplx s{};
    for (std::size_t m = 0; m < h.rows(); ++m)
        s += std::conj(h(m, k)) * std::sqrt(p[m]) * v(m, j);
    return s;
}

// h_i^H P h_j
cplx weighted_inner(const CMatrix& h, const PowerVector& p, std::size_t i, std::size_t j) {
    cplx s{};
    for (std::size_t m = 0; m < h.rows(); ++m) s += std::conj(h(m, i)) * p[m] * h(m, j);
    return s;
}

}  // namespace

PowerVector::PowerVector(std::vector<double> levels) : p_(std::move(levels)) {
    for (double x : p_)
        if (!(x >= 0.0) || !std::isfinite(x))
            throw DimensionError("PowerVector: negative or non-finite level");
}

double PowerVector::sum() const { return std::accumulate(p_.begin(), p_.end(), 0.0); }

std::size_t PowerVector::active_count() const {
    return static_cast<std::size_t>(std::count_if(p_.begin(), p_.end(), [](double x) { return x > 0.0; }));
}

Precoder zf_precoder(const CMatrix& h, const PowerVector& p) {
    check_dims(h, p);
    const std::size_t m_ant = h.rows();
    const std::size_t k_users = h.cols();
    if (p.active_count() < k_users)
        throw SingularMatrixError("zf_precoder: only " + std::to_string(p.active_count()) +
                                  " active antennas for " + std::to_string(k_users) + " users");

    CMatrix gram(k_users, k_users);
    for (std::size_t i = 0; i < k_users; ++i)
        for (std::size_t j = 0; j < k_users; ++j) gram(i, j) = weighted_inner(h, p, i, j);

    CMatrix gram_inv;
    try {
        gram_inv = inverse_small(gram);
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError(std::string("zf_precoder: H^H P H is rank deficient (") +
                                  e.what() + ")");
    }

    CMatrix sqrt_p_h(m_ant, k_users);
    for (std::size_t m = 0; m < m_ant; ++m) {
        const double sp = std::sqrt(p[m]);
        for (std::size_t k = 0; k < k_users; ++k) sqrt_p_h(m, k) = sp * h(m, k);
    }
    CMatrix v = matmul(sqrt_p_h, gram_inv);
    for (std::size_t k = 0; k < k_users; ++k) {
        double n2 = 0.0;
        for (std::size_t m = 0; m < m_ant; ++m) n2 += std::norm(v(m, k));
        const double n = std::sqrt(n2);
        if (!(n > 0.0) || !std::isfinite(n))
            throw SingularMatrixError("zf_precoder: column " + std::to_string(k) +
                                      " cannot be normalised");
        for (std::size_t m = 0; m < m_ant; ++m) v(m, k) /= n;
    }
    return {std::move(v), PrecoderKind::ZF};
}

Precoder mrt_precoder(const CMatrix& h, const PowerVector& p) {
    check_dims(h, p);
    const std::size_t m_ant = h.rows();
    const std::size_t k_users = h.cols();
    CMatrix v(m_ant, k_users);
    for (std::size_t k = 0; k < k_users; ++k) {
        const double g = weighted_inner(h, p, k, k).real();
        if (!(g > 0.0))
            throw DegenerateUserError("mrt_precoder: user " + std::to_string(k) +
                                      " has zero effective channel power");
        const double inv = 1.0 / std::sqrt(g);
        for (std::size_t m = 0; m < m_ant; ++m) v(m, k) = std::sqrt(p[m]) * h(m, k) * inv;
    }
    return {std::move(v), PrecoderKind::MRT};
}

Precoder make_precoder(PrecoderKind kind, const CMatrix& h, const PowerVector& p) {
    return kind == PrecoderKind::ZF ? zf_precoder(h, p) : mrt_precoder(h, p);
}

double sinr(const CMatrix& h, const PowerVector& p, const Precoder& v, double noise_var,
            std::size_t k) {
    check_dims(h, p, v);
    if (k >= h.cols()) throw DimensionError("sinr: user index out of range");
    if (!(noise_var > 0.0)) throw DimensionError("sinr: noise variance must be positive");
    const double inv_k = 1.0 / static_cast<double>(h.cols());
    double interference = 0.0;
    for (std::size_t j = 0; j < h.cols(); ++j)
        if (j != k) interference += std::norm(effective_gain(h, p, v.v, k, j));
    const double signal = std::norm(effective_gain(h, p, v.v, k, k));
    return signal * inv_k / (interference * inv_k + noise_var);
}

std::vector<double> sinr_all(const CMatrix& h, const PowerVector& p, const Precoder& v,
                             double noise_var) {
    std::vector<double> out(h.cols());
    for (std::size_t k = 0; k < h.cols(); ++k) out[k] = sinr(h, p, v, noise_var, k);
    return out;
}

double sum_rate(const CMatrix& h, const PowerVector& p, const Precoder& v, double noise_var) {
    double r = 0.0;
    for (double x : sinr_all(h, p, v, noise_var)) r += std::log2(1.0 + x);
    return r;
}

double zf_sum_rate(const CMatrix& h, const PowerVector& p, const Precoder& v_zf,
                   double noise_var) {
    if (v_zf.kind != PrecoderKind::ZF) throw Error("zf_sum_rate: precoder is not zero-forcing");
    check_dims(h, p, v_zf);
    const double k_users = static_cast<double>(h.cols());
    double r = 0.0;
    for (std::size_t k = 0; k < h.cols(); ++k)
        r += std::log2(1.0 + std::norm(effective_gain(h, p, v_zf.v, k, k)) /
                                 (noise_var * k_users));
    return r;
}

double mrt_sum_rate(const CMatrix& h, const PowerVector& p, double noise_var) {
    check_dims(h, p);
    const std::size_t k_users = h.cols();
    std::vector<double> own(k_users);
    for (std::size_t j = 0; j < k_users; ++j) {
        own[j] = weighted_inner(h, p, j, j).real();
        if (!(own[j] > 0.0))
            throw DegenerateUserError("mrt_sum_rate: user " + std::to_string(j) +
                                      " has zero effective channel power");
    }
    double r = 0.0;
    for (std::size_t k = 0; k < k_users; ++k) {
        double interference = 0.0;
        for (std::size_t j = 0; j < k_users; ++j)
            if (j != k) interference += std::norm(weighted_inner(h, p, k, j)) / own[j];
        r += std::log2(1.0 + own[k] / (interference + static_cast<double>(k_users) * noise_var));
    }
    return r;
}

double total_power(const PowerVector& p, const Precoder& v, std::size_t k_users) {
    if (v.v.rows() != p.size()) throw DimensionError("total_power: shape mismatch");
    double t = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m) {
        double row = 0.0;
        for (std::size_t k = 0; k < v.v.cols(); ++k) row += std::norm(v.v(m, k));
        t += p[m] * row;
    }
    return t / static_cast<double>(k_users);
}

double per_antenna_power(const PowerVector& p, const Precoder& v, std::size_t k_users,
                         std::size_t m) {
    if (v.v.rows() != p.size()) throw DimensionError("per_antenna_power: shape mismatch");
    if (m >= p.size()) throw DimensionError("per_antenna_power: antenna index out of range");
    double row = 0.0;
    for (std::size_t k = 0; k < v.v.cols(); ++k) row += std::norm(v.v(m, k));
    return p[m] * row / static_cast<double>(k_users);
}

double energy_efficiency(double rate, double total_pow) {
    if (!(total_pow > 0.0)) throw Error("energy_efficiency: total power must be positive");
    return rate / total_pow;
}

double approx_sinr(const PowerVector& p, std::size_t k_users, std::size_t m_antennas,
                   double noise_var) {
    const double tr = p.sum();
    if (!(tr > 0.0)) throw Error("approx_sinr: tr(P) must be positive");
    const double k = static_cast<double>(k_users);
    return 1.0 / ((k - 1.0) + k * static_cast<double>(m_antennas) * noise_var / tr);
}

double approx_sinr_zf(const PowerVector& p, std::size_t k_users, std::size_t m_antennas,
                      double noise_var) {
    const double tr = p.sum();
    if (!(tr > 0.0)) throw Error("approx_sinr_zf: tr(P) must be positive");
    return tr / (static_cast<double>(k_users) * static_cast<double>(m_antennas) * noise_var);
}

LinkMetrics link_metrics(const CMatrix& h, const PowerVector& p, const Precoder& v,
                         double noise_var) {
    LinkMetrics out;
    const std::size_t k_users = h.cols();
    out.sinr = sinr_all(h, p, v, noise_var);
    for (double x : out.sinr) out.sum_rate += std::log2(1.0 + x);
    out.per_antenna_power.resize(p.size());
    for (std::size_t m = 0; m < p.size(); ++m) {
        out.per_antenna_power[m] = per_antenna_power(p, v, k_users, m);
        out.total_power += out.per_antenna_power[m];
    }
    out.energy_efficiency = out.total_power > 0.0 ? out.sum_rate / out.total_power : 0.0;
    return out;
}

double linear_to_db(double x) { return 10.0 * std::log10(std::max(x, 1e-30)); }

}  // namespace qpower
