#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "qpower/linalg.hpp"

namespace qpower {

/// Diagonal of the per-antenna power allocation P (linear units).
class PowerVector {
public:
    PowerVector() = default;
    explicit PowerVector(std::vector<double> levels);

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t m) const { return p_[m]; }
    std::span<const double> values() const { return p_; }

    double sum() const;
    std::size_t active_count() const;

private:
    std::vector<double> p_;
};

enum class PrecoderKind { ZF, MRT };

struct Precoder {
    CMatrix v;  // M x K, unit-norm columns
    PrecoderKind kind;
};

/// Per-step link quantities for one (channel, allocation) pair.
struct LinkMetrics {
    std::vector<double> sinr;  // linear, per user
    double sum_rate = 0.0;
    double total_power = 0.0;
    std::vector<double> per_antenna_power;
    double energy_efficiency = 0.0;
};

/// Columns of P^{1/2} H (H^H P H)^{-1}, each scaled to unit norm.
/// Throws SingularMatrixError when fewer than K antennas are active or the
/// effective Gram matrix is rank deficient.
Precoder zf_precoder(const CMatrix& h, const PowerVector& p);

/// v_k = P^{1/2} h_k / sqrt(h_k^H P h_k). Throws DegenerateUserError when
/// some h_k^H P h_k is zero.
Precoder mrt_precoder(const CMatrix& h, const PowerVector& p);

Precoder make_precoder(PrecoderKind kind, const CMatrix& h, const PowerVector& p);

/// Signal power |h_k^H P^{1/2} v_k|^2 / K over interference
/// ||V_{-k}^H P^{1/2} h_k||^2 / K plus unscaled noise.
double sinr(const CMatrix& h, const PowerVector& p, const Precoder& v, double noise_var,
            std::size_t k);

std::vector<double> sinr_all(const CMatrix& h, const PowerVector& p, const Precoder& v,
                             double noise_var);

double sum_rate(const CMatrix& h, const PowerVector& p, const Precoder& v, double noise_var);

/// Interference-free closed form for ZF precoders.
double zf_sum_rate(const CMatrix& h, const PowerVector& p, const Precoder& v_zf,
                   double noise_var);

/// MRT closed form, needs no precoder.
double mrt_sum_rate(const CMatrix& h, const PowerVector& p, double noise_var);

/// (1/K) tr(P V V^H).
double total_power(const PowerVector& p, const Precoder& v, std::size_t k_users);

/// (p_m / K) [V V^H]_{mm}.
double per_antenna_power(const PowerVector& p, const Precoder& v, std::size_t k_users,
                         std::size_t m);

double energy_efficiency(double rate, double total_pow);

/// Large-array SINR estimate 1/((K-1) + K M sigma^2 / tr(P)).
double approx_sinr(const PowerVector& p, std::size_t k_users, std::size_t m_antennas,
                   double noise_var);

/// Interference-free (zero-forcing) variant tr(P) / (K M sigma^2).
double approx_sinr_zf(const PowerVector& p, std::size_t k_users, std::size_t m_antennas,
                      double noise_var);

LinkMetrics link_metrics(const CMatrix& h, const PowerVector& p, const Precoder& v,
                         double noise_var);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x);

}  // namespace qpower
