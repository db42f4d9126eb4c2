#pragma once

// Closed-form predictions for the dynamic complex: exact and asymptotic face
// count moments, the limiting covariance R_k, the limit-theorem constants, and
// a sampler for the limiting stationary Gaussian process.

#include "dmsc/combinatorics.hpp"
#include "dmsc/complex.hpp"
#include "dmsc/error.hpp"
#include "dmsc/params.hpp"
#include "dmsc/renewal.hpp"
#include "dmsc/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace dmsc {

/// E f_j = C(n, j+1) prod_{i=1}^{j} p_i^{C(j+1, i+1)}.
inline double expected_face_count(int n, const AlphaSequence& alpha, int j) {
    if (j < 0) throw InvalidArgument("dimension must be >= 0");
    if (j + 1 > n) return 0.0;
    double log_prod = 0.0;
    for (int i = 1; i <= j; ++i) {
        const double a = alpha[i];
        if (a == 0.0) continue;
        if (std::isinf(a)) return 0.0;
        log_prod -= binomial(j + 1, i + 1) * a * std::log(static_cast<double>(n));
    }
    return binomial(n, j + 1) * std::exp(log_prod);
}

/// n^{tau_j} / (j+1)!.
inline double asymptotic_face_count(int n, const AlphaSequence& alpha, int j) {
    const double t = tau(alpha, j);
    if (std::isinf(t)) return 0.0;
    return std::pow(static_cast<double>(n), t) / factorial(j + 1);
}

/// The two asymptotic terms of Cov(f_j(s), f_j(s + lag)); the prediction is their max.
struct CovarianceTerms {
    double overlap_q = 0.0;    ///< n^{2 tau_j - tau_q} / ((q+1)! ((j-q)!)^2) (1 - (G_q)_e(lag))
    double full_overlap = 0.0; ///< n^{tau_j}/(j+1)! prod_i (1 - (1-p_i)(G_i)_e(lag))^{C(j+1,i+1)}
    double value() const { return std::max(overlap_q, full_overlap); }
};

inline CovarianceTerms asymptotic_covariance_terms(int n, const AlphaSequence& alpha,
                                                   const DistributionSchedule& dists, int j,
                                                   double lag) {
    const int q = alpha.q();
    if (j < q) throw DimensionBelowQ("covariance asymptotics need j >= q");
    if (lag < 0.0) throw InvalidArgument("lag must be >= 0");
    CovarianceTerms out;
    const double tj = tau(alpha, j);
    if (std::isinf(tj)) return out;
    const double tq = tau(alpha, q);
    const auto dq = dists.for_dimension(q);
    if (!dq) throw InvalidArgument("no distribution for dimension q");
    const double nn = static_cast<double>(n);
    out.overlap_q = std::pow(nn, 2.0 * tj - tq) /
                    (factorial(q + 1) * factorial(j - q) * factorial(j - q)) *
                    (1.0 - dq->equilibrium_cdf(lag));
    double prod = 1.0;
    for (int i = q; i <= j; ++i) {
        const double p = face_probability(alpha, i, n);
        if (p >= 1.0) continue;
        const auto di = dists.for_dimension(i);
        if (!di) throw InvalidArgument("no distribution for dimension " + std::to_string(i));
        prod *= std::pow(1.0 - (1.0 - p) * di->equilibrium_cdf(lag), binomial(j + 1, i + 1));
    }
    out.full_overlap = std::pow(nn, tj) / factorial(j + 1) * prod;
    return out;
}

inline double asymptotic_covariance(int n, const AlphaSequence& alpha,
                                    const DistributionSchedule& dists, int j, double lag) {
    return asymptotic_covariance_terms(n, alpha, dists, j, lag).value();
}

/// Critical-dimension covariance n^{2 tau_k - tau_q} / ((q+1)! ((k-q)!)^2) (1 - (G_q)_e(lag)).
inline double critical_covariance(int n, const RegimeReport& regime,
                                  const LifetimeDistribution& dist_q, double lag = 0.0) {
    if (!regime.critical_k) throw BasicAssumptionFails("alpha has no critical dimension");
    const int k = *regime.critical_k;
    const int q = regime.q;
    return std::pow(static_cast<double>(n), 2.0 * regime.tau_at(k) - regime.tau_at(q)) /
           (factorial(q + 1) * factorial(k - q) * factorial(k - q)) *
           (1.0 - dist_q.equilibrium_cdf(lag));
}

/// R_k(t) = 1 - (G_q)_e(t).
inline double limit_covariance_Rk(const LifetimeDistribution& dist_q, double t) {
    if (t < 0.0) throw InvalidArgument("t must be >= 0");
    return 1.0 - dist_q.equilibrium_cdf(t);
}

struct LimitLaw {
    int k = 1;
    int q = 1;
    double slln_euler = 0.0;     ///< lim chi / n^{tau_k} = (-1)^k / (k+1)!
    double slln_betti = 0.0;     ///< lim beta_k / n^{tau_k} = 1 / (k+1)!
    double fclt_exponent = 0.0;  ///< tau_k - tau_q / 2
    double fclt_constant = 0.0;  ///< sqrt((q+1)!) (k-q)!

    /// n^{tau_k - tau_q/2}.
    double fclt_scale(int n) const { return std::pow(static_cast<double>(n), fclt_exponent); }
};

inline LimitLaw limit_constants(const RegimeReport& regime) {
    if (!regime.critical_k || !regime.basic_assumption_holds)
        throw BasicAssumptionFails("alpha is not in D_k for any k >= q");
    LimitLaw law;
    law.k = *regime.critical_k;
    law.q = regime.q;
    law.slln_betti = 1.0 / factorial(law.k + 1);
    law.slln_euler = (law.k % 2 == 0 ? 1.0 : -1.0) * law.slln_betti;
    law.fclt_exponent = regime.tau_at(law.k) - regime.tau_at(law.q) / 2.0;
    law.fclt_constant = std::sqrt(factorial(law.q + 1)) * factorial(law.k - law.q);
    return law;
}

/// Covariance matrix [R_k(|t_a - t_b|)] on a grid.
inline Eigen::MatrixXd limit_covariance_matrix(const LifetimeDistribution& dist_q,
                                               const std::vector<double>& grid) {
    const auto m = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd cov(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
            cov(a, b) = limit_covariance_Rk(
                dist_q, std::abs(grid[static_cast<std::size_t>(a)] - grid[static_cast<std::size_t>(b)]));
    return cov;
}

/// Draws from the zero-mean stationary Gaussian process with covariance R_k on a fixed grid.
class GaussianLimitSampler {
public:
    GaussianLimitSampler(const LifetimeDistribution& dist_q, std::vector<double> grid)
        : grid_(std::move(grid)) {
        if (grid_.empty() || grid_.size() > 2000)
            throw InvalidArgument("grid must have between 1 and 2000 points");
        for (std::size_t a = 1; a < grid_.size(); ++a)
            if (grid_[a] < grid_[a - 1]) throw InvalidArgument("grid must be increasing");
        Eigen::MatrixXd cov = limit_covariance_matrix(dist_q, grid_);
        cov.diagonal().array() += 1e-10;
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw FactorizationFailure("covariance matrix is not positive semidefinite");
        factor_ = llt.matrixL();
    }

    const std::vector<double>& grid() const noexcept { return grid_; }

    std::vector<double> operator()(Rng& rng) const {
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd z(factor_.rows());
        for (Eigen::Index a = 0; a < z.size(); ++a) z(a) = normal(rng);
        const Eigen::VectorXd x = factor_ * z;
        return {x.data(), x.data() + x.size()};
    }

private:
    std::vector<double> grid_;
    Eigen::MatrixXd factor_;
};

inline std::vector<double> sample_gaussian_limit(const LifetimeDistribution& dist_q,
                                                 const std::vector<double>& grid, Rng& rng) {
    return GaussianLimitSampler(dist_q, grid)(rng);
}

/// Support-floor witnesses a_i with G_i(a_i) <= 1/2, one per dimension i = q..top.
struct SupportFloorCheck {
    std::vector<int> dimensions;
    std::vector<double> witness;
    std::vector<bool> valid;
    double max_witness = 0.0;
    bool holds = true;
};

inline SupportFloorCheck check_support_floor(const DistributionSchedule& dists, int q, int top) {
    SupportFloorCheck out;
    for (int i = q; i <= top; ++i) {
        const auto d = dists.for_dimension(i);
        if (!d) throw InvalidArgument("no distribution for dimension " + std::to_string(i));
        const auto reg = d->regularity();
        if (!reg) throw MissingRegularityData(d->name() + " declares no (c, gamma, a)");
        const bool ok = reg->a > 0.0 && d->cdf(reg->a) <= 0.5 + 1e-12;
        out.dimensions.push_back(i);
        out.witness.push_back(reg->a);
        out.valid.push_back(ok);
        out.max_witness = std::max(out.max_witness, reg->a);
        out.holds = out.holds && ok;
    }
    return out;
}

struct MomentPredictions {
    int n = 0;
    std::vector<double> exact_mean;      ///< E f_j, j = 0..J
    std::vector<double> asymptotic_mean; ///< n^{tau_j}/(j+1)!
    std::vector<double> lags;
    std::vector<std::vector<double>> covariance; ///< [j][lag], j >= q; zero below q
    std::optional<double> critical_variance;
    std::vector<double> dominance_ratio;         ///< E f_j / E f_k (empty without k)
    double tail_sum = 0.0;                       ///< sum_{j >= M(alpha)} E f_j
};

inline MomentPredictions predict_moments(int n, const AlphaSequence& alpha,
                                         const DistributionSchedule& dists,
                                         const std::vector<double>& lags = {0.0}) {
    const auto regime = detect_regime(alpha);
    MomentPredictions out;
    out.n = n;
    out.lags = lags;
    const int top = std::min(regime.horizon, n - 1);
    for (int j = 0; j <= top; ++j) {
        out.exact_mean.push_back(expected_face_count(n, alpha, j));
        out.asymptotic_mean.push_back(asymptotic_face_count(n, alpha, j));
        std::vector<double> row;
        for (double lag : lags)
            row.push_back(j >= regime.q ? asymptotic_covariance(n, alpha, dists, j, lag) : 0.0);
        out.covariance.push_back(std::move(row));
    }
    if (regime.critical_k) {
        const int k = *regime.critical_k;
        out.critical_variance = critical_covariance(n, regime, *dists.for_dimension(regime.q));
        const double ek = expected_face_count(n, alpha, k);
        for (int j = 0; j <= top; ++j) out.dominance_ratio.push_back(out.exact_mean[static_cast<std::size_t>(j)] / ek);
    }
    for (int j = regime.m_alpha; j <= n - 1; ++j) {
        out.tail_sum += expected_face_count(n, alpha, j);
    }
    return out;
}

} // namespace dmsc
