#pragma once

// Exponent sequence alpha (p_i = n^{-alpha_i}) and the combinatorics derived
// from it: psi_j, tau_j, the lowest random dimension q, the critical
// dimension k, M(alpha) and M_1(alpha).
//
// Extended reals are plain doubles with +/-infinity.  Infinity absorbs
// addition and positive scaling; zero binomial weights are skipped so that
// 0 * inf never occurs.

#include "dmsc/combinatorics.hpp"
#include "dmsc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace dmsc {

using ExtendedReal = double;

inline constexpr ExtendedReal kInfinity = std::numeric_limits<double>::infinity();

enum class AlphaTail { Zero, Infinity };

/// alpha = (alpha_1, alpha_2, ...): explicit entries followed by a constant tail of 0 or inf.
class AlphaSequence {
public:
    AlphaSequence(std::vector<ExtendedReal> entries, AlphaTail tail)
        : entries_(std::move(entries)), tail_(tail) {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const double a = entries_[i];
            if (std::isnan(a) || a < 0.0)
                throw InvalidArgument("alpha_" + std::to_string(i + 1) + " must be in [0, inf]");
        }
        const bool any_positive =
            tail_ == AlphaTail::Infinity ||
            std::any_of(entries_.begin(), entries_.end(), [](double a) { return a > 0.0; });
        if (!any_positive)
            throw InvalidArgument("alpha has no positive entry; q is undefined");
    }

    /// alpha_i for i >= 1 (1-based, as in the model).
    ExtendedReal operator[](int i) const {
        if (i < 1) throw InvalidArgument("alpha index must be >= 1");
        if (static_cast<std::size_t>(i) <= entries_.size()) return entries_[i - 1];
        return tail_ == AlphaTail::Zero ? 0.0 : kInfinity;
    }

    int length() const noexcept { return static_cast<int>(entries_.size()); }
    AlphaTail tail() const noexcept { return tail_; }
    const std::vector<ExtendedReal>& entries() const noexcept { return entries_; }

    /// q = min{ i >= 1 : alpha_i > 0 }.
    int q() const noexcept {
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i] > 0.0) return static_cast<int>(i) + 1;
        return length() + 1; // tail must be inf here
    }

private:
    std::vector<ExtendedReal> entries_;
    AlphaTail tail_;
};

/// psi_j = sum_{i=1}^{j} C(j, i) alpha_i, j >= 1.
inline ExtendedReal psi(const AlphaSequence& alpha, int j) {
    if (j < 1) throw InvalidArgument("psi requires j >= 1");
    ExtendedReal sum = 0.0;
    for (int i = 1; i <= j; ++i) {
        const double a = alpha[i];
        if (a == 0.0) continue;
        sum += binomial(j, i) * a;
    }
    return sum;
}

/// tau_j = j + 1 - sum_{i=1}^{j} C(j+1, i+1) alpha_i, with tau_{-1} = 0.
inline ExtendedReal tau(const AlphaSequence& alpha, int j) {
    if (j < -1) throw InvalidArgument("tau requires j >= -1");
    if (j == -1) return 0.0;
    ExtendedReal sum = 0.0;
    for (int i = 1; i <= j; ++i) {
        const double a = alpha[i];
        if (a == 0.0) continue;
        sum += binomial(j + 1, i + 1) * a;
    }
    return static_cast<double>(j + 1) - sum;
}

/// M(alpha) = min{ i : tau_i < 0 }.
inline int m_alpha(const AlphaSequence& alpha) {
    constexpr int kSearchLimit = 1 << 16;
    for (int i = 0; i < kSearchLimit; ++i)
        if (tau(alpha, i) < 0.0) return i;
    throw InvalidArgument("tau_i never becomes negative within the search limit");
}

/// p_i = n^{-alpha_i}; exactly 1 for alpha_i = 0 and exactly 0 for alpha_i = inf.
inline double face_probability(const AlphaSequence& alpha, int i, int n) {
    if (i < 1) throw InvalidArgument("face_probability requires i >= 1");
    if (n < 2) throw InvalidArgument("face_probability requires n >= 2");
    const double a = alpha[i];
    if (a == 0.0) return 1.0;
    if (std::isinf(a)) return 0.0;
    return std::pow(static_cast<double>(n), -a);
}

struct RegimeReport {
    int q = 1;
    int horizon = 2; ///< J: psi and tau are materialized for indices <= J
    std::vector<ExtendedReal> psi_values; ///< psi_values[j-1] = psi_j, j = 1..J
    std::vector<ExtendedReal> tau_values; ///< tau_values[j] = tau_j, j = 0..J
    std::optional<int> critical_k;
    int m_alpha = 0;
    std::optional<int> m1_alpha;
    bool basic_assumption_holds = false;
    bool sharp_drop_holds = false;

    ExtendedReal psi_at(int j) const { return psi_values.at(static_cast<std::size_t>(j - 1)); }
    ExtendedReal tau_at(int j) const {
        if (j == -1) return 0.0;
        return tau_values.at(static_cast<std::size_t>(j));
    }
};

/// Fills a RegimeReport.  `min_horizon` is a lower bound on J; J is raised to
/// max(M(alpha) + 2, explicit length) when that is larger.
inline RegimeReport detect_regime(const AlphaSequence& alpha, int min_horizon = 2) {
    if (min_horizon < 2) throw InvalidArgument("regime horizon J must be >= 2");
    RegimeReport r;
    r.q = alpha.q();
    r.m_alpha = dmsc::m_alpha(alpha);
    r.horizon = std::max({min_horizon, r.m_alpha + 2, alpha.length()});

    r.psi_values.reserve(static_cast<std::size_t>(r.horizon));
    for (int j = 1; j <= r.horizon; ++j) {
        const ExtendedReal v = psi(alpha, j);
        if (std::abs(v - 1.0) <= 1e-12)
            throw BoundaryDegeneracy("psi_" + std::to_string(j) +
                                     " = 1: alpha lies on a regime boundary");
        r.psi_values.push_back(v);
    }
    r.tau_values.reserve(static_cast<std::size_t>(r.horizon) + 1);
    for (int j = 0; j <= r.horizon; ++j) r.tau_values.push_back(tau(alpha, j));

    for (int j = r.q; j < r.horizon; ++j) {
        if (r.psi_at(j) < 1.0 && 1.0 < r.psi_at(j + 1)) {
            r.critical_k = j;
            break;
        }
    }
    r.basic_assumption_holds = r.critical_k.has_value();

    if (r.critical_k) {
        const int k = *r.critical_k;
        const double tq = r.tau_at(r.q);
        for (int i = k + 1; i <= r.m_alpha; ++i) {
            if (r.tau_at(i) < tq) {
                r.m1_alpha = i;
                break;
            }
        }
        const double next = r.tau_at(k + 1);
        r.sharp_drop_holds = std::isinf(next) ? next < 0 : r.tau_at(k) - tq / 2.0 > next;
    }
    return r;
}

} // namespace dmsc
