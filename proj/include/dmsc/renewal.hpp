#pragma once

// Stationary {0,1}-valued renewal on/off processes.
//
// A timeline is a delayed renewal sequence S_1 = D ~ (G)_e, S_j = S_{j-1} + Z_j
// with Z_j ~ G, and one Bernoulli(p) mark per epoch [S_j, S_{j+1}) (S_0 = 0).
// The state at time t is the mark of the epoch containing t.

#include "dmsc/error.hpp"
#include "dmsc/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dmsc {

/// Hoelder data (gamma, c) of the interarrival family plus the witness a with G(a) <= 1/2.
struct Regularity {
    double gamma = 1.0;
    double c = 1.0;
    double a = 1.0;
};

/// Interarrival law G with finite positive mean.
class LifetimeDistribution {
public:
    virtual ~LifetimeDistribution() = default;

    virtual std::string name() const = 0;
    virtual double cdf(double x) const = 0;
    virtual double mean() const = 0;
    virtual double sample(Rng& rng) const = 0;

    /// (G)_e(x) = (1/mu) int_0^x (1 - G(y)) dy.  Default: adaptive Gauss-Kronrod.
    virtual double equilibrium_cdf(double x) const {
        if (x <= 0.0) return 0.0;
        const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [this](double y) { return 1.0 - cdf(y); }, 0.0, x, 10, 1e-13);
        return std::min(1.0, integral / mean());
    }

    /// Draw from (G)_e.  Default: inverse of equilibrium_cdf to 1e-10, by
    /// Newton steps (density (1 - G)/mu) kept inside a bisection bracket.
    virtual double equilibrium_sample(Rng& rng) const {
        const double u = rng.uniform_open();
        const double mu = mean();
        const auto survival = [this](double y) { return 1.0 - cdf(y); };
        const auto increment = [&](double a, double b) {
            return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(survival, a, b, 4,
                                                                                 1e-12) / mu;
        };
        const auto panel = [&](double a, double b) {
            return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(survival, a, b, 8,
                                                                                 1e-12) / mu;
        };
        double lo = 0.0, flo = 0.0;
        double hi = std::max(mu, 1e-12);
        double fhi = panel(0.0, hi);
        while (fhi < u) {
            lo = hi;
            flo = fhi;
            hi *= 2.0;
            if (!std::isfinite(hi)) throw NonFiniteSample("equilibrium inverse diverged");
            fhi = flo + panel(lo, hi);
        }
        double x = lo, fx = flo;
        for (int iter = 0; iter < 200 && hi - lo > 1e-10; ++iter) {
            const double density = (1.0 - cdf(x)) / mu;
            double next = density > 0.0 ? x + (u - fx) / density : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            const double fnext = fx + (next >= x ? increment(x, next) : -increment(next, x));
            if (std::abs(next - x) <= 1e-10) return next;
            (fnext < u ? lo : hi) = next;
            x = next;
            fx = fnext;
        }
        return x;
    }

    virtual std::optional<Regularity> regularity() const { return regularity_; }
    void set_regularity(Regularity r) { regularity_ = r; }

    /// Rate of a memoryless law (enables closed-form window probabilities).
    virtual std::optional<double> memoryless_rate() const { return std::nullopt; }

protected:
    std::optional<Regularity> regularity_;
};

using DistributionPtr = std::shared_ptr<const LifetimeDistribution>;

class ExponentialDistribution final : public LifetimeDistribution {
public:
    explicit ExponentialDistribution(double rate) : rate_(rate) {
        if (!(rate > 0.0) || !std::isfinite(rate))
            throw InvalidArgument("exponential rate must be positive and finite");
        regularity_ = Regularity{1.0, rate_, std::log(2.0) / rate_};
    }

    std::string name() const override { return "exponential"; }
    double rate() const noexcept { return rate_; }
    double cdf(double x) const override { return x <= 0.0 ? 0.0 : -std::expm1(-rate_ * x); }
    double mean() const override { return 1.0 / rate_; }
    double sample(Rng& rng) const override { return -std::log(rng.uniform_open()) / rate_; }
    // Memoryless: (G)_e = G.
    double equilibrium_cdf(double x) const override { return cdf(x); }
    double equilibrium_sample(Rng& rng) const override { return sample(rng); }
    std::optional<double> memoryless_rate() const override { return rate_; }

private:
    double rate_;
};

class UniformDistribution final : public LifetimeDistribution {
public:
    explicit UniformDistribution(double b) : b_(b) {
        if (!(b > 0.0) || !std::isfinite(b))
            throw InvalidArgument("uniform upper bound must be positive and finite");
        regularity_ = Regularity{1.0, 1.0 / b_, b_ / 2.0};
    }

    std::string name() const override { return "uniform"; }
    double upper() const noexcept { return b_; }
    double cdf(double x) const override { return std::clamp(x / b_, 0.0, 1.0); }
    double mean() const override { return b_ / 2.0; }
    double sample(Rng& rng) const override { return b_ * rng.uniform_open(); }
    double equilibrium_cdf(double x) const override {
        if (x <= 0.0) return 0.0;
        if (x >= b_) return 1.0;
        const double r = x / b_;
        return 2.0 * r - r * r;
    }
    double equilibrium_sample(Rng& rng) const override {
        return b_ * (1.0 - std::sqrt(1.0 - rng.uniform_open()));
    }

private:
    double b_;
};

/// One face's on/off sample path on [0, horizon].
class OnOffTimeline {
public:
    OnOffTimeline() = default;

    /// `marks` has one entry per epoch: marks[0] covers [0, arrivals[0]).
    OnOffTimeline(std::vector<double> arrivals, std::vector<std::uint8_t> marks, double p,
                  double horizon)
        : arrivals_(std::move(arrivals)), marks_(std::move(marks)), p_(p), horizon_(horizon) {
        if (marks_.size() != arrivals_.size() + 1)
            throw InvalidArgument("timeline needs exactly one mark per epoch");
        for (std::size_t j = 0; j < arrivals_.size(); ++j) {
            if (!(arrivals_[j] > (j == 0 ? 0.0 : arrivals_[j - 1])))
                throw InvalidArgument("timeline arrivals must be positive and strictly increasing");
        }
        if (!(horizon_ > 0.0)) throw InvalidArgument("timeline horizon must be positive");
    }

    const std::vector<double>& arrivals() const noexcept { return arrivals_; }
    const std::vector<std::uint8_t>& marks() const noexcept { return marks_; }
    double probability() const noexcept { return p_; }
    double horizon() const noexcept { return horizon_; }

    /// N(t): number of arrivals <= t.
    std::size_t renewals_until(double t) const {
        return static_cast<std::size_t>(
            std::upper_bound(arrivals_.begin(), arrivals_.end(), t) - arrivals_.begin());
    }

    /// Delta(t) = I_{N(t)}; right-continuous.
    bool state_at(double t) const {
        if (t > horizon_) throw OutOfHorizon("t = " + std::to_string(t) + " exceeds horizon");
        if (t < 0.0) throw InvalidArgument("state_at requires t >= 0");
        return marks_[renewals_until(t)] != 0;
    }

    /// Arrival times within [0, horizon] at which the mark changes.
    std::vector<double> toggle_times() const {
        std::vector<double> out;
        for (std::size_t j = 0; j < arrivals_.size() && arrivals_[j] <= horizon_; ++j)
            if (marks_[j + 1] != marks_[j]) out.push_back(arrivals_[j]);
        return out;
    }

    /// Whether the state is 1 somewhere (any = true) or everywhere (any = false) on [0, w].
    bool on_in_window(double w, bool any) const {
        const std::size_t last = renewals_until(w);
        for (std::size_t j = 0; j <= last; ++j) {
            if (any && marks_[j]) return true;
            if (!any && !marks_[j]) return false;
        }
        return !any;
    }

private:
    std::vector<double> arrivals_;
    std::vector<std::uint8_t> marks_;
    double p_ = 0.0;
    double horizon_ = 1.0;
};

inline void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(what) + " must be in [0, 1]");
}

inline double checked_sample(double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw NonFiniteSample("lifetime sampler returned " + std::to_string(x));
    return x;
}

/// Samples one stationary timeline; stops at the first arrival beyond `horizon`.
inline OnOffTimeline sample_timeline(const LifetimeDistribution& dist, double p, double horizon,
                                     Rng& rng) {
    check_probability(p, "on-probability");
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    std::vector<double> arrivals;
    double s = checked_sample(dist.equilibrium_sample(rng));
    arrivals.push_back(s);
    while (s <= horizon) {
        s += checked_sample(dist.sample(rng));
        arrivals.push_back(s);
    }
    std::vector<std::uint8_t> marks(arrivals.size() + 1);
    if (p >= 1.0) {
        std::fill(marks.begin(), marks.end(), std::uint8_t{1});
    } else if (p > 0.0) {
        for (auto& m : marks) m = rng.bernoulli(p) ? 1 : 0;
    }
    return OnOffTimeline(std::move(arrivals), std::move(marks), p, horizon);
}

/// P(Delta(t) = 1 | Delta(0) = 1) = 1 - (1 - p) (G)_e(t).
inline double cond_on_probability(const LifetimeDistribution& dist, double p, double t) {
    check_probability(p, "on-probability");
    if (t < 0.0) throw InvalidArgument("t must be >= 0");
    return 1.0 - (1.0 - p) * dist.equilibrium_cdf(t);
}

/// Upper bound p (1 + (1 - p) (G)_e(T) / (1 - G(T))) on P(sup_{[0,T]} Delta = 1).
inline double sup_on_probability_bound(const LifetimeDistribution& dist, double p, double T) {
    check_probability(p, "on-probability");
    const double tail = 1.0 - dist.cdf(T);
    if (tail <= 0.0) throw DenominatorVanishes("G(T) = 1");
    return p * (1.0 + (1.0 - p) * dist.equilibrium_cdf(T) / tail);
}

struct TripleBounds {
    double off_on_off = 0.0; ///< bound on P(Delta(r)=0, Delta(s)=1, Delta(t)=0)
    double on_off_on = 0.0;  ///< bound on P(Delta(r)=1, Delta(s)=0, Delta(t)=1)
};

inline TripleBounds triple_probability_bounds(const LifetimeDistribution& dist, double p, double r,
                                              double s, double t) {
    check_probability(p, "on-probability");
    if (!(0.0 <= r && r < s && s < t && t <= 1.0))
        throw InvalidArgument("triple bounds need 0 <= r < s < t <= 1");
    const auto reg = dist.regularity();
    if (!reg) throw MissingRegularityData(dist.name() + " declares no (c, gamma, a)");
    const double base = 2.0 * reg->c / reg->a * std::pow(t - r, 1.0 + reg->gamma);
    return {base * p, base * p * p};
}

enum class WindowMode { Sup, Inf };

/// P(sup_{[0,w]} Delta = 1) or P(inf_{[0,w]} Delta = 1).  Closed form for a
/// memoryless G (the renewal process is then Poisson); otherwise the
/// empirical frequency over `mc_samples` timelines drawn from `rng`.
inline double window_on_probability(const LifetimeDistribution& dist, double p, double w,
                                    WindowMode mode, Rng& rng, std::size_t mc_samples = 100000) {
    check_probability(p, "on-probability");
    if (w < 0.0) throw InvalidArgument("window length must be >= 0");
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    if (w == 0.0) return p;
    if (const auto rate = dist.memoryless_rate()) {
        // E[x^K] = exp(-rate w (1 - x)) for K ~ Poisson(rate w).
        if (mode == WindowMode::Sup) return p + (1.0 - p) * (1.0 - std::exp(-*rate * w * p));
        return p * std::exp(-*rate * w * (1.0 - p));
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < mc_samples; ++i) {
        const auto tl = sample_timeline(dist, p, w, rng);
        hits += tl.on_in_window(w, mode == WindowMode::Sup) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(mc_samples);
}

} // namespace dmsc
