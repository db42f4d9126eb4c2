#include "dmsc/params.hpp"

#include <gtest/gtest.h>

#include <random>

namespace dmsc {
namespace {

AlphaSequence clique(double a1) { return AlphaSequence({a1}, AlphaTail::Zero); }
AlphaSequence linial_meshulam() { return AlphaSequence({0.0, 0.6}, AlphaTail::Infinity); }

// Independent oracle: sum_{i<=j} C(j,i) a_i with a Pascal-triangle binomial.
double pascal(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    std::vector<double> row{1.0};
    for (int r = 1; r <= n; ++r) {
        std::vector<double> next(static_cast<std::size_t>(r) + 1, 1.0);
        for (int c = 1; c < r; ++c)
            next[static_cast<std::size_t>(c)] = row[static_cast<std::size_t>(c - 1)] + row[static_cast<std::size_t>(c)];
        row = std::move(next);
    }
    return row[static_cast<std::size_t>(k)];
}

TEST(AlphaSequenceTest, rejects_invalid_entries)
{
    EXPECT_THROW(AlphaSequence({-0.1}, AlphaTail::Zero), InvalidArgument);
    EXPECT_THROW(AlphaSequence({0.0, 0.0}, AlphaTail::Zero), InvalidArgument);
    EXPECT_THROW(AlphaSequence({std::nan("")}, AlphaTail::Zero), InvalidArgument);
    EXPECT_NO_THROW(AlphaSequence({0.0, 0.0}, AlphaTail::Infinity));
}

TEST(AlphaSequenceTest, tail_and_q)
{
    const auto lm = linial_meshulam();
    EXPECT_EQ(lm[1], 0.0);
    EXPECT_EQ(lm[2], 0.6);
    EXPECT_TRUE(std::isinf(lm[3]));
    EXPECT_EQ(lm.q(), 2);
    EXPECT_EQ(clique(0.9)[7], 0.0);
    EXPECT_EQ(AlphaSequence({0.0, 0.0}, AlphaTail::Infinity).q(), 3);
}

TEST(PsiTauTest, examples)
{
    EXPECT_DOUBLE_EQ(psi(clique(0.9), 2), 1.8);
    EXPECT_DOUBLE_EQ(psi(linial_meshulam(), 2), 0.6);
    EXPECT_TRUE(std::isinf(psi(linial_meshulam(), 3)));

    EXPECT_DOUBLE_EQ(tau(clique(0.9), 1), 1.1);
    EXPECT_DOUBLE_EQ(tau(clique(0.9), 3), 4.0 - 6.0 * 0.9);
    EXPECT_NEAR(tau(clique(0.9), 3), -1.4, 1e-12);
    EXPECT_DOUBLE_EQ(tau(linial_meshulam(), 2), 2.4);
    EXPECT_EQ(tau(linial_meshulam(), 3), -kInfinity);
    EXPECT_EQ(tau(clique(0.9), -1), 0.0);
    EXPECT_EQ(tau(clique(0.9), 0), 1.0);
}

TEST(FaceProbabilityTest, examples)
{
    EXPECT_NEAR(face_probability(clique(0.9), 1, 12), 0.10684073783223462, 1e-15);
    EXPECT_EQ(face_probability(clique(0.9), 2, 12), 1.0);
    EXPECT_EQ(face_probability(linial_meshulam(), 3, 5), 0.0);
    EXPECT_THROW(face_probability(clique(0.9), 1, 1), InvalidArgument);
}

TEST(RegimeTest, clique)
{
    const auto r = detect_regime(clique(0.9));
    EXPECT_EQ(r.q, 1);
    ASSERT_TRUE(r.critical_k);
    EXPECT_EQ(*r.critical_k, 1);
    EXPECT_EQ(r.m_alpha, 3);
    ASSERT_TRUE(r.m1_alpha);
    EXPECT_EQ(*r.m1_alpha, 2);
    EXPECT_TRUE(r.basic_assumption_holds);
    EXPECT_TRUE(r.sharp_drop_holds);
    // 0.55 > 0.3
    EXPECT_NEAR(r.tau_at(1) - r.tau_at(1) / 2, 0.55, 1e-12);
    EXPECT_NEAR(r.tau_at(2), 0.3, 1e-12);
    EXPECT_GE(r.horizon, r.m_alpha + 2);
}

TEST(RegimeTest, linial_meshulam)
{
    const auto r = detect_regime(linial_meshulam());
    EXPECT_EQ(r.q, 2);
    ASSERT_TRUE(r.critical_k);
    EXPECT_EQ(*r.critical_k, 2);
    EXPECT_DOUBLE_EQ(r.tau_at(2), 2.4);
    EXPECT_TRUE(r.sharp_drop_holds); // tau_3 = -inf
    EXPECT_EQ(r.m_alpha, 3);
    EXPECT_EQ(*r.m1_alpha, 3);
}

TEST(RegimeTest, two_parameter)
{
    const auto r = detect_regime(AlphaSequence({0.5, 0.5}, AlphaTail::Zero));
    EXPECT_DOUBLE_EQ(r.psi_at(1), 0.5);
    EXPECT_DOUBLE_EQ(r.psi_at(2), 1.5);
    EXPECT_EQ(*r.critical_k, 1);
}

TEST(RegimeTest, knife_edge_is_rejected)
{
    EXPECT_THROW(detect_regime(clique(0.5)), BoundaryDegeneracy);
    EXPECT_THROW(detect_regime(clique(1.0 / 3.0)), BoundaryDegeneracy);
}

TEST(RegimeTest, no_critical_dimension)
{
    // alpha_1 > 1: psi_1 > 1, alpha in D_0
    const auto r = detect_regime(clique(1.5));
    EXPECT_FALSE(r.critical_k);
    EXPECT_FALSE(r.basic_assumption_holds);
    EXPECT_FALSE(r.m1_alpha);
    // alpha_q > 1 with q = 2 gives D_1 with k = 1 < q
    const auto s = detect_regime(AlphaSequence({0.0, 1.5}, AlphaTail::Zero));
    EXPECT_FALSE(s.critical_k);
}

// Random finite alphas for the property tests; entries drawn so that no psi_j hits 1.
std::vector<AlphaSequence> random_alphas(int count, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> value(0.0, 1.2);
    std::uniform_int_distribution<int> length(1, 5);
    std::bernoulli_distribution zero(0.3);
    std::vector<AlphaSequence> out;
    while (static_cast<int>(out.size()) < count) {
        std::vector<double> e(static_cast<std::size_t>(length(gen)));
        for (auto& a : e) a = zero(gen) ? 0.0 : value(gen);
        try {
            AlphaSequence alpha(e, AlphaTail::Zero);
            out.push_back(alpha);
        } catch (const InvalidArgument&) {
        }
    }
    return out;
}

TEST(RegimeProperty, psi_non_decreasing_and_matches_oracle)
{
    for (const auto& alpha : random_alphas(300, 1)) {
        for (int j = 1; j <= 10; ++j) {
            double oracle = 0.0;
            for (int i = 1; i <= j; ++i) oracle += pascal(j, i) * alpha[i];
            EXPECT_NEAR(psi(alpha, j), oracle, 1e-9 * (1 + oracle));
            if (j > 1) {
                EXPECT_LE(psi(alpha, j - 1), psi(alpha, j));
            }
        }
    }
}

TEST(RegimeProperty, below_q_values)
{
    for (const auto& alpha : random_alphas(300, 2)) {
        for (int j = 1; j < alpha.q(); ++j) {
            EXPECT_EQ(psi(alpha, j), 0.0);
            EXPECT_EQ(tau(alpha, j), j + 1.0);
        }
    }
}

TEST(RegimeProperty, gap_identity)
{
    // tau_j - tau_{j+1} - alpha_{j+1} = -1 + sum_{i<=j} C(j+1, i) alpha_i
    for (const auto& alpha : random_alphas(300, 3)) {
        for (int j = 1; j <= 8; ++j) {
            double rhs = -1.0;
            for (int i = 1; i <= j; ++i) rhs += pascal(j + 1, i) * alpha[i];
            const double lhs = tau(alpha, j) - tau(alpha, j + 1) - alpha[j + 1];
            EXPECT_NEAR(lhs, rhs, 1e-9 * (1 + std::abs(rhs)));
            if (psi(alpha, j) > 1.0) {
                EXPECT_GT(lhs, 0.0);
            }
        }
    }
}

TEST(RegimeProperty, unimodality_under_basic_assumption)
{
    int checked = 0;
    for (const auto& alpha : random_alphas(500, 4)) {
        RegimeReport r;
        try {
            r = detect_regime(alpha);
        } catch (const BoundaryDegeneracy&) {
            continue;
        }
        EXPECT_LT(r.tau_at(r.m_alpha), 0.0);
        for (int i = 0; i < r.m_alpha; ++i) EXPECT_GE(r.tau_at(i), 0.0);
        if (!r.critical_k) continue;
        ++checked;
        const int k = *r.critical_k;
        for (int j = r.q; j < k; ++j) EXPECT_LT(r.psi_at(j), r.psi_at(j + 1));
        EXPECT_LT(r.psi_at(k), 1.0);
        EXPECT_GT(r.psi_at(k + 1), 1.0);
        for (int j = r.q - 1; j < k; ++j) EXPECT_LT(r.tau_at(j), r.tau_at(j + 1));
        for (int j = k; j < r.horizon; ++j) EXPECT_GT(r.tau_at(j), r.tau_at(j + 1));
        ASSERT_TRUE(r.m1_alpha);
        EXPECT_GT(*r.m1_alpha, k);
        EXPECT_LE(*r.m1_alpha, r.m_alpha);
    }
    EXPECT_GT(checked, 50);
}

} // namespace
} // namespace dmsc
