#include "dmsc/complex.hpp"
#include "dmsc/homology.hpp"

#include <gtest/gtest.h>

#include <random>

namespace dmsc {
namespace {

using Betti = std::vector<std::int64_t>;

SimplicialComplex hollow_triangle(Vertex a = 0, Vertex b = 1, Vertex c = 2) {
    return SimplicialComplex::closure_of({FaceId{a, b}, FaceId{b, c}, FaceId{a, c}});
}

SimplicialComplex full_simplex(Vertex m) {
    std::vector<Vertex> v(m);
    std::iota(v.begin(), v.end(), 0);
    return SimplicialComplex::closure_of({FaceId(v)});
}

SimplicialComplex projective_plane() {
    return SimplicialComplex::closure_of({FaceId{0, 1, 2}, FaceId{0, 2, 3}, FaceId{0, 3, 4}, FaceId{0, 4, 5},
                                          FaceId{0, 1, 5}, FaceId{1, 2, 4}, FaceId{2, 3, 5}, FaceId{1, 3, 4},
                                          FaceId{2, 4, 5}, FaceId{1, 3, 5}});
}

// Random complex: closure of random generators of mixed dimension.
SimplicialComplex random_closure(std::mt19937_64& gen, int n) {
    std::uniform_int_distribution<int> count(1, 8), size(2, 4);
    std::vector<FaceId> gens;
    const int g = count(gen);
    for (int a = 0; a < g; ++a) {
        std::vector<Vertex> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), gen);
        all.resize(static_cast<std::size_t>(std::min(size(gen), n)));
        std::sort(all.begin(), all.end());
        gens.emplace_back(all);
    }
    return SimplicialComplex::closure_of(gens);
}

TEST(BettiTest, examples)
{
    const auto circle = betti_numbers(hollow_triangle());
    EXPECT_EQ(circle.betti, (Betti{0, 1}));
    EXPECT_EQ(circle.chi_faces, 0);
    EXPECT_EQ(circle.chi_betti, 0);

    const auto ball = betti_numbers(full_simplex(4));
    EXPECT_EQ(ball.betti, (Betti{0, 0, 0, 0}));
    EXPECT_EQ(ball.chi_betti, 1);

    auto sphere_levels = full_simplex(4).levels();
    sphere_levels.pop_back();
    const auto sphere = betti_numbers(SimplicialComplex(sphere_levels));
    EXPECT_EQ(sphere.betti, (Betti{0, 0, 1}));
    EXPECT_EQ(sphere.chi_faces, 2);

    const auto empty = betti_numbers(SimplicialComplex{});
    EXPECT_TRUE(empty.betti.empty());
    EXPECT_EQ(empty.chi_betti, empty.chi_faces);
}

TEST(BettiTest, two_disjoint_circles_and_points)
{
    auto levels = hollow_triangle(0, 1, 2).levels();
    const auto other = hollow_triangle(3, 4, 5).levels();
    for (std::size_t d = 0; d < levels.size(); ++d)
        levels[d].insert(levels[d].end(), other[d].begin(), other[d].end());
    const SimplicialComplex x(levels);
    const auto b = betti_numbers(x);
    EXPECT_EQ(b.betti, (Betti{1, 2}));
    EXPECT_EQ(euler_characteristic(x, EulerRoute::Faces), 0);
    EXPECT_EQ(euler_characteristic(x, EulerRoute::Betti), 0);

    const SimplicialComplex points({{FaceId{0}, FaceId{1}, FaceId{2}, FaceId{3}, FaceId{4}}});
    EXPECT_EQ(euler_characteristic(points, EulerRoute::Betti), 5);
    EXPECT_EQ(betti_numbers(points).at(0), 4);
}

TEST(BettiTest, torsion_is_detected)
{
    const auto rp2 = projective_plane();
    EXPECT_EQ(rp2.euler_characteristic(), 1);
    EXPECT_EQ(betti_numbers(rp2, Field::GF2).betti, (Betti{0, 1, 1}));
    EXPECT_EQ(betti_numbers(rp2, Field::Rational).betti, (Betti{0, 0, 0}));
    EXPECT_TRUE(has_field_discrepancy(rp2));
    EXPECT_FALSE(has_field_discrepancy(hollow_triangle()));
}

TEST(BettiTest, truncated_snapshot_rejected)
{
    ComplexSnapshot s{4, 0.0, full_simplex(3), true};
    EXPECT_THROW(betti_numbers(s), TruncatedSnapshot);
    EXPECT_THROW(euler_characteristic(s, EulerRoute::Faces), TruncatedSnapshot);
    EXPECT_NO_THROW(betti_numbers(s, Field::GF2, false));
}

TEST(BoundaryTest, augmentation_and_rank)
{
    const auto x = hollow_triangle();
    const auto d0 = boundary_matrix(x, 0);
    EXPECT_EQ(d0.rows, 1u);
    EXPECT_EQ(d0.cols, 3u);
    EXPECT_EQ(matrix_rank(d0, Field::GF2), 1u);
    const auto d1 = boundary_matrix(x, 1);
    EXPECT_EQ(matrix_rank(d1, Field::GF2), 2u);
    EXPECT_EQ(matrix_rank(d1, Field::Rational), 2u);
    EXPECT_TRUE(composite_is_zero(d0, d1, Field::Rational));
}

class RandomComplexTest : public ::testing::Test {
protected:
    static std::vector<SimplicialComplex> corpus() {
        std::vector<SimplicialComplex> out;
        std::mt19937_64 gen(31337);
        for (int r = 0; r < 150; ++r) out.push_back(random_closure(gen, 4 + r % 6));
        const DistributionSchedule exp1(std::make_shared<ExponentialDistribution>(1.0));
        ModelOptions exact{std::nullopt, true};
        for (std::uint64_t s = 0; s < 40; ++s) {
            for (const auto& alpha : {AlphaSequence({0.9}, AlphaTail::Zero), AlphaSequence({0.0, 0.6}, AlphaTail::Infinity),
                                      AlphaSequence({0.4, 0.3}, AlphaTail::Zero)}) {
                const auto m = build_model(5 + static_cast<int>(s % 5), alpha, exp1, 1.0, s, exact);
                out.push_back(snapshot_at(m, 0.5).complex);
            }
        }
        return out;
    }
};

TEST_F(RandomComplexTest, boundary_of_boundary_vanishes)
{
    for (const auto& x : corpus())
        for (int i = 1; i <= x.dimension(); ++i)
            for (auto f : {Field::GF2, Field::Rational})
                EXPECT_TRUE(composite_is_zero(boundary_matrix(x, i - 1), boundary_matrix(x, i), f));
}

TEST_F(RandomComplexTest, euler_and_morse)
{
    for (const auto& x : corpus()) {
        for (auto f : {Field::GF2, Field::Rational}) {
            const auto b = betti_numbers(x, f);
            EXPECT_EQ(b.chi_faces, b.chi_betti);
            EXPECT_TRUE(morse_sandwich_holds(x, b));
        }
    }
}

TEST_F(RandomComplexTest, fields_agree_without_torsion)
{
    // small random closures and model snapshots carry no torsion
    for (const auto& x : corpus()) EXPECT_FALSE(has_field_discrepancy(x));
}

TEST_F(RandomComplexTest, decomposition_matches_global)
{
    for (const auto& x : corpus()) {
        const auto b = betti_numbers(x);
        for (int l = 1; l <= 3; ++l) {
            EXPECT_EQ(betti_via_decomposition(x, l), b.at(l));
            const auto dec = scc_decomposition(x, l);
            std::size_t faces = 0;
            for (const auto& c : dec.components) faces += c.complex.count(l);
            EXPECT_EQ(faces, x.count(l));
            for (std::size_t a = 0; a < dec.components.size(); ++a) {
                for (std::size_t c = a + 1; c < dec.components.size(); ++c) {
                    std::vector<Vertex> common;
                    const auto& va = dec.components[a].vertex_support;
                    const auto& vc = dec.components[c].vertex_support;
                    std::set_intersection(va.begin(), va.end(), vc.begin(), vc.end(), std::back_inserter(common));
                    if (common.size() >= static_cast<std::size_t>(l)) {
                        // a shared (l-1)-face would merge the two classes
                        const auto& xa = dec.components[a].complex;
                        for (const auto& f : xa.faces(l - 1)) EXPECT_FALSE(dec.components[c].complex.contains(f));
                    }
                }
            }
        }
    }
}

TEST(SccTest, examples)
{
    auto levels = hollow_triangle(0, 1, 2).levels();
    const auto other = hollow_triangle(3, 4, 5).levels();
    for (std::size_t d = 0; d < levels.size(); ++d)
        levels[d].insert(levels[d].end(), other[d].begin(), other[d].end());
    const auto dec = scc_decomposition(SimplicialComplex(levels), 1);
    ASSERT_EQ(dec.components.size(), 2u);
    EXPECT_EQ(dec.components[0].betti, 1);
    EXPECT_EQ(dec.components[1].betti, 1);

    EXPECT_EQ(scc_decomposition(full_simplex(4), 1).components.size(), 1u);

    auto bow = hollow_triangle(0, 1, 2).levels();
    const auto wing = hollow_triangle(0, 3, 4).levels();
    for (std::size_t d = 0; d < bow.size(); ++d) bow[d].insert(bow[d].end(), wing[d].begin(), wing[d].end());
    const auto bowtie = scc_decomposition(SimplicialComplex(bow), 1);
    ASSERT_EQ(bowtie.components.size(), 1u);
    EXPECT_EQ(bowtie.components[0].betti, 2);

    EXPECT_EQ(betti_via_decomposition(hollow_triangle(), 2), 0);
}

TEST(LinkTest, examples)
{
    const auto lk = link_of(hollow_triangle(), FaceId{0});
    EXPECT_EQ(lk.faces(0), (std::vector<FaceId>{FaceId{1}, FaceId{2}}));
    EXPECT_EQ(lk.dimension(), 0);

    const auto e = link_of(full_simplex(4), FaceId{0, 1});
    EXPECT_EQ(e.face_counts(), (Betti{2, 1}));
    EXPECT_TRUE(e.contains(FaceId{2, 3}));

    EXPECT_THROW(link_of(hollow_triangle(), FaceId{0, 1, 2}), FaceAbsent);
}

TEST(SpectralTest, examples)
{
    for (std::size_t m = 3; m <= 12; ++m)
        EXPECT_NEAR(normalized_laplacian_lambda2(complete_graph(m)), double(m) / double(m - 1), 1e-9);
    Graph two_edges{{0, 1, 2, 3}, {{0, 1}, {2, 3}}};
    EXPECT_NEAR(normalized_laplacian_lambda2(two_edges), 0.0, 1e-12);
    EXPECT_FALSE(is_connected(two_edges));
    Graph path{{0, 1, 2}, {{0, 1}, {1, 2}}};
    EXPECT_NEAR(normalized_laplacian_lambda2(path), 1.0, 1e-12);
    Graph lonely{{0, 1, 2}, {{0, 1}}};
    EXPECT_THROW(normalized_laplacian_lambda2(lonely), IsolatedVertex);
}

TEST(VanishingTest, examples)
{
    const auto full = vanishing_diagnostic(full_simplex(5), 2);
    EXPECT_TRUE(full.pure);
    EXPECT_TRUE(full.theorem_applies);
    EXPECT_EQ(full.links.size(), 5u);
    for (const auto& lc : full.links) EXPECT_NEAR(*lc.lambda2, 4.0 / 3.0, 1e-9);
    EXPECT_EQ(full.observed_betti, 0);
    EXPECT_TRUE(full.consistent);

    const auto circle = vanishing_diagnostic(hollow_triangle(), 2);
    EXPECT_FALSE(circle.pure);
    EXPECT_FALSE(circle.theorem_applies);
    EXPECT_EQ(circle.observed_betti, 1);
    EXPECT_EQ(circle.free_faces.size(), 3u);

    // a triangle with a dangling edge: free 1-face {2,3}
    const auto dangling = SimplicialComplex::closure_of({FaceId{0, 1, 2}, FaceId{2, 3}});
    const auto rep = vanishing_diagnostic(dangling, 2);
    EXPECT_FALSE(rep.pure);
    EXPECT_EQ(rep.free_faces, (std::vector<FaceId>{FaceId{2, 3}}));
    EXPECT_THROW(vanishing_diagnostic(dangling, 1), InvalidArgument);
}

TEST(VanishingTest, never_contradicted_on_random_complexes)
{
    std::mt19937_64 gen(5);
    for (int r = 0; r < 200; ++r) {
        const auto x = random_closure(gen, 7);
        for (int k = 2; k <= 3; ++k) EXPECT_TRUE(vanishing_diagnostic(x, k).consistent);
    }
}

} // namespace
} // namespace dmsc
