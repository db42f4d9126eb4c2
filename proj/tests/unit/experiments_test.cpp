#include "dmsc/experiments.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace dmsc {
namespace {

ExperimentConfig small_config() {
    return parse_config(Json::parse(R"({
        "n": 8, "alpha": [0.9], "distributions": [{"type": "exponential", "rate": 1.0}],
        "horizon": 2.0, "grid": [0.25, 0.5, 1.0], "replications": 6, "seed": 11
    })"));
}

TEST(ConfigTest, parses_fields)
{
    const auto c = parse_config(Json::parse(R"({
        "n_grid": [10, 20], "alpha": [0, 0.6, "inf"], "alpha_tail": "inf",
        "distributions": [{"type": "uniform", "b": 1.5}, {"type": "exponential", "rate": 2}],
        "horizon": 3, "grid": [0, 1], "replications": 4, "seed": 99, "field": "rational",
        "dim_cap": 3, "suite": "fclt", "lags": [0.5], "settings": {"slln_cap": 0.2, "windows": [0.3]}
    })"));
    EXPECT_EQ(c.n_grid, (std::vector<int>{10, 20}));
    EXPECT_EQ(c.alpha[1], 0.0);
    EXPECT_EQ(c.alpha[2], 0.6);
    EXPECT_TRUE(std::isinf(c.alpha[3]));
    EXPECT_TRUE(std::isinf(c.alpha[7]));
    EXPECT_EQ(c.field, Field::Rational);
    EXPECT_EQ(c.dim_cap, 3);
    EXPECT_EQ(c.suite, "fclt");
    EXPECT_EQ(c.settings.slln_cap, 0.2);
    EXPECT_EQ(c.settings.windows, (std::vector<double>{0.3}));
    const auto s = c.schedule();
    EXPECT_EQ(s.for_dimension(1)->name(), "uniform");
    EXPECT_EQ(s.for_dimension(5)->name(), "exponential");
    // round trip through the JSON encoder
    const auto back = parse_config(to_json(c));
    EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}

TEST(ConfigTest, rejects_bad_input)
{
    const char* bad[] = {
        R"({"n": 1})",
        R"({"n": 8, "grid": [0.5, 0.2]})",
        R"({"n": 8, "grid": [3.0], "horizon": 2})",
        R"({"n": 8, "alpha": ["x"]})",
        R"({"n": 8, "alpha": [-0.1]})",
        R"({"n": 8, "field": "z3"})",
        R"({"n": 8, "distributions": [{"type": "weibull"}]})",
        R"({"n": 8, "replications": 0})",
        R"({"n": 8, "lags": [-1]})",
        R"([1, 2])",
    };
    for (const char* text : bad) EXPECT_THROW(parse_config(Json::parse(text)), Error) << text;
    EXPECT_THROW(load_config("/nonexistent/config.json"), InvalidArgument);
}

TEST(ConfigTest, seed_override)
{
    auto c = small_config();
    ::setenv("DMSC_SEED", "12345", 1);
    apply_seed_override(c);
    EXPECT_EQ(c.seed, 12345u);
    ::setenv("DMSC_SEED", "12x", 1);
    EXPECT_THROW(apply_seed_override(c), InvalidArgument);
    ::unsetenv("DMSC_SEED");
    apply_seed_override(c);
    EXPECT_EQ(c.seed, 12345u);
}

TEST(RunReplicationsTest, order_and_determinism_across_threads)
{
    const auto work = [](std::size_t r) {
        Rng rng(derive_stream_key(7, r));
        double s = 0;
        for (int i = 0; i < 1000 + static_cast<int>(r % 7) * 300; ++i) s += rng.uniform();
        return s;
    };
    std::vector<double> reference;
    run_replications(200, 1, work, [&](std::size_t r, double v) {
        EXPECT_EQ(r, reference.size());
        reference.push_back(v);
    });
    for (unsigned t : {2u, 3u, 8u}) {
        std::vector<double> got;
        const auto s = run_replications(200, t, work, [&](std::size_t r, double v) {
            EXPECT_EQ(r, got.size());
            got.push_back(v);
        });
        EXPECT_EQ(got, reference);
        EXPECT_EQ(s.completed, 200u);
        EXPECT_LE(s.peak_buffered, 4u * t);
    }
}

TEST(RunReplicationsTest, buffer_bounded_independent_of_count)
{
    for (std::size_t count : {50u, 5000u}) {
        const auto s = run_replications(count, 4, [](std::size_t r) { return std::vector<int>(100, int(r)); },
                                        [](std::size_t, std::vector<int>&&) {});
        EXPECT_EQ(s.completed, count);
        EXPECT_LE(s.peak_buffered, 16u);
    }
}

TEST(RunReplicationsTest, failure_delivers_prefix)
{
    for (unsigned t : {1u, 4u}) {
        std::vector<std::size_t> seen;
        try {
            run_replications(100, t,
                [](std::size_t r) {
                    if (r == 37) throw NonFiniteSample("boom");
                    return r;
                },
                [&](std::size_t, std::size_t v) { seen.push_back(v); });
            FAIL() << "expected failure";
        } catch (const ReplicationFailure& e) {
            EXPECT_EQ(e.completed(), 37u);
            EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
        }
        ASSERT_EQ(seen.size(), 37u);
        for (std::size_t r = 0; r < 37; ++r) EXPECT_EQ(seen[r], r);
    }
}

TEST(MonteCarloTest, thread_count_does_not_change_results)
{
    auto c = small_config();
    c.replications = 12;
    std::string outputs[2];
    for (int i = 0; i < 2; ++i) {
        std::ostringstream out;
        write_trajectories(c, out, i == 0 ? 1u : 3u);
        outputs[i] = out.str();
    }
    EXPECT_EQ(outputs[0], outputs[1]);
    c.seed = 12;
    std::ostringstream other;
    write_trajectories(c, other, 1u);
    EXPECT_NE(other.str(), outputs[0]);
}

TEST(MonteCarloTest, csv_layout)
{
    auto c = small_config();
    c.replications = 1;
    std::ostringstream one;
    write_trajectories(c, one);
    std::istringstream lines(one.str());
    std::string header;
    std::getline(lines, header);
    const int cap = build_model(8, c.alpha, c.schedule(), c.horizon, 0).dim_cap();
    std::string expected = "t";
    for (int j = 0; j <= cap; ++j) expected += ",f_" + std::to_string(j);
    EXPECT_EQ(header, expected + ",chi");
    int rows = 0;
    for (std::string l; std::getline(lines, l);) {
        ++rows;
        EXPECT_EQ(std::count(l.begin(), l.end(), ','), cap + 2);
    }
    EXPECT_EQ(rows, 3);

    c.replications = 3;
    std::ostringstream many;
    write_trajectories(c, many);
    EXPECT_EQ(many.str().substr(0, many.str().find('\n')), "rep," + expected + ",chi");
}

TEST(MonteCarloTest, csv_failure_marker)
{
    std::ostringstream out;
    TrajectoryCsvWriter writer(out, 2, true);
    writer.write(0, FaceCountPath{{0.5}, {{3, 2, 0}}, {1}});
    writer.fail("budget", 1);
    EXPECT_NE(out.str().find("# FAILED after 1 replications: budget"), std::string::npos);
}

TEST(MonteCarloTest, replication_matches_direct_model)
{
    const auto c = small_config();
    std::vector<Replication> reps;
    run_monte_carlo(c, 8, {true, 2u}, [&](Replication&& r) { reps.push_back(std::move(r)); });
    ASSERT_EQ(reps.size(), 6u);
    for (const auto& r : reps) {
        const auto m = build_model(8, c.alpha, c.schedule(), c.horizon, replication_seed(c.seed, r.rep, 8));
        const auto direct = face_counts_path(m, c.grid);
        EXPECT_EQ(direct.counts, r.path.counts);
        EXPECT_EQ(direct.chi, r.path.chi);
        ASSERT_EQ(r.betti.size(), 3u);
        EXPECT_EQ(r.betti[1].betti, betti_numbers(snapshot_at(m, 0.5), Field::GF2, false).betti);
    }
}

TEST(StreamingTest, running_estimators_match_batch)
{
    Rng rng(3);
    std::vector<double> x, y;
    RunningMoments m;
    RunningCovariance cv;
    for (int i = 0; i < 5000; ++i) {
        const double a = rng.uniform() * 10, b = a + rng.uniform();
        x.push_back(a);
        y.push_back(b);
        m.add(a);
        cv.add(a, b);
    }
    EXPECT_NEAR(m.mean(), stats::mean(x), 1e-10);
    EXPECT_NEAR(m.variance(), stats::variance(x), 1e-9);
    EXPECT_NEAR(cv.covariance(), stats::covariance(x, y), 1e-9);
    EXPECT_NEAR(cv.correlation(), stats::correlation(x, y), 1e-12);
}

TEST(SuiteTest, moments_small_run_passes)
{
    auto c = small_config();
    c.n_grid = {12};
    c.replications = 600;
    c.grid = {0.5};
    c.lags = {0.25};
    const auto r = verify_moments(c);
    EXPECT_EQ(r.suite, "moments");
    for (const auto& q : r.quantities) {
        if (q.name.rfind("mean", 0) == 0) {
            EXPECT_TRUE(q.pass) << q.name << " z=" << q.z_score.value_or(0);
        }
    }
    ASSERT_NE(r.find("correlation f_1 lag=0.25 n=12"), nullptr);
    const auto* cov = r.find("covariance f_1 lag=0 n=12");
    ASSERT_NE(cov, nullptr);
    EXPECT_FALSE(cov->gating);
    c.replications = 100;
    EXPECT_THROW(verify_moments(c), InvalidArgument);
}

TEST(SuiteTest, report_is_reproducible)
{
    auto c = small_config();
    c.replications = 500;
    c.grid = {0.5};
    const auto a = to_json(verify_moments(c)).dump();
    c.threads = 3;
    const auto b = to_json(verify_moments(c)).dump();
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.find("runtime"), std::string::npos);
}

TEST(SuiteTest, identities_hold)
{
    auto c = small_config();
    c.n_grid = {7, 9};
    c.replications = 10;
    c.alpha = AlphaSequence({0.3, 0.1}, AlphaTail::Zero);
    c.settings.windows = {0.1};
    const auto r = verify_identities(c);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.info["snapshots"].get<int>(), 60);
    c.n_grid = {30};
    EXPECT_THROW(verify_identities(c), InvalidArgument);
}

TEST(SuiteTest, slln_and_fclt_argument_checks)
{
    auto c = small_config();
    c.n_grid = {10, 20};
    EXPECT_THROW(verify_slln(c), InvalidArgument);
    c.n_grid = {10, 30, 20};
    EXPECT_THROW(verify_slln(c), InvalidArgument);
    c.n_grid = {10, 20, 30};
    c.alpha = AlphaSequence({1.5}, AlphaTail::Zero);
    EXPECT_THROW(verify_slln(c), BasicAssumptionFails);
    c.alpha = AlphaSequence({0.9}, AlphaTail::Zero);
    const auto r = verify_slln(c);
    EXPECT_NE(r.find("chi final deviation"), nullptr);
    EXPECT_NE(r.find("beta_1 deviation inversions"), nullptr);
    c.replications = 999;
    EXPECT_THROW(verify_fclt(c), InvalidArgument);
}

TEST(SuiteTest, renewal_and_spectral)
{
    auto c = small_config();
    c.replications = 20000;
    c.distributions = {DistributionConfig{"exponential", 1.0, 1.0, std::nullopt},
                       DistributionConfig{"uniform", 1.0, 1.5, std::nullopt}};
    c.lags = {0.2, 0.7, 1.6};
    EXPECT_TRUE(verify_renewal(c, 0.35).pass);
    const auto s = verify_spectral({4, 6});
    EXPECT_TRUE(s.pass);
    EXPECT_EQ(s.quantities.size(), 10u + 4u);
}

TEST(SnapshotJsonTest, round_trip)
{
    const auto m = build_model(9, AlphaSequence({0.3, 0.2}, AlphaTail::Zero), small_config().schedule(), 1.0, 5,
                               ModelOptions{std::nullopt, true});
    const auto snap = snapshot_at(m, 0.5);
    const auto back = parse_snapshot(to_json(snap));
    EXPECT_EQ(back.complex.face_counts(), snap.complex.face_counts());
    EXPECT_EQ(betti_numbers(back.complex).betti, betti_numbers(snap.complex).betti);
    EXPECT_THROW(parse_snapshot(Json::parse(R"({"n": 2, "faces": [[0, 3]]})")), InvalidArgument);
    EXPECT_THROW(parse_snapshot(Json::parse(R"({"faces": [[]]})")), InvalidArgument);
    const auto tri = parse_snapshot(Json::parse(R"({"faces": [[0, 1, 2]]})"));
    EXPECT_EQ(tri.complex.face_counts(), (std::vector<std::int64_t>{3, 3, 1}));
}

} // namespace
} // namespace dmsc
