#include "dmsc/experiments.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

using namespace dmsc;

namespace {

Json number(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

Json numbers(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + out);
    f << text;
}

ExperimentConfig config_from(const std::string& path, std::optional<unsigned> threads) {
    auto c = load_config(path);
    apply_seed_override(c);
    if (threads) c.threads = *threads;
    return c;
}

Json moments_json(const ExperimentConfig& c) {
    const auto regime = detect_regime(c.alpha);
    const auto dists = c.schedule();
    Json per_n = Json::array();
    for (int n : c.n_grid) {
        const auto p = predict_moments(n, c.alpha, dists, c.lags);
        Json cov = Json::array();
        for (const auto& row : p.covariance) cov.push_back(numbers(row));
        Json j{{"n", n},
               {"exact_mean", numbers(p.exact_mean)},
               {"asymptotic_mean", numbers(p.asymptotic_mean)},
               {"lags", p.lags},
               {"covariance", cov},
               {"critical_variance", p.critical_variance ? number(*p.critical_variance) : Json(nullptr)},
               {"dominance_ratio", numbers(p.dominance_ratio)},
               {"tail_sum", number(p.tail_sum)}};
        per_n.push_back(j);
    }
    Json out{{"regime", to_json(regime)}, {"predictions", per_n}};
    const auto floor = check_support_floor(dists, regime.q, regime.horizon);
    out["support_floor"] = Json{{"dimensions", floor.dimensions},
                                {"a", floor.witness},
                                {"valid", floor.valid},
                                {"max_a", floor.max_witness},
                                {"holds", floor.holds}};
    try {
        const auto law = limit_constants(regime);
        out["limit"] = Json{{"k", law.k},
                            {"slln_betti", law.slln_betti},
                            {"slln_euler", law.slln_euler},
                            {"fclt_exponent", law.fclt_exponent},
                            {"fclt_constant", law.fclt_constant}};
    } catch (const BasicAssumptionFails& e) {
        out["limit"] = nullptr;
        out["limit_note"] = e.what();
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic multi-parameter simplicial complexes"};
    app.require_subcommand(1);
    std::string config_path, out_path, suite, snapshot_path;
    std::optional<unsigned> threads;

    auto* regime = app.add_subcommand("regime", "classify alpha: psi, tau, q, k, M, basic assumption");
    regime->add_option("config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    regime->add_option("--out", out_path, "output file (default stdout)");

    auto* moments = app.add_subcommand("moments", "exact and asymptotic moment predictions");
    moments->add_option("config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    moments->add_option("--out", out_path, "output file (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "stream face-count trajectories as CSV");
    simulate->add_option("config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", out_path, "output CSV (default stdout)");
    simulate->add_option("--threads", threads, "worker threads (0 = all cores)");

    auto* verify = app.add_subcommand("verify", "run a verification suite and write a JSON report");
    verify->add_option("config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    verify->add_option("--suite", suite, "moments|slln|fclt|identities|coupling|renewal|spectral");
    verify->add_option("--out", out_path, "output JSON report (default stdout)");
    verify->add_option("--threads", threads, "worker threads (0 = all cores)");
    double renewal_p = 0.35;
    verify->add_option("--p", renewal_p, "on-probability for the renewal suite");

    auto* homology = app.add_subcommand("homology", "reduced Betti numbers of a snapshot over GF(2) and Q");
    homology->add_option("snapshot", snapshot_path, "snapshot JSON")->required()->check(CLI::ExistingFile);
    homology->add_option("--out", out_path, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (regime->parsed()) {
            const auto c = config_from(config_path, threads);
            emit(to_json(detect_regime(c.alpha)).dump(2) + "\n", out_path);
        } else if (moments->parsed()) {
            emit(moments_json(config_from(config_path, threads)).dump(2) + "\n", out_path);
        } else if (simulate->parsed()) {
            const auto c = config_from(config_path, threads);
            const auto start = std::chrono::steady_clock::now();
            MonteCarloSummary s;
            if (out_path.empty() || out_path == "-") {
                s = write_trajectories(c, std::cout, threads);
            } else {
                std::ofstream f(out_path, std::ios::binary);
                if (!f) throw InvalidArgument("cannot write " + out_path);
                s = write_trajectories(c, f, threads);
            }
            std::cerr << "replications " << s.completed << ", workers " << s.workers << ", peak buffered "
                      << s.peak_buffered << ", runtime "
                      << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";
        } else if (verify->parsed()) {
            auto c = config_from(config_path, threads);
            if (!suite.empty()) c.suite = suite;
            const auto report = run_suite(c, renewal_p);
            emit(to_json(report).dump(2) + "\n", out_path);
            std::cerr << c.suite << ": " << (report.pass ? "PASS" : "FAIL") << " (" << report.failures()
                      << " failing gated quantities), runtime " << report.runtime_seconds << " s\n";
            return report.pass ? 0 : 1;
        } else if (homology->parsed()) {
            const auto snap = load_snapshot(snapshot_path);
            const auto gf2 = betti_numbers(snap, Field::GF2, false);
            const auto q = betti_numbers(snap, Field::Rational, false);
            Json out{{"n", snap.n},
                     {"face_counts", snap.complex.face_counts()},
                     {"truncated", snap.truncated},
                     {"gf2", to_json(gf2)},
                     {"rational", to_json(q)},
                     {"field_discrepancy", gf2.betti != q.betti}};
            emit(out.dump(2) + "\n", out_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
