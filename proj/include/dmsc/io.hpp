#pragma once

// Experiment configuration, report records and their JSON/CSV encodings.

#include "dmsc/complex.hpp"
#include "dmsc/error.hpp"
#include "dmsc/homology.hpp"
#include "dmsc/params.hpp"
#include "dmsc/renewal.hpp"

#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dmsc {

using Json = nlohmann::ordered_json;

struct DistributionConfig {
    std::string type = "exponential";
    double rate = 1.0; ///< exponential
    double b = 1.0;    ///< uniform(0, b)
    std::optional<Regularity> regularity;

    DistributionPtr build() const {
        std::shared_ptr<LifetimeDistribution> d;
        if (type == "exponential") {
            d = std::make_shared<ExponentialDistribution>(rate);
        } else if (type == "uniform") {
            d = std::make_shared<UniformDistribution>(b);
        } else {
            throw InvalidArgument("unknown distribution type '" + type + "'");
        }
        if (regularity) d->set_regularity(*regularity);
        return d;
    }
};

struct SuiteSettings {
    double slln_cap = 0.15;
    std::vector<double> windows{0.05, 0.1};
    double ks_level = 0.01;
    double correlation_tolerance = 0.05;
    double constant_tolerance = 0.10;
    double distribution_distance = 0.10;
    int coupling_replications = 0; ///< 0: use `replications`
};

struct ExperimentConfig {
    std::vector<int> n_grid{12};
    AlphaSequence alpha{std::vector<double>{0.9}, AlphaTail::Zero};
    std::vector<DistributionConfig> distributions{DistributionConfig{}};
    double horizon = 2.0;
    std::vector<double> grid{0.5};
    int replications = 1;
    std::uint64_t seed = 1;
    Field field = Field::GF2;
    std::optional<int> dim_cap;
    bool exact = false;
    std::string suite = "moments";
    std::vector<double> lags{0.0};
    unsigned threads = 0;
    SuiteSettings settings;

    int n() const { return n_grid.front(); }

    DistributionSchedule schedule() const {
        std::vector<DistributionPtr> d;
        for (const auto& s : distributions) d.push_back(s.build());
        return DistributionSchedule(std::move(d));
    }

    ModelOptions model_options() const { return ModelOptions{dim_cap, exact}; }

    void validate() const {
        if (n_grid.empty()) throw InvalidArgument("config needs n or n_grid");
        for (int n : n_grid)
            if (n < 2) throw InvalidArgument("n must be >= 2");
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be positive");
        if (grid.empty()) throw InvalidArgument("evaluation grid is empty");
        for (std::size_t a = 0; a < grid.size(); ++a) {
            if (grid[a] < 0.0 || grid[a] > horizon)
                throw InvalidArgument("grid point " + std::to_string(grid[a]) + " outside [0, horizon]");
            if (a > 0 && !(grid[a] > grid[a - 1])) throw InvalidArgument("grid must be increasing");
        }
        if (replications < 1) throw InvalidArgument("replications must be >= 1");
        if (distributions.empty()) throw InvalidArgument("at least one distribution is required");
        for (double l : lags)
            if (l < 0.0) throw InvalidArgument("lags must be >= 0");
        for (double w : settings.windows)
            if (!(w > 0.0)) throw InvalidArgument("coupling windows must be positive");
        for (const auto& d : distributions) (void)d.build();
    }
};

namespace detail {

inline double alpha_token(const Json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "Infinity" || s == "infinity") return kInfinity;
        throw InvalidArgument("alpha entry '" + s + "' is neither a number nor \"inf\"");
    }
    if (!v.is_number()) throw InvalidArgument("alpha entries must be numbers or \"inf\"");
    return v.get<double>();
}

inline Json alpha_entry_json(double a) {
    if (std::isinf(a)) return "inf";
    return a;
}

} // namespace detail

inline DistributionConfig parse_distribution(const Json& j) {
    DistributionConfig d;
    d.type = j.value("type", std::string("exponential"));
    d.rate = j.value("rate", 1.0);
    d.b = j.value("b", 1.0);
    if (j.contains("gamma") || j.contains("c") || j.contains("a")) {
        auto base = d.build()->regularity().value_or(Regularity{});
        base.gamma = j.value("gamma", base.gamma);
        base.c = j.value("c", base.c);
        base.a = j.value("a", base.a);
        d.regularity = base;
    }
    return d;
}

inline ExperimentConfig parse_config(const Json& j) {
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    ExperimentConfig c;
    if (j.contains("n_grid")) {
        c.n_grid = j.at("n_grid").get<std::vector<int>>();
    } else if (j.contains("n")) {
        c.n_grid = {j.at("n").get<int>()};
    }
    if (j.contains("alpha")) {
        std::vector<double> entries;
        for (const auto& v : j.at("alpha")) entries.push_back(detail::alpha_token(v));
        const auto tail = j.value("alpha_tail", std::string("zero"));
        if (tail != "zero" && tail != "inf") throw InvalidArgument("alpha_tail must be \"zero\" or \"inf\"");
        c.alpha = AlphaSequence(entries, tail == "inf" ? AlphaTail::Infinity : AlphaTail::Zero);
    }
    if (j.contains("distributions")) {
        c.distributions.clear();
        for (const auto& d : j.at("distributions")) c.distributions.push_back(parse_distribution(d));
    }
    c.horizon = j.value("horizon", c.horizon);
    if (j.contains("grid")) c.grid = j.at("grid").get<std::vector<double>>();
    c.replications = j.value("replications", c.replications);
    c.seed = j.value("seed", c.seed);
    const auto field = j.value("field", std::string("gf2"));
    if (field == "gf2") {
        c.field = Field::GF2;
    } else if (field == "rational") {
        c.field = Field::Rational;
    } else {
        throw InvalidArgument("field must be \"gf2\" or \"rational\"");
    }
    if (j.contains("dim_cap") && !j.at("dim_cap").is_null()) c.dim_cap = j.at("dim_cap").get<int>();
    c.exact = j.value("exact", false);
    c.suite = j.value("suite", c.suite);
    if (j.contains("lags")) c.lags = j.at("lags").get<std::vector<double>>();
    c.threads = j.value("threads", 0u);
    if (j.contains("settings")) {
        const auto& s = j.at("settings");
        auto& t = c.settings;
        t.slln_cap = s.value("slln_cap", t.slln_cap);
        if (s.contains("windows")) t.windows = s.at("windows").get<std::vector<double>>();
        t.ks_level = s.value("ks_level", t.ks_level);
        t.correlation_tolerance = s.value("correlation_tolerance", t.correlation_tolerance);
        t.constant_tolerance = s.value("constant_tolerance", t.constant_tolerance);
        t.distribution_distance = s.value("distribution_distance", t.distribution_distance);
        t.coupling_replications = s.value("coupling_replications", t.coupling_replications);
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw InvalidArgument("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

/// DMSC_SEED, when set, replaces the master seed.
inline void apply_seed_override(ExperimentConfig& c) {
    const char* env = std::getenv("DMSC_SEED");
    if (!env || !*env) return;
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 0);
    if (*end != '\0') throw InvalidArgument(std::string("DMSC_SEED is not an integer: ") + env);
    c.seed = v;
}

inline Json to_json(const DistributionConfig& d) {
    Json j{{"type", d.type}};
    if (d.type == "exponential") j["rate"] = d.rate;
    if (d.type == "uniform") j["b"] = d.b;
    if (d.regularity) {
        j["gamma"] = d.regularity->gamma;
        j["c"] = d.regularity->c;
        j["a"] = d.regularity->a;
    }
    return j;
}

inline Json to_json(const ExperimentConfig& c) {
    Json alpha = Json::array();
    for (double a : c.alpha.entries()) alpha.push_back(detail::alpha_entry_json(a));
    Json dists = Json::array();
    for (const auto& d : c.distributions) dists.push_back(to_json(d));
    Json j{{"n_grid", c.n_grid},
           {"alpha", alpha},
           {"alpha_tail", c.alpha.tail() == AlphaTail::Infinity ? "inf" : "zero"},
           {"distributions", dists},
           {"horizon", c.horizon},
           {"grid", c.grid},
           {"replications", c.replications},
           {"seed", c.seed},
           {"field", to_string(c.field)},
           {"dim_cap", c.dim_cap ? Json(*c.dim_cap) : Json(nullptr)},
           {"exact", c.exact},
           {"suite", c.suite},
           {"lags", c.lags}};
    j["settings"] = Json{{"slln_cap", c.settings.slln_cap},
                         {"windows", c.settings.windows},
                         {"ks_level", c.settings.ks_level},
                         {"correlation_tolerance", c.settings.correlation_tolerance},
                         {"constant_tolerance", c.settings.constant_tolerance},
                         {"distribution_distance", c.settings.distribution_distance},
                         {"coupling_replications", c.settings.coupling_replications}};
    return j;
}

inline Json to_json(const RegimeReport& r) {
    auto ext = [](double v) { return std::isinf(v) ? Json(v > 0 ? "inf" : "-inf") : Json(v); };
    Json psi = Json::array(), tau = Json::array();
    for (double v : r.psi_values) psi.push_back(ext(v));
    for (double v : r.tau_values) tau.push_back(ext(v));
    return Json{{"q", r.q},
                {"horizon", r.horizon},
                {"psi", psi},
                {"tau", tau},
                {"critical_k", r.critical_k ? Json(*r.critical_k) : Json(nullptr)},
                {"m_alpha", r.m_alpha},
                {"m1_alpha", r.m1_alpha ? Json(*r.m1_alpha) : Json(nullptr)},
                {"basic_assumption", r.basic_assumption_holds},
                {"sharp_drop", r.sharp_drop_holds}};
}

inline Json to_json(const BettiProfile& b) {
    return Json{{"field", to_string(b.field)},
                {"betti", b.betti},
                {"chi_faces", b.chi_faces},
                {"chi_betti", b.chi_betti}};
}

// ---------------------------------------------------------------------------
// Reports

/// One checked quantity.  `gating` quantities decide the suite verdict;
/// the others are reported only.
struct Quantity {
    std::string name;
    double estimate = 0.0;
    std::optional<double> standard_error;
    double theory = 0.0;
    std::optional<double> z_score;
    std::optional<double> p_value;
    double tolerance = 0.0;
    std::string rule;
    bool gating = true;
    bool pass = true;
};

struct StatReport {
    std::string suite;
    std::vector<Quantity> quantities;
    Json info = Json::object();
    bool pass = true;
    double runtime_seconds = 0.0;

    void add(Quantity q) {
        if (q.gating && !q.pass) pass = false;
        quantities.push_back(std::move(q));
    }

    const Quantity* find(const std::string& name) const {
        for (const auto& q : quantities)
            if (q.name == name) return &q;
        return nullptr;
    }

    std::size_t failures() const {
        std::size_t f = 0;
        for (const auto& q : quantities) f += q.gating && !q.pass;
        return f;
    }
};

inline Json to_json(const Quantity& q) {
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    return Json{{"name", q.name},         {"estimate", q.estimate}, {"standard_error", opt(q.standard_error)},
                {"theory", q.theory},     {"z_score", opt(q.z_score)}, {"p_value", opt(q.p_value)},
                {"tolerance", q.tolerance}, {"rule", q.rule},       {"gating", q.gating},
                {"pass", q.pass}};
}

/// Runtime is left out unless asked for, so that reruns give identical files.
inline Json to_json(const StatReport& r, bool with_runtime = false) {
    Json qs = Json::array();
    for (const auto& q : r.quantities) qs.push_back(to_json(q));
    Json j{{"suite", r.suite}, {"pass", r.pass}, {"failures", r.failures()}, {"quantities", qs}, {"info", r.info}};
    if (with_runtime) j["runtime_seconds"] = r.runtime_seconds;
    return j;
}

inline void write_report(const StatReport& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write report " + path);
    out << to_json(r).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Trajectory CSV

/// Streams face-count paths as CSV.  With a single replication the header is
/// t,f_0,...,f_D,chi; otherwise a leading rep column is added.
class TrajectoryCsvWriter {
public:
    TrajectoryCsvWriter(std::ostream& out, int top_dimension, bool with_rep)
        : out_(out), top_(top_dimension), with_rep_(with_rep) {
        if (with_rep_) out_ << "rep,";
        out_ << 't';
        for (int j = 0; j <= top_; ++j) out_ << ",f_" << j;
        out_ << ",chi\n";
    }

    void write(int rep, const FaceCountPath& path) {
        for (std::size_t a = 0; a < path.times.size(); ++a) {
            if (with_rep_) out_ << rep << ',';
            out_ << format(path.times[a]);
            const auto& c = path.counts[a];
            for (int j = 0; j <= top_; ++j)
                out_ << ',' << (static_cast<std::size_t>(j) < c.size() ? c[static_cast<std::size_t>(j)] : 0);
            out_ << ',' << path.chi[a] << '\n';
        }
        out_.flush();
    }

    void fail(const std::string& message, std::size_t completed) {
        out_ << "# FAILED after " << completed << " replications: " << message << '\n';
        out_.flush();
    }

private:
    static std::string format(double t) {
        std::ostringstream s;
        s.precision(17);
        s << t;
        return s.str();
    }

    std::ostream& out_;
    int top_;
    bool with_rep_;
};

// ---------------------------------------------------------------------------
// Snapshot JSON

inline Json to_json(const ComplexSnapshot& s) {
    Json faces = Json::array();
    for (const auto& level : s.complex.levels())
        for (const auto& f : level) faces.push_back(f.vertices);
    return Json{{"n", s.n}, {"time", s.time}, {"truncated", s.truncated}, {"faces", faces}};
}

/// Reads {"n", "faces": [[v...], ...]}; the listed faces are closed downward
/// and every vertex of [n] is added.
inline ComplexSnapshot parse_snapshot(const Json& j) {
    if (!j.is_object() || !j.contains("faces")) throw InvalidArgument("snapshot needs a faces array");
    std::vector<FaceId> gens;
    Vertex top = 0;
    for (const auto& f : j.at("faces")) {
        auto v = f.get<std::vector<Vertex>>();
        std::sort(v.begin(), v.end());
        if (v.empty()) throw InvalidArgument("snapshot contains an empty face");
        top = std::max(top, v.back() + 1);
        gens.emplace_back(std::move(v));
    }
    const int n = j.value("n", static_cast<int>(top));
    if (static_cast<Vertex>(n) < top) throw InvalidArgument("snapshot face uses a vertex >= n");
    for (int v = 0; v < n; ++v) gens.push_back(FaceId{static_cast<Vertex>(v)});
    ComplexSnapshot s;
    s.n = n;
    s.time = j.value("time", 0.0);
    s.truncated = j.value("truncated", false);
    s.complex = SimplicialComplex::closure_of(gens);
    return s;
}

inline ComplexSnapshot load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open snapshot " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw InvalidArgument("snapshot " + path + " is not valid JSON: " + e.what());
    }
    return parse_snapshot(j);
}

} // namespace dmsc
