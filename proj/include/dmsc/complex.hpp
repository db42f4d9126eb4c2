#pragma once

// The dynamic multi-parameter complex X([n], p; t).
//
// Each potential face A in a random dimension i (0 < p_i < 1) carries its own
// on/off timeline.  A forms an i-face at time t iff every proper subface is
// present and the dimension-i process of A is on (or dimension i is
// deterministically on).  Snapshots are built bottom-up by extending present
// (i-1)-faces, so the work is proportional to the realized complex.

#include "dmsc/combinatorics.hpp"
#include "dmsc/error.hpp"
#include "dmsc/params.hpp"
#include "dmsc/renewal.hpp"
#include "dmsc/rng.hpp"
#include "dmsc/simplicial_complex.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dmsc {

/// The complex at one instant.
struct ComplexSnapshot {
    int n = 0;
    double time = 0.0;
    SimplicialComplex complex;
    bool truncated = false; ///< dimension cap reached with the cap level still non-empty

    std::size_t count(int d) const { return complex.count(d); }
    std::int64_t euler_characteristic() const { return complex.euler_characteristic(); }
};

/// Face counts along an evaluation grid.
struct FaceCountPath {
    std::vector<double> times;
    std::vector<std::vector<std::int64_t>> counts; ///< counts[t][j] = f_j(t), j = 0..D
    std::vector<std::int64_t> chi;
};

/// Interarrival law per dimension: entry i-1 serves dimension i; the last
/// entry is reused for higher dimensions.
struct DistributionSchedule {
    std::vector<DistributionPtr> per_dimension;

    DistributionSchedule() = default;
    explicit DistributionSchedule(std::vector<DistributionPtr> d) : per_dimension(std::move(d)) {}
    explicit DistributionSchedule(DistributionPtr d) : per_dimension{std::move(d)} {}

    DistributionPtr for_dimension(int i) const {
        if (per_dimension.empty()) return nullptr;
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(i - 1),
                                               per_dimension.size() - 1);
        return per_dimension[idx];
    }
};

enum class DimensionKind { On, Off, Random };

struct ModelOptions {
    std::optional<int> dim_cap; ///< default M(alpha) + 2
    bool exact = false;         ///< cap = n - 1
    std::uint64_t face_budget = 10'000'000;
};

/// Stream tag for per-face timelines; other streams use different tags.
inline constexpr std::uint64_t kFaceStreamTag = 0x46414345ULL;

class DynamicComplexModel {
public:
    struct Dimension {
        DimensionKind kind = DimensionKind::On;
        double p = 1.0;
        DistributionPtr distribution;
        std::vector<OnOffTimeline> timelines; ///< indexed by colexicographic rank
    };

    DynamicComplexModel(int n, AlphaSequence alpha, const DistributionSchedule& dists,
                        double horizon, std::uint64_t seed, const ModelOptions& options = {})
        : n_(n), alpha_(std::move(alpha)), regime_(detect_regime(alpha_)), horizon_(horizon),
          seed_(seed) {
        if (n < 2) throw InvalidArgument("n must be >= 2");
        if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
        if (options.exact) {
            dim_cap_ = n - 1;
        } else {
            dim_cap_ = std::min(options.dim_cap.value_or(regime_.m_alpha + 2), n - 1);
        }
        if (dim_cap_ < std::min(regime_.q, n - 1))
            throw InvalidArgument("dim_cap must be >= q");

        // colex ranks: C(v, r) for v < n, r <= dim_cap + 1
        binom_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(dim_cap_ + 2), 0);
        for (int v = 0; v < n_; ++v)
            for (int r = 0; r <= dim_cap_ + 1; ++r)
                binom_[index(v, r)] = binomial_u64(v, r);

        dims_.resize(static_cast<std::size_t>(dim_cap_) + 1);
        std::uint64_t random_faces = 0;
        for (int i = 1; i <= dim_cap_; ++i) {
            auto& dim = dims_[static_cast<std::size_t>(i)];
            dim.p = face_probability(alpha_, i, n_);
            if (dim.p >= 1.0) {
                dim.kind = DimensionKind::On;
            } else if (dim.p <= 0.0) {
                dim.kind = DimensionKind::Off;
            } else {
                dim.kind = DimensionKind::Random;
                dim.distribution = dists.for_dimension(i);
                if (!dim.distribution)
                    throw InvalidArgument("no interarrival distribution for dimension " +
                                          std::to_string(i));
                random_faces += binomial_u64(n_, i + 1);
                if (random_faces > options.face_budget)
                    throw CapacityExceeded("random faces exceed the budget of " +
                                           std::to_string(options.face_budget));
            }
        }
        for (int i = 1; i <= dim_cap_; ++i) {
            auto& dim = dims_[static_cast<std::size_t>(i)];
            if (dim.kind != DimensionKind::Random) continue;
            const auto total = binomial_u64(n_, i + 1);
            dim.timelines.reserve(total);
            for_each_combination(i + 1, [&](std::span<const Vertex> face) {
                Rng rng(face_stream_key(i, face));
                dim.timelines.push_back(
                    sample_timeline(*dim.distribution, dim.p, horizon_, rng));
            });
        }
    }

    int n() const noexcept { return n_; }
    const AlphaSequence& alpha() const noexcept { return alpha_; }
    const RegimeReport& regime() const noexcept { return regime_; }
    double horizon() const noexcept { return horizon_; }
    int dim_cap() const noexcept { return dim_cap_; }
    std::uint64_t seed() const noexcept { return seed_; }

    DimensionKind kind(int i) const { return dims_.at(static_cast<std::size_t>(i)).kind; }
    double probability(int i) const { return dims_.at(static_cast<std::size_t>(i)).p; }
    const Dimension& dimension_plan(int i) const { return dims_.at(static_cast<std::size_t>(i)); }

    std::uint64_t face_stream_key(int dim, std::span<const Vertex> face) const noexcept {
        return derive_stream_key<Vertex>(seed_, kFaceStreamTag + static_cast<std::uint64_t>(dim),
                                         face);
    }

    /// Colexicographic rank of a face among all faces of its dimension.
    std::uint64_t rank(std::span<const Vertex> face) const {
        std::uint64_t r = 0;
        for (std::size_t j = 0; j < face.size(); ++j)
            r += binom_[index(static_cast<int>(face[j]), static_cast<int>(j) + 1)];
        return r;
    }

    /// The timeline of a face in a random dimension, or nullptr.
    const OnOffTimeline* timeline(const FaceId& face) const {
        const int d = face.dimension();
        if (d < 1 || d > dim_cap_) return nullptr;
        const auto& dim = dims_[static_cast<std::size_t>(d)];
        if (dim.kind != DimensionKind::Random) return nullptr;
        if (face.back() >= static_cast<Vertex>(n_)) return nullptr;
        return &dim.timelines[rank(face.vertices)];
    }

    /// Process state of dimension d for `face` at time t (deterministic dims included).
    bool process_on(int d, std::span<const Vertex> face, double t) const {
        const auto& dim = dims_[static_cast<std::size_t>(d)];
        switch (dim.kind) {
        case DimensionKind::On: return true;
        case DimensionKind::Off: return false;
        case DimensionKind::Random: break;
        }
        return dim.timelines[rank(face)].state_at(t);
    }

    /// Calls fn(span of vertices) for every (size)-subset of [n] in colex order.
    void for_each_combination(int size,
                              const std::function<void(std::span<const Vertex>)>& fn) const {
        if (size > n_ || size < 1) return;
        std::vector<Vertex> c(static_cast<std::size_t>(size));
        for (int j = 0; j < size; ++j) c[static_cast<std::size_t>(j)] = static_cast<Vertex>(j);
        while (true) {
            fn(c);
            // colex successor: bump the lowest position that can move
            int j = 0;
            while (j + 1 < size && c[static_cast<std::size_t>(j)] + 1 == c[static_cast<std::size_t>(j + 1)]) {
                c[static_cast<std::size_t>(j)] = static_cast<Vertex>(j);
                ++j;
            }
            if (c[static_cast<std::size_t>(j)] + 1 >= static_cast<Vertex>(n_) && j + 1 == size) return;
            ++c[static_cast<std::size_t>(j)];
        }
    }

private:
    std::size_t index(int v, int r) const noexcept {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(dim_cap_ + 2) +
               static_cast<std::size_t>(r);
    }

    int n_;
    AlphaSequence alpha_;
    RegimeReport regime_;
    double horizon_;
    std::uint64_t seed_;
    int dim_cap_ = 1;
    std::vector<std::uint64_t> binom_;
    std::vector<Dimension> dims_;
};

inline DynamicComplexModel build_model(int n, const AlphaSequence& alpha,
                                       const DistributionSchedule& dists, double horizon,
                                       std::uint64_t seed, const ModelOptions& options = {}) {
    return DynamicComplexModel(n, alpha, dists, horizon, seed, options);
}

namespace detail {

/// Adjacency rows as bitsets over [n].
class AdjacencyBits {
public:
    AdjacencyBits(int n, const std::vector<FaceId>& edges)
        : words_((static_cast<std::size_t>(n) + 63) / 64),
          bits_(static_cast<std::size_t>(n) * words_, 0) {
        for (const auto& e : edges) {
            set(e.vertices[0], e.vertices[1]);
            set(e.vertices[1], e.vertices[0]);
        }
    }
    std::size_t words() const noexcept { return words_; }
    const std::uint64_t* row(Vertex v) const noexcept { return bits_.data() + v * words_; }

private:
    void set(Vertex a, Vertex b) { bits_[a * words_ + b / 64] |= std::uint64_t{1} << (b % 64); }

    std::size_t words_;
    std::vector<std::uint64_t> bits_;
};

/// Builds levels bottom-up.  `accept(dim, vertices)` decides whether a
/// candidate whose proper subfaces are all present is kept.
template <typename Accept>
inline std::pair<SimplicialComplex, bool> grow_complex(int n, int dim_cap, Accept&& accept) {
    std::vector<std::vector<FaceId>> levels;
    levels.emplace_back();
    levels[0].reserve(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) levels[0].push_back(FaceId{static_cast<Vertex>(v)});

    std::vector<Vertex> cand;
    for (int i = 1; i <= dim_cap; ++i) {
        std::vector<FaceId> level;
        const auto& below = levels[static_cast<std::size_t>(i - 1)];
        if (i == 1) {
            for (Vertex u = 0; u < static_cast<Vertex>(n); ++u)
                for (Vertex v = u + 1; v < static_cast<Vertex>(n); ++v) {
                    cand = {u, v};
                    if (accept(1, std::span<const Vertex>(cand))) level.push_back(FaceId(cand));
                }
        } else {
            const AdjacencyBits adj(n, levels[1]);
            std::vector<std::uint64_t> common(adj.words());
            for (const auto& sigma : below) {
                const Vertex last = sigma.back();
                std::copy_n(adj.row(sigma.front()), adj.words(), common.begin());
                for (std::size_t r = 1; r < sigma.size(); ++r) {
                    const auto* row = adj.row(sigma.vertices[r]);
                    for (std::size_t w = 0; w < common.size(); ++w) common[w] &= row[w];
                }
                for (std::size_t w = last / 64; w < common.size(); ++w) {
                    std::uint64_t word = common[w];
                    if (w == last / 64) {
                        const unsigned shift = last % 64 + 1;
                        word = shift >= 64 ? 0 : word & (~std::uint64_t{0} << shift);
                    }
                    while (word) {
                        const auto v = static_cast<Vertex>(w * 64 + static_cast<std::size_t>(std::countr_zero(word)));
                        word &= word - 1;
                        cand = sigma.vertices;
                        cand.push_back(v);
                        bool closed = true;
                        // facet without the last vertex is sigma; check the others
                        for (std::size_t r = 0; r + 1 < cand.size() && closed; ++r) {
                            FaceId facet;
                            facet.vertices.reserve(cand.size() - 1);
                            for (std::size_t s = 0; s < cand.size(); ++s)
                                if (s != r) facet.vertices.push_back(cand[s]);
                            closed = std::binary_search(below.begin(), below.end(), facet);
                        }
                        if (closed && accept(i, std::span<const Vertex>(cand)))
                            level.push_back(FaceId(cand));
                    }
                }
            }
        }
        if (level.empty()) break;
        levels.push_back(std::move(level));
    }
    const bool truncated =
        static_cast<int>(levels.size()) == dim_cap + 1 && dim_cap < n - 1;
    return {SimplicialComplex(std::move(levels), false), truncated};
}

} // namespace detail

/// X([n], p; t).
inline ComplexSnapshot snapshot_at(const DynamicComplexModel& model, double t) {
    if (t > model.horizon()) throw OutOfHorizon("snapshot time exceeds the model horizon");
    if (t < 0.0) throw InvalidArgument("snapshot time must be >= 0");
    auto [complex, truncated] = detail::grow_complex(
        model.n(), model.dim_cap(),
        [&](int d, std::span<const Vertex> face) { return model.process_on(d, face, t); });
    return ComplexSnapshot{model.n(), t, std::move(complex), truncated};
}

inline FaceCountPath face_counts_path(const DynamicComplexModel& model,
                                      const std::vector<double>& times) {
    FaceCountPath path;
    path.times = times;
    const auto width = static_cast<std::size_t>(model.dim_cap()) + 1;
    for (std::size_t a = 0; a < times.size(); ++a) {
        if (a > 0 && !(times[a] > times[a - 1]))
            throw InvalidArgument("evaluation times must be increasing");
        const auto snap = snapshot_at(model, times[a]);
        path.counts.push_back(snap.complex.face_counts(width));
        path.chi.push_back(snap.euler_characteristic());
    }
    return path;
}

/// Sorted, de-duplicated toggle times of every face in the requested dimensions.
inline std::vector<double> event_times(const DynamicComplexModel& model,
                                       const std::vector<int>& dims) {
    std::vector<double> out;
    for (int d : dims) {
        if (d < 1 || d > model.dim_cap()) continue;
        const auto& plan = model.dimension_plan(d);
        if (plan.kind != DimensionKind::Random) continue;
        for (const auto& tl : plan.timelines) {
            const auto toggles = tl.toggle_times();
            out.insert(out.end(), toggles.begin(), toggles.end());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// All random dimensions of the model.
inline std::vector<int> random_dimensions(const DynamicComplexModel& model) {
    std::vector<int> dims;
    for (int d = 1; d <= model.dim_cap(); ++d)
        if (model.kind(d) == DimensionKind::Random) dims.push_back(d);
    return dims;
}

/// Per-dimension sup (or inf) over [0, w] of the face counts, evaluated
/// exactly at 0 and at every event time in (0, w].
inline std::vector<std::int64_t> window_extreme_counts(const DynamicComplexModel& model, double w,
                                                       WindowMode mode) {
    if (w > model.horizon()) throw OutOfHorizon("window exceeds the model horizon");
    const auto width = static_cast<std::size_t>(model.dim_cap()) + 1;
    auto best = snapshot_at(model, 0.0).complex.face_counts(width);
    for (double t : event_times(model, random_dimensions(model))) {
        if (t > w) break;
        const auto counts = snapshot_at(model, t).complex.face_counts(width);
        for (std::size_t j = 0; j < width; ++j)
            best[j] = mode == WindowMode::Sup ? std::max(best[j], counts[j])
                                              : std::min(best[j], counts[j]);
    }
    return best;
}

/// Static multi-parameter complex X([n], p): candidates kept independently
/// with probability probabilities[i] (index = dimension, entry 0 unused).
inline SimplicialComplex sample_static_complex(int n, const std::vector<double>& probabilities,
                                               int dim_cap, Rng& rng) {
    auto [complex, truncated] = detail::grow_complex(
        n, dim_cap, [&](int d, std::span<const Vertex>) {
            const double p = probabilities.at(static_cast<std::size_t>(d));
            if (p >= 1.0) return true;
            if (p <= 0.0) return false;
            return rng.bernoulli(p);
        });
    (void)truncated;
    return complex;
}

/// Per-dimension window probabilities p^(1) (Sup) or p^(2) (Inf) for the model's processes.
inline std::vector<double> window_probabilities(const DynamicComplexModel& model, double w,
                                                WindowMode mode, Rng& rng) {
    std::vector<double> probs(static_cast<std::size_t>(model.dim_cap()) + 1, 1.0);
    for (int d = 1; d <= model.dim_cap(); ++d) {
        const auto& plan = model.dimension_plan(d);
        probs[static_cast<std::size_t>(d)] =
            plan.kind == DimensionKind::Random
                ? window_on_probability(*plan.distribution, plan.p, w, mode, rng)
                : plan.p;
    }
    return probs;
}

/// Face counts of one static complex with parameters p^(1) or p^(2) over [0, w].
inline std::vector<std::int64_t> coupled_static_counts(const DynamicComplexModel& model, double w,
                                                       WindowMode mode, Rng& rng) {
    if (w > model.horizon()) throw OutOfHorizon("window exceeds the model horizon");
    const auto probs = window_probabilities(model, w, mode, rng);
    return sample_static_complex(model.n(), probs, model.dim_cap(), rng)
        .face_counts(static_cast<std::size_t>(model.dim_cap()) + 1);
}

} // namespace dmsc
