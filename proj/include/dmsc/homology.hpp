#pragma once

// Exact invariants of a finite simplicial complex: reduced Betti numbers over
// GF(2) or Q, the Euler characteristic both ways, the decomposition into
// maximal l-strongly-connected pieces, links, and the spectral-gap
// diagnostic of the cohomology vanishing theorem.
//
// Reduced convention: the boundary of a vertex is the empty face, so
// beta~_0 = components - 1 and chi = 1 + sum_j (-1)^j beta~_j.

#include "dmsc/complex.hpp"
#include "dmsc/error.hpp"
#include "dmsc/simplicial_complex.hpp"

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dmsc {

enum class Field { GF2, Rational };

inline const char* to_string(Field f) { return f == Field::GF2 ? "gf2" : "rational"; }

/// Sparse column-major matrix of the boundary map from i-faces to (i-1)-faces.
/// For i = 0 the single row is the empty face.
struct BoundaryMatrix {
    int dimension = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::vector<std::pair<std::uint32_t, int>>> columns; ///< (row, +-1), rows ascending
};

inline BoundaryMatrix boundary_matrix(const SimplicialComplex& x, int i) {
    BoundaryMatrix m;
    m.dimension = i;
    m.cols = x.count(i);
    m.rows = i == 0 ? (x.count(0) > 0 ? 1 : 0) : x.count(i - 1);
    m.columns.resize(m.cols);
    const auto& level = x.faces(i);
    for (std::size_t c = 0; c < level.size(); ++c) {
        auto& col = m.columns[c];
        if (i == 0) {
            col.emplace_back(0u, 1);
            continue;
        }
        const auto& f = level[c];
        for (std::size_t r = 0; r < f.size(); ++r) {
            const auto row = x.index_of(f.without(r));
            if (!row) throw InvalidArgument("complex is not closed: missing facet of " + f.to_string());
            col.emplace_back(static_cast<std::uint32_t>(*row), r % 2 == 0 ? 1 : -1);
        }
        std::sort(col.begin(), col.end());
    }
    return m;
}

/// Rank over GF(2): column reduction on packed bit columns.
inline std::size_t rank_gf2(const BoundaryMatrix& m) {
    if (m.rows == 0 || m.cols == 0) return 0;
    const std::size_t words = (m.rows + 63) / 64;
    std::vector<std::vector<std::uint64_t>> pivots(m.rows); // pivot row -> reduced column
    std::vector<std::uint64_t> col(words);
    std::size_t rank = 0;
    for (const auto& entries : m.columns) {
        std::fill(col.begin(), col.end(), 0);
        for (const auto& [row, coef] : entries)
            if (coef % 2 != 0) col[row / 64] ^= std::uint64_t{1} << (row % 64);
        while (true) {
            std::size_t w = words;
            while (w > 0 && col[w - 1] == 0) --w;
            if (w == 0) break;
            const std::size_t low =
                (w - 1) * 64 + 63 - static_cast<std::size_t>(std::countl_zero(col[w - 1]));
            auto& pivot = pivots[low];
            if (pivot.empty()) {
                pivot = col;
                ++rank;
                break;
            }
            for (std::size_t k = 0; k < w; ++k) col[k] ^= pivot[k];
        }
    }
    return rank;
}

/// Rank over Q by fraction-free column reduction with exact integers.
inline std::size_t rank_rational(const BoundaryMatrix& m) {
    using boost::multiprecision::cpp_int;
    using Column = std::vector<std::pair<std::uint32_t, cpp_int>>; // rows ascending, nonzero
    if (m.rows == 0 || m.cols == 0) return 0;
    std::vector<Column> pivots(m.rows);
    std::size_t rank = 0;
    for (const auto& entries : m.columns) {
        Column col;
        col.reserve(entries.size());
        for (const auto& [row, coef] : entries)
            if (coef != 0) col.emplace_back(row, cpp_int(coef));
        while (!col.empty()) {
            const std::uint32_t low = col.back().first;
            auto& pivot = pivots[low];
            if (pivot.empty()) {
                pivot = std::move(col);
                ++rank;
                break;
            }
            // col <- a * col - b * pivot, which clears row `low`
            const cpp_int a = pivot.back().second;
            const cpp_int b = col.back().second;
            Column next;
            next.reserve(col.size() + pivot.size());
            std::size_t i = 0, j = 0;
            while (i < col.size() || j < pivot.size()) {
                if (j == pivot.size() || (i < col.size() && col[i].first < pivot[j].first)) {
                    next.emplace_back(col[i].first, a * col[i].second);
                    ++i;
                } else if (i == col.size() || pivot[j].first < col[i].first) {
                    next.emplace_back(pivot[j].first, -b * pivot[j].second);
                    ++j;
                } else {
                    cpp_int v = a * col[i].second - b * pivot[j].second;
                    if (v != 0) next.emplace_back(col[i].first, std::move(v));
                    ++i;
                    ++j;
                }
            }
            cpp_int g = 0;
            for (const auto& e : next) g = boost::multiprecision::gcd(g, e.second);
            if (g > 1)
                for (auto& e : next) e.second /= g;
            col = std::move(next);
        }
    }
    return rank;
}

inline std::size_t matrix_rank(const BoundaryMatrix& m, Field field) {
    return field == Field::GF2 ? rank_gf2(m) : rank_rational(m);
}

/// Whether lower * upper = 0 (lower: boundary of dimension i-1, upper: dimension i).
inline bool composite_is_zero(const BoundaryMatrix& lower, const BoundaryMatrix& upper,
                              Field field) {
    if (upper.rows != lower.cols) throw InvalidArgument("boundary matrices are not composable");
    for (const auto& col : upper.columns) {
        std::map<std::uint32_t, long long> acc;
        for (const auto& [mid, a] : col)
            for (const auto& [row, b] : lower.columns[mid]) acc[row] += static_cast<long long>(a) * b;
        for (const auto& [row, v] : acc) {
            if (field == Field::GF2 ? (v % 2 != 0) : (v != 0)) return false;
        }
    }
    return true;
}

struct BettiProfile {
    std::vector<std::int64_t> betti; ///< reduced beta~_0 .. beta~_D
    std::int64_t chi_faces = 0;
    std::int64_t chi_betti = 0;
    Field field = Field::GF2;

    std::int64_t at(int j) const {
        if (j < 0 || j >= static_cast<int>(betti.size())) return 0;
        return betti[static_cast<std::size_t>(j)];
    }
};

inline BettiProfile betti_numbers(const SimplicialComplex& x, Field field = Field::GF2) {
    BettiProfile out;
    out.field = field;
    out.chi_faces = x.euler_characteristic();
    const int top = x.dimension();
    if (top < 0) {
        // only beta~_{-1} = 1 survives; 1 + (-1)^{-1} * 1 = 0
        out.chi_betti = 0;
        return out;
    }
    std::vector<std::int64_t> ranks(static_cast<std::size_t>(top) + 2, 0);
    for (int i = 0; i <= top; ++i)
        ranks[static_cast<std::size_t>(i)] =
            static_cast<std::int64_t>(matrix_rank(boundary_matrix(x, i), field));
    out.betti.resize(static_cast<std::size_t>(top) + 1);
    std::int64_t chi = 1;
    for (int j = 0; j <= top; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        out.betti[jj] = static_cast<std::int64_t>(x.count(j)) - ranks[jj] - ranks[jj + 1];
        chi += (j % 2 == 0 ? 1 : -1) * out.betti[jj];
    }
    out.chi_betti = chi;
    return out;
}

/// Betti numbers of a snapshot; with `require_exact`, a capped snapshot is rejected.
inline BettiProfile betti_numbers(const ComplexSnapshot& snap, Field field = Field::GF2,
                                  bool require_exact = true) {
    if (require_exact && snap.truncated)
        throw TruncatedSnapshot("snapshot was capped below its first empty dimension");
    return betti_numbers(snap.complex, field);
}

enum class EulerRoute { Faces, Betti };

inline std::int64_t euler_characteristic(const SimplicialComplex& x, EulerRoute via,
                                         Field field = Field::GF2) {
    return via == EulerRoute::Faces ? x.euler_characteristic() : betti_numbers(x, field).chi_betti;
}

inline std::int64_t euler_characteristic(const ComplexSnapshot& snap, EulerRoute via,
                                         Field field = Field::GF2) {
    if (snap.truncated) throw TruncatedSnapshot("Euler characteristic needs an exact snapshot");
    return euler_characteristic(snap.complex, via, field);
}

/// GF(2) and Q Betti numbers differ (the integral homology has 2-torsion).
inline bool has_field_discrepancy(const SimplicialComplex& x) {
    return betti_numbers(x, Field::GF2).betti != betti_numbers(x, Field::Rational).betti;
}

/// Lower Morse bound f_k - f_{k+1} - f_{k-1} <= beta~_k <= f_k for every k,
/// with f_{-1} = 1 (the empty face).
inline bool morse_sandwich_holds(const SimplicialComplex& x, const BettiProfile& b) {
    for (int k = 0; k <= x.dimension(); ++k) {
        const auto fk = static_cast<std::int64_t>(x.count(k));
        const auto fup = static_cast<std::int64_t>(x.count(k + 1));
        const std::int64_t fdown = k == 0 ? 1 : static_cast<std::int64_t>(x.count(k - 1));
        const auto beta = b.at(k);
        if (beta > fk || beta < fk - fup - fdown) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Strongly connected decomposition

struct SccComponent {
    std::vector<Vertex> vertex_support;
    SimplicialComplex complex;
    std::int64_t betti = 0; ///< beta~_order of this component
};

struct SccDecomposition {
    int order = 1;
    std::vector<SccComponent> components;
    std::vector<std::vector<FaceId>> remainder; ///< faces outside every component, by dimension
};

namespace detail {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a; // smallest index is the root
    }

private:
    std::vector<std::size_t> parent_;
};

} // namespace detail

/// Maximal order-l strongly connected subcomplexes: l-faces chained through
/// shared (l-1)-faces, each class closed to the smallest subcomplex holding
/// every simplex that has a class l-face as a face.
inline SccDecomposition scc_decomposition(const SimplicialComplex& x, int order,
                                          Field field = Field::GF2) {
    if (order < 1) throw InvalidArgument("strong connectivity order must be >= 1");
    SccDecomposition out;
    out.order = order;
    const auto& top = x.faces(order);
    detail::DisjointSets sets(top.size());
    std::vector<std::optional<std::size_t>> owner(x.count(order - 1));
    for (std::size_t a = 0; a < top.size(); ++a) {
        for (std::size_t r = 0; r < top[a].size(); ++r) {
            const auto facet = x.index_of(top[a].without(r));
            if (!facet) throw InvalidArgument("complex is not closed");
            auto& slot = owner[*facet];
            if (slot) sets.unite(*slot, a);
            else slot = a;
        }
    }
    std::map<std::size_t, std::size_t> class_of_root; // root l-face -> component index
    for (std::size_t a = 0; a < top.size(); ++a) {
        const auto root = sets.find(a);
        if (!class_of_root.count(root)) class_of_root.emplace(root, class_of_root.size());
    }
    std::vector<std::vector<FaceId>> generators(class_of_root.size());
    for (int d = order; d <= x.dimension(); ++d) {
        for (const auto& f : x.faces(d)) {
            // every l-face of f lies in one class; use the first one
            FaceId head(std::vector<Vertex>(f.vertices.begin(),
                                            f.vertices.begin() + order + 1));
            const auto idx = x.index_of(head);
            generators[class_of_root.at(sets.find(*idx))].push_back(f);
        }
    }
    std::set<FaceId> covered;
    for (auto& gens : generators) {
        SccComponent comp;
        comp.complex = SimplicialComplex::closure_of(gens);
        for (const auto& v : comp.complex.faces(0)) comp.vertex_support.push_back(v.front());
        comp.betti = betti_numbers(comp.complex, field).at(order);
        for (const auto& level : comp.complex.levels()) covered.insert(level.begin(), level.end());
        out.components.push_back(std::move(comp));
    }
    for (int d = 0; d <= x.dimension(); ++d) {
        std::vector<FaceId> rest;
        for (const auto& f : x.faces(d))
            if (!covered.count(f)) rest.push_back(f);
        out.remainder.push_back(std::move(rest));
    }
    return out;
}

/// sum over maximal l-strongly connected components of beta~_l.
inline std::int64_t betti_via_decomposition(const SimplicialComplex& x, int order,
                                            Field field = Field::GF2) {
    std::int64_t total = 0;
    for (const auto& c : scc_decomposition(x, order, field).components) total += c.betti;
    return total;
}

// ---------------------------------------------------------------------------
// Links and spectral gaps

/// lk(sigma) = { tau in X : tau and sigma disjoint, tau u sigma in X }.
inline SimplicialComplex link_of(const SimplicialComplex& x, const FaceId& sigma) {
    if (!x.contains(sigma)) throw FaceAbsent("face " + sigma.to_string() + " is not in the complex");
    std::vector<std::vector<FaceId>> levels;
    for (int d = sigma.dimension() + 1; d <= x.dimension(); ++d) {
        std::vector<FaceId> level;
        for (const auto& rho : x.faces(d)) {
            if (!rho.contains(sigma)) continue;
            std::vector<Vertex> rest;
            std::set_difference(rho.vertices.begin(), rho.vertices.end(), sigma.vertices.begin(),
                                sigma.vertices.end(), std::back_inserter(rest));
            level.push_back(FaceId(std::move(rest)));
        }
        levels.push_back(std::move(level));
    }
    return SimplicialComplex(std::move(levels), false);
}

/// Simple undirected graph on vertices 0..labels.size()-1.
struct Graph {
    std::vector<Vertex> labels;
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    std::size_t vertex_count() const noexcept { return labels.size(); }
};

/// The 1-skeleton of a complex of dimension <= 1 as a graph.
inline Graph as_graph(const SimplicialComplex& x) {
    if (x.dimension() > 1) throw InvalidArgument("complex has faces above dimension 1");
    Graph g;
    for (const auto& v : x.faces(0)) g.labels.push_back(v.front());
    for (const auto& e : x.faces(1)) {
        const auto a = std::lower_bound(g.labels.begin(), g.labels.end(), e.vertices[0]) - g.labels.begin();
        const auto b = std::lower_bound(g.labels.begin(), g.labels.end(), e.vertices[1]) - g.labels.begin();
        g.edges.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    }
    return g;
}

inline Graph complete_graph(std::size_t m) {
    Graph g;
    for (std::size_t v = 0; v < m; ++v) g.labels.push_back(static_cast<Vertex>(v));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) g.edges.emplace_back(a, b);
    return g;
}

inline bool is_connected(const Graph& g) {
    if (g.vertex_count() == 0) return false;
    detail::DisjointSets sets(g.vertex_count());
    for (const auto& [a, b] : g.edges) sets.unite(a, b);
    for (std::size_t v = 1; v < g.vertex_count(); ++v)
        if (sets.find(v) != sets.find(0)) return false;
    return true;
}

/// Second smallest eigenvalue of I - D^{-1/2} A D^{-1/2}.
inline double normalized_laplacian_lambda2(const Graph& g) {
    const auto m = static_cast<Eigen::Index>(g.vertex_count());
    if (m == 0) throw InvalidArgument("graph has no vertices");
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(m, m);
    for (const auto& [a, b] : g.edges) {
        adj(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1.0;
        adj(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = 1.0;
    }
    const Eigen::VectorXd degree = adj.rowwise().sum();
    for (Eigen::Index v = 0; v < m; ++v)
        if (degree(v) == 0.0)
            throw IsolatedVertex("vertex " + std::to_string(g.labels[static_cast<std::size_t>(v)]) +
                                 " has no neighbours");
    if (m == 1) throw IsolatedVertex("single-vertex graph");
    const Eigen::VectorXd inv_sqrt = degree.array().rsqrt();
    const Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(m, m) -
                                inv_sqrt.asDiagonal() * adj * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(1);
}

struct LinkCheck {
    FaceId face;
    std::size_t link_vertices = 0;
    bool connected = false;
    std::optional<double> lambda2; ///< absent when the link has an isolated vertex
    bool gap_ok = false;
};

struct VanishingReport {
    int k = 2;
    bool pure = false;
    std::vector<FaceId> free_faces; ///< (k-1)-faces in no k-face
    std::vector<LinkCheck> links;   ///< one per (k-2)-face
    bool theorem_applies = false;
    std::int64_t observed_betti = 0; ///< beta~_{k-1} of the k-skeleton, over Q
    bool consistent = true;          ///< false iff the theorem applies and observed != 0
};

/// Checks the hypotheses of the cohomology vanishing theorem on the
/// k-skeleton (pure, every (k-2)-link connected with lambda_2 > 1 - 1/k) and
/// compares the predicted beta~_{k-1} = 0 with the computed value.
inline VanishingReport vanishing_diagnostic(const SimplicialComplex& x, int k) {
    if (k < 2) throw InvalidArgument("vanishing diagnostic needs k >= 2");
    VanishingReport rep;
    rep.k = k;
    const auto skel = x.skeleton(k);

    bool pure = skel.dimension() == k;
    for (int d = 0; d < k && pure; ++d) {
        std::vector<char> covered(skel.count(d), 0);
        for (const auto& f : skel.faces(d + 1))
            for (std::size_t r = 0; r < f.size(); ++r) covered[*skel.index_of(f.without(r))] = 1;
        for (std::size_t a = 0; a < covered.size(); ++a) {
            if (covered[a]) continue;
            pure = false;
            break;
        }
    }
    {
        std::vector<char> covered(skel.count(k - 1), 0);
        for (const auto& f : skel.faces(k))
            for (std::size_t r = 0; r < f.size(); ++r) covered[*skel.index_of(f.without(r))] = 1;
        for (std::size_t a = 0; a < covered.size(); ++a)
            if (!covered[a]) rep.free_faces.push_back(skel.faces(k - 1)[a]);
    }
    rep.pure = pure && rep.free_faces.empty();

    bool all_links_ok = true;
    for (const auto& sigma : skel.faces(k - 2)) {
        LinkCheck lc;
        lc.face = sigma;
        const auto g = as_graph(link_of(skel, sigma).skeleton(1));
        lc.link_vertices = g.vertex_count();
        lc.connected = is_connected(g);
        try {
            lc.lambda2 = normalized_laplacian_lambda2(g);
        } catch (const Error&) {
            lc.lambda2.reset();
        }
        lc.gap_ok = lc.connected && lc.lambda2 && *lc.lambda2 > 1.0 - 1.0 / k;
        all_links_ok = all_links_ok && lc.gap_ok;
        rep.links.push_back(std::move(lc));
    }
    rep.theorem_applies = rep.pure && all_links_ok;
    rep.observed_betti = betti_numbers(skel, Field::Rational).at(k - 1);
    rep.consistent = !rep.theorem_applies || rep.observed_betti == 0;
    return rep;
}

} // namespace dmsc
