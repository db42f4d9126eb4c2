#pragma once

#include "dmsc/error.hpp"

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dmsc {

using Vertex = std::uint32_t;

/// A simplex: strictly increasing vertex labels (0-based).
struct FaceId {
    std::vector<Vertex> vertices;

    FaceId() = default;
    explicit FaceId(std::vector<Vertex> v) : vertices(std::move(v)) { validate(); }
    FaceId(std::initializer_list<Vertex> v) : vertices(v) { validate(); }

    int dimension() const noexcept { return static_cast<int>(vertices.size()) - 1; }
    std::size_t size() const noexcept { return vertices.size(); }
    Vertex front() const { return vertices.front(); }
    Vertex back() const { return vertices.back(); }

    /// The facet obtained by deleting vertex position `r`.
    FaceId without(std::size_t r) const {
        FaceId out;
        out.vertices.reserve(vertices.size() - 1);
        for (std::size_t i = 0; i < vertices.size(); ++i)
            if (i != r) out.vertices.push_back(vertices[i]);
        return out;
    }

    bool contains(const FaceId& other) const {
        return std::includes(vertices.begin(), vertices.end(), other.vertices.begin(),
                             other.vertices.end());
    }

    auto operator<=>(const FaceId&) const = default;
    bool operator==(const FaceId&) const = default;

    std::string to_string() const {
        std::string s = "{";
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(vertices[i]);
        }
        return s + "}";
    }

private:
    void validate() const {
        if (vertices.empty()) throw InvalidArgument("a face needs at least one vertex");
        for (std::size_t i = 1; i < vertices.size(); ++i)
            if (vertices[i] <= vertices[i - 1])
                throw InvalidArgument("face vertices must be strictly increasing");
    }
};

/// Faces grouped by dimension, each level sorted lexicographically.
class SimplicialComplex {
public:
    SimplicialComplex() = default;

    /// Takes ownership of per-dimension face lists; sorts them, drops trailing
    /// empty levels and, if `check_closure`, verifies downward closure.
    explicit SimplicialComplex(std::vector<std::vector<FaceId>> levels, bool check_closure = true)
        : levels_(std::move(levels)) {
        for (std::size_t d = 0; d < levels_.size(); ++d) {
            auto& level = levels_[d];
            std::sort(level.begin(), level.end());
            level.erase(std::unique(level.begin(), level.end()), level.end());
            for (const auto& f : level)
                if (f.dimension() != static_cast<int>(d))
                    throw InvalidArgument("face " + f.to_string() + " listed at wrong dimension");
        }
        trim();
        if (check_closure && !is_downward_closed())
            throw InvalidArgument("face lists are not closed under taking faces");
    }

    /// Smallest complex containing every generator.
    static SimplicialComplex closure_of(const std::vector<FaceId>& generators) {
        std::vector<std::set<FaceId>> sets;
        for (const auto& g : generators) {
            const auto d = static_cast<std::size_t>(g.dimension());
            if (sets.size() <= d) sets.resize(d + 1);
            sets[d].insert(g);
        }
        for (std::size_t d = sets.size(); d-- > 1;) {
            for (const auto& f : sets[d])
                for (std::size_t r = 0; r < f.size(); ++r) sets[d - 1].insert(f.without(r));
        }
        std::vector<std::vector<FaceId>> levels;
        levels.reserve(sets.size());
        for (auto& s : sets) levels.emplace_back(s.begin(), s.end());
        return SimplicialComplex(std::move(levels), false);
    }

    /// Top dimension; -1 for the empty complex.
    int dimension() const noexcept { return static_cast<int>(levels_.size()) - 1; }
    bool empty() const noexcept { return levels_.empty(); }

    const std::vector<FaceId>& faces(int d) const {
        static const std::vector<FaceId> kNone;
        if (d < 0 || d >= static_cast<int>(levels_.size())) return kNone;
        return levels_[static_cast<std::size_t>(d)];
    }
    const std::vector<std::vector<FaceId>>& levels() const noexcept { return levels_; }

    std::size_t count(int d) const { return faces(d).size(); }

    std::optional<std::size_t> index_of(const FaceId& f) const {
        const auto& level = faces(f.dimension());
        const auto it = std::lower_bound(level.begin(), level.end(), f);
        if (it == level.end() || *it != f) return std::nullopt;
        return static_cast<std::size_t>(it - level.begin());
    }
    bool contains(const FaceId& f) const { return index_of(f).has_value(); }

    /// (f_0, ..., f_{D}) padded with zeros up to `min_levels` entries.
    std::vector<std::int64_t> face_counts(std::size_t min_levels = 0) const {
        std::vector<std::int64_t> out(std::max(min_levels, levels_.size()), 0);
        for (std::size_t d = 0; d < levels_.size(); ++d)
            out[d] = static_cast<std::int64_t>(levels_[d].size());
        return out;
    }

    /// sum_j (-1)^j f_j.
    std::int64_t euler_characteristic() const {
        std::int64_t chi = 0;
        for (std::size_t d = 0; d < levels_.size(); ++d)
            chi += (d % 2 == 0 ? 1 : -1) * static_cast<std::int64_t>(levels_[d].size());
        return chi;
    }

    bool is_downward_closed() const {
        for (std::size_t d = 1; d < levels_.size(); ++d)
            for (const auto& f : levels_[d])
                for (std::size_t r = 0; r < f.size(); ++r)
                    if (!contains(f.without(r))) return false;
        return true;
    }

    /// Faces of dimension <= k.
    SimplicialComplex skeleton(int k) const {
        SimplicialComplex out;
        for (int d = 0; d <= std::min(k, dimension()); ++d)
            out.levels_.push_back(levels_[static_cast<std::size_t>(d)]);
        out.trim();
        return out;
    }

    bool operator==(const SimplicialComplex&) const = default;

private:
    void trim() {
        while (!levels_.empty() && levels_.back().empty()) levels_.pop_back();
    }

    std::vector<std::vector<FaceId>> levels_;
};

} // namespace dmsc
