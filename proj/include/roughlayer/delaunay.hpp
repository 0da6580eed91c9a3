#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "roughlayer/geometry.hpp"

namespace roughlayer {

/// Incremental Bowyer-Watson Delaunay triangulation with walk-based point
/// location. Inputs are expected to be free of exact duplicates; near-ties
/// in the incircle test are broken by the caller jittering interior points.
class Delaunay {
  public:
    explicit Delaunay(const std::vector<Vec2>& points) : pts_(points) {
        if (points.size() < 3) throw std::invalid_argument("Delaunay: need >= 3 points");
        build();
    }

    /// Triangles by vertex indices into the original point set, CCW.
    std::vector<std::array<int, 3>> triangles() const {
        std::vector<std::array<int, 3>> out;
        const int n = static_cast<int>(pts_.size()) - 3;
        for (const auto& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;  // touches super-triangle
            out.push_back({t.v[0], t.v[1], t.v[2]});
        }
        return out;
    }

  private:
    struct Tri {
        std::array<int, 3> v;    // vertices, CCW
        std::array<int, 3> adj;  // adj[i] is across the edge opposite v[i]
        bool alive = true;
    };

    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    int last_alive_ = 0;

    static double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
        return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    }

    // > 0 iff d lies inside the circumcircle of ccw triangle (a,b,c)
    static double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
        const double adx = a.x - d.x, ady = a.y - d.y;
        const double bdx = b.x - d.x, bdy = b.y - d.y;
        const double cdx = c.x - d.x, cdy = c.y - d.y;
        const double ad = adx * adx + ady * ady;
        const double bd = bdx * bdx + bdy * bdy;
        const double cd = cdx * cdx + cdy * cdy;
        return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
               ad * (bdx * cdy - bdy * cdx);
    }

    void build() {
        const int n = static_cast<int>(pts_.size());
        // bounding super-triangle
        double minx = pts_[0].x, maxx = minx, miny = pts_[0].y, maxy = miny;
        for (const auto& p : pts_) {
            minx = std::min(minx, p.x);
            maxx = std::max(maxx, p.x);
            miny = std::min(miny, p.y);
            maxy = std::max(maxy, p.y);
        }
        const double cx = 0.5 * (minx + maxx), cy = 0.5 * (miny + maxy);
        const double r = 10.0 * (std::max(maxx - minx, maxy - miny) + 1.0);
        pts_.push_back({cx - 2.0 * r, cy - r});
        pts_.push_back({cx + 2.0 * r, cy - r});
        pts_.push_back({cx, cy + 2.0 * r});
        tris_.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});
        last_alive_ = 0;

        // deterministic insertion order scramble improves walk locality cost
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        std::uint64_t state = 0x9e3779b97f4a7c15ULL;
        for (int i = n - 1; i > 0; --i) {
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            const int j = static_cast<int>(state % static_cast<std::uint64_t>(i + 1));
            std::swap(order[i], order[j]);
        }
        for (int idx : order) insert(idx);
    }

    int locate(const Vec2& p) const {
        int t = last_alive_;
        if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[t].alive) {
            t = -1;
            for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
                if (tris_[i].alive) { t = i; break; }
        }
        const int max_steps = static_cast<int>(tris_.size()) + 16;
        for (int step = 0; step < max_steps; ++step) {
            const Tri& tri = tris_[t];
            int next = -1;
            for (int e = 0; e < 3; ++e) {
                const Vec2& a = pts_[tri.v[(e + 1) % 3]];
                const Vec2& b = pts_[tri.v[(e + 2) % 3]];
                if (orient(a, b, p) < 0.0) {
                    if (tri.adj[e] >= 0) { next = tri.adj[e]; break; }
                }
            }
            if (next < 0) return t;
            t = next;
        }
        // walk failed (degenerate data); fall back to scanning
        for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
            if (!tris_[i].alive) continue;
            const Tri& tri = tris_[i];
            bool inside = true;
            for (int e = 0; e < 3 && inside; ++e)
                if (orient(pts_[tri.v[(e + 1) % 3]], pts_[tri.v[(e + 2) % 3]], p) < -1e-14)
                    inside = false;
            if (inside) return i;
        }
        throw std::runtime_error("Delaunay: point location failed");
    }

    void insert(int pi) {
        const Vec2& p = pts_[pi];
        const int seed = locate(p);

        // grow the cavity of triangles whose circumcircle contains p
        std::vector<int> cavity;
        std::vector<int> stack{seed};
        std::vector<char> in_cavity(tris_.size(), 0);
        in_cavity[seed] = 1;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            cavity.push_back(t);
            for (int e = 0; e < 3; ++e) {
                const int nb = tris_[t].adj[e];
                if (nb < 0 || in_cavity[nb]) continue;
                const Tri& tri = tris_[nb];
                if (incircle(pts_[tri.v[0]], pts_[tri.v[1]], pts_[tri.v[2]], p) > 0.0) {
                    in_cavity[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }

        // boundary edges of the cavity (edge (a,b) with outside neighbor)
        struct BEdge {
            int a, b, outside;
        };
        std::vector<BEdge> boundary;
        for (int t : cavity) {
            for (int e = 0; e < 3; ++e) {
                const int nb = tris_[t].adj[e];
                if (nb >= 0 && in_cavity[nb]) continue;
                boundary.push_back({tris_[t].v[(e + 1) % 3], tris_[t].v[(e + 2) % 3], nb});
            }
            tris_[t].alive = false;
        }

        // retriangulate the cavity as a fan around p; internal fan edges
        // {p, x} are matched undirected to hook mutual adjacency
        std::unordered_map<std::int64_t, std::pair<int, int>> open_edge;  // key -> (tri, local e)
        open_edge.reserve(boundary.size() * 2);
        auto ukey = [](int a, int b) {
            if (a > b) std::swap(a, b);
            return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
        };
        for (const auto& be : boundary) {
            Tri nt;
            nt.v = {pi, be.a, be.b};
            if (orient(pts_[pi], pts_[be.a], pts_[be.b]) <= 0.0) std::swap(nt.v[1], nt.v[2]);
            nt.adj = {be.outside, -1, -1};
            const int ti = static_cast<int>(tris_.size());
            for (int e = 1; e <= 2; ++e) {
                const int other_vertex = nt.v[e == 1 ? 2 : 1];
                const auto k = ukey(pi, other_vertex);
                if (auto it = open_edge.find(k); it != open_edge.end()) {
                    nt.adj[e] = it->second.first;
                    tris_[it->second.first].adj[it->second.second] = ti;
                    open_edge.erase(it);
                } else {
                    open_edge[k] = {ti, e};
                }
            }
            if (be.outside >= 0) {
                Tri& out = tris_[be.outside];
                for (int e = 0; e < 3; ++e) {
                    const int va = out.v[(e + 1) % 3], vb = out.v[(e + 2) % 3];
                    if ((va == be.a && vb == be.b) || (va == be.b && vb == be.a)) out.adj[e] = ti;
                }
            }
            tris_.push_back(nt);
        }
        last_alive_ = static_cast<int>(tris_.size()) - 1;
    }
};

inline std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& points) {
    return Delaunay(points).triangles();
}

}  // namespace roughlayer
