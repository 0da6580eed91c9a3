#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "roughlayer/delaunay.hpp"
#include "roughlayer/geometry.hpp"

namespace roughlayer {

enum class SubdomainTag : std::uint8_t { Fluid, Solid, Bulk };

enum class BoundaryTag : std::uint8_t {
    Bottom,          // Sigma, x2 = 0
    Inflow,          // Sigma_eps^in
    Outflow,         // Sigma_eps^out
    RoughInterface,  // Gamma_eps or the cell graph Gamma
    SolidOuter,      // Sigma_eps^s
    CellBottom,      // cell {y2 = 0}
    CellTop,         // cell {y2 = 1} (only for degenerate gamma0 = 1 cells)
    LateralPeriodic,
};

struct Triangle {
    std::array<int, 3> v;
    SubdomainTag tag = SubdomainTag::Bulk;
};

struct BoundaryEdge {
    int a = -1;
    int b = -1;
    BoundaryTag tag = BoundaryTag::Bottom;
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<Triangle> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<std::pair<int, int>> periodic_pairs;  // left vertex -> right vertex

    double triangle_area(int t) const {
        const Vec2& a = vertices[triangles[t].v[0]];
        const Vec2& b = vertices[triangles[t].v[1]];
        const Vec2& c = vertices[triangles[t].v[2]];
        return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
    }

    double subdomain_area(SubdomainTag tag) const {
        double s = 0.0;
        for (int t = 0; t < static_cast<int>(triangles.size()); ++t)
            if (triangles[t].tag == tag) s += triangle_area(t);
        return s;
    }

    double total_area() const {
        double s = 0.0;
        for (int t = 0; t < static_cast<int>(triangles.size()); ++t) s += triangle_area(t);
        return s;
    }

    double boundary_length(BoundaryTag tag) const {
        double s = 0.0;
        for (const auto& e : boundary_edges)
            if (e.tag == tag) s += (vertices[e.a] - vertices[e.b]).norm();
        return s;
    }

    double min_angle_deg() const {
        double worst = 180.0;
        for (const auto& t : triangles) {
            for (int i = 0; i < 3; ++i) {
                const Vec2 u = vertices[t.v[(i + 1) % 3]] - vertices[t.v[i]];
                const Vec2 w = vertices[t.v[(i + 2) % 3]] - vertices[t.v[i]];
                const double c = u.dot(w) / (u.norm() * w.norm());
                worst = std::min(worst, std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi);
            }
        }
        return worst;
    }
};

/// 1D mesh of Sigma = (0,1) sharing the bulk mesh's bottom boundary vertices.
struct InterfaceMesh1D {
    std::vector<double> vertices;                    // x1 positions, ascending
    std::vector<std::array<int, 2>> segments;        // consecutive vertex pairs
    std::vector<int> trace_to_bulk;                  // 1D vertex -> bulk vertex index
};

namespace detail {

// uniform spatial hash over boundary segments for distance queries
class SegmentGrid {
  public:
    SegmentGrid(const std::vector<Vec2>& pts, const std::vector<std::array<int, 2>>& segs,
                double cell)
        : pts_(pts), segs_(segs), cell_(cell) {
        for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
            const Vec2& a = pts[segs[i][0]];
            const Vec2& b = pts[segs[i][1]];
            const int x0 = bin(std::min(a.x, b.x)), x1 = bin(std::max(a.x, b.x));
            const int y0 = bin(std::min(a.y, b.y)), y1 = bin(std::max(a.y, b.y));
            for (int x = x0; x <= x1; ++x)
                for (int y = y0; y <= y1; ++y) bins_[key(x, y)].push_back(i);
        }
    }

    double distance(const Vec2& p, double cutoff) const {
        double best = cutoff;
        const int r = static_cast<int>(std::ceil(cutoff / cell_)) + 1;
        const int bx = bin(p.x), by = bin(p.y);
        for (int x = bx - r; x <= bx + r; ++x) {
            for (int y = by - r; y <= by + r; ++y) {
                auto it = bins_.find(key(x, y));
                if (it == bins_.end()) continue;
                for (int i : it->second) best = std::min(best, seg_dist(p, i));
            }
        }
        return best;
    }

  private:
    const std::vector<Vec2>& pts_;
    const std::vector<std::array<int, 2>>& segs_;
    double cell_;
    std::unordered_map<std::int64_t, std::vector<int>> bins_;

    int bin(double v) const { return static_cast<int>(std::floor(v / cell_)); }
    static std::int64_t key(int x, int y) {
        return (static_cast<std::int64_t>(x) << 32) ^ static_cast<std::uint32_t>(y);
    }
    double seg_dist(const Vec2& p, int i) const {
        const Vec2& a = pts_[segs_[i][0]];
        const Vec2 d = pts_[segs_[i][1]] - a;
        const double len2 = d.dot(d);
        double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        return (p - (a + d * t)).norm();
    }
};

inline double hash_unit(std::uint64_t h) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return static_cast<double>(h % 2000001ULL) / 1000000.0 - 1.0;  // in [-1,1]
}

}  // namespace detail

/// Input for the unstructured generator: closed boundary loop given as a
/// sequence of polylines (consecutive polylines share their joint point),
/// interior point candidates, and an inside predicate for classification.
struct UnstructuredDomain {
    std::vector<std::vector<Vec2>> polylines;
    std::vector<BoundaryTag> polyline_tags;
    std::vector<Vec2> interior_candidates;
    std::function<bool(const Vec2&)> inside;
    std::function<double(const Vec2&)> sizing;
    SubdomainTag subdomain = SubdomainTag::Bulk;
    int smoothing_iterations = 3;
};

/// Boundary-fitted unstructured triangulation: boundary points are kept
/// exactly, interior candidates are filtered by a protection margin around
/// the boundary, Delaunay-triangulated, classified by the inside predicate,
/// and Laplacian-smoothed. Boundary edge recovery is verified; missing
/// segments are split and the triangulation is rebuilt.
inline Mesh build_unstructured(UnstructuredDomain dom) {
    if (dom.polylines.size() != dom.polyline_tags.size())
        throw std::invalid_argument("build_unstructured: polyline/tag size mismatch");

    // dedupe boundary points (polyline joints repeat coordinates)
    std::vector<Vec2> points;
    std::map<std::pair<double, double>, int> coord_index;
    std::vector<std::vector<int>> chains;
    for (const auto& pl : dom.polylines) {
        if (pl.size() < 2) throw std::invalid_argument("build_unstructured: short polyline");
        std::vector<int> chain;
        for (const Vec2& p : pl) {
            auto [it, inserted] = coord_index.try_emplace({p.x, p.y}, static_cast<int>(points.size()));
            if (inserted) points.push_back(p);
            if (chain.empty() || chain.back() != it->second) chain.push_back(it->second);
        }
        chains.push_back(std::move(chain));
    }
    const int n_boundary = static_cast<int>(points.size());

    // boundary segment list for distance queries
    std::vector<std::array<int, 2>> bsegs;
    double min_seg = 1e30;
    for (const auto& chain : chains)
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
            bsegs.push_back({chain[i], chain[i + 1]});
            min_seg = std::min(min_seg, (points[chain[i]] - points[chain[i + 1]]).norm());
        }
    detail::SegmentGrid grid(points, bsegs, std::max(min_seg, 1e-6) * 4.0);

    // filtered, jittered interior points
    std::uint64_t salt = 0;
    for (const Vec2& p : dom.interior_candidates) {
        const double h = dom.sizing(p);
        Vec2 q = p;
        q.x += 0.05 * h * detail::hash_unit(++salt * 0x9e3779b97f4a7c15ULL);
        q.y += 0.05 * h * detail::hash_unit(++salt * 0xc2b2ae3d27d4eb4fULL);
        if (!dom.inside(q)) continue;
        if (grid.distance(q, 0.75 * h) < 0.62 * h) continue;
        points.push_back(q);
    }

    auto classify = [&](const std::vector<std::array<int, 3>>& tris,
                        const std::vector<Vec2>& pts) {
        std::vector<std::array<int, 3>> kept;
        for (const auto& t : tris) {
            const Vec2 c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) * (1.0 / 3.0);
            if (dom.inside(c)) kept.push_back(t);
        }
        return kept;
    };
    auto edges_of = [](const std::vector<std::array<int, 3>>& tris) {
        std::set<std::pair<int, int>> edges;
        for (const auto& t : tris)
            for (int e = 0; e < 3; ++e)
                edges.insert(std::minmax(t[e], t[(e + 1) % 3]));
        return edges;
    };
    auto missing_boundary = [&](const std::set<std::pair<int, int>>& edges) {
        std::vector<std::pair<std::size_t, std::size_t>> missing;  // (chain, position)
        for (std::size_t c = 0; c < chains.size(); ++c)
            for (std::size_t i = 0; i + 1 < chains[c].size(); ++i)
                if (!edges.count(std::minmax(chains[c][i], chains[c][i + 1])))
                    missing.emplace_back(c, i);
        return missing;
    };

    std::vector<std::array<int, 3>> kept;
    for (int round = 0; round < 6; ++round) {
        kept = classify(delaunay_triangulate(points), points);
        auto missing = missing_boundary(edges_of(kept));
        if (missing.empty()) break;
        if (round == 5) {
            const auto [c, i] = missing.front();
            const Vec2& a = points[chains[c][i]];
            const Vec2& b = points[chains[c][i + 1]];
            throw std::runtime_error(
                "build_unstructured: boundary edge recovery failed near (" +
                std::to_string(a.x) + "," + std::to_string(a.y) + ")-(" + std::to_string(b.x) +
                "," + std::to_string(b.y) + "), " + std::to_string(missing.size()) + " missing");
        }
        // split missing boundary segments at their midpoints (insert back to front
        // within each chain so stored positions stay valid)
        std::sort(missing.begin(), missing.end(), [](auto& l, auto& r) {
            return l.first != r.first ? l.first < r.first : l.second > r.second;
        });
        for (auto [c, i] : missing) {
            const Vec2 mid = (points[chains[c][i]] + points[chains[c][i + 1]]) * 0.5;
            const int idx = static_cast<int>(points.size());
            points.push_back(mid);
            chains[c].insert(chains[c].begin() + static_cast<std::ptrdiff_t>(i) + 1, idx);
        }
    }

    // Laplacian smoothing of interior vertices, then one rebuild
    if (dom.smoothing_iterations > 0) {
        std::vector<Vec2> smoothed = points;
        std::vector<std::vector<int>> nbrs(points.size());
        {
            std::set<std::pair<int, int>> edges = edges_of(kept);
            for (const auto& [a, b] : edges) {
                nbrs[a].push_back(b);
                nbrs[b].push_back(a);
            }
        }
        // note: boundary points from chains (including recovery midpoints) stay put
        std::vector<char> is_boundary(points.size(), 0);
        for (const auto& chain : chains)
            for (int v : chain) is_boundary[v] = 1;
        for (int it = 0; it < dom.smoothing_iterations; ++it) {
            std::vector<Vec2> next = smoothed;
            for (std::size_t v = 0; v < points.size(); ++v) {
                if (is_boundary[v] || nbrs[v].empty()) continue;
                Vec2 avg{0.0, 0.0};
                for (int w : nbrs[v]) avg = avg + smoothed[w];
                next[v] = avg * (1.0 / static_cast<double>(nbrs[v].size()));
            }
            smoothed = std::move(next);
        }
        auto kept2 = classify(delaunay_triangulate(smoothed), smoothed);
        if (missing_boundary(edges_of(kept2)).empty()) {
            points = std::move(smoothed);
            kept = std::move(kept2);
        }
    }

    Mesh mesh;
    mesh.vertices = points;
    mesh.triangles.reserve(kept.size());
    for (const auto& t : kept) mesh.triangles.push_back({t, dom.subdomain});
    for (std::size_t c = 0; c < chains.size(); ++c)
        for (std::size_t i = 0; i + 1 < chains[c].size(); ++i)
            mesh.boundary_edges.push_back({chains[c][i], chains[c][i + 1], dom.polyline_tags[c]});

    // orientation fix
    for (auto& t : mesh.triangles) {
        const Vec2& a = mesh.vertices[t.v[0]];
        const Vec2& b = mesh.vertices[t.v[1]];
        const Vec2& cc = mesh.vertices[t.v[2]];
        if ((b.x - a.x) * (cc.y - a.y) - (b.y - a.y) * (cc.x - a.x) < 0.0) std::swap(t.v[1], t.v[2]);
    }
    return mesh;
}

// ---------------------------------------------------------------------------
// polyline helpers

namespace detail {

/// March along the graph x -> height_fn(x) from x0 to x1 with arclength
/// spacing ~h, landing exactly on every mandatory station.
inline std::vector<Vec2> march_graph(double x0, double x1,
                                     const std::function<double(double)>& height,
                                     const std::function<double(double)>& slope, double h,
                                     const std::vector<double>& stations) {
    std::vector<double> xs{x0};
    for (double s : stations)
        if (s > x0 + 1e-12 && s < x1 - 1e-12) xs.push_back(s);
    xs.push_back(x1);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(),
                         [](double a, double b) { return b - a < 1e-12; }),
             xs.end());

    std::vector<Vec2> out;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const double a = xs[k], b = xs[k + 1];
        // estimate arclength of the piece, then use a uniform parameter count
        const int probe = 32;
        double len = 0.0;
        for (int i = 0; i < probe; ++i) {
            const double xm = a + (i + 0.5) * (b - a) / probe;
            const double d = slope(xm);
            len += std::sqrt(1.0 + d * d) * (b - a) / probe;
        }
        const int n = std::max(1, static_cast<int>(std::lround(len / h)));
        for (int i = 0; i < n; ++i) {
            // place points ~uniform in arclength by inverting the probe table
            const double target = len * i / n;
            double acc = 0.0, x = a;
            for (int j = 0; j < probe; ++j) {
                const double xm = a + (j + 0.5) * (b - a) / probe;
                const double d = slope(xm);
                const double dl = std::sqrt(1.0 + d * d) * (b - a) / probe;
                if (acc + dl >= target) {
                    x = a + j * (b - a) / probe + (target - acc) / dl * (b - a) / probe;
                    break;
                }
                acc += dl;
                x = a + (j + 1) * (b - a) / probe;
            }
            out.push_back({x, height(x)});
        }
    }
    out.push_back({x1, height(x1)});
    return out;
}

inline std::vector<double> subdivide(double a, double b, double h) {
    const int n = std::max(1, static_cast<int>(std::lround(std::abs(b - a) / h)));
    std::vector<double> out;
    // endpoints must be bitwise exact so shared corner points dedupe
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / n);
    out.push_back(b);
    return out;
}

inline std::vector<Vec2> vertical_line(double x, const std::vector<double>& heights) {
    std::vector<Vec2> out;
    out.reserve(heights.size());
    for (double y : heights) out.push_back({x, y});
    return out;
}

/// Graded 1D subdivision from a to b: spacing h0 at a growing toward h1.
inline std::vector<double> graded(double a, double b, double h0, double h1, double growth) {
    std::vector<double> out{a};
    double y = a, h = h0;
    const double dir = b > a ? 1.0 : -1.0;
    while (std::abs(b - y) > 1.5 * h) {
        y += dir * h;
        out.push_back(y);
        h = std::min(h1, h * (1.0 + growth));
    }
    out.push_back(b);
    return out;
}

}  // namespace detail

/// Mesh of the fluid reference cell Z only.
inline Mesh triangulate_cell(const CellGeometry& geom, double h) {
    const RoughnessProfile& prof = geom.profile;
    if (!(h > 0.0 && h < prof.gamma0 / 2.0))
        throw std::invalid_argument("triangulate_cell: need 0 < h < gamma0/2");

    const double top = prof.evaluate(0.0);  // == gamma(1) by periodicity
    auto height = [&](double x) { return prof.evaluate(x); };
    auto slope = [&](double x) { return prof.derivative(x); };

    std::vector<Vec2> graph =
        detail::march_graph(0.0, 1.0, height, slope, h, prof.breakpoints());
    std::reverse(graph.begin(), graph.end());  // right -> left along the loop

    const std::vector<double> lateral_heights = detail::subdivide(0.0, top, h);
    std::vector<double> right_up = lateral_heights;
    std::vector<double> left_down(lateral_heights.rbegin(), lateral_heights.rend());

    UnstructuredDomain dom;
    std::vector<Vec2> bottom;
    for (double x : detail::subdivide(0.0, 1.0, h)) bottom.push_back({x, 0.0});
    dom.polylines = {bottom, detail::vertical_line(1.0, right_up), graph,
                     detail::vertical_line(0.0, left_down)};
    dom.polyline_tags = {BoundaryTag::CellBottom, BoundaryTag::LateralPeriodic,
                         BoundaryTag::RoughInterface, BoundaryTag::LateralPeriodic};
    dom.inside = [&](const Vec2& p) {
        return p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < prof.evaluate(std::clamp(p.x, 0.0, 1.0));
    };
    dom.sizing = [h](const Vec2&) { return h; };
    dom.subdomain = SubdomainTag::Fluid;
    for (double x = h; x < 1.0; x += h)
        for (double y = h; y < top; y += h) dom.interior_candidates.push_back({x, y});

    Mesh mesh = build_unstructured(std::move(dom));

    // periodic pairing: lateral heights are identical on both sides
    std::map<double, int> left, right;
    for (const auto& e : mesh.boundary_edges) {
        if (e.tag != BoundaryTag::LateralPeriodic) continue;
        for (int v : {e.a, e.b}) {
            if (mesh.vertices[v].x == 0.0) left[mesh.vertices[v].y] = v;
            if (mesh.vertices[v].x == 1.0) right[mesh.vertices[v].y] = v;
        }
    }
    if (left.size() != right.size())
        throw std::runtime_error("triangulate_cell: periodic boundary mismatch");
    auto lit = left.begin();
    auto rit = right.begin();
    for (; lit != left.end(); ++lit, ++rit) {
        if (std::abs(lit->first - rit->first) > 1e-12)
            throw std::runtime_error("triangulate_cell: periodic heights differ");
        mesh.periodic_pairs.emplace_back(lit->second, rit->second);
    }
    return mesh;
}

/// Single conforming mesh of Omega = (0,1)^2 with Fluid/Solid tags and the
/// rough interface Gamma_eps as a shared edge set.
inline Mesh triangulate_micro(const LayerDomain& domain, double h_bulk, double h_layer,
                              double grading = 0.15) {
    const RoughnessProfile& prof = domain.profile;
    const double eps = domain.epsilon;
    if (!(h_layer > 0.0 && h_layer < eps * prof.gamma0 / 2.0))
        throw std::invalid_argument("triangulate_micro: h_layer too large for the layer");
    if (!(h_bulk > 0.0 && h_bulk <= 0.25))
        throw std::invalid_argument("triangulate_micro: invalid h_bulk");

    auto frac_cell = [&](double x) {
        double s = x / eps;
        double f = s - std::floor(s);
        if (x >= 1.0 - 1e-14) f = 1.0;
        if (x <= 1e-14) f = 0.0;
        return f;
    };
    auto height = [&](double x) { return eps * prof.evaluate(frac_cell(x)); };
    auto slope = [&](double x) { return prof.derivative(frac_cell(x)); };

    // mandatory interface stations: cell edges and scaled profile breakpoints
    std::vector<double> stations;
    for (int k = 0; k < domain.cell_count; ++k)
        for (double b : prof.breakpoints()) stations.push_back((k + b) * eps);

    std::vector<Vec2> interface_pts =
        detail::march_graph(0.0, 1.0, height, slope, h_layer, stations);

    const double lat_top = height(0.0);  // fluid lateral extends to eps*gamma(0)
    // identical height lists on both laterals; the inflow-profile kink at
    // eps*gamma0 is a mandatory node so piecewise data interpolates exactly
    std::vector<double> lat_heights;
    {
        auto lower = detail::subdivide(0.0, eps * prof.gamma0, h_layer);
        lat_heights = lower;
        if (lat_top > eps * prof.gamma0 + 1e-14) {
            auto upper = detail::subdivide(eps * prof.gamma0, lat_top, h_layer);
            lat_heights.insert(lat_heights.end(), upper.begin() + 1, upper.end());
        }
    }

    // ---- fluid submesh
    UnstructuredDomain fdom;
    {
        std::vector<Vec2> bottom;
        for (double x : detail::subdivide(0.0, 1.0, h_layer)) bottom.push_back({x, 0.0});
        std::vector<Vec2> graph_rl(interface_pts.rbegin(), interface_pts.rend());
        std::vector<double> up = lat_heights;
        std::vector<double> down(lat_heights.rbegin(), lat_heights.rend());
        fdom.polylines = {bottom, detail::vertical_line(1.0, up), graph_rl,
                          detail::vertical_line(0.0, down)};
        fdom.polyline_tags = {BoundaryTag::Bottom,
                              domain.inflow_left ? BoundaryTag::Outflow : BoundaryTag::Inflow,
                              BoundaryTag::RoughInterface,
                              domain.inflow_left ? BoundaryTag::Inflow : BoundaryTag::Outflow};
        fdom.inside = [&, eps](const Vec2& p) {
            return p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < height(std::clamp(p.x, 0.0, 1.0));
        };
        fdom.sizing = [h_layer](const Vec2&) { return h_layer; };
        fdom.subdomain = SubdomainTag::Fluid;
        for (double x = h_layer; x < 1.0; x += h_layer)
            for (double y = h_layer; y < eps; y += h_layer) fdom.interior_candidates.push_back({x, y});
    }
    Mesh fluid = build_unstructured(std::move(fdom));

    // ---- solid submesh (reuses the identical interface polyline points)
    UnstructuredDomain sdom;
    {
        std::vector<double> up = detail::graded(lat_top, 1.0, h_layer, h_bulk, grading);
        std::vector<double> down(up.rbegin(), up.rend());
        std::vector<Vec2> top_line;
        for (double x : detail::subdivide(1.0, 0.0, h_bulk)) top_line.push_back({x, 1.0});
        sdom.polylines = {interface_pts, detail::vertical_line(1.0, up), top_line,
                          detail::vertical_line(0.0, down)};
        sdom.polyline_tags = {BoundaryTag::RoughInterface, BoundaryTag::SolidOuter,
                              BoundaryTag::SolidOuter, BoundaryTag::SolidOuter};
        sdom.inside = [&](const Vec2& p) {
            return p.x > 0.0 && p.x < 1.0 && p.y < 1.0 && p.y > height(std::clamp(p.x, 0.0, 1.0));
        };
        sdom.sizing = [&, eps, h_layer, h_bulk, grading](const Vec2& p) {
            return std::min(h_bulk, h_layer + grading * std::max(0.0, p.y - eps) * 4.0);
        };
        sdom.subdomain = SubdomainTag::Solid;
        // graded interior rows above the layer plus fine rows inside the teeth band
        for (double y = eps * prof.gamma0 + h_layer; y < eps + h_layer; y += h_layer)
            for (double x = h_layer; x < 1.0; x += h_layer) sdom.interior_candidates.push_back({x, y});
        double y = eps + h_layer;
        double hy = h_layer;
        while (y < 1.0) {
            for (double x = hy; x < 1.0; x += hy) sdom.interior_candidates.push_back({x, y});
            hy = std::min(h_bulk, hy * (1.0 + grading * 4.0));
            y += hy;
        }
    }
    Mesh solid = build_unstructured(std::move(sdom));

    // ---- merge with exact-coordinate dedupe along the interface
    Mesh mesh = fluid;
    std::map<std::pair<double, double>, int> index;
    for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v)
        index[{mesh.vertices[v].x, mesh.vertices[v].y}] = v;
    std::vector<int> remap(solid.vertices.size(), -1);
    for (int v = 0; v < static_cast<int>(solid.vertices.size()); ++v) {
        auto [it, inserted] =
            index.try_emplace({solid.vertices[v].x, solid.vertices[v].y},
                              static_cast<int>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back(solid.vertices[v]);
        remap[v] = it->second;
    }
    for (const auto& t : solid.triangles)
        mesh.triangles.push_back({{remap[t.v[0]], remap[t.v[1]], remap[t.v[2]]}, t.tag});
    std::set<std::pair<int, int>> have_edges;
    for (const auto& e : mesh.boundary_edges) have_edges.insert(std::minmax(e.a, e.b));
    for (const auto& e : solid.boundary_edges) {
        const auto key = std::minmax(remap[e.a], remap[e.b]);
        if (have_edges.count(key)) continue;  // shared interface edges kept once
        have_edges.insert(key);
        mesh.boundary_edges.push_back({remap[e.a], remap[e.b], e.tag});
    }
    return mesh;
}

/// Structured mesh of the macroscopic bulk (0,1)^2 plus the 1D interface
/// mesh of Sigma sharing the bottom boundary vertices.
inline std::pair<Mesh, InterfaceMesh1D> triangulate_macro(double h) {
    if (!(h > 0.0 && h <= 0.1 + 1e-12))
        throw std::invalid_argument("triangulate_macro: need h <= 0.1");
    const int n = std::max(2, static_cast<int>(std::ceil(1.0 / h)));
    Mesh mesh;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            mesh.triangles.push_back({{vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)}, SubdomainTag::Bulk});
            mesh.triangles.push_back({{vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)}, SubdomainTag::Bulk});
        }
    }
    for (int i = 0; i < n; ++i) {
        mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), BoundaryTag::Bottom});
        mesh.boundary_edges.push_back({vid(i, n), vid(i + 1, n), BoundaryTag::SolidOuter});
    }
    for (int j = 0; j < n; ++j) {
        mesh.boundary_edges.push_back({vid(0, j), vid(0, j + 1), BoundaryTag::SolidOuter});
        mesh.boundary_edges.push_back({vid(n, j), vid(n, j + 1), BoundaryTag::SolidOuter});
    }

    InterfaceMesh1D iface;
    for (int i = 0; i <= n; ++i) {
        iface.vertices.push_back(static_cast<double>(i) / n);
        iface.trace_to_bulk.push_back(vid(i, 0));
    }
    for (int i = 0; i < n; ++i) iface.segments.push_back({i, i + 1});
    return {std::move(mesh), std::move(iface)};
}

/// Plain-text dump: first line "nv nt", then "x y" per vertex, then
/// "i j k tag" per triangle.
inline std::string dump_mesh(const Mesh& mesh) {
    std::string out;
    out += std::to_string(mesh.vertices.size()) + " " + std::to_string(mesh.triangles.size()) + "\n";
    char buf[96];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x, v.y);
        out += buf;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(buf, sizeof buf, "%d %d %d %d\n", t.v[0], t.v[1], t.v[2],
                      static_cast<int>(t.tag));
        out += buf;
    }
    return out;
}

}  // namespace roughlayer
