#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "roughlayer/mesh.hpp"
#include "roughlayer/quadrature.hpp"
#include "roughlayer/sparse.hpp"

namespace roughlayer {

enum class ElementOrder { P1, P2 };

/// Scalar or 2-vector Lagrange space over a (possibly subdomain-filtered)
/// triangle set. P2 midpoint nodes are synthesized per edge. Constraints
/// (Dirichlet values, periodic identifications) are stored per DOF and
/// eliminated when a LinearSystem is reduced.
class FunctionSpace {
  public:
    struct Constraint {
        enum Kind { Free, Fixed, Alias } kind = Free;
        double value = 0.0;
        int master = -1;
    };

    FunctionSpace(const Mesh& mesh, ElementOrder order, int arity,
                  std::optional<SubdomainTag> filter = std::nullopt)
        : mesh_(&mesh), order_(order), arity_(arity), filter_(filter) {
        if (arity != 1 && arity != 2)
            throw std::invalid_argument("FunctionSpace: arity must be 1 or 2");
        build();
    }

    const Mesh& mesh() const { return *mesh_; }
    ElementOrder order() const { return order_; }
    int arity() const { return arity_; }
    int n_nodes() const { return static_cast<int>(node_pos_.size()); }
    int n_dofs() const { return n_nodes() * arity_; }
    const std::vector<int>& elements() const { return elems_; }
    const Vec2& node_position(int node) const { return node_pos_[node]; }

    int vertex_node(int v) const { return vertex_node_[v]; }
    int edge_node(int a, int b) const {
        auto it = edge_node_.find(ukey(a, b));
        return it == edge_node_.end() ? -1 : it->second;
    }
    int dof(int node, int comp = 0) const { return node * arity_ + comp; }

    int nodes_per_element() const { return order_ == ElementOrder::P1 ? 3 : 6; }

    /// Node ids of mesh triangle t (which must belong to this space),
    /// ordered vertices first, then P2 midpoints opposite each vertex.
    std::array<int, 6> element_nodes(int t) const {
        const auto& v = mesh_->triangles[t].v;
        std::array<int, 6> n{vertex_node_[v[0]], vertex_node_[v[1]], vertex_node_[v[2]],
                             -1, -1, -1};
        if (order_ == ElementOrder::P2) {
            n[3] = edge_node(v[1], v[2]);
            n[4] = edge_node(v[2], v[0]);
            n[5] = edge_node(v[0], v[1]);
        }
        for (int i = 0; i < nodes_per_element(); ++i)
            if (n[i] < 0) throw std::logic_error("FunctionSpace: element outside space");
        return n;
    }

    bool contains_element(int t) const {
        return !filter_ || mesh_->triangles[t].tag == *filter_;
    }

    // ---- constraints

    void fix_dof(int d, double value) {
        auto& c = cons_[d];
        c.kind = Constraint::Fixed;
        c.value = value;
        c.master = -1;
    }

    void alias_dof(int d, int master) {
        if (cons_[d].kind == Constraint::Fixed) return;  // Dirichlet wins
        cons_[d].kind = Constraint::Alias;
        cons_[d].master = master;
    }

    /// Dirichlet data on all nodes lying on boundary edges with the tag.
    void set_dirichlet(BoundaryTag tag, const std::function<double(const Vec2&, int)>& value) {
        for (const auto& e : mesh_->boundary_edges) {
            if (e.tag != tag) continue;
            const int na = vertex_node_[e.a], nb = vertex_node_[e.b];
            if (na < 0 || nb < 0) continue;  // edge not in this subdomain's closure
            for (int c = 0; c < arity_; ++c) {
                fix_dof(dof(na, c), value(mesh_->vertices[e.a], c));
                fix_dof(dof(nb, c), value(mesh_->vertices[e.b], c));
            }
            if (order_ == ElementOrder::P2) {
                const int nm = edge_node(e.a, e.b);
                if (nm >= 0) {
                    const Vec2 mid = (mesh_->vertices[e.a] + mesh_->vertices[e.b]) * 0.5;
                    for (int c = 0; c < arity_; ++c) fix_dof(dof(nm, c), value(mid, c));
                }
            }
        }
    }

    void set_dirichlet(BoundaryTag tag, double value) {
        set_dirichlet(tag, [value](const Vec2&, int) { return value; });
    }

    /// Identifies right-lateral DOFs with their left partners using the
    /// mesh's periodic vertex pairs (and matching lateral edges for P2).
    void set_periodic() {
        for (const auto& [left, right] : mesh_->periodic_pairs) {
            const int nl = vertex_node_[left], nr = vertex_node_[right];
            if (nl < 0 || nr < 0) continue;
            for (int c = 0; c < arity_; ++c) alias_dof(dof(nr, c), dof(nl, c));
        }
        if (order_ != ElementOrder::P2) return;
        // match lateral boundary edges between x=0 and x=1 by y-interval
        std::map<std::pair<double, double>, int> left_edges;
        for (const auto& e : mesh_->boundary_edges) {
            if (e.tag != BoundaryTag::LateralPeriodic) continue;
            const Vec2& a = mesh_->vertices[e.a];
            const Vec2& b = mesh_->vertices[e.b];
            if (a.x > 0.5) continue;
            const int nm = edge_node(e.a, e.b);
            if (nm >= 0) left_edges[{std::min(a.y, b.y), std::max(a.y, b.y)}] = nm;
        }
        for (const auto& e : mesh_->boundary_edges) {
            if (e.tag != BoundaryTag::LateralPeriodic) continue;
            const Vec2& a = mesh_->vertices[e.a];
            const Vec2& b = mesh_->vertices[e.b];
            if (a.x < 0.5) continue;
            const int nm = edge_node(e.a, e.b);
            if (nm < 0) continue;
            auto it = left_edges.find({std::min(a.y, b.y), std::max(a.y, b.y)});
            if (it == left_edges.end())
                throw std::runtime_error("set_periodic: unmatched lateral edge");
            for (int c = 0; c < arity_; ++c) alias_dof(dof(nm, c), dof(it->second, c));
        }
    }

    const std::vector<Constraint>& constraints() const { return cons_; }

  private:
    const Mesh* mesh_;
    ElementOrder order_;
    int arity_;
    std::optional<SubdomainTag> filter_;
    std::vector<int> elems_;
    std::vector<int> vertex_node_;
    std::unordered_map<std::int64_t, int> edge_node_;
    std::vector<Vec2> node_pos_;
    std::vector<Constraint> cons_;

    static std::int64_t ukey(int a, int b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    }

    void build() {
        const int nv = static_cast<int>(mesh_->vertices.size());
        vertex_node_.assign(nv, -1);
        for (int t = 0; t < static_cast<int>(mesh_->triangles.size()); ++t) {
            if (!contains_element(t)) continue;
            elems_.push_back(t);
            for (int i = 0; i < 3; ++i) {
                const int v = mesh_->triangles[t].v[i];
                if (vertex_node_[v] < 0) {
                    vertex_node_[v] = static_cast<int>(node_pos_.size());
                    node_pos_.push_back(mesh_->vertices[v]);
                }
            }
        }
        if (order_ == ElementOrder::P2) {
            for (int t : elems_) {
                const auto& v = mesh_->triangles[t].v;
                for (int i = 0; i < 3; ++i) {
                    const int a = v[(i + 1) % 3], b = v[(i + 2) % 3];
                    auto [it, inserted] =
                        edge_node_.try_emplace(ukey(a, b), static_cast<int>(node_pos_.size()));
                    if (inserted)
                        node_pos_.push_back((mesh_->vertices[a] + mesh_->vertices[b]) * 0.5);
                }
            }
        }
        cons_.assign(n_dofs(), Constraint{});
    }
};

struct DiscreteField {
    const FunctionSpace* space = nullptr;
    std::vector<double> coef;
    double time = 0.0;

    DiscreteField() = default;
    explicit DiscreteField(const FunctionSpace& s)
        : space(&s), coef(static_cast<std::size_t>(s.n_dofs()), 0.0) {}
};

namespace detail {

/// Per-element geometric data for straight triangles.
struct ElementGeometry {
    Vec2 p[3];
    Vec2 grad_lambda[3];
    double area;
    double h;  // longest edge

    ElementGeometry(const Mesh& mesh, int t) {
        for (int i = 0; i < 3; ++i) p[i] = mesh.vertices[mesh.triangles[t].v[i]];
        const double det =
            (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[1].y - p[0].y) * (p[2].x - p[0].x);
        area = 0.5 * det;
        for (int i = 0; i < 3; ++i) {
            const Vec2& a = p[(i + 1) % 3];
            const Vec2& b = p[(i + 2) % 3];
            grad_lambda[i] = {(a.y - b.y) / det, (b.x - a.x) / det};
        }
        h = 0.0;
        for (int i = 0; i < 3; ++i) h = std::max(h, (p[(i + 1) % 3] - p[i]).norm());
    }

    Vec2 point(double l0, double l1, double l2) const {
        return p[0] * l0 + p[1] * l1 + p[2] * l2;
    }
};

/// Shape values and gradients at a barycentric point. P1 uses the first
/// three entries; P2 all six.
struct ShapeEval {
    double N[6];
    Vec2 dN[6];

    ShapeEval(const ElementGeometry& g, ElementOrder order, double l1, double l2) {
        const double l0 = 1.0 - l1 - l2;
        const double L[3] = {l0, l1, l2};
        if (order == ElementOrder::P1) {
            for (int i = 0; i < 3; ++i) {
                N[i] = L[i];
                dN[i] = g.grad_lambda[i];
            }
            for (int i = 3; i < 6; ++i) { N[i] = 0.0; dN[i] = {0.0, 0.0}; }
        } else {
            for (int i = 0; i < 3; ++i) {
                N[i] = L[i] * (2.0 * L[i] - 1.0);
                dN[i] = g.grad_lambda[i] * (4.0 * L[i] - 1.0);
            }
            for (int i = 0; i < 3; ++i) {
                const int a = (i + 1) % 3, b = (i + 2) % 3;
                N[3 + i] = 4.0 * L[a] * L[b];
                dN[3 + i] = g.grad_lambda[a] * (4.0 * L[b]) + g.grad_lambda[b] * (4.0 * L[a]);
            }
        }
    }
};

/// Barycentric coordinates (l1, l2) of a physical point; the point lies
/// inside iff l1, l2 >= 0 and l1 + l2 <= 1.
inline std::pair<double, double> barycentric(const ElementGeometry& g, const Vec2& x) {
    const Vec2 d = x - g.p[0];
    const double det = 2.0 * g.area;
    const double l1 = ((g.p[2].y - g.p[0].y) * d.x - (g.p[2].x - g.p[0].x) * d.y) / det;
    const double l2 = ((g.p[0].y - g.p[1].y) * d.x + (g.p[1].x - g.p[0].x) * d.y) / det;
    return {l1, l2};
}

}  // namespace detail

/// Evaluates a DiscreteField inside a mesh triangle at barycentric
/// coordinates (l1, l2 toward vertices 1 and 2).
inline double field_value(const DiscreteField& f, int t, double l1, double l2, int comp = 0) {
    const FunctionSpace& s = *f.space;
    const detail::ElementGeometry g(s.mesh(), t);
    const detail::ShapeEval sh(g, s.order(), l1, l2);
    const auto nodes = s.element_nodes(t);
    double v = 0.0;
    for (int i = 0; i < s.nodes_per_element(); ++i)
        v += sh.N[i] * f.coef[s.dof(nodes[i], comp)];
    return v;
}

inline Vec2 field_gradient(const DiscreteField& f, int t, double l1, double l2, int comp = 0) {
    const FunctionSpace& s = *f.space;
    const detail::ElementGeometry g(s.mesh(), t);
    const detail::ShapeEval sh(g, s.order(), l1, l2);
    const auto nodes = s.element_nodes(t);
    Vec2 v{0.0, 0.0};
    for (int i = 0; i < s.nodes_per_element(); ++i)
        v = v + sh.dN[i] * f.coef[s.dof(nodes[i], comp)];
    return v;
}

inline Vec2 field_vector(const DiscreteField& f, int t, double l1, double l2) {
    return {field_value(f, t, l1, l2, 0), field_value(f, t, l1, l2, 1)};
}

/// Uniform-grid point locator over a triangle subset. Queries return the
/// containing triangle with clamped barycentric coordinates; points
/// slightly outside (boundary roundoff) snap to the nearest candidate.
class PointLocator {
  public:
    struct Hit {
        int tri = -1;
        double l1 = 0.0;
        double l2 = 0.0;
    };

    PointLocator(const Mesh& mesh, const std::vector<int>& elems) : mesh_(&mesh), elems_(elems) {
        if (elems.empty()) throw std::invalid_argument("PointLocator: empty element set");
        double area = 0.0;
        minx_ = miny_ = 1e30;
        double maxx = -1e30, maxy = -1e30;
        for (int t : elems) {
            area += std::abs(mesh.triangle_area(t));
            for (int i = 0; i < 3; ++i) {
                const Vec2& p = mesh.vertices[mesh.triangles[t].v[i]];
                minx_ = std::min(minx_, p.x);
                miny_ = std::min(miny_, p.y);
                maxx = std::max(maxx, p.x);
                maxy = std::max(maxy, p.y);
            }
        }
        cell_ = std::max(1e-12, std::sqrt(area / static_cast<double>(elems.size())));
        nx_ = std::max(1, static_cast<int>(std::ceil((maxx - minx_) / cell_)));
        ny_ = std::max(1, static_cast<int>(std::ceil((maxy - miny_) / cell_)));
        bins_.resize(static_cast<std::size_t>(nx_) * ny_);
        for (int t : elems) {
            double tx0 = 1e30, ty0 = 1e30, tx1 = -1e30, ty1 = -1e30;
            for (int i = 0; i < 3; ++i) {
                const Vec2& p = mesh.vertices[mesh.triangles[t].v[i]];
                tx0 = std::min(tx0, p.x);
                ty0 = std::min(ty0, p.y);
                tx1 = std::max(tx1, p.x);
                ty1 = std::max(ty1, p.y);
            }
            for (int bx = binx(tx0); bx <= binx(tx1); ++bx)
                for (int by = biny(ty0); by <= biny(ty1); ++by)
                    bins_[static_cast<std::size_t>(by) * nx_ + bx].push_back(t);
        }
    }

    Hit locate(const Vec2& p) const {
        Hit best;
        double best_defect = 1e30;
        const int bx = binx(p.x), by = biny(p.y);
        for (int rx = std::max(0, bx - 1); rx <= std::min(nx_ - 1, bx + 1); ++rx) {
            for (int ry = std::max(0, by - 1); ry <= std::min(ny_ - 1, by + 1); ++ry) {
                for (int t : bins_[static_cast<std::size_t>(ry) * nx_ + rx]) {
                    const detail::ElementGeometry g(*mesh_, t);
                    auto [l1, l2] = detail::barycentric(g, p);
                    const double defect = std::max({-l1, -l2, l1 + l2 - 1.0, 0.0});
                    if (defect < best_defect) {
                        best_defect = defect;
                        best = {t, l1, l2};
                        if (defect == 0.0) return clamp(best);
                    }
                }
            }
        }
        if (best.tri < 0 || best_defect > 0.5)
            throw std::runtime_error("PointLocator: point far outside element set");
        return clamp(best);
    }

  private:
    const Mesh* mesh_;
    std::vector<int> elems_;
    double minx_ = 0.0, miny_ = 0.0, cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> bins_;

    int binx(double x) const {
        return std::clamp(static_cast<int>((x - minx_) / cell_), 0, nx_ - 1);
    }
    int biny(double y) const {
        return std::clamp(static_cast<int>((y - miny_) / cell_), 0, ny_ - 1);
    }
    static Hit clamp(Hit h) {
        h.l1 = std::max(0.0, h.l1);
        h.l2 = std::max(0.0, h.l2);
        const double s = h.l1 + h.l2;
        if (s > 1.0) {
            h.l1 /= s;
            h.l2 /= s;
        }
        return h;
    }
};

// ---------------------------------------------------------------------------
// monolithic constrained system

/// Accumulates triplets/rhs over concatenated spaces, applies all Dirichlet
/// and alias constraints on reduction, and expands solutions back to full
/// coefficient vectors. A zero-mean gauge adds one Lagrange multiplier row.
class LinearSystem {
  public:
    int add_space(const FunctionSpace& s) {
        const int off = n_;
        spaces_.push_back(&s);
        offsets_.push_back(off);
        for (const auto& c : s.constraints()) {
            FunctionSpace::Constraint shifted = c;
            if (shifted.kind == FunctionSpace::Constraint::Alias) shifted.master += off;
            cons_.push_back(shifted);
        }
        n_ += s.n_dofs();
        rhs_.resize(n_, 0.0);
        return off;
    }

    /// Unstructured block of dofs without a FunctionSpace (1D interface
    /// unknowns, multipliers); constraints set via fix/alias below.
    int add_block(int ndofs) {
        const int off = n_;
        cons_.resize(cons_.size() + ndofs);
        n_ += ndofs;
        rhs_.resize(n_, 0.0);
        return off;
    }

    void fix(int d, double value) { cons_[d] = {FunctionSpace::Constraint::Fixed, value, -1}; }
    void alias(int d, int master) {
        if (cons_[d].kind != FunctionSpace::Constraint::Fixed)
            cons_[d] = {FunctionSpace::Constraint::Alias, 0.0, master};
    }

    int size() const { return n_; }

    void add(int i, int j, double v) {
        if (v != 0.0) trips_.push_back({i, j, v});
    }
    void add_rhs(int i, double v) { rhs_[i] += v; }

    /// Constrains the weighted mean of a dof range to zero: weights w over
    /// dofs [off, off+w.size()). Equivalent to a symmetric Lagrange
    /// multiplier row, but realized by null-space projection at solve time
    /// (the operator must have the constant vector on this block as its
    /// kernel); this avoids a dense factor row.
    void add_zero_mean(int off, const std::vector<double>& weights) {
        gauges_.push_back({off, weights});
    }

    std::vector<double> solve(SolveMethod method = SolveMethod::DirectLU,
                              double tol = 1e-12) const {
        // resolve alias chains, Dirichlet terminal
        std::vector<int> target(n_);       // -1 for fixed, else terminal dof
        std::vector<double> fixed_val(n_, 0.0);
        for (int d = 0; d < n_; ++d) {
            int cur = d;
            int guard = 0;
            while (cons_[cur].kind == FunctionSpace::Constraint::Alias) {
                cur = cons_[cur].master;
                if (++guard > n_) throw std::logic_error("LinearSystem: alias cycle");
            }
            if (cons_[cur].kind == FunctionSpace::Constraint::Fixed) {
                target[d] = -1;
                fixed_val[d] = cons_[cur].value;
            } else {
                target[d] = cur;
            }
        }
        std::vector<int> reduced(n_, -1);
        int nr = 0;
        for (int d = 0; d < n_; ++d)
            if (target[d] == d) reduced[d] = nr++;
        for (int d = 0; d < n_; ++d)
            if (target[d] >= 0) reduced[d] = reduced[target[d]];

        std::vector<double> rb(nr, 0.0);
        for (int d = 0; d < n_; ++d)
            if (target[d] >= 0) rb[reduced[d]] += rhs_[d];
        std::vector<TripletEntry> rt;
        rt.reserve(trips_.size());
        for (const auto& e : trips_) {
            if (target[e.row] < 0) continue;  // fixed row eliminated
            const int ri = reduced[e.row];
            if (target[e.col] < 0)
                rb[ri] -= e.value * fixed_val[e.col];
            else
                rt.push_back({ri, reduced[e.col], e.value});
        }

        // zero-mean gauges: project the rhs onto the operator range (the
        // multiplier value), pin one representative dof per gauge block to
        // make the factorization regular, and shift the solution back onto
        // the exact constraint afterwards
        struct ReducedGauge {
            std::vector<double> w;    // reduced constraint weights
            std::vector<char> in;     // reduced dofs in the block (kernel vector)
            double fixed_part = 0.0;  // contribution of fixed dofs to w.x
            int pin = -1;
        };
        std::vector<ReducedGauge> rgauges;
        for (const auto& gauge : gauges_) {
            ReducedGauge rg;
            rg.w.assign(nr, 0.0);
            rg.in.assign(nr, 0);
            for (int j = 0; j < static_cast<int>(gauge.weights.size()); ++j) {
                const int d = gauge.offset + j;
                if (target[d] < 0) {
                    rg.fixed_part += gauge.weights[j] * fixed_val[d];
                } else {
                    rg.w[reduced[d]] += gauge.weights[j];
                    rg.in[reduced[d]] = 1;
                    if (rg.pin < 0) rg.pin = reduced[d];
                }
            }
            if (rg.pin < 0) throw std::logic_error("LinearSystem: gauge over fixed dofs only");
            double wn = 0.0, bn = 0.0;
            for (int i = 0; i < nr; ++i)
                if (rg.in[i]) {
                    wn += rg.w[i];
                    bn += rb[i];
                }
            const double lambda = bn / wn;
            for (int i = 0; i < nr; ++i) rb[i] -= lambda * rg.w[i];
            rgauges.push_back(std::move(rg));
        }
        if (!rgauges.empty()) {
            std::vector<char> pinned(nr, 0);
            for (const auto& rg : rgauges) pinned[rg.pin] = 1;
            for (auto& e : rt)
                if (pinned[e.row] || pinned[e.col]) e.value = 0.0;
            for (const auto& rg : rgauges) {
                rt.push_back({rg.pin, rg.pin, 1.0});
                rb[rg.pin] = 0.0;
            }
        }

        const SparseMatrix A = SparseMatrix::from_triplets(nr, nr, rt);
        std::vector<double> xr = solve_sparse(A, rb, method, tol);

        for (const auto& rg : rgauges) {
            double wx = rg.fixed_part, wn = 0.0;
            for (int i = 0; i < nr; ++i) {
                wx += rg.w[i] * xr[i];
                if (rg.in[i]) wn += rg.w[i];
            }
            const double shift = -wx / wn;
            for (int i = 0; i < nr; ++i)
                if (rg.in[i]) xr[i] += shift;
        }

        std::vector<double> x(n_, 0.0);
        for (int d = 0; d < n_; ++d)
            x[d] = target[d] < 0 ? fixed_val[d] : xr[reduced[d]];
        return x;
    }

  private:
    int n_ = 0;
    std::vector<const FunctionSpace*> spaces_;
    std::vector<int> offsets_;
    struct Gauge {
        int offset;
        std::vector<double> weights;
    };

    std::vector<FunctionSpace::Constraint> cons_;
    std::vector<TripletEntry> trips_;
    std::vector<double> rhs_;
    std::vector<Gauge> gauges_;
};

// ---------------------------------------------------------------------------
// operator assembly (scalar spaces)

enum class OperatorKind { Mass, Stiffness, Advection, Supg };

struct OperatorOptions {
    // coefficient multiplying the whole form (kappa for Stiffness, 1/eps
    // scalings, etc.); may vary in space
    std::function<double(const Vec2&)> coefficient = [](const Vec2&) { return 1.0; };
    // advecting velocity for Advection/Supg
    const DiscreteField* velocity = nullptr;
    // diffusivity entering the SUPG Peclet number
    double supg_kappa = 1.0;
};

/// Classical optimal 1D rule: tau = h/(2|v|) (coth(Pe) - 1/Pe).
inline double supg_tau(double vnorm, double h, double kappa) {
    if (vnorm * h < 1e-14) return 0.0;
    const double pe = vnorm * h / (2.0 * kappa);
    double xi;
    if (pe > 30.0)
        xi = 1.0 - 1.0 / pe;
    else if (pe < 1e-6)
        xi = pe / 3.0;  // series limit of coth(Pe) - 1/Pe
    else
        xi = 1.0 / std::tanh(pe) - 1.0 / pe;
    return h / (2.0 * vnorm) * xi;
}

/// Assembles one scalar bilinear form over the space's elements into the
/// sink (space-local DOF indices, shift by the system offset).
template <typename Sink>
void assemble_operator(const FunctionSpace& space, OperatorKind kind,
                       const OperatorOptions& opts, Sink&& sink) {
    if (space.arity() != 1)
        throw std::invalid_argument("assemble_operator: scalar spaces only");
    if ((kind == OperatorKind::Advection || kind == OperatorKind::Supg) && !opts.velocity)
        throw std::invalid_argument("assemble_operator: velocity field required");
    const int npe = space.nodes_per_element();
    for (int t : space.elements()) {
        const detail::ElementGeometry g(space.mesh(), t);
        const auto nodes = space.element_nodes(t);
        double tau = 0.0;
        if (kind == OperatorKind::Supg) {
            const Vec2 vc = field_vector(*opts.velocity, t, 1.0 / 3.0, 1.0 / 3.0);
            tau = supg_tau(vc.norm(), g.h, opts.supg_kappa);
            if (tau == 0.0) continue;
        }
        double local[6][6] = {};
        for (const auto& qp : tri_quad_deg4) {
            const detail::ShapeEval sh(g, space.order(), qp.a, qp.b);
            const Vec2 x = g.point(1.0 - qp.a - qp.b, qp.a, qp.b);
            const double w = qp.w * 2.0 * g.area * opts.coefficient(x);
            switch (kind) {
                case OperatorKind::Mass:
                    for (int i = 0; i < npe; ++i)
                        for (int j = 0; j < npe; ++j) local[i][j] += w * sh.N[i] * sh.N[j];
                    break;
                case OperatorKind::Stiffness:
                    for (int i = 0; i < npe; ++i)
                        for (int j = 0; j < npe; ++j)
                            local[i][j] += w * sh.dN[i].dot(sh.dN[j]);
                    break;
                case OperatorKind::Advection: {
                    const Vec2 v = field_vector(*opts.velocity, t, qp.a, qp.b);
                    for (int i = 0; i < npe; ++i)
                        for (int j = 0; j < npe; ++j)
                            local[i][j] += w * v.dot(sh.dN[j]) * sh.N[i];
                    break;
                }
                case OperatorKind::Supg: {
                    const Vec2 v = field_vector(*opts.velocity, t, qp.a, qp.b);
                    for (int i = 0; i < npe; ++i)
                        for (int j = 0; j < npe; ++j)
                            local[i][j] += w * tau * v.dot(sh.dN[j]) * v.dot(sh.dN[i]);
                    break;
                }
            }
        }
        for (int i = 0; i < npe; ++i)
            for (int j = 0; j < npe; ++j)
                if (local[i][j] != 0.0) sink(space.dof(nodes[i]), space.dof(nodes[j]), local[i][j]);
    }
}

inline SparseMatrix assemble_matrix(const FunctionSpace& space, OperatorKind kind,
                                    const OperatorOptions& opts = {}) {
    std::vector<TripletEntry> trips;
    assemble_operator(space, kind, opts,
                      [&](int i, int j, double v) { trips.push_back({i, j, v}); });
    return SparseMatrix::from_triplets(space.n_dofs(), space.n_dofs(), trips);
}

/// Volume load (f, phi); optional SUPG load tau (f, v.grad phi) is added
/// when a velocity is supplied (keeps the stabilized scheme consistent).
template <typename Sink>
void assemble_load(const FunctionSpace& space, const std::function<double(const Vec2&)>& f,
                   Sink&& sink, const DiscreteField* supg_velocity = nullptr,
                   double supg_kappa = 1.0) {
    const int npe = space.nodes_per_element();
    for (int t : space.elements()) {
        const detail::ElementGeometry g(space.mesh(), t);
        const auto nodes = space.element_nodes(t);
        double tau = 0.0;
        if (supg_velocity) {
            const Vec2 vc = field_vector(*supg_velocity, t, 1.0 / 3.0, 1.0 / 3.0);
            tau = supg_tau(vc.norm(), g.h, supg_kappa);
        }
        for (const auto& qp : tri_quad_deg4) {
            const detail::ShapeEval sh(g, space.order(), qp.a, qp.b);
            const Vec2 x = g.point(1.0 - qp.a - qp.b, qp.a, qp.b);
            const double w = qp.w * 2.0 * g.area * f(x);
            for (int i = 0; i < npe; ++i) sink(space.dof(nodes[i]), w * sh.N[i]);
            if (tau > 0.0) {
                const Vec2 v = field_vector(*supg_velocity, t, qp.a, qp.b);
                for (int i = 0; i < npe; ++i)
                    sink(space.dof(nodes[i]), w * tau * v.dot(sh.dN[i]));
            }
        }
    }
}

/// Line integral (f, phi) over boundary edges with the tag (3-point Gauss).
template <typename Sink>
void assemble_boundary_load(const FunctionSpace& space, BoundaryTag tag,
                            const std::function<double(const Vec2&)>& f, Sink&& sink) {
    for (const auto& e : space.mesh().boundary_edges) {
        if (e.tag != tag) continue;
        const int na = space.vertex_node(e.a), nb = space.vertex_node(e.b);
        if (na < 0 || nb < 0) continue;
        const Vec2& pa = space.mesh().vertices[e.a];
        const Vec2& pb = space.mesh().vertices[e.b];
        const double len = (pb - pa).norm();
        const int nm = space.order() == ElementOrder::P2 ? space.edge_node(e.a, e.b) : -1;
        for (const auto& gp : gauss3_unit) {
            const Vec2 x = pa + (pb - pa) * gp.x;
            const double w = gp.w * len * f(x);
            if (nm < 0) {
                sink(space.dof(na), w * (1.0 - gp.x));
                sink(space.dof(nb), w * gp.x);
            } else {
                const double s = gp.x;
                sink(space.dof(na), w * (1.0 - s) * (1.0 - 2.0 * s));
                sink(space.dof(nb), w * s * (2.0 * s - 1.0));
                sink(space.dof(nm), w * 4.0 * s * (1.0 - s));
            }
        }
    }
}

/// Lumped integral weights of each basis function, sum = measure of the
/// space's element union (used for zero-mean gauges).
inline std::vector<double> integral_weights(const FunctionSpace& space) {
    std::vector<double> w(static_cast<std::size_t>(space.n_dofs()), 0.0);
    for (int t : space.elements()) {
        const detail::ElementGeometry g(space.mesh(), t);
        const auto nodes = space.element_nodes(t);
        for (const auto& qp : tri_quad_deg4) {
            const detail::ShapeEval sh(g, space.order(), qp.a, qp.b);
            for (int i = 0; i < space.nodes_per_element(); ++i)
                w[space.dof(nodes[i])] += qp.w * 2.0 * g.area * sh.N[i];
        }
    }
    return w;
}

/// Symmetric PSD interface exchange alpha (jump, jump) over tagged edges:
/// block structure [[M, -M], [-M, M]] with M the interface mass matrix.
/// Both spaces must be P1 scalar sharing the edge geometry.
template <typename Sink>
void assemble_robin_coupling(const FunctionSpace& space_a, const FunctionSpace& space_b,
                             BoundaryTag tag, double alpha, int offset_a, int offset_b,
                             Sink&& sink) {
    if (space_a.order() != ElementOrder::P1 || space_b.order() != ElementOrder::P1 ||
        space_a.arity() != 1 || space_b.arity() != 1)
        throw std::invalid_argument("assemble_robin_coupling: P1 scalar spaces required");
    for (const auto& e : space_a.mesh().boundary_edges) {
        if (e.tag != tag) continue;
        const int a1 = space_a.vertex_node(e.a), a2 = space_a.vertex_node(e.b);
        const int b1 = space_b.vertex_node(e.a), b2 = space_b.vertex_node(e.b);
        if (a1 < 0 || a2 < 0 || b1 < 0 || b2 < 0)
            throw std::runtime_error("assemble_robin_coupling: interface node missing");
        const double len =
            (space_a.mesh().vertices[e.b] - space_a.mesh().vertices[e.a]).norm();
        const double m11 = alpha * len / 3.0, m12 = alpha * len / 6.0;
        const int A[2] = {offset_a + a1, offset_a + a2};
        const int B[2] = {offset_b + b1, offset_b + b2};
        const double M[2][2] = {{m11, m12}, {m12, m11}};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                sink(A[i], A[j], M[i][j]);
                sink(B[i], B[j], M[i][j]);
                sink(A[i], B[j], -M[i][j]);
                sink(B[i], A[j], -M[i][j]);
            }
    }
}

// ---------------------------------------------------------------------------
// Taylor-Hood Stokes

/// Assembles (mu grad u, grad v) - (p, div v) - (div u, q) into the sink;
/// velocity dofs at offset_v, pressure at offset_p. mu is sampled at
/// quadrature points from the evaluator (element id, physical point).
template <typename Sink>
void assemble_stokes(const FunctionSpace& vel, const FunctionSpace& pres,
                     const std::function<double(int, const Vec2&)>& mu, int offset_v,
                     int offset_p, Sink&& sink) {
    if (vel.order() != ElementOrder::P2 || vel.arity() != 2)
        throw std::invalid_argument("assemble_stokes: velocity must be P2 2-vector");
    if (pres.order() != ElementOrder::P1 || pres.arity() != 1)
        throw std::invalid_argument("assemble_stokes: pressure must be P1 scalar");
    for (int t : vel.elements()) {
        if (!pres.contains_element(t))
            throw std::logic_error("assemble_stokes: space element sets differ");
        const detail::ElementGeometry g(vel.mesh(), t);
        const auto vn = vel.element_nodes(t);
        const auto pn = pres.element_nodes(t);
        double Aloc[6][6] = {};       // per-component viscous block
        double Bloc[3][12] = {};      // -(div u, q)
        for (const auto& qp : tri_quad_deg4) {
            const detail::ShapeEval sh(g, ElementOrder::P2, qp.a, qp.b);
            const detail::ShapeEval shp(g, ElementOrder::P1, qp.a, qp.b);
            const Vec2 x = g.point(1.0 - qp.a - qp.b, qp.a, qp.b);
            const double w = qp.w * 2.0 * g.area;
            const double wmu = w * mu(t, x);
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) Aloc[i][j] += wmu * sh.dN[i].dot(sh.dN[j]);
            for (int q = 0; q < 3; ++q)
                for (int j = 0; j < 6; ++j) {
                    Bloc[q][2 * j] -= w * shp.N[q] * sh.dN[j].x;
                    Bloc[q][2 * j + 1] -= w * shp.N[q] * sh.dN[j].y;
                }
        }
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                if (Aloc[i][j] == 0.0) continue;
                for (int c = 0; c < 2; ++c)
                    sink(offset_v + vel.dof(vn[i], c), offset_v + vel.dof(vn[j], c), Aloc[i][j]);
            }
        for (int q = 0; q < 3; ++q)
            for (int j = 0; j < 12; ++j) {
                if (Bloc[q][j] == 0.0) continue;
                const int vd = offset_v + vel.dof(vn[j / 2], j % 2);
                const int pd = offset_p + pres.dof(pn[q]);
                sink(pd, vd, Bloc[q][j]);  // -(div u, q)
                sink(vd, pd, Bloc[q][j]);  // -(p, div v)
            }
    }
}

/// Volume load (f, v) on a 2-vector P2 space.
template <typename Sink>
void assemble_vector_load(const FunctionSpace& vel, const std::function<Vec2(const Vec2&)>& f,
                          int offset_v, Sink&& sink) {
    for (int t : vel.elements()) {
        const detail::ElementGeometry g(vel.mesh(), t);
        const auto nodes = vel.element_nodes(t);
        for (const auto& qp : tri_quad_deg4) {
            const detail::ShapeEval sh(g, ElementOrder::P2, qp.a, qp.b);
            const Vec2 x = g.point(1.0 - qp.a - qp.b, qp.a, qp.b);
            const Vec2 fv = f(x);
            const double w = qp.w * 2.0 * g.area;
            for (int i = 0; i < 6; ++i) {
                sink(offset_v + vel.dof(nodes[i], 0), w * sh.N[i] * fv.x);
                sink(offset_v + vel.dof(nodes[i], 1), w * sh.N[i] * fv.y);
            }
        }
    }
}

}  // namespace roughlayer
