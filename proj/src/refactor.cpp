#include "krausfold/refactor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace kf {

namespace {

void set_why(std::string *why, std::string msg) {
    if (why) *why = std::move(msg);
}

// Weights of one pattern at its nodes: node id -> |entry|^2.
struct PatternWeights {
    std::vector<std::pair<int, double>> at;
};

}  // namespace

std::optional<CVector> cancellation_row(std::span<const Matrix> ops, std::span<const Position> forbidden) {
    const std::size_t m = ops.size();
    if (m == 0) return std::nullopt;
    CVector chosen;
    if (forbidden.empty()) {
        chosen.assign(m, 0.0);
        chosen[0] = 1.0;
        return chosen;
    }
    Matrix sys(forbidden.size(), m);
    double scale = 0.0;
    for (std::size_t f = 0; f < forbidden.size(); ++f)
        for (std::size_t n = 0; n < m; ++n) {
            sys(f, n) = ops[n](forbidden[f].first, forbidden[f].second);
            scale = std::max(scale, std::abs(sys(f, n)));
        }
    const Svd dec = svd(sys);
    const double cut = kStructTol * std::max(1.0, scale);
    std::size_t rank = 0;
    for (double s : dec.sigma)
        if (s > cut) ++rank;
    if (rank >= m) return std::nullopt;

    // Null-space basis = trailing right singular vectors. Pick the projection of
    // the first canonical vector with non-negligible overlap so the result does
    // not depend on how the SVD orients a multi-dimensional null space.
    std::vector<CVector> basis;
    for (std::size_t k = rank; k < m; ++k) {
        CVector v(m);
        for (std::size_t n = 0; n < m; ++n) v[n] = dec.v(n, k);
        basis.push_back(std::move(v));
    }
    for (std::size_t e = 0; e < m && chosen.empty(); ++e) {
        CVector p(m);
        for (const auto &b : basis) {
            const Complex coeff = std::conj(b[e]);
            for (std::size_t n = 0; n < m; ++n) p[n] += coeff * b[n];
        }
        if (norm(p) > 1e-6) chosen = std::move(p);
    }
    const double nrm = norm(chosen);
    for (auto &z : chosen) z /= nrm;
    for (const auto &z : chosen)
        if (std::abs(z) > kZeroTol) {
            const Complex phase = std::conj(z) / std::abs(z);
            for (auto &w : chosen) w *= phase;
            break;
        }
    return chosen;
}

std::optional<PatternSolve> solve_pattern_decomposition(std::span<const Matrix> ops,
                                                        std::span<const std::vector<Position>> patterns,
                                                        std::string *why) {
    if (ops.empty()) {
        set_why(why, "no operators");
        return std::nullopt;
    }
    const std::size_t d = ops.front().rows();

    std::map<Position, int> node_of;
    std::vector<Position> nodes;
    for (const auto &p : patterns) {
        if (p.empty() || p.size() > 2) {
            set_why(why, "pattern with " + std::to_string(p.size()) + " positions is not supported");
            return std::nullopt;
        }
        for (const auto &pos : p)
            if (!node_of.count(pos)) {
                node_of[pos] = static_cast<int>(nodes.size());
                nodes.push_back(pos);
            }
    }
    const int n_nodes = static_cast<int>(nodes.size());

    double scale = 0.0;
    for (const auto &k : ops)
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) {
                const double a = std::abs(k(r, c));
                scale = std::max(scale, a);
                if (a > kStructTol && !node_of.count({static_cast<int>(r), static_cast<int>(c)})) {
                    set_why(why, "operator support outside the target patterns");
                    return std::nullopt;
                }
            }
    const double tol = 1e-12 * std::max(1.0, scale * scale);

    // Gram matrix G_pq = sum_n K_n[p] conj(K_n[q]).
    std::vector<std::vector<Complex>> gram(n_nodes, std::vector<Complex>(n_nodes));
    for (const auto &k : ops)
        for (int p = 0; p < n_nodes; ++p)
            for (int q = 0; q < n_nodes; ++q)
                gram[p][q] += k(nodes[p].first, nodes[p].second) * std::conj(k(nodes[q].first, nodes[q].second));
    auto diag = [&](int p) { return gram[p][p].real(); };

    struct Edge {
        int pattern, a, b;
        bool flat;  // |G_ab| ~ 0: the operator may sit at a single end.
    };
    std::vector<Edge> edges;
    std::vector<int> single(n_nodes, -1);
    std::vector<std::vector<int>> incident(n_nodes);
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        const auto &p = patterns[i];
        if (p.size() == 1) {
            const int n = node_of[p[0]];
            if (single[n] >= 0) {
                set_why(why, "two single-position patterns share a position");
                return std::nullopt;
            }
            single[n] = static_cast<int>(i);
        } else {
            const int a = node_of[p[0]], b = node_of[p[1]];
            const bool flat = std::abs(gram[a][b]) <= std::sqrt(tol);
            incident[a].push_back(static_cast<int>(edges.size()));
            incident[b].push_back(static_cast<int>(edges.size()));
            edges.push_back({static_cast<int>(i), a, b, flat});
        }
    }
    for (int p = 0; p < n_nodes; ++p)
        for (int q = p + 1; q < n_nodes; ++q) {
            if (std::abs(gram[p][q]) <= std::sqrt(tol)) continue;
            const bool covered = std::any_of(edges.begin(), edges.end(), [&](const Edge &e) {
                return (e.a == p && e.b == q) || (e.a == q && e.b == p);
            });
            if (!covered) {
                set_why(why, "coherence between positions not joined by any target pattern");
                return std::nullopt;
            }
        }
    for (int p = 0; p < n_nodes; ++p)
        if (incident[p].size() > 2) {
            set_why(why, "a position belongs to more than two two-position patterns");
            return std::nullopt;
        }

    std::vector<PatternWeights> weights(patterns.size());
    std::vector<bool> done_edge(edges.size(), false), done_node(n_nodes, false);

    // Walks a chain of edges starting at `start` with `x` placed on the first
    // edge at `start`. Returns per-step weights and the leftover at the last node.
    struct Walk {
        bool ok = true;
        std::vector<std::pair<double, double>> w;  // (at near node, at far node) per edge
        double leftover = 0.0;
    };
    auto walk = [&](const std::vector<int> &chain, const std::vector<int> &chain_nodes, double x) {
        Walk out;
        double carry = x;
        for (std::size_t s = 0; s < chain.size(); ++s) {
            const Edge &e = edges[chain[s]];
            const int near = chain_nodes[s], far = chain_nodes[s + 1];
            const double g2 = std::norm(gram[near][far]);
            double w_near = carry, w_far;
            if (w_near < -tol) {
                out.ok = false;
                return out;
            }
            w_near = std::max(w_near, 0.0);
            if (e.flat) {
                w_far = 0.0;
            } else if (w_near <= tol) {
                out.ok = false;
                return out;
            } else {
                w_far = g2 / w_near;
            }
            out.w.emplace_back(w_near, w_far);
            carry = diag(far) - w_far;
        }
        out.leftover = carry;
        return out;
    };

    auto commit = [&](const std::vector<int> &chain, const std::vector<int> &chain_nodes, const Walk &w) {
        for (std::size_t s = 0; s < chain.size(); ++s) {
            const Edge &e = edges[chain[s]];
            weights[e.pattern].at = {{chain_nodes[s], w.w[s].first}, {chain_nodes[s + 1], w.w[s].second}};
            done_edge[chain[s]] = true;
        }
        for (int n : chain_nodes) done_node[n] = true;
    };

    for (int start = 0; start < n_nodes; ++start) {
        if (done_node[start]) continue;
        // Collect the component as an ordered chain.
        std::vector<int> comp_nodes{start}, comp_edges;
        {
            std::vector<bool> seen_e(edges.size(), false);
            // Extend from `start` in one direction, then check whether the walk closes.
            int cur = start;
            while (true) {
                int next_edge = -1;
                for (int ei : incident[cur])
                    if (!seen_e[ei]) {
                        next_edge = ei;
                        break;
                    }
                if (next_edge < 0) break;
                seen_e[next_edge] = true;
                const Edge &e = edges[next_edge];
                const int nxt = e.a == cur ? e.b : e.a;
                comp_edges.push_back(next_edge);
                if (nxt == start) break;
                comp_nodes.push_back(nxt);
                cur = nxt;
            }
            // If `start` was an interior node of a path, restart from an endpoint.
            const bool cycle = !comp_edges.empty() && comp_nodes.size() == comp_edges.size();
            if (!cycle && incident[start].size() == 2) {
                int other = -1;
                for (int ei : incident[start])
                    if (!seen_e[ei]) other = ei;
                if (other >= 0) {
                    // Walk the other direction to find the true endpoint, then rebuild.
                    int prev = start, node = edges[other].a == start ? edges[other].b : edges[other].a;
                    while (incident[node].size() == 2) {
                        const int e0 = incident[node][0], e1 = incident[node][1];
                        const int ne = (edges[e0].a == prev || edges[e0].b == prev) ? e1 : e0;
                        prev = node;
                        node = edges[ne].a == node ? edges[ne].b : edges[ne].a;
                    }
                    comp_nodes = {node};
                    comp_edges.clear();
                    std::vector<bool> seen(edges.size(), false);
                    int c = node;
                    while (true) {
                        int ne = -1;
                        for (int ei : incident[c])
                            if (!seen[ei]) ne = ei;
                        if (ne < 0) break;
                        seen[ne] = true;
                        comp_edges.push_back(ne);
                        c = edges[ne].a == c ? edges[ne].b : edges[ne].a;
                        comp_nodes.push_back(c);
                    }
                }
            }
        }

        const bool cycle = !comp_edges.empty() && comp_nodes.size() == comp_edges.size();

        if (comp_edges.empty()) {
            const int n = start;
            if (single[n] >= 0) {
                weights[single[n]].at = {{n, std::max(diag(n), 0.0)}};
            } else if (diag(n) > tol) {
                set_why(why, "weight at a position not covered by any target pattern");
                return std::nullopt;
            }
            done_node[n] = true;
            continue;
        }

        if (!cycle) {
            // Path: feed each edge everything available, absorb the remainder at
            // the far end. Try both orientations.
            auto attempt = [&](std::vector<int> ch, std::vector<int> nd) -> bool {
                const int first = nd.front(), last = nd.back();
                Walk w = walk(ch, nd, diag(first));
                if (!w.ok) return false;
                const bool absorber = single[last] >= 0 || edges[ch.back()].flat;
                if (w.leftover < -tol) return false;
                if (w.leftover > tol && !absorber) return false;
                commit(ch, nd, w);
                for (int n : nd)
                    if (single[n] >= 0) weights[single[n]].at = {{n, 0.0}};
                if (w.leftover > tol) {
                    if (single[last] >= 0) {
                        weights[single[last]].at = {{last, w.leftover}};
                    } else {
                        auto &pw = weights[edges[ch.back()].pattern].at;
                        pw[1].second += w.leftover;
                    }
                }
                return true;
            };
            if (attempt(comp_edges, comp_nodes)) continue;
            std::reverse(comp_edges.begin(), comp_edges.end());
            std::reverse(comp_nodes.begin(), comp_nodes.end());
            if (attempt(comp_edges, comp_nodes)) continue;
            set_why(why, "path component has no nonnegative weight assignment");
            return std::nullopt;
        }

        // Cycle: rotate so node 0 carries a singleton if any, then solve for the
        // weight x that edge 0 takes at node 0.
        {
            auto it = std::find_if(comp_nodes.begin(), comp_nodes.end(), [&](int n) { return single[n] >= 0; });
            if (it != comp_nodes.end()) {
                const auto shift = it - comp_nodes.begin();
                std::rotate(comp_nodes.begin(), it, comp_nodes.end());
                std::rotate(comp_edges.begin(), comp_edges.begin() + shift, comp_edges.end());
            }
        }
        const int v0 = comp_nodes.front();
        std::vector<int> closed_nodes = comp_nodes;
        closed_nodes.push_back(v0);
        const bool has_single = single[v0] >= 0;
        auto residual = [&](double x, Walk *keep) -> std::optional<double> {
            Walk w = walk(comp_edges, closed_nodes, x);
            if (!w.ok) return std::nullopt;
            // leftover = G_00 - w_last(x); must equal x (+ singleton weight).
            const double r = w.leftover - x;
            if (keep) *keep = w;
            return r;
        };
        const double hi = diag(v0);
        constexpr int kScan = 4000;
        std::optional<double> prev_r;
        double prev_x = 0.0, root = -1.0;
        for (int s = 1; s <= kScan && root < 0; ++s) {
            // Quadratic spacing resolves roots near zero weight.
            const double t = static_cast<double>(s) / kScan;
            const double x = hi * t * t;
            const auto r = residual(x, nullptr);
            if (!r) {
                prev_r.reset();
                continue;
            }
            if (has_single && *r >= -tol) {
                root = x;
                break;
            }
            if (std::abs(*r) <= tol) {
                root = x;
                break;
            }
            if (prev_r && ((*prev_r < 0) != (*r < 0))) {
                double lo_x = prev_x, hi_x = x, lo_r = *prev_r;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo_x + hi_x);
                    const auto rm = residual(mid, nullptr);
                    if (!rm) break;
                    if ((*rm < 0) == (lo_r < 0)) {
                        lo_x = mid;
                        lo_r = *rm;
                    } else {
                        hi_x = mid;
                    }
                }
                root = 0.5 * (lo_x + hi_x);
            }
            prev_r = r;
            prev_x = x;
        }
        if (root < 0) {
            set_why(why, "cycle component has no weight assignment closing the loop");
            return std::nullopt;
        }
        Walk w;
        const auto r = residual(root, &w);
        if (!r || *r < -1e-9 * std::max(1.0, hi)) {
            set_why(why, "cycle root failed to validate");
            return std::nullopt;
        }
        commit(comp_edges, closed_nodes, w);
        for (int n : comp_nodes)
            if (single[n] >= 0) weights[single[n]].at = {{n, n == v0 ? std::max(*r, 0.0) : 0.0}};
    }

    PatternSolve out;
    out.outputs.assign(patterns.size(), Matrix(d, d));
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        const auto &pw = weights[i].at;
        Matrix &m = out.outputs[i];
        if (pw.empty()) continue;
        if (pw.size() == 1) {
            const auto [n, w] = pw[0];
            m(nodes[n].first, nodes[n].second) = std::sqrt(std::max(w, 0.0));
            continue;
        }
        auto [a, wa] = pw[0];
        auto [b, wb] = pw[1];
        if (wa < wb) {
            std::swap(a, b);
            std::swap(wa, wb);
        }
        if (wa <= 0.0) continue;
        const double ra = std::sqrt(wa);
        m(nodes[a].first, nodes[a].second) = ra;
        // L[a] conj(L[b]) = G_ab.
        const Complex gb = std::abs(gram[a][b]) <= std::sqrt(tol) ? Complex(std::sqrt(std::max(wb, 0.0)))
                                                                     : std::conj(gram[a][b]) / ra;
        m(nodes[b].first, nodes[b].second) = gb;
    }
    return out;
}

UnitaryMatrix relating_unitary(std::span<const Matrix> from, std::span<const Matrix> to) {
    const std::size_t m = from.size();
    if (to.size() > m) throw std::invalid_argument("relating_unitary: more target operators than sources");
    if (m == 0) throw std::invalid_argument("relating_unitary: empty operator list");
    const std::size_t d = from.front().rows();
    const std::size_t p = d * d;
    Matrix a(p, m), b(p, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < p; ++i) a(i, j) = from[j].entries()[i];
    for (std::size_t j = 0; j < to.size(); ++j)
        for (std::size_t i = 0; i < p; ++i) b(i, j) = to[j].entries()[i];

    const Svd dec = svd(a);
    const double cut = 1e-10 * std::max(1.0, dec.sigma.empty() ? 0.0 : dec.sigma.front());
    std::size_t rank = 0;
    for (double s : dec.sigma)
        if (s > cut) ++rank;

    // X = S_r^-1 W_r^dagger B has orthonormal rows when B B^dagger = A A^dagger.
    Matrix x(rank, m);
    for (std::size_t r = 0; r < rank; ++r)
        for (std::size_t j = 0; j < m; ++j) {
            Complex s = 0.0;
            for (std::size_t i = 0; i < p; ++i) s += std::conj(dec.u(i, r)) * b(i, j);
            x(r, j) = s / dec.sigma[r];
        }
    std::vector<CVector> rows;
    if (rank > 0) {
        const double defect = frobenius_distance(mat_mul(x, x.adjoint()), Matrix::identity(rank));
        if (defect > 1e-6)
            throw std::invalid_argument("relating_unitary: operator lists describe different maps (defect " +
                                        std::to_string(defect) + ")");
        // Polar projection onto the nearest matrix with orthonormal rows.
        const Svd xs = svd(x);
        Matrix q(rank, m);
        for (std::size_t r = 0; r < rank; ++r)
            for (std::size_t j = 0; j < m; ++j) {
                Complex s = 0.0;
                for (std::size_t k = 0; k < rank; ++k) s += xs.u(r, k) * std::conj(xs.v(j, k));
                q(r, j) = s;
            }
        for (std::size_t r = 0; r < rank; ++r) rows.push_back(q.row(r));
    }
    const UnitaryMatrix y = complete_to_unitary(rows, m);
    // U^T = V Y, so U = Y^T V^T.
    Matrix vy = mat_mul(dec.v, y.matrix());
    Matrix u(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) u(i, j) = vy(j, i);
    return UnitaryMatrix(std::move(u), 1e-9);
}

}  // namespace kf
