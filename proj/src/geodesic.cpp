#include "fpp/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>

namespace fpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline Point step(const Point& p, int dir) {
    Point q = p;
    q.c[dir >> 1] += (dir & 1) ? -1 : +1;
    return q;
}

// Canonical edge between p and step(p, dir).
inline Edge dir_edge(const Point& p, int dir) {
    Edge e;
    e.axis = static_cast<int8_t>(dir >> 1);
    if (dir & 1) {
        e.base = p;
        e.base.c[dir >> 1] -= 1;
    } else {
        e.base = p;
    }
    return e;
}

using HeapEntry = std::pair<double, int64_t>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>>;

}  // namespace

void GeodesicSolver::prepare(const Box& box) {
    if (box.volume() > kMaxVertices)
        throw std::invalid_argument("GeodesicSolver: region too large");
    bool same = indexer_ && indexer_->box().lo == box.lo && indexer_->box().hi == box.hi;
    if (!same) {
        indexer_ = std::make_unique<VertexIndexer>(box);
        dist_.assign(indexer_->size(), 0.0);
        pred_.assign(indexer_->size(), -1);
        epoch_.assign(indexer_->size(), 0);
        cur_epoch_ = 0;
    }
    ++cur_epoch_;
    if (cur_epoch_ == 0) {  // stamp wrap
        std::fill(epoch_.begin(), epoch_.end(), 0);
        cur_epoch_ = 1;
    }
}

Geodesic GeodesicSolver::shortest_path(const EdgeWeightFn& weights, const ConfinementRegion& region,
                                       const Point& u, const Point& v) {
    Geodesic g;
    if (u == v) {
        g.vertices.push_back(u);
        return g;
    }
    prepare(region.bounding_box());
    const VertexIndexer& ix = *indexer_;
    const int d = u.dim;
    const int ndirs = 2 * d;

    MinHeap heap;
    int64_t src = ix.index(u), snk = ix.index(v);
    dist_[src] = 0;
    pred_[src] = -1;
    epoch_[src] = cur_epoch_;
    heap.push({0.0, src});

    while (!heap.empty()) {
        auto [dcur, cur] = heap.top();
        heap.pop();
        if (dcur != dist_[cur]) continue;  // stale
        if (cur == snk) break;
        Point p = ix.point(cur);
        for (int dir = 0; dir < ndirs; ++dir) {
            Point q = step(p, dir);
            if (!region.contains(q)) continue;
            Edge e = dir_edge(p, dir);
            double nd = dcur + weights.weight(e);
            int64_t qi = ix.index(q);
            if (epoch_[qi] != cur_epoch_) {
                epoch_[qi] = cur_epoch_;
                dist_[qi] = nd;
                pred_[qi] = static_cast<int16_t>(dir ^ 1);
                heap.push({nd, qi});
            } else if (nd < dist_[qi]) {
                dist_[qi] = nd;
                pred_[qi] = static_cast<int16_t>(dir ^ 1);
                heap.push({nd, qi});
            } else if (nd == dist_[qi]) {
                // Deterministic tie: keep the lower canonical edge.
                Edge incumbent = dir_edge(q, pred_[qi]);
                if (e < incumbent) pred_[qi] = static_cast<int16_t>(dir ^ 1);
            }
        }
    }
    if (epoch_[snk] != cur_epoch_)
        throw std::logic_error("GeodesicSolver: sink unreached within confinement region");

    std::vector<Point> rev;
    Point p = v;
    int64_t pi = snk;
    while (!(p == u)) {
        rev.push_back(p);
        int back = pred_[pi];
        p = step(p, back);
        pi = ix.index(p);
    }
    rev.push_back(u);
    g.vertices.assign(rev.rbegin(), rev.rend());
    g.edges.reserve(g.vertices.size() - 1);
    for (size_t i = 0; i + 1 < g.vertices.size(); ++i)
        g.edges.push_back(Edge::between(g.vertices[i], g.vertices[i + 1]));
    g.time = dist_[snk];
    return g;
}

double GeodesicSolver::passage_time(const EdgeWeightFn& weights, const ConfinementRegion& region,
                                    const Point& u, const Point& v) {
    return shortest_path(weights, region, u, v).time;
}

double GeodesicSolver::passage_time_bidirectional(const EdgeWeightFn& weights,
                                                  const ConfinementRegion& region, const Point& u,
                                                  const Point& v) {
    if (u == v) return 0.0;
    Box box = region.bounding_box();
    if (box.volume() > kMaxVertices)
        throw std::invalid_argument("GeodesicSolver: region too large");
    VertexIndexer ix(box);
    const int ndirs = 2 * u.dim;

    std::vector<double> dist[2];
    std::vector<uint8_t> seen[2], settled[2];
    for (int s = 0; s < 2; ++s) {
        dist[s].assign(ix.size(), kInf);
        seen[s].assign(ix.size(), 0);
        settled[s].assign(ix.size(), 0);
    }
    MinHeap heap[2];
    int64_t ends[2] = {ix.index(u), ix.index(v)};
    for (int s = 0; s < 2; ++s) {
        dist[s][ends[s]] = 0;
        seen[s][ends[s]] = 1;
        heap[s].push({0.0, ends[s]});
    }

    double best = kInf;
    while (!heap[0].empty() && !heap[1].empty()) {
        if (heap[0].top().first + heap[1].top().first >= best) break;
        int s = heap[0].top().first <= heap[1].top().first ? 0 : 1;
        auto [dcur, cur] = heap[s].top();
        heap[s].pop();
        if (dcur != dist[s][cur]) continue;
        settled[s][cur] = 1;
        Point p = ix.point(cur);
        for (int dir = 0; dir < ndirs; ++dir) {
            Point q = step(p, dir);
            if (!region.contains(q)) continue;
            double w = weights.weight(dir_edge(p, dir));
            double nd = dcur + w;
            int64_t qi = ix.index(q);
            if (!seen[s][qi] || nd < dist[s][qi]) {
                seen[s][qi] = 1;
                dist[s][qi] = nd;
                heap[s].push({nd, qi});
            }
            if (seen[1 - s][qi]) best = std::min(best, nd + dist[1 - s][qi]);
        }
    }
    if (best == kInf) throw std::logic_error("GeodesicSolver: endpoints not connected");
    return best;
}

bool GeodesicSolver::tie_diagnostic(const EdgeWeightFn& weights, const ConfinementRegion& region,
                                    const Point& u, const Point& v, double tol) {
    if (!(tol >= 0)) throw std::invalid_argument("tie_diagnostic: tol must be nonnegative");
    Box box = region.bounding_box();
    if (box.volume() > kMaxVertices)
        throw std::invalid_argument("GeodesicSolver: region too large");
    VertexIndexer ix(box);
    const int ndirs = 2 * u.dim;

    // Two-shortest-walks Dijkstra: each vertex settles at most twice; the
    // second settle of the sink is the runner-up time.
    std::vector<uint8_t> cnt(ix.size(), 0);
    MinHeap heap;
    int64_t snk = ix.index(v);
    heap.push({0.0, ix.index(u)});
    double best = kInf, second = kInf;
    while (!heap.empty()) {
        auto [dcur, cur] = heap.top();
        heap.pop();
        if (cnt[cur] >= 2) continue;
        ++cnt[cur];
        if (cur == snk) {
            if (cnt[cur] == 1)
                best = dcur;
            else {
                second = dcur;
                break;
            }
        }
        Point p = ix.point(cur);
        for (int dir = 0; dir < ndirs; ++dir) {
            Point q = step(p, dir);
            if (!region.contains(q)) continue;
            heap.push({dcur + weights.weight(dir_edge(p, dir)), ix.index(q)});
        }
    }
    if (best == kInf) throw std::logic_error("GeodesicSolver: sink unreached");
    return second <= best + tol;
}

Geodesic shortest_path(const EdgeEnvironment& env, const Point& u, const Point& v) {
    GeodesicSolver solver;
    auto region = confinement_region(u, v, env.distribution().a(), env.distribution().b());
    return solver.shortest_path(env, region, u, v);
}

double passage_time(const EdgeEnvironment& env, const Point& u, const Point& v) {
    return shortest_path(env, u, v).time;
}

bool geodesic_tie_diagnostic(const EdgeEnvironment& env, const Point& u, const Point& v,
                             double tol) {
    GeodesicSolver solver;
    auto region = confinement_region(u, v, env.distribution().a(), env.distribution().b());
    return solver.tie_diagnostic(env, region, u, v, tol);
}

namespace {

// All simple paths by depth-first search; feasible only for tiny regions.
void enumerate_paths(const EdgeWeightFn& weights, const std::vector<Point>& verts,
                     const std::vector<std::vector<std::pair<int, Edge>>>& adj, int cur, int goal,
                     std::vector<uint8_t>& used, std::vector<int>& stack, double time_so_far,
                     double& best, std::vector<int>& best_path) {
    if (cur == goal) {
        if (time_so_far < best) {
            best = time_so_far;
            best_path = stack;
        }
        return;
    }
    for (const auto& [next, e] : adj[cur]) {
        if (used[next]) continue;
        used[next] = 1;
        stack.push_back(next);
        enumerate_paths(weights, verts, adj, next, goal, used, stack,
                        time_so_far + weights.weight(e), best, best_path);
        stack.pop_back();
        used[next] = 0;
    }
}

}  // namespace

std::pair<double, std::vector<Point>> brute_force_passage_time(const EdgeWeightFn& weights,
                                                               const Point& u, const Point& v,
                                                               const ConfinementRegion& region) {
    Box box = region.bounding_box();
    VertexIndexer ix(box);
    std::vector<Point> verts;
    std::vector<int64_t> vid(ix.size(), -1);
    for (int64_t i = 0; i < ix.size(); ++i) {
        Point p = ix.point(i);
        if (region.contains(p)) {
            vid[i] = int64_t(verts.size());
            verts.push_back(p);
        }
    }
    const int64_t n = int64_t(verts.size());
    if (n > 10'000) throw std::invalid_argument("brute_force_passage_time: region too large");

    const int ndirs = 2 * u.dim;
    int su = -1, sv = -1;
    for (int64_t i = 0; i < n; ++i) {
        if (verts[i] == u) su = int(i);
        if (verts[i] == v) sv = int(i);
    }
    if (su < 0 || sv < 0)
        throw std::invalid_argument("brute_force_passage_time: endpoint outside region");
    if (su == sv) return {0.0, {u}};

    std::vector<std::vector<std::pair<int, Edge>>> adj(n);
    for (int64_t i = 0; i < n; ++i) {
        for (int dir = 0; dir < ndirs; ++dir) {
            Point q = step(verts[i], dir);
            if (!box.contains(q)) continue;
            int64_t qi = vid[ix.index(q)];
            if (qi < 0) continue;
            adj[i].push_back({int(qi), dir_edge(verts[i], dir)});
        }
    }

    if (n <= 16) {
        std::vector<uint8_t> used(n, 0);
        std::vector<int> stack{su}, best_path;
        double best = kInf;
        used[su] = 1;
        enumerate_paths(weights, verts, adj, su, sv, used, stack, 0.0, best, best_path);
        std::vector<Point> path;
        for (int i : best_path) path.push_back(verts[i]);
        return {best, path};
    }

    // Label-correcting sweep to fixpoint; exact minimum of forward float sums.
    std::vector<double> dist(n, kInf);
    std::vector<int> pred(n, -1);
    dist[su] = 0;
    bool changed = true;
    for (int64_t pass = 0; pass <= n && changed; ++pass) {
        changed = false;
        for (int64_t i = 0; i < n; ++i) {
            if (dist[i] == kInf) continue;
            for (const auto& [next, e] : adj[i]) {
                double nd = dist[i] + weights.weight(e);
                if (nd < dist[next]) {
                    dist[next] = nd;
                    pred[next] = int(i);
                    changed = true;
                }
            }
        }
    }
    std::vector<Point> path;
    for (int cur = sv; cur != -1; cur = pred[cur]) path.push_back(verts[cur]);
    std::reverse(path.begin(), path.end());
    return {dist[sv], path};
}

}  // namespace fpp
