#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "fpp/lattice.hpp"
#include "fpp/weights.hpp"

namespace fpp {

struct Geodesic {
    std::vector<Point> vertices;  // from source to sink
    std::vector<Edge> edges;
    double time = 0;
};

// One solver owns its scratch buffers; create one per thread and reuse it
// across trials. Searches run over the confinement region of the endpoint
// pair, which provably contains every geodesic for weights in [a, b].
class GeodesicSolver {
public:
    // Hard cap on search vertices; ~40M doubles of labels.
    static constexpr int64_t kMaxVertices = 40'000'000;

    Geodesic shortest_path(const EdgeWeightFn& weights, const ConfinementRegion& region,
                           const Point& u, const Point& v);
    double passage_time(const EdgeWeightFn& weights, const ConfinementRegion& region,
                        const Point& u, const Point& v);

    // Meet-in-the-middle variant; returns the passage time only. Kept behind
    // its own entry point so experiments always use the canonical search.
    double passage_time_bidirectional(const EdgeWeightFn& weights, const ConfinementRegion& region,
                                      const Point& u, const Point& v);

    // True iff a second walk exists with time within tol of optimal.
    bool tie_diagnostic(const EdgeWeightFn& weights, const ConfinementRegion& region,
                        const Point& u, const Point& v, double tol);

private:
    void prepare(const Box& box);

    std::unique_ptr<VertexIndexer> indexer_;
    std::vector<double> dist_;
    std::vector<int16_t> pred_;  // direction from vertex back to its predecessor
    std::vector<uint32_t> epoch_;
    uint32_t cur_epoch_ = 0;
};

Geodesic shortest_path(const EdgeEnvironment& env, const Point& u, const Point& v);
double passage_time(const EdgeEnvironment& env, const Point& u, const Point& v);

// Exhaustive oracle: simple-path enumeration for up to 16 region vertices, a
// label-correcting sweep for up to 10^4. Test use only.
std::pair<double, std::vector<Point>> brute_force_passage_time(const EdgeWeightFn& weights,
                                                               const Point& u, const Point& v,
                                                               const ConfinementRegion& region);

bool geodesic_tie_diagnostic(const EdgeEnvironment& env, const Point& u, const Point& v,
                             double tol);

}  // namespace fpp
