#pragma once

#include <array>
#include <cstdint>
#include <compare>
#include <vector>

namespace fpp {

// Dimensions 2..4 cover every experiment we run; fixed storage keeps Point
// trivially copyable and cheap to hash.
inline constexpr int kMaxDim = 4;

struct Point {
    int16_t dim = 0;
    std::array<int32_t, kMaxDim> c{};

    static Point zero(int d);
    static Point of(std::initializer_list<int32_t> coords);
    static Point axis_unit(int d, int axis, int32_t len = 1);

    int32_t operator[](int i) const { return c[i]; }
    int32_t& operator[](int i) { return c[i]; }

    friend Point operator+(const Point& a, const Point& b);
    friend Point operator-(const Point& a, const Point& b);
    friend bool operator==(const Point& a, const Point& b);
    // Lexicographic; total order used for canonical edge bases.
    friend std::strong_ordering operator<=>(const Point& a, const Point& b);
};

int64_t l1_norm(const Point& p);
double l2_norm(const Point& p);
double dot(const Point& a, const Point& b);

// Canonical lattice edge: base is the lexicographically smaller endpoint,
// axis the coordinate in which the endpoints differ by one.
struct Edge {
    Point base;
    int8_t axis = 0;

    static Edge between(const Point& u, const Point& v);  // throws if not adjacent
    Point other() const;  // base + unit(axis)
    std::array<double, kMaxDim> center() const;
    Edge translated(const Point& h) const;

    friend bool operator==(const Edge& a, const Edge& b);
    friend std::strong_ordering operator<=>(const Edge& a, const Edge& b);
};

struct EdgeHash {
    size_t operator()(const Edge& e) const;
};

double edge_center_distance(const Edge& e, const Edge& f);

// Axis-aligned box of lattice points, inclusive on both ends.
struct Box {
    Point lo, hi;

    bool contains(const Point& p) const;
    int64_t volume() const;
    Box inflated(int32_t margin) const;
};

// Row-major dense indexing of a box; vertex ids are contiguous in [0, volume).
class VertexIndexer {
public:
    explicit VertexIndexer(const Box& box);

    int64_t size() const { return size_; }
    int64_t index(const Point& p) const;
    Point point(int64_t idx) const;
    const Box& box() const { return box_; }

private:
    Box box_;
    std::array<int64_t, kMaxDim> stride_{};
    std::array<int32_t, kMaxDim> extent_{};
    int64_t size_ = 0;
};

// l1 ellipse {w : |w-source|_1 + |w-sink|_1 <= budget}; every geodesic between
// source and sink is contained in it when budget >= (b/a)*|source-sink|_1.
struct ConfinementRegion {
    Point source, sink;
    double budget = 0;

    bool contains(const Point& p) const;
    // Bounding box inflated by 2 lattice units to absorb half-integer edge
    // centers at the boundary.
    Box bounding_box() const;
};

ConfinementRegion confinement_region(const Point& u, const Point& v, double a, double b);

// Infinite cylinder of the given l2 radius around the line through 0 and
// direction.
struct Cylinder {
    Point direction;
    double radius = 0;

    Cylinder(const Point& direction, double radius);
    bool contains(const Point& w) const;
    bool contains(const std::array<double, kMaxDim>& w, int dim) const;
};

// Distance from p to the line through 0 and v (not the segment).
double line_distance(const Point& p, const Point& v);
double line_distance(const std::array<double, kMaxDim>& p, int dim, const Point& v);

// Points u with 0 <= (u, v_hat) <= ell that lie inside cyl(0, v, r).
// Boundary equalities count as inside.
std::vector<Point> cylinder_slab_filter(const std::vector<Point>& points,
                                        const Point& v, double ell, double r);

}  // namespace fpp
