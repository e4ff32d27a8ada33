#include "fpp/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fpp {

namespace {

void require_same_dim(int a, int b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

Point Point::zero(int d) {
    if (d < 2 || d > kMaxDim) throw std::invalid_argument("Point: dimension must be in [2, 4]");
    Point p;
    p.dim = static_cast<int16_t>(d);
    return p;
}

Point Point::of(std::initializer_list<int32_t> coords) {
    Point p = Point::zero(static_cast<int>(coords.size()));
    int i = 0;
    for (int32_t v : coords) p.c[i++] = v;
    return p;
}

Point Point::axis_unit(int d, int axis, int32_t len) {
    Point p = Point::zero(d);
    if (axis < 0 || axis >= d) throw std::invalid_argument("Point: axis out of range");
    p.c[axis] = len;
    return p;
}

Point operator+(const Point& a, const Point& b) {
    require_same_dim(a.dim, b.dim, "Point+");
    Point r = a;
    for (int i = 0; i < a.dim; ++i) r.c[i] += b.c[i];
    return r;
}

Point operator-(const Point& a, const Point& b) {
    require_same_dim(a.dim, b.dim, "Point-");
    Point r = a;
    for (int i = 0; i < a.dim; ++i) r.c[i] -= b.c[i];
    return r;
}

bool operator==(const Point& a, const Point& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
        if (a.c[i] != b.c[i]) return false;
    return true;
}

std::strong_ordering operator<=>(const Point& a, const Point& b) {
    if (a.dim != b.dim) return a.dim <=> b.dim;
    for (int i = 0; i < a.dim; ++i)
        if (a.c[i] != b.c[i]) return a.c[i] <=> b.c[i];
    return std::strong_ordering::equal;
}

int64_t l1_norm(const Point& p) {
    int64_t s = 0;
    for (int i = 0; i < p.dim; ++i) s += std::abs(static_cast<int64_t>(p.c[i]));
    return s;
}

double l2_norm(const Point& p) {
    double s = 0;
    for (int i = 0; i < p.dim; ++i) s += double(p.c[i]) * double(p.c[i]);
    return std::sqrt(s);
}

double dot(const Point& a, const Point& b) {
    require_same_dim(a.dim, b.dim, "dot");
    double s = 0;
    for (int i = 0; i < a.dim; ++i) s += double(a.c[i]) * double(b.c[i]);
    return s;
}

Edge Edge::between(const Point& u, const Point& v) {
    require_same_dim(u.dim, v.dim, "Edge::between");
    int axis = -1;
    for (int i = 0; i < u.dim; ++i) {
        if (u.c[i] != v.c[i]) {
            if (axis >= 0 || std::abs(u.c[i] - v.c[i]) != 1)
                throw std::invalid_argument("Edge::between: endpoints not adjacent");
            axis = i;
        }
    }
    if (axis < 0) throw std::invalid_argument("Edge::between: endpoints equal");
    Edge e;
    e.base = (u < v) ? u : v;
    e.axis = static_cast<int8_t>(axis);
    return e;
}

Point Edge::other() const {
    Point p = base;
    p.c[axis] += 1;
    return p;
}

std::array<double, kMaxDim> Edge::center() const {
    std::array<double, kMaxDim> m{};
    for (int i = 0; i < base.dim; ++i) m[i] = double(base.c[i]);
    m[axis] += 0.5;
    return m;
}

Edge Edge::translated(const Point& h) const {
    Edge e = *this;
    e.base = base + h;
    return e;
}

bool operator==(const Edge& a, const Edge& b) {
    return a.axis == b.axis && a.base == b.base;
}

std::strong_ordering operator<=>(const Edge& a, const Edge& b) {
    if (auto c = a.base <=> b.base; c != std::strong_ordering::equal) return c;
    return a.axis <=> b.axis;
}

size_t EdgeHash::operator()(const Edge& e) const {
    uint64_t h = 0x243f6a8885a308d3ull;
    for (int i = 0; i < e.base.dim; ++i) {
        h ^= static_cast<uint64_t>(static_cast<int64_t>(e.base.c[i])) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    h ^= static_cast<uint64_t>(e.axis) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return static_cast<size_t>(h);
}

double edge_center_distance(const Edge& e, const Edge& f) {
    require_same_dim(e.base.dim, f.base.dim, "edge_center_distance");
    auto a = e.center();
    auto b = f.center();
    double s = 0;
    for (int i = 0; i < e.base.dim; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

bool Box::contains(const Point& p) const {
    for (int i = 0; i < p.dim; ++i)
        if (p.c[i] < lo.c[i] || p.c[i] > hi.c[i]) return false;
    return true;
}

int64_t Box::volume() const {
    int64_t v = 1;
    for (int i = 0; i < lo.dim; ++i) v *= int64_t(hi.c[i]) - int64_t(lo.c[i]) + 1;
    return v;
}

Box Box::inflated(int32_t margin) const {
    Box b = *this;
    for (int i = 0; i < lo.dim; ++i) {
        b.lo.c[i] -= margin;
        b.hi.c[i] += margin;
    }
    return b;
}

VertexIndexer::VertexIndexer(const Box& box) : box_(box) {
    int d = box.lo.dim;
    size_ = 1;
    for (int i = d - 1; i >= 0; --i) {
        extent_[i] = box.hi.c[i] - box.lo.c[i] + 1;
        if (extent_[i] <= 0) throw std::invalid_argument("VertexIndexer: empty box");
        stride_[i] = size_;
        size_ *= extent_[i];
    }
}

int64_t VertexIndexer::index(const Point& p) const {
    int64_t idx = 0;
    for (int i = 0; i < p.dim; ++i) idx += stride_[i] * (p.c[i] - box_.lo.c[i]);
    return idx;
}

Point VertexIndexer::point(int64_t idx) const {
    Point p = box_.lo;
    for (int i = 0; i < p.dim; ++i) {
        int64_t q = idx / stride_[i];
        p.c[i] = box_.lo.c[i] + static_cast<int32_t>(q % extent_[i]);
    }
    return p;
}

bool ConfinementRegion::contains(const Point& p) const {
    return double(l1_norm(p - source) + l1_norm(p - sink)) <= budget;
}

Box ConfinementRegion::bounding_box() const {
    int d = source.dim;
    Box b;
    b.lo = Point::zero(d);
    b.hi = Point::zero(d);
    // Deviating by s beyond the endpoint interval along one axis costs 2s on
    // top of |source-sink|_1, so s <= (budget - |source-sink|_1) / 2.
    double base = double(l1_norm(source - sink));
    int32_t slack = static_cast<int32_t>(std::max(0.0, std::floor((budget - base) / 2.0)));
    for (int i = 0; i < d; ++i) {
        b.lo.c[i] = std::min(source.c[i], sink.c[i]) - slack;
        b.hi.c[i] = std::max(source.c[i], sink.c[i]) + slack;
    }
    return b.inflated(2);
}

ConfinementRegion confinement_region(const Point& u, const Point& v, double a, double b) {
    if (a <= 0) throw std::invalid_argument("confinement_region: a must be positive");
    if (b < a) throw std::invalid_argument("confinement_region: requires a <= b");
    require_same_dim(u.dim, v.dim, "confinement_region");
    ConfinementRegion r;
    r.source = u;
    r.sink = v;
    r.budget = (b / a) * double(l1_norm(u - v));
    return r;
}

Cylinder::Cylinder(const Point& direction_, double radius_) : direction(direction_), radius(radius_) {
    if (l1_norm(direction) == 0) throw std::invalid_argument("Cylinder: direction must be nonzero");
    if (radius < 0) throw std::invalid_argument("Cylinder: radius must be nonnegative");
}

bool Cylinder::contains(const Point& w) const {
    return line_distance(w, direction) <= radius;
}

bool Cylinder::contains(const std::array<double, kMaxDim>& w, int dim) const {
    return line_distance(w, dim, direction) <= radius;
}

double line_distance(const Point& p, const Point& v) {
    std::array<double, kMaxDim> w{};
    for (int i = 0; i < p.dim; ++i) w[i] = double(p.c[i]);
    return line_distance(w, p.dim, v);
}

double line_distance(const std::array<double, kMaxDim>& p, int dim, const Point& v) {
    double nv = l2_norm(v);
    if (nv == 0) throw std::invalid_argument("line_distance: direction must be nonzero");
    double proj = 0, nn = 0;
    for (int i = 0; i < dim; ++i) {
        proj += p[i] * double(v.c[i]);
        nn += p[i] * p[i];
    }
    proj /= nv;
    double d2 = nn - proj * proj;
    return d2 > 0 ? std::sqrt(d2) : 0.0;
}

std::vector<Point> cylinder_slab_filter(const std::vector<Point>& points,
                                        const Point& v, double ell, double r) {
    if (l1_norm(v) == 0) throw std::invalid_argument("cylinder_slab_filter: v must be nonzero");
    if (ell <= 0) throw std::invalid_argument("cylinder_slab_filter: ell must be positive");
    if (r < 0) throw std::invalid_argument("cylinder_slab_filter: r must be nonnegative");
    double nv = l2_norm(v);
    std::vector<Point> out;
    for (const Point& u : points) {
        double t = dot(u, v) / nv;
        if (t < 0 || t > ell) continue;
        if (line_distance(u, v) > r) continue;
        out.push_back(u);
    }
    return out;
}

}  // namespace fpp
