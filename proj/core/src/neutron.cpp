#include "qsdp/neutron.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace qsdp {

namespace {

double cross(double ax, double ay, double bx, double by) {
    return ax * by - ay * bx;
}

void check_polygon(const ConvexPolygon& poly) {
    const std::size_t n = poly.vertices.size();
    if (n < 3)
        throw std::invalid_argument("neutron domain: polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly.vertices[i];
        const auto& b = poly.vertices[(i + 1) % n];
        const auto& c = poly.vertices[(i + 2) % n];
        // Strict convexity and counter-clockwise orientation in one test.
        if (!(cross(b[0] - a[0], b[1] - a[1], c[0] - b[0], c[1] - b[1]) > 0.0))
            throw std::invalid_argument(
                "neutron domain: vertices must be strictly convex in counter-clockwise order");
    }
}

} // namespace

NeutronDomain::NeutronDomain(Disk disk) : shape_(disk) {
    if (!(disk.radius > 0.0))
        throw std::invalid_argument("neutron domain: radius must be positive");
}

NeutronDomain::NeutronDomain(ConvexPolygon polygon) : shape_(std::move(polygon)) {
    check_polygon(std::get<ConvexPolygon>(shape_));
}

bool NeutronDomain::contains(double x, double y) const {
    if (const auto* disk = std::get_if<Disk>(&shape_))
        return x * x + y * y < disk->radius * disk->radius;
    const auto& poly = std::get<ConvexPolygon>(shape_);
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly.vertices[i];
        const auto& b = poly.vertices[(i + 1) % n];
        if (!(cross(b[0] - a[0], b[1] - a[1], x - a[0], y - a[1]) > 0.0)) return false;
    }
    return true;
}

double NeutronDomain::exit_time(double x, double y, double vx, double vy) const {
    if (const auto* disk = std::get_if<Disk>(&shape_)) {
        // |p + t v| = R with |v| = 1: t^2 + 2 (p.v) t + |p|^2 - R^2 = 0;
        // from the interior the positive root is unique.
        const double pv = x * vx + y * vy;
        const double c = x * x + y * y - disk->radius * disk->radius;
        const double disc = pv * pv - c;
        if (disc <= 0.0) return 0.0;   // numerically at or past the boundary
        return -pv + std::sqrt(disc);
    }
    const auto& poly = std::get<ConvexPolygon>(shape_);
    const std::size_t n = poly.vertices.size();
    double exit = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly.vertices[i];
        const auto& b = poly.vertices[(i + 1) % n];
        const double ex = b[0] - a[0], ey = b[1] - a[1];
        const double along = cross(ex, ey, vx, vy);
        if (along >= 0.0) continue;   // moving parallel to or away from this edge
        // Signed offset from the edge line shrinks linearly along the ray.
        const double offset = cross(ex, ey, x - a[0], y - a[1]);
        exit = std::min(exit, offset / -along);
    }
    return exit == std::numeric_limits<double>::infinity() ? 0.0 : std::max(exit, 0.0);
}

BoundingBox NeutronDomain::bounding_box() const {
    if (const auto* disk = std::get_if<Disk>(&shape_))
        return {-disk->radius, disk->radius, -disk->radius, disk->radius};
    const auto& poly = std::get<ConvexPolygon>(shape_);
    BoundingBox box{poly.vertices[0][0], poly.vertices[0][0], poly.vertices[0][1],
                    poly.vertices[0][1]};
    for (const auto& v : poly.vertices) {
        box.x_min = std::min(box.x_min, v[0]);
        box.x_max = std::max(box.x_max, v[0]);
        box.y_min = std::min(box.y_min, v[1]);
        box.y_max = std::max(box.y_max, v[1]);
    }
    return box;
}

NeutronModel::NeutronModel(NeutronDomain domain, double jump_rate)
    : domain(std::move(domain)), jump_rate(jump_rate) {
    if (!(jump_rate > 0.0))
        throw std::invalid_argument("neutron model: jump rate must be positive");
}

NeutronGridBinning::NeutronGridBinning(const NeutronDomain& domain, std::size_t grid_n,
                                       bool velocity_octants)
    : box_(domain.bounding_box()), grid_n_(grid_n), velocity_octants_(velocity_octants) {
    if (grid_n < 2)
        throw std::invalid_argument("neutron binning: grid must be at least 2x2");
    cell_w_ = (box_.x_max - box_.x_min) / static_cast<double>(grid_n);
    cell_h_ = (box_.y_max - box_.y_min) / static_cast<double>(grid_n);
}

} // namespace qsdp
