#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qsdp/rng.hpp"
#include "qsdp/step_outcome.hpp"

namespace qsdp {

// Position strictly inside the domain, velocity on the unit circle
// (renormalized on construction).
struct NeutronState {
    double x, y;
    double vx, vy;

    NeutronState(double x, double y, double vx, double vy) : x(x), y(y), vx(vx), vy(vy) {
        const double norm = std::hypot(vx, vy);
        if (!(norm > 0.0))
            throw std::invalid_argument("neutron state: zero velocity");
        this->vx /= norm;
        this->vy /= norm;
    }
};

inline std::string state_label(const NeutronState& s) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "(%g,%g;%g,%g)", s.x, s.y, s.vx, s.vy);
    return buf;
}

struct BoundingBox {
    double x_min, x_max, y_min, y_max;
};

struct Disk {
    double radius;
};

// Vertices in counter-clockwise order; strict convexity checked on
// construction so ray exits are single crossings.
struct ConvexPolygon {
    std::vector<std::array<double, 2>> vertices;
};

// Open convex region the transport runs in.  Exit times are exact ray
// intersections, not stepped approximations.
class NeutronDomain {
public:
    explicit NeutronDomain(Disk disk);
    explicit NeutronDomain(ConvexPolygon polygon);

    static NeutronDomain unit_disk() { return NeutronDomain(Disk{1.0}); }

    bool contains(double x, double y) const;   // strict interior

    // First t > 0 with (x,y) + t v on the boundary; requires (x,y) inside.
    double exit_time(double x, double y, double vx, double vy) const;

    BoundingBox bounding_box() const;

    bool is_disk() const { return std::holds_alternative<Disk>(shape_); }

private:
    std::variant<Disk, ConvexPolygon> shape_;
};

// Velocity-jump transport: straight unit-speed flight, direction resampled
// uniformly at exponential(jump_rate) epochs, absorbed on first boundary
// contact.  One call simulates exactly one unit of time.
struct NeutronModel {
    using State = NeutronState;

    NeutronDomain domain;
    double jump_rate;

    NeutronModel(NeutronDomain domain, double jump_rate);

    template <RandomSource R>
    StepOutcome<NeutronState> sample_step(const NeutronState& s, R& rng) const;
};

// Optional per-call instrumentation; the flight path length must equal the
// elapsed time because speed is 1.
struct NeutronStepTrace {
    double path_length = 0.0;
    double elapsed = 0.0;
    long jumps = 0;
};

// Draws, in order, per flight segment: one exponential for the next jump
// epoch, then one uniform for the new direction if the jump happens before
// the step ends.  A boundary hit exactly at the unit-time mark absorbs (the
// exit test is closed).
template <RandomSource R>
StepOutcome<NeutronState> neutron_step(const NeutronModel& model, const NeutronState& s,
                                       R& rng, NeutronStepTrace* trace = nullptr) {
    double x = s.x, y = s.y;
    double vx = s.vx, vy = s.vy;
    double remaining = 1.0;
    while (true) {
        const double wait = rng.exponential(model.jump_rate);
        const double travel = wait < remaining ? wait : remaining;
        const double exit = model.domain.exit_time(x, y, vx, vy);
        if (exit <= travel) {
            if (trace) {
                trace->path_length += exit;
                trace->elapsed += exit;
            }
            return StepOutcome<NeutronState>::absorbed();
        }
        x += travel * vx;
        y += travel * vy;
        if (trace) {
            trace->path_length += travel;
            trace->elapsed += travel;
        }
        if (wait < remaining) {
            remaining -= wait;
            const double angle = 2.0 * std::numbers::pi * rng.uniform();
            vx = std::cos(angle);
            vy = std::sin(angle);
            if (trace) ++trace->jumps;
        } else {
            return StepOutcome<NeutronState>::alive(NeutronState(x, y, vx, vy));
        }
    }
}

template <RandomSource R>
StepOutcome<NeutronState> NeutronModel::sample_step(const NeutronState& s, R& rng) const {
    return neutron_step(*this, s, rng);
}

// Spatial occupancy grid over the bounding box, row-major with x varying
// fastest.  The velocity marginal is ignored unless octant refinement is
// on, in which case each spatial cell splits into 8 direction octants
// (cell * 8 + octant).
class NeutronGridBinning {
public:
    NeutronGridBinning(const NeutronDomain& domain, std::size_t grid_n,
                       bool velocity_octants = false);

    std::size_t bin_count() const {
        return grid_n_ * grid_n_ * (velocity_octants_ ? 8 : 1);
    }

    std::size_t bin_index(const NeutronState& s) const {
        const std::size_t col = clamp_cell((s.x - box_.x_min) / cell_w_);
        const std::size_t row = clamp_cell((s.y - box_.y_min) / cell_h_);
        const std::size_t cell = row * grid_n_ + col;
        if (!velocity_octants_) return cell;
        double angle = std::atan2(s.vy, s.vx);
        if (angle < 0.0) angle += 2.0 * std::numbers::pi;
        auto octant = static_cast<std::size_t>(angle / (std::numbers::pi / 4.0));
        if (octant > 7) octant = 7;
        return cell * 8 + octant;
    }

    std::size_t grid_n() const { return grid_n_; }

private:
    std::size_t clamp_cell(double u) const {
        if (!(u > 0.0)) return 0;
        auto c = static_cast<std::size_t>(u);
        return c < grid_n_ ? c : grid_n_ - 1;
    }

    BoundingBox box_;
    std::size_t grid_n_;
    bool velocity_octants_;
    double cell_w_, cell_h_;
};

inline NeutronGridBinning neutron_binning(const NeutronDomain& domain, std::size_t grid_n,
                                          bool velocity_octants = false) {
    return NeutronGridBinning(domain, grid_n, velocity_octants);
}

// Uniform draw over the domain interior by rejection from the bounding box;
// direction uniform on the circle.
template <RandomSource R>
NeutronState neutron_uniform_state(const NeutronDomain& domain, R& rng) {
    const BoundingBox box = domain.bounding_box();
    double x, y;
    do {
        x = box.x_min + (box.x_max - box.x_min) * rng.uniform();
        y = box.y_min + (box.y_max - box.y_min) * rng.uniform();
    } while (!domain.contains(x, y));
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    return NeutronState(x, y, std::cos(angle), std::sin(angle));
}

} // namespace qsdp
