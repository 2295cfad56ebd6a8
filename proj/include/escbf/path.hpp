#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "escbf/vec2.hpp"

namespace escbf {

class TooFewWaypoints : public std::invalid_argument {
public:
    TooFewWaypoints() : std::invalid_argument("path needs at least two waypoints") {}
};

class DegenerateSegment : public std::invalid_argument {
public:
    explicit DegenerateSegment(std::size_t segment)
        : std::invalid_argument("zero-length path segment at index " + std::to_string(segment)),
          segment_(segment) {}
    std::size_t segment() const { return segment_; }

private:
    std::size_t segment_;
};

class IndexOutOfRange : public std::out_of_range {
public:
    IndexOutOfRange() : std::out_of_range("waypoint index out of range") {}
};

class KappaOutOfRange : public std::invalid_argument {
public:
    KappaOutOfRange() : std::invalid_argument("kappa must lie in (0,1)") {}
};

class HeadMismatch : public std::invalid_argument {
public:
    HeadMismatch() : std::invalid_argument("robot position does not match the path head") {}
};

/// Steepness and endpoint shift of the double-sigmoid segment activations.
struct SmoothParams {
    double beta = 700.0;
    double eps_end = 0.02;  // beta * eps_end >= 10 pins p(0), p(1) to the endpoints

    static SmoothParams defaults() { return {}; }
};

/// Piecewise-linear waypoint path with the derived quantities used by the
/// smoothing and the energy CBF: segment/cumulative/remaining lengths,
/// normalized breakpoints s_i and interior turn angles psi_i.
struct WaypointPath {
    std::vector<Vec2> waypoints;
    std::vector<double> seg_lengths;   // ||w_{i+1} - w_i||, size n-1
    std::vector<double> cum_lengths;   // length from w_1 to w_i, size n
    std::vector<double> rem_lengths;   // length from w_i to path end, size n
    double total_length = 0.0;
    std::vector<double> breakpoints;   // s_i = L_i / L, size n, s_1 = 0, s_n = 1
    std::vector<double> turn_angles;   // psi_i for interior waypoints, size n-2

    std::size_t size() const { return waypoints.size(); }
    std::size_t segments() const { return waypoints.size() - 1; }
};

/// Minimum accepted segment length in meters; shorter segments would make the
/// breakpoints non-strictly-increasing.
inline constexpr double kMinSegmentLength = 1e-9;

WaypointPath build_path(const std::vector<Vec2>& points);

/// Turn angle at interior waypoint `i` (0-based, valid range [1, n-2]).
double turn_angle(const WaypointPath& path, std::size_t i);

/// Double sigmoid activation of segment `i` (0-based) at path parameter s.
double double_sigmoid(const SmoothParams& params, const WaypointPath& path,
                      std::size_t i, double s);

/// Smoothed path point p(s).
Vec2 smooth_point(const WaypointPath& path, const SmoothParams& params, double s);

enum class TangentMode { Full, Simplified };

/// dp/ds. Full mode keeps the sigmoid-derivative term; Simplified drops it
/// and returns L * sum_i sigma_i(s) e_i, valid for beta >> 1.
Vec2 smooth_tangent(const WaypointPath& path, const SmoothParams& params, double s,
                    TangentMode mode);

/// Path length remaining ahead of parameter s, L * (1 - s).
double remaining_length(const WaypointPath& path, double s);

/// Time derivatives induced by a moving path head w_1 (rate xi = dw_1/dt).
struct PathDynamics {
    double l_dot = 0.0;                       // dL/dt
    std::vector<double> s_dot_breakpoints;    // ds_i/dt for interior breakpoints
    Vec2 xr_partial_t;                        // partial x_r / partial t at the query s
};

PathDynamics path_time_derivative(const WaypointPath& path, const SmoothParams& params,
                                  double s, const Vec2& head_rate);

/// Sequential Path Construction: insert a collinear waypoint between the head
/// and the old second waypoint. Preserves total length and total turning.
WaypointPath spc_update(const WaypointPath& path, const Vec2& x, double kappa);

/// Plain-text serialization, one "x y" waypoint per line.
std::string path_to_text(const WaypointPath& path);
WaypointPath path_from_text(const std::string& text);

}  // namespace escbf
