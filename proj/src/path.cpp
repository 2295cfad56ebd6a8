#include "escbf/path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace escbf {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Rising and falling edges of the double sigmoid for segment i.
struct SegmentSigmoid {
    double rising;
    double falling;
    double value() const { return rising * falling; }
};

SegmentSigmoid segment_sigmoid(const SmoothParams& params, const WaypointPath& path,
                               std::size_t i, double s) {
    const double eps1 = (i == 0) ? params.eps_end : 0.0;
    const double eps2 = (i == path.segments() - 1) ? params.eps_end : 0.0;
    const double lo = path.breakpoints[i] - eps1;
    const double hi = path.breakpoints[i + 1] + eps2;
    return {logistic(params.beta * (s - lo)), logistic(-params.beta * (s - hi))};
}

Vec2 segment_interp(const WaypointPath& path, std::size_t i, double s) {
    const double si = path.breakpoints[i];
    const double sj = path.breakpoints[i + 1];
    const double t = (s - si) / (sj - si);
    return path.waypoints[i] * (1.0 - t) + path.waypoints[i + 1] * t;
}

}  // namespace

WaypointPath build_path(const std::vector<Vec2>& points) {
    if (points.size() < 2) throw TooFewWaypoints();

    WaypointPath path;
    path.waypoints = points;
    const std::size_t n = points.size();
    path.seg_lengths.resize(n - 1);
    path.cum_lengths.resize(n);
    path.cum_lengths[0] = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double len = distance(points[i], points[i + 1]);
        if (!(len > kMinSegmentLength)) throw DegenerateSegment(i + 1);
        path.seg_lengths[i] = len;
        path.cum_lengths[i + 1] = path.cum_lengths[i] + len;
    }
    path.total_length = path.cum_lengths[n - 1];

    path.rem_lengths.resize(n);
    path.breakpoints.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        path.rem_lengths[i] = path.total_length - path.cum_lengths[i];
        path.breakpoints[i] = path.cum_lengths[i] / path.total_length;
    }
    path.breakpoints.front() = 0.0;
    path.breakpoints.back() = 1.0;

    if (n > 2) {
        path.turn_angles.resize(n - 2);
        for (std::size_t i = 1; i + 1 < n; ++i) path.turn_angles[i - 1] = turn_angle(path, i);
    }
    return path;
}

double turn_angle(const WaypointPath& path, std::size_t i) {
    if (i < 1 || i + 1 >= path.size()) throw IndexOutOfRange();
    const Vec2 a = path.waypoints[i] - path.waypoints[i - 1];
    const Vec2 b = path.waypoints[i + 1] - path.waypoints[i];
    // atan2 keeps full precision for nearly collinear segments, where acos of
    // the normalized dot product loses half the significant digits.
    const double cross = a.x * b.y - a.y * b.x;
    return std::atan2(std::abs(cross), a.dot(b));
}

double double_sigmoid(const SmoothParams& params, const WaypointPath& path,
                      std::size_t i, double s) {
    if (i >= path.segments()) throw IndexOutOfRange();
    return segment_sigmoid(params, path, i, s).value();
}

Vec2 smooth_point(const WaypointPath& path, const SmoothParams& params, double s) {
    Vec2 p;
    for (std::size_t i = 0; i < path.segments(); ++i) {
        const double sigma = segment_sigmoid(params, path, i, s).value();
        if (sigma > 0.0) p += sigma * segment_interp(path, i, s);
    }
    return p;
}

Vec2 smooth_tangent(const WaypointPath& path, const SmoothParams& params, double s,
                    TangentMode mode) {
    Vec2 d;
    const double beta = params.beta;
    for (std::size_t i = 0; i < path.segments(); ++i) {
        const SegmentSigmoid sig = segment_sigmoid(params, path, i, s);
        const double sigma = sig.value();
        if (sigma == 0.0) continue;
        if (mode == TangentMode::Simplified) {
            const Vec2 e = (path.waypoints[i + 1] - path.waypoints[i]) / path.seg_lengths[i];
            d += (path.total_length * sigma) * e;
        } else {
            const double span = path.breakpoints[i + 1] - path.breakpoints[i];
            d += (sigma / span) * (path.waypoints[i + 1] - path.waypoints[i]);
            d += (beta * sigma * (sig.falling - sig.rising)) * segment_interp(path, i, s);
        }
    }
    return d;
}

double remaining_length(const WaypointPath& path, double s) {
    return path.total_length * (1.0 - s);
}

PathDynamics path_time_derivative(const WaypointPath& path, const SmoothParams& params,
                                  double s, const Vec2& head_rate) {
    PathDynamics dyn;
    const Vec2 e1 = (path.waypoints[1] - path.waypoints[0]) / path.seg_lengths[0];
    dyn.l_dot = -e1.dot(head_rate);

    const double L = path.total_length;
    const std::size_t n = path.size();
    dyn.s_dot_breakpoints.resize(n > 2 ? n - 2 : 0);
    for (std::size_t i = 1; i + 1 < n; ++i)
        dyn.s_dot_breakpoints[i - 1] = path.rem_lengths[i] / (L * L) * dyn.l_dot;

    for (std::size_t i = 0; i < path.segments(); ++i) {
        const double sigma = segment_sigmoid(params, path, i, s).value();
        if (sigma == 0.0) continue;
        const double si = path.breakpoints[i];
        const double sj = path.breakpoints[i + 1];
        const double span = sj - si;
        const double weight =
            (path.rem_lengths[i] * (sj - s) + path.rem_lengths[i + 1] * (s - si)) /
            (span * span);
        dyn.xr_partial_t +=
            (sigma * dyn.l_dot / (L * L) * weight) * (path.waypoints[i + 1] - path.waypoints[i]);
    }
    return dyn;
}

WaypointPath spc_update(const WaypointPath& path, const Vec2& x, double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw KappaOutOfRange();
    if (distance(x, path.waypoints.front()) > 1e-6 * path.total_length) throw HeadMismatch();

    std::vector<Vec2> points;
    points.reserve(path.size() + 1);
    points.push_back(x);
    points.push_back(kappa * x + (1.0 - kappa) * path.waypoints[1]);
    points.insert(points.end(), path.waypoints.begin() + 1, path.waypoints.end());
    return build_path(points);
}

std::string path_to_text(const WaypointPath& path) {
    std::string out;
    char line[80];
    for (const Vec2& w : path.waypoints) {
        std::snprintf(line, sizeof line, "%.12g %.12g\n", w.x, w.y);
        out += line;
    }
    return out;
}

WaypointPath path_from_text(const std::string& text) {
    std::istringstream in(text);
    std::vector<Vec2> points;
    double x, y;
    while (in >> x >> y) points.push_back({x, y});
    return build_path(points);
}

}  // namespace escbf
