#pragma once

#include <stdexcept>
#include <vector>

#include "escbf/path.hpp"
#include "escbf/power.hpp"
#include "escbf/vec2.hpp"

namespace escbf {

class InvalidAngles : public std::invalid_argument {
public:
    InvalidAngles() : std::invalid_argument("need psi >= eps_omega > 0") {}
};

class InvalidHandle : public std::invalid_argument {
public:
    InvalidHandle() : std::invalid_argument("handle length must be positive") {}
};

/// ell is the distance from the robot center to the imaginary handle point
/// whose velocity equals the single-integrator command.
struct UnicycleParams {
    double handle = 0.1;       // ell, m
    double eps_omega = 0.01;   // rad/s level treated as attenuated
    double beta_tilde = 300.0; // steepness of the slowing windows
    double d_tilde = 0.2;      // m, fallback activation distance
};

struct UnicycleRates {
    double v;      // m/s
    double omega;  // rad/s
};

/// Inverts a planar velocity command into (v, omega) at the handle point.
UnicycleRates to_unicycle(const Vec2& u, double theta, double handle);

/// Mirrors omega when driving backward so the handle point still tracks the
/// commanded velocity; omega is zeroed at v = 0 where the sign is undefined.
UnicycleRates twoway(double v, double omega);

/// Peak rotation rate while tracking a corner of angle psi at speed v_r.
double omega_bound(double v_r, double handle, double psi);

/// Path distance after a corner of angle psi until |omega| decays below
/// (v_r / handle) * eps_omega.
double attenuation_distance(double handle, double psi, double eps_omega);

/// Extra power budget reserved around each interior waypoint, as a function
/// of the path parameter. Amplitudes and floor are pre-scaled by L / v_r so
/// that slowing_power(s) multiplied by s_dot is in watts.
struct SlowingProfile {
    std::vector<double> centers;     // interior breakpoints s_i
    std::vector<double> amplitudes;  // (L / v_r) * corner rotation power, joules
    double half_width = 0.0;         // window half width in s
    double beta_tilde = 300.0;
    double floor = 0.0;              // (L / v_r) * residual rotation power, joules

    bool empty() const { return centers.empty(); }
};

SlowingProfile build_slowing_profile(const WaypointPath& path, const UnicyclePower& model,
                                     double v_r, const UnicycleParams& params, double d);

/// delta~(s): the reserved slowing power at path parameter s.
double slowing_power(const SlowingProfile& profile, double s);

/// Integral of delta~ over [s, 1], composite Simpson with `panels` panels.
double slowing_integral(const SlowingProfile& profile, double s, int panels = 256);

}  // namespace escbf
