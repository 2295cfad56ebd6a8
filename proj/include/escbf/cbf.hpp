#pragma once

#include <stdexcept>

#include "escbf/path.hpp"
#include "escbf/power.hpp"
#include "escbf/qp.hpp"
#include "escbf/vec2.hpp"

namespace escbf {

class InvalidRadii : public std::invalid_argument {
public:
    InvalidRadii() : std::invalid_argument("radii must satisfy 0 < d < delta") {}
};

/// delta_m = delta - d, the tightened target radius compensating tracking lag.
double modified_radius(double delta, double d);

/// Charging disc around the station plus the tracking radius d and the
/// effective radius delta_m the reference point actually pursues.
struct ChargingRegion {
    Vec2 center;
    double radius;            // delta
    double tracking_radius;   // d
    double effective_radius;  // delta_m = delta - d

    static ChargingRegion make(const Vec2& center, double delta, double d) {
        return {center, delta, d, modified_radius(delta, d)};
    }
};

struct CbfGains {
    double gamma_e = 2.0;  // 1/s
    double gamma_b = 1.0;  // 1/s
    double gamma_d = 2.0;  // 1/s
};

struct EnergyState {
    double consumed = 0.0;  // E, joules
    double budget = 0.0;    // E_nom, joules
};

struct CbfSnapshot {
    double h_e = 0.0;  // joules
    double h_b = 0.0;  // unitless
    double h_d = 0.0;  // meters^2
};

/// Assembled constraint rows a z >= b over the decision vector z = [eta, u1, u2].
/// Row order is fixed: energy, bound, tracking.
struct QpRows {
    Mat3 a{};
    Vec3 b{};
    Vec3 u_nom3{};
};

/// Energy sufficiency CBF. extra_integral is the slowing-power integral for
/// the unicycle variant, zero for the single integrator.
double h_energy(const EnergyState& energy, const ParabolicPower& model, double v_r,
                double L, double s, double delta_m, double extra_integral = 0.0);

double h_bound(double s);

double h_track(double d, const Vec2& x, const Vec2& x_r);

struct CbfConfig {
    ParabolicPower model;
    double v_r = 0.1;
    CbfGains gains;
    ChargingRegion region;
};

QpRows build_qp_si(const WaypointPath& path, const SmoothParams& params, double s,
                   const Vec2& x, double consumed_energy, double budget,
                   const CbfConfig& config, const PathDynamics& dyn, const Vec2& u_nom,
                   double measured_power);

struct SlowingProfile;  // unicycle.hpp

/// Unicycle variant: the energy row gains the slowing-power term delta~(s)
/// on eta and the rotation-power estimate delta_omega on the right-hand side;
/// h_e carries the integral of delta~ over [s, 1].
QpRows build_qp_unicycle(const WaypointPath& path, const SmoothParams& params, double s,
                         const Vec2& x, double consumed_energy, double budget,
                         const CbfConfig& config, const PathDynamics& dyn, const Vec2& u_nom,
                         double measured_power, const SlowingProfile& profile,
                         double delta_omega);

}  // namespace escbf
