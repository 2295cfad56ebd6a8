#pragma once

#include <optional>
#include <vector>

#include "escbf/cbf.hpp"
#include "escbf/path.hpp"
#include "escbf/power.hpp"
#include "escbf/unicycle.hpp"
#include "escbf/vec2.hpp"

namespace escbf {

class InfeasibleConfig : public std::invalid_argument {
public:
    InfeasibleConfig()
        : std::invalid_argument("tracking feasibility requires v_r + gamma_d d / 2 <= u_max") {}
};

class TimestepTooLarge : public std::invalid_argument {
public:
    TimestepTooLarge() : std::invalid_argument("controller requires dt <= 1e-2 s") {}
};

struct ControllerConfig {
    ParabolicPower model;
    double v_r = 0.1;        // m/s
    CbfGains gains;
    ChargingRegion region;
    double u_max = 0.5;      // m/s
    double k_w = 10.0;       // 1/s, head tracking gain
    double sigma = 1e-3;     // freeze threshold on s
    double kappa = 0.5;      // SPC blend factor
    double replan_period = 5.0;  // s
    SmoothParams smoothing;
};

/// Throws InfeasibleConfig unless the worst-case tracking speed
/// v_r + gamma_d d / 2 fits inside the saturation limit.
void validate(const ControllerConfig& config);

/// Present when the robot is a unicycle; the slowing profile lives in the
/// controller state and is rebuilt on every path admission.
struct UnicycleVariant {
    UnicyclePower model;
    UnicycleParams params;
    // Constant margin for rotation power in the energy constraint. Pivots at
    // path switches are not covered by the slowing profile, so the planned
    // return consumption must carry a reserve for them.
    double delta_omega = 0.0;  // watts
};

struct ControllerState {
    double s = 0.0;
    Vec2 head;
    bool frozen = false;
    WaypointPath path;
    double last_power = 0.0;
    Vec2 last_u;
    double budget = 0.0;  // E_nom, joules
    std::optional<UnicycleVariant> unicycle;
    SlowingProfile profile;  // empty for the single integrator
};

ControllerState init_state(const ControllerConfig& config, const WaypointPath& path,
                           const Vec2& x0, double budget,
                           std::optional<UnicycleVariant> variant = std::nullopt);

enum class Event { Frozen, Arrived, PathAdmitted, PathRejectedSpcUsed, QpInfeasible };

struct ControlOutput {
    Vec2 u;         // m/s, post saturation
    double eta = 0.0;  // 1/s
    CbfSnapshot snapshot;
    std::vector<int> qp_active_set;
    std::vector<Event> events;
    bool saturated = false;
};

/// Moves the head tracker one Euler step toward x (held when frozen) and
/// returns its velocity xi = dw1/dt for the dynamic path terms.
Vec2 update_head(ControllerState& state, const Vec2& x, double dt,
                 const ControllerConfig& config);

/// One control step: head update, path rebuild at the new head, QP assembly
/// and solve, s integration with the freeze latch, saturation, arrival check.
/// theta is only read for the unicycle variant. Throws Infeasible when the QP
/// has no solution.
ControlOutput step(ControllerState& state, const Vec2& x, double consumed_energy,
                   const Vec2& mission_u, double dt, const ControllerConfig& config,
                   double theta = 0.0);

struct PathEvaluation {
    double length = 0.0;
    double h_e = 0.0;
    bool d_suff_ok = false;

    bool admissible() const { return h_e > 0.0 && d_suff_ok; }
};

/// Checks a candidate path at s = 0: positive energy margin and the
/// sufficient-decrease condition -P(u_nom) - (P(v_r)/v_r) L_dot >= -gamma_e h_e
/// with the head-tracking rate the candidate would start from.
PathEvaluation evaluate_path(const WaypointPath& candidate, const Vec2& x,
                             double consumed_energy, double budget,
                             const ControllerConfig& config, const Vec2& u_nom,
                             const std::optional<UnicycleVariant>& variant);

enum class AdmitDecision { NoOp, Admitted, SpcFallback };

struct AdmitResult {
    AdmitDecision decision = AdmitDecision::NoOp;
    bool gap_warning = false;  // head drifted more than d from the robot
};

/// Replanning admission. No-op while frozen (s > sigma). An admissible
/// candidate replaces the path with s reset to 0 and the head snapped to x;
/// otherwise the current path is extended in place by the collinear SPC
/// insertion, which changes neither length nor turning, so h_e is continuous.
AdmitResult admit_path(ControllerState& state, const WaypointPath& candidate, const Vec2& x,
                       double consumed_energy, const ControllerConfig& config,
                       const Vec2& u_nom);

}  // namespace escbf
