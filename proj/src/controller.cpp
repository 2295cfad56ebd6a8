#include "escbf/controller.hpp"

#include <algorithm>
#include <cmath>

#include "escbf/qp.hpp"

namespace escbf {

namespace {

constexpr double kMaxDt = 1e-2;

WaypointPath with_head(const WaypointPath& path, const Vec2& head) {
    std::vector<Vec2> points = path.waypoints;
    points.front() = head;
    return build_path(points);
}

double measured_power(const ControllerState& state, const ControllerConfig& config,
                      const Vec2& u, double theta) {
    if (state.unicycle) {
        // Meter the translational draw only. Rotation cost is budgeted through
        // the slowing profile and the delta_omega margin; feeding the turning
        // spike back through this term would make the reference point race
        // ahead of the robot every time it pivots.
        const UnicycleRates raw = to_unicycle(u, theta, state.unicycle->params.handle);
        const UnicycleRates rates = twoway(raw.v, raw.omega);
        return power_unicycle(state.unicycle->model, rates.v, 0.0);
    }
    return power_si(config.model, u.norm());
}

}  // namespace

void validate(const ControllerConfig& config) {
    const double worst = config.v_r + config.gains.gamma_d * config.region.tracking_radius / 2.0;
    if (worst > config.u_max) throw InfeasibleConfig();
}

ControllerState init_state(const ControllerConfig& config, const WaypointPath& path,
                           const Vec2& x0, double budget,
                           std::optional<UnicycleVariant> variant) {
    validate(config);
    ControllerState state;
    state.path = with_head(path, x0);
    state.head = x0;
    state.budget = budget;
    state.unicycle = variant;
    if (variant)
        state.profile =
            build_slowing_profile(state.path, variant->model, config.v_r, variant->params,
                                  config.region.tracking_radius);
    return state;
}

Vec2 update_head(ControllerState& state, const Vec2& x, double dt,
                 const ControllerConfig& config) {
    if (state.frozen) return {0.0, 0.0};
    const Vec2 xi = -config.k_w * (state.head - x);
    state.head += xi * dt;
    return xi;
}

ControlOutput step(ControllerState& state, const Vec2& x, double consumed_energy,
                   const Vec2& mission_u, double dt, const ControllerConfig& config,
                   double theta) {
    if (!(dt > 0.0) || dt > kMaxDt) throw TimestepTooLarge();

    const Vec2 xi = update_head(state, x, dt, config);
    state.path = with_head(state.path, state.head);

    const PathDynamics dyn =
        path_time_derivative(state.path, config.smoothing, state.s, xi);
    const CbfConfig cbf{config.model, config.v_r, config.gains, config.region};

    ControlOutput out;
    const double extra =
        state.unicycle ? slowing_integral(state.profile, state.s) : 0.0;
    out.snapshot.h_e = h_energy({consumed_energy, state.budget}, config.model, config.v_r,
                                state.path.total_length, state.s,
                                config.region.effective_radius, extra);
    out.snapshot.h_b = h_bound(state.s);
    out.snapshot.h_d = h_track(config.region.tracking_radius, x,
                               smooth_point(state.path, config.smoothing, state.s));

    const QpRows rows =
        state.unicycle
            ? build_qp_unicycle(state.path, config.smoothing, state.s, x, consumed_energy,
                                state.budget, cbf, dyn, mission_u, state.last_power,
                                state.profile, state.unicycle->delta_omega)
            : build_qp_si(state.path, config.smoothing, state.s, x, consumed_energy,
                          state.budget, cbf, dyn, mission_u, state.last_power);
    const QpSolution sol = solve({rows.a, rows.b, rows.u_nom3});

    out.eta = sol.z[0];
    out.u = {sol.z[1], sol.z[2]};
    out.qp_active_set = sol.active_set;

    state.s = std::clamp(state.s + out.eta * dt, 0.0, 1.0);
    if (!state.frozen && state.s > config.sigma) {
        state.frozen = true;
        out.events.push_back(Event::Frozen);
    }

    const double speed = out.u.norm();
    if (speed > config.u_max) {
        out.u = out.u * (config.u_max / speed);
        out.saturated = true;
    }

    if (distance(x, config.region.center) <= config.region.radius)
        out.events.push_back(Event::Arrived);

    state.last_u = out.u;
    state.last_power = measured_power(state, config, out.u, theta);
    return out;
}

PathEvaluation evaluate_path(const WaypointPath& candidate, const Vec2& x,
                             double consumed_energy, double budget,
                             const ControllerConfig& config, const Vec2& u_nom,
                             const std::optional<UnicycleVariant>& variant) {
    PathEvaluation eval;
    eval.length = candidate.total_length;

    double extra = 0.0;
    if (variant) {
        const SlowingProfile profile =
            build_slowing_profile(candidate, variant->model, config.v_r, variant->params,
                                  config.region.tracking_radius);
        extra = slowing_integral(profile, 0.0);
    }
    eval.h_e = h_energy({consumed_energy, budget}, config.model, config.v_r, eval.length,
                        0.0, config.region.effective_radius, extra);

    // Head rate the candidate would start from, and the induced length rate.
    const Vec2 xi = -config.k_w * (candidate.waypoints.front() - x);
    const Vec2 e1 =
        (candidate.waypoints[1] - candidate.waypoints[0]) / candidate.seg_lengths[0];
    const double l_dot = -e1.dot(xi);

    const double rate = power_si(config.model, config.v_r) / config.v_r;
    eval.d_suff_ok = -power_si(config.model, u_nom.norm()) - rate * l_dot >=
                     -config.gains.gamma_e * eval.h_e;
    return eval;
}

AdmitResult admit_path(ControllerState& state, const WaypointPath& candidate, const Vec2& x,
                       double consumed_energy, const ControllerConfig& config,
                       const Vec2& u_nom) {
    AdmitResult result;
    if (state.s > config.sigma) return result;  // frozen: keep the current path

    result.gap_warning = distance(state.head, x) > config.region.tracking_radius;

    const PathEvaluation eval =
        evaluate_path(candidate, x, consumed_energy, state.budget, config, u_nom,
                      state.unicycle);
    if (eval.admissible()) {
        state.path = with_head(candidate, x);
        state.head = x;
        state.s = 0.0;
        state.frozen = false;
        if (state.unicycle)
            state.profile = build_slowing_profile(state.path, state.unicycle->model,
                                                  config.v_r, state.unicycle->params,
                                                  config.region.tracking_radius);
        result.decision = AdmitDecision::Admitted;
    } else {
        // Collinear insertion at the tracked head keeps length and turning,
        // and therefore h_e, exactly; s and the slowing profile stay put.
        state.path = spc_update(state.path, state.head, config.kappa);
        result.decision = AdmitDecision::SpcFallback;
    }
    return result;
}

}  // namespace escbf
