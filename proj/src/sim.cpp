#include "escbf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "escbf/qp.hpp"

namespace escbf {

namespace {

/// A mission goal counts as reached inside this radius.
constexpr double kGoalTolerance = 0.05;

double uniform01(std::mt19937_64& rng) {
    // 53 uniform bits; avoids distribution implementation differences.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Latest disturbance step whose start time has passed.
double disturbance_at(const std::vector<DisturbanceStep>& steps, double t) {
    double delta = 0.0;
    double best_start = -1.0;
    for (const DisturbanceStep& step : steps)
        if (t >= step.t_start && step.t_start >= best_start) {
            best_start = step.t_start;
            delta = step.delta_p;
        }
    return delta;
}

/// Unit-vector pursuit of the first unreached goal.
class MissionPursuit {
public:
    explicit MissionPursuit(const std::vector<MissionGoal>& goals) : goals_(goals) {}

    Vec2 command(const Vec2& x) {
        while (next_ < goals_.size() &&
               distance(x, goals_[next_].target) <= kGoalTolerance)
            ++next_;
        if (next_ >= goals_.size()) return {0.0, 0.0};
        const MissionGoal& goal = goals_[next_];
        return goal.speed * (goal.target - x).normalized();
    }

private:
    const std::vector<MissionGoal>& goals_;
    std::size_t next_ = 0;
};

void check_scenario(const Scenario& scenario) {
    if (!(scenario.dt > 0.0) || scenario.dt > 1e-2)
        throw ConfigInvalid("dt must lie in (0, 1e-2]");
    if (!(scenario.budget > 0.0)) throw ConfigInvalid("budget must be positive");
    if (!(scenario.max_time >= 0.0)) throw ConfigInvalid("max_time must be non-negative");
}

/// Initial or replanned waypoint list starting at x.
std::vector<Vec2> plan(const Scenario& scenario, std::mt19937_64& rng, const Vec2& x) {
    if (scenario.planner) {
        const RandomPlanner& p = *scenario.planner;
        return synth_planner(rng(), x, scenario.station, p.bounds, p.n_min, p.n_max);
    }
    Vec2 goal = scenario.station;
    if (distance(x, goal) <= kMinSegmentLength) goal.x += scenario.controller.region.radius;
    return {x, goal};
}

struct Drive {
    Vec2 x_dot;
    double v = 0.0;
    double omega = 0.0;
    double model_power = 0.0;  // draw according to the applied kinematics
};

Drive drive(const Scenario& scenario, const Vec2& u, double theta) {
    Drive d;
    if (scenario.unicycle) {
        const UnicycleSetup& uni = *scenario.unicycle;
        const UnicycleRates raw = to_unicycle(u, theta, uni.params.handle);
        const UnicycleRates rates = twoway(raw.v, raw.omega);
        d.v = rates.v;
        d.omega = rates.omega;
        d.x_dot = {rates.v * std::cos(theta), rates.v * std::sin(theta)};
        d.model_power = power_unicycle(uni.power, rates.v, rates.omega);
    } else {
        d.x_dot = u;
        d.model_power = power_si(scenario.controller.model, u.norm());
    }
    return d;
}

void finish(RunResult& result, double budget) {
    result.metrics = compute_metrics(result.trace, budget);
}

}  // namespace

std::vector<Vec2> synth_planner(std::uint64_t seed, const Vec2& x, const Vec2& station,
                                const Rect& bounds, int n_min, int n_max) {
    if (!bounds.contains(x) || !bounds.contains(station)) throw BoundsInvalid();
    if (n_min < 2 || n_max < n_min) throw ConfigInvalid("waypoint count range invalid");

    std::mt19937_64 rng(seed);
    const int span = n_max - n_min + 1;
    const int n = n_min + std::min(span - 1, static_cast<int>(uniform01(rng) * span));

    // Intermediate points keep clear of the station so replans never thread
    // the mission through the charging region.
    const double clearance =
        0.15 * std::min(bounds.hi.x - bounds.lo.x, bounds.hi.y - bounds.lo.y);

    std::vector<Vec2> points;
    points.push_back(x);
    while (static_cast<int>(points.size()) < n - 1) {
        const Vec2 p{uniform(rng, bounds.lo.x, bounds.hi.x),
                     uniform(rng, bounds.lo.y, bounds.hi.y)};
        if (distance(p, station) < clearance) continue;
        if (distance(p, points.back()) <= 1e-6) continue;
        points.push_back(p);
    }
    if (distance(points.back(), station) <= 1e-6) points.pop_back();
    points.push_back(station);
    return points;
}

Metrics compute_metrics(const std::vector<TraceRecord>& trace, double budget) {
    if (trace.empty()) throw EmptyTrace();

    Metrics m;
    m.min_h_e = trace.front().h_e;
    m.min_h_d = trace.front().h_d;
    // The budget check covers the pre-arrival trace only. The arrival sample
    // lands up to one step inside the charging region, so its energy can read
    // a fraction of a step past the budget even on a clean run.
    double max_pre_arrival = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const TraceRecord& rec = trace[i];
        m.min_h_e = std::min(m.min_h_e, rec.h_e);
        m.min_h_d = std::min(m.min_h_d, rec.h_d);
        if (!rec.arrived) max_pre_arrival = std::max(max_pre_arrival, rec.energy);
        if (rec.saturated) ++m.saturation_steps;
        if (rec.arrived && !m.arrival_time) m.arrival_time = rec.t;
        if (i > 0) m.distance_traveled += distance(rec.x, trace[i - 1].x);
    }
    m.eoa = budget - trace.back().energy;
    m.budget_violated = max_pre_arrival > budget;
    return m;
}

RunResult run(const Scenario& scenario, std::uint64_t seed) {
    check_scenario(scenario);

    RunResult result;
    std::mt19937_64 rng(seed);
    MissionPursuit mission(scenario.mission);

    Vec2 x = scenario.initial_x;
    double theta = scenario.unicycle ? scenario.unicycle->theta0 : 0.0;
    double energy = 0.0;
    double t = 0.0;

    std::size_t scripted_next = 0;
    std::vector<Vec2> initial;
    if (scripted_next < scenario.scripted.size() && scenario.scripted[scripted_next].t <= 0.0) {
        initial = scenario.scripted[scripted_next].waypoints;
        initial.front() = x;
        ++scripted_next;
    } else {
        initial = plan(scenario, rng, x);
    }

    std::optional<UnicycleVariant> variant;
    if (scenario.unicycle)
        variant = UnicycleVariant{scenario.unicycle->power, scenario.unicycle->params,
                                  scenario.unicycle->delta_omega};
    ControllerState state =
        init_state(scenario.controller, build_path(initial), x, scenario.budget, variant);

    double next_replan = scenario.controller.replan_period;
    bool pending_admitted = false;
    bool pending_spc = false;

    while (t <= scenario.max_time + scenario.dt / 2.0) {
        const Vec2 u_nom = mission.command(x);

        ControlOutput out;
        try {
            out = step(state, x, energy, u_nom, scenario.dt, scenario.controller, theta);
        } catch (const Infeasible& e) {
            result.qp_infeasible = true;
            result.error = e.what();
            break;
        }

        const Drive d = drive(scenario, out.u, theta);
        const double power = d.model_power + disturbance_at(scenario.disturbances, t);

        TraceRecord rec;
        rec.t = t;
        rec.x = x;
        rec.theta = theta;
        rec.energy = energy;
        rec.h_e = out.snapshot.h_e;
        rec.h_b = out.snapshot.h_b;
        rec.h_d = out.snapshot.h_d;
        rec.s = state.s;
        rec.length = state.path.total_length;
        rec.u = out.u;
        rec.v = d.v;
        rec.omega = d.omega;
        rec.power = power;
        rec.frozen = state.frozen;
        rec.saturated = out.saturated;
        rec.admitted = pending_admitted;
        rec.spc_fallback = pending_spc;
        pending_admitted = pending_spc = false;
        for (Event e : out.events)
            if (e == Event::Arrived) rec.arrived = true;
        result.trace.push_back(rec);
        if (rec.arrived) break;

        x += d.x_dot * scenario.dt;
        theta += d.omega * scenario.dt;
        energy += power * scenario.dt;
        t += scenario.dt;

        if (t >= next_replan - scenario.dt / 2.0 && t < scenario.max_time) {
            std::vector<Vec2> candidate;
            if (scripted_next < scenario.scripted.size() &&
                scenario.scripted[scripted_next].t <= t + scenario.dt / 2.0) {
                candidate = scenario.scripted[scripted_next].waypoints;
                candidate.front() = x;
                ++scripted_next;
            } else if (scenario.planner) {
                candidate = plan(scenario, rng, x);
            }
            if (candidate.size() >= 2) {
                const AdmitResult admit = admit_path(state, build_path(candidate), x, energy,
                                                     scenario.controller, mission.command(x));
                pending_admitted = admit.decision == AdmitDecision::Admitted;
                pending_spc = admit.decision == AdmitDecision::SpcFallback;
            }
            next_replan += scenario.controller.replan_period;
        }
    }

    result.final_path = state.path.waypoints;
    if (!result.trace.empty()) finish(result, scenario.budget);
    return result;
}

RunResult run_baseline(const Scenario& scenario, std::uint64_t seed,
                       const BaselineConfig& baseline) {
    check_scenario(scenario);
    if (!(baseline.tau > 0.0 && baseline.tau < 1.0))
        throw ConfigInvalid("baseline tau must lie in (0, 1)");

    RunResult result;
    std::mt19937_64 rng(seed);
    MissionPursuit mission(scenario.mission);
    const ControllerConfig& config = scenario.controller;

    Vec2 x = scenario.initial_x;
    double theta = scenario.unicycle ? scenario.unicycle->theta0 : 0.0;
    double energy = 0.0;
    double t = 0.0;

    std::size_t scripted_next = 0;
    std::vector<Vec2> initial;
    if (scripted_next < scenario.scripted.size() && scenario.scripted[scripted_next].t <= 0.0) {
        initial = scenario.scripted[scripted_next].waypoints;
        initial.front() = x;
        ++scripted_next;
    } else {
        initial = plan(scenario, rng, x);
    }
    WaypointPath path = build_path(initial);

    double s = 0.0;
    bool triggered = false;
    double frozen_length = path.total_length;
    double next_replan = config.replan_period;

    while (t <= scenario.max_time + scenario.dt / 2.0) {
        const Vec2 u_nom = mission.command(x);

        if (!triggered) {
            // Perfect head tracking until the return trigger fires.
            std::vector<Vec2> pts = path.waypoints;
            pts.front() = x;
            path = build_path(pts);
            if (energy / scenario.budget > baseline.tau) {
                triggered = true;
                frozen_length = path.total_length;
            }
        }

        const double s_dot = triggered ? config.v_r / frozen_length : 0.0;
        const Vec2 x_r = smooth_point(path, config.smoothing, s);
        const Vec2 xr_dot =
            triggered ? smooth_tangent(path, config.smoothing, s, TangentMode::Full) * s_dot
                      : Vec2{0.0, 0.0};
        const Vec2 err = x - x_r;
        const double hd = h_track(config.region.tracking_radius, x, x_r);

        // Tracking row only; the first two rows are slack placeholders.
        Qp3 qp;
        qp.a = {{{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, -err.x, -err.y}}};
        qp.b = {-1.0, -1.0, -config.gains.gamma_d * hd - err.dot(xr_dot)};
        qp.z_nom = {0.0, u_nom.x, u_nom.y};

        ControlOutput out;
        try {
            const QpSolution sol = solve(qp);
            out.u = {sol.z[1], sol.z[2]};
            out.qp_active_set = sol.active_set;
        } catch (const Infeasible& e) {
            result.qp_infeasible = true;
            result.error = e.what();
            break;
        }
        const double speed = out.u.norm();
        if (speed > config.u_max) {
            out.u = out.u * (config.u_max / speed);
            out.saturated = true;
        }

        s = std::clamp(s + s_dot * scenario.dt, 0.0, 1.0);

        const Drive d = drive(scenario, out.u, theta);
        const double power = d.model_power + disturbance_at(scenario.disturbances, t);

        TraceRecord rec;
        rec.t = t;
        rec.x = x;
        rec.theta = theta;
        rec.energy = energy;
        rec.h_e = h_energy({energy, scenario.budget}, config.model, config.v_r,
                           path.total_length, s, config.region.effective_radius, 0.0);
        rec.h_b = s;
        rec.h_d = hd;
        rec.s = s;
        rec.length = path.total_length;
        rec.u = out.u;
        rec.v = d.v;
        rec.omega = d.omega;
        rec.power = power;
        rec.frozen = triggered;
        rec.saturated = out.saturated;
        rec.arrived = distance(x, config.region.center) <= config.region.radius;
        result.trace.push_back(rec);
        if (rec.arrived) break;

        x += d.x_dot * scenario.dt;
        theta += d.omega * scenario.dt;
        energy += power * scenario.dt;
        t += scenario.dt;

        if (t >= next_replan - scenario.dt / 2.0 && t < scenario.max_time && !triggered) {
            std::vector<Vec2> candidate;
            if (scripted_next < scenario.scripted.size() &&
                scenario.scripted[scripted_next].t <= t + scenario.dt / 2.0) {
                candidate = scenario.scripted[scripted_next].waypoints;
                candidate.front() = x;
                ++scripted_next;
            } else if (scenario.planner) {
                candidate = plan(scenario, rng, x);
            }
            // The baseline has no admission test; every plan is accepted.
            if (candidate.size() >= 2) {
                path = build_path(candidate);
                s = 0.0;
            }
            next_replan += config.replan_period;
        }
    }

    result.final_path = path.waypoints;
    if (!result.trace.empty()) finish(result, scenario.budget);
    return result;
}

}  // namespace escbf
