#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "escbf/controller.hpp"
#include "escbf/vec2.hpp"

namespace escbf {

class ConfigInvalid : public std::invalid_argument {
public:
    explicit ConfigInvalid(const std::string& what) : std::invalid_argument(what) {}
};

class BoundsInvalid : public std::invalid_argument {
public:
    BoundsInvalid() : std::invalid_argument("points must lie inside the planner bounds") {}
};

class EmptyTrace : public std::invalid_argument {
public:
    EmptyTrace() : std::invalid_argument("metrics require a non-empty trace") {}
};

struct MissionGoal {
    Vec2 target;
    double speed = 0.1;  // m/s
};

struct Rect {
    Vec2 lo;
    Vec2 hi;

    bool contains(const Vec2& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
};

/// Scripted replans: each entry is handed to admit_path at the first replan
/// tick at or after its timestamp.
struct ScriptedPlan {
    double t = 0.0;
    std::vector<Vec2> waypoints;
};

/// Seeded random polyline generator used when no script is given.
struct RandomPlanner {
    Rect bounds{{0.0, 0.0}, {10.0, 10.0}};
    int n_min = 2;
    int n_max = 6;
};

/// Step change of the true power draw relative to the controller's model.
struct DisturbanceStep {
    double t_start = 0.0;
    double delta_p = 0.0;  // W
};

struct UnicycleSetup {
    double theta0 = 0.0;
    UnicycleParams params;
    UnicyclePower power;
    double delta_omega = 0.0;  // watts, rotation power margin in the energy row
};

struct Scenario {
    Vec2 initial_x;
    Vec2 station;
    double budget = 12000.0;  // E_nom, joules
    ControllerConfig controller;
    std::vector<DisturbanceStep> disturbances;
    std::vector<MissionGoal> mission;
    std::vector<ScriptedPlan> scripted;      // takes precedence when non-empty
    std::optional<RandomPlanner> planner;
    double dt = 1e-3;
    double max_time = 600.0;
    std::optional<UnicycleSetup> unicycle;
};

struct TraceRecord {
    double t = 0.0;
    Vec2 x;
    double theta = 0.0;
    double energy = 0.0;  // E, joules
    double h_e = 0.0;
    double h_b = 0.0;
    double h_d = 0.0;
    double s = 0.0;
    double length = 0.0;  // L, meters
    Vec2 u;
    double v = 0.0;
    double omega = 0.0;
    double power = 0.0;  // actual simulated draw, W
    bool frozen = false;
    bool arrived = false;
    bool admitted = false;
    bool spc_fallback = false;
    bool saturated = false;
};

struct Metrics {
    double eoa = 0.0;  // budget minus consumed energy at the end of the run
    double min_h_e = 0.0;
    double min_h_d = 0.0;
    bool budget_violated = false;
    std::optional<double> arrival_time;
    std::int64_t saturation_steps = 0;
    double distance_traveled = 0.0;
};

struct RunResult {
    std::vector<TraceRecord> trace;
    Metrics metrics;
    std::vector<Vec2> final_path;  // waypoints active when the run ended
    bool qp_infeasible = false;
    std::string error;
};

/// Deterministic polyline from x to the station, waypoint count uniform in
/// [n_min, n_max]; intermediate points avoid the station's neighborhood so a
/// replan never routes the mission through the charging region.
std::vector<Vec2> synth_planner(std::uint64_t seed, const Vec2& x, const Vec2& station,
                                const Rect& bounds, int n_min, int n_max);

Metrics compute_metrics(const std::vector<TraceRecord>& trace, double budget);

/// Fixed-step run of the safety-filtered controller. Ends at arrival,
/// max_time, or an infeasible QP (reported in the result, not thrown).
RunResult run(const Scenario& scenario, std::uint64_t seed);

struct BaselineConfig {
    double tau = 0.5;  // consumed-energy ratio that triggers the return
};

/// Threshold baseline: follows the mission until E / budget exceeds tau, then
/// rides the path back at v_r with only the tracking constraint enforced.
RunResult run_baseline(const Scenario& scenario, std::uint64_t seed,
                       const BaselineConfig& baseline);

}  // namespace escbf
