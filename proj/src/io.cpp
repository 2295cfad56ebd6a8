#include "escbf/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

namespace escbf {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, std::initializer_list<const char*> keys, const char* ctx) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : keys)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigInvalid(std::string(ctx) + ": unknown field \"" + it.key() + "\"");
    }
}

Vec2 vec2_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigInvalid("expected an [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

json vec2_to(const Vec2& v) { return json::array({v.x, v.y}); }

ParabolicPower power_from(const json& j) {
    expect_keys(j, {"m0", "m1", "m2", "payload"}, "controller.power");
    ParabolicPower p;
    p.m0 = j.value("m0", p.m0);
    p.m1 = j.value("m1", p.m1);
    p.m2 = j.value("m2", p.m2);
    p.payload = j.value("payload", p.payload);
    return p;
}

json power_to(const ParabolicPower& p) {
    return {{"m0", p.m0}, {"m1", p.m1}, {"m2", p.m2}, {"payload", p.payload}};
}

UnicyclePower upower_from(const json& j) {
    expect_keys(j, {"mu0", "mu1", "mu2", "mu1p", "mu2p", "payload"}, "unicycle.power");
    UnicyclePower p;
    p.mu0 = j.value("mu0", p.mu0);
    p.mu1 = j.value("mu1", p.mu1);
    p.mu2 = j.value("mu2", p.mu2);
    p.mu1p = j.value("mu1p", p.mu1p);
    p.mu2p = j.value("mu2p", p.mu2p);
    p.payload = j.value("payload", p.payload);
    return p;
}

json upower_to(const UnicyclePower& p) {
    return {{"mu0", p.mu0},   {"mu1", p.mu1},   {"mu2", p.mu2},
            {"mu1p", p.mu1p}, {"mu2p", p.mu2p}, {"payload", p.payload}};
}

ControllerConfig controller_from(const json& j, const Vec2& station) {
    expect_keys(j,
                {"v_r", "gamma_e", "gamma_b", "gamma_d", "delta", "d", "u_max", "k_w",
                 "sigma", "kappa", "replan_period", "beta", "eps_end", "power"},
                "controller");
    ControllerConfig c;
    c.v_r = j.value("v_r", c.v_r);
    c.gains.gamma_e = j.value("gamma_e", c.gains.gamma_e);
    c.gains.gamma_b = j.value("gamma_b", c.gains.gamma_b);
    c.gains.gamma_d = j.value("gamma_d", c.gains.gamma_d);
    const double delta = j.value("delta", 1.0);
    const double d = j.value("d", 0.3);
    c.region = ChargingRegion::make(station, delta, d);
    c.u_max = j.value("u_max", c.u_max);
    c.k_w = j.value("k_w", c.k_w);
    c.sigma = j.value("sigma", c.sigma);
    c.kappa = j.value("kappa", c.kappa);
    c.replan_period = j.value("replan_period", c.replan_period);
    c.smoothing.beta = j.value("beta", c.smoothing.beta);
    c.smoothing.eps_end = j.value("eps_end", 14.0 / c.smoothing.beta);
    if (j.contains("power")) c.model = power_from(j["power"]);
    return c;
}

json controller_to(const ControllerConfig& c) {
    return {{"v_r", c.v_r},
            {"gamma_e", c.gains.gamma_e},
            {"gamma_b", c.gains.gamma_b},
            {"gamma_d", c.gains.gamma_d},
            {"delta", c.region.radius},
            {"d", c.region.tracking_radius},
            {"u_max", c.u_max},
            {"k_w", c.k_w},
            {"sigma", c.sigma},
            {"kappa", c.kappa},
            {"replan_period", c.replan_period},
            {"beta", c.smoothing.beta},
            {"eps_end", c.smoothing.eps_end},
            {"power", power_to(c.model)}};
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
    json top;
    try {
        top = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("scenario JSON parse error: ") + e.what());
    }
    expect_keys(top,
                {"schema_version", "initial_x", "station", "budget", "controller",
                 "disturbances", "mission", "scripted", "planner", "dt", "max_time",
                 "unicycle"},
                "scenario");
    if (top.value("schema_version", -1) != kSchemaVersion)
        throw ConfigInvalid("scenario schema_version must be 1");

    Scenario s;
    if (top.contains("initial_x")) s.initial_x = vec2_from(top["initial_x"]);
    if (top.contains("station")) s.station = vec2_from(top["station"]);
    s.budget = top.value("budget", s.budget);
    s.controller = controller_from(top.value("controller", json::object()), s.station);
    s.dt = top.value("dt", s.dt);
    s.max_time = top.value("max_time", s.max_time);

    for (const json& d : top.value("disturbances", json::array())) {
        expect_keys(d, {"t_start", "delta_p"}, "disturbances");
        s.disturbances.push_back({d.value("t_start", 0.0), d.value("delta_p", 0.0)});
    }
    for (const json& g : top.value("mission", json::array())) {
        expect_keys(g, {"target", "speed"}, "mission");
        s.mission.push_back({vec2_from(g.at("target")), g.value("speed", 0.1)});
    }
    for (const json& p : top.value("scripted", json::array())) {
        expect_keys(p, {"t", "waypoints"}, "scripted");
        ScriptedPlan plan;
        plan.t = p.value("t", 0.0);
        for (const json& w : p.at("waypoints")) plan.waypoints.push_back(vec2_from(w));
        s.scripted.push_back(plan);
    }
    if (top.contains("planner")) {
        const json& p = top["planner"];
        expect_keys(p, {"bounds", "n_min", "n_max"}, "planner");
        RandomPlanner planner;
        if (p.contains("bounds")) {
            const json& b = p["bounds"];
            if (!b.is_array() || b.size() != 4)
                throw ConfigInvalid("planner.bounds must be [lo_x, lo_y, hi_x, hi_y]");
            planner.bounds = {{b[0].get<double>(), b[1].get<double>()},
                              {b[2].get<double>(), b[3].get<double>()}};
        }
        planner.n_min = p.value("n_min", planner.n_min);
        planner.n_max = p.value("n_max", planner.n_max);
        s.planner = planner;
    }
    if (top.contains("unicycle")) {
        const json& u = top["unicycle"];
        expect_keys(u, {"theta0", "handle", "eps_omega", "beta_tilde", "d_tilde", "power",
                        "delta_omega"},
                    "unicycle");
        UnicycleSetup setup;
        setup.theta0 = u.value("theta0", 0.0);
        setup.delta_omega = u.value("delta_omega", 0.0);
        setup.params.handle = u.value("handle", setup.params.handle);
        setup.params.eps_omega = u.value("eps_omega", setup.params.eps_omega);
        setup.params.beta_tilde = u.value("beta_tilde", setup.params.beta_tilde);
        setup.params.d_tilde = u.value("d_tilde", setup.params.d_tilde);
        if (u.contains("power")) setup.power = upower_from(u["power"]);
        s.unicycle = setup;
    }
    return s;
}

std::string scenario_to_json_text(const Scenario& s) {
    json top;
    top["schema_version"] = kSchemaVersion;
    top["initial_x"] = vec2_to(s.initial_x);
    top["station"] = vec2_to(s.station);
    top["budget"] = s.budget;
    top["controller"] = controller_to(s.controller);
    top["dt"] = s.dt;
    top["max_time"] = s.max_time;
    if (!s.disturbances.empty()) {
        json arr = json::array();
        for (const DisturbanceStep& d : s.disturbances)
            arr.push_back({{"t_start", d.t_start}, {"delta_p", d.delta_p}});
        top["disturbances"] = arr;
    }
    if (!s.mission.empty()) {
        json arr = json::array();
        for (const MissionGoal& g : s.mission)
            arr.push_back({{"target", vec2_to(g.target)}, {"speed", g.speed}});
        top["mission"] = arr;
    }
    if (!s.scripted.empty()) {
        json arr = json::array();
        for (const ScriptedPlan& p : s.scripted) {
            json wps = json::array();
            for (const Vec2& w : p.waypoints) wps.push_back(vec2_to(w));
            arr.push_back({{"t", p.t}, {"waypoints", wps}});
        }
        top["scripted"] = arr;
    }
    if (s.planner) {
        top["planner"] = {{"bounds", json::array({s.planner->bounds.lo.x, s.planner->bounds.lo.y,
                                                  s.planner->bounds.hi.x, s.planner->bounds.hi.y})},
                          {"n_min", s.planner->n_min},
                          {"n_max", s.planner->n_max}};
    }
    if (s.unicycle) {
        top["unicycle"] = {{"theta0", s.unicycle->theta0},
                           {"handle", s.unicycle->params.handle},
                           {"eps_omega", s.unicycle->params.eps_omega},
                           {"beta_tilde", s.unicycle->params.beta_tilde},
                           {"d_tilde", s.unicycle->params.d_tilde},
                           {"delta_omega", s.unicycle->delta_omega},
                           {"power", upower_to(s.unicycle->power)}};
    }
    return top.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) { return scenario_from_json_text(read_file(path)); }

namespace {

json record_to_json(const TraceRecord& r) {
    return {{"t", r.t},         {"x", vec2_to(r.x)},   {"theta", r.theta},
            {"energy", r.energy}, {"h_e", r.h_e},      {"h_b", r.h_b},
            {"h_d", r.h_d},     {"s", r.s},            {"length", r.length},
            {"u", vec2_to(r.u)}, {"v", r.v},           {"omega", r.omega},
            {"power", r.power}, {"frozen", r.frozen},  {"arrived", r.arrived},
            {"admitted", r.admitted}, {"spc_fallback", r.spc_fallback},
            {"saturated", r.saturated}};
}

}  // namespace

std::string trace_to_jsonl(const std::vector<TraceRecord>& trace) {
    std::string out;
    for (const TraceRecord& r : trace) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::vector<TraceRecord> trace_from_jsonl(const std::string& text) {
    std::vector<TraceRecord> trace;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError(std::string("trace parse error: ") + e.what());
        }
        TraceRecord r;
        r.t = j.value("t", 0.0);
        if (j.contains("x")) r.x = vec2_from(j["x"]);
        r.theta = j.value("theta", 0.0);
        r.energy = j.value("energy", 0.0);
        r.h_e = j.value("h_e", 0.0);
        r.h_b = j.value("h_b", 0.0);
        r.h_d = j.value("h_d", 0.0);
        r.s = j.value("s", 0.0);
        r.length = j.value("length", 0.0);
        if (j.contains("u")) r.u = vec2_from(j["u"]);
        r.v = j.value("v", 0.0);
        r.omega = j.value("omega", 0.0);
        r.power = j.value("power", 0.0);
        r.frozen = j.value("frozen", false);
        r.arrived = j.value("arrived", false);
        r.admitted = j.value("admitted", false);
        r.spc_fallback = j.value("spc_fallback", false);
        r.saturated = j.value("saturated", false);
        trace.push_back(r);
    }
    return trace;
}

std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
    std::string out =
        "t,x,y,theta,energy,h_e,h_b,h_d,s,length,ux,uy,v,omega,power,"
        "frozen,arrived,admitted,spc_fallback,saturated\n";
    char line[512];
    for (const TraceRecord& r : trace) {
        std::snprintf(line, sizeof line,
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%d,%d\n",
                      r.t, r.x.x, r.x.y, r.theta, r.energy, r.h_e, r.h_b, r.h_d, r.s,
                      r.length, r.u.x, r.u.y, r.v, r.omega, r.power, r.frozen ? 1 : 0,
                      r.arrived ? 1 : 0, r.admitted ? 1 : 0, r.spc_fallback ? 1 : 0,
                      r.saturated ? 1 : 0);
        out += line;
    }
    return out;
}

std::string metrics_to_json_text(const Metrics& m, double budget) {
    json j = {{"budget", budget},
              {"eoa", m.eoa},
              {"min_h_e", m.min_h_e},
              {"min_h_d", m.min_h_d},
              {"budget_violated", m.budget_violated},
              {"saturation_steps", m.saturation_steps},
              {"distance_traveled", m.distance_traveled}};
    if (m.arrival_time)
        j["arrival_time"] = *m.arrival_time;
    else
        j["arrival_time"] = nullptr;
    return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.flush()) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("rename to " + path + " failed: " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

struct Series {
    std::vector<double> xs;
    std::vector<double> ys;
    std::string x_label;
    std::string y_label;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Single-polyline chart with a framed plot area and min/max tick labels.
std::string svg_chart(const Series& series) {
    const double width = 800.0, height = 500.0, margin = 70.0;
    double xmin = series.xs.front(), xmax = series.xs.front();
    double ymin = series.ys.front(), ymax = series.ys.front();
    for (double v : series.xs) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
    }
    for (double v : series.ys) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

    auto px = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
    auto py = [&](double y) {
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };

    std::string svg =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
        "viewBox=\"0 0 800 500\">\n"
        "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
    svg += "<rect x=\"" + fmt(margin) + "\" y=\"" + fmt(margin) + "\" width=\"" +
           fmt(width - 2 * margin) + "\" height=\"" + fmt(height - 2 * margin) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    svg += "<polyline fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series.xs.size(); ++i) {
        if (i) svg += ' ';
        svg += fmt(px(series.xs[i])) + "," + fmt(py(series.ys[i]));
    }
    svg += "\"/>\n";
    svg += "<text x=\"" + fmt(width / 2) + "\" y=\"" + fmt(height - 20.0) +
           "\" text-anchor=\"middle\" font-size=\"16\">" + series.x_label + "</text>\n";
    svg += "<text x=\"20\" y=\"" + fmt(height / 2) +
           "\" text-anchor=\"middle\" font-size=\"16\" transform=\"rotate(-90 20 " +
           fmt(height / 2) + ")\">" + series.y_label + "</text>\n";
    svg += "<text x=\"" + fmt(margin) + "\" y=\"" + fmt(height - margin + 20.0) +
           "\" font-size=\"12\">" + fmt(xmin) + "</text>\n";
    svg += "<text x=\"" + fmt(width - margin) + "\" y=\"" + fmt(height - margin + 20.0) +
           "\" text-anchor=\"end\" font-size=\"12\">" + fmt(xmax) + "</text>\n";
    svg += "<text x=\"" + fmt(margin - 6.0) + "\" y=\"" + fmt(height - margin) +
           "\" text-anchor=\"end\" font-size=\"12\">" + fmt(ymin) + "</text>\n";
    svg += "<text x=\"" + fmt(margin - 6.0) + "\" y=\"" + fmt(margin + 4.0) +
           "\" text-anchor=\"end\" font-size=\"12\">" + fmt(ymax) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

std::string svg_trajectory(const std::vector<TraceRecord>& trace,
                           const std::vector<Vec2>& waypoints) {
    const double width = 600.0, height = 600.0, margin = 50.0;
    double xmin = trace.front().x.x, xmax = xmin, ymin = trace.front().x.y, ymax = ymin;
    auto grow = [&](const Vec2& p) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    };
    for (const TraceRecord& r : trace) grow(r.x);
    for (const Vec2& w : waypoints) grow(w);
    if (xmax - xmin < 1e-9) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-9) ymax = ymin + 1.0;
    const double scale =
        std::min((width - 2 * margin) / (xmax - xmin), (height - 2 * margin) / (ymax - ymin));

    auto px = [&](double x) { return margin + (x - xmin) * scale; };
    auto py = [&](double y) { return height - margin - (y - ymin) * scale; };

    std::string svg =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
        "viewBox=\"0 0 600 600\">\n"
        "<rect x=\"0\" y=\"0\" width=\"600\" height=\"600\" fill=\"white\"/>\n";
    if (waypoints.size() >= 2) {
        svg += "<polyline fill=\"none\" stroke=\"#d29922\" stroke-width=\"1.5\" "
               "stroke-dasharray=\"6,4\" points=\"";
        for (std::size_t i = 0; i < waypoints.size(); ++i) {
            if (i) svg += ' ';
            svg += fmt(px(waypoints[i].x)) + "," + fmt(py(waypoints[i].y));
        }
        svg += "\"/>\n";
        for (const Vec2& w : waypoints)
            svg += "<circle cx=\"" + fmt(px(w.x)) + "\" cy=\"" + fmt(py(w.y)) +
                   "\" r=\"4\" fill=\"#d29922\"/>\n";
    }
    svg += "<polyline fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (i) svg += ' ';
        svg += fmt(px(trace[i].x.x)) + "," + fmt(py(trace[i].x.y));
    }
    svg += "\"/>\n";
    svg += "<circle cx=\"" + fmt(px(trace.front().x.x)) + "\" cy=\"" +
           fmt(py(trace.front().x.y)) + "\" r=\"5\" fill=\"#2da44e\"/>\n";
    svg += "<circle cx=\"" + fmt(px(trace.back().x.x)) + "\" cy=\"" +
           fmt(py(trace.back().x.y)) + "\" r=\"5\" fill=\"#cf222e\"/>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace

std::string render_panel(const std::vector<TraceRecord>& trace, const std::string& panel,
                         const std::vector<Vec2>& waypoints) {
    if (trace.empty()) throw EmptyTrace();
    if (panel == "traj") return svg_trajectory(trace, waypoints);

    Series series;
    series.x_label = "time [s]";
    for (const TraceRecord& r : trace) series.xs.push_back(r.t);
    if (panel == "he") {
        series.y_label = "h_e [J]";
        for (const TraceRecord& r : trace) series.ys.push_back(r.h_e);
    } else if (panel == "energy") {
        series.y_label = "consumed energy [J]";
        for (const TraceRecord& r : trace) series.ys.push_back(r.energy);
    } else if (panel == "s") {
        series.y_label = "path parameter s";
        for (const TraceRecord& r : trace) series.ys.push_back(r.s);
    } else if (panel == "length") {
        series.y_label = "path length [m]";
        for (const TraceRecord& r : trace) series.ys.push_back(r.length);
    } else {
        throw UnknownPanel(panel);
    }
    return svg_chart(series);
}

}  // namespace escbf
