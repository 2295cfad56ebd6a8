#include "escbf/cbf.hpp"

#include "escbf/unicycle.hpp"

namespace escbf {

namespace {

/// Common row assembly. The single-integrator case passes a zero slowing term,
/// zero rotation power and zero integral, which leaves every sum bitwise
/// unchanged.
QpRows build_rows(const WaypointPath& path, const SmoothParams& params, double s,
                  const Vec2& x, double consumed_energy, double budget,
                  const CbfConfig& config, const PathDynamics& dyn, const Vec2& u_nom,
                  double measured_power, double slowing, double delta_omega,
                  double extra_integral) {
    const double L = path.total_length;
    const double rate = power_si(config.model, config.v_r) / config.v_r;  // P(v_r)/v_r, J/m

    const EnergyState energy{consumed_energy, budget};
    const double he = h_energy(energy, config.model, config.v_r, L, s,
                               config.region.effective_radius, extra_integral);
    const double hb = h_bound(s);

    const Vec2 x_r = smooth_point(path, params, s);
    const Vec2 dxr_ds = smooth_tangent(path, params, s, TangentMode::Full);
    const Vec2 err = x - x_r;
    const double hd = h_track(config.region.tracking_radius, x, x_r);

    QpRows rows;
    rows.a[0] = {rate * L + slowing, 0.0, 0.0};
    rows.b[0] = -config.gains.gamma_e * he + measured_power + delta_omega +
                rate * dyn.l_dot * (1.0 - s);
    rows.a[1] = {1.0, 0.0, 0.0};
    rows.b[1] = -config.gains.gamma_b * hb;
    rows.a[2] = {err.dot(dxr_ds), -err.x, -err.y};
    rows.b[2] = -config.gains.gamma_d * hd - err.dot(dyn.xr_partial_t);
    rows.u_nom3 = {0.0, u_nom.x, u_nom.y};
    return rows;
}

}  // namespace

double modified_radius(double delta, double d) {
    if (!(d > 0.0) || !(d < delta)) throw InvalidRadii();
    return delta - d;
}

double h_energy(const EnergyState& energy, const ParabolicPower& model, double v_r,
                double L, double s, double delta_m, double extra_integral) {
    const double rate = power_si(model, v_r) / v_r;
    return energy.budget - energy.consumed - rate * (L * (1.0 - s) - delta_m) - extra_integral;
}

double h_bound(double s) { return s; }

double h_track(double d, const Vec2& x, const Vec2& x_r) {
    return 0.5 * (d * d - (x - x_r).squared_norm());
}

QpRows build_qp_si(const WaypointPath& path, const SmoothParams& params, double s,
                   const Vec2& x, double consumed_energy, double budget,
                   const CbfConfig& config, const PathDynamics& dyn, const Vec2& u_nom,
                   double measured_power) {
    return build_rows(path, params, s, x, consumed_energy, budget, config, dyn, u_nom,
                      measured_power, 0.0, 0.0, 0.0);
}

QpRows build_qp_unicycle(const WaypointPath& path, const SmoothParams& params, double s,
                         const Vec2& x, double consumed_energy, double budget,
                         const CbfConfig& config, const PathDynamics& dyn, const Vec2& u_nom,
                         double measured_power, const SlowingProfile& profile,
                         double delta_omega) {
    return build_rows(path, params, s, x, consumed_energy, budget, config, dyn, u_nom,
                      measured_power, slowing_power(profile, s), delta_omega,
                      slowing_integral(profile, s));
}

}  // namespace escbf
