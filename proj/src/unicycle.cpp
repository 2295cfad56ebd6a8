#include "escbf/unicycle.hpp"

#include <algorithm>
#include <cmath>

namespace escbf {

namespace {

constexpr double kPi = 3.14159265358979323846;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Window activation centered at c with the profile's half width.
double window(const SlowingProfile& profile, double c, double s) {
    const double beta = profile.beta_tilde;
    return logistic(beta * (s - (c - profile.half_width))) *
           logistic(-beta * (s - (c + profile.half_width)));
}

/// Power drawn by pure rotation at rate omega beyond the idle draw.
double rotation_excess(const UnicyclePower& model, double omega) {
    return power_unicycle(model, 0.0, omega) - power_unicycle(model, 0.0, 0.0);
}

}  // namespace

UnicycleRates to_unicycle(const Vec2& u, double theta, double handle) {
    if (!(handle > 0.0)) throw InvalidHandle();
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    return {c * u.x + sn * u.y, (-sn * u.x + c * u.y) / handle};
}

UnicycleRates twoway(double v, double omega) {
    if (v == 0.0) return {0.0, 0.0};
    return {v, v > 0.0 ? omega : -omega};
}

double omega_bound(double v_r, double handle, double psi) {
    // sin(pi - psi) = sin(psi), so the reflex-angle case needs no branch.
    return v_r / handle * std::sin(psi);
}

double attenuation_distance(double handle, double psi, double eps_omega) {
    if (!(eps_omega > 0.0) || !(psi >= eps_omega)) throw InvalidAngles();
    return handle * (kPi / 2.0) * std::log(psi / eps_omega);
}

SlowingProfile build_slowing_profile(const WaypointPath& path, const UnicyclePower& model,
                                     double v_r, const UnicycleParams& params, double d) {
    SlowingProfile profile;
    profile.beta_tilde = params.beta_tilde;

    const double L = path.total_length;
    const double scale = L / v_r;
    profile.floor = scale * power_unicycle(model, 0.0, v_r / params.handle * params.eps_omega);

    double d_tilde = params.d_tilde;
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const double psi = path.turn_angles[i - 1];
        profile.centers.push_back(path.breakpoints[i]);
        profile.amplitudes.push_back(scale *
                                     rotation_excess(model, omega_bound(v_r, params.handle, psi)));
        const double da =
            psi >= params.eps_omega ? attenuation_distance(params.handle, psi, params.eps_omega)
                                    : 0.0;
        d_tilde = std::max(d_tilde, 2.0 * std::max(da, d));
    }
    profile.half_width = d_tilde / (2.0 * L);
    return profile;
}

double slowing_power(const SlowingProfile& profile, double s) {
    double corner = 0.0;
    double activation = 0.0;
    for (std::size_t i = 0; i < profile.centers.size(); ++i) {
        const double w = window(profile, profile.centers[i], s);
        corner += profile.amplitudes[i] * w;
        activation += w;
    }
    // The floor only applies where some window is active.
    return corner + profile.floor * std::min(1.0, activation);
}

double slowing_integral(const SlowingProfile& profile, double s, int panels) {
    if (profile.empty() || s >= 1.0) return 0.0;
    const double h = (1.0 - s) / (2 * panels);
    double sum = slowing_power(profile, s) + slowing_power(profile, 1.0);
    for (int k = 1; k < 2 * panels; ++k)
        sum += (k % 2 == 1 ? 4.0 : 2.0) * slowing_power(profile, s + k * h);
    return sum * h / 3.0;
}

}  // namespace escbf
