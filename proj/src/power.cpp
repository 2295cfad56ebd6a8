#include "escbf/power.hpp"

#include <algorithm>
#include <cmath>

namespace escbf {

double power_si(const ParabolicPower& model, double speed) {
    if (speed < 0.0) throw NegativeSpeed();
    return model.m0 + model.m1 * speed + model.m2 * speed * speed + model.payload;
}

double power_unicycle(const UnicyclePower& model, double v, double omega) {
    const double av = std::abs(v);
    const double aw = std::abs(omega);
    const double raw = model.mu0 + model.mu1 * av + model.mu2 * av * av +
                       model.mu1p * aw + model.mu2p * aw * aw;
    return std::max(0.0, raw) + model.payload;
}

std::optional<SpeedRoots> converged_speed(const ParabolicPower& model, double v_r,
                                          const Disturbance& dist) {
    if (!(v_r > 0.0)) throw NonPositiveReturnSpeed();
    const double m0 = model.m0_effective();
    const double m2 = model.m2;
    const double disc = (m0 - m2 * v_r * v_r) * (m0 - m2 * v_r * v_r) -
                        4.0 * m2 * v_r * v_r * dist.delta_p;
    if (disc < 0.0) return std::nullopt;
    const double d = std::sqrt(disc);
    const double mid = m0 + m2 * v_r * v_r;
    const double denom = 2.0 * m2 * v_r;
    return SpeedRoots{(mid - d) / denom, (mid + d) / denom};
}

double max_return_speed(const ParabolicPower& model) {
    return std::sqrt(model.m0_effective() / model.m2);
}

double stability_margin(const ParabolicPower& model, double v_r) {
    if (!(v_r > 0.0)) throw NonPositiveReturnSpeed();
    const double num = model.m0_effective() - model.m2 * v_r * v_r;
    const double q = num / (2.0 * v_r * std::sqrt(model.m2));
    return q * q;
}

}  // namespace escbf
