#pragma once

#include <optional>
#include <stdexcept>

namespace escbf {

class NegativeSpeed : public std::invalid_argument {
public:
    NegativeSpeed() : std::invalid_argument("speed must be non-negative") {}
};

class NonPositiveReturnSpeed : public std::invalid_argument {
public:
    NonPositiveReturnSpeed() : std::invalid_argument("return speed must be positive") {}
};

/// Parabolic single-integrator power model P(u) = m0 + m1 u + m2 u^2 plus a
/// constant payload draw. Default coefficients are the fitted rover model.
struct ParabolicPower {
    double m0 = 1.234;    // W
    double m1 = 31.4578;  // W s / m
    double m2 = 27.8126;  // W s^2 / m^2
    double payload = 0.0; // W

    /// Effective constant term used by the converged-speed root analysis;
    /// the payload shifts the parabola exactly like m0 does.
    double m0_effective() const { return m0 + payload; }
};

/// Unicycle power model with separate |omega| terms. The fitted omega^2
/// coefficient is negative, so the polynomial is clamped at zero before the
/// payload is added (the model is only valid inside the fitted omega range).
struct UnicyclePower {
    double mu0 = 1.234;      // W
    double mu1 = 31.4578;    // W s / m
    double mu2 = 27.8126;    // W s^2 / m^2
    double mu1p = 179.9095;  // W s / rad
    double mu2p = -107.7343; // W s^2 / rad^2
    double payload = 0.0;    // W

    /// The linear-speed slice used wherever the parabolic analysis applies.
    ParabolicPower linear_slice() const { return {mu0, mu1, mu2, payload}; }
};

/// Additive actual-minus-model power mismatch.
struct Disturbance {
    double delta_p = 0.0;  // W
};

double power_si(const ParabolicPower& model, double speed);
double power_unicycle(const UnicyclePower& model, double v, double omega);

/// Fixed points of ||u|| = (P(u) + delta_p) v_r / P(v_r), ascending.
struct SpeedRoots {
    double lower;
    double upper;
};

/// Returns nullopt when the disturbance exceeds the stability margin and the
/// fixed-point equation has no real roots.
std::optional<SpeedRoots> converged_speed(const ParabolicPower& model, double v_r,
                                          const Disturbance& dist = {});

/// v_r* = sqrt(m0 / m2), the largest return speed with a stable fixed point.
double max_return_speed(const ParabolicPower& model);

/// Largest additive power disturbance for which converged_speed still has
/// real roots at this v_r.
double stability_margin(const ParabolicPower& model, double v_r);

}  // namespace escbf
