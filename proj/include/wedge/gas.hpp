#pragma once

#include <string>

#include "wedge/error.hpp"

namespace wedge {

struct GasModel {
    double gamma = 1.4;

    explicit GasModel(double g = 1.4) : gamma(g) {
        if (!(g > 1.0)) fail(ErrorKind::domain, "GasModel: gamma must exceed 1");
    }
};

// Primitive state. Velocities are in whatever frame the caller uses.
struct EulerState {
    double u1 = 0.0;
    double u2 = 0.0;
    double p = 1.0;
    double rho = 1.0;

    double speed() const;
    double speed_sq() const { return u1 * u1 + u2 * u2; }
    double slope() const { return u2 / u1; } // w
};

enum class Regime { subsonic, sonic, supersonic };

struct FlowRegime {
    Regime tag = Regime::subsonic;
    double margin = 0.0; // c^2 - q^2
};

const char* to_string(Regime r);

// relative tolerance used by classify
inline constexpr double sonic_rel_tol = 1e-12;
// Bernoulli radicand must exceed this fraction of B
inline constexpr double cavitation_rel_tol = 1e-14;

void check_state(const EulerState& s, const char* who);

double sound_speed_sq(const EulerState& s, const GasModel& gas);
double sound_speed(const EulerState& s, const GasModel& gas);
double mach(const EulerState& s, const GasModel& gas);
double bernoulli(const EulerState& s, const GasModel& gas);
double entropy_fn(const EulerState& s, const GasModel& gas);
double u1_from_bernoulli(double B, double w, double p, double rho, const GasModel& gas);
// 80-bit variants for differences of nearly equal states
long double bernoulli_ext(const EulerState& s, const GasModel& gas);
long double u1_from_bernoulli_ext(long double B, double w, double p, double rho, const GasModel& gas);
FlowRegime classify(const EulerState& s, const GasModel& gas);

// Rotate velocity by angle (counterclockwise).
EulerState rotated(const EulerState& s, double angle);

} // namespace wedge
