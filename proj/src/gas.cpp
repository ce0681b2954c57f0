#include "wedge/gas.hpp"

#include <cmath>
#include <sstream>

namespace wedge {

const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::validation: return "validation";
    case ErrorKind::no_shock: return "no_shock";
    case ErrorKind::detached: return "detached";
    case ErrorKind::cavitation: return "cavitation";
    case ErrorKind::regime: return "regime";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::tangent_point: return "tangent_point";
    case ErrorKind::ellipticity: return "ellipticity";
    case ErrorKind::fold_over: return "fold_over";
    case ErrorKind::solver: return "solver";
    case ErrorKind::nonconvergence: return "nonconvergence";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

const char* to_string(Regime r) {
    switch (r) {
    case Regime::subsonic: return "subsonic";
    case Regime::sonic: return "sonic";
    case Regime::supersonic: return "supersonic";
    }
    return "unknown";
}

double EulerState::speed() const { return std::hypot(u1, u2); }

void check_state(const EulerState& s, const char* who) {
    if (!(s.p > 0.0) || !(s.rho > 0.0) || !std::isfinite(s.p) || !std::isfinite(s.rho)) {
        std::ostringstream os;
        os << who << ": nonpositive pressure or density (p=" << s.p << ", rho=" << s.rho << ")";
        fail(ErrorKind::domain, os.str());
    }
    if (!std::isfinite(s.u1) || !std::isfinite(s.u2))
        fail(ErrorKind::domain, std::string(who) + ": non-finite velocity");
}

double sound_speed_sq(const EulerState& s, const GasModel& gas) {
    check_state(s, "sound_speed");
    return gas.gamma * s.p / s.rho;
}

double sound_speed(const EulerState& s, const GasModel& gas) {
    return std::sqrt(sound_speed_sq(s, gas));
}

double mach(const EulerState& s, const GasModel& gas) {
    return s.speed() / sound_speed(s, gas);
}

double bernoulli(const EulerState& s, const GasModel& gas) {
    check_state(s, "bernoulli");
    const double g = gas.gamma;
    return 0.5 * s.speed_sq() + g * s.p / ((g - 1.0) * s.rho);
}

double entropy_fn(const EulerState& s, const GasModel& gas) {
    check_state(s, "entropy_fn");
    return s.p / std::pow(s.rho, gas.gamma);
}

long double bernoulli_ext(const EulerState& s, const GasModel& gas) {
    const long double g = gas.gamma;
    const long double u1 = s.u1, u2 = s.u2;
    return 0.5L * (u1 * u1 + u2 * u2) + g * s.p / ((g - 1.0L) * s.rho);
}

long double u1_from_bernoulli_ext(long double B, double w, double p, double rho, const GasModel& gas) {
    if (!(p > 0.0) || !(rho > 0.0))
        fail(ErrorKind::domain, "u1_from_bernoulli: nonpositive pressure or density");
    const long double g = gas.gamma;
    const long double rad = 2.0L * B - 2.0L * g * p / ((g - 1.0L) * rho);
    if (!(rad > cavitation_rel_tol * std::abs(B))) {
        std::ostringstream os;
        os << "u1_from_bernoulli: cavitation (radicand " << static_cast<double>(rad) << ")";
        fail(ErrorKind::cavitation, os.str());
    }
    const long double ww = w;
    return std::sqrt(rad) / std::sqrt(1.0L + ww * ww);
}

double u1_from_bernoulli(double B, double w, double p, double rho, const GasModel& gas) {
    if (!(p > 0.0) || !(rho > 0.0))
        fail(ErrorKind::domain, "u1_from_bernoulli: nonpositive pressure or density");
    const double g = gas.gamma;
    const double rad = 2.0 * B - 2.0 * g * p / ((g - 1.0) * rho);
    if (!(rad > cavitation_rel_tol * std::abs(B))) {
        std::ostringstream os;
        os << "u1_from_bernoulli: cavitation (radicand " << rad << ", B=" << B << ")";
        fail(ErrorKind::cavitation, os.str());
    }
    return std::sqrt(rad) / std::sqrt(1.0 + w * w);
}

FlowRegime classify(const EulerState& s, const GasModel& gas) {
    const double c2 = sound_speed_sq(s, gas);
    FlowRegime r;
    r.margin = c2 - s.speed_sq();
    if (std::abs(r.margin) <= sonic_rel_tol * c2)
        r.tag = Regime::sonic;
    else
        r.tag = r.margin > 0.0 ? Regime::subsonic : Regime::supersonic;
    return r;
}

EulerState rotated(const EulerState& s, double angle) {
    const double c = std::cos(angle), sn = std::sin(angle);
    EulerState r = s;
    r.u1 = c * s.u1 - sn * s.u2;
    r.u2 = sn * s.u1 + c * s.u2;
    return r;
}

} // namespace wedge
