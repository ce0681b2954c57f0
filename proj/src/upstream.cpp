#include "wedge/upstream.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace wedge {

UpstreamModel::UpstreamModel(const EulerState& background, const PerturbationSpec& spec, double decay,
                             double k1, const GasModel& gas)
    : bg_(background), spec_(spec), decay_(decay), k1_(k1), gas_(gas) {
    if (spec.family != "radial" && spec.family != "angular" && spec.family != "zero")
        fail(ErrorKind::validation, "upstream perturbation: unknown family '" + spec.family + "'");
    if (spec.amplitude < 0.0) fail(ErrorKind::validation, "upstream perturbation: amplitude must be >= 0");
    if (!(decay >= 0.0)) fail(ErrorKind::validation, "upstream perturbation: decay must be >= 0");
    constexpr double deg = std::numbers::pi / 180.0;
    center_ = spec.angular_center_deg >= 0.0 ? spec.angular_center_deg * deg : std::atan2(1.0, k1);
    half_width_ = spec.angular_cutoff_deg * deg;
    if (spec.family == "angular" && !(half_width_ > 0.0))
        fail(ErrorKind::validation, "upstream perturbation: angular cutoff must be positive");
}

bool UpstreamModel::in_domain(double y1, double y2) const {
    const double tol = 1e-12 * (1.0 + std::abs(y1) + std::abs(y2));
    return y1 >= -tol && y2 >= -tol && y1 <= (4.0 / 3.0) * k1_ * y2 + tol;
}

double UpstreamModel::profile(double y1, double y2) const {
    if (spec_.family == "zero" || spec_.amplitude == 0.0) return 0.0;
    double chi = 1.0;
    if (spec_.family == "angular") {
        const double d = std::abs(std::atan2(y2, y1) - center_);
        // C^2 cosine-squared window
        chi = d >= half_width_ ? 0.0 : std::pow(std::cos(0.5 * std::numbers::pi * d / half_width_), 4);
    }
    return chi * std::pow(1.0 + std::hypot(y1, y2), -decay_);
}

EulerState UpstreamModel::operator()(double y1, double y2) const {
    if (!in_domain(y1, y2)) {
        std::ostringstream os;
        os << "upstream: point (" << y1 << ", " << y2 << ") outside the supersonic region";
        fail(ErrorKind::domain, os.str());
    }
    const double f = spec_.amplitude * profile(y1, y2);
    if (f == 0.0) return bg_;
    const double q = bg_.speed();
    EulerState s = bg_;
    s.u1 += f * spec_.components[0] * q;
    s.u2 += f * spec_.components[1] * q;
    s.p += f * spec_.components[2] * bg_.p;
    s.rho += f * spec_.components[3] * bg_.rho;
    return s;
}

double UpstreamModel::bernoulli_at(double y1, double y2) const {
    return bernoulli((*this)(y1, y2), gas_);
}

WedgeBoundary::WedgeBoundary(const WedgeSpec& spec, double eps, double decay) : decay_(decay) {
    if (spec.family != "power" && spec.family != "zero")
        fail(ErrorKind::validation, "wedge perturbation: unknown family '" + spec.family + "'");
    if (!(decay >= 0.0)) fail(ErrorKind::validation, "wedge perturbation: decay must be >= 0");
    amp_ = spec.family == "zero" ? 0.0 : eps * spec.amplitude_factor;
}

double WedgeBoundary::slope(double z1) const {
    if (amp_ == 0.0) return 0.0;
    return amp_ * std::pow(1.0 + z1, -decay_);
}

double WedgeBoundary::profile(double z1) const {
    if (amp_ == 0.0) return 0.0;
    if (std::abs(decay_ - 1.0) < 1e-12) return amp_ * std::log1p(z1);
    return amp_ * (std::pow(1.0 + z1, 1.0 - decay_) - 1.0) / (1.0 - decay_);
}

} // namespace wedge
