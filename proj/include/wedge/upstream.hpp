#pragma once

#include <array>
#include <string>

#include "wedge/gas.hpp"

namespace wedge {

// Analytic perturbation of the uniform supersonic upstream state,
// delta U(y) = eps * weights * profile(y), relative to the background
// magnitudes (q for velocities, p and rho for the thermodynamic pair).
struct PerturbationSpec {
    std::string family = "radial"; // radial | angular | zero
    double amplitude = 0.0;
    double decay = -1.0; // negative: branch default
    std::array<double, 4> components{1.0, 1.0, 1.0, 1.0};
    double angular_cutoff_deg = 30.0; // half-width of the smooth window (angular family)
    double angular_center_deg = -1.0; // negative: direction of the background shock
};

// Wedge-boundary slope b'(z1) = eps * factor * (1 + z1)^(-decay)
struct WedgeSpec {
    std::string family = "power"; // power | zero
    double amplitude_factor = 1.0;
    double decay = -1.0; // negative: branch default
};

class UpstreamModel {
public:
    UpstreamModel() = default;
    // k1 bounds the evaluation domain 0 <= y1 <= (4/3) k1 y2
    UpstreamModel(const EulerState& background, const PerturbationSpec& spec, double decay, double k1,
                  const GasModel& gas);

    const EulerState& background() const { return bg_; }
    double amplitude() const { return spec_.amplitude; }
    double decay() const { return decay_; }

    bool in_domain(double y1, double y2) const;
    // full state; throws ErrorKind::domain outside the upstream region
    EulerState operator()(double y1, double y2) const;
    double profile(double y1, double y2) const;
    double bernoulli_at(double y1, double y2) const;

private:
    EulerState bg_;
    PerturbationSpec spec_;
    double decay_ = 1.5;
    double k1_ = 1.0;
    double center_ = 0.0, half_width_ = 0.0;
    GasModel gas_{1.4};
};

class WedgeBoundary {
public:
    WedgeBoundary() = default;
    WedgeBoundary(const WedgeSpec& spec, double eps, double decay);
    double slope(double z1) const;   // b'
    double profile(double z1) const; // b, b(0) = 0
    double amplitude() const { return amp_; }
    double decay() const { return decay_; }

private:
    double amp_ = 0.0;
    double decay_ = 1.5;
};

} // namespace wedge
