#include "isobank/physics.hpp"

#include <cmath>

#include <fmt/format.h>

namespace isobank::physics {

double deg_to_rad(double deg) { return deg * M_PI / 180.0; }

double required_force(double mu, double mass_kg, double angle_deg, double g, Direction direction) {
  if (!(mu > 0.0) || !(mass_kg > 0.0) || !(g > 0.0))
    throw DomainError(fmt::format("required_force: mu, mass and g must be positive (mu={}, m={}, g={})", mu,
                                  mass_kg, g));
  const double th = deg_to_rad(angle_deg);
  const double denom = direction == Direction::upward ? std::cos(th) + mu * std::sin(th)
                                                      : std::cos(th) - mu * std::sin(th);
  if (denom <= kDenominatorFloor)
    throw DomainError(fmt::format("required_force: infeasible downward force (cos - mu*sin = {:.3g} at mu={}, "
                                  "angle={} deg)",
                                  denom, mu, angle_deg));
  return mu * mass_kg * g / denom;
}

double solve_unknown(const StructuralParams& p) {
  const double th = deg_to_rad(p.angle_deg);
  const double c = std::cos(th);
  const double s = std::sin(th);
  const bool up = p.direction == Direction::upward;
  double result = 0.0;
  switch (p.unknown) {
  case Unknown::force:
    return required_force(p.mu, p.mass_kg, p.angle_deg, p.g, p.direction);
  case Unknown::mass: {
    const double denom = p.mu * p.g;
    if (denom < kDenominatorFloor)
      throw DomainError("solve_unknown(mass): mu*g too small");
    result = p.force_N * (up ? c + p.mu * s : c - p.mu * s) / denom;
    break;
  }
  case Unknown::mu: {
    const double weight = p.mass_kg * p.g;
    const double denom = up ? weight - p.force_N * s : weight + p.force_N * s;
    if (denom < kDenominatorFloor)
      throw DomainError("solve_unknown(mu): normal force vanishes");
    result = p.force_N * c / denom;
    break;
  }
  }
  if (!std::isfinite(result) || result <= 0.0)
    throw DomainError(fmt::format("solve_unknown({}): non-positive result {}", to_string(p.unknown), result));
  return result;
}

double force_balance_residual(const StructuralParams& p) {
  const double th = deg_to_rad(p.angle_deg);
  const double vertical = p.direction == Direction::upward ? p.mass_kg * p.g - p.force_N * std::sin(th)
                                                           : p.mass_kg * p.g + p.force_N * std::sin(th);
  return std::abs(p.force_N * std::cos(th) - p.mu * vertical);
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

} // namespace isobank::physics
