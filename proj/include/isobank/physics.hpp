#pragma once

// Force balance for an object dragged at constant velocity by a single angled force.
//
// Horizontal:  F cos(theta) = mu * N
// Vertical:    N = m g - F sin(theta)   (force tilted upward)
//              N = m g + F sin(theta)   (force tilted downward)

#include "isobank/bank.hpp"

namespace isobank::physics {

inline constexpr double kDenominatorFloor = 1e-9;

double deg_to_rad(double deg);

// Force magnitude that keeps the object at constant velocity.
// Throws DomainError when a downward force cannot balance friction.
double required_force(double mu, double mass_kg, double angle_deg, double g, Direction direction);

// Value of params.unknown given the other quantities. The field named by params.unknown is ignored.
double solve_unknown(const StructuralParams& params);

// |F cos(theta) - mu (m g -/+ F sin(theta))| for the quantities as given.
double force_balance_residual(const StructuralParams& params);

// Rounds half away from zero at `decimals` places.
double round_to(double value, int decimals);

} // namespace isobank::physics
