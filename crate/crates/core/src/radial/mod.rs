//! Turning points, periods, actions and orbit averages of bound central
//! motion, computed by quadrature instead of time integration.

mod action;
mod orbit;
mod turning;

pub use action::{effective_minimum, energy_at_action, energy_at_action_with, ActionConvention};
pub use orbit::{orbit_geometry, radial_average, OrbitGeometry, RadialAverage, RadialOrbit, RadialPoint};
pub use turning::turning_points;
