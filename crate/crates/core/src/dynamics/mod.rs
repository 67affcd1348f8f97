pub mod analysis;
pub mod bounded;
pub mod integrator;
pub mod system;
mod tableau;
pub mod trajectory;

pub use analysis::{action_along, find_period, time_average, AverageReport, Window};
pub use bounded::{classify_boundedness, Boundedness};
pub use integrator::{Dop853, Dopri5, Stepper};
pub use system::{angular_momentum, PhaseState, SystemSpec};
pub use trajectory::{integrate, integrate_with, IntegrationOptions, Trajectory};
