//! The unramified ring `Z_q = Z_p[T]/(M(T))`, its fraction field with
//! tracked precision, and the precision schedule.

mod profile;
mod scaled;
mod zq;

pub use profile::{floor_log, ConvergenceSchedule, PrecisionProfile, Preset};
pub use scaled::ZqScaled;
pub use zq::{ZqInt, Zq};
