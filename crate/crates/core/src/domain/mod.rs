//! Type space, densities, advertiser payments, regions and menus.

mod density;
mod mechanism;
mod payment;
mod region;
mod space;

pub use density::{density_eval, discretize, DensityKind, DensityModel};
pub use mechanism::{
    CanonicalMechanism, Cell, Mechanism, MechanismFamily, MenuItem, MonotonicitySignature, RegionLabel,
};
pub use payment::{AdPaymentSchedule, GeneralPayment, PointFn};
pub use region::{Affine, Axis, Edge, HalfPlane, Region, Sense, Trapezoid};
pub use space::{lerp, DiscreteInstance, Point, TypeSpace, WeightedType};
