use serde::{Deserialize, Serialize};

use super::region::{Axis, HalfPlane, Region};
use super::space::TypeSpace;
use crate::error::{Error, Result};

/// Allocation `(q1, q2)` of good and bad, sold at `price`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MenuItem {
    pub q1: f64,
    pub q2: f64,
    pub price: f64,
}

impl MenuItem {
    pub const DEFAULT: MenuItem = MenuItem { q1: 0.0, q2: 0.0, price: 0.0 };

    pub fn new(q1: f64, q2: f64, price: f64) -> Result<Self> {
        for (name, q) in [("q1", q1), ("q2", q2)] {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::domain(format!("{name} = {q} outside [0, 1]")));
            }
        }
        if !price.is_finite() {
            return Err(Error::domain("menu price must be finite"));
        }
        Ok(MenuItem { q1, q2, price })
    }

    pub fn good(price: f64) -> Self {
        MenuItem { q1: 1.0, q2: 0.0, price }
    }

    pub fn bundle(price: f64) -> Self {
        MenuItem { q1: 1.0, q2: 1.0, price }
    }

    pub fn is_default(&self) -> bool {
        *self == MenuItem::DEFAULT
    }

    pub fn utility(&self, x: [f64; 2]) -> f64 {
        x[0] * self.q1 + x[1] * self.q2 - self.price
    }
}

/// A finite menu that always offers the outside option.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mechanism {
    items: Vec<MenuItem>,
}

impl Mechanism {
    /// Builds a menu, appending the outside option last when absent so that
    /// indifferent buyers take a purchase.
    pub fn new(items: Vec<MenuItem>) -> Result<Self> {
        let mut checked = Vec::with_capacity(items.len() + 1);
        for it in items {
            checked.push(MenuItem::new(it.q1, it.q2, it.price)?);
        }
        if !checked.iter().any(MenuItem::is_default) {
            checked.push(MenuItem::DEFAULT);
        }
        Ok(Mechanism { items: checked })
    }

    /// Outside option only.
    pub fn trivial() -> Self {
        Mechanism { items: vec![MenuItem::DEFAULT] }
    }

    pub fn items(&self) -> &[MenuItem] {
        &self.items
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RegionLabel {
    Z,
    W,
    Y,
}

impl RegionLabel {
    pub fn name(self) -> &'static str {
        match self {
            RegionLabel::Z => "Z",
            RegionLabel::W => "W",
            RegionLabel::Y => "Y",
        }
    }
}

/// One cell of a canonical partition together with the item it buys.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub label: RegionLabel,
    pub region: Region,
    pub item: MenuItem,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CanonicalMechanism {
    GoodOnly { p_g: f64 },
    SingleBundle { p_sb: f64 },
    AdTiered { p_g: f64, p_sb: f64 },
}

impl CanonicalMechanism {
    pub fn family(&self) -> MechanismFamily {
        match self {
            CanonicalMechanism::GoodOnly { .. } => MechanismFamily::GoodOnly,
            CanonicalMechanism::SingleBundle { .. } => MechanismFamily::SingleBundle,
            CanonicalMechanism::AdTiered { .. } => MechanismFamily::AdTiered,
        }
    }

    pub fn validate(&self, s: &TypeSpace) -> Result<()> {
        let finite = match *self {
            CanonicalMechanism::GoodOnly { p_g } => p_g.is_finite(),
            CanonicalMechanism::SingleBundle { p_sb } => p_sb.is_finite(),
            CanonicalMechanism::AdTiered { p_g, p_sb } => p_g.is_finite() && p_sb.is_finite(),
        };
        if !finite {
            return Err(Error::domain("prices must be finite"));
        }
        match *self {
            CanonicalMechanism::GoodOnly { p_g } => {
                if p_g < s.x1_lo || p_g > s.x1_hi {
                    return Err(Error::domain(format!(
                        "good-only price {p_g} outside [{}, {}]",
                        s.x1_lo, s.x1_hi
                    )));
                }
            }
            CanonicalMechanism::SingleBundle { .. } => {}
            CanonicalMechanism::AdTiered { p_g, p_sb } => {
                let cap = p_g.min(s.x1_lo + s.x2_hi);
                if p_sb > cap {
                    return Err(Error::domain(format!(
                        "ad-tiered prices need p_sb <= min(p_g, x1_lo + x2_hi) = {cap}, got p_sb = {p_sb}; \
                         above this cap the ad-free tier is never chosen at the lowest types"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Menu in the order (outside option, good, bundle); lowest-index tie
    /// breaking then reproduces the partition returned by [`Self::regions`].
    pub fn menu(&self) -> Mechanism {
        let items = match *self {
            CanonicalMechanism::GoodOnly { p_g } => vec![MenuItem::DEFAULT, MenuItem::good(p_g)],
            CanonicalMechanism::SingleBundle { p_sb } => {
                vec![MenuItem::DEFAULT, MenuItem::bundle(p_sb)]
            }
            CanonicalMechanism::AdTiered { p_g, p_sb } => vec![
                MenuItem::DEFAULT,
                MenuItem::good(p_g),
                MenuItem::bundle(p_sb),
            ],
        };
        Mechanism { items }
    }

    /// The no-purchase, good and bundle regions.
    pub fn regions(&self, s: &TypeSpace) -> Vec<Cell> {
        let full = Region::full(*s);
        match *self {
            CanonicalMechanism::GoodOnly { p_g } => vec![
                Cell {
                    label: RegionLabel::Z,
                    region: full.clone().with(HalfPlane::le(Axis::X1, p_g)),
                    item: MenuItem::DEFAULT,
                },
                Cell {
                    label: RegionLabel::W,
                    region: full.with(HalfPlane::gt(Axis::X1, p_g)),
                    item: MenuItem::good(p_g),
                },
            ],
            CanonicalMechanism::SingleBundle { p_sb } => vec![
                Cell {
                    label: RegionLabel::Z,
                    region: full.clone().with(HalfPlane::le(Axis::Sum, p_sb)),
                    item: MenuItem::DEFAULT,
                },
                Cell {
                    label: RegionLabel::Y,
                    region: full.with(HalfPlane::gt(Axis::Sum, p_sb)),
                    item: MenuItem::bundle(p_sb),
                },
            ],
            CanonicalMechanism::AdTiered { p_g, p_sb } => vec![
                Cell {
                    label: RegionLabel::Z,
                    region: full
                        .clone()
                        .with(HalfPlane::le(Axis::X1, p_g))
                        .with(HalfPlane::le(Axis::Sum, p_sb)),
                    item: MenuItem::DEFAULT,
                },
                Cell {
                    label: RegionLabel::W,
                    region: full
                        .clone()
                        .with(HalfPlane::gt(Axis::X1, p_g))
                        .with(HalfPlane::le(Axis::X2, p_sb - p_g)),
                    item: MenuItem::good(p_g),
                },
                Cell {
                    label: RegionLabel::Y,
                    region: full
                        .with(HalfPlane::gt(Axis::Sum, p_sb))
                        .with(HalfPlane::gt(Axis::X2, p_sb - p_g)),
                    item: MenuItem::bundle(p_sb),
                },
            ],
        }
    }

    pub fn region(&self, s: &TypeSpace, label: RegionLabel) -> Option<Region> {
        self.regions(s)
            .into_iter()
            .find(|c| c.label == label)
            .map(|c| c.region)
    }

    pub fn p_g(&self) -> Option<f64> {
        match *self {
            CanonicalMechanism::GoodOnly { p_g } | CanonicalMechanism::AdTiered { p_g, .. } => Some(p_g),
            CanonicalMechanism::SingleBundle { .. } => None,
        }
    }

    pub fn p_sb(&self) -> Option<f64> {
        match *self {
            CanonicalMechanism::SingleBundle { p_sb } | CanonicalMechanism::AdTiered { p_sb, .. } => {
                Some(p_sb)
            }
            CanonicalMechanism::GoodOnly { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismFamily {
    GoodOnly,
    SingleBundle,
    AdTiered,
}

impl MechanismFamily {
    pub fn name(self) -> &'static str {
        match self {
            MechanismFamily::GoodOnly => "good_only",
            MechanismFamily::SingleBundle => "single_bundle",
            MechanismFamily::AdTiered => "ad_tiered",
        }
    }
}

/// Coordinatewise monotonicity `(v1, v2)` admissible for test functions on
/// the region where allocation `a` is chosen: `+1` where `a_i = 0`, `-1`
/// where `a_i = 1`, `0` for interior allocations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonotonicitySignature(pub i8, pub i8);

impl MonotonicitySignature {
    pub fn of(q1: f64, q2: f64) -> Self {
        let v = |q: f64| {
            if q == 0.0 {
                1
            } else if q == 1.0 {
                -1
            } else {
                0
            }
        };
        MonotonicitySignature(v(q1), v(q2))
    }
}
