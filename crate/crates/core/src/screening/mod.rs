//! Revenue-maximising direct menus.

pub mod allocation;
pub mod assumptions;
pub mod binary;
pub mod dist;
pub mod package;
mod revenue;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use allocation::{allocation_menu, AllocationMenu, MenuOptions, Severity};
pub use assumptions::{assumption1_audit, assumption1_check, QualitySchedule};
pub use binary::{binary_menu, full_surplus_test, BinaryCase, BinaryItem, BinaryMenu, FullSurplusTest};
pub use dist::{theta_distribution, ScalarDistribution, Tabulated};
pub use package::{package_menu, PackageMenu};
pub use revenue::{revenue_profit, RevenueProfit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    Theta,
    ValueScale,
    BinaryLabel,
}

/// Where a menu item sits in the type space, or which type a buyer is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TypeIndex {
    ValueScale { w: f64, s: f64 },
    Theta { theta: f64 },
    Label { label: u8 },
}

impl TypeIndex {
    pub fn kind(&self) -> IndexKind {
        match self {
            TypeIndex::Theta { .. } => IndexKind::Theta,
            TypeIndex::ValueScale { .. } => IndexKind::ValueScale,
            TypeIndex::Label { .. } => IndexKind::BinaryLabel,
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        match *self {
            TypeIndex::Theta { theta } => vec![theta],
            TypeIndex::ValueScale { w, s } => vec![w, s],
            TypeIndex::Label { label } => vec![label as f64],
        }
    }
}

/// One contract. Package items carry totals and no task count; allocation
/// items carry per-task `x`, `y` and the number of tasks covered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MenuItem {
    #[serde(flatten)]
    pub index: TypeIndex,
    pub quality: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub tasks: Option<f64>,
    pub transfer: f64,
}

impl MenuItem {
    pub fn zero(index: TypeIndex, tasks: Option<f64>) -> Self {
        MenuItem {
            index,
            quality: 0.0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
            tasks,
            transfer: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.quality == 0.0 && self.transfer == 0.0
    }

    /// Gross value of this item to `buyer`.
    ///
    /// A value-scale buyer with `s` tasks taking an item built for `tasks`
    /// tasks uses the per-task tokens on `min(s, tasks)` of them.
    pub fn gross_value(&self, buyer: TypeIndex, kappa: f64) -> f64 {
        match (buyer, self.tasks) {
            (TypeIndex::ValueScale { w, s }, Some(t)) => w * self.quality * s.min(t) / t,
            (TypeIndex::ValueScale { w, s }, None) => w * s.powf(kappa) * self.quality,
            (TypeIndex::Theta { theta }, _) => theta * self.quality,
            (TypeIndex::Label { .. }, _) => f64::NAN,
        }
    }

    pub fn net_utility(&self, buyer: TypeIndex, kappa: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.gross_value(buyer, kappa) - self.transfer
    }
}

/// A menu that can be evaluated at any index of its kind.
pub trait MenuFamily: Sync {
    fn index_kind(&self) -> IndexKind;
    fn item(&self, at: TypeIndex) -> Result<MenuItem>;
    /// `1 - alpha - beta`, for gross values across index kinds.
    fn kappa(&self) -> f64;
    /// False for menus known only at finitely many points.
    fn continuous(&self) -> bool {
        true
    }
}

/// A direct menu of any of the three kinds.
#[derive(Debug, Clone)]
pub enum Menu {
    Packages(PackageMenu),
    Allocations(AllocationMenu),
    Binary(BinaryMenu),
}

impl Menu {
    pub fn index_kind(&self) -> IndexKind {
        match self {
            Menu::Packages(_) => IndexKind::Theta,
            Menu::Allocations(_) => IndexKind::ValueScale,
            Menu::Binary(_) => IndexKind::BinaryLabel,
        }
    }
}

/// A menu whose transfers are multiplied by a constant; used for fault injection.
pub struct ScaledTransfers<'a, M: MenuFamily + ?Sized> {
    pub inner: &'a M,
    pub factor: f64,
}

impl<M: MenuFamily + ?Sized> MenuFamily for ScaledTransfers<'_, M> {
    fn index_kind(&self) -> IndexKind {
        self.inner.index_kind()
    }
    fn item(&self, at: TypeIndex) -> Result<MenuItem> {
        let mut it = self.inner.item(at)?;
        it.transfer *= self.factor;
        Ok(it)
    }
    fn kappa(&self) -> f64 {
        self.inner.kappa()
    }
    fn continuous(&self) -> bool {
        self.inner.continuous()
    }
}

/// A menu known only on a finite set of indices, e.g. read back from an export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabulatedMenu {
    pub index_kind: IndexKind,
    pub kappa: f64,
    pub items: Vec<MenuItem>,
}

impl TabulatedMenu {
    pub fn indices(&self) -> Vec<TypeIndex> {
        self.items.iter().map(|i| i.index).collect()
    }
}

impl MenuFamily for TabulatedMenu {
    fn index_kind(&self) -> IndexKind {
        self.index_kind
    }
    fn item(&self, at: TypeIndex) -> Result<MenuItem> {
        let c = at.coords();
        self.items
            .iter()
            .find(|it| {
                let d = it.index.coords();
                d.len() == c.len() && d.iter().zip(&c).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs()))
            })
            .copied()
            .ok_or_else(|| crate::Error::InvalidParameter {
                name: "index",
                reason: format!("{c:?} is not on the tabulated menu"),
            })
    }
    fn kappa(&self) -> f64 {
        self.kappa
    }
    fn continuous(&self) -> bool {
        false
    }
}
