//! C interface to the tokenscreen engine.
//!
//! Every fallible call returns a [`TsStatus`]; on failure the message is kept
//! per thread and read with [`ts_last_error_message`]. Handles are opaque and
//! released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tokenscreen::cost::{cost, marginal_cost, CostKind};
use tokenscreen::efficient::efficient_allocation;
use tokenscreen::model::ValueScaleType;
use tokenscreen::scenario::{Preset, Scenario};
use tokenscreen::screening::{
    revenue_profit, AllocationMenu, Menu, MenuItem, MenuOptions, PackageMenu, Severity,
};
use tokenscreen::tariffs::{AllocationTariffs, PackageTariffs, TwoPartTariff};
use tokenscreen::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    NoConvergence = 4,
    AssumptionViolated = 5,
    Excluded = 6,
    Unbounded = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsCostKind {
    WithFloor = 0,
    Contractible = 1,
    Package = 2,
}

/// Efficient tokens for a value-scale buyer; `x`, `y` are per task.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsEfficient {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub total_input: f64,
    pub total_output: f64,
    pub surplus: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsCost {
    pub total: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub marginal: f64,
    pub finetuned: bool,
}

/// One menu item. `tasks` is 0 for package items.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsMenuItem {
    pub quality: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub tasks: f64,
    pub transfer: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsRevenue {
    pub revenue: f64,
    pub profit: f64,
    pub revenue_error: f64,
    pub cost_error: f64,
}

/// `offered` is false for excluded types; the other fields are then 0.
/// `task_cap` is 0 when uncapped.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsTariff {
    pub offered: bool,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub p0: f64,
    pub task_cap: f64,
}

pub struct TsScenario {
    inner: Scenario,
}

pub struct TsPackageMenu {
    tariffs: PackageTariffs,
}

pub struct TsAllocationMenu {
    tariffs: AllocationTariffs,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TsStatus {
    match e {
        Error::InvalidParameter { .. }
        | Error::InvalidProfile(_)
        | Error::SegmentMismatch { .. }
        | Error::ZeroDensity(_)
        | Error::NonMonotoneVirtualValue { .. } => TsStatus::InvalidArgument,
        Error::Excluded(_) => TsStatus::Excluded,
        Error::BracketOverflow { .. } | Error::NoConvergence { .. } | Error::Quadrature { .. } => {
            TsStatus::NoConvergence
        }
        Error::AssumptionViolated(_) => TsStatus::AssumptionViolated,
        Error::Unsupported(_) => TsStatus::Unsupported,
        Error::Unbounded(_) => TsStatus::Unbounded,
    }
}

/// Runs `f`, recording errors and panics.
fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> TsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TsStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            TsStatus::Panic
        }
    }
}

fn null(what: &str) -> TsStatus {
    set_error(format!("{what} is null"));
    TsStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Error> {
    CStr::from_ptr(p).to_str().map_err(|e| Error::InvalidParameter {
        name,
        reason: format!("not UTF-8: {e}"),
    })
}

/// Message for the last failed call on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ts_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parse a scenario from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_scenario_from_json(json: *const c_char, out: *mut *mut TsScenario) -> TsStatus {
    if json.is_null() {
        return null("json");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let sc = Scenario::from_json(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(TsScenario { inner: sc }));
        Ok(())
    })
}

/// Built-in scenario: `uniform-example`, or `uniform-symmetric` with `rho` and `c`
/// (ignored for the former).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_scenario_preset(
    name: *const c_char,
    rho: f64,
    c: f64,
    out: *mut *mut TsScenario,
) -> TsStatus {
    if name.is_null() {
        return null("name");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let sc = Preset::parse(str_arg(name, "name")?, Some(rho), Some(c))?.scenario()?;
        *out = Box::into_raw(Box::new(TsScenario { inner: sc }));
        Ok(())
    })
}

/// # Safety
/// `sc` must come from a scenario constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ts_scenario_free(sc: *mut TsScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Hex SHA-256 of the canonical JSON; `buf` needs at least 65 bytes.
///
/// # Safety
/// `sc` must be a live handle and `buf` writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ts_scenario_hash(sc: *const TsScenario, buf: *mut c_char, len: usize) -> TsStatus {
    if sc.is_null() {
        return null("scenario");
    }
    if buf.is_null() {
        return null("buf");
    }
    guard(|| {
        let h = (*sc).inner.hash();
        if len < h.len() + 1 {
            return Err(Error::InvalidParameter {
                name: "len",
                reason: format!("need {} bytes, got {len}", h.len() + 1),
            });
        }
        ptr::copy_nonoverlapping(h.as_ptr() as *const c_char, buf, h.len());
        *buf.add(h.len()) = 0;
        Ok(())
    })
}

/// Efficient allocation for the value-scale buyer `(w, s)`.
///
/// # Safety
/// `sc` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_efficient_value_scale(
    sc: *const TsScenario,
    w: f64,
    s: f64,
    out: *mut TsEfficient,
) -> TsStatus {
    if sc.is_null() {
        return null("scenario");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let sc = &(*sc).inner;
        let prof = ValueScaleType::new(w, s)?.profile();
        let plan = efficient_allocation(&prof, &sc.production, &sc.costs);
        let first = plan.segments.first().copied().unwrap_or(tokenscreen::efficient::SegmentTokens { x: 0.0, y: 0.0 });
        *out = TsEfficient {
            x: first.x,
            y: first.y,
            z: plan.finetune,
            total_input: plan.total_input,
            total_output: plan.total_output,
            surplus: plan.surplus,
        };
        Ok(())
    })
}

/// Minimum cost of quality `q`; `scale` is used by the contractible kind only.
///
/// # Safety
/// `sc` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_cost(
    sc: *const TsScenario,
    kind: TsCostKind,
    scale: f64,
    q: f64,
    out: *mut TsCost,
) -> TsStatus {
    if sc.is_null() {
        return null("scenario");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let sc = &(*sc).inner;
        let kind = match kind {
            TsCostKind::WithFloor => CostKind::WithFloor,
            TsCostKind::Contractible => CostKind::Contractible { scale },
            TsCostKind::Package => CostKind::Package,
        };
        let b = cost(kind, q, &sc.production, &sc.costs)?;
        *out = TsCost {
            total: b.total,
            x: b.x,
            y: b.y,
            z: b.z,
            marginal: marginal_cost(kind, q, &sc.production, &sc.costs)?,
            finetuned: b.finetuned,
        };
        Ok(())
    })
}

fn item_out(it: &MenuItem) -> TsMenuItem {
    TsMenuItem {
        quality: it.quality,
        x: it.x,
        y: it.y,
        z: it.z,
        tasks: it.tasks.unwrap_or(0.0),
        transfer: it.transfer,
    }
}

fn tariff_out(t: Option<TwoPartTariff>) -> TsTariff {
    match t {
        Some(t) => TsTariff {
            offered: true,
            px: t.px,
            py: t.py,
            pz: t.pz,
            p0: t.p0,
            task_cap: t.task_cap.unwrap_or(0.0),
        },
        None => TsTariff::default(),
    }
}

/// Package menu over the scenario's CES-index distribution.
///
/// # Safety
/// `sc` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_package_menu_new(sc: *const TsScenario, out: *mut *mut TsPackageMenu) -> TsStatus {
    if sc.is_null() {
        return null("scenario");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let sc = &(*sc).inner;
        let m = PackageMenu::new(sc.theta_distribution()?, sc.production, sc.costs)?;
        *out = Box::into_raw(Box::new(TsPackageMenu {
            tariffs: PackageTariffs::from_menu(m),
        }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`ts_package_menu_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ts_package_menu_free(m: *mut TsPackageMenu) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Exclusion point and fine-tuning threshold of the CES index.
///
/// # Safety
/// `m` must be a live handle; the output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ts_package_menu_thresholds(
    m: *const TsPackageMenu,
    exclusion: *mut f64,
    finetune_from: *mut f64,
) -> TsStatus {
    if m.is_null() {
        return null("menu");
    }
    if exclusion.is_null() || finetune_from.is_null() {
        return null("output");
    }
    let menu = (*m).tariffs.menu();
    *exclusion = menu.exclusion();
    *finetune_from = menu.finetune_from();
    TsStatus::Ok
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_package_menu_item(m: *const TsPackageMenu, theta: f64, out: *mut TsMenuItem) -> TsStatus {
    if m.is_null() {
        return null("menu");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        *out = item_out(&(*m).tariffs.menu().item_at(theta)?);
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_package_menu_tariff(m: *const TsPackageMenu, theta: f64, out: *mut TsTariff) -> TsStatus {
    if m.is_null() {
        return null("menu");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        *out = tariff_out((*m).tariffs.tariff(theta)?);
        Ok(())
    })
}

/// Expected revenue and profit, integrated to absolute tolerance `tol`.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_package_menu_revenue(m: *const TsPackageMenu, tol: f64, out: *mut TsRevenue) -> TsStatus {
    if m.is_null() {
        return null("menu");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let r = revenue_profit(&Menu::Packages((*m).tariffs.menu().clone()), tol)?;
        *out = TsRevenue {
            revenue: r.revenue,
            profit: r.profit,
            revenue_error: r.revenue_error,
            cost_error: r.cost_error,
        };
        Ok(())
    })
}

/// Allocation menu over the scenario's value and scale distributions. When
/// `strict` is set, failed rent-growth or fee-monotonicity audits are errors.
///
/// # Safety
/// `sc` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_allocation_menu_new(
    sc: *const TsScenario,
    strict: bool,
    out: *mut *mut TsAllocationMenu,
) -> TsStatus {
    if sc.is_null() {
        return null("scenario");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let sc = &(*sc).inner;
        let severity = if strict { Severity::Error } else { Severity::Warn };
        let m = AllocationMenu::new(
            sc.distributions.value.clone(),
            sc.distributions.scale.clone(),
            sc.production,
            sc.costs,
            MenuOptions {
                assumption_severity: severity,
                ..Default::default()
            },
        )?;
        let tariffs = AllocationTariffs::from_menu(m, severity)?;
        *out = Box::into_raw(Box::new(TsAllocationMenu { tariffs }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`ts_allocation_menu_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ts_allocation_menu_free(m: *mut TsAllocationMenu) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_allocation_menu_item(
    m: *const TsAllocationMenu,
    w: f64,
    s: f64,
    out: *mut TsMenuItem,
) -> TsStatus {
    if m.is_null() {
        return null("menu");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        *out = item_out(&(*m).tariffs.menu().item_at(w, s)?);
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_allocation_menu_tariff(
    m: *const TsAllocationMenu,
    w: f64,
    s: f64,
    out: *mut TsTariff,
) -> TsStatus {
    if m.is_null() {
        return null("menu");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        *out = tariff_out((*m).tariffs.tariff(w, s)?);
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_allocation_menu_revenue(
    m: *const TsAllocationMenu,
    tol: f64,
    out: *mut TsRevenue,
) -> TsStatus {
    if m.is_null() {
        return null("menu");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let r = revenue_profit(&Menu::Allocations((*m).tariffs.menu().clone()), tol)?;
        *out = TsRevenue {
            revenue: r.revenue,
            profit: r.profit,
            revenue_error: r.revenue_error,
            cost_error: r.cost_error,
        };
        Ok(())
    })
}
