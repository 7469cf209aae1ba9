use std::path::Path;

use serde_json::{json, Value};

use super::output::{json, num, rational, Cell, Table};
use super::{load, Command, Common, Format, KindArg, Loaded, Outcome, SettingArg};
use crate::cost::{cost, cost_threshold, marginal_cost, CostKind};
use crate::efficient::efficient_allocation;
use crate::error::{invalid, Result};
use crate::model::TaskProfile;
use crate::scenario::{Preset, Scenario, Setting};
use crate::screening::{
    binary_menu, full_surplus_test, revenue_profit, AllocationMenu, BinaryMenu, IndexKind, Menu, MenuFamily,
    MenuItem, MenuOptions, PackageMenu, ScalarDistribution, ScaledTransfers, Severity, TabulatedMenu, TypeIndex,
};
use crate::tariffs::{buyer_best_response, AllocationTariffs, Buyer, PackageTariffs, TwoPartTariff};
use crate::model::{RepresentativeType, ValueScaleType};
use crate::verify::audit::{ic_audit, ic_audit_points, ir_audit, ir_audit_points, AuditReport, GridDim, GridSpec};
use crate::verify::search::bisect;

pub(super) fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Efficient { common, profile, w, s } => efficient(common, profile.as_deref(), *w, *s),
        Command::Cost {
            common,
            kind,
            scale,
            q,
            q_max,
        } => cost_table(common, *kind, *scale, q, *q_max),
        Command::MenuPackages { common } => menu_packages(common),
        Command::MenuAllocations { common, assumption } => menu_allocations(common, (*assumption).into()),
        Command::MenuBinary { common } => menu_binary(common),
        Command::Tariffs { common, setting } => tariffs(common, *setting),
        Command::VerifyIc {
            common,
            menu,
            scale_transfers,
        } => verify_ic(common, menu.as_deref(), *scale_transfers),
        Command::Reproduce { common } => reproduce(common),
        Command::Regions { common } => regions(common),
    }
}

fn audit_line(r: &AuditReport) -> String {
    format!(
        "{}: {} max violation {} at {:?} over {} samples (tolerance {})",
        r.name,
        if r.passed { "PASS" } else { "FAIL" },
        num(r.max_violation),
        r.location,
        r.samples,
        r.tolerance
    )
}

fn record_audits(out: &mut Outcome, audits: &[AuditReport]) {
    for a in audits {
        out.summary.push(audit_line(a));
        out.audit_failed |= !a.passed;
    }
}

fn parse_profile(text: &str) -> Result<TaskProfile> {
    let mut pairs = Vec::new();
    for part in text.split(',') {
        let (l, v) = part
            .split_once(':')
            .ok_or_else(|| invalid("profile", format!("expected length:value, got {part:?}")))?;
        let p = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| invalid("profile", format!("{t:?}: {e}")))
        };
        pairs.push((p(l)?, p(v)?));
    }
    TaskProfile::from_pairs(&pairs)
}

fn efficient(common: &Common, profile: Option<&str>, w: f64, s: f64) -> Result<Outcome> {
    let l = load(common)?;
    let sc = &l.scenario;
    let prof = match (profile, &sc.profile) {
        (Some(t), _) => parse_profile(t)?,
        (None, Some(p)) => p.clone(),
        (None, None) => ValueScaleType::new(w, s)?.profile(),
    };
    let plan = efficient_allocation(&prof, &sc.production, &sc.costs);
    let mut out = Outcome::new(Some(&l));
    match common.format() {
        Format::Json => {
            let segs: Vec<Value> = prof
                .segments()
                .iter()
                .zip(&plan.segments)
                .map(|(g, t)| json!({"length": g.length, "value": g.value, "x": t.x, "y": t.y}))
                .collect();
            let v = json!({
                "z": plan.finetune,
                "X": plan.total_input,
                "Y": plan.total_output,
                "surplus": plan.surplus,
                "theta": plan.theta,
                "finetuned": plan.is_finetuned(),
                "segments": segs,
            });
            out.artifacts.add("efficient.json", json(&v)?);
        }
        Format::Csv => {
            let mut t = Table::new(&["length", "value", "x", "y"]);
            for (g, tk) in prof.segments().iter().zip(&plan.segments) {
                t.push(vec![g.length.into(), g.value.into(), tk.x.into(), tk.y.into()]);
            }
            out.artifacts.add("efficient.csv", t.to_csv()?);
        }
    }
    out.summary.push(format!(
        "X = {}, Y = {}, z = {}, surplus = {}",
        num(plan.total_input),
        num(plan.total_output),
        num(plan.finetune),
        num(plan.surplus)
    ));
    Ok(out)
}

fn cost_table(common: &Common, kind: KindArg, scale: f64, qs: &[f64], q_max: f64) -> Result<Outcome> {
    let l = load(common)?;
    let (p, c) = (&l.scenario.production, &l.scenario.costs);
    let kind = match kind {
        KindArg::WithFloor => CostKind::WithFloor,
        KindArg::Contractible => CostKind::Contractible { scale },
        KindArg::Package => CostKind::Package,
    };
    let levels: Vec<f64> = if qs.is_empty() {
        if !(q_max.is_finite() && q_max > 0.0) {
            return Err(invalid("q-max", format!("must be positive, got {q_max}")));
        }
        let n = common.grid.unwrap_or(50);
        (1..=n).map(|i| q_max * i as f64 / n as f64).collect()
    } else {
        qs.to_vec()
    };
    let scale_cell = match kind {
        CostKind::Contractible { scale } => Some(scale),
        _ => None,
    };
    let mut records = Vec::new();
    let mut t = Table::new(&["kind", "scale", "quality", "total", "x", "y", "z", "finetuned", "marginal"]);
    for &q in &levels {
        let b = cost(kind, q, p, c)?;
        let m = marginal_cost(kind, q, p, c)?;
        records.push(json!({
            "kind": kind.label(),
            "scale": scale_cell,
            "quality": q,
            "total": b.total,
            "x": b.x,
            "y": b.y,
            "z": b.z,
            "finetuned": b.finetuned,
            "marginal": m,
        }));
        t.push(vec![
            kind.label().into(),
            scale_cell.into(),
            q.into(),
            b.total.into(),
            b.x.into(),
            b.y.into(),
            b.z.into(),
            if b.finetuned { "true" } else { "false" }.into(),
            m.into(),
        ]);
    }
    let mut out = Outcome::new(Some(&l));
    match common.format() {
        Format::Json => out.artifacts.add("cost.json", json(&records)?),
        Format::Csv => out.artifacts.add("cost.csv", t.to_csv()?),
    }
    out.summary.push(format!(
        "{} cost at {} levels; fine-tuning above q = {}",
        kind.label(),
        levels.len(),
        num(cost_threshold(kind, p, c)?)
    ));
    Ok(out)
}

pub(crate) fn build_packages(sc: &Scenario) -> Result<PackageMenu> {
    PackageMenu::new(sc.theta_distribution()?, sc.production, sc.costs)
}

pub(crate) fn build_allocations(sc: &Scenario, severity: Severity) -> Result<AllocationMenu> {
    AllocationMenu::new(
        sc.distributions.value.clone(),
        sc.distributions.scale.clone(),
        sc.production,
        sc.costs,
        MenuOptions {
            assumption_severity: severity,
            ..Default::default()
        },
    )
}

pub(crate) fn package_grid(m: &PackageMenu, n: usize) -> GridSpec {
    let (lo, hi) = m.distribution().support();
    let bp = [m.exclusion(), m.finetune_from()]
        .into_iter()
        .filter(|&b| b > lo && b < hi)
        .collect();
    GridSpec {
        dims: vec![GridDim::new(lo, hi, n).with_breakpoints(bp)],
    }
}

fn tabulate(menu: &dyn MenuFamily, grid: &GridSpec) -> Result<TabulatedMenu> {
    let kind = menu.index_kind();
    let items: Result<Vec<MenuItem>> = grid.indices(kind)?.into_iter().map(|t| menu.item(t)).collect();
    Ok(TabulatedMenu {
        index_kind: kind,
        kappa: menu.kappa(),
        items: items?,
    })
}

fn menu_csv(menu: &TabulatedMenu) -> Result<String> {
    let mut t = match menu.index_kind {
        IndexKind::Theta => Table::new(&["theta", "quality", "X", "Y", "Z", "transfer"]),
        _ => Table::new(&["w", "s", "quality", "X", "Y", "Z", "transfer"]),
    };
    for it in &menu.items {
        let tasks = it.tasks.unwrap_or(1.0);
        let mut row: Vec<Cell> = it.index.coords().into_iter().map(Cell::from).collect();
        row.extend([
            it.quality.into(),
            (it.x * tasks).into(),
            (it.y * tasks).into(),
            it.z.into(),
            it.transfer.into(),
        ]);
        t.push(row);
    }
    t.to_csv()
}

fn write_menu(out: &mut Outcome, common: &Common, name: &str, menu: &TabulatedMenu, extra: Value, audits: &[AuditReport]) -> Result<()> {
    match common.format() {
        Format::Json => {
            let mut v = extra;
            v["menu"] = serde_json::to_value(menu).map_err(|e| invalid("menu", e.to_string()))?;
            v["audits"] = serde_json::to_value(audits).map_err(|e| invalid("audits", e.to_string()))?;
            out.artifacts.add(format!("{name}.json"), json(&v)?);
        }
        Format::Csv => {
            out.artifacts.add(format!("{name}.csv"), menu_csv(menu)?);
            out.artifacts.add(format!("{name}-audits.json"), json(audits)?);
        }
    }
    record_audits(out, audits);
    Ok(())
}

fn menu_packages(common: &Common) -> Result<Outcome> {
    let l = load(common)?;
    let m = build_packages(&l.scenario)?;
    let grid = package_grid(&m, common.grid.unwrap_or(200));
    let audits = vec![ic_audit(&m, &grid, common.tol)?, ir_audit(&m, &grid, common.tol)?];
    let tab = tabulate(&m, &grid)?;
    let mut out = Outcome::new(Some(&l));
    let extra = json!({
        "setting": "packages",
        "exclusion": m.exclusion(),
        "finetune_from": m.finetune_from(),
    });
    write_menu(&mut out, common, "menu-packages", &tab, extra, &audits)?;
    out.summary.insert(
        0,
        format!(
            "packages: excluded up to theta = {}, fine-tuned above theta = {}",
            num(m.exclusion()),
            num(m.finetune_from())
        ),
    );
    Ok(out)
}

fn menu_allocations(common: &Common, severity: Severity) -> Result<Outcome> {
    let l = load(common)?;
    let m = build_allocations(&l.scenario, severity)?;
    let grid = m.default_grid(common.grid.unwrap_or(40));
    let audits = vec![ic_audit(&m, &grid, common.tol)?, ir_audit(&m, &grid, common.tol)?];
    let warn_only = m.assumption_audit().cloned();
    let tab = tabulate(&m, &grid)?;
    let mut out = Outcome::new(Some(&l));
    let extra = json!({
        "setting": "allocations",
        "exclusion": m.exclusion(),
        "assumption_audit": warn_only,
    });
    // a failed rent-growth audit is a warning unless the severity says otherwise
    if let Some(a) = &warn_only {
        out.summary.push(format!("advisory {}", audit_line(a)));
    }
    write_menu(&mut out, common, "menu-allocations", &tab, extra, &audits)?;
    out.summary.insert(0, format!("allocations: excluded up to w = {}", num(m.exclusion())));
    Ok(out)
}

fn scenario_binary(sc: &Scenario) -> Result<BinaryMenu> {
    let b = sc
        .binary
        .as_ref()
        .ok_or_else(|| invalid("binary", "scenario has no binary payload"))?;
    binary_menu(&b.profile_1, &b.profile_2, b.f1, &sc.production, &sc.costs)
}

fn binary_audit(m: &BinaryMenu, tol: f64) -> AuditReport {
    let k = m.constraints();
    let named = [
        (k.ir_high, m.high.label, 0.0),
        (k.ir_low, m.low.label, 0.0),
        (k.ic_high, m.high.label, m.low.label as f64),
        (k.ic_low, m.low.label, m.high.label as f64),
    ];
    let worst = named
        .iter()
        .map(|&(slack, t, r)| (-slack, vec![t as f64, r]))
        .fold(None::<(f64, Vec<f64>)>, |acc, c| match acc {
            Some(a) if a.0 >= c.0 => Some(a),
            _ => Some(c),
        });
    AuditReport::from_worst("binary_constraints", worst, 4, tol)
}

fn menu_binary(common: &Common) -> Result<Outcome> {
    let l = load(common)?;
    let sc = &l.scenario;
    let m = scenario_binary(sc)?;
    let b = sc.binary.as_ref().expect("checked above");
    let fs = full_surplus_test(&b.profile_1, &b.profile_2, &sc.production);
    let audit = binary_audit(&m, common.tol);
    let mut out = Outcome::new(Some(&l));
    match common.format() {
        Format::Json => {
            let v = json!({
                "setting": "binary",
                "menu": m,
                "full_surplus_test_1_over_2": fs,
                "constraints": m.constraints(),
                "revenue": m.revenue(),
                "profit": m.profit(),
                "audits": [audit],
            });
            out.artifacts.add("menu-binary.json", json(&v)?);
        }
        Format::Csv => {
            let mut t = Table::new(&["label", "probability", "quality", "X", "Y", "Z", "transfer"]);
            for it in [&m.high, &m.low] {
                let q = crate::screening::binary::plan_value(&it.plan, &it.profile, m.params());
                t.push(vec![
                    (it.label as f64).into(),
                    it.probability.into(),
                    q.into(),
                    it.plan.total_input.into(),
                    it.plan.total_output.into(),
                    it.plan.finetune.into(),
                    it.transfer.into(),
                ]);
            }
            out.artifacts.add("menu-binary.csv", t.to_csv()?);
            out.artifacts.add("menu-binary-audits.json", json(&[&audit])?);
        }
    }
    out.summary.push(format!(
        "binary: case {:?}, revenue {}, profit {}",
        m.case,
        num(m.revenue()),
        num(m.profit())
    ));
    record_audits(&mut out, &[audit]);
    Ok(out)
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn tariffs(common: &Common, setting: Option<SettingArg>) -> Result<Outcome> {
    let l = load(common)?;
    let sc = &l.scenario;
    let setting = match (setting, sc.setting) {
        (Some(s), _) => s,
        (None, Setting::Packages) => SettingArg::Packages,
        (None, Setting::Allocations) => SettingArg::Allocations,
        (None, Setting::Binary) => return Err(invalid("setting", "binary menus have no tariff form here")),
    };
    let p = sc.production;
    let mut out = Outcome::new(Some(&l));
    let mut rows: Vec<(TypeIndex, Option<TwoPartTariff>)> = Vec::new();
    let mut worst: Option<(f64, Vec<f64>)> = None;
    let mut audits = Vec::new();
    let mut consider = |gap: f64, at: Vec<f64>| {
        if worst.as_ref().map_or(true, |w| gap > w.0) {
            worst = Some((gap, at));
        }
    };
    let samples;
    match setting {
        SettingArg::Packages => {
            let t = PackageTariffs::from_menu(build_packages(sc)?);
            let types = package_grid(t.menu(), common.grid.unwrap_or(200)).indices(IndexKind::Theta)?;
            samples = types.len();
            for idx in types {
                let TypeIndex::Theta { theta } = idx else { unreachable!() };
                let tar = t.tariff(theta)?;
                if let Some(tt) = &tar {
                    let item = t.menu().item_at(theta)?;
                    let r = buyer_best_response(tt, Buyer::Representative(RepresentativeType::new(theta)?), &p)?;
                    consider(
                        rel_gap(r.quality, item.quality).max(rel_gap(r.total_payment, item.transfer)),
                        vec![theta],
                    );
                }
                rows.push((idx, tar));
            }
        }
        SettingArg::Allocations => {
            let t = AllocationTariffs::from_menu(build_allocations(sc, Severity::Ignore)?, Severity::Warn)?;
            let grid = t.menu().default_grid(common.grid.unwrap_or(15));
            let types = grid.indices(IndexKind::ValueScale)?;
            samples = types.len();
            for idx in types {
                let TypeIndex::ValueScale { w, s } = idx else { unreachable!() };
                let tar = t.tariff(w, s)?;
                if let Some(tt) = &tar {
                    let item = t.menu().item_at(w, s)?;
                    let r = buyer_best_response(tt, Buyer::ValueScale(ValueScaleType::new(w, s)?), &p)?;
                    consider(
                        rel_gap(r.quality, item.quality).max(rel_gap(r.total_payment, item.transfer)),
                        vec![w, s],
                    );
                }
                rows.push((idx, tar));
            }
            if let Some(a) = t.assumption_audit() {
                audits.push(a.clone());
            }
        }
    }
    audits.insert(0, AuditReport::from_worst("tariff_equivalence", worst, samples, common.tol));
    let index_cols: &[&str] = match setting {
        SettingArg::Packages => &["theta"],
        SettingArg::Allocations => &["w", "s"],
    };
    match common.format() {
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|(i, t)| {
                    let mut v = serde_json::to_value(i).expect("index serializes");
                    v["tariff"] = serde_json::to_value(t).expect("tariff serializes");
                    v
                })
                .collect();
            out.artifacts.add("tariffs.json", json(&json!({"items": items, "audits": audits}))?);
        }
        Format::Csv => {
            let mut head = index_cols.to_vec();
            head.extend(["px", "py", "pz", "p0", "task_cap"]);
            let mut table = Table::new(&head);
            for (i, t) in &rows {
                let mut row: Vec<Cell> = i.coords().into_iter().map(Cell::from).collect();
                match t {
                    Some(t) => row.extend([t.px.into(), t.py.into(), t.pz.into(), t.p0.into(), t.task_cap.into()]),
                    None => row.extend((0..5).map(|_| Cell::Empty)),
                }
                table.push(row);
            }
            out.artifacts.add("tariffs.csv", table.to_csv()?);
            out.artifacts.add("tariffs-audits.json", json(&audits)?);
        }
    }
    record_audits(&mut out, &audits);
    Ok(out)
}

fn read_menu(path: &Path) -> Result<TabulatedMenu> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid("menu", format!("{}: {e}", path.display())))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| invalid("menu", e.to_string()))?;
    if let Some(inner) = v.get_mut("menu") {
        v = inner.take();
    }
    serde_json::from_value(v).map_err(|e| invalid("menu", format!("not a tabulated menu: {e}")))
}

fn verify_ic(common: &Common, menu: Option<&Path>, factor: f64) -> Result<Outcome> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(invalid("scale-transfers", format!("must be positive, got {factor}")));
    }
    let tol = common.tol;
    let (audits, loaded) = match menu {
        Some(path) => {
            let tab = read_menu(path)?;
            let m = ScaledTransfers {
                inner: &tab,
                factor,
            };
            let types = tab.indices();
            (
                vec![ic_audit_points(&m, &types, &types, tol)?, ir_audit_points(&m, &types, tol)?],
                None,
            )
        }
        None => {
            let l = load(common)?;
            let sc = &l.scenario;
            let audits = match sc.setting {
                Setting::Packages => {
                    let m = build_packages(sc)?;
                    let grid = package_grid(&m, common.grid.unwrap_or(200));
                    let s = ScaledTransfers { inner: &m, factor };
                    vec![ic_audit(&s, &grid, tol)?, ir_audit(&s, &grid, tol)?]
                }
                Setting::Allocations => {
                    let m = build_allocations(sc, Severity::Ignore)?;
                    let grid = m.default_grid(common.grid.unwrap_or(40));
                    let s = ScaledTransfers { inner: &m, factor };
                    vec![ic_audit(&s, &grid, tol)?, ir_audit(&s, &grid, tol)?]
                }
                Setting::Binary => {
                    let mut m = scenario_binary(sc)?;
                    m.high.transfer *= factor;
                    m.low.transfer *= factor;
                    vec![binary_audit(&m, tol)]
                }
            };
            (audits, Some(l))
        }
    };
    let mut out = Outcome::new(loaded.as_ref());
    if let Some(p) = menu {
        out.scenario_source = Some(p.display().to_string());
    }
    out.artifacts.add("verify-ic.json", json(&json!({ "audits": audits }))?);
    record_audits(&mut out, &audits);
    Ok(out)
}

fn known_targets(l: &Loaded) -> Option<[(f64, &'static str); 4]> {
    let example = Preset::UniformExample.scenario().ok()?;
    if l.scenario == example {
        Some([
            (139.0 / 480.0, "139/480"),
            (97.0 / 960.0, "97/960"),
            (139.0 / 540.0, "139/540"),
            (97.0 / 1080.0, "97/1080"),
        ])
    } else {
        None
    }
}

fn fraction_note(v: f64, err: f64) -> String {
    match rational(v, 100_000, (10.0 * err).max(1e-12)) {
        Some((p, q)) => format!(" ~ {p}/{q}"),
        None => String::new(),
    }
}

fn reproduce(common: &Common) -> Result<Outcome> {
    let l = load(common)?;
    let sc = &l.scenario;
    let qtol = common.tol * 1e-2;
    let alloc = revenue_profit(&Menu::Allocations(build_allocations(sc, Severity::Warn)?), qtol)?;
    let pack = revenue_profit(&Menu::Packages(build_packages(sc)?), qtol)?;
    let mut out = Outcome::new(Some(&l));
    let values = [
        ("allocations", "R", alloc.revenue, alloc.revenue_error),
        ("allocations", "profit", alloc.profit, alloc.revenue_error + alloc.cost_error),
        ("packages", "R", pack.revenue, pack.revenue_error),
        ("packages", "profit", pack.profit, pack.revenue_error + pack.cost_error),
    ];
    let targets = known_targets(&l);
    let mut checks = Vec::new();
    for (k, (setting, what, v, err)) in values.iter().enumerate() {
        let mut line = format!(
            "{setting:<12} {what:<6} = {}{}  (quadrature error {:.1e})",
            num(*v),
            fraction_note(*v, *err),
            err
        );
        if let Some(t) = &targets {
            let (target, frac) = t[k];
            let ok = (v - target).abs() <= 1e-5;
            out.audit_failed |= !ok;
            line.push_str(&format!("  target {frac} {}", if ok { "PASS" } else { "FAIL" }));
            checks.push(json!({"setting": setting, "quantity": what, "target": frac, "value": v, "passed": ok}));
        }
        out.report.push(line);
    }
    let v = json!({
        "allocations": alloc,
        "packages": pack,
        "checks": checks,
    });
    out.artifacts.add("reproduce.json", json(&v)?);
    Ok(out)
}

const REGION_POINTS: usize = 256;

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

fn regions(common: &Common) -> Result<Outcome> {
    let l = load(common)?;
    let sc = &l.scenario;
    let n = common.grid.unwrap_or(REGION_POINTS);
    let alloc = build_allocations(sc, Severity::Ignore)?;
    let pack = build_packages(sc)?;
    let kappa = sc.production.kappa();
    let (slo, shi) = alloc.scale_range();
    let (_, whi) = sc.distributions.value.support();
    let mut curves: Vec<(&str, &str, Vec<(f64, f64)>)> = Vec::new();

    curves.push((
        "allocations",
        "exclusion",
        linspace(slo, shi, n).map(|s| (s, alloc.exclusion())).collect(),
    ));

    // fine-tuning frontier: phi(w) equals the marginal cost at the fine-tuning threshold
    let frontier = |s: f64| -> Result<f64> {
        let kind = CostKind::Contractible { scale: s };
        let mc = marginal_cost(kind, cost_threshold(kind, &sc.production, &sc.costs)?, &sc.production, &sc.costs)?;
        Ok(match sc.distributions.value {
            ScalarDistribution::Uniform01 => 0.5 * (1.0 + mc),
            _ => alloc.value_distribution().virtual_value_inverse(mc)?,
        })
    };
    let top = frontier(shi)?;
    if top <= whi {
        let s_star = if frontier(slo.max(1e-300))? <= whi {
            slo
        } else {
            bisect(|s| frontier(s).map_or(1.0, |w| w - whi), slo.max(1e-300), shi, 1e-15, 200)?
        };
        let pts: Result<Vec<(f64, f64)>> = linspace(s_star, shi, n).map(|s| Ok((s, frontier(s)?.min(whi)))).collect();
        curves.push(("allocations", "finetune", pts?));
    }

    for (name, th) in [("exclusion", pack.exclusion()), ("finetune", pack.finetune_from())] {
        // w s^kappa = th meets w = whi at this scale
        let s_min = (th / whi).powf(1.0 / kappa).max(slo);
        if s_min <= shi && th < pack.distribution().support().1 {
            let pts = linspace(s_min, shi, n).map(|s| (s, (th / s.powf(kappa)).min(whi))).collect();
            curves.push(("packages", name, pts));
        }
    }

    let mut out = Outcome::new(Some(&l));
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = Table::new(&["setting", "boundary", "s", "w"]);
            for (setting, b, pts) in &curves {
                for &(s, w) in pts {
                    t.push(vec![(*setting).into(), (*b).into(), s.into(), w.into()]);
                }
            }
            out.artifacts.add("regions.csv", t.to_csv()?);
        }
        Format::Json => {
            let v: Vec<Value> = curves
                .iter()
                .map(|(setting, b, pts)| {
                    json!({
                        "setting": setting,
                        "boundary": b,
                        "s": pts.iter().map(|p| p.0).collect::<Vec<_>>(),
                        "w": pts.iter().map(|p| p.1).collect::<Vec<_>>(),
                    })
                })
                .collect();
            out.artifacts.add("regions.json", json(&v)?);
        }
    }
    out.summary.push(format!(
        "regions: allocations excluded below w = {}; packages excluded below theta = {}, fine-tuned above theta = {}",
        num(alloc.exclusion()),
        num(pack.exclusion()),
        num(pack.finetune_from())
    ));
    Ok(out)
}
