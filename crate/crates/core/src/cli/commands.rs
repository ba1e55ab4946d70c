use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use super::config::{mechanism_of, AnalysisConfig};
use super::output::{cell, to_json, write_csv};
use crate::calibrate::{calibrate, CalibrationResult};
use crate::conditions::{check_mechanism, check_mm, classify_regime, ConditionReport, MmResult, Verdict};
use crate::domain::{
    discretize, lerp, AdPaymentSchedule, CanonicalMechanism, DensityModel, DiscreteInstance, Edge, Mechanism,
    MechanismFamily, MenuItem, Region,
};
use crate::error::{Error, Result};
use crate::measure::{build_measure, mu_of_region, ClosedForm, MassBreakdown};
use crate::mechanisms::{revenue_continuous, revenue_crossing, revenue_discrete, revenue_discrete_with, TieBreak};
use crate::oracle::{best_family_prices, build_lp, lp_solve, menu_grid_search, optimality_gap, Assignment, GapTable, GridSearchResult, LpStatus};

const FAMILIES: [MechanismFamily; 3] = [MechanismFamily::GoodOnly, MechanismFamily::SingleBundle, MechanismFamily::AdTiered];

/// JSON text for standard output and the process exit code.
pub struct Outcome {
    pub json: String,
    pub exit: u8,
}

fn ok(json: String) -> Outcome {
    Outcome { json, exit: 0 }
}

pub fn cmd_verify(cfg: &AnalysisConfig, csv: Option<&Path>) -> Result<Outcome> {
    let d = cfg.density()?;
    let kappa = cfg.payment()?;
    let mech = cfg.mechanism()?;
    let report = check_mechanism(&d, &kappa, &mech, &cfg.battery_options()?)?;
    if let Some(p) = csv {
        let rows: Vec<Vec<String>> = report
            .items
            .iter()
            .map(|i| {
                vec![
                    i.id.clone(),
                    i.necessary.to_string(),
                    serde_json::to_value(i.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                    cell(Some(i.value)),
                    i.detail.clone(),
                ]
            })
            .collect();
        write_csv(p, &["id", "necessary", "status", "value", "detail"], &rows)?;
    }
    let exit = if report.verdict == Verdict::SufficientPassed { 0 } else { 1 };
    Ok(Outcome { json: to_json(&report)?, exit })
}

#[derive(Serialize)]
struct CalibrateOutput {
    calibration: CalibrationResult,
    verdict: Verdict,
    failed: Vec<String>,
    verification: ConditionReport,
}

pub fn cmd_calibrate(cfg: &AnalysisConfig, csv: Option<&Path>) -> Result<Outcome> {
    let d = cfg.density()?;
    let kappa = cfg.payment()?;
    let q = cfg.quadrature()?;
    let m = build_measure(&d, &kappa, &q)?;
    let cal = calibrate(&m, cfg.family()?)?;
    let report = check_mechanism(&d, &kappa, &cal.mechanism()?, &cfg.battery_options()?)?;
    if let Some(p) = csv {
        let rows = vec![vec![
            cal.family.name().to_string(),
            cell(cal.p_g),
            cell(cal.p_sb),
            cell(Some(cal.max_residual())),
            cal.iterations.to_string(),
        ]];
        write_csv(p, &["family", "p_g", "p_sb", "max_residual", "iterations"], &rows)?;
    }
    let out = CalibrateOutput {
        verdict: report.verdict,
        failed: report.failed_ids().into_iter().map(String::from).collect(),
        calibration: cal,
        verification: report,
    };
    Ok(ok(to_json(&out)?))
}

#[derive(Serialize)]
struct AnalyzeOutput {
    space: [f64; 4],
    density: Value,
    norm_const: f64,
    payment: String,
    mass: MassBreakdown,
    closed_form: Option<ClosedForm>,
    mm: MmResult,
    regime: Option<String>,
    regions: Option<BTreeMap<String, MassBreakdown>>,
}

pub fn cmd_analyze(cfg: &AnalysisConfig, csv: Option<&Path>) -> Result<Outcome> {
    let d = cfg.density()?;
    let kappa = cfg.payment()?;
    let q = cfg.quadrature()?;
    let m = build_measure(&d, &kappa, &q)?;
    let s = *d.space();
    let mass = mu_of_region(&m, &Region::full(s))?;
    let regime = match kappa.as_constant() {
        Some(k) if d.is_uniform_in_x2() => Some(classify_regime(&d, k)?.name()),
        _ => None,
    };
    let regions = match &cfg.mechanism {
        Some(mc) if mc.p_g.is_some() || mc.p_sb.is_some() => {
            let mech = cfg.mechanism()?;
            mech.validate(&s)?;
            let mut out = BTreeMap::new();
            for c in mech.regions(&s) {
                out.insert(c.label.name().to_string(), mu_of_region(&m, &c.region)?);
            }
            Some(out)
        }
        _ => None,
    };
    if let Some(p) = csv {
        let mut rows = vec![vec!["atom".to_string(), cell(Some(mass.atom))]];
        for e in Edge::ALL {
            let v = match e {
                Edge::Bottom => mass.bottom,
                Edge::Top => mass.top,
                Edge::Left => mass.left,
                Edge::Right => mass.right,
            };
            rows.push(vec![e.name().to_string(), cell(Some(v))]);
        }
        rows.push(vec!["interior".into(), cell(Some(mass.interior))]);
        rows.push(vec!["total".into(), cell(Some(mass.total()))]);
        write_csv(p, &["component", "mass"], &rows)?;
    }
    let out = AnalyzeOutput {
        space: [s.x1_lo, s.x1_hi, s.x2_lo, s.x2_hi],
        density: serde_json::to_value(d.kind()).unwrap_or(Value::Null),
        norm_const: d.norm_const(),
        payment: kappa.label(),
        mass,
        closed_form: m.closed_form().copied(),
        mm: check_mm(&d, &kappa)?,
        regime,
        regions,
    };
    Ok(ok(to_json(&out)?))
}

#[derive(Clone)]
enum Cell {
    Num(Option<f64>),
    Text(Option<String>),
}

struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn json_rows(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| {
                let mut o = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    let v = match v {
                        Cell::Num(Some(x)) if x.is_finite() => serde_json::json!(x),
                        Cell::Text(Some(t)) => Value::String(t.clone()),
                        _ => Value::Null,
                    };
                    o.insert(c.clone(), v);
                }
                Value::Object(o)
            })
            .collect()
    }

    fn write(&self, p: &Path) -> Result<()> {
        let header: Vec<&str> = self.columns.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Num(v) => cell(*v),
                        Cell::Text(t) => t.clone().unwrap_or_default(),
                    })
                    .collect()
            })
            .collect();
        write_csv(p, &header, &rows)
    }
}

fn k_grid(k_min: f64, k_max: f64, steps: usize) -> Vec<f64> {
    if steps == 0 || k_max < k_min {
        return vec![];
    }
    if steps == 1 {
        return vec![k_min];
    }
    (0..steps).map(|i| lerp(k_min, k_max, i, steps)).collect()
}

/// Purchase options first, outside option last, chosen by lowest index on ties.
fn fixed_menu(mech: &CanonicalMechanism) -> Result<Mechanism> {
    let items: Vec<MenuItem> = mech.menu().items().iter().filter(|i| !i.is_default()).copied().collect();
    Mechanism::new(items)
}

fn fixed_revenue(menu: &Mechanism, inst: &DiscreteInstance, k: f64) -> f64 {
    revenue_discrete_with(menu, inst, &AdPaymentSchedule::Constant(k), TieBreak::LowestIndex)
}

fn continuous_row(cfg: &AnalysisConfig, d: &DensityModel, k: f64, lp_inst: Option<&DiscreteInstance>) -> Vec<Cell> {
    let mut errors = Vec::new();
    let mut row = vec![Cell::Num(Some(k))];
    let regime = if d.is_uniform_in_x2() {
        classify_regime(d, k).ok().map(|r| r.name())
    } else {
        None
    };
    row.push(Cell::Text(regime));
    let kappa = match AdPaymentSchedule::constant(k) {
        Ok(v) => v,
        Err(e) => {
            row.extend(std::iter::repeat(Cell::Num(None)).take(8));
            row.push(Cell::Text(Some(e.to_string())));
            return row;
        }
    };
    let q = cfg.quadrature().unwrap_or_default();
    let mut prices = Vec::new();
    let mut revenues = Vec::new();
    let measure = build_measure(d, &kappa, &q);
    for fam in FAMILIES {
        let res = measure
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|m| calibrate(m, fam))
            .and_then(|c| {
                let mech = c.mechanism()?;
                let rev = revenue_continuous(&mech, d, &kappa, &q)?;
                Ok((c, rev))
            });
        match res {
            Ok((c, rev)) => {
                match fam {
                    MechanismFamily::GoodOnly => prices.push(c.p_g),
                    MechanismFamily::SingleBundle => prices.push(c.p_sb),
                    MechanismFamily::AdTiered => {
                        prices.push(c.p_g);
                        prices.push(c.p_sb);
                    }
                }
                revenues.push(Some(rev));
            }
            Err(e) => {
                let n = if fam == MechanismFamily::AdTiered { 2 } else { 1 };
                prices.extend(std::iter::repeat(None).take(n));
                revenues.push(None);
                errors.push(format!("{}: {e}", fam.name()));
            }
        }
    }
    row.extend(prices.into_iter().map(Cell::Num));
    row.extend(revenues.into_iter().map(Cell::Num));
    let lp = lp_inst.map(|inst| build_lp(inst, &kappa).and_then(|p| lp_solve(&p)));
    row.push(Cell::Num(match lp {
        Some(Ok(s)) if s.status == LpStatus::Optimal => Some(s.value),
        Some(Ok(s)) => {
            errors.push(format!("lp: {:?}", s.status));
            None
        }
        Some(Err(e)) => {
            errors.push(format!("lp: {e}"));
            None
        }
        None => None,
    }));
    row.push(Cell::Text(if errors.is_empty() { None } else { Some(errors.join("; ")) }));
    row
}

pub const CONTINUOUS_SWEEP_COLUMNS: [&str; 11] = [
    "k",
    "regime",
    "p_g_good_only",
    "p_sb_single_bundle",
    "p_g_ad_tiered",
    "p_sb_ad_tiered",
    "revenue_good_only",
    "revenue_single_bundle",
    "revenue_ad_tiered",
    "lp_value",
    "error",
];

pub fn cmd_sweep(cfg: &AnalysisConfig, csv: Option<&Path>) -> Result<Outcome> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::config("sweep", "this command needs a sweep section"))?;
    if !sweep.k_min.is_finite() || !sweep.k_max.is_finite() {
        return Err(Error::config("sweep", "k range must be finite"));
    }
    let ks = k_grid(sweep.k_min, sweep.k_max, sweep.steps);
    let mut out = Map::new();
    let table = if let Some(inst) = cfg.discrete()? {
        let menus: Vec<(String, Mechanism)> = sweep
            .menus
            .iter()
            .enumerate()
            .map(|(i, nm)| Ok((nm.label.clone(), fixed_menu(&mechanism_of(&nm.mechanism, &format!("sweep.menus[{i}].mechanism"))?)?)))
            .collect::<Result<_>>()?;
        let mut columns = vec!["k".to_string(), "lp_value".to_string()];
        columns.extend(menus.iter().map(|(l, _)| format!("revenue_{l}")));
        columns.push("error".into());
        let rows = ks
            .iter()
            .map(|&k| {
                let mut row = vec![Cell::Num(Some(k))];
                let lp = AdPaymentSchedule::constant(k).and_then(|kap| lp_solve(&build_lp(&inst, &kap)?));
                let err = lp.as_ref().err().map(|e| e.to_string());
                row.push(Cell::Num(lp.ok().filter(|s| s.status == LpStatus::Optimal).map(|s| s.value)));
                row.extend(menus.iter().map(|(_, m)| Cell::Num(Some(fixed_revenue(m, &inst, k)))));
                row.push(Cell::Text(err));
                row
            })
            .collect();
        let crossing = if menus.len() >= 2 && !ks.is_empty() {
            let (a, b) = (&menus[0].1, &menus[1].1);
            revenue_crossing(|k| fixed_revenue(a, &inst, k), |k| fixed_revenue(b, &inst, k), sweep.k_min, sweep.k_max).ok()
        } else {
            None
        };
        out.insert("crossing".into(), crossing.map(|c| serde_json::json!(c)).unwrap_or(Value::Null));
        Table { columns, rows }
    } else {
        let d = cfg.density()?;
        let lp_inst = match (&cfg.oracle, sweep.lp) {
            (Some(o), true) => {
                let g = o.grids.first().ok_or_else(|| Error::config("oracle.grids", "no grid given"))?;
                Some(discretize(&d, g[0], g[1], &cfg.quadrature()?)?)
            }
            (None, true) => return Err(Error::config("sweep.lp", "an LP column needs an oracle section")),
            _ => None,
        };
        let rows = ks.par_iter().map(|&k| continuous_row(cfg, &d, k, lp_inst.as_ref())).collect();
        let columns = CONTINUOUS_SWEEP_COLUMNS.iter().map(|s| s.to_string()).collect();
        Table { columns, rows }
    };
    if let Some(p) = csv {
        table.write(p)?;
    }
    out.insert("columns".into(), serde_json::json!(table.columns));
    out.insert("rows".into(), Value::Array(table.json_rows()));
    Ok(ok(to_json(&Value::Object(out))?))
}

#[derive(Serialize)]
struct FamilyBest {
    best: GridSearchResult,
    gap: f64,
}

#[derive(Serialize)]
struct DiscreteOracle {
    lp_value: f64,
    status: LpStatus,
    certificate: f64,
    assignment: Vec<Assignment>,
    mechanism: Option<CanonicalMechanism>,
    mechanism_revenue: Option<f64>,
    gap: Option<f64>,
    families: BTreeMap<String, FamilyBest>,
}

pub fn cmd_oracle(cfg: &AnalysisConfig, csv: Option<&Path>) -> Result<Outcome> {
    let spec = cfg.oracle.as_ref().ok_or_else(|| Error::config("oracle", "this command needs an oracle section"))?;
    let kappa = cfg.payment()?;
    if let Some(inst) = cfg.discrete()? {
        let sol = lp_solve(&build_lp(&inst, &kappa)?)?;
        let mechanism = match &cfg.mechanism {
            Some(_) => Some(cfg.mechanism()?),
            None => None,
        };
        let mechanism_revenue = mechanism.map(|m| revenue_discrete(&m.menu(), &inst, &kappa));
        let mut families = BTreeMap::new();
        for fam in FAMILIES {
            let best = match &spec.price_grid {
                Some(g) => menu_grid_search(&inst, &kappa, fam, g)?,
                None => best_family_prices(&inst, &kappa, fam)?,
            };
            families.insert(fam.name().to_string(), FamilyBest { gap: sol.value - best.revenue, best });
        }
        if let Some(p) = csv {
            let mut rows: Vec<Vec<String>> = families
                .iter()
                .map(|(name, f)| vec![name.clone(), cell(Some(f.best.revenue)), cell(Some(f.gap))])
                .collect();
            if let Some(r) = mechanism_revenue {
                rows.push(vec!["configured".into(), cell(Some(r)), cell(Some(sol.value - r))]);
            }
            rows.push(vec!["lp".into(), cell(Some(sol.value)), cell(Some(0.0))]);
            write_csv(p, &["menu", "revenue", "gap"], &rows)?;
        }
        let out = DiscreteOracle {
            lp_value: sol.value,
            status: sol.status,
            certificate: sol.certificate,
            assignment: sol.assignment,
            gap: mechanism_revenue.map(|r| sol.value - r),
            mechanism,
            mechanism_revenue,
            families,
        };
        return Ok(ok(to_json(&out)?));
    }
    let d = cfg.density()?;
    let q = cfg.quadrature()?;
    let mech = match cfg.mechanism() {
        Ok(m) => m,
        Err(_) => calibrate(&build_measure(&d, &kappa, &q)?, cfg.family()?)?.mechanism()?,
    };
    let grids: Vec<(usize, usize)> = spec.grids.iter().map(|g| (g[0], g[1])).collect();
    if grids.iter().any(|&(a, b)| a == 0 || b == 0) {
        return Err(Error::config("oracle.grids", "grid dimensions must be positive"));
    }
    let table: GapTable = optimality_gap(&mech, &d, &kappa, &grids, &q)?;
    if let Some(p) = csv {
        let rows: Vec<Vec<String>> = table
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.n1.to_string(),
                    r.n2.to_string(),
                    cell(Some(r.lp_value)),
                    cell(Some(r.mechanism_revenue)),
                    cell(Some(r.gap)),
                    cell(Some(r.relative_gap)),
                    cell(Some(r.refit.revenue)),
                    cell(Some(r.refit_gap)),
                    cell(Some(r.refit_relative_gap)),
                ]
            })
            .collect();
        write_csv(
            p,
            &["n1", "n2", "lp_value", "mechanism_revenue", "gap", "relative_gap", "refit_revenue", "refit_gap", "refit_relative_gap"],
            &rows,
        )?;
    }
    Ok(ok(to_json(&table)?))
}
