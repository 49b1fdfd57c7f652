//! Named check suites composed from the analysis modules. Output is a
//! deterministic function of the suite name and seed.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, ToPrimitive};
use serde::Serialize;
use serde_json::json;

use crate::address::{build_address_map, linear_fit, meyer_residual};
use crate::atlas::{compute_atlas, cubical_atlas};
use crate::contfrac::ContinuedFraction;
use crate::error::{invalid, Result};
use crate::generators::{
    deleted_line_level, rho_sequence, PointSetSource, TwoColorParams, TwoColoring,
};
use crate::pointset::{delone_constants, PointCloud};
use crate::region::Region;
use crate::repetitivity::{
    count_bound_holds, crystal_gap_probe, repetitivity_function, repetitivity_prime,
    sturmian_complexity, symbolic_recurrence_oracle, CrystalVerdict, Recurrence,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Fibonacci,
    Zn,
    CutProject,
    TwoColor,
    DeletedLines,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [
        Suite::Fibonacci,
        Suite::Zn,
        Suite::CutProject,
        Suite::TwoColor,
        Suite::DeletedLines,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Fibonacci => "fibonacci",
            Suite::Zn => "zn",
            Suite::CutProject => "cut-project",
            Suite::TwoColor => "two-color",
            Suite::DeletedLines => "deleted-lines",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(&[Suite::All])
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| invalid(format!("unknown suite {s:?}; expected fibonacci, zn, cut-project, two-color, deleted-lines or all")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: serde_json::Value,
}

/// Repetitivity bracket of one generator at one `T`, with the derived checks.
#[derive(Clone, Debug, Serialize)]
pub struct BracketRecord {
    pub generator: String,
    pub dimension: usize,
    pub aperiodic: bool,
    pub t: f64,
    pub r: f64,
    pub big_r: f64,
    pub m_lower: f64,
    pub m_upper: f64,
    pub n_lower: usize,
    pub m_prime: (f64, f64),
    pub count_bound: bool,
    pub crystal: CrystalVerdict,
    /// `(cubical count at side T, ball count at radius T/2)` in dimension 1.
    pub cubical: Option<(usize, usize)>,
}

impl BracketRecord {
    pub fn prime_identity(&self) -> bool {
        self.m_prime == (self.m_lower + self.t, self.m_upper + self.t)
    }

    /// Aperiodic sets never certify `M < T/3`; lattices must.
    pub fn crystal_consistent(&self) -> bool {
        self.crystal.repetitivity_trigger != self.aperiodic
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub brackets: Vec<BracketRecord>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            checks: vec![],
            brackets: vec![],
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: serde_json::Value) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed())
    }

    pub fn checks(&self) -> impl Iterator<Item = (&SuiteReport, &Check)> {
        self.suites
            .iter()
            .flat_map(|s| s.checks.iter().map(move |c| (s, c)))
    }

    pub fn brackets(&self) -> impl Iterator<Item = &BracketRecord> {
        self.suites.iter().flat_map(|s| s.brackets.iter())
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn lines(&self) -> Vec<String> {
        self.checks()
            .map(|(s, c)| {
                format!(
                    "{} {}/{} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    s.suite,
                    c.name,
                    c.detail
                )
            })
            .collect()
    }
}

pub fn run(suite: Suite, seed: u64) -> Result<VerifyReport> {
    let list: Vec<Suite> = if suite == Suite::All {
        Suite::EACH.to_vec()
    } else {
        vec![suite]
    };
    let suites = list
        .into_iter()
        .map(|s| run_one(s, seed))
        .collect::<Result<_>>()?;
    Ok(VerifyReport { seed, suites })
}

fn run_one(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new(suite);
    match suite {
        Suite::Fibonacci => fibonacci(&mut rep, seed)?,
        Suite::Zn => zn(&mut rep)?,
        Suite::CutProject => cut_project(&mut rep)?,
        Suite::TwoColor => two_color(&mut rep)?,
        Suite::DeletedLines => deleted_lines(&mut rep)?,
        Suite::All => unreachable!("expanded by run"),
    }
    Ok(rep)
}

/// Repetitivity brackets of `source` on the centered window of half-side `half`.
fn brackets(
    rep: &mut SuiteReport,
    label: &str,
    source: &PointSetSource,
    aperiodic: bool,
    half: f64,
    ts: &[f64],
) -> Result<()> {
    let n = source.dimension();
    let set = source.materialize(&Region::centered_cube(n, half)?)?;
    let c = delone_constants(&set)?;
    for &t in ts {
        let res = repetitivity_function(&set, t, None)?;
        let cubical = if n == 1 {
            Some((
                cubical_atlas(&set, t)?.count(),
                compute_atlas(&set, t / 2.0)?.count(),
            ))
        } else {
            None
        };
        let rec = BracketRecord {
            generator: label.to_string(),
            dimension: n,
            aperiodic,
            t,
            r: c.r,
            big_r: c.big_r,
            m_lower: res.m_lower,
            m_upper: res.m_upper,
            n_lower: res.n_lower,
            m_prime: repetitivity_prime(&res),
            count_bound: count_bound_holds(&res, c.r, n),
            crystal: crystal_gap_probe(&res, &c),
            cubical,
        };
        let d = json!({"m": [rec.m_lower, rec.m_upper], "n": rec.n_lower, "r": rec.r});
        rep.check(
            format!("{label}/count-bound/T={t}"),
            rec.count_bound,
            d.clone(),
        );
        rep.check(
            format!("{label}/prime-identity/T={t}"),
            rec.prime_identity(),
            json!({"m_prime": rec.m_prime}),
        );
        rep.check(
            format!("{label}/crystal-probe/T={t}"),
            rec.crystal_consistent(),
            json!({"aperiodic": aperiodic, "m_upper": rec.m_upper, "third_of_t": rec.crystal.third_of_t}),
        );
        if let Some((cube, ball)) = rec.cubical {
            rep.check(
                format!("{label}/cubical-identity/T={t}"),
                cube == ball,
                json!({"cubical": cube, "ball_half_t": ball}),
            );
        }
        rep.brackets.push(rec);
    }
    Ok(())
}

/// Formula against the word scan for `l = 1..=l_max`, on a prefix of `60 l` symbols.
pub fn recurrence_agreement(
    alpha: &ContinuedFraction,
    l_max: u64,
) -> Result<Vec<(u64, u64, Recurrence)>> {
    let word = alpha.beatty_symbols(0, 60 * l_max as i64)?;
    (1..=l_max)
        .map(|l| {
            let f = alpha
                .recurrence_formula(l)?
                .to_u64()
                .ok_or_else(|| invalid("recurrence value overflows"))?;
            Ok((l, f, symbolic_recurrence_oracle(&word, l as usize)))
        })
        .collect()
}

fn fibonacci(rep: &mut SuiteReport, _seed: u64) -> Result<()> {
    let golden = ContinuedFraction::golden();
    let rows = recurrence_agreement(&golden, 60)?;
    let bad: Vec<u64> = rows
        .iter()
        .filter(|r| r.2 != Recurrence::Finite(r.1))
        .map(|r| r.0)
        .collect();
    rep.check(
        "recurrence-formula/l<=60",
        bad.is_empty(),
        json!({"mismatches": bad}),
    );

    let src = PointSetSource::fibonacci();
    let cx = sturmian_complexity(&src, 30, 6)?;
    let ok = cx.iter().all(|p| p.stabilized && p.count == p.k + 1);
    rep.check(
        "complexity/k<=30",
        ok,
        json!({"counts": cx.iter().map(|p| p.count).collect::<Vec<_>>()}),
    );

    brackets(
        rep,
        "fibonacci",
        &src,
        true,
        600.0,
        &[1.0, 2.0, 4.0, 8.0, 16.0],
    )?;

    let set = src.materialize(&Region::interval(-3000.0, 3000.0)?)?;
    let map = build_address_map(&set)?;
    let fit = linear_fit(&set, &map)?;
    rep.check(
        "address/pi-l-identity",
        fit.pi_l_error < 1e-9,
        json!({"error": fit.pi_l_error}),
    );
    let m = meyer_residual(&fit)?;
    rep.check(
        "address/meyer-residual",
        m.bounded,
        json!({"variation": m.variation, "per_annulus": m.per_annulus}),
    );
    let e = fit.exponent.unwrap_or(0.0);
    rep.check(
        "address/residual-exponent",
        e <= 0.1,
        json!({"exponent": fit.exponent}),
    );
    Ok(())
}

fn zn(rep: &mut SuiteReport) -> Result<()> {
    for (n, half, ts) in [
        (1usize, 40.0, vec![2.0, 3.0, 5.0]),
        (2, 16.0, vec![3.0, 4.0]),
    ] {
        let label = format!("z{n}");
        let src = PointSetSource::integer_lattice(n, vec![])?;
        let start = rep.brackets.len();
        brackets(rep, &label, &src, false, half, &ts)?;
        let want = (n as f64).sqrt() / 2.0;
        let recs: Vec<BracketRecord> = rep.brackets[start..].to_vec();
        for rec in recs {
            let ok = rec.n_lower == 1 && rec.m_lower <= want + 1e-9 && rec.m_upper >= want - 1e-9;
            rep.check(
                format!("{label}/covering-constant/T={}", rec.t),
                ok,
                json!({"m": [rec.m_lower, rec.m_upper], "expected": want}),
            );
        }
    }
    Ok(())
}

fn cut_project(rep: &mut SuiteReport) -> Result<()> {
    for (label, alpha) in [
        ("cut-project-golden", ContinuedFraction::golden()),
        ("cut-project-silver", ContinuedFraction::silver()),
    ] {
        let src = PointSetSource::cut_project(alpha)?;
        brackets(rep, label, &src, true, 600.0, &[2.0, 4.0, 8.0])?;
    }
    Ok(())
}

fn two_color(rep: &mut SuiteReport) -> Result<()> {
    let p = TwoColorParams::new(1, vec![16, 32, 64, 128]);
    let coloring = TwoColoring::new(&p)?;
    let rho = rho_sequence(&p, 4)?;
    let products = rho.products();
    for k in 1..=4 {
        let counted = coloring.level_cube_proportion(k)?;
        let ok = counted == rho.recursion[k] && rho.recursion[k] == rho.closed_form[k];
        rep.check(
            format!("rho/level={k}"),
            ok,
            json!({"counted": counted.to_string(), "rho": rho.recursion[k].to_string()}),
        );
        let half = num_rational::BigRational::new(1.into(), 2.into());
        let dev = (&rho.recursion[k] - &half).abs();
        let floor = &products[k] * &half;
        let zero = num_rational::BigRational::from_integer(0.into());
        rep.check(
            format!("rho-oscillation/level={k}"),
            dev >= floor && floor > zero,
            json!({"deviation": dev.to_string(), "floor": floor.to_string()}),
        );
    }
    let src = PointSetSource::two_color(p)?;
    brackets(rep, "two-color-coded", &src, true, 1200.0, &[2.0, 4.0, 8.0])?;
    Ok(())
}

fn deleted_lines(rep: &mut SuiteReport) -> Result<()> {
    let window = Region::centered_cube(3, 24.0)?;
    for a1 in [2u64, 4] {
        let src = PointSetSource::deleted_lines(vec![a1])?;
        let set = src.materialize(&window)?;
        // independent congruence check over every lattice point of the window
        let m = 4 * a1 as i64;
        let mut mismatches = 0usize;
        for x in -24i64..=24 {
            for y in -24i64..=24 {
                for z in -24i64..=24 {
                    let p = [x, y, z];
                    let on_line = (0..3).any(|k| {
                        p[(k + 1) % 3].rem_euclid(m) == a1 as i64
                            && p[(k + 2) % 3].rem_euclid(m) == (-(a1 as i64)).rem_euclid(m)
                    });
                    let by_level = deleted_line_level(p, &[a1]).is_some_and(|(_, d)| d % 2 == 1);
                    if on_line != !set.contains_address(&p) || on_line != by_level {
                        mismatches += 1;
                    }
                }
            }
        }
        rep.check(
            format!("a1={a1}/congruences"),
            mismatches == 0,
            json!({"mismatches": mismatches, "points": set.len()}),
        );
        for t in 1..=a1 {
            let t = t as f64;
            let atlas = compute_atlas(&set, t)?;
            let bound = 12.0 * t * t;
            rep.check(
                format!("a1={a1}/count-bound/T={t}"),
                atlas.count() as f64 <= bound,
                json!({"n_lower": atlas.count(), "bound": bound}),
            );
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::EACH.iter().chain(&[Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn zn_suite_passes() {
        let r = run(Suite::Zn, 0).unwrap();
        assert!(r.passed(), "{:#?}", r.lines());
        assert!(r.brackets().all(|b| b.crystal.repetitivity_trigger));
    }
}
