use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use twistcore::aubry::{
    barrier_csv, configuration_csv, minimal_periodic, nondensity_gap, BarrierSample, PeriodicBarrier, SignedBarrier,
    WindowSchedule,
};
use twistcore::genfun::{check_conditions, ConditionReport, GeneratingFunction, SampleGrid};
use twistcore::mather::{middle_third, plan, PerturbationPlan};
use twistcore::norms::{build_section, twist_lower_bound};
use twistcore::solve::golden_min;
use twistcore::twist::{check_ift, iterate, map_from_genfun, rotation_number, IftGrid};

use crate::io::{column, read_csv_columns, Artifacts};
use crate::report::{RunReport, Verdict};
use crate::scenario::{Base, Scenario};
use crate::svg::{histogram01, Chart, Style};
use crate::CliError;

/// Barrier values at or below this level do not count as positive.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// Probe displacement for the coercivity check.
const XI_MAX: f64 = 10.0;

/// Grid points in the twist lower-bound battery.
const TWIST_POINTS: usize = 1000;

/// Rows of the bump table.
const BUMP_SAMPLES: usize = 2000;

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub grid: Option<usize>,
    pub window: Option<usize>,
    pub quiet: bool,
}

impl Options {
    pub fn output_dir(&self, scenario: Option<&Scenario>) -> PathBuf {
        self.out
            .clone()
            .or_else(|| scenario.and_then(|s| s.output.clone()))
            .unwrap_or_else(|| PathBuf::from("out").join(scenario.map_or("run", |s| s.name.as_str())))
    }
}

fn conditions_verdicts(report: &mut RunReport, prefix: &str, c: &ConditionReport) {
    for r in &c.results {
        let detail = match r.witness {
            Some((a, b)) => format!("witness ({a:.6}, {b:.6})"),
            None => String::new(),
        };
        let measured = r.measured.first().map_or(f64::NAN, |m| m.1);
        report.verdict(Verdict::new(format!("{prefix}.{}", r.name), r.passed, measured, f64::NAN, detail));
    }
}

fn finish(report: &mut RunReport, art: &mut Artifacts) -> Result<(), CliError> {
    report.artifacts = art.written().iter().map(|p| p.display().to_string()).collect();
    report.artifacts.push(art.dir().join("report.txt").display().to_string());
    art.write("report.txt", &report.to_text())?;
    Ok(())
}

/// Condition batteries of the base: norm validity and twist bound, the
/// generating-function conditions and the IFT battery of its map.
pub fn cmd_check(s: &Scenario, opts: &Options) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("check", &s.name);
    let mut art = Artifacts::new(opts.output_dir(Some(s)));
    let base = s.base()?;
    let mut text = String::new();
    if let Base::Norm(n) = &base {
        let t = Instant::now();
        let valid = n.validate(256);
        text.push_str(&valid.to_text());
        conditions_verdicts(&mut report, "norm", &valid);
        report.time("norm", t.elapsed());
        if !valid.all_passed() {
            report.section("conditions", text.clone());
            art.write("conditions.txt", &text)?;
            finish(&mut report, &mut art)?;
            return Ok(report);
        }
        let t = Instant::now();
        let chart = build_section(n);
        let (lo, hi) = chart.domain();
        let grid: Vec<f64> =
            (1..=TWIST_POINTS).map(|i| lo + (hi - lo) * i as f64 / (TWIST_POINTS + 1) as f64).collect();
        let tb = twist_lower_bound(&chart, &grid)?;
        let _ = writeln!(
            text,
            "twist bound: delta1 = {:.6e}, delta2 = {:.6e}, bound = {:.6e}, min f0'' = {:.6e}",
            tb.delta1, tb.delta2, tb.bound, tb.min_f0_second
        );
        report.verdict(Verdict::new(
            "twist.f0_second",
            tb.holds(),
            tb.min_f0_second,
            tb.bound,
            tb.violation.map_or(String::new(), |p| format!("violated at p1 = {p:.6}")),
        ));
        report.time("twist bound", t.elapsed());
    }
    let t = Instant::now();
    let h = base.genfun();
    let cond = check_conditions(h.as_ref(), &SampleGrid::default(), XI_MAX);
    text.push_str(&cond.to_text());
    conditions_verdicts(&mut report, "genfun", &cond);
    report.time("generating function", t.elapsed());

    let t = Instant::now();
    let ift = check_ift(&base.map(), &IftGrid::default());
    text.push_str(&ift.to_text());
    conditions_verdicts(&mut report, "map", &ift);
    report.time("ift", t.elapsed());

    report.section("conditions", text.clone());
    art.write("conditions.txt", &text)?;
    finish(&mut report, &mut art)?;
    Ok(report)
}

fn grid_on(interval: (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|i| interval.0 + (interval.1 - interval.0) * (i as f64 + 0.5) / n as f64).collect()
}

fn min_value(samples: &[BarrierSample]) -> f64 {
    samples.iter().map(|s| s.value).fold(f64::INFINITY, f64::min)
}

/// Phase in `J'` where the periodic barrier of `h~` peaks, and the constrained
/// minimizer through it.
fn barrier_peak(h: &dyn GeneratingFunction, plan: &PerturbationPlan, grid: &[f64]) -> Result<(f64, f64), CliError> {
    let pb = PeriodicBarrier::new(h, plan.p(), plan.q())?;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&xi| pb.sample(xi).map(|s| s.value))
        .collect::<Result<_, _>>()?;
    let k = (0..values.len()).fold(0, |b, i| if values[i] > values[b] { i } else { b });
    let step = if grid.len() > 1 { grid[1] - grid[0] } else { plan.j_prime().1 - plan.j_prime().0 };
    let (lo, hi) = (grid[k] - step, grid[k] + step);
    let (xr, neg) = golden_min(|xi| pb.sample(xi).map_or(f64::INFINITY, |s| -s.value), lo, hi, 1e-10);
    if -neg > values[k] {
        Ok((xr, -neg))
    } else {
        Ok((grid[k], values[k]))
    }
}

/// The destruction pipeline: plan, barrier certification on `J'` and `I`,
/// the reconstructed map's long orbit, and the norm budget.
pub fn cmd_destroy(s: &Scenario, opts: &Options) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("destroy", &s.name);
    let mut art = Artifacts::new(opts.output_dir(Some(s)));
    let base = s.base()?;
    let h = base.genfun();

    let t = Instant::now();
    let cond = check_conditions(h.as_ref(), &SampleGrid::default(), XI_MAX);
    art.write("conditions.txt", &cond.to_text())?;
    report.section("base conditions", cond.to_text());
    report.time("conditions", t.elapsed());
    if !cond.all_passed() {
        return Err(CliError::Precondition(cond.to_text()));
    }

    let t = Instant::now();
    let req = s.plan_request(opts.window)?;
    let plan = plan(h.clone(), &req)?;
    let (p, q) = (plan.p(), plan.q());
    let window = plan.window;
    if (window as i64) < 4 * q {
        return Err(twistcore::Error::WindowTooSmall { window, q, min: 4 * q as usize }.into());
    }
    let delta = s.grids.delta.unwrap_or(0.5 * (plan.j().1 - plan.j().0));
    report.time("plan", t.elapsed());

    // V1: periodic barrier of h' on J'
    let t = Instant::now();
    let n1 = opts.grid.unwrap_or(s.grids.barrier);
    let jp_grid = grid_on(plan.j_prime(), n1);
    let h_prime = plan.h_prime_shared();
    let pb = PeriodicBarrier::new(h_prime.as_ref(), p, q)?;
    let v1: Vec<BarrierSample> = jp_grid.par_iter().map(|&xi| pb.sample(xi)).collect::<Result<_, _>>()?;
    art.write("barrier_rational.csv", &barrier_csv(&v1))?;
    let v1_min = min_value(&v1);
    let v1_conv = v1.iter().all(|s| s.converged);
    report.verdict(Verdict::new(
        "V1",
        v1_min > POSITIVITY_FLOOR && v1_conv,
        v1_min,
        POSITIVITY_FLOOR,
        format!("min barrier of h' over {n1} points of J'{}", if v1_conv { "" } else { " (unconverged samples)" }),
    ));
    report.time("V1 barrier on J'", t.elapsed());

    // V2: signed barrier of h~ on the middle third of I
    let t = Instant::now();
    let h_tilde = plan.h_tilde_shared();
    let sb = SignedBarrier::new(h_tilde.as_ref(), p, q, plan.sign)?;
    let schedule = WindowSchedule::starting_at(window);
    let i_grid = grid_on(middle_third(plan.i_interval), s.grids.signed);
    let v2: Vec<BarrierSample> =
        i_grid.par_iter().map(|&xi| sb.sample(xi, &schedule)).collect::<Result<_, _>>()?;
    art.write("barrier_signed.csv", &barrier_csv(&v2))?;
    let v2_min = min_value(&v2);
    let v2_conv = v2.iter().all(|s| s.converged);
    report.verdict(Verdict::new(
        "V2",
        v2_min > POSITIVITY_FLOOR && v2_conv,
        v2_min,
        POSITIVITY_FLOOR,
        format!(
            "min signed barrier ({}) of h~ over {} points of I, windows from {window}{}",
            plan.sign.symbol(p, q),
            i_grid.len(),
            if v2_conv { "" } else { ", not all converged" }
        ),
    ));
    report.time("V2 signed barrier on I", t.elapsed());

    // V3: long orbit of the map of h~ from the barrier peak
    let t = Instant::now();
    let (xi_star, peak) = barrier_peak(h_tilde.as_ref(), &plan, &jp_grid)?;
    let ptb = PeriodicBarrier::new(h_tilde.as_ref(), p, q)?;
    let constrained = ptb.constrained(xi_star)?;
    art.write("minimizer.csv", &configuration_csv(&constrained.config))?;
    let e = constrained.config.entries();
    let (x0, x1) = (e[0], e[1]);
    let y0 = -h_tilde.d1(x0, x1);
    let map = map_from_genfun(h_tilde.clone(), base.band());
    let n_orbit = s.grids.orbit;
    let mut stats = String::new();
    let _ = writeln!(stats, "xi_star: {xi_star:.17e}");
    let _ = writeln!(stats, "barrier_at_xi_star: {peak:.17e}");
    let _ = writeln!(stats, "launch: x0 = {x0:.17e}, y0 = {y0:.17e}");
    let _ = writeln!(stats, "delta: {delta:.17e}");
    let config_gap = nondensity_gap(&e[..q as usize])?;
    let _ = writeln!(stats, "minimizer_gap: {:.17e} on ({:.6}, {:.6})", config_gap.0, config_gap.1 .0, config_gap.1 .1);
    match iterate(&map, x0, y0, n_orbit) {
        Ok(orbit) => {
            art.write("orbit.csv", &orbit.to_csv())?;
            let (gap, at) = nondensity_gap(&orbit.x_mod1())?;
            let _ = writeln!(stats, "orbit_gap: {gap:.17e} on ({:.6}, {:.6})", at.0, at.1);
            if let Ok(rho) = rotation_number(&orbit) {
                let _ = writeln!(stats, "rotation_number: {:.12} +- {:.3e}", rho.estimate, rho.error_bound);
            }
            report.verdict(Verdict::new(
                "V3",
                gap >= delta,
                gap,
                delta,
                format!("x-projection gap of the {n_orbit}-step orbit on ({:.6}, {:.6})", at.0, at.1),
            ));
        }
        Err(err) => {
            let _ = writeln!(stats, "orbit failed: {err}");
            report.verdict(Verdict::new("V3", false, 0.0, delta, format!("orbit failed: {err}")));
        }
    }
    report.section("orbit", stats);
    report.time("V3 orbit", t.elapsed());

    // V4: perturbation budget
    let eps = plan.spec.epsilon;
    report.verdict(Verdict::new(
        "V4",
        plan.norms.h_tilde <= eps,
        plan.norms.h_tilde,
        eps,
        format!("C^{} distance of h~ from h on the bump grids", plan.spec.order()),
    ));

    let mut manifest = plan.manifest();
    let _ = writeln!(manifest, "delta: {delta:.17e}");
    let _ = writeln!(manifest, "xi_star: {xi_star:.17e}");
    art.write("plan.manifest", &manifest)?;
    art.write("bumps.csv", &plan.bump_table(BUMP_SAMPLES))?;
    let n = &plan.norms;
    let mut norms = String::from("quantity,value\n");
    for (k, v) in [
        ("epsilon", eps),
        ("u", n.u),
        ("v", n.v),
        ("w", n.w),
        ("h_prime_minus_h", n.h_prime),
        ("h_tilde_minus_h", n.h_tilde),
        ("h_tilde_minus_h_prime", n.tilde_minus_prime),
        ("inflation", n.inflation),
        ("delta", delta),
    ] {
        let _ = writeln!(norms, "{k},{v:.17e}");
    }
    art.write("norms.csv", &norms)?;
    let mut verdicts = String::from("name,passed,measured,threshold\n");
    for v in &report.verdicts {
        let _ = writeln!(verdicts, "{},{},{:.17e},{:.17e}", v.name, v.passed, v.measured, v.threshold);
    }
    art.write("verdicts.csv", &verdicts)?;
    report.section("plan", manifest);
    finish(&mut report, &mut art)?;
    Ok(report)
}

/// Recomputes `V1`..`V4` of a `destroy` run from its CSVs alone.
pub fn recompute_verdicts(art: &Artifacts) -> Result<Vec<(String, bool)>, CliError> {
    let positive = |name: &str| -> Result<bool, CliError> {
        let cols = read_csv_columns(&art.read(name)?)?;
        let values = column(&cols, "value")?;
        let conv = column(&cols, "converged")?;
        Ok(values.iter().all(|&v| v > POSITIVITY_FLOOR) && conv.iter().all(|&c| c == 1.0))
    };
    let norms = read_csv_columns(&art.read("norms.csv")?)?;
    let names = art.read("norms.csv")?;
    let lookup = |key: &str| -> Result<f64, CliError> {
        let values = column(&norms, "value")?;
        names
            .lines()
            .skip(1)
            .position(|l| l.split(',').next() == Some(key))
            .map(|i| values[i])
            .ok_or_else(|| CliError::MissingInput(format!("norms.csv row {key}")))
    };
    let delta = lookup("delta")?;
    let v3 = match art.read("orbit.csv") {
        Ok(text) => {
            let cols = read_csv_columns(&text)?;
            nondensity_gap(column(&cols, "x_mod1")?)?.0 >= delta
        }
        Err(_) => false,
    };
    Ok(vec![
        ("V1".into(), positive("barrier_rational.csv")?),
        ("V2".into(), positive("barrier_signed.csv")?),
        ("V3".into(), v3),
        ("V4".into(), lookup("h_tilde_minus_h")? <= lookup("epsilon")?),
    ])
}

pub fn cmd_orbit(s: &Scenario, opts: &Options) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("orbit", &s.name);
    let mut art = Artifacts::new(opts.output_dir(Some(s)));
    let t = Instant::now();
    let base = s.base()?;
    let o = &s.orbit;
    let orbit = iterate(&base.map(), o.x0, o.y0, o.n)?;
    art.write("orbit.csv", &orbit.to_csv())?;
    let mut stats = format!("map: {}\nsteps: {}\n", base.map().label(), o.n);
    if let Ok(rho) = rotation_number(&orbit) {
        let _ = writeln!(stats, "rotation_number: {:.12} +- {:.3e}", rho.estimate, rho.error_bound);
    }
    report.section("orbit", stats);
    report.time("orbit", t.elapsed());
    finish(&mut report, &mut art)?;
    Ok(report)
}

/// Periodic barrier of the base on a uniform grid of `[0, 1)`.
pub fn cmd_barrier(s: &Scenario, opts: &Options) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("barrier", &s.name);
    let mut art = Artifacts::new(opts.output_dir(Some(s)));
    let t = Instant::now();
    let h = s.base()?.genfun();
    let (p, q) = s.rational()?;
    let n = opts.grid.unwrap_or(s.grids.barrier);
    let pb = PeriodicBarrier::new(h.as_ref(), p, q)?;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let samples: Vec<BarrierSample> = xs.par_iter().map(|&xi| pb.sample(xi)).collect::<Result<_, _>>()?;
    art.write("barrier.csv", &barrier_csv(&samples))?;
    let max = samples.iter().map(|s| s.value.abs()).fold(0.0, f64::max);
    report.section("barrier", format!("p/q: {p}/{q}\npoints: {n}\nmax_abs_value: {max:.6e}\n"));
    report.time("barrier", t.elapsed());
    finish(&mut report, &mut art)?;
    Ok(report)
}

pub fn cmd_minimal(s: &Scenario, opts: &Options) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("minimal", &s.name);
    let mut art = Artifacts::new(opts.output_dir(Some(s)));
    let t = Instant::now();
    let h = s.base()?.genfun();
    let (p, q) = s.rational()?;
    let m = minimal_periodic(h.as_ref(), p, q)?;
    art.write("minimal.csv", &configuration_csv(&m.config))?;
    report.section(
        "minimal",
        format!("p/q: {p}/{q}\naction: {:.17e}\nresidual: {:.3e}\n", m.action, m.residual),
    );
    report.time("minimal", t.elapsed());
    finish(&mut report, &mut art)?;
    Ok(report)
}

fn manifest_interval(manifest: &str, key: &str) -> Option<(f64, f64)> {
    let line = manifest.lines().find(|l| l.starts_with(&format!("{key}: ")))?;
    let mut it = line[key.len() + 2..].split_whitespace().map(|t| t.parse::<f64>());
    match (it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b))) => Some((a, b)),
        _ => None,
    }
}

/// Largest number of orbit points drawn in the phase portrait.
const PHASE_POINTS: usize = 20_000;

/// SVG charts from the CSVs in the output directory.
pub fn cmd_plot(s: Option<&Scenario>, opts: &Options) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("plot", s.map_or("-", |s| s.name.as_str()));
    let mut art = Artifacts::new(opts.output_dir(s));
    let manifest = art.read("plan.manifest").ok();
    let overlays = |mut c: Chart| {
        if let Some(m) = &manifest {
            for key in ["J", "J_prime", "I"] {
                if let Some((a, b)) = manifest_interval(m, key) {
                    c = c.band(key.replace("_prime", "'"), a, b);
                }
            }
        }
        c
    };
    let mut made = 0;
    if let Ok(text) = art.read("orbit.csv") {
        let cols = read_csv_columns(&text)?;
        let (x, y) = (column(&cols, "x_mod1")?, column(&cols, "y")?);
        let stride = x.len().div_ceil(PHASE_POINTS).max(1);
        let pts: Vec<(f64, f64)> = x.iter().zip(y).step_by(stride).map(|(&a, &b)| (a, b)).collect();
        let chart = Chart::new("phase portrait", "x mod 1", "y").series("orbit", Style::Points, pts).x_range(0.0, 1.0);
        art.write("phase.svg", &chart.render())?;
        let hist = Chart::new("orbit x-projection", "x mod 1", "count")
            .series("iterates", Style::Bars, histogram01(x, 64))
            .x_range(0.0, 1.0);
        art.write("orbit_gap.svg", &overlays(hist).render())?;
        made += 2;
    }
    for (file, svg, title) in [
        ("barrier_rational.csv", "barrier.svg", "periodic barrier of h'"),
        ("barrier_signed.csv", "barrier_signed.svg", "signed barrier of h~"),
        ("barrier.csv", "barrier_base.svg", "periodic barrier"),
    ] {
        if let Ok(text) = art.read(file) {
            let cols = read_csv_columns(&text)?;
            let pts: Vec<(f64, f64)> =
                column(&cols, "xi")?.iter().zip(column(&cols, "value")?).map(|(&a, &b)| (a, b)).collect();
            let chart = Chart::new(title, "xi", "barrier").series("value", Style::Line, pts);
            art.write(svg, &overlays(chart).render())?;
            made += 1;
        }
    }
    if let Ok(text) = art.read("bumps.csv") {
        let cols = read_csv_columns(&text)?;
        let t = column(&cols, "t")?;
        let mut chart = Chart::new("bump profiles", "t", "value");
        for name in ["u", "v", "w"] {
            let pts = t.iter().zip(column(&cols, name)?).map(|(&a, &b)| (a, b)).collect();
            chart = chart.series(name, Style::Line, pts);
        }
        art.write("bumps.svg", &overlays(chart).render())?;
        made += 1;
    }
    if made == 0 {
        return Err(CliError::MissingInput(format!("no CSV artifacts in {}", art.dir().display())));
    }
    report.section("plot", format!("charts: {made}\n"));
    report.artifacts = art.written().iter().map(|p| p.display().to_string()).collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_intervals_parse() {
        let m = "format: plan-v1\nJ: 0.0 5.0e-1\nI: 2.0e-1 3.0e-1\n";
        assert_eq!(manifest_interval(m, "J"), Some((0.0, 0.5)));
        assert_eq!(manifest_interval(m, "I"), Some((0.2, 0.3)));
        assert_eq!(manifest_interval(m, "J_prime"), None);
    }

    #[test]
    fn grid_points_are_interior() {
        let g = grid_on((0.0, 1.0), 4);
        assert_eq!(g, vec![0.125, 0.375, 0.625, 0.875]);
    }
}
