//! End-to-end acceptance suite. Every criterion runs at its stated tolerance
//! and prints one PASS/FAIL line; the process exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use gkdv_core::evolve::{evolve, EvolveConfig, TimeSeries};
use gkdv_core::functionals::{energy, l2, morawetz_derivative_check, WeightKind};
use gkdv_core::linearized::{apply_l, coercivity_estimate, Definiteness};
use gkdv_core::modulation::{
    centered_difference, decompose, rates_envelope, track, ModulationTrack, NewtonOptions, TrackRecord, DEFAULT_DELTA,
};
use gkdv_core::soliton::{elliptic_residual, q_direction, q_profile, soliton_on_grid, Direction};
use gkdv_core::{Field, Frame, Grid};
use gkdv_lab::persist::{FUNCTIONALS_FILE, REPORT_FILE, TRACK_FILE};
use gkdv_lab::{report, run_scenario, Recipe, ScenarioConfig, ScenarioRun};

const L: f64 = 100.0;
const N: usize = 4096;
const DT: f64 = 2e-4;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn grid() -> Grid {
    Grid::new(L, N).unwrap()
}

fn sup_diff(a: &Field, b: &Field) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Least-squares slope of `log err` against `log k`.
fn fitted_order(ks: &[usize], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn elliptic() -> Outcome {
    let r = elliptic_residual(&grid());
    outcome(r < 1e-10, format!("sup|Q'' + Q^5 - Q| = {r:.3e}"))
}

fn operator_identities() -> Outcome {
    let g = grid();
    let q = q_profile(&g);
    let a = apply_l(&q_direction(&g, Direction::Qy)).sup_norm();
    let lq = apply_l(&q_direction(&g, Direction::LambdaQ));
    let b = lq.zip_map(&q, |x, y| x + 2.0 * y).unwrap().sup_norm();
    outcome(a < 1e-9 && b < 1e-8, format!("sup|L Q_y| = {a:.3e}, sup|L LambdaQ + 2Q| = {b:.3e}"))
}

fn ground_energy() -> Outcome {
    let e = energy(&q_profile(&grid())).abs();
    outcome(e < 1e-10, format!("|E(Q)| = {e:.3e}"))
}

fn propagation() -> Outcome {
    let g = grid();
    let series = evolve(&q_profile(&g), &EvolveConfig::new(DT, 1.0, 500), |_, _| {}).unwrap();
    let last = series.records.last().unwrap();
    let exact = soliton_on_grid(&g, Frame::new(1.0, last.t).unwrap()).unwrap();
    let err = sup_diff(&last.field, &exact);
    let d = series.drift;
    outcome(
        err < 1e-6 && d.max_rel_mass_drift < 1e-11 && d.max_rel_energy_drift < 1e-9,
        format!(
            "sup|u(1) - Q(x-1)| = {err:.3e}, mass drift = {:.3e}, energy drift = {:.3e}",
            d.max_rel_mass_drift, d.max_rel_energy_drift
        ),
    )
}

fn recovery() -> Outcome {
    let g = grid();
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let lambda = 0.5 + 0.125 * i as f64;
            let x = -10.0 + 5.0 * j as f64;
            let u = soliton_on_grid(&g, Frame::new(lambda, x).unwrap()).unwrap();
            let guess = Frame { lambda: 1.05 * lambda, x: x + 0.1 * lambda };
            let err = match decompose(&u, guess, NewtonOptions::default()) {
                Ok(d) if d.converged => (d.frame.lambda - lambda).abs().max((d.frame.x - x).abs()).max(l2(&d.eps)),
                _ => f64::INFINITY,
            };
            worst = worst.max(err);
        }
    }
    outcome(worst < 1e-9, format!("worst parameter or eps error over 25 frames = {worst:.3e}"))
}

fn orthogonality(run: &ScenarioRun) -> Outcome {
    let recs = &run.analysis.track.records;
    let conv: Vec<&TrackRecord> = recs.iter().filter(|r| r.converged).collect();
    let worst = conv.iter().map(|r| (r.rho1.abs() + r.rho2.abs()) / (1.0 + r.eps_l2)).fold(0.0, f64::max);
    outcome(
        !conv.is_empty() && worst < 1e-10,
        format!(
            "max (|rho1| + |rho2|) / (1 + |eps|) = {worst:.3e} over {}/{} converged snapshots",
            conv.len(),
            recs.len()
        ),
    )
}

fn mass_identity(run: &ScenarioRun) -> Outcome {
    let col = run.analysis.functionals.column("mass_identity").unwrap();
    let finite: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
    let worst = finite.iter().copied().fold(0.0, f64::max);
    let close = run.analysis.track.close_records().len();
    let worst_close = col[..close].iter().copied().fold(0.0, f64::max);
    outcome(
        finite.len() == col.len() && worst < 1e-8,
        format!(
            "max residual = {worst:.3e} over {}/{} snapshots ({worst_close:.3e} over the {close} delta-close ones)",
            finite.len(),
            col.len()
        ),
    )
}

/// Rates mismatch at common centers, with the stencil widened `k` records.
fn rates_mismatch(recs: &[TrackRecord], k: usize, window: (f64, f64)) -> (f64, f64) {
    let (mut ma, mut mb) = (0.0f64, 0.0f64);
    for i in (16..recs.len()).step_by(16) {
        if i + k >= recs.len() || recs[i].t < window.0 || recs[i].t > window.1 {
            continue;
        }
        let w = [&recs[i - k], &recs[i], &recs[i + k]];
        let s = [w[0].s, w[1].s, w[2].s];
        let da = centered_difference(s, [w[0].lambda.ln(), w[1].lambda.ln(), w[2].lambda.ln()]);
        let db = centered_difference(s, [w[0].x, w[1].x, w[2].x]) / w[1].lambda - 1.0;
        ma = ma.max((da - w[1].rate_a).abs());
        mb = mb.max((db - w[1].rate_b).abs());
    }
    (ma, mb)
}

fn rates(run: &ScenarioRun, fine: &ModulationTrack) -> Outcome {
    let t_final = fine.records.last().unwrap().t;
    let ks = [1, 2, 4, 8, 16];
    let (ea, eb): (Vec<f64>, Vec<f64>) =
        ks.iter().map(|&k| rates_mismatch(fine.close_records(), k, (0.1, t_final - 0.1))).unzip();
    let (pa, pb) = (fitted_order(&ks, &ea), fitted_order(&ks, &eb));
    let c = rates_envelope([&run.analysis.track, fine], 1e-8);
    let ok = |p: f64| (1.6..=2.5).contains(&p);
    outcome(
        ok(pa) && ok(pb) && c.is_finite() && !fine.departed(),
        format!(
            "order a = {pa:.2}, order b = {pb:.2} (mismatch a {:.2e}..{:.2e}, b {:.2e}..{:.2e}), envelope C = {c:.3}",
            ea[0], ea[4], eb[0], eb[4]
        ),
    )
}

fn subsample(series: &TimeSeries, k: usize) -> TimeSeries {
    let recs = series.records.iter().step_by(k).cloned().collect();
    TimeSeries::from_records(&series.grid, series.config, recs).unwrap()
}

/// Morawetz mismatch at the times shared by every subsampling level.
fn morawetz_levels(series: &TimeSeries, center: f64, ks: &[usize]) -> Vec<f64> {
    let common = *ks.last().unwrap();
    ks.iter()
        .map(|&k| {
            let check = morawetz_derivative_check(&subsample(series, k), WeightKind::Cutoff, 20.0, center).unwrap();
            let stride = common / k;
            check
                .times
                .iter()
                .enumerate()
                .filter(|(j, _)| (j + 1) % stride == 0)
                .map(|(j, _)| (check.finite_difference[j] - check.identity[j]).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

fn morawetz() -> Outcome {
    let series = evolve(&q_profile(&grid()), &EvolveConfig::new(DT, 0.5, 50), |_, _| {}).unwrap();
    let ks = [1, 2, 4, 8];
    let at_zero = morawetz_derivative_check(&series, WeightKind::Cutoff, 20.0, 0.0).unwrap().max_mismatch;
    let off = morawetz_levels(&series, -25.0, &ks);
    let order = fitted_order(&ks, &off);
    outcome(
        at_zero < 1e-5 && off[0] < 1e-5 && (1.6..=2.5).contains(&order),
        format!(
            "mismatch at center 0 = {at_zero:.3e}; center -25: {} (order {order:.2})",
            off.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn coercivity() -> Outcome {
    let est: Vec<_> = [512, 1024]
        .iter()
        .map(|&n| {
            let g = Grid::new(50.0, n).unwrap();
            coercivity_estimate(&g, &[q_profile(&g), q_direction(&g, Direction::YLambdaQ)]).unwrap()
        })
        .collect();
    let definite = est.iter().all(|e| e.sign != Definiteness::Indefinite && e.delta1() > 0.0);
    let diff = (est[0].extremal - est[1].extremal).abs();
    outcome(
        definite && diff < 1e-6,
        format!("delta1 = {:.10} ({:?}), |N=512 - N=1024| = {diff:.3e}", est[1].delta1(), est[1].sign),
    )
}

fn decay(run: &ScenarioRun) -> Outcome {
    let tails = &run.analysis.report.envelopes.tails;
    let worst = tails.iter().map(|t| t.max_ratio).fold(0.0, f64::max);
    let covered = tails.first().map(|t| t.offset) == Some(5.0) && tails.last().map(|t| t.offset) == Some(30.0);
    outcome(
        covered && worst.is_finite() && worst <= 1.0,
        format!(
            "max tail_mass / e^(-x0/6) = {worst:.3e} over x0 in {:?}",
            tails.iter().map(|t| t.offset).collect::<Vec<_>>()
        ),
    )
}

fn determinism(run: &ScenarioRun) -> Outcome {
    let files = [REPORT_FILE, TRACK_FILE, FUNCTIONALS_FILE];
    let read = || files.iter().map(|f| std::fs::read(run.dir.join(f)).unwrap()).collect::<Vec<_>>();
    let original = read();
    let first = report(&run.dir).unwrap();
    let after_first = read();
    let second = report(&run.dir).unwrap();
    let after_second = read();
    let same = first == run.analysis.report && second == first && after_first == original && after_second == original;
    outcome(same, format!("{} re-derived twice, byte-identical: {same}", files.join(", ")))
}

fn near_soliton_run(dir: &std::path::Path) -> ScenarioRun {
    let mut cfg = ScenarioConfig::new("near", Recipe::ScaledQ { a: 0.99 });
    cfg.grid.length = L;
    cfg.grid.n = N;
    cfg.evolve.t_final = 5.0;
    cfg.output = dir.join("near");
    run_scenario(&cfg).unwrap()
}

/// Finely sampled track on a doubled box, so radiation does not wrap back
/// through the soliton within the comparison window.
fn fine_track() -> ModulationTrack {
    let u0 = q_profile(&Grid::new(2.0 * L, 2 * N).unwrap()).scale(0.99);
    let series = evolve(&u0, &EvolveConfig::new(DT, 0.5, 5), |_, _| {}).unwrap();
    track(&series, Frame::IDENTITY, DEFAULT_DELTA)
}

type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Outcome + Send + 'a>);

fn main() -> ExitCode {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let results: Vec<(&str, Outcome, f64)> = std::thread::scope(|scope| {
        let near = scope.spawn(|| near_soliton_run(tmp.path()));
        let fine = scope.spawn(fine_track);
        let independent: Vec<Criterion> = vec![
            ("1 elliptic identity", Box::new(elliptic)),
            ("2 operator identities", Box::new(operator_identities)),
            ("3 ground-state energy", Box::new(ground_energy)),
            ("4 soliton propagation", Box::new(propagation)),
            ("5 decomposition recovery", Box::new(recovery)),
            ("9 Morawetz identity", Box::new(morawetz)),
            ("10 constrained coercivity", Box::new(coercivity)),
        ];
        let handles: Vec<_> = independent
            .into_iter()
            .map(|(name, f)| {
                scope.spawn(move || {
                    let t = Instant::now();
                    (name, f(), t.elapsed().as_secs_f64())
                })
            })
            .collect();
        let mut out: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        let run = near.join().unwrap();
        let fine = fine.join().unwrap();
        let dependent: Vec<Criterion> = vec![
            ("6 orthogonality along the flow", Box::new(|| orthogonality(&run))),
            ("7 mass identity", Box::new(|| mass_identity(&run))),
            ("8 modulation-rate consistency", Box::new(|| rates(&run, &fine))),
            ("11 decay envelope", Box::new(|| decay(&run))),
            ("12 determinism and round-trip", Box::new(|| determinism(&run))),
        ];
        for (name, f) in dependent {
            let t = Instant::now();
            out.push((name, f(), t.elapsed().as_secs_f64()));
        }
        out.sort_by_key(|(name, _, _)| name.split(' ').next().unwrap().parse::<u32>().unwrap());
        out
    });
    let mut failed = 0;
    for (name, o, secs) in &results {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {name}: {} [{secs:.1}s]", o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed in {:.0}s", results.len() - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
