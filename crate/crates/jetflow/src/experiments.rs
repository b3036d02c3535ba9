//! The five experiment kinds. Each produces tables; failures of individual
//! sweep points are recorded in a `status` column instead of aborting.

use jetflow_core::fock::{real_point, SampleSet};
use jetflow_core::hankel::{
    decay_rate_check, moment_matrix, moment_matrix_exact, smallest_eigenvalue_exact, MeasureSpec, RationalMatrix,
};
use jetflow_core::linalg::frobenius;
use jetflow_core::maps::MapExpr;
use jetflow_core::pushforward::{estimate_pushforward, gamma_check, oracle_generator, oracle_pushforward, theorem_rate};
use jetflow_core::reconstruct::{lsq_equivalence_check, reconstruct_eval};
use jetflow_core::sampling::draw_samples;
use jetflow_core::vectorfield::{bound_b, estimate_generator, flow_map, reconstruct_field};
use jetflow_core::Error;
use num_complex::Complex64;

use crate::config::{shift_measure, Kind, Plan, SamplingPlan};
use crate::output::{fmt_f64, Table};

/// Result of running a plan, before anything touches the file system.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// Extra text artifacts as `(file name, contents)`.
    pub attachments: Vec<(String, String)>,
    pub failed_rows: usize,
}

const OK: &str = "ok";

fn status_of(e: &Error) -> String {
    format!("error: {e}")
}

fn nan_row(prefix: Vec<String>, width: usize, status: String) -> Vec<String> {
    let mut row = prefix;
    while row.len() + 1 < width {
        row.push(fmt_f64(f64::NAN));
    }
    row.push(status);
    row
}

pub fn run(plan: &Plan) -> Outcome {
    match plan.kind {
        Kind::PushforwardConvergence => pushforward_convergence(plan),
        Kind::MapReconstruction => map_reconstruction(plan),
        Kind::LsqEquivalence => lsq_equivalence(plan),
        Kind::HankelRates => hankel_rates(plan),
        Kind::VectorfieldRecovery => vectorfield_recovery(plan),
    }
}

fn draw(plan: &SamplingPlan) -> Result<Vec<Vec<f64>>, Error> {
    draw_samples(&plan.measure, plan.count, plan.scheme, plan.seed)
}

/// Points of a tensor grid over `Π [c_i - r_i, c_i + r_i]`.
pub fn evaluation_grid(center: &[f64], radii: &[f64], per_axis: usize) -> Vec<Vec<f64>> {
    let d = center.len();
    let total = per_axis.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|axis| {
                    let i = idx % per_axis;
                    idx /= per_axis;
                    if per_axis == 1 {
                        center[axis]
                    } else {
                        center[axis] - radii[axis] + 2.0 * radii[axis] * i as f64 / (per_axis - 1) as f64
                    }
                })
                .collect()
        })
        .collect()
}

fn failed_outcome(tables: Vec<Table>, failed_rows: usize) -> Outcome {
    Outcome { tables, attachments: Vec::new(), failed_rows }
}

fn count_failures(tables: &[Table]) -> usize {
    tables
        .iter()
        .map(|t| match t.column("status") {
            Some(c) => t.rows.iter().filter(|r| r[c] != OK).count(),
            None => 0,
        })
        .sum()
}

fn pushforward_convergence(plan: &Plan) -> Outcome {
    let header = [
        "n",
        "m",
        "n_samples",
        "frobenius_error",
        "rank",
        "smallest_kept_sv",
        "lambda_n",
        "gamma",
        "theorem_rate",
        "status",
    ];
    let mut table = Table::new("convergence.csv", &header);
    let sampling = plan.sampling.as_ref().expect("validated");
    let f = plan.map.as_ref().expect("validated");
    let p = &plan.base_point;
    let drawn = draw(sampling);
    let n_samples = drawn.as_ref().map_or(sampling.count, Vec::len).to_string();
    let prefix = |n: usize| vec![n.to_string(), plan.m.to_string(), n_samples.clone()];
    let setup = (|| {
        let points = drawn?;
        let samples = SampleSet::from_map(f, &points)?;
        let q = f.eval(&real_point(p))?;
        let oracle = oracle_pushforward(f, p, plan.m)?;
        Ok::<_, Error>((points, samples, q, oracle))
    })();
    let (points, samples, q, oracle) = match setup {
        Ok(s) => s,
        Err(e) => {
            for &n in &plan.n_values {
                table.push(nan_row(prefix(n), header.len(), status_of(&e)));
            }
            return failed_outcome(vec![table], plan.n_values.len());
        }
    };
    let offset_measure = shift_measure(&sampling.measure, p);
    let offsets = shift_measure(&MeasureSpec::Empirical { points }, p);
    for &n in &plan.n_values {
        let row = match estimate_pushforward(p, &q, plan.m, n, &samples) {
            Ok(est) => {
                let error = frobenius(&(&est.c_hat - &oracle.c));
                let lambda = moment_matrix_exact(&offset_measure, n)
                    .and_then(|d| smallest_eigenvalue_exact(&d, plan.precision_bits))
                    .map(|s| s.value())
                    .unwrap_or(f64::NAN);
                let gamma = moment_matrix(&offset_measure, n)
                    .and_then(|d_mu| moment_matrix(&offsets, n).and_then(|d_hat| gamma_check(&d_mu, &d_hat)))
                    .map(|g| 1.0 - g)
                    .unwrap_or(f64::NAN);
                let rate = match plan.r_mu {
                    Some(r_mu) if gamma > 0.0 && lambda > 0.0 => theorem_rate(plan.m, n, r_mu, lambda, gamma),
                    _ => f64::NAN,
                };
                let mut row = prefix(n);
                row.extend([
                    fmt_f64(error),
                    est.rank.to_string(),
                    fmt_f64(est.smallest_kept_sv),
                    fmt_f64(lambda),
                    fmt_f64(gamma),
                    fmt_f64(rate),
                    OK.into(),
                ]);
                row
            }
            Err(e) => nan_row(prefix(n), header.len(), status_of(&e)),
        };
        table.push(row);
    }
    let failed_rows = count_failures(std::slice::from_ref(&table));
    Outcome { tables: vec![table], attachments: Vec::new(), failed_rows }
}

/// Largest absolute error over the grid, plus per-point rows for plotting.
fn grid_errors(
    grid: &[Vec<f64>],
    mut estimate: impl FnMut(&[Complex64]) -> Result<Vec<Complex64>, Error>,
    exact: &MapExpr,
    points: Option<&mut Table>,
) -> Result<f64, Error> {
    let mut sup: f64 = 0.0;
    let mut rows = Vec::new();
    for x in grid {
        let z = real_point(x);
        let got = estimate(&z)?;
        let want = exact.eval(&z)?;
        for (k, (a, b)) in got.iter().zip(&want).enumerate() {
            let err = (a - b).norm();
            sup = sup.max(err);
            let mut row: Vec<String> = x.iter().map(|&v| fmt_f64(v)).collect();
            row.extend([
                (k + 1).to_string(),
                fmt_f64(a.re),
                fmt_f64(a.im),
                fmt_f64(b.re),
                fmt_f64(b.im),
                fmt_f64(err),
            ]);
            rows.push(row);
        }
    }
    if let Some(t) = points {
        t.rows = rows;
    }
    Ok(sup)
}

fn points_table(d: usize) -> Table {
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.extend(["component", "estimate_re", "estimate_im", "exact_re", "exact_im", "abs_error"].map(String::from));
    Table { file_name: "points.csv".into(), header, rows: Vec::new() }
}

fn map_reconstruction(plan: &Plan) -> Outcome {
    let header = ["m", "n", "n_samples", "sup_error", "status"];
    let mut table = Table::new("reconstruction.csv", &header);
    let mut points = points_table(plan.d);
    let sampling = plan.sampling.as_ref().expect("validated");
    let eval = plan.evaluation.as_ref().expect("validated");
    let f = plan.map.as_ref().expect("validated");
    let p = &plan.base_point;
    let drawn = draw(sampling);
    let n_samples = drawn.as_ref().map_or(sampling.count, Vec::len).to_string();
    let prefix = |n: usize| vec![plan.m.to_string(), n.to_string(), n_samples.clone()];
    let grid = evaluation_grid(p, &eval.radii, eval.points_per_axis);
    let setup = (|| {
        let pts = drawn?;
        let samples = SampleSet::from_map(f, &pts)?;
        let q = f.eval(&real_point(p))?;
        Ok::<_, Error>((samples, q))
    })();
    let (samples, q) = match setup {
        Ok(s) => s,
        Err(e) => {
            for &n in &plan.n_values {
                table.push(nan_row(prefix(n), header.len(), status_of(&e)));
            }
            return failed_outcome(vec![table, points], plan.n_values.len());
        }
    };
    let last = plan.n_values.last().copied();
    for &n in &plan.n_values {
        let result = estimate_pushforward(p, &q, plan.m, n, &samples).and_then(|est| {
            let target = if Some(n) == last { Some(&mut points) } else { None };
            grid_errors(&grid, |z| reconstruct_eval(&est.c_hat, p, &q, plan.m, z), f, target)
        });
        let row = match result {
            Ok(sup) => {
                let mut row = prefix(n);
                row.extend([fmt_f64(sup), OK.into()]);
                row
            }
            Err(e) => nan_row(prefix(n), header.len(), status_of(&e)),
        };
        table.push(row);
    }
    let tables = vec![table, points];
    let failed_rows = count_failures(&tables);
    Outcome { tables, attachments: Vec::new(), failed_rows }
}

fn lsq_equivalence(plan: &Plan) -> Outcome {
    let header = ["m", "n", "n_samples", "discrepancy", "status"];
    let mut table = Table::new("equivalence.csv", &header);
    let sampling = plan.sampling.as_ref().expect("validated");
    let g = plan.map.as_ref().expect("validated");
    let points = draw(sampling);
    let n_samples = points.as_ref().map_or(sampling.count, Vec::len).to_string();
    let prefix = |n: usize| vec![plan.m.to_string(), n.to_string(), n_samples.clone()];
    let at_origin = plan.base_point.iter().all(|&x| x == 0.0);
    for &n in &plan.n_values {
        let row = if !at_origin {
            nan_row(prefix(n), header.len(), "skipped: the equivalence is stated at the origin".into())
        } else {
            match points.as_ref().map_err(Clone::clone).and_then(|x| lsq_equivalence_check(g, x, plan.m, n)) {
                Ok(value) => {
                    let mut row = prefix(n);
                    row.extend([fmt_f64(value), OK.into()]);
                    row
                }
                Err(e) => nan_row(prefix(n), header.len(), status_of(&e)),
            }
        };
        table.push(row);
    }
    let failed_rows = count_failures(std::slice::from_ref(&table));
    Outcome { tables: vec![table], attachments: Vec::new(), failed_rows }
}

fn hankel_rates(plan: &Plan) -> Outcome {
    let header = ["n", "lambda_n", "rate", "sigma_target", "deviation", "certified", "status"];
    let mut table = Table::new("rates.csv", &header);
    let h = plan.hankel.as_ref().expect("validated");
    let mut attachments = Vec::new();
    match decay_rate_check(h.center, h.radius, h.n_max, plan.precision_bits) {
        Ok(points) => {
            for pt in points {
                table.push(vec![
                    pt.n.to_string(),
                    format!("{:.17}", pt.spectrum.lambda),
                    fmt_f64(pt.rate),
                    fmt_f64(pt.target),
                    fmt_f64(pt.rate - pt.target),
                    pt.spectrum.certified.to_string(),
                    if pt.spectrum.certified { OK.into() } else { "error: bracket did not converge".into() },
                ]);
            }
        }
        Err(e) => {
            for n in 0..=h.n_max {
                table.push(nan_row(vec![n.to_string()], header.len(), status_of(&e)));
            }
        }
    }
    if h.emit_rational {
        let lebesgue = MeasureSpec::lebesgue_box(vec![h.center], vec![h.radius]);
        if let Ok(m) = moment_matrix_exact(&lebesgue, h.n_max) {
            attachments.push((format!("moments_n{}.txt", h.n_max), rational_text(&m)));
        }
    }
    let failed_rows = count_failures(std::slice::from_ref(&table));
    Outcome { tables: vec![table], attachments, failed_rows }
}

fn rational_text(m: &RationalMatrix) -> String {
    let mut buf = Vec::new();
    crate::output::write_rational_matrix(&mut buf, m).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8")
}

fn vectorfield_recovery(plan: &Plan) -> Outcome {
    let header = [
        "m",
        "n",
        "n_samples",
        "T",
        "sup_error",
        "generator_error",
        "log_residual",
        "bound_b",
        "status",
    ];
    let mut table = Table::new("recovery.csv", &header);
    let mut points = points_table(plan.d);
    let sampling = plan.sampling.as_ref().expect("validated");
    let eval = plan.evaluation.as_ref().expect("validated");
    let flow = plan.flow.as_ref().expect("validated");
    let field = plan.map.as_ref().expect("validated");
    let p = &plan.base_point;
    let drawn = draw(sampling);
    let n_samples = drawn.as_ref().map_or(sampling.count, Vec::len).to_string();
    let prefix = |n: usize| vec![plan.m.to_string(), n.to_string(), n_samples.clone(), fmt_f64(flow.t)];
    let grid = evaluation_grid(p, &eval.radii, eval.points_per_axis);
    let setup = (|| {
        let z = drawn?;
        let images = z
            .iter()
            .map(|x| flow_map(field, flow.t, x, flow.tol).map(|y| real_point(&y)))
            .collect::<Result<Vec<_>, _>>()?;
        let samples = SampleSet::new(z.iter().map(|x| real_point(x)).collect(), images)?;
        let exact = oracle_generator(field, p, plan.m)?;
        Ok::<_, Error>((samples, exact))
    })();
    let (samples, exact) = match setup {
        Ok(s) => s,
        Err(e) => {
            for &n in &plan.n_values {
                table.push(nan_row(prefix(n), header.len(), status_of(&e)));
            }
            return failed_outcome(vec![table, points], plan.n_values.len());
        }
    };
    let q = real_point(p);
    let last = plan.n_values.last().copied();
    for &n in &plan.n_values {
        let result = (|| {
            let est = estimate_pushforward(p, &q, plan.m, n, &samples)?;
            let b = bound_b(&est.c_hat, 101);
            let generator = estimate_generator(&est, flow.t)?;
            let generator_error = frobenius(&(&generator.a_hat - &exact));
            let target = if Some(n) == last { Some(&mut points) } else { None };
            let sup = grid_errors(&grid, |z| reconstruct_field(&generator, p, z), field, target)?;
            Ok::<_, Error>((sup, generator_error, generator.log_residual, b))
        })();
        let row = match result {
            Ok((sup, gen_err, residual, b)) => {
                let mut row = prefix(n);
                row.extend([fmt_f64(sup), fmt_f64(gen_err), fmt_f64(residual), fmt_f64(b), OK.into()]);
                row
            }
            Err(e) => nan_row(prefix(n), header.len(), status_of(&e)),
        };
        table.push(row);
    }
    let tables = vec![table, points];
    let failed_rows = count_failures(&tables);
    Outcome { tables, attachments: Vec::new(), failed_rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Config;

    const GRID_RUN: &str = r#"
kind = "map-reconstruction"
d = 2
r = 1
map = "z1 + 0.5*z2^2"
base_point = [0.0, 0.0]

[domain]
kind = "box"
radii = [1.0, 1.0]

[orders]
m = 2
n = 3

[sampling]
scheme = "grid"
n_samples = 1000
support_radii = [0.5, 0.5]
seed = 0

[evaluation]
radii = [0.3, 0.3]
points_per_axis = 5
"#;

    #[test]
    fn grid_runs_report_the_drawn_count() {
        let plan = Config::from_toml(GRID_RUN).unwrap().validate().unwrap();
        let outcome = run(&plan);
        assert_eq!(outcome.failed_rows, 0);
        let table = &outcome.tables[0];
        let col = table.column("n_samples").unwrap();
        assert_eq!(table.rows[0][col], "961");
        assert_eq!(outcome.tables[1].rows.len(), 25);
    }

    #[test]
    fn evaluation_grid_spans_the_box() {
        let g = evaluation_grid(&[1.0], &[0.5], 3);
        assert_eq!(g, vec![vec![0.5], vec![1.0], vec![1.5]]);
        assert_eq!(evaluation_grid(&[0.0, 0.0], &[1.0, 1.0], 1), vec![vec![0.0, 0.0]]);
    }
}
