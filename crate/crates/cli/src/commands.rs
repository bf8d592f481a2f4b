//! One function per subcommand; each returns the tables to write.

use rayon::prelude::*;
use xyrange::analysis::*;
use xyrange::eigensolve::{parity_ground_states, Solver};
use xyrange::entanglement::{e_sum, one_vs_rest_entanglement, profile, MIXED_CUT_MAX_SITES};
use xyrange::hamiltonian::DENSE_MAX_SITES;
use xyrange::states::{converge_truncation, ground_mixture, TruncationProtocol, DOUBLET_SPLIT_TOL};

use crate::config::RunConfig;
use crate::output::{Cell, Table};
use crate::CliError;

fn beta_scan(cfg: &RunConfig) -> BetaScan {
    BetaScan { eps: cfg.eps, ..BetaScan::default() }
}

fn product_options(cfg: &RunConfig) -> ProductOptions {
    ProductOptions { seed: cfg.seed, ..ProductOptions::default() }
}

fn tag(x: f64) -> String {
    format!("{x}")
}

/// `E_r` against `λ`, one table per `(Z, γ)`.
pub fn profile_cmd(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let lambdas = cfg.lambda_grid();
    let mut tables = Vec::new();
    for &g in &cfg.gamma {
        for &z in &cfg.z {
            let mut columns = vec!["lambda".to_string()];
            columns.extend((1..=cfg.n / 2).map(|r| format!("E_{r}")));
            let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
            let mut t = Table::new(format!("profile_z{z}_gamma{}", tag(g)), &cols);
            t.rows = lambdas
                .par_iter()
                .map(|&l| {
                    let (_, p) = ground_profile(&cfg.spec(z, g, l)?)?;
                    let mut row = vec![Cell::Num(l)];
                    row.extend(p.values.iter().map(|&v| Cell::Num(v)));
                    Ok(row)
                })
                .collect::<Result<_, CliError>>()?;
            tables.push(t);
        }
    }
    Ok(tables)
}

/// Predicted and observed factorization fields.
pub fn facpoint_cmd(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let mut t = Table::new("facpoint", &["z", "gamma", "predicted", "observed", "abs_diff", "min_total", "below_eps"]);
    let mut missing = 0;
    for &g in &cfg.gamma {
        for &z in &cfg.z {
            let spec = cfg.spec(z, g, 0.0)?;
            let predicted = predicted_factorization(&spec);
            let scan = LambdaScan::around(predicted, cfg.window, cfg.lambda_step)?;
            let row = match observed_factorization(&spec, &scan, cfg.eps) {
                Ok(o) => vec![
                    Cell::from(z),
                    Cell::from(g),
                    Cell::Fixed(predicted, 3),
                    Cell::Fixed(o.lambda, 2),
                    Cell::from((o.lambda - predicted).abs()),
                    Cell::from(o.min_total),
                    Cell::from(if o.below_eps { "yes" } else { "no" }),
                ],
                Err(xyrange::Error::NotFound(_)) => {
                    missing += 1;
                    vec![Cell::from(z), Cell::from(g), Cell::Fixed(predicted, 3), "none".into(), "".into(), "".into(), "no".into()]
                }
                Err(e) => return Err(e.into()),
            };
            t.rows.push(row);
        }
    }
    if missing > 0 {
        t.footer.push(format!("{missing} rows without an observed factorization point"));
    }
    Ok(vec![t])
}

/// Truncation used by `thermal`; `None` means the exact spectrum.
fn thermal_truncation(cfg: &RunConfig, g: f64, l: f64) -> Result<Option<usize>, CliError> {
    if cfg.m_protocol {
        let base = cfg.spec(cfg.z[0], g, l)?;
        let protocol = TruncationProtocol { scan: beta_scan(cfg), ..TruncationProtocol::default() };
        let report = converge_truncation(&base, &cfg.z, &protocol)?;
        return Ok(if report.exact { None } else { Some(report.m) });
    }
    if cfg.m.is_none() && cfg.n > DENSE_MAX_SITES {
        return Err(CliError::Config(format!("N = {} needs m or m_protocol = true", cfg.n)));
    }
    Ok(cfg.m)
}

/// `E_1(β)` per `Z`, optionally the witness, with a `β*` footer.
pub fn thermal_cmd(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let betas = cfg.beta_grid();
    let scan = beta_scan(cfg);
    let mut tables = Vec::new();
    for &g in &cfg.gamma {
        for l in cfg.fixed_lambdas()? {
            let m = thermal_truncation(cfg, g, l)?;
            let mut columns = vec!["beta".to_string()];
            columns.extend(cfg.z.iter().map(|z| format!("E_1_z{z}")));
            if cfg.witness {
                columns.extend(cfg.z.iter().map(|z| format!("W_z{z}")));
            }
            let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
            let mut t = Table::new(format!("thermal_gamma{}_lambda{}", tag(g), tag(l)), &cols);

            let mut e1 = Vec::new();
            let mut w = Vec::new();
            for &z in &cfg.z {
                let spec = cfg.spec(z, g, l)?;
                let ladder = thermal_ladder(&spec, m, &[1])?;
                e1.push(betas.par_iter().map(|&b| ladder.entanglement(b, 1)).collect::<xyrange::Result<Vec<f64>>>()?);
                if cfg.witness {
                    let ep = product_energy_min(&spec, &product_options(cfg))?.energy;
                    w.push(betas.iter().map(|&b| witness_on(&ladder, b, ep)).collect::<xyrange::Result<Vec<f64>>>()?);
                }
                let star = beta_star_on(&ladder, &scan)?;
                t.footer.push(match star {
                    Some(s) => format!("beta_star z={z} {}", crate::output::format_sig(s.beta, cfg.precision)?),
                    None => format!("beta_star z={z} none"),
                });
            }
            t.footer.push(match m {
                Some(m) => format!("truncation m = {m}"),
                None => "truncation exact".into(),
            });
            for (k, &b) in betas.iter().enumerate() {
                let mut row = vec![Cell::Num(b)];
                row.extend(e1.iter().map(|col| Cell::Num(col[k])));
                row.extend(w.iter().map(|col| Cell::Num(col[k])));
                t.rows.push(row);
            }
            tables.push(t);
        }
    }
    Ok(tables)
}

/// Entanglement length `ξ` against `Z` at fixed fields.
pub fn length_cmd(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let lambdas = cfg.fixed_lambdas()?;
    let mut tables = Vec::new();
    for &g in &cfg.gamma {
        let mut t = Table::new(format!("length_gamma{}", tag(g)), &["lambda", "z", "xi", "a", "b", "rms", "r_max", "status"]);
        let points: Vec<(f64, usize)> = lambdas.iter().flat_map(|&l| cfg.z.iter().map(move |&z| (l, z))).collect();
        t.rows = points
            .par_iter()
            .map(|&(l, z)| {
                let (_, p) = ground_profile(&cfg.spec(z, g, l)?)?;
                Ok(match entanglement_length(&p, cfg.eps).filter(|f| f.is_valid()) {
                    Some(f) => vec![
                        Cell::Num(l),
                        Cell::from(z),
                        Cell::Num(f.xi),
                        Cell::Num(f.a),
                        Cell::Num(f.b),
                        Cell::Num(f.rms),
                        Cell::from(f.r_max),
                        "ok".into(),
                    ],
                    None => vec![Cell::Num(l), Cell::from(z), "".into(), "".into(), "".into(), "".into(), "".into(), "undefined".into()],
                })
            })
            .collect::<Result<_, CliError>>()?;
        tables.push(t);
    }
    Ok(tables)
}

/// `E_sum` and the one-versus-rest negativity against `λ` per `Z`.
pub fn monogamy_cmd(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let lambdas = cfg.lambda_grid();
    let bound = cfg.n as f64 / 2.0 - 1.0;
    let mut tables = Vec::new();
    for &g in &cfg.gamma {
        let mut t = Table::new(format!("monogamy_gamma{}", tag(g)), &["z", "lambda", "e_sum", "bound", "one_vs_rest"]);
        for &z in &cfg.z {
            let rows: Vec<Vec<Cell>> = lambdas
                .par_iter()
                .map(|&l| {
                    let spec = cfg.spec(z, g, l)?;
                    let spectrum = parity_ground_states(&spec, Solver::default(), DOUBLET_SPLIT_TOL)?;
                    let state = ground_mixture(&spectrum)?;
                    let p = profile(&state)?;
                    let cut = if state.is_pure() || cfg.n <= MIXED_CUT_MAX_SITES {
                        Cell::Num(one_vs_rest_entanglement(&state)?)
                    } else {
                        "".into()
                    };
                    Ok(vec![Cell::from(z), Cell::Num(l), Cell::Num(e_sum(&p)), Cell::Num(bound), cut])
                })
                .collect::<Result<_, CliError>>()?;
            t.rows.extend(rows);
        }
        tables.push(t);
    }
    Ok(tables)
}

/// `β*(λ)` at `Z = N/2` per `γ`, with the plateaus it forms.
pub fn rigidity_cmd(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    if cfg.m.is_none() && cfg.n > DENSE_MAX_SITES {
        return Err(CliError::Config(format!("N = {} needs m", cfg.n)));
    }
    let lambdas = cfg.lambda_grid();
    let scan = beta_scan(cfg);
    let mut tables = Vec::new();
    for &g in &cfg.gamma {
        let spec = cfg.spec(cfg.n / 2, g, 0.0)?;
        let points = rigidity_scan(&spec, &lambdas, cfg.m, &scan)?;
        let mut curve = Table::new(format!("rigidity_gamma{}", tag(g)), &["lambda", "beta_star"]);
        for p in &points {
            curve.rows.push(vec![Cell::Num(p.lambda), p.beta_star.map_or_else(|| "".into(), Cell::Num)]);
        }
        let found = plateaus(&points, cfg.plateau_cell);
        let mut flat = Table::new(format!("plateaus_gamma{}", tag(g)), &["lambda_from", "lambda_to", "beta_star", "points"]);
        for p in &found {
            flat.rows.push(vec![Cell::Num(p.lambda_from), Cell::Num(p.lambda_to), Cell::Num(p.beta_star), Cell::from(p.points)]);
        }
        flat.footer.push(format!("{} plateaus at cell {}", found.len(), cfg.plateau_cell));
        tables.push(curve);
        tables.push(flat);
    }
    Ok(tables)
}

/// Product-state and exact ground energies at the predicted field.
pub fn table_one_cmd(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let mut t = Table::new("tableI", &["z", "gamma", "lambda_f", "e_product", "e_ground", "difference"]);
    for &g in &cfg.gamma {
        for &z in &cfg.z {
            let spec = cfg.spec(z, g, 0.0)?;
            let lf = predicted_factorization(&spec);
            let at = spec.with_field_ratio(lf)?;
            let ep = product_energy_min(&at, &product_options(cfg))?.energy;
            let e0 = parity_ground_states(&at, Solver::default(), 0.0)?.eigenvalues[0];
            t.rows.push(vec![Cell::from(z), Cell::from(g), Cell::Num(lf), Cell::Num(ep), Cell::Num(e0), Cell::Num(ep - e0)]);
        }
    }
    Ok(vec![t])
}
