//! Parameter grids: comma-separated value lists, expanded as a cartesian
//! product in a fixed parameter order (first parameter outermost).

use std::str::FromStr;

use clap::{Args, ValueEnum};

use qnt_core::{hl, pnt, HlConfig, PntConfig, PrimalityConfig};

use crate::{
    csv_table, hl_config, pnt_config, witness_report, CliError, CliResult, Format, HlArgs, PntArgs,
};
use crate::{PrimalityReport, ResidualReport, Row, SCHEMA_VERSION};
use qnt_core::{HlReport, PntReport};

/// Largest number of rows a single sweep may expand to.
pub const MAX_ROWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Witness,
    Primality,
    STildeError,
    SPrimeError,
    Pnt,
    Hl,
}

/// Every list flag takes comma-separated values; an empty string gives an
/// empty grid. Row `i` runs with seed `seed + i`.
#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: SweepKind,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long = "two-n")]
    pub two_n: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub reps: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub nu: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn list<T: FromStr + Clone>(
    name: &str,
    raw: &Option<String>,
    default: Option<T>,
) -> CliResult<Vec<T>> {
    match raw {
        None => default
            .map(|d| vec![d])
            .ok_or_else(|| CliError::Config(format!("--{name} is required for this sweep"))),
        Some(text) if text.trim().is_empty() => Ok(Vec::new()),
        Some(text) => text
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|_| CliError::Config(format!("--{name}: cannot parse `{}`", v.trim())))
            })
            .collect(),
    }
}

/// Cartesian product of index ranges, last axis fastest.
fn grid(lens: &[usize]) -> CliResult<Vec<Vec<usize>>> {
    let total = lens
        .iter()
        .try_fold(1usize, |acc, &l| acc.checked_mul(l))
        .unwrap_or(usize::MAX);
    if total > MAX_ROWS {
        return Err(CliError::Config(format!(
            "sweep expands to {total} rows, limit is {MAX_ROWS}"
        )));
    }
    let mut out = Vec::with_capacity(total);
    for mut i in 0..total {
        let mut idx = vec![0; lens.len()];
        for (axis, &l) in lens.iter().enumerate().rev() {
            idx[axis] = i % l;
            i /= l;
        }
        out.push(idx);
    }
    Ok(out)
}

enum Plan {
    Witness(Vec<u64>),
    Primality(Vec<PrimalityConfig>),
    STilde(Vec<(usize, usize)>),
    SPrime(Vec<(usize, usize)>),
    Pnt(Vec<PntConfig>),
    Hl(Vec<HlConfig>),
}

fn plan(a: &SweepArgs, max_dim: usize) -> CliResult<Plan> {
    let seed_of = |i: usize| a.seed.wrapping_add(i as u64);
    Ok(match a.kind {
        SweepKind::Witness => {
            let ks = list::<u64>("k", &a.k, None)?;
            for &k in &ks {
                if k < 2 {
                    return Err(CliError::Config(format!("k must be at least 2, got {k}")));
                }
            }
            Plan::Witness(ks)
        }
        SweepKind::Primality => {
            let (ks, ps, rs) = (
                list("k", &a.k, None)?,
                list("p", &a.p, Some(8))?,
                list("r", &a.r, Some(1))?,
            );
            let configs = grid(&[ks.len(), ps.len(), rs.len()])?
                .iter()
                .enumerate()
                .map(|(i, ix)| PrimalityConfig {
                    max_dim,
                    ..PrimalityConfig::new(ks[ix[0]], ps[ix[1]], rs[ix[2]], seed_of(i))
                })
                .collect::<Vec<_>>();
            for c in &configs {
                c.validate()?;
            }
            Plan::Primality(configs)
        }
        SweepKind::STildeError | SweepKind::SPrimeError => {
            let (name, raw) = if a.kind == SweepKind::STildeError {
                ("n", &a.n)
            } else {
                ("two-n", &a.two_n)
            };
            let (ds, ps) = (
                list::<usize>(name, raw, None)?,
                list::<usize>("p", &a.p, Some(8))?,
            );
            let points: Vec<(usize, usize)> = grid(&[ds.len(), ps.len()])?
                .iter()
                .map(|ix| (ds[ix[0]], ps[ix[1]]))
                .collect();
            for &(d, p) in &points {
                // The residual runs on the oracle's own registers, without the outer loop.
                let cfg = if a.kind == SweepKind::STildeError {
                    PntConfig {
                        max_dim,
                        ..PntConfig::new(d, p, 2)
                    }
                    .validate()
                } else {
                    HlConfig {
                        max_dim,
                        ..HlConfig::new(d, p, 2)
                    }
                    .validate()
                };
                cfg?;
            }
            if a.kind == SweepKind::STildeError {
                Plan::STilde(points)
            } else {
                Plan::SPrime(points)
            }
        }
        SweepKind::Pnt => {
            let ns = list("n", &a.n, None)?;
            let ps = list("p", &a.p, Some(8))?;
            let qs = list("q", &a.q, Some(16))?;
            let reps = list("reps", &a.reps, Some(1))?;
            let deltas = list("delta", &a.delta, Some(0.5))?;
            let configs = grid(&[ns.len(), ps.len(), qs.len(), reps.len(), deltas.len()])?
                .iter()
                .enumerate()
                .map(|(i, ix)| {
                    let args = PntArgs {
                        n: ns[ix[0]],
                        p: ps[ix[1]],
                        q: qs[ix[2]],
                        reps: reps[ix[3]],
                        seed: seed_of(i),
                        delta: deltas[ix[4]],
                    };
                    pnt_config(&args, max_dim)
                })
                .collect::<Vec<_>>();
            for c in &configs {
                c.validate()?;
            }
            Plan::Pnt(configs)
        }
        SweepKind::Hl => {
            let ds = list("two-n", &a.two_n, None)?;
            let ps = list("p", &a.p, Some(8))?;
            let qs = list("q", &a.q, Some(16))?;
            let reps = list("reps", &a.reps, Some(1))?;
            let nus = list("nu", &a.nu, Some(0.1))?;
            let mus = list("mu", &a.mu, Some(2.0))?;
            let configs = grid(&[
                ds.len(),
                ps.len(),
                qs.len(),
                reps.len(),
                nus.len(),
                mus.len(),
            ])?
            .iter()
            .enumerate()
            .map(|(i, ix)| {
                let args = HlArgs {
                    two_n: ds[ix[0]],
                    p: ps[ix[1]],
                    q: qs[ix[2]],
                    reps: reps[ix[3]],
                    seed: seed_of(i),
                    nu: nus[ix[4]],
                    mu: mus[ix[5]],
                };
                hl_config(&args, max_dim)
            })
            .collect::<Vec<_>>();
            for c in &configs {
                c.validate()?;
            }
            Plan::Hl(configs)
        }
    })
}

fn table<T: Row>(rows: Vec<T>, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => csv_table(
            T::columns(),
            &rows.iter().map(Row::values).collect::<Vec<_>>(),
        ),
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Sweep<'a, T: serde::Serialize> {
                schema: u32,
                command: &'a str,
                rows: &'a [T],
            }
            let mut text = serde_json::to_string_pretty(&Sweep {
                schema: SCHEMA_VERSION,
                command: "sweep",
                rows: &rows,
            })
            .map_err(|e| CliError::Io(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
    }
}

/// Validates the whole grid, runs every row, then renders.
pub fn run(a: &SweepArgs, format: Format, max_dim: usize) -> CliResult<String> {
    match plan(a, max_dim)? {
        Plan::Witness(ks) => table(
            ks.into_iter()
                .map(witness_report)
                .collect::<CliResult<Vec<_>>>()?,
            format,
        ),
        Plan::Primality(cs) => table(
            cs.iter()
                .map(|c| crate::primality_report(c, None).map(|r| r.0))
                .collect::<CliResult<Vec<PrimalityReport>>>()?,
            format,
        ),
        Plan::STilde(points) => table(
            points
                .into_iter()
                .map(|(n, p)| {
                    Ok(ResidualReport {
                        domain: n,
                        p,
                        budget: pnt::s_tilde_error(n, p)?,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?,
            format,
        ),
        Plan::SPrime(points) => table(
            points
                .into_iter()
                .map(|(d, p)| {
                    Ok(ResidualReport {
                        domain: d,
                        p,
                        budget: hl::s_prime_error(d, p)?,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?,
            format,
        ),
        Plan::Pnt(cs) => table(
            cs.iter()
                .map(|c| Ok(pnt::run_pnt(c)?))
                .collect::<CliResult<Vec<PntReport>>>()?,
            format,
        ),
        Plan::Hl(cs) => table(
            cs.iter()
                .map(|c| Ok(hl::run_hl(c)?))
                .collect::<CliResult<Vec<HlReport>>>()?,
            format,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_order_is_last_axis_fastest() {
        assert_eq!(
            grid(&[2, 3]).unwrap()[..4],
            [vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0]]
        );
        assert!(grid(&[0, 3]).unwrap().is_empty());
        assert!(grid(&[MAX_ROWS, 2]).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(
            list::<usize>("p", &Some("8, 16,32".into()), None).unwrap(),
            vec![8, 16, 32]
        );
        assert!(list::<usize>("p", &Some(String::new()), None)
            .unwrap()
            .is_empty());
        assert_eq!(list::<usize>("p", &None, Some(4)).unwrap(), vec![4]);
        assert!(list::<usize>("p", &None, None).is_err());
        assert!(list::<usize>("p", &Some("8,x".into()), None).is_err());
    }
}
