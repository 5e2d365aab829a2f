mod config;
mod dsl;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use flagcalc_core::decompose::{commutator_expansion, diagonal_expansion};
use flagcalc_core::flagop::eval_flag_recursive;
use flagcalc_core::spectral::random_band_limited;
use flagcalc_core::verify::lemma_bounds_sweep;
use flagcalc_core::{Error, Exponent, ExponentTuple, GridFunction, GridSpec, Result};

#[derive(Parser)]
#[command(name = "flagcalc", about = "Pseudo-spectral calculator for flag Leibniz rules")]
struct Cli {
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid sizes, comma separated (powers of two).
    #[arg(long, global = true, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Emit LaTeX instead of plain text where applicable.
    #[arg(long, global = true)]
    latex: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the right-hand-side terms of the Leibniz rule for a tree.
    Terms {
        expr: String,
        #[arg(long, default_value_t = 1)]
        n_params: usize,
        /// Uniform Lebesgue exponent for every leaf ("inf" allowed).
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// Check the exponent constraints for a tree.
    Check {
        expr: String,
        #[arg(long, default_value_t = 1)]
        n_params: usize,
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// Evaluate a tree operator on random band-limited inputs.
    Eval {
        expr: String,
        #[arg(long, default_value_t = 1)]
        n_params: usize,
        #[arg(long, default_value_t = 3.0)]
        sigma: f64,
    },
    /// Run an experiment described by a JSON config.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fourier-coefficient decay of localized symbols.
    Decay {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        ell: i64,
        #[arg(long, default_value_t = 512)]
        truncation: usize,
        /// Expand the 2-d localized commutator symbol instead of the
        /// diagonal symbol.
        #[arg(long)]
        commutator: bool,
        /// Use the negative-frequency branch of the commutator symbol.
        #[arg(long)]
        negative: bool,
    },
    /// Empirical constants for the four fixed-scale estimates.
    Lemma {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        p1: f64,
        #[arg(long, default_value_t = 2.0)]
        p2: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConstraintFail(_) => 2,
        Error::BudgetExceeded(_) => 3,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Terms { expr, n_params, p } => {
            let tree = dsl::parse_tree(expr, *n_params)?;
            let exps = uniform(&tree, p)?;
            for term in tree.rhs_terms(&exps)? {
                if cli.latex {
                    println!("{}", term.latex());
                } else {
                    println!("{}", term.text());
                }
            }
            Ok(())
        }
        Cmd::Check { expr, n_params, p } => {
            let tree = dsl::parse_tree(expr, *n_params)?;
            println!("tree: {}", dsl::print_tree(&tree));
            let exps = uniform(&tree, p)?;
            let verdict = tree.check_exponents(&exps)?;
            for c in &verdict.constraints {
                println!(
                    "vertex {} param {}: exponent {} {} bound {}",
                    c.vertex,
                    c.param,
                    c.exponent,
                    if c.satisfied { ">" } else { "≤" },
                    c.bound
                );
            }
            if verdict.pass {
                println!("PASS");
                Ok(())
            } else {
                Err(Error::ConstraintFail(verdict.violations().len()))
            }
        }
        Cmd::Eval {
            expr,
            n_params,
            sigma,
        } => {
            let tree = dsl::parse_tree(expr, *n_params)?;
            let sizes = cli.grid.clone().unwrap_or_else(|| vec![32; *n_params]);
            let spec = GridSpec::new(sizes)?;
            let seed = cli.seed.unwrap_or(0);
            let fns: Vec<GridFunction> = (0..tree.n_leaves())
                .map(|l| random_band_limited(&spec, seed.wrapping_add(l as u64), *sigma, true))
                .collect();
            let refs: Vec<&GridFunction> = fns.iter().collect();
            let out = eval_flag_recursive(&tree, &refs)?;
            println!("l2 norm: {:.12e}", out.l2_norm());
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir)?;
                let mut file = std::fs::File::create(dir.join("eval.bin"))?;
                out.write_dump(&mut file)?;
                println!("wrote {}", dir.join("eval.bin").display());
            }
            Ok(())
        }
        Cmd::Verify { config: path } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            config::run_config(
                path,
                &out,
                &config::Overrides {
                    seed: cli.seed,
                    grid: cli.grid.clone(),
                },
            )
        }
        Cmd::Decay {
            alpha,
            ell,
            truncation,
            commutator,
            negative,
        } => {
            let exp = if *commutator {
                commutator_expansion(*alpha, *ell, !*negative, *truncation)?
            } else {
                diagonal_expansion(*alpha, *ell, *truncation)?
            };
            println!("residual: {:.6e}", exp.residual);
            match exp.decay_exponent {
                Some(d) => println!("decay exponent: {d:.4}"),
                None => println!("decay exponent: n/a"),
            }
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir)?;
                let mut w = Vec::new();
                exp.write_csv(&mut w)?;
                std::fs::write(dir.join("coeffs.csv"), w)?;
                println!("wrote {}", dir.join("coeffs.csv").display());
            }
            Ok(())
        }
        Cmd::Lemma {
            alpha,
            p1,
            p2,
            trials,
        } => {
            let sizes = cli.grid.clone().unwrap_or_else(|| vec![32]);
            let spec = GridSpec::new(sizes)?;
            let report = lemma_bounds_sweep(*alpha, *p1, *p2, &spec, *trials, cli.seed.unwrap_or(0))?;
            println!(
                "product {:.6}\ncommutator {:.6}\nwhitney {:.6}\ndiag {:.6}",
                report.product, report.commutator, report.whitney, report.diag
            );
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir)?;
                let mut w = Vec::new();
                report.write_csv(&mut w)?;
                std::fs::write(dir.join("lemma.csv"), w)?;
            }
            Ok(())
        }
    }
}

fn uniform(tree: &flagcalc_core::FlagTree, p: &str) -> Result<ExponentTuple> {
    ExponentTuple::uniform(tree.n_leaves(), tree.n_params(), Exponent::parse(p)?)
}
