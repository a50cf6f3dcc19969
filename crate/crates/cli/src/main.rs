use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mimetic_ll::analytic::generate_s_state;
use mimetic_ll::experiments::{
    film_setup, run_amr_comparison, run_convergence, run_neel_wall, run_nist4, write_snapshot, ExperimentKind,
    SimConfig,
};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "mimetic-ll", version, about = "Mimetic finite difference Landau-Lifshitz experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence study against the exact solution.
    Convergence(Common),
    /// Fourth standard problem: S-state, then switching under both fields.
    Nist4(Common),
    /// Relaxation of a two-domain film into a vortex.
    Neel(Common),
    /// Uniform versus locally refined meshes for the steady wall profile.
    Amr(Common),
    /// Only prepare the S-state of the fourth standard problem.
    Sstate(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory, overrides the configuration.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads. The engine is serial; values above 1 are ignored.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Random seed, overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<SimConfig> {
        let mut cfg = SimConfig::load(&self.config).with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(o) = &self.output {
            cfg.output.dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.threads > 1 {
            log::warn!("--threads {} ignored: runs are serial", self.threads);
        }
        std::fs::create_dir_all(&cfg.output.dir)
            .with_context(|| format!("creating {}", cfg.output.dir.display()))?;
        Ok(cfg)
    }
}

fn expect_kind(cfg: &SimConfig, allowed: &[ExperimentKind]) -> Result<()> {
    if !allowed.contains(&cfg.kind) {
        bail!("configuration kind {:?} does not fit this subcommand", cfg.kind);
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let start = Instant::now();
    match cli.command {
        Command::Convergence(c) => {
            let cfg = c.load()?;
            expect_kind(
                &cfg,
                &[
                    ExperimentKind::ConvergenceExplicit,
                    ExperimentKind::ConvergenceImplicit,
                    ExperimentKind::ConvergenceDirichlet,
                ],
            )?;
            let table = run_convergence(&cfg)?;
            let mut out = Vec::new();
            table.to_csv().write(&mut out)?;
            print!("{}", String::from_utf8_lossy(&out));
            let [a, b, f] = table.rates();
            println!("rates: linf {a:.3}, q {b:.3}, flux {f:.3}");
        }
        Command::Nist4(c) => {
            let cfg = c.load()?;
            expect_kind(&cfg, &[ExperimentKind::Nist4])?;
            for r in run_nist4(&cfg)? {
                println!(
                    "field {:?} {:?} step {:.3e} s: first <m_x> crossing {}",
                    r.field_mt,
                    r.theta,
                    r.step_seconds,
                    r.first_crossing_ns.map_or("none".to_string(), |t| format!("{t:.4} ns"))
                );
            }
        }
        Command::Neel(c) => {
            let cfg = c.load()?;
            expect_kind(&cfg, &[ExperimentKind::NeelWall])?;
            let run = run_neel_wall(&cfg)?;
            println!(
                "steps {}, settled {}, single vortex {}, max relative energy increase {:.3e}",
                run.records.len() - 1,
                run.settled,
                run.vortex.is_single_vortex(),
                run.max_energy_increase
            );
        }
        Command::Amr(c) => {
            let cfg = c.load()?;
            expect_kind(&cfg, &[ExperimentKind::AmrSteady])?;
            println!("{:>8} {:>7} {:>11} {:>11}", "mesh", "cells", "linf", "q");
            for r in run_amr_comparison(&cfg)? {
                let kind = if r.refined { "refined" } else { "uniform" };
                println!("{kind:>8} {:>7} {:>11.3e} {:>11.3e}", r.cells, r.linf, r.q);
            }
        }
        Command::Sstate(c) => {
            let cfg = c.load()?;
            expect_kind(&cfg, &[ExperimentKind::Nist4])?;
            let units = cfg.physical.context("missing [physical]")?;
            let nist = cfg.nist.clone().context("missing [nist]")?;
            let film = film_setup(&units, nist.grid, nist.kernel_cache.as_deref())?;
            let s = generate_s_state(
                &film.mesh,
                film.kernel.clone(),
                units.eta(),
                units.field_unit(),
                &nist.sstate,
                &cfg.inner_product,
                cfg.solver,
            )?;
            let path = cfg.output.dir.join("sstate.vtk");
            write_snapshot(&film.mesh, &s.m, &path)?;
            println!(
                "S-state: {} ramp + {} relaxation steps, settled {}, <m> = {:?}, written to {}",
                s.ramp_steps,
                s.relax_steps,
                s.settled,
                s.m.average(),
                path.display()
            );
        }
    }
    log::info!("finished in {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
