use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use bakerlab::dynamics::{classify_grid, default_escape_radius, iterate, Grid, Rect};
use bakerlab::hfun::{eval_f, eval_g, eval_h};
use bakerlab::hyperbolic::{run_check, CheckKind};
use bakerlab::render::{render_escape_file, render_phase, Palette};
use bakerlab::verify::{obstruction_chain, sample_2a, sample_2b, verify_2a, verify_2b, verify_2c};
use bakerlab::{acceptance, ParamSeq, Profile};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

/// Evaluate, verify and render the entire function f(z) = z + exp(h(z)).
#[derive(Parser)]
#[command(name = "bakerlab", version)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, env = "BAKERLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Parameter file: {"r": [...], "n": [...]}.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Built-in profile: doubling, steep or paper2.
    #[arg(long)]
    profile: Option<Profile>,
}

impl Source {
    fn load(&self) -> Result<ParamSeq> {
        match (&self.params, self.profile) {
            (Some(path), _) => {
                ParamSeq::from_file(path).with_context(|| format!("loading {}", path.display()))
            }
            (None, Some(p)) => Ok(p.params()),
            (None, None) => unreachable!("clap enforces one source"),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a parameter sequence with its derived quantities.
    Params {
        #[command(flatten)]
        src: Source,
        /// Run the growth-condition gate instead.
        #[arg(long)]
        validate: bool,
    },
    /// Evaluate h and f (and optionally g) at a point.
    Eval {
        #[command(flatten)]
        src: Source,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        z: Complex64,
        /// Also evaluate g by quadrature.
        #[arg(long)]
        g: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Sampled hyperbolic-metric checks.
    Hyp {
        #[arg(long)]
        check: CheckKind,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Required: sampled checks never pick a seed implicitly.
        #[arg(long)]
        seed: u64,
    },
    /// Growth (2a), asymptotic (2b) and probe (2c) estimates at index k.
    Verify {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        check: VerifyCheck,
        #[arg(long)]
        k: usize,
        /// Circle samples for 2a/2b, probe cap for 2c.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        /// Write per-sample values here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Replay the obstruction inequality chain at index k.
    Obstruct {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        k: usize,
        /// Angle of z_k in turns, in [0, 1).
        #[arg(long)]
        t: f64,
        /// Omitted boundary point.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        c: Complex64,
        #[arg(long = "K-bound")]
        k_bound: f64,
        /// Write the link flags as name,value rows.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Iterate f from one starting point.
    Orbit {
        #[command(flatten)]
        src: Source,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        z: Complex64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Default: 4 r_K.
        #[arg(long)]
        escape_radius: Option<f64>,
    },
    /// Classify a rectangle of starting points into a binary grid file.
    Grid {
        #[command(flatten)]
        src: Source,
        #[arg(long, allow_hyphen_values = true)]
        rect: Rect,
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long)]
        escape_radius: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write PPM images.
    Render {
        #[command(subcommand)]
        what: RenderCmd,
    },
    /// Run the acceptance suite.
    Selftest,
}

#[derive(Subcommand)]
enum RenderCmd {
    /// Escape-time image of a grid file.
    Escape {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "classic")]
        palette: Palette,
    },
    /// Phase portrait of h.
    Phase {
        #[command(flatten)]
        src: Source,
        #[arg(long, allow_hyphen_values = true)]
        rect: Rect,
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyCheck {
    #[value(name = "2a")]
    Growth,
    #[value(name = "2b")]
    Asymptotic,
    #[value(name = "2c")]
    Probe,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected RE,IM, got `{s}`"))?;
    let part = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok(Complex64::new(part(re)?, part(im)?))
}

/// Outcome of a subcommand that ran to completion.
enum Verdict {
    Ok,
    Failed,
}

fn emit(v: &impl serde::Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{row}")?;
    }
    w.flush()?;
    Ok(())
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Ok
    } else {
        Verdict::Failed
    }
}

fn run(cmd: Cmd) -> Result<Verdict> {
    match cmd {
        Cmd::Params { src, validate } => {
            let p = src.load()?;
            if validate {
                let rep = p.validate();
                emit(&rep)?;
                return Ok(verdict(rep.overall));
            }
            emit(&json!({
                "r": p.radii(),
                "n": p.degrees(),
                "derived": p.derive(),
            }))?;
        }
        Cmd::Eval { src, z, g, tol } => {
            let p = src.load()?;
            let h = eval_h(z, &p);
            let f = eval_f(z, &p);
            let mut out = json!({ "z": z, "h": h, "f": f });
            if g {
                out["g"] = json!(eval_g(z, &p, tol)?);
            }
            emit(&out)?;
        }
        Cmd::Hyp {
            check,
            samples,
            seed,
        } => {
            let s = run_check(check, samples, seed)?;
            emit(&s)?;
            return Ok(verdict(s.ok()));
        }
        Cmd::Verify {
            src,
            check,
            k,
            samples,
            csv,
        } => {
            let p = src.load()?;
            match check {
                VerifyCheck::Growth => {
                    let rep = verify_2a(&p, k, samples)?;
                    if let Some(path) = &csv {
                        let rows = sample_2a(&p, k, samples)?;
                        write_csv(
                            path,
                            "t,ln_abs_h",
                            rows.iter().map(|(t, v)| format!("{t},{v}")),
                        )?;
                    }
                    emit(&rep)?;
                    return Ok(verdict(rep.pass));
                }
                VerifyCheck::Asymptotic => {
                    let rep = verify_2b(&p, k, samples)?;
                    if let Some(path) = &csv {
                        let rows = sample_2b(&p, k, samples)?;
                        write_csv(
                            path,
                            "t,rel_err",
                            rows.iter().map(|(t, v)| format!("{t},{v}")),
                        )?;
                    }
                    emit(&rep)?;
                }
                VerifyCheck::Probe => {
                    let rep = verify_2c(&p, k, samples)?;
                    if let Some(path) = &csv {
                        write_csv(
                            path,
                            "nu,re_h_at_b,log_t,ratio,p",
                            rep.entries.iter().map(|e| {
                                format!("{},{},{},{},{}", e.nu, e.re_h_at_b, e.log_t, e.ratio, e.p)
                            }),
                        )?;
                    }
                    emit(&rep)?;
                    return Ok(verdict(rep.holds));
                }
            }
        }
        Cmd::Obstruct {
            src,
            k,
            t,
            c,
            k_bound,
            csv,
        } => {
            let p = src.load()?;
            let rep = obstruction_chain(&p, k, t, c, k_bound)?;
            if let Some(path) = &csv {
                let flags = serde_json::to_value(rep.link_flags)?;
                let rows = flags
                    .as_object()
                    .expect("flags serialize as an object")
                    .iter()
                    .map(|(name, v)| format!("{name},{v}"))
                    .collect::<Vec<_>>();
                write_csv(path, "link,holds", rows)?;
            }
            emit(&rep)?;
        }
        Cmd::Orbit {
            src,
            z,
            steps,
            escape_radius,
        } => {
            let p = src.load()?;
            let er = escape_radius.unwrap_or_else(|| default_escape_radius(&p));
            emit(&iterate(z, &p, steps, er)?)?;
        }
        Cmd::Grid {
            src,
            rect,
            nx,
            ny,
            steps,
            escape_radius,
            out,
        } => {
            let p = src.load()?;
            let er = escape_radius.unwrap_or_else(|| default_escape_radius(&p));
            let grid = classify_grid(rect, nx, ny, &p, steps, er)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut w = BufWriter::new(file);
            grid.write_to(&mut w)?;
            w.flush()?;
            emit(&grid_summary(&grid, &out))?;
        }
        Cmd::Render { what } => match what {
            RenderCmd::Escape { grid, out, palette } => {
                let img = render_escape_file(&grid, palette)?;
                img.save_ppm(&out)?;
                emit(&json!({ "out": out, "width": img.width, "height": img.height }))?;
            }
            RenderCmd::Phase {
                src,
                rect,
                nx,
                ny,
                out,
            } => {
                let p = src.load()?;
                let img = render_phase(rect, nx, ny, &p)?;
                img.save_ppm(&out)?;
                emit(&json!({ "out": out, "width": img.width, "height": img.height }))?;
            }
        },
        Cmd::Selftest => {
            let mut all = true;
            acceptance::run_all(|r| {
                all &= r.pass;
                eprintln!("{}", r.line());
                if let Err(e) = emit(r) {
                    eprintln!("error: {e}");
                }
            });
            return Ok(verdict(all));
        }
    }
    Ok(Verdict::Ok)
}

fn grid_summary(g: &Grid, out: &Path) -> serde_json::Value {
    let escaped = g.cells.iter().filter(|c| c.escaped()).count();
    let translated = g.cells.iter().filter(|c| c.translated()).count();
    json!({
        "out": out,
        "nx": g.nx,
        "ny": g.ny,
        "cells": g.cells.len(),
        "escaped": escaped,
        "translated": translated,
        "bounded": g.cells.len() - escaped,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match cli.threads {
        Some(0) => Err(anyhow!("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Into::into),
        None => Ok(()),
    };
    let result = pool.and_then(|()| run(cli.cmd));
    match result {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
