use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use prppsm::io;
use prppsm::presets;
use prppsm::sim::{self, BerCurve, BerPoint, Scenario};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "prppsm",
    version,
    about = "Link-level BER simulator for phase-precoded spatial modulation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario file and write the BER curve as CSV + JSON sidecar
    Simulate {
        /// Scenario TOML, one scenario per file
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; the sidecar lands next to it as .json
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// SNR gap between two result CSVs at a target BER (curve a minus b)
    Gap {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Target BER, e.g. 1e-2
        #[arg(long)]
        ber: f64,
    },
    /// Run a bundled figure preset: fig2, fig5, fig6 or fig7
    Reproduce {
        preset: String,
        /// Directory for the result files
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().cmd {
        Cmd::Simulate {
            config,
            out,
            workers,
        } => simulate(&config, &out, workers),
        Cmd::Gap { a, b, ber } => gap(&a, &b, ber),
        Cmd::Reproduce {
            preset,
            out_dir,
            workers,
        } => reproduce(&preset, &out_dir, workers),
    }
}

fn load_scenario(path: &Path) -> anyhow::Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let scn: Scenario =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    scn.validate()
        .with_context(|| format!("validating {}", path.display()))?;
    Ok(scn)
}

fn point_line(pt: &BerPoint) -> String {
    format!(
        "  {:>7.2} dB  ber {:.3e}  ({} errors / {} bits, {} frames)",
        pt.snr_db, pt.ber, pt.bit_errors, pt.bits, pt.frames
    )
}

fn run_and_write(scn: &Scenario, out: &Path, workers: usize) -> anyhow::Result<BerCurve> {
    eprintln!(
        "{} / {} / {} bpcu, {} SNR points",
        scn.scheme,
        scn.detector.name,
        scn.bpcu(),
        scn.snr_db_list.len()
    );
    let curve = sim::run_sweep_with(scn, workers, |pt| eprintln!("{}", point_line(pt)))?;
    io::write_csv(out, &curve.points)?;
    io::write_sidecar(&io::sidecar_path(out), &curve)?;
    eprintln!(
        "wrote {} ({} points, {:.1}s)",
        out.display(),
        curve.points.len(),
        curve.elapsed_secs
    );
    Ok(curve)
}

fn simulate(config: &Path, out: &Path, workers: usize) -> anyhow::Result<()> {
    let scn = load_scenario(config)?;
    run_and_write(&scn, out, workers)?;
    Ok(())
}

fn gap(a: &Path, b: &Path, ber: f64) -> anyhow::Result<()> {
    let pa = io::read_csv(a)?;
    let pb = io::read_csv(b)?;
    let snr_a = sim::snr_at_ber(&pa, ber)?;
    let snr_b = sim::snr_at_ber(&pb, ber)?;
    println!("a: {} crosses {ber:e} at {snr_a:.3} dB", a.display());
    println!("b: {} crosses {ber:e} at {snr_b:.3} dB", b.display());
    println!("gap (a - b): {:.3} dB", snr_a - snr_b);
    Ok(())
}

fn reproduce(preset: &str, out_dir: &Path, workers: usize) -> anyhow::Result<()> {
    let Some(entries) = presets::preset(preset) else {
        bail!(
            "unknown preset {preset:?}; available: {}",
            presets::PRESET_NAMES.join(", ")
        );
    };
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let mut curves: Vec<(&str, BerCurve)> = Vec::new();
    for (label, scn) in &entries {
        let out = out_dir.join(format!("{preset}_{label}.csv"));
        eprintln!("== {preset}/{label} ==");
        curves.push((label, run_and_write(scn, &out, workers)?));
    }

    let find = |label: &str| curves.iter().find(|(l, _)| *l == label).map(|(_, c)| c);
    let print_gap = |worse: &str, better: &str, target: f64| {
        let (Some(a), Some(b)) = (find(worse), find(better)) else {
            return;
        };
        match sim::measure_gap(&a.points, &b.points, target) {
            Ok(g) => println!("{better} beats {worse} by {g:.2} dB at BER {target:e}"),
            Err(e) => println!("{worse} vs {better} at BER {target:e}: {e}"),
        }
    };

    match preset {
        "fig5" => {
            for p in ["prpp_sm_p2", "prpp_sm_p4", "prpp_sm_p5"] {
                print_gap("sm_nt4", p, 1e-2);
            }
        }
        "fig6" => {
            print_gap("prpp_8qam_p5", "prpp_sm_p5", 1e-2);
        }
        "fig7" => {
            print_gap("prpp_8qam_las_p10", "prpp_sm_lsd_p10", 1e-2);
            print_gap("prpp_8qam_las_p20", "prpp_sm_lsd_p20", 1e-2);
        }
        "fig2" => {
            print_gap("prpp_p1", "prpp_p50", 1e-2);
        }
        _ => {}
    }
    Ok(())
}
