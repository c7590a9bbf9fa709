//! The four experiments. Each returns its CSV artifact and a plain-text
//! table; nothing here touches the filesystem.

use std::fmt::Write as _;

use anyhow::Result;
use ia_core::config::RunConfig;
use ia_core::protocols::slots_required;
use ia_core::sim::{total_delay, DelayReport, Simulator};

use crate::args::Command;

pub const DELAY_HEADER: &str = "scheme,n_slots,t_sig_us,t_per_us,delay_ms";
pub const SWEEP_DISTANCE_HEADER: &str = "scheme,inner_m,outer_m,trials,misdetections,pmd,ci95";
pub const SWEEP_TSIG_HEADER: &str = "scheme,t_sig_us,tau_eff_db,pmd,ci95";
pub const MIN_TSIG_HEADER: &str =
    "scheme,n_slots,distance_m,target_pmd,min_t_sig_us,total_delay_ms";

/// Written in the min-tsig CSV when no grid duration meets the target.
pub const CAP_SENTINEL: &str = ">cap";

#[derive(Debug, Clone)]
pub struct Artifact {
    pub file_name: String,
    pub contents: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub table: String,
    pub artifacts: Vec<Artifact>,
}

pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Report> {
    match command {
        Command::DelayTable => delay_table(cfg),
        Command::SweepDistance { .. } => sweep_distance(cfg),
        Command::SweepTsig { .. } => sweep_tsig(cfg),
        Command::MinTsig { .. } => min_tsig(cfg),
    }
}

/// Fixed-point with trailing zeros trimmed: `num(16.0, 3) == "16"`.
pub fn num(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return if x > 0.0 { "inf".into() } else if x < 0.0 { "-inf".into() } else { "nan".into() };
    }
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn csv_bytes(header: &str, rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header.split(','))?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(w.into_inner().map_err(|e| anyhow::anyhow!(e.to_string()))?)
}

fn render(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  "));
    };
    line(header.to_vec(), &mut out);
    for r in rows {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

fn simulator(cfg: &RunConfig) -> Result<Simulator> {
    Ok(Simulator::new(cfg.sim.clone(), cfg.channel.clone())?)
}

pub fn delay_table(cfg: &RunConfig) -> Result<Report> {
    let mut rows = Vec::new();
    for s in &cfg.schemes {
        let r = DelayReport::new(s, cfg.sim.t_sig_s, cfg.sim.overhead)?;
        rows.push(vec![
            r.scheme,
            r.n_slots.to_string(),
            num(r.t_sig_s * 1e6, 3),
            num(r.t_per_s * 1e6, 3),
            num(r.delay_s * 1e3, 6),
        ]);
    }
    let table = render(&["scheme", "slots", "T_sig [us]", "T_per [us]", "delay [ms]"], &rows);
    Ok(Report {
        command: "delay-table",
        table,
        artifacts: vec![Artifact {
            file_name: "delay-table.csv".into(),
            contents: csv_bytes(DELAY_HEADER, &rows)?,
        }],
    })
}

pub fn sweep_distance(cfg: &RunConfig) -> Result<Report> {
    let curves = simulator(cfg)?.pmd_sweep_many(&cfg.schemes)?;
    let mut rows = Vec::new();
    for (s, curve) in cfg.schemes.iter().zip(&curves) {
        for e in curve {
            rows.push(vec![
                s.label(),
                num(e.bin.inner_m, 3),
                num(e.bin.outer_m, 3),
                e.trials.to_string(),
                e.misdetections.to_string(),
                e.pmd.to_string(),
                num(e.ci95_halfwidth, 6),
            ]);
        }
    }
    let table = render(&["scheme", "inner", "outer", "trials", "missed", "PMD", "ci95"], &rows);
    Ok(Report {
        command: "sweep-distance",
        table,
        artifacts: vec![Artifact {
            file_name: "sweep-distance.csv".into(),
            contents: csv_bytes(SWEEP_DISTANCE_HEADER, &rows)?,
        }],
    })
}

pub fn sweep_tsig(cfg: &RunConfig) -> Result<Report> {
    let e = &cfg.experiments;
    let curves = simulator(cfg)?.tsig_sweep(&cfg.schemes, e.edge_distance_m, e.t_sig_cap_s)?;
    let mut rows = Vec::new();
    for (s, curve) in cfg.schemes.iter().zip(&curves) {
        for p in curve {
            rows.push(vec![
                s.label(),
                num(p.t_sig_s * 1e6, 3),
                num(p.tau_eff_db, 4),
                p.pmd.to_string(),
                num(p.ci95_halfwidth, 6),
            ]);
        }
    }
    let table = render(&["scheme", "T_sig [us]", "tau_eff [dB]", "PMD", "ci95"], &rows);
    Ok(Report {
        command: "sweep-tsig",
        table,
        artifacts: vec![Artifact {
            file_name: "sweep-tsig.csv".into(),
            contents: csv_bytes(SWEEP_TSIG_HEADER, &rows)?,
        }],
    })
}

pub fn min_tsig(cfg: &RunConfig) -> Result<Report> {
    let e = &cfg.experiments;
    let mins = simulator(cfg)?.min_tsig_many(&cfg.schemes, e.edge_distance_m, e.target_pmd, e.t_sig_cap_s)?;
    let mut rows = Vec::new();
    let mut shown = Vec::new();
    for (s, &t) in cfg.schemes.iter().zip(&mins) {
        let n = slots_required(s);
        let total = total_delay(n, t, cfg.sim.overhead)?;
        let t_cell = if t.is_finite() { num(t * 1e6, 3) } else { CAP_SENTINEL.to_string() };
        rows.push(vec![
            s.label(),
            n.to_string(),
            num(e.edge_distance_m, 3),
            e.target_pmd.to_string(),
            t_cell.clone(),
            num(total * 1e3, 6),
        ]);
        let t_shown = if t.is_finite() {
            t_cell
        } else {
            format!("> {}", num(e.t_sig_cap_s * 1e6, 3))
        };
        shown.push(vec![s.label(), n.to_string(), t_shown, num(total * 1e3, 3)]);
    }
    let mut table = render(&["scheme", "slots", "min T_sig [us]", "total delay [ms]"], &shown);
    let _ = writeln!(
        table,
        "target PMD < {} at {} m",
        e.target_pmd,
        num(e.edge_distance_m, 3)
    );
    Ok(Report {
        command: "min-tsig",
        table,
        artifacts: vec![Artifact {
            file_name: "min-tsig.csv".into(),
            contents: csv_bytes(MIN_TSIG_HEADER, &rows)?,
        }],
    })
}
