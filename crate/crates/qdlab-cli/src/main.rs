//! `qd`: reproducible experiments on quantum double lattice models.
//!
//! Subcommands build a finite region for a chosen gauge group and run the
//! corresponding certification suite. JSON reports are the contract; text
//! tables are a secondary rendering. Exit codes: 0 all checks pass, 1 a
//! check failed, 2 bad input.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use qdlab_core::anyon;
use qdlab_core::group::FiniteGroup;
use qdlab_core::ops::{self, LinearOp};
use qdlab_core::rep::{parse_irrep_table, QuantumDouble};
use qdlab_core::report::{Check, MatrixDump, Report};
use qdlab_core::stringnet::{BoundaryCondition, BoundaryFamily, EtaBasis, EtaLabel};
use qdlab_core::suite;
use qdlab_core::Lab;

#[derive(Parser)]
#[command(name = "qd", version, about = "quantum double model laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Catalog group name (Z1..Z12, S3, D4, Q8).
    #[arg(long, default_value = "Z2")]
    catalog: String,
    /// Plain-text group table file (overrides --catalog).
    #[arg(long)]
    group_file: Option<PathBuf>,
    /// Irrep table file for centralizers the catalog cannot produce.
    /// Format: `class <index>` lines followed by irrep blocks.
    #[arg(long)]
    irreps_file: Option<PathBuf>,
    /// Region radius.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Numerical tolerance for the checks.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Seed for sampled checks and generated boundary families.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "text", value_parser = ["json", "text", "csv"])]
    format: String,
    /// Experiment spec file: `key value` lines overriding group, n,
    /// tolerance, seed, and family size.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print conjugacy classes, centralizers, and the sector labels.
    Group(Common),
    /// Dump the region geometry as JSON.
    Lattice(Common),
    /// Run the operator-algebra identity suite.
    Verify(Common),
    /// Build the excited-state basis and report its Gram matrix.
    Etas(EtasArgs),
    /// Emit the charge detection matrix.
    Detect(Common),
    /// Run the amplimorphism experiments.
    Ampli(Common),
    /// Inject constraint violations and sweep them onto the origin site.
    Sweep(Common),
}

#[derive(Args)]
struct EtasArgs {
    #[command(flatten)]
    common: Common,
    /// Minimum boundary family size.
    #[arg(long, default_value_t = 8)]
    family: usize,
}

struct Setup {
    lab: Lab,
    config: serde_json::Value,
}

fn load_spec(common: &mut Common) -> Result<()> {
    let Some(path) = &common.spec else { return Ok(()) };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading spec file {}", path.display()))?;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| anyhow!("bad spec line `{line}`"))?;
        let value = value.trim();
        match key {
            "group" => common.catalog = value.to_string(),
            "n" => common.n = value.parse().context("spec n")?,
            "tolerance" => common.tolerance = value.parse().context("spec tolerance")?,
            "seed" => common.seed = value.parse().context("spec seed")?,
            "sectors" | "boundary-family" => {} // consumed by subcommands that care
            other => return Err(anyhow!("unknown spec key `{other}`")),
        }
    }
    Ok(())
}

fn content_hash(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn setup(common: &Common) -> Result<Setup> {
    let (group, source, table_text) = match &common.group_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading group table {}", path.display()))?;
            let g = FiniteGroup::parse_table(&text).map_err(|e| anyhow!("{e}"))?;
            (g, format!("file:{}", path.display()), text)
        }
        None => {
            let g = FiniteGroup::catalog(&common.catalog).map_err(|e| anyhow!("{e}"))?;
            let text = g.to_table_text();
            (g, format!("catalog:{}", common.catalog), text)
        }
    };
    let mut irreps_text = String::new();
    let lab = if let Some(path) = &common.irreps_file {
        irreps_text = std::fs::read_to_string(path)
            .with_context(|| format!("reading irrep tables {}", path.display()))?;
        let user = parse_user_irreps(&group, &irreps_text)?;
        let qd = QuantumDouble::with_user_irreps(group, user).map_err(|e| anyhow!("{e}"))?;
        let origin = qdlab_core::lattice::Site::new(
            qdlab_core::lattice::v(0, 0),
            qdlab_core::lattice::Face::down(qdlab_core::lattice::v(-1, 1)),
        )
        .expect("canonical origin");
        let region = qdlab_core::lattice::Region::build(origin, common.n)
            .map_err(|e| anyhow!("{e}"))?;
        let space = qdlab_core::EdgeSpace::from_region(&region);
        Lab { qd, region, space }
    } else {
        Lab::canonical(group, common.n).map_err(|e| anyhow!("{e}"))?
    };
    let config = serde_json::json!({
        "group_source": source,
        "group_order": lab.group().order(),
        "radius": common.n,
        "tolerance": common.tolerance,
        "seed": common.seed,
        "input_hash": content_hash(&[&table_text, &irreps_text]),
    });
    Ok(Setup { lab, config })
}

/// User irrep file: `class <idx>` headers, each followed by irrep blocks in
/// the format accepted by the core parser.
fn parse_user_irreps(
    group: &FiniteGroup,
    text: &str,
) -> Result<HashMap<usize, Vec<qdlab_core::rep::Irrep>>> {
    let mut out = HashMap::new();
    let classes = qdlab_core::conjugacy_classes(group);
    let mut current: Option<(usize, String)> = None;
    let flush = |current: &mut Option<(usize, String)>,
                     out: &mut HashMap<usize, Vec<qdlab_core::rep::Irrep>>|
     -> Result<()> {
        if let Some((idx, block)) = current.take() {
            let subgroup = classes
                .get(idx)
                .ok_or_else(|| anyhow!("class index {idx} out of range"))?;
            let irreps = parse_irrep_table(subgroup.centralizer.as_group(), &block)
                .map_err(|e| anyhow!("{e}"))?;
            out.insert(idx, irreps);
        }
        Ok(())
    };
    for line in text.lines() {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("class ") {
            flush(&mut current, &mut out)?;
            current = Some((rest.trim().parse().context("class index")?, String::new()));
        } else if let Some((_, block)) = &mut current {
            block.push_str(line);
            block.push('\n');
        } else if !trimmed.is_empty() && !trimmed.starts_with('#') {
            return Err(anyhow!("irrep file must start with a `class <idx>` header"));
        }
    }
    flush(&mut current, &mut out)?;
    Ok(out)
}

fn emit(common: &Common, report: &Report) -> Result<()> {
    let rendered = match common.format.as_str() {
        "json" => report.to_json(),
        "csv" => {
            let mut s = String::new();
            for m in &report.matrices {
                s.push_str(&m.to_csv());
            }
            if report.matrices.is_empty() {
                s.push_str("name,max_deviation,tolerance,pass\n");
                for c in &report.checks {
                    s.push_str(&format!(
                        "{},{},{},{}\n",
                        c.name, c.max_deviation, c.tolerance, c.pass
                    ));
                }
            }
            s
        }
        _ => report.to_text(),
    };
    match &common.out {
        Some(path) => std::fs::write(path, rendered)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn run_group(common: &Common) -> Result<Report> {
    let Setup { lab, config } = setup(common)?;
    let mut report = Report::new(config);
    let g = lab.group();
    let mut lines = Vec::new();
    for (ci, class) in lab.qd.classes.iter().enumerate() {
        lines.push(format!(
            "class {ci}: size {}, representative {}, centralizer order {}",
            class.size(),
            g.name(class.representative()),
            class.centralizer.order()
        ));
    }
    let sectors = lab.qd.sectors();
    for &s in &sectors {
        lines.push(format!(
            "sector {}: internal dimension {}",
            lab.qd.sector_name(s),
            lab.qd.sector_dim(s)
        ));
    }
    let total: usize = sectors.iter().map(|&s| lab.qd.sector_dim(s).pow(2)).sum();
    report.push(Check::new(
        format!(
            "sector count {} with dimension identity sum {} = |G|^2",
            sectors.len(),
            total
        ),
        (total as f64 - (g.order() * g.order()) as f64).abs(),
        0.5,
    ));
    report.config["classes"] = serde_json::json!(lines);
    for c in suite::rep_checks(g, common.tolerance) {
        report.push(c);
    }
    Ok(report)
}

fn run_lattice(common: &Common) -> Result<Report> {
    let Setup { lab, config } = setup(common)?;
    let mut report = Report::new(config);
    report.config["region"] = qdlab_core::report::region_dump(&lab.region);
    report.push(Check::new("region geometry dump", 0.0, 1.0));
    Ok(report)
}

fn run_verify(common: &Common) -> Result<Report> {
    let Setup { lab, config } = setup(common)?;
    let mut report = Report::new(config);
    let samples = if lab.group().order() <= 2 { 200 } else { 60 };
    for c in suite::rep_checks(lab.group(), common.tolerance) {
        report.push(c);
    }
    for c in suite::ribbon_checks(&lab, common.tolerance, samples, common.seed) {
        report.push(c);
    }
    for c in suite::projector_checks(&lab, common.tolerance, samples, common.seed ^ 1) {
        report.push(c);
    }
    Ok(report)
}

fn run_etas(args: &EtasArgs) -> Result<Report> {
    let common = &args.common;
    let Setup { lab, config } = setup(common)?;
    let mut report = Report::new(config);
    let family = BoundaryFamily::generate(&lab, args.family, common.seed);
    let basis = EtaBasis::new(family);
    report.config["family_size"] = serde_json::json!(basis.family.members.len());
    let mut labels: Vec<EtaLabel> = Vec::new();
    for sector in lab.qd.sectors() {
        labels.extend(basis.labels(&lab, sector).into_iter().take(4));
    }
    let gram = basis.gram_orbit(&lab, &labels).map_err(|e| anyhow!("{e}"))?;
    let names: Vec<String> = labels
        .iter()
        .map(|l| {
            format!(
                "{};u{},{};b{},{}",
                lab.qd.sector_name(l.sector),
                l.u.0,
                l.u.1,
                l.v.0,
                l.v.1
            )
        })
        .collect();
    report.push(Check::new(
        format!("eta gram matrix is the identity over {} labels", labels.len()),
        qdlab_core::report::identity_deviation(&gram),
        1e-9,
    ));
    report.matrices.push(MatrixDump::new("eta_gram", names.clone(), names, &gram));
    let enumerable = (lab.region.interior_vertices.len() as f64)
        * (lab.group().order() as f64).ln()
        <= (1 << 19) as f64;
    for c in suite::eta_checks(&lab, &basis, 1e-9, enumerable) {
        report.push(c);
    }
    Ok(report)
}

fn run_detect(common: &Common) -> Result<Report> {
    let Setup { lab, config } = setup(common)?;
    let mut report = Report::new(config);
    let family = BoundaryFamily::generate(&lab, 8, common.seed);
    let basis = EtaBasis::new(family);
    let det = anyon::detection_matrix(&lab, &basis, common.tolerance.max(1e-9))
        .map_err(|e| anyhow!("{e}"))?;
    let sectors: Vec<String> =
        lab.qd.sectors().iter().map(|&s| lab.qd.sector_name(s)).collect();
    let k = sectors.len();
    let mut matrix = vec![vec![Complex64::new(0.0, 0.0); k]; k];
    for (idx, e) in det.entries.iter().enumerate() {
        matrix[idx / k][idx % k] = Complex64::new(e.value_re, e.value_im);
    }
    report.matrices.push(MatrixDump::new(
        "detection_matrix",
        sectors.clone(),
        sectors,
        &matrix,
    ));
    report.push(Check::new(
        "detection matrix equals the sector delta pattern",
        det.max_deviation,
        det.tolerance,
    ));
    Ok(report)
}

fn run_ampli(common: &Common) -> Result<Report> {
    let Setup { lab, config } = setup(common)?;
    let mut report = Report::new(config);
    let omega = anyon::ground_patch(&lab, &BoundaryCondition::trivial(&lab))
        .map_err(|e| anyhow!("{e}"))?;
    let samples = if lab.group().order() <= 2 { 150 } else { 40 };
    for sector in lab.qd.sectors() {
        for c in anyon::ampli_properties_report(&lab, sector, common.tolerance, samples)
            .map_err(|e| anyhow!("{e}"))?
        {
            report.push(Check::new(
                format!("{} [{}]", c.name, lab.qd.sector_name(sector)),
                c.max_deviation,
                c.tolerance,
            ));
        }
        for c in anyon::ground_action_report(&lab, &omega, sector, common.tolerance)
            .map_err(|e| anyhow!("{e}"))?
        {
            report.push(Check::new(
                format!("{} [{}]", c.name, lab.qd.sector_name(sector)),
                c.max_deviation,
                c.tolerance,
            ));
        }
    }
    // The delta-delta composite on the first two sectors.
    let o = LinearOp::EdgeT {
        edge: qdlab_core::lattice::edges_at(lab.region.origin.vertex)[4],
        g: 0,
    };
    for sector in lab.qd.sectors().into_iter().take(2) {
        for c in anyon::magic_report(&lab, &omega, sector, &o, common.tolerance)
            .map_err(|e| anyhow!("{e}"))?
        {
            report.push(Check::new(
                format!("{} [{}]", c.name, lab.qd.sector_name(sector)),
                c.max_deviation,
                c.tolerance,
            ));
        }
    }
    Ok(report)
}

fn run_sweep(common: &Common) -> Result<Report> {
    let Setup { lab, config } = setup(common)?;
    let mut report = Report::new(config);
    let g = lab.group();
    let omega = anyon::ground_patch(&lab, &BoundaryCondition::trivial(&lab))
        .map_err(|e| anyhow!("{e}"))?;
    // Deterministic injection from the seed: one shift error and one
    // character error on interior edges.
    let interior: Vec<_> = lab
        .region
        .edges
        .iter()
        .copied()
        .filter(|e| {
            lab.region.contains_vertex(e.from_vertex()) && lab.region.contains_vertex(e.to_vertex())
        })
        .collect();
    let e1 = interior[common.seed as usize % interior.len()];
    let e2 = interior[(common.seed as usize + 3) % interior.len()];
    let shift = LinearOp::EdgeL { edge: e1, h: 1 % g.order() };
    let character = ops::sum(
        g.elements()
            .map(|x| {
                let chi = if lab.qd.classes.len() > 1 && lab.qd.classes[1].contains(x) {
                    -1.0
                } else {
                    1.0
                };
                ops::scaled_re(chi, LinearOp::EdgeT { edge: e2, g: x })
            })
            .collect(),
    );
    let injected = lab
        .apply(&ops::prod(vec![shift, character]), &omega)
        .map_err(|e| anyhow!("{e}"))?;
    let injected = injected.normalized();
    let s_star = lab.region.origin;
    let (bv, bf) =
        anyon::find_violations(&lab, &injected, s_star, 1e-9).map_err(|e| anyhow!("{e}"))?;
    report.config["injected_violations"] = serde_json::json!({
        "vertices": bv.len(),
        "faces": bf.len(),
    });
    let outcome = anyon::sweep(&lab, &injected, s_star).map_err(|e| anyhow!("{e}"))?;
    let (bv2, bf2) = anyon::find_violations(&lab, &outcome.state, s_star, 1e-9)
        .map_err(|e| anyhow!("{e}"))?;
    report.push(Check::new(
        format!(
            "sweep moved {} violations onto the origin site in {} steps",
            bv.len() + bf.len(),
            outcome.steps.len()
        ),
        (bv2.len() + bf2.len()) as f64,
        0.5,
    ));
    report.push(Check::new(
        "swept state stays normalized",
        (outcome.state.norm() - 1.0).abs(),
        common.tolerance,
    ));
    Ok(report)
}

fn dispatch(cli: Cli) -> Result<Report> {
    match cli.command {
        Command::Group(mut c) => {
            load_spec(&mut c)?;
            let r = run_group(&c)?;
            emit(&c, &r)?;
            Ok(r)
        }
        Command::Lattice(mut c) => {
            load_spec(&mut c)?;
            // The lattice dump is JSON regardless of --format text.
            let r = run_lattice(&c)?;
            let rendered = r.to_json();
            match &c.out {
                Some(path) => std::fs::write(path, rendered)?,
                None => print!("{rendered}"),
            }
            Ok(r)
        }
        Command::Verify(mut c) => {
            load_spec(&mut c)?;
            let r = run_verify(&c)?;
            emit(&c, &r)?;
            Ok(r)
        }
        Command::Etas(mut a) => {
            load_spec(&mut a.common)?;
            let r = run_etas(&a)?;
            emit(&a.common, &r)?;
            Ok(r)
        }
        Command::Detect(mut c) => {
            load_spec(&mut c)?;
            let r = run_detect(&c)?;
            emit(&c, &r)?;
            Ok(r)
        }
        Command::Ampli(mut c) => {
            load_spec(&mut c)?;
            let r = run_ampli(&c)?;
            emit(&c, &r)?;
            Ok(r)
        }
        Command::Sweep(mut c) => {
            load_spec(&mut c)?;
            let r = run_sweep(&c)?;
            emit(&c, &r)?;
            Ok(r)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(report) => {
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
