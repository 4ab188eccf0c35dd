//! The bound pipelines behind each command.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use qcbound_core::geometry::{
    build_snowflake_tree, build_star_domain, intersection_volume, FractalTreeSpec, StarDomainSpec, WhitneyChain,
    WhitneyTriple,
};
use qcbound_core::oracle::{check_domination, mesh_domain, CheckedBound, DomainSpec, DominationOptions, TriangleMesh};
use qcbound_core::poincare::{
    chain_constant, convex_cell_constant, pair_constant, snowflake_cell_bounds, tree_constant, triple_constant,
    SpectralParams,
};
use qcbound_core::qc_transfer::{
    ball_lower_bound, eigen_transfer, eigen_transfer_lipschitz, star_domain_3d_bound, poincare_transfer, whitney_qc_bound,
    MapSpec,
};
use qcbound_core::{EigenBound, PoincareBound};

use crate::args::{Command, RunOptions};
use crate::config::{
    read_json, AnyCertificate, BaseSpec, CellsConfig, Combine, ReportConfig, SnowflakeConfig, StarConfig,
    TransferConfig, VerifyConfig,
};
use crate::report::{BoundReport, Certificate, Primary};

/// Default snowflake depth when neither flag nor configuration sets it.
pub const DEFAULT_DEPTH: usize = 12;

fn resolve_p(opts: &RunOptions, from_config: Option<f64>) -> Result<f64> {
    let p = opts.p.or(from_config).unwrap_or(2.0);
    if !(p.is_finite() && p > 1.0) {
        bail!("p must be finite and greater than 1, got {p}");
    }
    Ok(p)
}

fn domination(opts: &RunOptions) -> DominationOptions {
    DominationOptions { seed: opts.seed, ..DominationOptions::default() }
}

fn load<T: serde::de::DeserializeOwned + Default>(opts: &RunOptions) -> Result<T> {
    match &opts.config {
        Some(path) => read_json(path),
        None => Ok(T::default()),
    }
}

fn require<T: serde::de::DeserializeOwned>(opts: &RunOptions, command: Command) -> Result<T> {
    let path = opts.config.as_ref().ok_or_else(|| anyhow!("{} needs --config", command.name()))?;
    read_json(path)
}

/// Runs one command and returns its reports; `report` may return several.
pub fn run(command: Command, opts: &RunOptions) -> Result<Vec<BoundReport>> {
    let base_dir = opts.config.as_deref().and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default();
    match command {
        Command::Report => {
            let cfg: ReportConfig = require(opts, command)?;
            let mut out = Vec::with_capacity(cfg.runs.len());
            for (i, entry) in cfg.runs.iter().enumerate() {
                let sub = Command::parse_name(&entry.command)
                    .filter(|c| *c != Command::Report)
                    .ok_or_else(|| anyhow!("run {i}: unknown command {:?}", entry.command))?;
                let report = run_value(sub, &entry.config, opts, &base_dir).with_context(|| format!("run {i} ({})", entry.command))?;
                out.push(report);
            }
            Ok(out)
        }
        Command::BoundCells => Ok(vec![timed(opts, || bound_cells(&require(opts, command)?, opts))?]),
        Command::BoundSnowflake => Ok(vec![timed(opts, || bound_snowflake(&load(opts)?, opts))?]),
        Command::BoundStar => Ok(vec![timed(opts, || bound_star(&load(opts)?, opts))?]),
        Command::Transfer => Ok(vec![timed(opts, || transfer(&require(opts, command)?, opts))?]),
        Command::Verify => Ok(vec![timed(opts, || verify(&require(opts, command)?, opts, &base_dir))?]),
    }
}

fn run_value(command: Command, value: &serde_json::Value, opts: &RunOptions, base_dir: &Path) -> Result<BoundReport> {
    let value = if value.is_null() { serde_json::json!({}) } else { value.clone() };
    timed(opts, || match command {
        Command::BoundCells => bound_cells(&serde_json::from_value(value.clone())?, opts),
        Command::BoundSnowflake => bound_snowflake(&serde_json::from_value(value.clone())?, opts),
        Command::BoundStar => bound_star(&serde_json::from_value(value.clone())?, opts),
        Command::Transfer => transfer(&serde_json::from_value(value.clone())?, opts),
        Command::Verify => verify(&serde_json::from_value(value.clone())?, opts, base_dir),
        Command::Report => bail!("nested report"),
    })
}

fn timed(opts: &RunOptions, f: impl FnOnce() -> Result<BoundReport>) -> Result<BoundReport> {
    let start = Instant::now();
    let mut report = f()?;
    if opts.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(report)
}

fn check_poincare(report: &mut BoundReport, bound: &PoincareBound, domain: Result<DomainSpec>, opts: &RunOptions) -> Result<()> {
    match domain {
        Ok(spec) => {
            let mesh = mesh_domain(&spec, opts.h)?;
            report.checks.push(check_domination(CheckedBound::Poincare(bound), &mesh, domination(opts))?);
        }
        Err(e) => report.notes.push(format!("no oracle check: {e}")),
    }
    Ok(())
}

pub fn bound_cells(cfg: &CellsConfig, opts: &RunOptions) -> Result<BoundReport> {
    let p = resolve_p(opts, cfg.p)?;
    let cells = cfg.cells.iter().enumerate().map(|(i, c)| c.build().with_context(|| format!("cell {i}"))).collect::<Result<Vec<_>>>()?;
    let n = cells.first().ok_or_else(|| anyhow!("no cells given"))?.dim();
    let params = SpectralParams::new(p, n)?;
    let cell_bounds = cells.iter().map(|c| convex_cell_constant(c, params)).collect::<Result<Vec<_>, _>>()?;
    let count = |k: usize| -> Result<()> {
        if cells.len() != k {
            bail!("{:?} needs exactly {k} cells, got {}", cfg.combine, cells.len());
        }
        Ok(())
    };
    let triple = |idx: [usize; 3]| -> Result<(WhitneyTriple, PoincareBound)> {
        let get = |i: usize| cells.get(i).cloned().ok_or_else(|| anyhow!("cell index {i} out of range"));
        let t = WhitneyTriple::new(get(idx[0])?, get(idx[1])?, get(idx[2])?)?;
        let b = triple_constant(&t, &cell_bounds[idx[0]], &cell_bounds[idx[1]], &cell_bounds[idx[2]], p)?;
        Ok((t, b))
    };
    let bound = match cfg.combine {
        Combine::Convex => {
            count(1)?;
            cell_bounds[0].clone().with_volume(cells[0].volume())
        }
        Combine::Pair => {
            count(2)?;
            let overlap = intersection_volume(&cells[0], &cells[1])?;
            pair_constant(&cells[0], &cells[1], overlap, &cell_bounds[0], &cell_bounds[1], p)?
        }
        Combine::Triple => {
            count(3)?;
            triple([0, 1, 2])?.1
        }
        Combine::Chain => {
            if cfg.triples.is_empty() {
                bail!("chain needs a non-empty \"triples\" list");
            }
            let (triples, bounds): (Vec<_>, Vec<_>) = cfg.triples.iter().map(|&t| triple(t)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
            let chain = WhitneyChain::from_triples(triples, cfg.multiplicity)?;
            chain_constant(&chain, &bounds, p)?
        }
    };
    let name = cfg.name.clone().unwrap_or_else(|| format!("cells/{}", format!("{:?}", cfg.combine).to_lowercase()));
    let mut report = BoundReport::new(Command::BoundCells.name(), name, p, Primary::poincare(&bound));
    if cfg.verify {
        let domain = if n == 2 { DomainSpec::from_cells(&cells).map_err(Into::into) } else { Err(anyhow!("no oracle in dimension {n}")) };
        check_poincare(&mut report, &bound, domain, opts)?;
    }
    report.certificates.push(Certificate::Eigen(bound.to_eigen_bound()));
    report.certificates.insert(0, Certificate::Poincare(bound));
    Ok(report)
}

pub fn bound_snowflake(cfg: &SnowflakeConfig, opts: &RunOptions) -> Result<BoundReport> {
    let p = resolve_p(opts, cfg.p)?;
    let depth = opts.depth.or(cfg.depth).unwrap_or(DEFAULT_DEPTH);
    let mut spec = FractalTreeSpec::new(cfg.a, depth);
    if let Some(f) = cfg.overlap_fraction {
        spec.overlap_fraction = f;
    }
    let tree = build_snowflake_tree(spec)?;
    let cell_bounds = snowflake_cell_bounds(&tree, p)?;
    let tb = tree_constant(&tree, &cell_bounds, p)?;
    let name = format!("snowflake(a={}, depth={depth})", cfg.a);
    let mut report = BoundReport::new(Command::BoundSnowflake.name(), name, p, Primary::poincare(&tb.bound));
    report.notes.push("no planar oracle for the tree union; certificate only".into());
    report.certificates.push(Certificate::Poincare(tb.bound));
    if let Some(series) = tb.series {
        report.notes.push(format!(
            "level series: finite part {:e}, certified tail {:e} (relative {:e})",
            series.finite_part,
            series.tail.bound,
            series.relative_tail()
        ));
        report.certificates.push(Certificate::Series(series));
    }
    Ok(report)
}

pub fn bound_star(cfg: &StarConfig, opts: &RunOptions) -> Result<BoundReport> {
    let p = resolve_p(opts, cfg.p)?;
    let spec = StarDomainSpec::new(cfg.delta, cfg.n);
    let spec = match cfg.segments { Some(s) => StarDomainSpec { segments: s, ..spec }, None => spec };
    let star = build_star_domain(spec)?;
    let params = SpectralParams::new(p, cfg.n)?;
    let b1 = convex_cell_constant(&star.omega1, params)?;
    let b2 = convex_cell_constant(&star.omega2, params)?;
    let overlap = intersection_volume(&star.omega1, &star.omega2)?;
    let pair = pair_constant(&star.omega1, &star.omega2, overlap, &b1, &b2, p)?;
    let name = format!("star(delta={}, n={})", cfg.delta, cfg.n);
    let mut report = BoundReport::new(Command::BoundStar.name(), name, p, Primary::poincare(&pair));
    if cfg.n == 2 {
        if cfg.verify {
            check_poincare(&mut report, &pair, Ok(DomainSpec::Star { delta: cfg.delta }), opts)?;
        }
    } else {
        report.notes.push(format!(
            "pieces are inscribed {}-gon frustums; relative volume deficit {:e}",
            spec.segments, star.discretization_rel_error
        ));
    }
    report.certificates.push(Certificate::Eigen(pair.to_eigen_bound()));
    report.certificates.insert(0, Certificate::Poincare(pair));
    if cfg.n == 3 && p > 3.0 {
        let ball = ball_lower_bound(3, p)?;
        let transferred = star_domain_3d_bound(cfg.delta, p, &ball)?;
        report.primary = Primary::eigen(&transferred);
        report.certificates.push(Certificate::Eigen(transferred));
    }
    Ok(report)
}

fn linear_matrix(map: &MapSpec) -> Option<[[f64; 2]; 2]> {
    match map {
        MapSpec::Linear { matrix, .. } if matrix.len() == 2 && matrix.iter().all(|r| r.len() == 2) => {
            Some([[matrix[0][0], matrix[0][1]], [matrix[1][0], matrix[1][1]]])
        }
        _ => None,
    }
}

fn image_mesh(mesh: &TriangleMesh, a: [[f64; 2]; 2]) -> Result<TriangleMesh> {
    let mut nodes: Vec<[f64; 2]> =
        mesh.nodes().iter().map(|x| [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]).collect();
    let mut elements = mesh.elements().to_vec();
    if a[0][0] * a[1][1] - a[0][1] * a[1][0] < 0.0 {
        for e in &mut elements {
            e.swap(1, 2);
        }
    }
    nodes.shrink_to_fit();
    Ok(TriangleMesh::new(nodes, elements)?)
}

pub fn transfer(cfg: &TransferConfig, opts: &RunOptions) -> Result<BoundReport> {
    let p = resolve_p(opts, cfg.p)?;
    let domain_area = cfg.domain.as_ref().map(DomainSpec::area).transpose()?;
    let volume = match &cfg.base {
        BaseSpec::Ball { n } => Some(if *n == 2 { std::f64::consts::PI } else { 4.0 * std::f64::consts::PI / 3.0 }),
        BaseSpec::Certificate { bound } => bound.volume,
        BaseSpec::Sobolev { base, .. } => Some(base.volume()),
        BaseSpec::Eigen { .. } => None,
    };
    let mut notes = Vec::new();
    let volume = cfg.domain_volume.or(domain_area).or(volume).unwrap_or_else(|| {
        notes.push("source volume unknown; unit volume assumed (unused by the Lipschitz route)".to_string());
        1.0
    });
    let map = cfg.map.to_map_data(volume)?;
    let name = cfg.name.clone().unwrap_or_else(|| "transfer".into());
    let (mut report, eigen): (BoundReport, Option<EigenBound>) = match &cfg.base {
        BaseSpec::Eigen { mu } => {
            let out = eigen_transfer_lipschitz(&map, &EigenBound::given(*mu, p, "given-source-bound")?, p)?;
            (BoundReport::new(Command::Transfer.name(), name, p, Primary::eigen(&out)), Some(out))
        }
        BaseSpec::Ball { n } => {
            let out = eigen_transfer_lipschitz(&map, &ball_lower_bound(*n, p)?, p)?;
            (BoundReport::new(Command::Transfer.name(), name, p, Primary::eigen(&out)), Some(out))
        }
        BaseSpec::Certificate { bound } => {
            let out = whitney_qc_bound(bound, &map, p)?;
            (BoundReport::new(Command::Transfer.name(), name, p, Primary::eigen(&out)), Some(out))
        }
        BaseSpec::Sobolev { base, eigen: true } => {
            let out = eigen_transfer(&map, base, p)?;
            (BoundReport::new(Command::Transfer.name(), name, p, Primary::eigen(&out)), Some(out))
        }
        BaseSpec::Sobolev { base, eigen: false } => {
            let out = poincare_transfer(&map, base, p)?;
            let mut r = BoundReport::new(Command::Transfer.name(), name, p, Primary::transfer(&out));
            r.notes.push(format!("bound on the ({}, {p}) Sobolev-Poincare constant of the image", out.s));
            r.certificates.push(Certificate::Transfer(out));
            (r, None)
        }
    };
    report.notes.extend(notes);
    if let Some(out) = eigen {
        match (&cfg.domain, linear_matrix(&cfg.map)) {
            (Some(domain), Some(a)) => {
                let image = image_mesh(&mesh_domain(domain, opts.h)?, a)?;
                report.checks.push(check_domination(CheckedBound::Eigen(&out), &image, domination(opts))?);
            }
            _ => report.notes.push("no oracle check: needs a planar source domain and a linear map".into()),
        }
        report.certificates.push(Certificate::Eigen(out));
    }
    Ok(report)
}

fn certificate_from_value(value: serde_json::Value) -> Result<AnyCertificate> {
    if let Some(list) = value.get("certificates").and_then(|c| c.as_array()) {
        for c in list {
            match c.get("type").and_then(|t| t.as_str()) {
                Some("poincare") | Some("eigen") => {
                    return Ok(match serde_json::from_value::<Certificate>(c.clone())? {
                        Certificate::Poincare(b) => AnyCertificate::Poincare(b),
                        Certificate::Eigen(b) => AnyCertificate::Eigen(b),
                        _ => unreachable!(),
                    })
                }
                _ => continue,
            }
        }
        bail!("report holds no Poincare or eigenvalue certificate");
    }
    Ok(serde_json::from_value(value)?)
}

pub fn verify(cfg: &VerifyConfig, opts: &RunOptions, base_dir: &Path) -> Result<BoundReport> {
    let cert = match (&cfg.certificate, &cfg.certificate_file) {
        (Some(c), None) => c.clone(),
        (None, Some(file)) => {
            let path: PathBuf = base_dir.join(file);
            certificate_from_value(read_json(&path)?).with_context(|| format!("{}: no usable certificate", path.display()))?
        }
        _ => bail!("give exactly one of \"certificate\" and \"certificate_file\""),
    };
    let mesh = mesh_domain(&cfg.domain, opts.h)?;
    let name = cfg.name.clone().unwrap_or_else(|| "verify".into());
    let (mut report, check) = match &cert {
        AnyCertificate::Poincare(b) => {
            b.check(1e-12)?;
            (
                BoundReport::new(Command::Verify.name(), name, b.p, Primary::poincare(b)),
                check_domination(CheckedBound::Poincare(b), &mesh, domination(opts))?,
            )
        }
        AnyCertificate::Eigen(b) => {
            b.check(1e-12)?;
            (
                BoundReport::new(Command::Verify.name(), name, b.p, Primary::eigen(b)),
                check_domination(CheckedBound::Eigen(b), &mesh, domination(opts))?,
            )
        }
    };
    report.checks.push(check);
    report.certificates.push(match cert {
        AnyCertificate::Poincare(b) => Certificate::Poincare(b),
        AnyCertificate::Eigen(b) => Certificate::Eigen(b),
    });
    Ok(report)
}
