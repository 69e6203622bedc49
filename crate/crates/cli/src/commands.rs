use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use framekit_core::approx_dual::ApproxDualParams;
use framekit_core::audit::{AuditSummary, BoundAudit};
use framekit_core::corpus::{run_corpus, CorpusConfig};
use framekit_core::exam::{exam_metadata, exam_pair};
use framekit_core::frame::FrameBounds;
use framekit_core::gabor::{
    build_gabor_frame, commuting_operator, envelope_audit, gabor_approx_dual_window,
    gabor_perturbation_audit, walnut_report, CommutingSpec, GaborAuditConfig, GaborSystem,
    WalnutReport,
};
use framekit_core::io::{self, FrameFile};
use framekit_core::perturbation::{
    best_approx_audits, deviation_bound_audit, dis_identity_residual, gamma_roundtrip,
    gap_bound_audit_with, per1200_audit, ClosenessReport, DeviationKind, DisIdentity,
    GammaRoundTrip, GapReport, Per1200Variant, PerturbationPair,
};
use framekit_core::random::{gaussian_matrix, stream};
use framekit_core::{CMatrix, ExecMode, Frame, FrameError, Result, TolerancePolicy, C64};
use serde::Serialize;

use crate::{AuditArgs, CorpusArgs, Format, GaborCmd, Kind, OperatorArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NOT_APPLICABLE: u8 = 3;

pub const TOL_ENV: &str = "FRAMEKIT_TOL";

/// Default policy, with `identity_residual_rel` taken from `FRAMEKIT_TOL`.
pub fn tolerance() -> Result<TolerancePolicy> {
    let mut tol = TolerancePolicy::default();
    if let Ok(raw) = std::env::var(TOL_ENV) {
        tol.identity_residual_rel = raw
            .trim()
            .parse()
            .map_err(|_| FrameError::Input(format!("{TOL_ENV}={raw} is not a number")))?;
        tol.validate()?;
    }
    Ok(tol)
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => io::write_json(path, value),
        None => {
            print!("{}", io::to_json(value));
            Ok(())
        }
    }
}

pub fn exit_code(audits: &[BoundAudit]) -> u8 {
    let summary = AuditSummary::from_audits(audits);
    if summary.violations() > 0 {
        EXIT_VIOLATED
    } else if summary.applicable() == 0 {
        EXIT_NOT_APPLICABLE
    } else {
        EXIT_OK
    }
}

#[derive(Serialize)]
struct FrameReport {
    dim: usize,
    len: usize,
    bounds: FrameBounds,
    is_frame: bool,
    excess: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    canonical_dual: Option<FrameFile>,
}

pub fn frame_analyze(
    input: &Path,
    emit_dual: bool,
    output: Option<&Path>,
    tol: &TolerancePolicy,
) -> Result<u8> {
    let f = io::read_frame(input)?;
    let is_frame = f.is_frame(tol);
    let canonical_dual = if emit_dual && is_frame {
        Some(FrameFile::from_frame(&f.canonical_dual(tol)?))
    } else {
        None
    };
    let report = FrameReport {
        dim: f.dim(),
        len: f.len(),
        bounds: f.bounds(tol),
        is_frame,
        excess: f.excess(tol),
        canonical_dual,
    };
    emit(&report, output)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PerturbReport {
    dim: usize,
    len: usize,
    bounds_f: FrameBounds,
    bounds_g: FrameBounds,
    closeness: ClosenessReport,
    range_gap: GapReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    dis_identity: Option<DisIdentity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<GammaRoundTrip>,
    notes: Vec<String>,
    summary: AuditSummary,
    audits: Vec<BoundAudit>,
}

fn expand(kinds: &[Kind]) -> BTreeSet<Kind> {
    use Kind::*;
    let mut out = BTreeSet::new();
    for &k in kinds {
        match k {
            All => out.extend([
                Gap,
                Per1200DQuad,
                Per1200CQuad,
                Per1200Mu,
                DisIdentity,
                Cad,
                PropDis,
                BestApp,
                DQuad,
                CQuad,
                Gamma,
            ]),
            MuOnly => out.extend([Per1200Mu, Cad, PropDis, BestApp, Gamma]),
            Per1200 => out.extend([Per1200DQuad, Per1200CQuad, Per1200Mu]),
            other => {
                out.insert(other);
            }
        }
    }
    out
}

const C_QUAD_NOTE: &str =
    "c-quad: the hypothesis is stated via the weighted closeness while the displayed constants \
use the canonical weight q_0; audited with q_0 < 1";
const D_QUAD_NOTE: &str =
    "d-quad: audited only when m_opt(F) <= q, as the d-quadratic definition requires";

pub fn perturb_audit(args: &AuditArgs, tol: &TolerancePolicy) -> Result<u8> {
    let f = io::read_frame(&args.frame_a)?;
    let g = io::read_frame(&args.frame_b)?;
    let pair = PerturbationPair::new(&f, &g, tol)?;
    let (d, n) = (f.dim(), f.len());
    let p1 = match &args.params {
        Some(p) => io::read_params(p)?,
        None => ApproxDualParams::canonical(d, n),
    };
    let p2 = match &args.params_b {
        Some(p) => io::read_params(p)?,
        None => ApproxDualParams::with_a(p1.a.clone(), n),
    };
    let lambda_dual = match &args.lambda_dual {
        Some(p) => io::read_frame(p)?,
        None => Frame::from_synthesis(pair.f.canonical_synthesis.clone())?,
    };
    let kinds = expand(&args.kinds);
    let mut audits = Vec::new();
    let mut notes = Vec::new();
    let mut dis = None;
    let mut gamma = None;
    for kind in &kinds {
        match kind {
            Kind::Gap => audits.push(gap_bound_audit_with(&pair)),
            Kind::Per1200DQuad => {
                audits.extend(per1200_audit(&pair, Per1200Variant::DQuad(&lambda_dual))?)
            }
            Kind::Per1200CQuad => audits.extend(per1200_audit(&pair, Per1200Variant::CQuad)?),
            Kind::Per1200Mu => audits.extend(per1200_audit(&pair, Per1200Variant::Mu)?),
            Kind::DisIdentity => match pair.g {
                Some(_) => {
                    let r = dis_identity_residual(&f, &g, &p1, &p2, tol)?;
                    audits.push(r.audit());
                    dis = Some(r);
                }
                None => audits.push(BoundAudit::not_applicable("dis-identity", f64::NAN, 0.0)),
            },
            Kind::Cad => audits.extend(deviation_bound_audit(
                DeviationKind::Cad,
                &pair,
                &p1.a,
                &p2.a,
                None,
                None,
            )?),
            Kind::PropDis => audits.extend(deviation_bound_audit(
                DeviationKind::PropDis,
                &pair,
                &p1.a,
                &p2.a,
                None,
                None,
            )?),
            Kind::BestApp => audits.extend(best_approx_audits(
                &pair,
                &p1,
                &p2.a,
                args.trials,
                args.seed,
                ExecMode::default(),
            )?),
            Kind::DQuad => {
                notes.push(D_QUAD_NOTE.to_string());
                audits.extend(deviation_bound_audit(
                    DeviationKind::DQuad,
                    &pair,
                    &p1.a,
                    &p2.a,
                    Some(&lambda_dual),
                    Some(&p1.theta),
                )?)
            }
            Kind::CQuad => {
                notes.push(C_QUAD_NOTE.to_string());
                audits.extend(deviation_bound_audit(
                    DeviationKind::CQuad,
                    &pair,
                    &p1.a,
                    &p2.a,
                    None,
                    Some(&p1.theta),
                )?)
            }
            Kind::Gamma => {
                if pair.g.is_some() && pair.mu() < pair.sqrt_m() / 2.0 {
                    let lambda = gaussian_matrix(n, d, &mut stream(args.seed, "cli-gamma", 0));
                    let rt = gamma_roundtrip(&pair, &p1, &lambda)?;
                    audits.extend(rt.audits());
                    gamma = Some(rt);
                } else {
                    audits.extend(GammaRoundTrip::not_applicable());
                }
            }
            Kind::Per1200 | Kind::MuOnly | Kind::All => unreachable!("expanded above"),
        }
    }
    if let Some(out) = &args.output {
        io::write_json(out, &audits)?;
    }
    let report = PerturbReport {
        dim: d,
        len: n,
        bounds_f: pair.f.bounds,
        bounds_g: pair.g_bounds,
        closeness: pair.closeness.clone(),
        range_gap: pair.range_gap(),
        dis_identity: dis,
        gamma,
        notes,
        summary: AuditSummary::from_audits(&audits),
        audits: audits.clone(),
    };
    match (&args.report, &args.output) {
        (Some(path), _) => io::write_json(path, &report)?,
        (None, None) => emit(&report, None)?,
        (None, Some(_)) => {}
    }
    Ok(exit_code(&audits))
}

pub fn generate_exam(blocks: usize, dir: &Path) -> Result<u8> {
    let meta = exam_metadata(blocks)?;
    let (phi, psi) = exam_pair(blocks)?;
    fs::create_dir_all(dir).map_err(|e| FrameError::Input(format!("{}: {e}", dir.display())))?;
    io::write_frame(&dir.join("phi.json"), &phi)?;
    io::write_frame(&dir.join("psi.json"), &psi)?;
    io::write_json(&dir.join("meta.json"), &meta)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct GaborReport {
    redundancy: f64,
    bounds: FrameBounds,
    walnut: WalnutReport,
    envelope: BoundAudit,
}

#[derive(Serialize)]
struct DualWindowReport {
    #[serde(with = "framekit_core::io::complex_vec")]
    window: Vec<C64>,
    rate: f64,
    is_alternate_dual: bool,
}

fn read_window(path: &Path) -> Result<Vec<C64>> {
    let pairs: Vec<[f64; 2]> = io::read_json(path)?;
    Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
}

fn operator(sys: &GaborSystem, op: &OperatorArgs, tol: &TolerancePolicy) -> Result<CMatrix> {
    let spec = match (&op.scalar, &op.poly) {
        (_, Some(coeffs)) => CommutingSpec::Polynomial(coeffs.clone()),
        (Some(c), None) => CommutingSpec::Scalar(*c),
        (None, None) => CommutingSpec::Scalar(1.0),
    };
    commuting_operator(sys, &spec, tol)
}

pub fn gabor(cmd: &GaborCmd, tol: &TolerancePolicy) -> Result<u8> {
    match cmd {
        GaborCmd::Analyze { system, output } => {
            let sys: GaborSystem = io::read_json(system)?;
            sys.validate()?;
            let report = GaborReport {
                redundancy: sys.redundancy(),
                bounds: build_gabor_frame(&sys)?.bounds(tol),
                walnut: walnut_report(&sys)?,
                envelope: envelope_audit(&sys, tol)?,
            };
            emit(&report, output.as_deref())?;
            Ok(EXIT_OK)
        }
        GaborCmd::DualWindow {
            system,
            op,
            h,
            output,
        } => {
            let sys: GaborSystem = io::read_json(system)?;
            sys.validate()?;
            let a = operator(&sys, op, tol)?;
            let h = match h {
                Some(p) => read_window(p)?,
                None => vec![C64::new(0.0, 0.0); sys.l],
            };
            let (window, report) = gabor_approx_dual_window(&sys, &a, &h, tol)?;
            let out = DualWindowReport {
                window,
                rate: report.rate,
                is_alternate_dual: report.is_alternate_dual,
            };
            emit(&out, output.as_deref())?;
            Ok(EXIT_OK)
        }
        GaborCmd::Perturb {
            system,
            window,
            a1,
            a2,
            trials,
            seed,
            output,
        } => {
            let sys: GaborSystem = io::read_json(system)?;
            sys.validate()?;
            let g2 = read_window(window)?;
            let a1 = commuting_operator(&sys, &CommutingSpec::Scalar(*a1), tol)?;
            let a2 = commuting_operator(&sys, &CommutingSpec::Scalar(*a2), tol)?;
            let cfg = GaborAuditConfig {
                trials: *trials,
                seed: *seed,
                mode: ExecMode::default(),
            };
            let audits = gabor_perturbation_audit(&sys, &g2, &a1, &a2, &cfg, tol)?;
            emit(&audits, output.as_deref())?;
            Ok(exit_code(&audits))
        }
    }
}

pub fn corpus(args: &CorpusArgs, tol: &TolerancePolicy) -> Result<u8> {
    let mut cfg = CorpusConfig::new(args.seed, args.trials as usize);
    cfg.samples = args.samples;
    cfg.tol = *tol;
    if args.sequential {
        cfg.mode = ExecMode::Sequential;
    }
    let report = run_corpus(&cfg)?;
    let text = match args.format {
        Format::Json => io::to_json(&report),
        Format::Csv => report.to_csv(),
    };
    match &args.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| FrameError::Input(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    eprintln!(
        "corpus: {} applicable, {} violated, {} minimal-norm equality gaps",
        report.summary.applicable(),
        report.violations(),
        report.minimal_norm_equality_gaps
    );
    Ok(if report.violations() > 0 {
        EXIT_VIOLATED
    } else {
        EXIT_OK
    })
}
