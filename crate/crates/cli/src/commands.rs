use std::fs;
use std::path::Path;

use num_rational::BigRational;
use predual::daugavet::{daugavet_defect, id_plus_t_norm, operator_norm, SweepRow};
use predual::generate;
use predual::girth::{build_girth_polyline, verify_polyline};
use predual::io::{functional_doc, CertificateDoc, FunctionalDoc, InstanceDocument, Mode};
use predual::splitter::{
    construct_psi, decide, enumerate_exact_solutions, instance_of, verify_certificate, SplitInstance,
};
use predual::ultra::{certify_limit, run_sequence, FunctionalSequence, Generator};
use predual::{defect_sweep, Error, FunctionSpec, Real, Result, Tolerances, WorkCap};
use serde::Serialize;

use crate::{Cli, Command, Format, ModeArg};

pub struct Outcome {
    pub output: String,
    pub code: u8,
    pub notes: Vec<String>,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome {
            output,
            code: 0,
            notes: Vec::new(),
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::WorkCapExceeded { .. } => 3,
        _ => 2,
    }
}

pub fn emit(cli: &Cli, output: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, output),
        None => {
            print!("{output}");
            Ok(())
        }
    }
}

fn read_document(path: &Path) -> Result<InstanceDocument> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    InstanceDocument::from_json(&text)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Input(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn mode_of(cli: &Cli, doc: Option<&InstanceDocument>, fallback: Mode) -> Mode {
    match cli.mode {
        Some(ModeArg::Exact) => Mode::Exact,
        Some(ModeArg::Float) => Mode::Float,
        None => doc.map_or(fallback, |d| d.mode),
    }
}

/// Tolerances from the document, with the decision tolerance from `--tol`.
fn tolerances<R: Real>(cli: &Cli, doc: &InstanceDocument) -> Result<Tolerances> {
    let mut tol = doc.tolerances::<R>()?;
    if !R::EXACT {
        tol.equality = cli.tol;
    }
    Ok(tol)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    if !(cli.tol >= 0.0) {
        return Err(Error::Input("--tol must be nonnegative".into()));
    }
    match &cli.command {
        Command::Solve {
            instance,
            enumerate,
            verify,
        } => {
            let doc = read_document(instance)?;
            match (mode_of(cli, Some(&doc), Mode::Exact), enumerate) {
                (Mode::Exact, Some(cap)) => solutions(&doc, *cap),
                (Mode::Float, Some(_)) => Err(Error::Input("--enumerate needs exact mode".into())),
                (Mode::Exact, None) => solve::<BigRational>(cli, &doc, *verify),
                (Mode::Float, None) => solve::<f64>(cli, &doc, *verify),
            }
        }
        Command::Split { instance, verify } => {
            let doc = read_document(instance)?;
            match mode_of(cli, Some(&doc), Mode::Exact) {
                Mode::Exact => split::<BigRational>(cli, &doc, *verify),
                Mode::Float => split::<f64>(cli, &doc, *verify),
            }
        }
        Command::Girth {
            instance,
            samples,
            format,
        } => {
            let doc = read_document(instance)?;
            match mode_of(cli, Some(&doc), Mode::Exact) {
                Mode::Exact => girth::<BigRational>(cli, &doc, *samples, *format),
                Mode::Float => girth::<f64>(cli, &doc, *samples, *format),
            }
        }
        Command::Daugavet {
            g,
            h,
            resolutions,
            instance,
        } => match instance {
            Some(path) => {
                let doc = read_document(path)?;
                match mode_of(cli, Some(&doc), Mode::Exact) {
                    Mode::Exact => daugavet_instance::<BigRational>(&doc),
                    Mode::Float => daugavet_instance::<f64>(&doc),
                }
            }
            None => {
                let (g, h) = (FunctionSpec::parse(g)?, FunctionSpec::parse(h)?);
                let has_sine = [&g, &h].iter().any(|s| matches!(s, FunctionSpec::Sine { .. }));
                let fallback = if has_sine { Mode::Float } else { Mode::Exact };
                match mode_of(cli, None, fallback) {
                    Mode::Exact => sweep::<BigRational>(&g, &h, resolutions),
                    Mode::Float => sweep::<f64>(&g, &h, resolutions),
                }
            }
        },
        Command::Ultra {
            generator,
            stages,
            cauchy_tol,
            certify,
        } => {
            let generator: Generator = generator.parse()?;
            let seq = FunctionalSequence::new(generator, *stages, cli.seed)?;
            match mode_of(cli, None, Mode::Float) {
                Mode::Exact => ultra::<BigRational>(&seq, *cauchy_tol, *certify),
                Mode::Float => ultra::<f64>(&seq, *cauchy_tol, *certify),
            }
        }
        Command::Gen {
            kind,
            dim,
            atoms,
            grid,
            g,
            h,
            n,
        } => {
            let doc = match kind.as_str() {
                "density" => generate::density(*dim, cli.seed)?,
                "spectral" => generate::spectral(*atoms, &<BigRational as Real>::parse_str(grid)?, cli.seed)?,
                "rank-one" => generate::rank_one(&FunctionSpec::parse(g)?, &FunctionSpec::parse(h)?, *n, cli.seed)?,
                other => {
                    return Err(Error::Input(format!(
                        "unknown generator kind '{other}', expected density, spectral or rank-one"
                    )))
                }
            };
            Ok(Outcome::ok(doc.canonical()?.to_json()?))
        }
        Command::Verify { instance, certificate } => {
            let doc = read_document(instance)?;
            let text = fs::read_to_string(certificate)
                .map_err(|e| Error::Input(format!("cannot read {}: {e}", certificate.display())))?;
            let cert: CertificateDoc =
                serde_json::from_str(&text).map_err(|e| Error::Input(format!("malformed certificate: {e}")))?;
            let fallback = cert.mode;
            match mode_of(cli, None, fallback) {
                Mode::Exact => verify::<BigRational>(cli, &doc, &cert),
                Mode::Float => verify::<f64>(cli, &doc, &cert),
            }
        }
    }
}

fn solve<R: Real>(cli: &Cli, doc: &InstanceDocument, with_check: bool) -> Result<Outcome> {
    let phi = doc.functional::<R>()?;
    let tol = tolerances::<R>(cli, doc)?;
    let inst = instance_of(&phi, &tol)?;
    let decision = decide(&inst, cli.tol, WorkCap::from_env())?;
    let cert = construct_psi(&phi, &decision.selection, &tol)?;
    let check = with_check.then(|| verify_certificate(&phi, &cert, &tol));
    let out = to_json(&CertificateDoc::new(&cert, decision.solvable, check))?;
    let mut outcome = Outcome::ok(out);
    if !decision.solvable {
        outcome.code = 1;
        outcome.notes.push(format!(
            "unsolvable: best selection has defect {}",
            decision.defect.render()
        ));
    }
    Ok(outcome)
}

fn solutions(doc: &InstanceDocument, cap: usize) -> Result<Outcome> {
    let phi = doc.functional::<BigRational>()?;
    let inst: SplitInstance<BigRational> = instance_of(&phi, &Tolerances::exact())?;
    let list = enumerate_exact_solutions(&inst, cap)?;
    #[derive(Serialize)]
    struct Listing {
        clusters: Vec<(String, usize)>,
        selections: Vec<Vec<usize>>,
    }
    let listing = Listing {
        clusters: inst.clusters().iter().map(|(l, m)| (l.render(), *m)).collect(),
        selections: list.clone(),
    };
    let mut outcome = Outcome::ok(to_json(&listing)?);
    if list.is_empty() {
        outcome.code = 1;
    }
    Ok(outcome)
}

fn split<R: Real>(cli: &Cli, doc: &InstanceDocument, with_check: bool) -> Result<Outcome> {
    let phi = doc.functional::<R>()?;
    let tol = tolerances::<R>(cli, doc)?;
    let cert = predual::approx_split(&phi, &tol, WorkCap::from_env())?;
    let solvable = if R::EXACT { cert.defect.is_zero() } else { cert.defect.to_f64() <= cli.tol };
    let check = with_check.then(|| verify_certificate(&phi, &cert, &tol));
    Ok(Outcome::ok(to_json(&CertificateDoc::new(&cert, solvable, check))?))
}

fn girth<R: Real>(cli: &Cli, doc: &InstanceDocument, samples: usize, format: Format) -> Result<Outcome> {
    let phi = doc.functional::<R>()?;
    let tol = tolerances::<R>(cli, doc)?;
    let polyline = build_girth_polyline(&phi, samples, &tol)?;
    let check = verify_polyline(&polyline);
    let output = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            polyline.write_csv(&mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::Input(e.to_string()))?
        }
        Format::Json => {
            #[derive(Serialize)]
            struct PolylineDoc {
                times: Vec<String>,
                base_norm: String,
                selections: Vec<Vec<usize>>,
                samples: Vec<FunctionalDoc>,
                check: predual::girth::PolylineCheck,
            }
            to_json(&PolylineDoc {
                times: polyline.times.iter().map(Real::render).collect(),
                base_norm: polyline.base_norm.render(),
                selections: polyline.selections.clone(),
                samples: polyline.samples.iter().map(functional_doc).collect(),
                check: check.clone(),
            })?
        }
    };
    let limit = if R::EXACT { 0.0 } else { cli.tol };
    let violation = check.max_violation();
    Ok(Outcome {
        output,
        code: if violation <= limit { 0 } else { 1 },
        notes: vec![format!(
            "girth: {} samples, max violation {violation:e}, total length {}",
            polyline.len(),
            check.total_length
        )],
    })
}

fn csv_number<R: Real>(x: &R) -> String {
    if R::EXACT {
        x.render()
    } else {
        format!("{:.16e}", x.to_f64())
    }
}

fn sweep<R: Real>(g: &FunctionSpec, h: &FunctionSpec, resolutions: &[usize]) -> Result<Outcome> {
    let rows: Vec<SweepRow<R>> = defect_sweep(g, h, resolutions)?;
    let mut out = String::from("n,norm_t,norm_id_plus_t,defect\n");
    let mut notes = Vec::new();
    for r in &rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            csv_number(&r.norm_t),
            csv_number(&r.norm_id_plus_t),
            csv_number(&r.defect)
        ));
        if !r.within_bound {
            notes.push(format!("n = {}: defect exceeds 2·max|g|·max|h|/n", r.n));
        }
    }
    Ok(Outcome {
        output: out,
        code: if notes.is_empty() { 0 } else { 1 },
        notes,
    })
}

fn daugavet_instance<R: Real>(doc: &InstanceDocument) -> Result<Outcome> {
    let (space, op) = doc.rank_one::<R>()?;
    let out = format!(
        "n,norm_t,norm_id_plus_t,defect\n{},{},{},{}\n",
        space.dim(),
        csv_number(&operator_norm(&space, &op)?),
        csv_number(&id_plus_t_norm(&space, &op)?),
        csv_number(&daugavet_defect(&space, &op)?)
    );
    Ok(Outcome::ok(out))
}

fn ultra<R: Real>(seq: &FunctionalSequence, cauchy_tol: f64, certify: Option<f64>) -> Result<Outcome> {
    let report = run_sequence::<R>(seq, cauchy_tol, WorkCap::from_env())?;
    let mut outcome = Outcome::ok(to_json(&report)?);
    outcome.notes.push(format!("verdict: {}", report.verdict));
    if let Some(target) = certify {
        let ok = certify_limit(&report, target);
        outcome.notes.push(format!("certify_limit({target}) = {ok}"));
        if !ok {
            outcome.code = 1;
        }
    }
    Ok(outcome)
}

fn verify<R: Real>(cli: &Cli, doc: &InstanceDocument, cert: &CertificateDoc) -> Result<Outcome> {
    let phi = doc.functional::<R>()?;
    let tol = tolerances::<R>(cli, doc)?;
    let cert = cert.to_certificate(&phi)?;
    let check = verify_certificate(&phi, &cert, &tol);
    let limit = if R::EXACT { 0.0 } else { cli.tol };
    let mut outcome = Outcome::ok(to_json(&check)?);
    outcome.notes.push(format!("max violation {:e}", check.max_violation));
    if check.max_violation > limit {
        outcome.code = 1;
    }
    Ok(outcome)
}
