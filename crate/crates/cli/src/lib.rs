//! `prk`: class numbers, units, p-rationality verdicts, table scans and
//! density reports as json, csv or text.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage or input error,
//! 3 computational failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use prational::classnum::{class_number_certificate, h_imaginary_analytic, h_imaginary_forms, louboutin_bound};
use prational::density::{bonferroni_chain, euler_density, paper_lowerbound_product};
use prational::prationality::{
    check_f_alpha, check_k_alpha_with, fibonacci_criterion_applies, generalized_fibonacci_mod, is_p_rational,
    unit_is_local_pth_power,
};
use prational::report::{imaginary_scan_records, real_scan_records, record, verify_table, TABLE3_RANGE};
use prational::scan::{scan_consecutive_imaginary, scan_real_family_with};
use prational::search::find_prime_square_divisors;
use prational::unit::fundamental_unit_with;
use prational::{
    make_field, Cell, Error, Evidence, FixtureSet, Format, Method, PRationalityVerdict, Precision, Record,
    ReportDocument, Signature, Table, Variant,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

/// Replaces the embedded table fixture for `tables --verify`.
pub const FIXTURE_ENV: &str = "PRK_FIXTURE";

#[derive(Debug, Parser)]
#[command(name = "prk", version, about = "p-rationality certificates for quadratic fields")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for scans and sieves.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Text,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Text => Format::Text,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Forms,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Shifted,
    Pmul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class number of Q(sqrt d).
    Classnum {
        #[arg(short = 'd', allow_negative_numbers = true)]
        d: i64,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Fundamental unit and regulator of a real field.
    Fundunit {
        #[arg(short = 'd', allow_negative_numbers = true)]
        d: i64,
    },
    /// Generalized Fibonacci residue F_q mod p^2.
    Fibtest {
        #[arg(short = 'd', allow_negative_numbers = true)]
        d: i64,
        #[arg(short = 'p')]
        p: u64,
    },
    /// p-rationality verdict for Q(sqrt d).
    Prational {
        #[arg(short = 'd', allow_negative_numbers = true)]
        d: i64,
        #[arg(short = 'p')]
        p: u64,
    },
    /// Class numbers of Q(sqrt(-(p-j))) or Q(sqrt(-p(p-j))), j = 1..k.
    ScanImaginary {
        #[arg(short = 'k')]
        k: u64,
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// Square-free flags and verdicts for p^2+1, p^2-2, p^2+2, p^2+4.
    ScanReal {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// Smallest prime p with m_i^2 | p - r_i.
    Primesearch {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        shifts: Vec<i64>,
        #[arg(long, value_delimiter = ',', required = true)]
        moduli: Vec<u64>,
        #[arg(long)]
        limit: u64,
    },
    /// Euler product for primes with p^2 + c square-free.
    Density {
        #[arg(short = 'c', allow_negative_numbers = true)]
        c: i64,
        #[arg(long, default_value_t = 100_000)]
        cutoff: u64,
        #[arg(long)]
        empirical: Option<u64>,
    },
    /// K_alpha = Q(sqrt(n(n+2)), sqrt(n(n-2))), n = alpha p.
    Kalpha {
        #[arg(short = 'p')]
        p: u64,
        #[arg(long)]
        alpha: u64,
    },
    /// F_alpha = Q(sqrt(p(p+2)), sqrt(p(p-2)), sqrt(-alpha)).
    Falpha {
        #[arg(short = 'p')]
        p: u64,
        #[arg(long)]
        alpha: u64,
    },
    /// Regenerate the published tables and compare with the fixtures.
    Tables {
        #[arg(long, value_enum)]
        verify: TableArg,
    },
}

/// A finished report plus whether it records a verification mismatch.
pub struct CommandOutput {
    pub document: ReportDocument,
    pub mismatch: bool,
}

impl From<ReportDocument> for CommandOutput {
    fn from(document: ReportDocument) -> Self {
        Self {
            document,
            mismatch: false,
        }
    }
}

/// Parses `argv` (program name first), runs the command and writes the
/// report to standard output or `--out`.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli.command, Precision::from_env())),
            Err(e) => Err(Error::Internal(e.to_string())),
        },
        None => execute(&cli.command, Precision::from_env()),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let rendered = match outcome.document.render(cli.format.into()) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_COMPUTATION;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, rendered.as_bytes()),
        None => out.write_all(rendered.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write report: {e}");
        return EXIT_USAGE;
    }
    if outcome.mismatch {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    }
}

/// Bad input maps to 2, failures of the computation itself to 3.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidRadicand(_)
        | Error::Ramified { .. }
        | Error::NotOddPrime(_)
        | Error::Signature { .. }
        | Error::Precondition(_)
        | Error::InvalidModuli { .. }
        | Error::InfeasibleWindow { .. }
        | Error::Zero(_) => EXIT_USAGE,
        Error::UnsupportedRange(_)
        | Error::FactorBound { .. }
        | Error::Precision { .. }
        | Error::Exhausted { .. }
        | Error::Degenerate(_)
        | Error::Internal(_)
        | Error::Schema(_) => EXIT_COMPUTATION,
    }
}

pub fn execute(command: &Command, prec: Precision) -> prational::Result<CommandOutput> {
    match *command {
        Command::Classnum { d, method } => classnum(d, method, prec).map(Into::into),
        Command::Fundunit { d } => fundunit(d, prec).map(Into::into),
        Command::Fibtest { d, p } => fibtest(d, p, prec).map(Into::into),
        Command::Prational { d, p } => {
            let v = is_p_rational(&make_field(d)?, p, prec)?;
            Ok(verdict_document(ReportDocument::new("prational").param("d", d).param("p", p), &v).into())
        }
        Command::ScanImaginary { k, variant, from, to } => scan_imaginary(k, variant, from, to).map(Into::into),
        Command::ScanReal { from, to } => scan_real(from, to, prec).map(Into::into),
        Command::Primesearch {
            ref shifts,
            ref moduli,
            limit,
        } => primesearch(shifts, moduli, limit).map(Into::into),
        Command::Density { c, cutoff, empirical } => density(c, cutoff, empirical).map(Into::into),
        Command::Kalpha { p, alpha } => {
            let v = check_k_alpha_with(p, alpha, prec)?;
            Ok(verdict_document(ReportDocument::new("kalpha").param("p", p).param("alpha", alpha), &v).into())
        }
        Command::Falpha { p, alpha } => {
            let v = check_f_alpha(p, alpha)?;
            Ok(verdict_document(ReportDocument::new("falpha").param("p", p).param("alpha", alpha), &v).into())
        }
        Command::Tables { verify } => tables(verify),
    }
}

fn signature_name(s: Signature) -> &'static str {
    match s {
        Signature::Real => "real",
        Signature::Imaginary => "imaginary",
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::ReducedForms => "reduced-forms",
        Method::DirichletSum => "dirichlet-sum",
        Method::AnalyticReal => "analytic-real",
    }
}

fn big_cell(n: &BigInt) -> Cell {
    n.to_i64().map_or_else(|| Cell::Text(n.to_string()), Cell::Int)
}

fn classnum(d: i64, method: Option<MethodArg>, prec: Precision) -> prational::Result<ReportDocument> {
    let field = make_field(d)?;
    let mut doc = ReportDocument::new("classnum").param("d", d);
    if let Some(m) = method {
        doc = doc.param("method", if m == MethodArg::Forms { "forms" } else { "analytic" });
    }
    let (h, method, bound, l_value) = match (method, field.signature()) {
        (Some(MethodArg::Forms), _) => (h_imaginary_forms(&field)?, Method::ReducedForms, Some(louboutin_bound(&field)?), None),
        (Some(MethodArg::Analytic), Signature::Imaginary) => {
            (h_imaginary_analytic(&field)?, Method::DirichletSum, Some(louboutin_bound(&field)?), None)
        }
        _ => {
            let c = class_number_certificate(&field, prec)?;
            (c.h, c.method, c.bound, c.l_value)
        }
    };
    doc.rows.push(record([
        ("radicand", field.radicand().into()),
        ("discriminant", field.discriminant().into()),
        ("signature", signature_name(field.signature()).into()),
        ("h", h.into()),
        ("method", method_name(method).into()),
        ("bound", bound.into()),
        ("l_value", l_value.into()),
    ]));
    doc.summarize("h", h);
    Ok(doc)
}

fn fundunit(d: i64, prec: Precision) -> prational::Result<ReportDocument> {
    let field = make_field(d)?;
    let unit = fundamental_unit_with(&field, prec)?;
    let mut doc = ReportDocument::new("fundunit").param("d", d);
    doc.rows.push(record([
        ("radicand", field.radicand().into()),
        ("t", big_cell(&unit.t)),
        ("u", big_cell(&unit.u)),
        ("sigma", unit.sigma.into()),
        ("norm", unit.norm.into()),
        ("trace", big_cell(&unit.trace())),
        ("regulator", unit.regulator.into()),
    ]));
    doc.summarize("norm_equation_holds", unit.satisfies_norm_equation(field.radicand()));
    Ok(doc)
}

fn fibtest(d: i64, p: u64, prec: Precision) -> prational::Result<ReportDocument> {
    let field = make_field(d)?;
    let r = generalized_fibonacci_mod(&field, p)?;
    let unit = fundamental_unit_with(&field, prec)?;
    let applies = fibonacci_criterion_applies(&unit, p);
    let local = unit_is_local_pth_power(&field, p)?;
    let mut doc = ReportDocument::new("fibtest").param("d", d).param("p", p);
    doc.rows.push(record([
        ("radicand", field.radicand().into()),
        ("p", p.into()),
        ("f", r.f.into()),
        ("q", r.q.into()),
        ("residue", r.residue.into()),
        ("is_one", (r.residue == 1).into()),
        ("criterion_applies", applies.into()),
        ("local_pth_power", local.into()),
    ]));
    doc.summarize("residue", r.residue);
    doc.summarize("local_pth_power", local);
    Ok(doc)
}

fn evidence_record(e: &Evidence) -> Record {
    let (kind, radicand, value, flag, detail): (&str, Option<i64>, Option<u64>, Option<bool>, Option<String>) = match e {
        Evidence::ClassNumber {
            certificate,
            p_divides_h,
        } => (
            "class-number",
            Some(certificate.field.radicand()),
            Some(certificate.h),
            Some(*p_divides_h),
            Some(format!("{}, bound {}", method_name(certificate.method), Cell::from(certificate.bound))),
        ),
        Evidence::Fibonacci { residue, is_one } => (
            "fibonacci",
            Some(residue.field.radicand()),
            Some(residue.residue),
            Some(*is_one),
            Some(format!("q = {}", residue.q)),
        ),
        Evidence::DirectLocalPower {
            radicand,
            is_pth_power,
            ..
        } => ("direct-local-power", Some(*radicand), None, Some(*is_pth_power), None),
        Evidence::RamifiedLocalPower {
            radicand,
            is_pth_power,
            ..
        } => ("ramified-local-power", Some(*radicand), None, Some(*is_pth_power), None),
        Evidence::Ramified { radicand, p } => ("ramified", Some(*radicand), None, None, Some(format!("{p} ramifies"))),
        Evidence::Subfield { radicand, outcome } => ("subfield", Some(*radicand), None, None, Some(outcome.to_string())),
        Evidence::Advisory { note } => ("advisory", None, None, None, Some(note.clone())),
        Evidence::Premise { note } => ("premise", None, None, None, Some(note.clone())),
        Evidence::Unsupported { note } => ("unsupported", None, None, None, Some(note.clone())),
    };
    record([
        ("evidence", kind.into()),
        ("radicand", radicand.into()),
        ("value", value.into()),
        ("flag", flag.into()),
        ("detail", detail.into()),
    ])
}

fn verdict_document(mut doc: ReportDocument, v: &PRationalityVerdict) -> ReportDocument {
    doc.rows = v.reasons.iter().map(evidence_record).collect();
    doc.summarize("outcome", v.outcome.to_string());
    doc.summarize(
        "radicands",
        v.radicands.iter().map(i64::to_string).collect::<Vec<_>>().join(" "),
    );
    doc
}

fn scan_imaginary(k: u64, variant: VariantArg, from: u64, to: u64) -> prational::Result<ReportDocument> {
    let (variant, name, table) = match variant {
        VariantArg::Shifted => (Variant::Shifted, "shifted", Table::One),
        VariantArg::Pmul => (Variant::PMultiplied, "pmul", Table::Two),
    };
    let rows = scan_consecutive_imaginary(k, variant, from, to)?;
    let mut doc = ReportDocument::new("scan-imaginary")
        .param("k", k)
        .param("variant", name)
        .param("from", from)
        .param("to", to);
    doc.rows = imaginary_scan_records(&rows);
    let simultaneous: Vec<u64> = rows.iter().filter(|r| r.simultaneous).map(|r| r.p).collect();
    let published: Vec<u64> = FixtureSet::embedded()
        .primes(table)
        .into_iter()
        .filter(|p| (from..=to).contains(p))
        .collect();
    let notes: Vec<String> = rows
        .iter()
        .flat_map(|r| r.notes.iter().map(move |n| format!("p = {}: {n}", r.p)))
        .collect();
    doc.summarize("primes", rows.len());
    doc.summarize("simultaneous", simultaneous.len());
    doc.summarize("all_simultaneous", simultaneous.len() == rows.len());
    doc.summarize("published_primes", join(&published));
    doc.summarize("published_all_simultaneous", published.iter().all(|p| simultaneous.contains(p)));
    if !notes.is_empty() {
        doc.summarize("notes", notes.join("; "));
    }
    Ok(doc)
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn scan_real(from: u64, to: u64, prec: Precision) -> prational::Result<ReportDocument> {
    let rows = scan_real_family_with(from, to, prec)?;
    let mut doc = ReportDocument::new("scan-real").param("from", from).param("to", to);
    doc.rows = real_scan_records(&rows);
    let members: Vec<u64> = rows.iter().filter(|r| r.all_squarefree).map(|r| r.p).collect();
    let simultaneous: Vec<u64> = rows.iter().filter(|r| r.simultaneous == Some(true)).map(|r| r.p).collect();
    doc.summarize("primes", rows.len());
    doc.summarize("all_squarefree", join(&members));
    doc.summarize("simultaneous", join(&simultaneous));
    let published: Vec<u64> = FixtureSet::embedded()
        .primes(Table::Three)
        .into_iter()
        .filter(|p| (from..=to).contains(p))
        .collect();
    doc.summarize("published_primes", join(&published));
    if to <= TABLE3_RANGE {
        doc.summarize("matches_published", published == members);
    }
    Ok(doc)
}

fn primesearch(shifts: &[i64], moduli: &[u64], limit: u64) -> prational::Result<ReportDocument> {
    let r = find_prime_square_divisors(shifts, moduli, limit)?;
    let mut doc = ReportDocument::new("primesearch")
        .param("shifts", shifts.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
        .param("moduli", join(moduli).replace(' ', ","))
        .param("limit", limit);
    for (s, a) in r.shifts.iter().zip(r.log_exponents()) {
        let square = s.m * s.m;
        doc.rows.push(record([
            ("r", s.r.into()),
            ("m", s.m.into()),
            ("m_squared", square.into()),
            ("quotient", ((r.p as i64 - s.r) / square as i64).into()),
            ("log_exponent", a.into()),
        ]));
    }
    doc.summarize("p", r.p);
    doc.summarize("residue", big_cell(&r.plan.residue));
    doc.summarize("modulus", big_cell(&r.plan.modulus));
    doc.summarize("scan_steps", r.scan_steps);
    doc.summarize("verified", r.verify());
    Ok(doc)
}

fn density(c: i64, cutoff: u64, empirical: Option<u64>) -> prational::Result<ReportDocument> {
    let mut report = euler_density(c, cutoff)?;
    if let Some(x) = empirical {
        report = report.with_empirical(x)?;
    }
    let mut doc = ReportDocument::new("density").param("c", c).param("cutoff", cutoff);
    if let Some(x) = empirical {
        doc = doc.param("empirical", x);
    }
    let paper = report.paper_constant;
    doc.rows.push(record([
        ("c", c.into()),
        ("cutoff", cutoff.into()),
        ("product_value", report.product_value.into()),
        ("tail_bound", report.tail_bound.into()),
        ("terms_used", report.terms_used.into()),
        ("empirical_x", report.empirical_x.into()),
        ("empirical_ratio", report.empirical_ratio.into()),
        ("paper_constant", paper.map(|p| p.value).into()),
        ("agrees_with_paper", paper.map(|p| p.agrees).into()),
    ]));
    if let Some(ratio) = report.empirical_ratio {
        doc.summarize("empirical_gap", (ratio - report.product_value).abs());
    }
    if let Some(p) = paper {
        doc.summarize("agrees_with_paper", p.agrees);
        if !p.agrees {
            doc.summarize(
                "discrepancy",
                format!(
                    "product {} is below the quoted lower bound {}",
                    Cell::from(report.product_value),
                    p.value
                ),
            );
        }
    }
    if c == 1 || c == 4 {
        let k = paper_lowerbound_product(cutoff)?;
        doc.summarize("k_product", k.value);
        doc.summarize("k_product_tail_bound", k.tail_bound);
    }
    if FAMILY.contains(&c) {
        let (computed, quoted) = chains(cutoff)?;
        let show = |v: Vec<f64>| v.into_iter().map(|x| Cell::from(x).to_string()).collect::<Vec<_>>().join(" ");
        doc.summarize("bonferroni_chain", show(computed));
        doc.summarize("quoted_chain", show(quoted));
    }
    Ok(doc)
}

const FAMILY: [i64; 4] = [1, -2, 2, 4];

/// Bonferroni chains over `c = 1, -2, 2, 4` from the certified lower ends of
/// the computed products and from the quoted constants.
fn chains(cutoff: u64) -> prational::Result<(Vec<f64>, Vec<f64>)> {
    let computed = FAMILY
        .iter()
        .map(|&c| euler_density(c, cutoff).map(|r| r.product_value - r.tail_bound))
        .collect::<prational::Result<Vec<_>>>()?;
    let quoted = FAMILY
        .iter()
        .map(|&c| prational::density::paper_constant(c).unwrap_or(0.0))
        .collect::<Vec<_>>();
    Ok((bonferroni_chain(&computed)?, bonferroni_chain(&quoted)?))
}

fn tables(which: TableArg) -> prational::Result<CommandOutput> {
    let list: Vec<Table> = match which {
        TableArg::One => vec![Table::One],
        TableArg::Two => vec![Table::Two],
        TableArg::Three => vec![Table::Three],
        TableArg::All => Table::ALL.to_vec(),
    };
    let fixture = match std::env::var_os(FIXTURE_ENV) {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", PathBuf::from(&path).display())))?;
            FixtureSet::parse(&text)?
        }
        None => FixtureSet::embedded(),
    };
    let mut doc = ReportDocument::new("tables").param(
        "verify",
        match which {
            TableArg::All => "all".to_owned(),
            _ => list[0].number().to_string(),
        },
    );
    let mut total_mismatches = 0;
    for table in list {
        let check = verify_table(table, &fixture)?;
        let expected = fixture.table(table);
        for row in &check.rows {
            let fixed = expected.iter().find(|r| r.p == row.p);
            for (i, column) in table.columns().iter().enumerate() {
                let want = fixed.and_then(|r| r.values.get(i).copied());
                doc.rows.push(record([
                    ("table", table.number().into()),
                    ("p", row.p.into()),
                    ("column", (*column).into()),
                    ("expected", want.into()),
                    ("computed", row.values.get(i).copied().into()),
                    ("matches", (want == row.values.get(i).copied()).into()),
                ]));
            }
        }
        for m in check.mismatches.iter().filter(|m| m.column == "p" && m.computed.is_none()) {
            doc.rows.push(record([
                ("table", table.number().into()),
                ("p", m.p.into()),
                ("column", "p".into()),
                ("expected", m.expected.into()),
                ("computed", Cell::Null),
                ("matches", false.into()),
            ]));
        }
        let n = table.number();
        doc.summarize(&format!("table{n}_entries"), check.entries_checked);
        doc.summarize(&format!("table{n}_mismatches"), check.mismatches.len());
        total_mismatches += check.mismatches.len();
    }
    doc.summarize("mismatches", total_mismatches);
    Ok(CommandOutput {
        document: doc,
        mismatch: total_mismatches > 0,
    })
}
