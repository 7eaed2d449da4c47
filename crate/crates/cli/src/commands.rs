//! Experiment commands; each returns the text it would write.

use hankel_lab::asymptotics::{compare_decay, decay_report_text};
use hankel_lab::hankel::{schatten, spectrum, spectrum_csv, spectrum_diagnostics, GramSpec};
use hankel_lab::ida::{ida_profile, IdaProfile};
use hankel_lab::lattice::build_lattice;
use hankel_lab::rearrange::{rearrangement, weak_lp, RearrangementCurve, WeightedSamples};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::table::Table;

pub const IDA_HEADER: &[&str] = &[
    "index",
    "re",
    "im",
    "tau",
    "cell_measure",
    "G",
    "MO",
    "hat_re",
    "hat_im",
    "degree_used",
];
pub const SPECTRUM_HEADER: &[&str] = &["n", "s_n"];

pub struct Output {
    pub body: String,
    /// Side report (`key=value` lines), if any.
    pub diagnostics: Option<String>,
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Output, CliError> {
    let model = cfg.space()?;
    let f = cfg.symbol()?;
    let n = cfg.trunc()?;
    let spec = match cfg.proj()? {
        Some(m) => GramSpec::with_projection(model, f, n, m)?,
        None => GramSpec::new(model, f, n)?,
    };
    let sp = spectrum(&spec)?;
    let p = cfg.p()?;
    let (norm, weak) = schatten(&sp, p)?;
    let mut diagnostics = spectrum_diagnostics(&spec, &sp);
    diagnostics.push_str(&format!(
        "p={p}\nschatten_p={norm}\nweak_schatten_p={weak}\n"
    ));
    Ok(Output {
        body: spectrum_csv(&sp),
        diagnostics: Some(diagnostics),
    })
}

fn profile(cfg: &RunConfig) -> Result<IdaProfile, CliError> {
    let model = cfg.space()?;
    let f = cfg.symbol()?;
    let delta = cfg.delta(&model)?;
    let lat = build_lattice(&model, delta, cfg.extent(&model)?)?;
    Ok(ida_profile(&f, &model, &lat, delta, cfg.degree()?)?)
}

pub fn cmd_ida(cfg: &RunConfig) -> Result<Output, CliError> {
    Ok(Output {
        body: profile(cfg)?.to_csv(),
        diagnostics: None,
    })
}

fn check_column(column: &str) -> Result<(), CliError> {
    if column == "G" || column == "MO" {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "column must be G or MO, got `{column}`"
        )))
    }
}

fn curve_from(values: Vec<f64>, measures: Vec<f64>) -> Result<RearrangementCurve, CliError> {
    Ok(rearrangement(&WeightedSamples::new(values, measures)?)?)
}

/// Rearranges column `column` (`G` or `MO`) of an IDA profile CSV against its cell measures.
pub fn curve_from_table(table: &Table, column: &str) -> Result<RearrangementCurve, CliError> {
    table.expect_schema(IDA_HEADER)?;
    check_column(column)?;
    curve_from(table.column(column)?, table.column("cell_measure")?)
}

pub fn cmd_rearrange(cfg: &RunConfig) -> Result<Output, CliError> {
    let column = cfg.raw("column").unwrap_or("G");
    let curve = match cfg.path("in") {
        Some(path) => curve_from_table(&Table::read(&path)?, column)?,
        None => {
            check_column(column)?;
            let prof = profile(cfg)?;
            let values = if column == "G" { prof.g } else { prof.mo };
            curve_from(values, prof.cell_measure)?
        }
    };
    let p = cfg.p()?;
    let diagnostics = format!(
        "p={p}\ntotal_measure={}\nlp_norm={}\nweak_lp={}\n",
        curve.total_measure,
        curve.lp_norm(p)?,
        weak_lp(&curve, p)?
    );
    Ok(Output {
        body: curve.to_csv(),
        diagnostics: Some(diagnostics),
    })
}

/// Index map `n -> n^q` from `power:q`.
fn parse_rho(rho: &str) -> Result<f64, CliError> {
    let bad = || CliError::Config(format!("rho `{rho}` is not `power:q` with q > 0"));
    let q: f64 = rho
        .strip_prefix("power:")
        .ok_or_else(bad)?
        .parse()
        .map_err(|_| bad())?;
    if q > 0.0 && q.is_finite() {
        Ok(q)
    } else {
        Err(bad())
    }
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<Output, CliError> {
    let sp_table = Table::read(&cfg.require_path("spectrum")?)?;
    sp_table.expect_schema(SPECTRUM_HEADER)?;
    let s = sp_table.column("s_n")?;
    let curve = curve_from_table(&Table::read(&cfg.require_path("ida")?)?, "G")?;
    let rho = cfg.raw("rho").unwrap_or("power:1");
    let q = parse_rho(rho)?;
    let g: Vec<f64> = (0..s.len())
        .map(|n| curve.eval((n as f64).powf(q)))
        .collect();
    let window = match cfg.window()? {
        Some(w) => w,
        None => (5, 50.min(s.len().saturating_sub(1))),
    };
    let report = compare_decay(&s, &g, window)?;
    let mut body = format!("rho={rho}\n");
    body.push_str(&decay_report_text(&report));
    body.push_str(&format!("spread={}\n", report.spread()));
    Ok(Output {
        body,
        diagnostics: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_parsing() {
        assert_eq!(parse_rho("power:1").unwrap(), 1.0);
        assert_eq!(parse_rho("power:0.5").unwrap(), 0.5);
        assert!(parse_rho("linear").is_err());
        assert!(parse_rho("power:-1").is_err());
    }

    #[test]
    fn ida_schema_enforced() {
        let t = Table {
            headers: vec!["n".into(), "s_n".into()],
            rows: vec![],
        };
        assert!(matches!(
            curve_from_table(&t, "G"),
            Err(CliError::Config(_))
        ));
    }
}
