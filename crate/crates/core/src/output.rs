//! CSV artifacts. Every float is written with 9 significant digits so that
//! identical runs give identical bytes.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::analysis::{PulseMetrics, SpaceTime};
use crate::error::{Error, Result};
use crate::timedomain::Diagnostic;
use crate::FieldState;

pub const SPACE_TIME_HEADER: [&str; 10] = [
    "t",
    "z",
    "re_a_plus",
    "im_a_plus",
    "re_a_minus",
    "im_a_minus",
    "abs_a_plus",
    "abs_a_minus",
    "re_p12",
    "im_p12",
];

pub const METRICS_HEADER: [&str; 8] = [
    "t",
    "area_plus",
    "area_minus",
    "energy_plus",
    "energy_minus",
    "centroid",
    "width",
    "conversion",
];

pub const DISPERSION_HEADER: [&str; 5] =
    ["k", "re_omega", "im_omega", "re_chi_minus", "im_chi_minus"];

pub const ANALYTIC_HEADER: [&str; 7] = ["t", "z_plus", "z_minus", "l", "D", "theta_ratio", "P"];

pub const DIAGNOSTICS_HEADER: [&str; 5] =
    ["t", "energy_plus", "energy_minus", "p12_max", "cfl_margin"];

/// `x` in scientific notation with 9 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.8e}")
}

/// One row of the `dispersion` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRow {
    pub k: f64,
    pub omega: Complex64,
    pub chi_minus: Complex64,
}

/// One row of the `analytic` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticRow {
    pub t: f64,
    pub z_plus: f64,
    pub z_minus: f64,
    pub l: f64,
    pub separation: f64,
    pub theta_ratio: f64,
    pub conversion: f64,
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header)?;
    Ok(wtr)
}

fn write_rows<W: Write, const N: usize>(
    w: W,
    header: &[&str; N],
    rows: impl Iterator<Item = [f64; N]>,
) -> Result<()> {
    let mut wtr = writer(w, header)?;
    for row in rows {
        wtr.write_record(row.iter().map(|&x| num(x)))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Long format: one row per `(t, z)`. `p12` is written as zero when absent.
pub fn write_space_time<W: Write>(w: W, st: &SpaceTime) -> Result<()> {
    let zero = Complex64::new(0.0, 0.0);
    let rows = st.times.iter().enumerate().flat_map(|(n, &t)| {
        let f = &st.fields[n];
        let p = st.p12.as_ref().map(|p| &p[n]);
        st.z.iter().enumerate().map(move |(i, &z)| {
            let (ap, am) = (f.a_plus[i], f.a_minus[i]);
            let p12 = p.map_or(zero, |p| p[i]);
            [
                t,
                z,
                ap.re,
                ap.im,
                am.re,
                am.im,
                ap.norm(),
                am.norm(),
                p12.re,
                p12.im,
            ]
        })
    });
    write_rows(w, &SPACE_TIME_HEADER, rows)
}

/// Areas are written as moduli.
pub fn write_metrics<W: Write>(w: W, metrics: &[PulseMetrics]) -> Result<()> {
    let rows = metrics.iter().map(|m| {
        [
            m.t,
            m.area_plus.norm(),
            m.area_minus.norm(),
            m.energy_plus,
            m.energy_minus,
            m.centroid,
            m.width,
            m.conversion,
        ]
    });
    write_rows(w, &METRICS_HEADER, rows)
}

pub fn write_diagnostics<W: Write>(w: W, diagnostics: &[Diagnostic]) -> Result<()> {
    let rows = diagnostics
        .iter()
        .map(|d| [d.t, d.energy_plus, d.energy_minus, d.p12_max, d.cfl_margin]);
    write_rows(w, &DIAGNOSTICS_HEADER, rows)
}

pub fn write_dispersion<W: Write>(w: W, rows: &[DispersionRow]) -> Result<()> {
    let rows = rows
        .iter()
        .map(|r| [r.k, r.omega.re, r.omega.im, r.chi_minus.re, r.chi_minus.im]);
    write_rows(w, &DISPERSION_HEADER, rows)
}

pub fn write_analytic<W: Write>(w: W, rows: &[AnalyticRow]) -> Result<()> {
    let rows = rows.iter().map(|r| {
        [
            r.t,
            r.z_plus,
            r.z_minus,
            r.l,
            r.separation,
            r.theta_ratio,
            r.conversion,
        ]
    });
    write_rows(w, &ANALYTIC_HEADER, rows)
}

/// Reads a table written by [`write_space_time`]. Rows must be grouped by
/// time with the same `z` sequence in every group.
pub fn read_space_time<R: Read>(r: R) -> Result<SpaceTime> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != SPACE_TIME_HEADER {
        return Err(Error::Config(format!(
            "not a space-time table: header {header:?}"
        )));
    }
    let mut times: Vec<f64> = Vec::new();
    let mut z: Vec<f64> = Vec::new();
    let mut fields: Vec<FieldState> = Vec::new();
    let mut p12: Vec<Vec<Complex64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let v = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("row {}: {e}", line + 2)))?;
        if v.len() != SPACE_TIME_HEADER.len() {
            return Err(Error::Config(format!(
                "row {}: expected 10 columns",
                line + 2
            )));
        }
        if times.last() != Some(&v[0]) {
            times.push(v[0]);
            fields.push(FieldState::zeros(0));
            p12.push(Vec::new());
        }
        let n = times.len() - 1;
        let i = fields[n].a_plus.len();
        if n == 0 {
            z.push(v[1]);
        } else if z.get(i) != Some(&v[1]) {
            return Err(Error::Config(format!(
                "row {}: z grid differs between times",
                line + 2
            )));
        }
        fields[n].a_plus.push(Complex64::new(v[2], v[3]));
        fields[n].a_minus.push(Complex64::new(v[4], v[5]));
        p12[n].push(Complex64::new(v[8], v[9]));
    }
    if fields.iter().any(|f| f.len() != z.len()) {
        return Err(Error::Config("incomplete time slice".into()));
    }
    Ok(SpaceTime {
        z,
        times,
        fields,
        p12: Some(p12),
    })
}
