//! JSON and CSV interchange formats.
//!
//! Rationals are written as `"num/den"` strings (plain integers are accepted
//! on input), complex numbers as `{"re": .., "im": ..}`.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cauchy::Trajectory;
use crate::error::{Error, Result};
use crate::padic::{format_rational, parse_rational, Ball, PadicVector};
use crate::pseudodiff::{EigenReport, EigenStatus, Monomial, Polynomial, SymbolKind, SymbolSpec};
use crate::schwartz::SchwartzFunction;
use crate::wavelets::{CoefficientField, Family, FamilySpec, WaveletIndex};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexDto {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexDto {
    fn from(z: Complex64) -> Self {
        ComplexDto { re: z.re, im: z.im }
    }
}

impl From<ComplexDto> for Complex64 {
    fn from(z: ComplexDto) -> Self {
        Complex64::new(z.re, z.im)
    }
}

fn rationals_out(xs: &[BigRational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

fn vector_in(p: u32, xs: &[String]) -> Result<PadicVector> {
    let coords = xs.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
    PadicVector::from_rationals(p, coords)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallDto {
    pub center: Vec<String>,
    pub radius_exp: i64,
}

impl BallDto {
    pub fn from_ball(b: &Ball) -> Self {
        BallDto { center: rationals_out(b.center_coords()), radius_exp: b.radius_exp() }
    }

    pub fn to_ball(&self, p: u32) -> Result<Ball> {
        Ok(Ball::new(&vector_in(p, &self.center)?, self.radius_exp))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDto {
    pub center: Vec<String>,
    pub radius_exp: i64,
    pub coeff: ComplexDto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwartzDto {
    pub p: u32,
    pub n: usize,
    pub terms: Vec<TermDto>,
}

impl SchwartzDto {
    pub fn from_function(f: &SchwartzFunction) -> Self {
        let terms = f
            .terms()
            .iter()
            .map(|(b, c)| TermDto { center: rationals_out(b.center_coords()), radius_exp: b.radius_exp(), coeff: (*c).into() })
            .collect();
        SchwartzDto { p: f.prime(), n: f.dim(), terms }
    }

    pub fn to_function(&self) -> Result<SchwartzFunction> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                if t.center.len() != self.n {
                    return Err(Error::DimensionMismatch(self.n, t.center.len()));
                }
                Ok((Ball::new(&vector_in(self.p, &t.center)?, t.radius_exp), t.coeff.into()))
            })
            .collect::<Result<Vec<_>>>()?;
        SchwartzFunction::from_terms(self.p, self.n, terms)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaDto {
    pub s: String,
    pub values: Vec<ComplexDto>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKindDto {
    Theta,
    Psi {
        nu: u32,
        #[serde(default)]
        gammas: Vec<GammaDto>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDto {
    pub p: u32,
    pub n: usize,
    pub m: Vec<u32>,
    #[serde(flatten)]
    pub family: FamilyKindDto,
}

impl FamilyDto {
    pub fn from_spec(spec: &FamilySpec) -> Self {
        let family = match &spec.family {
            Family::Theta => FamilyKindDto::Theta,
            Family::Psi { nu, gammas } => FamilyKindDto::Psi {
                nu: *nu,
                gammas: gammas
                    .iter()
                    .map(|(s, g)| GammaDto { s: format_rational(s), values: g.iter().map(|&z| z.into()).collect() })
                    .collect(),
            },
        };
        FamilyDto { p: spec.p, n: spec.n, m: spec.m.clone(), family }
    }

    pub fn to_spec(&self) -> Result<FamilySpec> {
        let family = match &self.family {
            FamilyKindDto::Theta => Family::Theta,
            FamilyKindDto::Psi { nu, gammas } => {
                let mut map = BTreeMap::new();
                for g in gammas {
                    map.insert(parse_rational(&g.s)?, g.values.iter().map(|&z| z.into()).collect());
                }
                Family::Psi { nu: *nu, gammas: map }
            }
        };
        let spec = FamilySpec { p: self.p, n: self.n, m: self.m.clone(), family };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexDto {
    pub s: Vec<String>,
    pub j: Vec<i64>,
    pub a: Vec<String>,
}

impl IndexDto {
    pub fn from_index(idx: &WaveletIndex) -> Self {
        IndexDto { s: rationals_out(idx.s.coords()), j: idx.j.clone(), a: rationals_out(idx.a.coords()) }
    }

    pub fn to_index(&self, p: u32) -> Result<WaveletIndex> {
        Ok(WaveletIndex::new(vector_in(p, &self.s)?, self.j.clone(), vector_in(p, &self.a)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryDto {
    pub s: Vec<String>,
    pub j: Vec<i64>,
    pub a: Vec<String>,
    pub coeff: ComplexDto,
}

fn entries_out(field: &CoefficientField) -> Vec<EntryDto> {
    field
        .iter()
        .map(|(idx, c)| {
            let i = IndexDto::from_index(idx);
            EntryDto { s: i.s, j: i.j, a: i.a, coeff: (*c).into() }
        })
        .collect()
}

fn entries_in(spec: FamilySpec, entries: &[EntryDto]) -> Result<CoefficientField> {
    let p = spec.p;
    let mut field = CoefficientField::new(spec);
    for e in entries {
        let idx = WaveletIndex::new(vector_in(p, &e.s)?, e.j.clone(), vector_in(p, &e.a)?);
        field.insert(idx, e.coeff.into())?;
    }
    Ok(field)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDto {
    pub family: FamilyDto,
    pub entries: Vec<EntryDto>,
}

impl FieldDto {
    pub fn from_field(field: &CoefficientField) -> Self {
        FieldDto { family: FamilyDto::from_spec(&field.spec), entries: entries_out(field) }
    }

    pub fn to_field(&self) -> Result<CoefficientField> {
        entries_in(self.family.to_spec()?, &self.entries)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialDto {
    pub coeff: String,
    pub exps: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolDto {
    Taibleson {
        alpha: ComplexDto,
    },
    PolyNorm {
        poly: Vec<MonomialDto>,
        alpha: ComplexDto,
        depth: u32,
    },
}

impl SymbolDto {
    pub fn from_symbol(sym: &SymbolSpec) -> Result<Self> {
        match &sym.kind {
            SymbolKind::Taibleson { alpha } => Ok(SymbolDto::Taibleson { alpha: (*alpha).into() }),
            SymbolKind::PolyNorm { poly, alpha } => Ok(SymbolDto::PolyNorm {
                poly: poly
                    .monomials
                    .iter()
                    .map(|mono| MonomialDto { coeff: format_rational(&mono.coeff), exps: mono.exps.clone() })
                    .collect(),
                alpha: (*alpha).into(),
                depth: sym.depth.unwrap_or(0),
            }),
            SymbolKind::Custom(_) => Err(Error::InvalidSymbol("custom symbols cannot be serialized".into())),
        }
    }

    pub fn to_symbol(&self) -> Result<SymbolSpec> {
        match self {
            SymbolDto::Taibleson { alpha } => Ok(SymbolSpec::taibleson((*alpha).into())),
            SymbolDto::PolyNorm { poly, alpha, depth } => {
                let n = poly.first().map_or(0, |mono| mono.exps.len());
                if n == 0 {
                    return Err(Error::InvalidSymbol("polynomial has no monomials".into()));
                }
                let monomials = poly
                    .iter()
                    .map(|mono| Ok(Monomial { coeff: parse_rational(&mono.coeff)?, exps: mono.exps.clone() }))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SymbolSpec::poly_norm(Polynomial::new(n, monomials)?, (*alpha).into(), *depth))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReportDto {
    pub index: IndexDto,
    pub eigenvalue: ComplexDto,
    /// `proven_exact`, `verified_to_depth` or `failed`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_value: Option<ComplexDto>,
}

impl EigenReportDto {
    pub fn from_report(r: &EigenReport) -> Self {
        let mut dto = EigenReportDto {
            index: IndexDto::from_index(&r.index),
            eigenvalue: r.eigenvalue.into(),
            status: String::new(),
            depth: None,
            witness: None,
            witness_value: None,
        };
        match &r.status {
            EigenStatus::ProvenExact => dto.status = "proven_exact".into(),
            EigenStatus::VerifiedToDepth(d) => {
                dto.status = "verified_to_depth".into();
                dto.depth = Some(*d);
            }
            EigenStatus::Failed { witness, value } => {
                dto.status = "failed".into();
                dto.witness = Some(rationals_out(witness.coords()));
                dto.witness_value = Some((*value).into());
            }
        }
        dto
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDto {
    pub t: f64,
    pub entries: Vec<EntryDto>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDto {
    pub kind: String,
    pub family: FamilyDto,
    pub snapshots: Vec<SnapshotDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowDto {
    pub j_min: i64,
    pub j_max: i64,
    pub shift_depth: u32,
}

impl TrajectoryDto {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let family = traj
            .fields
            .first()
            .map(|f| FamilyDto::from_spec(&f.spec))
            .expect("trajectory has at least one time point");
        let kind = match traj.kind {
            crate::cauchy::EvolutionKind::Linear => "linear".to_string(),
            crate::cauchy::EvolutionKind::Schrodinger => "schrodinger".to_string(),
            crate::cauchy::EvolutionKind::Semilinear { degree } => format!("semilinear(m={degree})"),
        };
        TrajectoryDto {
            kind,
            family,
            snapshots: traj
                .times
                .iter()
                .zip(&traj.fields)
                .map(|(&t, f)| SnapshotDto { t, entries: entries_out(f) })
                .collect(),
            window: traj.window.map(|w| WindowDto { j_min: w.j_min, j_max: w.j_max, shift_depth: w.shift_depth }),
            tail_bound: traj.tail_bound,
        }
    }
}

fn join(xs: &[String]) -> String {
    xs.join(";")
}

fn join_ints(xs: &[i64]) -> String {
    xs.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

/// Writes rows `t, s, j, a, re, im`, one per (time, index); vector
/// components are joined with `;`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fmt_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["t", "s", "j", "a", "re", "im"]).map_err(fmt_err)?;
    for (t, field) in traj.times.iter().zip(&traj.fields) {
        write_field_rows(&mut w, Some(*t), field)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// Writes rows `t, s, j, a, re, im` for a single field with an empty `t`.
pub fn write_field_csv<W: Write>(field: &CoefficientField, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "s", "j", "a", "re", "im"]).map_err(|e| Error::Format(e.to_string()))?;
    write_field_rows(&mut w, None, field)?;
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

fn write_field_rows<W: Write>(w: &mut csv::Writer<W>, t: Option<f64>, field: &CoefficientField) -> Result<()> {
    for (idx, c) in field.iter() {
        let i = IndexDto::from_index(idx);
        let t = t.map(|t| t.to_string()).unwrap_or_default();
        w.write_record([t, join(&i.s), join_ints(&i.j), join(&i.a), c.re.to_string(), c.im.to_string()])
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}
