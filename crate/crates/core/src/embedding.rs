//! The map to `G(2|2; C^{12|12})` given by evaluating the tangent global
//! sections, its standard forms and the rank / injectivity certificates.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::atlas::{Atlas, AtlasError, Chart, VectorField};
use crate::grassmannian::{self, coordinate_slots, BigCellIndex, GrassDescriptor, GrassError};
use crate::linalg;
use crate::p2family::{GlobalSectionBasis, P2Error, Provenance};
use crate::superalgebra::{AlgebraError, Parity, SuperFrac, SuperMatrix, SuperMonomial, Var, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("sample {0} lies on a singular locus")]
    SingularSample(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Grass(#[from] GrassError),
    #[error(transparent)]
    Family(#[from] P2Error),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, EmbedError>;

/// `(z1, z2)` values used when no samples are given; none lies on a
/// coordinate line.
pub const DEFAULT_SAMPLES: [(i64, i64); 5] = [(1, 2), (2, 3), (3, 5), (5, 7), (-1, 4)];

pub fn default_samples() -> Vec<(Q, Q)> {
    DEFAULT_SAMPLES.iter().map(|&(a, b)| (Q::from_integer(a.into()), Q::from_integer(b.into()))).collect()
}

/// Rows are the chart frame `d/dz1, d/dz2 | d/dtheta1, d/dtheta2`; column
/// `k` holds the components of section `k`, even sections first.
#[derive(Clone, Debug)]
pub struct EvaluationMatrix {
    pub chart: Chart,
    pub labels: Vec<String>,
    pub even_count: usize,
    pub matrix: SuperMatrix,
}

fn section_labels(basis: &GlobalSectionBasis) -> Vec<String> {
    let (e, o) = basis.dims();
    let (ve, vo) = match basis.provenance {
        Provenance::Canonical => ("V", "Xi"),
        Provenance::Solved => ("s", "t"),
    };
    (1..=e).map(|k| format!("{ve}{k}")).chain((1..=o).map(|k| format!("{vo}{k}"))).collect()
}

/// Evaluation matrix of an arbitrary family of fields, moved onto `chart`.
pub fn evaluation_matrix_of(
    a: &Atlas,
    even: &[VectorField],
    odd: &[VectorField],
    labels: Vec<String>,
    chart: usize,
) -> Result<EvaluationMatrix> {
    if labels.len() != even.len() + odd.len() {
        return Err(EmbedError::Invalid("one label per section".into()));
    }
    let target = a.charts().get(chart).ok_or_else(|| EmbedError::ChartMismatch(format!("no chart {chart}")))?.clone();
    let mut cols = Vec::with_capacity(labels.len());
    for (k, v) in even.iter().chain(odd).enumerate() {
        let want = if k < even.len() { Parity::Even } else { Parity::Odd };
        if v.parity().is_some_and(|p| p != want) && !v.is_zero() {
            return Err(EmbedError::Invalid(format!("section {} has the wrong parity", labels[k])));
        }
        cols.push(a.transport_to(v, chart)?.components);
    }
    let rows = target.dim();
    let entries: Vec<Vec<SuperFrac>> = (0..rows).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    let mut cp = vec![Parity::Even; even.len()];
    cp.extend(vec![Parity::Odd; odd.len()]);
    let matrix = SuperMatrix::new(a.ctx(), target.parities(), cp, entries)?;
    Ok(EvaluationMatrix { chart: target, labels, even_count: even.len(), matrix })
}

pub fn evaluation_matrix(a: &Atlas, basis: &GlobalSectionBasis, chart: usize) -> Result<EvaluationMatrix> {
    evaluation_matrix_of(a, &basis.even, &basis.odd, section_labels(basis), chart)
}

impl EvaluationMatrix {
    pub fn odd_count(&self) -> usize {
        self.labels.len() - self.even_count
    }

    pub fn descriptor(&self) -> Result<GrassDescriptor> {
        let e = self.chart.even.len();
        let o = self.chart.odd.len();
        Ok(GrassDescriptor::new(e, o, self.even_count, self.odd_count())?)
    }

    pub fn column(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `(A, B, C, D)`: even/odd row halves against the even/odd columns that
    /// follow the first two of each parity.
    pub fn blocks(&self) -> [SuperMatrix; 4] {
        let e = self.chart.even.len();
        let rows_e: Vec<usize> = (0..e).collect();
        let rows_o: Vec<usize> = (e..self.chart.dim()).collect();
        let cols_e: Vec<usize> = (2..self.even_count).collect();
        let cols_o: Vec<usize> = (self.even_count + 2..self.labels.len()).collect();
        [
            self.matrix.submatrix(&rows_e, &cols_e),
            self.matrix.submatrix(&rows_e, &cols_o),
            self.matrix.submatrix(&rows_o, &cols_e),
            self.matrix.submatrix(&rows_o, &cols_o),
        ]
    }

    /// Replace a column by zero (used to build degenerate inputs).
    pub fn with_zero_column(&self, label: &str) -> Result<Self> {
        let c = self.column(label).ok_or_else(|| EmbedError::Invalid(format!("no column {label}")))?;
        let mut out = self.clone();
        for r in 0..self.matrix.rows() {
            out.matrix.set(r, c, SuperFrac::zero(self.matrix.ctx()));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..self.matrix.rows())
            .map(|r| Value::Array(self.matrix.row(r).iter().map(|f| Value::String(f.to_string())).collect()))
            .collect();
        json!({"chart": self.chart.name, "columns": self.labels, "rows": rows})
    }
}

/// Big cell whose identity block sits in the named columns.
pub fn pivot_index(m: &EvaluationMatrix, labels: &[&str]) -> Result<BigCellIndex> {
    let g = m.descriptor()?;
    let mut i0 = Vec::new();
    let mut i1 = Vec::new();
    for l in labels {
        let c = m.column(l).ok_or_else(|| EmbedError::Invalid(format!("no column {l}")))?;
        if c < m.even_count {
            i0.push(c + 1);
        } else {
            i1.push(c - m.even_count + 1);
        }
    }
    i0.sort_unstable();
    i1.sort_unstable();
    Ok(BigCellIndex::new(&g, i0, i1)?)
}

/// `B^-1 M` with `B` the pivot columns.
pub fn standard_form(m: &EvaluationMatrix, pivots: &BigCellIndex) -> Result<SuperMatrix> {
    Ok(grassmannian::gluing(&m.descriptor()?, &m.matrix, pivots)?.z_j)
}

/// The sub-selection `{V9 - V10, V5, V1, V2 | Xi1, Xi2}` on `U0`, in that
/// column order.
pub fn sub_selection(a: &Atlas, basis: &GlobalSectionBasis) -> Result<EvaluationMatrix> {
    if basis.provenance != Provenance::Canonical || basis.dims() != (12, 12) {
        return Err(EmbedError::Invalid("sub-selection needs the canonical 12|12 basis".into()));
    }
    let v = &basis.even;
    let diff = v[8].checked_add(&v[9].scale(&-Q::one()))?;
    let even = vec![diff, v[4].clone(), v[0].clone(), v[1].clone()];
    let odd = vec![basis.odd[0].clone(), basis.odd[1].clone()];
    let labels = ["V9-V10", "V5", "V1", "V2", "Xi1", "Xi2"].map(String::from).to_vec();
    evaluation_matrix_of(a, &even, &odd, labels, 0)
}

fn sample_point(chart: &Chart, ctx: &crate::superalgebra::Ctx, s: &(Q, Q)) -> Result<HashMap<Var, Q>> {
    let mut p = HashMap::new();
    p.insert(ctx.var(&chart.even[0])?, s.0.clone());
    p.insert(ctx.var(&chart.even[1])?, s.1.clone());
    Ok(p)
}

fn show_sample(s: &(Q, Q)) -> String {
    format!("({}, {})", s.0, s.1)
}

fn body_at(m: &SuperMatrix, point: &HashMap<Var, Q>) -> std::result::Result<Vec<Vec<Q>>, AlgebraError> {
    m.entries().iter().map(|row| row.iter().map(|f| f.eval_body(point)).collect()).collect()
}

/// First pair of even columns and first pair of odd columns whose body
/// blocks are invertible at every sample.
pub fn choose_pivots(m: &EvaluationMatrix, samples: &[(Q, Q)]) -> Result<Option<BigCellIndex>> {
    let ctx = m.matrix.ctx();
    let bodies: Vec<Vec<Vec<Q>>> = samples
        .iter()
        .map(|s| {
            body_at(&m.matrix, &sample_point(&m.chart, ctx, s)?).map_err(|_| EmbedError::SingularSample(show_sample(s)))
        })
        .collect::<Result<_>>()?;
    let e = m.chart.even.len();
    let find = |rows: [usize; 2], cols: std::ops::Range<usize>| -> Option<[usize; 2]> {
        for a in cols.clone() {
            for b in a + 1..cols.end {
                let ok = bodies.iter().all(|bm| {
                    let det = &bm[rows[0]][a] * &bm[rows[1]][b] - &bm[rows[0]][b] * &bm[rows[1]][a];
                    !det.is_zero()
                });
                if ok {
                    return Some([a, b]);
                }
            }
        }
        None
    };
    let (Some(ev), Some(od)) = (find([0, 1], 0..m.even_count), find([e, e + 1], m.even_count..m.labels.len())) else {
        return Ok(None);
    };
    let g = m.descriptor()?;
    Ok(Some(BigCellIndex::new(
        &g,
        ev.iter().map(|c| c + 1).collect(),
        od.iter().map(|c| c - m.even_count + 1).collect(),
    )?))
}

#[derive(Clone, Debug)]
pub struct RankCertificate {
    pub chart: String,
    pub pivots: BigCellIndex,
    pub samples: Vec<(Q, Q)>,
    /// Rank of the body of the super differential at each sample, or of the
    /// pivot block when that block is singular there.
    pub body_ranks: Vec<usize>,
    /// `(even, odd)` columns of the differential.
    pub shape: (usize, usize),
    /// Sign-normalised minor read from the `i(S)` entries, when supplied.
    pub identity_minor: Option<SuperMatrix>,
    pub embedding: bool,
}

impl RankCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "chart": self.chart,
            "pivots": self.pivots.to_string(),
            "samples": self.samples.iter().map(show_sample).collect::<Vec<_>>(),
            "body_ranks": self.body_ranks,
            "differential": format!("{}x({}|{})", 4, self.shape.0, self.shape.1),
            "identity_minor": self.identity_minor.as_ref().map(|m| m.is_identity()),
            "verdict": if self.embedding { "embedding" } else { "fails" },
        })
    }
}

/// Super differential of the big-cell coordinates of `form` (pivot columns
/// dropped), rows indexed by the chart coordinates.
pub fn differential(
    chart: &Chart,
    g: &GrassDescriptor,
    pivots: &BigCellIndex,
    form: &SuperMatrix,
) -> Result<SuperMatrix> {
    let ctx = form.ctx();
    let slots = coordinate_slots(g, pivots);
    let mut order: Vec<&(usize, usize, Parity)> = slots.iter().filter(|s| !s.2.is_odd()).collect();
    order.extend(slots.iter().filter(|s| s.2.is_odd()));
    let entries: Vec<Vec<SuperFrac>> = chart
        .coords()
        .map(|c| order.iter().map(|&&(r, k, _)| form.get(r, k).partial(c)).collect::<std::result::Result<Vec<_>, _>>())
        .collect::<std::result::Result<_, _>>()?;
    let cp = order.iter().map(|s| s.2).collect();
    Ok(SuperMatrix::new(ctx, chart.parities(), cp, entries)?)
}

/// Rank of the map in the big cell `pivots` at each sample, plus (on `U0`)
/// the minor read from the `i(S)` recovery entries.
pub fn rank_certificate(
    m: &EvaluationMatrix,
    pivots: &BigCellIndex,
    samples: &[(Q, Q)],
    sub: Option<&EvaluationMatrix>,
) -> Result<RankCertificate> {
    if samples.len() < 5 {
        return Err(EmbedError::Invalid(format!("{} samples, need at least 5", samples.len())));
    }
    let g = m.descriptor()?;
    let ctx = m.matrix.ctx();
    let cols = pivots.columns(&g);
    let rows: Vec<usize> = (0..m.matrix.rows()).collect();
    let block = m.matrix.submatrix(&rows, &cols);
    let mut body_ranks = Vec::with_capacity(samples.len());
    let mut singular = false;
    for s in samples {
        let p = sample_point(&m.chart, ctx, s)?;
        let b = body_at(&block, &p).map_err(|_| EmbedError::SingularSample(show_sample(s)))?;
        let r = linalg::rank(&b);
        if r < rows.len() {
            singular = true;
        }
        body_ranks.push(r);
    }
    let mut shape = (0, 0);
    if !singular {
        let form = standard_form(m, pivots)?;
        let d = differential(&m.chart, &g, pivots, &form)?;
        let ne = d.col_parities().iter().filter(|p| !p.is_odd()).count();
        shape = (ne, d.cols() - ne);
        for (k, s) in samples.iter().enumerate() {
            let p = sample_point(&m.chart, ctx, s)?;
            let b = body_at(&d, &p).map_err(|_| EmbedError::SingularSample(show_sample(s)))?;
            body_ranks[k] = linalg::rank(&b);
        }
    }
    let identity_minor = match sub {
        Some(sm) => Some(sub_minor(sm)?),
        None => None,
    };
    let full = m.chart.dim();
    let embedding = !singular
        && body_ranks.iter().all(|&r| r == full)
        && identity_minor.as_ref().is_none_or(SuperMatrix::is_identity);
    Ok(RankCertificate {
        chart: m.chart.name.clone(),
        pivots: pivots.clone(),
        samples: samples.to_vec(),
        body_ranks,
        shape,
        identity_minor,
        embedding,
    })
}

/// Differentials of the recovery entries of `i(S)`, each scaled by its sign.
fn sub_minor(sm: &EvaluationMatrix) -> Result<SuperMatrix> {
    let ctx = sm.matrix.ctx();
    let rec = recover_literal(sm)
        .ok_or_else(|| EmbedError::Invalid("sub-selection does not contain the coordinates".into()))?;
    let coords: Vec<&String> = sm.chart.coords().collect();
    let mut entries = vec![vec![SuperFrac::zero(ctx); coords.len()]; coords.len()];
    for (k, r) in rec.iter().enumerate() {
        let f = sm.matrix.get(r.row, r.column).scale(&r.sign);
        for (a, c) in coords.iter().enumerate() {
            entries[a][k] = f.partial(c)?;
        }
    }
    Ok(SuperMatrix::new(ctx, sm.chart.parities(), sm.chart.parities(), entries)?)
}

/// Coordinate `coord` equals `sign * entry(row, column)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Recovery {
    pub coord: String,
    pub row: usize,
    pub column: usize,
    pub sign: Q,
}

/// Find each chart coordinate, up to sign, as a literal matrix entry.
pub fn recover_literal(m: &EvaluationMatrix) -> Option<Vec<Recovery>> {
    let ctx = m.matrix.ctx();
    m.chart
        .coords()
        .map(|c| {
            let x = SuperFrac::var(ctx, c).ok()?;
            for r in 0..m.matrix.rows() {
                for k in 0..m.matrix.cols() {
                    let e = m.matrix.get(r, k);
                    for sign in [Q::one(), -Q::one()] {
                        if e.scale(&sign) == x {
                            return Some(Recovery { coord: c.clone(), row: r, column: k, sign });
                        }
                    }
                }
            }
            None
        })
        .collect()
}

/// `(coord, row, coefficients)` or the coordinate that could not be recovered.
type Combination = std::result::Result<(String, usize, Vec<Q>), String>;

/// Express each coordinate as `sum_k c_k * entry(row, k)` for one row
/// (a change of basis of the section space keeping the map in a big cell).
fn recover_by_combination(m: &EvaluationMatrix) -> Result<Vec<Combination>> {
    let ctx = m.matrix.ctx();
    let mut out = Vec::new();
    for c in m.chart.coords() {
        let x = SuperFrac::var(ctx, c)?;
        let mut found = None;
        for r in 0..m.matrix.rows() {
            let mut fields: Vec<&SuperFrac> = m.matrix.row(r).iter().collect();
            fields.push(&x);
            let rows = monomial_rows(&fields)?;
            // columns of the system are the sections, rows the monomials
            let n = m.matrix.cols();
            let sys: Vec<Vec<Q>> = (0..rows[0].len()).map(|i| (0..n).map(|k| rows[k][i].clone()).collect()).collect();
            let rhs: Vec<Q> = rows[n].clone();
            if let Some(sol) = linalg::solve(&sys, &rhs, n) {
                found = Some((c.clone(), r, sol));
                break;
            }
        }
        out.push(found.ok_or_else(|| format!("{c} is not recovered on {}", m.chart.name)));
    }
    Ok(out)
}

fn monomial_rows(fs: &[&SuperFrac]) -> Result<Vec<Vec<Q>>> {
    let mut keys: BTreeMap<SuperMonomial, usize> = BTreeMap::new();
    let mut sparse = Vec::new();
    for f in fs {
        let p = f.as_laurent().ok_or_else(|| AtlasError::NotLaurent(f.to_string()))?;
        let mut row = Vec::new();
        for (mono, c) in p.terms() {
            let n = keys.len();
            row.push((*keys.entry(mono.clone()).or_insert(n), c.clone()));
        }
        sparse.push(row);
    }
    Ok(sparse
        .into_iter()
        .map(|row| {
            let mut d = vec![Q::zero(); keys.len()];
            for (k, c) in row {
                d[k] = c;
            }
            d
        })
        .collect())
}

/// Constant unit columns reachable by combining sections: the image lies
/// in a big cell with constant pivot block.
fn unit_columns(m: &EvaluationMatrix) -> Result<bool> {
    let ctx = m.matrix.ctx();
    let n = m.matrix.cols();
    for r in 0..m.matrix.rows() {
        // stack all rows: a column combination must match e_r in every row
        let mut sys: Vec<Vec<Q>> = Vec::new();
        let mut rhs: Vec<Q> = Vec::new();
        for rr in 0..m.matrix.rows() {
            let target = if rr == r { SuperFrac::one(ctx) } else { SuperFrac::zero(ctx) };
            let mut fields: Vec<&SuperFrac> = m.matrix.row(rr).iter().collect();
            fields.push(&target);
            let rows = monomial_rows(&fields)?;
            for i in 0..rows[0].len() {
                sys.push((0..n).map(|k| rows[k][i].clone()).collect());
                rhs.push(rows[n][i].clone());
            }
        }
        if linalg::solve(&sys, &rhs, n).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct ChartRecovery {
    pub chart: String,
    pub unit_pivots: bool,
    /// `(coordinate, row, coefficients over the sections)`.
    pub combinations: Vec<(String, usize, Vec<Q>)>,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct InjectivityReport {
    /// Literal reading from `i(S)` on `U0`.
    pub literal: Option<Vec<Recovery>>,
    pub charts: Vec<ChartRecovery>,
    pub injective: bool,
}

impl InjectivityReport {
    pub fn to_json(&self) -> Value {
        let lit = self.literal.as_ref().map(|v| {
            v.iter()
                .map(|r| json!({"coord": r.coord, "row": r.row, "column": r.column, "sign": r.sign.to_string()}))
                .collect::<Vec<_>>()
        });
        let charts: Vec<Value> = self
            .charts
            .iter()
            .map(|c| json!({"chart": c.chart, "unit_pivots": c.unit_pivots, "recovered": c.combinations.len(), "failures": c.failures}))
            .collect();
        json!({"literal": lit, "charts": charts, "injective": self.injective})
    }
}

/// Coordinates recovered from the image on every chart: literally from
/// `i(S)` on `U0`, and by section combinations on each chart after moving
/// the basis there.
pub fn injectivity_check(
    a: &Atlas,
    basis: &GlobalSectionBasis,
    sub: Option<&EvaluationMatrix>,
) -> Result<InjectivityReport> {
    let literal = sub.and_then(recover_literal);
    let mut charts = Vec::new();
    let mut injective = sub.is_none() || literal.is_some();
    for j in 0..a.charts().len() {
        let m = evaluation_matrix(a, basis, j)?;
        let unit_pivots = unit_columns(&m)?;
        let mut combinations = Vec::new();
        let mut failures = Vec::new();
        for r in recover_by_combination(&m)? {
            match r {
                Ok(c) => combinations.push(c),
                Err(e) => failures.push(e),
            }
        }
        if !unit_pivots {
            failures.push(format!("no constant pivot block on {}", m.chart.name));
        }
        injective &= failures.is_empty();
        charts.push(ChartRecovery { chart: m.chart.name.clone(), unit_pivots, combinations, failures });
    }
    Ok(InjectivityReport { literal, charts, injective })
}

/// Body rank of the full evaluation matrix at each sample (pointwise
/// surjectivity of evaluation).
pub fn generation_ranks(m: &EvaluationMatrix, samples: &[(Q, Q)]) -> Result<Vec<usize>> {
    let ctx = m.matrix.ctx();
    samples
        .iter()
        .map(|s| {
            let p = sample_point(&m.chart, ctx, s)?;
            let b = body_at(&m.matrix, &p).map_err(|_| EmbedError::SingularSample(show_sample(s)))?;
            Ok(linalg::rank(&b))
        })
        .collect()
}

#[cfg(test)]
mod tests;
