use serde::{Deserialize, Serialize};

use super::evolve::{evolve_block, replay_block, Block, Schedule, StepControl};
use super::operator::{DiscreteOperator, Domain, FarBoundary};
use crate::error::{Error, Result};
use crate::space::{GluedPoint, GridSpec, HalfGrid, Side};
use crate::specfun::Dimension;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    HalflineN,
    HalflineD,
    GluedDirect,
    GluedAssembled,
    Hat,
}

/// `T_t(x_i, y_j)` with rows `x_i` (operator nodes) and columns `y_j`.
#[derive(Clone, Debug)]
pub struct HeatKernelField {
    pub t: f64,
    pub provenance: Provenance,
    pub rows: Vec<GluedPoint>,
    pub cols: Vec<GluedPoint>,
    pub values: Block,
}

impl HeatKernelField {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn column(&self, j: usize) -> &[f64] {
        self.values.column(j)
    }

    pub fn column_max(&self, j: usize) -> f64 {
        self.column(j).iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// Most negative entry relative to the largest one.
    pub fn min_relative(&self) -> f64 {
        let max = self.values.data.iter().fold(0.0f64, |a, &b| a.max(b));
        let min = self.values.data.iter().fold(0.0f64, |a, &b| a.min(b));
        min / max
    }

    /// `max |K(y_j, y_k) - K(y_k, y_j)| / max K` over the columns that are
    /// also rows.
    pub fn symmetry_defect(&self) -> f64 {
        let at: Vec<Option<usize>> = self
            .cols
            .iter()
            .map(|c| self.rows.iter().position(|r| r == c))
            .collect();
        let max = self.values.data.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let mut worst = 0.0f64;
        for (j, aj) in at.iter().enumerate() {
            for (k, ak) in at.iter().enumerate() {
                if let (Some(ij), Some(ik)) = (aj, ak) {
                    worst = worst.max((self.get(*ik, j) - self.get(*ij, k)).abs());
                }
            }
        }
        worst / max
    }
}

/// Indices of the nodes nearest to `targets`, deduplicated, in order.
pub fn source_indices(op: &DiscreteOperator, targets: &[GluedPoint]) -> Vec<usize> {
    let mut idx: Vec<usize> = targets.iter().map(|&p| op.nearest(p)).collect();
    idx.sort_unstable();
    idx.dedup();
    idx
}

fn deltas(op: &DiscreteOperator, sources: &[usize]) -> Block {
    Block::from_columns(&sources.iter().map(|&j| op.delta(j)).collect::<Vec<_>>())
}

fn wrap(op: &DiscreteOperator, sources: &[usize], times: &[f64], blocks: Vec<Block>, provenance: Provenance) -> Vec<HeatKernelField> {
    let cols: Vec<GluedPoint> = sources.iter().map(|&j| op.points[j]).collect();
    times
        .iter()
        .zip(blocks)
        .map(|(&t, values)| HeatKernelField {
            t,
            provenance,
            rows: op.points.clone(),
            cols: cols.clone(),
            values,
        })
        .collect()
}

/// Kernel columns `T_t δ_{y_j}` for every source node and time.
pub fn kernel_fields(
    op: &DiscreteOperator,
    sources: &[usize],
    times: &[f64],
    ctl: &StepControl,
    provenance: Provenance,
) -> Result<(Vec<HeatKernelField>, Schedule)> {
    let (blocks, schedule) = evolve_block(op, &deltas(op, sources), times, ctl)?;
    Ok((wrap(op, sources, times, blocks, provenance), schedule))
}

/// As [`kernel_fields`] but stepping with a recorded schedule.
pub fn replay_kernel_fields(
    op: &DiscreteOperator,
    sources: &[usize],
    times: &[f64],
    schedule: &Schedule,
    provenance: Provenance,
) -> Result<Vec<HeatKernelField>> {
    let blocks = replay_block(op, &deltas(op, sources), times, schedule)?;
    Ok(wrap(op, sources, times, blocks, provenance))
}

/// A grid, a far-boundary rule and a stepping policy shared by all the
/// operators built from them.
#[derive(Clone, Debug)]
pub struct HeatModel {
    pub dim: Dimension,
    pub grid: HalfGrid,
    pub far: FarBoundary,
    pub ctl: StepControl,
}

impl HeatModel {
    pub fn new(dim: Dimension, spec: &GridSpec, far: FarBoundary, ctl: StepControl) -> Result<Self> {
        Ok(HeatModel {
            dim,
            grid: spec.build()?,
            far,
            ctl,
        })
    }

    pub fn operator(&self, domain: Domain) -> Result<DiscreteOperator> {
        DiscreteOperator::new(self.dim, &self.grid, domain, self.far)
    }

    /// `T_t(x, y)` from direct evolution of the discrete delta at the node
    /// nearest to `y`, read at the node nearest to `x`.
    pub fn kernel(&self, domain: Domain, t: f64, x: GluedPoint, y: GluedPoint) -> Result<f64> {
        let op = self.operator(domain)?;
        for p in [x, y] {
            if !self.in_domain(domain, p) {
                return Err(Error::domain("kernel", format!("{:+} is outside the {domain:?} domain", p.x())));
            }
            if domain == Domain::Dirichlet && p.r == 1.0 {
                return Ok(0.0);
            }
        }
        if t <= 0.0 {
            return Err(Error::domain("kernel", "t must be positive"));
        }
        let j = op.nearest(y);
        let (fields, _) = kernel_fields(&op, &[j], &[t], &self.ctl, provenance_of(domain))?;
        Ok(fields[0].get(op.nearest(x), 0))
    }

    /// `T_t(x, y) = ½(T_{t,N} ± T_{t,D})(|x|, |y|)`, `+` on the same side.
    pub fn glued_kernel(&self, t: f64, x: GluedPoint, y: GluedPoint) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::domain("glued_kernel", "t must be positive"));
        }
        let n_op = self.operator(Domain::Neumann)?;
        let d_op = self.operator(Domain::Dirichlet)?;
        let jn = n_op.nearest(GluedPoint::plus(y.r));
        let (n, schedule) = kernel_fields(&n_op, &[jn], &[t], &self.ctl, Provenance::HalflineN)?;
        let tn = n[0].get(n_op.nearest(GluedPoint::plus(x.r)), 0);
        let yr = n_op.points[jn].r;
        let td = match d_op.index_of(GluedPoint::plus(yr)) {
            Some(jd) if x.r > 1.0 => {
                let d = replay_kernel_fields(&d_op, &[jd], &[t], &schedule, Provenance::HalflineD)?;
                d[0].get(d_op.nearest(GluedPoint::plus(x.r)), 0)
            }
            _ => 0.0,
        };
        let same = x.side == y.side || x.r == 1.0 || yr == 1.0;
        Ok(0.5 * if same { tn + td } else { tn - td })
    }

    /// Kernel of `L̂` (Dirichlet at `-3`).
    pub fn hat_kernel(&self, t: f64, x: GluedPoint, y: GluedPoint) -> Result<f64> {
        self.kernel(Domain::Hat, t, x, y)
    }

    /// `∫ T_{t,D}(x, y) dμ(y)` at each of `times`.
    pub fn dirichlet_survival(&self, x: f64, times: &[f64]) -> Result<Vec<f64>> {
        let op = self.operator(Domain::Dirichlet)?;
        if x <= 1.0 {
            return Ok(vec![0.0; times.len()]);
        }
        let ones = Block::from_columns(&[vec![1.0; op.len()]]);
        let (out, _) = evolve_block(&op, &ones, times, &self.ctl)?;
        let i = op.nearest(GluedPoint::plus(x));
        Ok(out.iter().map(|b| b.get(i, 0)).collect())
    }

    fn in_domain(&self, domain: Domain, p: GluedPoint) -> bool {
        let inside = p.r <= self.grid.x_max();
        match domain {
            Domain::Neumann | Domain::Dirichlet => inside && (p.side == Side::Plus || p.r == 1.0),
            Domain::Glued => inside,
            Domain::Hat => inside && (p.side == Side::Plus || p.r <= 3.0),
        }
    }
}

fn provenance_of(domain: Domain) -> Provenance {
    match domain {
        Domain::Neumann => Provenance::HalflineN,
        Domain::Dirichlet => Provenance::HalflineD,
        Domain::Glued => Provenance::GluedDirect,
        Domain::Hat => Provenance::Hat,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssemblyRow {
    pub t: f64,
    pub y: f64,
    pub max_rel_dev: f64,
    pub worst_x: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssemblyReport {
    pub d: f64,
    pub tol: f64,
    pub inner: f64,
    pub rows: Vec<AssemblyRow>,
    pub max_rel_dev: f64,
    pub pass: bool,
}

impl AssemblyReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,y,max_rel_dev,worst_x\n");
        for r in &self.rows {
            s += &format!("{},{},{:.3e},{}\n", r.t, r.y, r.max_rel_dev, r.worst_x);
        }
        s
    }
}

/// Relative floor below which kernel entries are compared in absolute terms.
pub const ASSEMBLY_FLOOR: f64 = 1e-8;

/// Compares kernels computed on the glued grid with `½(T_N ± T_D)` computed
/// on the half-line, at sources `±y` for `y` in `sources_r` and targets with
/// `|x| ≤ inner`.
pub fn verify_assembly(model: &HeatModel, times: &[f64], sources_r: &[f64], inner: f64, tol: f64) -> Result<AssemblyReport> {
    let g_op = model.operator(Domain::Glued)?;
    let n_op = model.operator(Domain::Neumann)?;
    let d_op = model.operator(Domain::Dirichlet)?;
    let mut targets: Vec<GluedPoint> = sources_r.iter().map(|&r| GluedPoint::plus(r)).collect();
    targets.extend(sources_r.iter().map(|&r| GluedPoint::minus(r)));
    let g_src = source_indices(&g_op, &targets);
    let radii: Vec<f64> = {
        let mut r: Vec<f64> = g_src.iter().map(|&j| g_op.points[j].r).collect();
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    };
    let n_src: Vec<usize> = radii.iter().map(|&r| n_op.index_of(GluedPoint::plus(r)).unwrap()).collect();
    let d_src: Vec<usize> = radii.iter().filter_map(|&r| d_op.index_of(GluedPoint::plus(r))).collect();

    let (direct, schedule) = kernel_fields(&g_op, &g_src, times, &model.ctl, Provenance::GluedDirect)?;
    let nf = replay_kernel_fields(&n_op, &n_src, times, &schedule, Provenance::HalflineN)?;
    let df = replay_kernel_fields(&d_op, &d_src, times, &schedule, Provenance::HalflineD)?;

    let n_rows: Vec<Option<usize>> = g_op.points.iter().map(|p| n_op.index_of(GluedPoint::plus(p.r))).collect();
    let d_rows: Vec<Option<usize>> = g_op.points.iter().map(|p| d_op.index_of(GluedPoint::plus(p.r))).collect();
    let mut rows = Vec::new();
    for (k, field) in direct.iter().enumerate() {
        for (j, y) in field.cols.iter().enumerate() {
            let jn = radii.iter().position(|&r| r == y.r).unwrap();
            let jd = d_src.iter().position(|&i| d_op.points[i].r == y.r);
            let col = field.column(j);
            let scale = field.column_max(j);
            let mut worst = (0.0f64, f64::NAN);
            for (i, x) in field.rows.iter().enumerate() {
                if x.r > inner {
                    continue;
                }
                let tn = nf[k].get(n_rows[i].unwrap(), jn);
                let td = match (d_rows[i], jd) {
                    (Some(a), Some(b)) => df[k].get(a, b),
                    _ => 0.0,
                };
                let same = x.side == y.side || x.r == 1.0 || y.r == 1.0;
                let assembled = 0.5 * if same { tn + td } else { tn - td };
                let dev = (col[i] - assembled).abs() / col[i].abs().max(ASSEMBLY_FLOOR * scale);
                if dev > worst.0 || worst.1.is_nan() {
                    worst = (dev, x.x());
                }
            }
            rows.push(AssemblyRow {
                t: field.t,
                y: y.x(),
                max_rel_dev: worst.0,
                worst_x: worst.1,
            });
        }
    }
    let max_rel_dev = rows.iter().fold(0.0f64, |a, r| a.max(r.max_rel_dev));
    Ok(AssemblyReport {
        d: model.dim.d(),
        tol,
        inner,
        rows,
        max_rel_dev,
        pass: max_rel_dev <= tol,
    })
}
