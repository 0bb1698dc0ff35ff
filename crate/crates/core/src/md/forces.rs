//! All-pairs Coulomb interaction.
//!
//! Two kernels share the same pair arithmetic. The sequential kernel visits
//! each pair once and applies the third law; the parallel kernel sums full
//! rows, one ion per task, in a fixed `j` order so that its result does not
//! depend on the number of workers.

use nalgebra::Vector3;

use crate::constants::constants;
use crate::error::{Error, Result};
use crate::md::IonState;

const LANES: usize = 4;

/// Worker selection for the force loop and per-ion analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Single-threaded half-pair kernel.
    #[default]
    Sequential,
    /// Row kernel on a pool with the given number of workers.
    Workers(usize),
}

impl Parallelism {
    pub fn from_workers(workers: usize) -> Self {
        if workers <= 1 || !cfg!(feature = "parallel") {
            Parallelism::Sequential
        } else {
            Parallelism::Workers(workers)
        }
    }

    pub fn workers(&self) -> usize {
        match self {
            Parallelism::Sequential => 1,
            Parallelism::Workers(n) => *n,
        }
    }
}

/// Structure-of-arrays scratch for the force loop.
pub struct CoulombWorkspace {
    xs: Vec<f64>,
    ys: Vec<f64>,
    zs: Vec<f64>,
    qs: Vec<f64>,
    pub(crate) fx: Vec<f64>,
    pub(crate) fy: Vec<f64>,
    pub(crate) fz: Vec<f64>,
    coulomb_constant: f64,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl CoulombWorkspace {
    pub fn new(charges: Vec<f64>, parallelism: Parallelism) -> Result<Self> {
        let n = charges.len();
        #[cfg(feature = "parallel")]
        let pool = match parallelism {
            Parallelism::Sequential => None,
            Parallelism::Workers(w) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?,
            ),
        };
        #[cfg(not(feature = "parallel"))]
        let _ = parallelism;
        Ok(Self {
            xs: vec![0.0; n],
            ys: vec![0.0; n],
            zs: vec![0.0; n],
            qs: charges,
            fx: vec![0.0; n],
            fy: vec![0.0; n],
            fz: vec![0.0; n],
            coulomb_constant: constants().coulomb(),
            #[cfg(feature = "parallel")]
            pool,
        })
    }

    pub fn len(&self) -> usize {
        self.qs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qs.is_empty()
    }

    pub(crate) fn load_positions(&mut self, positions: &[Vector3<f64>]) {
        for (i, p) in positions.iter().enumerate() {
            self.xs[i] = p.x;
            self.ys[i] = p.y;
            self.zs[i] = p.z;
        }
    }

    /// Fills `fx`, `fy`, `fz` with the Coulomb forces for the loaded positions.
    pub(crate) fn compute(&mut self) -> Result<()> {
        #[cfg(feature = "parallel")]
        if self.pool.is_some() {
            self.compute_rows();
        } else {
            self.compute_pairs();
        }
        #[cfg(not(feature = "parallel"))]
        self.compute_pairs();
        let finite = self
            .fx
            .iter()
            .chain(&self.fy)
            .chain(&self.fz)
            .all(|f| f.is_finite());
        if !finite {
            return Err(self.find_coincident());
        }
        let k = self.coulomb_constant;
        for f in self
            .fx
            .iter_mut()
            .chain(self.fy.iter_mut())
            .chain(self.fz.iter_mut())
        {
            *f *= k;
        }
        debug_assert!(self.third_law_holds(), "Coulomb pair forces do not sum to zero");
        Ok(())
    }

    fn compute_pairs(&mut self) {
        let n = self.len();
        self.fx.fill(0.0);
        self.fy.fill(0.0);
        self.fz.fill(0.0);
        for i in 0..n {
            let (xi, yi, zi, qi) = (self.xs[i], self.ys[i], self.zs[i], self.qs[i]);
            let acc = pair_block(
                [xi, yi, zi],
                qi,
                &self.xs[i + 1..],
                &self.ys[i + 1..],
                &self.zs[i + 1..],
                &self.qs[i + 1..],
                &mut self.fx[i + 1..],
                &mut self.fy[i + 1..],
                &mut self.fz[i + 1..],
            );
            self.fx[i] += acc[0];
            self.fy[i] += acc[1];
            self.fz[i] += acc[2];
        }
    }

    #[cfg(feature = "parallel")]
    fn compute_rows(&mut self) {
        use rayon::prelude::*;
        let (xs, ys, zs, qs) = (&self.xs, &self.ys, &self.zs, &self.qs);
        let pool = self.pool.as_ref().expect("row kernel requires a pool");
        let rows: Vec<[f64; 3]> = pool.install(|| {
            (0..qs.len())
                .into_par_iter()
                .map(|i| {
                    let ri = [xs[i], ys[i], zs[i]];
                    let a = row_block(ri, qs[i], &xs[..i], &ys[..i], &zs[..i], &qs[..i]);
                    let b = row_block(
                        ri,
                        qs[i],
                        &xs[i + 1..],
                        &ys[i + 1..],
                        &zs[i + 1..],
                        &qs[i + 1..],
                    );
                    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
                })
                .collect()
        });
        for (i, f) in rows.into_iter().enumerate() {
            self.fx[i] = f[0];
            self.fy[i] = f[1];
            self.fz[i] = f[2];
        }
    }

    fn find_coincident(&self) -> Error {
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                let d2 = (self.xs[i] - self.xs[j]).powi(2)
                    + (self.ys[i] - self.ys[j]).powi(2)
                    + (self.zs[i] - self.zs[j]).powi(2);
                if !(d2 > 0.0) {
                    return Error::SingularConfiguration { first: i, second: j };
                }
            }
        }
        Error::DegenerateData("non-finite ion coordinates".into())
    }

    fn third_law_holds(&self) -> bool {
        let sum = |v: &[f64]| v.iter().sum::<f64>();
        let mag: f64 = self
            .fx
            .iter()
            .zip(&self.fy)
            .zip(&self.fz)
            .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
            .sum();
        let net = (sum(&self.fx).powi(2) + sum(&self.fy).powi(2) + sum(&self.fz).powi(2)).sqrt();
        net <= 1e-9 * mag + f64::MIN_POSITIVE
    }

    /// Coulomb potential energy of the loaded positions, J.
    pub(crate) fn potential_energy(&self) -> f64 {
        let n = self.len();
        let mut total = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in i + 1..n {
                let r = ((self.xs[i] - self.xs[j]).powi(2)
                    + (self.ys[i] - self.ys[j]).powi(2)
                    + (self.zs[i] - self.zs[j]).powi(2))
                .sqrt();
                row += self.qs[j] / r;
            }
            total += self.qs[i] * row;
        }
        total * self.coulomb_constant
    }

    pub(crate) fn force(&self, i: usize) -> Vector3<f64> {
        Vector3::new(self.fx[i], self.fy[i], self.fz[i])
    }
}

/// Interaction of ion `ri` with a block of partners; the reaction is
/// subtracted from the partners' accumulators. Returns the action on `ri`
/// without the Coulomb constant. Coincident ions produce NaN.
#[allow(clippy::too_many_arguments)]
#[inline]
fn pair_block(
    ri: [f64; 3],
    qi: f64,
    xs: &[f64],
    ys: &[f64],
    zs: &[f64],
    qs: &[f64],
    fx: &mut [f64],
    fy: &mut [f64],
    fz: &mut [f64],
) -> [f64; 3] {
    let mut ax = [0.0; LANES];
    let mut ay = [0.0; LANES];
    let mut az = [0.0; LANES];
    // fixed-width chunks let the compiler drop bounds checks and vectorize
    let blocks = xs
        .chunks_exact(LANES)
        .zip(ys.chunks_exact(LANES))
        .zip(zs.chunks_exact(LANES))
        .zip(qs.chunks_exact(LANES))
        .zip(fx.chunks_exact_mut(LANES))
        .zip(fy.chunks_exact_mut(LANES))
        .zip(fz.chunks_exact_mut(LANES));
    for ((((((x, y), z), q), gx), gy), gz) in blocks {
        let mut d = [[0.0; LANES]; 3];
        let mut s = [0.0; LANES];
        for l in 0..LANES {
            d[0][l] = ri[0] - x[l];
            d[1][l] = ri[1] - y[l];
            d[2][l] = ri[2] - z[l];
        }
        for l in 0..LANES {
            let r2 = d[0][l] * d[0][l] + d[1][l] * d[1][l] + d[2][l] * d[2][l];
            s[l] = qi * q[l] / (r2 * r2.sqrt());
        }
        for l in 0..LANES {
            ax[l] += s[l] * d[0][l];
            ay[l] += s[l] * d[1][l];
            az[l] += s[l] * d[2][l];
            gx[l] -= s[l] * d[0][l];
            gy[l] -= s[l] * d[1][l];
            gz[l] -= s[l] * d[2][l];
        }
    }
    for k in xs.len() / LANES * LANES..xs.len() {
        let dx = ri[0] - xs[k];
        let dy = ri[1] - ys[k];
        let dz = ri[2] - zs[k];
        let r2 = dx * dx + dy * dy + dz * dz;
        let s = qi * qs[k] / (r2 * r2.sqrt());
        ax[0] += s * dx;
        ay[0] += s * dy;
        az[0] += s * dz;
        fx[k] -= s * dx;
        fy[k] -= s * dy;
        fz[k] -= s * dz;
    }
    [fold(ax), fold(ay), fold(az)]
}

/// Action of a block of partners on `ri`, no reaction.
#[cfg(feature = "parallel")]
#[inline]
fn row_block(ri: [f64; 3], qi: f64, xs: &[f64], ys: &[f64], zs: &[f64], qs: &[f64]) -> [f64; 3] {
    let mut ax = [0.0; LANES];
    let mut ay = [0.0; LANES];
    let mut az = [0.0; LANES];
    let blocks = xs
        .chunks_exact(LANES)
        .zip(ys.chunks_exact(LANES))
        .zip(zs.chunks_exact(LANES))
        .zip(qs.chunks_exact(LANES));
    for (((x, y), z), q) in blocks {
        for l in 0..LANES {
            let dx = ri[0] - x[l];
            let dy = ri[1] - y[l];
            let dz = ri[2] - z[l];
            let r2 = dx * dx + dy * dy + dz * dz;
            let s = qi * q[l] / (r2 * r2.sqrt());
            ax[l] += s * dx;
            ay[l] += s * dy;
            az[l] += s * dz;
        }
    }
    for k in xs.len() / LANES * LANES..xs.len() {
        let dx = ri[0] - xs[k];
        let dy = ri[1] - ys[k];
        let dz = ri[2] - zs[k];
        let r2 = dx * dx + dy * dy + dz * dz;
        let s = qi * qs[k] / (r2 * r2.sqrt());
        ax[0] += s * dx;
        ay[0] += s * dy;
        az[0] += s * dz;
    }
    [fold(ax), fold(ay), fold(az)]
}

#[inline]
fn fold(a: [f64; LANES]) -> f64 {
    (a[0] + a[1]) + (a[2] + a[3])
}

/// Coulomb force on every ion of `state`, exact all-pairs.
pub fn coulomb_forces(state: &IonState) -> Result<Vec<Vector3<f64>>> {
    coulomb_forces_with(state, Parallelism::Sequential)
}

pub fn coulomb_forces_with(state: &IonState, parallelism: Parallelism) -> Result<Vec<Vector3<f64>>> {
    let mut ws = CoulombWorkspace::new(state.charges(), parallelism)?;
    ws.load_positions(&state.positions);
    ws.compute()?;
    Ok((0..ws.len()).map(|i| ws.force(i)).collect())
}

/// Total Coulomb potential energy, J.
pub fn coulomb_energy(state: &IonState) -> f64 {
    let mut ws = CoulombWorkspace::new(state.charges(), Parallelism::Sequential)
        .expect("sequential workspace");
    ws.load_positions(&state.positions);
    ws.potential_energy()
}
