//! Feature-space projections `S` of shape `t x n`.
//!
//! * [`Projection::gaussian_sketch`] draws i.i.d. `N(0, 1/t)` entries from a
//!   seeded generator (see [`SKETCH_GENERATOR`]).
//! * [`Projection::truncated_svd`] stacks the leading `t` left singular
//!   vectors of the data matrix as rows.
//! * [`Projection::identity`] is the `n x n` identity.
//!
//! Reduced steps are mapped back with [`Projection::lift`], i.e. `S^T p`.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::svd;

/// Identification of the sketch generator, recorded in run manifests.
pub const SKETCH_GENERATOR: &str = "ChaCha8Rng::seed_from_u64 (rand_chacha 0.9) + \
    StandardNormal ziggurat (rand_distr 0.5), scaled by 1/sqrt(t), filled row-major";

const MAGIC: &[u8; 8] = b"MFTRPROJ";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    GaussianSketch,
    TruncatedSvd,
    Identity,
    /// Any other user-supplied matrix.
    Explicit,
}

impl ProjectionKind {
    fn code(self) -> u8 {
        match self {
            ProjectionKind::GaussianSketch => 1,
            ProjectionKind::TruncatedSvd => 2,
            ProjectionKind::Identity => 3,
            ProjectionKind::Explicit => 4,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            1 => ProjectionKind::GaussianSketch,
            2 => ProjectionKind::TruncatedSvd,
            3 => ProjectionKind::Identity,
            4 => ProjectionKind::Explicit,
            _ => return None,
        })
    }
}

/// A `t x n` linear map together with how it was built.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: DMatrix<f64>,
    kind: ProjectionKind,
    seed: Option<u64>,
    singular_values: Option<Vec<f64>>,
    rank_deficient: usize,
}

impl Projection {
    /// `t x n` matrix with i.i.d. `N(0, 1/t)` entries. The same
    /// `(n, t, seed)` always produces the same matrix.
    pub fn gaussian_sketch(n: usize, t: usize, seed: u64) -> Result<Self> {
        if t == 0 || t > n {
            return Err(Error::Domain(format!(
                "sketch dimension t = {t} must satisfy 1 <= t <= n = {n}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (t as f64).sqrt();
        let mut data = Vec::with_capacity(t * n);
        for _ in 0..t * n {
            let z: f64 = StandardNormal.sample(&mut rng);
            data.push(z * scale);
        }
        Ok(Self {
            matrix: DMatrix::from_row_slice(t, n, &data),
            kind: ProjectionKind::GaussianSketch,
            seed: Some(seed),
            singular_values: None,
            rank_deficient: 0,
        })
    }

    /// Rows are the leading `t` left singular vectors of `x` (`n x q`), in
    /// order of nonincreasing singular value, each signed so that its
    /// largest-magnitude entry is positive.
    ///
    /// If `x` has rank below `t`, the trailing rows complete an orthonormal
    /// basis and [`Projection::rank_deficient`] reports how many there are.
    pub fn truncated_svd(x: &DMatrix<f64>, t: usize) -> Result<Self> {
        let (n, q) = x.shape();
        if t == 0 || t > n.min(q) {
            return Err(Error::Domain(format!(
                "t = {t} must satisfy 1 <= t <= min(n, q) = {}",
                n.min(q)
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("data matrix is not finite".into()));
        }
        let svd::LeftSingular {
            vectors,
            values,
            deficient,
        } = svd::leading_left_singular_vectors(x, t);
        let mut matrix = vectors.transpose();
        for mut row in matrix.row_iter_mut() {
            let pivot = row
                .iter()
                .copied()
                .enumerate()
                .fold((0, 0.0f64), |best, (j, v)| {
                    if v.abs() > best.1.abs() {
                        (j, v)
                    } else {
                        best
                    }
                });
            if pivot.1 < 0.0 {
                row.neg_mut();
            }
        }
        Ok(Self {
            matrix,
            kind: ProjectionKind::TruncatedSvd,
            seed: None,
            singular_values: Some(values),
            rank_deficient: deficient,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
            kind: ProjectionKind::Identity,
            seed: None,
            singular_values: None,
            rank_deficient: 0,
        }
    }

    /// Wraps an arbitrary `t x n` matrix with `1 <= t <= n`.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let (t, n) = matrix.shape();
        if t == 0 || t > n {
            return Err(Error::Shape(format!(
                "projection must be t x n with 1 <= t <= n, got {t}x{n}"
            )));
        }
        Ok(Self {
            matrix,
            kind: ProjectionKind::Explicit,
            seed: None,
            singular_values: None,
            rank_deficient: 0,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Reduced dimension.
    pub fn t(&self) -> usize {
        self.matrix.nrows()
    }

    /// Full dimension.
    pub fn n(&self) -> usize {
        self.matrix.ncols()
    }

    /// Singular values belonging to the rows of a truncated-SVD projection.
    pub fn singular_values(&self) -> Option<&[f64]> {
        self.singular_values.as_deref()
    }

    /// Number of rows that span numerically null directions of the data.
    pub fn rank_deficient(&self) -> usize {
        self.rank_deficient
    }

    /// `S w`.
    pub fn project(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        if w.len() != self.n() {
            return Err(Error::Shape(format!(
                "vector of length {} for projection with n = {}",
                w.len(),
                self.n()
            )));
        }
        Ok(&self.matrix * w)
    }

    /// `S^T p`.
    pub fn lift(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        if p.len() != self.t() {
            return Err(Error::Shape(format!(
                "reduced vector of length {} for projection with t = {}",
                p.len(),
                self.t()
            )));
        }
        Ok(self.matrix.tr_mul(p))
    }

    /// Binary form: magic `MFTRPROJ`, `u32` version, `u8` kind, `u64` n,
    /// `u64` t, `u8` seed flag, `u64` seed, then `t * n` row-major `f64`
    /// values. All integers and floats are little-endian.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&[self.kind.code()])?;
        out.write_all(&(self.n() as u64).to_le_bytes())?;
        out.write_all(&(self.t() as u64).to_le_bytes())?;
        out.write_all(&[u8::from(self.seed.is_some())])?;
        out.write_all(&self.seed.unwrap_or(0).to_le_bytes())?;
        for row in self.matrix.row_iter() {
            for v in row.iter() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Config("not a projection file".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        let mut b1 = [0u8; 1];
        input.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != FORMAT_VERSION {
            return Err(Error::Config("unsupported projection file version".into()));
        }
        input.read_exact(&mut b1)?;
        let kind = ProjectionKind::from_code(b1[0])
            .ok_or_else(|| Error::Config(format!("unknown projection kind {}", b1[0])))?;
        input.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        input.read_exact(&mut b8)?;
        let t = u64::from_le_bytes(b8) as usize;
        input.read_exact(&mut b1)?;
        let has_seed = b1[0] != 0;
        input.read_exact(&mut b8)?;
        let seed = has_seed.then(|| u64::from_le_bytes(b8));
        if t == 0 || t > n {
            return Err(Error::Shape(format!("stored projection is {t}x{n}")));
        }
        let mut data = Vec::with_capacity(t * n);
        for _ in 0..t * n {
            input.read_exact(&mut b8)?;
            data.push(f64::from_le_bytes(b8));
        }
        Ok(Self {
            matrix: DMatrix::from_row_slice(t, n, &data),
            kind,
            seed,
            singular_values: None,
            rank_deficient: 0,
        })
    }
}
