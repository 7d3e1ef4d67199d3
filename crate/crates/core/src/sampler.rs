//! Gaussian band matrix sampling and the exact Ornstein-Uhlenbeck transition.
//!
//! Every sample is a pure function of `(master seed, trial)`: the pair is
//! hashed into a stream key, a ChaCha8 stream is seeded from it, and entries
//! are drawn in lexicographic order over unordered pairs `x <= y`.

use std::io::{Read, Write};
use std::sync::Arc;

use faer::{c64, Mat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::harness::seed::seed_substream;
use crate::lattice::TorusLattice;
use crate::profile::{mean_field_profile, VarianceProfile};

/// Domain tag separating the flow noise stream from the initial-sample stream.
const OU_STREAM_TAG: u64 = 0x4F55_5F46_4C4F_5721;

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub master_seed: u64,
    pub trial: u64,
    pub stream_key: u64,
    pub flow_time: f64,
    pub profile_id: String,
}

#[derive(Debug, Clone)]
pub struct HermitianSample {
    profile: Arc<VarianceProfile>,
    matrix: Mat<c64>,
    provenance: Provenance,
}

impl HermitianSample {
    /// Wraps an explicit matrix; it must equal its conjugate transpose
    /// exactly.
    pub fn from_matrix(profile: Arc<VarianceProfile>, matrix: Mat<c64>) -> Result<Self> {
        let n = profile.lattice().sites();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Contract(format!(
                "matrix is {}x{}, lattice has {n} sites",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..=i {
                if matrix[(i, j)] != matrix[(j, i)].conj() {
                    return Err(Error::Contract(format!("matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        let provenance = Provenance {
            master_seed: 0,
            trial: 0,
            stream_key: 0,
            flow_time: 0.0,
            profile_id: profile.id().to_string(),
        };
        Ok(HermitianSample {
            profile,
            matrix,
            provenance,
        })
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn profile(&self) -> &Arc<VarianceProfile> {
        &self.profile
    }

    pub fn lattice(&self) -> &TorusLattice {
        self.profile.lattice()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Fills a Hermitian matrix with entries of variance `variance(x, y)`:
/// off-diagonal real and imaginary parts each carry half of it, the diagonal
/// is real.
fn gaussian_hermitian(n: usize, key: u64, variance: impl Fn(usize, usize) -> f64) -> Mat<c64> {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let mut m = Mat::<c64>::zeros(n, n);
    for x in 0..n {
        for y in x..n {
            let s = variance(x, y).max(0.0);
            if x == y {
                let g: f64 = StandardNormal.sample(&mut rng);
                m[(x, x)] = c64::new(s.sqrt() * g, 0.0);
            } else {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                let scale = (0.5 * s).sqrt();
                let h = c64::new(scale * re, scale * im);
                m[(x, y)] = h;
                m[(y, x)] = h.conj();
            }
        }
    }
    m
}

/// Draws `H` with `E|h_xy|^2 = s_xy` (complex off-diagonal, real diagonal).
pub fn sample_band(profile: &Arc<VarianceProfile>, seed: u64, trial: u64) -> HermitianSample {
    let key = seed_substream(seed, trial);
    let n = profile.lattice().sites();
    let matrix = gaussian_hermitian(n, key, |x, y| profile.s(x, y));
    HermitianSample {
        profile: Arc::clone(profile),
        matrix,
        provenance: Provenance {
            master_seed: seed,
            trial,
            stream_key: key,
            flow_time: 0.0,
            profile_id: profile.id().to_string(),
        },
    }
}

/// GUE normalized to the spectrum `[-2, 2]`; a band sample with the
/// mean-field profile on a one-dimensional lattice of `n` sites.
pub fn sample_gue(n: usize, seed: u64, trial: u64) -> Result<HermitianSample> {
    if n < 2 {
        return Err(Error::Parameter(format!("GUE needs n >= 2, got {n}")));
    }
    let profile = Arc::new(mean_field_profile(TorusLattice::new(1, n)?));
    Ok(sample_band(&profile, seed, trial))
}

/// `H_t = e^{-t/2} H_0 + Xi_t` with `Xi_t` Hermitian Gaussian of entry
/// variance `(1 - e^{-t}) / N`, the exact law of the matrix OU flow.
///
/// The noise stream is keyed by `(seed, trial)` under a separate domain tag,
/// so reusing the initial sample's seed still gives independent noise.
pub fn ou_evolve(
    h0: &HermitianSample,
    t: f64,
    profile: &Arc<VarianceProfile>,
    seed: u64,
    trial: u64,
) -> Result<HermitianSample> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!("flow time must be finite and >= 0, got {t}")));
    }
    let n = h0.dim();
    if profile.lattice().sites() != n {
        return Err(Error::Contract("profile and sample sizes differ".into()));
    }
    if t == 0.0 {
        let mut out = h0.clone();
        out.profile = Arc::clone(profile);
        return Ok(out);
    }
    let key = seed_substream(seed ^ OU_STREAM_TAG, trial);
    let noise_var = -(-t).exp_m1() / n as f64;
    let noise = gaussian_hermitian(n, key, |_, _| noise_var);
    let decay = (-0.5 * t).exp();
    let mut matrix = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            matrix[(i, j)] = h0.matrix[(i, j)] * decay + noise[(i, j)];
        }
    }
    Ok(HermitianSample {
        profile: Arc::clone(profile),
        matrix,
        provenance: Provenance {
            master_seed: seed,
            trial,
            stream_key: key,
            flow_time: h0.provenance.flow_time + t,
            profile_id: profile.id().to_string(),
        },
    })
}

/// Entry variance of `H_t`: `e^{-t} s_xy + (1 - e^{-t}) / N`.
pub fn flow_variance(profile: &VarianceProfile, t: f64, x: usize, y: usize) -> f64 {
    let n = profile.lattice().sites() as f64;
    (-t).exp() * profile.s(x, y) - (-t).exp_m1() / n
}

pub const DUMP_MAGIC: &[u8; 4] = b"RBM1";
pub const DUMP_HEADER_LEN: usize = 32;

/// Header of a matrix dump file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpHeader {
    pub dim: u32,
    pub side: u32,
    pub width: f64,
    pub flow_time: f64,
}

/// Writes the 32-byte header (`RBM1`, d: u32, L: u32, reserved u32, W: f64,
/// t: f64, all little-endian) followed by the row-major matrix as `f32`
/// (re, im) pairs.
pub fn write_matrix_dump<W: Write>(sample: &HermitianSample, mut out: W) -> Result<()> {
    let lat = sample.lattice();
    let mut header = Vec::with_capacity(DUMP_HEADER_LEN);
    header.extend_from_slice(DUMP_MAGIC);
    header.extend_from_slice(&(lat.dim() as u32).to_le_bytes());
    header.extend_from_slice(&(lat.side() as u32).to_le_bytes());
    header.extend_from_slice(&0u32.to_le_bytes());
    header.extend_from_slice(&sample.profile.width().to_le_bytes());
    header.extend_from_slice(&sample.provenance.flow_time.to_le_bytes());
    out.write_all(&header)?;
    let n = sample.dim();
    let mut buf = Vec::with_capacity(8 * n);
    for i in 0..n {
        buf.clear();
        for j in 0..n {
            let v = sample.matrix[(i, j)];
            buf.extend_from_slice(&(v.re as f32).to_le_bytes());
            buf.extend_from_slice(&(v.im as f32).to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_matrix_dump<R: Read>(mut input: R) -> Result<(DumpHeader, Mat<c64>)> {
    let mut header = [0u8; DUMP_HEADER_LEN];
    input.read_exact(&mut header)?;
    if &header[..4] != DUMP_MAGIC {
        return Err(Error::Format("matrix dump does not start with RBM1".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
    let head = DumpHeader {
        dim: u32_at(4),
        side: u32_at(8),
        width: f64_at(16),
        flow_time: f64_at(24),
    };
    let n = TorusLattice::new(head.dim as usize, head.side as usize)?.sites();
    let mut raw = vec![0u8; 8 * n * n];
    input.read_exact(&mut raw)?;
    let f32_at = |o: usize| f32::from_le_bytes(raw[o..o + 4].try_into().unwrap()) as f64;
    let m = Mat::from_fn(n, n, |i, j| {
        let o = 8 * (i * n + j);
        c64::new(f32_at(o), f32_at(o + 4))
    });
    Ok((head, m))
}
