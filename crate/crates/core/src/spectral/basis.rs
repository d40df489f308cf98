use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Normalisation of the eigenfunctions, `1 / (sqrt(2) pi)`.
pub const BASIS_NORM: f64 = FRAC_1_SQRT_2 / PI;

/// A nonzero wave vector `k = (k1, k2)` on the integer lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveIndex {
    pub k1: i32,
    pub k2: i32,
}

impl WaveIndex {
    pub fn new(k1: i32, k2: i32) -> Result<Self> {
        if k1 == 0 && k2 == 0 {
            return Err(LabError::Domain("wave index (0, 0) is excluded".into()));
        }
        Ok(Self { k1, k2 })
    }

    pub fn norm_sq(&self) -> i64 {
        let (a, b) = (i64::from(self.k1), i64::from(self.k2));
        a * a + b * b
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// Membership in the sine half-lattice: `k1 > 0`, or `k1 = 0` and `k2 > 0`.
    ///
    /// Exactly one of `k` and `-k` satisfies this, so the two branches of the
    /// basis partition the lattice.
    pub fn is_sine_branch(&self) -> bool {
        self.k1 > 0 || (self.k1 == 0 && self.k2 > 0)
    }

    pub fn neg(&self) -> Self {
        Self { k1: -self.k1, k2: -self.k2 }
    }

    /// Unit vector `k^perp / |k|` with `k^perp = (-k2, k1)`.
    pub fn unit_perp(&self) -> [f64; 2] {
        let r = self.norm();
        [-f64::from(self.k2) / r, f64::from(self.k1) / r]
    }

    pub fn dot(&self, xi: [f64; 2]) -> f64 {
        f64::from(self.k1) * xi[0] + f64::from(self.k2) * xi[1]
    }
}

impl std::fmt::Display for WaveIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

/// Evaluates the divergence-free eigenfunction `e_k` at a point of the torus.
pub fn basis_eval(k: WaveIndex, xi: [f64; 2]) -> Result<[f64; 2]> {
    if k.k1 == 0 && k.k2 == 0 {
        return Err(LabError::Domain("basis function e_0 does not exist".into()));
    }
    let phase = k.dot(xi);
    let profile = if k.is_sine_branch() { phase.sin() } else { phase.cos() };
    let dir = k.unit_perp();
    Ok([BASIS_NORM * dir[0] * profile, BASIS_NORM * dir[1] * profile])
}

/// All wave vectors with `0 < |k| <= n`, in storage order `(|k|^2, k1, k2)`.
#[derive(Debug, PartialEq, Eq)]
pub struct ModeSet {
    cutoff: usize,
    modes: Vec<WaveIndex>,
    neg: Vec<usize>,
    lookup: HashMap<WaveIndex, usize>,
}

impl ModeSet {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(LabError::Config("cutoff n must be at least 1".into()));
        }
        let n = cutoff as i32;
        let n2 = i64::from(n) * i64::from(n);
        let mut modes = Vec::new();
        for k1 in -n..=n {
            for k2 in -n..=n {
                let k = WaveIndex { k1, k2 };
                if (k1, k2) != (0, 0) && k.norm_sq() <= n2 {
                    modes.push(k);
                }
            }
        }
        modes.sort_by_key(|k| (k.norm_sq(), k.k1, k.k2));
        let lookup: HashMap<_, _> = modes.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let neg = modes.iter().map(|k| lookup[&k.neg()]).collect();
        Ok(Self { cutoff, modes, neg, lookup })
    }

    /// Process-wide shared instance for a cutoff.
    pub fn shared(cutoff: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ModeSet>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("mode cache poisoned");
        if let Some(set) = guard.get(&cutoff) {
            return Ok(Arc::clone(set));
        }
        let set = Arc::new(Self::new(cutoff)?);
        guard.insert(cutoff, Arc::clone(&set));
        Ok(set)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[WaveIndex] {
        &self.modes
    }

    pub fn get(&self, i: usize) -> WaveIndex {
        self.modes[i]
    }

    /// Storage position of `-k` for the mode stored at `i`.
    pub fn neg_index(&self, i: usize) -> usize {
        self.neg[i]
    }

    pub fn index_of(&self, k: WaveIndex) -> Option<usize> {
        self.lookup.get(&k).copied()
    }
}
