//! Deterministic and random network generators, and conversion of raw
//! connectivity into dynamical adjacency matrices.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spectral_radius;
use crate::network::NetworkMatrix;
use crate::scalar::Scalar;

/// Version tag of the induction conversion formula, echoed in reports.
pub const INDUCTION_FORMULA: &str = "expm(tau*(C/rho(C) - leak*I))/v1";
/// Version tag of the transmission conversion formula.
pub const TRANSMISSION_FORMULA: &str = "row-normalize-in-weights+self-loop-on-empty-rows/v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Line,
    Ring,
    Star,
    /// Each pair linked independently with probability `p`.
    ErdosRenyi {
        p: f64,
    },
    /// Preferential attachment of `m_a` links per new node onto a complete
    /// core of `m_a + 1` nodes.
    BarabasiAlbert {
        m_a: usize,
    },
    /// Ring lattice with `k_ring` neighbours, each edge rewired with
    /// probability `beta`.
    WattsStrogatz {
        k_ring: usize,
        beta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Every edge carries `GeneratorConfig::edge_weight`.
    Unit,
    /// Independent weights uniform in `(0, 1]`.
    UniformRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    pub edge_weight: f64,
    pub weight_mode: WeightMode,
    /// Only Erdos-Renyi honours directed generation.
    pub directed: bool,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(family: Family, n: usize) -> Self {
        Self {
            family,
            n,
            edge_weight: 1.0,
            weight_mode: WeightMode::Unit,
            directed: false,
            seed: 0,
        }
    }

    /// Undirected ER graph with uniform random weights.
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Self {
        Self {
            weight_mode: WeightMode::UniformRandom,
            seed,
            ..Self::new(Family::ErdosRenyi { p }, n)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_weights(mut self, mode: WeightMode) -> Self {
        self.weight_mode = mode;
        self
    }

    pub fn directed(mut self, directed: bool) -> Self {
        self.directed = directed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 {
            return bad("network needs at least one node".into());
        }
        if !(self.edge_weight.is_finite() && self.edge_weight > 0.0) {
            return bad(format!(
                "edge weight must be positive, got {}",
                self.edge_weight
            ));
        }
        match self.family {
            Family::Ring if self.n < 3 => bad("ring needs at least 3 nodes".into()),
            Family::Star if self.n < 2 => bad("star needs at least 2 nodes".into()),
            Family::ErdosRenyi { p } if !(0.0..=1.0).contains(&p) => {
                bad(format!("edge probability {p} outside [0, 1]"))
            }
            Family::BarabasiAlbert { m_a } if m_a == 0 || self.n < m_a + 1 => bad(format!(
                "attachment count {m_a} needs 1 <= m_a < n = {}",
                self.n
            )),
            Family::WattsStrogatz { k_ring, beta } => {
                if k_ring == 0 || k_ring % 2 != 0 || k_ring >= self.n {
                    bad(format!(
                        "ring degree {k_ring} must be even, positive and below n = {}",
                        self.n
                    ))
                } else if !(0.0..=1.0).contains(&beta) {
                    bad(format!("rewiring probability {beta} outside [0, 1]"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Raw interaction strengths before conversion to dynamics;
/// `c[(i, j)]` is the strength of the link from `j` to `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConnectivity<T: Scalar> {
    pub c: DMatrix<T>,
    pub directed: bool,
}

impl<T: Scalar> RawConnectivity<T> {
    pub fn new(c: DMatrix<T>, directed: bool) -> Result<Self> {
        if c.nrows() != c.ncols() || c.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "connectivity must be square and nonempty, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if c.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "connectivity entries must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { c, directed })
    }

    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    pub fn edge_count(&self) -> usize {
        let nz = self.c.iter().filter(|v| **v != T::zero()).count();
        if self.directed {
            nz
        } else {
            let loops = (0..self.n())
                .filter(|&i| self.c[(i, i)] != T::zero())
                .count();
            (nz - loops) / 2 + loops
        }
    }

    /// Reads the raw matrix directly as dynamics.
    pub fn as_network(&self) -> NetworkMatrix<T> {
        NetworkMatrix::new(self.c.clone()).expect("validated connectivity")
    }
}

/// Mixes a base seed with a replicate index (SplitMix64 finaliser).
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn generate<T: Scalar>(config: &GeneratorConfig) -> Result<RawConnectivity<T>> {
    config.validate()?;
    let n = config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut directed = false;
    match config.family {
        Family::Line => edges.extend((1..n).map(|i| (i - 1, i))),
        Family::Ring => edges.extend((0..n).map(|i| (i, (i + 1) % n))),
        Family::Star => edges.extend((1..n).map(|leaf| (0, leaf))),
        Family::ErdosRenyi { p } => {
            directed = config.directed;
            for i in 0..n {
                for j in 0..n {
                    let candidate = if directed { i != j } else { i < j };
                    if candidate && rng.random_bool(p) {
                        edges.push((i, j));
                    }
                }
            }
        }
        Family::BarabasiAlbert { m_a } => edges = barabasi_albert(n, m_a, &mut rng),
        Family::WattsStrogatz { k_ring, beta } => edges = watts_strogatz(n, k_ring, beta, &mut rng),
    }

    let mut c = DMatrix::<T>::zeros(n, n);
    for (src, dst) in edges {
        let w = match config.weight_mode {
            WeightMode::Unit => config.edge_weight,
            WeightMode::UniformRandom => 1.0 - rng.random::<f64>(),
        };
        let w = T::lit(w);
        c[(dst, src)] = w;
        if !directed {
            c[(src, dst)] = w;
        }
    }
    RawConnectivity::new(c, directed)
}

fn barabasi_albert(n: usize, m_a: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let core = m_a + 1;
    let mut edges = Vec::new();
    // each node appears once per incident edge
    let mut endpoints = Vec::new();
    for i in 0..core {
        for j in (i + 1)..core {
            edges.push((i, j));
            endpoints.extend([i, j]);
        }
    }
    for new in core..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m_a);
        while targets.len() < m_a {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            edges.push((t, new));
            endpoints.extend([t, new]);
        }
    }
    edges
}

#[allow(clippy::needless_range_loop)]
fn watts_strogatz(n: usize, k_ring: usize, beta: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 1..=k_ring / 2 {
            let t = (i + j) % n;
            adj[i][t] = true;
            adj[t][i] = true;
        }
    }
    for j in 1..=k_ring / 2 {
        for i in 0..n {
            let t = (i + j) % n;
            if !adj[i][t] || !rng.random_bool(beta) {
                continue;
            }
            let degree = adj[i].iter().filter(|&&x| x).count();
            if degree >= n - 1 {
                continue;
            }
            let new_t = loop {
                let cand = rng.random_range(0..n);
                if cand != i && !adj[i][cand] {
                    break cand;
                }
            };
            adj[i][t] = false;
            adj[t][i] = false;
            adj[i][new_t] = true;
            adj[new_t][i] = true;
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for t in (i + 1)..n {
            if adj[i][t] {
                edges.push((i, t));
            }
        }
    }
    edges
}

/// Directed random connectivity with `n` drawn log-uniformly in
/// `[n_min, n_max]`, edge density uniform in `[0, 1]` and uniform weights.
pub fn log_uniform_random_config(n_min: usize, n_max: usize, seed: u64) -> GeneratorConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (
        (n_min.max(1) as f64).ln(),
        (n_max.max(n_min).max(1) as f64).ln(),
    );
    let n = (lo + (hi - lo) * rng.random::<f64>()).exp().round() as usize;
    let p = rng.random::<f64>();
    GeneratorConfig {
        family: Family::ErdosRenyi { p },
        n: n.clamp(n_min.max(1), n_max.max(n_min)),
        edge_weight: 1.0,
        weight_mode: WeightMode::UniformRandom,
        directed: true,
        seed: rng.random(),
    }
}

/// Normalises every node's incoming weights to sum to one. Nodes without
/// incoming links get a unit self-loop.
pub fn transmission<T: Scalar>(raw: &RawConnectivity<T>) -> NetworkMatrix<T> {
    let n = raw.n();
    let mut a = raw.c.clone();
    for i in 0..n {
        let sum = a.row(i).iter().fold(T::zero(), |s, v| s + *v);
        if sum > T::zero() {
            for j in 0..n {
                a[(i, j)] /= sum;
            }
        } else {
            a[(i, i)] = T::one();
        }
    }
    NetworkMatrix::new(a).expect("row-normalised connectivity is a valid network")
}

/// Sampled continuous-time dynamics `A = expm(tau * (C / rho(C) - leak * I))`.
/// `C / rho(C)` is taken as `C` when `rho(C) = 0`.
pub fn induction<T: Scalar>(raw: &RawConnectivity<T>, tau: T, leak: T) -> Result<NetworkMatrix<T>> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "sampling interval must be positive, got {tau}"
        )));
    }
    if !(leak >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "leak must be nonnegative, got {leak}"
        )));
    }
    let n = raw.n();
    let rho = spectral_radius(&raw.c)?;
    let scaled = if rho > T::zero() {
        &raw.c / rho
    } else {
        raw.c.clone()
    };
    let generator = (scaled - DMatrix::<T>::identity(n, n) * leak) * tau;
    // exponential of an essentially nonnegative matrix is nonnegative;
    // clip rounding noise
    let a = generator.exp().map(|v| v.max(T::zero()));
    NetworkMatrix::new(a)
}

/// `A / rho(A)`.
pub fn normalize_spectral<T: Scalar>(net: &NetworkMatrix<T>) -> Result<NetworkMatrix<T>> {
    let rho = spectral_radius(net.matrix())?;
    if rho <= T::default_epsilon() * T::lit(16.0) {
        return Err(Error::NilpotentMatrix);
    }
    NetworkMatrix::signed(net.matrix() / rho)
}
