use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::Float;

use super::operators::HermitianOperator;
use super::state::{JointState, DEFAULT_LEAK_THRESHOLD};
use crate::error::{Error, Result};
use crate::scalar::SpectralScalar;

/// Eigen-decomposition of one invariant block.
#[derive(Debug, Clone)]
struct Block<T: SpectralScalar> {
    indices: Vec<usize>,
    values: DVector<T>,
    vectors: DMatrix<T>,
}

/// Spectral decomposition of a real symmetric Hamiltonian, split into the
/// connected components of its sparsity pattern (parity sectors for every
/// Hamiltonian built here) and diagonalized block by block.
#[derive(Debug, Clone)]
pub struct Spectrum<T: SpectralScalar> {
    blocks: Vec<Block<T>>,
    block_of: Vec<usize>,
    n_cut: usize,
    spin_dim: usize,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Groups indices into the connected components of the nonzero pattern.
fn components<T: SpectralScalar>(matrix: &DMatrix<T>) -> Vec<Vec<usize>> {
    let n = matrix.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..n {
        for i in (j + 1)..n {
            if matrix[(i, j)] != T::zero() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// `(e^{iΔt} − 1)/(iΔ) = t · e^{iΔt/2} · sinc(Δt/2)`, equal to `t` at `Δ = 0`.
pub(crate) fn phase_integral<T: SpectralScalar>(delta: T, t: T) -> Complex<T> {
    let half = delta * t / T::cst(2.0);
    let sinc = if Float::abs(half) < T::cst(1e-8) {
        T::one() - half * half / T::cst(6.0)
    } else {
        Float::sin(half) / half
    };
    Complex::new(Float::cos(half), Float::sin(half)) * (t * sinc)
}

impl<T: SpectralScalar> Spectrum<T> {
    pub fn new(h: &HermitianOperator<T>) -> Result<Self> {
        let real = h.real_matrix()?;
        let groups = components(&real);
        let mut block_of = vec![0; real.nrows()];
        let mut blocks = Vec::with_capacity(groups.len());
        for (b, indices) in groups.into_iter().enumerate() {
            for &i in &indices {
                block_of[i] = b;
            }
            let sub = DMatrix::from_fn(indices.len(), indices.len(), |r, c| real[(indices[r], indices[c])]);
            let (values, vectors) = T::symmetric_eigen(sub);
            blocks.push(Block {
                indices,
                values,
                vectors,
            });
        }
        Ok(Self {
            blocks,
            block_of,
            n_cut: h.n_cut(),
            spin_dim: h.spin_dim(),
        })
    }

    pub fn dim(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut all: Vec<T> = self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        all
    }

    fn check_state(&self, psi: &JointState<T>) -> Result<()> {
        if psi.n_cut() != self.n_cut || psi.spin_dim() != self.spin_dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.amplitudes().len(),
            });
        }
        Ok(())
    }

    /// Coefficients `Vᵀψ` of the state restricted to block `b`.
    fn project(&self, b: usize, psi: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        let block = &self.blocks[b];
        let n = block.indices.len();
        DVector::from_fn(n, |k, _| {
            block
                .indices
                .iter()
                .enumerate()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (r, &i)| {
                    acc + psi[i] * block.vectors[(r, k)]
                })
        })
    }

    /// Writes `V c` for block `b` into `out`.
    fn scatter(&self, b: usize, coeffs: &DVector<Complex<T>>, out: &mut DVector<Complex<T>>) {
        let block = &self.blocks[b];
        for (r, &i) in block.indices.iter().enumerate() {
            out[i] = coeffs
                .iter()
                .enumerate()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (k, c)| {
                    acc + *c * block.vectors[(r, k)]
                });
        }
    }

    /// `e^{−iHt}ψ` with the default leak threshold.
    pub fn evolve(&self, psi: &JointState<T>, t: T) -> Result<JointState<T>> {
        self.evolve_with_threshold(psi, t, T::cst(DEFAULT_LEAK_THRESHOLD))
    }

    /// `e^{−iHt}ψ`; fails if more than `threshold` of the probability ends up
    /// in the top tenth of the Fock levels.
    pub fn evolve_with_threshold(&self, psi: &JointState<T>, t: T, threshold: T) -> Result<JointState<T>> {
        self.check_state(psi)?;
        let mut out = DVector::from_element(self.dim(), Complex::new(T::zero(), T::zero()));
        for (b, block) in self.blocks.iter().enumerate() {
            let mut c = self.project(b, psi.amplitudes());
            for (k, e) in block.values.iter().enumerate() {
                let phase = -*e * t;
                c[k] *= Complex::new(Float::cos(phase), Float::sin(phase));
            }
            self.scatter(b, &c, &mut out);
        }
        let evolved = JointState::from_parts_unchecked(out, self.n_cut, self.spin_dim);
        evolved.check_leak(threshold)?;
        Ok(evolved)
    }

    /// Operator `d` rotated into the eigenbasis of each block.
    fn rotated_blocks(&self, d: &HermitianOperator<T>) -> Result<Vec<DMatrix<T>>> {
        if d.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: d.dim(),
            });
        }
        let real = d.real_matrix()?;
        for j in 0..real.ncols() {
            for i in 0..real.nrows() {
                if real[(i, j)] != T::zero() && self.block_of[i] != self.block_of[j] {
                    return Err(Error::BlockMismatch);
                }
            }
        }
        Ok(self
            .blocks
            .iter()
            .map(|block| {
                // the operators rotated here are banded, so `d V` is formed
                // from the nonzero entries and only `Vᵀ (d V)` is dense
                let n = block.indices.len();
                let mut entries = Vec::new();
                for (r, &i) in block.indices.iter().enumerate() {
                    for (c, &j) in block.indices.iter().enumerate() {
                        if real[(i, j)] != T::zero() {
                            entries.push((r, c, real[(i, j)]));
                        }
                    }
                }
                let mut dv = DMatrix::zeros(n, n);
                for k in 0..n {
                    for &(r, c, v) in &entries {
                        dv[(r, k)] += v * block.vectors[(c, k)];
                    }
                }
                block.vectors.transpose() * dv
            })
            .collect())
    }

    /// Evolved state and its derivative with respect to a parameter `p` of
    /// `H(p)`, given `dH = ∂H/∂p`:
    /// `∂ψ_t = V D Vᵀψ₀` with
    /// `D_jk = dH_jk (e^{−iE_j t} − e^{−iE_k t})/(E_j − E_k)` and
    /// `D_jj = −i t dH_jj e^{−iE_j t}`.
    pub fn evolve_with_derivative(
        &self,
        psi: &JointState<T>,
        dh: &HermitianOperator<T>,
        t: T,
    ) -> Result<(JointState<T>, DVector<Complex<T>>)> {
        self.check_state(psi)?;
        let rotated = self.rotated_blocks(dh)?;
        let zero = Complex::new(T::zero(), T::zero());
        let mut state = DVector::from_element(self.dim(), zero);
        let mut deriv = DVector::from_element(self.dim(), zero);
        for (b, block) in self.blocks.iter().enumerate() {
            let c = self.project(b, psi.amplitudes());
            let n = c.len();
            let phases: Vec<Complex<T>> = block
                .values
                .iter()
                .map(|e| Complex::new(Float::cos(-*e * t), Float::sin(-*e * t)))
                .collect();
            let evolved = DVector::from_fn(n, |k, _| c[k] * phases[k]);
            let w = &rotated[b];
            let d = DVector::from_fn(n, |j, _| {
                let mut acc = zero;
                for k in 0..n {
                    let delta = block.values[j] - block.values[k];
                    // e^{−iE_j t}(1 − e^{iΔt})/Δ = −i e^{−iE_j t} (e^{iΔt} − 1)/(iΔ)
                    let kernel = phases[j] * phase_integral(delta, t) * Complex::new(T::zero(), -T::one());
                    acc += kernel * (c[k] * w[(j, k)]);
                }
                acc
            });
            self.scatter(b, &evolved, &mut state);
            self.scatter(b, &d, &mut deriv);
        }
        let state = JointState::from_parts_unchecked(state, self.n_cut, self.spin_dim);
        state.check_leak(T::cst(DEFAULT_LEAK_THRESHOLD))?;
        Ok((state, deriv))
    }

    /// `Var[h]` over `ψ₀` for `h = ∫₀ᵗ e^{iHs} H₁ e^{−iHs} ds`, whose matrix
    /// elements in the eigenbasis are `H₁_jk (e^{iΔ_jk t} − 1)/(iΔ_jk)`.
    pub fn generator_variance(&self, psi: &JointState<T>, h1: &HermitianOperator<T>, t: T) -> Result<T> {
        self.check_state(psi)?;
        let rotated = self.rotated_blocks(h1)?;
        let zero = Complex::new(T::zero(), T::zero());
        let mut mean = T::zero();
        let mut second = T::zero();
        for (b, block) in self.blocks.iter().enumerate() {
            let c = self.project(b, psi.amplitudes());
            let n = c.len();
            let w = &rotated[b];
            for j in 0..n {
                let mut hc = zero;
                for k in 0..n {
                    let delta = block.values[j] - block.values[k];
                    hc += phase_integral(delta, t) * (c[k] * w[(j, k)]);
                }
                mean += (c[j].conj() * hc).re;
                second += hc.norm_sqr();
            }
        }
        Ok(Float::max(second - mean * mean, T::zero()))
    }
}
