//! States, measurement effects and effect-side Kraus channels, plus the
//! repeated-operation probability `Tr(rho * E^n(M))`.
//!
//! Channels act in the Heisenberg picture on effects, `E(M) = sum_j K_j^dag M K_j`,
//! so normalization is unitality: `sum_j K_j^dag K_j = 1`. For a single unitary
//! Kraus operator `u` this is the map `M -> u^dag M u`, i.e. the Schrodinger
//! evolution `rho -> u rho u^dag` seen from the effect side.

use num_complex::Complex64;

use crate::cmat::{eig_hermitian, CMatrix, HERMITICITY_TOL, UNITARITY_TOL};
use crate::error::{Error, Result};

/// Lower slack allowed on eigenvalues of states/effects.
pub const PSD_TOL: f64 = 1e-10;
/// Window around [0,1] inside which raw probabilities are clamped silently.
pub const CLAMP_WINDOW: f64 = 1e-9;
/// Largest supported number of repeated applications.
pub const MAX_SEQUENCE_LEN: u32 = 16;

/// Density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug)]
pub struct State {
    rho: CMatrix,
}

impl State {
    pub fn new(rho: CMatrix) -> Result<Self> {
        let dev = rho.hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(Error::InvalidState {
                reason: format!("Hermiticity deviation {dev:.3e} exceeds {HERMITICITY_TOL:.0e}"),
            });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > HERMITICITY_TOL || tr.im.abs() > HERMITICITY_TOL {
            return Err(Error::InvalidState {
                reason: format!("trace {tr} differs from 1 beyond {HERMITICITY_TOL:.0e}"),
            });
        }
        let eigs = eig_hermitian(&rho)?;
        if eigs[0] < -PSD_TOL {
            return Err(Error::InvalidState {
                reason: format!("negative eigenvalue {:.3e}", eigs[0]),
            });
        }
        Ok(Self { rho })
    }

    /// Pure state |psi><psi| from a ket (normalized internally).
    pub fn from_ket(ket: &[Complex64]) -> Result<Self> {
        Self::new(CMatrix::ket_projector(ket))
    }

    /// Computational basis state |k><k|.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self {
            rho: CMatrix::basis_projector(dim, k),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }
}

/// Measurement effect: Hermitian with spectrum in [0, 1].
#[derive(Clone, Debug)]
pub struct Effect {
    m: CMatrix,
}

impl Effect {
    pub fn new(m: CMatrix) -> Result<Self> {
        let dev = m.hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(Error::InvalidEffect {
                reason: format!("Hermiticity deviation {dev:.3e} exceeds {HERMITICITY_TOL:.0e}"),
            });
        }
        let eigs = eig_hermitian(&m)?;
        let lo = eigs[0];
        let hi = *eigs.last().expect("nonempty spectrum");
        if lo < -PSD_TOL || hi > 1.0 + PSD_TOL {
            return Err(Error::InvalidEffect {
                reason: format!("spectrum [{lo:.3e}, {hi:.3e}] outside [0, 1]"),
            });
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    /// Projector |psi><psi| used as a measurement outcome.
    pub fn from_ket(ket: &[Complex64]) -> Result<Self> {
        Self::new(CMatrix::ket_projector(ket))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }
}

/// Effect-side Kraus channel: `E(M) = sum_j K_j^dag M K_j` with
/// `sum_j K_j^dag K_j = 1`.
#[derive(Clone, Debug)]
pub struct Channel {
    kraus: Vec<CMatrix>,
}

impl Channel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel {
            reason: "empty Kraus list".into(),
        })?;
        let dim = first.dim();
        for k in &kraus {
            if k.dim() != dim {
                return Err(Error::DimMismatch {
                    left: dim,
                    right: k.dim(),
                });
            }
        }
        let mut sum = CMatrix::zeros(dim);
        for k in &kraus {
            sum = sum.add(&k.adjoint().mul(k));
        }
        let dev = sum.max_abs_diff(&CMatrix::identity(dim));
        if dev > UNITARITY_TOL {
            return Err(Error::InvalidChannel {
                reason: format!(
                    "sum K\u{2020}K deviates from identity by {dev:.3e} (tol {UNITARITY_TOL:.0e})"
                ),
            });
        }
        Ok(Self { kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![CMatrix::identity(dim)],
        }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].dim()
    }
}

/// Single-Kraus channel of a unitary: applying it to an effect `M` yields
/// `u^dag M u`. Rejects non-unitary input, naming the max deviation.
pub fn channel_from_unitary(u: &CMatrix) -> Result<Channel> {
    let dev = u.unitarity_deviation();
    if dev > UNITARITY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(Channel {
        kraus: vec![u.clone()],
    })
}

/// One Heisenberg-picture application: `sum_j K_j^dag M K_j`.
///
/// The output satisfies the effect invariants whenever the inputs do, so it is
/// returned without re-validation.
pub fn apply_channel(ch: &Channel, m: &Effect) -> Result<Effect> {
    ch.kraus[0].check_same_dim(m.matrix())?;
    Ok(Effect::from_matrix_unchecked(apply_to_matrix(ch, m.matrix())))
}

fn apply_to_matrix(ch: &Channel, m: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(m.dim());
    for k in &ch.kraus {
        out = out.add(&k.adjoint().mul(m).mul(k));
    }
    out
}

/// Probability outcome of [`sequence_probability`].
///
/// `raw` is the computed trace; `value` equals `raw` clamped to [0,1] when the
/// excursion is within [`CLAMP_WINDOW`] (rounding noise). Larger excursions
/// keep the raw value and set `flagged`, signalling a modeling error rather
/// than floating-point noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbOutcome {
    pub raw: f64,
    pub value: f64,
    pub flagged: bool,
}

/// `Tr(rho * E^n(M))` for `n` repeated applications of the channel.
pub fn sequence_probability(
    rho: &State,
    ch: &Channel,
    n: u32,
    m: &Effect,
) -> Result<ProbOutcome> {
    if n > MAX_SEQUENCE_LEN {
        return Err(Error::InvalidArgument(format!(
            "sequence length {n} exceeds the supported maximum {MAX_SEQUENCE_LEN}"
        )));
    }
    rho.matrix().check_same_dim(m.matrix())?;
    ch.kraus[0].check_same_dim(m.matrix())?;
    let mut effect = m.matrix().clone();
    for _ in 0..n {
        effect = apply_to_matrix(ch, &effect);
    }
    let raw = rho.matrix().mul(&effect).trace().re;
    let outcome = if (0.0..=1.0).contains(&raw) {
        ProbOutcome {
            raw,
            value: raw,
            flagged: false,
        }
    } else if raw >= -CLAMP_WINDOW && raw <= 1.0 + CLAMP_WINDOW {
        ProbOutcome {
            raw,
            value: raw.clamp(0.0, 1.0),
            flagged: false,
        }
    } else {
        ProbOutcome {
            raw,
            value: raw,
            flagged: true,
        }
    };
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::gate_set;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_x() -> CMatrix {
        CMatrix::new(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
    }

    fn sigma_z() -> CMatrix {
        CMatrix::new(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]).unwrap()
    }

    /// Haar-ish random unitary via Gram-Schmidt on a random complex matrix.
    fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
        let mut cols: Vec<Vec<Complex64>> = (0..dim)
            .map(|_| {
                (0..dim)
                    .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect()
            })
            .collect();
        for j in 0..dim {
            for k in 0..j {
                let proj: Complex64 = (0..dim).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..dim {
                    let sub = proj * cols[k][i];
                    cols[j][i] -= sub;
                }
            }
            let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for i in 0..dim {
                cols[j][i] /= norm;
            }
        }
        CMatrix::from_fn(dim, |i, j| cols[j][i])
    }

    #[test]
    fn identity_channel_preserves_effects() {
        let ch = channel_from_unitary(&CMatrix::identity(2)).unwrap();
        let m = Effect::new(CMatrix::basis_projector(2, 0)).unwrap();
        let out = apply_channel(&ch, &m).unwrap();
        assert!(out.matrix().max_abs_diff(m.matrix()) < 1e-15);
    }

    #[test]
    fn s_gate_twice_is_bit_flip() {
        // S^2 = -i sigma_x, so two applications map |0><0| onto |1><1| up to phase,
        // and the sequence probability from |1><1| is exactly 1.
        let (s, _, _) = gate_set(0.0);
        let ch = channel_from_unitary(&s).unwrap();
        let rho = State::basis(2, 1);
        let m = Effect::new(CMatrix::basis_projector(2, 0)).unwrap();
        let p = sequence_probability(&rho, &ch, 2, &m).unwrap();
        assert!((p.value - 1.0).abs() < 1e-12, "got {}", p.value);
        assert!(!p.flagged);

        let s2 = s.mul(&s);
        let minus_i_sx = sigma_x().scale(c(0.0, -1.0));
        assert!(s2.max_abs_diff(&minus_i_sx) < 1e-12);
    }

    #[test]
    fn single_s_gives_half() {
        let (s, _, _) = gate_set(0.0);
        let ch = channel_from_unitary(&s).unwrap();
        let rho = State::basis(2, 1);
        let m = Effect::new(CMatrix::basis_projector(2, 0)).unwrap();
        let p = sequence_probability(&rho, &ch, 1, &m).unwrap();
        // Direct 2x2 multiplication oracle: |<0|S|1>|^2.
        let amp = s.at(0, 1);
        assert!((p.value - amp.norm_sqr()).abs() < 1e-14);
        assert!((p.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn n_zero_is_plain_born_rule() {
        let rho = State::basis(2, 0);
        let m = Effect::new(CMatrix::basis_projector(2, 0)).unwrap();
        let ch = Channel::identity(2);
        let p = sequence_probability(&rho, &ch, 0, &m).unwrap();
        assert_eq!(p.value, 1.0);
    }

    #[test]
    fn rejects_long_sequences_and_dim_mismatch() {
        let rho = State::basis(2, 0);
        let m = Effect::new(CMatrix::basis_projector(2, 0)).unwrap();
        let ch = Channel::identity(2);
        assert!(sequence_probability(&rho, &ch, 17, &m).is_err());
        let m3 = Effect::new(CMatrix::basis_projector(3, 0)).unwrap();
        assert!(sequence_probability(&rho, &ch, 1, &m3).is_err());
    }

    #[test]
    fn unitary_conjugation_preserves_trace() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..10 {
            let u = random_unitary(3, &mut rng);
            let ch = channel_from_unitary(&u).unwrap();
            let m = Effect::new(CMatrix::basis_projector(3, 1)).unwrap();
            let out = apply_channel(&ch, &m).unwrap();
            // Direct matrix multiplication oracle.
            let direct = u.adjoint().mul(m.matrix()).mul(&u);
            assert!(out.matrix().max_abs_diff(&direct) < 1e-12);
            assert!((out.matrix().trace().re - m.matrix().trace().re).abs() < 1e-10);
        }
    }

    #[test]
    fn non_unitary_is_rejected_with_deviation() {
        let m = CMatrix::identity(2).scale(c(1.1, 0.0));
        match channel_from_unitary(&m) {
            Err(Error::NotUnitary { deviation }) => assert!((deviation - 0.21).abs() < 1e-12),
            other => panic!("expected NotUnitary, got {other:?}"),
        }
    }

    #[test]
    fn bit_flip_channel_on_ground_projector() {
        let ch = channel_from_unitary(&sigma_x()).unwrap();
        let m = Effect::new(CMatrix::basis_projector(2, 0)).unwrap();
        let out = apply_channel(&ch, &m).unwrap();
        assert!(out.matrix().max_abs_diff(&CMatrix::basis_projector(2, 1)) < 1e-15);
    }

    #[test]
    fn dephasing_halves_coherences() {
        // Kraus {sqrt(1-q) I, sqrt(q) sigma_z} at q = 1/2 on the sigma_x
        // eigenprojector: expanding the Kraus sum by hand gives
        // (I + (1-2q) sigma_x)/2, so the off-diagonals vanish at q = 1/2.
        let q: f64 = 0.5;
        let k0 = CMatrix::identity(2).scale(c((1.0 - q).sqrt(), 0.0));
        let k1 = sigma_z().scale(c(q.sqrt(), 0.0));
        let ch = Channel::new(vec![k0, k1]).unwrap();
        let plus = Effect::from_ket(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let out = apply_channel(&ch, &plus).unwrap();
        let expected = CMatrix::identity(2)
            .add(&sigma_x().scale(c(1.0 - 2.0 * q, 0.0)))
            .scale(c(0.5, 0.0));
        assert!(out.matrix().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn unitality_gives_probability_one_for_identity_effect() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let u = random_unitary(2, &mut rng);
        let ch = channel_from_unitary(&u).unwrap();
        let rho = State::basis(2, 1);
        let m = Effect::identity(2);
        for n in 0..=5 {
            let p = sequence_probability(&rho, &ch, n, &m).unwrap();
            assert!((p.value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn state_and_effect_invariants_enforced() {
        // trace != 1
        assert!(State::new(CMatrix::identity(2)).is_err());
        // effect above 1
        assert!(Effect::new(CMatrix::identity(2).scale(c(1.5, 0.0))).is_err());
        // non-Hermitian state
        let m = CMatrix::new(2, vec![c(0.5, 0.0), c(0.3, 0.1), c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(State::new(m).is_err());
    }

    #[test]
    fn channel_normalization_enforced() {
        let half = CMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(Channel::new(vec![half]).is_err());
    }
}
