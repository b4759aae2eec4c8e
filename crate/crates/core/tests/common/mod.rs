//! Test-only oracles, written against plain complex arrays so they share no
//! code path with the library's matrix type or δR factorisation.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M = [[C; 2]; 2];
pub type V = [C; 2];

pub fn mul(a: &M, b: &M) -> M {
    let mut out = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn apply(a: &M, v: &V) -> V {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

pub fn adjoint(a: &M) -> M {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub fn inner(a: &V, b: &V) -> C {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

pub fn norm_sqr(v: &V) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

pub fn psi0() -> V {
    let h = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [h, h]
}

/// Projector-plus-damping form of M(n, r) built directly from the axis
/// eigenbasis at θ = π/2: |n⟩ = (1, e^{iφ})/√2, |n⊥⟩ = (1, −e^{iφ})/√2.
///
/// M(n, +) = |n⟩⟨n| + √(1−η)|n⊥⟩⟨n⊥|,  M(n, −) = √η |n⊥⟩⟨n⊥|.
pub fn kraus_equator(eta: f64, phi: f64, plus: bool) -> M {
    let e = C::from_polar(1.0, phi);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let n = [C::new(s, 0.0), e * s];
    let m = [C::new(s, 0.0), -e * s];
    let outer = |a: &V| -> M {
        [
            [a[0] * a[0].conj(), a[0] * a[1].conj()],
            [a[1] * a[0].conj(), a[1] * a[1].conj()],
        ]
    };
    let pn = outer(&n);
    let pm = outer(&m);
    let (wn, wm) = if plus {
        (1.0, (1.0 - eta).sqrt())
    } else {
        (0.0, eta.sqrt())
    };
    let mut out = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = pn[i][j] * wn + pm[i][j] * wm;
        }
    }
    out
}

/// ⟨ψ₀| M₊(n_{N−1}) ⋯ M₊(n_1) |ψ₀⟩ with φ_k = k·2α/N.
pub fn brute_amplitude(n_steps: usize, c: f64, alpha: f64) -> C {
    let eta = 4.0 * c / n_steps as f64;
    let eps = 2.0 * alpha / n_steps as f64;
    let mut v = psi0();
    for k in 1..n_steps {
        v = apply(&kraus_equator(eta, k as f64 * eps, true), &v);
    }
    inner(&psi0(), &v)
}

/// Born probabilities of all 2^N records: weak readouts at steps 1..N−1
/// and a projective closing readout at φ_N.
pub fn brute_record_probabilities(n_steps: usize, c: f64, alpha: f64) -> Vec<f64> {
    let eta = 4.0 * c / n_steps as f64;
    let eps = 2.0 * alpha / n_steps as f64;
    (0..1u64 << n_steps)
        .map(|bits| {
            let mut v = psi0();
            for k in 1..=n_steps {
                let plus = bits >> (k - 1) & 1 == 0;
                let e = if k < n_steps { eta } else { 1.0 };
                v = apply(&kraus_equator(e, k as f64 * eps, plus), &v);
            }
            norm_sqr(&v)
        })
        .collect()
}

/// Inclusive grid `lo, lo+step, …, hi`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Root of the closed-form bracket by plain bisection.
pub fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (f(lo) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
