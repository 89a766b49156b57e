//! Fast–fast–slow triads: enumeration, case classification, explicit
//! near-resonance bounds and the empirical no-resonance constant.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interactions::{ffs_sum, is_exact_resonance, RESONANCE_RTOL};
use crate::lattice::{Branch, Domain, Lattice, WaveVector};

/// Default split between near and far resonances.
pub const THETA0: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Case {
    /// `j′, k′, l′` all nonzero
    A,
    /// `j′, k′` nonzero, `l′ = 0`
    B,
    /// exactly one of `j′, k′` is zero
    C,
    /// `j′ = k′ = 0`
    APrime,
    /// exact cone resonance with `j′k′ ≠ 0`
    BPrime,
    /// `j₃k₃ = 0` or `l = 0`
    Degenerate,
}

impl Case {
    pub const ALL: [Case; 6] = [Case::A, Case::B, Case::C, Case::APrime, Case::BPrime, Case::Degenerate];

    pub fn label(self) -> &'static str {
        match self {
            Case::A => "a",
            Case::B => "b",
            Case::C => "c",
            Case::APrime => "a'",
            Case::BPrime => "b'",
            Case::Degenerate => "degenerate",
        }
    }
}

/// Classifies the triad `(j,r) + (k,s) → l = j + k`.
pub fn classify(domain: &Domain, j: WaveVector, r: Branch, k: WaveVector, s: Branch) -> Case {
    let l = j.add(k);
    if j.0[2] == 0 || k.0[2] == 0 || l.is_zero() {
        return Case::Degenerate;
    }
    let (hj, hk) = (!j.horizontal_is_zero(), !k.horizontal_is_zero());
    match (hj, hk) {
        (false, false) => Case::APrime,
        (true, true) if is_exact_resonance(domain, j, r, k, s) => Case::BPrime,
        (true, true) if l.horizontal_is_zero() => Case::B,
        (true, true) => Case::A,
        _ => Case::C,
    }
}

/// One fast–fast–slow interaction with its diagnostics. `coeff_sum` carries
/// the box volume, matching the explicit bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct TriadRecord {
    pub j: WaveVector,
    pub r: Branch,
    pub k: WaveVector,
    pub s: Branch,
    pub l: WaveVector,
    pub omega_j: f64,
    pub omega_k: f64,
    pub omega_sum: f64,
    pub abs_coeff_sum: f64,
    pub case: Case,
    pub bound: f64,
    /// `|coeff_sum| / (|M| |ω_sum| weight)`; `None` at exact resonance.
    pub ratio: Option<f64>,
    /// physical `|j|, |k|, |l|, j₃, k₃`
    pub norms: [f64; 3],
    pub verticals: [f64; 2],
    pub volume: f64,
}

impl TriadRecord {
    /// `|j||k|/|l| + |j₃| + |k₃|`
    pub fn weight(&self) -> f64 {
        self.norms[0] * self.norms[1] / self.norms[2] + self.verticals[0].abs() + self.verticals[1].abs()
    }

    /// `θ` with `2Ω = ω_j − ω_k`, `2θΩ = ω_j + ω_k`; infinite when `Ω = 0`.
    pub fn theta(&self) -> f64 {
        let d = self.omega_j - self.omega_k;
        if d == 0.0 {
            f64::INFINITY
        } else {
            self.omega_sum / d
        }
    }

    pub fn is_resonant(&self) -> bool {
        matches!(self.case, Case::BPrime) || (self.case == Case::APrime && self.omega_sum == 0.0)
    }
}

fn check_theta0(theta0: f64) -> Result<()> {
    if !(theta0 > 0.0 && theta0 < 1.0) {
        return Err(Error::Config(format!("theta0 must lie in (0, 1), got {theta0}")));
    }
    Ok(())
}

/// Applicable explicit majorant of `|B^{rs0}_{jkl} + B^{sr0}_{kjl}|`.
pub fn casewise_bound(rec: &TriadRecord, theta0: f64) -> Result<f64> {
    check_theta0(theta0)?;
    let m = rec.volume;
    let w = rec.omega_sum.abs();
    let [nj, nk, nl] = rec.norms;
    let [j3, k3] = rec.verticals.map(f64::abs);
    Ok(match rec.case {
        Case::A | Case::BPrime => {
            if rec.theta().abs() <= theta0 {
                0.5 * m * (4.0 + 6.0 / (1.0 - theta0 * theta0)) * nj * nk / nl * w
            } else {
                2.0 * 5f64.sqrt() * m / theta0 * (j3 + k3) * w
            }
        }
        Case::B => 0.5 * m * (j3 + k3) * w,
        Case::C => {
            // vertical wavenumber of the purely vertical member
            let v = if rec.j.horizontal_is_zero() { j3 } else { k3 };
            m * v / SQRT_2 * w
        }
        Case::APrime | Case::Degenerate => 0.0,
    })
}

/// Lazily yields every ordered fast–fast–slow triad on a lattice.
pub struct TriadIter {
    lattice: Arc<Lattice>,
    fast: Vec<usize>,
    theta0: f64,
    a: usize,
    b: usize,
    combo: usize,
}

impl Iterator for TriadIter {
    type Item = TriadRecord;

    fn next(&mut self) -> Option<TriadRecord> {
        let lat = self.lattice.clone();
        let n = self.fast.len();
        while self.a < n {
            let j = lat.wave(self.fast[self.a]);
            let k = lat.wave(self.fast[self.b]);
            let l = j.n.add(k.n);
            let li = if l.is_zero() { None } else { lat.wave_index(l) };
            if let (Some(li), true) = (li, self.combo < 4) {
                let r = Branch::FAST[self.combo / 2];
                let s = Branch::FAST[self.combo % 2];
                self.combo += 1;
                return Some(record(&lat, self.fast[self.a], r, self.fast[self.b], s, li, self.theta0));
            }
            self.combo = 0;
            self.b += 1;
            if self.b == n {
                self.b = 0;
                self.a += 1;
            }
        }
        None
    }
}

fn record(lat: &Lattice, wj: usize, r: Branch, wk: usize, s: Branch, wl: usize, theta0: f64) -> TriadRecord {
    let domain = lat.domain();
    let (j, k, l) = (lat.wave(wj), lat.wave(wk), lat.wave(wl));
    let omega_j = j.eigen.omega[r.index()];
    let omega_k = k.eigen.omega[s.index()];
    let case = classify(domain, j.n, r, k.n, s);
    let volume = domain.volume();
    let abs_coeff_sum = volume * ffs_sum(j, r, k, s, l).norm();
    let omega_sum = if case == Case::BPrime { 0.0 } else { omega_j + omega_k };
    let mut rec = TriadRecord {
        j: j.n,
        r,
        k: k.n,
        s,
        l: l.n,
        omega_j,
        omega_k,
        omega_sum,
        abs_coeff_sum,
        case,
        bound: 0.0,
        ratio: None,
        norms: [j.norm, k.norm, l.norm],
        verticals: [j.k[2], k.k[2]],
        volume,
    };
    rec.bound = casewise_bound(&rec, theta0).expect("theta0 validated by the caller");
    if omega_sum != 0.0 {
        rec.ratio = Some(abs_coeff_sum / (volume * omega_sum.abs() * rec.weight()));
    }
    rec
}

/// All ordered triads `(j,r),(k,s)` with `|j|,|k|,|j+k| ≤ kmax`, `j₃k₃ ≠ 0`,
/// `j + k ≠ 0`; `j` and `k` in lexicographic order, then `(r,s)` in
/// `(−,−),(−,+),(+,−),(+,+)`.
pub fn enumerate_triads(domain: Domain, kmax: f64, theta0: f64) -> Result<TriadIter> {
    check_theta0(theta0)?;
    let lattice = Lattice::new(domain, kmax.max(f64::MIN_POSITIVE))?;
    let fast: Vec<usize> = (0..lattice.n_waves()).filter(|&w| lattice.wave(w).has_fast()).collect();
    Ok(TriadIter { lattice, fast, theta0, a: 0, b: 0, combo: 0 })
}

/// Summary of a full triad scan.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub kmax: f64,
    pub theta0: f64,
    pub triads: usize,
    /// Empirical `c_nr`: the supremum of the ratio over non-resonant triads.
    pub max_ratio: f64,
    pub argmax: Option<TriadRecord>,
    /// Largest `|coeff_sum| / (|M| max(1, |j||k|))` at exact resonance.
    pub resonant_residual: f64,
    pub resonant_count: usize,
    /// Exact resonances whose normalised residual exceeds [`RESONANT_TOL`].
    pub resonant_violations: usize,
    /// Triads whose `|coeff_sum|` exceeds the case bound.
    pub violations: usize,
    pub worst_violation: Option<TriadRecord>,
    pub per_case: BTreeMap<Case, usize>,
    /// `None` when cone resonances are decided exactly (cubic boxes).
    pub cone_tolerance: Option<f64>,
}

/// Allowed `|coeff_sum| / (|M| max(1, |j||k|))` at exact resonance.
pub const RESONANT_TOL: f64 = 1e-12;

/// Relative slack allowed when comparing a coefficient sum with its bound.
const DOMINATION_SLACK: f64 = 1e-12;

pub fn audit(domain: Domain, kmax: f64, theta0: f64) -> Result<AuditReport> {
    audit_with(domain, kmax, theta0, |_| {})
}

/// [`audit`], handing every record to `visit` on the way.
pub fn audit_with(domain: Domain, kmax: f64, theta0: f64, mut visit: impl FnMut(&TriadRecord)) -> Result<AuditReport> {
    let mut rep = AuditReport {
        kmax,
        theta0,
        triads: 0,
        max_ratio: 0.0,
        argmax: None,
        resonant_residual: 0.0,
        resonant_count: 0,
        resonant_violations: 0,
        violations: 0,
        worst_violation: None,
        per_case: Case::ALL.iter().map(|&c| (c, 0)).collect(),
        cone_tolerance: (!domain.is_cubic()).then_some(RESONANCE_RTOL),
    };
    let mut worst_excess = 0.0;
    for rec in enumerate_triads(domain, kmax, theta0)? {
        visit(&rec);
        absorb(&mut rep, &mut worst_excess, rec);
    }
    Ok(rep)
}

fn absorb(rep: &mut AuditReport, worst_excess: &mut f64, rec: TriadRecord) {
    rep.triads += 1;
    *rep.per_case.get_mut(&rec.case).expect("all cases seeded") += 1;
    if rec.is_resonant() {
        rep.resonant_count += 1;
        let scale = rec.volume * (rec.norms[0] * rec.norms[1]).max(1.0);
        let residual = rec.abs_coeff_sum / scale;
        rep.resonant_residual = rep.resonant_residual.max(residual);
        if !(residual <= RESONANT_TOL) {
            rep.resonant_violations += 1;
        }
        return;
    }
    let excess = rec.abs_coeff_sum - rec.bound * (1.0 + DOMINATION_SLACK);
    if excess > 0.0 {
        rep.violations += 1;
        if excess > *worst_excess {
            *worst_excess = excess;
            rep.worst_violation = Some(rec.clone());
        }
    }
    if let Some(ratio) = rec.ratio {
        if ratio > rep.max_ratio {
            rep.max_ratio = ratio;
            rep.argmax = Some(rec);
        }
    }
}

/// CSV header for triad records.
pub const CSV_HEADER: &str = "j,r,k,s,l,case,omega_sum,abs_coeff_sum,bound,ratio";

pub fn write_record(out: &mut impl Write, rec: &TriadRecord) -> std::io::Result<()> {
    let wv = |n: WaveVector| format!("{} {} {}", n.0[0], n.0[1], n.0[2]);
    writeln!(
        out,
        "{},{},{},{},{},{},{:.16e},{:.16e},{:.16e},{}",
        wv(rec.j),
        rec.r.label(),
        wv(rec.k),
        rec.s.label(),
        wv(rec.l),
        rec.case.label(),
        rec.omega_sum,
        rec.abs_coeff_sum,
        rec.bound,
        rec.ratio.map_or_else(|| "nan".to_string(), |r| format!("{r:.16e}"))
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wv(a: i32, b: i32, c: i32) -> WaveVector {
        WaveVector::new(a, b, c)
    }

    const P: Branch = Branch::Plus;
    const M: Branch = Branch::Minus;

    #[test]
    fn classification_examples() {
        let d = Domain::cube();
        assert_eq!(classify(&d, wv(0, 0, 1), P, wv(0, 0, 2), P), Case::APrime);
        assert_eq!(classify(&d, wv(1, 0, 1), P, wv(0, 1, 1), M), Case::BPrime);
        assert_eq!(classify(&d, wv(1, 0, 1), P, wv(0, 1, 1), P), Case::A);
        assert_eq!(classify(&d, wv(0, 0, 1), P, wv(1, 0, 1), P), Case::C);
        assert_eq!(classify(&d, wv(1, 0, 1), P, wv(-1, 0, 1), P), Case::B);
        assert_eq!(classify(&d, wv(1, 0, 0), P, wv(-1, 0, 1), P), Case::Degenerate);
        assert_eq!(classify(&d, wv(1, 0, 1), P, wv(-1, 0, -1), P), Case::Degenerate);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let d = Domain::cube();
        assert_eq!(enumerate_triads(d, 0.5, THETA0).unwrap().count(), 0);
        let recs: Vec<_> = enumerate_triads(d, 2.0, THETA0).unwrap().collect();
        let mut brute = 0;
        let r = 2i32;
        let inside = |n: [i32; 3]| {
            let q = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
            q > 0 && q <= 4
        };
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    for e in -r..=r {
                        for f in -r..=r {
                            for g in -r..=r {
                                let (j, k) = ([a, b, c], [e, f, g]);
                                let l = [a + e, b + f, c + g];
                                if c != 0 && g != 0 && inside(j) && inside(k) && inside(l) {
                                    brute += 4;
                                }
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(recs.len(), brute);
        assert!(recs.iter().all(|t| t.j.add(t.k) == t.l));
    }

    #[test]
    fn bound_examples() {
        let d = Domain::cube();
        let m = d.volume();
        let recs: Vec<_> = enumerate_triads(d, 2.5, THETA0).unwrap().collect();
        let find = |j, r, k, s| recs.iter().find(|t| t.j == j && t.r == r && t.k == k && t.s == s).unwrap();

        let a = find(wv(0, 0, 1), P, wv(0, 0, 1), P);
        assert_eq!(a.case, Case::APrime);
        assert_eq!(a.bound, 0.0);
        assert_eq!(a.abs_coeff_sum, 0.0);

        let b = find(wv(1, 0, 1), P, wv(-1, 0, 1), P);
        assert_eq!(b.case, Case::B);
        assert!((b.bound - 0.5 * m * 2.0 * b.omega_sum.abs()).abs() < 1e-12);

        let res = find(wv(1, 0, 1), P, wv(0, 1, 1), M);
        assert!(res.abs_coeff_sum <= 1e-12 * m * res.norms[0] * res.norms[1]);

        let mut bad = res.clone();
        bad.case = Case::A;
        assert!(casewise_bound(&bad, 1.0).is_err());
        assert!(casewise_bound(&bad, 0.0).is_err());
    }

    #[test]
    fn swapped_records_agree() {
        let d = Domain::cube();
        let recs: Vec<_> = enumerate_triads(d, 2.5, THETA0).unwrap().collect();
        let mut map = std::collections::HashMap::new();
        for t in &recs {
            map.insert((t.j, t.r, t.k, t.s), (t.abs_coeff_sum, t.omega_sum));
        }
        for t in &recs {
            let (c, w) = map[&(t.k, t.s, t.j, t.r)];
            assert!((c - t.abs_coeff_sum).abs() <= 1e-12 * c.max(1.0));
            assert!((w - t.omega_sum).abs() <= 1e-14);
        }
    }

    #[test]
    fn audit_small() {
        let rep = audit(Domain::cube(), 4.0, THETA0).unwrap();
        assert_eq!(rep.violations, 0, "{:?}", rep.worst_violation);
        assert!(rep.resonant_residual <= 1e-12);
        assert!(rep.resonant_count > 0);
        assert!(rep.max_ratio > 0.0 && rep.max_ratio.is_finite());
        assert!(rep.cone_tolerance.is_none());
        let sum: usize = rep.per_case.values().sum();
        assert_eq!(sum, rep.triads);
    }
}
