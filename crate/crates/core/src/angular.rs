//! Angular-momentum bases and the antiunitary time-reversal operator.
//!
//! The physical basis is `|μ ℓ m⟩` (multiplicity `μ ≥ 1`, integer `ℓ ≥ 0`,
//! `|m| ≤ ℓ`). Time reversal acts as
//!
//! ```text
//! θ̂ |μ ℓ m⟩ = e^{iθ_{ℓm}} |μ ℓ -m⟩,   θ̂(aψ + bφ) = a* θ̂ψ + b* θ̂φ
//! ```
//!
//! with `θ_{ℓm} = π(ℓ - m)` (Landau–Lifshitz, the default) or `θ_{ℓm} = πm`
//! (Sakurai). Only the Landau–Lifshitz choice commutes with Clebsch–Gordan
//! coupling, so it is the one that makes `θ̂(ψ ⊗ φ) = θ̂ψ ⊗ θ̂φ`.
//!
//! The self-conjugate basis `|e_n⟩ = |μ ℓ m ε⟩` consists of fixed points of
//! `θ̂`; in that basis time reversal is plain complex conjugation of the
//! amplitudes.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{conj, kron_vec, norm_sq, CMatrix, CVector, C64};
use crate::{Error, Result, CHECK_TOL};

/// A physical basis ket `|μ ℓ m⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AngularLabel {
    pub mu: u32,
    pub ell: u32,
    pub m: i32,
}

impl AngularLabel {
    pub fn new(mu: u32, ell: u32, m: i32) -> Result<Self> {
        let label = AngularLabel { mu, ell, m };
        label.validate()?;
        Ok(label)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu == 0 {
            return Err(Error::InvalidLabel(format!("{self}: multiplicity must be >= 1")));
        }
        if self.m.unsigned_abs() > self.ell {
            return Err(Error::InvalidLabel(format!("{self}: |m| > ell")));
        }
        Ok(())
    }

    /// The label `|μ ℓ -m⟩` that time reversal maps this one onto.
    pub fn reflected(self) -> Self {
        AngularLabel { m: -self.m, ..self }
    }

    fn sort_key(&self) -> (u32, i32, u32) {
        (self.ell, self.m, self.mu)
    }
}

impl Ord for AngularLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for AngularLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for AngularLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{}⟩", self.mu, self.ell, self.m)
    }
}

/// Sign label `ε` of a self-conjugate basis vector. `Plus` sorts first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A self-conjugate basis ket `|e_{μ ℓ m ε}⟩`, `0 ≤ m ≤ ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelfConjLabel {
    pub mu: u32,
    pub ell: u32,
    pub m: u32,
    pub eps: Sign,
}

impl SelfConjLabel {
    pub fn new(mu: u32, ell: u32, m: u32, eps: Sign) -> Result<Self> {
        let label = SelfConjLabel { mu, ell, m, eps };
        label.validate()?;
        Ok(label)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu == 0 {
            return Err(Error::InvalidLabel(format!("{self}: multiplicity must be >= 1")));
        }
        if self.m > self.ell {
            return Err(Error::InvalidLabel(format!("{self}: m > ell")));
        }
        if self.m == 0 && self.eps == Sign::Minus {
            return Err(Error::InvalidLabel(format!("{self}: m = 0 requires eps = +")));
        }
        Ok(())
    }

    /// `|μ ℓ 0 +⟩`.
    pub fn scalar(mu: u32, ell: u32) -> Self {
        SelfConjLabel { mu, ell, m: 0, eps: Sign::Plus }
    }

    /// The first `dim` labels of the single-multiplicity ladder
    /// `|1 0 0 +⟩, |1 1 0 +⟩, |1 1 1 +⟩, |1 1 1 -⟩, |1 2 0 +⟩, …`.
    ///
    /// The first two are the standard qubit `|0⟩`, `|1⟩`; the list is in
    /// canonical order.
    pub fn ladder(dim: usize) -> Vec<SelfConjLabel> {
        let mut out = Vec::with_capacity(dim);
        let mut ell = 0u32;
        while out.len() < dim {
            out.push(SelfConjLabel::scalar(1, ell));
            for m in 1..=ell {
                for eps in [Sign::Plus, Sign::Minus] {
                    out.push(SelfConjLabel { mu: 1, ell, m, eps });
                }
            }
            ell += 1;
        }
        out.truncate(dim);
        out
    }

    fn sort_key(&self) -> (u32, u32, Sign, u32) {
        (self.ell, self.m, self.eps, self.mu)
    }
}

impl Ord for SelfConjLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for SelfConjLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SelfConjLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|e {},{},{},{}⟩", self.mu, self.ell, self.m, self.eps)
    }
}

/// Phase convention for `θ_{ℓm}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseConvention {
    /// `θ_{ℓm} = π(ℓ - m)`.
    #[default]
    #[serde(rename = "ll")]
    LandauLifshitz,
    /// `θ_{ℓm} = πm`.
    #[serde(rename = "sakurai")]
    Sakurai,
}

impl PhaseConvention {
    /// Exponent `k` with `θ_{ℓm} = kπ`.
    fn half_turns(self, ell: u32, m: i32) -> i64 {
        match self {
            PhaseConvention::LandauLifshitz => i64::from(ell) - i64::from(m),
            PhaseConvention::Sakurai => i64::from(m),
        }
    }

    /// `e^{iθ_{ℓm}}`, exactly `±1`.
    pub fn sign(self, ell: u32, m: i32) -> f64 {
        if self.half_turns(ell, m).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `e^{iθ_{ℓ0}/2}`, the phase of the `m = 0` self-conjugate vector.
    /// A power of `i`, evaluated exactly.
    pub fn half_phase_m0(self, ell: u32) -> C64 {
        match self.half_turns(ell, 0).rem_euclid(4) {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }
}

/// `θ_{ℓm}` in radians.
pub fn tr_phase(ell: u32, m: i32, conv: PhaseConvention) -> Result<f64> {
    if m.unsigned_abs() > ell {
        return Err(Error::InvalidLabel(format!("ell={ell}, m={m}: |m| > ell")));
    }
    Ok(conv.half_turns(ell, m) as f64 * PI)
}

/// The label set a state's amplitudes are indexed by.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Basis {
    Angular(Vec<AngularLabel>),
    SelfConjugate(Vec<SelfConjLabel>),
    /// Tensor product; amplitudes are in Kronecker order (left index major).
    Product(Box<Basis>, Box<Basis>),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::Angular(l) => l.len(),
            Basis::SelfConjugate(l) => l.len(),
            Basis::Product(a, b) => a.dim() * b.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Basis::Angular(_) => "angular",
            Basis::SelfConjugate(_) => "self-conjugate",
            Basis::Product(..) => "product",
        }
    }

    /// True for self-conjugate bases and products of them. Products of
    /// self-conjugate vectors are fixed points of the composite time reversal
    /// under the Landau–Lifshitz convention.
    pub fn is_self_conjugate(&self) -> bool {
        match self {
            Basis::Angular(_) => false,
            Basis::SelfConjugate(_) => true,
            Basis::Product(a, b) => a.is_self_conjugate() && b.is_self_conjugate(),
        }
    }

    /// Validates labels and sorts them canonically. Returns the sorted basis
    /// and `perm` with `sorted_amp[i] = amp[perm[i]]`.
    fn canonicalize(self) -> Result<(Basis, Vec<usize>)> {
        match self {
            Basis::Angular(labels) => {
                for l in &labels {
                    l.validate()?;
                }
                let (labels, perm) = sort_with_perm(labels)?;
                Ok((Basis::Angular(labels), perm))
            }
            Basis::SelfConjugate(labels) => {
                for l in &labels {
                    l.validate()?;
                }
                let (labels, perm) = sort_with_perm(labels)?;
                Ok((Basis::SelfConjugate(labels), perm))
            }
            Basis::Product(a, b) => {
                let (a, pa) = a.canonicalize()?;
                let (b, pb) = b.canonicalize()?;
                let db = pb.len();
                let perm = pa
                    .iter()
                    .flat_map(|&i| pb.iter().map(move |&j| i * db + j))
                    .collect();
                Ok((Basis::Product(Box::new(a), Box::new(b)), perm))
            }
        }
    }
}

fn sort_with_perm<L: Ord + Copy + fmt::Display>(labels: Vec<L>) -> Result<(Vec<L>, Vec<usize>)> {
    let mut idx: Vec<usize> = (0..labels.len()).collect();
    idx.sort_by(|&i, &j| labels[i].cmp(&labels[j]));
    let sorted: Vec<L> = idx.iter().map(|&i| labels[i]).collect();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidLabel(format!("duplicate label {}", w[0])));
    }
    Ok((sorted, idx))
}

/// A normalized pure state over a canonically ordered basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    basis: Basis,
    amp: CVector,
}

impl PureState {
    /// Builds a state, checking `Σ|ψ_n|² = 1` to [`CHECK_TOL`] and sorting
    /// labels (and amplitudes with them) into canonical order.
    pub fn new(basis: Basis, amp: CVector) -> Result<Self> {
        Self::with_tolerance(basis, amp, CHECK_TOL)
    }

    pub fn with_tolerance(basis: Basis, amp: CVector, tol: f64) -> Result<Self> {
        if basis.dim() != amp.len() {
            return Err(Error::Dimension(format!(
                "{} labels but {} amplitudes",
                basis.dim(),
                amp.len()
            )));
        }
        if basis.dim() == 0 {
            return Err(Error::Dimension("empty basis".into()));
        }
        let n2 = norm_sq(&amp);
        if !n2.is_finite() || (n2 - 1.0).abs() > tol {
            return Err(Error::Normalization { norm_sq: n2, defect: (n2 - 1.0).abs() });
        }
        let (basis, perm) = basis.canonicalize()?;
        let amp = CVector::from_iterator(perm.len(), perm.iter().map(|&i| amp[i]));
        Ok(PureState { basis, amp })
    }

    /// Rescales `amp` to unit norm first.
    pub fn normalized(basis: Basis, amp: CVector) -> Result<Self> {
        let n = norm_sq(&amp).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Normalization { norm_sq: n * n, defect: 1.0 });
        }
        Self::new(basis, amp / C64::from(n))
    }

    pub fn angular(labels: Vec<AngularLabel>, amp: Vec<C64>) -> Result<Self> {
        Self::new(Basis::Angular(labels), CVector::from_vec(amp))
    }

    pub fn self_conjugate(labels: Vec<SelfConjLabel>, amp: Vec<C64>) -> Result<Self> {
        Self::new(Basis::SelfConjugate(labels), CVector::from_vec(amp))
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amp
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn into_parts(self) -> (Basis, CVector) {
        (self.basis, self.amp)
    }

    pub fn angular_labels(&self) -> Option<&[AngularLabel]> {
        match &self.basis {
            Basis::Angular(l) => Some(l),
            _ => None,
        }
    }

    pub fn self_conjugate_labels(&self) -> Option<&[SelfConjLabel]> {
        match &self.basis {
            Basis::SelfConjugate(l) => Some(l),
            _ => None,
        }
    }
}

/// Antiunitary map of the form `ψ ↦ Σ_i sign_i ψ_i* |target_i⟩`.
struct SignedConjugation {
    out: Basis,
    target: Vec<usize>,
    sign: Vec<f64>,
}

impl SignedConjugation {
    fn apply(&self, amp: &CVector) -> CVector {
        let mut out = CVector::zeros(amp.len());
        for (i, z) in amp.iter().enumerate() {
            out[self.target[i]] = z.conj() * self.sign[i];
        }
        out
    }

    fn single(labels: &[AngularLabel], conv: PhaseConvention) -> Self {
        let mut reflected: Vec<AngularLabel> = labels.iter().map(|l| l.reflected()).collect();
        reflected.sort();
        let pos: HashMap<AngularLabel, usize> =
            reflected.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        SignedConjugation {
            target: labels.iter().map(|l| pos[&l.reflected()]).collect(),
            sign: labels.iter().map(|l| conv.sign(l.ell, l.m)).collect(),
            out: Basis::Angular(reflected),
        }
    }

    /// `θ̂ ⊗ θ̂ ⊗ …` applied factor by factor.
    fn factorwise(basis: &Basis, conv: PhaseConvention) -> Self {
        match basis {
            Basis::Angular(labels) => Self::single(labels, conv),
            Basis::SelfConjugate(labels) => SignedConjugation {
                out: basis.clone(),
                target: (0..labels.len()).collect(),
                sign: vec![1.0; labels.len()],
            },
            Basis::Product(a, b) => {
                let fa = Self::factorwise(a, conv);
                let fb = Self::factorwise(b, conv);
                let db = fb.target.len();
                let mut target = Vec::with_capacity(fa.target.len() * db);
                let mut sign = Vec::with_capacity(target.capacity());
                for (ta, sa) in fa.target.iter().zip(&fa.sign) {
                    for (tb, sb) in fb.target.iter().zip(&fb.sign) {
                        target.push(ta * db + tb);
                        sign.push(sa * sb);
                    }
                }
                SignedConjugation {
                    out: Basis::Product(Box::new(fa.out), Box::new(fb.out)),
                    target,
                    sign,
                }
            }
        }
    }
}

/// Applies `θ̂` to a state.
///
/// - Angular basis: `Σ ψ_{μℓm}|μℓm⟩ ↦ Σ ψ*_{μℓm} e^{iθ_{ℓm}} |μℓ-m⟩`. The
///   result lives on the reflected label set.
/// - Self-conjugate basis (or products of them): entrywise conjugation.
/// - Product of two angular factors: the composite operator, defined by
///   coupling each pair of multiplets to total `|L M⟩`, applying `θ̂` there
///   and decoupling. Each factor must consist of complete `m`-multiplets.
pub fn apply_time_reversal(psi: &PureState, conv: PhaseConvention) -> Result<PureState> {
    match &psi.basis {
        Basis::Angular(labels) => {
            let map = SignedConjugation::single(labels, conv);
            let amp = map.apply(&psi.amp);
            Ok(PureState { basis: map.out, amp })
        }
        b if b.is_self_conjugate() => Ok(PureState { basis: b.clone(), amp: conj(&psi.amp) }),
        Basis::Product(a, b) => match (a.as_ref(), b.as_ref()) {
            (Basis::Angular(la), Basis::Angular(lb)) => {
                let amp = coupled_time_reversal(la, lb, &psi.amp, conv)?;
                Ok(PureState { basis: psi.basis.clone(), amp })
            }
            _ => Err(Error::Basis(
                "composite time reversal is defined for angular⊗angular or self-conjugate products"
                    .into(),
            )),
        },
        _ => unreachable!("non-product bases handled above"),
    }
}

/// Applies `θ̂` to each tensor factor independently.
pub fn factorwise_time_reversal(psi: &PureState, conv: PhaseConvention) -> PureState {
    let map = SignedConjugation::factorwise(&psi.basis, conv);
    let amp = map.apply(&psi.amp);
    PureState { basis: map.out, amp }
}

/// Groups labels into `(μ, ℓ)` multiplets, checking each is complete.
fn multiplets(labels: &[AngularLabel]) -> Result<BTreeMap<(u32, u32), Vec<usize>>> {
    let mut groups: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry((l.mu, l.ell)).or_default().push(i);
    }
    for (&(mu, ell), idx) in &groups {
        if idx.len() != 2 * ell as usize + 1 {
            return Err(Error::IncompleteSpace(format!(
                "multiplet mu={mu}, ell={ell} has {} of {} m-values",
                idx.len(),
                2 * ell + 1
            )));
        }
    }
    Ok(groups)
}

fn coupled_time_reversal(
    la: &[AngularLabel],
    lb: &[AngularLabel],
    amp: &CVector,
    conv: PhaseConvention,
) -> Result<CVector> {
    let ga = multiplets(la)?;
    let gb = multiplets(lb)?;
    let db = lb.len();
    let mut out = CVector::zeros(amp.len());
    for ((_, l1), ia) in &ga {
        for ((_, l2), ib) in &gb {
            let (l1, l2) = (*l1, *l2);
            // Within a complete canonical multiplet, index k holds m = k - ℓ.
            let at = |m1: i32, m2: i32| ia[(m1 + l1 as i32) as usize] * db + ib[(m2 + l2 as i32) as usize];
            for big_l in l1.abs_diff(l2)..=l1 + l2 {
                let bl = big_l as i32;
                let mut coupled = vec![C64::new(0.0, 0.0); (2 * bl + 1) as usize];
                for big_m in -bl..=bl {
                    let mut c = C64::new(0.0, 0.0);
                    for m1 in -(l1 as i32)..=l1 as i32 {
                        let m2 = big_m - m1;
                        if m2.unsigned_abs() > l2 {
                            continue;
                        }
                        c += amp[at(m1, m2)] * clebsch_gordan(l1, m1, l2, m2, big_l, big_m);
                    }
                    // θ̂: C(L, M) ↦ C(L, M)* e^{iθ_{LM}} on |L, -M⟩.
                    coupled[(bl - big_m) as usize] = c.conj() * conv.sign(big_l, big_m);
                }
                for m1 in -(l1 as i32)..=l1 as i32 {
                    for m2 in -(l2 as i32)..=l2 as i32 {
                        let big_m = m1 + m2;
                        if big_m.abs() > bl {
                            continue;
                        }
                        out[at(m1, m2)] += coupled[(big_m + bl) as usize]
                            * clebsch_gordan(l1, m1, l2, m2, big_l, big_m);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Tensor product `ψ_A ⊗ ψ_B`.
pub fn tensor(a: &PureState, b: &PureState) -> PureState {
    PureState {
        basis: Basis::Product(Box::new(a.basis.clone()), Box::new(b.basis.clone())),
        amp: kron_vec(&a.amp, &b.amp),
    }
}

/// Change of basis from angular to self-conjugate labels.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfConjugateTransform {
    /// Canonically ordered angular labels (rows).
    pub angular: Vec<AngularLabel>,
    /// Canonically ordered self-conjugate labels (columns).
    pub self_conjugate: Vec<SelfConjLabel>,
    /// Unitary whose columns are the `|e_n⟩` over the angular labels.
    pub matrix: CMatrix,
    pub convention: PhaseConvention,
}

impl SelfConjugateTransform {
    /// Angular amplitudes → self-conjugate amplitudes (`U† ψ`).
    pub fn to_self_conjugate(&self, amp: &CVector) -> CVector {
        self.matrix.adjoint() * amp
    }

    /// Self-conjugate amplitudes → angular amplitudes (`U ψ`).
    pub fn to_angular(&self, amp: &CVector) -> CVector {
        &self.matrix * amp
    }
}

/// Builds the self-conjugate basis of the span of `labels`:
///
/// ```text
/// |e_{μℓ0+}⟩ = e^{iθ_{ℓ0}/2} |μℓ0⟩
/// |e_{μℓm+}⟩ = (|μℓm⟩ + e^{iθ_{ℓm}} |μℓ-m⟩)/√2        0 < m ≤ ℓ
/// |e_{μℓm-}⟩ = i(-|μℓm⟩ + e^{iθ_{ℓm}} |μℓ-m⟩)/√2
/// ```
pub fn self_conjugate_transform(
    labels: &[AngularLabel],
    conv: PhaseConvention,
) -> Result<SelfConjugateTransform> {
    for l in labels {
        l.validate()?;
    }
    let (angular, _) = sort_with_perm(labels.to_vec())?;
    let pos: HashMap<AngularLabel, usize> =
        angular.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    if let Some(missing) = angular.iter().find(|l| !pos.contains_key(&l.reflected())) {
        return Err(Error::IncompleteSpace(format!(
            "{} present but {} missing",
            missing,
            missing.reflected()
        )));
    }
    let mut sc: Vec<SelfConjLabel> = Vec::with_capacity(angular.len());
    for l in &angular {
        match l.m {
            0 => sc.push(SelfConjLabel::scalar(l.mu, l.ell)),
            m if m > 0 => {
                for eps in [Sign::Plus, Sign::Minus] {
                    sc.push(SelfConjLabel { mu: l.mu, ell: l.ell, m: m as u32, eps });
                }
            }
            _ => {}
        }
    }
    sc.sort();

    let d = angular.len();
    let mut u = CMatrix::zeros(d, d);
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let ih = C64::new(0.0, FRAC_1_SQRT_2);
    for (col, e) in sc.iter().enumerate() {
        let plus = pos[&AngularLabel { mu: e.mu, ell: e.ell, m: e.m as i32 }];
        if e.m == 0 {
            u[(plus, col)] = conv.half_phase_m0(e.ell);
            continue;
        }
        let minus = pos[&AngularLabel { mu: e.mu, ell: e.ell, m: -(e.m as i32) }];
        let s = conv.sign(e.ell, e.m as i32);
        match e.eps {
            Sign::Plus => {
                u[(plus, col)] = h;
                u[(minus, col)] = h * s;
            }
            Sign::Minus => {
                u[(plus, col)] = -ih;
                u[(minus, col)] = ih * s;
            }
        }
    }
    Ok(SelfConjugateTransform { angular, self_conjugate: sc, matrix: u, convention: conv })
}

/// Re-expresses an angular-basis state in the self-conjugate basis.
pub fn to_self_conjugate(psi: &PureState, conv: PhaseConvention) -> Result<PureState> {
    match &psi.basis {
        Basis::SelfConjugate(_) => Ok(psi.clone()),
        Basis::Angular(labels) => {
            let t = self_conjugate_transform(labels, conv)?;
            let amp = t.to_self_conjugate(&psi.amp);
            Ok(PureState { basis: Basis::SelfConjugate(t.self_conjugate), amp })
        }
        b if b.is_self_conjugate() => Ok(psi.clone()),
        b => Err(Error::Basis(format!("cannot convert a {} basis state", b.kind()))),
    }
}

/// Angular labels spanned by a set of self-conjugate labels. Every `m > 0`
/// label must come with both signs.
pub fn angular_labels_of(sc: &[SelfConjLabel]) -> Result<Vec<AngularLabel>> {
    let mut out = Vec::with_capacity(sc.len());
    for e in sc {
        e.validate()?;
        match (e.m, e.eps) {
            (0, _) => out.push(AngularLabel { mu: e.mu, ell: e.ell, m: 0 }),
            (m, Sign::Plus) => {
                let partner = SelfConjLabel { eps: Sign::Minus, ..*e };
                if !sc.contains(&partner) {
                    return Err(Error::IncompleteSpace(format!("{e} present but {partner} missing")));
                }
                out.push(AngularLabel { mu: e.mu, ell: e.ell, m: m as i32 });
                out.push(AngularLabel { mu: e.mu, ell: e.ell, m: -(m as i32) });
            }
            (_, Sign::Minus) => {
                let partner = SelfConjLabel { eps: Sign::Plus, ..*e };
                if !sc.contains(&partner) {
                    return Err(Error::IncompleteSpace(format!("{e} present but {partner} missing")));
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Re-expresses a self-conjugate-basis state in the angular basis.
pub fn to_angular(psi: &PureState, conv: PhaseConvention) -> Result<PureState> {
    match &psi.basis {
        Basis::Angular(_) => Ok(psi.clone()),
        Basis::SelfConjugate(sc) => {
            let t = self_conjugate_transform(&angular_labels_of(sc)?, conv)?;
            let amp = t.to_angular(&psi.amp);
            Ok(PureState { basis: Basis::Angular(t.angular), amp })
        }
        b => Err(Error::Basis(format!("cannot convert a {} basis state", b.kind()))),
    }
}

fn factorial(n: i64) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Real Clebsch–Gordan coefficient `(ℓ₁ m₁; ℓ₂ m₂ | L M)` in the
/// Condon–Shortley convention, from Racah's closed-form sum. Returns 0 for
/// any selection-rule violation.
pub fn clebsch_gordan(l1: u32, m1: i32, l2: u32, m2: i32, big_l: u32, big_m: i32) -> f64 {
    let (j1, j2, j) = (i64::from(l1), i64::from(l2), i64::from(big_l));
    let (m1, m2, m) = (i64::from(m1), i64::from(m2), i64::from(big_m));
    if m != m1 + m2 || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    if j < (j1 - j2).abs() || j > j1 + j2 {
        return 0.0;
    }
    let f = factorial;
    let pre = ((2 * j + 1) as f64 * f(j + j1 - j2) * f(j - j1 + j2) * f(j1 + j2 - j)
        / f(j1 + j2 + j + 1))
        .sqrt()
        * (f(j + m) * f(j - m) * f(j1 - m1) * f(j1 + m1) * f(j2 - m2) * f(j2 + m2)).sqrt();
    let k_min = 0.max(j2 - j - m1).max(j1 - j + m2);
    let k_max = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = f(k) * f(j1 + j2 - j - k) * f(j1 - m1 - k) * f(j2 + m2 - k) * f(j - j2 + m1 + k)
            * f(j - j1 - m2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / den;
    }
    pre * sum
}

/// The standard qubit states `|0⟩ = |1 0 0 +⟩` and `|1⟩ = |1 1 0 +⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StandardQubit {
    Zero,
    One,
}

/// Hands out fresh multiplicity indices per `ℓ`, in order of request.
#[derive(Clone, Debug, Default)]
pub struct MultiplicityAllocator {
    next: BTreeMap<u32, u32>,
}

impl MultiplicityAllocator {
    pub fn fresh(&mut self, ell: u32) -> u32 {
        let slot = self.next.entry(ell).or_insert(1);
        let mu = *slot;
        *slot += 1;
        mu
    }
}

/// Couples `Σ ψ_{μℓ} |μℓ0+⟩` with the qubit `c₀|0⟩ + c₁|1⟩`:
///
/// ```text
/// |μℓ0+⟩⊗|0⟩ = |μ'ℓ0+⟩
/// |μℓ0+⟩⊗|1⟩ = √(ℓ/(2ℓ+1)) |μ',ℓ-1,0+⟩ + √((ℓ+1)/(2ℓ+1)) |μ'',ℓ+1,0+⟩
/// ```
///
/// Every output term receives a fresh multiplicity from `alloc`. Inputs are
/// processed in the given order, the `|0⟩` term before the `|1⟩` terms; a
/// qubit component that is exactly zero contributes no terms.
pub fn couple_scalar_terms(
    terms: &[(SelfConjLabel, C64)],
    qubit: [C64; 2],
    alloc: &mut MultiplicityAllocator,
) -> Result<Vec<(SelfConjLabel, C64)>> {
    let mut out = Vec::with_capacity(terms.len() * 3);
    for (label, a) in terms {
        label.validate()?;
        if label.m != 0 {
            return Err(Error::Basis(format!("{label}: coupling needs m = 0, eps = + labels")));
        }
        let ell = label.ell;
        if qubit[0] != C64::new(0.0, 0.0) {
            out.push((SelfConjLabel::scalar(alloc.fresh(ell), ell), a * qubit[0]));
        }
        if qubit[1] != C64::new(0.0, 0.0) {
            let l = f64::from(ell);
            if ell > 0 {
                let w = (l / (2.0 * l + 1.0)).sqrt();
                out.push((SelfConjLabel::scalar(alloc.fresh(ell - 1), ell - 1), a * qubit[1] * w));
            }
            let w = ((l + 1.0) / (2.0 * l + 1.0)).sqrt();
            out.push((SelfConjLabel::scalar(alloc.fresh(ell + 1), ell + 1), a * qubit[1] * w));
        }
    }
    Ok(out)
}

/// Couples a state on `|μℓ0+⟩` labels with the qubit `c₀|0⟩ + c₁|1⟩`.
pub fn couple_with_qubit_state(psi: &PureState, qubit: [C64; 2]) -> Result<PureState> {
    let labels = psi
        .self_conjugate_labels()
        .ok_or_else(|| Error::Basis(format!("expected self-conjugate basis, got {}", psi.basis.kind())))?;
    let terms: Vec<_> = labels.iter().copied().zip(psi.amp.iter().copied()).collect();
    let mut alloc = MultiplicityAllocator::default();
    let out = couple_scalar_terms(&terms, qubit, &mut alloc)?;
    let (labels, amp): (Vec<_>, Vec<_>) = out.into_iter().unzip();
    PureState::self_conjugate(labels, amp)
}

/// Couples a state on `|μℓ0+⟩` labels with a standard qubit basis state.
pub fn couple_standard_qubit(psi: &PureState, qubit: StandardQubit) -> Result<PureState> {
    let q = match qubit {
        StandardQubit::Zero => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        StandardQubit::One => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    };
    couple_with_qubit_state(psi, q)
}
