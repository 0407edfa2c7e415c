use num_traits::Zero;

use crate::exact::{Rational, Scalar};
use crate::superalgebra::{Generator, Side, SuperFunction};

use super::FPModel;

/// Images of the generators under `Q`, even generators first:
/// `Qx^i = c^a v_a^i`, `Qλ_a = 0`, `Qc^c = ½ f_{ab}^c c^a c^b`, `Qc̄_a = λ_a`.
pub fn brst_images(fp: &FPModel) -> (Vec<SuperFunction>, Vec<SuperFunction>) {
    let (n, k) = (fp.n(), fp.k());
    let space = fp.space();
    let mut even = Vec::with_capacity(n + k);
    for i in 0..n {
        let mut q = SuperFunction::zero(space);
        for a in 0..k {
            q = q.add(&fp.ghost(a).mul(&fp.lift(&fp.gauge.vector_fields[a][i])));
        }
        even.push(q);
    }
    even.extend((0..k).map(|_| SuperFunction::zero(space)));
    let mut odd = Vec::with_capacity(2 * k);
    for c in 0..k {
        let mut q = SuperFunction::zero(space);
        for a in 0..k {
            for b in 0..k {
                let f = fp.gauge.lie.get(a, b, c);
                if f.is_zero() {
                    continue;
                }
                let coeff = Scalar::real(f / Rational::from_integer(2.into()));
                q = q.add(&fp.ghost(a).mul(&fp.ghost(b)).scale(&coeff));
            }
        }
        odd.push(q);
    }
    odd.extend((0..k).map(|a| fp.lambda(a)));
    (even, odd)
}

/// BRST operator as an odd derivation acting from the right: `Q f = Σ_z ∂_r f/∂z · Q(z)`,
/// so `Q(fg) = f Q(g) + (−1)^{|g|} Q(f) g`.
pub fn brst_apply(fp: &FPModel, f: &SuperFunction) -> SuperFunction {
    assert!(f.same_space(fp.action()), "function lives on another space");
    let (even, odd) = brst_images(fp);
    let mut out = SuperFunction::zero(fp.space());
    for g in fp.space().generators() {
        let image = match g {
            Generator::Even(i) => &even[i],
            Generator::Odd(j) => &odd[j],
        };
        if image.is_zero() {
            continue;
        }
        let d = f.derivative(g, Side::Right);
        if !d.is_zero() {
            out = out.add(&d.mul(image));
        }
    }
    out
}

/// `ψ = ⟨c̄, φ(x)⟩`.
pub fn gauge_fermion(fp: &FPModel) -> SuperFunction {
    (0..fp.k()).fold(SuperFunction::zero(fp.space()), |acc, a| acc.add(&fp.antighost(a).mul(&fp.lift(&fp.gauge.phi[a]))))
}

/// Outcome of comparing `S + Qψ` with `S_FP`.
#[derive(Clone, Debug)]
pub struct GaugeFermionReport {
    pub holds: bool,
    /// `S + Qψ − S_FP`
    pub difference: SuperFunction,
}

pub fn gauge_fermion_report(fp: &FPModel) -> GaugeFermionReport {
    let lhs = fp.lift(&fp.gauge.base.action).add(&brst_apply(fp, &gauge_fermion(fp)));
    let difference = lhs.sub(fp.action());
    GaugeFermionReport { holds: difference.is_zero(), difference }
}

/// Whether `S + Qψ = S_FP` holds exactly.
pub fn gauge_fermion_check(fp: &FPModel) -> bool {
    gauge_fermion_report(fp).holds
}
