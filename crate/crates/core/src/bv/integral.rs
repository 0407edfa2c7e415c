use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use super::{transfer, BVAction, BVError, BVSpace};
use crate::exact::{taylor_data, Rational, Scalar};
use crate::gaussian::{local_split, SuperGaussian};
use crate::stationary::{default_seeds, find_critical_points, AsymptoticSeries, CriticalContribution, StationaryError};
use crate::superalgebra::{berezin_integral, Generator, Side, SuperFunction, SuperSpace};
use crate::wick::{FresnelNormalization, FresnelValue};

/// Gauge-fixing Lagrangian. Coordinates on it are the fields (graph of `dψ`) or the kept
/// coordinate of every pair.
#[derive(Clone, PartialEq, Debug)]
pub enum LinearLagrangian {
    /// `z⁺_α = ∂ψ/∂z^α` for an odd `ψ` on the field space.
    GaugeFermion { psi: SuperFunction },
    /// `z^α = 0` for the listed pairs (their antifields stay), `z⁺_α = 0` for the rest.
    Coordinate { antifields: Vec<String> },
}

impl LinearLagrangian {
    pub fn antifields_zero() -> Self {
        LinearLagrangian::Coordinate { antifields: Vec::new() }
    }

    /// `ψ ↦ tψ`; coordinate subspaces are returned unchanged.
    pub fn scaled(&self, t: &Rational) -> Self {
        match self {
            LinearLagrangian::GaugeFermion { psi } => LinearLagrangian::GaugeFermion { psi: psi.scale(&Scalar::real(t.clone())) },
            other => other.clone(),
        }
    }

    /// Super space of coordinates on the Lagrangian.
    pub fn coordinates(&self, bv: &BVSpace) -> Result<Arc<SuperSpace>, BVError> {
        match self {
            LinearLagrangian::GaugeFermion { .. } => Ok(bv.field_space()),
            LinearLagrangian::Coordinate { antifields } => {
                for a in antifields {
                    if bv.pair_index(a).is_none() {
                        return Err(BVError::NotLagrangian(format!("unknown pair {a}")));
                    }
                }
                let (mut even, mut odd) = (Vec::new(), Vec::new());
                for p in bv.pairs() {
                    let (name, parity) = if antifields.contains(&p.name) {
                        (super::antifield_name(&p.name), 1 - p.parity)
                    } else {
                        (p.name.clone(), p.parity)
                    };
                    if parity == 0 {
                        even.push(name);
                    } else {
                        odd.push(name);
                    }
                }
                Ok(SuperSpace::new(even, odd)?)
            }
        }
    }

    /// Half-dimensional and isotropic: for a gauge fermion, `ψ` odd on the field space with
    /// graded-symmetric second derivatives.
    pub fn check(&self, bv: &BVSpace) -> Result<(), BVError> {
        match self {
            LinearLagrangian::Coordinate { .. } => self.coordinates(bv).map(|_| ()),
            LinearLagrangian::GaugeFermion { psi } => {
                let fs = bv.field_space();
                if **psi.space() != *fs {
                    return Err(BVError::NotLagrangian("gauge fermion is not a function of the fields".into()));
                }
                if !psi.split_parity().0.is_zero() {
                    return Err(BVError::NotLagrangian("gauge fermion has an even part".into()));
                }
                let gens: Vec<Generator> = fs.generators().collect();
                for &a in &gens {
                    for &b in &gens {
                        let ab = psi.derivative(b, Side::Left).derivative(a, Side::Left);
                        let ba = psi.derivative(a, Side::Left).derivative(b, Side::Left);
                        let sign = if a.parity() * b.parity() == 1 { ba.neg() } else { ba };
                        if ab != sign {
                            return Err(BVError::NotLagrangian(format!(
                                "ω does not vanish on the pair ({}, {})",
                                fs.name(a),
                                fs.name(b)
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Images of every generator of `bv`'s super space, as functions on `target`, which must
    /// contain the Lagrangian coordinates by name.
    pub(super) fn images(&self, bv: &BVSpace, target: &Arc<SuperSpace>) -> Result<BTreeMap<String, SuperFunction>, BVError> {
        self.check(bv)?;
        let named = |n: &str| SuperFunction::named(target, n);
        let mut out = BTreeMap::new();
        for p in bv.pairs() {
            let anti = super::antifield_name(&p.name);
            match self {
                LinearLagrangian::GaugeFermion { psi } => {
                    let g = psi.space().generator(&p.name)?;
                    out.insert(p.name.clone(), named(&p.name)?);
                    out.insert(anti, transfer(&psi.derivative(g, Side::Left), target));
                }
                LinearLagrangian::Coordinate { antifields } => {
                    let zero = SuperFunction::zero(target);
                    if antifields.contains(&p.name) {
                        out.insert(p.name.clone(), zero);
                        out.insert(anti.clone(), named(&anti)?);
                    } else {
                        out.insert(p.name.clone(), named(&p.name)?);
                        out.insert(anti, zero);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Substitute generators of `f` by the given images (missing names are kept by name).
pub(super) fn substitute_named(f: &SuperFunction, images: &BTreeMap<String, SuperFunction>, target: &Arc<SuperSpace>) -> SuperFunction {
    let pick = |n: &String| {
        images.get(n).cloned().unwrap_or_else(|| SuperFunction::named(target, n).expect("generator kept by name"))
    };
    let even: Vec<SuperFunction> = f.space().even_names().iter().map(pick).collect();
    let odd: Vec<SuperFunction> = f.space().odd_names().iter().map(pick).collect();
    f.substitute(target, &even, &odd)
}

/// `f|_L` as a function of the Lagrangian coordinates.
pub fn restrict_to_lagrangian(bv: &BVSpace, f: &SuperFunction, l: &LinearLagrangian) -> Result<SuperFunction, BVError> {
    bv.owns(f)?;
    let target = l.coordinates(bv)?;
    let images = l.images(bv, &target)?;
    Ok(substitute_named(f, &images, &target))
}

#[derive(Clone, Debug, Default)]
pub struct BVIntegralOptions {
    /// Even Lagrangian coordinates of the critical points; empty means search.
    pub critical_points: Vec<Vec<Rational>>,
    /// Odd Lagrangian coordinates, first listed integrated first; default is the listing order.
    pub berezinian: Option<Vec<String>>,
}

fn odd_order(space: &SuperSpace, berezinian: &Option<Vec<String>>) -> Result<Vec<usize>, BVError> {
    let Some(names) = berezinian else {
        return Ok((0..space.odd_dim()).collect());
    };
    let mut out = Vec::new();
    for n in names {
        match space.generator(n)? {
            Generator::Odd(j) => out.push(j),
            Generator::Even(_) => return Err(BVError::Unsupported(format!("{n} is even on the Lagrangian"))),
        }
    }
    let mut sorted = out.clone();
    sorted.sort_unstable();
    if sorted != (0..space.odd_dim()).collect::<Vec<_>>() {
        return Err(BVError::Unsupported("Berezinian must list every odd coordinate once".into()));
    }
    Ok(out)
}

/// Perturbative `∫_L e^{(i/ħ)S}` with the odd measure normalized by `(2πi)^{-N/2}`: each
/// critical point contributes `e^{(i/ħ)S₀} (2πħ)^{(n−N)/2} e^{iπ sign/4} |det H|^{-1/2} · A₀ · Σ c_j ħ^j`,
/// where `H` is the even Hessian, `A₀` the odd Gaussian integral and the corrections come from
/// Wick moments and finite Berezin integrals.
pub fn bv_integral(
    action: &BVAction,
    l: &LinearLagrangian,
    opts: &BVIntegralOptions,
    order: usize,
) -> Result<AsymptoticSeries, BVError> {
    let bv = action.space();
    let restricted: Vec<SuperFunction> =
        action.terms().iter().map(|t| restrict_to_lagrangian(bv, t, l)).collect::<Result<_, _>>()?;
    let lspace = restricted[0].space().clone();
    let (ne, no) = (lspace.even_dim(), lspace.odd_dim());
    if no > ne {
        return Err(BVError::Unsupported(format!("{no} odd against {ne} even directions")));
    }
    let order_idx = odd_order(&lspace, &opts.berezinian)?;
    let body = restricted[0].component(0);
    let points: Vec<Vec<Rational>> = if opts.critical_points.is_empty() {
        let found = find_critical_points(&body, &default_seeds(ne), 1e-10, 200);
        // seeds that fail to converge are expected; degenerate or irrational points are not
        if let Some(issue) = found.issues.into_iter().find(|e| !matches!(e, StationaryError::NoConvergence { .. })) {
            return Err(BVError::DegenerateRestriction(issue.to_string()));
        }
        found.points.into_iter().map(|p| p.x).collect()
    } else {
        opts.critical_points.clone()
    };
    if points.is_empty() {
        return Err(StationaryError::NoCriticalPoints.into());
    }
    let mut contributions = Vec::new();
    for x0 in points {
        if x0.len() != ne {
            return Err(BVError::Unsupported(format!("critical point of length {} for {ne} even coordinates", x0.len())));
        }
        let td = taylor_data(&body, &x0, 2).map_err(StationaryError::from)?;
        if td.gradient.iter().any(|g| !g.is_zero()) {
            return Err(StationaryError::NotCritical { point: x0.iter().map(ToString::to_string).collect() }.into());
        }
        let split = local_split(&restricted[0], &x0);
        let gauss = SuperGaussian::new(&split.quadratic, &order_idx)?;
        let mut parts = vec![(-1, split.interaction.scale(&Scalar::i()))];
        for (q, r) in restricted.iter().enumerate().skip(1) {
            let s = local_split(r, &x0);
            if !s.value.is_zero() {
                return Err(BVError::Unsupported(format!("ħ^{q} term is nonzero at the critical point")));
            }
            let rest = s.linear.add(&s.quadratic).add(&s.interaction);
            parts.push((q as i32 - 1, rest.scale(&Scalar::i())));
        }
        let corrections = gauss.exp_expectation_parts(&parts, order)?;
        let h = gauss.hessian.analyze().map_err(StationaryError::from)?;
        contributions.push(CriticalContribution {
            point: x0,
            value: split.value,
            fresnel: FresnelValue {
                dim: ne - no,
                signature: h.signature,
                abs_det: h.det.abs(),
                normalization: FresnelNormalization::Hbar,
            },
            constant: Scalar::real(gauss.odd_norm.clone()),
            pi_power: 0,
            corrections,
        });
    }
    Ok(AsymptoticSeries { order, contributions })
}

/// `∫_L f` for a Lagrangian whose coordinates are all odd (a finite Berezin integral).
pub fn lagrangian_berezin_integral(
    bv: &BVSpace,
    f: &SuperFunction,
    l: &LinearLagrangian,
    berezinian: &Option<Vec<String>>,
) -> Result<Scalar, BVError> {
    let r = restrict_to_lagrangian(bv, f, l)?;
    if r.space().even_dim() != 0 {
        return Err(BVError::Unsupported("the Lagrangian has even coordinates".into()));
    }
    let order = odd_order(r.space(), berezinian)?;
    Ok(berezin_integral(&r, &order).component(0).constant_term())
}
