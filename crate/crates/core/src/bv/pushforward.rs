//! Fiber integration `e^{(i/ħ)S_eff(y)} = ∫_{L′} e^{(i/ħ)S(y, y′)}` as a formal series.
//!
//! Every fiber vertex `ħ^q · (y-monomial of degree e) · (fiber monomial of degree d)` gets the
//! grade `2(q−1) + d + 2e`, which is at least one once the fiber Gaussian and the pure-`y`
//! part are split off. Grades add under products and survive the fiber expectation as
//! `2p + 2e` for `ħ^p y^e`, so truncating at a grade keeps every term of the logarithm with
//! `ħ`-power and `y`-degree below the matching bound exact.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{master_residuals, truncate_degree, BVAction, BVError, BVSpace, LinearLagrangian};
use crate::exact::{PolyFunction, Scalar};
use crate::gaussian::SuperGaussian;
use crate::superalgebra::{SuperFunction, SuperSpace};

/// Laurent polynomial in ħ with super-function coefficients.
type Laurent = BTreeMap<i32, SuperFunction>;

/// Result of a BV pushforward, exact for `ħ^{≤order}` and total `Y`-degree `≤ y_degree`.
#[derive(Clone, Debug)]
pub struct Pushforward {
    pub action: BVAction,
    pub order: usize,
    pub y_degree: u32,
}

impl Pushforward {
    /// QME coefficients through `ħ^order`, kept up to `Y`-degree `y_degree − 2`, where they
    /// only involve exact terms of `S_eff`.
    pub fn qme_residual(&self) -> Vec<SuperFunction> {
        let max = self.y_degree.saturating_sub(2);
        master_residuals(&self.action).qme.iter().take(self.order + 1).map(|r| truncate_degree(r, max)).collect()
    }

    pub fn qme_holds(&self) -> bool {
        self.qme_residual().iter().all(SuperFunction::is_zero)
    }
}

struct Layout {
    space: Arc<SuperSpace>,
    y_even: usize,
    y_odd: usize,
}

impl Layout {
    /// `(fiber degree, y-degree)` of a monomial of the combined space.
    fn degrees(&self, mask: u64, e: &[u32]) -> (u32, u32) {
        let y_mask = mask & ((1u64 << self.y_odd) - 1);
        let ye: u32 = e[..self.y_even].iter().sum();
        let fe: u32 = e[self.y_even..].iter().sum();
        (fe + (mask >> self.y_odd).count_ones(), ye + y_mask.count_ones())
    }
}

fn prune(layout: &Layout, f: &SuperFunction, power: i32, max_grade: i32) -> SuperFunction {
    let mut out = SuperFunction::zero(f.space());
    for (mask, p) in f.components() {
        let kept = PolyFunction::from_terms(
            p.dim(),
            p.terms()
                .filter(|(e, _)| {
                    let (d, y) = layout.degrees(mask, e);
                    2 * power + d as i32 + 2 * y as i32 <= max_grade
                })
                .map(|(e, c)| (e.clone(), c.clone())),
        );
        out.add_component(mask, kept);
    }
    out
}

fn laurent_mul(a: &Laurent, b: &Laurent, keep: impl Fn(&SuperFunction, i32) -> SuperFunction) -> Laurent {
    let mut out: Laurent = BTreeMap::new();
    for (pa, fa) in a {
        for (pb, fb) in b {
            let prod = keep(&fa.mul(fb), pa + pb);
            if prod.is_zero() {
                continue;
            }
            let slot = out.entry(pa + pb).or_insert_with(|| SuperFunction::zero(prod.space()));
            *slot = slot.add(&prod);
        }
    }
    out.retain(|_, f| !f.is_zero());
    out
}

fn laurent_add(a: &mut Laurent, b: &Laurent, scale: &Scalar) {
    for (p, f) in b {
        let slot = a.entry(*p).or_insert_with(|| SuperFunction::zero(f.space()));
        *slot = slot.add(&f.scale(scale));
    }
    a.retain(|_, f| !f.is_zero());
}

/// Integrate out the pairs named in `fiber` (each given by both its field and antifield name)
/// over the Lagrangian `lagrangian` of the fiber BV space. The fiber Gaussian sits at `y = 0`.
/// `S_eff` is normalized so that the fiber Gaussian integral contributes no constant; the fiber
/// integral is taken from the right, leaving `Y` factors on the left.
pub fn bv_pushforward(
    action: &BVAction,
    fiber: &[&str],
    lagrangian: &LinearLagrangian,
    order: usize,
    y_degree: u32,
) -> Result<Pushforward, BVError> {
    let bv = action.space();
    let mut in_fiber = vec![false; bv.len()];
    let mut seen = vec![(false, false); bv.len()];
    for name in fiber {
        let (alpha, anti) = match name.strip_suffix('+') {
            Some(f) => (bv.pair_index(f), true),
            None => (bv.pair_index(name), false),
        };
        let alpha = alpha.ok_or_else(|| BVError::BadSpace(format!("unknown coordinate {name}")))?;
        in_fiber[alpha] = true;
        if anti {
            seen[alpha].1 = true;
        } else {
            seen[alpha].0 = true;
        }
    }
    for (alpha, &(f, a)) in seen.iter().enumerate() {
        if f != a {
            return Err(BVError::SplitNotSymplectic(format!(
                "{} and its antifield fall on different sides",
                bv.pairs()[alpha].name
            )));
        }
    }
    let pick = |want: bool| bv.pairs().iter().zip(&in_fiber).filter(move |(_, &f)| f == want).map(|(p, _)| p.clone());
    let y_bv = BVSpace::new(pick(false).collect())?;
    let f_bv = BVSpace::new(pick(true).collect())?;
    let lspace = lagrangian.coordinates(&f_bv)?;
    let ys = y_bv.super_space();
    let combined = SuperSpace::new(
        ys.even_names().iter().chain(lspace.even_names()).cloned().collect::<Vec<_>>(),
        ys.odd_names().iter().chain(lspace.odd_names()).cloned().collect::<Vec<_>>(),
    )?;
    if combined.odd_dim() > 63 {
        return Err(BVError::Unsupported("too many odd generators for the fiber split".into()));
    }
    let layout = Layout { space: combined.clone(), y_even: ys.even_dim(), y_odd: ys.odd_dim() };
    let images = lagrangian.images(&f_bv, &combined)?;

    // sort every monomial of S into the Y part, the fiber Gaussian and the vertices
    let mut s_y: Vec<SuperFunction> = vec![SuperFunction::zero(ys); order + 1];
    let mut gaussian = SuperFunction::zero(&lspace);
    let mut vertices: Laurent = BTreeMap::new();
    for (q, term) in action.terms().iter().enumerate() {
        let on_combined = super::integral::substitute_named(term, &images, &combined);
        for (mask, p) in on_combined.components() {
            for (e, c) in p.terms() {
                let (d, y) = layout.degrees(mask, e);
                if d == 0 {
                    if q <= order {
                        let (ym, ye) = (mask & ((1u64 << layout.y_odd) - 1), e[..layout.y_even].to_vec());
                        s_y[q].add_component(ym, PolyFunction::monomial(ye, c.clone()));
                    }
                } else if q == 0 && y == 0 && d == 2 {
                    gaussian.add_component(mask >> layout.y_odd, PolyFunction::monomial(e[layout.y_even..].to_vec(), c.clone()));
                } else if q == 0 && y == 0 && d == 1 {
                    return Err(BVError::DegenerateRestriction("fiber action has a linear term at y = 0".into()));
                } else {
                    let slot = vertices.entry(q as i32 - 1).or_insert_with(|| SuperFunction::zero(&combined));
                    slot.add_component(mask, PolyFunction::monomial(e.clone(), c * &Scalar::i()));
                }
            }
        }
    }
    let gauss = SuperGaussian::new(&gaussian, &(0..lspace.odd_dim()).collect::<Vec<_>>())?;
    let max_grade = 2 * order as i32 - 2 + 2 * y_degree as i32;

    // ⟨exp(X)⟩ over the fiber, X = (i/ħ) Σ ħ^q V_q
    let mut expectation: Laurent = BTreeMap::from([(0, SuperFunction::one(ys))]);
    if max_grade >= 1 && !vertices.is_empty() {
        let mut power: Laurent = BTreeMap::from([(0, SuperFunction::one(&combined))]);
        for j in 1..=max_grade {
            power = laurent_mul(&power, &vertices, |f, p| prune(&layout, f, p, max_grade));
            if power.is_empty() {
                break;
            }
            let inv = Scalar::from_ratio(1, j as i64);
            power.values_mut().for_each(|f| *f = f.scale(&inv));
            let fiber_avg = partial_expectation(&layout, &gauss, &lspace, ys, &power);
            laurent_add(&mut expectation, &fiber_avg, &Scalar::from_int(1));
        }
    }
    let y_grade = |f: &SuperFunction, p: i32| -> SuperFunction {
        // on Y, the grade of ħ^p y^e is 2p + 2e
        let cap = (max_grade - 2 * p).div_euclid(2);
        if cap < 0 {
            SuperFunction::zero(f.space())
        } else {
            truncate_degree(f, cap as u32)
        }
    };
    expectation = expectation.into_iter().map(|(p, f)| (p, y_grade(&f, p))).filter(|(_, f)| !f.is_zero()).collect();

    // log E = Σ_k (−1)^{k+1} R^k / k with R = E − 1
    let mut rest = expectation.clone();
    laurent_add(&mut rest, &BTreeMap::from([(0, SuperFunction::one(ys))]), &Scalar::from_int(-1));
    let mut log: Laurent = BTreeMap::new();
    let mut r_pow = rest.clone();
    for k in 1..=max_grade.max(0) {
        if r_pow.is_empty() {
            break;
        }
        let sign = if k % 2 == 1 { 1 } else { -1 };
        laurent_add(&mut log, &r_pow, &Scalar::from_ratio(sign, k as i64));
        r_pow = laurent_mul(&r_pow, &rest, y_grade);
    }

    // S_eff = S|_Y + (ħ/i) log E
    let minus_i = -Scalar::i();
    for (p, f) in log {
        let f = truncate_degree(&f, y_degree);
        if f.is_zero() {
            continue;
        }
        let power = p + 1;
        assert!(power >= 0, "effective action has a negative power of ħ");
        if power as usize <= order {
            s_y[power as usize] = s_y[power as usize].add(&f.scale(&minus_i));
        }
    }
    let terms: Vec<SuperFunction> = s_y.iter().map(|f| truncate_degree(f, y_degree)).collect();
    Ok(Pushforward { action: BVAction::with_terms(y_bv, terms)?, order, y_degree })
}

/// Fiber expectation of a Laurent series on the combined space, monomial by monomial.
fn partial_expectation(layout: &Layout, gauss: &SuperGaussian, lspace: &Arc<SuperSpace>, ys: &Arc<SuperSpace>, f: &Laurent) -> Laurent {
    let mut cache: BTreeMap<(u64, Vec<u32>), crate::exact::HbarSeries> = BTreeMap::new();
    let mut out: Laurent = BTreeMap::new();
    let y_bits = (1u64 << layout.y_odd) - 1;
    debug_assert_eq!(layout.space.even_dim(), layout.y_even + lspace.even_dim());
    for (p, g) in f {
        for (mask, poly) in g.components() {
            let (ym, fm) = (mask & y_bits, mask >> layout.y_odd);
            for (e, c) in poly.terms() {
                let fe = e[layout.y_even..].to_vec();
                let moment = cache
                    .entry((fm, fe.clone()))
                    .or_insert_with(|| {
                        let mono = SuperFunction::odd_monomial(lspace, &bits(fm)).mul_poly(&PolyFunction::monomial(fe, Scalar::from_int(1)));
                        gauss.expectation(&mono)
                    })
                    .clone();
                for (r, m) in moment.terms() {
                    let coeff = c * m;
                    let slot = out.entry(p + r).or_insert_with(|| SuperFunction::zero(ys));
                    slot.add_component(ym, PolyFunction::monomial(e[..layout.y_even].to_vec(), coeff));
                }
            }
        }
    }
    out.retain(|_, f| !f.is_zero());
    out
}

fn bits(mask: u64) -> Vec<usize> {
    (0..64).filter(|j| mask & (1u64 << j) != 0).collect()
}
