use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{fp_operator, point_strings, FPModel, GaugeError};
use crate::exact::{
    factorial, rational_serde, rational_vec_serde, taylor_data, HbarSeries, QuadraticForm, RMatrix, Rational, Scalar,
};
use crate::gaussian::{local_split, SuperGaussian};
use crate::graph::{enumerate_graphs, EnumerateOptions, Graph, HalfEdgeType, TypeSystem};
use crate::stationary::{
    default_seeds, feynman_weight_with, find_critical_points, normalized_weight, AsymptoticSeries, CriticalContribution,
    FeynmanRules, StationaryError, VertexEntries, WeightMode,
};
use crate::superalgebra::SuperFunction;
use crate::wick::{FresnelNormalization, FresnelValue};

/// How `det FP` enters the prefactor when the slice meets an orbit more than once.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetMode {
    /// `|det FP|` at every intersection, divided by `N`.
    #[default]
    Abs,
    /// Signed `det FP`, divided by `N`; meant for slices restricted to a fundamental domain.
    Signed,
}

/// Critical point `(x₀, λ = 0, c = 0, c̄ = 0)` of `S_FP` with its block data.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct FPCriticalPoint {
    #[serde(with = "rational_vec_serde")]
    pub x: Vec<Rational>,
    pub value: Scalar,
    /// Hessian of `S + ⟨λ, φ⟩` in `(x, λ)`.
    pub hessian: RMatrix,
    pub fp: RMatrix,
    #[serde(with = "rational_serde")]
    pub det_fp: Rational,
    /// Hessian of `S` on a basis of `ker dφ(x₀)`.
    pub slice_hessian: RMatrix,
    /// `x`–`x` block of the inverse Hessian.
    pub k_block: RMatrix,
    /// `x`–`λ` block of the inverse Hessian, `v ∘ FP⁻¹`.
    pub gamma: RMatrix,
    pub fp_inverse: RMatrix,
}

#[derive(Clone, Debug)]
pub struct FPCriticalSearch {
    pub points: Vec<FPCriticalPoint>,
    /// Candidates rejected with a diagnostic (degenerate FP or slice, unresolved points).
    pub excluded: Vec<GaugeError>,
}

/// Basis of the right kernel of `m`, one column per vector.
pub fn nullspace(m: &RMatrix) -> RMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else { continue };
        for j in 0..cols {
            let t = a[(r, j)].clone();
            a[(r, j)] = a[(p, j)].clone();
            a[(p, j)] = t;
        }
        let inv = a[(r, c)].recip();
        for j in 0..cols {
            a[(r, j)] = &a[(r, j)] * &inv;
        }
        for i in 0..rows {
            if i != r && !a[(i, c)].is_zero() {
                let f = a[(i, c)].clone();
                for j in 0..cols {
                    let v = &a[(r, j)] * &f;
                    a[(i, j)] = &a[(i, j)] - &v;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut out = RMatrix::zeros(cols, free.len());
    for (k, &f) in free.iter().enumerate() {
        out[(f, k)] = Rational::from_integer(1.into());
        for (row, &pc) in pivots.iter().enumerate() {
            out[(pc, k)] = -a[(row, f)].clone();
        }
    }
    out
}

fn block(m: &RMatrix, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> RMatrix {
    m.submatrix(&rows.collect::<Vec<_>>(), &cols.collect::<Vec<_>>())
}

fn point_data(fp: &FPModel, x: &[Rational], hessian: RMatrix, value: Scalar) -> Result<FPCriticalPoint, GaugeError> {
    let (n, k) = (fp.n(), fp.k());
    let fpm = fp_operator(&fp.gauge, x);
    let det_fp = fpm.det();
    let fp_inverse = fpm.inverse().ok_or(GaugeError::DegenerateFP { point: point_strings(x) })?;
    let inv = hessian.inverse().ok_or(GaugeError::DegenerateSlice { point: point_strings(x) })?;
    let a = block(&hessian, 0..n, 0..n);
    let l = nullspace(&block(&hessian, n..n + k, 0..n));
    let slice_hessian = l.transpose().mul(&a).mul(&l);
    Ok(FPCriticalPoint {
        x: x.to_vec(),
        value,
        k_block: block(&inv, 0..n, 0..n),
        gamma: block(&inv, 0..n, n..n + k),
        hessian,
        fp: fpm,
        det_fp,
        slice_hessian,
        fp_inverse,
    })
}

/// Critical points of `S_FP`: declared points of the base model after an exact check, or a
/// Newton search on `S + ⟨λ, φ⟩`. Candidates with singular `FP` or singular Hessian are
/// reported in `excluded`.
pub fn fp_critical_points(fp: &FPModel) -> Result<FPCriticalSearch, GaugeError> {
    let (n, k) = (fp.n(), fp.k());
    let even = fp.action().component(0);
    let mut excluded = Vec::new();
    let mut candidates = Vec::new();
    if fp.gauge.base.critical_points.is_empty() {
        let found = find_critical_points(&even, &default_seeds(n + k), 1e-10, 200);
        excluded.extend(found.issues.into_iter().map(GaugeError::from));
        candidates.extend(found.points.into_iter().map(|p| p.x));
    } else {
        for x in &fp.gauge.base.critical_points {
            let full: Vec<Rational> = x.iter().cloned().chain((0..k).map(|_| Rational::zero())).collect();
            let td = taylor_data(&even, &full, 2)?;
            if td.gradient.iter().any(|g| !g.is_zero()) {
                return Err(StationaryError::NotCritical { point: point_strings(x) }.into());
            }
            candidates.push(full);
        }
    }
    let mut points = Vec::new();
    for full in candidates {
        let x = &full[..n];
        if fp_operator(&fp.gauge, x).det().is_zero() {
            excluded.push(GaugeError::DegenerateFP { point: point_strings(x) });
            continue;
        }
        if full[n..].iter().any(|l| !l.is_zero()) {
            excluded.push(GaugeError::InvalidModel(format!("critical point {:?} has λ ≠ 0", point_strings(&full))));
            continue;
        }
        let td = taylor_data(&even, &full, 2)?;
        match point_data(fp, x, td.hessian.matrix().clone(), td.value) {
            Ok(p) => points.push(p),
            Err(e) => excluded.push(e),
        }
    }
    Ok(FPCriticalSearch { points, excluded })
}

/// Feynman rules of `S_FP` at a critical point: even half-edges `x`, `λ` with propagator
/// `−H⁻¹`, ghost edges `c^b to c̄_a` with weight `−(FP⁻¹)^b_a`, vertices from the interaction part.
#[derive(Clone, Debug)]
pub struct FPRules {
    n: usize,
    k: usize,
    vertices: BTreeMap<Vec<HalfEdgeType>, VertexEntries<Scalar>>,
    even_prop: RMatrix,
    ghost_prop: RMatrix,
}

impl FPRules {
    /// `interaction` lives on the FP space, shifted to the critical point; odd dependence must
    /// be through `c̄_a c^b` bilinears.
    pub fn new(interaction: &SuperFunction, n: usize, k: usize, hessian: &RMatrix, fp: &RMatrix) -> Result<Self, GaugeError> {
        let even_prop = hessian.inverse().ok_or(GaugeError::DegenerateSlice { point: vec![] })?.neg();
        let ghost_prop = fp.inverse().ok_or(GaugeError::DegenerateFP { point: vec![] })?.neg();
        let mut vertices: BTreeMap<Vec<HalfEdgeType>, VertexEntries<Scalar>> = BTreeMap::new();
        for (mask, p) in interaction.components() {
            // c^b c̄_a in canonical order is −c̄_a c^b
            let (ghost_key, sign) = match mask.count_ones() {
                0 => (None, Scalar::from_int(1)),
                2 => {
                    let b = mask.trailing_zeros() as usize;
                    let a = 63 - mask.leading_zeros() as usize;
                    if b >= k || a < k || a >= 2 * k {
                        return Err(GaugeError::InvalidModel("odd interaction is not a c̄·c bilinear".into()));
                    }
                    (Some([b, a - k]), Scalar::from_int(-1))
                }
                _ => return Err(GaugeError::InvalidModel("odd interaction is not a c̄·c bilinear".into())),
            };
            for (e, c) in p.terms() {
                let mut sig = Vec::new();
                let mut key = Vec::new();
                let mut weight = c * &sign;
                for (var, &m) in e.iter().enumerate() {
                    let (t, idx) = if var < n { (HalfEdgeType::Field, var) } else { (HalfEdgeType::Lagrange, var - n) };
                    for _ in 0..m {
                        sig.push(t);
                        key.push(idx);
                    }
                    weight = weight.scale(&factorial(m));
                }
                if let Some([b, a]) = ghost_key {
                    sig.extend([HalfEdgeType::Ghost, HalfEdgeType::Antighost]);
                    key.extend([b, a]);
                }
                vertices.entry(sig).or_default().push((key, weight));
            }
        }
        Ok(FPRules { n, k, vertices, even_prop, ghost_prop })
    }

    pub fn signatures(&self) -> Vec<Vec<HalfEdgeType>> {
        self.vertices.keys().cloned().collect()
    }

    fn offset(&self, t: HalfEdgeType) -> usize {
        if t == HalfEdgeType::Lagrange {
            self.n
        } else {
            0
        }
    }
}

impl FeynmanRules<Scalar> for FPRules {
    fn one(&self) -> Scalar {
        Scalar::from_int(1)
    }

    fn vertex(&self, signature: &[HalfEdgeType]) -> Option<&VertexEntries<Scalar>> {
        self.vertices.get(signature)
    }

    fn propagator(&self, a: HalfEdgeType, i: usize, b: HalfEdgeType, j: usize) -> Scalar {
        use HalfEdgeType::*;
        let v = match (a, b) {
            (Ghost, Antighost) => self.ghost_prop[(i, j)].clone(),
            (Antighost, Ghost) => self.ghost_prop[(j, i)].clone(),
            (Field | Lagrange, Field | Lagrange) => self.even_prop[(self.offset(a) + i, self.offset(b) + j)].clone(),
            _ => Rational::zero(),
        };
        Scalar::real(v)
    }

    fn range(&self, t: HalfEdgeType) -> usize {
        match t {
            HalfEdgeType::Field => self.n,
            _ => self.k,
        }
    }

    fn leaf(&self, _: usize, _: HalfEdgeType, _: usize) -> Option<Scalar> {
        None
    }
}

/// Number of closed ghost cycles (components of the ghost-edge subgraph).
pub fn ghost_cycles(g: &Graph) -> usize {
    let nv = g.vertices().len();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn root(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let mut touched = vec![false; nv];
    for &(a, b) in g.edges() {
        if g.type_of(a) == HalfEdgeType::Ghost || g.type_of(a) == HalfEdgeType::Antighost {
            let (va, vb) = (g.vertex_of(a), g.vertex_of(b));
            touched[va] = true;
            touched[vb] = true;
            let (ra, rb) = (root(&mut parent, va), root(&mut parent, vb));
            parent[ra] = rb;
        }
    }
    let mut roots: Vec<usize> = (0..nv).filter(|&v| touched[v]).map(|v| root(&mut parent, v)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Graph sum over typed graphs with a sign `(−1)` per ghost cycle, and the same series as the
/// exponential of its connected part.
fn correction_series(rules: &FPRules, order: usize) -> Result<(HbarSeries, HbarSeries), GaugeError> {
    let sigs = rules.signatures();
    if sigs.is_empty() || order == 0 {
        return Ok((HbarSeries::one(), HbarSeries::one()));
    }
    let opts = EnumerateOptions::new(order as i64, &[]).typed(TypeSystem { vertex_signatures: sigs });
    let mut all = HbarSeries::one();
    let mut connected = HbarSeries::zero();
    for c in enumerate_graphs(&opts)? {
        let mut w = feynman_weight_with(&c.representative, rules)?;
        if w.is_zero() {
            continue;
        }
        if ghost_cycles(&c.representative) % 2 == 1 {
            w = -w;
        }
        let (p, coeff) = normalized_weight(&c, WeightMode::PartitionFunction, &w)?;
        let term = HbarSeries::monomial(p, coeff);
        all = all.add(&term);
        if c.representative.is_connected() {
            connected = connected.add(&term);
        }
    }
    Ok((all, connected.exp_trunc(order as i32)))
}

fn full_point(fp: &FPModel, x: &[Rational]) -> Vec<Rational> {
    x.iter().cloned().chain((0..fp.k()).map(|_| Rational::zero())).collect()
}

/// Typed-graph rules at a critical point.
pub fn fp_rules_at(fp: &FPModel, point: &FPCriticalPoint) -> Result<FPRules, GaugeError> {
    let split = local_split(fp.action(), &full_point(fp, &point.x));
    if !split.linear.is_zero() {
        return Err(StationaryError::NotCritical { point: point_strings(&point.x) }.into());
    }
    FPRules::new(&split.interaction, fp.n(), fp.k(), &point.hessian, &point.fp)
}

/// Contribution of one critical point:
/// `vol(G)/N · (2πħ)^{(n−k)/2} e^{iπ sign/4}/|det Q|^{1/2} · det FP · Σ_Γ`.
/// `|det Q|` and `sign Q` are read off the full `(x, λ)` Hessian, which equals the slice
/// Hessian in a chart where `d^n x δ(φ)` is the coordinate measure.
pub fn fp_expand_at(fp: &FPModel, point: &FPCriticalPoint, order: usize, mode: DetMode) -> Result<CriticalContribution, GaugeError> {
    let rules = fp_rules_at(fp, point)?;
    let (all, via_exp) = correction_series(&rules, order)?;
    if let Some(p) = (0..=order as i32).find(|&p| all.coeff(p) != via_exp.coeff(p)) {
        return Err(GaugeError::RouteMismatch { power: p });
    }
    let h = QuadraticForm::new(point.hessian.clone())?.analyze()?;
    let fresnel = FresnelValue {
        dim: fp.n() - fp.k(),
        signature: h.signature,
        abs_det: h.det.abs(),
        normalization: FresnelNormalization::Hbar,
    };
    let det = match mode {
        DetMode::Abs => point.det_fp.abs(),
        DetMode::Signed => point.det_fp.clone(),
    };
    let vol = &fp.gauge.vol_g;
    let scale = &vol.coeff * det / Rational::from_integer(fp.gauge.intersections.into());
    Ok(CriticalContribution {
        point: point.x.clone(),
        value: point.value.clone(),
        fresnel,
        constant: fp.gauge.base.density.scale(&scale),
        pi_power: vol.pi_power,
        corrections: all,
    })
}

/// Expansion over all critical points; any excluded candidate is an error.
pub fn fp_expand(fp: &FPModel, order: usize, mode: DetMode) -> Result<AsymptoticSeries, GaugeError> {
    let search = fp_critical_points(fp)?;
    if let Some(e) = search.excluded.into_iter().next() {
        return Err(e);
    }
    if search.points.is_empty() {
        return Err(StationaryError::NoCriticalPoints.into());
    }
    let contributions =
        search.points.iter().map(|p| fp_expand_at(fp, p, order, mode)).collect::<Result<Vec<_>, _>>()?;
    Ok(AsymptoticSeries { order, contributions })
}

/// Correction series at a critical point computed without graphs: Wick moments for `(x, λ)`
/// and Berezin integrals for the ghosts.
pub fn fp_direct_corrections(fp: &FPModel, point: &FPCriticalPoint, order: usize) -> Result<HbarSeries, GaugeError> {
    let split = local_split(fp.action(), &full_point(fp, &point.x));
    let g = SuperGaussian::new(&split.quadratic, &fp.ghost_berezinian())?;
    Ok(g.exp_expectation(&split.interaction, order)?)
}
