//! Triangle-freeness with a certificate/message trade-off `alpha`.
//!
//! Ids are laid out on a `B × alpha` grid (`B = ceil(N/alpha)`); a node's
//! neighborhood becomes `alpha` indicator polynomials over `GF(q)` on the
//! points `1..=B`. The certificate `Φ_u` claims the sum over neighbors and
//! tags of products of indicator polynomials, which vanishes on `1..=B`
//! exactly when `u` has no two adjacent neighbors. One random evaluation
//! point checks the claim.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use crate::algebra::{select_prime, AlgebraError, FieldPoly, PrimeField};
use crate::bits::{BitReader, Bits};
use crate::engine::{
    EngineError, LocalVerifier, NodeView, Phase, ProtocolSpec, Prover, ProverInput, RandomDomain, RandomnessMode,
};
use crate::netconfig::NetworkConfig;

pub const DEFAULT_SOUNDNESS_CONSTANT: u64 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriangleVariant {
    /// One shared evaluation point, one round.
    Shared,
    /// Per-node points sent in a first round, evaluations in a second.
    Dist2Round,
    /// Per-edge certificates; each node sends its point and evaluations
    /// in a single round.
    Dist1Round,
}

impl fmt::Display for TriangleVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriangleVariant::Shared => "shared",
            TriangleVariant::Dist2Round => "dist2round",
            TriangleVariant::Dist1Round => "dist1round",
        })
    }
}

impl FromStr for TriangleVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "shared" => Ok(TriangleVariant::Shared),
            "dist2round" => Ok(TriangleVariant::Dist2Round),
            "dist1round" => Ok(TriangleVariant::Dist1Round),
            _ => Err(format!("unknown variant {s:?} (expected shared, dist2round or dist1round)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TriangleInstance {
    pub config: NetworkConfig,
    pub alpha: u64,
    pub field: PrimeField,
    /// Size of the id universe.
    pub universe: u64,
    /// Grid rows `B`.
    pub rows: u64,
    /// Added to ids so that the universe starts at 1.
    offset: u64,
    /// `[node][t]` indicator polynomials of the neighborhood.
    psi: Vec<Vec<FieldPoly>>,
}

impl TriangleInstance {
    /// Ids must be pairwise distinct within distance 2, which holds for any
    /// valid configuration. The universe is `1..=max(n, max_id)`; if some id
    /// is 0, every id is shifted up by one first.
    pub fn new(config: NetworkConfig, alpha: u64, c: u64) -> Result<Self, AlgebraError> {
        let offset = u64::from(config.ids().contains(&0));
        let universe = (config.n() as u64).max(config.max_id() + offset);
        if alpha == 0 || alpha > universe {
            return Err(AlgebraError::BadParameters(format!("alpha must lie in 1..={universe}, got {alpha}")));
        }
        let field = select_prime(universe, alpha, c)?;
        let rows = universe.div_ceil(alpha);
        let mut inst = TriangleInstance { config, alpha, field, universe, rows, offset, psi: Vec::new() };
        inst.psi = (0..inst.config.n())
            .map(|u| {
                let nb: Vec<u64> = inst.config.neighbors(u).iter().map(|&v| inst.config.id(v)).collect();
                inst.indicator_polys(&nb)
            })
            .collect::<Result<_, _>>()?;
        Ok(inst)
    }

    pub fn with_defaults(config: NetworkConfig, alpha: u64) -> Result<Self, AlgebraError> {
        Self::new(config, alpha, DEFAULT_SOUNDNESS_CONSTANT)
    }

    /// Grid position `(i, t)` of an id, both 1-based.
    pub fn coordinates(&self, id: u64) -> (u64, u64) {
        let z = id + self.offset;
        (z.div_ceil(self.alpha), (z - 1) % self.alpha + 1)
    }

    /// `alpha` polynomials of degree below `B`; polynomial `t` is 1 at `i`
    /// when `(i, t+1)` is one of `ids` and 0 elsewhere on `1..=B`.
    pub fn indicator_polys(&self, ids: &[u64]) -> Result<Vec<FieldPoly>, AlgebraError> {
        let mut table = vec![vec![0u64; self.rows as usize]; self.alpha as usize];
        for &id in ids {
            let (i, t) = self.coordinates(id);
            table[t as usize - 1][i as usize - 1] = 1;
        }
        table
            .iter()
            .map(|col| {
                let pts: Vec<(u64, u64)> = col.iter().enumerate().map(|(i, &y)| (i as u64 + 1, y)).collect();
                FieldPoly::interpolate(self.field, &pts)
            })
            .collect()
    }

    pub fn neighbor_polys(&self, u: usize) -> &[FieldPoly] {
        &self.psi[u]
    }

    /// `Σ_t Ψ_{S_u,t}·Ψ_{S_v,t}`: vanishes on `1..=B` iff `u` and `v` have no
    /// common neighbor.
    pub fn pair_poly(&self, u: usize, v: usize) -> FieldPoly {
        let mut acc = FieldPoly::zero(self.field);
        for (a, b) in self.psi[u].iter().zip(&self.psi[v]) {
            acc = acc.add(&a.mul(b).expect("same field")).expect("same field");
        }
        acc
    }

    /// `Ψ_u`, the honest certificate of the shared and two-round variants.
    pub fn honest_cert(&self, u: usize) -> FieldPoly {
        let mut acc = FieldPoly::zero(self.field);
        for t in 0..self.alpha as usize {
            let mut sum = FieldPoly::zero(self.field);
            for &v in self.config.neighbors(u) {
                sum = sum.add(&self.psi[v][t]).expect("same field");
            }
            acc = acc.add(&self.psi[u][t].mul(&sum).expect("same field")).expect("same field");
        }
        acc
    }

    /// `2B - 1` coefficients.
    pub fn cert_coeffs(&self) -> usize {
        2 * self.rows as usize - 1
    }

    /// Bits of one certificate polynomial.
    pub fn poly_bits(&self) -> usize {
        self.cert_coeffs() * self.field.element_bits()
    }

    /// Per-node Schwartz–Zippel bound `2(B - 1)/q`.
    pub fn soundness_bound(&self) -> f64 {
        2.0 * (self.rows - 1) as f64 / self.field.modulus() as f64
    }

    pub fn message_bits(&self, variant: TriangleVariant) -> usize {
        let w = self.field.element_bits();
        match variant {
            TriangleVariant::Shared | TriangleVariant::Dist2Round => self.alpha as usize * w,
            TriangleVariant::Dist1Round => (self.alpha as usize + 1) * w,
        }
    }

    /// Certificate bits at node `u`.
    pub fn cert_bits(&self, variant: TriangleVariant, u: usize) -> usize {
        match variant {
            TriangleVariant::Dist1Round => self.config.degree(u) * self.poly_bits(),
            _ => self.poly_bits(),
        }
    }

    /// Whether `Φ` vanishes on `1..=B`.
    pub fn vanishes_on_rows(&self, phi: &FieldPoly) -> bool {
        (1..=self.rows).all(|i| phi.evaluate(i) == 0)
    }

    fn decode_poly(&self, r: &mut BitReader<'_>) -> Option<FieldPoly> {
        FieldPoly::decode(self.field, self.cert_coeffs(), r)
    }

    fn encode_evals(&self, u: usize, x: u64, out: &mut Bits) {
        let w = self.field.element_bits();
        for p in &self.psi[u] {
            out.push_uint(p.evaluate(x), w);
        }
    }

    fn decode_evals(&self, r: &mut BitReader<'_>) -> Option<Vec<u64>> {
        let w = self.field.element_bits();
        (0..self.alpha).map(|_| r.read_uint(w).map(|e| self.field.reduce(e))).collect()
    }

    /// `Σ_t Ψ_{S_u,t}(x)·e_t` for a neighbor's evaluations `e`.
    fn pair_value(&self, u: usize, x: u64, evals: &[u64]) -> u64 {
        let f = self.field;
        self.psi[u].iter().zip(evals).fold(0, |acc, (p, &e)| f.add(acc, f.mul(p.evaluate(x), e)))
    }

    fn node(&self, id: u64) -> Option<usize> {
        self.config.index_of(id)
    }
}

/// Honest certificates for a variant, encoded.
pub fn honest_triangle_certs(inst: &TriangleInstance, variant: TriangleVariant) -> Vec<Bits> {
    (0..inst.config.n())
        .map(|u| match variant {
            TriangleVariant::Dist1Round => Bits::concat(
                inst.config
                    .neighbors(u)
                    .iter()
                    .map(|&v| inst.pair_poly(u, v).encode(inst.cert_coeffs()))
                    .collect::<Vec<_>>()
                    .iter(),
            ),
            _ => inst.honest_cert(u).encode(inst.cert_coeffs()),
        })
        .collect()
}

pub fn honest_triangle_prover(inst: Arc<TriangleInstance>, variant: TriangleVariant) -> Arc<dyn Prover> {
    let cache = OnceLock::new();
    Arc::new(move |_: &ProverInput<'_>| cache.get_or_init(|| honest_triangle_certs(&inst, variant)).clone())
}

// The indicator polynomials depend only on a node's own neighbor ids, so
// they are computed once per node instead of once per run.
struct TriangleVerifier {
    inst: Arc<TriangleInstance>,
    variant: TriangleVariant,
}

impl TriangleVerifier {
    fn decide_shared_point(&self, u: usize, view: &NodeView<'_>, x: u64, round: usize) -> bool {
        let inst = &self.inst;
        let mut r = view.certificates[0].reader();
        let Some(phi) = inst.decode_poly(&mut r) else { return false };
        if !r.is_done() || !inst.vanishes_on_rows(&phi) {
            return false;
        }
        let f = inst.field;
        let mut total = 0;
        for m in &view.inbox[round] {
            let Some(e) = inst.decode_evals(&mut m.reader()) else { return false };
            total = f.add(total, inst.pair_value(u, x, &e));
        }
        phi.evaluate(x) == total
    }

    fn decide_per_edge(&self, u: usize, view: &NodeView<'_>) -> bool {
        let inst = &self.inst;
        let w = inst.field.element_bits();
        let mut r = view.certificates[0].reader();
        for m in &view.inbox[0] {
            let Some(phi) = inst.decode_poly(&mut r) else { return false };
            let mut mr = m.reader();
            let (Some(x), Some(e)) = (mr.read_uint(w), inst.decode_evals(&mut mr)) else { return false };
            let x = inst.field.reduce(x);
            if !inst.vanishes_on_rows(&phi) || phi.evaluate(x) != inst.pair_value(u, x, &e) {
                return false;
            }
        }
        r.is_done()
    }
}

impl LocalVerifier for TriangleVerifier {
    fn rounds(&self) -> usize {
        match self.variant {
            TriangleVariant::Dist2Round => 2,
            _ => 1,
        }
    }

    fn messages(&self, view: &NodeView<'_>, round: usize) -> Vec<Bits> {
        let inst = &self.inst;
        let Some(u) = inst.node(view.id) else { return vec![Bits::new(); view.degree] };
        let own_point = view.randomness[0][0];
        let w = inst.field.element_bits();
        match (self.variant, round) {
            (TriangleVariant::Shared, _) => {
                let mut m = Bits::new();
                inst.encode_evals(u, own_point, &mut m);
                vec![m; view.degree]
            }
            (TriangleVariant::Dist2Round, 0) => vec![Bits::from_uint(own_point, w); view.degree],
            (TriangleVariant::Dist2Round, _) => view.inbox[0]
                .iter()
                .map(|p| {
                    let x = inst.field.reduce(p.to_uint().unwrap_or(0));
                    let mut m = Bits::new();
                    inst.encode_evals(u, x, &mut m);
                    m
                })
                .collect(),
            (TriangleVariant::Dist1Round, _) => {
                let mut m = Bits::from_uint(own_point, w);
                inst.encode_evals(u, own_point, &mut m);
                vec![m; view.degree]
            }
        }
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let Some(u) = self.inst.node(view.id) else { return false };
        match self.variant {
            TriangleVariant::Shared => self.decide_shared_point(u, view, view.randomness[0][0], 0),
            TriangleVariant::Dist2Round => self.decide_shared_point(u, view, view.randomness[0][0], 1),
            TriangleVariant::Dist1Round => self.decide_per_edge(u, view),
        }
    }
}

/// `[Merlin, Arthur]` spec for the chosen variant. Nodes see their
/// neighbors' ids.
pub fn triangle_spec(inst: Arc<TriangleInstance>, variant: TriangleVariant) -> Result<ProtocolSpec, EngineError> {
    let q = inst.field.modulus();
    let mode = match variant {
        TriangleVariant::Shared => RandomnessMode::Shared,
        _ => RandomnessMode::Distributed,
    };
    let name = format!("triangle-{variant}");
    ProtocolSpec::new(
        name,
        vec![Phase::Merlin, Phase::Arthur(RandomDomain::new(vec![q])?)],
        mode,
        honest_triangle_prover(inst.clone(), variant),
        Arc::new(TriangleVerifier { inst, variant }),
    )
    .map(|s| s.with_neighbor_ids(true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{estimate, exact_acceptance, run_once};
    use crate::netconfig::{generate, GraphKind};

    fn inst(kind: GraphKind, alpha: u64) -> Arc<TriangleInstance> {
        Arc::new(TriangleInstance::with_defaults(generate(&kind).unwrap(), alpha).unwrap())
    }

    #[test]
    fn coordinates_layout() {
        let t = inst(GraphKind::Complete(4), 2);
        assert_eq!(t.rows, 2);
        assert_eq!(t.coordinates(1), (1, 1));
        assert_eq!(t.coordinates(2), (1, 2));
        assert_eq!(t.coordinates(3), (2, 1));
        assert_eq!(t.coordinates(4), (2, 2));
    }

    #[test]
    fn single_neighbor_indicator() {
        // Universe of 3 with alpha 1; a neighbor with id 2 gives (0, 1, 0).
        let t = inst(GraphKind::Path(3), 1);
        let p = &t.indicator_polys(&[2]).unwrap()[0];
        assert_eq!((1..=3).map(|i| p.evaluate(i)).collect::<Vec<_>>(), vec![0, 1, 0]);
        assert!(p.degree().unwrap() <= 2);
        assert!(t.indicator_polys(&[]).unwrap()[0].is_zero());
    }

    #[test]
    fn honest_cert_detects_triangles() {
        let c5 = inst(GraphKind::Cycle(5), 1);
        for u in 0..5 {
            assert!(c5.vanishes_on_rows(&c5.honest_cert(u)));
        }
        let k3 = inst(GraphKind::Complete(3), 1);
        for u in 0..3 {
            assert!(!k3.vanishes_on_rows(&k3.honest_cert(u)));
            assert!(k3.honest_cert(u).degree().unwrap() <= 2 * (k3.rows as usize - 1));
        }
    }

    #[test]
    fn honest_completeness_all_variants() {
        for alpha in [1, 2] {
            let t = inst(GraphKind::Cycle(6), alpha);
            for variant in [TriangleVariant::Shared, TriangleVariant::Dist2Round, TriangleVariant::Dist1Round] {
                let spec = triangle_spec(t.clone(), variant).unwrap();
                let r = estimate(&spec, &t.config, 200, 1).unwrap();
                assert_eq!(r.accepted, 200, "{variant} alpha={alpha}");
                assert_eq!(r.max_msg_bits, t.message_bits(variant));
            }
        }
        let t = inst(GraphKind::Cycle(5), 1);
        let spec = triangle_spec(t.clone(), TriangleVariant::Shared).unwrap();
        assert_eq!(exact_acceptance(&spec, &t.config).unwrap().value(), 1.0);
    }

    #[test]
    fn measured_budgets_match_encoding() {
        let t = inst(GraphKind::RandomRegular { n: 8, d: 3, seed: 2 }, 2);
        assert_eq!(t.field.modulus(), 193);
        for variant in [TriangleVariant::Shared, TriangleVariant::Dist1Round] {
            let spec = triangle_spec(t.clone(), variant).unwrap();
            let (_, tr) = run_once(&spec, &t.config, 0, 0).unwrap();
            let expected = (0..8).map(|u| t.cert_bits(variant, u)).max().unwrap();
            assert_eq!(tr.max_cert_bits(), expected);
        }
        assert_eq!(t.cert_bits(TriangleVariant::Dist1Round, 0), 3 * 7 * 8);
    }

    #[test]
    fn honest_prover_on_triangle_is_rejected() {
        let t = inst(GraphKind::Complete(3), 1);
        let spec = triangle_spec(t.clone(), TriangleVariant::Shared).unwrap();
        assert_eq!(exact_acceptance(&spec, &t.config).unwrap().accepting, 0);
    }

    #[test]
    fn zero_id_is_shifted() {
        let t = inst(GraphKind::Cycle(5), 1);
        assert_eq!(t.universe, 5);
        assert_eq!(t.coordinates(0), (1, 1));
        assert_eq!(t.coordinates(4), (5, 1));
    }
}
