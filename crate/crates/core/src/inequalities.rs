//! Bell's counting inequality over finite sets, and the CHSH statistic.

use serde::{Deserialize, Serialize};

use crate::engine::{run_setting_pair, CorrelationEstimate, RunParams};
use crate::error::{Error, Result};
use crate::geometry::Angle;
use crate::models::quantum::{qm_correlation, Particle};
use crate::models::{ApertureModel, Pairing};

/// Sizes of the seven Venn regions of three categories X, Y, Z.
///
/// `a`, `b`, `c` are the single-category regions, `d` = X∩Y only,
/// `e` = Y∩Z only, `f` = X∩Z only and `g` the triple overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RegionCounts {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub e: u64,
    pub f: u64,
    pub g: u64,
    pub outside: u64,
}

impl RegionCounts {
    pub fn x(&self) -> u64 {
        self.a + self.d + self.f + self.g
    }

    pub fn y(&self) -> u64 {
        self.b + self.d + self.e + self.g
    }

    pub fn z(&self) -> u64 {
        self.c + self.e + self.f + self.g
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d + self.e + self.f + self.g + self.outside
    }

    fn add(&mut self, x: bool, y: bool, z: bool) {
        let slot = match (x, y, z) {
            (true, false, false) => &mut self.a,
            (false, true, false) => &mut self.b,
            (false, false, true) => &mut self.c,
            (true, true, false) => &mut self.d,
            (false, true, true) => &mut self.e,
            (true, false, true) => &mut self.f,
            (true, true, true) => &mut self.g,
            (false, false, false) => &mut self.outside,
        };
        *slot += 1;
    }
}

/// Sorts every item of `universe` into its region.
pub fn venn_regions<T>(
    universe: &[T],
    x: impl Fn(&T) -> bool,
    y: impl Fn(&T) -> bool,
    z: impl Fn(&T) -> bool,
) -> RegionCounts {
    let mut r = RegionCounts::default();
    for item in universe {
        r.add(x(item), y(item), z(item));
    }
    r
}

/// Both sides of `n[X,¬Y] + n[Y,¬Z] ≥ n[X,¬Z]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellCount {
    pub lhs: u64,
    pub rhs: u64,
    pub slack: i64,
    pub holds: bool,
}

impl BellCount {
    fn new(lhs: u64, rhs: u64) -> Self {
        let slack = lhs as i64 - rhs as i64;
        Self {
            lhs,
            rhs,
            slack,
            holds: slack >= 0,
        }
    }
}

/// Evaluates the counting inequality on one consistent set of counts.
/// The slack is always `b + f`.
pub fn bell_count(r: &RegionCounts) -> BellCount {
    BellCount::new((r.a + r.f) + (r.b + r.d), r.a + r.d)
}

/// Outcome of checking the counting inequality on many random universes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TautologyCheck {
    pub universes: u64,
    pub items: u64,
    pub violations: u64,
    pub min_slack: i64,
}

/// Builds `universes` random finite universes of integers, each with three
/// pure modular predicates drawn from `seed`, and evaluates the counting
/// inequality on each.
pub fn tautology_check(universes: u64, seed: u64) -> TautologyCheck {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = TautologyCheck { universes, items: 0, violations: 0, min_slack: i64::MAX };
    for _ in 0..universes {
        let size = rng.gen_range(0..200u64);
        let mut predicate = || {
            let m = rng.gen_range(1..50u64);
            let (a, b, t) = (rng.gen_range(0..m), rng.gen_range(0..m), rng.gen_range(0..=m));
            move |i: &u64| (a * i + b) % m < t
        };
        let (x, y, z) = (predicate(), predicate(), predicate());
        let items: Vec<u64> = (0..size).collect();
        let bc = bell_count(&venn_regions(&items, x, y, z));
        out.items += size;
        out.violations += u64::from(!bc.holds);
        out.min_slack = out.min_slack.min(bc.slack);
    }
    out
}

/// Category membership of one item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Membership {
    pub x: bool,
    pub y: bool,
    pub z: bool,
}

impl Membership {
    pub const fn new(x: bool, y: bool, z: bool) -> Self {
        Self { x, y, z }
    }
}

/// Three states of the same universe, one per term of the inequality:
/// `snapshots[0]` is seen by `n[X,¬Y]`, `snapshots[1]` by `n[Y,¬Z]` and
/// `snapshots[2]` by `n[X,¬Z]`. A measurement that disturbs what it
/// measures makes them differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbedScenario {
    pub snapshots: [Vec<Membership>; 3],
}

impl PerturbedScenario {
    /// The same universe seen identically by all three terms.
    pub fn undisturbed(items: Vec<Membership>) -> Self {
        Self {
            snapshots: [items.clone(), items.clone(), items],
        }
    }

    /// Ten people. X: magician, Y: wearing a hat, Z: owns a rabbit.
    /// Everyone wearing a hat takes it off when checked for a rabbit, so the
    /// `n[Y,¬Z]` term and everything after it sees no hats.
    pub fn hats_and_rabbits() -> Self {
        let before: Vec<Membership> = (0..10)
            .map(|i| Membership::new(i < 6, i < 8, i < 3))
            .collect();
        let after: Vec<Membership> = before.iter().map(|m| Membership { y: false, ..*m }).collect();
        Self {
            snapshots: [before, after.clone(), after],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbedOutcome {
    pub naive_lhs: u64,
    pub naive_rhs: u64,
    pub violated: bool,
    /// The inequality evaluated on each snapshot alone; every one holds.
    pub per_snapshot: [BellCount; 3],
}

/// Evaluates each term against its own snapshot, as a destructive
/// sequential measurement would.
pub fn perturbed_bell_demo(scenario: &PerturbedScenario) -> Result<PerturbedOutcome> {
    let [s0, s1, s2] = &scenario.snapshots;
    if s0.len() != s1.len() || s1.len() != s2.len() {
        return Err(Error::Scenario(format!(
            "snapshot sizes differ: {}, {}, {}",
            s0.len(),
            s1.len(),
            s2.len()
        )));
    }
    let count = |s: &[Membership], p: fn(&Membership) -> bool| s.iter().filter(|m| p(m)).count() as u64;
    let x_not_y = count(s0, |m| m.x && !m.y);
    let y_not_z = count(s1, |m| m.y && !m.z);
    let x_not_z = count(s2, |m| m.x && !m.z);
    let naive = BellCount::new(x_not_y + y_not_z, x_not_z);
    let regions = |s: &[Membership]| bell_count(&venn_regions(s, |m| m.x, |m| m.y, |m| m.z));
    Ok(PerturbedOutcome {
        naive_lhs: naive.lhs,
        naive_rhs: naive.rhs,
        violated: !naive.holds,
        per_snapshot: [regions(s0), regions(s1), regions(s2)],
    })
}

/// The four correlations entering CHSH. Settings `a₁`, `b₁` are on the left,
/// `c₂`, `d₂` on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshCorrelations {
    pub q_b1d2: f64,
    pub q_a1d2: f64,
    pub q_b1c2: f64,
    pub q_a1c2: f64,
}

impl ChshCorrelations {
    pub fn new(q_b1d2: f64, q_a1d2: f64, q_b1c2: f64, q_a1c2: f64) -> Result<Self> {
        for q in [q_b1d2, q_a1d2, q_b1c2, q_a1c2] {
            if !(-1.0..=1.0).contains(&q) {
                return Err(Error::config(format!("correlation {q} outside [-1, 1]")));
            }
        }
        Ok(Self { q_b1d2, q_a1d2, q_b1c2, q_a1c2 })
    }

    pub fn negated(&self) -> Self {
        Self {
            q_b1d2: -self.q_b1d2,
            q_a1d2: -self.q_a1d2,
            q_b1c2: -self.q_b1c2,
            q_a1c2: -self.q_a1c2,
        }
    }
}

/// `S = |q(b₁,d₂) − q(a₁,d₂)| + |q(b₁,c₂) + q(a₁,c₂)|`. Local models without
/// post-selection keep `S ≤ 2`.
pub fn chsh(q: &ChshCorrelations) -> f64 {
    (q.q_b1d2 - q.q_a1d2).abs() + (q.q_b1c2 + q.q_a1c2).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a1: Angle,
    pub b1: Angle,
    pub c2: Angle,
    pub d2: Angle,
}

impl ChshSettings {
    pub fn new(a1: f64, b1: f64, c2: f64, d2: f64) -> Result<Self> {
        Ok(Self {
            a1: Angle::new(a1)?,
            b1: Angle::new(b1)?,
            c2: Angle::new(c2)?,
            d2: Angle::new(d2)?,
        })
    }

    /// 0°, 90° | 45°, 135°: maximal violation for `−cos θ`.
    pub fn spin_half() -> Self {
        Self::new(0.0, 90.0, 45.0, 135.0).expect("finite")
    }

    /// 0°, 45° | 22.5°, 67.5°: maximal violation for `cos 2θ`.
    pub fn photon() -> Self {
        Self::new(0.0, 45.0, 22.5, 67.5).expect("finite")
    }

    pub fn for_pairing(pairing: Pairing) -> Self {
        match pairing {
            Pairing::HeadToToe => Self::spin_half(),
            Pairing::BackToBack => Self::photon(),
        }
    }

    pub fn for_particle(particle: Particle) -> Self {
        match particle {
            Particle::SpinHalf => Self::spin_half(),
            Particle::Photon => Self::photon(),
        }
    }

    /// `(left, right)` for each term, in `ChshCorrelations` field order.
    pub fn pairs(&self) -> [(Angle, Angle); 4] {
        [(self.b1, self.d2), (self.a1, self.d2), (self.b1, self.c2), (self.a1, self.c2)]
    }
}

/// Collects the four correlations from any `(left, right) → E` source.
pub fn assemble<F>(settings: &ChshSettings, mut correlation: F) -> Result<ChshCorrelations>
where
    F: FnMut(Angle, Angle) -> f64,
{
    let [q0, q1, q2, q3] = settings.pairs().map(|(l, r)| correlation(l, r));
    ChshCorrelations::new(q0, q1, q2, q3)
}

/// CHSH of the analytic quantum curve.
pub fn chsh_quantum(particle: Particle, settings: &ChshSettings) -> f64 {
    let q = assemble(settings, |l, r| qm_correlation(particle, r.minus(l))).expect("cosines are within [-1, 1]");
    chsh(&q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    pub settings: ChshSettings,
    /// Post-selected estimates in `ChshCorrelations` field order.
    pub estimates: [CorrelationEstimate; 4],
    /// `None` if any of the four settings produced no coincidences.
    pub s: Option<f64>,
    /// Root-sum-square of the four correlation standard errors.
    pub stderr: Option<f64>,
}

impl ChshEstimate {
    pub fn violates_classical_bound(&self) -> bool {
        self.s.is_some_and(|s| s > 2.0)
    }
}

pub const MIN_CHSH_PAIRS: u64 = 10_000;

/// Runs one engine job per setting pair and assembles S from the
/// post-selected correlations.
pub fn chsh_from_model(model: &ApertureModel, settings: &ChshSettings, params: RunParams) -> Result<ChshEstimate> {
    if params.pairs < MIN_CHSH_PAIRS {
        return Err(Error::config(format!(
            "CHSH needs at least {MIN_CHSH_PAIRS} pairs per setting, got {}",
            params.pairs
        )));
    }
    if params.shards == 0 {
        return Err(Error::config("shard count must be at least 1"));
    }
    model.aperture.validated()?;
    let mut job = 0u32;
    let estimates = settings.pairs().map(|(l, r)| {
        let e = run_setting_pair(model, l, r, params, job).estimate();
        job += 1;
        e
    });
    let (s, stderr) = if estimates.iter().all(CorrelationEstimate::is_defined) {
        let mut k = 0;
        let q = assemble(settings, |_, _| {
            let e = estimates[k].e.expect("defined");
            k += 1;
            e
        })?;
        let var: f64 = estimates.iter().map(|e| e.stderr.expect("defined").powi(2)).sum();
        (Some(chsh(&q)), Some(var.sqrt()))
    } else {
        (None, None)
    };
    Ok(ChshEstimate {
        settings: *settings,
        estimates,
        s,
        stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::quantum::linear_correlation_at;
    use proptest::prelude::*;

    #[test]
    fn venn_examples() {
        let empty: [u8; 0] = [];
        assert_eq!(venn_regions(&empty, |_| true, |_| true, |_| true), RegionCounts::default());

        let items = [0u8, 1, 2];
        let r = venn_regions(&items, |&i| i == 0, |&i| i == 1, |&i| i == 2);
        assert_eq!(r, RegionCounts { a: 1, b: 1, c: 1, ..Default::default() });

        // Z ⊆ X
        let nums: Vec<u32> = (0..50).collect();
        let r = venn_regions(&nums, |n| n % 2 == 0, |n| n % 3 == 0, |n| n % 4 == 0);
        assert_eq!(r.c, 0);
        assert_eq!(r.e, 0);
        assert_eq!(r.total(), 50);
        assert_eq!(r.x(), 25);
        assert_eq!(r.y(), 17);
        assert_eq!(r.z(), 13);
    }

    #[test]
    fn bell_count_examples() {
        let zero = bell_count(&RegionCounts::default());
        assert_eq!(zero.slack, 0);
        assert!(zero.holds);
        let r = RegionCounts { a: 9, b: 3, c: 4, d: 7, e: 1, f: 2, g: 5, outside: 6 };
        let bc = bell_count(&r);
        assert_eq!(bc.slack, 5);
        assert_eq!(bc.lhs, 9 + 2 + 3 + 7);
        assert_eq!(bc.rhs, 9 + 7);
        assert!(bc.holds);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn counting_inequality_always_holds(r in prop::array::uniform8(0u64..1_000_000)) {
            let rc = RegionCounts { a: r[0], b: r[1], c: r[2], d: r[3], e: r[4], f: r[5], g: r[6], outside: r[7] };
            let bc = bell_count(&rc);
            prop_assert!(bc.holds);
            prop_assert_eq!(bc.slack, (rc.b + rc.f) as i64);
        }

        #[test]
        fn chsh_is_sign_symmetric(q in prop::array::uniform4(-1.0f64..=1.0)) {
            let c = ChshCorrelations::new(q[0], q[1], q[2], q[3]).unwrap();
            prop_assert_eq!(chsh(&c), chsh(&c.negated()));
            prop_assert!(chsh(&c) <= 4.0);
        }
    }

    #[test]
    fn random_universes_never_violate() {
        let check = tautology_check(2_000, 1);
        assert_eq!(check.violations, 0);
        assert!(check.min_slack >= 0);
        assert!(check.items > 0);
    }

    #[test]
    fn undisturbed_scenarios_never_violate() {
        let items: Vec<_> = (0..30).map(|i| Membership::new(i % 2 == 0, i % 3 == 0, i % 5 == 0)).collect();
        let out = perturbed_bell_demo(&PerturbedScenario::undisturbed(items)).unwrap();
        assert!(!out.violated);
        assert!(out.naive_lhs >= out.naive_rhs);
    }

    #[test]
    fn hats_and_rabbits_violate_the_naive_count() {
        let scenario = PerturbedScenario::hats_and_rabbits();
        // counted by hand from the construction
        let [s0, s1, s2] = &scenario.snapshots;
        assert_eq!(s0.iter().filter(|m| m.x && !m.y).count(), 0);
        assert_eq!(s1.iter().filter(|m| m.y && !m.z).count(), 0);
        assert_eq!(s2.iter().filter(|m| m.x && !m.z).count(), 3);

        let out = perturbed_bell_demo(&scenario).unwrap();
        assert_eq!((out.naive_lhs, out.naive_rhs), (0, 3));
        assert!(out.violated);
        assert!(out.per_snapshot.iter().all(|b| b.holds));
    }

    #[test]
    fn mismatched_snapshots_rejected() {
        let s = PerturbedScenario {
            snapshots: [vec![Membership::default()], vec![], vec![]],
        };
        assert!(matches!(perturbed_bell_demo(&s), Err(Error::Scenario(_))));
    }

    #[test]
    fn single_item_exhaustive() {
        // all 8^3 ways one item can look to the three terms
        let all: Vec<Membership> = (0..8)
            .map(|k| Membership::new(k & 4 != 0, k & 2 != 0, k & 1 != 0))
            .collect();
        let mut y_only_violations = Vec::new();
        for &m0 in &all {
            for &m1 in &all {
                for &m2 in &all {
                    let s = PerturbedScenario { snapshots: [vec![m0], vec![m1], vec![m2]] };
                    let out = perturbed_bell_demo(&s).unwrap();
                    if m0 == m1 && m1 == m2 {
                        assert!(!out.violated, "undisturbed item {m0:?}");
                    }
                    let only_y_moves = m0.x == m1.x && m1.x == m2.x && m0.z == m1.z && m1.z == m2.z;
                    if only_y_moves && out.violated {
                        y_only_violations.push((m0, m1));
                    }
                }
            }
        }
        // when only Y changes, the one violating history is a magician without a
        // rabbit who is seen in Y by the first term and out of Y by the second
        assert!(!y_only_violations.is_empty());
        for (m0, m1) in y_only_violations {
            assert!(m0.x && !m0.z && m0.y && !m1.y);
        }
    }

    #[test]
    fn chsh_examples() {
        assert_eq!(chsh(&ChshCorrelations::new(0.0, 0.0, 0.0, 0.0).unwrap()), 0.0);

        let s = chsh_quantum(Particle::SpinHalf, &ChshSettings::spin_half());
        assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let s = chsh_quantum(Particle::Photon, &ChshSettings::photon());
        assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-12);

        let settings = ChshSettings::spin_half();
        let q = assemble(&settings, |l, r| linear_correlation_at(r.minus(l), Pairing::HeadToToe)).unwrap();
        assert_eq!([q.q_b1d2, q.q_a1d2, q.q_b1c2, q.q_a1c2], [-0.5, 0.5, -0.5, -0.5]);
        assert_eq!(chsh(&q), 2.0);
    }

    #[test]
    fn correlations_out_of_range_rejected() {
        assert!(ChshCorrelations::new(1.5, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn chsh_from_model_needs_enough_pairs() {
        let model = ApertureModel::new(crate::geometry::Aperture::FigureEight, Pairing::HeadToToe);
        let params = RunParams { pairs: 100, seed: 0, shards: 1 };
        assert!(chsh_from_model(&model, &ChshSettings::spin_half(), params).is_err());
    }
}
