//! Piecewise-affine measure-preserving transformations onto intervals `(0, M)`.
//!
//! A piece maps its source with constant density `d` by an affine map of
//! slope `d`, so lengths push forward to measure exactly. The *mass
//! coordinate* of `x` in a piece is `d·(x − lower)` (ascending) or
//! `d·(upper − x)` (descending, for sources unbounded below). A contiguous
//! piece places mass `u` at `offset + u`. Several pieces of infinite measure
//! share a tail by interleaving: mass block `k` (of length `block`) is placed
//! at `offset + k·period`.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rearrangement::{increasing_rearrangement, measured_pieces, LevelProfile, MeasuredPiece};
use crate::scalar::{format_rational, rational_serde, ExtScalar, Rational};
use crate::space::WeightedSpace;
use crate::step::StepFunction;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Ascending,
    Descending,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Layout {
    #[default]
    Contiguous,
    Interleaved {
        #[serde(with = "rational_serde")]
        period: Rational,
        #[serde(with = "rational_serde")]
        block: Rational,
    },
}

fn is_ascending(o: &Orientation) -> bool {
    *o == Orientation::Ascending
}

fn is_contiguous(l: &Layout) -> bool {
    *l == Layout::Contiguous
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MptPiece {
    pub source: Interval,
    #[serde(with = "rational_serde")]
    pub offset: Rational,
    #[serde(with = "rational_serde")]
    pub slope: Rational,
    #[serde(default, skip_serializing_if = "is_ascending")]
    pub orientation: Orientation,
    #[serde(default, skip_serializing_if = "is_contiguous")]
    pub layout: Layout,
}

impl MptPiece {
    pub fn is_null(&self) -> bool {
        self.slope.is_zero()
    }

    /// Total mass carried by the piece.
    pub fn mass(&self) -> ExtScalar {
        &self.source.length() * &ExtScalar::Finite(self.slope.clone())
    }

    fn coordinate(&self, x: &Rational) -> Rational {
        match self.orientation {
            Orientation::Ascending => &self.slope * (x - self.source.lower().expect("ascending anchor")),
            Orientation::Descending => &self.slope * (self.source.upper().expect("descending anchor") - x),
        }
    }

    fn place(&self, u: &Rational) -> Rational {
        match &self.layout {
            Layout::Contiguous => &self.offset + u,
            Layout::Interleaved { period, block } => {
                let k = (u / block).floor();
                &self.offset + &k * period + (u - &k * block)
            }
        }
    }

    /// `σ(x)` for `x` inside the source.
    pub fn eval(&self, x: &Rational) -> Rational {
        if self.is_null() {
            return self.offset.clone();
        }
        self.place(&self.coordinate(x))
    }

    /// Target intervals starting below `horizon` (all of them for a contiguous piece).
    fn target_blocks(&self, horizon: &Rational) -> Vec<(Rational, ExtScalar)> {
        match &self.layout {
            Layout::Contiguous => {
                let end = &ExtScalar::Finite(self.offset.clone()) + &self.mass();
                vec![(self.offset.clone(), end)]
            }
            Layout::Interleaved { period, block } => {
                let mut out = Vec::new();
                let mut start = self.offset.clone();
                while &start < horizon {
                    out.push((start.clone(), ExtScalar::Finite(&start + block)));
                    start += period;
                }
                out
            }
        }
    }
}

/// `σ` as a list of pieces ordered by source.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MPTransform {
    pieces: Vec<MptPiece>,
}

impl MPTransform {
    pub fn new(pieces: Vec<MptPiece>) -> Self {
        MPTransform { pieces }
    }

    pub fn pieces(&self) -> &[MptPiece] {
        &self.pieces
    }

    /// `σ(x)`, or `None` when `x` is not interior to a source.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        self.pieces.iter().find(|p| p.source.contains_interior(x)).map(|p| p.eval(x))
    }
}

/// Outcome of checking the two Ryff conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum RyffVerdict {
    /// `κ_f(T) < ∞`.
    CondI,
    /// `κ_f(s) < ∞` for `s < T` and `μ{f = T} = 0`.
    CondII,
    /// Neither; `κ_f(s) = ∞` and `μ{f ≥ s} > 0`.
    Neither { s: ExtScalar },
}

/// Classifies `f` exactly. With step data `μ{f = T} > 0` whenever `T` is
/// attained, so the second condition never applies.
pub fn ryff_conditions(f: &StepFunction, space: &WeightedSpace) -> Result<RyffVerdict> {
    let profile = LevelProfile::of(f, space)?;
    let levels = profile.levels();
    match levels.iter().position(|l| l.measure.is_infinite()) {
        Some(i) if i + 1 < levels.len() => Ok(RyffVerdict::Neither { s: levels[i + 1].value.clone() }),
        _ => Ok(RyffVerdict::CondI),
    }
}

/// Whether `f_*(t) < s` for every `t > 0`.
pub fn necessity_certificate(f: &StepFunction, space: &WeightedSpace, s: &ExtScalar) -> Result<bool> {
    Ok(increasing_rearrangement(f, space)?.values().iter().all(|v| v < s))
}

/// Splits a piece covering the whole real line at 0 so each piece has a finite anchor.
pub(crate) fn split_unbounded(pieces: Vec<MeasuredPiece>) -> Vec<MeasuredPiece> {
    let mut out = Vec::with_capacity(pieces.len() + 1);
    for p in pieces {
        if p.interval.lower().is_none() && p.interval.upper().is_none() {
            let zero = Rational::zero();
            for interval in [Interval::new(None, Some(zero.clone())), Interval::new(Some(zero), None)] {
                out.push(MeasuredPiece { interval: interval.expect("split of the real line"), ..p.clone() });
            }
        } else {
            out.push(p);
        }
    }
    out
}

fn anchored_orientation(source: &Interval) -> Orientation {
    if source.lower().is_some() {
        Orientation::Ascending
    } else {
        Orientation::Descending
    }
}

/// Lays positive-measure pieces out consecutively from `start`, left to right.
/// Pieces of infinite measure go last and share the tail `(cursor, ∞)` by
/// interleaving blocks of length `block`.
pub fn tile_pieces(pieces: &[MeasuredPiece], start: &Rational, block: &Rational) -> Vec<(Interval, MptPiece)> {
    let mut out = Vec::new();
    let mut cursor = start.clone();
    for p in pieces.iter().filter(|p| p.measure.is_finite()) {
        out.push((
            p.interval.clone(),
            MptPiece {
                source: p.interval.clone(),
                offset: cursor.clone(),
                slope: p.density.clone(),
                orientation: Orientation::Ascending,
                layout: Layout::Contiguous,
            },
        ));
        cursor += p.measure.expect_finite("finite piece");
    }
    let infinite: Vec<_> = pieces.iter().filter(|p| p.measure.is_infinite()).collect();
    let n = infinite.len();
    for (i, p) in infinite.into_iter().enumerate() {
        let layout = if n == 1 {
            Layout::Contiguous
        } else {
            Layout::Interleaved { period: block * Rational::from_integer(n.into()), block: block.clone() }
        };
        out.push((
            p.interval.clone(),
            MptPiece {
                source: p.interval.clone(),
                offset: &cursor + block * Rational::from_integer(i.into()),
                slope: p.density.clone(),
                orientation: anchored_orientation(&p.interval),
                layout,
            },
        ));
    }
    out
}

pub(crate) fn null_piece(p: &MeasuredPiece) -> MptPiece {
    MptPiece {
        source: p.interval.clone(),
        offset: Rational::zero(),
        slope: Rational::zero(),
        orientation: anchored_orientation(&p.interval),
        layout: Layout::Contiguous,
    }
}

pub(crate) fn source_order(a: &Interval, b: &Interval) -> std::cmp::Ordering {
    match (a.lower(), b.lower()) {
        (None, None) => std::cmp::Ordering::Equal,
        (None, _) => std::cmp::Ordering::Less,
        (_, None) => std::cmp::Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

/// Assembles pieces placed level by level; `starts` gives each level's target start.
fn assemble(
    pieces: Vec<MeasuredPiece>,
    levels: impl Iterator<Item = ExtScalar>,
    start_of: impl Fn(&ExtScalar) -> Rational,
) -> MPTransform {
    let mut by_value: BTreeMap<ExtScalar, Vec<MeasuredPiece>> = BTreeMap::new();
    let mut placed: Vec<(Interval, MptPiece)> = Vec::new();
    for p in pieces {
        if p.measure.is_zero() {
            placed.push((p.interval.clone(), null_piece(&p)));
        } else {
            by_value.entry(p.value.clone()).or_default().push(p);
        }
    }
    let unit = Rational::from_integer(1.into());
    for value in levels {
        if let Some(group) = by_value.get(&value) {
            placed.extend(tile_pieces(group, &start_of(&value), &unit));
        }
    }
    placed.sort_by(|a, b| source_order(&a.0, &b.0));
    MPTransform::new(placed.into_iter().map(|(_, p)| p).collect())
}

/// `σ` with `f = f_* ∘ σ` a.e., levels stacked upward from 0 in increasing order.
pub fn build_increasing_mpt(f: &StepFunction, space: &WeightedSpace) -> Result<MPTransform> {
    if let RyffVerdict::Neither { s } = ryff_conditions(f, space)? {
        return Err(Error::RyffNeitherCondition(s));
    }
    let profile = LevelProfile::of(f, space)?;
    let pieces = split_unbounded(measured_pieces(f, space)?);
    let values: Vec<ExtScalar> = profile.levels().iter().map(|l| l.value.clone()).collect();
    Ok(assemble(pieces, values.into_iter(), |c| {
        profile.measure_below(c).expect_finite("level start below T").clone()
    }))
}

/// `σ` with `f = f* ∘ σ` a.e., levels stacked upward from 0 in decreasing order.
/// Only the lowest non-null level may have infinite measure.
pub fn build_decreasing_mpt(f: &StepFunction, space: &WeightedSpace) -> Result<MPTransform> {
    let profile = LevelProfile::of(f, space)?;
    let levels = profile.levels();
    if levels.is_empty() {
        return Err(Error::ZeroMeasure);
    }
    if levels[1..].iter().any(|l| l.measure.is_infinite()) {
        return Err(Error::InfinitePositiveLevel);
    }
    let pieces = split_unbounded(measured_pieces(f, space)?);
    let values: Vec<ExtScalar> = levels.iter().rev().map(|l| l.value.clone()).collect();
    Ok(assemble(pieces, values.into_iter(), |c| {
        profile.measure_above(c).expect_finite("mass above a level").clone()
    }))
}

/// Checks the transformation invariants, reporting the first violation.
pub fn check_mpt(sigma: &MPTransform, space: &WeightedSpace) -> std::result::Result<(), String> {
    let pieces = sigma.pieces();
    let domain = space.domain();
    let Some(first) = pieces.first() else {
        return Err("no pieces".into());
    };
    if first.source.lower() != domain.lower() {
        return Err(format!("first source {} does not start at the domain {}", first.source, domain));
    }
    for (i, w) in pieces.windows(2).enumerate() {
        if w[0].source.upper().is_none() || w[0].source.upper() != w[1].source.lower() {
            return Err(format!("sources {} (piece {i}) and {} are not adjacent", w[0].source, w[1].source));
        }
    }
    if pieces.last().map(|p| p.source.upper()) != Some(domain.upper()) {
        return Err(format!("sources do not reach the end of the domain {domain}"));
    }

    for (i, p) in pieces.iter().enumerate() {
        let density = space.density().restrict(&p.source).map_err(|e| e.to_string())?;
        if density.num_pieces() != 1 {
            return Err(format!("piece {i}: density is not constant on {}", p.source));
        }
        let d = density.values()[0].expect_finite("density");
        if &p.slope != d {
            return Err(format!(
                "piece {i}: slope {} differs from density {} on {}",
                format_rational(&p.slope),
                format_rational(d),
                p.source
            ));
        }
        if p.offset.is_negative() {
            return Err(format!("piece {i}: negative offset"));
        }
        if p.is_null() {
            continue;
        }
        let anchored = match p.orientation {
            Orientation::Ascending => p.source.lower().is_some(),
            Orientation::Descending => p.source.upper().is_some(),
        };
        if !anchored {
            return Err(format!("piece {i}: orientation has no finite anchor on {}", p.source));
        }
        if let Layout::Interleaved { period, block } = &p.layout {
            if !block.is_positive() || block > period || p.mass().is_finite() {
                return Err(format!("piece {i}: invalid interleaving"));
            }
        }
    }

    let active: Vec<(usize, &MptPiece)> = pieces.iter().enumerate().filter(|(_, p)| !p.is_null()).collect();
    let periods: Vec<&Rational> = active
        .iter()
        .filter_map(|(_, p)| match &p.layout {
            Layout::Interleaved { period, .. } => Some(period),
            Layout::Contiguous => None,
        })
        .collect();
    let total = space.total_measure();
    let mut targets: Vec<(Rational, ExtScalar, usize)> = Vec::new();
    let horizon = if let Some(&period) = periods.first() {
        if periods.iter().any(|q| *q != period) {
            return Err("interleaved pieces use different periods".into());
        }
        // Past the last offset or finite end the pattern repeats with the period.
        let mut top = Rational::zero();
        for (_, p) in &active {
            top = top.max(p.offset.clone());
            if let (Layout::Contiguous, ExtScalar::Finite(m)) = (&p.layout, p.mass()) {
                top = top.max(&p.offset + m);
            }
        }
        Some(top + period)
    } else {
        None
    };
    for (i, p) in &active {
        let cap = horizon.clone().unwrap_or_else(|| p.offset.clone() + Rational::from_integer(1.into()));
        for (start, end) in p.target_blocks(&cap) {
            let end = match (&horizon, end) {
                (Some(h), ExtScalar::Finite(e)) => ExtScalar::Finite(e.min(h.clone())),
                (Some(_), ExtScalar::Infinite) => {
                    return Err(format!("piece {i}: unbounded contiguous target alongside interleaved pieces"))
                }
                (None, e) => e,
            };
            targets.push((start, end, *i));
        }
    }
    targets.sort_by(|a, b| a.0.cmp(&b.0));
    let mut cursor = ExtScalar::zero();
    for (start, end, i) in &targets {
        let start = ExtScalar::Finite(start.clone());
        if start < cursor {
            return Err(format!("piece {i}: target overlaps an earlier target at {start}"));
        }
        if start > cursor {
            return Err(format!("gap in targets between {cursor} and {start}"));
        }
        cursor = end.clone();
    }
    let expected = match &horizon {
        Some(h) => {
            if total.is_finite() {
                return Err("interleaved targets on a finite space".into());
            }
            ExtScalar::Finite(h.clone())
        }
        None => total,
    };
    if cursor != expected {
        return Err(format!("targets cover (0, {cursor}) instead of (0, {expected})"));
    }
    Ok(())
}

/// Whether `σ` is a valid measure-preserving transformation of `space`.
pub fn verify_mpt(sigma: &MPTransform, space: &WeightedSpace) -> bool {
    check_mpt(sigma, space).is_ok()
}

/// Value of `g` immediately to the right of `t`.
fn value_right_of<'a>(g: &'a StepFunction, t: &Rational) -> &'a ExtScalar {
    &g.values()[g.breaks().partition_point(|b| b <= t)]
}

/// Value of `g` immediately to the left of `t`.
fn value_left_of<'a>(g: &'a StepFunction, t: &Rational) -> &'a ExtScalar {
    &g.values()[g.breaks().partition_point(|b| b < t)]
}

fn escapes(p: &MptPiece, g: &StepFunction) -> Error {
    Error::TargetEscapesDomain(
        format!("from {} with mass {}", format_rational(&p.offset), p.mass()),
        g.domain().clone(),
    )
}

/// `g ∘ τ` in the mass coordinate, as `(value, right end)` segments; `None` ends the piece.
fn mass_segments(p: &MptPiece, g: &StepFunction) -> Result<Vec<(ExtScalar, Option<Rational>)>> {
    let dom = g.domain();
    if dom.lower().is_some_and(|a| a > &p.offset) {
        return Err(escapes(p, g));
    }
    let mut out = Vec::new();
    match &p.layout {
        Layout::Contiguous => {
            let end = &ExtScalar::Finite(p.offset.clone()) + &p.mass();
            let fits = match (dom.upper(), &end) {
                (None, _) => true,
                (Some(b), ExtScalar::Finite(e)) => e <= b,
                (Some(_), ExtScalar::Infinite) => false,
            };
            if !fits {
                return Err(escapes(p, g));
            }
            for b in g.breaks().iter().filter(|b| *b > &p.offset && end > ExtScalar::Finite((*b).clone())) {
                out.push((value_left_of(g, b).clone(), Some(b - &p.offset)));
            }
            let last = match &end {
                ExtScalar::Finite(e) => value_left_of(g, e).clone(),
                ExtScalar::Infinite => g.values().last().expect("nonempty").clone(),
            };
            out.push((last, None));
        }
        Layout::Interleaved { period, block } => {
            if dom.upper().is_some() {
                return Err(escapes(p, g));
            }
            let last_break = g.breaks().last().cloned().unwrap_or_else(Rational::zero);
            let mut k = Rational::zero();
            loop {
                let t0 = &p.offset + &k * period;
                if t0 >= last_break {
                    out.push((value_right_of(g, &t0).clone(), None));
                    break;
                }
                let u0 = &k * block;
                let t1 = &t0 + block;
                for b in g.breaks().iter().filter(|b| *b > &t0 && *b < &t1) {
                    out.push((value_left_of(g, b).clone(), Some(&u0 + (b - &t0))));
                }
                out.push((value_left_of(g, &t1).clone(), Some(&u0 + block)));
                k += Rational::from_integer(1.into());
            }
        }
    }
    Ok(out)
}

/// `x ↦ g(σ(x))` on the union of the sources.
pub fn compose_with_rearrangement(g_star: &StepFunction, sigma: &MPTransform) -> Result<StepFunction> {
    let pieces = sigma.pieces();
    let (Some(first), Some(last)) = (pieces.first(), pieces.last()) else {
        return Err(Error::Unsupported("empty transformation".into()));
    };
    let domain = Interval::new(first.source.lower().cloned(), last.source.upper().cloned())?;
    let mut segments: Vec<(ExtScalar, Option<Rational>)> = Vec::new();
    for p in pieces {
        let source_end = p.source.upper().cloned();
        if p.is_null() {
            if !g_star.domain().contains_interior(&p.offset) && g_star.domain().lower() != Some(&p.offset) {
                return Err(escapes(p, g_star));
            }
            segments.push((value_right_of(g_star, &p.offset).clone(), source_end));
            continue;
        }
        let mass = mass_segments(p, g_star)?;
        match p.orientation {
            Orientation::Ascending => {
                let a = p.source.lower().expect("ascending anchor");
                for (v, u) in mass {
                    let end = match u {
                        Some(u) => Some(a + u / &p.slope),
                        None => source_end.clone(),
                    };
                    segments.push((v, end));
                }
            }
            Orientation::Descending => {
                let b = p.source.upper().expect("descending anchor");
                let ends: Vec<Option<Rational>> = mass.iter().map(|(_, u)| u.clone()).collect();
                for i in (0..mass.len()).rev() {
                    let end = if i == 0 {
                        source_end.clone()
                    } else {
                        Some(b - ends[i - 1].as_ref().expect("interior mass break") / &p.slope)
                    };
                    segments.push((mass[i].0.clone(), end));
                }
            }
        }
    }
    StepFunction::from_segments(domain, segments)
}

/// Whether `f = h ∘ σ` μ-a.e.
pub fn realizes(f: &StepFunction, h: &StepFunction, sigma: &MPTransform, space: &WeightedSpace) -> Result<bool> {
    let composed = compose_with_rearrangement(h, sigma)?;
    if composed.domain() != space.domain() {
        return Ok(false);
    }
    space.agree_ae(f, &composed)
}
