//! Deterministic context-free L-systems with turtle interpretation.
//!
//! Rules rewrite every symbol simultaneously; symbols without a rule
//! rewrite to themselves. The turtle understands `F` (draw forward),
//! `f` (move forward), `+`/`-` (turn by the system angle; the unicode
//! minus sign is accepted too) and `[`/`]` (push/pop state). Any other
//! symbol is a no-op, which is how placeholder symbols like `X` work.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use super::GenerativeError;
use crate::canvas::{Group, Point, Polyline, Primitive, Style};

#[derive(Debug, Clone, PartialEq)]
pub struct LSystem {
    pub alphabet: BTreeSet<char>,
    pub axiom: String,
    pub rules: BTreeMap<char, String>,
    pub angle_deg: f64,
    pub step: f64,
}

/// JSON shape: `{"axiom": "F", "rules": {"F": "F+F--F+F"}, "angle_deg": 60, "step": 1}`.
/// The alphabet is derived from the axiom and rules.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LSystemSpec {
    axiom: String,
    #[serde(default)]
    rules: BTreeMap<String, String>,
    angle_deg: f64,
    #[serde(default = "default_step")]
    step: f64,
}

fn default_step() -> f64 {
    1.0
}

impl LSystem {
    pub fn new(
        axiom: &str,
        rules: BTreeMap<char, String>,
        angle_deg: f64,
        step: f64,
    ) -> Result<Self, GenerativeError> {
        let mut alphabet: BTreeSet<char> = axiom.chars().collect();
        for (lhs, rhs) in &rules {
            alphabet.insert(*lhs);
            alphabet.extend(rhs.chars());
        }
        let ls = LSystem {
            alphabet,
            axiom: axiom.to_string(),
            rules,
            angle_deg,
            step,
        };
        ls.validate()?;
        Ok(ls)
    }

    pub fn validate(&self) -> Result<(), GenerativeError> {
        if self.axiom.is_empty() {
            return Err(GenerativeError::InvalidLSystem("empty axiom".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(GenerativeError::InvalidLSystem("step must be positive".into()));
        }
        if !self.angle_deg.is_finite() {
            return Err(GenerativeError::InvalidLSystem("angle must be finite".into()));
        }
        for ch in self.axiom.chars() {
            if !self.alphabet.contains(&ch) {
                return Err(GenerativeError::InvalidLSystem(format!(
                    "axiom symbol {ch:?} not in alphabet"
                )));
            }
        }
        for (lhs, rhs) in &self.rules {
            if !self.alphabet.contains(lhs) {
                return Err(GenerativeError::InvalidLSystem(format!(
                    "rule symbol {lhs:?} not in alphabet"
                )));
            }
            for ch in rhs.chars() {
                if !self.alphabet.contains(&ch) {
                    return Err(GenerativeError::InvalidLSystem(format!(
                        "rule for {lhs:?} produces {ch:?} outside the alphabet"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, GenerativeError> {
        let spec: LSystemSpec = serde_json::from_str(text)
            .map_err(|e| GenerativeError::InvalidLSystem(format!("bad json: {e}")))?;
        let mut rules = BTreeMap::new();
        for (lhs, rhs) in spec.rules {
            let mut chars = lhs.chars();
            let (Some(symbol), None) = (chars.next(), chars.next()) else {
                return Err(GenerativeError::InvalidLSystem(format!(
                    "rule key `{lhs}` must be a single symbol"
                )));
            };
            rules.insert(symbol, rhs);
        }
        LSystem::new(&spec.axiom, rules, spec.angle_deg, spec.step)
    }
}

/// Caps on rewriting so a typo cannot eat all memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpandLimits {
    pub max_iterations: usize,
    pub max_symbols: usize,
}

impl Default for ExpandLimits {
    fn default() -> Self {
        ExpandLimits {
            max_iterations: 12,
            max_symbols: 10_000_000,
        }
    }
}

/// Apply all rules simultaneously `iterations` times, under the default
/// caps (12 iterations, 10^7 symbols).
pub fn lsystem_expand(ls: &LSystem, iterations: usize) -> Result<String, GenerativeError> {
    lsystem_expand_with(ls, iterations, ExpandLimits::default())
}

pub fn lsystem_expand_with(
    ls: &LSystem,
    iterations: usize,
    limits: ExpandLimits,
) -> Result<String, GenerativeError> {
    ls.validate()?;
    if iterations > limits.max_iterations {
        return Err(GenerativeError::IterationCapExceeded {
            requested: iterations,
            cap: limits.max_iterations,
        });
    }
    let mut current = ls.axiom.clone();
    for _ in 0..iterations {
        // Predict the output length before building it.
        let next_len: u128 = current
            .chars()
            .map(|ch| ls.rules.get(&ch).map_or(1u128, |r| r.chars().count() as u128))
            .sum();
        if next_len > limits.max_symbols as u128 {
            return Err(GenerativeError::ExpansionTooLarge {
                symbols: next_len,
                cap: limits.max_symbols,
            });
        }
        let mut next = String::with_capacity(next_len as usize);
        for ch in current.chars() {
            match ls.rules.get(&ch) {
                Some(rhs) => next.push_str(rhs),
                None => next.push(ch),
            }
        }
        current = next;
    }
    Ok(current)
}

/// Raw turtle interpretation: drawn chains of points in turtle
/// coordinates (start at the origin, heading straight up, `step` units
/// per `F`). Chains break where the pen jumps (`f` or a bracket pop).
pub fn turtle_trace(expanded: &str, ls: &LSystem) -> Result<Vec<Vec<Point>>, GenerativeError> {
    let mut chains: Vec<Vec<Point>> = Vec::new();
    let mut chain: Vec<Point> = vec![Point::new(0.0, 0.0)];
    let mut pos = Point::new(0.0, 0.0);
    // Screen coordinates grow downward, so "up" is -90 degrees.
    let mut heading = -90f64.to_radians();
    let mut stack: Vec<(Point, f64)> = Vec::new();

    let mut commit = |chain: &mut Vec<Point>, start: Point| {
        if chain.len() > 1 {
            chains.push(std::mem::take(chain));
        } else {
            chain.clear();
        }
        chain.push(start);
    };

    for ch in expanded.chars() {
        match ch {
            'F' => {
                pos = Point::new(pos.x + heading.cos() * ls.step, pos.y + heading.sin() * ls.step);
                chain.push(pos);
            }
            'f' => {
                pos = Point::new(pos.x + heading.cos() * ls.step, pos.y + heading.sin() * ls.step);
                commit(&mut chain, pos);
            }
            '+' => heading += ls.angle_deg.to_radians(),
            '-' | '\u{2212}' => heading -= ls.angle_deg.to_radians(),
            '[' => stack.push((pos, heading)),
            ']' => {
                let Some((p, h)) = stack.pop() else {
                    return Err(GenerativeError::UnbalancedBrackets);
                };
                pos = p;
                heading = h;
                commit(&mut chain, pos);
            }
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(GenerativeError::UnbalancedBrackets);
    }
    if chain.len() > 1 {
        chains.push(chain);
    }
    Ok(chains)
}

/// Turtle-render an expanded string, normalized to fit a unit viewbox
/// with the aspect ratio preserved and the short axis centred.
pub fn lsystem_turtle(expanded: &str, ls: &LSystem) -> Result<Group, GenerativeError> {
    let chains = turtle_trace(expanded, ls)?;
    let mut group = Group::new();
    if chains.is_empty() {
        return Ok(group);
    }

    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in chains.iter().flatten() {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    let w = max.x - min.x;
    let h = max.y - min.y;
    let extent = w.max(h);
    let s = if extent > 0.0 { 1.0 / extent } else { 1.0 };
    let ox = (1.0 - w * s) / 2.0;
    let oy = (1.0 - h * s) / 2.0;

    for chain in chains {
        let points: Vec<Point> = chain
            .iter()
            .map(|p| Point::new((p.x - min.x) * s + ox, (p.y - min.y) * s + oy))
            .collect();
        group.push(Primitive::Polyline(Polyline {
            points,
            style: Style::stroked([30, 30, 30], 0.002),
        }));
    }
    Ok(group)
}
