//! Domain types for a single rechargeable link and the instance text format.
//!
//! A link has a fixed total capacity that is split between its left and
//! right ends. Accepting a left-to-right packet of weight `x` moves `x` from
//! the left end to the right end; rejecting it costs `f * x + m`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global feasibility tolerance.
pub const TAU: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

impl Direction {
    pub fn token(self) -> &'static str {
        match self {
            Direction::LeftToRight => "->",
            Direction::RightToLeft => "<-",
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::LeftToRight => Direction::RightToLeft,
            Direction::RightToLeft => Direction::LeftToRight,
        }
    }

    /// +1 for left-to-right, -1 for right-to-left: the sign with which an
    /// accepted weight enters the left-end drain.
    pub fn sign(self) -> f64 {
        match self {
            Direction::LeftToRight => 1.0,
            Direction::RightToLeft => -1.0,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub weight: f64,
    pub direction: Direction,
    /// 1-based position in the instance.
    pub index: usize,
}

/// An ordered packet sequence together with the rejection cost constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    f: f64,
    m: f64,
    packets: Vec<Packet>,
}

impl Instance {
    pub fn new(f: f64, m: f64, packets: impl IntoIterator<Item = (Direction, f64)>) -> Result<Self> {
        if !(f.is_finite() && f >= 0.0) {
            return Err(Error::invalid(format!("f must be a non-negative number, got {f}")));
        }
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::invalid(format!("m must be a non-negative number, got {m}")));
        }
        let mut out = Vec::new();
        for (k, (direction, weight)) in packets.into_iter().enumerate() {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::invalid(format!(
                    "packet {} has non-positive weight {weight}",
                    k + 1
                )));
            }
            out.push(Packet {
                weight,
                direction,
                index: k + 1,
            });
        }
        Ok(Instance { f, m, packets: out })
    }

    pub fn empty(f: f64, m: f64) -> Result<Self> {
        Self::new(f, m, std::iter::empty())
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.packets.iter().map(|p| p.weight)
    }

    /// Cost of rejecting `packet`: `f * weight + m`.
    pub fn rejection_cost(&self, packet: &Packet) -> f64 {
        rejection_cost(self.f, self.m, packet.weight)
    }

    /// Total cost of rejecting every packet.
    pub fn reject_all_cost(&self) -> f64 {
        self.packets.iter().map(|p| self.rejection_cost(p)).sum()
    }

    /// Sub-instance made of the packets at the given 0-based positions, in
    /// the order given.
    pub fn select(&self, positions: &[usize]) -> Instance {
        let packets = positions
            .iter()
            .enumerate()
            .map(|(k, &pos)| Packet {
                index: k + 1,
                ..self.packets[pos]
            })
            .collect();
        Instance {
            f: self.f,
            m: self.m,
            packets,
        }
    }

    /// The same sequence with every direction reversed.
    pub fn mirrored(&self) -> Instance {
        Instance {
            f: self.f,
            m: self.m,
            packets: self
                .packets
                .iter()
                .map(|p| Packet {
                    direction: p.direction.flip(),
                    ..*p
                })
                .collect(),
        }
    }

    /// Serializes into the `wps v1` text format.
    pub fn to_text(&self) -> String {
        let mut s = format!("wps v1\nf {}\nm {}\n", fmt_decimal(self.f), fmt_decimal(self.m));
        for p in &self.packets {
            s.push_str(p.direction.token());
            s.push(' ');
            s.push_str(&fmt_decimal(p.weight));
            s.push('\n');
        }
        s
    }
}

pub fn rejection_cost(f: f64, m: f64, weight: f64) -> f64 {
    f * weight + m
}

// Shortest round-trip representation; Rust never uses exponent notation in
// `Display` for f64, which keeps the output inside the decimal grammar.
fn fmt_decimal(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn is_accept(self) -> bool {
        matches!(self, Decision::Accept)
    }

    pub fn as_char(self) -> char {
        match self {
            Decision::Accept => 'A',
            Decision::Reject => 'R',
        }
    }
}

/// Renders decisions as an `A`/`R` string.
pub fn decision_string(decisions: &[Decision]) -> String {
    decisions.iter().map(|d| d.as_char()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub capacity_cost: f64,
    pub rejection_cost: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(capacity_cost: f64, rejection_cost: f64) -> Self {
        CostBreakdown {
            capacity_cost,
            rejection_cost,
            total: capacity_cost + rejection_cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionSolution {
    pub capacity: f64,
    pub initial_left: f64,
    pub decisions: Vec<Decision>,
    pub cost: CostBreakdown,
}

impl DecisionSolution {
    pub fn reject_all(instance: &Instance) -> Self {
        DecisionSolution {
            capacity: 0.0,
            initial_left: 0.0,
            decisions: vec![Decision::Reject; instance.len()],
            cost: CostBreakdown::new(0.0, instance.reject_all_cost()),
        }
    }

    pub fn decision_string(&self) -> String {
        decision_string(&self.decisions)
    }
}

/// Sum of rejection costs over the rejected packets.
pub fn rejected_cost(instance: &Instance, decisions: &[Decision]) -> f64 {
    instance
        .packets()
        .iter()
        .zip(decisions)
        .filter(|(_, d)| !d.is_accept())
        .map(|(p, _)| instance.rejection_cost(p))
        .sum()
}

/// Minimum total capacity needed to carry out `decisions`, and the left-end
/// starting amount that achieves it.
///
/// With `P_i` the signed drain of the left end after `i` packets, the range
/// `max P - min P` is both necessary and sufficient; starting with `max P`
/// on the left keeps both ends inside `[0, M]`.
pub fn min_capacity_for_decisions(instance: &Instance, decisions: &[Decision]) -> Result<(f64, f64)> {
    if decisions.len() != instance.len() {
        return Err(Error::invalid(format!(
            "decision vector has length {}, instance has {} packets",
            decisions.len(),
            instance.len()
        )));
    }
    let mut drain = 0.0f64;
    let mut hi = 0.0f64;
    let mut lo = 0.0f64;
    for (p, d) in instance.packets().iter().zip(decisions) {
        if d.is_accept() {
            drain += p.direction.sign() * p.weight;
            hi = hi.max(drain);
            lo = lo.min(drain);
        }
    }
    Ok((hi - lo, hi))
}

/// Capacity needed to accept every packet.
pub fn m_max(instance: &Instance) -> f64 {
    let all = vec![Decision::Accept; instance.len()];
    min_capacity_for_decisions(instance, &all)
        .map(|(cap, _)| cap)
        .unwrap_or(0.0)
}

pub fn x_min(instance: &Instance) -> Result<f64> {
    instance
        .weights()
        .reduce(f64::min)
        .ok_or_else(|| Error::invalid("x_min of an empty instance"))
}

/// Replays `decisions` on a link of total `capacity` starting with
/// `initial_left` on the left end. Returns the index (0-based) of the first
/// packet whose acceptance would drive an end below `-TAU`.
pub fn replay(instance: &Instance, capacity: f64, initial_left: f64, decisions: &[Decision]) -> Result<(), usize> {
    if initial_left < -TAU || initial_left > capacity + TAU {
        return Err(0);
    }
    let mut left = initial_left;
    for (k, (p, d)) in instance.packets().iter().zip(decisions).enumerate() {
        if d.is_accept() {
            left -= p.direction.sign() * p.weight;
            if left < -TAU || left > capacity + TAU {
                return Err(k);
            }
        }
    }
    Ok(())
}

/// Parses the `wps v1` instance format.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut header_seen = false;
    let mut f = None;
    let mut m = None;
    let mut packets = Vec::new();
    let mut last_line = 0;

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if !header_seen {
            if tokens != ["wps", "v1"] {
                return Err(Error::parse(line_no, "malformed header, expected `wps v1`"));
            }
            header_seen = true;
            continue;
        }
        if f.is_none() {
            f = Some(parse_constant(&tokens, "f", line_no)?);
            continue;
        }
        if m.is_none() {
            m = Some(parse_constant(&tokens, "m", line_no)?);
            continue;
        }
        if tokens.len() != 2 {
            return Err(Error::parse(line_no, "expected `<direction> <weight>`"));
        }
        let direction = match tokens[0] {
            "->" => Direction::LeftToRight,
            "<-" => Direction::RightToLeft,
            other => return Err(Error::parse(line_no, format!("unknown direction token `{other}`"))),
        };
        let weight = parse_weight(tokens[1], line_no)?;
        packets.push((direction, weight));
    }

    if !header_seen {
        return Err(Error::parse(last_line.max(1), "malformed header, expected `wps v1`"));
    }
    let f = f.ok_or_else(|| Error::parse(last_line + 1, "missing f line"))?;
    let m = m.ok_or_else(|| Error::parse(last_line + 1, "missing m line"))?;
    Instance::new(f, m, packets)
}

fn parse_constant(tokens: &[&str], name: &str, line: usize) -> Result<f64> {
    if tokens.len() != 2 || tokens[0] != name {
        return Err(Error::parse(line, format!("missing {name} line")));
    }
    if tokens[1].starts_with('-') {
        return Err(Error::parse(line, format!("negative {name}")));
    }
    parse_decimal(tokens[1]).ok_or_else(|| Error::parse(line, format!("malformed decimal `{}`", tokens[1])))
}

fn parse_weight(token: &str, line: usize) -> Result<f64> {
    if let Some(rest) = token.strip_prefix('-') {
        if parse_decimal(rest).is_some() {
            return Err(Error::parse(line, "non-positive weight"));
        }
    }
    let w = parse_decimal(token).ok_or_else(|| Error::parse(line, format!("malformed decimal `{token}`")))?;
    if w <= 0.0 {
        return Err(Error::parse(line, "non-positive weight"));
    }
    Ok(w)
}

/// Unsigned decimal: digits with an optional fractional part.
pub(crate) fn parse_decimal(token: &str) -> Option<f64> {
    let (int, frac) = match token.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (token, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || frac.is_some_and(|f| !digits(f)) {
        return None;
    }
    token.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction::*;

    fn inst(f: f64, m: f64, ps: &[(Direction, f64)]) -> Instance {
        Instance::new(f, m, ps.iter().copied()).unwrap()
    }

    #[test]
    fn parses_basic_file() {
        let i = parse_instance("wps v1\nf 0.75\nm 0\n-> 1\n<- 3").unwrap();
        assert_eq!(i.f(), 0.75);
        assert_eq!(i.m(), 0.0);
        let ps: Vec<_> = i.packets().iter().map(|p| (p.direction, p.weight, p.index)).collect();
        assert_eq!(ps, vec![(LeftToRight, 1.0, 1), (RightToLeft, 3.0, 2)]);
    }

    #[test]
    fn parses_empty_sequence() {
        let i = parse_instance("wps v1\nf 1\nm 0\n").unwrap();
        assert!(i.is_empty());
    }

    #[test]
    fn negative_weight_reports_line() {
        let err = parse_instance("wps v1\nf 1\nm 0\n-> -2").unwrap_err();
        assert_eq!(err.to_string(), "non-positive weight, line 4");
    }

    #[test]
    fn zero_weight_rejected() {
        let err = parse_instance("wps v1\nf 1\nm 0\n<- 0.0").unwrap_err();
        assert_eq!(err, Error::parse(4, "non-positive weight"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# leading comment\n\nwps v1 # header\nf 2.5\n\nm 1\n-> 4 # first\n# gap\n<- 0.5\n";
        let i = parse_instance(text).unwrap();
        assert_eq!(i.len(), 2);
        assert_eq!(i.f(), 2.5);
        assert_eq!(i.packets()[1].weight, 0.5);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_instance("wps v2\nf 1\nm 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_instance("wps v1\nm 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_instance("wps v1\nf 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_instance("wps v1\nf 1\nm 0\n=> 1"), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_instance("wps v1\nf 1\nm 0\n-> +1"), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_instance("wps v1\nf 1\nm 0\n-> 1."), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_instance("wps v1\nf 1\nm 0\n-> 1e3"), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_instance("wps v1\nf -1\nm 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_instance(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn rejection_cost_formula() {
        let p = |w| Packet {
            weight: w,
            direction: LeftToRight,
            index: 1,
        };
        assert_eq!(inst(0.75, 0.0, &[]).rejection_cost(&p(4.0)), 3.0);
        assert_eq!(inst(0.0, 0.0, &[]).rejection_cost(&p(7.0)), 0.0);
        assert_eq!(inst(2.0, 1.0, &[]).rejection_cost(&p(0.5)), 2.0);
    }

    #[test]
    fn min_capacity_examples() {
        use Decision::*;
        let i = inst(1.0, 0.0, &[(LeftToRight, 2.0), (RightToLeft, 3.0), (LeftToRight, 1.0)]);
        assert_eq!(min_capacity_for_decisions(&i, &[Accept, Accept, Accept]).unwrap(), (3.0, 2.0));
        assert_eq!(min_capacity_for_decisions(&i, &[Reject, Reject, Reject]).unwrap(), (0.0, 0.0));
        let j = inst(1.0, 0.0, &[(LeftToRight, 1.0), (RightToLeft, 1.0)]);
        assert_eq!(min_capacity_for_decisions(&j, &[Accept, Accept]).unwrap(), (1.0, 1.0));
        assert!(min_capacity_for_decisions(&j, &[Accept]).is_err());
    }

    #[test]
    fn m_max_and_x_min() {
        assert_eq!(m_max(&inst(1.0, 0.0, &[(LeftToRight, 1.0), (RightToLeft, 1.0)])), 1.0);
        assert_eq!(m_max(&inst(1.0, 0.0, &[])), 0.0);
        assert_eq!(m_max(&inst(1.0, 0.0, &[(LeftToRight, 1.0), (LeftToRight, 2.0)])), 3.0);
        let w = |ws: &[f64]| inst(1.0, 0.0, &ws.iter().map(|&w| (LeftToRight, w)).collect::<Vec<_>>());
        assert_eq!(x_min(&w(&[3.0, 1.0, 2.0])).unwrap(), 1.0);
        assert_eq!(x_min(&w(&[5.0])).unwrap(), 5.0);
        assert_eq!(x_min(&w(&[0.25, 0.5])).unwrap(), 0.25);
        assert!(x_min(&w(&[])).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let i = inst(0.1, 3.0, &[(LeftToRight, 0.3), (RightToLeft, 12.0), (LeftToRight, 1e-7)]);
        assert_eq!(parse_instance(&i.to_text()).unwrap(), i);
    }
}
