//! Constant-factor approximation for a fixed link capacity `M`.
//!
//! On top of the LP traces (capacity `M`) the algorithm keeps two reserves
//! summing to `(1 + HIBU) M = sqrt(3) M`, for a total link capacity of
//! `ARAT M`. A packet is accepted outright when the sender's reserve stays at
//! or above `HIBU M / 2` afterwards. Little-accepted packets that do not fit
//! are rejected. An almost-accepted packet that does not fit opens a window:
//! [`divide`] scans ahead until the sender's reserve recovers, runs out, or
//! the sequence ends, and [`reject_big`] drops the heaviest undecided packets
//! when it runs out.
//!
//! Both directions share one code path: every step looks at the reserves
//! from the sender's side.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_bound::{validate_fractional, FractionalSolution};
use crate::model::{CostBreakdown, Decision, DecisionSolution, Direction, Instance, TAU};

pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Approximation ratio for a fixed capacity, `1 + sqrt(3)`.
    pub arat: f64,
    /// Reserve threshold factor, `sqrt(3) - 1`.
    pub hibu: f64,
    /// Fraction `y/x` separating little from almost accepted packets.
    pub little_threshold: f64,
}

impl Constants {
    pub const STANDARD: Constants = Constants {
        arat: 1.0 + SQRT_3,
        hibu: SQRT_3 - 1.0,
        little_threshold: SQRT_3 / (1.0 + SQRT_3),
    };
}

impl Default for Constants {
    fn default() -> Self {
        Constants::STANDARD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PacketClass {
    Little,
    Almost,
    Full,
}

impl PacketClass {
    /// Almost or full.
    pub fn is_almost(self) -> bool {
        !matches!(self, PacketClass::Little)
    }
}

impl fmt::Display for PacketClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PacketClass::Little => "little",
            PacketClass::Almost => "almost",
            PacketClass::Full => "full",
        })
    }
}

pub fn classify(y: f64, x: f64) -> Result<PacketClass> {
    classify_with(&Constants::STANDARD, y, x)
}

pub fn classify_with(c: &Constants, y: f64, x: f64) -> Result<PacketClass> {
    if !(x > 0.0) || !(y >= -TAU) || y > x + TAU {
        return Err(Error::invalid(format!("classify needs 0 <= y <= x and x > 0, got y={y}, x={x}")));
    }
    Ok(if y >= x - TAU {
        PacketClass::Full
    } else if y / x >= c.little_threshold - TAU {
        PacketClass::Almost
    } else {
        PacketClass::Little
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Balanced,
    Left,
    Right,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Balanced => "balanced",
            Phase::Left => "left",
            Phase::Right => "right",
        })
    }
}

pub fn phase_of(reserve_left: f64, reserve_right: f64, threshold: f64) -> Phase {
    if reserve_left < threshold - TAU {
        Phase::Left
    } else if reserve_right < threshold - TAU {
        Phase::Right
    } else {
        Phase::Balanced
    }
}

/// Outcome of one window scan. Positions are 0-based; "sender" refers to the
/// direction of the packet that opened the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    /// Opposite-direction packets, all accepted.
    pub accept_set: Vec<usize>,
    /// Little-accepted sender-direction packets, all rejected.
    pub reject_set: Vec<usize>,
    /// Almost-accepted sender-direction packets, decided by [`reject_big`].
    pub undecided: Vec<usize>,
    /// Sender reserve after simulating the window.
    pub r_after: f64,
    /// Last position covered by the window.
    pub end_index: usize,
}

/// Window scan opened by packet `i` with sender reserve `r_left`.
pub fn divide(instance: &Instance, capacity: f64, frac: &FractionalSolution, r_left: f64, i: usize) -> Result<WindowResult> {
    let c = Constants::STANDARD;
    let classes = classes_of(&c, instance, frac)?;
    let p = instance
        .packets()
        .get(i)
        .ok_or_else(|| Error::invalid(format!("window start {i} out of range")))?;
    if !classes[i].is_almost() {
        return Err(Error::invalid(format!("window start {} is little-accepted", p.index)));
    }
    Ok(divide_scan(instance, frac, &classes, c.hibu * capacity / 2.0, r_left, i))
}

fn divide_scan(
    instance: &Instance,
    frac: &FractionalSolution,
    classes: &[PacketClass],
    threshold: f64,
    r_left: f64,
    i: usize,
) -> WindowResult {
    let packets = instance.packets();
    let sender = packets[i].direction;
    let mut r = r_left - (packets[i].weight - frac.y[i]);
    let mut w = WindowResult {
        accept_set: Vec::new(),
        reject_set: Vec::new(),
        undecided: vec![i],
        r_after: r,
        end_index: i,
    };
    let mut j = i;
    while r >= 0.0 && r < threshold && j + 1 < packets.len() {
        j += 1;
        let (x, y) = (packets[j].weight, frac.y[j]);
        if packets[j].direction == sender {
            if classes[j].is_almost() {
                r -= x - y;
                w.undecided.push(j);
            } else {
                r += y;
                w.reject_set.push(j);
            }
        } else {
            r += x - y;
            w.accept_set.push(j);
        }
    }
    w.r_after = r;
    w.end_index = j;
    w
}

/// Moves the heaviest candidates (ties: lower position first) into the
/// rejected set until the sender reserve is back at `HIBU M / 2`.
pub fn reject_big(instance: &Instance, candidates: &[usize], r_left: f64, capacity: f64) -> Result<(Vec<usize>, f64)> {
    reject_big_until(instance, candidates, r_left, Constants::STANDARD.hibu * capacity / 2.0)
}

fn reject_big_until(instance: &Instance, candidates: &[usize], r_left: f64, threshold: f64) -> Result<(Vec<usize>, f64)> {
    let packets = instance.packets();
    let mut order = candidates.to_vec();
    order.sort_by(|&a, &b| packets[b].weight.total_cmp(&packets[a].weight).then(a.cmp(&b)));
    let mut r = r_left;
    let mut removed = Vec::new();
    let mut it = order.into_iter();
    while r < threshold - TAU {
        let k = it.next().ok_or_else(|| {
            Error::Invariant(format!(
                "reject_big exhausted its candidates with reserve {r} below threshold {threshold}"
            ))
        })?;
        r += packets[k].weight;
        removed.push(k);
    }
    Ok((removed, r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub position: usize,
    pub direction: Direction,
    pub weight: f64,
    pub y: f64,
    pub class: PacketClass,
    pub phase_before: Phase,
    pub phase: Phase,
    pub decision: Decision,
    pub reserve_left: f64,
    pub reserve_right: f64,
    pub window_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub id: usize,
    pub start: usize,
    pub end: usize,
    pub scan: WindowResult,
    /// Undecided packets finally rejected.
    pub rejected_big: Vec<usize>,
    /// Little packets accepted by the feasibility guard instead of rejected.
    pub rescued: Vec<usize>,
    /// Number of corrections made by the feasibility guard.
    pub guard_events: usize,
    /// LP cost over the undecided set, `sum f (x - y) + m (x - y) / x`.
    pub undecided_lp_cost: f64,
    /// Rejection cost over `rejected_big`.
    pub rejected_big_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ApproxTrace {
    pub steps: Vec<StepRecord>,
    pub windows: Vec<WindowRecord>,
    pub guard_events: usize,
}

impl ApproxTrace {
    /// `step,dir,weight,y,class,phase,decision,RL,RR,window_id`.
    pub fn to_csv(&self) -> String {
        self.to_csv_mapped(None)
    }

    /// As [`to_csv`](Self::to_csv), numbering steps by `original[position]`
    /// when the run was on a sub-instance.
    pub fn to_csv_mapped(&self, original: Option<&[usize]>) -> String {
        let mut out = String::from("step,dir,weight,y,class,phase,decision,RL,RR,window_id\n");
        for s in &self.steps {
            let window = s.window_id.map(|w| w.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{:.9},{:.9},{},{},{},{:.9},{:.9},{}\n",
                original.map_or(s.position, |o| o[s.position]) + 1,
                s.direction,
                s.weight,
                s.y,
                s.class,
                s.phase,
                s.decision.as_char(),
                s.reserve_left,
                s.reserve_right,
                window
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxRun {
    pub solution: DecisionSolution,
    pub trace: ApproxTrace,
}

/// Runs the approximation on `instance` (every weight must fit `capacity`)
/// with LP solution `frac`. `forced_cost` is added to the rejection cost.
pub fn run_approx(instance: &Instance, capacity: f64, frac: &FractionalSolution, forced_cost: f64) -> Result<ApproxRun> {
    let engine = Engine::standard(instance, capacity, frac)?;
    let mut hook = NoShift;
    let out = engine.run(&mut hook)?;
    let c = engine.constants;
    Ok(engine.finish(out, c.arat * capacity, forced_cost))
}

pub(crate) struct EngineConfig {
    pub threshold: f64,
    pub total: f64,
    pub start: f64,
    /// Lowest value a reserve may take.
    pub floor: f64,
}

/// Adjusts reserves for the given positions before they are processed.
pub(crate) trait ReserveHook {
    fn apply(&mut self, positions: Range<usize>, reserves: &mut Reserves, cfg: &EngineConfig);
}

struct NoShift;

impl ReserveHook for NoShift {
    fn apply(&mut self, _: Range<usize>, _: &mut Reserves, _: &EngineConfig) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Reserves {
    pub left: f64,
    pub right: f64,
}

impl Reserves {
    fn sender(&mut self, d: Direction) -> (&mut f64, &mut f64) {
        match d {
            Direction::LeftToRight => (&mut self.left, &mut self.right),
            Direction::RightToLeft => (&mut self.right, &mut self.left),
        }
    }

    fn from_sender(d: Direction, send: f64, recv: f64) -> Self {
        match d {
            Direction::LeftToRight => Reserves { left: send, right: recv },
            Direction::RightToLeft => Reserves { left: recv, right: send },
        }
    }
}

pub(crate) struct Engine<'a> {
    pub instance: &'a Instance,
    pub frac: &'a FractionalSolution,
    pub constants: Constants,
    pub cfg: EngineConfig,
    classes: Vec<PacketClass>,
}

pub(crate) struct EngineOutput {
    pub decisions: Vec<Decision>,
    pub trace: ApproxTrace,
}

fn classes_of(c: &Constants, instance: &Instance, frac: &FractionalSolution) -> Result<Vec<PacketClass>> {
    instance
        .packets()
        .iter()
        .zip(&frac.y)
        .map(|(p, &y)| classify_with(c, y.clamp(0.0, p.weight), p.weight))
        .collect()
}

impl<'a> Engine<'a> {
    pub fn standard(instance: &'a Instance, capacity: f64, frac: &'a FractionalSolution) -> Result<Self> {
        let c = Constants::STANDARD;
        let total = (1.0 + c.hibu) * capacity;
        validate_fractional(instance, frac)?;
        Self::new(
            instance,
            capacity,
            frac,
            c,
            EngineConfig {
                threshold: c.hibu * capacity / 2.0,
                total,
                start: total / 2.0,
                floor: 0.0,
            },
        )
    }

    pub fn new(
        instance: &'a Instance,
        capacity: f64,
        frac: &'a FractionalSolution,
        constants: Constants,
        cfg: EngineConfig,
    ) -> Result<Self> {
        if !(capacity.is_finite() && capacity >= 0.0) {
            return Err(Error::invalid(format!("capacity must be non-negative, got {capacity}")));
        }
        if let Some(p) = instance.packets().iter().find(|p| p.weight > capacity + TAU) {
            return Err(Error::invalid(format!(
                "packet {} of weight {} exceeds capacity {capacity}; preprocess first",
                p.index, p.weight
            )));
        }
        if (frac.capacity - capacity).abs() > TAU * (1.0 + capacity) {
            return Err(Error::invalid("fractional solution was computed for a different capacity"));
        }
        if frac.y.len() != instance.len() || frac.left_trace.len() != instance.len() + 1 {
            return Err(Error::invalid("fractional solution has the wrong dimensions"));
        }
        let classes = classes_of(&constants, instance, frac)?;
        Ok(Engine {
            instance,
            frac,
            constants,
            cfg,
            classes,
        })
    }

    pub fn finish(&self, out: EngineOutput, capacity_cost: f64, forced_cost: f64) -> ApproxRun {
        let rejection: f64 = self
            .instance
            .packets()
            .iter()
            .zip(&out.decisions)
            .filter(|(_, d)| !d.is_accept())
            .map(|(p, _)| self.instance.rejection_cost(p))
            .sum();
        let initial_left = self.frac.left_trace[0] + self.cfg.start - self.cfg.floor;
        ApproxRun {
            solution: DecisionSolution {
                capacity: capacity_cost,
                initial_left,
                decisions: out.decisions,
                cost: CostBreakdown::new(capacity_cost, rejection + forced_cost),
            },
            trace: out.trace,
        }
    }

    fn step(&self, pos: usize, decision: Decision, before: Reserves, after: Reserves, window: Option<usize>) -> StepRecord {
        let p = &self.instance.packets()[pos];
        let h = self.cfg.threshold;
        StepRecord {
            position: pos,
            direction: p.direction,
            weight: p.weight,
            y: self.frac.y[pos],
            class: self.classes[pos],
            phase_before: phase_of(before.left, before.right, h),
            phase: phase_of(after.left, after.right, h),
            decision,
            reserve_left: after.left,
            reserve_right: after.right,
            window_id: window,
        }
    }

    pub fn run(&self, hook: &mut dyn ReserveHook) -> Result<EngineOutput> {
        let packets = self.instance.packets();
        let t = packets.len();
        let h = self.cfg.threshold;
        let floor = self.cfg.floor;
        let mut res = Reserves {
            left: self.cfg.start,
            right: self.cfg.start,
        };
        let mut decisions = vec![Decision::Reject; t];
        let mut trace = ApproxTrace::default();

        let mut i = 0;
        while i < t {
            hook.apply(i..i + 1, &mut res, &self.cfg);
            let p = &packets[i];
            let y = self.frac.y[i];
            let gap = p.weight - y;
            let before = res;
            let (send, recv) = res.sender(p.direction);

            if *send - gap >= h - TAU {
                *send -= gap;
                *recv += gap;
                decisions[i] = Decision::Accept;
                trace.steps.push(self.step(i, Decision::Accept, before, res, None));
                i += 1;
                continue;
            }
            if self.classes[i] == PacketClass::Little {
                if *recv - y >= floor - TAU {
                    *send += y;
                    *recv -= y;
                    decisions[i] = Decision::Reject;
                    trace.steps.push(self.step(i, Decision::Reject, before, res, None));
                } else if *send - gap >= floor - TAU {
                    // Rejection would overdraw the receiver's reserve.
                    *send -= gap;
                    *recv += gap;
                    decisions[i] = Decision::Accept;
                    trace.guard_events += 1;
                    trace.steps.push(self.step(i, Decision::Accept, before, res, None));
                } else {
                    return Err(Error::Invariant(format!(
                        "packet {} can be neither accepted nor rejected (reserves {:?})",
                        p.index, before
                    )));
                }
                i += 1;
                continue;
            }

            let start_send = *send;
            let window_id = trace.windows.len();
            let (record, final_send) =
                self.run_window(i, start_send, window_id, &mut decisions, &mut trace, p.direction)?;
            let end = record.end;
            res = Reserves::from_sender(p.direction, final_send, self.cfg.total - final_send);
            trace.guard_events += record.guard_events;
            trace.windows.push(record);
            hook.apply(i + 1..end + 1, &mut res, &self.cfg);
            i = end + 1;
        }
        Ok(EngineOutput { decisions, trace })
    }

    /// Scans, prunes, and commits one window; returns its record and the
    /// sender reserve after it.
    fn run_window(
        &self,
        i: usize,
        start_send: f64,
        id: usize,
        decisions: &mut [Decision],
        trace: &mut ApproxTrace,
        sender: Direction,
    ) -> Result<(WindowRecord, f64)> {
        let packets = self.instance.packets();
        let h = self.cfg.threshold;
        let floor = self.cfg.floor;
        let scan = divide_scan(self.instance, self.frac, &self.classes, h, start_send, i);

        let eligible = |u: &[usize], taken: &[usize]| -> Vec<usize> {
            u.iter()
                .copied()
                .filter(|k| self.classes[*k] != PacketClass::Full && !taken.contains(k))
                .collect()
        };

        let mut rejected_big = Vec::new();
        if scan.r_after < 0.0 {
            let (removed, _) = reject_big_until(self.instance, &eligible(&scan.undecided, &[]), scan.r_after, h)?;
            rejected_big = removed;
        }

        // Replay the window with its final decisions; repair any step that
        // would overdraw a reserve.
        let mut rescued: Vec<usize> = Vec::new();
        let mut guard_events = 0;
        let window_steps = loop {
            let mut send = start_send;
            let mut steps = Vec::with_capacity(scan.end_index - i + 1);
            let mut violation = None;
            for k in i..=scan.end_index {
                let p = &packets[k];
                let (x, y) = (p.weight, self.frac.y[k]);
                let before = send;
                let accept = if p.direction != sender {
                    send += x - y;
                    true
                } else if rejected_big.contains(&k) || (scan.reject_set.contains(&k) && !rescued.contains(&k)) {
                    send += y;
                    false
                } else {
                    send -= x - y;
                    true
                };
                let recv = self.cfg.total - send;
                if send < floor - TAU {
                    violation = Some(Violation::Sender);
                } else if recv < floor - TAU {
                    violation = Some(if !accept && scan.reject_set.contains(&k) {
                        Violation::Receiver(k)
                    } else {
                        Violation::Fatal(k)
                    });
                }
                if violation.is_some() {
                    break;
                }
                let decision = if accept { Decision::Accept } else { Decision::Reject };
                steps.push((k, decision, before, send));
            }
            match violation {
                None => break steps,
                Some(Violation::Sender) => {
                    let pool = eligible(&scan.undecided, &rejected_big);
                    let next = pool
                        .into_iter()
                        .min_by(|&a, &b| packets[b].weight.total_cmp(&packets[a].weight).then(a.cmp(&b)))
                        .ok_or_else(|| {
                            Error::Invariant(format!("window at packet {} cannot be made feasible", i + 1))
                        })?;
                    rejected_big.push(next);
                }
                Some(Violation::Receiver(k)) => rescued.push(k),
                Some(Violation::Fatal(k)) => {
                    return Err(Error::Invariant(format!(
                        "window at packet {} overdraws the receiving reserve at packet {}",
                        i + 1,
                        k + 1
                    )))
                }
            }
            guard_events += 1;
        };

        let final_send = window_steps.last().map_or(start_send, |s| s.3);
        for (k, decision, before, after) in window_steps {
            decisions[k] = decision;
            let b = Reserves::from_sender(sender, before, self.cfg.total - before);
            let a = Reserves::from_sender(sender, after, self.cfg.total - after);
            trace.steps.push(self.step(k, decision, b, a, Some(id)));
        }

        let (f, m) = (self.instance.f(), self.instance.m());
        let undecided_lp_cost = scan
            .undecided
            .iter()
            .map(|&k| {
                let x = packets[k].weight;
                let gap = x - self.frac.y[k];
                f * gap + m * gap / x
            })
            .sum();
        let rejected_big_cost = rejected_big.iter().map(|&k| self.instance.rejection_cost(&packets[k])).sum();
        let record = WindowRecord {
            id,
            start: i,
            end: scan.end_index,
            scan,
            rejected_big,
            rescued,
            guard_events,
            undecided_lp_cost,
            rejected_big_cost,
        };
        Ok((record, final_send))
    }
}

enum Violation {
    Sender,
    Receiver(usize),
    Fatal(usize),
}
