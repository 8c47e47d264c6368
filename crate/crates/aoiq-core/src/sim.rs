//! Exact slot-by-slot simulation of the four queue disciplines.
//!
//! # Timing model
//!
//! Time advances in integer slots `t = 0, 1, 2, …`. At most one packet
//! arrives per slot, at the **start** of the slot; the first packet of every
//! run arrives at slot 0. Deliveries happen at the **end** of a slot. The
//! monitor age starts at `A(0) = 0` and obeys, at the end of slot `t` with
//! delivered generation times `Y_i`:
//!
//! `A(t+1) = min(min_i (t − Y_i), A(t)) + 1` — or `A(t) + 1` with no
//! delivery. A delivery with `t − Y_i ≥ A(t)` is *stale*: it leaves the age
//! on the `+1` path.
//!
//! Service access differs by discipline, matching the closed forms in
//! [`crate::analytic`]:
//!
//! * **FCFS (with or without vacations)** uses *late arrivals*: a packet
//!   arriving at the start of slot `t` joins the queue at the end of slot
//!   `t`, so its earliest service slot is `t + 1` and the minimum system
//!   time is 2 slots.
//! * **LCFS-preemptive and G/G/∞** use *immediate access*: service can start
//!   in the arrival slot, so a 1-slot service delivers at the end of the
//!   arrival slot (minimum system time 1 slot).
//!
//! A vacation server draws a fresh vacation length whenever it goes idle
//! with an empty queue, repeatedly while the system stays empty; a packet
//! arriving during a vacation begins service the slot after the vacation's
//! last slot.

pub mod invariants;

use crate::analytic::{AnalyticError, ArrivalSpec, Discipline, QueueSpec};
use crate::dist::DiscreteDist;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::io;
use thiserror::Error;

/// Minimum run length accepted by [`run_simulation`].
pub const MIN_TOTAL_SLOTS: u64 = 1_000;

/// Number of non-overlapping batches used for batch-means standard errors.
pub const BATCH_COUNT: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("total_slots must be at least {MIN_TOTAL_SLOTS}, got {0}")]
    TotalSlotsTooSmall(u64),
    #[error("warmup_slots = {warmup} leaves no measurable slots before total_slots = {total}")]
    WarmupTooLong { warmup: u64, total: u64 },
    #[error(
        "unstable queue: utilization rho = {rho} (>= 1); only the saturated \
         unit-service case lambda = 1, S = 1 is admissible at rho = 1"
    )]
    Unstable { rho: f64 },
    #[error("zero useful deliveries in the measured window: nothing to estimate")]
    NoUsefulDeliveries,
    #[error("age trace of length {len} cannot cover warmup {warmup} plus a measurable slot")]
    TraceTooShort { len: usize, warmup: u64 },
    #[error(transparent)]
    Spec(#[from] AnalyticError),
}

/// Simulation parameters.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub spec: QueueSpec,
    /// Number of slots to simulate; the age trace has `total_slots + 1`
    /// entries `A(0) … A(total_slots)`.
    pub total_slots: u64,
    /// Slots discarded from the front before estimating.
    pub warmup_slots: u64,
    /// Seed for the deterministic ChaCha8 random stream.
    pub seed: u64,
    /// Capture the full age/packet trace in the output.
    pub trace_enabled: bool,
}

impl SimConfig {
    pub fn new(spec: QueueSpec, total_slots: u64, warmup_slots: u64, seed: u64) -> Self {
        Self {
            spec,
            total_slots,
            warmup_slots,
            seed,
            trace_enabled: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace_enabled = true;
        self
    }
}

/// What happened to a packet by the end of the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketOutcome {
    /// Delivered and reduced the monitor age below its `+1` path.
    DeliveredFresh,
    /// Delivered, but the monitor already held information at least as
    /// fresh, so the age did not drop.
    DeliveredStale,
    /// Removed from service by a fresher arrival (LCFS only).
    Preempted,
    /// Still queued or in service when the run ended.
    InFlightAtEnd,
}

impl PacketOutcome {
    pub fn label(self) -> &'static str {
        match self {
            PacketOutcome::DeliveredFresh => "delivered_fresh",
            PacketOutcome::DeliveredStale => "delivered_stale",
            PacketOutcome::Preempted => "preempted",
            PacketOutcome::InFlightAtEnd => "in_flight_at_end",
        }
    }

    pub fn is_delivered(self) -> bool {
        matches!(
            self,
            PacketOutcome::DeliveredFresh | PacketOutcome::DeliveredStale
        )
    }
}

/// Per-packet bookkeeping captured when tracing is enabled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketRecord {
    /// Arrival-order index, starting at 0.
    pub id: u64,
    /// Generation (arrival) slot.
    pub generated: u64,
    /// Drawn service length; `None` if the packet never entered service.
    pub service: Option<u64>,
    /// First slot of service.
    pub start: Option<u64>,
    /// Delivery slot (the delivery happens at this slot's end).
    pub end: Option<u64>,
    pub outcome: PacketOutcome,
}

impl PacketRecord {
    /// Inclusive slot span from generation through delivery.
    pub fn system_slots(&self) -> Option<u64> {
        self.end.map(|e| e - self.generated + 1)
    }
}

/// Full capture of one run.
#[derive(Debug, Clone)]
pub struct SimTrace {
    /// `ages[t] = A(t)` for `t = 0 ..= total_slots`.
    pub ages: Vec<u64>,
    /// Every packet generated during the run, in arrival order.
    pub packets: Vec<PacketRecord>,
}

/// Point estimates with batch-means error bars.
///
/// `peak_age >= avg_age` holds for every stationary process measured long
/// enough, but it is *not* asserted here: short or degenerate windows can
/// legitimately violate it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgeEstimate {
    /// Mean of `A(t)` over the measured window.
    pub avg_age: f64,
    /// Mean of `A(t)` over measured slots where `A(t+1) <= A(t)` (the slots
    /// that end with an effective delivery).
    pub peak_age: f64,
    /// Batch-means standard error of `avg_age` (`NaN` below
    /// [`BATCH_COUNT`] samples).
    pub avg_stderr: f64,
    /// Batch-means standard error of `peak_age` (`NaN` below
    /// [`BATCH_COUNT`] samples).
    pub peak_stderr: f64,
    /// Number of measured slots that ended with an effective delivery
    /// (several same-slot deliveries count once).
    pub delivery_count: u64,
    /// Number of slots in the measured window.
    pub slots_measured: u64,
}

/// Result of [`run_simulation`].
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub estimate: AgeEstimate,
    /// Present when [`SimConfig::trace_enabled`] was set.
    pub trace: Option<SimTrace>,
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

/// Standard error of the mean via [`BATCH_COUNT`] non-overlapping batch
/// means over the first `BATCH_COUNT * (len / BATCH_COUNT)` samples; `NaN`
/// when fewer than [`BATCH_COUNT`] samples exist.
fn batch_stderr(samples: &[u64]) -> f64 {
    let b = BATCH_COUNT;
    let m = samples.len() / b;
    if m == 0 {
        return f64::NAN;
    }
    let mut means = [0.0f64; BATCH_COUNT];
    for (i, mean) in means.iter_mut().enumerate() {
        let chunk = &samples[i * m..(i + 1) * m];
        *mean = chunk.iter().map(|&x| x as f64).sum::<f64>() / m as f64;
    }
    let grand = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|x| (x - grand) * (x - grand)).sum::<f64>() / (b as f64 - 1.0);
    (var / b as f64).sqrt()
}

/// Estimates average and peak age from an age trace.
///
/// The measured window is `t = warmup_slots + 1 ..= len − 2` (the last entry
/// only supplies `A(t+1)` for its predecessor). The average is the mean of
/// `A(t)` over the window; the peak is the mean over slots whose next age
/// does not increase, i.e. slots that end with an effective delivery.
///
/// Errors with [`SimError::TraceTooShort`] when the window would be empty
/// and [`SimError::NoUsefulDeliveries`] when no measured slot ends with a
/// delivery.
pub fn estimate_from_trace(ages: &[u64], warmup_slots: u64) -> Result<AgeEstimate, SimError> {
    let len = ages.len();
    if (len as u64) < warmup_slots + 3 {
        return Err(SimError::TraceTooShort {
            len,
            warmup: warmup_slots,
        });
    }
    let lo = (warmup_slots + 1) as usize;
    let hi = len - 2; // inclusive
    let window = &ages[lo..=hi];
    let mut sum: u128 = 0;
    let mut peaks: Vec<u64> = Vec::new();
    let mut peak_sum: u128 = 0;
    for (i, &a) in window.iter().enumerate() {
        sum += a as u128;
        if ages[lo + i + 1] <= a {
            peaks.push(a);
            peak_sum += a as u128;
        }
    }
    if peaks.is_empty() {
        return Err(SimError::NoUsefulDeliveries);
    }
    let n = window.len() as u64;
    Ok(AgeEstimate {
        avg_age: sum as f64 / n as f64,
        peak_age: peak_sum as f64 / peaks.len() as f64,
        avg_stderr: batch_stderr(window),
        peak_stderr: batch_stderr(&peaks),
        delivery_count: peaks.len() as u64,
        slots_measured: n,
    })
}

// ---------------------------------------------------------------------------
// Engine plumbing
// ---------------------------------------------------------------------------

/// Lightweight handle to an in-flight packet.
#[derive(Debug, Clone, Copy)]
struct Pkt {
    gen: u64,
    id: u64,
}

/// A sampling source: a real distribution, or (in unit tests) a scripted
/// sequence for replaying hand-built scenarios slot by slot.
#[derive(Debug)]
enum Draw {
    Dist(DiscreteDist),
    #[cfg(test)]
    Script(VecDeque<u64>),
}

impl Draw {
    fn sample(&mut self, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            Draw::Dist(d) => d.sample(rng),
            #[cfg(test)]
            Draw::Script(q) => q.pop_front().expect("scripted draw sequence exhausted"),
        }
    }
}

/// Arrival generator: first packet at slot 0, then renewal gaps (geometric
/// for Bernoulli arrivals). A zero arrival rate yields exactly one packet.
struct ArrivalStream {
    gap: Option<Draw>,
    next: Option<u64>,
}

impl ArrivalStream {
    fn from_spec(arrival: &ArrivalSpec) -> Result<Self, AnalyticError> {
        let gap = match arrival {
            ArrivalSpec::Bernoulli(l) if *l <= 0.0 => None,
            ArrivalSpec::Bernoulli(l) => Some(Draw::Dist(DiscreteDist::geometric(*l)?)),
            ArrivalSpec::Renewal(x) => Some(Draw::Dist(x.clone())),
        };
        Ok(Self { gap, next: Some(0) })
    }

    fn poll(&mut self, t: u64, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Option<Pkt> {
        if self.next == Some(t) {
            self.next = self.gap.as_mut().map(|g| t + g.sample(rng));
            Some(rec.arrival(t))
        } else {
            None
        }
    }
}

/// Collects the age trace and (optionally) per-packet records while applying
/// the age recursion.
struct Recorder {
    ages: Vec<u64>,
    packets: Vec<PacketRecord>,
    track_packets: bool,
    age: u64,
    next_id: u64,
}

impl Recorder {
    fn new(total_slots: u64, track_packets: bool) -> Self {
        let mut ages = Vec::with_capacity(total_slots as usize + 1);
        ages.push(0); // A(0) = 0
        Self {
            ages,
            packets: Vec::new(),
            track_packets,
            age: 0,
            next_id: 0,
        }
    }

    fn arrival(&mut self, t: u64) -> Pkt {
        let id = self.next_id;
        self.next_id += 1;
        if self.track_packets {
            self.packets.push(PacketRecord {
                id,
                generated: t,
                service: None,
                start: None,
                end: None,
                outcome: PacketOutcome::InFlightAtEnd,
            });
        }
        Pkt { gen: t, id }
    }

    fn service_start(&mut self, p: Pkt, start: u64, service: u64) {
        if self.track_packets {
            let rec = &mut self.packets[p.id as usize];
            rec.start = Some(start);
            rec.service = Some(service);
        }
    }

    fn preempted(&mut self, p: Pkt) {
        if self.track_packets {
            self.packets[p.id as usize].outcome = PacketOutcome::Preempted;
        }
    }

    /// Applies the end-of-slot age recursion for slot `t` given the packets
    /// delivered at its end, recording their outcomes.
    fn end_slot(&mut self, t: u64, delivered: &[Pkt]) {
        let a = self.age;
        let freshest = delivered.iter().map(|p| p.gen).max();
        let next_age = match freshest {
            Some(g) => (t - g).min(a) + 1,
            None => a + 1,
        };
        if self.track_packets {
            for p in delivered {
                let rec = &mut self.packets[p.id as usize];
                rec.end = Some(t);
                rec.outcome = if Some(p.gen) == freshest && t - p.gen < a {
                    PacketOutcome::DeliveredFresh
                } else {
                    PacketOutcome::DeliveredStale
                };
            }
        }
        self.ages.push(next_age);
        self.age = next_age;
    }
}

// ---------------------------------------------------------------------------
// Discipline steppers
// ---------------------------------------------------------------------------

enum FcfsServer {
    Idle,
    Busy(Pkt, u64),
    Vacation(u64),
}

/// FCFS with late arrivals; `vacation` is `Some` for the vacation
/// discipline. Queue joins and service/vacation assignments happen at the
/// end of the slot, after the server has progressed and after the age
/// update's delivery set is known.
fn run_fcfs(
    total_slots: u64,
    arrivals: &mut ArrivalStream,
    service: &mut Draw,
    vacation: &mut Option<Draw>,
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder,
) {
    let mut queue: VecDeque<Pkt> = VecDeque::new();
    let mut server = FcfsServer::Idle;
    for t in 0..total_slots {
        let arrived = arrivals.poll(t, rng, rec);
        let mut delivered: Option<Pkt> = None;
        server = match server {
            FcfsServer::Busy(p, rem) => {
                if rem == 1 {
                    delivered = Some(p);
                    FcfsServer::Idle
                } else {
                    FcfsServer::Busy(p, rem - 1)
                }
            }
            FcfsServer::Vacation(rem) => {
                if rem == 1 {
                    FcfsServer::Idle
                } else {
                    FcfsServer::Vacation(rem - 1)
                }
            }
            FcfsServer::Idle => FcfsServer::Idle,
        };
        if let Some(p) = arrived {
            queue.push_back(p);
        }
        if matches!(server, FcfsServer::Idle) {
            if let Some(p) = queue.pop_front() {
                let s = service.sample(rng);
                rec.service_start(p, t + 1, s);
                server = FcfsServer::Busy(p, s);
            } else if let Some(v) = vacation.as_mut() {
                server = FcfsServer::Vacation(v.sample(rng));
            }
        }
        match delivered {
            Some(p) => rec.end_slot(t, std::slice::from_ref(&p)),
            None => rec.end_slot(t, &[]),
        }
    }
}

/// Preemptive LCFS with immediate access: a new arrival displaces the packet
/// in service and starts its own service in the same slot.
fn run_lcfs(
    total_slots: u64,
    arrivals: &mut ArrivalStream,
    service: &mut Draw,
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder,
) {
    let mut server: Option<(Pkt, u64)> = None;
    for t in 0..total_slots {
        if let Some(p) = arrivals.poll(t, rng, rec) {
            if let Some((old, _)) = server.take() {
                rec.preempted(old);
            }
            let s = service.sample(rng);
            rec.service_start(p, t, s);
            server = Some((p, s));
        }
        let mut delivered: Option<Pkt> = None;
        if let Some((p, rem)) = server.take() {
            if rem == 1 {
                delivered = Some(p);
            } else {
                server = Some((p, rem - 1));
            }
        }
        match delivered {
            Some(p) => rec.end_slot(t, std::slice::from_ref(&p)),
            None => rec.end_slot(t, &[]),
        }
    }
}

/// Infinite-server queue with immediate access: every packet is served on
/// arrival and delivers at the end of slot `gen + S − 1`. Deliveries that
/// are older than the monitor state land as stale.
fn run_gginf(
    total_slots: u64,
    arrivals: &mut ArrivalStream,
    service: &mut Draw,
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder,
) {
    // Min-heap on (delivery_slot, gen, id).
    let mut in_flight: BinaryHeap<Reverse<(u64, u64, u64)>> = BinaryHeap::new();
    let mut delivered: Vec<Pkt> = Vec::new();
    for t in 0..total_slots {
        if let Some(p) = arrivals.poll(t, rng, rec) {
            let s = service.sample(rng);
            rec.service_start(p, t, s);
            in_flight.push(Reverse((t + s - 1, p.gen, p.id)));
        }
        delivered.clear();
        while let Some(&Reverse((end, gen, id))) = in_flight.peek() {
            if end != t {
                break;
            }
            in_flight.pop();
            delivered.push(Pkt { gen, id });
        }
        rec.end_slot(t, &delivered);
    }
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Validates the config, runs the discipline's stepper for
/// `total_slots` slots from the given seed, and estimates ages over the
/// post-warmup window.
///
/// FCFS specs must be stable (`ρ = λE[S] < 1`), with one exception: the
/// saturated unit-service system `λ = 1`, `S ≡ 1` is deterministic (its age
/// is eventually exactly 2 every slot) and is admitted at `ρ = 1`.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimOutput, SimError> {
    cfg.spec.validate().map_err(SimError::Spec)?;
    if cfg.total_slots < MIN_TOTAL_SLOTS {
        return Err(SimError::TotalSlotsTooSmall(cfg.total_slots));
    }
    if cfg.total_slots < cfg.warmup_slots + 2 {
        return Err(SimError::WarmupTooLong {
            warmup: cfg.warmup_slots,
            total: cfg.total_slots,
        });
    }
    if matches!(
        cfg.spec.discipline,
        Discipline::FcfsBerG1 | Discipline::FcfsBerG1Vacation
    ) {
        let rho = cfg.spec.rho().expect("validated FCFS spec");
        let saturated_unit = cfg.spec.lambda() == Some(1.0) && cfg.spec.service.is_unit();
        if rho > 1.0 || (rho >= 1.0 && !saturated_unit) {
            return Err(SimError::Unstable { rho });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rec = Recorder::new(cfg.total_slots, cfg.trace_enabled);
    let mut arrivals = ArrivalStream::from_spec(&cfg.spec.arrival).map_err(SimError::Spec)?;
    let mut service = Draw::Dist(cfg.spec.service.clone());
    match cfg.spec.discipline {
        Discipline::FcfsBerG1 | Discipline::FcfsBerG1Vacation => {
            let mut vacation = cfg.spec.vacation.clone().map(Draw::Dist);
            run_fcfs(
                cfg.total_slots,
                &mut arrivals,
                &mut service,
                &mut vacation,
                &mut rng,
                &mut rec,
            );
        }
        Discipline::LcfsGg1Preemptive => {
            run_lcfs(
                cfg.total_slots,
                &mut arrivals,
                &mut service,
                &mut rng,
                &mut rec,
            );
        }
        Discipline::GgInfinity => {
            run_gginf(
                cfg.total_slots,
                &mut arrivals,
                &mut service,
                &mut rng,
                &mut rec,
            );
        }
    }

    let estimate = estimate_from_trace(&rec.ages, cfg.warmup_slots)?;
    let trace = cfg.trace_enabled.then(|| SimTrace {
        ages: rec.ages,
        packets: rec.packets,
    });
    Ok(SimOutput { estimate, trace })
}

// ---------------------------------------------------------------------------
// Trace export
// ---------------------------------------------------------------------------

/// Writes one CSV row per slot: `slot,age,delivery_flag,packet_id,event`.
/// `packet_id` and `event` describe the freshest packet delivered at the
/// slot's end, if any.
pub fn write_slot_csv<W: io::Write>(trace: &SimTrace, mut w: W) -> io::Result<()> {
    writeln!(w, "slot,age,delivery_flag,packet_id,event")?;
    let mut by_end: Vec<Option<&PacketRecord>> = vec![None; trace.ages.len()];
    for p in &trace.packets {
        if let (true, Some(e)) = (p.outcome.is_delivered(), p.end) {
            let slot = e as usize;
            if by_end[slot].map_or(true, |q| p.generated > q.generated) {
                by_end[slot] = Some(p);
            }
        }
    }
    for (t, &age) in trace.ages.iter().enumerate() {
        match by_end[t] {
            Some(p) => writeln!(w, "{t},{age},1,{},{}", p.id, p.outcome.label())?,
            None => writeln!(w, "{t},{age},0,,")?,
        }
    }
    Ok(())
}

/// Writes one CSV row per packet:
/// `packet_id,generated_slot,start_slot,end_slot,outcome`.
pub fn write_packet_csv<W: io::Write>(trace: &SimTrace, mut w: W) -> io::Result<()> {
    writeln!(w, "packet_id,generated_slot,start_slot,end_slot,outcome")?;
    let fmt = |v: Option<u64>| v.map_or(String::new(), |x| x.to_string());
    for p in &trace.packets {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.id,
            p.generated,
            fmt(p.start),
            fmt(p.end),
            p.outcome.label()
        )?;
    }
    Ok(())
}
