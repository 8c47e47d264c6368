//! Replayable consistency checks over captured simulation traces.
//!
//! Each check reconstructs a structural identity of the slotted model from
//! the recorded packets alone and verifies the age trace against it, so a
//! bookkeeping bug in the engine (mis-timed delivery, wrong preemption,
//! stale delivery moving the age) cannot hide behind agreeing summary
//! statistics.

use super::{PacketRecord, SimTrace};
use crate::analytic::Discipline;

/// Default look-ahead window (in packets) for the first-availability check.
pub const FIRST_AVAILABILITY_LOOKAHEAD: usize = 50;

/// A failed trace invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Which check failed.
    pub check: &'static str,
    /// Slot or packet the failure anchors to.
    pub location: u64,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} at {}: {}", self.check, self.location, self.detail)
    }
}

fn fail(check: &'static str, location: u64, detail: String) -> Result<(), Violation> {
    Err(Violation {
        check,
        location,
        detail,
    })
}

fn delivered(trace: &SimTrace) -> impl Iterator<Item = &PacketRecord> {
    trace.packets.iter().filter(|p| p.outcome.is_delivered())
}

/// Replays the age recursion slot by slot from the recorded deliveries:
/// `A(0) = 0` and `A(t+1) = min(t − Y*, A(t)) + 1` where `Y*` is the
/// freshest generation delivered at the end of slot `t` (or `A(t) + 1` with
/// no delivery).
pub fn check_age_recursion(trace: &SimTrace) -> Result<(), Violation> {
    const CHECK: &str = "age_recursion";
    let n = trace.ages.len();
    if n == 0 {
        return fail(CHECK, 0, "empty age trace".into());
    }
    let mut freshest: Vec<Option<u64>> = vec![None; n];
    for p in delivered(trace) {
        let Some(e) = p.end else {
            return fail(
                CHECK,
                p.id,
                format!("delivered packet {} has no end slot", p.id),
            );
        };
        if e + 1 >= n as u64 {
            return fail(
                CHECK,
                p.id,
                format!("packet {} delivered at slot {e}, beyond the trace", p.id),
            );
        }
        if e < p.generated {
            return fail(
                CHECK,
                p.id,
                format!("packet {} delivered before its generation slot", p.id),
            );
        }
        let slot = &mut freshest[e as usize];
        *slot = Some(slot.map_or(p.generated, |g: u64| g.max(p.generated)));
    }
    if trace.ages[0] != 0 {
        return fail(CHECK, 0, format!("A(0) = {}, expected 0", trace.ages[0]));
    }
    for t in 0..n - 1 {
        let a = trace.ages[t];
        let expect = match freshest[t] {
            Some(g) => (t as u64 - g).min(a) + 1,
            None => a + 1,
        };
        if trace.ages[t + 1] != expect {
            return fail(
                CHECK,
                t as u64,
                format!(
                    "A({}) = {}, expected {} (deliveries at slot {t}: {:?})",
                    t + 1,
                    trace.ages[t + 1],
                    expect,
                    freshest[t]
                ),
            );
        }
    }
    Ok(())
}

/// FCFS structure: deliveries are strictly ordered in both time and
/// generation, service bookkeeping is consistent with late arrivals
/// (`start ≥ generated + 1`, `end = start + service − 1`), and every
/// delivery except the very first strictly refreshes the monitor
/// (`end − generated < A(end)`). The first delivery may tie the initial
/// age ramp, since the monitor starts fully fresh at slot 0.
pub fn check_fcfs_delivery_order(trace: &SimTrace) -> Result<(), Violation> {
    const CHECK: &str = "fcfs_delivery_order";
    let mut dels: Vec<&PacketRecord> = delivered(trace).collect();
    dels.sort_by_key(|p| p.end);
    for (k, p) in dels.iter().enumerate() {
        let (Some(start), Some(end), Some(svc)) = (p.start, p.end, p.service) else {
            return fail(
                CHECK,
                p.id,
                format!("delivered packet {} lacks start/end/service", p.id),
            );
        };
        if start <= p.generated {
            return fail(
                CHECK,
                p.id,
                format!(
                    "packet {} started at slot {start}, not after its arrival slot {}",
                    p.id, p.generated
                ),
            );
        }
        if end != start + svc - 1 {
            return fail(
                CHECK,
                p.id,
                format!(
                    "packet {} has end {end} != start {start} + service {svc} − 1",
                    p.id
                ),
            );
        }
        if k > 0 {
            let prev = dels[k - 1];
            if prev.end >= p.end || prev.generated >= p.generated {
                return fail(
                    CHECK,
                    p.id,
                    format!(
                        "deliveries out of FCFS order: packet {} (gen {}, end {:?}) after packet {} (gen {}, end {:?})",
                        prev.id, prev.generated, prev.end, p.id, p.generated, p.end
                    ),
                );
            }
        }
        let age_at_end = trace.ages[end as usize];
        let staleness = end - p.generated;
        let fresh_enough = if k == 0 {
            staleness <= age_at_end
        } else {
            staleness < age_at_end
        };
        if !fresh_enough {
            return fail(
                CHECK,
                p.id,
                format!(
                    "packet {} delivered with staleness {staleness} >= age {age_at_end}",
                    p.id
                ),
            );
        }
    }
    Ok(())
}

/// LCFS identities, replayed per consecutive arrival pair with `X_i` the
/// observed gap, `S_i` the drawn service, and `B_i = A(Z_i)` the age when
/// packet `i` arrives:
///
/// * service starts in the arrival slot (immediate access);
/// * packet `i` is delivered iff `S_i ≤ X_i`, at slot `Z_i + S_i − 1`, and
///   is otherwise preempted;
/// * `B_{i+1} = X_i + B_i · 1{S_i > X_i}`;
/// * the age area over `[Z_i, Z_{i+1})` equals
///   `(X_i² − X_i)/2 + B_i · min(X_i, S_i)` exactly.
pub fn check_lcfs_identities(trace: &SimTrace) -> Result<(), Violation> {
    const CHECK: &str = "lcfs_identities";
    let ps = &trace.packets;
    for (i, p) in ps.iter().enumerate() {
        if p.id != i as u64 {
            return fail(CHECK, p.id, "packet ids out of arrival order".into());
        }
        if p.start != Some(p.generated) {
            return fail(
                CHECK,
                p.id,
                format!(
                    "packet {} started at {:?}, expected its arrival slot {}",
                    p.id, p.start, p.generated
                ),
            );
        }
        if p.service.is_none() {
            return fail(CHECK, p.id, format!("packet {} has no drawn service", p.id));
        }
    }
    for w in ps.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let x = b.generated - a.generated;
        let s = a.service.unwrap();
        let served = s <= x;
        if served {
            if !a.outcome.is_delivered() || a.end != Some(a.generated + s - 1) {
                return fail(
                    CHECK,
                    a.id,
                    format!(
                        "packet {} should deliver at slot {} (S={s} ≤ X={x}), got {:?}/{:?}",
                        a.id,
                        a.generated + s - 1,
                        a.outcome,
                        a.end
                    ),
                );
            }
        } else if a.outcome != super::PacketOutcome::Preempted || a.end.is_some() {
            return fail(
                CHECK,
                a.id,
                format!(
                    "packet {} should be preempted (S={s} > X={x}), got {:?}/{:?}",
                    a.id, a.outcome, a.end
                ),
            );
        }
        let b_i = trace.ages[a.generated as usize];
        let b_next = trace.ages[b.generated as usize];
        let expect = x + if served { 0 } else { b_i };
        if b_next != expect {
            return fail(
                CHECK,
                a.id,
                format!(
                    "age at arrival of packet {} is {b_next}, recursion expects {expect}",
                    b.id
                ),
            );
        }
        let area: u64 = trace.ages[a.generated as usize..b.generated as usize]
            .iter()
            .sum();
        let expect_area = (x * x - x) / 2 + b_i * s.min(x);
        if area != expect_area {
            return fail(
                CHECK,
                a.id,
                format!(
                    "age area over [{}, {}) is {area}, identity expects {expect_area}",
                    a.generated, b.generated
                ),
            );
        }
    }
    Ok(())
}

/// Infinite-server first-availability identity: information generated at or
/// after packet `i`'s arrival first reaches the monitor at exactly slot
/// `Z_i + D_i`, where `D_i = min_l (Z_{i+l} + S_{i+l}) − Z_i` over the
/// packets `l = 0, 1, …` — the scan stops exactly once the arrival gap
/// reaches the running minimum (later candidates cannot win), or gives up
/// past `lookahead` packets. Packets whose availability slot falls beyond
/// the trace are skipped.
pub fn check_gginf_first_availability(trace: &SimTrace, lookahead: usize) -> Result<(), Violation> {
    const CHECK: &str = "gginf_first_availability";
    let ps = &trace.packets;
    let total = (trace.ages.len() - 1) as u64;
    for p in ps {
        if p.start != Some(p.generated) || p.service.is_none() {
            return fail(
                CHECK,
                p.id,
                format!("packet {} not served immediately on arrival", p.id),
            );
        }
        let completes = p.generated + p.service.unwrap() - 1;
        match (p.outcome.is_delivered(), p.end) {
            (true, Some(e)) if e == completes => {}
            (false, None) if completes >= total => {}
            _ => {
                return fail(
                    CHECK,
                    p.id,
                    format!(
                        "packet {} completion bookkeeping inconsistent: outcome {:?}, end {:?}, expected completion {completes}",
                        p.id, p.outcome, p.end
                    ),
                );
            }
        }
    }
    // suffix_avail[i] = min over j >= i of (end_j + 1) for delivered packets.
    let mut suffix_avail = vec![u64::MAX; ps.len() + 1];
    for i in (0..ps.len()).rev() {
        let own = match (ps[i].outcome.is_delivered(), ps[i].end) {
            (true, Some(e)) => e + 1,
            _ => u64::MAX,
        };
        suffix_avail[i] = own.min(suffix_avail[i + 1]);
    }
    for i in 0..ps.len() {
        let z = ps[i].generated;
        let mut cur = u64::MAX;
        let mut finalized = false;
        for l in 0..=lookahead {
            let Some(q) = ps.get(i + l) else { break };
            if q.generated >= cur {
                finalized = true;
                break;
            }
            cur = cur.min(q.generated + q.service.unwrap());
        }
        // Skip packets whose minimum could still be beaten by unseen
        // arrivals (scan hit the window edge or the end of the packet list)
        // and those whose availability falls beyond the simulated horizon.
        if !finalized || cur > total {
            continue;
        }
        if suffix_avail[i] != cur {
            return fail(
                CHECK,
                ps[i].id,
                format!(
                    "information from slot {z} first available at {}, identity expects {cur}",
                    suffix_avail[i]
                ),
            );
        }
    }
    Ok(())
}

/// Runs the age-recursion check plus the discipline-specific structural
/// checks appropriate for `discipline`.
pub fn check_trace(discipline: Discipline, trace: &SimTrace) -> Result<(), Violation> {
    check_age_recursion(trace)?;
    match discipline {
        Discipline::FcfsBerG1 | Discipline::FcfsBerG1Vacation => check_fcfs_delivery_order(trace),
        Discipline::LcfsGg1Preemptive => check_lcfs_identities(trace),
        Discipline::GgInfinity => {
            check_gginf_first_availability(trace, FIRST_AVAILABILITY_LOOKAHEAD)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{ArrivalSpec, QueueSpec};
    use crate::dist::DiscreteDist;
    use crate::sim::{run_simulation, PacketOutcome, SimConfig};

    fn geo(p: f64) -> DiscreteDist {
        DiscreteDist::geometric(p).unwrap()
    }
    fn det(d: u64) -> DiscreteDist {
        DiscreteDist::deterministic(d).unwrap()
    }
    fn unif(a: u64, b: u64) -> DiscreteDist {
        DiscreteDist::uniform(a, b).unwrap()
    }

    fn traced(spec: QueueSpec, seed: u64) -> crate::sim::SimTrace {
        run_simulation(&SimConfig::new(spec, 30_000, 100, seed).with_trace())
            .unwrap()
            .trace
            .unwrap()
    }

    #[test]
    fn clean_traces_pass_all_checks() {
        let cases = [
            QueueSpec::fcfs(0.3, geo(0.75)),
            QueueSpec::fcfs(0.6, unif(1, 2)),
            QueueSpec::fcfs_vacation(0.3, geo(0.75), geo(0.5)),
            QueueSpec::fcfs_vacation(0.6, det(1), unif(1, 3)),
            QueueSpec::lcfs(ArrivalSpec::Bernoulli(0.4), geo(0.5)),
            QueueSpec::lcfs(ArrivalSpec::Renewal(unif(2, 6)), det(3)),
            QueueSpec::gg_infinity(ArrivalSpec::Bernoulli(0.5), geo(0.5)),
            QueueSpec::gg_infinity(ArrivalSpec::Renewal(unif(1, 3)), geo(0.75)),
        ];
        for (k, spec) in cases.into_iter().enumerate() {
            let discipline = spec.discipline;
            let trace = traced(spec, 1000 + k as u64);
            check_trace(discipline, &trace).unwrap();
        }
    }

    #[test]
    fn age_recursion_detects_tampering() {
        let mut trace = traced(QueueSpec::fcfs(0.3, geo(0.75)), 5);
        trace.ages[17] += 1;
        let v = check_age_recursion(&trace).unwrap_err();
        assert_eq!(v.check, "age_recursion");
    }

    #[test]
    fn fcfs_check_detects_reordered_generations() {
        let mut trace = traced(QueueSpec::fcfs(0.3, geo(0.75)), 6);
        // Swap the generation stamps of the first two delivered packets.
        let ids: Vec<usize> = trace
            .packets
            .iter()
            .enumerate()
            .filter(|(_, p)| p.outcome.is_delivered())
            .map(|(i, _)| i)
            .take(2)
            .collect();
        let g0 = trace.packets[ids[0]].generated;
        let g1 = trace.packets[ids[1]].generated;
        trace.packets[ids[0]].generated = g1;
        trace.packets[ids[1]].generated = g0;
        assert!(check_fcfs_delivery_order(&trace).is_err());
    }

    #[test]
    fn lcfs_check_detects_wrong_preemption() {
        let mut trace = traced(QueueSpec::lcfs(ArrivalSpec::Bernoulli(0.4), geo(0.5)), 7);
        // Flip a preempted packet into a fake delivery.
        let i = trace
            .packets
            .iter()
            .position(|p| p.outcome == PacketOutcome::Preempted)
            .expect("preemptions occur");
        trace.packets[i].outcome = PacketOutcome::DeliveredFresh;
        trace.packets[i].end = Some(trace.packets[i].generated);
        assert!(check_lcfs_identities(&trace).is_err());
    }

    #[test]
    fn gginf_check_detects_shifted_delivery() {
        let mut trace = traced(
            QueueSpec::gg_infinity(ArrivalSpec::Bernoulli(0.5), geo(0.5)),
            8,
        );
        let i = trace
            .packets
            .iter()
            .position(|p| p.outcome.is_delivered() && p.service == Some(2))
            .expect("some two-slot service delivers");
        *trace.packets[i].end.as_mut().unwrap() += 1;
        assert!(check_gginf_first_availability(&trace, 50).is_err());
    }

    #[test]
    fn saturated_unit_service_trace_is_clean() {
        let trace = traced(QueueSpec::fcfs(1.0, det(1)), 9);
        check_trace(Discipline::FcfsBerG1, &trace).unwrap();
    }
}
