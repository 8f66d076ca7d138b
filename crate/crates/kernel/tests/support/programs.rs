//! Randomized behavior programs and a log-based checker for the kernel
//! contract. Shared by the kernel property tests and the acceptance suite.

use std::rc::Rc;

use proptest::prelude::*;
use rqm_kernel::{Behavior, BehaviorId, Cx, EventId, Instant, Scheduler, Step};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    Generate(usize),
    Await(usize),
    Collect(usize),
    Cooperate,
    Spawn(usize),
}

#[derive(Debug, Clone)]
pub struct Program {
    pub events: usize,
    pub roots: Vec<Vec<Op>>,
    /// Scripts that `Op::Spawn` refers to. They never spawn themselves.
    pub children: Vec<Vec<Op>>,
}

/// A payload that identifies its generation uniquely.
pub type Value = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    Start,
    Generate(usize, Value),
    AwaitStart(usize),
    AwaitResume(usize),
    CollectStart(usize),
    CollectResume(usize, Vec<Value>),
    CooperateStart,
    CooperateResume,
    Spawned(BehaviorId),
    End,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub instant: Instant,
    pub who: BehaviorId,
    pub entry: Entry,
}

pub type Log = Vec<Record>;

enum Pending {
    Start,
    Await(usize),
    Collect(usize),
    Cooperate,
}

struct Runner {
    script: Vec<Op>,
    pc: usize,
    pending: Pending,
    events: Rc<Vec<EventId>>,
    children: Rc<Vec<Vec<Op>>>,
    counter: u32,
}

impl Runner {
    fn new(script: Vec<Op>, events: Rc<Vec<EventId>>, children: Rc<Vec<Vec<Op>>>) -> Self {
        Self {
            script,
            pc: 0,
            pending: Pending::Start,
            events,
            children,
            counter: 0,
        }
    }
}

impl Behavior<Log, Value> for Runner {
    fn step(&mut self, cx: &mut Cx<'_, Log, Value>) -> Step {
        let who = cx.me();
        let now = cx.now();
        let resumed = match std::mem::replace(&mut self.pending, Pending::Cooperate) {
            Pending::Start => Entry::Start,
            Pending::Await(e) => Entry::AwaitResume(e),
            Pending::Collect(e) => Entry::CollectResume(e, cx.take_collected()),
            Pending::Cooperate => Entry::CooperateResume,
        };
        cx.world.push(Record {
            instant: now,
            who,
            entry: resumed,
        });
        while let Some(op) = self.script.get(self.pc).cloned() {
            self.pc += 1;
            let (entry, step) = match op {
                Op::Generate(e) => {
                    let value = (who.index() as u32, self.counter);
                    self.counter += 1;
                    cx.generate(self.events[e], value);
                    (Entry::Generate(e, value), None)
                }
                Op::Await(e) => {
                    self.pending = Pending::Await(e);
                    (Entry::AwaitStart(e), Some(Step::Await(self.events[e])))
                }
                Op::Collect(e) => {
                    self.pending = Pending::Collect(e);
                    (Entry::CollectStart(e), Some(Step::Collect(self.events[e])))
                }
                Op::Cooperate => {
                    self.pending = Pending::Cooperate;
                    (Entry::CooperateStart, Some(Step::Cooperate))
                }
                Op::Spawn(k) => {
                    let child = Runner::new(self.children[k].clone(), self.events.clone(), self.children.clone());
                    let id = cx.spawn(Box::new(child));
                    (Entry::Spawned(id), None)
                }
            };
            cx.world.push(Record {
                instant: now,
                who,
                entry,
            });
            if let Some(step) = step {
                return step;
            }
        }
        cx.world.push(Record {
            instant: now,
            who,
            entry: Entry::End,
        });
        Step::Terminate
    }
}

/// Runs `program` for `instants` instants. Checks the per-instant buffer
/// reset after every instant; returns the log and the generation trace.
pub fn execute(program: &Program, instants: u64) -> Result<(Log, Vec<rqm_kernel::TraceEntry>), String> {
    let mut sched: Scheduler<Log, Value> = Scheduler::new(rqm_kernel::KernelConfig {
        trace: true,
        ..Default::default()
    });
    let events: Rc<Vec<EventId>> = Rc::new((0..program.events).map(|_| sched.new_event()).collect());
    let children = Rc::new(program.children.clone());
    for script in &program.roots {
        sched.spawn(Box::new(Runner::new(script.clone(), events.clone(), children.clone())));
    }
    let mut log = Log::new();
    for _ in 0..instants {
        sched.run_instant(&mut log).map_err(|e| e.to_string())?;
        for &e in events.iter() {
            if sched.is_present(e) || !sched.values(e).is_empty() {
                return Err(format!("event {e} not reset after instant {}", sched.now() - 1));
            }
        }
    }
    Ok((log, sched.trace().unwrap().to_vec()))
}

fn generations(log: &Log) -> Vec<(Instant, usize, Value)> {
    log.iter()
        .filter_map(|r| match r.entry {
            Entry::Generate(e, v) => Some((r.instant, e, v)),
            _ => None,
        })
        .collect()
}

/// Broadcast: every await resumes in the first instant at or after its start
/// where the event is generated, and never if there is none.
pub fn check_broadcast(log: &Log, horizon: Instant) -> Result<(), String> {
    let gens = generations(log);
    for (i, rec) in log.iter().enumerate() {
        let Entry::AwaitStart(e) = rec.entry else { continue };
        let expected = gens
            .iter()
            .filter(|(t, ev, _)| *ev == e && *t >= rec.instant)
            .map(|(t, _, _)| *t)
            .next();
        let resumed = log[i + 1..]
            .iter()
            .find(|r| r.who == rec.who)
            .map(|r| (r.instant, r.entry.clone()));
        match (expected, resumed) {
            (Some(t), Some((rt, Entry::AwaitResume(re)))) if rt == t && re == e => {}
            (None, None) if rec.instant < horizon => {}
            (exp, got) => {
                return Err(format!(
                    "{} awaiting e{e} from {}: expected resume at {exp:?}, got {got:?}",
                    rec.who, rec.instant
                ))
            }
        }
    }
    Ok(())
}

/// Collection exactness: a collect opened at t resumes at t+1 with exactly
/// the values generated on the event during t, in generation order.
pub fn check_collection(log: &Log, horizon: Instant) -> Result<(), String> {
    let gens = generations(log);
    for (i, rec) in log.iter().enumerate() {
        let Entry::CollectStart(e) = rec.entry else { continue };
        let expected: Vec<Value> = gens
            .iter()
            .filter(|(t, ev, _)| *ev == e && *t == rec.instant)
            .map(|(_, _, v)| *v)
            .collect();
        let resumed = log[i + 1..].iter().find(|r| r.who == rec.who);
        match resumed {
            Some(r) if r.instant == rec.instant + 1 && r.entry == Entry::CollectResume(e, expected.clone()) => {}
            None if rec.instant + 1 >= horizon => {}
            other => {
                return Err(format!(
                    "{} collecting e{e} at {}: expected {expected:?} at {}, got {other:?}",
                    rec.who,
                    rec.instant,
                    rec.instant + 1
                ))
            }
        }
    }
    Ok(())
}

/// Cooperate resumes next instant; spawned behaviors start next instant.
pub fn check_next_instant(log: &Log, horizon: Instant) -> Result<(), String> {
    for (i, rec) in log.iter().enumerate() {
        let target = match rec.entry {
            Entry::CooperateStart => Some(rec.who),
            Entry::Spawned(child) => Some(child),
            _ => None,
        };
        let Some(target) = target else { continue };
        let next = log[i + 1..].iter().find(|r| r.who == target);
        match next {
            Some(r) if r.instant == rec.instant + 1 => {}
            None if rec.instant + 1 >= horizon => {}
            other => {
                return Err(format!(
                    "{target} after {:?} at {}: got {other:?}",
                    rec.entry, rec.instant
                ))
            }
        }
    }
    Ok(())
}

/// Behaviors resumed at an instant boundary run in increasing id order,
/// before anything woken during the instant.
pub fn check_boundary_order(log: &Log) -> Result<(), String> {
    let mut current: Option<Instant> = None;
    let mut last: Option<BehaviorId> = None;
    let mut woken_seen = false;
    let mut previous: Option<&Record> = None;
    for rec in log {
        if current != Some(rec.instant) {
            current = Some(rec.instant);
            last = None;
            woken_seen = false;
        }
        match rec.entry {
            Entry::Start | Entry::CooperateResume | Entry::CollectResume(..) => {
                if woken_seen {
                    return Err(format!("{} resumed at boundary after a woken behavior", rec.who));
                }
                if last.is_some_and(|l| l >= rec.who) {
                    return Err(format!(
                        "boundary order violated at {}: {:?} then {}",
                        rec.instant, last, rec.who
                    ));
                }
                last = Some(rec.who);
            }
            // an await on a present event continues inline; anything else was woken
            Entry::AwaitResume(e) => {
                let inline = previous.is_some_and(|p| p.who == rec.who && p.entry == Entry::AwaitStart(e));
                woken_seen |= !inline;
            }
            _ => {}
        }
        previous = Some(rec);
    }
    Ok(())
}

pub fn check_all(program: &Program, instants: u64) -> Result<(), String> {
    let (log, trace) = execute(program, instants)?;
    check_broadcast(&log, instants)?;
    check_collection(&log, instants)?;
    check_next_instant(&log, instants)?;
    check_boundary_order(&log)?;
    let (log2, trace2) = execute(program, instants)?;
    if log != log2 || trace != trace2 {
        return Err("two runs of the same program diverged".into());
    }
    Ok(())
}

fn op(events: usize, children: usize) -> impl Strategy<Value = Op> {
    let spawn = if children == 0 {
        Just(Op::Cooperate).boxed()
    } else {
        (0..children).prop_map(Op::Spawn).boxed()
    };
    prop_oneof![
        3 => (0..events).prop_map(Op::Generate),
        2 => (0..events).prop_map(Op::Await),
        2 => (0..events).prop_map(Op::Collect),
        2 => Just(Op::Cooperate),
        1 => spawn,
    ]
}

pub fn program() -> impl Strategy<Value = Program> {
    (1usize..4).prop_flat_map(|events| {
        let child = prop::collection::vec(op(events, 0), 0..6);
        prop::collection::vec(child, 0..3).prop_flat_map(move |children| {
            let n = children.len();
            prop::collection::vec(prop::collection::vec(op(events, n), 0..10), 1..7).prop_map(move |roots| Program {
                events,
                roots,
                children: children.clone(),
            })
        })
    })
}
