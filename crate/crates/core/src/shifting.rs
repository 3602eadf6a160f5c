//! The `(i, j)` shift on members and families, and ordered shift sequences.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EmcError, Result};
use crate::fault::Fault;
use crate::family::{is_trivial, KSet, Params, SetFamily, MAX_N};

/// One shift `C_ij`: replace the outgoing element `j` by the incoming `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawStep")]
pub struct ShiftStep {
    i: u32,
    j: u32,
}

#[derive(Deserialize)]
struct RawStep {
    i: u32,
    j: u32,
}

impl TryFrom<RawStep> for ShiftStep {
    type Error = EmcError;

    fn try_from(raw: RawStep) -> Result<Self> {
        ShiftStep::new(raw.i, raw.j, MAX_N)
    }
}

impl ShiftStep {
    /// Rejects `i == j` and elements outside `[n]`.
    pub fn new(i: u32, j: u32, n: u32) -> Result<Self> {
        if i == j {
            return Err(EmcError::Params(format!("shift needs i != j, got i = j = {i}")));
        }
        for x in [i, j] {
            if x == 0 || x > n {
                return Err(EmcError::Params(format!("shift element {x} outside [{n}]")));
            }
        }
        Ok(ShiftStep { i, j })
    }

    pub fn incoming(self) -> u32 {
        self.i
    }

    pub fn outgoing(self) -> u32 {
        self.j
    }

    /// Every ordered pair `(i, j)` with `i != j` over `[n]`.
    pub fn all(n: u32) -> impl Iterator<Item = ShiftStep> {
        (1..=n).flat_map(move |i| (1..=n).filter(move |&j| j != i).map(move |j| ShiftStep { i, j }))
    }

    fn fits(self, p: Params) -> bool {
        self.i <= p.n() && self.j <= p.n()
    }
}

impl fmt::Debug for ShiftStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C({},{})", self.i, self.j)
    }
}

/// Shift steps in position order `p = 1, …, t`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftSequence {
    pub steps: Vec<ShiftStep>,
}

impl ShiftSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// The image of one member under the shift, judged against `family`.
fn image(family: &SetFamily, step: ShiftStep, member: KSet, fault: Fault) -> KSet {
    if member.contains(step.i) || !member.contains(step.j) {
        return member;
    }
    let target = member.replace(step.j, step.i);
    let blocked = family.contains(target);
    let blocked = if fault == Fault::FlipShiftBlocking { !blocked } else { blocked };
    if blocked {
        member
    } else {
        target
    }
}

/// `C_ij(member)` with respect to `f`.
pub fn shift_set(f: &SetFamily, step: ShiftStep, member: KSet) -> Result<KSet> {
    if !f.contains(member) {
        return Err(EmcError::Input(format!("{member} is not a member of the family")));
    }
    Ok(image(f, step, member, Fault::None))
}

/// Images of every member in member order, each decided against the
/// unshifted family. May contain repeats only under an injected fault.
pub fn shift_image(f: &SetFamily, step: ShiftStep, fault: Fault) -> Vec<KSet> {
    f.iter().map(|m| image(f, step, m, fault)).collect()
}

/// `C_ij(f)`.
pub fn shift_family(f: &SetFamily, step: ShiftStep) -> SetFamily {
    debug_assert!(step.fits(f.params()));
    let mut sets = shift_image(f, step, Fault::None);
    sets.sort_unstable();
    let before = sets.len();
    sets.dedup();
    assert_eq!(before, sets.len(), "shift {step:?} merged two members of {f:?}");
    SetFamily::from_sorted_unchecked(f.params(), sets)
}

/// Intermediate families of a sequence application.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceTrace {
    /// `F_t, F_{t-1}, …, F_0`; entry `t - p` holds `F_p`.
    pub families: Vec<SetFamily>,
    /// Triviality of each entry of `families`.
    pub trivial: Vec<bool>,
}

impl SequenceTrace {
    /// `F_p` for `0 <= p <= t`.
    pub fn family_at(&self, p: usize) -> &SetFamily {
        let t = self.families.len() - 1;
        &self.families[t - p]
    }

    pub fn result(&self) -> &SetFamily {
        self.families.last().expect("trace always holds the input family")
    }

    /// Once an intermediate family is trivial, every later one is.
    pub fn triviality_propagates(&self) -> bool {
        self.trivial.windows(2).all(|w| !w[0] || w[1])
    }
}

/// Applies `seq` from position `t` down to 1: `F_t = f`, `F_{p-1} = C_{I(p)J(p)}(F_p)`.
pub fn apply_shift_sequence(f: &SetFamily, seq: &ShiftSequence) -> SequenceTrace {
    let mut families = Vec::with_capacity(seq.len() + 1);
    families.push(f.clone());
    for step in seq.steps.iter().rev() {
        let next = shift_family(families.last().unwrap(), *step);
        families.push(next);
    }
    let trivial = families.iter().map(is_trivial).collect();
    SequenceTrace { families, trivial }
}

/// Repeats `C_ij` for all `i < j` until nothing moves. Test utility only.
pub fn left_compress(f: &SetFamily) -> SetFamily {
    let n = f.params().n();
    let mut cur = f.clone();
    loop {
        let mut moved = false;
        for j in 2..=n {
            for i in 1..j {
                let next = shift_family(&cur, ShiftStep { i, j });
                if next != cur {
                    moved = true;
                    cur = next;
                }
            }
        }
        if !moved {
            return cur;
        }
    }
}
