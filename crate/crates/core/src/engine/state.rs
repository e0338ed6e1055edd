//! Incremental per-run bookkeeping.
//!
//! The run loop needs branch counts, branch bests, optimum copy counts, the
//! population's worst fitness and the no-extinction guard at every generation
//! boundary. All of it is maintained from replacement events in O(1) amortized
//! time via ones/fitness histograms instead of rescanning the population.

use crate::distance::DistanceKind;
use crate::engine::{branch_side, AlgorithmConfig, BranchSide, BranchStats, EngineError, Population, Replacement};
use crate::fitness::{twomax_minimum, FitnessKind};

#[derive(Debug, Clone, Copy)]
struct Guard {
    distance: DistanceKind,
    armed_at: Option<u64>,
}

#[derive(Debug)]
pub(crate) struct Instrumentation {
    n: usize,
    mu: usize,
    /// Count of members per ones value.
    hist_ones: Vec<u32>,
    /// Count of members per cached (configured) fitness value.
    hist_fit: Vec<u32>,
    strict0: usize,
    strict1: usize,
    min_ones: usize,
    max_ones: usize,
    min_fit: usize,
    best_ever0: usize,
    best_ever1: usize,
    lone: bool,
    guard: Option<Guard>,
}

impl Instrumentation {
    pub fn new(cfg: &AlgorithmConfig, pop: &Population) -> Self {
        let n = cfg.n;
        let sentinel = twomax_minimum(n);
        // The guard mirrors the conditions under which extinction of an
        // established niche is provably impossible: restricted tournaments
        // drawn without replacement with at least two distinct entrants,
        // competing on TwoMax.
        let guard = (cfg.kind == crate::engine::AlgorithmKind::Rts
            && cfg.policy == crate::engine::SelectionPolicy::WithoutReplacement
            && cfg.effective_window() >= 2
            && cfg.fitness == FitnessKind::TwoMax)
            .then_some(Guard {
                distance: cfg.distance,
                armed_at: None,
            });
        let mut inst = Self {
            n,
            mu: cfg.mu,
            hist_ones: vec![0; n + 1],
            hist_fit: vec![0; n + 1],
            strict0: 0,
            strict1: 0,
            min_ones: n,
            max_ones: 0,
            min_fit: n,
            best_ever0: sentinel,
            best_ever1: sentinel,
            lone: false,
            guard,
        };
        for m in pop.members() {
            inst.add(m.ones, m.fitness);
        }
        inst
    }

    fn add(&mut self, ones: usize, fitness: usize) {
        self.hist_ones[ones] += 1;
        self.hist_fit[fitness] += 1;
        self.min_ones = self.min_ones.min(ones);
        self.max_ones = self.max_ones.max(ones);
        self.min_fit = self.min_fit.min(fitness);
        let twomax = (self.n - ones).max(ones);
        match branch_side(ones, self.n) {
            BranchSide::Zero => {
                self.strict0 += 1;
                self.best_ever0 = self.best_ever0.max(twomax);
            }
            BranchSide::One => {
                self.strict1 += 1;
                self.best_ever1 = self.best_ever1.max(twomax);
            }
            BranchSide::Mid => {
                self.best_ever0 = self.best_ever0.max(twomax);
                self.best_ever1 = self.best_ever1.max(twomax);
            }
        }
    }

    fn remove(&mut self, ones: usize, fitness: usize) {
        self.hist_ones[ones] -= 1;
        self.hist_fit[fitness] -= 1;
        if ones == self.min_ones && self.hist_ones[ones] == 0 {
            while self.hist_ones[self.min_ones] == 0 {
                self.min_ones += 1;
            }
        }
        if ones == self.max_ones && self.hist_ones[ones] == 0 {
            while self.hist_ones[self.max_ones] == 0 {
                self.max_ones -= 1;
            }
        }
        if fitness == self.min_fit && self.hist_fit[fitness] == 0 {
            while self.min_fit <= self.n && self.hist_fit[self.min_fit] == 0 {
                self.min_fit += 1;
            }
        }
        match branch_side(ones, self.n) {
            BranchSide::Zero => self.strict0 -= 1,
            BranchSide::One => self.strict1 -= 1,
            BranchSide::Mid => {}
        }
    }

    /// Fold one replacement into the counters. Fails when it drops an armed
    /// strict branch from one member to none.
    pub fn apply_replacement(
        &mut self,
        rep: &Replacement,
        added_ones: usize,
        added_fitness: usize,
        generation: u64,
    ) -> Result<(), EngineError> {
        let removed_side = branch_side(rep.removed_ones, self.n);
        let added_side = branch_side(added_ones, self.n);
        let extinction = removed_side != added_side
            && match removed_side {
                BranchSide::Zero => self.strict0 == 1,
                BranchSide::One => self.strict1 == 1,
                BranchSide::Mid => false,
            };
        if extinction {
            if let Some(guard) = &self.guard {
                if let Some(armed_at) = guard.armed_at {
                    return Err(EngineError::ExtinctionGuard {
                        generation,
                        armed_at,
                        branch: match removed_side {
                            BranchSide::Zero => 0,
                            _ => 1,
                        },
                        distance: guard.distance,
                    });
                }
            }
        }
        // Add first so the histograms never go empty mid-update.
        self.add(added_ones, added_fitness);
        self.remove(rep.removed_ones, rep.removed_fitness);
        Ok(())
    }

    /// Generation-boundary bookkeeping: the lone-individual flag and guard
    /// arming are evaluated on the settled population, including the initial
    /// one.
    pub fn note_boundary(&mut self, generation: u64) {
        if !self.lone
            && ((self.strict0 == 1 && self.strict1 == self.mu - 1)
                || (self.strict1 == 1 && self.strict0 == self.mu - 1))
        {
            self.lone = true;
        }
        let n = self.n;
        if let Some(guard) = &mut self.guard {
            if guard.armed_at.is_none() {
                let arm = match guard.distance {
                    // Both strict-branch bests above 2n/3.
                    DistanceKind::Phenotypic => {
                        3 * self.min_ones < n && 3 * self.max_ones > 2 * n
                    }
                    // Population worst fitness above 3n/4.
                    DistanceKind::Genotypic => 4 * self.min_fit > 3 * n,
                };
                if arm {
                    guard.armed_at = Some(generation);
                }
            }
        }
    }

    pub fn contains_both_optima(&self) -> bool {
        self.hist_ones[0] > 0 && self.hist_ones[self.n] > 0
    }

    /// Every member is a copy of the same optimum.
    pub fn collapsed(&self) -> bool {
        self.hist_ones[0] as usize == self.mu || self.hist_ones[self.n] as usize == self.mu
    }

    /// Copies of one optimum plus exactly `w_eff - 1` members of fitness
    /// `n - 1`, all strictly on that optimum's branch.
    pub fn w_minus_one_stagnation(&self, w_eff: usize) -> bool {
        let n = self.n;
        let need = (w_eff - 1) as u32;
        let near_top = if branch_side(n - 1, n) == BranchSide::One {
            self.hist_ones[n - 1]
        } else {
            0
        };
        let near_bottom = if branch_side(1, n) == BranchSide::Zero {
            self.hist_ones[1]
        } else {
            0
        };
        (self.hist_ones[n] > 0
            && near_top == need
            && self.hist_ones[n] + near_top == self.mu as u32)
            || (self.hist_ones[0] > 0
                && near_bottom == need
                && self.hist_ones[0] + near_bottom == self.mu as u32)
    }

    /// Branch statistics of the current population, mirroring `branch_stats`.
    pub fn current_stats(&self) -> BranchStats {
        let n = self.n;
        let sentinel = twomax_minimum(n);
        let best0 = if 2 * self.min_ones <= n {
            n - self.min_ones
        } else {
            sentinel
        };
        let best1 = if 2 * self.max_ones >= n {
            self.max_ones
        } else {
            sentinel
        };
        BranchStats {
            count0: self.strict0,
            count1: self.strict1,
            best0,
            best1,
        }
    }

    pub fn lone_occurred(&self) -> bool {
        self.lone
    }

    pub fn best_ever(&self) -> (usize, usize) {
        (self.best_ever0, self.best_ever1)
    }
}
