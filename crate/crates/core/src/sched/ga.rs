//! Genetic refinement of a feasible schedule.
//!
//! Individuals are always feasible: every operator either keeps the slot
//! split and RB occupancy intact or is followed by a repair step that
//! re-places displaced UEs on free RBs.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_instance, validate, AssignmentGrid, Placement, Slot};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::rate::RateTable;

#[derive(Debug, Clone)]
struct Individual {
    columns: Vec<usize>,
    alpha: Vec<usize>,
    slot: Vec<Slot>,
    fitness: f64,
}

struct Ctx<'a> {
    table: &'a RateTable,
    k: usize,
    f: usize,
    z: usize,
}

impl Ctx<'_> {
    fn fitness(&self, ind: &Individual) -> f64 {
        ind.slot
            .iter()
            .enumerate()
            .map(|(k, s)| self.table.get(k, ind.columns[s.cluster], s.carrier))
            .sum()
    }

    fn evaluate(&self, mut ind: Individual) -> Individual {
        ind.fitness = self.fitness(&ind);
        ind
    }

    /// Places every `None` UE on a free RB, visiting UEs in random order and
    /// giving each the free RB with the highest rate.
    fn repair<R: Rng + ?Sized>(
        &self,
        columns: Vec<usize>,
        alpha: Vec<usize>,
        partial: Vec<Option<Slot>>,
        rng: &mut R,
    ) -> Individual {
        let mut occ = vec![0usize; self.z * self.f];
        for s in partial.iter().flatten() {
            occ[s.cluster * self.f + s.carrier] += 1;
        }
        let mut pending: Vec<usize> = (0..self.k).filter(|&k| partial[k].is_none()).collect();
        pending.shuffle(rng);
        let mut slot = partial;
        for ue in pending {
            let mut best: Option<(usize, usize, f64)> = None;
            for z in 0..self.z {
                for i in 0..self.f {
                    if occ[z * self.f + i] >= alpha[z] {
                        continue;
                    }
                    let r = self.table.get(ue, columns[z], i);
                    if best.is_none_or(|b| r > b.2) {
                        best = Some((z, i, r));
                    }
                }
            }
            let (z, i, _) = best.expect("free RB exists while UEs are pending");
            occ[z * self.f + i] += 1;
            slot[ue] = Some(Slot { cluster: z, carrier: i });
        }
        self.evaluate(Individual {
            columns,
            alpha,
            slot: slot.into_iter().map(|s| s.expect("all placed")).collect(),
            fitness: 0.0,
        })
    }

    fn swap<R: Rng + ?Sized>(&self, ind: &mut Individual, rng: &mut R) {
        if self.k < 2 {
            return;
        }
        let a = rng.random_range(0..self.k);
        let mut b = rng.random_range(0..self.k - 1);
        if b >= a {
            b += 1;
        }
        ind.slot.swap(a, b);
    }

    fn redraw<R: Rng + ?Sized>(&self, ind: &mut Individual, rng: &mut R) {
        let z = rng.random_range(0..self.z);
        ind.columns[z] = rng.random_range(0..self.table.n_columns());
    }

    /// Moves one time slot from one cluster to another and repairs.
    fn shift<R: Rng + ?Sized>(&self, ind: Individual, rng: &mut R) -> Individual {
        let donors: Vec<usize> = (0..self.z).filter(|&z| ind.alpha[z] > 0).collect();
        if self.z < 2 || donors.is_empty() {
            return ind;
        }
        let from = donors[rng.random_range(0..donors.len())];
        let mut to = rng.random_range(0..self.z - 1);
        if to >= from {
            to += 1;
        }
        let mut alpha = ind.alpha.clone();
        alpha[from] -= 1;
        alpha[to] += 1;
        let mut partial: Vec<Option<Slot>> = ind.slot.iter().copied().map(Some).collect();
        for i in 0..self.f {
            let on_rb: Vec<usize> = (0..self.k)
                .filter(|&k| ind.slot[k] == Slot { cluster: from, carrier: i })
                .collect();
            let evict = on_rb[rng.random_range(0..on_rb.len())];
            partial[evict] = None;
        }
        self.repair(ind.columns, alpha, partial, rng)
    }

    fn mutate<R: Rng + ?Sized>(&self, mut ind: Individual, rng: &mut R) -> Individual {
        let u: f64 = rng.random();
        if u < 0.5 {
            self.swap(&mut ind, rng);
            self.evaluate(ind)
        } else if u < 0.8 {
            self.redraw(&mut ind, rng);
            self.evaluate(ind)
        } else {
            self.shift(ind, rng)
        }
    }

    /// Child of `a` that inherits configuration, slot count and members of
    /// one random cluster from `b`.
    fn crossover<R: Rng + ?Sized>(&self, a: &Individual, b: &Individual, rng: &mut R) -> Individual {
        let z = rng.random_range(0..self.z);
        let mut columns = a.columns.clone();
        columns[z] = b.columns[z];
        let mut alpha = a.alpha.clone();
        alpha[z] = b.alpha[z];
        let slots = a.alpha.iter().sum::<usize>();
        let mut total: usize = alpha.iter().sum();
        while total != slots {
            let others: Vec<usize> = (0..self.z)
                .filter(|&o| o != z && (total < slots || alpha[o] > 0))
                .collect();
            let o = others[rng.random_range(0..others.len())];
            if total > slots {
                alpha[o] -= 1;
                total -= 1;
            } else {
                alpha[o] += 1;
                total += 1;
            }
        }
        let mut occ = vec![0usize; self.z * self.f];
        let mut partial: Vec<Option<Slot>> = vec![None; self.k];
        for k in 0..self.k {
            if b.slot[k].cluster == z {
                partial[k] = Some(b.slot[k]);
                occ[z * self.f + b.slot[k].carrier] += 1;
            }
        }
        for (cell, &s) in partial.iter_mut().zip(&a.slot) {
            if cell.is_none() && s.cluster != z && occ[s.cluster * self.f + s.carrier] < alpha[s.cluster] {
                *cell = Some(s);
                occ[s.cluster * self.f + s.carrier] += 1;
            }
        }
        self.repair(columns, alpha, partial, rng)
    }

    fn tournament<'p, R: Rng + ?Sized>(&self, pop: &'p [Individual], rng: &mut R) -> &'p Individual {
        let a = &pop[rng.random_range(0..pop.len())];
        let b = &pop[rng.random_range(0..pop.len())];
        if b.fitness > a.fitness {
            b
        } else {
            a
        }
    }
}

/// Refines `seed_solution` with an elitist genetic algorithm whose fitness
/// is the frame sum rate.
///
/// The initial population holds the seed and perturbed copies of it. Each
/// generation keeps the `elitism` best individuals and refills the rest with
/// children bred by binary tournament, cluster crossover and mutation (RB
/// swap, codeword re-draw or slot transfer). The result is never worse than
/// the seed.
pub fn ga<R: Rng + ?Sized>(
    table: &RateTable,
    cfg: &ScenarioConfig,
    seed_solution: &AssignmentGrid,
    rng: &mut R,
) -> Result<AssignmentGrid> {
    check_instance(table, cfg)?;
    if seed_solution.relaxed {
        return Err(Error::InvalidArgument("GA seed must not be relaxed".into()));
    }
    if let Err(v) = validate(seed_solution, cfg) {
        return Err(Error::InvalidArgument(format!(
            "infeasible GA seed: {}",
            v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
        )));
    }
    let columns = seed_solution
        .configs
        .iter()
        .map(|&cw| {
            table.column(cw).ok_or_else(|| {
                Error::InvalidArgument(format!("seed codeword {cw} not in the rate table"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ctx = Ctx {
        table,
        k: cfg.k,
        f: cfg.f,
        z: cfg.z,
    };
    let seed = ctx.evaluate(Individual {
        columns,
        alpha: seed_solution.alpha.clone(),
        slot: seed_solution.assign.iter().map(|s| s.expect("validated")).collect(),
        fitness: 0.0,
    });
    if cfg.ga.generations == 0 {
        return Ok(seed_solution.clone());
    }

    let pop_size = cfg.ga.population.max(1);
    let elites = cfg.ga.elitism.clamp(1, pop_size);
    let mut pop = vec![seed.clone()];
    while pop.len() < pop_size {
        let mut ind = seed.clone();
        for _ in 0..rng.random_range(1..=3) {
            ind = ctx.mutate(ind, rng);
        }
        pop.push(ind);
    }
    let mut best = seed;
    for _ in 0..cfg.ga.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| pop[b].fitness.total_cmp(&pop[a].fitness).then(a.cmp(&b)));
        let mut next: Vec<Individual> = order[..elites].iter().map(|&i| pop[i].clone()).collect();
        while next.len() < pop_size {
            let a = ctx.tournament(&pop, rng);
            let b = ctx.tournament(&pop, rng);
            let mut child = ctx.crossover(a, b, rng);
            if rng.random::<f64>() < cfg.ga.mutation_rate {
                child = ctx.mutate(child, rng);
            }
            next.push(child);
        }
        pop = next;
        for ind in &pop {
            if ind.fitness > best.fitness {
                best = ind.clone();
            }
        }
    }

    let mut p = Placement::new(cfg.k, cfg.z, cfg.f);
    p.alpha = best.alpha;
    p.columns = best.columns;
    for (k, s) in best.slot.iter().enumerate() {
        p.place(k, s.cluster, s.carrier);
    }
    Ok(p.into_grid(table, false))
}
