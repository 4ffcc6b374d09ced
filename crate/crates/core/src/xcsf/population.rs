//! Macroclassifier storage with micro-count accounting.

use std::io::{BufRead, Write};
use std::path::Path;

use super::classifier::{Classifier, ClassifierRecord};
use super::condition::InputSpace;
use crate::env::{Action, State, NUM_ACTIONS};
use crate::error::{Error, Result};
use crate::oracle::QFunction;

/// Handle to a macroclassifier. Stays valid until that classifier is removed;
/// stale handles resolve to `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassifierRef {
    slot: u32,
    id: u64,
}

#[derive(Debug, Clone, Default)]
pub struct Population {
    slots: Vec<Option<Classifier>>,
    free: Vec<usize>,
    micro: u64,
    macro_count: usize,
    next_id: u64,
}

impl Population {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn micro_count(&self) -> u64 {
        self.micro
    }

    pub fn macro_count(&self) -> usize {
        self.macro_count
    }

    pub fn is_empty(&self) -> bool {
        self.macro_count == 0
    }

    pub fn get(&self, r: ClassifierRef) -> Option<&Classifier> {
        self.slots
            .get(r.slot as usize)?
            .as_ref()
            .filter(|c| c.id == r.id)
    }

    /// Mutable access. Numerosity must be changed through [`Population::add_numerosity`]
    /// or [`Population::remove_one`] to keep the micro count consistent.
    pub fn get_mut(&mut self, r: ClassifierRef) -> Option<&mut Classifier> {
        self.slots
            .get_mut(r.slot as usize)?
            .as_mut()
            .filter(|c| c.id == r.id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassifierRef, &Classifier)> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, c)| {
            c.as_ref().map(|c| {
                (
                    ClassifierRef {
                        slot: i as u32,
                        id: c.id,
                    },
                    c,
                )
            })
        })
    }

    pub fn classifiers(&self) -> impl Iterator<Item = &Classifier> + '_ {
        self.slots.iter().flatten()
    }

    /// Classifiers in creation order.
    pub fn sorted_by_id(&self) -> Vec<&Classifier> {
        let mut v: Vec<&Classifier> = self.classifiers().collect();
        v.sort_by_key(|c| c.id);
        v
    }

    pub fn find_rule(&self, cl: &Classifier) -> Option<ClassifierRef> {
        self.iter().find(|(_, c)| c.same_rule(cl)).map(|(r, _)| r)
    }

    /// Inserts `cl`, merging its numerosity into an existing macroclassifier
    /// with the same condition and action if one exists.
    pub fn insert(&mut self, cl: Classifier) -> ClassifierRef {
        if let Some(r) = self.find_rule(&cl) {
            self.add_numerosity(r, cl.numerosity);
            return r;
        }
        self.push_new(cl)
    }

    /// Inserts without a duplicate check, assigning a fresh id.
    fn push_new(&mut self, mut cl: Classifier) -> ClassifierRef {
        cl.id = self.next_id;
        self.next_id += 1;
        self.push_with_id(cl)
    }

    fn push_with_id(&mut self, cl: Classifier) -> ClassifierRef {
        self.micro += cl.numerosity as u64;
        self.macro_count += 1;
        let id = cl.id;
        let slot = match self.free.pop() {
            Some(i) => {
                self.slots[i] = Some(cl);
                i
            }
            None => {
                self.slots.push(Some(cl));
                self.slots.len() - 1
            }
        };
        ClassifierRef {
            slot: slot as u32,
            id,
        }
    }

    pub fn add_numerosity(&mut self, r: ClassifierRef, n: u32) {
        let c = self.get_mut(r).expect("live classifier");
        c.numerosity += n;
        self.micro += n as u64;
    }

    /// Removes one microclassifier; the macroclassifier disappears at zero.
    /// Returns true if the macroclassifier was removed.
    pub fn remove_one(&mut self, r: ClassifierRef) -> bool {
        let c = self.get_mut(r).expect("live classifier");
        c.numerosity -= 1;
        let gone = c.numerosity == 0;
        self.micro -= 1;
        if gone {
            self.slots[r.slot as usize] = None;
            self.free.push(r.slot as usize);
            self.macro_count -= 1;
        }
        gone
    }

    /// Removes a whole macroclassifier, returning it.
    pub fn remove(&mut self, r: ClassifierRef) -> Option<Classifier> {
        self.get(r)?;
        let c = self.slots[r.slot as usize].take().expect("checked above");
        self.free.push(r.slot as usize);
        self.micro -= c.numerosity as u64;
        self.macro_count -= 1;
        Some(c)
    }

    /// Keeps only the macroclassifiers for which `keep` returns true.
    pub fn retain(&mut self, mut keep: impl FnMut(&Classifier) -> bool) {
        let doomed: Vec<ClassifierRef> = self
            .iter()
            .filter(|(_, c)| !keep(c))
            .map(|(r, _)| r)
            .collect();
        for r in doomed {
            self.remove(r);
        }
    }

    pub fn matching<'a>(
        &'a self,
        space: &'a InputSpace,
        s: State,
    ) -> impl Iterator<Item = (ClassifierRef, &'a Classifier)> + 'a {
        self.iter().filter(move |(_, c)| c.matches(space, s))
    }

    /// Builds a population from classifiers that already carry ids (no merging).
    pub fn from_classifiers(classifiers: impl IntoIterator<Item = Classifier>) -> Self {
        let mut pop = Population::new();
        for c in classifiers {
            pop.next_id = pop.next_id.max(c.id + 1);
            pop.push_with_id(c);
        }
        pop
    }

    /// Writes one JSON record per macroclassifier, in creation order.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for c in self.sorted_by_id() {
            serde_json::to_writer(&mut out, &ClassifierRecord::from(c))?;
            out.write_all(b"\n").map_err(|e| Error::io("<population>", e))?;
        }
        Ok(())
    }

    /// Reads records written by [`Population::write_jsonl`]; ids follow line order.
    pub fn read_jsonl<R: BufRead>(input: R, origin: &Path) -> Result<Self> {
        let mut classifiers = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |reason: String| Error::Parse {
                path: origin.to_path_buf(),
                reason: format!("line {}: {reason}", lineno + 1),
            };
            let rec: ClassifierRecord =
                serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
            let id = classifiers.len() as u64;
            classifiers.push(rec.into_classifier(id).map_err(parse_err)?);
        }
        Ok(Population::from_classifiers(classifiers))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_jsonl(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Population::read_jsonl(std::io::BufReader::new(file), path)
    }

    /// Fitness-weighted prediction array at `s`; absent actions have no advocates.
    pub fn prediction_array(&self, space: &InputSpace, s: State, x0: f64) -> PredictionArray {
        let input = super::classifier::input_vector(s, x0);
        let mut num = [0.0; NUM_ACTIONS];
        let mut den = [0.0; NUM_ACTIONS];
        for c in self.classifiers().filter(|c| c.matches(space, s)) {
            let a = c.action.index();
            num[a] += c.predict_input(&input) * c.fitness;
            den[a] += c.fitness;
        }
        PredictionArray(std::array::from_fn(|a| (den[a] > 0.0).then(|| num[a] / den[a])))
    }

    /// View of this population as a Q-function.
    pub fn predictor<'a>(&'a self, space: &'a InputSpace, x0: f64) -> PopulationPredictor<'a> {
        PopulationPredictor {
            pop: self,
            space,
            x0,
        }
    }
}

/// System prediction per action; `None` where no classifier advocates the action.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PredictionArray(pub [Option<f64>; NUM_ACTIONS]);

impl PredictionArray {
    pub fn get(&self, a: Action) -> Option<f64> {
        self.0[a.index()]
    }

    pub fn present(&self) -> impl Iterator<Item = (Action, f64)> + '_ {
        Action::ALL
            .into_iter()
            .filter_map(move |a| self.get(a).map(|v| (a, v)))
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(Option::is_none)
    }

    pub fn max(&self) -> Option<f64> {
        self.present().map(|(_, v)| v).reduce(f64::max)
    }

    /// First maximal action in `[L, D, R, U]` order.
    pub fn best_action(&self) -> Option<Action> {
        let mut best: Option<(Action, f64)> = None;
        for (a, v) in self.present() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((a, v));
            }
        }
        best.map(|(a, _)| a)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PopulationPredictor<'a> {
    pub pop: &'a Population,
    pub space: &'a InputSpace,
    pub x0: f64,
}

impl QFunction for PopulationPredictor<'_> {
    fn q_value(&self, s: State, a: Action) -> Option<f64> {
        self.q_values(s)[a.index()]
    }

    fn q_values(&self, s: State) -> [Option<f64>; NUM_ACTIONS] {
        self.pop.prediction_array(self.space, s, self.x0).0
    }
}
