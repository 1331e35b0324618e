//! Typed batch hooks and the manager that validates and runs them.
//!
//! A hook declares the attributes it requires and the attributes it
//! produces. Hooks are registered under activation keys (`"train"`,
//! `"val"`, ...); the hooks of one key form a recipe that must admit a
//! topological order of the relation "`a` produces something `b` requires".
//! Ties in that order are broken by registration order.

mod builtin;

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};
use std::cmp::Reverse;
use std::fmt;
use std::sync::{Arc, Mutex, MutexGuard};

use crate::attrs::{self, AttrMap};
use crate::error::{Error, Result};
use crate::loader::MaterializedBatch;

pub use builtin::{
    NegativeSource, PrecomputedNegativesHook, RecencyNeighborHook, UniformNegativesHook,
    UniformNeighborHook,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HookContract {
    pub name: String,
    pub requires: BTreeSet<String>,
    pub produces: BTreeSet<String>,
    pub stateful: bool,
}

impl HookContract {
    pub fn new(name: impl Into<String>) -> Self {
        HookContract {
            name: name.into(),
            requires: BTreeSet::new(),
            produces: BTreeSet::new(),
            stateful: false,
        }
    }

    pub fn requires<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.requires.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn produces<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.produces.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn stateful(mut self, stateful: bool) -> Self {
        self.stateful = stateful;
        self
    }

    fn check_disjoint(&self) -> Result<()> {
        let overlap: Vec<String> = self.requires.intersection(&self.produces).cloned().collect();
        if overlap.is_empty() {
            Ok(())
        } else {
            Err(Error::OverlappingContract {
                name: self.name.clone(),
                attrs: overlap,
            })
        }
    }

    /// Whether this hook must run before `other`.
    pub fn feeds(&self, other: &HookContract) -> bool {
        self.produces.iter().any(|a| other.requires.contains(a))
    }
}

/// A batch transformation. `run` returns exactly the attributes named in
/// the contract's `produces` set.
pub trait Hook: Send {
    fn contract(&self) -> &HookContract;

    fn run(&mut self, batch: &MaterializedBatch) -> Result<AttrMap>;

    /// Restores post-construction state. Only called for stateful hooks.
    fn reset(&mut self) {}
}

/// Shared handle to a hook instance. Registering one handle under several
/// keys shares its state between them.
#[derive(Clone)]
pub struct HookHandle {
    contract: HookContract,
    hook: Arc<Mutex<dyn Hook>>,
}

impl HookHandle {
    pub fn new<H: Hook + 'static>(hook: H) -> Self {
        HookHandle {
            contract: hook.contract().clone(),
            hook: Arc::new(Mutex::new(hook)),
        }
    }

    pub fn contract(&self) -> &HookContract {
        &self.contract
    }

    pub fn name(&self) -> &str {
        &self.contract.name
    }

    fn lock(&self) -> MutexGuard<'_, dyn Hook + 'static> {
        self.hook.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn same_instance(&self, other: &HookHandle) -> bool {
        Arc::ptr_eq(&self.hook, &other.hook)
    }
}

impl fmt::Debug for HookHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HookHandle").field("contract", &self.contract).finish()
    }
}

/// A validated execution order over a list of hooks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recipe {
    pub hooks: Vec<HookContract>,
    /// Indices into `hooks` in execution order.
    pub order: Vec<usize>,
}

impl Recipe {
    pub fn ordered_names(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.hooks[i].name.as_str()).collect()
    }
}

/// Orders `hooks` topologically by the produces/requires relation.
pub fn validate_recipe<S: AsRef<str>>(hooks: &[HookContract], builtins: &[S]) -> Result<Recipe> {
    for h in hooks {
        h.check_disjoint()?;
    }

    let mut available: HashSet<&str> = builtins.iter().map(AsRef::as_ref).collect();
    for h in hooks {
        available.extend(h.produces.iter().map(String::as_str));
    }
    for h in hooks {
        if let Some(missing) = h.requires.iter().find(|r| !available.contains(r.as_str())) {
            return Err(Error::MissingAttribute {
                hook: h.name.clone(),
                attr: missing.clone(),
            });
        }
    }

    let n = hooks.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && hooks[i].feeds(&hooks[j]) {
                succ[i].push(j);
                indegree[j] += 1;
            }
        }
    }

    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }

    if order.len() < n {
        return Err(Error::CyclicRecipe(cycle_witness(hooks, &indegree)));
    }
    Ok(Recipe {
        hooks: hooks.to_vec(),
        order,
    })
}

/// Walks predecessors among the unsorted hooks until one repeats.
fn cycle_witness(hooks: &[HookContract], indegree: &[usize]) -> Vec<String> {
    let stuck: Vec<usize> = (0..hooks.len()).filter(|&i| indegree[i] > 0).collect();
    let mut path = vec![stuck[0]];
    let mut pos: HashMap<usize, usize> = HashMap::from([(stuck[0], 0)]);
    loop {
        let cur = *path.last().expect("non-empty");
        // every stuck hook has a stuck predecessor
        let pred = stuck
            .iter()
            .copied()
            .find(|&p| p != cur && hooks[p].feeds(&hooks[cur]))
            .expect("stuck hook has a stuck predecessor");
        if let Some(&at) = pos.get(&pred) {
            let mut cycle: Vec<String> = path[at..].iter().rev().map(|&i| hooks[i].name.clone()).collect();
            cycle.push(cycle[0].clone());
            return cycle;
        }
        pos.insert(pred, path.len());
        path.push(pred);
    }
}

/// Registry of hooks per activation key.
#[derive(Debug, Default)]
pub struct HookManager {
    registry: BTreeMap<String, Vec<HookHandle>>,
    validated: HashMap<String, Recipe>,
}

impl HookManager {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, key: &str, hook: HookHandle) -> Result<()> {
        if key.is_empty() {
            return Err(Error::EmptyKey);
        }
        hook.contract().check_disjoint()?;
        let list = self.registry.entry(key.to_string()).or_default();
        if list.iter().any(|h| h.name() == hook.name()) {
            return Err(Error::DuplicateHook {
                key: key.to_string(),
                name: hook.name().to_string(),
            });
        }
        list.push(hook);
        self.validated.remove(key);
        Ok(())
    }

    /// Registers one shared instance under every key.
    pub fn register_shared(&mut self, keys: &[&str], hook: HookHandle) -> Result<()> {
        for key in keys {
            self.register(key, hook.clone())?;
        }
        Ok(())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.registry.keys().map(String::as_str)
    }

    /// Hook names under `key` in registration order.
    pub fn hook_names(&self, key: &str) -> Vec<&str> {
        self.registry
            .get(key)
            .map(|l| l.iter().map(HookHandle::name).collect())
            .unwrap_or_default()
    }

    /// Validates (once) and returns the recipe for `key`.
    pub fn recipe(&mut self, key: &str) -> Result<&Recipe> {
        if !self.validated.contains_key(key) {
            let contracts: Vec<HookContract> = self
                .registry
                .get(key)
                .map(|l| l.iter().map(|h| h.contract().clone()).collect())
                .unwrap_or_default();
            let recipe = validate_recipe(&contracts, &attrs::BUILTINS)?;
            self.validated.insert(key.to_string(), recipe);
        }
        Ok(&self.validated[key])
    }

    pub fn is_validated(&self, key: &str) -> bool {
        self.validated.contains_key(key)
    }

    /// Runs the recipe for `key` over `batch`.
    pub fn execute(&mut self, key: &str, mut batch: MaterializedBatch) -> Result<MaterializedBatch> {
        let order = self.recipe(key)?.order.clone();
        let Some(hooks) = self.registry.get(key) else {
            return Ok(batch);
        };
        for i in order {
            let handle = &hooks[i];
            let produced = handle.lock().run(&batch).map_err(|e| Error::Hook {
                hook: handle.name().to_string(),
                source: Box::new(e),
            })?;
            let declared = &handle.contract().produces;
            if produced.len() != declared.len() || !produced.keys().all(|k| declared.contains(k)) {
                return Err(Error::ContractViolation {
                    hook: handle.name().to_string(),
                    declared: declared.iter().cloned().collect(),
                    produced: produced.keys().cloned().collect(),
                });
            }
            batch.attrs.extend(produced);
        }
        Ok(batch)
    }

    /// Resets the state of every stateful hook once, whatever the number of
    /// keys it is registered under.
    pub fn reset(&mut self) {
        let mut done: Vec<&HookHandle> = Vec::new();
        for handle in self.registry.values().flatten() {
            if !handle.contract().stateful || done.iter().any(|d| d.same_instance(handle)) {
                continue;
            }
            handle.lock().reset();
            done.push(handle);
        }
    }
}
