//! Finite sets, total functions between them, binary relations, and the
//! handful of (co)limit constructions everything else is built from:
//! pullbacks, pushouts, image factorizations, and equivalence closure.
//!
//! All constructions are deterministic: identical inputs produce identical
//! element orderings. Derived sets (pullback carriers, quotient classes,
//! images) are ordered by the canonical text form of their elements.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::value::Value;

/// A finite set with a fixed, deterministic iteration order.
#[derive(Debug, Clone)]
pub struct FinSet {
    elems: Vec<Value>,
    index: HashMap<Value, usize>,
}

impl PartialEq for FinSet {
    fn eq(&self, other: &Self) -> bool {
        self.elems == other.elems
    }
}
impl Eq for FinSet {}

impl FinSet {
    /// Builds a set from distinct elements, keeping the given order.
    pub fn new(elems: Vec<Value>) -> Result<Self> {
        let mut index = HashMap::with_capacity(elems.len());
        for (i, e) in elems.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(Error::domain(format!("duplicate element {e}")));
            }
        }
        Ok(FinSet { elems, index })
    }

    /// Builds a set of named atoms.
    pub fn of_atoms<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        FinSet::new(names.into_iter().map(|n| Value::Atom(n.into())).collect())
    }

    /// Deduplicates and orders elements by canonical text form.
    pub fn from_unordered(elems: impl IntoIterator<Item = Value>) -> Self {
        let dedup: BTreeSet<Value> = elems.into_iter().collect();
        let mut elems: Vec<Value> = dedup.into_iter().collect();
        elems.sort_by_cached_key(Value::canon);
        FinSet::new(elems).expect("deduplicated elements cannot collide")
    }

    pub fn empty() -> Self {
        FinSet { elems: Vec::new(), index: HashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.elems.iter()
    }

    pub fn elems(&self) -> &[Value] {
        &self.elems
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.index.contains_key(v)
    }

    pub fn position(&self, v: &Value) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Set equality irrespective of iteration order.
    pub fn same_elements(&self, other: &FinSet) -> bool {
        self.len() == other.len() && self.iter().all(|e| other.contains(e))
    }
}

/// A total function between finite sets, stored as an index table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinFunction {
    dom: FinSet,
    cod: FinSet,
    map: Vec<usize>,
}

impl FinFunction {
    /// Builds a function from an explicit assignment.
    pub fn new(dom: FinSet, cod: FinSet, assign: impl Fn(&Value) -> Value) -> Result<Self> {
        let mut map = Vec::with_capacity(dom.len());
        for e in dom.iter() {
            let target = assign(e);
            let i = cod
                .position(&target)
                .ok_or_else(|| Error::domain(format!("{target} is not in the codomain")))?;
            map.push(i);
        }
        Ok(FinFunction { dom, cod, map })
    }

    /// Builds a function from (argument, value) pairs; every domain element
    /// must be assigned exactly once.
    pub fn from_pairs(
        dom: FinSet,
        cod: FinSet,
        pairs: impl IntoIterator<Item = (Value, Value)>,
    ) -> Result<Self> {
        let mut table: HashMap<Value, Value> = HashMap::new();
        for (a, b) in pairs {
            if table.insert(a.clone(), b).is_some() {
                return Err(Error::domain(format!("{a} assigned twice")));
            }
        }
        let mut map = Vec::with_capacity(dom.len());
        for e in dom.iter() {
            let target = table
                .get(e)
                .ok_or_else(|| Error::domain(format!("no value assigned to {e}")))?;
            let i = cod
                .position(target)
                .ok_or_else(|| Error::domain(format!("{target} is not in the codomain")))?;
            map.push(i);
        }
        FinFunction::check_extraneous(&dom, table.keys())?;
        Ok(FinFunction { dom, cod, map })
    }

    fn check_extraneous<'a>(dom: &FinSet, keys: impl Iterator<Item = &'a Value>) -> Result<()> {
        for k in keys {
            if !dom.contains(k) {
                return Err(Error::domain(format!("{k} is not in the domain")));
            }
        }
        Ok(())
    }

    pub fn identity(set: &FinSet) -> Self {
        FinFunction {
            dom: set.clone(),
            cod: set.clone(),
            map: (0..set.len()).collect(),
        }
    }

    pub fn dom(&self) -> &FinSet {
        &self.dom
    }

    pub fn cod(&self) -> &FinSet {
        &self.cod
    }

    pub fn apply(&self, v: &Value) -> Result<&Value> {
        let i = self
            .dom
            .position(v)
            .ok_or_else(|| Error::domain(format!("{v} is not in the domain")))?;
        Ok(&self.cod.elems()[self.map[i]])
    }

    /// `self` after `first`: returns `self ∘ first`.
    pub fn compose_after(&self, first: &FinFunction) -> Result<FinFunction> {
        if first.cod != self.dom {
            return Err(Error::domain(
                "composition mismatch: codomain of the first function differs from the domain of the second",
            ));
        }
        Ok(FinFunction {
            dom: first.dom.clone(),
            cod: self.cod.clone(),
            map: first.map.iter().map(|&i| self.map[i]).collect(),
        })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.cod.len()];
        for &i in &self.map {
            if seen[i] {
                return false;
            }
            seen[i] = true;
        }
        true
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.cod.len()];
        for &i in &self.map {
            seen[i] = true;
        }
        seen.iter().all(|&s| s)
    }

    pub fn graph(&self) -> impl Iterator<Item = (&Value, &Value)> {
        self.dom
            .iter()
            .enumerate()
            .map(|(i, e)| (e, &self.cod.elems()[self.map[i]]))
    }
}

/// A binary relation between two carriers, stored as a canonical pair set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    left: FinSet,
    right: FinSet,
    pairs: BTreeSet<(Value, Value)>,
}

impl Relation {
    pub fn new(
        left: FinSet,
        right: FinSet,
        pairs: impl IntoIterator<Item = (Value, Value)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            if !left.contains(&a) {
                return Err(Error::domain(format!("{a} is not in the left carrier")));
            }
            if !right.contains(&b) {
                return Err(Error::domain(format!("{b} is not in the right carrier")));
            }
            set.insert((a, b));
        }
        Ok(Relation { left, right, pairs: set })
    }

    pub fn empty(left: FinSet, right: FinSet) -> Self {
        Relation { left, right, pairs: BTreeSet::new() }
    }

    pub fn full(left: FinSet, right: FinSet) -> Self {
        let pairs = left
            .iter()
            .flat_map(|a| right.iter().map(move |b| (a.clone(), b.clone())))
            .collect();
        Relation { left, right, pairs }
    }

    pub fn diagonal(carrier: FinSet) -> Self {
        let pairs = carrier.iter().map(|e| (e.clone(), e.clone())).collect();
        Relation { left: carrier.clone(), right: carrier, pairs }
    }

    pub fn left(&self) -> &FinSet {
        &self.left
    }

    pub fn right(&self) -> &FinSet {
        &self.right
    }

    pub fn pairs(&self) -> &BTreeSet<(Value, Value)> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: &Value, b: &Value) -> bool {
        self.pairs.contains(&(a.clone(), b.clone()))
    }

    /// Containment check; the carriers must agree (as sets).
    pub fn leq(&self, other: &Relation) -> Result<bool> {
        if !self.left.same_elements(&other.left) || !self.right.same_elements(&other.right) {
            return Err(Error::domain("relation carriers differ"));
        }
        Ok(self.pairs.is_subset(&other.pairs))
    }

    /// The carrier of pairs together with the two projection functions.
    pub fn span(&self) -> (FinSet, FinFunction, FinFunction) {
        let carrier = FinSet::from_unordered(
            self.pairs.iter().map(|(a, b)| Value::pair(a.clone(), b.clone())),
        );
        let proj = |side: usize| {
            let target = if side == 0 { &self.left } else { &self.right };
            let mut map = Vec::with_capacity(carrier.len());
            for e in carrier.iter() {
                let Value::Pair(a, b) = e else { unreachable!("pair carrier") };
                let component = if side == 0 { a } else { b };
                map.push(target.position(component).expect("validated on construction"));
            }
            FinFunction { dom: carrier.clone(), cod: target.clone(), map }
        };
        let p = proj(0);
        let q = proj(1);
        (carrier, p, q)
    }

    pub fn is_reflexive(&self) -> bool {
        self.left.same_elements(&self.right)
            && self.left.iter().all(|e| self.pairs.contains(&(e.clone(), e.clone())))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs.iter().all(|(a, b)| self.pairs.contains(&(b.clone(), a.clone())))
    }

    pub fn is_transitive(&self) -> bool {
        self.pairs.iter().all(|(a, b)| {
            self.pairs
                .iter()
                .filter(|(b2, _)| b2 == b)
                .all(|(_, c)| self.pairs.contains(&(a.clone(), c.clone())))
        })
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_reflexive() && self.is_symmetric() && self.is_transitive()
    }
}

/// Two functions into a shared apex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cospan {
    left_leg: FinFunction,
    right_leg: FinFunction,
}

impl Cospan {
    pub fn new(left_leg: FinFunction, right_leg: FinFunction) -> Result<Self> {
        if left_leg.cod() != right_leg.cod() {
            return Err(Error::domain("cospan legs have different apexes"));
        }
        Ok(Cospan { left_leg, right_leg })
    }

    pub fn left_leg(&self) -> &FinFunction {
        &self.left_leg
    }

    pub fn right_leg(&self) -> &FinFunction {
        &self.right_leg
    }

    pub fn apex(&self) -> &FinSet {
        self.left_leg.cod()
    }
}

/// The pullback of a cospan, as the relation `{(a,b) | f(a) = g(b)}`.
pub fn pullback(f: &FinFunction, g: &FinFunction) -> Result<Relation> {
    if f.cod() != g.cod() {
        return Err(Error::domain("pullback requires a shared codomain"));
    }
    let mut pairs = BTreeSet::new();
    for (i, a) in f.dom().iter().enumerate() {
        for (j, b) in g.dom().iter().enumerate() {
            if f.map[i] == g.map[j] {
                pairs.insert((a.clone(), b.clone()));
            }
        }
    }
    Ok(Relation { left: f.dom().clone(), right: g.dom().clone(), pairs })
}

/// The kernel pair of a function: the pullback of the function against itself.
pub fn kernel_pair(f: &FinFunction) -> Relation {
    pullback(f, f).expect("a function shares its own codomain")
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Disjoint union `X + Y`, with elements tagged `inl`/`inr`.
pub fn disjoint_union_set(x: &FinSet, y: &FinSet) -> FinSet {
    let mut elems: Vec<Value> = x.iter().map(|v| Value::Inl(Box::new(v.clone()))).collect();
    elems.extend(y.iter().map(|v| Value::Inr(Box::new(v.clone()))));
    FinSet::new(elems).expect("tags keep the halves disjoint")
}

/// The pushout of a span `X <-p- R -q-> Y`: the quotient of `X + Y` by the
/// smallest equivalence relating `p(r)` and `q(r)` for every `r`.
///
/// Quotient classes are represented as the set of their (tagged) members, so
/// class names are reproducible.
pub fn pushout(p: &FinFunction, q: &FinFunction) -> Result<Cospan> {
    if p.dom() != q.dom() {
        return Err(Error::domain("pushout requires a shared span domain"));
    }
    let x = p.cod();
    let y = q.cod();
    let n = x.len() + y.len();
    let mut uf = UnionFind::new(n);
    for i in 0..p.dom().len() {
        uf.union(p.map[i], x.len() + q.map[i]);
    }
    let mut class_members: BTreeMap<usize, BTreeSet<Value>> = BTreeMap::new();
    for (i, v) in x.iter().enumerate() {
        class_members
            .entry(uf.find(i))
            .or_default()
            .insert(Value::Inl(Box::new(v.clone())));
    }
    for (j, v) in y.iter().enumerate() {
        class_members
            .entry(uf.find(x.len() + j))
            .or_default()
            .insert(Value::Inr(Box::new(v.clone())));
    }
    let mut root_to_class: HashMap<usize, Value> = HashMap::new();
    let mut classes = Vec::new();
    for (root, members) in class_members {
        let class = Value::Set(members);
        root_to_class.insert(root, class.clone());
        classes.push(class);
    }
    classes.sort_by_cached_key(Value::canon);
    let apex = FinSet::new(classes)?;
    let left_leg = {
        let mut map = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let class = &root_to_class[&uf.find(i)];
            map.push(apex.position(class).expect("class is in the apex"));
        }
        FinFunction { dom: x.clone(), cod: apex.clone(), map }
    };
    let right_leg = {
        let mut map = Vec::with_capacity(y.len());
        for j in 0..y.len() {
            let class = &root_to_class[&uf.find(x.len() + j)];
            map.push(apex.position(class).expect("class is in the apex"));
        }
        FinFunction { dom: y.clone(), cod: apex, map }
    };
    Cospan::new(left_leg, right_leg)
}

/// Factors `f` as a surjection onto its image followed by the inclusion.
pub fn image_factorization(f: &FinFunction) -> (FinFunction, FinFunction) {
    let mut attained = vec![false; f.cod().len()];
    for &i in &f.map {
        attained[i] = true;
    }
    let image_elems: Vec<Value> = f
        .cod()
        .iter()
        .enumerate()
        .filter(|(i, _)| attained[*i])
        .map(|(_, v)| v.clone())
        .collect();
    let image = FinSet::new(image_elems).expect("subset of a valid set");
    let cover = FinFunction {
        dom: f.dom().clone(),
        cod: image.clone(),
        map: f
            .map
            .iter()
            .map(|&i| image.position(&f.cod().elems()[i]).expect("attained"))
            .collect(),
    };
    let mono = FinFunction {
        dom: image.clone(),
        cod: f.cod().clone(),
        map: image
            .iter()
            .map(|v| f.cod().position(v).expect("image is a subset"))
            .collect(),
    };
    (cover, mono)
}

/// The smallest equivalence containing `r`; requires `r` to be endo
/// (left and right carriers equal as sets).
pub fn equivalence_closure(r: &Relation) -> Result<Relation> {
    if !r.left.same_elements(&r.right) {
        return Err(Error::domain(
            "equivalence closure needs matching carriers",
        ));
    }
    let carrier = r.left.clone();
    let mut uf = UnionFind::new(carrier.len());
    for (a, b) in r.pairs.iter() {
        let i = carrier.position(a).expect("validated");
        let j = carrier.position(b).expect("validated");
        uf.union(i, j);
    }
    let mut pairs = BTreeSet::new();
    for (i, a) in carrier.iter().enumerate() {
        for (j, b) in carrier.iter().enumerate() {
            if uf.find(i) == uf.find(j) {
                pairs.insert((a.clone(), b.clone()));
            }
        }
    }
    Ok(Relation { left: carrier.clone(), right: carrier, pairs })
}

/// Quotients a carrier by an equivalence relation, returning the class set
/// (classes are the sets of their members) and the projection.
pub fn quotient_by_equivalence(carrier: &FinSet, eq: &Relation) -> Result<(FinSet, FinFunction)> {
    if !eq.left.same_elements(carrier) || !eq.is_equivalence() {
        return Err(Error::domain("quotient requires an equivalence on the carrier"));
    }
    let mut class_of: HashMap<Value, Value> = HashMap::new();
    let mut classes: Vec<Value> = Vec::new();
    for e in carrier.iter() {
        if class_of.contains_key(e) {
            continue;
        }
        let members: BTreeSet<Value> = carrier
            .iter()
            .filter(|m| eq.pairs.contains(&(e.clone(), (*m).clone())))
            .cloned()
            .collect();
        let class = Value::Set(members.clone());
        for m in members {
            class_of.insert(m, class.clone());
        }
        classes.push(class);
    }
    classes.sort_by_cached_key(Value::canon);
    classes.dedup();
    let class_set = FinSet::new(classes)?;
    let proj = FinFunction::new(carrier.clone(), class_set.clone(), |v| class_of[v].clone())?;
    Ok((class_set, proj))
}
