//! Shared test support: a seeded generator of small synthetic corpora and a
//! brute-force replay oracle that never touches the engine.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use normgraph::ingest::format::{
    ComponentRecord, EventFile, EventRecord, InstrumentMeta, NormMeta, SourceDocument, INPUT_FORMAT_VERSION,
};
use normgraph::model::{ActionType, ComponentType, DateStamp, WorkId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_COMPONENTS: usize = 10;
pub const MAX_EVENTS: usize = 15;
pub const SYNTHETIC_URN: &str = "urn:lex:xx:synthetic:lei:2000-01-01;1";

const VOCAB: &[&str] = &[
    "river", "court", "tax", "school", "harbor", "forest", "budget", "council", "road", "water", "energy", "archive",
    "museum", "census", "bridge", "market", "garden", "library", "pension", "hospital",
];

pub fn d(s: &str) -> DateStamp {
    s.parse().unwrap()
}

pub struct Synthetic {
    pub seed: u64,
    pub doc: SourceDocument,
    /// In application order; effective dates never decrease.
    pub events: Vec<EventRecord>,
    pub files: Vec<(String, String)>,
}

impl Synthetic {
    pub fn norm(&self) -> WorkId {
        WorkId::new(self.doc.norm.urn.as_str())
    }

    pub fn enacted(&self) -> DateStamp {
        self.doc.norm.publication_date
    }

    /// Enactment date plus every distinct event date.
    pub fn change_dates(&self) -> Vec<DateStamp> {
        let mut v: Vec<DateStamp> =
            std::iter::once(self.enacted()).chain(self.events.iter().map(|e| e.effective_date)).collect();
        v.dedup();
        v
    }

    pub fn last_date(&self) -> DateStamp {
        self.events.last().map_or(self.enacted(), |e| e.effective_date)
    }
}

#[derive(Clone)]
struct GenNode {
    fragment: String,
    ty: ComponentType,
    parent: Option<usize>,
    children: Vec<usize>,
    text: Option<String>,
    alive: bool,
    /// Start of the current version.
    start: DateStamp,
}

fn sentence(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(3..=7);
    let words: Vec<&str> = (0..n).map(|_| *VOCAB.choose(rng).unwrap()).collect();
    let mut s = words.join(" ");
    s.push('.');
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// Component types that may be placed under `parent` (None = norm root).
fn child_types(parent: Option<&GenNode>) -> Vec<ComponentType> {
    use ComponentType::*;
    match parent.map(|p| (p.ty, p.text.is_some())) {
        None => vec![Chapter, Article],
        Some((Chapter, _)) => vec![Article],
        Some((Article, false)) => vec![Caput, Paragraph],
        Some((Article, true)) => vec![],
        Some((Caput | Paragraph | Item, _)) => vec![Item],
        _ => vec![],
    }
}

struct Gen {
    rng: ChaCha8Rng,
    nodes: Vec<GenNode>,
    root_children: Vec<usize>,
    next_fragment: usize,
}

impl Gen {
    fn fresh_fragment(&mut self) -> String {
        self.next_fragment += 1;
        format!("c{}", self.next_fragment)
    }

    fn add(&mut self, parent: Option<usize>, ty: ComponentType, start: DateStamp) -> usize {
        let fragment = self.fresh_fragment();
        let idx = self.nodes.len();
        self.nodes.push(GenNode { fragment, ty, parent, children: vec![], text: None, alive: true, start });
        match parent {
            Some(p) => self.nodes[p].children.push(idx),
            None => self.root_children.push(idx),
        }
        idx
    }

    fn needs_text(&self, i: usize) -> bool {
        let n = &self.nodes[i];
        n.ty.always_text_bearing() || (n.ty == ComponentType::Article && n.children.is_empty())
    }

    fn record(&self, i: usize) -> ComponentRecord {
        let n = &self.nodes[i];
        ComponentRecord {
            fragment_id: n.fragment.clone(),
            component_type: n.ty,
            ordinal: None,
            heading: format!("{:?} {}", n.ty, n.fragment),
            label: None,
            aliases: vec![],
            text: n.text.clone(),
            synthetic: true,
            children: n.children.iter().map(|c| self.record(*c)).collect(),
        }
    }

    fn alive_subtree(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        let mut k = 0;
        while k < out.len() {
            out.extend(self.nodes[out[k]].children.iter().copied().filter(|c| self.nodes[*c].alive));
            k += 1;
        }
        out
    }

    fn touch_ancestors(&mut self, i: usize, d: DateStamp) {
        let mut cur = self.nodes[i].parent;
        while let Some(p) = cur {
            self.nodes[p].start = d;
            cur = self.nodes[p].parent;
        }
    }
}

/// A reproducible corpus with at most [`MAX_COMPONENTS`] components and
/// [`MAX_EVENTS`] events mixing rewordings, repeals and insertions.
pub fn synthetic_corpus(seed: u64) -> Synthetic {
    let enacted = d("2000-01-01");
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), nodes: vec![], root_children: vec![], next_fragment: 0 };

    let initial = g.rng.gen_range(1..=MAX_COMPONENTS - 2);
    for _ in 0..initial {
        let options: Vec<(Option<usize>, ComponentType)> = std::iter::once(None)
            .chain((0..g.nodes.len()).map(Some))
            .flat_map(|p| child_types(p.map(|i| &g.nodes[i])).into_iter().map(move |t| (p, t)))
            .collect();
        let (parent, ty) = *options.choose(&mut g.rng).unwrap();
        g.add(parent, ty, enacted);
    }
    for i in 0..g.nodes.len() {
        if g.needs_text(i) {
            g.nodes[i].text = Some(sentence(&mut g.rng));
        }
    }
    let doc = SourceDocument {
        format_version: INPUT_FORMAT_VERSION,
        norm: NormMeta {
            urn: SYNTHETIC_URN.to_owned(),
            title: "the synthetic statute".to_owned(),
            short_title: Some("SS".to_owned()),
            publication_date: enacted,
            language: "pt".to_owned(),
            narrative_language: Some("en".to_owned()),
            aliases: vec![],
            metadata: BTreeMap::new(),
        },
        body: g.root_children.iter().map(|c| g.record(*c)).collect(),
    };

    let norm = WorkId::new(SYNTHETIC_URN);
    let mut events = Vec::new();
    let mut date = enacted;
    let n_events = g.rng.gen_range(0..=MAX_EVENTS);
    let mut attempts = 0;
    while events.len() < n_events && attempts < 200 {
        attempts += 1;
        date = date.add_days(g.rng.gen_range(0..=45));
        let alive: Vec<usize> = (0..g.nodes.len()).filter(|i| g.nodes[*i].alive).collect();
        let rewordable: Vec<usize> =
            alive.iter().copied().filter(|i| g.nodes[*i].text.is_some() && g.nodes[*i].start < date).collect();
        let repealable: Vec<usize> =
            alive.iter().copied().filter(|i| g.alive_subtree(*i).iter().all(|s| g.nodes[*s].start < date)).collect();
        let mut parents: Vec<Option<usize>> = vec![None];
        parents.extend(alive.iter().map(|i| Some(*i)));
        parents.retain(|p| !child_types(p.map(|i| &g.nodes[i])).is_empty());
        let can_insert = g.nodes.len() < MAX_COMPONENTS;

        let choice = g.rng.gen_range(0..10);
        let base = EventRecord {
            action_type: ActionType::Amendment,
            source_provision: None,
            source_label: None,
            target: String::new(),
            enactment_date: date,
            effective_date: date,
            new_text: None,
            new_components: None,
            summary: None,
            synthetic: true,
        };
        let event = if choice < 6 && !rewordable.is_empty() {
            let i = *rewordable.choose(&mut g.rng).unwrap();
            let text = sentence(&mut g.rng);
            g.nodes[i].text = Some(text.clone());
            g.nodes[i].start = date;
            g.touch_ancestors(i, date);
            EventRecord {
                target: norm.component(&g.nodes[i].fragment).to_string(),
                new_text: Some([("pt".to_owned(), text)].into_iter().collect()),
                ..base
            }
        } else if choice < 8 && can_insert {
            let parent = *parents.choose(&mut g.rng).unwrap();
            let ty = *child_types(parent.map(|i| &g.nodes[i])).choose(&mut g.rng).unwrap();
            let i = g.add(parent, ty, date);
            // Sometimes insert a paragraph together with one item.
            if ty == ComponentType::Paragraph && g.nodes.len() < MAX_COMPONENTS && g.rng.gen_bool(0.5) {
                let item = g.add(Some(i), ComponentType::Item, date);
                g.nodes[item].text = Some(sentence(&mut g.rng));
            }
            if g.needs_text(i) {
                g.nodes[i].text = Some(sentence(&mut g.rng));
            }
            if let Some(p) = parent {
                g.nodes[p].start = date;
                g.touch_ancestors(p, date);
            }
            let target = parent.map_or_else(|| norm.clone(), |p| norm.component(&g.nodes[p].fragment));
            EventRecord { target: target.to_string(), new_components: Some(g.record(i)), ..base }
        } else if choice < 9 && !repealable.is_empty() {
            let i = *repealable.choose(&mut g.rng).unwrap();
            for s in g.alive_subtree(i) {
                g.nodes[s].alive = false;
            }
            if let Some(p) = g.nodes[i].parent {
                g.nodes[p].start = date;
            }
            g.touch_ancestors(i, date);
            EventRecord {
                action_type: ActionType::Repeal,
                target: norm.component(&g.nodes[i].fragment).to_string(),
                ..base
            }
        } else {
            continue;
        };
        events.push(event);
    }

    let mut files = vec![("doc.satdoc.json".to_owned(), serde_json::to_string(&doc).unwrap())];
    for (k, ev) in events.iter().enumerate() {
        let file = EventFile {
            format_version: INPUT_FORMAT_VERSION,
            instrument: InstrumentMeta {
                urn: format!("urn:lex:xx:synthetic:act:{seed}-{k:03}"),
                title: format!("Synthetic act {k}"),
                short_title: format!("SA {k}"),
            },
            events: vec![ev.clone()],
            themes: vec![],
        };
        files.push((format!("ev{k:03}.satev.json"), serde_json::to_string(&file).unwrap()));
    }
    Synthetic { seed, doc, events, files }
}

// ---------------------------------------------------------------------------
// Aggregation closed form
// ---------------------------------------------------------------------------

/// Parent map over fragments; `None` is the norm root.
#[derive(Default)]
pub struct Tree {
    pub parent: BTreeMap<String, Option<String>>,
    pub children: BTreeMap<Option<String>, Vec<String>>,
}

impl Tree {
    pub fn add(&mut self, parent: Option<String>, rec: &ComponentRecord) {
        self.parent.insert(rec.fragment_id.clone(), parent.clone());
        self.children.entry(parent).or_default().push(rec.fragment_id.clone());
        for c in &rec.children {
            self.add(Some(rec.fragment_id.clone()), c);
        }
    }

    pub fn from_doc(doc: &SourceDocument) -> Self {
        let mut t = Tree::default();
        for r in &doc.body {
            t.add(None, r);
        }
        t
    }

    /// The fragment itself and every ancestor, norm root included (as `None`).
    pub fn path(&self, fragment: Option<&str>) -> Vec<Option<String>> {
        let mut out = vec![fragment.map(str::to_owned)];
        let mut cur = fragment.map(str::to_owned);
        while let Some(f) = cur {
            let p = self.parent[&f].clone();
            out.push(p.clone());
            cur = p;
        }
        out
    }
}

pub fn subtree_size(rec: &ComponentRecord) -> usize {
    1 + rec.children.iter().map(subtree_size).sum::<usize>()
}

/// Closed-form version count: one per component at enactment plus, for each
/// effective date, the union of changed components and their ancestors.
/// Changes on the enactment date itself reuse the enactment versions.
pub fn expected_ctv_count(doc: &SourceDocument, events: &[EventRecord]) -> usize {
    let mut tree = Tree::from_doc(doc);
    let mut per_date: BTreeMap<DateStamp, BTreeSet<Option<String>>> = BTreeMap::new();
    let enacted = per_date.entry(doc.norm.publication_date).or_default();
    enacted.insert(None);
    enacted.extend(tree.parent.keys().cloned().map(Some));
    for ev in events {
        let fragment = ev.target.split_once('!').map(|(_, f)| f.to_owned());
        let touched = per_date.entry(ev.effective_date).or_default();
        match (ev.action_type, &ev.new_components) {
            (ActionType::Repeal, _) => {
                let parent = tree.parent[fragment.as_ref().unwrap()].clone();
                touched.extend(tree.path(parent.as_deref()));
            }
            (_, Some(rec)) => {
                tree.add(fragment.clone(), rec);
                let mut new = Tree::default();
                new.add(None, rec);
                touched.extend(new.parent.keys().cloned().map(Some));
                touched.extend(tree.path(fragment.as_deref()));
            }
            _ => touched.extend(tree.path(fragment.as_deref())),
        }
    }
    per_date.values().map(BTreeSet::len).sum::<usize>()
}

// ---------------------------------------------------------------------------
// Replay oracle
// ---------------------------------------------------------------------------

struct OracleNode {
    children: Vec<String>,
    text: Option<String>,
    alive: bool,
}

#[derive(Default)]
struct Oracle {
    nodes: BTreeMap<String, OracleNode>,
    root: Vec<String>,
}

impl Oracle {
    fn add_record(&mut self, rec: &ComponentRecord) -> String {
        let children = rec.children.iter().map(|c| self.add_record(c)).collect();
        self.nodes.insert(rec.fragment_id.clone(), OracleNode { children, text: rec.text.clone(), alive: true });
        rec.fragment_id.clone()
    }

    fn kill(&mut self, fragment: &str) {
        let children = {
            let n = self.nodes.get_mut(fragment).expect("known fragment");
            n.alive = false;
            n.children.clone()
        };
        for c in children {
            self.kill(&c);
        }
    }

    fn emit(&self, fragment: &str, out: &mut Vec<(String, String)>) {
        let n = &self.nodes[fragment];
        if !n.alive {
            return;
        }
        if let Some(t) = &n.text {
            out.push((fragment.to_owned(), t.clone()));
        }
        for c in &n.children {
            self.emit(c, out);
        }
    }
}

/// Whole-document text at `t` obtained by replaying the document and every
/// event effective on or before `t`, in order: `(fragment, text)` pairs in
/// document order, primary language only.
pub fn replay(doc: &SourceDocument, events: &[EventRecord], t: DateStamp) -> Vec<(String, String)> {
    if t < doc.norm.publication_date {
        return vec![];
    }
    let mut o = Oracle::default();
    o.root = doc.body.iter().map(|r| o.add_record(r)).collect::<Vec<_>>();
    for ev in events.iter().filter(|e| e.effective_date <= t) {
        let fragment = ev.target.split_once('!').map(|(_, f)| f.to_owned());
        match (ev.action_type, &ev.new_text, &ev.new_components) {
            (ActionType::Amendment, Some(texts), None) => {
                let f = fragment.expect("rewording targets a component");
                o.nodes.get_mut(&f).unwrap().text = Some(texts[&doc.norm.language].clone());
            }
            (ActionType::Amendment, None, Some(rec)) => {
                let new = o.add_record(rec);
                match fragment {
                    Some(f) => o.nodes.get_mut(&f).unwrap().children.push(new),
                    None => o.root.push(new),
                }
            }
            (ActionType::Repeal, ..) => o.kill(&fragment.expect("repeal targets a component")),
            other => panic!("oracle cannot replay {other:?}"),
        }
    }
    let mut out = Vec::new();
    for r in &o.root {
        o.emit(r, &mut out);
    }
    out
}

/// Fragments whose components exist in the replayed document at `t`.
pub fn replay_alive(doc: &SourceDocument, events: &[EventRecord], t: DateStamp) -> Vec<String> {
    if t < doc.norm.publication_date {
        return vec![];
    }
    let mut o = Oracle::default();
    o.root = doc.body.iter().map(|r| o.add_record(r)).collect::<Vec<_>>();
    for ev in events.iter().filter(|e| e.effective_date <= t) {
        let fragment = ev.target.split_once('!').map(|(_, f)| f.to_owned());
        match (&ev.new_components, ev.action_type) {
            (Some(rec), _) => {
                let new = o.add_record(rec);
                match fragment {
                    Some(f) => o.nodes.get_mut(&f).unwrap().children.push(new),
                    None => o.root.push(new),
                }
            }
            (None, ActionType::Repeal) => o.kill(&fragment.unwrap()),
            _ => {}
        }
    }
    o.nodes.iter().filter(|(_, n)| n.alive).map(|(f, _)| f.clone()).collect()
}
