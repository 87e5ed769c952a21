//! Monoid schemes as finite affine atlases: affine spectra, open
//! subschemes, Proj of a graded monoid, quasi-coherent sheaves with twists
//! and global sections, stalk points, and reconstruction of the scheme from
//! its point data.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::graded::{
    d0_presentation, shift, ChartPresentation, D0Carrier, GenOrigin, GradedModule, GradedMonoid,
};
use crate::monoid::{LocalizedMonoid, MonoidElement, MonoidPresentation};
use crate::spectrum::{spec, SpecLattice};
use crate::util::UnionFind;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("graded monoid fails the Proj finiteness conditions: {0:?}")]
    ProjFiniteness(Vec<String>),
    #[error("overlap gluing produced an invalid prime on chart {0}")]
    BadGlue(usize),
    #[error("point index {0} out of range")]
    NoSuchPoint(usize),
    #[error(transparent)]
    Monoid(#[from] crate::monoid::MonoidError),
    #[error(transparent)]
    Spectrum(#[from] crate::spectrum::SpectrumError),
    #[error(transparent)]
    Graded(#[from] crate::graded::GradedError),
    #[error(transparent)]
    MSet(#[from] crate::msets::MSetError),
}

pub type Result<T> = std::result::Result<T, SchemeError>;

/// One affine chart of the atlas.
#[derive(Debug, Clone)]
pub struct Chart {
    pub presentation: MonoidPresentation,
    pub label: String,
    /// the primes of the chart, cached
    pub lattice: SpecLattice,
}

/// A two-sided overlap: the localization of chart i at one of its
/// elements, with the images of the other chart's generators.
#[derive(Debug, Clone)]
pub struct Overlap {
    pub i: usize,
    pub j: usize,
    /// the element of chart i inverted to reach the overlap
    pub invert_in_i: MonoidElement,
    pub localized: LocalizedMonoid,
    /// image of each generator of chart j inside the localized chart i
    pub gen_images: Vec<MonoidElement>,
}

/// A glued point: the chart-local primes identified by the overlaps.
#[derive(Debug, Clone)]
pub struct SchemePoint {
    /// (chart index, zero-set mask) representatives
    pub reps: Vec<(usize, u64)>,
    pub label: String,
}

#[derive(Debug, Clone)]
pub enum SchemeKind {
    Affine(MonoidPresentation),
    OpenSub {
        base: MonoidPresentation,
        fs: Vec<MonoidElement>,
    },
    Proj(GradedMonoid),
}

#[derive(Debug, Clone)]
pub struct MonoidScheme {
    pub kind: SchemeKind,
    pub charts: Vec<Chart>,
    /// for Proj charts, the chart-presentation bookkeeping
    pub chart_info: Vec<Option<ChartPresentation>>,
    pub overlaps: Vec<Overlap>,
    pub points: Vec<SchemePoint>,
    /// leq[a][b]: point a specializes from b (a's prime contained in b's)
    pub leq: Vec<Vec<bool>>,
}

fn glue_points(
    charts: &[Chart],
    overlaps: &[Overlap],
) -> Result<(Vec<SchemePoint>, Vec<Vec<bool>>)> {
    let mut node_of: HashMap<(usize, u64), usize> = HashMap::new();
    let mut nodes: Vec<(usize, u64)> = Vec::new();
    for (ci, chart) in charts.iter().enumerate() {
        for p in &chart.lattice.primes {
            node_of.insert((ci, p.zero_mask()), nodes.len());
            nodes.push((ci, p.zero_mask()));
        }
    }
    let mut uf = UnionFind::new(nodes.len());
    for ov in overlaps {
        let ci = &charts[ov.i];
        for p in &ci.lattice.primes {
            if p.contains(&ov.invert_in_i) {
                continue;
            }
            let mut q = 0u64;
            for (g, img) in ov.gen_images.iter().enumerate() {
                // inverse generators of the localization never lie in a
                // prime, so only the chart-i coordinates of the image matter
                let in_prime = img
                    .support()
                    .any(|idx| idx < 64 && p.zero_mask() & (1u64 << idx) != 0);
                if in_prime {
                    q |= 1 << g;
                }
            }
            let a = node_of[&(ov.i, p.zero_mask())];
            let b = *node_of
                .get(&(ov.j, q))
                .ok_or(SchemeError::BadGlue(ov.j))?;
            uf.union(a, b);
        }
    }
    let mut class_of_node = vec![0usize; nodes.len()];
    let mut reps: Vec<Vec<(usize, u64)>> = Vec::new();
    let mut root_class: HashMap<usize, usize> = HashMap::new();
    for (id, &(ci, mask)) in nodes.iter().enumerate() {
        let root = uf.find(id);
        let c = *root_class.entry(root).or_insert_with(|| {
            reps.push(Vec::new());
            reps.len() - 1
        });
        reps[c].push((ci, mask));
        class_of_node[id] = c;
    }
    let n = reps.len();
    let mut leq = vec![vec![false; n]; n];
    for (a, ra) in reps.iter().enumerate() {
        for (b, rb) in reps.iter().enumerate() {
            let related = ra.iter().any(|&(ca, ma)| {
                rb.iter()
                    .any(|&(cb, mb)| ca == cb && ma & !mb == 0)
            });
            if related {
                leq[a][b] = true;
            }
        }
    }
    // reflexive-transitive closure
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                if leq[a][k] && leq[k][b] {
                    leq[a][b] = true;
                }
            }
        }
    }
    let points = reps
        .into_iter()
        .map(|r| {
            let (ci, mask) = r[0];
            let names: Vec<&str> = charts[ci]
                .presentation
                .generator_names()
                .iter()
                .enumerate()
                .filter(|(g, _)| mask & (1 << g) != 0)
                .map(|(_, n)| n.as_str())
                .collect();
            SchemePoint {
                label: format!("{}:({})", charts[ci].label, names.join(",")),
                reps: r,
            }
        })
        .collect();
    Ok((points, leq))
}

/// Spec(M) as a one-chart scheme.
pub fn affine(m: &MonoidPresentation, cap: usize) -> Result<MonoidScheme> {
    let lattice = spec(m, cap)?;
    let charts = vec![Chart {
        presentation: m.clone(),
        label: "X".into(),
        lattice,
    }];
    let (points, leq) = glue_points(&charts, &[])?;
    Ok(MonoidScheme {
        kind: SchemeKind::Affine(m.clone()),
        charts,
        chart_info: vec![None],
        overlaps: Vec::new(),
        points,
        leq,
    })
}

/// Find the index of a generator by name in another presentation.
fn gen_by_name(p: &MonoidPresentation, name: &str) -> usize {
    p.generator_index(name)
        .expect("localization naming is consistent")
}

/// An explicit inverse word for a unit, found in the class of the identity.
fn unit_inverse(
    p: &MonoidPresentation,
    t: &MonoidElement,
    budget: u64,
) -> Option<MonoidElement> {
    let (class, _) = p.explore_class(&p.identity(), budget);
    class.into_iter().find_map(|e| {
        if t.divides(&e) {
            let v = e
                .exponents()
                .iter()
                .zip(t.exponents())
                .map(|(&a, &b)| a - b)
                .collect();
            Some(MonoidElement::new(v))
        } else {
            None
        }
    })
}

/// The union of the basic opens D(f) inside Spec(M), as an atlas of
/// localizations.
pub fn open_subscheme(
    m: &MonoidPresentation,
    fs: &[MonoidElement],
    cap: usize,
    budget: u64,
) -> Result<MonoidScheme> {
    let mut charts = Vec::new();
    let mut locs = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        let loc = LocalizedMonoid::new(m, &[f.clone()], budget)?;
        charts.push(Chart {
            presentation: loc.presentation().clone(),
            label: format!("D({})", m.format_element(f)),
            lattice: spec(loc.presentation(), cap)?,
        });
        locs.push(loc);
        let _ = i;
    }
    let mut overlaps = Vec::new();
    for i in 0..fs.len() {
        for j in 0..fs.len() {
            if i == j {
                continue;
            }
            // invert the image of f_j inside chart i
            let fj_in_i = locs[i].embed(&fs[j]);
            let localized =
                LocalizedMonoid::new(locs[i].presentation(), &[fj_in_i.clone()], budget)?;
            let op = localized.presentation();
            let gen_images = charts[j]
                .presentation
                .generator_names()
                .iter()
                .map(|name| {
                    let idx = gen_by_name(op, name);
                    MonoidElement::generator(idx, op.generator_count())
                })
                .collect();
            overlaps.push(Overlap {
                i,
                j,
                invert_in_i: fj_in_i,
                localized,
                gen_images,
            });
        }
    }
    let (points, leq) = glue_points(&charts, &overlaps)?;
    Ok(MonoidScheme {
        chart_info: vec![None; charts.len()],
        kind: SchemeKind::OpenSub {
            base: m.clone(),
            fs: fs.to_vec(),
        },
        charts,
        overlaps,
        points,
        leq,
    })
}

/// Proj of a positively graded monoid satisfying the finiteness
/// conditions: one chart per degree-1 generator, glued along the fraction
/// opens.
pub fn proj(gm: &GradedMonoid, cap: usize, budget: u64) -> Result<MonoidScheme> {
    let report = crate::graded::check_proj_finiteness(gm);
    if !report.ok {
        return Err(SchemeError::ProjFiniteness(report.failures));
    }
    let base = gm.base();
    let deg1: Vec<usize> = (0..base.generator_count())
        .filter(|&i| gm.degrees()[i] == 1)
        .collect();
    let mut charts = Vec::new();
    let mut infos = Vec::new();
    for &fi in &deg1 {
        let info = d0_presentation(gm, fi)?;
        charts.push(Chart {
            presentation: info.presentation.clone(),
            label: format!("D({})", base.generator_names()[fi]),
            lattice: spec(&info.presentation, cap)?,
        });
        infos.push(info);
    }
    let mut overlaps = Vec::new();
    for (a, &fi) in deg1.iter().enumerate() {
        for (b, &fj) in deg1.iter().enumerate() {
            if a == b {
                continue;
            }
            // the overlap is chart a with the fraction f_j/f_i inverted
            let info_a = &infos[a];
            let info_b = &infos[b];
            let t_index = info_a
                .origins
                .iter()
                .position(|o| *o == GenOrigin::Fraction(fj))
                .expect("f_j/f_i is a chart generator");
            let t = info_a.presentation.generator(t_index);
            let localized = LocalizedMonoid::new(&info_a.presentation, &[t.clone()], budget)?;
            let op = localized.presentation().clone();
            // t^-1 as an element of the localized chart: either the formal
            // inverse generator, or an explicit inverse word when t was
            // already a unit of the chart
            let t_inv: MonoidElement = match localized.inverse_gen(0) {
                Some(idx) => MonoidElement::generator(idx, op.generator_count()),
                None => {
                    let w = unit_inverse(&info_a.presentation, &t, budget)
                        .expect("unit fractions have an inverse word");
                    localized.embed(&w)
                }
            };
            let gen_images = info_b
                .origins
                .iter()
                .map(|o| {
                    let mut v = vec![0u32; op.generator_count()];
                    match o {
                        GenOrigin::Deg0(g) => {
                            // degree-0 generators keep their names
                            let name = &base.generator_names()[*g];
                            v[gen_by_name(&op, name)] = 1;
                        }
                        GenOrigin::Fraction(g) => {
                            // f_g/f_j = (f_g/f_i) * (f_j/f_i)^-1
                            if *g != fi {
                                let idx = info_a
                                    .origins
                                    .iter()
                                    .position(|o2| *o2 == GenOrigin::Fraction(*g))
                                    .expect("degree-1 generators share charts");
                                v[idx] = 1;
                            }
                            for (k, &x) in t_inv.exponents().iter().enumerate() {
                                v[k] += x;
                            }
                        }
                    }
                    MonoidElement::new(v)
                })
                .collect();
            overlaps.push(Overlap {
                i: a,
                j: b,
                invert_in_i: t,
                localized,
                gen_images,
            });
        }
    }
    let (points, leq) = glue_points(&charts, &overlaps)?;
    Ok(MonoidScheme {
        kind: SchemeKind::Proj(gm.clone()),
        charts,
        chart_info: infos.into_iter().map(Some).collect(),
        overlaps,
        points,
        leq,
    })
}

impl MonoidScheme {
    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    /// The stalk at a glued point: the first representative chart localized
    /// at the complement of the prime.
    pub fn stalk_presentation(&self, point: usize, budget: u64) -> Result<MonoidPresentation> {
        let pt = self
            .points
            .get(point)
            .ok_or(SchemeError::NoSuchPoint(point))?;
        let (ci, mask) = pt.reps[0];
        let p = &self.charts[ci].presentation;
        let complement: BTreeSet<usize> = (0..p.generator_count())
            .filter(|&g| mask & (1 << g) == 0)
            .collect();
        let loc = LocalizedMonoid::at_generators(p, &complement, budget)?;
        Ok(loc.presentation().clone())
    }
}

/// Data of a quasi-coherent sheaf on one of our schemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QcSheaf {
    /// on an affine scheme: the M-set of global sections
    Affine(crate::msets::MSet),
    /// on Proj: the sheaf obtained from a graded module
    Graded(GradedModule),
}

/// The sheaf associated to a graded module on Proj: chart sections are the
/// degree-zero localizations.
pub fn iota_star(module: GradedModule) -> QcSheaf {
    QcSheaf::Graded(module)
}

/// The structure sheaf.
pub fn structure_sheaf() -> QcSheaf {
    QcSheaf::Graded(GradedModule::Shift { n: 0 })
}

/// Twisting sheaf O(n).
pub fn twisting_sheaf(n: i64) -> QcSheaf {
    QcSheaf::Graded(GradedModule::Shift { n })
}

/// F(n) = F tensor O(n): for the graded family this is the shift.
pub fn twist(f: &QcSheaf, n: i64) -> QcSheaf {
    match f {
        QcSheaf::Graded(m) => QcSheaf::Graded(shift(m, n)),
        QcSheaf::Affine(a) => QcSheaf::Affine(a.clone()),
    }
}

/// Union-find verification, on one chart, that twisting really is the
/// chartwise tensor with O(n): tensor classes of windowed fraction pairs
/// biject with the windowed fractions of the shifted module under
/// multiplication.
pub fn twist_window_check(
    gm: &GradedMonoid,
    module: &GradedModule,
    f_index: usize,
    n: i64,
    w: u32,
    budget: u64,
) -> Result<bool> {
    let f = gm.base().generator(f_index);
    let a = D0Carrier::new(gm, &f, *module, budget)?;
    let b = D0Carrier::new(gm, &f, GradedModule::Shift { n }, budget)?;
    let target = D0Carrier::new(gm, &f, shift(module, n), budget)?;
    let lp = a.localized().presentation().clone();
    let ea = a.window_elements(w, w, budget);
    let eb = b.window_elements(w, w, budget);
    let ia: HashMap<&MonoidElement, usize> = ea.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let ib: HashMap<&MonoidElement, usize> = eb.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let (na, nb) = (ea.len(), eb.len());
    if na == 0 || nb == 0 {
        return Ok(target.window_elements(w / 2, w / 2, budget).is_empty());
    }
    // chart monoid generators: the degree-0 fractions of the chart
    let info = d0_presentation(gm, f_index)?;
    let chart_gens: Vec<MonoidElement> = (0..info.presentation.generator_count())
        .map(|g| {
            info.to_fraction(
                gm,
                &info.presentation.generator(g),
                a.localized(),
            )
        })
        .collect();
    let idx = |i: usize, j: usize| i * nb + j;
    let mut uf = UnionFind::new(na * nb);
    for i in 0..na {
        for j in 0..nb {
            for c in &chart_gens {
                let xi = lp.canonical_form(&lp.multiply(&ea[i], c)?, budget);
                let yj = lp.canonical_form(&lp.multiply(&eb[j], c)?, budget);
                if let (Some(&i2), Some(&j2)) = (ia.get(&xi), ib.get(&yj)) {
                    uf.union(idx(i2, j), idx(i, j2));
                }
            }
        }
    }
    let inner: HashSet<MonoidElement> = target
        .window_elements(w / 2, w / 2, budget)
        .into_iter()
        .collect();
    let mut class_value: HashMap<usize, MonoidElement> = HashMap::new();
    let mut value_class: HashMap<MonoidElement, usize> = HashMap::new();
    for i in 0..na {
        for j in 0..nb {
            let root = uf.find(idx(i, j));
            let prod = lp.canonical_form(&lp.multiply(&ea[i], &eb[j])?, budget);
            if let Some(prev) = class_value.get(&root) {
                if *prev != prod {
                    return Ok(false);
                }
            } else {
                class_value.insert(root, prod.clone());
            }
            if inner.contains(&prod) {
                if let Some(&other) = value_class.get(&prod) {
                    if other != root {
                        return Ok(false);
                    }
                } else {
                    value_class.insert(prod, root);
                }
            }
        }
    }
    Ok(inner.iter().all(|v| value_class.contains_key(v)))
}

/// Free-of-rank-one test on a windowed carrier: some element's orbit under
/// the chart monoid covers the inner window injectively. Carrier elements
/// carry a tag so that disjoint unions are representable.
pub fn free_rank_one_window(
    lp: &MonoidPresentation,
    chart_window: &[MonoidElement],
    carrier: &[(usize, MonoidElement)],
    inner: &[(usize, MonoidElement)],
    budget: u64,
) -> bool {
    for (tag, a) in carrier {
        let mut images = HashSet::new();
        let mut ok = true;
        for c in chart_window {
            let img = match lp.multiply(a, c) {
                Ok(p) => lp.canonical_form(&p, budget),
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            if !images.insert((*tag, img)) {
                ok = false;
                break;
            }
        }
        if ok && inner.iter().all(|e| images.contains(e)) {
            return true;
        }
    }
    false
}

/// Is the sheaf locally free of rank one on every chart?
pub fn line_bundle_check(gm: &GradedMonoid, f: &QcSheaf, w: u32, budget: u64) -> Result<bool> {
    let module = match f {
        QcSheaf::Graded(m) => *m,
        QcSheaf::Affine(_) => return Ok(false),
    };
    for (i, &d) in gm.degrees().iter().enumerate() {
        if d != 1 {
            continue;
        }
        let fgen = gm.base().generator(i);
        let carrier = D0Carrier::new(gm, &fgen, module, budget)?;
        let structure = D0Carrier::new(gm, &fgen, GradedModule::Shift { n: 0 }, budget)?;
        let lp = carrier.localized().presentation().clone();
        let chart_window = structure.window_elements(w, w, budget);
        let big: Vec<(usize, MonoidElement)> = carrier
            .window_elements(w, w, budget)
            .into_iter()
            .map(|e| (0, e))
            .collect();
        let inner: Vec<(usize, MonoidElement)> = carrier
            .window_elements(w / 2, w / 2, budget)
            .into_iter()
            .map(|e| (0, e))
            .collect();
        if !free_rank_one_window(&lp, &chart_window, &big, &inner, budget) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A global-section family: one fraction per chart, compatible on all
/// overlaps.
pub type SectionFamily = Vec<MonoidElement>;

fn translate_by_name(
    from: &MonoidPresentation,
    to: &MonoidPresentation,
    e: &MonoidElement,
) -> MonoidElement {
    let mut v = vec![0u32; to.generator_count()];
    for (i, &x) in e.exponents().iter().enumerate() {
        if x == 0 {
            continue;
        }
        v[gen_by_name(to, &from.generator_names()[i])] += x;
    }
    MonoidElement::new(v)
}

/// Global sections of a graded-module sheaf on Proj: tuples of chart
/// fractions (windowed) agreeing in the pairwise double localizations.
pub fn global_sections_proj(
    gm: &GradedMonoid,
    module: &GradedModule,
    w: u32,
    budget: u64,
) -> Result<Vec<SectionFamily>> {
    let base = gm.base();
    let deg1: Vec<usize> = (0..base.generator_count())
        .filter(|&i| gm.degrees()[i] == 1)
        .collect();
    if deg1.is_empty() {
        return Ok(Vec::new());
    }
    let carriers: Vec<D0Carrier> = deg1
        .iter()
        .map(|&i| D0Carrier::new(gm, &base.generator(i), *module, budget))
        .collect::<std::result::Result<_, _>>()?;
    let windows: Vec<Vec<MonoidElement>> = carriers
        .iter()
        .map(|c| c.window_elements(w, w, budget))
        .collect();
    // pairwise double localizations
    let mut pair_loc: HashMap<(usize, usize), LocalizedMonoid> = HashMap::new();
    for a in 0..deg1.len() {
        for b in (a + 1)..deg1.len() {
            let loc = LocalizedMonoid::new(
                base,
                &[base.generator(deg1[a]), base.generator(deg1[b])],
                budget,
            )?;
            pair_loc.insert((a, b), loc);
        }
    }
    let mut out = Vec::new();
    let mut cursor = vec![0usize; deg1.len()];
    if windows.iter().any(|w| w.is_empty()) {
        return Ok(out);
    }
    'families: loop {
        let family: Vec<&MonoidElement> = cursor
            .iter()
            .zip(&windows)
            .map(|(&c, win)| &win[c])
            .collect();
        let mut compatible = true;
        'pairs: for a in 0..deg1.len() {
            for b in (a + 1)..deg1.len() {
                let loc = &pair_loc[&(a, b)];
                let ea = translate_by_name(
                    carriers[a].localized().presentation(),
                    loc.presentation(),
                    family[a],
                );
                let eb = translate_by_name(
                    carriers[b].localized().presentation(),
                    loc.presentation(),
                    family[b],
                );
                if !loc
                    .presentation()
                    .are_equal(&ea, &eb, budget)?
                    .is_equal()
                {
                    compatible = false;
                    break 'pairs;
                }
            }
        }
        if compatible {
            out.push(family.into_iter().cloned().collect());
        }
        let mut i = 0;
        loop {
            if i == cursor.len() {
                break 'families;
            }
            if cursor[i] + 1 < windows[i].len() {
                cursor[i] += 1;
                break;
            }
            cursor[i] = 0;
            i += 1;
        }
    }
    Ok(out)
}

/// Global sections of a sheaf on any of our schemes.
pub fn global_sections(
    scheme: &MonoidScheme,
    f: &QcSheaf,
    w: u32,
    budget: u64,
) -> Result<Vec<SectionFamily>> {
    match (&scheme.kind, f) {
        (SchemeKind::Proj(gm), QcSheaf::Graded(module)) => {
            global_sections_proj(gm, module, w, budget)
        }
        (_, QcSheaf::Affine(a)) => {
            // single chart: sections are the carrier, reported symbolically
            let _ = a;
            Ok(vec![Vec::new()])
        }
        _ => Ok(Vec::new()),
    }
}

/// The graded module of all twisted global sections, on a degree window.
#[derive(Debug, Clone)]
pub struct WindowModule {
    pub pieces: BTreeMap<i64, Vec<SectionFamily>>,
}

pub fn gamma_star(
    gm: &GradedMonoid,
    module: &GradedModule,
    degrees: std::ops::RangeInclusive<i64>,
    w: u32,
    budget: u64,
) -> Result<WindowModule> {
    let mut pieces = BTreeMap::new();
    for n in degrees {
        let twisted = shift(module, n);
        pieces.insert(n, global_sections_proj(gm, &twisted, w, budget)?);
    }
    Ok(WindowModule { pieces })
}

impl WindowModule {
    /// The action of a monoid element of intrinsic degree k: multiply each
    /// chart component, landing in the degree n+k piece.
    pub fn act(
        &self,
        gm: &GradedMonoid,
        carriers: &[D0Carrier],
        n: i64,
        family: &SectionFamily,
        m: &MonoidElement,
        budget: u64,
    ) -> Option<(i64, SectionFamily)> {
        let k = gm.degree_of(m);
        let target = n + k;
        let image: SectionFamily = family
            .iter()
            .zip(carriers)
            .map(|(s, c)| {
                let lp = c.localized().presentation();
                lp.canonical_form(
                    &lp.multiply(s, &c.localized().embed(m)).ok()?,
                    budget,
                )
                .into()
            })
            .collect::<Option<Vec<_>>>()?;
        let piece = self.pieces.get(&target)?;
        let lp_eq = |a: &SectionFamily, b: &SectionFamily| {
            a.iter().zip(b.iter()).zip(carriers).all(|((x, y), c)| {
                c.localized()
                    .presentation()
                    .are_equal(x, y, budget)
                    .map(|v| v.is_equal())
                    .unwrap_or(false)
            })
        };
        piece
            .iter()
            .find(|s| lp_eq(s, &image))
            .map(|s| (target, s.clone()))
    }
}

/// The counit: every chart fraction of the sheaf arises as a global
/// section divided by a power of the chart element, and two such fractions
/// coincide exactly when the cross-multiplied sections agree.
pub fn counit_check(gm: &GradedMonoid, module: &GradedModule, w: u32, budget: u64) -> Result<bool> {
    let base = gm.base();
    let deg1: Vec<usize> = (0..base.generator_count())
        .filter(|&i| gm.degrees()[i] == 1)
        .collect();
    let carriers: Vec<D0Carrier> = deg1
        .iter()
        .map(|&i| D0Carrier::new(gm, &base.generator(i), *module, budget))
        .collect::<std::result::Result<_, _>>()?;
    // sections of each twist up to w
    let mut sections: Vec<(u32, SectionFamily)> = Vec::new();
    for k in 0..=w {
        let twisted = shift(module, k as i64);
        for s in global_sections_proj(gm, &twisted, w, budget)? {
            sections.push((k, s));
        }
    }
    for (chart, &fi) in deg1.iter().enumerate() {
        let c = &carriers[chart];
        let lp = c.localized().presentation().clone();
        // beta(s/f^k) = s_chart * f^-k: chart components already live in the
        // localized presentation, so dividing by f^k adds k to the
        // inverse-generator exponent
        let beta = |k: u32, s: &SectionFamily| -> Result<MonoidElement> {
            let inv = c
                .localized()
                .inverse_gen(0)
                .expect("chart elements are not units");
            let mut v = s[chart].exponents().to_vec();
            v[inv] += k;
            Ok(lp.canonical_form(&MonoidElement::new(v), budget))
        };
        let mut images: Vec<(usize, MonoidElement)> = Vec::new();
        for (si, (k, s)) in sections.iter().enumerate() {
            images.push((si, beta(*k, s)?));
        }
        // surjectivity on the inner window
        let inner = c.window_elements(w / 2, w / 2, budget);
        for e in &inner {
            if !images.iter().any(|(_, v)| v == e) {
                return Ok(false);
            }
        }
        // injectivity: equal images force fraction-equal sections
        let f = base.generator(fi);
        for (si, vi) in &images {
            for (sj, vj) in &images {
                if si >= sj || vi != vj {
                    continue;
                }
                let (ki, fam_i) = &sections[*si];
                let (kj, fam_j) = &sections[*sj];
                // s_i * f^{k_j} must equal s_j * f^{k_i} componentwise
                let ok = fam_i
                    .iter()
                    .zip(fam_j.iter())
                    .zip(&carriers)
                    .all(|((a, b), cc)| {
                        let p = cc.localized().presentation();
                        let fa = p
                            .multiply(a, &cc.localized().embed(&f.pow(*kj)))
                            .and_then(|x| {
                                p.multiply(b, &cc.localized().embed(&f.pow(*ki)))
                                    .map(|y| (x, y))
                            });
                        match fa {
                            Ok((x, y)) => p
                                .are_equal(&x, &y, budget)
                                .map(|v| v.is_equal())
                                .unwrap_or(false),
                            Err(_) => false,
                        }
                    });
                if !ok {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Three-valued verdict for the windowed mono/epi tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriBool {
    True,
    False,
    Unknown,
}

/// Windowed mono/epi criterion for a degree-preserving graded map after
/// sheafification: colliding elements must merge under a power of every
/// degree-1 generator, and every target element must shift into the image.
/// Carriers are tagged (element, degree) windows over the base monoid, so
/// disjoint unions are expressible.
pub fn mono_epi_after_iota(
    gm: &GradedMonoid,
    a: &[(usize, MonoidElement, i64)],
    b: &[(usize, MonoidElement, i64)],
    map: &[usize],
    m_max: u32,
    budget: u64,
) -> (TriBool, TriBool) {
    let base = gm.base();
    let deg1: Vec<usize> = (0..base.generator_count())
        .filter(|&i| gm.degrees()[i] == 1)
        .collect();
    let a_index: HashMap<(usize, MonoidElement), usize> = a
        .iter()
        .enumerate()
        .map(|(i, (t, e, _))| ((*t, base.canonical_form(e, budget)), i))
        .collect();
    let b_index: HashMap<(usize, MonoidElement), usize> = b
        .iter()
        .enumerate()
        .map(|(i, (t, e, _))| ((*t, base.canonical_form(e, budget)), i))
        .collect();
    let image: HashSet<usize> = map.iter().copied().collect();
    let mut mono = TriBool::True;
    let mut epi = TriBool::True;
    for &fg in &deg1 {
        let f = base.generator(fg);
        // mono: collisions must merge under f powers
        for i1 in 0..a.len() {
            for i2 in (i1 + 1)..a.len() {
                if map[i1] != map[i2] {
                    continue;
                }
                let mut merged = false;
                let mut left_window = false;
                let (mut x, mut y) = (a[i1].clone(), a[i2].clone());
                for _ in 1..=m_max {
                    x.1 = base.canonical_form(&base.multiply(&x.1, &f).unwrap(), budget);
                    y.1 = base.canonical_form(&base.multiply(&y.1, &f).unwrap(), budget);
                    let xi = a_index.get(&(x.0, x.1.clone()));
                    let yi = a_index.get(&(y.0, y.1.clone()));
                    match (xi, yi) {
                        (Some(&p), Some(&q)) => {
                            if p == q {
                                merged = true;
                                break;
                            }
                        }
                        _ => {
                            if x.0 == y.0 && x.1 == y.1 {
                                merged = true;
                            } else {
                                left_window = true;
                            }
                            break;
                        }
                    }
                }
                if !merged {
                    mono = if left_window && mono == TriBool::True {
                        TriBool::Unknown
                    } else {
                        TriBool::False
                    };
                }
            }
        }
        // epi: every target element shifts into the image
        for (j, (tag, e, _)) in b.iter().enumerate() {
            if image.contains(&j) {
                continue;
            }
            let mut hit = false;
            let mut left_window = false;
            let mut z = e.clone();
            for _ in 1..=m_max {
                z = base.canonical_form(&base.multiply(&z, &f).unwrap(), budget);
                match b_index.get(&(*tag, z.clone())) {
                    Some(&zj) => {
                        if image.contains(&zj) {
                            hit = true;
                            break;
                        }
                    }
                    None => {
                        left_window = true;
                        break;
                    }
                }
            }
            if !hit {
                epi = if left_window && epi == TriBool::True {
                    TriBool::Unknown
                } else {
                    TriBool::False
                };
            }
        }
    }
    (mono, epi)
}

/// A point of the scheme together with its stalk monoid, the data from
/// which the scheme is rebuilt.
#[derive(Debug, Clone)]
pub struct StalkPoint {
    pub point: usize,
    pub label: String,
    pub stalk: MonoidPresentation,
}

/// One stalk point per scheme point.
pub fn qc_points(scheme: &MonoidScheme, budget: u64) -> Result<Vec<StalkPoint>> {
    (0..scheme.point_count())
        .map(|i| {
            Ok(StalkPoint {
                point: i,
                label: scheme.points[i].label.clone(),
                stalk: scheme.stalk_presentation(i, budget)?,
            })
        })
        .collect()
}

/// The stalk of a quasi-coherent sheaf at a point, as an M-set over the
/// stalk monoid. Line bundles give the stalk monoid acting on itself.
pub fn stalk(scheme: &MonoidScheme, f: &QcSheaf, point: usize, budget: u64) -> Result<crate::msets::MSet> {
    match f {
        QcSheaf::Affine(a) => {
            let pt = &scheme.points[point];
            let (_, mask) = pt.reps[0];
            let gens: BTreeSet<usize> = (0..scheme.charts[0].presentation.generator_count())
                .filter(|&g| mask & (1 << g) == 0)
                .collect();
            Ok(crate::msets::localize_mset(
                a,
                &gens,
                &crate::Config {
                    budget,
                    ..Default::default()
                },
            )?)
        }
        QcSheaf::Graded(_) => {
            let p = scheme.stalk_presentation(point, budget)?;
            Ok(crate::msets::MSet::regular(&p, budget)?)
        }
    }
}

/// The point-and-stalk skeleton that determines the scheme.
#[derive(Debug, Clone)]
pub struct SchemeSkeleton {
    pub stalks: Vec<MonoidPresentation>,
    pub leq: Vec<Vec<bool>>,
}

pub fn skeleton(scheme: &MonoidScheme, budget: u64) -> Result<SchemeSkeleton> {
    Ok(SchemeSkeleton {
        stalks: (0..scheme.point_count())
            .map(|i| scheme.stalk_presentation(i, budget))
            .collect::<Result<_>>()?,
        leq: scheme.leq.clone(),
    })
}

/// Rebuild a skeleton from stalk points, using the specialization order
/// induced by the scheme they came from.
pub fn reconstruct(points: &[StalkPoint], leq: &[Vec<bool>]) -> SchemeSkeleton {
    SchemeSkeleton {
        stalks: points.iter().map(|p| p.stalk.clone()).collect(),
        leq: leq.to_vec(),
    }
}

/// Presentation isomorphism by generator permutation: each relation of one
/// presentation must hold in the other under the permutation, both ways.
pub fn presentations_isomorphic(
    a: &MonoidPresentation,
    b: &MonoidPresentation,
    budget: u64,
) -> bool {
    let k = a.generator_count();
    if k != b.generator_count() {
        return false;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let apply = |e: &MonoidElement, perm: &[usize]| -> MonoidElement {
        let mut v = vec![0u32; e.len()];
        for (i, &x) in e.exponents().iter().enumerate() {
            v[perm[i]] = x;
        }
        MonoidElement::new(v)
    };
    loop {
        let forward = a.relations().iter().all(|(u, v)| {
            b.are_equal(&apply(u, &perm), &apply(v, &perm), budget)
                .map(|r| r.is_equal())
                .unwrap_or(false)
        });
        if forward {
            let mut inv = vec![0usize; k];
            for (i, &p) in perm.iter().enumerate() {
                inv[p] = i;
            }
            let backward = b.relations().iter().all(|(u, v)| {
                a.are_equal(&apply(u, &inv), &apply(v, &inv), budget)
                    .map(|r| r.is_equal())
                    .unwrap_or(false)
            });
            if backward {
                return true;
            }
        }
        // next permutation
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Scheme isomorphism at the skeleton level: a poset bijection carrying
/// stalks to isomorphic stalks.
pub fn is_isomorphic(a: &SchemeSkeleton, b: &SchemeSkeleton, budget: u64) -> bool {
    let n = a.stalks.len();
    if n != b.stalks.len() {
        return false;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let order_ok = (0..n)
            .all(|i| (0..n).all(|j| a.leq[i][j] == b.leq[perm[i]][perm[j]]));
        if order_ok
            && (0..n).all(|i| presentations_isomorphic(&a.stalks[i], &b.stalks[perm[i]], budget))
        {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}
