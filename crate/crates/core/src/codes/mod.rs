//! Periodic Kitaev and color-code lattices, their stabilizers and loop operators.
//!
//! Kitaev indexing, per row `y` of an `nph x npv` torus (0-based):
//! horizontal edges `h(x, y) = 2*nph*y + x`, then vertical edges
//! `v(x, y) = 2*nph*y + nph + x`. Edge `h(x, y)` joins vertices `(x, y)` and
//! `(x+1, y)`; edge `v(x, y)` joins `(x, y)` and `(x, y+1)`. Plaquette and vertex
//! `(x, y)` both carry the 1-based label `nph*y + x + 1`.
//!
//! Color-code indexing: a brick-wall honeycomb of `cols x rows` bricks on
//! `2*cols` columns of sites. Site `(x, y)` is qubit `2*cols*y + x`.

mod graph;
mod states;

pub use graph::{graph_equivalent, GraphCertificate};
pub use states::{default_ground_state, stabilizer_ground_state, state_stabilizers, Sector};

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Kitaev,
    Color,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaquetteColor {
    Red,
    Green,
    Blue,
}

impl PlaquetteColor {
    pub const ALL: [PlaquetteColor; 3] = [PlaquetteColor::Red, PlaquetteColor::Green, PlaquetteColor::Blue];

    fn from_index(i: usize) -> Self {
        Self::ALL[i % 3]
    }

    pub fn letter(self) -> char {
        match self {
            PlaquetteColor::Red => 'r',
            PlaquetteColor::Green => 'g',
            PlaquetteColor::Blue => 'b',
        }
    }
}

/// Which nontrivial loop operator: `L^{operator}_{direction[,color]}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub struct LoopSpec {
    pub operator: Axis,
    pub direction: Direction,
    pub color: Option<PlaquetteColor>,
}

impl LoopSpec {
    pub fn kitaev(operator: Axis, direction: Direction) -> Self {
        LoopSpec { operator, direction, color: None }
    }

    pub fn color(operator: Axis, direction: Direction, color: PlaquetteColor) -> Self {
        LoopSpec { operator, direction, color: Some(color) }
    }
}

impl fmt::Display for LoopSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = self.operator.letter().to_ascii_lowercase();
        let dir = match self.direction {
            Direction::H => 'h',
            Direction::V => 'v',
        };
        match self.color {
            None => write!(f, "{op}{dir}"),
            Some(c) => write!(f, "{op}{dir}{}", c.letter()),
        }
    }
}

impl FromStr for LoopSpec {
    type Err = Error;

    /// Accepts `xh`, `zv`, `xhr`, ... (operator, direction, optional color).
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().to_ascii_lowercase().chars().collect();
        let bad = || Error::parse("loop spec", format!("`{s}` is not of the form xh, zv, xhr, ..."));
        if chars.len() < 2 || chars.len() > 3 {
            return Err(bad());
        }
        let operator = match chars[0] {
            'x' => Axis::X,
            'z' => Axis::Z,
            _ => return Err(bad()),
        };
        let direction = match chars[1] {
            'h' => Direction::H,
            'v' => Direction::V,
            _ => return Err(bad()),
        };
        let color = match chars.get(2) {
            None => None,
            Some('r') => Some(PlaquetteColor::Red),
            Some('g') => Some(PlaquetteColor::Green),
            Some('b') => Some(PlaquetteColor::Blue),
            Some(_) => return Err(bad()),
        };
        Ok(LoopSpec { operator, direction, color })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Plaquette {
    pub label: usize,
    pub qubits: Vec<usize>,
    pub color: Option<PlaquetteColor>,
}

#[derive(Debug, Clone)]
pub struct CodeLattice {
    kind: CodeKind,
    dims: (usize, usize),
    n_qubits: usize,
    coords: Vec<(f64, f64)>,
    plaquettes: Vec<Plaquette>,
    vertices: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    loops: BTreeMap<(Axis, Direction, Option<PlaquetteColor>), Vec<usize>>,
}

impl CodeLattice {
    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    /// `(nph, npv)` for Kitaev, `(cols, rows)` for color.
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    /// Vertex supports (Kitaev only; empty for color codes).
    pub fn vertices(&self) -> &[Vec<usize>] {
        &self.vertices
    }

    /// Lattice links between qubits (color code only; empty for Kitaev).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    pub fn describe(&self) -> String {
        match self.kind {
            CodeKind::Kitaev => format!("kitaev {}x{}", self.dims.0, self.dims.1),
            CodeKind::Color => format!("color {}x{}", self.dims.0, self.dims.1),
        }
    }

    fn check_spec(&self, spec: &LoopSpec) -> Result<()> {
        if !matches!(spec.operator, Axis::X | Axis::Z) {
            return Err(Error::InvalidLoop("loop operators are X or Z type".into()));
        }
        match (self.kind, spec.color) {
            (CodeKind::Kitaev, None) | (CodeKind::Color, Some(_)) => Ok(()),
            (CodeKind::Kitaev, Some(_)) => Err(Error::InvalidLoop("kitaev loops carry no color".into())),
            (CodeKind::Color, None) => Err(Error::InvalidLoop("color-code loops need a color".into())),
        }
    }

    /// Ordered (ascending) support of a loop operator.
    pub fn loop_support(&self, spec: &LoopSpec) -> Result<&[usize]> {
        self.check_spec(spec)?;
        let key = match self.kind {
            CodeKind::Kitaev => (spec.operator, spec.direction, None),
            CodeKind::Color => (Axis::X, spec.direction, spec.color),
        };
        self.loops
            .get(&key)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::InvalidLoop(format!("no {spec} loop on this lattice")))
    }

    pub fn plaquette_operator(&self, p: usize) -> PauliString {
        PauliString::uniform(self.n_qubits, Axis::Z, &self.plaquettes[p].qubits).expect("valid support")
    }

    /// Kitaev vertex `S_v` or color-code `S^x_p`.
    pub fn x_stabilizer(&self, i: usize) -> PauliString {
        let support = match self.kind {
            CodeKind::Kitaev => &self.vertices[i],
            CodeKind::Color => &self.plaquettes[i].qubits,
        };
        PauliString::uniform(self.n_qubits, Axis::X, support).expect("valid support")
    }

    pub fn n_x_stabilizers(&self) -> usize {
        match self.kind {
            CodeKind::Kitaev => self.vertices.len(),
            CodeKind::Color => self.plaquettes.len(),
        }
    }

    /// Kitaev 0-based plaquette/vertex index at cell `(x, y)`, wrapping.
    pub fn cell(&self, x: isize, y: isize) -> usize {
        let (nph, npv) = self.dims;
        let xm = x.rem_euclid(nph as isize) as usize;
        let ym = y.rem_euclid(npv as isize) as usize;
        ym * nph + xm
    }

    /// Qubits adjacent through a lattice link to `set` but not in it (color code).
    pub fn link_neighbors(&self, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| match (set.contains(&a), set.contains(&b)) {
                (true, false) => Some(b),
                (false, true) => Some(a),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn export(&self) -> LatticeDescription {
        let loops = self
            .loops
            .iter()
            .map(|(&(op, dir, color), q)| {
                let spec = match self.kind {
                    CodeKind::Kitaev => LoopSpec { operator: op, direction: dir, color },
                    CodeKind::Color => LoopSpec { operator: Axis::X, direction: dir, color },
                };
                let name = match self.kind {
                    CodeKind::Kitaev => spec.to_string(),
                    CodeKind::Color => spec.to_string()[1..].to_string(),
                };
                (name, q.iter().map(|&i| i + 1).collect())
            })
            .collect();
        LatticeDescription {
            kind: self.kind,
            dims: self.dims,
            n_qubits: self.n_qubits,
            qubits: self
                .coords
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| QubitDescription { label: i + 1, x, y })
                .collect(),
            plaquettes: self
                .plaquettes
                .iter()
                .map(|p| Plaquette { label: p.label, qubits: p.qubits.iter().map(|&i| i + 1).collect(), color: p.color })
                .collect(),
            vertices: self.vertices.iter().map(|v| v.iter().map(|&i| i + 1).collect()).collect(),
            loops,
        }
    }
}

/// JSON-ready lattice description with 1-based qubit labels.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeDescription {
    pub kind: CodeKind,
    pub dims: (usize, usize),
    pub n_qubits: usize,
    pub qubits: Vec<QubitDescription>,
    pub plaquettes: Vec<Plaquette>,
    pub vertices: Vec<Vec<usize>>,
    pub loops: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QubitDescription {
    pub label: usize,
    pub x: f64,
    pub y: f64,
}

pub fn build_kitaev(nph: usize, npv: usize) -> Result<CodeLattice> {
    if nph < 2 || npv < 2 {
        return Err(Error::InvalidLattice(format!(
            "kitaev lattice needs at least 2 plaquettes per direction, got {nph}x{npv}"
        )));
    }
    let n = 2 * nph * npv;
    if n > 64 {
        return Err(Error::InvalidLattice(format!("{n} qubits exceeds the 64-qubit register")));
    }
    let wrap = |x: isize, m: usize| x.rem_euclid(m as isize) as usize;
    let h = |x: isize, y: isize| 2 * nph * wrap(y, npv) + wrap(x, nph);
    let v = |x: isize, y: isize| 2 * nph * wrap(y, npv) + nph + wrap(x, nph);

    let mut coords = vec![(0.0, 0.0); n];
    for y in 0..npv as isize {
        for x in 0..nph as isize {
            coords[h(x, y)] = (x as f64 + 0.5, y as f64);
            coords[v(x, y)] = (x as f64, y as f64 + 0.5);
        }
    }
    let mut plaquettes = Vec::with_capacity(nph * npv);
    let mut vertices = Vec::with_capacity(nph * npv);
    for y in 0..npv as isize {
        for x in 0..nph as isize {
            let mut p = vec![h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)];
            p.sort_unstable();
            plaquettes.push(Plaquette { label: plaquettes.len() + 1, qubits: p, color: None });
            let mut s = vec![h(x, y), h(x - 1, y), v(x, y), v(x, y - 1)];
            s.sort_unstable();
            vertices.push(s);
        }
    }
    let (nph_i, npv_i) = (nph as isize, npv as isize);
    let row_x = npv_i - 2;
    let row_z = npv_i - 1;
    let mut loops = BTreeMap::new();
    let sorted = |mut q: Vec<usize>| {
        q.sort_unstable();
        q
    };
    loops.insert((Axis::X, Direction::H, None), sorted((0..nph_i).map(|x| v(x, row_x)).collect()));
    loops.insert((Axis::Z, Direction::H, None), sorted((0..nph_i).map(|x| h(x, row_z)).collect()));
    loops.insert((Axis::Z, Direction::V, None), sorted((0..npv_i).map(|y| v(nph_i - 1, y)).collect()));
    loops.insert((Axis::X, Direction::V, None), sorted((0..npv_i).map(|y| h(nph_i - 1, y)).collect()));

    Ok(CodeLattice {
        kind: CodeKind::Kitaev,
        dims: (nph, npv),
        n_qubits: n,
        coords,
        plaquettes,
        vertices,
        edges: Vec::new(),
        loops,
    })
}

pub fn build_color(cols: usize, rows: usize) -> Result<CodeLattice> {
    if cols == 0 || cols % 3 != 0 || rows < 2 || rows % 2 != 0 {
        return Err(Error::InvalidLattice(format!(
            "a periodic brick-wall color code needs cols divisible by 3 and an even number of rows >= 2, got {cols}x{rows}"
        )));
    }
    let width = 2 * cols;
    let n = width * rows;
    if n > 64 {
        return Err(Error::InvalidLattice(format!("{n} qubits exceeds the 64-qubit register")));
    }
    let site = |x: isize, y: isize| {
        (y.rem_euclid(rows as isize) as usize) * width + x.rem_euclid(width as isize) as usize
    };
    let coords = (0..n).map(|q| ((q % width) as f64, (q / width) as f64)).collect();

    // Links with their unwrapped step from the first to the second site.
    let mut links: Vec<(usize, usize, (i64, i64))> = Vec::new();
    for y in 0..rows as isize {
        for x in 0..width as isize {
            links.push((site(x, y), site(x + 1, y), (1, 0)));
            if (x + y) % 2 == 0 {
                links.push((site(x, y), site(x, y + 1), (0, 1)));
            }
        }
    }
    let edges: Vec<(usize, usize)> = links.iter().map(|&(a, b, _)| (a, b)).collect();

    // Each brick lists its six sites with their offset from the brick center
    // (doubled units), and its boundary cycle.
    struct Brick {
        sites: [usize; 6],
        offsets: [(i64, i64); 6],
    }
    let mut bricks = Vec::with_capacity(cols * rows);
    let mut plaquettes = Vec::with_capacity(cols * rows);
    let mut side_of: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    for y in 0..rows {
        let shift = if y % 2 == 0 { 0 } else { 2 };
        for b in 0..cols {
            let x0 = (2 * b + y % 2) as isize;
            let yi = y as isize;
            let cycle = [
                (x0, yi),
                (x0 + 1, yi),
                (x0 + 2, yi),
                (x0 + 2, yi + 1),
                (x0 + 1, yi + 1),
                (x0, yi + 1),
            ];
            let mut sites = [0usize; 6];
            let mut offsets = [(0i64, 0i64); 6];
            for (i, &(cx, cy)) in cycle.iter().enumerate() {
                sites[i] = site(cx, cy);
                offsets[i] = (2 * (cx - x0 - 1) as i64, 2 * (cy - yi) as i64 - 1);
            }
            let idx = plaquettes.len();
            for i in 0..6 {
                side_of.entry(key(sites[i], sites[(i + 1) % 6])).or_default().push(idx);
            }
            let mut q = sites.to_vec();
            q.sort_unstable();
            plaquettes.push(Plaquette {
                label: idx + 1,
                qubits: q,
                color: Some(PlaquetteColor::from_index(b + shift)),
            });
            bricks.push(Brick { sites, offsets });
        }
    }

    let color_of = |p: usize| plaquettes[p].color.unwrap();
    // Link color: the color absent from its two side plaquettes.
    let mut link_color: HashMap<(usize, usize), PlaquetteColor> = HashMap::new();
    for &(a, b) in &edges {
        let sides = side_of.get(&key(a, b)).cloned().unwrap_or_default();
        if sides.len() != 2 || color_of(sides[0]) == color_of(sides[1]) {
            return Err(Error::InvalidLattice(format!("link ({a}, {b}) does not separate two distinct colors")));
        }
        let c = PlaquetteColor::ALL
            .into_iter()
            .find(|&c| c != color_of(sides[0]) && c != color_of(sides[1]))
            .unwrap();
        link_color.insert(key(a, b), c);
    }

    let mut loops = BTreeMap::new();
    for color in PlaquetteColor::ALL {
        // c-plaquette graph: nodes are c-colored bricks, links are c-colored edges.
        let owner = |q: usize| -> (usize, (i64, i64)) {
            for (p, br) in bricks.iter().enumerate() {
                if color_of(p) != color {
                    continue;
                }
                if let Some(i) = br.sites.iter().position(|&s| s == q) {
                    return (p, br.offsets[i]);
                }
            }
            unreachable!("every site touches one plaquette of each color")
        };
        let mut adjacency: BTreeMap<usize, Vec<(usize, (i64, i64), (usize, usize))>> = BTreeMap::new();
        for &(a, b, (dx, dy)) in &links {
            if link_color[&key(a, b)] != color {
                continue;
            }
            let (pa, oa) = owner(a);
            let (pb, ob) = owner(b);
            let disp = (2 * dx + oa.0 - ob.0, 2 * dy + oa.1 - ob.1);
            adjacency.entry(pa).or_default().push((pb, disp, (a, b)));
            adjacency.entry(pb).or_default().push((pa, (-disp.0, -disp.1), (a, b)));
        }
        let start = (0..plaquettes.len()).find(|&p| color_of(p) == color).unwrap();
        for (direction, target) in [
            (Direction::H, (2 * width as i64, 0i64)),
            (Direction::V, (0i64, 2 * rows as i64)),
        ] {
            let links = shortest_winding_cycle(&adjacency, start, target)
                .ok_or_else(|| Error::InvalidLattice(format!("no {direction:?} loop of color {color:?}")))?;
            let mut support: Vec<usize> = links.iter().flat_map(|&(a, b)| [a, b]).collect();
            support.sort_unstable();
            support.dedup();
            if support.len() != 2 * links.len() {
                return Err(Error::InvalidLattice(format!("{color:?} {direction:?} loop revisits a site")));
            }
            loops.insert((Axis::X, direction, Some(color)), support);
        }
    }

    Ok(CodeLattice {
        kind: CodeKind::Color,
        dims: (cols, rows),
        n_qubits: n,
        coords,
        plaquettes,
        vertices: Vec::new(),
        edges,
        loops,
    })
}

type Adjacency = BTreeMap<usize, Vec<(usize, (i64, i64), (usize, usize))>>;

/// Breadth-first search in the universal cover for the shortest path from
/// `start` to its translate by `target`; returns the links used.
fn shortest_winding_cycle(adj: &Adjacency, start: usize, target: (i64, i64)) -> Option<Vec<(usize, usize)>> {
    let bound = 2 * (target.0.abs() + target.1.abs()) + 8;
    let mut prev: HashMap<(usize, (i64, i64)), ((usize, (i64, i64)), (usize, usize))> = HashMap::new();
    let mut queue = VecDeque::new();
    let origin = (start, (0i64, 0i64));
    queue.push_back(origin);
    prev.insert(origin, (origin, (usize::MAX, usize::MAX)));
    while let Some(node @ (p, (x, y))) = queue.pop_front() {
        if node == (start, target) {
            let mut links = Vec::new();
            let mut cur = node;
            while cur != origin {
                let (back, link) = prev[&cur];
                links.push(link);
                cur = back;
            }
            return Some(links);
        }
        for &(q, (dx, dy), link) in adj.get(&p).into_iter().flatten() {
            let next = (q, (x + dx, y + dy));
            if (x + dx).abs() > bound || (y + dy).abs() > bound || prev.contains_key(&next) {
                continue;
            }
            prev.insert(next, (node, link));
            queue.push_back(next);
        }
    }
    None
}

/// Kitaev: `N_P` plaquettes then `N_P` vertices. Color: `N_P` Z-type then `N_P` X-type plaquettes.
pub fn stabilizer_generators(lat: &CodeLattice) -> Vec<PauliString> {
    let mut out: Vec<PauliString> = (0..lat.n_plaquettes()).map(|p| lat.plaquette_operator(p)).collect();
    out.extend((0..lat.n_x_stabilizers()).map(|i| lat.x_stabilizer(i)));
    out
}

pub fn loop_operator(lat: &CodeLattice, spec: &LoopSpec) -> Result<PauliString> {
    let support = lat.loop_support(spec)?;
    PauliString::uniform(lat.n_qubits(), spec.operator, support)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::commutes;

    fn labels(q: &[usize]) -> Vec<usize> {
        q.iter().map(|&i| i + 1).collect()
    }

    fn all_kitaev_loops() -> Vec<LoopSpec> {
        let mut v = Vec::new();
        for op in [Axis::X, Axis::Z] {
            for d in [Direction::H, Direction::V] {
                v.push(LoopSpec::kitaev(op, d));
            }
        }
        v
    }

    fn all_color_loops() -> Vec<LoopSpec> {
        let mut v = Vec::new();
        for op in [Axis::X, Axis::Z] {
            for d in [Direction::H, Direction::V] {
                for c in PlaquetteColor::ALL {
                    v.push(LoopSpec::color(op, d, c));
                }
            }
        }
        v
    }

    #[test]
    fn kitaev_counts() {
        let lat = build_kitaev(3, 3).unwrap();
        assert_eq!(lat.n_qubits(), 18);
        assert_eq!(lat.n_plaquettes(), 9);
        for (a, b) in [(2, 2), (3, 2), (4, 2), (5, 2), (2, 3), (4, 3)] {
            let lat = build_kitaev(a, b).unwrap();
            assert_eq!(lat.n_qubits(), 2 * a * b);
            let mut p_count = vec![0; lat.n_qubits()];
            let mut v_count = vec![0; lat.n_qubits()];
            for p in lat.plaquettes() {
                assert_eq!(p.qubits.len(), 4);
                p.qubits.iter().for_each(|&q| p_count[q] += 1);
            }
            for v in lat.vertices() {
                assert_eq!(v.len(), 4);
                v.iter().for_each(|&q| v_count[q] += 1);
            }
            assert!(p_count.iter().chain(&v_count).all(|&c| c == 2));
        }
        assert!(build_kitaev(1, 3).is_err());
        assert_eq!(build_kitaev(2, 2).unwrap().loop_support(&LoopSpec::kitaev(Axis::X, Direction::H)).unwrap().len(), 2);
    }

    #[test]
    fn kitaev_figure_labels() {
        let lat = build_kitaev(3, 3).unwrap();
        let xh = lat.loop_support(&LoopSpec::kitaev(Axis::X, Direction::H)).unwrap();
        assert_eq!(labels(xh), vec![10, 11, 12]);
        let zh = lat.loop_support(&LoopSpec::kitaev(Axis::Z, Direction::H)).unwrap();
        assert_eq!(labels(zh), vec![13, 14, 15]);
        let zv = lat.loop_support(&LoopSpec::kitaev(Axis::Z, Direction::V)).unwrap();
        assert_eq!(labels(zv), vec![6, 12, 18]);
        let small = build_kitaev(2, 2).unwrap();
        let zv = small.loop_support(&LoopSpec::kitaev(Axis::Z, Direction::V)).unwrap();
        assert_eq!(labels(zv), vec![4, 8]);
    }

    #[test]
    fn kitaev_loop_weights_and_crossings() {
        let lat = build_kitaev(3, 3).unwrap();
        let xh = loop_operator(&lat, &LoopSpec::kitaev(Axis::X, Direction::H)).unwrap();
        assert_eq!(xh.weight(), 3);
        assert_eq!(xh.axis(9), Some(Axis::X));
        let zv = loop_operator(&lat, &LoopSpec::kitaev(Axis::Z, Direction::V)).unwrap();
        assert_eq!((xh.support_mask() & zv.support_mask()).count_ones(), 1);
        assert!(!commutes(&xh, &zv).unwrap());
        let (sq, ph) = crate::pauli::pauli_product(&xh, &xh).unwrap();
        assert!(sq.is_identity());
        assert_eq!(ph, crate::pauli::Phase::ONE);
    }

    #[test]
    fn kitaev_generators_commute_with_each_other_and_loops() {
        for (a, b) in [(2, 2), (3, 2), (3, 3), (5, 2)] {
            let lat = build_kitaev(a, b).unwrap();
            let gens = stabilizer_generators(&lat);
            assert_eq!(gens.len(), 2 * a * b);
            for g in &gens {
                for h in &gens {
                    assert!(commutes(g, h).unwrap());
                }
                for spec in all_kitaev_loops() {
                    assert!(commutes(g, &loop_operator(&lat, &spec).unwrap()).unwrap());
                }
            }
        }
    }

    #[test]
    fn color_counts_and_colors() {
        let lat = build_color(3, 2).unwrap();
        assert_eq!(lat.n_qubits(), 12);
        assert_eq!(lat.n_plaquettes(), 6);
        for (c, r) in [(3, 2), (3, 4), (6, 2)] {
            let lat = build_color(c, r).unwrap();
            let mut seen: Vec<Vec<PlaquetteColor>> = vec![Vec::new(); lat.n_qubits()];
            for p in lat.plaquettes() {
                assert_eq!(p.qubits.len(), 6);
                for &q in &p.qubits {
                    seen[q].push(p.color.unwrap());
                }
            }
            for s in &mut seen {
                s.sort();
                assert_eq!(s, &PlaquetteColor::ALL.to_vec());
            }
        }
        assert!(build_color(4, 2).is_err());
        assert!(build_color(3, 3).is_err());
    }

    #[test]
    fn color_loops_commute_with_stabilizers() {
        for (c, r) in [(3, 2), (3, 4), (6, 2)] {
            let lat = build_color(c, r).unwrap();
            let gens = stabilizer_generators(&lat);
            for g in &gens {
                for h in &gens {
                    assert!(commutes(g, h).unwrap());
                }
            }
            for spec in all_color_loops() {
                let l = loop_operator(&lat, &spec).unwrap();
                assert!(l.weight() >= 2);
                for g in &gens {
                    assert!(commutes(g, &l).unwrap(), "{spec} vs {g}");
                }
            }
            // Crossing X and Z loops anticommute exactly when their colors differ.
            for color in PlaquetteColor::ALL {
                let xh = loop_operator(&lat, &LoopSpec::color(Axis::X, Direction::H, color)).unwrap();
                let zv = loop_operator(&lat, &LoopSpec::color(Axis::Z, Direction::V, color)).unwrap();
                let other = PlaquetteColor::ALL.into_iter().find(|&c| c != color).unwrap();
                let zv_other = loop_operator(&lat, &LoopSpec::color(Axis::Z, Direction::V, other)).unwrap();
                assert!(commutes(&xh, &zv).unwrap());
                assert!(!commutes(&xh, &zv_other).unwrap());
            }
        }
    }

    #[test]
    fn loop_spec_validation() {
        let k = build_kitaev(2, 2).unwrap();
        let c = build_color(3, 2).unwrap();
        assert!(loop_operator(&k, &LoopSpec::color(Axis::X, Direction::H, PlaquetteColor::Red)).is_err());
        assert!(loop_operator(&c, &LoopSpec::kitaev(Axis::X, Direction::H)).is_err());
        assert_eq!("xhr".parse::<LoopSpec>().unwrap(), LoopSpec::color(Axis::X, Direction::H, PlaquetteColor::Red));
        assert_eq!("zv".parse::<LoopSpec>().unwrap().to_string(), "zv");
        assert!("yh".parse::<LoopSpec>().is_err());
    }

    #[test]
    fn export_uses_one_based_labels() {
        let lat = build_kitaev(2, 2).unwrap();
        let json = serde_json::to_value(lat.export()).unwrap();
        assert_eq!(json["n_qubits"], 8);
        assert_eq!(json["loops"]["zv"], serde_json::json!([4, 8]));
        assert_eq!(json["qubits"].as_array().unwrap().len(), 8);
    }
}
