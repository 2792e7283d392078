//! Doors, Keys & Gems: ASCII grid layouts, problem generation and the
//! door-ignoring maze-distance heuristic.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use super::DomainError;
use crate::heuristic::{Heuristic, UNREACHABLE};
use crate::pddl::GroundAtom;
use crate::task::{AtomId, GoalSpec, State, Task};

/// `(x, y)` with `y` growing downward.
pub type Cell = (i64, i64);

/// Parsed grid layout.
///
/// Glyphs: `W` or `#` wall, `.` floor, `D` locked door, `k` key, `@` start,
/// `1`-`9` gem slots whose colour labels come from the stimulus metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub width: i64,
    pub height: i64,
    pub walls: BTreeSet<Cell>,
    pub doors: BTreeSet<Cell>,
    pub keys: BTreeSet<Cell>,
    pub gems: BTreeMap<Cell, String>,
    pub start: Cell,
}

pub fn cell_name((x, y): Cell) -> String {
    format!("c{x}_{y}")
}

/// Key objects are numbered in row-major reading order.
fn key_order(keys: &BTreeSet<Cell>) -> Vec<Cell> {
    let mut v: Vec<Cell> = keys.iter().copied().collect();
    v.sort_by_key(|&(x, y)| (y, x));
    v
}

impl GridSpec {
    /// Parses an ASCII map; `gem_labels` names each gem glyph.
    pub fn parse(ascii: &str, gem_labels: &BTreeMap<char, String>) -> Result<Self, DomainError> {
        let rows: Vec<&str> = ascii
            .lines()
            .map(str::trim_end)
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(DomainError::Layout("empty map".into()));
        }
        let width = rows[0].chars().count() as i64;
        let mut g = GridSpec {
            width,
            height: rows.len() as i64,
            walls: BTreeSet::new(),
            doors: BTreeSet::new(),
            keys: BTreeSet::new(),
            gems: BTreeMap::new(),
            start: (-1, -1),
        };
        let mut starts = 0;
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() as i64 != width {
                return Err(DomainError::Layout(format!("row {y} has a different width")));
            }
            for (x, ch) in row.chars().enumerate() {
                let c = (x as i64, y as i64);
                match ch {
                    'W' | '#' => {
                        g.walls.insert(c);
                    }
                    '.' => {}
                    'D' => {
                        g.doors.insert(c);
                    }
                    'k' => {
                        g.keys.insert(c);
                    }
                    '@' => {
                        g.start = c;
                        starts += 1;
                    }
                    d if d.is_ascii_digit() => {
                        let label = gem_labels
                            .get(&d)
                            .cloned()
                            .ok_or_else(|| DomainError::Layout(format!("gem glyph `{d}` has no label")))?;
                        g.gems.insert(c, label);
                    }
                    other => return Err(DomainError::Layout(format!("unknown glyph `{other}`"))),
                }
            }
        }
        if starts != 1 {
            return Err(DomainError::Layout(format!("expected one start cell, found {starts}")));
        }
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let in_bounds = |&(x, y): &Cell| x >= 0 && y >= 0 && x < self.width && y < self.height;
        let all = self
            .doors
            .iter()
            .chain(&self.keys)
            .chain(self.gems.keys())
            .chain(std::iter::once(&self.start));
        let mut seen = BTreeSet::new();
        for c in all {
            if !in_bounds(c) {
                return Err(DomainError::Layout(format!("cell {c:?} out of bounds")));
            }
            if self.walls.contains(c) {
                return Err(DomainError::Layout(format!("cell {c:?} is a wall")));
            }
            if !seen.insert(*c) {
                return Err(DomainError::Layout(format!("cell {c:?} holds two objects")));
            }
        }
        let mut labels = BTreeSet::new();
        for l in self.gems.values() {
            if !labels.insert(l) {
                return Err(DomainError::Layout(format!("gem label `{l}` repeated")));
            }
        }
        Ok(())
    }

    pub fn is_open(&self, (x, y): Cell) -> bool {
        x >= 0 && y >= 0 && x < self.width && y < self.height && !self.walls.contains(&(x, y))
    }

    pub fn open_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height)
            .flat_map(move |y| (0..self.width).map(move |x| (x, y)))
            .filter(|&c| self.is_open(c))
    }

    /// Gem labels in left-to-right, top-to-bottom order of their glyph digits.
    pub fn gem_labels(&self) -> Vec<String> {
        self.gems.values().cloned().collect()
    }

    /// Renders the instance as a problem for the doors-keys-gems domain.
    /// Goals are `(has GEM)` for each gem, in `goal_order` when given.
    pub fn to_problem_pddl(&self, name: &str, goal_order: Option<&[String]>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "(define (problem {name})\n  (:domain doors-keys-gems)");
        s.push_str("  (:objects");
        for c in self.open_cells() {
            let _ = write!(s, " {}", cell_name(c));
        }
        s.push_str(" - cell");
        let keys = key_order(&self.keys);
        for i in 0..keys.len() {
            let _ = write!(s, " k{}", i + 1);
        }
        if !keys.is_empty() {
            s.push_str(" - key");
        }
        for l in self.gems.values() {
            let _ = write!(s, " {l}");
        }
        if !self.gems.is_empty() {
            s.push_str(" - gem");
        }
        s.push_str(")\n  (:init\n");
        let _ = writeln!(s, "    (at {})", cell_name(self.start));
        for c in self.open_cells() {
            for (dx, dy, rel) in [(0, -1, "step-up"), (0, 1, "step-down"), (-1, 0, "step-left"), (1, 0, "step-right")] {
                let n = (c.0 + dx, c.1 + dy);
                if self.is_open(n) {
                    let _ = writeln!(s, "    ({rel} {} {})", cell_name(c), cell_name(n));
                    let _ = writeln!(s, "    (adjacent {} {})", cell_name(c), cell_name(n));
                }
            }
        }
        for d in &self.doors {
            let _ = writeln!(s, "    (locked {})", cell_name(*d));
        }
        for (i, k) in keys.iter().enumerate() {
            let _ = writeln!(s, "    (key-at k{} {})", i + 1, cell_name(*k));
        }
        for (c, l) in &self.gems {
            let _ = writeln!(s, "    (gem-at {l} {})", cell_name(*c));
        }
        let _ = writeln!(s, "    (= (xpos) {})\n    (= (ypos) {}))", self.start.0, self.start.1);
        s.push_str("  (:goals");
        let labels: Vec<String> = match goal_order {
            Some(order) => order.to_vec(),
            None => self.gem_labels(),
        };
        for l in &labels {
            let _ = write!(s, "\n    ({l} (has {l}))");
        }
        s.push_str("))\n");
        s
    }

    /// Breadth-first distances to `target` through open cells, treating
    /// doors as passable. `None` marks cells cut off by walls.
    pub fn distances_from(&self, target: Cell) -> HashMap<Cell, u32> {
        let mut dist = HashMap::new();
        if !self.is_open(target) {
            return dist;
        }
        dist.insert(target, 0);
        let mut queue = VecDeque::from([target]);
        while let Some(c) = queue.pop_front() {
            let d = dist[&c];
            for (dx, dy) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
                let n = (c.0 + dx, c.1 + dy);
                if self.is_open(n) && !dist.contains_key(&n) {
                    dist.insert(n, d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }
}

/// Door-ignoring maze distance from the agent to the goal gem. One BFS per
/// gem is run at construction; queries are table lookups.
#[derive(Debug, Clone)]
pub struct MazeDistance {
    xpos: usize,
    ypos: usize,
    width: i64,
    height: i64,
    /// goal atom `(has GEM)` -> distance per cell, row-major
    tables: HashMap<AtomId, Vec<f64>>,
}

impl MazeDistance {
    pub fn new(task: &Task, grid: &GridSpec) -> Result<Self, DomainError> {
        let xpos = task
            .fluent_id("xpos", &[])
            .ok_or_else(|| DomainError::Layout("task has no xpos fluent".into()))?;
        let ypos = task
            .fluent_id("ypos", &[])
            .ok_or_else(|| DomainError::Layout("task has no ypos fluent".into()))?;
        let mut tables = HashMap::new();
        for (cell, label) in &grid.gems {
            let Some(atom) = task.atom_id(&GroundAtom::new("has", &[label])) else {
                continue;
            };
            let dist = grid.distances_from(*cell);
            let mut table = vec![UNREACHABLE; (grid.width * grid.height) as usize];
            for ((x, y), d) in dist {
                table[(y * grid.width + x) as usize] = d as f64;
            }
            tables.insert(atom, table);
        }
        Ok(MazeDistance {
            xpos,
            ypos,
            width: grid.width,
            height: grid.height,
            tables,
        })
    }

    pub fn agent_cell(&self, s: &State) -> Cell {
        (s.fluents[self.xpos], s.fluents[self.ypos])
    }
}

impl Heuristic for MazeDistance {
    fn estimate(&self, s: &State, g: &GoalSpec) -> f64 {
        let (x, y) = self.agent_cell(s);
        let mut h: f64 = 0.0;
        for &atom in g.atoms() {
            if s.holds(atom) {
                continue;
            }
            if let Some(table) = self.tables.get(&atom) {
                if x < 0 || y < 0 || x >= self.width || y >= self.height {
                    return UNREACHABLE;
                }
                h = h.max(table[(y * self.width + x) as usize]);
            }
        }
        h
    }
}

/// Goals in this domain are never confused with one another.
pub fn dkg_corrupt(g: &GoalSpec) -> GoalSpec {
    g.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::DOORS_KEYS_GEMS_DOMAIN;

    pub(crate) fn labels() -> BTreeMap<char, String> {
        [('1', "red"), ('2', "yellow"), ('3', "blue")]
            .into_iter()
            .map(|(c, l)| (c, l.to_string()))
            .collect()
    }

    fn task_for(grid: &GridSpec) -> Task {
        Task::from_texts(DOORS_KEYS_GEMS_DOMAIN, &grid.to_problem_pddl("t", None)).unwrap()
    }

    #[test]
    fn parse_rejects_bad_layouts() {
        assert!(GridSpec::parse("", &labels()).is_err());
        assert!(GridSpec::parse("@.\n.", &labels()).is_err());
        assert!(GridSpec::parse("..", &labels()).is_err());
        assert!(GridSpec::parse("@x", &labels()).is_err());
        assert!(GridSpec::parse("@9", &labels()).is_err());
    }

    #[test]
    fn adjacent_gem_is_one_step() {
        let g = GridSpec::parse("@1", &labels()).unwrap();
        let t = task_for(&g);
        let h = MazeDistance::new(&t, &g).unwrap();
        assert_eq!(h.estimate(t.initial_state(), &t.goals()[0]), 1.0);
    }

    #[test]
    fn zero_exactly_on_gem_cell() {
        let g = GridSpec::parse("@.1", &labels()).unwrap();
        let t = task_for(&g);
        let h = MazeDistance::new(&t, &g).unwrap();
        let mut s = t.initial_state().clone();
        assert_eq!(h.estimate(&s, &t.goals()[0]), 2.0);
        s = t.apply(&s, t.resolve_action(&s, "right").unwrap()).unwrap();
        s = t.apply(&s, t.resolve_action(&s, "right").unwrap()).unwrap();
        assert_eq!(h.estimate(&s, &t.goals()[0]), 0.0);
        s = t.apply(&s, t.resolve_action(&s, "pickup-gem").unwrap()).unwrap();
        assert_eq!(h.estimate(&s, &t.goals()[0]), 0.0);
    }

    #[test]
    fn walled_off_gem_is_unreachable() {
        let g = GridSpec::parse("@W1", &labels()).unwrap();
        let t = task_for(&g);
        let h = MazeDistance::new(&t, &g).unwrap();
        assert_eq!(h.estimate(t.initial_state(), &t.goals()[0]), UNREACHABLE);
    }

    #[test]
    fn identity_corruption() {
        let g = GridSpec::parse("@12", &labels()).unwrap();
        let t = task_for(&g);
        for goal in t.goals() {
            assert_eq!(&dkg_corrupt(goal), goal);
        }
    }
}
