//! Mutable linked-vertex representation of a polyline map, used while
//! vertices are removed one at a time.

use crate::geometry::{Point2, Polyline, PolylineMap};

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct LineInfo {
    len: usize,
    closed: bool,
    /// First vertex for open lines, any live vertex for closed ones.
    head: u32,
}

/// What removing a vertex does to its polyline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RemovalKind {
    /// Two neighbors; the incident segments are replaced by the chord.
    Interior { prev: u32, next: u32 },
    /// End of an open polyline with at least three vertices; the end
    /// segment disappears and `neighbor` becomes the new end.
    Boundary { neighbor: u32 },
    /// One of the two vertices of a single-segment polyline; the whole
    /// polyline disappears.
    DeletePolyline { other: u32 },
    /// A triangle cannot lose a vertex.
    Invalid,
}

impl RemovalKind {
    pub(crate) fn drops_segment(self) -> bool {
        matches!(
            self,
            RemovalKind::Boundary { .. } | RemovalKind::DeletePolyline { .. }
        )
    }
}

#[derive(Debug, Clone)]
pub(crate) struct WorkingMap {
    pos: Vec<Point2>,
    prev: Vec<u32>,
    next: Vec<u32>,
    line: Vec<u32>,
    alive: Vec<bool>,
    lines: Vec<LineInfo>,
    live: usize,
}

impl WorkingMap {
    /// Empty map over `capacity` potential vertex ids.
    pub(crate) fn with_capacity(capacity: usize) -> Self {
        Self {
            pos: vec![Point2::ORIGIN; capacity],
            prev: vec![NONE; capacity],
            next: vec![NONE; capacity],
            line: vec![NONE; capacity],
            alive: vec![false; capacity],
            lines: Vec::new(),
            live: 0,
        }
    }

    /// Adds a polyline whose vertices use the given ids.
    pub(crate) fn add_line(&mut self, ids: &[u32], points: &[Point2], closed: bool) {
        debug_assert_eq!(ids.len(), points.len());
        let line_id = self.lines.len() as u32;
        let n = ids.len();
        for (i, (&id, &p)) in ids.iter().zip(points).enumerate() {
            let v = id as usize;
            self.pos[v] = p;
            self.alive[v] = true;
            self.line[v] = line_id;
            self.prev[v] = if i > 0 {
                ids[i - 1]
            } else if closed {
                ids[n - 1]
            } else {
                NONE
            };
            self.next[v] = if i + 1 < n {
                ids[i + 1]
            } else if closed {
                ids[0]
            } else {
                NONE
            };
        }
        self.lines.push(LineInfo {
            len: n,
            closed,
            head: ids[0],
        });
        self.live += n;
    }

    /// Working copy of a map; vertex ids follow the flattened vertex order.
    pub(crate) fn from_map(map: &PolylineMap) -> (Self, Vec<Vec<u32>>) {
        let mut wm = Self::with_capacity(map.vertex_count());
        let mut next_id = 0u32;
        let mut ids = Vec::with_capacity(map.polyline_count());
        for line in map.polylines() {
            let line_ids: Vec<u32> = (next_id..next_id + line.len() as u32).collect();
            next_id += line.len() as u32;
            wm.add_line(&line_ids, line.vertices(), line.is_closed());
            ids.push(line_ids);
        }
        (wm, ids)
    }

    #[inline]
    pub(crate) fn capacity(&self) -> usize {
        self.pos.len()
    }

    #[inline]
    pub(crate) fn live_count(&self) -> usize {
        self.live
    }

    #[inline]
    pub(crate) fn is_alive(&self, v: u32) -> bool {
        self.alive[v as usize]
    }

    #[inline]
    pub(crate) fn pos(&self, v: u32) -> Point2 {
        self.pos[v as usize]
    }

    #[inline]
    pub(crate) fn next(&self, v: u32) -> u32 {
        self.next[v as usize]
    }

    #[inline]
    pub(crate) fn prev(&self, v: u32) -> u32 {
        self.prev[v as usize]
    }

    pub(crate) fn line_len(&self, v: u32) -> usize {
        self.lines[self.line[v as usize] as usize].len
    }

    /// Live vertex ids.
    pub(crate) fn vertices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.pos.len() as u32).filter(move |&v| self.alive[v as usize])
    }

    /// Segments as `(start id, start, end)`; a segment is named by its start vertex.
    pub(crate) fn segments(&self) -> impl Iterator<Item = (u32, Point2, Point2)> + '_ {
        self.vertices().filter_map(move |v| {
            let n = self.next[v as usize];
            (n != NONE).then(|| (v, self.pos[v as usize], self.pos[n as usize]))
        })
    }

    /// Start ids of the segments touching `v`.
    pub(crate) fn incident_segments(&self, v: u32) -> ([u32; 2], usize) {
        let mut out = [NONE; 2];
        let mut n = 0;
        let p = self.prev[v as usize];
        if p != NONE {
            out[n] = p;
            n += 1;
        }
        if self.next[v as usize] != NONE {
            out[n] = v;
            n += 1;
        }
        (out, n)
    }

    pub(crate) fn segment(&self, start: u32) -> (Point2, Point2) {
        let n = self.next[start as usize];
        (self.pos[start as usize], self.pos[n as usize])
    }

    pub(crate) fn removal_kind(&self, v: u32) -> RemovalKind {
        let vi = v as usize;
        let info = &self.lines[self.line[vi] as usize];
        let (p, n) = (self.prev[vi], self.next[vi]);
        if info.closed {
            if info.len <= 3 {
                RemovalKind::Invalid
            } else {
                RemovalKind::Interior { prev: p, next: n }
            }
        } else if info.len == 2 {
            RemovalKind::DeletePolyline {
                other: if p != NONE { p } else { n },
            }
        } else if p != NONE && n != NONE {
            RemovalKind::Interior { prev: p, next: n }
        } else {
            RemovalKind::Boundary {
                neighbor: if p != NONE { p } else { n },
            }
        }
    }

    /// Removes `v` and returns the ids that died (one, or two when a
    /// single-segment polyline vanishes).
    pub(crate) fn remove(&mut self, v: u32) -> ([u32; 2], usize) {
        let kind = self.removal_kind(v);
        let vi = v as usize;
        let li = self.line[vi] as usize;
        match kind {
            RemovalKind::Invalid => ([NONE; 2], 0),
            RemovalKind::DeletePolyline { other } => {
                for id in [v, other] {
                    self.kill(id);
                }
                self.lines[li].len = 0;
                self.lines[li].head = NONE;
                ([v, other], 2)
            }
            RemovalKind::Interior { prev, next } => {
                self.next[prev as usize] = next;
                self.prev[next as usize] = prev;
                if self.lines[li].head == v {
                    self.lines[li].head = next;
                }
                self.kill(v);
                self.lines[li].len -= 1;
                ([v, NONE], 1)
            }
            RemovalKind::Boundary { neighbor } => {
                if self.next[vi] == neighbor {
                    self.prev[neighbor as usize] = NONE;
                    self.lines[li].head = neighbor;
                } else {
                    self.next[neighbor as usize] = NONE;
                }
                self.kill(v);
                self.lines[li].len -= 1;
                ([v, NONE], 1)
            }
        }
    }

    fn kill(&mut self, v: u32) {
        let vi = v as usize;
        self.alive[vi] = false;
        self.prev[vi] = NONE;
        self.next[vi] = NONE;
        self.live -= 1;
    }

    /// Vertices of the polyline containing `v`, in order.
    pub(crate) fn line_vertices(&self, v: u32) -> Vec<u32> {
        let info = &self.lines[self.line[v as usize] as usize];
        self.walk(info)
    }

    fn walk(&self, info: &LineInfo) -> Vec<u32> {
        let mut out = Vec::with_capacity(info.len);
        if info.len == 0 {
            return out;
        }
        let mut v = info.head;
        for _ in 0..info.len {
            out.push(v);
            v = self.next[v as usize];
            if v == NONE {
                break;
            }
        }
        out
    }

    /// Snapshot as an immutable map plus the vertex ids of every polyline.
    pub(crate) fn to_map(&self) -> (PolylineMap, Vec<Vec<u32>>) {
        let mut lines = Vec::new();
        let mut ids = Vec::new();
        for info in &self.lines {
            if info.len == 0 {
                continue;
            }
            let vs = self.walk(info);
            let pts = vs.iter().map(|&v| self.pos[v as usize]).collect();
            let line = Polyline::new(pts, info.closed)
                .expect("working map keeps polylines valid");
            lines.push(line);
            ids.push(vs);
        }
        (PolylineMap::from_parts_unchecked(lines), ids)
    }
}
