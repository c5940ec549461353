'''
Planar link diagrams given as PD codes, with the combinatorics every sign
convention depends on: faces, checkerboard colorings, edge parities, the
resolutions of the cube and the saddle that joins two adjacent resolutions.

Positions 0..3 of X(a,b,c,d) run counterclockwise around the crossing and the
under strand enters at 0 and leaves at 2. The 0-resolution joins positions
(0,1) and (2,3), the 1-resolution joins (0,3) and (1,2).
'''
from __future__ import annotations

import re
from collections import OrderedDict, defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from errors import (DegenerateResolution, DimensionMismatch, DifferentComponents,
                    MalformedPd, NoSuchEdge, NoSuchFace, NonMatchingEdges, NonPlanar,
                    NotAnEdge, OrientationConflict, UsageError, VerificationFailure)
from logger import logger

End = Tuple[int, int]  # (crossing index, position)

BLACK = "black"
WHITE = "white"

# position -> joined position, for the 0- and 1-resolution of a crossing
SMOOTHINGS = (
    {0: 1, 1: 0, 2: 3, 3: 2},
    {0: 3, 3: 0, 1: 2, 2: 1},
)


@dataclass(frozen=True)
class Crossing:
    index: int
    edges: Tuple[int, int, int, int]
    sign: int


@dataclass(frozen=True)
class Edge:
    label: int
    tail: Optional[End]
    head: Optional[End]

    @property
    def free(self) -> bool:
        return self.tail is None


@dataclass(frozen=True)
class Face:
    index: int
    darts: Tuple[End, ...]
    edges: Tuple[int, ...]


@dataclass(frozen=True)
class LinkDiagram:
    crossings: Tuple[Crossing, ...]
    edges: "OrderedDict[int, Edge]"
    faces: Tuple[Face, ...]
    dart_face: Dict[End, int]
    free_loops: int = 0
    pd_text: str = ""

    @property
    def n(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for c in self.crossings if c.sign > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for c in self.crossings if c.sign < 0)

    @property
    def loop_labels(self) -> List[int]:
        return [e.label for e in self.edges.values() if e.free]

    def edge(self, label: int) -> Edge:
        if label not in self.edges:
            raise NoSuchEdge(f"{label}")
        return self.edges[label]

    def left_face(self, label: int) -> int:
        '''Face on the left of an edge traversed along its orientation.'''
        return self.dart_face[self.edge(label).tail]

    def right_face(self, label: int) -> int:
        return self.dart_face[self.edge(label).head]

    def __hash__(self):
        return hash((self.pd_text, self.free_loops))


@dataclass(frozen=True)
class Basepoint:
    edge: int
    slot: int = 0

    def __str__(self):
        return f"{self.edge}:{self.slot}" if self.slot else f"{self.edge}"


@dataclass(frozen=True)
class BasepointSet:
    points: Tuple[Basepoint, ...] = ()

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i) -> Basepoint:
        return self.points[i]

    def without(self, index: int) -> "BasepointSet":
        return BasepointSet(self.points[:index] + self.points[index + 1:])

    def replaced(self, index: int, point: Basepoint) -> "BasepointSet":
        return BasepointSet(self.points[:index] + (point,) + self.points[index + 1:])

    def on_edge(self, label: int) -> List[int]:
        '''Indices of the points on an edge, ordered along its orientation.'''
        return sorted((i for i, p in enumerate(self.points) if p.edge == label), key=lambda i: self.points[i].slot)

    def __str__(self):
        return ",".join(str(p) for p in self.points)


@dataclass(frozen=True)
class Coloring:
    face_colors: Dict[int, str]
    outer_face: int

    def is_black(self, face: int) -> bool:
        return self.face_colors[face] == BLACK


#==================================================================#
#  Parsing
#==================================================================#
_TERM = re.compile(r"X\s*[\(\[]\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*[\)\]]")
_WRAPPER = re.compile(r"^\s*PD\s*[\(\[](.*)[\)\]]\s*$", re.S)


def _tokenize(text: str) -> List[Tuple[int, int, int, int]]:
    wrapped = _WRAPPER.match(text)
    if wrapped:
        text = wrapped.group(1)
    terms = [tuple(int(g) for g in m.groups()) for m in _TERM.finditer(text)]
    leftover = _TERM.sub("", text)
    if leftover.replace(",", "").strip():
        raise MalformedPd(f"unexpected text {leftover.strip()!r}")
    if terms and leftover.count(",") != len(terms) - 1:
        raise MalformedPd("crossings must be separated by single commas")
    return terms


def _orient(quads: Sequence[Tuple[int, ...]], ends: Dict[int, List[End]]) -> Dict[int, Tuple[End, End]]:
    orientation: Dict[int, Tuple[End, End]] = {}

    def walk(tail: End):
        while True:
            k, p = tail
            if p == 0:
                raise OrientationConflict(f"crossing {k + 1} would have its under strand leaving at position 0")
            label = quads[k][p]
            head = ends[label][1] if ends[label][0] == tail else ends[label][0]
            if label in orientation:
                if orientation[label] != (tail, head):
                    raise OrientationConflict(f"edge {label} is traversed both ways")
                return
            if head[1] == 2:
                raise OrientationConflict(f"crossing {head[0] + 1} would have its under strand entering at position 2")
            orientation[label] = (tail, head)
            tail = (head[0], (head[1] + 2) % 4)

    for k in range(len(quads)):
        walk((k, 2))
    # Components that never pass under a crossing: enter the over strand at
    # position 3 iff b == d + 1 or d > b + 1, as KnotTheory numbers edges
    for label in sorted(ends):
        if label in orientation:
            continue
        k, p = ends[label][0]
        b, d = quads[k][1], quads[k][3]
        enters_at_3 = b == d + 1 or d > b + 1
        head_here = (p == 3) == enters_at_3
        first = ends[label][0]
        second = ends[label][1]
        walk(second if head_here else first)
    return orientation


def _trace_faces(quads: Sequence[Tuple[int, ...]], other: Dict[End, End]) -> List[Tuple[End, ...]]:
    seen = set()
    faces = []
    for k in range(len(quads)):
        for p in range(4):
            start = (k, p)
            if start in seen:
                continue
            orbit = []
            dart = start
            while dart not in seen:
                seen.add(dart)
                orbit.append(dart)
                k2, p2 = other[dart]
                dart = (k2, (p2 - 1) % 4)
            faces.append(tuple(orbit))
    return faces


def parse_pd(text: str, free_loops: int = 0) -> LinkDiagram:
    '''
    Parses and validates a PD code. Orientations are inferred from the under
    strands, crossing signs follow from them, and planarity is certified by the
    Euler characteristic of the traced faces.
    '''
    if free_loops < 0:
        raise MalformedPd("free loop count must be nonnegative")
    quads = _tokenize(text or "")
    ends: Dict[int, List[End]] = defaultdict(list)
    for k, quad in enumerate(quads):
        for p, label in enumerate(quad):
            if label < 1:
                raise MalformedPd(f"edge labels must be positive, got {label}")
            ends[label].append((k, p))
    bad = sorted(label for label, where in ends.items() if len(where) != 2)
    if bad:
        raise NonMatchingEdges(f"edge {bad[0]} appears {len(ends[bad[0]])} time(s)")

    orientation = _orient(quads, ends) if quads else {}
    crossings = []
    for k, quad in enumerate(quads):
        heads = [p for p in (1, 3) if orientation[quad[p]][1] == (k, p)]
        if len(heads) != 1:
            raise OrientationConflict(f"over strand of crossing {k + 1} is not oriented through it")
        crossings.append(Crossing(k, quad, 1 if heads[0] == 3 else -1))

    edges: "OrderedDict[int, Edge]" = OrderedDict()
    for label in sorted(orientation):
        tail, head = orientation[label]
        edges[label] = Edge(label, tail, head)
    first_loop = (max(edges) + 1) if edges else 1
    for i in range(free_loops):
        edges[first_loop + i] = Edge(first_loop + i, None, None)

    other = {}
    for e in edges.values():
        if not e.free:
            other[e.tail] = e.head
            other[e.head] = e.tail
    faces: List[Face] = []
    dart_face: Dict[End, int] = {}
    if quads:
        links = nx.Graph()
        links.add_nodes_from(range(len(quads)))
        links.add_edges_from((a[0], b[0]) for a, b in orientation.values())
        if not nx.is_connected(links):
            raise NonPlanar("crossings form a split diagram; draw split pieces as free loops or connect them")
        for i, orbit in enumerate(_trace_faces(quads, other)):
            faces.append(Face(i, orbit, tuple(quads[k][p] for k, p in orbit)))
            for dart in orbit:
                dart_face[dart] = i
        n, e_count = len(quads), 2 * len(quads)
        if n - e_count + len(faces) != 2:
            raise NonPlanar(f"V - E + F = {n - e_count + len(faces)}")
    else:
        faces.append(Face(0, (), ()))
    for label in edges:
        if edges[label].free:
            faces.append(Face(len(faces), (), (label,)))

    d = LinkDiagram(tuple(crossings), edges, tuple(faces), dart_face, free_loops, (text or "").strip())
    logger.debug(f"parsed diagram: {d.n} crossings ({d.n_plus}+, {d.n_minus}-), {len(faces)} faces, {free_loops} free loops")
    return d


def unlink_diagram(k: int) -> LinkDiagram:
    return parse_pd("", free_loops=k)


#==================================================================#
#  Basepoints
#==================================================================#
def parse_basepoints(d: LinkDiagram, text: str) -> BasepointSet:
    points = []
    for token in (text or "").split(","):
        token = token.strip()
        if not token:
            continue
        edge, _, slot = token.partition(":")
        try:
            point = Basepoint(int(edge), int(slot) if slot else 0)
        except ValueError:
            raise UsageError(f"bad basepoint {token!r}")
        d.edge(point.edge)
        if point in points:
            raise UsageError(f"basepoint {point} given twice")
        points.append(point)
    return BasepointSet(tuple(points))


def autofill_basepoints(d: LinkDiagram, per_edge: int = 1) -> BasepointSet:
    return BasepointSet(tuple(Basepoint(label, slot) for label in d.edges for slot in range(per_edge)))


#==================================================================#
#  Coloring and parity
#==================================================================#
def default_outer_face(d: LinkDiagram) -> int:
    if d.n == 0:
        return 0
    return d.left_face(min(label for label, e in d.edges.items() if not e.free))


def dual_graph(d: LinkDiagram) -> nx.MultiGraph:
    graph = nx.MultiGraph()
    graph.add_nodes_from(f.index for f in d.faces if f.darts)
    for label, e in d.edges.items():
        if not e.free:
            graph.add_edge(d.left_face(label), d.right_face(label), label=label)
    return graph


def checkerboard(d: LinkDiagram, outer: Optional[int] = None) -> Coloring:
    if outer is None:
        outer = default_outer_face(d)
    loop_faces = [f.index for f in d.faces if not f.darts and f.edges]
    if outer not in range(len(d.faces)) or outer in loop_faces:
        raise NoSuchFace(f"{outer}")
    colors: Dict[int, str] = {}
    if d.n:
        distance = nx.single_source_shortest_path_length(dual_graph(d), outer)
        for face, dist in distance.items():
            colors[face] = WHITE if dist % 2 == 0 else BLACK
        for label in d.edges:
            if not d.edges[label].free and colors[d.left_face(label)] == colors[d.right_face(label)]:
                raise NonPlanar(f"faces on both sides of edge {label} get the same color")
    else:
        colors[outer] = WHITE
    for face in loop_faces:
        colors[face] = BLACK
    return Coloring(colors, outer)


def edge_parity(d: LinkDiagram, coloring: Coloring, label: int) -> int:
    '''0 iff the edge runs along the boundary orientation of its black face.'''
    e = d.edge(label)
    if e.free:
        return 0
    return 0 if coloring.is_black(d.left_face(label)) else 1


def basepoint_parities(d: LinkDiagram, coloring: Coloring, points: BasepointSet) -> Tuple[int, ...]:
    return tuple(edge_parity(d, coloring, p.edge) for p in points)


#==================================================================#
#  Link components
#==================================================================#
def components(d: LinkDiagram) -> List[Tuple[int, ...]]:
    '''Edge labels of each link component, components ordered by least edge.'''
    graph = nx.Graph()
    graph.add_nodes_from(d.edges)
    for c in d.crossings:
        graph.add_edge(c.edges[0], c.edges[2])
        graph.add_edge(c.edges[1], c.edges[3])
    return sorted((tuple(sorted(comp)) for comp in nx.connected_components(graph)), key=min)


def component_of_edge(d: LinkDiagram) -> Dict[int, int]:
    return {label: i for i, comp in enumerate(components(d)) for label in comp}


def is_nondegenerate(d: LinkDiagram, points: BasepointSet) -> bool:
    marked = {component_of_edge(d)[p.edge] for p in points}
    return len(marked) == len(components(d))


def writhe(d: LinkDiagram) -> int:
    return d.n_plus - d.n_minus


def linking_matrix(d: LinkDiagram) -> List[List[int]]:
    which = component_of_edge(d)
    k = len(components(d))
    twice = [[0] * k for _ in range(k)]
    for c in d.crossings:
        a, b = which[c.edges[0]], which[c.edges[1]]
        if a != b:
            twice[a][b] += c.sign
            twice[b][a] += c.sign
    return [[v // 2 for v in row] for row in twice]


def forward_path(d: LinkDiagram, start: int, stop: int) -> List[Tuple[int, int, int]]:
    '''
    Crossings passed walking forward along the link from edge `start` to edge
    `stop`, as (crossing, entering position, leaving position) triples.
    '''
    if component_of_edge(d)[start] != component_of_edge(d)[stop]:
        raise DifferentComponents(f"edges {start} and {stop}")
    path = []
    label = start
    while label != stop:
        k, p = d.edges[label].head
        q = (p + 2) % 4
        path.append((k, p, q))
        label = d.crossings[k].edges[q]
    return path


#==================================================================#
#  Resolutions
#==================================================================#
@dataclass(frozen=True)
class Step:
    '''One edge of a circle together with the crossing passage that ends it.'''
    edge: int
    forward: bool
    crossing: Optional[int] = None
    enter: Optional[int] = None
    leave: Optional[int] = None


@dataclass(frozen=True)
class Circle:
    index: int
    steps: Tuple[Step, ...]
    points: Tuple[int, ...] = ()

    @property
    def edges(self) -> Tuple[int, ...]:
        return tuple(s.edge for s in self.steps)


@dataclass(frozen=True)
class Resolution:
    vertex: Tuple[int, ...]
    circles: Tuple[Circle, ...]
    circle_of_edge: Dict[int, int]
    basepoint_circle: Tuple[int, ...] = ()

    @property
    def l(self) -> int:
        return len(self.circles)

    @property
    def height(self) -> int:
        return sum(self.vertex)

    def circle_point_order(self, circle: int) -> Tuple[int, ...]:
        return self.circles[circle].points

    def is_nondegenerate(self) -> bool:
        return all(c.points for c in self.circles)

    def require_nondegenerate(self):
        for c in self.circles:
            if not c.points:
                raise DegenerateResolution(f"circle {c.index} at vertex {''.join(map(str, self.vertex))}")


def _check_vertex(d: LinkDiagram, v: Sequence[int]) -> Tuple[int, ...]:
    v = tuple(int(x) for x in v)
    if len(v) != d.n:
        raise DimensionMismatch(f"vertex of length {len(v)} for {d.n} crossings")
    if any(x not in (0, 1) for x in v):
        raise DimensionMismatch(f"vertex entries must be 0 or 1, got {v}")
    return v


def resolve(d: LinkDiagram, v: Sequence[int], coloring: Optional[Coloring] = None, points: Optional[BasepointSet] = None) -> Resolution:
    '''
    Complete resolution at a cube vertex. Circles are numbered by their least
    edge label and traversed as boundaries of black regions, starting from
    that edge.
    '''
    v = _check_vertex(d, v)
    coloring = coloring or checkerboard(d)
    points = points or BasepointSet()

    graph = nx.Graph()
    graph.add_nodes_from(d.edges)
    for c in d.crossings:
        smoothing = SMOOTHINGS[v[c.index]]
        for p in (0, 2):
            graph.add_edge(c.edges[p], c.edges[smoothing[p]])
    groups = sorted((sorted(comp) for comp in nx.connected_components(graph)), key=min)

    def black_forward(label):
        return edge_parity(d, coloring, label) == 0

    circles = []
    circle_of_edge = {}
    for index, group in enumerate(groups):
        start = group[0]
        if d.edges[start].free:
            steps = [Step(start, True)]
        else:
            steps = []
            label, forward = start, black_forward(start)
            while True:
                e = d.edges[label]
                k, p = e.head if forward else e.tail
                q = SMOOTHINGS[v[k]][p]
                steps.append(Step(label, forward, k, p, q))
                label = d.crossings[k].edges[q]
                forward = black_forward(label)
                leaving = d.edges[label].tail if forward else d.edges[label].head
                if leaving != (k, q):
                    raise VerificationFailure(f"black boundary orientation breaks at crossing {k + 1}")
                if label == start:
                    break
        order = []
        for s in steps:
            on_edge = points.on_edge(s.edge)
            order += on_edge if s.forward else list(reversed(on_edge))
        circles.append(Circle(index, tuple(steps), tuple(order)))
        for label in group:
            circle_of_edge[label] = index
    placement = tuple(circle_of_edge[p.edge] for p in points)
    return Resolution(v, tuple(circles), circle_of_edge, placement)


@dataclass(frozen=True)
class Saddle:
    kind: str  # "merge" or "split"
    crossing: int
    source_circles: Tuple[int, ...]
    target_circles: Tuple[int, ...]
    sign: int

    @property
    def is_split(self) -> bool:
        return self.kind == "split"


def edge_sign(v: Sequence[int], crossing: int) -> int:
    return sum(v[:crossing]) % 2


def changed_crossing(u: Sequence[int], v: Sequence[int]) -> int:
    diff = [i for i, (a, b) in enumerate(zip(u, v)) if a != b]
    if len(diff) != 1 or u[diff[0]] != 0:
        raise NotAnEdge(f"{''.join(map(str, u))} -> {''.join(map(str, v))}")
    return diff[0]


def classify_edge(d: LinkDiagram, u: Sequence[int], v: Sequence[int], source: Optional[Resolution] = None, target: Optional[Resolution] = None, coloring: Optional[Coloring] = None) -> Saddle:
    u = _check_vertex(d, u)
    v = _check_vertex(d, v)
    c = changed_crossing(u, v)
    coloring = coloring or checkerboard(d)
    source = source or resolve(d, u, coloring)
    target = target or resolve(d, v, coloring)
    labels = d.crossings[c].edges
    before = tuple(sorted({source.circle_of_edge[e] for e in labels}))
    after = tuple(sorted({target.circle_of_edge[e] for e in labels}))
    if len(before) == 2 and len(after) == 1:
        kind = "merge"
    elif len(before) == 1 and len(after) == 2:
        kind = "split"
    else:
        raise VerificationFailure(f"saddle at crossing {c + 1} neither merges nor splits")
    return Saddle(kind, c, before, after, edge_sign(v, c))


def cube_vertices(n: int) -> List[Tuple[int, ...]]:
    '''All vertices of {0,1}^n ordered by height, then lexicographically.'''
    vertices = [tuple((i >> (n - 1 - j)) & 1 for j in range(n)) for i in range(2 ** n)]
    return sorted(vertices, key=lambda v: (sum(v), v))


def cube_edges(n: int) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    out = []
    for u in cube_vertices(n):
        for i in range(n):
            if u[i] == 0:
                out.append((u, u[:i] + (1,) + u[i + 1:]))
    return out
