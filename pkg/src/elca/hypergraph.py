"""Hypergraphs as binary incidence matrices, plus text readers and writers.

Three formats are understood:

* hyperedge list: one hyperedge per line, whitespace-separated vertex labels;
  an empty line is an empty hyperedge.
* bipartite: one ``vertex_label edge_label`` pair per line; hyperedges are the
  groups of lines sharing an edge label.
* dense CSV: rows of 0/1 cells, optionally with a header row of edge labels
  and a leading column of vertex labels.

Writers for the first two formats emit ``# vertices:`` (and for bipartite
``# edges:``) directive lines so that isolated vertices and empty hyperedges
survive a round trip.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

VERTEX_DIRECTIVE = "# vertices:"
EDGE_DIRECTIVE = "# edges:"


class HypergraphFormatError(ValueError):
    """Raised when a hypergraph file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class EmptyHypergraphError(HypergraphFormatError):
    """Raised when the input contains no hyperedges at all."""


@dataclass(eq=False)
class IncidenceMatrix:
    """N x M binary matrix with ``cells[i, j] == 1`` iff vertex i is in hyperedge j.

    Vertex labels must be distinct; edge labels may repeat because the
    hyperedge set is a multiset.
    """

    cells: np.ndarray
    vertex_labels: list[str] = field(default_factory=list)
    edge_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim != 2:
            raise ValueError(f"incidence matrix must be 2-D, got shape {cells.shape}")
        if cells.size and not np.isin(cells, (0, 1)).all():
            bad = np.argwhere(~np.isin(cells, (0, 1)))[0]
            raise ValueError(f"cell {tuple(int(v) for v in bad)} not in {{0,1}}")
        n, m = cells.shape
        if n < 1:
            raise ValueError("a hypergraph needs at least one vertex")
        self.cells = cells.astype(np.uint8)
        self.cells.setflags(write=False)
        if not self.vertex_labels:
            self.vertex_labels = [f"v{i + 1}" for i in range(n)]
        if not self.edge_labels:
            self.edge_labels = [f"e{j + 1}" for j in range(m)]
        self.vertex_labels = [str(v) for v in self.vertex_labels]
        self.edge_labels = [str(e) for e in self.edge_labels]
        if len(self.vertex_labels) != n:
            raise ValueError(f"expected {n} vertex labels, got {len(self.vertex_labels)}")
        if len(self.edge_labels) != m:
            raise ValueError(f"expected {m} edge labels, got {len(self.edge_labels)}")
        if len(set(self.vertex_labels)) != n:
            dup = [v for v, c in Counter(self.vertex_labels).items() if c > 1]
            raise ValueError(f"duplicate vertex labels: {dup}")

    @property
    def n_vertices(self) -> int:
        return self.cells.shape[0]

    @property
    def n_edges(self) -> int:
        return self.cells.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def __eq__(self, other):
        if not isinstance(other, IncidenceMatrix):
            return NotImplemented
        return (
            self.cells.shape == other.cells.shape
            and bool(np.array_equal(self.cells, other.cells))
            and self.vertex_labels == other.vertex_labels
            and self.edge_labels == other.edge_labels
        )

    def __repr__(self):
        return f"IncidenceMatrix(n_vertices={self.n_vertices}, n_edges={self.n_edges})"

    def select_edges(self, mask_or_index) -> "IncidenceMatrix":
        """Sub-hypergraph on the same vertex set keeping the chosen columns."""
        idx = np.arange(self.n_edges)[mask_or_index]
        return IncidenceMatrix(
            self.cells[:, idx],
            list(self.vertex_labels),
            [self.edge_labels[j] for j in idx],
        )

    def permute_vertices(self, order: Sequence[int]) -> "IncidenceMatrix":
        order = list(order)
        return IncidenceMatrix(
            self.cells[order, :],
            [self.vertex_labels[i] for i in order],
            list(self.edge_labels),
        )

    @classmethod
    def from_hyperedges(
        cls,
        hyperedges: Iterable[Iterable[str]],
        vertex_labels: Sequence[str] | None = None,
        edge_labels: Sequence[str] | None = None,
    ) -> "IncidenceMatrix":
        """Build from an iterable of vertex-label collections.

        Unless ``vertex_labels`` fixes the universe, vertices are ordered by
        first appearance.
        """
        edges = [list(e) for e in hyperedges]
        index: dict[str, int] = {}
        if vertex_labels is not None:
            for v in vertex_labels:
                if v in index:
                    raise ValueError(f"duplicate vertex label {v!r}")
                index[v] = len(index)
        for e in edges:
            for v in e:
                if v not in index:
                    index[v] = len(index)
        if not index:
            raise ValueError("a hypergraph needs at least one vertex")
        cells = np.zeros((len(index), len(edges)), dtype=np.uint8)
        for j, e in enumerate(edges):
            for v in e:
                cells[index[v], j] = 1
        return cls(cells, list(index), list(edge_labels) if edge_labels is not None else [])


@dataclass(frozen=True)
class SizeHistogram:
    """Occurrence counts of hyperedge sizes."""

    counts: dict[int, int]
    total: int

    def as_array(self, n_max: int | None = None) -> np.ndarray:
        top = max(self.counts, default=0) if n_max is None else n_max
        out = np.zeros(top + 1, dtype=np.int64)
        for s, c in self.counts.items():
            out[s] = c
        return out

    def frequencies(self, n_max: int | None = None) -> np.ndarray:
        arr = self.as_array(n_max).astype(float)
        return arr / self.total if self.total else arr


def edge_sizes(m: IncidenceMatrix) -> np.ndarray:
    """Number of vertices in each hyperedge (column sums)."""
    return m.cells.sum(axis=0, dtype=np.int64)


def size_histogram(m: IncidenceMatrix) -> SizeHistogram:
    counts = Counter(int(s) for s in edge_sizes(m))
    return SizeHistogram(dict(sorted(counts.items())), m.n_edges)


def _read(text: str | TextIO) -> str:
    if isinstance(text, str):
        return text
    try:
        data = text.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise HypergraphFormatError(f"unreadable input: {exc}") from exc
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise HypergraphFormatError(f"unreadable input: {exc}") from exc
    return data


def _directive(line: str, prefix: str) -> list[str] | None:
    if line.startswith(prefix):
        return line[len(prefix):].split()
    return None


def parse_hyperedge_list(text: str | TextIO) -> IncidenceMatrix:
    """Parse one-hyperedge-per-line text into an incidence matrix.

    A leading ``# vertices: a b c`` line, if present, fixes the vertex
    universe and its order (isolated vertices included).

    >>> parse_hyperedge_list("a b\\nb c\\n").cells.tolist()
    [[1, 0], [1, 1], [0, 1]]
    """
    lines = _read(text).splitlines()
    vertices = None
    if lines:
        vertices = _directive(lines[0], VERTEX_DIRECTIVE)
        if vertices is not None:
            lines = lines[1:]
    if not lines:
        raise EmptyHypergraphError("no hyperedges in input")
    edges = [line.split() for line in lines]
    try:
        return IncidenceMatrix.from_hyperedges(edges, vertex_labels=vertices)
    except ValueError as exc:
        raise HypergraphFormatError(str(exc)) from exc


def write_hyperedge_list(m: IncidenceMatrix) -> str:
    buf = [VERTEX_DIRECTIVE + " " + " ".join(m.vertex_labels)]
    labels = np.asarray(m.vertex_labels, dtype=object)
    for j in range(m.n_edges):
        buf.append(" ".join(labels[m.cells[:, j] == 1]))
    return "\n".join(buf) + "\n"


def parse_bipartite_edges(text: str | TextIO) -> IncidenceMatrix:
    """Parse ``vertex_label edge_label`` incidence pairs.

    Columns follow the first appearance of each edge label. Optional
    ``# vertices:`` / ``# edges:`` directive lines fix the universes.
    """
    vertices: list[str] | None = None
    edge_order: list[str] | None = None
    pairs: list[tuple[str, str]] = []
    for lineno, line in enumerate(_read(text).splitlines(), start=1):
        d = _directive(line, VERTEX_DIRECTIVE)
        if d is not None:
            vertices = d
            continue
        d = _directive(line, EDGE_DIRECTIVE)
        if d is not None:
            edge_order = d
            continue
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise HypergraphFormatError(
                f"expected 2 tokens (vertex edge), got {len(tokens)}", line=lineno
            )
        pairs.append((tokens[0], tokens[1]))

    groups: dict[str, list[str]] = {}
    for e in edge_order or []:
        if e in groups:
            raise HypergraphFormatError(f"duplicate edge label {e!r} in directive")
        groups[e] = []
    for v, e in pairs:
        groups.setdefault(e, []).append(v)
    if not groups:
        raise EmptyHypergraphError("no hyperedges in input")
    try:
        return IncidenceMatrix.from_hyperedges(
            groups.values(), vertex_labels=vertices, edge_labels=list(groups)
        )
    except ValueError as exc:
        raise HypergraphFormatError(str(exc)) from exc


def write_bipartite_edges(m: IncidenceMatrix) -> str:
    """Write incidence pairs; edge labels must be distinct to be recoverable."""
    if len(set(m.edge_labels)) != m.n_edges:
        raise ValueError("bipartite format needs distinct edge labels")
    buf = [
        VERTEX_DIRECTIVE + " " + " ".join(m.vertex_labels),
        EDGE_DIRECTIVE + " " + " ".join(m.edge_labels),
    ]
    for j, e in enumerate(m.edge_labels):
        for i in np.flatnonzero(m.cells[:, j]):
            buf.append(f"{m.vertex_labels[i]} {e}")
    return "\n".join(buf) + "\n"


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_dense_csv(text: str | TextIO) -> IncidenceMatrix:
    """Parse a dense 0/1 CSV matrix.

    If the top-left cell is non-numeric the first row holds edge labels and
    the first column holds vertex labels.
    """
    rows = [r for r in csv.reader(io.StringIO(_read(text)))]
    while rows and not rows[-1]:
        rows.pop()
    if not rows:
        raise EmptyHypergraphError("no rows in input")
    labelled = not _is_number(rows[0][0].strip()) if rows[0] else False
    edge_labels: list[str] = []
    vertex_labels: list[str] = []
    start = 0
    if labelled:
        edge_labels = rows[0][1:]
        start = 1
    width = len(edge_labels) if labelled else len(rows[start]) if start < len(rows) else 0
    data = []
    for r, row in enumerate(rows[start:], start=start + 1):
        if labelled:
            if not row:
                raise HypergraphFormatError("missing vertex label", line=r)
            vertex_labels.append(row[0])
            row = row[1:]
        if len(row) != width:
            raise HypergraphFormatError(
                f"ragged row: expected {width} cells, got {len(row)}", line=r
            )
        values = []
        for c, cell in enumerate(row, start=2 if labelled else 1):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise HypergraphFormatError("cell not in {0,1}", line=r, column=c)
            values.append(int(cell))
        data.append(values)
    if not data:
        raise HypergraphFormatError("no vertex rows in input")
    cells = np.array(data, dtype=np.uint8).reshape(len(data), width)
    try:
        return IncidenceMatrix(cells, vertex_labels, edge_labels if labelled else [])
    except ValueError as exc:
        raise HypergraphFormatError(str(exc)) from exc


def write_dense_csv(m: IncidenceMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["vertex", *m.edge_labels])
    for label, row in zip(m.vertex_labels, m.cells):
        w.writerow([label, *(int(v) for v in row)])
    return buf.getvalue()


READERS = {
    "edges": parse_hyperedge_list,
    "bipartite": parse_bipartite_edges,
    "csv": parse_dense_csv,
}
WRITERS = {
    "edges": write_hyperedge_list,
    "bipartite": write_bipartite_edges,
    "csv": write_dense_csv,
}


def read_hypergraph(path, fmt: str = "edges") -> IncidenceMatrix:
    """Read a hypergraph file in one of ``READERS``' formats."""
    if fmt not in READERS:
        raise ValueError(f"unknown format {fmt!r}; choose from {sorted(READERS)}")
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise HypergraphFormatError(f"unreadable input {path}: {exc}") from exc
    return READERS[fmt](text)


def write_hypergraph(m: IncidenceMatrix, path, fmt: str = "edges") -> None:
    if fmt not in WRITERS:
        raise ValueError(f"unknown format {fmt!r}; choose from {sorted(WRITERS)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(WRITERS[fmt](m))
