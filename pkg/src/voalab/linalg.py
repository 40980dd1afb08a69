"""Sparse exact linear algebra over the scalar field.

Vectors are plain dicts ``label -> scalar`` with no stored zeros.  Row
reduction always pivots on the smallest column index in a caller-supplied
column order, so bases and normal forms are reproducible.
"""

from __future__ import annotations

from gmpy2 import mpq


def vadd(u, v, c=1):
    """u + c v, returning a new dict."""
    out = dict(u)
    for k, x in v.items():
        y = out.get(k, 0) + c * x
        if y:
            out[k] = y
        else:
            out.pop(k, None)
    return out


def vaxpy(acc, v, c=1):
    """In place: acc += c v."""
    if not c:
        return acc
    for k, x in v.items():
        y = acc.get(k, 0) + c * x
        if y:
            acc[k] = y
        else:
            del acc[k]
    return acc


def vscale(v, c):
    if not c:
        return {}
    return {k: x * c for k, x in v.items()}


def vclean(v):
    return {k: x for k, x in v.items() if x}


class Echelon:
    """Incrementally maintained reduced row-echelon form.

    ``order`` fixes the column order; labels missing from it are rejected.
    """

    def __init__(self, order):
        self.order = list(order)
        self.index = {lab: i for i, lab in enumerate(self.order)}
        if len(self.index) != len(self.order):
            raise ValueError("duplicate column labels")
        self.rows = {}  # pivot label -> row with pivot entry 1

    def _lead(self, row):
        idx = self.index
        try:
            return min(row, key=idx.__getitem__)
        except KeyError as exc:
            raise KeyError(f"label {exc.args[0]!r} is not a column") from None

    def reduce(self, v):
        """Normal form of v modulo the row space."""
        out = dict(v)
        rows = self.rows
        for p in [k for k in out if k in rows]:
            c = out.get(p)
            if c:
                vaxpy(out, rows[p], -c)
        return out

    def add(self, v):
        """Insert a row; returns True when the rank grew."""
        r = self.reduce(v)
        if not r:
            return False
        p = self._lead(r)
        inv = mpq(1) / r[p]
        r = {k: x * inv for k, x in r.items()}
        r[p] = 1
        for q, row in self.rows.items():
            c = row.get(p)
            if c:
                vaxpy(row, r, -c)
        self.rows[p] = r
        return True

    @property
    def rank(self):
        return len(self.rows)

    def pivots(self):
        return sorted(self.rows, key=self.index.__getitem__)

    def free(self):
        return [lab for lab in self.order if lab not in self.rows]

    def basis_rows(self):
        return [self.rows[p] for p in self.pivots()]


class SparseMatrix:
    """Rows indexed by arbitrary labels, columns by an ordered label list."""

    def __init__(self, rows, cols):
        self.cols = list(cols)
        self.rows = [vclean(r) for r in rows]

    @classmethod
    def from_dense(cls, data, cols=None):
        ncols = len(data[0]) if data else 0
        cols = list(range(ncols)) if cols is None else list(cols)
        rows = [{cols[j]: x for j, x in enumerate(r) if x} for r in data]
        return cls(rows, cols)

    def rref(self):
        e = Echelon(self.cols)
        for r in self.rows:
            e.add(r)
        return e

    def rank(self):
        return self.rref().rank

    def apply(self, v):
        """Matrix times column vector given as a dict over ``cols``."""
        out = []
        for r in self.rows:
            s = 0
            for k, x in r.items():
                y = v.get(k)
                if y:
                    s = s + x * y
            out.append(s)
        return out


def kernel_basis(m):
    """Exact basis of the null space, one vector per free column."""
    e = m.rref()
    basis = []
    for f in e.free():
        vec = {f: 1}
        for p, row in e.rows.items():
            c = row.get(f)
            if c:
                vec[p] = -c
        basis.append(vec)
    return basis


class Quotient:
    """Ambient span of ``labels`` modulo a subspace, in echelon form."""

    def __init__(self, labels, relations=()):
        self.echelon = Echelon(labels)
        for r in relations:
            self.echelon.add(r)

    @property
    def labels(self):
        return self.echelon.order

    @property
    def representatives(self):
        return self.echelon.free()

    @property
    def dim(self):
        return len(self.labels) - self.echelon.rank

    def add_relation(self, v):
        return self.echelon.add(v)

    def project(self, v):
        """Coordinates of the class of v in the representative basis."""
        return self.echelon.reduce(v)

    def is_zero(self, v):
        return not self.echelon.reduce(v)

    def matrix(self):
        """Projection of every ambient label, as a tuple of sorted items."""
        idx = self.echelon.index
        out = []
        for lab in self.labels:
            img = self.echelon.reduce({lab: 1})
            out.append((lab, tuple(sorted(img.items(), key=lambda t: idx[t[0]]))))
        return tuple(out)

    def __eq__(self, other):
        if not isinstance(other, Quotient):
            return NotImplemented
        return self.labels == other.labels and self.matrix() == other.matrix()


def quotient_data(labels, relations):
    """(representative labels, projection) for span(labels)/span(relations)."""
    q = Quotient(labels, relations)
    return q.representatives, q.project


def solve_linear(rows, cols, rhs):
    """Solve sum_c row[c] x_c = rhs[i] for every row.

    Returns ``(solution, rank)`` with free variables set to zero, or
    ``(None, rank)`` when the system is inconsistent.
    """
    marker = ("__rhs__",)
    e = Echelon(list(cols) + [marker])
    for r, b in zip(rows, rhs):
        row = dict(r)
        if b:
            row[marker] = -b
        e.add(row)
    if marker in e.rows:
        return None, e.rank - 1
    sol = {}
    for p, row in e.rows.items():
        c = row.get(marker)
        if c:
            sol[p] = -c
    return sol, e.rank
