"""Generators for delta-correlated integer sequences and arrays.

Three families are covered:

* the generalized-Fibonacci construction (`fibonacci_huffman`), which yields
  sequences whose auto-correlation is exactly zero off-peak except for the
  unit-magnitude end values;
* small closed-form families (`h5_family`) and a catalog of fixed reference
  arrays (`catalog`);
* diamond-patterned 5x5 and 7x7 integer arrays found by exhaustive
  Diophantine search (`diamond5_solve`, `diamond7_solve`, `build_diamond`).

All constructions are deterministic and exact; solvers return results in
lexicographic alphabet order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lattice import Tensor, as_tensor, correlate, outer_product
from .metrics import _edge_mask, classify

__all__ = [
    "ConstructError",
    "HuffmanSpec",
    "AlphabetSolution",
    "phi_value",
    "binet_value",
    "fibonacci_huffman",
    "h5_family",
    "catalog",
    "catalog_keys",
    "diamond5_solve",
    "diamond7_solve",
    "diamond7_closed_form",
    "build_diamond",
    "tensor_huffman",
    "build",
]


class ConstructError(ValueError):
    """Domain error for invalid construction parameters."""


# ---------------------------------------------------------------------------
# generalized-Fibonacci sequences


def phi_value(k: int, b: int = 2) -> int:
    """Element k of the generalized Fibonacci sequence for up-scaling b/2.

    Recurrence: phi(k+1) = (b/2)*phi(k) + phi(k-1) with phi(0) = 0,
    phi(1) = 1 (so b=2 gives the Fibonacci numbers, b=4 the Pell numbers).
    Negative indices follow phi(-k) = (-1)**(k+1) * phi(k).
    """
    if b < 2 or b % 2:
        raise ConstructError(f"up-scaling base b must be even and >= 2, got {b}")
    if k < 0:
        return (-1) ** (k + 1) * phi_value(-k, b)
    c = b // 2
    lo, hi = 0, 1  # phi(0), phi(1)
    for _ in range(k):
        lo, hi = hi, c * hi + lo
    return lo


def binet_value(k: int, b: int = 2) -> float:
    """Closed-form float evaluation of phi_value(k, b) via the root pair.

    The recurrence x**2 = (b/2)x + 1 has roots (b +- sqrt(b*b + 16)) / 4;
    phi(k) = (alpha**k - beta**k) / (alpha - beta).  Exposed for growth-rate
    checks; the integer recurrence is the authoritative path.
    """
    root = (b * b + 16) ** 0.5
    alpha, beta = (b + root) / 4.0, (b - root) / 4.0
    return (alpha**k - beta**k) / root * 2.0


def fibonacci_huffman(N: int, b: int = 2) -> Tensor:
    """Length-N sequence with canonical delta auto-correlation.

    The first half is [1, b*phi(1), ..., b*phi(M)] with M = (N-3)/2; the
    second half mirrors it with alternating signs, and the single middle
    element is the exact rational solution of the shift-2 correlation
    constraint (always an integer for even b).  The result's auto-correlation
    is [c,0,...,0,C0,0,...,0,c] with |c| = 1.
    """
    if N < 7 or N % 4 != 3:
        raise ConstructError(f"length must be 7, 11, 15, ... (4n+3), got {N}")
    if b < 2 or b % 2:
        raise ConstructError(f"up-scaling base b must be even and >= 2, got {b}")
    M = (N - 3) // 2
    first = [1] + [b * phi_value(k, b) for k in range(1, M + 1)]
    m = (N + 1) // 2
    h: list = first + [None] + [(-1) ** k * first[m - k - 1] for k in range(1, m)]

    # middle element from C(2) = 0; every other even shift then vanishes by
    # the bilinear index-reduction identity of the phi values.
    const, coeff = Fraction(0), Fraction(0)
    for i in range(N - 2):
        vi, vj = h[i], h[i + 2]
        if vi is None:
            coeff += vj
        elif vj is None:
            coeff += vi
        else:
            const += Fraction(vi * vj)
    x = -const / coeff
    if x.denominator != 1:
        raise ConstructError(f"no integer middle element for N={N}, b={b}")
    h[m - 1] = int(x)
    return Tensor.from_values(h, "int")


def h5_family(n: int, variant: str = "even") -> Tensor:
    """The two one-parameter 5-element families.

    variant="even": [1, 2n, 2n**2, -2n, 1], auto-correlation
    [1,0,0,0,C0,0,0,0,1] with C0 = 4n**4 + 8n**2 + 2 (canonical).
    variant="odd": [1, 2n+1, 2n(n+1), -(2n+1), 1], auto-correlation
    [1,0,-1,0,C0,0,-1,0,1] (quasi).
    """
    if n == 0:
        raise ConstructError("n = 0 degenerates to a padded delta; rejected")
    if variant == "even":
        seq = [1, 2 * n, 2 * n * n, -2 * n, 1]
    elif variant == "odd":
        seq = [1, 2 * n + 1, 2 * n * (n + 1), -(2 * n + 1), 1]
    else:
        raise ConstructError(f"unknown h5 variant {variant!r}")
    return Tensor.from_values(seq, "int")


# ---------------------------------------------------------------------------
# fixed catalog

_CATALOG: dict[str, tuple[str, list]] = {
    "H9": (
        "9-element quasi delta sequence, C0=64, merit factor 1024",
        [1, 3, 4, 2, -2, -2, 4, -3, 1],
    ),
    "H8": (
        "8-element 3-bit quasi delta sequence, C0=49, side-lobe ratio 24.5",
        [1, 3, 4, 0, -3, 3, -2, 1],
    ),
    "H4": (
        "4-element quasi delta sequence, the smallest even-length example",
        [1, 1, 2, -1],
    ),
    "H8x8": (
        "8x8 integer array whose diagonal sum is a delta [1,0,...,50,...,0,1]",
        [
            [1, 3, 4, 0, -3, 3, -2, 1],
            [3, 11, 13, 0, -10, 10, -6, 2],
            [4, 13, 15, 0, -12, 12, -7, 3],
            [0, 0, 0, 0, 0, 0, 0, 0],
            [-3, -10, -12, 0, 9, -9, 6, -2],
            [3, 10, 12, 0, -9, 10, -6, 2],
            [-2, -6, -7, 0, 6, -6, 3, -1],
            [1, 2, 3, 0, -2, 2, -1, 1],
        ],
    ),
}


def catalog(key: str) -> Tensor:
    """Fixed reference array by name, case-insensitive (see catalog_keys())."""
    by_fold = {k.casefold(): v for k, v in _CATALOG.items()}
    entry = by_fold.get(key.casefold())
    if entry is None:
        raise ConstructError(f"unknown catalog key {key!r}; known: {sorted(_CATALOG)}")
    return Tensor.from_values(entry[1], "int")


def catalog_keys() -> tuple[str, ...]:
    return tuple(sorted(_CATALOG))


# ---------------------------------------------------------------------------
# diamond 5x5 / 7x7 templates and Diophantine solvers

_SIGNS5 = (1, 1, 1, -1, 1)
_SIGNS7 = (1, 1, 1, 1, -1, 1, -1)


def _fold_template(letters_to_block, signs: tuple[int, ...], letters) -> np.ndarray:
    n = len(signs)
    block = letters_to_block(letters)
    out = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            out[i, j] = signs[i] * signs[j] * block[min(i, n - 1 - i)][min(j, n - 1 - j)]
    return out


def _block5(v):
    a, b, c, d, e, f = v
    return [[a, b, c], [b, d, e], [c, e, f]]


def _block7(v):
    a, b, c, d, e, f, g, h = v
    return [[a, b, c, d], [b, 2 * c, e, f], [c, e, 2 * (c + f), g], [d, f, g, h]]


def _materialize(template: int, values) -> np.ndarray:
    values = tuple(int(v) for v in values)
    if template == 5:
        if len(values) != 6:
            raise ConstructError("5x5 template takes a 6-letter alphabet")
        return _fold_template(_block5, _SIGNS5, values)
    if template == 7:
        if len(values) != 8:
            raise ConstructError("7x7 template takes an 8-letter alphabet")
        return _fold_template(_block7, _SIGNS7, values)
    raise ConstructError(f"template must be 5 or 7, got {template}")


@dataclass(frozen=True)
class AlphabetSolution:
    """One solved alphabet for a diamond template.

    ``values`` is the full letter tuple (6 letters for 5x5, 8 for 7x7);
    ``c_edge`` the edge-correlation bound the solution satisfies;
    ``classification`` the canonical/quasi verdict of the materialized array.
    """

    template: int
    values: tuple[int, ...]
    c_edge: int
    classification: str

    def build(self) -> Tensor:
        return build_diamond(self.template, self.values)


class _Quadratic:
    """Exact quadratic polynomial in n integer variables.

    Extracted from a black-box integer function by finite differencing at
    0, +-unit and pair probes; evaluation and partial substitution stay in
    exact Python ints.
    """

    def __init__(self, const, lin, sq, cross):
        self.const = const  # int
        self.lin = lin  # list[int]
        self.sq = sq  # list[int]
        self.cross = cross  # dict[(i, j)] -> int, i < j

    @staticmethod
    def probe(fn, nvars: int) -> "list[_Quadratic]":
        """Fit one quadratic per output entry of vector-valued fn(vars)."""
        zero = [0] * nvars

        def at(assign):
            v = zero.copy()
            for i, val in assign.items():
                v[i] = val
            return np.asarray(fn(v), dtype=object).ravel()

        base = at({})
        plus = [at({i: 1}) for i in range(nvars)]
        minus = [at({i: -1}) for i in range(nvars)]
        polys = []
        for pos in range(base.size):
            a0 = int(base[pos])
            lin, sq = [], []
            for i in range(nvars):
                p, m = int(plus[i][pos]), int(minus[i][pos])
                lin.append((p - m) // 2)
                sq.append((p + m - 2 * a0) // 2)
            polys.append(_Quadratic(a0, lin, sq, {}))
        for i, j in itertools.combinations(range(nvars), 2):
            pair = at({i: 1, j: 1})
            for pos, poly in enumerate(polys):
                rest = (
                    poly.const
                    + poly.lin[i]
                    + poly.lin[j]
                    + poly.sq[i]
                    + poly.sq[j]
                )
                c = int(pair[pos]) - rest
                if c:
                    poly.cross[(i, j)] = c
        return polys

    def eval(self, v) -> int:
        tot = self.const
        for i, x in enumerate(v):
            tot += self.lin[i] * x + self.sq[i] * x * x
        for (i, j), c in self.cross.items():
            tot += c * v[i] * v[j]
        return tot

    def substitute(self, known: dict[int, int]) -> "_Quadratic":
        """Fix some variables, returning a quadratic in the remaining ones."""
        const = self.const
        lin = list(self.lin)
        sq = list(self.sq)
        cross = {}
        for i, x in known.items():
            const += lin[i] * x + sq[i] * x * x
            lin[i] = sq[i] = 0
        for (i, j), c in self.cross.items():
            ki, kj = i in known, j in known
            if ki and kj:
                const += c * known[i] * known[j]
            elif ki:
                lin[j] += c * known[i]
            elif kj:
                lin[i] += c * known[j]
            else:
                cross[(i, j)] = c
        return _Quadratic(const, lin, sq, cross)

    def is_constant(self) -> bool:
        return not (any(self.lin) or any(self.sq) or self.cross)

    def linear_in(self, var: int) -> tuple[int, int] | None:
        """(offset, slope) if the poly is a + b*x_var only; else None."""
        if self.sq[var] or any(var in ij for ij in self.cross):
            return None
        if any(self.lin[i] or self.sq[i] for i in range(len(self.lin)) if i != var):
            return None
        if self.cross:
            return None
        return self.const, self.lin[var]


def _window(polys, var: int, bound: int, lo: int, hi: int):
    """Integer range of x_var keeping every |a + b*x| <= bound; None = empty."""
    for poly in polys:
        ab = poly.linear_in(var)
        if ab is None:
            continue
        a, b = ab
        if b == 0:
            if abs(a) > bound:
                return None
            continue
        if b < 0:
            a, b = -a, -b
        lo = max(lo, -((bound + a) // b))  # ceil((-bound - a) / b)
        hi = min(hi, (bound - a) // b)
    return (lo, hi) if lo <= hi else None


def _off_peak_polys(template: int, base: tuple[int, ...], nfree: int):
    """Quadratics for every off-peak auto-correlation entry of the template,
    in the trailing ``nfree`` alphabet letters."""

    def corr_entries(free_vals):
        arr = _materialize(template, base + tuple(free_vals))
        c = correlate(arr, arr)
        flat = c.values.data.astype(object).ravel().tolist()
        centre = np.ravel_multi_index(c.zero_index, c.values.shape)
        del flat[centre]
        return flat

    return _Quadratic.probe(corr_entries, nfree)


def diamond5_solve(
    d_max: int = 400,
    e_max: int = 4000,
    base: tuple[int, int, int, int] = (0, 1, 4, 8),
) -> list[AlphabetSolution]:
    """All positive integer (d, e) completing ``base`` to a quasi 5x5 array.

    The first four letters are fixed (default: the 0,1,4,8 family whose array
    border gives an edge-correlation bound of 18); the last two are scanned
    exhaustively with window pruning, keeping every alphabet whose off-peak
    auto-correlation magnitudes all stay within the bound.
    """
    bound = _edge_bound(5, base, 2)
    polys = _off_peak_polys(5, base, 2)
    out = []
    for d in range(1, d_max + 1):
        fixed = [p.substitute({0: d}) for p in polys]
        win = _window(fixed, 1, bound, 1, e_max)
        if win is None:
            continue
        for e in range(win[0], win[1] + 1):
            if all(abs(p.eval((d, e))) <= bound for p in polys):
                out.append(_solution(5, base + (d, e), bound))
    return out


def diamond7_solve(
    e: int,
    f_range=range(1, 33),
    g_max: int = 1 << 12,
    h_max: int = 1 << 12,
) -> list[AlphabetSolution]:
    """All positive (f, g, h) quasi alphabets [0,0,0,1,e,f,g,h] for the 7x7.

    The corner letters are zero and d = 1, so the inner-diamond edge
    correlation fixes the bound at 2e**2 + 2.  f = 0 is excluded by default:
    it decouples h and yields a degenerate unconstrained family.  For e = 3
    the closed form g = f**2/2 + 1, h = f**3/8 + f (even f) lands inside the
    solution set; the search also returns the neighbouring solutions.
    """
    if e < 1:
        raise ConstructError(f"e must be a positive integer, got {e}")
    base = (0, 0, 0, 1, e)
    bound = 2 * e * e + 2
    polys = _off_peak_polys(7, base, 3)
    out = []
    for f in f_range:
        if f < 1:
            raise ConstructError("f_range must contain positive integers only")
        at_f = [p.substitute({0: f}) for p in polys]
        gwin = _window(at_f, 1, bound, 1, g_max)
        if gwin is None:
            continue
        for g in range(gwin[0], gwin[1] + 1):
            at_fg = [p.substitute({1: g}) for p in at_f]
            hwin = _window(at_fg, 2, bound, 1, h_max)
            if hwin is None:
                continue
            for h in range(hwin[0], hwin[1] + 1):
                if all(abs(p.eval((f, g, h))) <= bound for p in polys):
                    out.append(_solution(7, base + (f, g, h), bound))
    return out


def diamond7_closed_form(f: int) -> tuple[int, int]:
    """(g, h) = (f**2/2 + 1, f**3/8 + f) for even f in the e=3 family."""
    if f < 2 or f % 2:
        raise ConstructError(f"closed form needs positive even f, got {f}")
    return f * f // 2 + 1, f**3 // 8 + f


def _edge_bound(template: int, base: tuple[int, ...], nfree: int) -> int:
    """Edge-correlation bound of a template family.

    The quasi criterion compares off-peak correlations against the value at
    the maximal-overlap shifts (the outer ring plus the diagonal tips).  For
    a solver, only the part of that edge set fixed by the template -- the
    entries that do not involve the scanned letters -- can serve as the
    bound; the rest are constrained by it like any other off-peak entry.
    """

    def edge_entries(free_vals):
        arr = _materialize(template, base + tuple(free_vals))
        t = Tensor.from_values(arr, "int")
        c = correlate(t, t)
        mask = _edge_mask(c.values.shape, c.zero_index)
        return c.values.data[mask].astype(object).ravel().tolist()

    consts = [
        abs(p.const)
        for p in _Quadratic.probe(edge_entries, nfree)
        if p.is_constant()
    ]
    if not consts:
        raise ConstructError("template has no fixed edge-correlation entries")
    return max(consts)


def _solution(template: int, values: tuple[int, ...], bound: int) -> AlphabetSolution:
    rep = classify(Tensor.from_values(_materialize(template, values), "int"))
    return AlphabetSolution(template, values, bound, rep.classification)


def _structural_bound(template: int, values: tuple[int, ...]) -> int:
    """Template-level edge-correlation bound from the letters alone: the
    array-border end-correlation for the 5x5, the inner-diamond tip
    correlation 2e**2 + 2d**2 for the 7x7."""
    if template == 7:
        d, e = values[3], values[4]
        return 2 * e * e + 2 * d * d
    a, b, c = values[0], values[1], values[2]
    return 2 * a * a + 2 * b * b + c * c


def build_diamond(template: int, alphabet) -> Tensor:
    """Materialize a 5x5 or 7x7 diamond array and recheck the quasi property.

    ``alphabet`` is an AlphabetSolution or the raw letter tuple.  The recheck
    requires every off-peak correlation entry away from the edge set (outer
    ring and diagonal tips) to stay within the larger of the measured edge
    value and the template's structural edge bound; alphabets violating that
    raise.  (The published example arrays need the structural bound: halo
    letters can partially cancel the tip correlations of the 7x7 diamond,
    deflating the measured edge value below genuinely small side lobes.)
    """
    if isinstance(alphabet, AlphabetSolution):
        if alphabet.template != template:
            raise ConstructError(
                f"solution is for the {alphabet.template}x{alphabet.template} template"
            )
        alphabet = alphabet.values
    values = tuple(int(v) for v in alphabet)
    arr = Tensor.from_values(_materialize(template, values), "int")
    rep = classify(arr)
    bound = max(int(rep.C_edge), _structural_bound(template, values))
    if rep.OP > bound:
        raise ConstructError(
            f"alphabet {values} violates the quasi constraint: off-peak "
            f"correlation {rep.OP} exceeds the edge bound {bound}"
        )
    return arr


# ---------------------------------------------------------------------------
# tensor products and the declarative spec


def tensor_huffman(specs) -> Tensor:
    """Outer product of 1D factors given as HuffmanSpec, Tensor or sequence."""
    factors = []
    for s in specs:
        t = build(s) if isinstance(s, HuffmanSpec) else as_tensor(s)
        if t.ndim != 1:
            raise ConstructError("tensor_huffman factors must be 1D")
        factors.append(t)
    return outer_product(factors)


_FAMILIES = (
    "fibonacci_binet",
    "h5_family",
    "catalog",
    "outer_product",
    "diamond5",
    "diamond7",
    "even_length",
)


@dataclass(frozen=True)
class HuffmanSpec:
    """Declarative description of a constructible array.

    Serializes to a flat ``key=value`` line, e.g.::

        family=fibonacci_binet N=15 b=2
        family=h5_family n=1 variant=even
        family=catalog key=H9
        family=diamond5 alphabet=0,1,4,8,28,99
        family=outer_product factors=catalog:H9,fibonacci_binet:15:2

    Rebuilding from a spec is deterministic and bit-exact.
    """

    family: str
    length: int | None = None
    b: int = 2
    n: int | None = None
    variant: str = "even"
    key: str | None = None
    alphabet: tuple[int, ...] | None = None
    factors: tuple["HuffmanSpec", ...] | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ConstructError(f"unknown family {self.family!r}")
        if self.family == "fibonacci_binet":
            if self.length is None or self.length % 4 != 3:
                raise ConstructError("fibonacci_binet needs length N = 4n+3")
            if self.b < 2 or self.b % 2:
                raise ConstructError("fibonacci_binet needs even b >= 2")

    def to_text(self) -> str:
        parts = [f"family={self.family}"]
        if self.family == "fibonacci_binet":
            parts += [f"N={self.length}", f"b={self.b}"]
        elif self.family == "h5_family":
            parts += [f"n={self.n}", f"variant={self.variant}"]
        elif self.family in ("catalog", "even_length"):
            parts.append(f"key={self.key}")
        elif self.family in ("diamond5", "diamond7"):
            parts.append("alphabet=" + ",".join(str(v) for v in self.alphabet))
        elif self.family == "outer_product":
            parts.append("factors=" + ",".join(f._compact() for f in self.factors))
        return " ".join(parts)

    def _compact(self) -> str:
        if self.family == "fibonacci_binet":
            return f"fibonacci_binet:{self.length}:{self.b}"
        if self.family == "h5_family":
            return f"h5_family:{self.n}:{self.variant}"
        if self.family in ("catalog", "even_length"):
            return f"catalog:{self.key}"
        raise ConstructError(f"{self.family} cannot be an outer-product factor")

    @classmethod
    def _from_compact(cls, token: str) -> "HuffmanSpec":
        bits = token.split(":")
        if bits[0] == "fibonacci_binet" and len(bits) == 3:
            return cls("fibonacci_binet", length=int(bits[1]), b=int(bits[2]))
        if bits[0] == "h5_family" and len(bits) in (2, 3):
            variant = bits[2] if len(bits) == 3 else "even"
            return cls("h5_family", n=int(bits[1]), variant=variant)
        if bits[0] == "catalog" and len(bits) == 2:
            return cls("catalog", key=bits[1])
        raise ConstructError(f"bad factor token {token!r}")

    @classmethod
    def from_text(cls, text: str) -> "HuffmanSpec":
        kv = {}
        for tok in text.split():
            if "=" not in tok:
                raise ConstructError(f"bad spec token {tok!r}")
            k, v = tok.split("=", 1)
            kv[k] = v
        family = kv.pop("family", None)
        if family is None:
            raise ConstructError("spec line is missing family=")
        if family == "fibonacci_binet":
            return cls(family, length=int(kv["N"]), b=int(kv.get("b", 2)))
        if family == "h5_family":
            return cls(family, n=int(kv["n"]), variant=kv.get("variant", "even"))
        if family in ("catalog", "even_length"):
            return cls(family, key=kv["key"])
        if family in ("diamond5", "diamond7"):
            alphabet = tuple(int(v) for v in kv["alphabet"].split(","))
            return cls(family, alphabet=alphabet)
        if family == "outer_product":
            factors = tuple(
                cls._from_compact(tok) for tok in kv["factors"].split(",")
            )
            return cls(family, factors=factors)
        raise ConstructError(f"unknown family {family!r}")


def build(spec: HuffmanSpec) -> Tensor:
    """Materialize a HuffmanSpec."""
    if spec.family == "fibonacci_binet":
        return fibonacci_huffman(spec.length, spec.b)
    if spec.family == "h5_family":
        return h5_family(spec.n, spec.variant)
    if spec.family in ("catalog", "even_length"):
        return catalog(spec.key)
    if spec.family == "diamond5":
        return build_diamond(5, spec.alphabet)
    if spec.family == "diamond7":
        return build_diamond(7, spec.alphabet)
    if spec.family == "outer_product":
        return tensor_huffman(spec.factors)
    raise ConstructError(f"unknown family {spec.family!r}")
