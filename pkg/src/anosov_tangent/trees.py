"""Ordered trees, labeled and derivative trees, product trees, cuts and breakings.

A tree shape is a nested tuple: ``()`` is a single node and ``(a, b)`` is a
node whose ordered children are the shapes ``a`` and ``b``. Nodes are
addressed by their root-to-node path of child indices; per-node data
(signs, integer labels) is stored in preorder.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Literal, Sequence

from .errors import InvalidCut, TooLarge

Shape = tuple
Path = tuple[int, ...]
RestrictMode = Literal["all-minus", "stem-minus-only"]
RESTRICT_MODES: tuple[str, ...] = ("all-minus", "stem-minus-only")
MAX_NODES = 10


def sign_str(s: int) -> str:
    return "+" if s > 0 else "-"


def _check_k(k: int) -> None:
    if k < 1:
        raise ValueError("k must be positive")
    if k > MAX_NODES:
        raise TooLarge(f"k = {k} > {MAX_NODES}")


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


# ---------------------------------------------------------------- shapes

def size(shape: Shape) -> int:
    return 1 + sum(size(c) for c in shape)


@lru_cache(maxsize=None)
def node_paths(shape: Shape) -> tuple[Path, ...]:
    out: list[Path] = [()]
    for i, child in enumerate(shape):
        out.extend((i,) + p for p in node_paths(child))
    return tuple(out)


@lru_cache(maxsize=None)
def path_index(shape: Shape) -> dict[Path, int]:
    return {p: i for i, p in enumerate(node_paths(shape))}


def subshape(shape: Shape, path: Path) -> Shape:
    for i in path:
        shape = shape[i]
    return shape


def child_counts(shape: Shape) -> tuple[int, ...]:
    return tuple(len(subshape(shape, p)) for p in node_paths(shape))


@lru_cache(maxsize=None)
def _forests(n: int) -> tuple[tuple[Shape, ...], ...]:
    """All ordered sequences of shapes with ``n`` nodes in total."""
    if n == 0:
        return ((),)
    out = []
    for first in range(1, n + 1):
        for head in _shapes(first):
            for rest in _forests(n - first):
                out.append((head,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _shapes(k: int) -> tuple[Shape, ...]:
    return tuple(sorted(_forests(k - 1), key=child_counts))


def enumerate_shapes(k: int) -> list[Shape]:
    """All ordered tree shapes with ``k`` nodes, sorted by preorder child counts."""
    _check_k(k)
    return list(_shapes(k))


# ---------------------------------------------------------------- labeled trees

@dataclass(frozen=True)
class LabeledTree:
    shape: Shape
    signs: tuple[int, ...]
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        n = len(node_paths(self.shape))
        if len(self.signs) != n or (self.labels is not None and len(self.labels) != n):
            raise ValueError("per-node data does not match the shape")
        if self.labels is not None:
            for s, p in zip(self.signs, self.labels):
                if (s > 0 and p < 0) or (s < 0 and p > -1):
                    raise ValueError(f"label {p} not allowed for sign {sign_str(s)}")

    @property
    def paths(self) -> tuple[Path, ...]:
        return node_paths(self.shape)

    @property
    def size(self) -> int:
        return len(self.signs)

    def index(self, v: Path) -> int:
        return path_index(self.shape)[v]

    def sign(self, v: Path) -> int:
        return self.signs[self.index(v)]

    def label(self, v: Path) -> int:
        assert self.labels is not None
        return self.labels[self.index(v)]

    def n_children(self, v: Path) -> int:
        return len(subshape(self.shape, v))

    def child_signs(self, v: Path) -> list[int]:
        return [self.sign(v + (j,)) for j in range(self.n_children(v))]

    def q(self, v: Path) -> int:
        """Sum of the integer labels on ``v`` and all its ancestors."""
        return sum(self.label(v[:i]) for i in range(len(v) + 1))


@dataclass(frozen=True)
class HalfLabeledKey:
    shape: Shape
    signs: tuple[int, ...]
    deriv: Path

    @property
    def top_sign(self) -> int:
        return self.signs[0]

    @property
    def size(self) -> int:
        return len(self.signs)

    def tree(self) -> LabeledTree:
        return LabeledTree(self.shape, self.signs)

    def describe(self) -> str:
        return f"{self.shape}|{''.join(sign_str(s) for s in self.signs)}|d{list(self.deriv)}"


@dataclass(frozen=True)
class DerivativeTree:
    tree: LabeledTree
    deriv: Path

    def __post_init__(self):
        if self.deriv not in path_index(self.tree.shape):
            raise ValueError(f"derivative node {self.deriv} not in tree")

    def key(self) -> HalfLabeledKey:
        return HalfLabeledKey(self.tree.shape, self.tree.signs, self.deriv)

    @property
    def size(self) -> int:
        return self.tree.size


@dataclass(frozen=True)
class ProductTree:
    factors: tuple[DerivativeTree, ...]

    @property
    def s(self) -> int:
        return len(self.factors) - 1

    @property
    def n(self) -> int:
        return sum(f.size for f in self.factors)

    def in_p_plus(self) -> bool:
        return all(f.tree.signs[0] == (1 if i == 0 else -1) for i, f in enumerate(self.factors))


@dataclass(frozen=True)
class Cut:
    nodes: tuple[Path, ...]
    string_rep: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.nodes)


# ---------------------------------------------------------------- nested form
# node = (sign, label, is_deriv, children)

def _to_nested(tree: LabeledTree, deriv: Path | None, v: Path = ()):
    i = tree.index(v)
    label = None if tree.labels is None else tree.labels[i]
    kids = tuple(_to_nested(tree, deriv, v + (j,)) for j in range(tree.n_children(v)))
    return (tree.signs[i], label, v == deriv, kids)


def _from_nested(node) -> DerivativeTree:
    signs, labels = [], []
    deriv: list[Path] = []

    def walk(nd, path):
        sign, label, is_d, kids = nd
        signs.append(sign)
        labels.append(label)
        if is_d:
            deriv.append(path)
        return tuple(walk(c, path + (j,)) for j, c in enumerate(kids))

    shape = walk(node, ())
    if len(deriv) != 1:
        raise ValueError("nested tree must carry exactly one derivative mark")
    lab = None if labels[0] is None else tuple(labels)
    return DerivativeTree(LabeledTree(shape, tuple(signs), lab), deriv[0])


def _get(node, path: Path):
    for i in path:
        node = node[3][i]
    return node


def _detach(node, path: Path):
    """Remove the subtree at ``path`` and mark its parent as derivative node."""
    sign, label, _, kids = node
    i = path[0]
    if len(path) == 1:
        return (sign, label, True, kids[:i] + kids[i + 1:])
    return (sign, label, False, kids[:i] + (_detach(kids[i], path[1:]),) + kids[i + 1:])


def _attach_at_deriv(node, sub):
    """Append ``sub`` as last child of the derivative node and clear its mark."""
    sign, label, is_d, kids = node
    if is_d:
        return (sign, label, False, kids + (sub,))
    return (sign, label, False, tuple(_attach_at_deriv(c, sub) for c in kids))


def _canonical(node):
    """Representative of the orbit under permutation of children."""
    sign, label, is_d, kids = node
    ck = sorted(_canonical(c) for c in kids)
    return (sign, -10**9 if label is None else label, is_d, tuple(ck))


def perm_canonical(t: DerivativeTree):
    return _canonical(_to_nested(t.tree, t.deriv))


# ---------------------------------------------------------------- operations

def enumerate_sign_derivative(k: int, alpha_top: int) -> list[HalfLabeledKey]:
    _check_k(k)
    out = []
    for shape in _shapes(k):
        paths = node_paths(shape)
        for rest in itertools.product((1, -1), repeat=k - 1):
            signs = (alpha_top,) + rest
            for d in paths:
                out.append(HalfLabeledKey(shape, signs, d))
    return out


def enumerate_signed_trees(k: int, alpha_top: int) -> Iterator[LabeledTree]:
    _check_k(k)
    for shape in _shapes(k):
        for rest in itertools.product((1, -1), repeat=k - 1):
            yield LabeledTree(shape, (alpha_top,) + rest)


def main_stem(t: DerivativeTree | HalfLabeledKey) -> list[Path]:
    d = t.deriv
    return [d[:i] for i in range(len(d) + 1)]


def _signs_of(t: DerivativeTree | HalfLabeledKey) -> LabeledTree:
    return t.tree if isinstance(t, DerivativeTree) else t.tree()


def cuts_of(t: DerivativeTree) -> list[Cut]:
    tree = _signs_of(t)
    eligible = [v for v in main_stem(t)[1:] if tree.sign(v) < 0]
    cuts = []
    for bits in itertools.product((0, 1), repeat=len(eligible)):
        cuts.append(Cut(tuple(v for v, b in zip(eligible, bits) if b), bits))
    return cuts


def break_tree(t: DerivativeTree, c: Cut) -> ProductTree:
    """Split ``t`` at the cut nodes; each scar becomes a derivative mark."""
    if c.nodes not in {cc.nodes for cc in cuts_of(t)}:
        raise InvalidCut(f"{c.nodes} is not a cut of this tree")
    root = _to_nested(t.tree, t.deriv)
    starts = [()] + list(c.nodes)
    factors = []
    for i, w in enumerate(starts):
        sub = _get(root, w)
        if i + 1 < len(starts):
            # the original mark lies below the next cut node and leaves with it
            sub = _detach(sub, starts[i + 1][len(w):])
        factors.append(_from_nested(sub))
    return ProductTree(tuple(factors))


def unbreak(p: ProductTree) -> DerivativeTree:
    """Reattach factor ``i+1`` as last child of factor ``i``'s derivative node."""
    nested = [_to_nested(f.tree, f.deriv) for f in p.factors]
    acc = nested[-1]
    for nd in reversed(nested[:-1]):
        acc = _attach_at_deriv(nd, acc)
    return _from_nested(acc)


def equivalence_key(p: ProductTree) -> list[HalfLabeledKey]:
    return [f.key() for f in p.factors]


def perm_class_size(t: DerivativeTree | LabeledTree) -> int:
    tree = t.tree if isinstance(t, DerivativeTree) else t
    return math.prod(math.factorial(len(subshape(tree.shape, v))) for v in tree.paths)


# ---------------------------------------------------------------- labelings

def _ranges(tree: LabeledTree, deriv: Path | None, pmax: int, restrict: str | None):
    """Per-node label range as a function of the ancestor label sum."""
    stem = set(deriv[:i] for i in range(len(deriv) + 1)) if deriv is not None else set()

    def rng(v: Path, ancestor_sum: int) -> range:
        if tree.sign(v) > 0:
            return range(0, pmax + 1)
        reduced = restrict == "all-minus" or (restrict == "stem-minus-only" and v in stem)
        if reduced:
            return range(-1, -ancestor_sum - 1, -1)
        return range(-1, -pmax - 1, -1)

    return rng


def _labelings(tree: LabeledTree, deriv: Path | None, pmax: int,
               restrict: str | None) -> Iterator[tuple[int, ...]]:
    paths = tree.paths
    rng = _ranges(tree, deriv, pmax, restrict)
    idx = path_index(tree.shape)
    labels = [0] * len(paths)

    def rec(i: int):
        if i == len(paths):
            yield tuple(labels)
            return
        v = paths[i]
        anc = sum(labels[idx[v[:j]]] for j in range(len(v)))
        for p in rng(v, anc):
            labels[i] = p
            yield from rec(i + 1)

    yield from rec(0)


def enumerate_labelings(tree: LabeledTree, pmax: int) -> Iterator[LabeledTree]:
    """Symmetric cutoff: ``+`` labels in ``[0, pmax]``, ``-`` labels in ``[-pmax, -1]``."""
    for labels in _labelings(tree, None, pmax, None):
        yield LabeledTree(tree.shape, tree.signs, labels)


def enumerate_reduced_labelings(key: HalfLabeledKey, pmax: int,
                                restrict: RestrictMode = "all-minus") -> Iterator[DerivativeTree]:
    """Depth-first labelings of ``key`` with the reduced ranges for ``-`` nodes.

    ``restrict="all-minus"`` reduces every ``-`` node to
    ``[-(ancestor sum), -1]``; ``"stem-minus-only"`` reduces only the ``-``
    nodes on the main stem and gives the others ``[-pmax, -1]``.
    """
    if pmax < 1:
        raise ValueError("pmax >= 1")
    if restrict not in RESTRICT_MODES:
        raise ValueError(f"unknown restrict mode {restrict!r}")
    tree = key.tree()
    for labels in _labelings(tree, key.deriv, pmax, restrict):
        yield DerivativeTree(LabeledTree(key.shape, key.signs, labels), key.deriv)


def enumerate_derivative_trees(k: int, alpha_top: int, pmax: int) -> Iterator[DerivativeTree]:
    """All labeled derivative trees with ``k`` nodes and bounded labels."""
    for key in enumerate_sign_derivative(k, alpha_top):
        for labels in _labelings(key.tree(), None, pmax, None):
            yield DerivativeTree(LabeledTree(key.shape, key.signs, labels), key.deriv)


# ---------------------------------------------------------------- counting

def compositions(n: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in compositions(n - first):
            yield (first,) + rest


def count_derivative_trees(k: int, alpha_top: int, pmax: int) -> int:
    top = pmax + 1 if alpha_top > 0 else pmax
    return catalan(k - 1) * k * top * (2 * pmax + 1) ** (k - 1)


def count_product_trees(n: int, pmax: int) -> int:
    """``|P_{n,+}|`` with labels bounded by ``pmax`` in absolute value."""
    total = 0
    for comp in compositions(n):
        total += math.prod(count_derivative_trees(k, 1 if i == 0 else -1, pmax)
                           for i, k in enumerate(comp))
    return total


def enumerate_product_trees(n: int, pmax: int) -> Iterator[ProductTree]:
    for comp in compositions(n):
        pools = [list(enumerate_derivative_trees(k, 1 if i == 0 else -1, pmax))
                 for i, k in enumerate(comp)]
        for combo in itertools.product(*pools):
            yield ProductTree(tuple(combo))


def perm_classes(k: int, alpha_top: int = 1) -> dict:
    """Group half-labeled derivative keys by their orbit under child permutations."""
    classes: dict = {}
    for key in enumerate_sign_derivative(k, alpha_top):
        c = _canonical(_to_nested(key.tree(), key.deriv))
        classes.setdefault(c, []).append(key)
    return classes


def check_breaking_partition(n: int, pmax: int) -> dict:
    """Exhaustively verify that breaking classes partition ``P_{n,+}``.

    Returns counts and the number of product trees hit by more than one class
    or by none (both must be zero).
    """
    owner: dict[ProductTree, object] = {}
    overlaps = 0
    for cls, keys in perm_classes(n).items():
        seen: set[ProductTree] = set()
        for key in keys:
            for labels in _labelings(key.tree(), None, pmax, None):
                t = DerivativeTree(LabeledTree(key.shape, key.signs, labels), key.deriv)
                for c in cuts_of(t):
                    seen.add(break_tree(t, c))
        for p in seen:
            if p in owner:
                overlaps += 1
            else:
                owner[p] = cls
    universe = set(enumerate_product_trees(n, pmax))
    return {
        "n": n,
        "pmax": pmax,
        "classes": len(perm_classes(n)),
        "product_trees": len(universe),
        "covered": len(owner),
        "overlaps": overlaps,
        "missing": len(universe - owner.keys()),
        "extra": len(owner.keys() - universe),
    }
