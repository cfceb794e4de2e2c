"""Decision tree data model, text format, and structural operations.

A tree is built from three node kinds: decision nodes that branch on a
boolean input variable, stochastic nodes that branch on a fair coin, and
leaves carrying an exact rational value in [0, 1].  A deterministic tree
(DDT) is one with no stochastic nodes; the general form (RDT) models a
randomized query algorithm.  All values are immutable and all operations
are pure functions, so everything here is safe to share across threads.

Arithmetic is exact throughout: leaf literals such as ``0.9`` are parsed
as rationals (9/10), never as floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

__all__ = [
    "Leaf",
    "Decision",
    "Stochastic",
    "Tree",
    "TreeStats",
    "Restriction",
    "Candidate",
    "TreeError",
    "ParseError",
    "parse_tree",
    "parse_tree_with_universe",
    "serialize_tree",
    "format_rational",
    "mu_eval",
    "eval_rdt",
    "restrict",
    "reduce",
    "stats",
    "query_prob",
    "is_reduced",
    "is_ddt",
    "is_boolean_valued",
    "decision_vars",
    "num_vars",
    "fix_coins",
    "candidate_eval",
    "materialize_stack",
]


class TreeError(ValueError):
    """Domain error raised by tree operations."""


class ParseError(TreeError):
    """Tree text did not conform to the grammar; carries the offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos


@dataclass(frozen=True)
class Leaf:
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))
        if not 0 <= self.value <= 1:
            raise TreeError(f"leaf value outside [0,1]: {self.value}")


@dataclass(frozen=True)
class Decision:
    """Branch on input variable ``var`` (1-based); child0 is the 0-branch."""

    var: int
    child0: "Tree"
    child1: "Tree"

    def __post_init__(self):
        if self.var < 1:
            raise TreeError(f"variable index must be >= 1, got {self.var}")


@dataclass(frozen=True)
class Stochastic:
    """Branch on a fair coin; child0 is taken when the coin is 0."""

    child0: "Tree"
    child1: "Tree"


Tree = Union[Leaf, Decision, Stochastic]


@dataclass(frozen=True)
class TreeStats:
    """Complexity measures of a tree.

    query_complexity: max decision nodes on any root-to-leaf path.
    randomness_complexity: max stochastic nodes on any such path.
    description_length: total node count.
    num_vars: largest variable index queried (0 for constant trees).
    """

    query_complexity: int
    randomness_complexity: int
    description_length: int
    num_vars: int


@dataclass(frozen=True)
class Restriction:
    """Partial assignment of variables, kept sorted by variable index."""

    assignments: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted(self.assignments))
        seen = set()
        for var, bit in pairs:
            if var < 1:
                raise TreeError(f"variable index must be >= 1, got {var}")
            if bit not in (0, 1):
                raise TreeError(f"restriction bit must be 0 or 1, got {bit}")
            if var in seen:
                raise TreeError(f"variable x{var} restricted twice")
            seen.add(var)
        object.__setattr__(self, "assignments", pairs)

    @classmethod
    def of(cls, pairs: Iterable[tuple[int, int]]) -> "Restriction":
        return cls(tuple(pairs))

    @classmethod
    def from_text(cls, text: str) -> "Restriction":
        """Parse a comma list such as ``"x1=0,x3=1"`` (empty string allowed)."""
        pairs = []
        text = text.strip()
        if text:
            for part in text.split(","):
                name, _, bit = part.strip().partition("=")
                if not name.startswith("x") or not name[1:].isdigit() or bit not in ("0", "1"):
                    raise TreeError(f"bad restriction component: {part!r}")
                pairs.append((int(name[1:]), int(bit)))
        return cls.of(pairs)

    def to_text(self) -> str:
        return ",".join(f"x{v}={b}" for v, b in self.assignments)

    def get(self, var: int) -> int | None:
        for v, b in self.assignments:
            if v == var:
                return b
        return None

    def fixes(self, var: int) -> bool:
        return self.get(var) is not None

    def extended(self, var: int, bit: int) -> "Restriction":
        return Restriction(self.assignments + ((var, bit),))

    def vars(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.assignments)

    def __len__(self) -> int:
        return len(self.assignments)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.assignments)


EMPTY_RESTRICTION = Restriction()


# ---------------------------------------------------------------------------
# Text format
#
#   tree  := leaf | "(" "x" INT tree tree ")" | "(" "$" tree tree ")"
#   leaf  := INT | INT "/" INT | decimal literal
#
# The 0-branch is written first.  "#" starts a comment running to end of
# line, and an optional first line "n=<INT>" declares the variable
# universe.
# ---------------------------------------------------------------------------


def _strip_comments(text: str) -> str:
    lines = []
    for line in text.splitlines():
        hash_pos = line.find("#")
        lines.append(line if hash_pos < 0 else line[:hash_pos])
    return "\n".join(lines)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        if self.pos >= len(self.text):
            raise self.error("unexpected end of input")
        return self.text[self.pos]

    def expect(self, ch: str):
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def token(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in "()" and not self.text[self.pos].isspace():
            self.pos += 1
        if self.pos == start:
            raise self.error("expected a token")
        return self.text[start : self.pos]

    def rational(self) -> Fraction:
        tok = self.token()
        try:
            if "/" in tok:
                num, den = tok.split("/")
                return Fraction(int(num), int(den))
            if "." in tok:
                whole, frac = tok.split(".")
                if not (whole + frac).isdigit():
                    raise ValueError(tok)
                return Fraction(int(whole + frac), 10 ** len(frac))
            return Fraction(int(tok))
        except (ValueError, ZeroDivisionError):
            raise self.error(f"bad rational literal {tok!r}") from None

    def tree(self) -> Tree:
        ch = self.peek()
        if ch != "(":
            value = self.rational()
            if not 0 <= value <= 1:
                raise self.error(f"leaf value outside [0,1]: {value}")
            return Leaf(value)
        self.expect("(")
        head = self.token()
        if head == "$":
            node: Tree = Stochastic(self.tree(), self.tree())
        elif head.startswith("x") and head[1:].isdigit():
            var = int(head[1:])
            if var < 1:
                raise self.error(f"variable index must be >= 1, got {var}")
            node = Decision(var, self.tree(), self.tree())
        else:
            raise self.error(f"expected 'x<INT>' or '$', got {head!r}")
        self.expect(")")
        return node


def parse_tree_with_universe(text: str) -> tuple[Tree, int | None]:
    """Parse tree text, honoring comments and the optional ``n=`` header.

    Returns the tree together with the declared universe size (or None
    when the header is absent).
    """
    stripped = _strip_comments(text)
    declared = None
    lines = stripped.split("\n", 1)
    first = lines[0].strip()
    if first.startswith("n=") and first[2:].strip().isdigit():
        declared = int(first[2:])
        stripped = lines[1] if len(lines) > 1 else ""
    parser = _Parser(stripped)
    tree = parser.tree()
    if not parser.at_end():
        raise parser.error("trailing input after tree")
    if declared is not None and declared < num_vars(tree):
        raise TreeError(f"header n={declared} smaller than largest variable index {num_vars(tree)}")
    return tree, declared


def parse_tree(text: str) -> Tree:
    """Parse a tree from its text form."""
    return parse_tree_with_universe(text)[0]


def format_rational(value: Fraction) -> str:
    """Render exactly: integer, short exact decimal, or ``a/b``."""
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    digits = max(twos, fives)
    if den == 1 and digits <= 12:
        scaled = value.numerator * 10**digits // value.denominator
        text = str(scaled).rjust(digits, "0")
        return f"{text[:-digits] or '0'}.{text[-digits:]}"
    return f"{value.numerator}/{value.denominator}"


def serialize_tree(tree: Tree, header_n: int | None = None) -> str:
    """Serialize to the text format; re-parsing yields an identical tree."""

    def emit(node: Tree) -> str:
        if isinstance(node, Leaf):
            return format_rational(node.value)
        if isinstance(node, Decision):
            return f"(x{node.var} {emit(node.child0)} {emit(node.child1)})"
        return f"($ {emit(node.child0)} {emit(node.child1)})"

    body = emit(tree)
    return f"n={header_n}\n{body}" if header_n is not None else body


# ---------------------------------------------------------------------------
# Evaluation and structure
# ---------------------------------------------------------------------------


def _bit_of(x: Sequence[int], var: int) -> int:
    if var > len(x):
        raise TreeError(f"input assigns {len(x)} variables but x{var} was queried")
    bit = x[var - 1]
    if bit not in (0, 1):
        raise TreeError(f"input bit for x{var} must be 0 or 1, got {bit}")
    return bit


def mu_eval(tree: Tree, x: Sequence[int]) -> Fraction:
    """Mean output on input ``x``: each coin branch is weighted 1/2."""
    if isinstance(tree, Leaf):
        return tree.value
    if isinstance(tree, Decision):
        child = tree.child1 if _bit_of(x, tree.var) else tree.child0
        return mu_eval(child, x)
    return (mu_eval(tree.child0, x) + mu_eval(tree.child1, x)) / 2


def eval_rdt(tree: Tree, x: Sequence[int], rnd: Sequence[int]) -> Fraction:
    """Output for one fixed coin string.

    The s-th stochastic node on the realized path reads ``rnd[s]``; a
    deterministic tree ignores ``rnd`` entirely.
    """
    node = tree
    used = 0
    while not isinstance(node, Leaf):
        if isinstance(node, Decision):
            node = node.child1 if _bit_of(x, node.var) else node.child0
        else:
            if used >= len(rnd):
                raise TreeError(f"coin string exhausted after {used} bits")
            node = node.child1 if rnd[used] else node.child0
            used += 1
    return node.value


def restrict(tree: Tree, pi: Restriction) -> Tree:
    """Replace every decision node on a variable fixed by ``pi`` with the
    selected child; the result never queries those variables."""
    if not len(pi):
        return tree
    if isinstance(tree, Leaf):
        return tree
    if isinstance(tree, Decision):
        bit = pi.get(tree.var)
        if bit is not None:
            return restrict(tree.child1 if bit else tree.child0, pi)
        return Decision(tree.var, restrict(tree.child0, pi), restrict(tree.child1, pi))
    return Stochastic(restrict(tree.child0, pi), restrict(tree.child1, pi))


def reduce(tree: Tree) -> Tree:
    """Resolve repeated queries so no variable appears twice on a path.

    An inner decision node on an already-seen variable collapses to the
    branch consistent with the outer query; the mean function is
    pointwise unchanged.
    """

    def walk(node: Tree, fixed: dict[int, int]) -> Tree:
        if isinstance(node, Leaf):
            return node
        if isinstance(node, Stochastic):
            return Stochastic(walk(node.child0, fixed), walk(node.child1, fixed))
        bit = fixed.get(node.var)
        if bit is not None:
            return walk(node.child1 if bit else node.child0, fixed)
        fixed[node.var] = 0
        child0 = walk(node.child0, fixed)
        fixed[node.var] = 1
        child1 = walk(node.child1, fixed)
        del fixed[node.var]
        return Decision(node.var, child0, child1)

    return walk(tree, {})


def stats(tree: Tree) -> TreeStats:
    """Query/randomness complexity, node count, and variable span."""
    if isinstance(tree, Leaf):
        return TreeStats(0, 0, 1, 0)
    left = stats(tree.child0)
    right = stats(tree.child1)
    q = max(left.query_complexity, right.query_complexity)
    m = max(left.randomness_complexity, right.randomness_complexity)
    size = 1 + left.description_length + right.description_length
    n = max(left.num_vars, right.num_vars)
    if isinstance(tree, Decision):
        return TreeStats(q + 1, m, size, max(n, tree.var))
    return TreeStats(q, m + 1, size, n)


def num_vars(tree: Tree) -> int:
    return stats(tree).num_vars


def decision_vars(tree: Tree) -> set[int]:
    """Set of variables queried anywhere in the tree."""
    if isinstance(tree, Leaf):
        return set()
    out = decision_vars(tree.child0) | decision_vars(tree.child1)
    if isinstance(tree, Decision):
        out.add(tree.var)
    return out


def is_ddt(tree: Tree) -> bool:
    if isinstance(tree, Leaf):
        return True
    if isinstance(tree, Stochastic):
        return False
    return is_ddt(tree.child0) and is_ddt(tree.child1)


def is_boolean_valued(tree: Tree) -> bool:
    if isinstance(tree, Leaf):
        return tree.value in (0, 1)
    return is_boolean_valued(tree.child0) and is_boolean_valued(tree.child1)


def is_reduced(tree: Tree) -> bool:
    """True when no variable repeats on any root-to-leaf decision path."""

    def walk(node: Tree, seen: set[int]) -> bool:
        if isinstance(node, Leaf):
            return True
        if isinstance(node, Decision):
            if node.var in seen:
                return False
            seen.add(node.var)
            ok = walk(node.child0, seen) and walk(node.child1, seen)
            seen.remove(node.var)
            return ok
        return walk(node.child0, seen) and walk(node.child1, seen)

    return walk(tree, set())


def query_prob(tree: Tree, i: int) -> Fraction:
    """Probability that a uniform input's evaluation queries ``x_i``.

    Each decision node on x_i at depth d (counting every internal node
    above it) is reached with probability 2^-d.  Requires a reduced tree
    so the per-node weights sum correctly.
    """
    if not is_reduced(tree):
        raise TreeError("query_prob requires a reduced tree; call reduce() first")

    def walk(node: Tree, depth: int) -> Fraction:
        if isinstance(node, Leaf):
            return Fraction(0)
        hit = Fraction(1, 2**depth) if isinstance(node, Decision) and node.var == i else Fraction(0)
        return hit + walk(node.child0, depth + 1) + walk(node.child1, depth + 1)

    return walk(tree, 0)


def fix_coins(tree: Tree, bits: Sequence[int]) -> Tree:
    """Deterministic tree obtained by pinning every coin.

    The stochastic node at coin-depth s (number of stochastic nodes
    above it on its own path) takes the branch ``bits[s]``.
    """

    def walk(node: Tree, depth: int) -> Tree:
        if isinstance(node, Leaf):
            return node
        if isinstance(node, Decision):
            return Decision(node.var, walk(node.child0, depth), walk(node.child1, depth))
        if depth >= len(bits):
            raise TreeError(f"coin string exhausted after {depth} bits")
        return walk(node.child1 if bits[depth] else node.child0, depth + 1)

    return walk(tree, 0)


# ---------------------------------------------------------------------------
# Candidates: averaged lists of deterministic trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    """A list of deterministic trees whose semantic value is their mean.

    ``seed`` records which sampler seed produced the candidate (when one
    did); it does not affect the semantics.
    """

    members: tuple[Tree, ...]
    seed: tuple[int, int] | None = None

    def __post_init__(self):
        if not self.members:
            raise TreeError("candidate must have at least one member")
        for member in self.members:
            if not is_ddt(member):
                raise TreeError("candidate members must be deterministic trees")

    @property
    def query_complexity(self) -> int:
        """Stacking bound: the sum of member query complexities."""
        return sum(stats(member).query_complexity for member in self.members)


def candidate_eval(candidate: Candidate, x: Sequence[int]) -> Fraction:
    """Mean of the member evaluations at ``x``."""
    total = sum(mu_eval(member, x) for member in candidate.members)
    return Fraction(total, len(candidate.members))


def materialize_stack(candidate: Candidate) -> Tree:
    """Single deterministic tree pointwise equal to the candidate mean.

    Members run in sequence: every root-to-leaf path fixes one path
    through each member in turn, skipping queries on variables fixed
    earlier on the path, and the final leaf averages the collected leaf
    values.  The output is reduced and its query complexity is at most
    the sum of the member query complexities.
    """
    members = candidate.members
    count = len(members)

    def walk(index: int, node: Tree, fixed: dict[int, int], acc: Fraction) -> Tree:
        while isinstance(node, Decision) and node.var in fixed:
            node = node.child1 if fixed[node.var] else node.child0
        if isinstance(node, Leaf):
            total = acc + node.value
            if index + 1 == count:
                return Leaf(total / count)
            return walk(index + 1, members[index + 1], fixed, total)
        assert isinstance(node, Decision)
        fixed[node.var] = 0
        child0 = walk(index, node.child0, fixed, acc)
        fixed[node.var] = 1
        child1 = walk(index, node.child1, fixed, acc)
        del fixed[node.var]
        return Decision(node.var, child0, child1)

    return walk(0, members[0], {}, Fraction(0))
