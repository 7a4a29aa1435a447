"""Free products F_n * Z_{n_1} * ... * Z_{n_k}: normal forms and the
branched-cover subgroup.

A group element is an alternating sequence of syllables: nonempty
reduced words in the free part and torsion letters s_j^e with
0 < e < n_j.  Concatenate-and-merge yields the unique normal form, so
the word problem is syllable equality.

The subgroup generated by the conjugates K_j = s_k^j K s_k^{-j} of the
"all generators but s_k" subgroup K has index n_k; its coset action
sends s_k to the n_k-cycle and every other generator to the identity.
A word w = v s_1^{p_1} ... s_k^{p_k} lifts to d = gcd(p_k, n_k)
products of the conjugates u_j = s_k^j u s_k^{-j} of
u = v s_1^{p_1} ... s_{k-1}^{p_{k-1}}.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .words import Alphabet, Word, format_word, is_proper_power, parse_word


class VFreeError(ValueError):
    pass


@dataclass(frozen=True)
class VFreeGroup:
    free_rank: int
    orders: tuple[int, ...]

    def __post_init__(self):
        if self.free_rank < 0:
            raise VFreeError("free rank must be >= 0")
        if any(n < 2 for n in self.orders):
            raise VFreeError("torsion orders must be >= 2")
        if self.free_rank == 0 and not self.orders:
            raise VFreeError("the trivial group is not supported")
        object.__setattr__(self, "orders", tuple(self.orders))

    @property
    def free_alphabet(self) -> Alphabet:
        if self.free_rank == 0:
            raise VFreeError("group has no free part")
        return Alphabet(self.free_rank)

    @property
    def torsion_count(self) -> int:
        return len(self.orders)


Syllable = tuple  # ("f", Word) | ("t", j, e)


@dataclass(frozen=True)
class VFreeWord:
    group: VFreeGroup
    syllables: tuple[Syllable, ...]

    def __bool__(self) -> bool:
        return bool(self.syllables)

    def __mul__(self, other: "VFreeWord") -> "VFreeWord":
        if self.group != other.group:
            raise VFreeError("group mismatch")
        return normal_form(self.group, self.syllables + other.syllables)

    def inv(self) -> "VFreeWord":
        out = []
        for s in reversed(self.syllables):
            if s[0] == "f":
                out.append(("f", s[1].inv()))
            else:
                _, j, e = s
                out.append(("t", j, self.group.orders[j - 1] - e))
        return normal_form(self.group, out)

    def __pow__(self, n: int) -> "VFreeWord":
        base = self if n >= 0 else self.inv()
        out = identity(self.group)
        for _ in range(abs(n)):
            out = out * base
        return out

    def syllable_length(self) -> int:
        return len(self.syllables)

    def __repr__(self):
        return f"VFreeWord({format_vfree(self)!r})"


def identity(group: VFreeGroup) -> VFreeWord:
    return VFreeWord(group, ())


def torsion_letter(group: VFreeGroup, j: int, e: int = 1) -> VFreeWord:
    if not (1 <= j <= group.torsion_count):
        raise VFreeError(f"no torsion generator s_{j}")
    return normal_form(group, [("t", j, e)])


def free_part_word(group: VFreeGroup, w: Word) -> VFreeWord:
    if group.free_rank == 0:
        raise VFreeError("group has no free part")
    if w.alphabet != group.free_alphabet:
        raise VFreeError("free-part word over wrong alphabet")
    return normal_form(group, [("f", w)])


def normal_form(group: VFreeGroup, syllables: Iterable[Syllable]) -> VFreeWord:
    """Merge adjacent mergeable syllables and reduce torsion exponents."""
    stack: list[Syllable] = []
    for s in syllables:
        if s[0] == "f":
            w = s[1]
            if not isinstance(w, Word) or w.alphabet.rank != group.free_rank:
                raise VFreeError("bad free syllable")
            if not w:
                continue
            if stack and stack[-1][0] == "f":
                merged = stack.pop()[1] * w
                if merged:
                    stack.append(("f", merged))
                continue
            stack.append(("f", w))
        elif s[0] == "t":
            _, j, e = s
            if not (1 <= j <= group.torsion_count):
                raise VFreeError(f"no torsion generator s_{j}")
            e = e % group.orders[j - 1]
            if e == 0:
                continue
            if stack and stack[-1][0] == "t" and stack[-1][1] == j:
                e = (stack.pop()[2] + e) % group.orders[j - 1]
                if e == 0:
                    continue
            stack.append(("t", j, e))
        else:
            raise VFreeError(f"unknown syllable kind {s[0]!r}")
    # merging a torsion pair can expose two free syllables (or vice versa);
    # rerun until stable
    out = tuple(stack)
    if _has_mergeable_adjacent(out):
        return normal_form(group, out)
    return VFreeWord(group, out)


def _has_mergeable_adjacent(syllables: Sequence[Syllable]) -> bool:
    for a, b in zip(syllables, syllables[1:]):
        if a[0] == "f" and b[0] == "f":
            return True
        if a[0] == "t" and b[0] == "t" and a[1] == b[1]:
            return True
    return False


def make_vfree_word(v: Optional[Word], orders: Sequence[int], powers: Sequence[int], free_rank: Optional[int] = None) -> VFreeWord:
    """w = v s_1^{p_1} ... s_k^{p_k}; v may be None for a trivial free part."""
    if len(powers) != len(orders):
        raise VFreeError("one power per torsion generator required")
    if free_rank is None:
        free_rank = v.alphabet.rank if v is not None else 0
    group = VFreeGroup(free_rank, tuple(orders))
    syllables: list[Syllable] = []
    if v is not None and v:
        syllables.append(("f", v))
    for j, p in enumerate(powers, start=1):
        syllables.append(("t", j, p))
    return normal_form(group, syllables)


def cyclic_normal_form(w: VFreeWord) -> tuple[VFreeWord, VFreeWord]:
    """Return (c, g) with w = g c g^-1 and the ends of c not mergeable.

    Rotating the leading syllable to the back merges it into the last
    one, so every step drops the syllable count and the loop terminates.
    """
    g = identity(w.group)
    c = w
    while True:
        syl = c.syllables
        if len(syl) < 2:
            return c, g
        first, last = syl[0], syl[-1]
        mergeable = (first[0] == "f" and last[0] == "f") or (
            first[0] == "t" and last[0] == "t" and first[1] == last[1]
        )
        if not mergeable:
            return c, g
        head = VFreeWord(w.group, (first,))
        c = normal_form(w.group, syl[1:] + (first,))
        g = g * head


def is_proper_power_vfree(w: VFreeWord) -> Optional[tuple[VFreeWord, int]]:
    """Proper-power detection for infinite-order elements.

    An element conjugate into a finite factor (a single torsion
    syllable after cyclic reduction) has finite order; the obstruction
    does not apply there and None is returned.
    """
    c, g = cyclic_normal_form(w)
    syl = c.syllables
    if not syl:
        return None
    if len(syl) == 1:
        if syl[0][0] == "t":
            return None
        root = is_proper_power(syl[0][1])
        if root is None:
            return None
        r, e = root
        return g * free_part_word(w.group, r) * g.inv(), e
    for d in range(1, len(syl)):
        if len(syl) % d:
            continue
        if syl == syl[:d] * (len(syl) // d):
            r = VFreeWord(w.group, syl[:d])
            return g * r * g.inv(), len(syl) // d
    return None


# -- the branched-cover subgroup ------------------------------------------


@dataclass(frozen=True)
class BranchedCoverSubgroup:
    """H = < s^j K s^-j : j > for K = everything but one torsion generator."""

    group: VFreeGroup
    which: int
    factors: tuple[tuple[VFreeWord, ...], ...]

    @property
    def index(self) -> int:
        return self.group.orders[self.which - 1]


def branched_cover_subgroup(group: VFreeGroup, which: Optional[int] = None) -> BranchedCoverSubgroup:
    """Factor dictionary of the index-n_which subgroup.

    Factor j lists the conjugates s^j g s^-j of every generator g of K
    (free generators first, then the remaining torsion letters)."""
    if group.torsion_count == 0:
        raise VFreeError("need at least one torsion factor")
    if which is None:
        which = group.torsion_count
    if not (1 <= which <= group.torsion_count):
        raise VFreeError(f"no torsion generator s_{which}")
    n = group.orders[which - 1]
    k_gens: list[VFreeWord] = []
    if group.free_rank:
        for i in range(1, group.free_rank + 1):
            k_gens.append(free_part_word(group, Word.gen(group.free_alphabet, i)))
    for j in range(1, group.torsion_count + 1):
        if j != which:
            k_gens.append(torsion_letter(group, j))
    s = torsion_letter(group, which)
    factors = []
    for j in range(n):
        conj = tuple((s**j) * g * (s**j).inv() for g in k_gens)
        factors.append(conj)
    return BranchedCoverSubgroup(group, which, tuple(factors))


def coset_action_vfree(sub: BranchedCoverSubgroup):
    """Permutations of {0..n-1}: s_which is the full cycle, every other
    generator the identity; the stabilizer of 0 is the subgroup."""
    from .lifts import CosetAction

    g = sub.group
    n = sub.index
    perms = []
    for _ in range(g.free_rank):
        perms.append(tuple(range(n)))
    for j in range(1, g.torsion_count + 1):
        if j == sub.which:
            perms.append(tuple((i + 1) % n for i in range(n)))
        else:
            perms.append(tuple(range(n)))
    return CosetAction(Alphabet(g.free_rank + g.torsion_count), n, tuple(perms))


def vfree_apply(action, w: VFreeWord, point: int) -> int:
    """Apply a free-product word through the flattened generator list
    [a_1..a_n, s_1..s_k]."""
    g = w.group
    v = point
    for s in w.syllables:
        if s[0] == "f":
            for x in s[1].letters:
                idx = abs(x) - 1
                v = action.perms[idx][v] if x > 0 else action.perms[idx].index(v)
        else:
            _, j, e = s
            idx = g.free_rank + j - 1
            for _ in range(e):
                v = action.perms[idx][v]
    return v


@dataclass(frozen=True)
class VFreeLiftEntry:
    rep: VFreeWord  # g_i with w_i = g_i^-1 w^m g_i
    mult: int
    word: VFreeWord
    factor_rewrite: tuple[tuple[int, VFreeWord], ...]  # (sheet, element of K)


@dataclass(frozen=True)
class VFreeLift:
    base_word: VFreeWord
    index: int
    entries: tuple[VFreeLiftEntry, ...]

    def __post_init__(self):
        if sum(e.mult for e in self.entries) != self.index:
            raise VFreeError("multiplicities must partition the index")


def split_last_torsion(w: VFreeWord, sub: BranchedCoverSubgroup) -> tuple[VFreeWord, int]:
    """Split w = u * s_which^p; demands the supported shape
    v s_1^{p_1} ... s_k^{p_k} with which = k."""
    g = w.group
    if sub.which != g.torsion_count:
        raise VFreeError("lift construction peels the last torsion generator")
    syl = list(w.syllables)
    p = 0
    if syl and syl[-1][0] == "t" and syl[-1][1] == sub.which:
        p = syl[-1][2]
        syl = syl[:-1]
    u = VFreeWord(g, tuple(syl))
    # shape check: an optional leading free part, then torsion letters
    # with strictly ascending indices below s_k
    last_j = 0
    for i, s in enumerate(u.syllables):
        if s[0] == "f":
            if i != 0:
                raise VFreeError("unsupported word shape: free part must lead")
        else:
            if s[1] <= last_j or s[1] >= g.torsion_count:
                raise VFreeError("unsupported word shape: torsion letters must ascend below s_k")
            last_j = s[1]
    return u, p


def complete_lift_vfree(sub: BranchedCoverSubgroup, w: VFreeWord) -> VFreeLift:
    """d = gcd(p_k, n_k) lifts of multiplicity n_k/d.

    Entry i is the product u_i u_{i+p} ... u_{i+(m-1)p} of conjugates
    u_j = s^j u s^-j, which equals s^i w^m s^-i; the representative is
    g_i = s^-i.  The factor rewrite records which conjugate factor each
    piece lives in.
    """
    if w.group != sub.group:
        raise VFreeError("group mismatch")
    u, p = split_last_torsion(w, sub)
    g = sub.group
    n = sub.index
    s = torsion_letter(g, sub.which)
    d = math.gcd(p % n, n)
    m = n // d
    action = coset_action_vfree(sub)
    entries = []
    for i in range(d):
        pieces = []
        word = identity(g)
        for l in range(m):
            sheet = (i + l * p) % n
            pieces.append((sheet, u))
            word = word * (s**sheet) * u * (s**sheet).inv()
        direct = (s**i) * (w**m) * (s**i).inv()
        if word != direct:
            raise VFreeError("lift formula mismatch")
        if vfree_apply(action, word, 0) != 0:
            raise VFreeError("lift does not lie in the subgroup")
        entries.append(VFreeLiftEntry(rep=(s**i).inv(), mult=m, word=word, factor_rewrite=tuple(pieces)))
    return VFreeLift(base_word=w, index=n, entries=tuple(entries))


def alternating_sample_nontrivial(sub: BranchedCoverSubgroup, rng, trials: int = 50, max_factors: int = 4) -> bool:
    """Sample alternating products of nontrivial factor elements and
    check that none collapses to the identity (free-product audit)."""
    g = sub.group
    usable = [j for j, gens in enumerate(sub.factors) if gens]
    if len(usable) < 1:
        return True
    for _ in range(trials):
        length = rng.randrange(1, max_factors + 1)
        sheets = []
        last = -1
        for _ in range(length):
            choices = [j for j in usable if j != last]
            if not choices:
                break
            last = rng.choice(choices)
            sheets.append(last)
        word = identity(g)
        for j in sheets:
            gens = sub.factors[j]
            piece = identity(g)
            for _ in range(rng.randrange(1, 3)):
                base = rng.choice(gens)
                piece = piece * (base if rng.random() < 0.5 else base.inv())
            if not piece:
                piece = rng.choice(gens)
            word = word * piece
        if sheets and not word:
            return False
    return True


# -- text grammar and JSON ---------------------------------------------------

_TORSION_TOKEN = re.compile(r"s(\d+)(?:\^(-?\d+))?")


def format_vfree(w: VFreeWord) -> str:
    parts = []
    for s in w.syllables:
        if s[0] == "f":
            parts.append(format_word(s[1]))
        else:
            _, j, e = s
            parts.append(f"s{j}" if e == 1 else f"s{j}^{e}")
    return ".".join(parts) if parts else ""


def parse_vfree(text: str, group: VFreeGroup) -> VFreeWord:
    """Tokens ``s<j>`` or ``s<j>^<e>`` are torsion; everything else is the
    free-part letter grammar.  Syllables may be separated by dots."""
    syllables: list[Syllable] = []
    for chunk in text.split("."):
        chunk = chunk.strip()
        pos = 0
        while pos < len(chunk):
            m = _TORSION_TOKEN.match(chunk, pos)
            if m:
                syllables.append(("t", int(m.group(1)), int(m.group(2) or 1)))
                pos = m.end()
                continue
            m2 = re.match(r"[a-rt-zA-RT-Z]\d*", chunk[pos:])
            if not m2:
                raise VFreeError(f"bad syntax at {pos} in {text!r}")
            w = parse_word(m2.group(0), group.free_alphabet)
            syllables.append(("f", w))
            pos += m2.end()
    return normal_form(group, syllables)


def vfree_to_json(w: VFreeWord) -> dict:
    return {
        "free_rank": w.group.free_rank,
        "orders": list(w.group.orders),
        "syllables": [
            ["f", format_word(s[1])] if s[0] == "f" else ["t", s[1], s[2]]
            for s in w.syllables
        ],
    }


def vfree_from_json(data: dict) -> VFreeWord:
    group = VFreeGroup(data["free_rank"], tuple(data["orders"]))
    syllables: list[Syllable] = []
    for s in data["syllables"]:
        if s[0] == "f":
            syllables.append(("f", parse_word(s[1], group.free_alphabet)))
        else:
            syllables.append(("t", s[1], s[2]))
    return normal_form(group, syllables)
