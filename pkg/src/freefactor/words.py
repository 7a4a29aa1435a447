"""Reduced words in finitely generated free groups.

A letter is a nonzero integer: ``+i`` is the i-th generator (1-indexed),
``-i`` its inverse.  A :class:`Word` stores a freely reduced tuple of
letters over a fixed :class:`Alphabet`; the empty tuple is the identity.

The text form writes generators 1..26 as ``a``..``z`` with capitals for
inverses and a positive integer suffix for repetition, so ``a3B2`` is
a^3 b^-2.  Alphabets of rank > 26 fall back to indexed tokens ``x7``/``X7``
with an optional ``^e`` exponent.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence


class WordError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """A ranked free alphabet; generators are 1..rank."""

    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise WordError("alphabet rank must be >= 1")

    def letters(self) -> Iterator[int]:
        """All 2*rank signed letters."""
        for i in range(1, self.rank + 1):
            yield i
            yield -i

    def check_letter(self, letter: int):
        if letter == 0 or abs(letter) > self.rank:
            raise WordError(f"letter {letter} out of range for rank {self.rank}")


def _reduce_letters(letters: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


class Word:
    """A freely reduced word.  Immutable and hashable."""

    __slots__ = ("alphabet", "letters")

    def __init__(self, alphabet: Alphabet, letters: Iterable[int] = ()):
        letters = tuple(letters)
        for x in letters:
            alphabet.check_letter(x)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "letters", _reduce_letters(letters))

    def __setattr__(self, *a):
        raise AttributeError("Word is immutable")

    # -- basic structure ------------------------------------------------

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Word)
            and self.alphabet == other.alphabet
            and self.letters == other.letters
        )

    def __hash__(self) -> int:
        return hash((self.alphabet, self.letters))

    def __lt__(self, other: "Word") -> bool:
        # shortlex: by length, then 1 < -1 < 2 < -2 < ...
        key = lambda x: (abs(x), x < 0)
        return (len(self), [key(x) for x in self]) < (len(other), [key(x) for x in other])

    def __repr__(self) -> str:
        return f"Word({self.alphabet.rank}, {format_word(self)!r})"

    def __str__(self) -> str:
        return format_word(self)

    # -- group operations -----------------------------------------------

    def __mul__(self, other: "Word") -> "Word":
        if self.alphabet != other.alphabet:
            raise WordError("alphabet mismatch")
        return Word(self.alphabet, self.letters + other.letters)

    def inv(self) -> "Word":
        return Word(self.alphabet, tuple(-x for x in reversed(self.letters)))

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inv()
        return Word(self.alphabet, base.letters * abs(n))

    def conjugate(self, g: "Word") -> "Word":
        """g^-1 * self * g."""
        return g.inv() * self * g

    def cyclic_reduce(self) -> tuple["Word", "Word"]:
        """Return (c, g) with self = g * c * g^-1 and c cyclically reduced."""
        letters = list(self.letters)
        prefix: list[int] = []
        while len(letters) >= 2 and letters[0] == -letters[-1]:
            prefix.append(letters[0])
            letters = letters[1:-1]
        return Word(self.alphabet, letters), Word(self.alphabet, prefix)

    def cyclic_length(self) -> int:
        return len(self.cyclic_reduce()[0])

    def cyclic_conjugates(self) -> list["Word"]:
        c, _ = self.cyclic_reduce()
        return [Word(self.alphabet, c.letters[i:] + c.letters[:i]) for i in range(max(1, len(c)))]

    def exponent_sum(self, generator: int) -> int:
        self.alphabet.check_letter(generator)
        g = abs(generator)
        return sum(1 if x == g else -1 if x == -g else 0 for x in self.letters)

    @staticmethod
    def identity(alphabet: Alphabet) -> "Word":
        return Word(alphabet)

    @staticmethod
    def gen(alphabet: Alphabet, i: int) -> "Word":
        return Word(alphabet, (i,))


def reduce(alphabet: Alphabet, letters: Iterable[int]) -> Word:
    """Freely reduce a letter sequence.

    >>> a = Alphabet(2)
    >>> format_word(reduce(a, [1, -1]))
    ''
    >>> format_word(reduce(a, [1, 2, -2, 1]))
    'a2'
    """
    return Word(alphabet, letters)


def is_proper_power(w: Word) -> Optional[tuple[Word, int]]:
    """Return (root, e) with root**e == w and e maximal >= 2, else None.

    The word is cyclically reduced first; every period length dividing
    the cyclic length is tested.  The identity is not a proper power by
    convention.
    """
    c, g = w.cyclic_reduce()
    n = len(c)
    if n == 0:
        return None
    for d in range(1, n):
        if n % d != 0:
            continue
        if c.letters == c.letters[:d] * (n // d):
            root = Word(w.alphabet, g.letters + c.letters[:d] + g.inv().letters)
            return root, n // d
    return None


# -- homomorphisms -----------------------------------------------------


@dataclass(frozen=True)
class GroupHom:
    """A homomorphism of free groups given by generator images."""

    source: Alphabet
    target: Alphabet
    images: tuple[Word, ...]

    def __post_init__(self):
        if len(self.images) != self.source.rank:
            raise WordError("one image word per source generator required")
        for im in self.images:
            if im.alphabet != self.target:
                raise WordError("image word over wrong alphabet")

    def __call__(self, w: Word) -> Word:
        return apply_hom(self, w)

    @staticmethod
    def identity(alphabet: Alphabet) -> "GroupHom":
        return GroupHom(alphabet, alphabet, tuple(Word.gen(alphabet, i) for i in range(1, alphabet.rank + 1)))

    def compose(self, inner: "GroupHom") -> "GroupHom":
        """self after inner."""
        if inner.target != self.source:
            raise WordError("alphabet mismatch in composition")
        return GroupHom(inner.source, self.target, tuple(self(im) for im in inner.images))


def apply_hom(phi: GroupHom, w: Word) -> Word:
    if w.alphabet != phi.source:
        raise WordError("alphabet mismatch")
    out: list[int] = []
    for x in w.letters:
        im = phi.images[abs(x) - 1]
        out.extend(im.letters if x > 0 else im.inv().letters)
    return Word(phi.target, out)


def verify_mutual_inverse(phi: GroupHom, psi: GroupHom) -> bool:
    """True iff psi(phi(g)) = g and phi(psi(g)) = g on every generator."""
    if phi.source != psi.target or phi.target != psi.source:
        return False
    for i in range(1, phi.source.rank + 1):
        if psi(phi(Word.gen(phi.source, i))) != Word.gen(phi.source, i):
            return False
    for i in range(1, psi.source.rank + 1):
        if phi(psi(Word.gen(psi.source, i))) != Word.gen(psi.source, i):
            return False
    return True


# -- Whitehead primitivity test ----------------------------------------


def whitehead_type2(alphabet: Alphabet) -> Iterator[GroupHom]:
    """All Whitehead automorphisms of the second kind.

    One per pair (A, a) with a a signed letter, a in A, a^-1 not in A:
    a maps to itself and every other letter x maps to x, x*a, a^-1*x or
    a^-1*x*a according to whether x and x^-1 lie in A.
    """
    for a in alphabet.letters():
        rest = [x for x in alphabet.letters() if x != a and x != -a]
        for bits in itertools.product((False, True), repeat=len(rest)):
            A = {a} | {x for x, b in zip(rest, bits) if b}
            images = []
            for g in range(1, alphabet.rank + 1):
                if g == abs(a):
                    images.append(Word.gen(alphabet, g))
                    continue
                letters: list[int] = []
                if -g in A:
                    letters.append(-a)
                letters.append(g)
                if g in A:
                    letters.append(a)
                images.append(Word(alphabet, letters))
            yield GroupHom(alphabet, alphabet, tuple(images))


def is_primitive(w: Word, trace: Optional[list[GroupHom]] = None) -> bool:
    """Decide whether w belongs to some free basis.

    Runs the length-reducing descent on the cyclic word: while some
    Whitehead automorphism of the second kind shortens the cyclic
    length, apply it.  The word is primitive iff the descent ends at a
    single letter; a strict local minimum of length > 1 can never be
    primitive.  If ``trace`` is given, the applied automorphisms are
    appended to it.
    """
    if not w:
        raise WordError("primitivity of the trivial word is undefined")
    cur, _ = w.cyclic_reduce()
    while len(cur) > 1:
        for phi in whitehead_type2(w.alphabet):
            cand = apply_hom(phi, cur).cyclic_reduce()[0]
            if len(cand) < len(cur):
                cur = cand
                if trace is not None:
                    trace.append(phi)
                break
        else:
            return False
    return len(cur) == 1


def enumerate_reduced_words(alphabet: Alphabet, max_len: int, include_empty: bool = False) -> Iterator[Word]:
    """All freely reduced words of length 1..max_len (short first)."""
    if include_empty:
        yield Word(alphabet)
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(max_len):
        nxt = []
        for t in frontier:
            for x in alphabet.letters():
                if t and t[-1] == -x:
                    continue
                nxt.append(t + (x,))
        for t in nxt:
            yield Word(alphabet, t)
        frontier = nxt


# -- word families ------------------------------------------------------


def bs_word(exponents: Sequence[int]) -> Word:
    """x y_1 x^m_1 y_1^-1 ... y_k x^m_k y_k^-1 over rank k+1 (x=1, y_j=1+j)."""
    k = len(exponents)
    if k < 1:
        raise WordError("bs family needs at least one exponent")
    if any(m == 0 for m in exponents):
        raise WordError("bs exponents must be nonzero")
    ab = Alphabet(k + 1)
    letters: list[int] = [1]
    for j, m in enumerate(exponents, start=1):
        y = 1 + j
        letters.append(y)
        letters.extend([1 if m > 0 else -1] * abs(m))
        letters.append(-y)
    return Word(ab, letters)


def two_letter_word(k: int, n: int) -> Word:
    """a^k b^n in F_2."""
    if k == 0 or n == 0:
        raise WordError("two_letter family needs k, n nonzero")
    ab = Alphabet(2)
    return Word.gen(ab, 1) ** k * Word.gen(ab, 2) ** n


def three_letter_word(k: int, n: int, p: int) -> Word:
    """a^k b^n a^p in F_2 (k != -p, n != 0 for the certified family)."""
    if n == 0:
        raise WordError("three_letter family needs n nonzero")
    if k + p == 0:
        raise WordError("three_letter family needs k != -p")
    ab = Alphabet(2)
    return Word.gen(ab, 1) ** k * Word.gen(ab, 2) ** n * Word.gen(ab, 1) ** p


def surface_commutator_word(g: int) -> Word:
    """[a_1,b_1]...[a_g,b_g] over rank 2g (a_i = 2i-1, b_i = 2i)."""
    if g < 1:
        raise WordError("surface_comm family needs genus >= 1")
    ab = Alphabet(2 * g)
    letters: list[int] = []
    for i in range(1, g + 1):
        a, b = 2 * i - 1, 2 * i
        letters.extend([a, b, -a, -b])
    return Word(ab, letters)


def nonorientable_boundary_word(g: int, boundary_count: int = 1) -> Word:
    """a_1^2 ... a_g^2 c_1 ... c_{k-1} over rank g+k-1."""
    if g < 1:
        raise WordError("nonorientable family needs genus >= 1")
    if boundary_count < 1:
        raise WordError("boundary count must be >= 1")
    ab = Alphabet(g + boundary_count - 1)
    letters: list[int] = []
    for i in range(1, g + 1):
        letters.extend([i, i])
    letters.extend(range(g + 1, g + boundary_count))
    return Word(ab, letters)


def make_family_word(family: str, **params):
    """Dispatch on the documented word families.

    Families: bs(m=[m_1..m_k]), two_letter(k, n), three_letter(k, n, p),
    surface_comm(g), nonorientable(g, k=1), vfree(v, orders, powers).
    The vfree family returns a free-product word, not a plain Word.
    """
    if family == "bs":
        return bs_word(params["m"])
    if family == "two_letter":
        return two_letter_word(params["k"], params["n"])
    if family == "three_letter":
        return three_letter_word(params["k"], params["n"], params["p"])
    if family == "surface_comm":
        return surface_commutator_word(params["g"])
    if family == "nonorientable":
        return nonorientable_boundary_word(params["g"], params.get("k", 1))
    if family == "vfree":
        from . import vfree

        return vfree.make_vfree_word(params["v"], params["orders"], params["powers"])
    raise WordError(f"unknown word family {family!r}")


# -- text grammar --------------------------------------------------------

_LETTER_TOKEN = re.compile(r"([a-zA-Z])(\d*)")
_INDEXED_TOKEN = re.compile(r"([xX])(\d+)(?:\^(-?\d+))?")


def parse_word(text: str, alphabet: Optional[Alphabet] = None) -> Word:
    """Parse the letter grammar: a..z are generators 1..26, capitals are
    inverses, an integer suffix repeats (``a3B2`` = a^3 b^-2).

    If no alphabet is given, the smallest one containing every letter
    used (at least rank 1) is inferred.
    """
    text = text.replace(" ", "")
    letters: list[int] = []
    pos = 0
    while pos < len(text):
        m = _LETTER_TOKEN.match(text, pos)
        if not m:
            raise WordError(f"bad word syntax at position {pos} in {text!r}")
        ch, rep = m.group(1), m.group(2)
        e = int(rep) if rep else 1
        if e < 1:
            raise WordError(f"exponent suffix must be positive in {text!r}")
        idx = ord(ch.lower()) - ord("a") + 1
        letters.extend([idx if ch.islower() else -idx] * e)
        pos = m.end()
    if alphabet is None:
        alphabet = Alphabet(max((abs(x) for x in letters), default=1))
    return Word(alphabet, letters)


def parse_indexed_word(text: str, alphabet: Optional[Alphabet] = None) -> Word:
    """Parse the indexed grammar ``x7``/``X7`` with optional ``^e``."""
    text = text.replace(" ", "")
    letters: list[int] = []
    pos = 0
    while pos < len(text):
        m = _INDEXED_TOKEN.match(text, pos)
        if not m:
            raise WordError(f"bad indexed word syntax at position {pos} in {text!r}")
        idx = int(m.group(2))
        e = int(m.group(3)) if m.group(3) else 1
        if idx < 1 or e == 0:
            raise WordError(f"bad token in {text!r}")
        sign = 1 if m.group(1) == "x" else -1
        letters.extend([sign * idx if e > 0 else -sign * idx] * abs(e))
        pos = m.end()
    if alphabet is None:
        alphabet = Alphabet(max((abs(x) for x in letters), default=1))
    return Word(alphabet, letters)


def format_word(w: Word) -> str:
    """Inverse of :func:`parse_word` (indexed form for rank > 26)."""
    if w.alphabet.rank > 26:
        out = []
        for x, group in itertools.groupby(w.letters):
            e = len(list(group))
            tok = ("x" if x > 0 else "X") + str(abs(x))
            out.append(tok if e == 1 else f"{tok}^{e}")
        return "".join(out)
    out = []
    for x, group in itertools.groupby(w.letters):
        e = len(list(group))
        ch = chr(ord("a") + abs(x) - 1)
        if x < 0:
            ch = ch.upper()
        out.append(ch + (str(e) if e > 1 else ""))
    return "".join(out)


def generator_name(i: int, rank: int) -> str:
    """Display name of generator i in a rank-``rank`` alphabet."""
    if rank > 26:
        return f"x{i}"
    return chr(ord("a") + i - 1)
