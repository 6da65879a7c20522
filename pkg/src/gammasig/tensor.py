"""Level-truncated free tensor algebra over an augmented alphabet.

The alphabet carries up to three kinds of letters with fixed integer ids:

* ``0`` — the time letter (present iff ``has_time``),
* ``1 .. d`` — base path letters,
* ``d+1 .. d + d(d+1)/2`` — bracket letters ``eps(i, j)`` for ``1 <= i <= j <= d``
  in row-major upper-triangular order (present iff ``has_brackets``).

Letter ids never shift with the flags, so an index map valid for one module is
valid for all of them.  Words are plain tuples of letter ids; the canonical
word order is graded (by length) with lexicographic comparison inside a grade,
which coincides with plain tuple comparison because letter ids are laid out in
canonical order.

Coefficient arithmetic follows the inputs: integer and ``fractions.Fraction``
coefficients stay exact, floats stay floats.  Algebraic identities are tested
in exact arithmetic; floating point enters only through path signatures.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

Word = tuple[int, ...]

#: Scalar coefficient types accepted in a TensorPoly.
Coeff = int | float | Fraction


def word_str(word: Word) -> str:
    """Render a word as dot-joined letters: ``(1, 2, 2)`` -> ``"1.2.2"``.

    The empty word renders as the empty string.
    """
    return ".".join(str(letter) for letter in word)


def parse_word(text: str) -> Word:
    """Inverse of :func:`word_str`; empty string parses to the empty word."""
    if text == "":
        return ()
    return tuple(int(part) for part in text.split("."))


def graded_lex_key(word: Word) -> tuple[int, Word]:
    """Sort key realizing graded-lexicographic word order."""
    return (len(word), word)


@dataclass(frozen=True)
class Alphabet:
    """Augmented alphabet with a fixed letter layout.

    ``d`` is the base path dimension (letters ``1..d``).  ``has_time`` adds
    letter ``0``; ``has_brackets`` adds one letter per unordered base pair
    ``(i, j)``, ``i <= j``.
    """

    d: int
    has_time: bool = False
    has_brackets: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "has_time", bool(self.has_time))
        object.__setattr__(self, "has_brackets", bool(self.has_brackets))
        if self.d < 1:
            raise ValueError(f"base dimension d must be a positive integer, got {self.d!r}")

    @property
    def n_brackets(self) -> int:
        return self.d * (self.d + 1) // 2 if self.has_brackets else 0

    @property
    def total_letters(self) -> int:
        return (1 if self.has_time else 0) + self.d + self.n_brackets

    @property
    def letters(self) -> Word:
        """All letters in canonical layout order (time, base, brackets)."""
        out: list[int] = []
        if self.has_time:
            out.append(0)
        out.extend(range(1, self.d + 1))
        if self.has_brackets:
            out.extend(range(self.d + 1, self.d + 1 + self.d * (self.d + 1) // 2))
        return tuple(out)

    def is_time(self, letter: int) -> bool:
        return self.has_time and letter == 0

    def is_base(self, letter: int) -> bool:
        return 1 <= letter <= self.d

    def is_bracket(self, letter: int) -> bool:
        return self.has_brackets and self.d < letter <= self.d + self.d * (self.d + 1) // 2

    def is_valid_letter(self, letter: int) -> bool:
        return self.is_time(letter) or self.is_base(letter) or self.is_bracket(letter)

    def bracket_letter(self, i: int, j: int) -> int | None:
        """Letter id of ``eps(i, j)``, or None when the bracket is absent.

        Symmetric in (i, j); absent whenever either index is not a base
        letter or the alphabet carries no brackets.
        """
        if not self.has_brackets or not (self.is_base(i) and self.is_base(j)):
            return None
        if i > j:
            i, j = j, i
        # 0-based rank of (i, j) in the order (1,1),(1,2),..,(1,d),(2,2),..
        rank = (i - 1) * (self.d + 1) - (i - 1) * i // 2 + (j - i)
        return self.d + 1 + rank

    def bracket_pair(self, letter: int) -> tuple[int, int]:
        """Base pair (i, j), i <= j, of a bracket letter."""
        if not self.is_bracket(letter):
            raise ValueError(f"letter {letter} is not a bracket letter of {self}")
        for i in range(1, self.d + 1):
            for j in range(i, self.d + 1):
                if self.bracket_letter(i, j) == letter:
                    return (i, j)
        raise AssertionError("unreachable")

    def index(self, letter: int) -> int:
        """Dense position of a letter in the canonical layout (array column)."""
        if not self.is_valid_letter(letter):
            raise ValueError(f"letter {letter} is not in {self}")
        pos = 0 if not self.has_time else 1
        if letter == 0:
            return 0
        if letter <= self.d:
            return pos + letter - 1
        return pos + self.d + (letter - self.d - 1)

    def validate_word(self, word: Word) -> None:
        for letter in word:
            if not self.is_valid_letter(letter):
                raise ValueError(f"word {word} contains letter {letter} not in {self}")

    def to_json_dict(self) -> dict:
        return {"d": self.d, "has_time": self.has_time, "has_brackets": self.has_brackets}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Alphabet":
        return cls(d=int(data["d"]), has_time=bool(data["has_time"]),
                   has_brackets=bool(data["has_brackets"]))


@lru_cache(maxsize=None)
def enumerate_words(alphabet: Alphabet, max_level: int) -> tuple[Word, ...]:
    """All words of length 0..max_level in graded-lex order.

    Count is the geometric sum (L^(max_level+1) - 1)/(L - 1) for L letters.
    (A dimension formula sometimes written with d in the denominator instead
    of L - 1 agrees with this count only for the time-extended bracket-free
    alphabet, L = d + 1; the geometric-sum count is the one used throughout.)
    """
    if max_level < 0:
        raise ValueError("max_level must be >= 0")
    letters = alphabet.letters
    words: list[Word] = [()]
    level: list[Word] = [()]
    for _ in range(max_level):
        level = [w + (letter,) for w in level for letter in letters]
        words.extend(level)
    return tuple(words)


class TensorPoly:
    """Element of the level-truncated tensor algebra: sparse map word -> coeff.

    Canonical form: exact zeros are dropped at construction, every word obeys
    the truncation level and the alphabet.  Instances are immutable; all
    operations return new objects.
    """

    __slots__ = ("alphabet", "trunc_level", "_terms")

    def __init__(self, alphabet: Alphabet, trunc_level: int,
                 terms: Mapping[Word, Coeff] | Iterable[tuple[Word, Coeff]] = ()):
        if trunc_level < 0:
            raise ValueError("trunc_level must be >= 0")
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[Word, Coeff] = {}
        for word, coeff in items:
            word = tuple(word)
            if len(word) > trunc_level:
                raise ValueError(
                    f"word {word} exceeds truncation level {trunc_level}")
            alphabet.validate_word(word)
            if coeff == 0:
                continue
            acc = clean.get(word, 0) + coeff
            if acc == 0:
                clean.pop(word, None)
            else:
                clean[word] = acc
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "trunc_level", trunc_level)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("TensorPoly is immutable")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, alphabet: Alphabet, trunc_level: int) -> "TensorPoly":
        return cls(alphabet, trunc_level)

    @classmethod
    def unit(cls, alphabet: Alphabet, trunc_level: int) -> "TensorPoly":
        return cls(alphabet, trunc_level, {(): 1})

    @classmethod
    def basis(cls, alphabet: Alphabet, trunc_level: int, word: Word) -> "TensorPoly":
        return cls(alphabet, trunc_level, {tuple(word): 1})

    # -- inspection -----------------------------------------------------------

    def coeff(self, word: Word) -> Coeff:
        return self._terms.get(tuple(word), 0)

    def items(self) -> Iterator[tuple[Word, Coeff]]:
        return iter(sorted(self._terms.items(), key=lambda kv: graded_lex_key(kv[0])))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def level_part(self, level: int) -> "TensorPoly":
        return TensorPoly(self.alphabet, self.trunc_level,
                          {w: c for w, c in self._terms.items() if len(w) == level})

    def max_level(self) -> int:
        """Largest word length with a nonzero coefficient (0 if zero poly)."""
        return max((len(w) for w in self._terms), default=0)

    def truncate(self, new_level: int) -> "TensorPoly":
        return TensorPoly(self.alphabet, new_level,
                          {w: c for w, c in self._terms.items() if len(w) <= new_level})

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorPoly):
            return NotImplemented
        return self.alphabet == other.alphabet and self._terms == other._terms

    def __hash__(self):
        return hash((self.alphabet, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        if not self._terms:
            return "TensorPoly(0)"
        parts = []
        for word, coeff in self.items():
            name = "e()" if not word else "e(" + ",".join(map(str, word)) + ")"
            parts.append(f"{coeff}*{name}")
        return "TensorPoly(" + " + ".join(parts) + ")"

    # -- linear structure -----------------------------------------------------

    def __add__(self, other: "TensorPoly") -> "TensorPoly":
        self._check_compatible(other)
        terms = dict(self._terms)
        for word, coeff in other._terms.items():
            terms[word] = terms.get(word, 0) + coeff
        return TensorPoly(self.alphabet, self.trunc_level, terms)

    def __sub__(self, other: "TensorPoly") -> "TensorPoly":
        return self + (-other)

    def __neg__(self) -> "TensorPoly":
        return self.scale(-1)

    def scale(self, scalar: Coeff) -> "TensorPoly":
        if scalar == 0:
            return TensorPoly(self.alphabet, self.trunc_level)
        return TensorPoly(self.alphabet, self.trunc_level,
                          {w: scalar * c for w, c in self._terms.items()})

    def __mul__(self, scalar: Coeff) -> "TensorPoly":
        return self.scale(scalar)

    def __rmul__(self, scalar: Coeff) -> "TensorPoly":
        return self.scale(scalar)

    def _check_compatible(self, other: "TensorPoly") -> None:
        if self.alphabet != other.alphabet:
            raise ValueError("alphabet mismatch")
        if self.trunc_level != other.trunc_level:
            raise ValueError(
                f"truncation level mismatch: {self.trunc_level} vs {other.trunc_level}")

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "trunc_level": self.trunc_level,
            "alphabet": self.alphabet.to_json_dict(),
            "terms": [{"word": list(w), "coeff": float(c)} for w, c in self.items()],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "TensorPoly":
        alphabet = Alphabet.from_json_dict(data["alphabet"])
        terms = {tuple(t["word"]): t["coeff"] for t in data["terms"]}
        return cls(alphabet, int(data["trunc_level"]), terms)

    @classmethod
    def from_json(cls, text: str) -> "TensorPoly":
        return cls.from_json_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Products and pairings
# ---------------------------------------------------------------------------

def concat(a: TensorPoly, b: TensorPoly) -> TensorPoly:
    """Graded concatenation (tensor) product, truncated at the common level."""
    a._check_compatible(b)
    n = a.trunc_level
    terms: dict[Word, Coeff] = {}
    for u, cu in a._terms.items():
        room = n - len(u)
        for v, cv in b._terms.items():
            if len(v) > room:
                continue
            w = u + v
            terms[w] = terms.get(w, 0) + cu * cv
    return TensorPoly(a.alphabet, n, terms)


def pair(ell: TensorPoly, a: TensorPoly) -> Coeff:
    """Bilinear pairing <ell, a> = sum over words of ell_I * a_I.

    Truncation levels may differ; the sum runs over the common support.
    """
    if ell.alphabet != a.alphabet:
        raise ValueError("alphabet mismatch")
    small, big = (ell._terms, a._terms) if len(ell._terms) <= len(a._terms) else (a._terms, ell._terms)
    total: Coeff = 0
    for word, coeff in small.items():
        other = big.get(word)
        if other is not None:
            total += coeff * other
    return total


@lru_cache(maxsize=None)
def _shuffle_terms(I: Word, J: Word) -> tuple[tuple[Word, int], ...]:
    # Back recursion on last letters:
    #   e_I sh e_J = (e_I' sh e_J) x e_{i_last} + (e_I sh e_J') x e_{j_last}
    if not I:
        return ((J, 1),)
    if not J:
        return ((I, 1),)
    acc: dict[Word, int] = {}
    for w, c in _shuffle_terms(I[:-1], J):
        w2 = w + (I[-1],)
        acc[w2] = acc.get(w2, 0) + c
    for w, c in _shuffle_terms(I, J[:-1]):
        w2 = w + (J[-1],)
        acc[w2] = acc.get(w2, 0) + c
    return tuple(sorted(acc.items()))


@lru_cache(maxsize=None)
def _quasi_shuffle_terms(I: Word, J: Word, alphabet: Alphabet) -> tuple[tuple[Word, int], ...]:
    # Shuffle recursion plus the contraction term
    #   (e_I' qsh e_J') x eps(i_last, j_last),
    # dropped whenever the bracket letter is absent.
    if not I:
        return ((J, 1),)
    if not J:
        return ((I, 1),)
    acc: dict[Word, int] = {}
    for w, c in _quasi_shuffle_terms(I[:-1], J, alphabet):
        w2 = w + (I[-1],)
        acc[w2] = acc.get(w2, 0) + c
    for w, c in _quasi_shuffle_terms(I, J[:-1], alphabet):
        w2 = w + (J[-1],)
        acc[w2] = acc.get(w2, 0) + c
    eps = alphabet.bracket_letter(I[-1], J[-1])
    if eps is not None:
        for w, c in _quasi_shuffle_terms(I[:-1], J[:-1], alphabet):
            w2 = w + (eps,)
            acc[w2] = acc.get(w2, 0) + c
    return tuple(sorted(acc.items()))


def _infer_alphabet(letters: Iterable[int]) -> Alphabet:
    letters = set(letters)
    has_time = 0 in letters
    d = max((letter for letter in letters if letter > 0), default=1)
    return Alphabet(d=d, has_time=has_time, has_brackets=False)


def shuffle(I: Word, J: Word, alphabet: Alphabet | None = None,
            trunc_level: int | None = None) -> TensorPoly:
    """Shuffle product of two basis words: the sum over all interleavings.

    Integer coefficients, homogeneous of degree ``len(I) + len(J)``; the
    coefficient sum is ``binom(len(I)+len(J), len(I))``.  When no alphabet is
    given, the smallest bracket-free alphabet containing the letters is used.
    """
    I, J = tuple(I), tuple(J)
    if alphabet is None:
        alphabet = _infer_alphabet(I + J)
    if trunc_level is None:
        trunc_level = len(I) + len(J)
    return TensorPoly(alphabet, trunc_level, dict(_shuffle_terms(I, J)))


def quasi_shuffle(I: Word, J: Word, alphabet: Alphabet,
                  trunc_level: int | None = None) -> TensorPoly:
    """Quasi-shuffle product: shuffle recursion plus bracket contractions.

    The contraction appends ``eps(i, j)`` for the two consumed last letters
    and is dropped whenever that bracket is absent (time or bracket letters,
    or a bracket-free alphabet); with every contraction absent the result
    equals the plain shuffle.
    """
    I, J = tuple(I), tuple(J)
    alphabet.validate_word(I)
    alphabet.validate_word(J)
    if trunc_level is None:
        trunc_level = len(I) + len(J)
    return TensorPoly(alphabet, trunc_level, dict(_quasi_shuffle_terms(I, J, alphabet)))


def group_inverse(a: TensorPoly) -> TensorPoly:
    """Inverse of a group-like element (unit scalar part) under concat.

    Computed as the truncated Neumann series sum_k (unit - a)^k, exact for
    k up to the truncation level because (unit - a) has zero scalar part.
    """
    if a.coeff(()) != 1:
        raise ValueError(
            f"group_inverse requires scalar coefficient 1, got {a.coeff(())!r}")
    unit = TensorPoly.unit(a.alphabet, a.trunc_level)
    x = unit - a
    acc = unit
    power = unit
    for _ in range(a.trunc_level):
        power = concat(power, x)
        if not power:
            break
        acc = acc + power
    return acc


@lru_cache(maxsize=None)
def _ito_strat_terms(I: Word, alphabet: Alphabet) -> tuple[tuple[Word, Coeff], ...]:
    # l^() = e_(), l^(i) = e_(i),
    # l^I = l^I' x e_{i_last} - 1/2 l^(I')' x eps(i_prev, i_last).
    if len(I) <= 1:
        return ((I, 1),)
    prev = I[:-1]
    acc: dict[Word, Coeff] = {}
    for w, c in _ito_strat_terms(prev, alphabet):
        w2 = w + (I[-1],)
        acc[w2] = acc.get(w2, 0) + c
    eps = alphabet.bracket_letter(prev[-1], I[-1])
    if eps is not None:
        for w, c in _ito_strat_terms(prev[:-1], alphabet):
            w2 = w + (eps,)
            acc[w2] = acc.get(w2, 0) - Fraction(1, 2) * c
    return tuple((w, c) for w, c in sorted(acc.items()) if c != 0)


def ito_strat_functional(I: Word, alphabet: Alphabet) -> TensorPoly:
    """Functional l^I rewriting an Ito-signature coordinate in Stratonovich terms.

    Pairing l^I against the Stratonovich signature of the bracket-augmented
    path reproduces <e_I, Ito signature> in the refinement limit.  Recursion:
    l^I = l^I' x e_{i_last} - 1/2 l^(I')' x eps(i_prev, i_last), with bracket
    terms dropped when absent; homogeneous degrees range between
    ceil(len(I)/2) and len(I).  Coefficients are exact dyadic rationals.
    """
    I = tuple(I)
    alphabet.validate_word(I)
    return TensorPoly(alphabet, max(len(I), 0), dict(_ito_strat_terms(I, alphabet)))
