"""Group-theoretic layer: words in the generators and their exact actions.

Parameter-level actions are exact integer affine maps carried together with
the sign actions on eta and the independent variable.  The composition-order
convention for words is not assumed: it is calibrated against the printed
parameter shift of the translation word t1 = s1 s2 s1 s0 and recorded in the
report.  Relations between the generators are certified exactly on
parameters and probabilistically (exact rational sampling, Schwartz-Zippel
style) on the birational actions themselves, where symbolic composition
would swell without bound.

Relation list: the three generators are involutions with braid orders 4, 4
between adjacent pairs and 2 between the ends (two double bonds, ends
non-adjacent); the diagram automorphism squares to the identity, commutes
with the middle node and swaps the end nodes.  The named type fixes the
diagram; the relation list itself is an assumption recorded in reports.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .models import load_map, load_model
from .ring import SingularPointError, evaluate
from .verify import VerificationReport, _Timer

Matrix3 = tuple[tuple[int, int, int], ...]
Vec3 = tuple[int, int, int]

_IDENTITY3: Matrix3 = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
_ZERO3: Vec3 = (0, 0, 0)

CONTEXTS = ("th1", "th2")
_GENERATOR_MAPS = {
    "th1": {"s0": "s0_5d", "s1": "s1_5d", "s2": "s2_5d"},
    "th2": {"s0": "s0_4d", "s1": "s1_4d", "s2": "s2_4d", "pi": "pi_4d"},
}
_SYSTEM_OF_CONTEXT = {"th1": "five_dim", "th2": "ham_4d"}

DEFAULT_SAMPLES = 20
DEFAULT_SEED = 20321


class CalibrationError(Exception):
    """Neither (or both) composition orders reproduce the printed shift."""


class WordError(ValueError):
    pass


@dataclass(frozen=True)
class GroupWord:
    letters: tuple[str, ...]
    context: str  # th1 | th2

    def __post_init__(self):
        if self.context not in CONTEXTS:
            raise WordError(f"unknown context {self.context!r}")
        allowed = set(_GENERATOR_MAPS[self.context])
        for letter in self.letters:
            if letter not in allowed:
                raise WordError(
                    f"letter {letter!r} not a generator in context {self.context}"
                )

    def __str__(self) -> str:
        return " ".join(self.letters) if self.letters else "(empty)"


def parse_word(text: str, context: str = "th1") -> GroupWord:
    letters = []
    for raw in text.split():
        letter = {"π": "pi"}.get(raw, raw)
        letters.append(letter)
    return GroupWord(tuple(letters), context)


@dataclass(frozen=True)
class ParameterAction:
    """Affine action alpha -> M*alpha + v with sign actions on eta and time."""

    matrix: Matrix3
    offset: Vec3
    eta_sign: int
    indep_sign: int

    @staticmethod
    def identity() -> "ParameterAction":
        return ParameterAction(_IDENTITY3, _ZERO3, +1, +1)

    def apply(self, alphas: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return tuple(
            sum((Fraction(c) * a for c, a in zip(row, alphas)), Fraction(off))
            for row, off in zip(self.matrix, self.offset)
        )

    def then(self, after: "ParameterAction") -> "ParameterAction":
        """Composite action: first self, then ``after``."""
        matrix = tuple(
            tuple(
                sum(after.matrix[i][k] * self.matrix[k][j] for k in range(3))
                for j in range(3)
            )
            for i in range(3)
        )
        offset = tuple(
            sum(after.matrix[i][k] * self.offset[k] for k in range(3))
            + after.offset[i]
            for i in range(3)
        )
        return ParameterAction(
            matrix, offset,
            self.eta_sign * after.eta_sign,
            self.indep_sign * after.indep_sign,
        )

    def is_identity(self) -> bool:
        return (
            self.matrix == _IDENTITY3
            and self.offset == _ZERO3
            and self.eta_sign == 1
            and self.indep_sign == 1
        )

    def preserves_normalization(self) -> bool:
        """Column sums 1 and zero offset sum keep alpha0+alpha1+alpha2 = 1."""
        return all(
            sum(self.matrix[i][j] for i in range(3)) == 1 for j in range(3)
        ) and sum(self.offset) == 0


def generator_action(letter: str, context: str) -> ParameterAction:
    bmap = load_map(_GENERATOR_MAPS[context][letter], variant="resolved")
    return ParameterAction(
        bmap.param_matrix, bmap.param_offset, bmap.eta_sign, bmap.indep_sign
    )


_T1_WORD = ("s1", "s2", "s1", "s0")
_T1_SHIFT: Vec3 = (-2, 2, 0)
_T2_SHIFT: Vec3 = (0, -2, 2)

_CONVENTION: Optional[str] = None


def _compose(letters: Iterable[str], context: str, order: str) -> ParameterAction:
    seq = list(letters)
    if order == "right-to-left":
        seq = seq[::-1]
    action = ParameterAction.identity()
    for letter in seq:
        action = action.then(generator_action(letter, context))
    return action


def _shift_on_hyperplane(action: ParameterAction) -> Optional[Vec3]:
    """Translation vector when the action restricts to one on the hyperplane.

    The raw matrices are linear, so "pure translation" means M fixes every
    direction of the normalization plane (vectors with zero coordinate sum);
    the shift is then the displacement of any base point of the plane.
    """
    if not action.preserves_normalization():
        return None
    for delta in ((1, -1, 0), (0, 1, -1)):
        image = tuple(
            sum(action.matrix[i][j] * delta[j] for j in range(3)) for i in range(3)
        )
        if image != delta:
            return None
    base = (Fraction(1), Fraction(0), Fraction(0))
    moved = action.apply(base)
    shift = tuple(m - b for m, b in zip(moved, base))
    assert all(s.denominator == 1 for s in shift)
    return tuple(int(s) for s in shift)


def calibrate_convention() -> str:
    """Word-composition order that reproduces the printed shift of t1.

    Tries both readings of s1 s2 s1 s0 and returns the unique one whose
    hyperplane action is the translation by (-2, 2, 0); raises
    :class:`CalibrationError` on ambiguity or mismatch.
    """
    global _CONVENTION
    if _CONVENTION is not None:
        return _CONVENTION
    matches = []
    for order in ("left-to-right", "right-to-left"):
        action = _compose(_T1_WORD, "th1", order)
        if _shift_on_hyperplane(action) == _T1_SHIFT:
            matches.append(order)
    if len(matches) != 1:
        raise CalibrationError(
            f"composition order calibration failed: candidates {matches}"
        )
    _CONVENTION = matches[0]
    return _CONVENTION


def parameter_action(word: GroupWord) -> ParameterAction:
    """Exact integer action of a word under the calibrated convention."""
    return _compose(word.letters, word.context, calibrate_convention())


@dataclass(frozen=True)
class TranslationShift:
    vector: Vec3
    eta_sign: int
    indep_sign: int


def translation_shift(word: GroupWord) -> Optional[TranslationShift]:
    """Shift vector when the word acts on parameters as a pure translation."""
    action = parameter_action(word)
    shift = _shift_on_hyperplane(action)
    if shift is None:
        return None
    return TranslationShift(shift, action.eta_sign, action.indep_sign)


# -- exact point actions -------------------------------------------------------------


@dataclass(frozen=True)
class PhasePoint:
    """Exact rational point: state values, parameters, eta, independent var."""

    state: Mapping[str, Fraction]
    alphas: tuple[Fraction, Fraction, Fraction]
    eta: Fraction
    indep: Fraction

    def as_bindings(self, indep_name: str) -> dict[str, Fraction]:
        values = dict(self.state)
        values["alpha0"], values["alpha1"], values["alpha2"] = self.alphas
        values["eta"] = self.eta
        values[indep_name] = self.indep
        return values


def _apply_generator(point: PhasePoint, letter: str, context: str) -> PhasePoint:
    bmap = load_map(_GENERATOR_MAPS[context][letter], variant="resolved")
    system = load_model(_SYSTEM_OF_CONTEXT[context])
    bindings = point.as_bindings(system.indep)
    try:
        new_state = {
            name: evaluate(expr, bindings) for name, expr in bmap.var_map.items()
        }
    except SingularPointError as exc:
        raise SingularPointError(f"generator {letter}: {exc}") from exc
    action = ParameterAction(
        bmap.param_matrix, bmap.param_offset, bmap.eta_sign, bmap.indep_sign
    )
    return PhasePoint(
        state=new_state,
        alphas=action.apply(point.alphas),
        eta=point.eta * bmap.eta_sign,
        indep=point.indep * bmap.indep_sign,
    )


def apply_word_to_point(word: GroupWord, point: PhasePoint) -> PhasePoint:
    """Exact image of a point, generator by generator.

    Raises :class:`SingularPointError` naming the failing generator when an
    intermediate denominator vanishes.
    """
    letters = list(word.letters)
    if calibrate_convention() == "right-to-left":
        letters = letters[::-1]
    for letter in letters:
        point = _apply_generator(point, letter, word.context)
    return point


def random_point(rng: random.Random, context: str) -> PhasePoint:
    """Random exact point on the normalization hyperplane, away from zero."""
    system = load_model(_SYSTEM_OF_CONTEXT[context])

    def frac() -> Fraction:
        num = 0
        while num == 0:
            num = rng.randint(-50, 50)
        return Fraction(num, rng.randint(1, 50))

    a0, a2 = frac(), frac()
    return PhasePoint(
        state={name: frac() for name in system.state},
        alphas=(a0, 1 - a0 - a2, a2),
        eta=frac(),
        indep=frac(),
    )


def _points_agree(a: PhasePoint, b: PhasePoint) -> bool:
    return (
        a.state == b.state
        and a.alphas == b.alphas
        and a.eta == b.eta
        and a.indep == b.indep
    )


def _frac(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def format_point(point: PhasePoint, context: str) -> str:
    """Structured one-line dump with exact rationals as num/den pairs."""
    system = load_model(_SYSTEM_OF_CONTEXT[context])
    state = " ".join(f"{n}={_frac(point.state[n])}" for n in system.state)
    alphas = " ".join(
        f"alpha{i}={_frac(a)}" for i, a in enumerate(point.alphas)
    )
    return (
        f"{state} | {alphas} | eta={_frac(point.eta)} | "
        f"{system.indep}={_frac(point.indep)}"
    )


# -- relations ---------------------------------------------------------------------------

# (name, left word, right word); the empty right word is the identity
RELATIONS: dict[str, list[tuple[str, tuple[str, ...], tuple[str, ...]]]] = {
    "th1": [
        ("s0^2", ("s0", "s0"), ()),
        ("s1^2", ("s1", "s1"), ()),
        ("s2^2", ("s2", "s2"), ()),
        ("(s0 s1)^4", ("s0", "s1") * 4, ()),
        ("(s1 s2)^4", ("s1", "s2") * 4, ()),
        ("(s0 s2)^2", ("s0", "s2") * 2, ()),
    ],
    "th2": [
        ("s0^2", ("s0", "s0"), ()),
        ("s1^2", ("s1", "s1"), ()),
        ("s2^2", ("s2", "s2"), ()),
        ("(s0 s1)^4", ("s0", "s1") * 4, ()),
        ("(s1 s2)^4", ("s1", "s2") * 4, ()),
        ("(s0 s2)^2", ("s0", "s2") * 2, ()),
        ("pi^2", ("pi", "pi"), ()),
        ("pi s0 pi = s2", ("pi", "s0", "pi"), ("s2",)),
        ("pi s1 pi = s1", ("pi", "s1", "pi"), ("s1",)),
    ],
}


def _relation_holds_on_parameters(
    left: tuple[str, ...], right: tuple[str, ...], context: str
) -> bool:
    la = parameter_action(GroupWord(left, context))
    ra = parameter_action(GroupWord(right, context))
    return la == ra


def _relation_holds_at_samples(
    left: tuple[str, ...],
    right: tuple[str, ...],
    context: str,
    sample_count: int,
    rng: random.Random,
    max_resamples: int = 100,
) -> bool:
    lword = GroupWord(left, context)
    rword = GroupWord(right, context)
    done = 0
    failures = 0
    while done < sample_count:
        point = random_point(rng, context)
        try:
            li = apply_word_to_point(lword, point)
            ri = apply_word_to_point(rword, point)
        except SingularPointError:
            failures += 1
            if failures >= max_resamples:
                raise SingularPointError(
                    f"persistent singular sampling for relation over {context}"
                )
            continue
        if not _points_agree(li, ri):
            return False
        done += 1
    return True


def verify_group_relations(
    sample_count: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED
) -> list[VerificationReport]:
    """Certify the relation list in both contexts.

    Parameter-level verdicts are exact integer identities (including the eta
    and time signs); map-level verdicts evaluate both sides at ``sample_count``
    random exact rational points and are labeled as sampled.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    convention = calibrate_convention()
    rng = random.Random(seed)
    reports = []
    for context in CONTEXTS:
        for name, left, right in RELATIONS[context]:
            with _Timer() as tm:
                exact = _relation_holds_on_parameters(left, right, context)
                sampled = exact and _relation_holds_at_samples(
                    left, right, context, sample_count, rng
                )
            reports.append(
                VerificationReport(
                    check_id=f"relation:{context}:{name}",
                    status="pass" if (exact and sampled) else "fail",
                    residuals=[
                        ("parameters", "zero" if exact else "mismatch"),
                        ("map_samples", "zero" if sampled else "mismatch"),
                    ],
                    duration_ms=tm.ms,
                    detail=f"{sample_count} samples, seed {seed}, {convention}",
                    sampled=True,
                    seed=seed,
                )
            )
    return reports


def translation_report() -> VerificationReport:
    """Shifts of the translation words against their printed values.

    Also reports (without asserting) whether conjugating t1 by the diagram
    automorphism reproduces t2; the computed answer is its inverse.
    """
    with _Timer() as tm:
        convention = calibrate_convention()
        t1 = parse_word("s1 s2 s1 s0", "th1")
        t2 = parse_word("s1 s1 s2 s1 s0 s1", "th1")
        r1 = translation_shift(t1)
        r2 = translation_shift(t2)
        ok = (
            r1 is not None and r1.vector == _T1_SHIFT
            and r1.eta_sign == 1 and r1.indep_sign == 1
            and r2 is not None and r2.vector == _T2_SHIFT
            and r2.eta_sign == 1 and r2.indep_sign == 1
        )
        conj = translation_shift(parse_word("pi s1 s2 s1 s0 pi", "th2"))
        conj_note = (
            f"pi t1 pi shift {conj.vector}" if conj is not None
            else "pi t1 pi is not a translation"
        )
    return VerificationReport(
        check_id="translations",
        status="pass" if ok else "fail",
        residuals=[
            ("t1", str(r1.vector) if r1 else "not a translation"),
            ("t2", str(r2.vector) if r2 else "not a translation"),
        ],
        duration_ms=tm.ms,
        detail=f"{convention}; {conj_note} (reported, not asserted)",
    )
