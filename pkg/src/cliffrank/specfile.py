"""Plain-text curve and tower descriptions.

Curve files::

    # y^3 = x^5 + 2x^2 - x + 3
    char 32029
    n 3
    f 3 -1 2 0 0 1
    divisor D = random 3 7 : 1
    divisor E = finite 5 11 : 2, branch 0 : 1, infinity 0 : -1, fiber 9 : 1

``f`` lists coefficients from the constant term up.  Divisor terms are
``finite X Y``, ``branch X``, ``infinity I``, ``fiber X`` (all places over
x = X), ``polar`` (the polar divisor of x), ``canonical`` and
``random COUNT SEED`` (distinct sampled finite places), each followed by
``: multiplicity``.

Tower files start with the line ``tower`` followed by one line per layer::

    layer DEGREE | E*COUNT [E*COUNT ...] | TWIST TWIST ...

giving the degree of the step, its ramification profile and the twists
of the step's own pushforward.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .curve import CurveModel, Divisor, PushforwardTower, CurveError
from .exactla import field_for


class SpecError(ValueError):
    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


@dataclass
class CurveSpec:
    path: str
    char: int
    n: int
    f: list
    divisors: dict = field(default_factory=dict)   # name -> (lineno, [(kind, args, mult)])


@dataclass
class TowerSpec:
    path: str
    layers: list        # (degree, profile, twists)


def _strip(line):
    return line.split("#", 1)[0].strip()


def _number(tok, path, lineno):
    try:
        return int(tok)
    except ValueError:
        try:
            return Fraction(tok)
        except ValueError:
            raise SpecError(path, lineno, f"not a number: {tok!r}") from None


def parse_text(text, path="<spec>"):
    lines = [(i + 1, _strip(l)) for i, l in enumerate(text.splitlines())]
    lines = [(i, l) for i, l in lines if l]
    if lines and lines[0][1] == "tower":
        return _parse_tower(lines[1:], path)
    return _parse_curve(lines, path)


def parse_file(path):
    with open(path) as fh:
        return parse_text(fh.read(), str(path))


_TERM_ARITY = {"finite": 2, "branch": 1, "infinity": 1, "fiber": 1, "polar": 0,
               "canonical": 0, "random": 2}


def _parse_curve(lines, path):
    char = n = f = None
    divisors = {}
    for lineno, line in lines:
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "char":
            char = _number(rest, path, lineno)
            if not isinstance(char, int) or char < 0:
                raise SpecError(path, lineno, "char must be 0 or a prime")
        elif key == "n":
            n = _number(rest, path, lineno)
            if not isinstance(n, int) or n < 2:
                raise SpecError(path, lineno, "n must be an integer >= 2")
        elif key == "f":
            toks = rest.split()
            if not toks:
                raise SpecError(path, lineno, "f needs coefficients")
            f = [_number(t, path, lineno) for t in toks]
        elif key == "divisor":
            name, eq, body = rest.partition("=")
            name = name.strip()
            if not eq or not name.isidentifier():
                raise SpecError(path, lineno, "expected 'divisor NAME = terms'")
            if name in divisors:
                raise SpecError(path, lineno, f"divisor {name} defined twice")
            divisors[name] = (lineno, _parse_terms(body, path, lineno))
        else:
            raise SpecError(path, lineno, f"unknown keyword {key!r}")
    for what, val in (("char", char), ("n", n), ("f", f)):
        if val is None:
            raise SpecError(path, lines[-1][0] if lines else 0, f"missing '{what}' line")
    return CurveSpec(path, char, n, f, divisors)


def _parse_terms(body, path, lineno):
    terms = []
    for chunk in body.split(","):
        chunk = chunk.strip()
        if not chunk:
            raise SpecError(path, lineno, "empty divisor term")
        place, colon, mult = chunk.partition(":")
        if not colon:
            raise SpecError(path, lineno, f"term {chunk!r} lacks ': multiplicity'")
        toks = place.split()
        if not toks or toks[0] not in _TERM_ARITY:
            raise SpecError(path, lineno, f"unknown place kind in {chunk!r}")
        kind = toks[0]
        if len(toks) - 1 != _TERM_ARITY[kind]:
            raise SpecError(path, lineno, f"{kind} takes {_TERM_ARITY[kind]} arguments")
        args = [_number(t, path, lineno) for t in toks[1:]]
        m = _number(mult.strip(), path, lineno)
        if not isinstance(m, int):
            raise SpecError(path, lineno, "multiplicities are integers")
        terms.append((kind, args, m))
    return terms


def _parse_tower(lines, path):
    layers = []
    for lineno, line in lines:
        key, _, rest = line.partition(" ")
        if key != "layer":
            raise SpecError(path, lineno, f"unknown keyword {key!r} in tower file")
        parts = [p.strip() for p in rest.split("|")]
        if len(parts) != 3:
            raise SpecError(path, lineno, "expected 'layer DEGREE | PROFILE | TWISTS'")
        degree = _number(parts[0], path, lineno)
        profile = []
        for tok in parts[1].split():
            e, star, count = tok.partition("*")
            e = _number(e, path, lineno)
            count = _number(count, path, lineno) if star else 1
            profile.extend([e] * count)
        twists = tuple(_number(t, path, lineno) for t in parts[2].split())
        layers.append((degree, tuple(profile), twists))
    if not layers:
        raise SpecError(path, 1, "tower has no layers")
    return TowerSpec(path, layers)


def build_tower(spec):
    degree, profile, twists = spec.layers[0]
    T = PushforwardTower((tuple(sorted(twists)),), (degree,), (profile,))
    for degree, profile, twists in spec.layers[1:]:
        T = T.extend(twists, degree, profile)
    return T


def build_curve(spec, prime=None):
    """CurveModel and named divisors; ``prime`` overrides the characteristic."""
    char = spec.char if prime is None else prime
    F = field_for(char)
    try:
        C = CurveModel(F, spec.n, spec.f)
    except CurveError as exc:
        raise SpecError(spec.path, 0, f"invalid curve over characteristic {char}: {exc}") from None
    divisors = {}
    for name, (lineno, terms) in spec.divisors.items():
        try:
            divisors[name] = _build_divisor(C, terms)
        except (CurveError, ValueError) as exc:
            raise SpecError(spec.path, lineno, f"divisor {name}: {exc}") from None
    return C, divisors


def _build_divisor(C, terms):
    D = Divisor()
    for kind, args, m in terms:
        if kind == "finite":
            part = Divisor.of(C.finite_place(*args))
        elif kind == "branch":
            part = Divisor.of(C.branch_place(args[0]))
        elif kind == "infinity":
            part = Divisor.of(C.infinite_place(args[0]))
        elif kind == "fiber":
            part = C.fiber_divisor(args[0])
        elif kind == "polar":
            part = C.infinity_divisor()
        elif kind == "canonical":
            part = C.canonical_divisor()
        else:
            count, seed = args
            part = Divisor.of(*C.sample_places(count, seed, distinct_x=True))
        D = D + part * m
    return D
