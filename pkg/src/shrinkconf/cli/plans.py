"""Line-oriented experiment plans.

Format::

    # comment
    [plan cplus_p3]
    procedure  = pospart
    p          = 3
    alpha      = 0.05
    a          = astar
    theta_grid = 0, 1, 2, 4
    n_rep      = 100000
    seed       = 7
    engine     = both
    csv        = out/cplus.csv
    svg        = out/cplus.svg

Every plan needs ``procedure``, ``n_rep``, ``seed`` and ``csv``. Which other
keys apply depends on the procedure, see ``PROCEDURE_KEYS``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from ..regions import PROCEDURES, ConfigurationError, make_procedure

VARIANCE_PROCEDURES = ("tate_klett", "cohen")
SELECTION_PROCEDURES = ("selection",)
ENGINES = ("mc", "quadrature", "both")
RULES = ("naive", "he_selected")

# procedure-specific keys, besides the common ones
PROCEDURE_KEYS = {
    "usual": (),
    "pospart": ("a",),
    "eb": (),
    "he": ("coord",),
    "faith": ("a", "b"),
    "tseng_brown_B": ("tau2",),
    "tseng_brown_TB": ("A", "B"),
    "samworth": ("a", "w0", "w2"),
    "hpd": ("tau2", "form"),
    "tate_klett": ("n",),
    "cohen": ("n", "k", "a_prime"),
    "selection": ("mu", "tau2", "ranks", "rule", "bonferroni"),
}
ALL_PROCEDURES = tuple(PROCEDURE_KEYS)
COMMON_KEYS = ("procedure", "p", "alpha", "theta_grid", "n_rep", "seed", "engine", "csv", "svg")
KNOWN_KEYS = COMMON_KEYS + tuple(sorted({k for ks in PROCEDURE_KEYS.values() for k in ks}))

_HEADER = re.compile(r"^\[plan\s+([^\]\s]+)\s*\]$")
_BAD_HEADER = re.compile(r"^\[.*\]?$")


class PlanError(ValueError):
    """One or more plan-file problems; ``errors`` holds (line, message) pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(f"line {ln}: {msg}" for ln, msg in self.errors))


@dataclass(frozen=True)
class SimulationPlan:
    plan_id: str
    procedure: str
    p: int | None = None
    alpha: float = 0.05
    params: tuple = ()  # sorted (key, value) pairs
    theta_grid: tuple = ()
    n_rep: int = 1000
    seed: int = 0
    engine: str = "mc"
    csv: str = ""
    svg: str | None = None
    line: int = field(default=0, compare=False)

    @property
    def kind(self) -> str:
        if self.procedure in VARIANCE_PROCEDURES:
            return "variance"
        if self.procedure in SELECTION_PROCEDURES:
            return "selection"
        return "region"

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    def methods(self) -> tuple:
        return ("mc", "quadrature") if self.engine == "both" else (self.engine,)

    def build(self):
        """The region procedure for region plans (``a = astar`` resolved)."""
        if self.kind != "region":
            raise TypeError(f"{self.procedure} plans have no region procedure")
        kw = self.param_dict
        if kw.get("a") == "astar":
            from ..evaluate.solvers import astar_solve
            kw["a"] = astar_solve(self.p, self.alpha)
        if self.procedure == "samworth" and ("w0" not in kw or "w2" not in kw):
            from ..evaluate.solvers import w_alpha_taylor
            wa = w_alpha_taylor(self.p, self.alpha, kw.get("a"))
            kw.setdefault("w0", wa.w0)
            kw.setdefault("w2", wa.w2)
        return make_procedure(self.procedure, self.p, self.alpha, **kw)


# --- value parsers -------------------------------------------------------------

def _int(v):
    if not re.fullmatch(r"[+-]?\d+", v):
        raise ValueError(f"malformed integer {v!r}")
    return int(v)


def _float(v):
    try:
        x = float(v)
    except ValueError:
        raise ValueError(f"malformed number {v!r}") from None
    if not math.isfinite(x):
        raise ValueError(f"number must be finite, got {v!r}")
    return x


def _float_list(v):
    items = [s.strip() for s in v.split(",")]
    if not items or any(s == "" for s in items):
        raise ValueError(f"malformed list {v!r}")
    return tuple(_float(s) for s in items)


def _int_list(v):
    items = [s.strip() for s in v.split(",")]
    if not items or any(s == "" for s in items):
        raise ValueError(f"malformed list {v!r}")
    return tuple(_int(s) for s in items)


def _bool(v):
    low = v.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"malformed boolean {v!r}")


def _choice(options):
    def parse(v):
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {v!r}")
        return v
    return parse


def _path(v):
    if not v:
        raise ValueError("empty path")
    return v


def _a_value(v):
    return "astar" if v == "astar" else _float(v)


def _check(pred, msg):
    def wrap(parse):
        def run(v):
            x = parse(v)
            if not pred(x):
                raise ValueError(f"{msg}, got {v}")
            return x
        return run
    return wrap


_PARSERS = {
    "procedure": _choice(ALL_PROCEDURES),
    "p": _check(lambda x: x >= 1, "p must be >= 1")(_int),
    "alpha": _check(lambda x: 0 < x < 1, "alpha must lie in (0, 1)")(_float),
    "theta_grid": _check(lambda xs: all(x >= 0 for x in xs), "theta_grid entries must be >= 0")(_float_list),
    "n_rep": _check(lambda x: x >= 1, "n_rep must be >= 1")(_int),
    "seed": _check(lambda x: 0 <= x < 2 ** 64, "seed must be a 64-bit unsigned integer")(_int),
    "engine": _choice(ENGINES),
    "csv": _path,
    "svg": _path,
    "a": _a_value,
    "b": _check(lambda x: x > 0, "b must be > 0")(_float),
    "coord": _check(lambda x: x >= 0, "coord must be >= 0")(_int),
    "tau2": _check(lambda x: x >= 0, "tau2 must be >= 0")(_float),
    "A": _check(lambda x: x >= 0, "A must be >= 0")(_float),
    "B": _check(lambda x: x > 0, "B must be > 0")(_float),
    "w0": _check(lambda x: x > 0, "w0 must be > 0")(_float),
    "w2": _float,
    "form": _choice(("hpd", "linear")),
    "n": _check(lambda x: x >= 2, "n must be >= 2")(_int),
    "k": _check(lambda x: x > 0, "k must be > 0")(_float),
    "a_prime": _check(lambda x: x > 0, "a_prime must be > 0")(_float),
    "mu": _float,
    "ranks": _check(lambda xs: len(set(xs)) == len(xs), "ranks must be distinct")(_int_list),
    "rule": _choice(RULES),
    "bonferroni": _bool,
}


# --- parsing -----------------------------------------------------------------------

def _finish(pid, header_line, entries, errors):
    """Validate one section's {key: (line, value)} and build the plan."""
    if "procedure" not in entries:
        errors.append((header_line, f"plan {pid}: missing required key 'procedure'"))
        return None
    proc = entries["procedure"][1]
    allowed = set(COMMON_KEYS) | set(PROCEDURE_KEYS[proc])
    ok = True
    for key, (ln, _) in entries.items():
        if key not in allowed:
            errors.append((ln, f"key {key!r} does not apply to procedure {proc!r}"))
            ok = False
    kind = "variance" if proc in VARIANCE_PROCEDURES else "selection" if proc in SELECTION_PROCEDURES else "region"
    required = ["n_rep", "seed", "csv"]
    if kind == "region":
        required += ["p", "theta_grid"]
    elif kind == "variance":
        required += ["n", "theta_grid"]
    else:
        required += ["p"]
    for key in required:
        if key not in entries:
            errors.append((header_line, f"plan {pid}: missing required key {key!r}"))
            ok = False
    if not ok:
        return None

    def get(key, default=None):
        return entries[key][1] if key in entries else default

    engine = get("engine", "mc")
    if engine != "mc" and kind != "region":
        errors.append((entries["engine"][0], f"engine {engine!r} needs a region procedure; {proc} is mc only"))
        return None
    params = tuple(sorted((k, v) for k, (_, v) in entries.items() if k in PROCEDURE_KEYS[proc]))
    plan = SimulationPlan(
        plan_id=pid, procedure=proc, p=get("p"), alpha=get("alpha", 0.05), params=params,
        theta_grid=get("theta_grid", ()), n_rep=get("n_rep"), seed=get("seed"), engine=engine,
        csv=get("csv"), svg=get("svg"), line=header_line,
    )
    try:
        _validate(plan)
    except (ConfigurationError, ValueError) as exc:
        errors.append((header_line, f"plan {pid}: {exc}"))
        return None
    return plan


def _validate(plan: SimulationPlan):
    kw = plan.param_dict
    if plan.kind == "region":
        if "quadrature" in plan.methods():
            cls = PROCEDURES[plan.procedure]
            if not cls.explicit:
                raise ConfigurationError(f"quadrature engine needs a sphere procedure, not {plan.procedure!r}")
            if plan.p < 2:
                raise ConfigurationError("quadrature engine needs p >= 2")
        if kw.get("a") == "astar" and plan.p < 3:
            raise ConfigurationError("a = astar needs p >= 3")
        trial = {k: (1.0 if v == "astar" else v) for k, v in kw.items()}
        if plan.procedure == "samworth":
            trial.setdefault("w0", 1.0)
            trial.setdefault("w2", 0.0)
        make_procedure(plan.procedure, plan.p, plan.alpha, **trial)
        if plan.procedure == "he" and kw.get("coord", 0) >= plan.p:
            raise ConfigurationError("coord must be < p")
    elif plan.kind == "variance":
        from ..regions import cohen_multipliers, default_a_prime, tate_klett_interval
        tate_klett_interval(kw["n"], plan.alpha)
        if plan.procedure == "cohen":
            a_prime = kw["a_prime"] if "a_prime" in kw else default_a_prime(kw["n"], plan.alpha)
            cohen_multipliers(kw["n"], plan.alpha, a_prime)
    else:
        scenario_from_plan(plan)
        if kw.get("rule", "naive") == "he_selected" and plan.p < 3:
            raise ConfigurationError("he_selected needs p >= 3")


def scenario_from_plan(plan: SimulationPlan):
    from ..selection import SelectionScenario
    kw = plan.param_dict
    return SelectionScenario(p=plan.p, mu=kw.get("mu", 0.0), tau2=kw.get("tau2", 1.0),
                             ranks=kw.get("ranks", (plan.p,)), alpha=plan.alpha,
                             bonferroni=kw.get("bonferroni", False))


def parse_plan(text: str) -> list[SimulationPlan]:
    """Parse a plan file; raises :class:`PlanError` listing every problem."""
    errors = []
    plans = []
    seen = {}
    current = None  # (pid, header_line, entries)

    def close():
        if current is not None:
            plan = _finish(*current, errors)
            if plan is not None:
                plans.append(plan)

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            close()
            pid = m.group(1)
            if pid in seen:
                errors.append((ln, f"duplicate plan id {pid!r} (lines {seen[pid]} and {ln})"))
                current = None
                continue
            seen[pid] = ln
            current = (pid, ln, {})
            continue
        if _BAD_HEADER.match(line):
            errors.append((ln, f"malformed section header {line!r}; expected '[plan <id>]'"))
            current = None
            continue
        if "=" not in line:
            errors.append((ln, f"expected 'key = value', got {line!r}"))
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if current is None:
            if not seen:
                errors.append((ln, f"key {key!r} outside a [plan <id>] section"))
            continue
        if key not in _PARSERS:
            errors.append((ln, f"unknown key {key!r}; known keys: {', '.join(KNOWN_KEYS)}"))
            continue
        entries = current[2]
        if key in entries:
            errors.append((ln, f"key {key!r} repeated (first on line {entries[key][0]})"))
            continue
        try:
            val = _PARSERS[key](value)
        except ValueError as exc:
            if key == "procedure":
                exc = ValueError(f"unknown procedure {value!r}; valid ids: {', '.join(ALL_PROCEDURES)}")
            errors.append((ln, f"{key}: {exc}"))
            continue
        entries[key] = (ln, val)
    close()
    if not plans and not errors:
        errors.append((1, "no [plan <id>] sections found"))
    if errors:
        raise PlanError(sorted(errors, key=lambda e: e[0]))
    return plans


# --- serialization ----------------------------------------------------------------

def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def serialize(plans) -> str:
    out = []
    for pl in plans:
        out.append(f"[plan {pl.plan_id}]")
        out.append(f"procedure = {pl.procedure}")
        if pl.p is not None:
            out.append(f"p = {pl.p}")
        out.append(f"alpha = {_fmt(pl.alpha)}")
        for k, v in pl.params:
            out.append(f"{k} = {_fmt(v)}")
        if pl.theta_grid:
            out.append(f"theta_grid = {_fmt(pl.theta_grid)}")
        out.append(f"n_rep = {pl.n_rep}")
        out.append(f"seed = {pl.seed}")
        out.append(f"engine = {pl.engine}")
        out.append(f"csv = {pl.csv}")
        if pl.svg is not None:
            out.append(f"svg = {pl.svg}")
        out.append("")
    return "\n".join(out)
