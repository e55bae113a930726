"""Study configuration files: a small INI dialect with [domain], [tensor], [study], [output].

Example::

    [domain]
    mode = explicit
    vertices = 0, 0; 1, 0; 1, 1; 0, 1

    [tensor]
    a11 = 2
    a12 = 1
    a22 = 2

    [study]
    solution = sin_sin
    n_list = 2, 4, 8, 16, 32, 64
    quadrature_degree = 6
    solver_tolerance = 1e-13
    certification = strict
    certification_tolerance = 1e-9

    [output]
    path = table1.csv
    format = csv

``mode = auto`` replaces ``vertices`` with ``alpha``: the domain is the
parallelogram spanned by the factor matrix of A, rescaled to unit area.
``solution = custom`` takes a sympy ``expression`` in x and y.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .geometry import Parallelogram
from .quadrature import triangle_rule
from .tensor import DEFAULT_CERT_TOL, NotSPDError, SPDTensor2, triangle_from_tensor
from .verification import ManufacturedSolution, get_solution

PRESETS = ("table1", "table2", "table3", "table4", "table5", "table6", "negative_control")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StudyConfig:
    tensor: SPDTensor2
    vertices: tuple[tuple[float, float], ...] | None = None
    alpha: float | None = None
    solution: str = "sin_sin"
    expression: str | None = None
    n_list: tuple[int, ...] = (2, 4, 8, 16, 32, 64)
    quadrature_degree: int = 6
    solver_tolerance: float = 1e-13
    certification: str = "strict"
    certification_tolerance: float = DEFAULT_CERT_TOL
    output_path: str = "convergence.csv"
    output_format: str = "csv"
    source: str = field(default="<memory>", compare=False)

    def __post_init__(self):
        if (self.vertices is None) == (self.alpha is None):
            raise ConfigError("domain needs either explicit vertices or mode = auto with alpha")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise ConfigError(f"n_list must hold positive integers, got {self.n_list}")
        if list(self.n_list) != sorted(set(self.n_list)):
            raise ConfigError(f"n_list must be strictly ascending, got {self.n_list}")
        if self.certification not in ("strict", "warn", "off"):
            raise ConfigError(f"certification must be strict, warn or off, got {self.certification!r}")
        if self.output_format not in ("csv", "markdown"):
            raise ConfigError(f"output format must be csv or markdown, got {self.output_format!r}")
        if self.solution == "custom" and not self.expression:
            raise ConfigError("solution = custom needs an expression")
        if not self.solver_tolerance > 0 or not self.certification_tolerance > 0:
            raise ConfigError("tolerances must be positive")
        try:
            triangle_rule(self.quadrature_degree)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.vertices is not None:
            try:
                Parallelogram.from_vertices(self.vertices)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None

    @property
    def domain(self) -> Parallelogram:
        if self.vertices is not None:
            return Parallelogram.from_vertices(self.vertices)
        return auto_domain(self.tensor, self.alpha)

    @property
    def manufactured(self) -> ManufacturedSolution:
        if self.solution == "custom":
            return solution_from_expression(self.expression)
        try:
            return get_solution(self.solution)
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from None

    @property
    def quadrature(self):
        return triangle_rule(self.quadrature_degree)

    def with_output_dir(self, directory: str | Path) -> StudyConfig:
        return replace(self, output_path=str(Path(directory) / Path(self.output_path).name))


def auto_domain(A: SPDTensor2, alpha: float) -> Parallelogram:
    """Parallelogram spanned by the factor columns of A, scaled to unit area."""
    S = triangle_from_tensor(A, alpha)
    S = S / np.sqrt(abs(np.linalg.det(S)))
    return Parallelogram((0.0, 0.0), tuple(S[:, 0]), tuple(S[:, 1]))


def solution_from_expression(expr: str) -> ManufacturedSolution:
    """Manufactured solution from a sympy expression in x and y."""
    import sympy

    x, y = sympy.symbols("x y")
    try:
        u = sympy.sympify(expr, locals={"x": x, "y": y})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"cannot parse expression {expr!r}: {exc}") from None
    if not u.free_symbols <= {x, y}:
        raise ConfigError(f"expression may only use x and y, got {sorted(map(str, u.free_symbols))}")
    ux, uy = sympy.diff(u, x), sympy.diff(u, y)
    parts = [u, ux, uy, sympy.diff(ux, x), sympy.diff(ux, y), sympy.diff(uy, y)]
    fns = [sympy.lambdify((x, y), p, "numpy") for p in parts]

    def broadcast(fn):
        return lambda a, b: np.asarray(fn(a, b), dtype=float) * np.ones(np.broadcast(a, b).shape)

    v, gx, gy, hxx, hxy, hyy = (broadcast(fn) for fn in fns)
    return ManufacturedSolution(
        "custom",
        v,
        lambda a, b: (gx(a, b), gy(a, b)),
        lambda a, b: (hxx(a, b), hxy(a, b), hyy(a, b)),
    )


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{what}: expected numbers, got {text!r}") from None


def _get(cp: configparser.ConfigParser, section: str, key: str, default=None):
    if cp.has_option(section, key):
        return cp.get(section, key).strip()
    if default is None:
        raise ConfigError(f"missing [{section}] {key}")
    return default


def parse_config(text: str, source: str = "<string>") -> StudyConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    for section in ("domain", "tensor"):
        if not cp.has_section(section):
            raise ConfigError(f"{source}: missing [{section}] section")

    try:
        tensor = SPDTensor2(
            *(float(_get(cp, "tensor", k)) for k in ("a11", "a12", "a22"))
        )
    except NotSPDError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    mode = _get(cp, "domain", "mode", "explicit")
    vertices = alpha = None
    if mode == "explicit":
        vals = []
        for chunk in _get(cp, "domain", "vertices").split(";"):
            pair = _floats(chunk, "vertices")
            if len(pair) != 2:
                raise ConfigError(f"{source}: each vertex needs two coordinates, got {chunk.strip()!r}")
            vals.append(tuple(pair))
        if len(vals) != 4:
            raise ConfigError(f"{source}: a parallelogram needs 4 vertices, got {len(vals)}")
        vertices = tuple(vals)
    elif mode == "auto":
        alpha = _floats(_get(cp, "domain", "alpha"), "alpha")[0]
    else:
        raise ConfigError(f"{source}: domain mode must be explicit or auto, got {mode!r}")

    sec = "study"
    try:
        n_list = tuple(int(t) for t in _get(cp, sec, "n_list", "2, 4, 8, 16, 32, 64").replace(",", " ").split())
        kwargs = dict(
            solution=_get(cp, sec, "solution", "sin_sin"),
            expression=cp.get(sec, "expression", fallback=None),
            n_list=n_list,
            quadrature_degree=int(_get(cp, sec, "quadrature_degree", "6")),
            solver_tolerance=float(_get(cp, sec, "solver_tolerance", "1e-13")),
            certification=_get(cp, sec, "certification", "strict"),
            certification_tolerance=float(_get(cp, sec, "certification_tolerance", repr(DEFAULT_CERT_TOL))),
            output_path=_get(cp, "output", "path", "convergence.csv"),
            output_format=_get(cp, "output", "format", "csv"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{source}: {exc}") from None
    try:
        return StudyConfig(tensor=tensor, vertices=vertices, alpha=alpha, source=source, **kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def dump_config(cfg: StudyConfig) -> str:
    cp = configparser.ConfigParser()
    if cfg.vertices is not None:
        cp["domain"] = {
            "mode": "explicit",
            "vertices": "; ".join(f"{x!r}, {y!r}" for x, y in cfg.vertices),
        }
    else:
        cp["domain"] = {"mode": "auto", "alpha": repr(cfg.alpha)}
    cp["tensor"] = {k: repr(getattr(cfg.tensor, k)) for k in ("a11", "a12", "a22")}
    study = {"solution": cfg.solution}
    if cfg.expression:
        study["expression"] = cfg.expression
    study.update(
        n_list=", ".join(str(n) for n in cfg.n_list),
        quadrature_degree=str(cfg.quadrature_degree),
        solver_tolerance=repr(cfg.solver_tolerance),
        certification=cfg.certification,
        certification_tolerance=repr(cfg.certification_tolerance),
    )
    cp["study"] = study
    cp["output"] = {"path": cfg.output_path, "format": cfg.output_format}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def load_config(name_or_path: str | Path) -> StudyConfig:
    """Read a config file, or a shipped preset by name (``table1`` ... ``table6``)."""
    path = Path(name_or_path)
    if path.is_file():
        return parse_config(path.read_text(encoding="utf-8"), str(path))
    stem = path.name.removesuffix(".cfg")
    if stem in PRESETS and path.parent == Path("."):
        text = resources.files("superfem.presets").joinpath(f"{stem}.cfg").read_text(encoding="utf-8")
        return parse_config(text, f"preset:{stem}")
    raise ConfigError(f"no such config file or preset: {name_or_path}")
