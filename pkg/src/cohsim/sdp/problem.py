"""Problem container and affine-expression builder for small dense SDPs.

A problem consists of Hermitian (or real symmetric) PSD variable blocks, free
real scalars, a real linear objective, and scalar equality / inequality
constraints.  Matrix-valued constraints are entered through ``MatExpr``
affine expressions and are lowered to scalar rows (real and imaginary parts
of independent entries); PSD constraints on expressions are lowered to a
fresh slack block tied entrywise to the expression.

A real-valued linear functional of a Hermitian block ``X`` is stored as a
Hermitian coefficient matrix ``F`` with value ``Re tr(F X)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..linalg import DimensionError, hermitian_part, partial_trace, permute_factors

__all__ = ["Block", "LinFunc", "SdpProblem", "MatExpr", "ScalarExpr", "problem_to_json", "problem_from_json"]


@dataclass(frozen=True)
class Block:
    """A PSD variable block: complex Hermitian by default, real symmetric otherwise."""

    label: str
    dim: int
    complex: bool = True


@dataclass
class LinFunc:
    """Real linear functional: ``sum_b Re tr(mats[b] X_b) + sum_s scal[s] t_s``."""

    mats: dict = field(default_factory=dict)
    scal: dict = field(default_factory=dict)

    def copy(self) -> "LinFunc":
        return LinFunc({k: v.copy() for k, v in self.mats.items()}, dict(self.scal))

    def value(self, blocks: dict, scalars: dict) -> float:
        tot = 0.0
        for lbl, f in self.mats.items():
            tot += float(np.tensordot(f.conj(), blocks[lbl], axes=2).real)
        for lbl, c in self.scal.items():
            tot += c * scalars[lbl]
        return tot


def _func_norm(f: "LinFunc") -> float:
    tot = sum(float(np.linalg.norm(m)) for m in f.mats.values())
    tot += sum(abs(v) for v in f.scal.values())
    return tot


class ScalarExpr:
    """Complex affine scalar in the block/scalar variables.

    ``rows[label]`` is a complex vector ``r`` with contribution
    ``r @ vec(X)`` (row-major vec); scalar coefficients may be complex so a
    single expression can carry both quadrature components of an entry.
    """

    def __init__(self, rows=None, scal=None, const=0.0 + 0.0j):
        self.rows = rows or {}
        self.scal = scal or {}
        self.const = complex(const)

    def __add__(self, other):
        if np.isscalar(other):
            return ScalarExpr(dict(self.rows), dict(self.scal), self.const + complex(other))
        rows = {k: v.copy() for k, v in self.rows.items()}
        for k, v in other.rows.items():
            rows[k] = rows.get(k, 0) + v
        scal = dict(self.scal)
        for k, v in other.scal.items():
            scal[k] = scal.get(k, 0) + v
        return ScalarExpr(rows, scal, self.const + other.const)

    __radd__ = __add__

    def __mul__(self, c):
        c = complex(c)
        return ScalarExpr({k: v * c for k, v in self.rows.items()},
                          {k: v * c for k, v in self.scal.items()}, self.const * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def __sub__(self, other):
        if np.isscalar(other):
            return self + (-complex(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other


class MatExpr:
    """Complex affine matrix expression in the block/scalar variables.

    ``coeffs[label]`` has shape ``(dim*dim, bdim*bdim)`` and maps
    ``vec(X_label)`` (row-major) to the expression's vec; ``scal[label]`` is
    the matrix coefficient of a free scalar; ``const`` the constant term.
    """

    def __init__(self, dim: int, coeffs=None, scal=None, const=None):
        self.dim = int(dim)
        self.coeffs = coeffs or {}
        self.scal = scal or {}
        self.const = np.zeros((dim, dim), dtype=complex) if const is None else np.asarray(const, dtype=complex)

    # -- construction -------------------------------------------------
    @staticmethod
    def constant(m: np.ndarray) -> "MatExpr":
        m = np.asarray(m, dtype=complex)
        return MatExpr(m.shape[0], const=m.copy())

    # -- ring operations ----------------------------------------------
    def _check(self, other: "MatExpr"):
        if self.dim != other.dim:
            raise DimensionError(f"matrix expressions have dims {self.dim} vs {other.dim}")

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            other = MatExpr.constant(other)
        self._check(other)
        coeffs = {k: v.copy() for k, v in self.coeffs.items()}
        for k, v in other.coeffs.items():
            coeffs[k] = coeffs.get(k, 0) + v
        scal = {k: v.copy() for k, v in self.scal.items()}
        for k, v in other.scal.items():
            scal[k] = scal.get(k, 0) + v
        return MatExpr(self.dim, coeffs, scal, self.const + other.const)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            other = MatExpr.constant(other)
        return self + (other * (-1.0))

    def __rsub__(self, other):
        return (self * (-1.0)) + other

    def __mul__(self, c):
        c = complex(c)
        return MatExpr(self.dim, {k: v * c for k, v in self.coeffs.items()},
                       {k: v * c for k, v in self.scal.items()}, self.const * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    # -- linear matrix maps --------------------------------------------
    def apply_map(self, fn, out_dim: int) -> "MatExpr":
        """Push the expression through a linear matrix map ``fn``.

        ``fn`` takes and returns dense complex matrices.  Its action matrix is
        built by evaluating it on matrix units, which keeps every structural
        operation (partial trace, factor permutation, congruence) correct by
        construction at negligible cost for the sizes used here.
        """
        d = self.dim
        fmat = np.zeros((out_dim * out_dim, d * d), dtype=complex)
        unit = np.zeros((d, d), dtype=complex)
        for i in range(d):
            for j in range(d):
                unit[i, j] = 1.0
                fmat[:, i * d + j] = np.asarray(fn(unit), dtype=complex).reshape(-1)
                unit[i, j] = 0.0
        coeffs = {k: fmat @ v for k, v in self.coeffs.items()}
        scal = {k: np.asarray(fn(v), dtype=complex) for k, v in self.scal.items()}
        return MatExpr(out_dim, coeffs, scal, np.asarray(fn(self.const), dtype=complex))

    def ptrace(self, dims, keep) -> "MatExpr":
        d_out = int(np.prod([dims[i] for i in keep])) if keep else 1
        return self.apply_map(lambda m: partial_trace(m, dims, keep), d_out)

    def permute(self, dims, perm) -> "MatExpr":
        return self.apply_map(lambda m: permute_factors(m, dims, perm), self.dim)

    def conj_by(self, a: np.ndarray) -> "MatExpr":
        """Congruence ``a @ expr @ a^dag``."""
        a = np.asarray(a, dtype=complex)
        return self.apply_map(lambda m: a @ m @ a.conj().T, a.shape[0])

    def mul_left(self, a: np.ndarray) -> "MatExpr":
        a = np.asarray(a, dtype=complex)
        return self.apply_map(lambda m: a @ m, a.shape[0])

    def kron_left(self, a: np.ndarray) -> "MatExpr":
        """``a (x) expr`` with a constant matrix ``a``."""
        a = np.asarray(a, dtype=complex)
        return self.apply_map(lambda m: np.kron(a, m), a.shape[0] * self.dim)

    def kron_right(self, a: np.ndarray) -> "MatExpr":
        a = np.asarray(a, dtype=complex)
        return self.apply_map(lambda m: np.kron(m, a), a.shape[0] * self.dim)

    # -- scalar extraction ----------------------------------------------
    def entry(self, i: int, j: int) -> ScalarExpr:
        d = self.dim
        idx = i * d + j
        rows = {k: v[idx, :].copy() for k, v in self.coeffs.items()}
        scal = {k: complex(v[i, j]) for k, v in self.scal.items()}
        return ScalarExpr(rows, scal, self.const[i, j])

    def trace(self) -> ScalarExpr:
        d = self.dim
        idx = [i * d + i for i in range(d)]
        rows = {k: v[idx, :].sum(axis=0) for k, v in self.coeffs.items()}
        scal = {k: complex(np.trace(v)) for k, v in self.scal.items()}
        return ScalarExpr(rows, scal, complex(np.trace(self.const)))

    def inner(self, f: np.ndarray) -> ScalarExpr:
        """``tr(f^dag expr)`` against a constant matrix ``f``."""
        f = np.asarray(f, dtype=complex)
        row = f.conj().reshape(-1)
        rows = {k: row @ v for k, v in self.coeffs.items()}
        scal = {k: complex(row @ v.reshape(-1)) for k, v in self.scal.items()}
        return ScalarExpr(rows, scal, complex(row @ self.const.reshape(-1)))


class SdpProblem:
    """Standard-form conic program over Hermitian PSD blocks.

    Use :meth:`psd_var` / :meth:`scalar_var` to declare variables,
    :meth:`add_matrix_eq` / :meth:`add_psd` / :meth:`add_eq` /
    :meth:`add_ineq` to constrain them, and :meth:`minimize` /
    :meth:`maximize` to set the objective.  Solve with
    :func:`cohsim.sdp.solve`.
    """

    def __init__(self):
        self.blocks: dict[str, Block] = {}
        self.scalars: list[str] = []
        self.sense: str = "min"
        self.objective: LinFunc = LinFunc()
        self.obj_offset: float = 0.0
        self.equalities: list[tuple[LinFunc, float]] = []
        self.inequalities: list[tuple[LinFunc, str, float]] = []
        self._slack_count = 0

    # -- variables ------------------------------------------------------
    def psd_var(self, label: str, dim: int, complex_block: bool = True) -> MatExpr:
        if label in self.blocks or label in self.scalars:
            raise ValueError(f"duplicate variable label {label!r}")
        self.blocks[label] = Block(label, int(dim), complex_block)
        return MatExpr(dim, coeffs={label: np.eye(dim * dim, dtype=complex)})

    def scalar_var(self, label: str) -> ScalarExpr:
        if label in self.blocks or label in self.scalars:
            raise ValueError(f"duplicate variable label {label!r}")
        self.scalars.append(label)
        return ScalarExpr(scal={label: 1.0 + 0.0j})

    def scalar_times_matrix(self, label_expr: ScalarExpr, mat: np.ndarray) -> MatExpr:
        """Matrix expression ``t * mat`` for a bare scalar variable expression."""
        if label_expr.rows or len(label_expr.scal) != 1:
            raise ValueError("scalar_times_matrix expects a bare scalar variable")
        (lbl, c), = label_expr.scal.items()
        mat = np.asarray(mat, dtype=complex)
        return MatExpr(mat.shape[0], scal={lbl: mat * c}, const=mat * label_expr.const)

    def scalar_times_eye(self, label_expr: ScalarExpr, dim: int) -> MatExpr:
        """Matrix expression ``t * I`` for a bare scalar variable expression."""
        return self.scalar_times_matrix(label_expr, np.eye(dim, dtype=complex))

    # -- lowering helpers -------------------------------------------------
    def _func_from_scalar(self, expr: ScalarExpr, imag: bool) -> tuple[LinFunc, float]:
        """Split a complex scalar expression into (functional, rhs-constant).

        Returns the real (or imaginary) part as a real functional plus the
        corresponding real constant, so ``expr == 0`` lowers to
        ``func == -const``.
        """
        func = LinFunc()
        for lbl, row in expr.rows.items():
            d = self.blocks[lbl].dim
            g = row.reshape(d, d).T  # row @ vec(X) == tr(g X)
            f = (g + g.conj().T) / 2 if not imag else (g - g.conj().T) / 2j
            if np.abs(f).max() > 0:
                func.mats[lbl] = func.mats.get(lbl, 0) + f
        for lbl, c in expr.scal.items():
            v = c.imag if imag else c.real
            if v != 0.0:
                func.scal[lbl] = func.scal.get(lbl, 0.0) + v
        const = expr.const.imag if imag else expr.const.real
        return func, const

    def add_eq(self, expr: ScalarExpr, target: float = 0.0) -> None:
        """Add ``Re expr == target`` and, when not structurally zero, ``Im expr == 0``."""
        fr, cr = self._func_from_scalar(expr, imag=False)
        self.equalities.append((fr, float(target) - cr))
        fi, ci = self._func_from_scalar(expr, imag=True)
        scale = _func_norm(fr) + abs(cr) + abs(target) + 1.0
        if _func_norm(fi) + abs(ci) > 1e-12 * scale:
            self.equalities.append((fi, -ci))

    def add_eq_real(self, expr: ScalarExpr, target: float = 0.0) -> None:
        """Add only ``Re expr == target``, leaving the imaginary part free."""
        fr, cr = self._func_from_scalar(expr, imag=False)
        self.equalities.append((fr, float(target) - cr))

    def add_ineq(self, expr: ScalarExpr, relation: str, target: float = 0.0) -> None:
        if relation not in ("<=", ">="):
            raise ValueError(f"relation must be '<=' or '>=', got {relation!r}")
        fr, cr = self._func_from_scalar(expr, imag=False)
        fi, ci = self._func_from_scalar(expr, imag=True)
        if _func_norm(fi) + abs(ci) > 1e-12 * (_func_norm(fr) + abs(cr) + 1.0):
            raise ValueError("inequality on a non-real expression")
        self.inequalities.append((fr, relation, float(target) - cr))

    def add_matrix_eq(self, expr: MatExpr, target=None) -> None:
        """Add entrywise equality ``expr == target`` for Hermitian-valued expressions.

        Only the upper triangle is lowered (real part on the diagonal, real
        and imaginary parts above it); the lower triangle is its conjugate by
        Hermiticity of every expression built from Hermitian variables.
        """
        if target is not None:
            expr = expr - (target if isinstance(target, (MatExpr,)) else MatExpr.constant(target))
        d = expr.dim
        for i in range(d):
            for j in range(i, d):
                e = expr.entry(i, j)
                fr, cr = self._func_from_scalar(e, imag=False)
                self.equalities.append((fr, -cr))
                if j > i:
                    fi, ci = self._func_from_scalar(e, imag=True)
                    self.equalities.append((fi, -ci))

    def add_psd(self, expr: MatExpr, label: str | None = None, complex_block: bool = True) -> str:
        """Constrain ``expr >= 0`` via a slack block tied to it entrywise."""
        if label is None:
            label = f"_slack{self._slack_count}"
            self._slack_count += 1
        slack = self.psd_var(label, expr.dim, complex_block)
        self.add_matrix_eq(expr - slack)
        return label

    # -- objective --------------------------------------------------------
    def _set_objective(self, expr: ScalarExpr, sense: str) -> None:
        fr, cr = self._func_from_scalar(expr, imag=False)
        fi, ci = self._func_from_scalar(expr, imag=True)
        if _func_norm(fi) + abs(ci) > 1e-12 * (_func_norm(fr) + abs(cr) + 1.0):
            raise ValueError("objective must be a real expression")
        self.sense = sense
        self.objective = fr
        self.obj_offset = cr

    def minimize(self, expr: ScalarExpr) -> None:
        self._set_objective(expr, "min")

    def maximize(self, expr: ScalarExpr) -> None:
        self._set_objective(expr, "max")


# -- JSON dump/restore (regression fixtures) --------------------------------

def _mat_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def _mat_unjson(obj) -> np.ndarray:
    return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)


def _func_json(f: LinFunc) -> dict:
    return {"mats": {k: _mat_json(v) for k, v in f.mats.items()}, "scal": dict(f.scal)}


def _func_unjson(obj) -> LinFunc:
    return LinFunc({k: hermitian_part(_mat_unjson(v)) for k, v in obj["mats"].items()},
                   {k: float(v) for k, v in obj["scal"].items()})


def problem_to_json(p: SdpProblem) -> dict:
    return {
        "blocks": [{"label": b.label, "dim": b.dim, "complex": b.complex} for b in p.blocks.values()],
        "scalars": list(p.scalars),
        "sense": p.sense,
        "objective": _func_json(p.objective),
        "obj_offset": p.obj_offset,
        "equalities": [{"func": _func_json(f), "target": t} for f, t in p.equalities],
        "inequalities": [{"func": _func_json(f), "relation": r, "target": t} for f, r, t in p.inequalities],
    }


def problem_from_json(obj: dict) -> SdpProblem:
    p = SdpProblem()
    for b in obj["blocks"]:
        p.blocks[b["label"]] = Block(b["label"], int(b["dim"]), bool(b["complex"]))
    p.scalars = list(obj["scalars"])
    p.sense = obj["sense"]
    p.objective = _func_unjson(obj["objective"])
    p.obj_offset = float(obj.get("obj_offset", 0.0))
    p.equalities = [(_func_unjson(e["func"]), float(e["target"])) for e in obj["equalities"]]
    p.inequalities = [(_func_unjson(e["func"]), e["relation"], float(e["target"])) for e in obj["inequalities"]]
    return p


def dump_problem(p: SdpProblem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_json(p), fh)


def load_problem(path) -> SdpProblem:
    with open(path, encoding="utf-8") as fh:
        return problem_from_json(json.load(fh))
