"""SDPA sparse format (.dat-s) export and import.

A realified model

    maximize b'y   s.t.   G0_b + sum_k y_k G_bk >= 0,  scalars f_j(y) >= 0

maps onto the SDPA problem  min c'x, sum_i x_i F_i - F0 >= 0  via
c = -b, F_k = G_k, F0 = -G0.  Scalar constraints become one diagonal
block (negative size in the header, as SDPA prescribes).  Floats are
written with ``repr`` so that export -> import -> export is
byte-identical.
"""

from __future__ import annotations

import numpy as np

from .errors import ComplexDataError, IoError, NotRealified, SdpaParseError
from .model import (
    AffineBlock,
    ConstTerm,
    LinearFunctional,
    LmiConstraint,
    Objective,
    ScalarConstraint,
    SdpModel,
    VarId,
    VarTerm,
    var_basis,
)


def _coords(model: SdpModel):
    out = []
    for v in model.vars:
        out.extend((v, k) for k in range(len(var_basis(v))))
    return out


def _real_or_raise(M, where: str) -> np.ndarray:
    M = np.asarray(M)
    if np.iscomplexobj(M) and np.abs(M.imag).max(initial=0.0) != 0.0:
        raise ComplexDataError(f"complex entries in {where}; realify the model first")
    return np.ascontiguousarray(M.real, dtype=float)


def _fmt(x: float) -> str:
    return repr(float(x))


def export_sdpa(model: SdpModel, path) -> None:
    """Write a realified model in SDPA sparse format."""
    if not model.realified:
        raise NotRealified("export requires a realified model")
    obj = model.require_objective()
    coords = _coords(model)
    m = len(coords)

    flip = -1.0 if obj.sense == "minimize" else 1.0
    # SDPA minimizes c'x; our canonical form maximizes b'y
    c = [-flip * obj.functional.coeff(v, k) + 0.0 for v, k in coords]

    sizes = [lmi.size for lmi in model.lmis]
    if model.scalars:
        sizes.append(-len(model.scalars))

    # entries[matno] = list of (blk, i, j, val), matno 0 is F0
    entries: list = [[] for _ in range(m + 1)]

    def put(matno, blk, M):
        M = _real_or_raise(M, f"matrix {matno}, block {blk}")
        for i in range(M.shape[0]):
            for j in range(i, M.shape[1]):
                if M[i, j] != 0.0:
                    entries[matno].append((blk, i + 1, j + 1, M[i, j]))

    for bno, lmi in enumerate(model.lmis, start=1):
        put(0, bno, -lmi.const_matrix())
        for ci, (v, k) in enumerate(coords, start=1):
            if v in lmi.vars():
                put(ci, bno, lmi.coeff_matrix(v, k))
    if model.scalars:
        bno = len(model.lmis) + 1
        d = len(model.scalars)
        F0 = np.zeros((d, d))
        for j, sc in enumerate(model.scalars):
            F0[j, j] = -sc.functional.constant
        put(0, bno, F0)
        for ci, (v, k) in enumerate(coords, start=1):
            Fk = np.zeros((d, d))
            for j, sc in enumerate(model.scalars):
                Fk[j, j] = sc.functional.coeff(v, k)
            put(ci, bno, Fk)

    lines = [str(m), str(len(sizes)), " ".join(str(s) for s in sizes),
             " ".join(_fmt(x) for x in c)]
    for matno, ents in enumerate(entries):
        for blk, i, j, val in ents:
            lines.append(f"{matno} {blk} {i} {j} {_fmt(val)}")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(str(exc))


def import_sdpa(path) -> SdpModel:
    """Read an SDPA sparse file as a realified model over scalar variables.

    The result is a flat model: one real scalar variable per SDPA
    variable, one LMI per PSD block and one scalar constraint per row
    of each diagonal block.  Re-exporting reproduces the file.
    """
    try:
        with open(path) as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise IoError(str(exc))

    rows = []
    for lno, line in enumerate(raw, start=1):
        text = line.split("*")[0].split('"')[0].strip()
        if text:
            rows.append((lno, text))
    if len(rows) < 4:
        raise SdpaParseError("file ends before the objective row", line_no=len(raw))

    def ints(idx, count=None):
        lno, text = rows[idx]
        toks = text.replace(",", " ").replace("(", " ").replace(")", " ").replace("{", " ").replace("}", " ").split()
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise SdpaParseError(f"expected integers, got {text!r}", line_no=lno)
        if count is not None and len(vals) != count:
            raise SdpaParseError(
                f"expected {count} integers, got {len(vals)}", line_no=lno
            )
        return lno, vals

    _, (m,) = ints(0, 1)
    lno_nb, (nblocks,) = ints(1, 1)
    lno_sz, sizes = ints(2)
    if len(sizes) != nblocks:
        raise SdpaParseError(
            f"{nblocks} blocks declared but {len(sizes)} sizes given", line_no=lno_sz
        )
    lno_c, ctext = rows[3]
    ctoks = ctext.replace(",", " ").replace("{", " ").replace("}", " ").split()
    if len(ctoks) != m:
        raise SdpaParseError(
            f"objective needs {m} entries, got {len(ctoks)}", line_no=lno_c
        )
    try:
        c = [float(t) for t in ctoks]
    except ValueError:
        raise SdpaParseError(f"bad objective entry in {ctext!r}", line_no=lno_c)

    # F[matno][blk] dense; diagonal blocks stored dense too (small)
    dims = [abs(s) for s in sizes]
    F = [[np.zeros((d, d)) for d in dims] for _ in range(m + 1)]
    for lno, text in rows[4:]:
        toks = text.split()
        if len(toks) != 5:
            raise SdpaParseError(f"entry line needs 5 fields, got {text!r}", line_no=lno)
        try:
            matno, blk, i, j = (int(t) for t in toks[:4])
            val = float(toks[4])
        except ValueError:
            raise SdpaParseError(f"bad entry line {text!r}", line_no=lno)
        if not 0 <= matno <= m:
            raise SdpaParseError(f"matrix index {matno} out of range", line_no=lno)
        if not 1 <= blk <= nblocks:
            raise SdpaParseError(f"block index {blk} out of range", line_no=lno)
        d = dims[blk - 1]
        if not (1 <= i <= j <= d):
            raise SdpaParseError(
                f"entry ({i},{j}) outside upper triangle of size {d}", line_no=lno
            )
        if sizes[blk - 1] < 0 and i != j:
            raise SdpaParseError("off-diagonal entry in a diagonal block", line_no=lno)
        F[matno][blk - 1][i - 1, j - 1] = val
        F[matno][blk - 1][j - 1, i - 1] = val

    xs = [VarId(k, 1, f"x{k + 1}", "real") for k in range(m)]
    lmis = []
    scalars = []
    for bi, size in enumerate(sizes):
        if size > 0:
            terms = [ConstTerm(-F[0][bi].astype(complex))]
            for k in range(m):
                if np.abs(F[k + 1][bi]).max(initial=0.0) != 0.0:
                    terms.append(VarTerm(xs[k], 1.0, kl=F[k + 1][bi].astype(complex)))
            lmis.append(
                LmiConstraint([[AffineBlock(size, terms)]], label=f"block {bi + 1}")
            )
        else:
            for j in range(-size):
                fterms = []
                for k in range(m):
                    coef = F[k + 1][bi][j, j]
                    if coef != 0.0:
                        fterms.append((xs[k], np.array([[coef]])))
                scalars.append(
                    ScalarConstraint(
                        LinearFunctional(-F[0][bi][j, j], fterms),
                        label=f"block {bi + 1} row {j + 1}",
                    )
                )
    objective = Objective(
        "maximize",
        LinearFunctional(
            0.0,
            [(xs[k], np.array([[-c[k]]])) for k in range(m) if c[k] != 0.0],
        ),
    )
    return SdpModel(xs, lmis, scalars, objective, {}, realified=True)
