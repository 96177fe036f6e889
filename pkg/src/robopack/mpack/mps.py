"""Fixed-format MPS writer and reader for :class:`MilpModel`.

Fixed MPS caps names at 8 characters, so variables and rows are written as
``V0000001``/``R0000001``. The symbolic names and constraint tags go in
``*`` comment lines, which solvers skip and :func:`read_mps` uses to
restore the model.
"""

from __future__ import annotations

import os

from robopack.mpack.milp import BIN, CONT, Constraint, MilpModel, Var

_SENSE_TO_ROW = {"<=": "L", ">=": "G", "=": "E"}
_ROW_TO_SENSE = {v: k for k, v in _SENSE_TO_ROW.items()}


def _num(v: float) -> str:
    v = float(v)
    if v == int(v) and abs(v) < 1e11:
        s = str(int(v))
    else:
        s = f"{v:.10g}"
        if len(s) > 12:
            s = f"{v:.6g}"
    if len(s) > 12:
        raise ValueError(f"coefficient {v!r} does not fit a fixed MPS field")
    return s


def _line(f1="", f2="", f3="", f4="", f5="", f6="") -> str:
    # fields start at columns 2, 5, 15, 25, 40, 50
    s = " " + f1.ljust(2) + " " + f2.ljust(8) + "  " + f3.ljust(8) + "  " + f4.ljust(12)
    if f5 or f6:
        s += "   " + f5.ljust(8) + "  " + f6.ljust(12)
    return s.rstrip()


def format_mps(model: MilpModel) -> str:
    model.validate()
    if not model.objective:
        raise ValueError("model has an empty objective; nothing to export")
    if len(model.variables) > 9_999_999 or len(model.constraints) > 9_999_999:
        raise ValueError("model too large for fixed MPS names")
    vcode = {name: f"V{n:07d}" for n, name in enumerate(model.variables, start=1)}
    rcode = [f"R{n:07d}" for n in range(1, len(model.constraints) + 1)]

    out = ["* robopack rolling-horizon step model", f"NAME          {model.name[:8]}"]
    for key, val in sorted(model.big_m.items()):
        out.append(f"* BIGM {key} {_num(val)}")
    for name, code in vcode.items():
        v = model.variables[name]
        out.append(f"* VAR {code} {v.kind} {name}")
    for code, c in zip(rcode, model.constraints):
        out.append(f"* ROW {code} {c.tag} {c.name}")

    out.append("ROWS")
    out.append(_line("N", "OBJ"))
    for code, c in zip(rcode, model.constraints):
        out.append(_line(_SENSE_TO_ROW[c.sense], code))

    # column-major coefficient lists
    cols = {name: [] for name in model.variables}
    for name, coef in model.objective.items():
        cols[name].append(("OBJ", coef))
    for code, c in zip(rcode, model.constraints):
        for name, coef in c.terms.items():
            cols[name].append((code, coef))

    out.append("COLUMNS")
    conts = [n for n, v in model.variables.items() if v.kind == CONT]
    bins = [n for n, v in model.variables.items() if v.kind == BIN]
    for name in conts:
        entries = cols[name] or [("OBJ", 0.0)]  # every column must appear once
        out.extend(_line("", vcode[name], row, _num(coef)) for row, coef in entries)
    if bins:
        out.append(_line("", "MARKER", "'MARKER'", "", "'INTORG'"))
        for name in bins:
            entries = cols[name] or [("OBJ", 0.0)]
            out.extend(_line("", vcode[name], row, _num(coef)) for row, coef in entries)
        out.append(_line("", "MARKER", "'MARKER'", "", "'INTEND'"))

    out.append("RHS")
    for code, c in zip(rcode, model.constraints):
        if c.rhs != 0:
            out.append(_line("", "RHS", code, _num(c.rhs)))

    out.append("BOUNDS")
    for name, v in model.variables.items():
        if v.lb != 0:
            out.append(_line("LO", "BND", vcode[name], _num(v.lb)))
        out.append(_line("UP", "BND", vcode[name], _num(v.ub)))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def export_model(model: MilpModel, path) -> str:
    text = format_mps(model)
    path = os.fspath(path)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
    return path


def _fields(line: str) -> list[str]:
    spans = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)]
    return [line[a:b].strip() for a, b in spans]


def parse_mps(text: str) -> MilpModel:
    model = MilpModel()
    vnames, vkinds, rnames, rtags = {}, {}, {}, {}
    row_sense, order = {}, []
    coefs = {}  # row code -> {var code: coef}
    rhs = {}
    bounds = {}
    obj_row = None
    section = None
    integer_block = False
    col_order = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        if raw.startswith("*"):
            parts = raw[1:].split()
            if len(parts) >= 4 and parts[0] == "VAR":
                vkinds[parts[1]] = parts[2]
                vnames[parts[1]] = " ".join(parts[3:])
            elif len(parts) >= 4 and parts[0] == "ROW":
                rtags[parts[1]] = parts[2]
                rnames[parts[1]] = " ".join(parts[3:])
            elif len(parts) == 3 and parts[0] == "BIGM":
                model.big_m[parts[1]] = float(parts[2])
            continue
        if not raw.startswith(" "):
            head = raw.split()
            section = head[0]
            if section == "NAME":
                model.name = head[1] if len(head) > 1 else ""
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "RANGES", "ENDATA"):
                raise ValueError(f"line {lineno}: unknown section {section!r}")
            continue
        f = _fields(raw)
        try:
            if section == "ROWS":
                kind, code = f[0], f[1]
                if kind == "N":
                    if obj_row is None:
                        obj_row = code
                    continue
                row_sense[code] = _ROW_TO_SENSE[kind]
                order.append(code)
                coefs[code] = {}
            elif section == "COLUMNS":
                if f[2] == "'MARKER'":
                    integer_block = f[4] == "'INTORG'"
                    continue
                var = f[1]
                if var not in bounds:
                    bounds[var] = [0.0, None]
                    col_order.append(var)
                    vkinds.setdefault(var, BIN if integer_block else CONT)
                for row, val in ((f[2], f[3]), (f[4], f[5])):
                    if not row:
                        continue
                    v = float(val)
                    if row == obj_row:
                        if v != 0:
                            model.objective[var] = model.objective.get(var, 0.0) + v
                    else:
                        coefs[row][var] = coefs[row].get(var, 0.0) + v
            elif section == "RHS":
                for row, val in ((f[2], f[3]), (f[4], f[5])):
                    if row:
                        rhs[row] = float(val)
            elif section == "BOUNDS":
                kind, var, val = f[0], f[2], f[3]
                b = bounds.setdefault(var, [0.0, None])
                if kind == "UP":
                    b[1] = float(val)
                elif kind == "LO":
                    b[0] = float(val)
                elif kind == "FX":
                    b[0] = b[1] = float(val)
                elif kind == "BV":
                    b[0], b[1] = 0.0, 1.0
                else:
                    raise ValueError(f"unsupported bound type {kind}")
        except (KeyError, ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: malformed MPS record: {exc}") from None

    objective = {}
    for code in col_order:
        name = vnames.get(code, code)
        lb, ub = bounds[code]
        model.variables[name] = Var(name, vkinds.get(code, CONT), lb, float("inf") if ub is None else ub)
        if code in model.objective:
            objective[name] = model.objective[code]
    model.objective = objective
    for code in order:
        terms = {vnames.get(v, v): c for v, c in coefs[code].items()}
        model.constraints.append(
            Constraint(rnames.get(code, code), terms, row_sense[code], rhs.get(code, 0.0), rtags.get(code, "geometric"))
        )
    return model


def read_mps(path) -> MilpModel:
    with open(path, encoding="ascii") as fh:
        return parse_mps(fh.read())
