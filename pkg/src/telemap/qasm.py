"""OpenQASM 2.0 subset reader and writer.

Accepted: one ``qreg``, any number of ``creg``, the one-qubit gates of
:data:`telemap.ir.SINGLE_QUBIT_GATES`, ``cx``, ``measure``, ``reset``,
``barrier`` and ``if (creg==K)`` prefixes. Gate definitions, ``opaque`` and
includes other than ``qelib1.inc`` are rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .ir import SINGLE_QUBIT_GATES, Circuit, Gate

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


class QasmError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<real>(\d+\.\d*|\.\d+)([eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"[^"\n]*")
  | (?P<sym>->|==|[;,\[\](){}+\-*/^])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QasmError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.qreg: tuple[str, int] | None = None
        self.cregs: list[tuple[str, int]] = []
        self.gates: list[Gate] = []

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise QasmError(message, tok.line, tok.col)

    def next(self) -> _Tok:
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("sym", "id"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text:
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def ident(self) -> _Tok:
        if self.tok.kind != "id":
            self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def integer(self) -> int:
        if self.tok.kind != "int":
            self.error(f"expected integer, found {self.tok.text or 'end of input'!r}")
        return int(self.next().text)

    # grammar
    def program(self) -> Circuit:
        if self.tok.text == "OPENQASM":
            self.next()
            version = self.next()
            if version.text not in ("2.0", "2"):
                self.error(f"unsupported OpenQASM version {version.text}", version)
            self.expect(";")
        while self.tok.kind != "eof":
            self.statement()
        if self.qreg is None:
            self.error("program declares no qreg")
        return Circuit(self.qreg[1], tuple(self.gates), tuple(self.cregs), self.qreg[0])

    def statement(self):
        tok = self.tok
        if tok.kind != "id":
            self.error(f"unexpected {tok.text!r}")
        word = tok.text
        if word == "include":
            self.next()
            path = self.next()
            if path.kind != "str" or path.text.strip('"') != "qelib1.inc":
                self.error("only qelib1.inc may be included", path)
            self.expect(";")
        elif word in ("qreg", "creg"):
            self.next()
            name = self.ident()
            self.expect("[")
            size = self.integer()
            self.expect("]")
            self.expect(";")
            if size <= 0:
                self.error("register size must be positive", name)
            if word == "qreg":
                if self.qreg is not None:
                    self.error("only one qreg is supported", tok)
                if self.gates:
                    self.error("qreg must be declared before gates", tok)
                self.qreg = (name.text, size)
            else:
                if any(n == name.text for n, _ in self.cregs):
                    self.error(f"duplicate creg {name.text!r}", name)
                if self.qreg is not None and name.text == self.qreg[0]:
                    self.error(f"register name {name.text!r} already used", name)
                self.cregs.append((name.text, size))
        elif word in ("gate", "opaque"):
            self.error(f"{word} definitions are not supported")
        elif word == "if":
            self.next()
            self.expect("(")
            reg = self.ident()
            if reg.text not in dict(self.cregs):
                self.error(f"unknown creg {reg.text!r}", reg)
            self.expect("==")
            value = self.integer()
            self.expect(")")
            start = len(self.gates)
            inner = self.tok
            if inner.text in ("measure", "barrier", "if"):
                self.error(f"{inner.text} cannot be conditioned", inner)
            self.operation()
            self.gates[start:] = [Gate(g.name, g.qubits, g.params, g.clbit, (reg.text, value))
                                  for g in self.gates[start:]]
        else:
            self.operation()

    def operation(self):
        tok = self.ident()
        name = tok.text
        if name == "measure":
            qs = self.qargs()
            self.expect("->")
            cs = self.cargs()
            self.expect(";")
            if len(qs) != len(cs):
                self.error("measure operand sizes differ", tok)
            self.gates.extend(Gate("measure", (q,), clbit=c) for q, c in zip(qs, cs))
        elif name == "reset":
            qs = self.qargs()
            self.expect(";")
            self.gates.extend(Gate("reset", (q,)) for q in qs)
        elif name == "barrier":
            qs = self.qargs()
            while self.accept(","):
                qs += self.qargs()
            self.expect(";")
            self.gates.append(Gate("barrier", tuple(dict.fromkeys(qs))))
        elif name == "cx":
            a = self.qargs()
            self.expect(",")
            b = self.qargs()
            self.expect(";")
            if len(a) > 1 and len(b) > 1 and len(a) != len(b):
                self.error("cx operand sizes differ", tok)
            n = max(len(a), len(b))
            pairs = zip(a * n if len(a) == 1 else a, b * n if len(b) == 1 else b)
            for c, t in pairs:
                if c == t:
                    self.error("cx operands must be distinct", tok)
                self.gates.append(Gate("cx", (c, t)))
        elif name in SINGLE_QUBIT_GATES:
            params: list[float] = []
            if self.accept("("):
                if not self.accept(")"):
                    params.append(self.expr())
                    while self.accept(","):
                        params.append(self.expr())
                    self.expect(")")
            if len(params) != SINGLE_QUBIT_GATES[name]:
                self.error(f"{name} takes {SINGLE_QUBIT_GATES[name]} parameters, got {len(params)}", tok)
            qs = self.qargs()
            self.expect(";")
            self.gates.extend(Gate(name, (q,), tuple(params)) for q in qs)
        else:
            self.error(f"unsupported gate {name!r}", tok)

    def qargs(self) -> list[int]:
        reg = self.ident()
        if self.qreg is None or reg.text != self.qreg[0]:
            self.error(f"unknown qreg {reg.text!r}", reg)
        size = self.qreg[1]
        if self.accept("["):
            idx_tok = self.tok
            idx = self.integer()
            self.expect("]")
            if idx >= size:
                self.error(f"qubit index {idx} out of range for {reg.text}[{size}]", idx_tok)
            return [idx]
        return list(range(size))

    def cargs(self) -> list[int]:
        reg = self.ident()
        sizes = dict(self.cregs)
        if reg.text not in sizes:
            self.error(f"unknown creg {reg.text!r}", reg)
        offset = 0
        for name, size in self.cregs:
            if name == reg.text:
                break
            offset += size
        if self.accept("["):
            idx_tok = self.tok
            idx = self.integer()
            self.expect("]")
            if idx >= sizes[reg.text]:
                self.error(f"bit index {idx} out of range for {reg.text}[{sizes[reg.text]}]", idx_tok)
            return [offset + idx]
        return [offset + k for k in range(sizes[reg.text])]

    # parameter expressions: + - * / ^, unary minus, pi, numbers, sin/cos/...
    def expr(self) -> float:
        value = self.term()
        while self.tok.text in ("+", "-"):
            op = self.next().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> float:
        value = self.factor()
        while self.tok.text in ("*", "/"):
            op_tok = self.next()
            rhs = self.factor()
            if op_tok.text == "/":
                if rhs == 0:
                    self.error("division by zero", op_tok)
                value /= rhs
            else:
                value *= rhs
        return value

    def factor(self) -> float:
        if self.accept("-"):
            return -self.factor()
        if self.accept("+"):
            return self.factor()
        base = self.atom()
        if self.accept("^"):
            return base ** self.factor()
        return base

    _FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
              "ln": math.log, "sqrt": math.sqrt}

    def atom(self) -> float:
        tok = self.tok
        if tok.kind in ("int", "real"):
            self.next()
            return float(tok.text)
        if tok.kind == "id":
            self.next()
            if tok.text == "pi":
                return math.pi
            if tok.text in self._FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return self._FUNCS[tok.text](arg)
            self.error(f"unknown identifier {tok.text!r} in expression", tok)
        if self.accept("("):
            value = self.expr()
            self.expect(")")
            return value
        self.error(f"unexpected {tok.text or 'end of input'!r} in expression")


def parse(text: str) -> Circuit:
    """Parse OpenQASM 2.0 source into a :class:`Circuit`.

    Raises :class:`QasmError` (carrying ``line`` and ``col``) on any rejected input.
    """
    return _Parser(text).program()


def load(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def _bit_ref(circuit: Circuit, flat: int) -> str:
    offset = 0
    for name, size in circuit.cregs:
        if flat < offset + size:
            return f"{name}[{flat - offset}]"
        offset += size
    raise ValueError(f"classical bit {flat} out of range")


def _format_gate(circuit: Circuit, g: Gate) -> str:
    q = circuit.qreg_name
    if g.name == "measure":
        body = f"measure {q}[{g.qubits[0]}] -> {_bit_ref(circuit, g.clbit)};"
    elif g.name == "barrier":
        body = "barrier " + ",".join(f"{q}[{i}]" for i in g.qubits) + ";"
    else:
        params = "(" + ",".join(repr(float(p)) for p in g.params) + ")" if g.params else ""
        body = g.name + params + " " + ",".join(f"{q}[{i}]" for i in g.qubits) + ";"
    if g.condition is not None:
        body = f"if ({g.condition[0]}=={g.condition[1]}) " + body
    return body


def emit(circuit: Circuit) -> str:
    """Serialize a circuit; ``parse(emit(c)) == c`` for every valid circuit."""
    lines = [HEADER.rstrip("\n"), f"qreg {circuit.qreg_name}[{circuit.num_qubits}];"]
    lines += [f"creg {name}[{size}];" for name, size in circuit.cregs]
    lines += [_format_gate(circuit, g) for g in circuit.gates]
    return "\n".join(lines) + "\n"
