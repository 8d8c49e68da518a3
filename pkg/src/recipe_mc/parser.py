"""Text syntax for systems (``.recipe``) and LTOL formulas (``.ltol``).

A system file looks like::

    system rms {
      channels *, A;
      common type : {t1, t2, line}, asgn : bool;
      data msg : {team, form};
      agent r1 {
        var st : {pnd, strt}, btype : {t1, t2, line}, basgn : bool;
        relabel type -> btype, asgn -> basgn;
        init st = pnd;
        send-guard ch = * & !@asgn;
        recv-guard ch = *;
        send {
          frame keep(btype, basgn);
          case st = pnd & d(msg) = team & st' = strt;
        }
        recv { case keep(all); }
      }
    }

``#`` starts a comment.  The transition blocks denote ``frame & (case | case ...)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import ltol as L
from .model import (
    BOOL,
    FALSE,
    TRUE,
    AgentDef,
    Atom,
    ChanRef,
    Cmp,
    CvRef,
    DataRef,
    Domain,
    Implies,
    Keep,
    Lit,
    ModelError,
    Not,
    Quant,
    SystemDef,
    ValidationError,
    Var,
    VarDecl,
    conj,
    disj,
    format_assertion,
    validate_system,
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


@dataclass
class ParseError:
    span: SourceSpan
    message: str
    expected: frozenset = field(default_factory=frozenset)

    def __str__(self):
        msg = f"{self.span}: {self.message}"
        if self.expected:
            msg += f" (expected {', '.join(sorted(self.expected))})"
        return msg


class SpecSyntaxError(Exception):
    """Raised with every error found in one input."""

    def __init__(self, errors):
        self.errors = sorted(errors, key=lambda e: (e.span.line, e.span.column))
        super().__init__("\n".join(str(e) for e in self.errors))


# ---------------------------------------------------------------------------
# Lexer


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<kw>send-guard|recv-guard)
  | (?P<op><->|->|!=|[{}()\[\];,:=&|!<>'@.*])
  | (?P<id>[A-Za-z0-9_]+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'id', 'op', 'eof'
    text: str
    span: SourceSpan


def tokenize(text: str, filename="<input>"):
    tokens, errors = [], []
    line, col, i = 1, 1, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            errors.append(ParseError(SourceSpan(filename, line, col), f"unexpected character {text[i]!r}"))
            i += 1
            col += 1
            continue
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind in ("op", "id", "kw"):
                tokens.append(Token("id" if kind == "kw" else kind, s, SourceSpan(filename, line, col, len(s))))
            col += len(s)
        i = m.end()
    tokens.append(Token("eof", "", SourceSpan(filename, line, col)))
    return tokens, errors


class _Bail(Exception):
    pass


class _Base:
    def __init__(self, text, filename):
        self.toks, self.errors = tokenize(text, filename)
        self.pos = 0
        self.filename = filename

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, *texts):
        return self.tok.kind != "eof" and self.tok.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def fail(self, message, expected=(), tok=None):
        tok = tok or self.tok
        self.errors.append(ParseError(tok.span, message, frozenset(expected)))
        raise _Bail()

    def expect(self, text) -> Token:
        if self.tok.text == text and self.tok.kind != "eof":
            return self.advance()
        found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
        self.fail(f"expected '{text}', found {found}", [text])

    def ident(self, what="identifier") -> Token:
        if self.tok.kind == "id":
            return self.advance()
        found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
        self.fail(f"expected {what}, found {found}", [what])

    def recover(self, stops=(";",), closers=("}",)):
        """Skip to just after the next ``;`` (or up to a closing brace)."""
        depth = 0
        while self.tok.kind != "eof":
            t = self.tok.text
            if t in ("{", "(", "["):
                depth += 1
            elif t in ("}", ")", "]"):
                if depth == 0:
                    return
                depth -= 1
            elif t in stops and depth == 0:
                self.advance()
                return
            self.advance()


# ---------------------------------------------------------------------------
# Systems


_KEYWORDS = {"true", "false", "ch", "d", "keep", "exists", "forall", "all"}


class _SystemParser(_Base):
    def __init__(self, text, filename):
        super().__init__(text, filename)
        self.domains: dict = {}
        self.channels: list = []
        self.common: list = []
        self.data: list = []
        self.agents: list = []
        self.values: set = set()

    # -- declarations -----------------------------------------------------

    def parse(self):
        if not self.at("system"):
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
            self.errors.append(ParseError(self.tok.span, f"expected 'system', found {found}",
                                          frozenset(["system"])))
            return None
        self.advance()
        name = ""
        if self.tok.kind == "id" and not self.at("{"):
            name = self.advance().text
        try:
            self.expect("{")
        except _Bail:
            return None
        while not self.at("}") and self.tok.kind != "eof":
            start = self.pos
            try:
                self.item()
            except _Bail:
                self.recover()
                if self.pos == start:
                    self.advance()
        try:
            self.expect("}")
            if self.tok.kind != "eof":
                self.fail(f"unexpected {self.tok.text!r} after the system block")
        except _Bail:
            pass
        return name

    def item(self):
        t = self.tok
        if self.at("channels"):
            self.advance()
            while True:
                tok = self.tok
                if self.at("*"):
                    self.advance()
                    c = "*"
                else:
                    c = self.ident("channel name").text
                if c in self.channels:
                    self.errors.append(ParseError(tok.span, f"channel {c} declared twice"))
                else:
                    self.channels.append(c)
                if not self.at(","):
                    break
                self.advance()
            self.expect(";")
        elif self.at("domain"):
            self.advance()
            nt = self.ident("domain name")
            self.expect("=")
            dom = self.domain_literal(nt.text)
            if nt.text in self.domains:
                self.errors.append(ParseError(nt.span, f"domain {nt.text} declared twice"))
            else:
                self.domains[nt.text] = dom
            self.expect(";")
        elif self.at("common", "data"):
            kind = self.advance().text
            target = self.common if kind == "common" else self.data
            for decl in self.decls(kind):
                if any(d.name == decl.name for d in target):
                    self.errors.append(ParseError(decl.span, f"{kind} variable {decl.name} declared twice"))
                else:
                    target.append(decl)
            self.expect(";")
        elif self.at("agent"):
            self.agent()
        else:
            self.fail(f"unexpected {t.text!r}" if t.kind != "eof" else "unexpected end of input",
                      ["channels", "domain", "common", "data", "agent", "}"])

    def domain_literal(self, name=""):
        self.expect("{")
        vals = []
        while True:
            tok = self.tok
            if self.at("*"):
                v = self.advance().text
            else:
                v = self.ident("value").text
            if v in vals:
                self.errors.append(ParseError(tok.span, f"value {v} repeated in domain"))
            else:
                vals.append(v)
            if not self.at(","):
                break
            self.advance()
        self.expect("}")
        self.values.update(vals)
        return Domain(name, tuple(vals))

    def domain_ref(self):
        if self.at("{"):
            return self.domain_literal()
        t = self.ident("domain")
        if t.text == "bool":
            return BOOL
        if t.text in self.domains:
            return self.domains[t.text]
        self.fail(f"unknown domain {t.text}", tok=t)

    def decls(self, kind):
        out = []
        while True:
            nt = self.ident(f"{kind} variable name")
            self.expect(":")
            dom = self.domain_ref()
            out.append(VarDecl(nt.text, dom, kind, span=nt.span))
            if not self.at(","):
                break
            self.advance()
        return out

    # -- agents -------------------------------------------------------------

    def _prescan_vars(self):
        """Names declared by ``var`` in the agent body starting at self.pos."""
        names, depth, i = [], 0, self.pos
        while self.toks[i].kind != "eof":
            t = self.toks[i].text
            if t == "{":
                depth += 1
            elif t == "}":
                depth -= 1
                if depth < 0:
                    break
            elif t == "var" and depth == 0:
                j = i + 1
                while self.toks[j].kind == "id" and self.toks[j + 1].text == ":":
                    if self.toks[j].text not in names:
                        names.append(self.toks[j].text)
                    j += 2
                    while self.toks[j].text not in (",", ";") and self.toks[j].kind != "eof":
                        if self.toks[j].text == "{":
                            while self.toks[j].text != "}" and self.toks[j].kind != "eof":
                                j += 1
                        j += 1
                    if self.toks[j].text == ",":
                        j += 1
            i += 1
        return names

    def agent(self):
        self.advance()
        nt = self.ident("agent name")
        self.expect("{")
        self.local_names = self._prescan_vars()
        self.vars: list = []
        parts = {"init": None, "send-guard": None, "recv-guard": None, "send": None, "recv": None}
        relabel = []
        while not self.at("}") and self.tok.kind != "eof":
            start = self.pos
            try:
                kw = self.tok
                if self.at("var"):
                    self.advance()
                    for decl in self.decls("local"):
                        if any(v.name == decl.name for v in self.vars):
                            self.errors.append(ParseError(decl.span, f"variable {decl.name} redeclared in agent {nt.text}"))
                        else:
                            self.vars.append(decl)
                    self.expect(";")
                elif self.at("relabel"):
                    self.advance()
                    while True:
                        cv = self.ident("common variable").text
                        self.expect("->")
                        lv = self.ident("local variable").text
                        relabel.append((cv, lv, kw.span))
                        if not self.at(","):
                            break
                        self.advance()
                    self.expect(";")
                elif self.at("init", "send-guard", "recv-guard"):
                    self.advance()
                    if parts[kw.text] is not None:
                        self.errors.append(ParseError(kw.span, f"{kw.text} given twice"))
                    parts[kw.text] = self.expr()
                    self.expect(";")
                elif self.at("send", "recv"):
                    self.advance()
                    if parts[kw.text] is not None:
                        self.errors.append(ParseError(kw.span, f"{kw.text} block given twice"))
                    parts[kw.text] = self.block()
                else:
                    self.fail(f"unexpected {kw.text!r}" if kw.kind != "eof" else "unexpected end of input",
                              ["var", "relabel", "init", "send-guard", "recv-guard", "send", "recv", "}"])
            except _Bail:
                self.recover()
                if self.pos == start:
                    self.advance()
        self.expect("}")
        for key, default in (("init", TRUE), ("send-guard", FALSE), ("recv-guard", None),
                             ("send", FALSE), ("recv", None)):
            if parts[key] is None:
                if default is None:
                    self.errors.append(ParseError(nt.span, f"agent {nt.text} has no {key}"))
                    default = FALSE
                parts[key] = default
        ren = {}
        for cv, lv, span in relabel:
            if cv in ren:
                self.errors.append(ParseError(span, f"common variable {cv} relabelled twice"))
            ren[cv] = lv
        order = [d.name for d in self.common]
        rel = tuple((cv, ren[cv]) for cv in order if cv in ren) + tuple(
            (cv, lv) for cv, lv in ren.items() if cv not in order)
        if any(a.name == nt.text for a in self.agents):
            self.errors.append(ParseError(nt.span, f"agent {nt.text} declared twice"))
            return
        self.agents.append(AgentDef(
            nt.text, tuple(self.vars), rel, parts["init"], parts["send-guard"],
            parts["recv-guard"], parts["send"], parts["recv"], span=nt.span))

    def block(self):
        self.expect("{")
        frame, cases = None, []
        while not self.at("}") and self.tok.kind != "eof":
            start = self.pos
            try:
                if self.at("frame"):
                    t = self.advance()
                    if frame is not None:
                        self.errors.append(ParseError(t.span, "frame given twice"))
                    frame = self.expr()
                elif self.at("case"):
                    self.advance()
                    cases.append(self.expr())
                else:
                    self.fail(f"unexpected {self.tok.text!r}", ["frame", "case", "}"])
                self.expect(";")
            except _Bail:
                self.recover()
                if self.pos == start:
                    self.advance()
        self.expect("}")
        if frame is None and not cases:
            return FALSE
        if not cases:
            return frame
        body = disj(cases)
        return body if frame is None else conj([frame, body])

    # -- assertions -------------------------------------------------------

    def expr(self):
        left = self.disjunction()
        if self.at("->"):
            self.advance()
            return Implies(left, self.expr())
        return left

    def disjunction(self):
        parts = [self.conjunction()]
        while self.at("|"):
            self.advance()
            parts.append(self.conjunction())
        return disj(parts) if len(parts) > 1 else parts[0]

    def conjunction(self):
        parts = [self.unary()]
        while self.at("&"):
            self.advance()
            parts.append(self.unary())
        return conj(parts) if len(parts) > 1 else parts[0]

    def unary(self):
        if self.at("!"):
            self.advance()
            return Not(self.unary())
        return self.primary()

    def primary(self):
        t = self.tok
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("keep") and self.peek().text == "(":
            self.advance()
            self.advance()
            if self.at("all") and self.peek().text == ")":
                self.advance()
                names = tuple(self.local_names)
            else:
                names = []
                while True:
                    n = self.ident("variable")
                    if n.text not in self.local_names:
                        self.errors.append(ParseError(n.span, f"undeclared variable {n.text}"))
                    names.append(n.text)
                    if not self.at(","):
                        break
                    self.advance()
                names = tuple(names)
            self.expect(")")
            return Keep(names)
        if self.at("exists", "forall") and self.peek().text == "(":
            kind = self.advance().text
            self.advance()
            body = self.expr()
            self.expect(")")
            return Quant(kind, body)
        if self.at("true", "false") and self.peek().text not in ("=", "!="):
            self.advance()
            return TRUE if t.text == "true" else FALSE
        left = self.term()
        if self.at("=", "!="):
            op = self.advance().text
            right = self.term()
            if isinstance(left, Lit) and isinstance(right, Lit):
                bad = next((x for x in (left, right) if x.value not in self.values and x.value not in self.channels), left)
                self.fail(f"undeclared variable {bad.value}", tok=t)
            return Cmp(op, left, right)
        if isinstance(left, Lit):
            self.fail(f"undeclared variable {left.value}", tok=t)
        if isinstance(left, ChanRef):
            self.fail("ch must be compared", ["=", "!="])
        return Atom(left)

    def term(self):
        t = self.tok
        if self.at("*"):
            self.advance()
            return Lit("*")
        if self.at("@"):
            self.advance()
            return CvRef(self.ident("common variable").text)
        if self.at("ch"):
            self.advance()
            return ChanRef()
        if self.at("d") and self.peek().text == "(":
            self.advance()
            self.advance()
            n = self.ident("data variable")
            self.expect(")")
            return DataRef(n.text)
        if t.kind != "id":
            self.fail(f"unexpected {t.text!r}" if t.kind != "eof" else "unexpected end of input",
                      ["term"])
        self.advance()
        if t.text in self.local_names:
            if self.at("'"):
                self.advance()
                return Var(t.text, True)
            return Var(t.text)
        if self.at("'"):
            self.fail(f"undeclared variable {t.text}", tok=t)
        return Lit(t.text)


def parse_system(text: str, filename="<input>", validate=True) -> SystemDef:
    """Parse (and by default validate) a system; raises SpecSyntaxError."""
    p = _SystemParser(text, filename)
    name = p.parse()
    if p.errors:
        raise SpecSyntaxError(p.errors)
    channels = tuple(p.channels)
    system = SystemDef(channels, tuple(p.common), tuple(p.data), tuple(p.agents),
                       tuple(p.domains.values()), name or "")
    if validate:
        try:
            validate_system(system)
        except ModelError as exc:
            span = getattr(exc, "span", None)
            if span is None:
                agent = getattr(exc, "agent", None)
                span = next((a.span for a in system.agents if a.name == agent), None)
            span = span or SourceSpan(filename, 1, 1)
            raise SpecSyntaxError([ParseError(span, str(exc))]) from exc
    return system


def load_system(path, validate=True) -> SystemDef:
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read(), str(path), validate=validate)


# ---------------------------------------------------------------------------
# Formulas


_TEMPORAL = {"U", "R", "W", "F", "G", "X"}


class _FormulaParser(_Base):
    def __init__(self, text, filename, system: SystemDef):
        super().__init__(text, filename)
        self.system = system
        self.props: dict = {}
        for a in system.agents:
            for v in a.vars:
                self.props[f"{a.name}.{v.name}"] = v.domain.values
        self.short: dict = {}
        for full in self.props:
            self.short.setdefault(full.split(".", 1)[1], []).append(full)
        self.obs_macros: dict = {}
        self.formula_macros: dict = {}
        self.data = {d.name: d.domain.values for d in system.data}
        self.cvs = {d.name: d.domain.values for d in system.common}

    def parse(self):
        result = None
        while self.tok.kind != "eof":
            start = self.pos
            try:
                if self.at("obs", "let") and self.peek().kind == "id" and self.peek(2).text == "=":
                    kw = self.advance().text
                    nt = self.ident("name")
                    self.expect("=")
                    if kw == "obs":
                        self.obs_macros[nt.text] = self.descriptor()
                    else:
                        self.formula_macros[nt.text] = self.formula()
                    self.expect(";")
                else:
                    if result is not None:
                        self.fail("only one formula per input")
                    result = self.formula()
                    if self.at(";"):
                        self.advance()
                    if self.tok.kind != "eof":
                        self.fail(f"unexpected {self.tok.text!r} after the formula")
            except _Bail:
                self.recover()
                if self.pos == start:
                    self.advance()
        if result is None and not self.errors:
            self.errors.append(ParseError(self.tok.span, "expected a formula"))
        return result

    # -- formulas ---------------------------------------------------------

    def formula(self):
        left = self.implication()
        if self.at("<->"):
            self.advance()
            right = self.formula()
            return L.FAnd(L.implies(left, right), L.implies(right, left))
        return left

    def implication(self):
        left = self.disjunction()
        if self.at("->"):
            self.advance()
            return L.implies(left, self.implication())
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.at("|"):
            self.advance()
            f = L.FOr(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.binary_temporal()
        while self.at("&"):
            self.advance()
            f = L.FAnd(f, self.binary_temporal())
        return f

    def binary_temporal(self):
        left = self.unary()
        if self.at("U", "R", "W"):
            op = self.advance().text
            right = self.binary_temporal()
            if op == "U":
                return L.Until(left, right)
            if op == "R":
                return L.Release(left, right)
            return L.weak_until(left, right)
        return left

    def unary(self):
        t = self.tok
        if self.at("!"):
            self.advance()
            return L.dual(self.unary())
        if self.at("F", "G", "X") and not (self.peek().text in (".", "=", "!=")):
            self.advance()
            body = self.unary()
            if t.text == "F":
                return L.eventually(body)
            if t.text == "G":
                return L.always(body)
            return L.Diamond(L.D_TRUE, body)
        if self.at("<"):
            self.advance()
            o = self.descriptor()
            self.expect(">")
            return L.Diamond(o, self.unary())
        if self.at("["):
            self.advance()
            o = self.descriptor()
            self.expect("]")
            return L.Box(o, self.unary())
        if self.at("("):
            self.advance()
            f = self.formula()
            self.expect(")")
            return f
        if self.at("true", "false") and self.peek().text not in ("=", "!="):
            self.advance()
            return L.FConst(t.text == "true")
        return self.prop()

    def prop(self):
        t = self.ident("proposition")
        if t.text in self.formula_macros:
            return self.formula_macros[t.text]
        if self.at("."):
            self.advance()
            v = self.ident("variable")
            name = f"{t.text}.{v.text}"
            if name not in self.props:
                self.fail(f"unknown variable {name}", tok=t)
        else:
            cands = self.short.get(t.text, [])
            if not cands:
                self.fail(f"unknown variable {t.text}", tok=t)
            if len(cands) > 1:
                self.fail(f"ambiguous variable {t.text}: qualify as one of {', '.join(cands)}", tok=t)
            name = cands[0]
        dom = self.props[name]
        if self.at("=", "!="):
            op = self.advance().text
            val = self.value()
            if val.text not in dom:
                self.fail(f"{val.text} is not a value of {name}", tok=val)
            return L.Prop(name, val.text, op == "=")
        if tuple(dom) != BOOL.values:
            self.fail(f"{name} is not Boolean; compare it with a value", ["=", "!="])
        return L.Prop(name, "true")

    def value(self):
        if self.at("*"):
            return self.advance()
        return self.ident("value")

    # -- descriptors --------------------------------------------------------

    def descriptor(self):
        return L.normalize_descriptor(self.d_or())

    def d_or(self):
        o = self.d_and()
        while self.at("|"):
            self.advance()
            o = L.DOr(o, self.d_and())
        return o

    def d_and(self):
        o = self.d_unary()
        while self.at("&"):
            self.advance()
            o = L.DAnd(o, self.d_unary())
        return o

    def d_unary(self):
        t = self.tok
        if self.at("!"):
            self.advance()
            return L.dual_descriptor(self.d_unary())
        if self.at("("):
            self.advance()
            o = self.d_or()
            self.expect(")")
            return o
        if self.at("some", "all") and self.peek().text == "(":
            self.advance()
            self.advance()
            body = self.d_or()
            self.expect(")")
            return L.Exists(body) if t.text == "some" else L.Forall(body)
        if self.at("["):
            self.advance()
            body = self.d_or()
            self.expect("]")
            return L.Forall(body)
        if self.at("true", "false") and self.peek().text not in ("=", "!="):
            self.advance()
            return L.DConst(t.text == "true")
        return self.d_atom()

    def _cmp(self):
        if self.at("=", "!="):
            return self.advance().text == "="
        return None

    def d_atom(self):
        t = self.tok
        if self.at("ch"):
            self.advance()
            pos = self._cmp()
            if pos is None:
                self.fail("ch must be compared", ["=", "!="])
            c = self.value()
            if c.text not in self.system.channels:
                self.fail(f"undeclared channel {c.text}", tok=c)
            return L.ChanAtom(c.text, pos)
        if self.at("sender") and self.peek().text in ("=", "!="):
            self.advance()
            pos = self._cmp()
            k = self.ident("agent")
            if k.text not in self.system.agent_names:
                self.fail(f"unknown agent {k.text}", tok=k)
            return L.SenderAtom(k.text, pos)
        if self.at("d") and self.peek().text == "(":
            self.advance()
            self.advance()
            n = self.ident("data variable")
            self.expect(")")
            if n.text not in self.data:
                self.fail(f"undeclared data variable {n.text}", tok=n)
            return self._valued(L.DataAtom, n.text, self.data[n.text])
        if self.at("@"):
            self.advance()
            n = self.ident("common variable")
            if n.text not in self.cvs:
                self.fail(f"undeclared common variable {n.text}", tok=n)
            return self._valued(L.CvAtom, n.text, self.cvs[n.text])
        n = self.ident("descriptor")
        if n.text in self.obs_macros:
            return self.obs_macros[n.text]
        if n.text in self.system.agent_names and not self.at("=", "!="):
            return L.SenderAtom(n.text)
        in_data, in_cv = n.text in self.data, n.text in self.cvs
        if in_data and in_cv:
            self.fail(f"ambiguous name {n.text}: write d({n.text}) or @{n.text}", tok=n)
        if in_data:
            return self._valued(L.DataAtom, n.text, self.data[n.text])
        if in_cv:
            return self._valued(L.CvAtom, n.text, self.cvs[n.text])
        self.fail(f"unknown name {n.text} in descriptor", tok=n)

    def _valued(self, cls, name, dom):
        pos = self._cmp()
        if pos is None:
            if tuple(dom) != BOOL.values:
                self.fail(f"{name} is not Boolean; compare it with a value", ["=", "!="])
            return cls(name, "true")
        v = self.value()
        if v.text not in dom:
            self.fail(f"{v.text} is not a value of {name}", tok=v)
        return cls(name, v.text, pos)


def parse_formula(text: str, system: SystemDef, filename="<input>") -> L.Formula:
    """Parse an LTOL formula (with optional ``obs``/``let`` definitions)."""
    p = _FormulaParser(text, filename, system)
    f = p.parse()
    if p.errors:
        raise SpecSyntaxError(p.errors)
    return f


def parse_descriptor(text: str, system: SystemDef, filename="<input>") -> L.Descriptor:
    p = _FormulaParser(text, filename, system)
    try:
        o = p.descriptor()
        if p.tok.kind != "eof":
            p.fail(f"unexpected {p.tok.text!r}")
    except _Bail:
        pass
    if p.errors:
        raise SpecSyntaxError(p.errors)
    return o


def load_formula(path, system: SystemDef) -> L.Formula:
    with open(path, encoding="utf-8") as fh:
        return parse_formula(fh.read(), system, str(path))


# ---------------------------------------------------------------------------
# Printing


def _domain_text(dom: Domain, named: dict) -> str:
    if dom.name and named.get(dom.name) == dom:
        return dom.name
    if dom == BOOL:
        return "bool"
    return "{" + ", ".join(dom.values) + "}"


def _decls_text(decls, named) -> str:
    return ", ".join(f"{d.name} : {_domain_text(d.domain, named)}" for d in decls)


def _block_text(rel, indent) -> list:
    pad = " " * indent
    if rel == FALSE:
        return []
    from .model import And, Or

    if isinstance(rel, And) and len(rel.args) == 2 and isinstance(rel.args[0], Keep) \
            and isinstance(rel.args[1], Or):
        lines = [f"{pad}frame {format_assertion(rel.args[0])};"]
        lines += [f"{pad}case {format_assertion(c)};" for c in rel.args[1].args]
        return lines
    if isinstance(rel, Or):
        return [f"{pad}case {format_assertion(c)};" for c in rel.args]
    return [f"{pad}case {format_assertion(rel)};"]


def print_system(system: SystemDef) -> str:
    named = {d.name: d for d in system.domains}
    out = [f"system {system.name} {{" if system.name else "system {"]
    out.append(f"  channels {', '.join(system.channels)};")
    for d in system.domains:
        out.append(f"  domain {d.name} = {{{', '.join(d.values)}}};")
    if system.common:
        out.append(f"  common {_decls_text(system.common, named)};")
    if system.data:
        out.append(f"  data {_decls_text(system.data, named)};")
    for a in system.agents:
        out.append("")
        out.append(f"  agent {a.name} {{")
        if a.vars:
            out.append(f"    var {_decls_text(a.vars, named)};")
        if a.relabel:
            out.append("    relabel " + ", ".join(f"{c} -> {l}" for c, l in a.relabel) + ";")
        out.append(f"    init {format_assertion(a.init)};")
        out.append(f"    send-guard {format_assertion(a.send_guard)};")
        out.append(f"    recv-guard {format_assertion(a.recv_guard)};")
        out.append("    send {")
        out.extend(_block_text(a.send_rel, 6))
        out.append("    }")
        out.append("    recv {")
        out.extend(_block_text(a.recv_rel, 6))
        out.append("    }")
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"


def pretty_print(x) -> str:
    """Text for a SystemDef, Formula or Descriptor that parses back to x."""
    if isinstance(x, SystemDef):
        return print_system(x)
    if isinstance(x, L.Formula):
        return L.format_formula(x)
    if isinstance(x, L.Descriptor):
        return L.format_descriptor(x)
    return format_assertion(x)
