"""Line-oriented transform DSL: tokenizer, AST, and recursive-descent parser.

One statement per line; ``#`` starts a comment. The expression grammar is a
single precedence ladder (or < and < not < comparison < add < mul < unary)
shared by filter predicates and mutate value expressions; type mismatches are
rejected at evaluation time, not in the parser.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class Span:
    line: int  # 1-based
    col: int  # 1-based


class ParseError(Exception):
    def __init__(self, message: str, span: Span, expected: tuple[str, ...] = ()):
        loc = f"line {span.line}, col {span.col}"
        if expected:
            message = f"{message} (expected {', '.join(expected)})"
        super().__init__(f"{loc}: {message}")
        self.span = span
        self.expected = expected


KEYWORDS = {
    "load", "as", "filter", "where", "select", "cols", "drop", "mutate",
    "set", "dropna", "dedupe", "by", "sort", "asc", "desc", "head", "plot",
    "and", "or", "not", "histogram", "topk", "timeline",
}

AGG_FUNCS = {"mean", "std", "median", "min", "max", "iqr", "quantile"}
VALUE_FUNCS = {
    "int", "float", "str", "date", "try_int", "try_float", "try_date",
    "upper", "lower", "len",
}
PRED_FUNCS = {"isnull", "duplicated"}

PLOT_KINDS = ("histogram", "topk", "timeline")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT INT FLOAT STRING OP EOL
    text: str
    value: object
    span: Span


_TWO_CHAR_OPS = ("==", "!=", "<=", ">=")
_ONE_CHAR_OPS = "=<>+-*/(),."


def tokenize_line(line: str, lineno: int) -> list[Token]:
    toks: list[Token] = []
    i, n = 0, len(line)
    while i < n:
        ch = line[i]
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#":
            break
        span = Span(lineno, i + 1)
        if line[i : i + 2] in _TWO_CHAR_OPS:
            toks.append(Token("OP", line[i : i + 2], None, span))
            i += 2
            continue
        if ch == '"':
            j = i + 1
            out = []
            while j < n:
                c = line[j]
                if c == "\\":
                    if j + 1 >= n:
                        raise ParseError("dangling escape in string", Span(lineno, j + 1))
                    esc = line[j + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    j += 2
                elif c == '"':
                    break
                else:
                    out.append(c)
                    j += 1
            else:
                raise ParseError("unterminated string literal", span)
            toks.append(Token("STRING", line[i : j + 1], "".join(out), span))
            i = j + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and line[i + 1].isdigit()):
            j = i
            seen_dot = False
            seen_exp = False
            while j < n:
                c = line[j]
                if c.isdigit():
                    j += 1
                elif c == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    j += 1
                elif c in "eE" and not seen_exp and j > i:
                    seen_exp = True
                    j += 1
                    if j < n and line[j] in "+-":
                        j += 1
                else:
                    break
            text = line[i:j]
            if seen_dot or seen_exp:
                toks.append(Token("FLOAT", text, float(text), span))
            else:
                toks.append(Token("INT", text, int(text), span))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (line[j].isalnum() or line[j] == "_"):
                j += 1
            text = line[i:j]
            toks.append(Token("IDENT", text, text, span))
            i = j
            continue
        if ch in _ONE_CHAR_OPS:
            toks.append(Token("OP", ch, None, span))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", span)
    toks.append(Token("EOL", "", None, Span(lineno, n + 1)))
    return toks


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Lit:
    value: object  # int | float | str
    span: Span


@dataclass(frozen=True)
class ColRef:
    name: str
    span: Span


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "not"
    operand: object
    span: Span


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / and or == != < <= > >=
    left: object
    right: object
    span: Span


@dataclass(frozen=True)
class FuncCall:
    func: str  # value functions: int, try_int, upper, len, ...
    arg: object
    span: Span


@dataclass(frozen=True)
class IsNull:
    column: str
    span: Span


@dataclass(frozen=True)
class Duplicated:
    column: str
    span: Span


@dataclass(frozen=True)
class Agg:
    func: str  # mean std median min max iqr quantile
    table: str
    column: str
    p: Optional[float]  # quantile only
    span: Span


@dataclass(frozen=True)
class Ref:
    name: str
    span: Span


@dataclass(frozen=True)
class Filter:
    source: object
    predicate: object
    span: Span


@dataclass(frozen=True)
class Select:
    source: object
    columns: list[str]
    span: Span


@dataclass(frozen=True)
class DropCols:
    source: object
    columns: list[str]
    span: Span


@dataclass(frozen=True)
class Mutate:
    source: object
    column: str
    expr: object
    span: Span


@dataclass(frozen=True)
class DropNa:
    source: object
    columns: Optional[list[str]]
    span: Span


@dataclass(frozen=True)
class Dedupe:
    source: object
    by: Optional[list[str]]
    span: Span


@dataclass(frozen=True)
class Sort:
    source: object
    column: str
    ascending: bool
    span: Span


@dataclass(frozen=True)
class Head:
    source: object
    n: int
    span: Span


@dataclass(frozen=True)
class Load:
    path: str
    name: str
    span: Span


@dataclass(frozen=True)
class Assign:
    name: str
    expr: object  # table expression
    span: Span


@dataclass(frozen=True)
class ExprStmt:
    expr: object  # table expression
    span: Span


@dataclass(frozen=True)
class Plot:
    table: str
    column: str
    kind: str
    span: Span


@dataclass
class Program:
    statements: list = field(default_factory=list)


class _LineParser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        t = self.cur
        if t.kind != "EOL":
            self.pos += 1
        return t

    def fail(self, message: str, *expected: str):
        raise ParseError(message, self.cur.span, expected)

    def expect_op(self, op: str) -> Token:
        if self.cur.kind == "OP" and self.cur.text == op:
            return self.advance()
        self.fail(f"got {self.cur.text or 'end of line'!r}", repr(op))

    def expect_kw(self, kw: str) -> Token:
        if self.cur.kind == "IDENT" and self.cur.text == kw:
            return self.advance()
        self.fail(f"got {self.cur.text or 'end of line'!r}", repr(kw))

    def at_kw(self, kw: str) -> bool:
        return self.cur.kind == "IDENT" and self.cur.text == kw

    def expect_ident(self) -> Token:
        if self.cur.kind == "IDENT" and self.cur.text not in KEYWORDS:
            return self.advance()
        self.fail(f"got {self.cur.text or 'end of line'!r}", "identifier")

    def expect_eol(self):
        if self.cur.kind != "EOL":
            self.fail(f"trailing input {self.cur.text!r}", "end of line")

    # -- statements ---------------------------------------------------------

    def statement(self):
        if self.at_kw("load"):
            return self.load_stmt()
        if self.at_kw("plot"):
            return self.plot_stmt()
        # assign when IDENT "=" (and not "==")
        if (
            self.cur.kind == "IDENT"
            and self.cur.text not in KEYWORDS
            and self.pos + 1 < len(self.toks)
            and self.toks[self.pos + 1].kind == "OP"
            and self.toks[self.pos + 1].text == "="
        ):
            name = self.expect_ident()
            self.expect_op("=")
            expr = self.table_expr()
            self.expect_eol()
            return Assign(name.text, expr, name.span)
        span = self.cur.span
        expr = self.table_expr()
        self.expect_eol()
        return ExprStmt(expr, span)

    def load_stmt(self):
        kw = self.expect_kw("load")
        if self.cur.kind != "STRING":
            self.fail("load needs a quoted path", "string literal")
        path = self.advance()
        self.expect_kw("as")
        name = self.expect_ident()
        self.expect_eol()
        return Load(path.value, name.text, kw.span)

    def plot_stmt(self):
        kw = self.expect_kw("plot")
        table = self.expect_ident()
        self.expect_op(".")
        column = self.expect_ident()
        self.expect_kw("as")
        if self.cur.kind == "IDENT" and self.cur.text in PLOT_KINDS:
            kind = self.advance()
        else:
            self.fail(f"got {self.cur.text or 'end of line'!r}", *map(repr, PLOT_KINDS))
        self.expect_eol()
        return Plot(table.text, column.text, kind.text, kw.span)

    def ident_list(self) -> list[str]:
        names = [self.expect_ident().text]
        while self.cur.kind == "OP" and self.cur.text == ",":
            self.advance()
            names.append(self.expect_ident().text)
        return names

    def table_expr(self):
        t = self.cur
        if t.kind != "IDENT":
            self.fail(f"got {t.text or 'end of line'!r}", "table expression")
        if t.text == "filter":
            self.advance()
            src = self.table_expr()
            self.expect_kw("where")
            pred = self.expr()
            return Filter(src, pred, t.span)
        if t.text == "select":
            self.advance()
            src = self.table_expr()
            self.expect_kw("cols")
            return Select(src, self.ident_list(), t.span)
        if t.text == "drop":
            self.advance()
            src = self.table_expr()
            self.expect_kw("cols")
            return DropCols(src, self.ident_list(), t.span)
        if t.text == "mutate":
            self.advance()
            src = self.table_expr()
            self.expect_kw("set")
            col = self.expect_ident()
            self.expect_op("=")
            return Mutate(src, col.text, self.expr(), t.span)
        if t.text == "dropna":
            self.advance()
            src = self.table_expr()
            cols = None
            if self.at_kw("cols"):
                self.advance()
                cols = self.ident_list()
            return DropNa(src, cols, t.span)
        if t.text == "dedupe":
            self.advance()
            src = self.table_expr()
            by = None
            if self.at_kw("by"):
                self.advance()
                by = self.ident_list()
            return Dedupe(src, by, t.span)
        if t.text == "sort":
            self.advance()
            src = self.table_expr()
            self.expect_kw("by")
            col = self.expect_ident()
            if self.at_kw("asc"):
                self.advance()
                asc = True
            elif self.at_kw("desc"):
                self.advance()
                asc = False
            else:
                self.fail(f"got {self.cur.text or 'end of line'!r}", "'asc'", "'desc'")
            return Sort(src, col.text, asc, t.span)
        if t.text == "head":
            self.advance()
            src = self.table_expr()
            if self.cur.kind != "INT":
                self.fail("head needs a row count", "integer")
            n = self.advance()
            return Head(src, n.value, t.span)
        if t.text in KEYWORDS:
            self.fail(f"got keyword {t.text!r}", "table expression")
        name = self.advance()
        return Ref(name.text, name.span)

    # -- expressions --------------------------------------------------------

    def expr(self):
        return self.or_expr()

    def or_expr(self):
        left = self.and_expr()
        while self.at_kw("or"):
            op = self.advance()
            left = BinOp("or", left, self.and_expr(), op.span)
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.at_kw("and"):
            op = self.advance()
            left = BinOp("and", left, self.not_expr(), op.span)
        return left

    def not_expr(self):
        if self.at_kw("not"):
            op = self.advance()
            return Unary("not", self.not_expr(), op.span)
        return self.comparison()

    def comparison(self):
        left = self.add_expr()
        if self.cur.kind == "OP" and self.cur.text in ("==", "!=", "<", "<=", ">", ">="):
            op = self.advance()
            return BinOp(op.text, left, self.add_expr(), op.span)
        return left

    def add_expr(self):
        left = self.mul_expr()
        while self.cur.kind == "OP" and self.cur.text in ("+", "-"):
            op = self.advance()
            left = BinOp(op.text, left, self.mul_expr(), op.span)
        return left

    def mul_expr(self):
        left = self.unary_expr()
        while self.cur.kind == "OP" and self.cur.text in ("*", "/"):
            op = self.advance()
            left = BinOp(op.text, left, self.unary_expr(), op.span)
        return left

    def unary_expr(self):
        if self.cur.kind == "OP" and self.cur.text == "-":
            op = self.advance()
            return Unary("-", self.unary_expr(), op.span)
        return self.primary()

    def primary(self):
        t = self.cur
        if t.kind in ("INT", "FLOAT", "STRING"):
            self.advance()
            return Lit(t.value, t.span)
        if t.kind == "OP" and t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            return inner
        if t.kind == "IDENT":
            nxt = self.toks[self.pos + 1] if self.pos + 1 < len(self.toks) else None
            is_call = nxt is not None and nxt.kind == "OP" and nxt.text == "("
            if is_call and t.text in PRED_FUNCS:
                self.advance()
                self.expect_op("(")
                col = self.expect_ident()
                self.expect_op(")")
                cls = IsNull if t.text == "isnull" else Duplicated
                return cls(col.text, t.span)
            if is_call and t.text in AGG_FUNCS:
                self.advance()
                self.expect_op("(")
                table = self.expect_ident()
                self.expect_op(".")
                column = self.expect_ident()
                p = None
                if t.text == "quantile":
                    self.expect_op(",")
                    if self.cur.kind not in ("FLOAT", "INT"):
                        self.fail("quantile needs a probability", "number")
                    p = float(self.advance().value)
                self.expect_op(")")
                return Agg(t.text, table.text, column.text, p, t.span)
            if is_call and t.text in VALUE_FUNCS:
                self.advance()
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return FuncCall(t.text, arg, t.span)
            if t.text in KEYWORDS:
                self.fail(f"got keyword {t.text!r}", "expression")
            self.advance()
            return ColRef(t.text, t.span)
        self.fail(f"got {t.text or 'end of line'!r}", "expression")


def parse(source: str) -> Program:
    """Parse a full program; raises ParseError on the first error."""
    program = Program()
    for lineno, line in enumerate(source.splitlines(), start=1):
        tokens = tokenize_line(line, lineno)
        if tokens[0].kind == "EOL":
            continue
        p = _LineParser(tokens)
        program.statements.append(p.statement())
    return program
