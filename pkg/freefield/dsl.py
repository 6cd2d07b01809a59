"""The script language: systems, let-bound states and the commands the CLI runs."""

import lark

from freefield.errors import DomainError, FreeFieldError, InvalidMode, ScriptError
from freefield.liecocycle import VectorField
from freefield.states import ModeVar, System, normalize

grammar = r"""
start: stmt*

?stmt: system | let | cmd

system: "system" KIND "N" "=" INT ring? ";"
ring: "ring" "poly"                 -> poly
    | "ring" "rat"                  -> rat
    | "ring" "series" "(" INT ")"   -> series

let: "let" IDENT "=" sum ";"

cmd: "ope" ref ref ";"                                          -> ope
   | "nproduct" ref sint ref ";"                                -> nproduct
   | "print" sum ";"                                            -> print
   | "check" CHECK ";"                                          -> check
   | "cohomology" "wmax" "=" INT ";"                            -> cohomology
   | "character" "wmax" "=" INT ";"                             -> character
   | "transform" "map" STRING ("order" INT)? taction ";"      -> transform
   | "p1" p1action ";"                                          -> p1
   | "cocycle" STRING+ ";"                                      -> cocycle

taction: "check-opes"        -> check_opes
       | "apply" ref         -> apply
       | "structure"         -> structure
       | "filtration"        -> filtration
       | "compose" STRING    -> compose

p1action: "glue"             -> glue
        | "wakimoto"         -> wakimoto
        | "sugawara"         -> sugawara
        | "sections" INT     -> sections
        | "euler" INT        -> euler
        | "reflect" ref      -> reflect
        | "flow" INT         -> flow

?ref: IDENT -> name
    | MODEVAR -> modevar
    | XVAR -> coord
    | "(" sum ")"

sint: INT | "-" INT -> negint

?sum: product
    | sum "+" product       -> add
    | sum "-" product       -> sub
?product: signed
    | product "*" signed    -> mul
    | product "/" signed    -> div
    | product power         -> mul
?signed: power
    | "-" signed            -> neg
    | "+" signed
?power: atom
    | atom "^" sint         -> pow
?atom: INT                  -> number
    | XVAR                  -> coord
    | MODEVAR               -> modevar
    | VACUUM                -> vacuum
    | IDENT                 -> name
    | "(" sum ")"

mapping: sum ("," sum)*
field: "(" sum "," sum ("," sum)* ")" | sum
expr: sum

KIND: "heis" | "cliff" | "omega"
CHECK: "virasoro" | "topological" | "borcherds" | "homotopy" | "charge" | "split" | "de-rham"
MODEVAR.3: /(a|b|phi|psi)[0-9]+_\{-?[0-9]+\}/
XVAR.2: /x[0-9]+/
VACUUM: "|0>"
IDENT: CNAME
STRING: ESCAPED_STRING
COMMENT: /#[^\n]*/

%import common.CNAME
%import common.INT
%import common.ESCAPED_STRING
%import common.WS

%ignore WS
%ignore COMMENT
"""


class AST:
    _fields = ()

    def __init__(self, *args, line=None, column=None):
        self.line, self.column = line, column
        for n, x in zip(self._fields, args):
            setattr(self, n, x)

    def __repr__(self):
        return "{0}({1})".format(type(self).__name__, ", ".join(repr(getattr(self, n)) for n in self._fields))

    def __eq__(self, other):
        return type(self) is type(other) and all(getattr(self, n) == getattr(other, n) for n in self._fields)

    def __ne__(self, other):
        return not self.__eq__(other)


class SystemDecl(AST):
    _fields = ("kind", "rank", "ring", "order")


class Let(AST):
    _fields = ("name", "expr")


class Command(AST):
    _fields = ("name", "args")


class Number(AST):
    _fields = ("value",)


class Coord(AST):
    _fields = ("index",)


class Var(AST):
    _fields = ("var",)


class Vacuum(AST):
    _fields = ()


class Name(AST):
    _fields = ("name",)


class BinOp(AST):
    _fields = ("op", "left", "right")


class Neg(AST):
    _fields = ("operand",)


class Pow(AST):
    _fields = ("base", "exponent")


def _modevar(token):
    head, mode = str(token).split("_")
    family = head.rstrip("0123456789")
    return ModeVar(family, int(head[len(family):]), int(mode.strip("{}")))


def _position(node):
    if isinstance(node, lark.Token):
        return node.line, node.column
    meta = getattr(node, "meta", None)
    if meta is not None and not getattr(meta, "empty", True):
        return meta.line, meta.column
    for child in node.children:
        line, column = _position(child)
        if line is not None:
            return line, column
    return None, None


def _string(token):
    return str(token)[1:-1].replace('\\"', '"').replace("\\\\", "\\")


def _sint(node):
    if node.data == "negint":
        return -int(node.children[0])
    return int(node.children[0])


def toast(node):
    """Lark tree -> AST."""
    if isinstance(node, lark.Token):
        return None
    line, column = _position(node)
    kind = node.data

    if kind == "start":
        return [toast(x) for x in node.children]

    elif kind == "system":
        name, rank = str(node.children[0]), int(node.children[1])
        ring, order = "poly", None
        if len(node.children) > 2:
            ring = node.children[2].data
            if ring == "series":
                order = int(node.children[2].children[0])
        return SystemDecl(name, rank, ring, order, line=line, column=column)

    elif kind == "let":
        return Let(str(node.children[0]), toast(node.children[1]), line=line, column=column)

    elif kind in ("ope", "print"):
        return Command(kind, [toast(x) for x in node.children], line=line, column=column)

    elif kind == "nproduct":
        left, n, right = node.children
        return Command(kind, [toast(left), _sint(n), toast(right)], line=line, column=column)

    elif kind == "check":
        return Command(kind, [str(node.children[0])], line=line, column=column)

    elif kind in ("cohomology", "character"):
        return Command(kind, [int(node.children[0])], line=line, column=column)

    elif kind == "transform":
        mapping, *order, action = node.children
        order = int(order[0]) if order else None
        extra = [toast(x) if not isinstance(x, lark.Token) else _string(x) for x in action.children]
        return Command(kind, [_string(mapping), order, action.data] + extra, line=line, column=column)

    elif kind == "p1":
        action = node.children[0]
        extra = [int(x) if isinstance(x, lark.Token) else toast(x) for x in action.children]
        return Command(kind, [action.data] + extra, line=line, column=column)

    elif kind == "cocycle":
        return Command(kind, [_string(x) for x in node.children], line=line, column=column)

    elif kind == "number":
        return Number(int(node.children[0]), line=line, column=column)

    elif kind == "coord":
        return Coord(int(str(node.children[0])[1:]), line=line, column=column)

    elif kind == "modevar":
        return Var(_modevar(node.children[0]), line=line, column=column)

    elif kind == "vacuum":
        return Vacuum(line=line, column=column)

    elif kind == "name":
        return Name(str(node.children[0]), line=line, column=column)

    elif kind in ("add", "sub", "mul", "div"):
        return BinOp(kind, toast(node.children[0]), toast(node.children[1]), line=line, column=column)

    elif kind == "neg":
        return Neg(toast(node.children[0]), line=line, column=column)

    elif kind == "pow":
        return Pow(toast(node.children[0]), _sint(node.children[1]), line=line, column=column)

    elif kind in ("signed", "sum", "product", "power", "atom", "ref") and len(node.children) == 1:
        return toast(node.children[0])

    raise NotImplementedError("node: {0}\n{1}".format(kind, node.pretty()))


def _raise_parse_error(error, source):
    line, column = getattr(error, "line", None), getattr(error, "column", None)
    token = getattr(error, "token", None)
    length = max(len(str(token)), 1) if token is not None and str(token) else 1
    if isinstance(error, lark.exceptions.UnexpectedToken):
        found = "end of input" if token is None or token.type == "$END" else repr(str(token))
        message = "unexpected {0}".format(found)
    elif isinstance(error, lark.exceptions.UnexpectedCharacters):
        message = "unexpected character {0!r}".format(source[error.pos_in_stream]) if error.pos_in_stream < len(source) else "unexpected character"
    else:
        message = "unexpected end of input"
    raise ScriptError(message, line, column, length) from None


def parse(source, start="start"):
    """Script text -> list of statements; ScriptError with a position on bad input."""
    try:
        tree = parse.parser.parse(source, start=start)
    except lark.exceptions.UnexpectedInput as error:
        _raise_parse_error(error, source)
    if start == "start":
        return toast(tree)
    return tree


parse.parser = lark.Lark(grammar, parser="lalr", start=["start", "mapping", "field", "expr"], propagate_positions=True)


# -- evaluation ----------------------------------------------------------------------


class Raw:
    """Unnormalized sum of (coefficient, [ModeVar, ...]) with variables kept in field order."""

    def __init__(self, terms):
        self.terms = list(terms)

    @classmethod
    def scalar(cls, value):
        return cls([(value, [])])

    @classmethod
    def of_state(cls, state):
        return cls([(c, list(m)) for m, c in state.items()])

    def is_coefficient(self):
        return all(not variables for _, variables in self.terms)

    def coefficient(self, system):
        total = system.ring.zero()
        for value, _ in self.terms:
            total = total + system.coefficient(value)
        return total

    def __add__(self, other):
        return Raw(self.terms + other.terms)

    def __neg__(self):
        return Raw([(-c, v) for c, v in self.terms])

    def __mul__(self, other):
        return Raw([(c1 * c2, v1 + v2) for c1, v1 in self.terms for c2, v2 in other.terms])


class Evaluator:
    """Evaluates expression ASTs over one system with an environment of let-bound states."""

    def __init__(self, system, env=None, aliases=None):
        self.system = system
        self.env = {} if env is None else env
        self.aliases = aliases or {}

    def _error(self, node, message):
        return ScriptError(message, node.line, node.column)

    def raw(self, node):
        system = self.system
        if isinstance(node, Number):
            return Raw.scalar(system.ring.scalar(node.value))
        if isinstance(node, Coord):
            if not 1 <= node.index <= system.rank:
                raise self._error(node, "x{0} outside x1..x{1}".format(node.index, system.rank))
            return Raw.scalar(system.ring.gen(node.index))
        if isinstance(node, Var):
            var = node.var
            zero_mode = var.family == "b" and var.mode == 0
            try:
                system.check_var(var, creation=not zero_mode)
            except InvalidMode as error:
                raise self._error(node, str(error)) from None
            if zero_mode:
                return Raw.scalar(system.ring.gen(var.index))
            return Raw([(system.ring.one(), [var])])
        if isinstance(node, Vacuum):
            return Raw.scalar(system.ring.one())
        if isinstance(node, Name):
            if node.name in self.aliases:
                return Raw.scalar(system.ring.gen(self.aliases[node.name]))
            if node.name not in self.env:
                raise self._error(node, "name {0!r} is not bound".format(node.name))
            return Raw.of_state(self.env[node.name])
        if isinstance(node, Neg):
            return -self.raw(node.operand)
        if isinstance(node, Pow):
            base = self.raw(node.base)
            if not base.is_coefficient():
                raise self._error(node, "only coefficients can be raised to a power")
            value = base.coefficient(system)
            try:
                return Raw.scalar(value ** node.exponent if node.exponent >= 0 else system.ring.one() / value ** -node.exponent)
            except FreeFieldError as error:
                raise self._error(node, str(error)) from None
        if isinstance(node, BinOp):
            left, right = self.raw(node.left), self.raw(node.right)
            if node.op == "add":
                return left + right
            if node.op == "sub":
                return left + -right
            if node.op == "mul":
                return left * right
            if not right.is_coefficient():
                raise self._error(node, "cannot divide by a state")
            try:
                inverse = system.ring.one() / right.coefficient(system)
            except FreeFieldError as error:
                raise self._error(node, str(error)) from None
            return left * Raw.scalar(inverse)
        raise self._error(node, "unsupported expression {0!r}".format(node))

    def state(self, node):
        raw = self.raw(node)
        try:
            return normalize(self.system, raw.terms)
        except (InvalidMode, DomainError) as error:
            raise self._error(node, str(error)) from None

    def coefficient(self, node):
        raw = self.raw(node)
        if not raw.is_coefficient():
            raise self._error(node, "expected a coefficient, found mode variables")
        return raw.coefficient(self.system)


def coordinate_aliases(rank):
    """x, y, z and b, b1.. name the coordinates inside map and field strings."""
    aliases = {"b{0}".format(i): i for i in range(1, rank + 1)}
    if rank == 1:
        aliases["b"] = 1
        aliases["x"] = 1
    for i, letter in enumerate("xyz"[:rank] if rank > 1 else ""):
        aliases[letter] = i + 1
    return aliases


def _expressions(tree):
    return [toast(child) for child in tree.children if not isinstance(child, lark.Token)]


def parse_mapping(text, system):
    """``"b -> b + b^2"`` or ``"x, y -> x + y^2, y"`` -> tuple of coefficients."""
    names = []
    if "->" in text:
        head, text = text.split("->", 1)
        names = [n.strip() for n in head.split(",")]
    exprs = _expressions(parse(text, start="mapping"))
    if names and len(names) != len(exprs):
        raise ScriptError("map names {0} variables but gives {1} components".format(len(names), len(exprs)), 1, 1)
    if len(exprs) != system.rank:
        raise ScriptError("map has {0} components, the system has N={1}".format(len(exprs), system.rank), 1, 1)
    evaluator = Evaluator(system, aliases=coordinate_aliases(system.rank))
    return tuple(evaluator.coefficient(e) for e in exprs)


def parse_field(text, rank):
    """``"(x2^2, 0)"`` -> polynomial VectorField with N components."""
    system = System.make("heis", rank)
    tree = parse(text, start="field")
    exprs = _expressions(tree)
    if len(exprs) != rank:
        raise ScriptError("vector field has {0} components, expected {1}".format(len(exprs), rank), 1, 1)
    evaluator = Evaluator(system, aliases=coordinate_aliases(rank))
    components = []
    for e in exprs:
        value = evaluator.coefficient(e)
        if value.denominator() != 1:
            raise ScriptError("vector field components must be polynomials", e.line, e.column)
        components.append(value.numerator())
    return VectorField(tuple(components))


def parse_state(text, system, env=None):
    """Read a state written in canonical form (or any script expression) back into ``system``."""
    tree = parse(text, start="expr")
    [expr] = _expressions(tree)
    return Evaluator(system, env).state(expr)

