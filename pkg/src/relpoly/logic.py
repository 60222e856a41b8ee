"""First-order formulas over relational signatures.

AST with equality and relation atoms, a recursive-descent text parser, a
compiled evaluator with a quantifier-free fast path, disjunctive normal form,
and the reduction of quantifier-free satisfaction counting to an integer
combination of homomorphism counts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from . import budgets
from .canon import canonical_form
from .counting import hom_count, mobius, quotient, set_partitions, super_patterns
from .errors import BindingError, BudgetError, FormulaParseError
from .structures import Signature, Structure, make_structure


# ---------------------------------------------------------------------------
# AST

class Node:
    __slots__ = ()


@dataclass(frozen=True)
class TrueNode(Node):
    pass


@dataclass(frozen=True)
class FalseNode(Node):
    pass


@dataclass(frozen=True)
class Eq(Node):
    left: str
    right: str


@dataclass(frozen=True)
class Atom(Node):
    symbol: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Not(Node):
    body: Node


@dataclass(frozen=True)
class And(Node):
    parts: tuple[Node, ...]


@dataclass(frozen=True)
class Or(Node):
    parts: tuple[Node, ...]


@dataclass(frozen=True)
class Implies(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Iff(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Exists(Node):
    var: str
    body: Node


@dataclass(frozen=True)
class Forall(Node):
    var: str
    body: Node


TRUE = TrueNode()
FALSE = FalseNode()


def atom(symbol: str, *args: str) -> Atom:
    return Atom(symbol, tuple(args))


def eq(left: str, right: str) -> Eq:
    return Eq(left, right)


def neg(body: Node) -> Not:
    return Not(body)


def conj(*parts: Node) -> Node:
    flat: list[Node] = []
    for part in parts:
        if isinstance(part, And):
            flat.extend(part.parts)
        else:
            flat.append(part)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Node) -> Node:
    flat: list[Node] = []
    for part in parts:
        if isinstance(part, Or):
            flat.extend(part.parts)
        else:
            flat.append(part)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def exists(var: str, body: Node) -> Exists:
    return Exists(var, body)


def forall(var: str, body: Node) -> Forall:
    return Forall(var, body)


def _children(node: Node):
    if isinstance(node, Not):
        return (node.body,)
    if isinstance(node, (And, Or)):
        return node.parts
    if isinstance(node, (Implies, Iff)):
        return (node.left, node.right)
    if isinstance(node, (Exists, Forall)):
        return (node.body,)
    return ()


def free_variables(node: Node, bound: frozenset = frozenset()) -> list[str]:
    """Free variables in first-occurrence order."""
    out: list[str] = []
    seen: set[str] = set()

    def walk(n: Node, bound: frozenset):
        if isinstance(n, Eq):
            for v in (n.left, n.right):
                if v not in bound and v not in seen:
                    seen.add(v)
                    out.append(v)
        elif isinstance(n, Atom):
            for v in n.args:
                if v not in bound and v not in seen:
                    seen.add(v)
                    out.append(v)
        elif isinstance(n, (Exists, Forall)):
            walk(n.body, bound | {n.var})
        else:
            for child in _children(n):
                walk(child, bound)

    walk(node, bound)
    return out


def is_quantifier_free(node: Node) -> bool:
    if isinstance(node, (Exists, Forall)):
        return False
    return all(is_quantifier_free(c) for c in _children(node))


def atom_symbols(node: Node) -> set[str]:
    if isinstance(node, Atom):
        out = {node.symbol}
    else:
        out = set()
    for child in _children(node):
        out |= atom_symbols(child)
    return out


def rename_symbols(node: Node, mapping: dict[str, str]) -> Node:
    if isinstance(node, Atom):
        return Atom(mapping.get(node.symbol, node.symbol), node.args)
    if isinstance(node, Not):
        return Not(rename_symbols(node.body, mapping))
    if isinstance(node, And):
        return And(tuple(rename_symbols(p, mapping) for p in node.parts))
    if isinstance(node, Or):
        return Or(tuple(rename_symbols(p, mapping) for p in node.parts))
    if isinstance(node, Implies):
        return Implies(rename_symbols(node.left, mapping), rename_symbols(node.right, mapping))
    if isinstance(node, Iff):
        return Iff(rename_symbols(node.left, mapping), rename_symbols(node.right, mapping))
    if isinstance(node, Exists):
        return Exists(node.var, rename_symbols(node.body, mapping))
    if isinstance(node, Forall):
        return Forall(node.var, rename_symbols(node.body, mapping))
    return node


def substitute(node: Node, mapping: dict[str, str], fresh_counter: list[int] | None = None) -> Node:
    """Capture-avoiding substitution of free variables by variables."""
    if fresh_counter is None:
        fresh_counter = [0]
    if isinstance(node, Eq):
        return Eq(mapping.get(node.left, node.left), mapping.get(node.right, node.right))
    if isinstance(node, Atom):
        return Atom(node.symbol, tuple(mapping.get(a, a) for a in node.args))
    if isinstance(node, (Exists, Forall)):
        var = node.var
        inner = dict(mapping)
        if var in inner:
            del inner[var]
        if var in inner.values():
            fresh = f"{var}_q{fresh_counter[0]}"
            fresh_counter[0] += 1
            inner[var] = fresh
            var = fresh
        body = substitute(node.body, inner, fresh_counter)
        return Exists(var, body) if isinstance(node, Exists) else Forall(var, body)
    if isinstance(node, Not):
        return Not(substitute(node.body, mapping, fresh_counter))
    if isinstance(node, And):
        return And(tuple(substitute(p, mapping, fresh_counter) for p in node.parts))
    if isinstance(node, Or):
        return Or(tuple(substitute(p, mapping, fresh_counter) for p in node.parts))
    if isinstance(node, Implies):
        return Implies(substitute(node.left, mapping, fresh_counter),
                       substitute(node.right, mapping, fresh_counter))
    if isinstance(node, Iff):
        return Iff(substitute(node.left, mapping, fresh_counter),
                   substitute(node.right, mapping, fresh_counter))
    return node


# ---------------------------------------------------------------------------
# Bound formulas

@dataclass(frozen=True)
class Formula:
    """AST bound against a signature with an explicit free-variable order."""

    root: Node
    signature: Signature
    free_vars: tuple[str, ...]

    @property
    def is_quantifier_free(self) -> bool:
        return is_quantifier_free(self.root)


_BASIC_ALIAS = re.compile(r"^U([ET])(\d+)$")


def _resolve_symbol(signature: Signature, name: str) -> str | None:
    if signature.has(name):
        return name
    m = _BASIC_ALIAS.match(name)
    if m:
        flipped = f"U{m.group(2)}{m.group(1)}"
        if signature.has(flipped):
            return flipped
    return None


def _bind(node: Node, signature: Signature) -> Node:
    """Resolve atom symbols against the signature, checking arities."""
    if isinstance(node, Atom):
        resolved = _resolve_symbol(signature, node.symbol)
        if resolved is None:
            raise BindingError(f"unknown relation symbol {node.symbol!r}")
        arity = signature.arity(resolved)
        if arity != len(node.args):
            raise BindingError(
                f"symbol {resolved!r} has arity {arity}, got {len(node.args)} arguments"
            )
        return Atom(resolved, node.args)
    if isinstance(node, Not):
        return Not(_bind(node.body, signature))
    if isinstance(node, And):
        return And(tuple(_bind(p, signature) for p in node.parts))
    if isinstance(node, Or):
        return Or(tuple(_bind(p, signature) for p in node.parts))
    if isinstance(node, Implies):
        return Implies(_bind(node.left, signature), _bind(node.right, signature))
    if isinstance(node, Iff):
        return Iff(_bind(node.left, signature), _bind(node.right, signature))
    if isinstance(node, Exists):
        return Exists(node.var, _bind(node.body, signature))
    if isinstance(node, Forall):
        return Forall(node.var, _bind(node.body, signature))
    return node


def build_formula(root: Node, signature: Signature,
                  declared_vars=None) -> Formula:
    root = _bind(root, signature)
    occurring = free_variables(root)
    if declared_vars is None:
        free = tuple(occurring)
    else:
        free = tuple(declared_vars)
        if len(set(free)) != len(free):
            raise BindingError("declared variables contain duplicates")
        extra = [v for v in occurring if v not in free]
        if extra:
            raise BindingError(f"undeclared variables: {extra}")
    return Formula(root, signature, free)


# ---------------------------------------------------------------------------
# Parser

_TOKEN = re.compile(
    r"\s*(?:(?P<iff><->)|(?P<imp>->)|(?P<or>\|)|(?P<and>&)|(?P<not>!)"
    r"|(?P<lpar>\()|(?P<rpar>\))|(?P<comma>,)|(?P<eq>=)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*))"
)

_KEYWORDS = {"true", "false", "exists", "forall"}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == m.start():
                stripped = text[pos:].lstrip()
                if not stripped:
                    break
                offset = len(text) - len(stripped) + 1
                raise FormulaParseError(f"unexpected character {stripped[0]!r}", offset)
            kind = m.lastgroup
            value = m.group(kind)
            self.tokens.append((kind, value, m.start(kind) + 1))
            pos = m.end()
        self.pos = 0

    def peek(self):
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return ("eof", "", len(self.text) + 1)

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str):
        tok = self.next()
        if tok[0] != kind:
            raise FormulaParseError(f"expected {what}", tok[2])
        return tok


def _parse_formula_node(tk: _Tokens) -> Node:
    return _parse_iff(tk)


def _parse_iff(tk: _Tokens) -> Node:
    node = _parse_imp(tk)
    while tk.peek()[0] == "iff":
        tk.next()
        node = Iff(node, _parse_imp(tk))
    return node


def _parse_imp(tk: _Tokens) -> Node:
    left = _parse_or(tk)
    if tk.peek()[0] == "imp":
        tk.next()
        return Implies(left, _parse_imp(tk))
    return left


def _parse_or(tk: _Tokens) -> Node:
    parts = [_parse_and(tk)]
    while tk.peek()[0] == "or":
        tk.next()
        parts.append(_parse_and(tk))
    return disj(*parts) if len(parts) > 1 else parts[0]


def _parse_and(tk: _Tokens) -> Node:
    parts = [_parse_unary(tk)]
    while tk.peek()[0] == "and":
        tk.next()
        parts.append(_parse_unary(tk))
    return conj(*parts) if len(parts) > 1 else parts[0]


def _parse_unary(tk: _Tokens) -> Node:
    kind, value, offset = tk.peek()
    if kind == "not":
        tk.next()
        return Not(_parse_unary(tk))
    if kind == "lpar":
        tk.next()
        node = _parse_formula_node(tk)
        tk.expect("rpar", "')'")
        return node
    return _parse_atom(tk)


def _parse_atom(tk: _Tokens) -> Node:
    kind, value, offset = tk.next()
    if kind != "ident":
        raise FormulaParseError("expected an atom", offset)
    if value == "true":
        return TRUE
    if value == "false":
        return FALSE
    if value in ("exists", "forall"):
        var = tk.expect("ident", "a variable")[1]
        if var in _KEYWORDS:
            raise FormulaParseError("expected a variable", offset)
        tk.expect("lpar", "'('")
        body = _parse_formula_node(tk)
        tk.expect("rpar", "')'")
        return Exists(var, body) if value == "exists" else Forall(var, body)
    if tk.peek()[0] == "lpar":
        tk.next()
        args = [tk.expect("ident", "a variable")[1]]
        while tk.peek()[0] == "comma":
            tk.next()
            args.append(tk.expect("ident", "a variable")[1])
        tk.expect("rpar", "')'")
        return Atom(value, tuple(args))
    if tk.peek()[0] == "eq":
        tk.next()
        right = tk.expect("ident", "a variable")[1]
        return Eq(value, right)
    raise FormulaParseError("expected '(' or '=' after identifier", tk.peek()[2])


def parse_formula(text: str, signature: Signature, declared_vars=None) -> Formula:
    """Parse formula text and bind it against the signature."""
    tk = _Tokens(text)
    root = _parse_formula_node(tk)
    trailing = tk.peek()
    if trailing[0] != "eof":
        raise FormulaParseError("unexpected trailing input", trailing[2])
    return build_formula(root, signature, declared_vars)


# ---------------------------------------------------------------------------
# Printing (canonical text; reparsing yields the same AST)

def _node_to_text(node: Node) -> tuple[str, int]:
    # precedence: atom 5, not 4, and 3, or 2, imp 1, iff 0
    if isinstance(node, TrueNode):
        return "true", 5
    if isinstance(node, FalseNode):
        return "false", 5
    if isinstance(node, Eq):
        return f"{node.left} = {node.right}", 5
    if isinstance(node, Atom):
        return f"{node.symbol}({','.join(node.args)})", 5
    if isinstance(node, Not):
        text, prec = _node_to_text(node.body)
        if prec < 4:
            text = f"({text})"
        return f"!{text}", 4
    if isinstance(node, And):
        parts = []
        for p in node.parts:
            text, prec = _node_to_text(p)
            parts.append(f"({text})" if prec < 3 else text)
        return " & ".join(parts), 3
    if isinstance(node, Or):
        parts = []
        for p in node.parts:
            text, prec = _node_to_text(p)
            parts.append(f"({text})" if prec < 2 else text)
        return " | ".join(parts), 2
    if isinstance(node, Implies):
        lt, lp = _node_to_text(node.left)
        rt, rp = _node_to_text(node.right)
        if lp <= 1:
            lt = f"({lt})"
        if rp < 1:
            rt = f"({rt})"
        return f"{lt} -> {rt}", 1
    if isinstance(node, Iff):
        lt, lp = _node_to_text(node.left)
        rt, rp = _node_to_text(node.right)
        if lp < 0:
            lt = f"({lt})"
        if rp <= 0:
            rt = f"({rt})"
        return f"{lt} <-> {rt}", 0
    if isinstance(node, (Exists, Forall)):
        kw = "exists" if isinstance(node, Exists) else "forall"
        body, _ = _node_to_text(node.body)
        return f"{kw} {node.var} ({body})", 5
    raise TypeError(f"unknown node {node!r}")


def formula_to_text(phi: Formula | Node) -> str:
    node = phi.root if isinstance(phi, Formula) else phi
    return _node_to_text(node)[0]


# ---------------------------------------------------------------------------
# Evaluation

def _compile_node(node: Node, env: dict[str, str], sig_index: dict[str, int]) -> str:
    if isinstance(node, TrueNode):
        return "True"
    if isinstance(node, FalseNode):
        return "False"
    if isinstance(node, Eq):
        return f"({env[node.left]} == {env[node.right]})"
    if isinstance(node, Atom):
        args = ",".join(env[a] for a in node.args)
        return f"(({args},) in r{sig_index[node.symbol]})"
    if isinstance(node, Not):
        return f"(not {_compile_node(node.body, env, sig_index)})"
    if isinstance(node, And):
        return "(" + " and ".join(_compile_node(p, env, sig_index) for p in node.parts) + ")"
    if isinstance(node, Or):
        return "(" + " or ".join(_compile_node(p, env, sig_index) for p in node.parts) + ")"
    if isinstance(node, Implies):
        return (f"((not {_compile_node(node.left, env, sig_index)}) or "
                f"{_compile_node(node.right, env, sig_index)})")
    if isinstance(node, Iff):
        return (f"({_compile_node(node.left, env, sig_index)} == "
                f"{_compile_node(node.right, env, sig_index)})")
    if isinstance(node, (Exists, Forall)):
        local = f"q{len(env)}"
        inner_env = dict(env)
        inner_env[node.var] = local
        body = _compile_node(node.body, inner_env, sig_index)
        comb = "any" if isinstance(node, Exists) else "all"
        return f"{comb}({body} for {local} in range(n))"
    raise TypeError(f"unknown node {node!r}")


def _unbound_variables(phi: Formula) -> list[str]:
    return [v for v in free_variables(phi.root) if v not in phi.free_vars]


@lru_cache(maxsize=4096)
def _compiled(phi: Formula):
    missing = _unbound_variables(phi)
    if missing:
        raise BindingError(f"formula uses undeclared variables: {missing}")
    env = {v: f"a[{i}]" for i, v in enumerate(phi.free_vars)}
    sig_index = {name: i for i, (name, _) in enumerate(phi.signature.symbols)}
    expr = _compile_node(phi.root, env, sig_index)
    params = ", ".join(f"r{i}" for i in range(len(phi.signature.symbols)))
    header = f"lambda a, n{', ' + params if params else ''}: "
    return eval(header + expr)  # noqa: S307 - generated from our own AST


def _structure_rels(phi: Formula, s: Structure) -> tuple[frozenset, ...]:
    rels = []
    for name, arity in phi.signature.symbols:
        if s.signature.has(name) and s.signature.arity(name) == arity:
            rels.append(frozenset(s.rel(name)))
        else:
            rels.append(frozenset())
    return tuple(rels)


def evaluator(phi: Formula, s: Structure):
    """Compiled satisfaction test: takes an assignment tuple aligned with
    phi.free_vars, returns a bool."""
    fn = _compiled(phi)
    rels = _structure_rels(phi, s)
    n = s.domain
    return lambda a: fn(a, n, *rels)


def eval_formula(phi: Formula, s: Structure, assignment: dict[str, int]) -> bool:
    """Standard satisfaction; quantifiers range over the full domain."""
    try:
        a = tuple(assignment[v] for v in phi.free_vars)
    except KeyError as exc:
        raise BindingError(f"assignment is missing variable {exc.args[0]!r}") from exc
    return evaluator(phi, s)(a)


def _eval_node(node: Node, s: Structure, env: dict[str, int]) -> bool:
    """Reference interpreter (used to cross-check the compiled path)."""
    if isinstance(node, TrueNode):
        return True
    if isinstance(node, FalseNode):
        return False
    if isinstance(node, Eq):
        return env[node.left] == env[node.right]
    if isinstance(node, Atom):
        return tuple(env[a] for a in node.args) in set(s.rel(node.symbol))
    if isinstance(node, Not):
        return not _eval_node(node.body, s, env)
    if isinstance(node, And):
        return all(_eval_node(p, s, env) for p in node.parts)
    if isinstance(node, Or):
        return any(_eval_node(p, s, env) for p in node.parts)
    if isinstance(node, Implies):
        return (not _eval_node(node.left, s, env)) or _eval_node(node.right, s, env)
    if isinstance(node, Iff):
        return _eval_node(node.left, s, env) == _eval_node(node.right, s, env)
    if isinstance(node, Exists):
        return any(_eval_node(node.body, s, {**env, node.var: w}) for w in range(s.domain))
    if isinstance(node, Forall):
        return all(_eval_node(node.body, s, {**env, node.var: w}) for w in range(s.domain))
    raise TypeError(f"unknown node {node!r}")


def satisfying_tuples(phi: Formula, s: Structure, budget: int | None = None):
    """Stream the satisfying assignments in lexicographic order."""
    p = len(phi.free_vars)
    total = s.domain ** p if p else 1
    limit = budget if budget is not None else budgets.assignment_budget()
    if total > limit:
        raise BudgetError(f"{total} assignments exceed the budget of {limit}")
    test = evaluator(phi, s)
    if p == 0:
        if test(()):
            yield ()
        return
    for a in product(range(s.domain), repeat=p):
        if test(a):
            yield a


def count_satisfying(phi: Formula, s: Structure, budget: int | None = None) -> int:
    """|phi(A)| by brute-force enumeration of |A|^p assignments."""
    return sum(1 for _ in satisfying_tuples(phi, s, budget))


# ---------------------------------------------------------------------------
# Disjunctive normal form

def _desugar(node: Node) -> Node:
    if isinstance(node, Implies):
        return disj(Not(_desugar(node.left)), _desugar(node.right))
    if isinstance(node, Iff):
        left, right = _desugar(node.left), _desugar(node.right)
        return disj(conj(left, right), conj(Not(left), Not(right)))
    if isinstance(node, Not):
        return Not(_desugar(node.body))
    if isinstance(node, And):
        return conj(*(_desugar(p) for p in node.parts))
    if isinstance(node, Or):
        return disj(*(_desugar(p) for p in node.parts))
    return node


def _nnf(node: Node, negate: bool) -> Node:
    if isinstance(node, Not):
        return _nnf(node.body, not negate)
    if isinstance(node, And):
        parts = tuple(_nnf(p, negate) for p in node.parts)
        return disj(*parts) if negate else conj(*parts)
    if isinstance(node, Or):
        parts = tuple(_nnf(p, negate) for p in node.parts)
        return conj(*parts) if negate else disj(*parts)
    if isinstance(node, TrueNode):
        return FALSE if negate else TRUE
    if isinstance(node, FalseNode):
        return TRUE if negate else FALSE
    return Not(node) if negate else node


def _dnf_terms(node: Node, budget: int) -> list[list[Node]]:
    if isinstance(node, Or):
        out: list[list[Node]] = []
        for part in node.parts:
            out.extend(_dnf_terms(part, budget))
            if sum(len(t) + 1 for t in out) > budget:
                raise BudgetError("DNF expansion exceeds the node budget")
        return out
    if isinstance(node, And):
        terms: list[list[Node]] = [[]]
        for part in node.parts:
            sub = _dnf_terms(part, budget)
            terms = [t + u for t in terms for u in sub]
            if sum(len(t) + 1 for t in terms) > budget:
                raise BudgetError("DNF expansion exceeds the node budget")
        return terms
    if isinstance(node, TrueNode):
        return [[]]
    if isinstance(node, FalseNode):
        return []
    return [[node]]


def to_dnf(phi: Formula, budget: int | None = None) -> Formula:
    """Equivalent disjunction of conjunctions of possibly negated atoms."""
    if not phi.is_quantifier_free:
        raise BindingError("DNF is defined for quantifier-free formulas only")
    limit = budget if budget is not None else budgets.dnf_budget()
    flat = _nnf(_desugar(phi.root), False)
    terms = _dnf_terms(flat, limit)
    root = disj(*(conj(*term) for term in terms))
    return Formula(root, phi.signature, phi.free_vars)


# ---------------------------------------------------------------------------
# Quantifier-free counts as homomorphism combinations

@dataclass(frozen=True)
class HomBasis:
    """Integer combination sum_i c_i * hom(F_i, -) of pattern structures."""

    terms: tuple[tuple[int, Structure], ...]

    def value(self, target: Structure) -> int:
        return sum(c * hom_count(f, target).value for c, f in self.terms)


def _all_diagrams(signature: Signature, k: int, budget: int):
    """Every structure on k vertices over the signature."""
    spaces = []
    total = 1
    for name, arity in signature.symbols:
        tuples = list(product(range(k), repeat=arity))
        total <<= len(tuples)
        if total > budget:
            raise BudgetError("diagram enumeration exceeds the basis budget")
        spaces.append((name, tuples))

    def rec(level: int, chosen: dict):
        if level == len(spaces):
            yield make_structure(signature, k, chosen)
            return
        name, tuples = spaces[level]
        for mask in range(1 << len(tuples)):
            chosen[name] = [t for i, t in enumerate(tuples) if mask >> i & 1]
            yield from rec(level + 1, chosen)
        del chosen[name]

    yield from rec(0, {})


def qf_to_hom_basis(phi: Formula, budget: int | None = None) -> HomBasis:
    """Decompose a quantifier-free satisfaction count into hom counts.

    Satisfying assignments are split by the partition their equalities induce,
    every complete diagram on the quotient variables contributes an induced
    count, induced counts convert to injective ones by inclusion-exclusion
    over super-patterns, and injective ones to homomorphism counts by Moebius
    inversion over quotient partitions; like terms merge by canonical key.
    """
    if not phi.is_quantifier_free:
        raise BindingError("hom-basis decomposition needs a quantifier-free formula")
    p = len(phi.free_vars)
    if p == 0:
        raise BindingError("hom-basis decomposition needs at least one free variable")
    limit = budget if budget is not None else budgets.basis_budget()

    occurring = atom_symbols(phi.root)
    base_sig = phi.signature.restrict([n for n in phi.signature.names if n in occurring])
    base = Formula(phi.root, base_sig, phi.free_vars)

    ind_coeffs: dict[Structure, int] = {}
    for theta in set_partitions(p):
        block_of: dict[int, int] = {}
        for b, block in enumerate(theta):
            for v in block:
                block_of[v] = b
        assignment = tuple(block_of[i] for i in range(p))
        k = len(theta)
        for diagram in _all_diagrams(base_sig, k, limit):
            if evaluator(base, diagram)(assignment):
                ind_coeffs[diagram] = ind_coeffs.get(diagram, 0) + 1

    inj_coeffs: dict[Structure, int] = {}
    for pattern, coeff in ind_coeffs.items():
        for bigger, added in super_patterns(pattern, budget=limit):
            sign = -1 if added % 2 else 1
            inj_coeffs[bigger] = inj_coeffs.get(bigger, 0) + coeff * sign

    merged: dict[bytes, list] = {}
    for pattern, coeff in inj_coeffs.items():
        if coeff == 0:
            continue
        for theta in set_partitions(pattern.domain):
            q = quotient(pattern, theta)
            key = canonical_form(q)
            entry = merged.setdefault(key, [0, q])
            entry[0] += coeff * mobius(theta)

    terms = [
        (coeff, pattern)
        for coeff, pattern in (tuple(v) for v in merged.values())
        if coeff != 0
    ]
    terms.sort(key=lambda item: (item[1].domain, canonical_form(item[1])))
    return HomBasis(tuple(terms))
