"""Interpretation schemes: plain, graphical, merged-marked, and quotient
variants, plus the formula translation that moves satisfaction counting from
an interpreted structure back to its source."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from itertools import product

from . import budgets
from .errors import BindingError, BudgetError, FormulaParseError, SignatureError, ValidationError
from .logic import (
    Formula,
    Node,
    TRUE,
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Iff,
    Implies,
    Not,
    Or,
    TrueNode,
    FalseNode,
    atom,
    build_formula,
    conj,
    disj,
    eq,
    evaluator,
    formula_to_text,
    parse_formula,
    rename_symbols,
    substitute,
)
from .polynomials import IntPolynomial, parse_polynomial
from .structures import (
    GRAPH_SIG,
    Signature,
    Structure,
    basic_signature,
    disjoint_union_signature,
    make_structure,
    sig,
)


def instantiate(phi: Formula, names) -> Node:
    """Substitute the formula's free variables positionally by `names`."""
    names = list(names)
    if len(names) != len(phi.free_vars):
        raise BindingError(
            f"expected {len(phi.free_vars)} arguments, got {len(names)}"
        )
    return substitute(phi.root, dict(zip(phi.free_vars, names)))


# ---------------------------------------------------------------------------
# Scheme types

@dataclass(frozen=True)
class InterpretationScheme:
    """Exponent p, a domain formula with p free variables, and one formula
    with p*r free variables per target symbol of arity r."""

    name: str
    p: int
    source: Signature
    target: Signature
    rho0: Formula
    rhos: tuple[Formula, ...]
    origin: tuple | None = None

    def __post_init__(self):
        if self.p < 1:
            raise SignatureError("exponent must be positive")
        if self.rho0.signature != self.source:
            raise BindingError("domain formula is not bound against the source signature")
        if len(self.rho0.free_vars) != self.p:
            raise BindingError(
                f"domain formula needs exactly {self.p} free variables, "
                f"got {len(self.rho0.free_vars)}"
            )
        if len(self.rhos) != len(self.target.symbols):
            raise BindingError("one relation formula per target symbol is required")
        for (name, arity), rho in zip(self.target.symbols, self.rhos):
            if rho.signature != self.source:
                raise BindingError(f"formula for {name!r} is not bound against the source")
            if len(rho.free_vars) != self.p * arity:
                raise BindingError(
                    f"formula for {name!r} needs {self.p * arity} free variables, "
                    f"got {len(rho.free_vars)}"
                )

    @property
    def quantifier_free(self) -> bool:
        return self.rho0.is_quantifier_free and all(r.is_quantifier_free for r in self.rhos)

    def rho(self, symbol: str) -> Formula:
        return self.rhos[self.target.index(symbol)]


@dataclass(frozen=True)
class GraphicalScheme:
    """Vertex formula with p free variables and a symmetric edge formula with
    2p; emits a loopless graph unless loop_policy is 'keep'."""

    name: str
    p: int
    iota: Formula
    rho: Formula
    loop_policy: str = "drop"
    origin: tuple | None = None

    def __post_init__(self):
        if self.p < 1:
            raise SignatureError("exponent must be positive")
        if len(self.iota.free_vars) != self.p:
            raise BindingError("vertex formula arity does not match the exponent")
        if len(self.rho.free_vars) != 2 * self.p:
            raise BindingError("edge formula needs 2p free variables")
        if self.iota.signature != self.rho.signature:
            raise BindingError("vertex and edge formulas disagree on the source signature")
        if self.loop_policy not in ("drop", "keep"):
            raise SignatureError(f"unknown loop policy {self.loop_policy!r}")

    @property
    def source(self) -> Signature:
        return self.iota.signature

    @property
    def quantifier_free(self) -> bool:
        return self.iota.is_quantifier_free and self.rho.is_quantifier_free


@dataclass(frozen=True)
class ClassCertificate:
    label: str
    eta: Formula
    size: IntPolynomial


@dataclass(frozen=True)
class QuotientScheme:
    """Interpretation scheme combined with an equivalence formula on p-tuples
    and declared class-size certificates."""

    base: InterpretationScheme
    varpi: Formula
    certificates: tuple[ClassCertificate, ...]
    origin: tuple | None = None

    def __post_init__(self):
        if len(self.varpi.free_vars) != 2 * self.base.p:
            raise BindingError("equivalence formula needs 2p free variables")
        if self.varpi.signature != self.base.source:
            raise BindingError("equivalence formula is not bound against the source")
        for cert in self.certificates:
            if len(cert.eta.free_vars) != self.base.p:
                raise BindingError(f"certificate {cert.label!r} needs p free variables")

    @property
    def name(self) -> str:
        return self.base.name

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def source(self) -> Signature:
        return self.base.source

    @property
    def target(self) -> Signature:
        return self.base.target

    @property
    def quantifier_free(self) -> bool:
        return (self.base.quantifier_free and self.varpi.is_quantifier_free
                and all(c.eta.is_quantifier_free for c in self.certificates))


Scheme = InterpretationScheme | GraphicalScheme | QuotientScheme


# ---------------------------------------------------------------------------
# Application

def _domain_tuples(rho0: Formula, a: Structure, p: int, budget: int | None):
    limit = budget if budget is not None else budgets.tuple_budget()
    if a.domain ** p > limit:
        raise BudgetError(f"{a.domain}^{p} candidate tuples exceed the budget of {limit}")
    test = evaluator(rho0, a)
    return [t for t in product(range(a.domain), repeat=p) if test(t)]


def _check_source(scheme, a: Structure):
    if a.signature != scheme.source:
        raise SignatureError(
            f"structure signature {a.signature.symbols} does not match the "
            f"scheme source {scheme.source.symbols}"
        )


def apply_interpretation_with_map(
    scheme: InterpretationScheme, a: Structure, budget: int | None = None
) -> tuple[Structure, tuple[tuple[int, ...], ...]]:
    """Interpret and also return the vertex-index -> source-tuple table."""
    _check_source(scheme, a)
    tuples = _domain_tuples(scheme.rho0, a, scheme.p, budget)
    limit = budget if budget is not None else budgets.tuple_budget()
    relations = {}
    for (name, arity), rho in zip(scheme.target.symbols, scheme.rhos):
        if len(tuples) ** arity > limit:
            raise BudgetError(f"{len(tuples)}^{arity} relation candidates exceed the budget")
        test = evaluator(rho, a)
        rel = []
        for combo in product(range(len(tuples)), repeat=arity):
            flat = tuple(v for idx in combo for v in tuples[idx])
            if test(flat):
                rel.append(combo)
        relations[name] = rel
    return make_structure(scheme.target, len(tuples), relations), tuple(tuples)


def apply_interpretation(scheme: InterpretationScheme, a: Structure,
                         budget: int | None = None) -> Structure:
    """Domain = satisfying p-tuples of the domain formula in lexicographic
    order; each target relation holds where its formula holds on the
    concatenated tuples."""
    return apply_interpretation_with_map(scheme, a, budget)[0]


def apply_graphical(scheme: GraphicalScheme, a: Structure,
                    budget: int | None = None) -> Structure:
    """Undirected graph on the vertex tuples; the edge formula is certified
    symmetric on this input, with a witness reported on violation."""
    _check_source(scheme, a)
    tuples = _domain_tuples(scheme.iota, a, scheme.p, budget)
    test = evaluator(scheme.rho, a)
    m = len(tuples)
    limit = budget if budget is not None else budgets.tuple_budget()
    if m * m > limit:
        raise BudgetError(f"{m}^2 edge candidates exceed the budget")
    edges = []
    for i in range(m):
        for j in range(i, m):
            forward = test(tuples[i] + tuples[j])
            if i == j:
                if scheme.loop_policy == "keep" and forward:
                    edges.append((i, i))
                continue
            backward = test(tuples[j] + tuples[i])
            if forward != backward:
                raise ValidationError(
                    f"edge formula of {scheme.name!r} is not symmetric",
                    witness=(tuples[i], tuples[j]),
                )
            if forward:
                edges.append((i, j))
                edges.append((j, i))
    return make_structure(GRAPH_SIG, m, {"E": edges})


@dataclass(frozen=True)
class QuotientReport:
    structure: Structure
    tuples: tuple[tuple[int, ...], ...]
    classes: tuple[tuple[int, ...], ...]   # tuple indices per class, lex-least first
    class_sizes: tuple[int, ...]
    certificate_labels: tuple[str | None, ...]


def apply_quotient_with_report(
    qs: QuotientScheme,
    a: Structure,
    n: int | None = None,
    budget: int | None = None,
    compat_samples: int = 32,
    seed: int = 0,
) -> QuotientReport:
    """Interpret with one vertex per equivalence class of the tuple relation.

    The equivalence formula is validated exhaustively on this input's domain
    tuples, relation formulas are evaluated on lexicographically least
    representatives, well-definedness is spot-checked on other representative
    choices, and declared class-size certificates are checked where they
    apply (a non-constant size needs the sequence index n).
    """
    import random

    base = qs.base
    _check_source(base, a)
    tuples = _domain_tuples(base.rho0, a, base.p, budget)
    m = len(tuples)
    limit = budget if budget is not None else budgets.tuple_budget()
    if m * m > limit:
        raise BudgetError(f"{m}^2 equivalence candidates exceed the budget")
    related = evaluator(qs.varpi, a)

    matrix = [[related(tuples[i] + tuples[j]) for j in range(m)] for i in range(m)]
    for i in range(m):
        if not matrix[i][i]:
            raise ValidationError("equivalence formula is not reflexive", witness=tuples[i])
        for j in range(i + 1, m):
            if matrix[i][j] != matrix[j][i]:
                raise ValidationError(
                    "equivalence formula is not symmetric", witness=(tuples[i], tuples[j])
                )
    # Union connected components, then insist every component is a clique;
    # that is exactly transitivity given reflexivity and symmetry.
    assignment = [-1] * m
    classes: list[list[int]] = []
    for i in range(m):
        if assignment[i] >= 0:
            continue
        stack = [i]
        members = []
        assignment[i] = len(classes)
        while stack:
            v = stack.pop()
            members.append(v)
            for w in range(m):
                if assignment[w] < 0 and matrix[v][w]:
                    assignment[w] = len(classes)
                    stack.append(w)
        classes.append(sorted(members))
    for members in classes:
        for i in members:
            for j in members:
                if not matrix[i][j]:
                    raise ValidationError(
                        "equivalence formula is not transitive",
                        witness=(tuples[i], tuples[j]),
                    )

    labels: list[str | None] = []
    if qs.certificates:
        eta_tests = [(cert, evaluator(cert.eta, a)) for cert in qs.certificates]
        for members in classes:
            rep = tuples[members[0]]
            label = None
            for cert, test in eta_tests:
                if test(rep):
                    label = cert.label
                    expected = None
                    if cert.size.is_constant():
                        expected = cert.size(0)
                    elif n is not None:
                        expected = cert.size(n)
                    if expected is not None and expected != len(members):
                        raise ValidationError(
                            f"class size {len(members)} contradicts certificate "
                            f"{cert.label!r} = {expected}",
                            witness=rep,
                        )
                    break
            if label is None:
                raise ValidationError(
                    "certificates do not cover a domain tuple", witness=rep
                )
            labels.append(label)
    else:
        labels = [None] * len(classes)

    rng = random.Random(seed)
    relations = {}
    for (name, arity), rho in zip(base.target.symbols, base.rhos):
        test = evaluator(rho, a)
        rel = []
        for combo in product(range(len(classes)), repeat=arity):
            reps = tuple(tuples[classes[c][0]] for c in combo)
            value = test(tuple(v for t in reps for v in t))
            # Compatibility spot-check: other representatives must agree.
            alternatives = 1
            for c in combo:
                alternatives *= len(classes[c])
            if alternatives > 1:
                if alternatives <= compat_samples:
                    picks = product(*(classes[c] for c in combo))
                else:
                    picks = (
                        tuple(rng.choice(classes[c]) for c in combo)
                        for _ in range(compat_samples)
                    )
                for pick in picks:
                    alt = tuple(v for idx in pick for v in tuples[idx])
                    if test(alt) != value:
                        raise ValidationError(
                            f"relation {name!r} is not compatible with the equivalence",
                            witness=(reps, tuple(tuples[idx] for idx in pick)),
                        )
            if value:
                rel.append(combo)
        relations[name] = rel
    structure = make_structure(base.target, len(classes), relations)
    return QuotientReport(
        structure,
        tuple(tuples),
        tuple(tuple(c) for c in classes),
        tuple(len(c) for c in classes),
        tuple(labels),
    )


def apply_quotient(qs: QuotientScheme, a: Structure, n: int | None = None,
                   budget: int | None = None) -> Structure:
    return apply_quotient_with_report(qs, a, n=n, budget=budget).structure


def apply_scheme(scheme: Scheme, a: Structure, n: int | None = None,
                 budget: int | None = None) -> Structure:
    if isinstance(scheme, InterpretationScheme):
        return apply_interpretation(scheme, a, budget)
    if isinstance(scheme, GraphicalScheme):
        return apply_graphical(scheme, a, budget)
    if isinstance(scheme, QuotientScheme):
        return apply_quotient(scheme, a, n=n, budget=budget)
    raise TypeError(f"not a scheme: {scheme!r}")


def scheme_target(scheme: Scheme) -> Signature:
    if isinstance(scheme, GraphicalScheme):
        return GRAPH_SIG
    return scheme.target


def scheme_exponent(scheme: Scheme) -> int:
    return scheme.p


# ---------------------------------------------------------------------------
# Formula translation

def _fresh_tuple_names(base: str, p: int, used: set[str]) -> tuple[str, ...]:
    names = []
    for j in range(1, p + 1):
        candidate = f"{base}_{j}"
        while candidate in used:
            candidate += "'"
        used.add(candidate)
        names.append(candidate)
    return tuple(names)


def _all_variables(node: Node) -> set[str]:
    out: set[str] = set()

    def walk(n: Node):
        if isinstance(n, Eq):
            out.add(n.left)
            out.add(n.right)
        elif isinstance(n, Atom):
            out.update(n.args)
        elif isinstance(n, (Exists, Forall)):
            out.add(n.var)
            walk(n.body)
        else:
            if isinstance(n, Not):
                walk(n.body)
            elif isinstance(n, (And, Or)):
                for p_ in n.parts:
                    walk(p_)
            elif isinstance(n, (Implies, Iff)):
                walk(n.left)
                walk(n.right)

    walk(node)
    return out


def translate_formula(scheme: InterpretationScheme, phi: Formula) -> Formula:
    """Rewrite a target-signature formula into a source-signature formula with
    the same satisfaction count: each variable becomes a p-tuple of variables,
    relation atoms become their defining formulas, quantifiers are guarded by
    the domain formula, and the result constrains every free tuple to the
    interpreted domain."""
    if phi.signature != scheme.target:
        raise BindingError("formula is not bound against the scheme target")
    p = scheme.p
    used = set(_all_variables(phi.root)) | set(phi.free_vars)
    mapping: dict[str, tuple[str, ...]] = {}
    for v in phi.free_vars:
        mapping[v] = _fresh_tuple_names(v, p, used)

    def tr(node: Node, mapping: dict[str, tuple[str, ...]]) -> Node:
        if isinstance(node, (TrueNode, FalseNode)):
            return node
        if isinstance(node, Eq):
            left, right = mapping[node.left], mapping[node.right]
            return conj(*[eq(a, b) for a, b in zip(left, right)])
        if isinstance(node, Atom):
            rho = scheme.rho(node.symbol)
            flat = [name for v in node.args for name in mapping[v]]
            return instantiate(rho, flat)
        if isinstance(node, Not):
            return Not(tr(node.body, mapping))
        if isinstance(node, And):
            return conj(*[tr(x, mapping) for x in node.parts])
        if isinstance(node, Or):
            return disj(*[tr(x, mapping) for x in node.parts])
        if isinstance(node, Implies):
            return Implies(tr(node.left, mapping), tr(node.right, mapping))
        if isinstance(node, Iff):
            return Iff(tr(node.left, mapping), tr(node.right, mapping))
        if isinstance(node, (Exists, Forall)):
            names = _fresh_tuple_names(node.var, p, used)
            inner = dict(mapping)
            inner[node.var] = names
            body = tr(node.body, inner)
            guard = instantiate(scheme.rho0, names)
            if isinstance(node, Exists):
                wrapped = conj(guard, body)
                for name in reversed(names):
                    wrapped = Exists(name, wrapped)
            else:
                wrapped = Implies(guard, body)
                for name in reversed(names):
                    wrapped = Forall(name, wrapped)
            return wrapped
        raise TypeError(f"unknown node {node!r}")

    body = tr(phi.root, mapping)
    guards = [instantiate(scheme.rho0, mapping[v]) for v in phi.free_vars]
    root = conj(*guards, body)
    declared = tuple(name for v in phi.free_vars for name in mapping[v])
    return build_formula(root, scheme.source, declared)


def compose(outer: InterpretationScheme, inner: InterpretationScheme) -> InterpretationScheme:
    """Scheme computing outer(inner(A)) directly, with exponent p_out * p_in;
    realized by translating each of the outer formulas through the inner
    scheme."""
    if outer.source != inner.target:
        raise SignatureError("outer scheme's source must equal inner scheme's target")
    return InterpretationScheme(
        name=f"{outer.name}.{inner.name}",
        p=outer.p * inner.p,
        source=inner.source,
        target=outer.target,
        rho0=translate_formula(inner, outer.rho0),
        rhos=tuple(translate_formula(inner, rho) for rho in outer.rhos),
    )


def merge_marked_schemes(schemes, marks) -> InterpretationScheme:
    """Combine componentwise schemes into one over the disjoint-union
    signatures, routing by the given unary marks, so that applying the merged
    scheme to a strong sum of marked inputs interprets each block by its own
    scheme."""
    schemes = list(schemes)
    marks = list(marks)
    if len(schemes) != len(marks):
        raise SignatureError("one mark per scheme is required")
    for scheme, mark_name in zip(schemes, marks):
        if not scheme.source.has(mark_name) or scheme.source.arity(mark_name) != 1:
            raise SignatureError(f"scheme {scheme.name!r} lacks unary mark {mark_name!r}")
    source, source_maps = disjoint_union_signature([s.source for s in schemes])
    target, target_maps = disjoint_union_signature([s.target for s in schemes])
    p = max(s.p for s in schemes)
    xs = [f"x{i}" for i in range(1, p + 1)]

    disjuncts = []
    for scheme, mark_name, rename in zip(schemes, marks, source_maps):
        mark_sym = rename[mark_name]
        parts: list[Node] = [atom(mark_sym, x) for x in xs[: scheme.p]]
        parts += [eq(xs[j], xs[p - 1]) for j in range(scheme.p - 1, p - 1)]
        rho0 = rename_symbols(scheme.rho0.root, rename)
        parts.append(substitute(rho0, dict(zip(scheme.rho0.free_vars, xs[: scheme.p]))))
        disjuncts.append(conj(*parts))
    rho0 = build_formula(disj(*disjuncts), source, xs)

    rhos = []
    for scheme, mark_name, rename, t_rename in zip(schemes, marks, source_maps, target_maps):
        mark_sym = rename[mark_name]
        for (sym, arity), rho in zip(scheme.target.symbols, scheme.rhos):
            ys = [f"x{i}" for i in range(1, arity * p + 1)]
            parts = [atom(mark_sym, y) for y in ys]
            positions = [ys[b * p + j] for b in range(arity) for j in range(scheme.p)]
            body = rename_symbols(rho.root, rename)
            parts.append(substitute(body, dict(zip(rho.free_vars, positions))))
            rhos.append((t_rename[sym], build_formula(conj(*parts), source, ys)))
    by_name = dict(rhos)
    ordered = tuple(by_name[name] for name, _ in target.symbols)
    return InterpretationScheme(
        name="merged(" + ",".join(s.name for s in schemes) + ")",
        p=p,
        source=source,
        target=target,
        rho0=rho0,
        rhos=ordered,
    )


# ---------------------------------------------------------------------------
# Built-in schemes

def identity_scheme(source: Signature, name: str = "identity") -> InterpretationScheme:
    xs = ["x1"]
    rho0 = build_formula(TRUE, source, xs)
    rhos = []
    for sym, arity in source.symbols:
        ys = [f"x{i}" for i in range(1, arity + 1)]
        rhos.append(build_formula(atom(sym, *ys), source, ys))
    return InterpretationScheme(name, 1, source, source, rho0, tuple(rhos))


def mark_scheme(source: Signature, mark_name: str, name: str = "mark") -> InterpretationScheme:
    if source.has(mark_name):
        raise SignatureError(f"mark name {mark_name!r} clashes with the source signature")
    target = source.extend([(mark_name, 1)])
    xs = ["x1"]
    rho0 = build_formula(TRUE, source, xs)
    rhos = []
    for sym, arity in source.symbols:
        ys = [f"x{i}" for i in range(1, arity + 1)]
        rhos.append(build_formula(atom(sym, *ys), source, ys))
    rhos.append(build_formula(TRUE, source, xs))
    return InterpretationScheme(name, 1, source, target, rho0, tuple(rhos))


def complement_scheme() -> GraphicalScheme:
    iota = build_formula(TRUE, GRAPH_SIG, ["x1"])
    rho = parse_formula("!E(x1,y1)", GRAPH_SIG, ["x1", "y1"])
    return GraphicalScheme("complement", 1, iota, rho)


def forget_orientation_scheme() -> GraphicalScheme:
    """Graph of a marked linear order: join x and y when either order holds."""
    source = basic_signature(1, 0)
    iota = build_formula(TRUE, source, ["x1"])
    rho = parse_formula("S1(x1,y1) | S1(y1,x1)", source, ["x1", "y1"])
    return GraphicalScheme("underlyingGraph", 1, iota, rho)


PRODUCT_SOURCE_SIG = sig(("E", 2), ("UA", 1), ("E'", 2), ("UB", 1))

PRODUCT_OPS = ("disjointUnion", "direct", "cartesian", "strong", "lex")


def product_scheme(op: str) -> GraphicalScheme:
    """Binary graph products over a strong sum of two marked graphs."""
    src = PRODUCT_SOURCE_SIG
    if op == "disjointUnion":
        iota = build_formula(TRUE, src, ["x1"])
        rho = parse_formula("E(x1,y1) | E'(x1,y1)", src, ["x1", "y1"])
        return GraphicalScheme(op, 1, iota, rho, origin=(op, ()))
    iota = parse_formula("UA(x1) & UB(x2)", src, ["x1", "x2"])
    vars4 = ["x1", "x2", "y1", "y2"]
    if op == "direct":
        rho = parse_formula("E(x1,y1) & E'(x2,y2)", src, vars4)
    elif op == "cartesian":
        rho = parse_formula("E(x1,y1) & x2 = y2 | x1 = y1 & E'(x2,y2)", src, vars4)
    elif op == "strong":
        rho = parse_formula(
            "E(x1,y1) & x2 = y2 | x1 = y1 & E'(x2,y2) | E(x1,y1) & E'(x2,y2)", src, vars4
        )
    elif op == "lex":
        rho = parse_formula("E(x1,y1) | x1 = y1 & E'(x2,y2)", src, vars4)
    else:
        raise SignatureError(f"unknown product operation {op!r}")
    return GraphicalScheme(op, 2, iota, rho, origin=(op, ()))


# ---------------------------------------------------------------------------
# Scheme text format

_HEADER = re.compile(r"\s*interpretation\s+([A-Za-z_][A-Za-z0-9_']*)\s*\{", re.S)
_SIG_ITEM = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_']*)\s*:\s*(\d+)\s*")
_BASIC = re.compile(r"\s*basic\s*\(\s*k\s*=\s*(\d+)\s*,\s*l\s*=\s*(\d+)\s*\)\s*$")


def _parse_sig_text(text: str) -> Signature:
    text = text.strip()
    if text == "graph":
        return GRAPH_SIG
    m = _BASIC.match(text)
    if m:
        return basic_signature(int(m.group(1)), int(m.group(2)))
    if text.startswith("sig{") and text.endswith("}"):
        body = text[4:-1]
        symbols = []
        if body.strip():
            for item in body.split(","):
                m = _SIG_ITEM.match(item)
                if m is None or m.end() != len(item):
                    raise FormulaParseError(f"bad signature item {item!r}", 1)
                symbols.append((m.group(1), int(m.group(2))))
        return Signature(tuple(symbols))
    raise FormulaParseError(f"bad signature spec {text!r}", 1)


def _var_groups(text: str) -> list[list[str]]:
    groups = []
    for chunk in text.split(";"):
        names = [v.strip() for v in chunk.split(",") if v.strip()]
        groups.append(names)
    return groups


def _split_statements(body: str) -> list[str]:
    """Split on ';' at parenthesis/brace depth zero, so variable-group
    separators inside clause heads survive."""
    out = []
    depth = 0
    current = []
    for ch in body:
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch == ";" and depth == 0:
            out.append("".join(current))
            current = []
        else:
            current.append(ch)
    out.append("".join(current))
    return out


def parse_scheme(text: str) -> InterpretationScheme | QuotientScheme:
    """Parse the textual scheme format; returns a quotient scheme when an
    equiv clause is present."""
    m = _HEADER.match(text)
    if m is None:
        raise FormulaParseError("expected 'interpretation NAME {'", 1)
    name = m.group(1)
    body_start = m.end()
    body_end = text.rfind("}")
    if body_end < body_start:
        raise FormulaParseError("missing closing '}'", len(text) + 1)
    statements = [s.strip() for s in _split_statements(text[body_start:body_end]) if s.strip()]

    source = target = None
    p = None
    domain_clause = None
    rel_clauses: list[tuple[str, str, str]] = []
    equiv_clause = None
    class_clauses: list[tuple[str, str, str]] = []
    for stmt in statements:
        head, _, rest = stmt.partition(":")
        head = head.strip()
        rest = rest.strip()
        if head == "source":
            source = _parse_sig_text(rest)
        elif head == "target":
            target = _parse_sig_text(rest)
        elif head == "p":
            p = int(rest)
        elif head.startswith("class "):
            label = head[len("class "):].strip()
            m_eta = re.match(r"eta\s*=\s*(.*?),\s*size\s*=\s*(.*)$", rest, re.S)
            if m_eta is None:
                raise FormulaParseError(f"bad class clause for {label!r}", 1)
            class_clauses.append((label, m_eta.group(1).strip(), m_eta.group(2).strip()))
        else:
            m_head = re.match(r"([A-Za-z_][A-Za-z0-9_']*)\s*\((.*)\)\s*$", head, re.S)
            if m_head is None:
                raise FormulaParseError(f"bad clause head {head!r}", 1)
            kind, vars_text = m_head.group(1), m_head.group(2)
            if kind == "domain":
                domain_clause = (vars_text, rest)
            elif kind == "equiv":
                equiv_clause = (vars_text, rest)
            else:
                rel_clauses.append((kind, vars_text, rest))

    if source is None or target is None or p is None or domain_clause is None:
        raise FormulaParseError("scheme needs source, target, p, and domain clauses", 1)
    domain_vars = [v for group in _var_groups(domain_clause[0]) for v in group]
    if len(domain_vars) != p:
        raise BindingError(f"domain clause needs {p} variables, got {len(domain_vars)}")
    rho0 = parse_formula(domain_clause[1], source, domain_vars)

    rhos_by_name = {}
    for sym, vars_text, formula_text in rel_clauses:
        if not target.has(sym):
            raise BindingError(f"relation clause for unknown target symbol {sym!r}")
        groups = _var_groups(vars_text)
        arity = target.arity(sym)
        if len(groups) != arity or any(len(g) != p for g in groups):
            raise BindingError(
                f"clause for {sym!r} needs {arity} groups of {p} variables"
            )
        flat = [v for g in groups for v in g]
        rhos_by_name[sym] = parse_formula(formula_text, source, flat)
    missing = [s for s, _ in target.symbols if s not in rhos_by_name]
    if missing:
        raise BindingError(f"missing relation clauses for {missing}")
    base = InterpretationScheme(
        name, p, source, target, rho0,
        tuple(rhos_by_name[s] for s, _ in target.symbols),
    )
    if equiv_clause is None:
        if class_clauses:
            raise BindingError("class clauses require an equiv clause")
        return base
    groups = _var_groups(equiv_clause[0])
    if len(groups) != 2 or any(len(g) != p for g in groups):
        raise BindingError("equiv clause needs two groups of p variables")
    varpi = parse_formula(equiv_clause[1], source, [v for g in groups for v in g])
    certificates = tuple(
        ClassCertificate(label, parse_formula(eta_text, source, domain_vars),
                         parse_polynomial(size_text))
        for label, eta_text, size_text in class_clauses
    )
    return QuotientScheme(base, varpi, certificates)


def _sig_to_text(signature: Signature) -> str:
    if signature == GRAPH_SIG:
        return "graph"
    return "sig{" + ", ".join(f"{n}:{a}" for n, a in signature.symbols) + "}"


def scheme_to_text(scheme: InterpretationScheme | QuotientScheme) -> str:
    """Canonical rendering; parsing it back reproduces the scheme."""
    base = scheme.base if isinstance(scheme, QuotientScheme) else scheme
    lines = [f"interpretation {base.name} {{"]
    lines.append(f"  source: {_sig_to_text(base.source)};")
    lines.append(f"  target: {_sig_to_text(base.target)};")
    lines.append(f"  p: {base.p};")
    lines.append(
        f"  domain({','.join(base.rho0.free_vars)}): {formula_to_text(base.rho0)};"
    )
    for (sym, arity), rho in zip(base.target.symbols, base.rhos):
        vars_ = rho.free_vars
        groups = "; ".join(
            ",".join(vars_[b * base.p:(b + 1) * base.p]) for b in range(arity)
        )
        lines.append(f"  {sym}({groups}): {formula_to_text(rho)};")
    if isinstance(scheme, QuotientScheme):
        vars_ = scheme.varpi.free_vars
        groups = "; ".join(
            ",".join(vars_[b * base.p:(b + 1) * base.p]) for b in range(2)
        )
        lines.append(f"  equiv({groups}): {formula_to_text(scheme.varpi)};")
        for cert in scheme.certificates:
            lines.append(
                f"  class {cert.label}: eta={formula_to_text(cert.eta)}, "
                f"size={cert.size.to_expression()};"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
