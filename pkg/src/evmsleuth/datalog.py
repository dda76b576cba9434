"""A small embedded Datalog engine with stratified negation.

Rules are built in Python: relations are declared with an arity, atoms
are plain tuples of relation name and terms, terms are `Var` objects,
constants, or the `ANY` wildcard.  `neg` wraps an atom as a negated
membership test and `neq` adds an inequality constraint.

Two evaluators are provided on purpose.  `evaluate` is the production
path: semi-naive iteration with hash-join indexes.  `naive_evaluate`
recomputes every rule against the full database with a separate
nested-loop matcher until nothing changes.  Keeping the slow twin
independent lets tests cross-check the fast path tuple for tuple.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping


class DatalogError(Exception):
    pass


class SchemaError(DatalogError):
    pass


class RangeRestrictionError(DatalogError):
    pass


class UnstratifiableError(DatalogError):
    pass


class EvaluationTimeout(DatalogError):
    pass


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name})"


class _Wildcard:
    def __repr__(self) -> str:
        return "ANY"


ANY = _Wildcard()


@dataclass(frozen=True)
class Negated:
    atom: tuple


@dataclass(frozen=True)
class NotEqual:
    left: object
    right: object


def neg(atom: tuple) -> Negated:
    return Negated(atom)


def neq(left, right) -> NotEqual:
    return NotEqual(left, right)


@dataclass
class Rule:
    head: tuple
    positives: list[tuple]
    negatives: list[Negated]
    constraints: list[NotEqual]


def _terms_of(atom: tuple):
    return atom[1:]


def _vars_in(terms) -> set[str]:
    return {t.name for t in terms if isinstance(t, Var)}


class Program:
    def __init__(self) -> None:
        self._arities: dict[str, int] = {}
        self._facts: dict[str, set[tuple]] = {}
        self._rules: list[Rule] = []

    # ------------------------------------------------------------------
    # construction

    def declare(self, name: str, arity: int) -> None:
        if name in self._arities:
            if self._arities[name] != arity:
                raise SchemaError(f"relation {name!r} redeclared with arity {arity}")
            return
        if arity < 1:
            raise SchemaError(f"relation {name!r} needs at least one column")
        self._arities[name] = arity
        self._facts[name] = set()

    def _check_atom(self, atom: tuple, where: str) -> None:
        if not isinstance(atom, tuple) or not atom or not isinstance(atom[0], str):
            raise SchemaError(f"{where}: atom must be (relation, term, ...): {atom!r}")
        name = atom[0]
        if name not in self._arities:
            raise SchemaError(f"{where}: relation {name!r} is not declared")
        if len(atom) - 1 != self._arities[name]:
            raise SchemaError(
                f"{where}: relation {name!r} takes {self._arities[name]} terms, "
                f"got {len(atom) - 1}"
            )

    def fact(self, name: str, *values) -> None:
        self._check_atom((name, *values), "fact")
        for value in values:
            if isinstance(value, (Var, _Wildcard)):
                raise SchemaError(f"fact {name!r} must be ground, got {value!r}")
        self._facts[name].add(tuple(values))

    def rule(self, head: tuple, body: Iterable = ()) -> None:
        positives: list[tuple] = []
        negatives: list[Negated] = []
        constraints: list[NotEqual] = []
        for item in body:
            if isinstance(item, Negated):
                self._check_atom(item.atom, "rule body")
                negatives.append(item)
            elif isinstance(item, NotEqual):
                constraints.append(item)
            else:
                self._check_atom(item, "rule body")
                positives.append(item)
        self._check_atom(head, "rule head")

        bound = set()
        for atom in positives:
            bound |= _vars_in(_terms_of(atom))
        for term in _terms_of(head):
            if isinstance(term, _Wildcard):
                raise RangeRestrictionError(f"wildcard in rule head: {head!r}")
            if isinstance(term, Var) and term.name not in bound:
                raise RangeRestrictionError(
                    f"head variable {term.name!r} is not bound by a positive atom"
                )
        for negated in negatives:
            for term in _terms_of(negated.atom):
                if isinstance(term, Var) and term.name not in bound:
                    raise RangeRestrictionError(
                        f"variable {term.name!r} of negated atom "
                        f"{negated.atom[0]!r} is not bound by a positive atom"
                    )
        for constraint in constraints:
            for term in (constraint.left, constraint.right):
                if isinstance(term, _Wildcard):
                    raise RangeRestrictionError("wildcard in inequality")
                if isinstance(term, Var) and term.name not in bound:
                    raise RangeRestrictionError(
                        f"inequality variable {term.name!r} is not bound"
                    )
        self._rules.append(Rule(head, positives, negatives, constraints))

    def load_facts_dir(self, directory: str | Path) -> None:
        """Read `<relation>.facts` TSV files for declared relations."""
        directory = Path(directory)
        for name, arity in sorted(self._arities.items()):
            path = directory / f"{name}.facts"
            if not path.exists():
                continue
            for line_no, line in enumerate(path.read_text().splitlines(), start=1):
                if not line:
                    continue
                row = tuple(line.split("\t"))
                if len(row) != arity:
                    raise SchemaError(
                        f"{path.name}:{line_no}: expected {arity} columns, got {len(row)}"
                    )
                self._facts[name].add(row)

    # ------------------------------------------------------------------
    # stratification

    def stratify(self) -> list[list[str]]:
        """Relations grouped into evaluation strata.  Negation through a
        dependency cycle has no stratified model and raises."""
        names = sorted(self._arities)
        pos_edges: dict[str, set[str]] = {n: set() for n in names}
        neg_edges: dict[str, set[str]] = {n: set() for n in names}
        for rule in self._rules:
            head = rule.head[0]
            for atom in rule.positives:
                pos_edges[atom[0]].add(head)
            for negated in rule.negatives:
                neg_edges[negated.atom[0]].add(head)

        sccs = _tarjan_sccs(names, lambda n: sorted(pos_edges[n] | neg_edges[n]))
        scc_of = {n: i for i, scc in enumerate(sccs) for n in scc}
        for scc in sccs:
            members = set(scc)
            for src in scc:
                if neg_edges[src] & members:
                    raise UnstratifiableError(
                        "negation inside a dependency cycle through: "
                        + ", ".join(sorted(members))
                    )

        level = [0] * len(sccs)
        # sccs from Tarjan come in reverse topological order of the
        # condensation; walk them topologically to assign levels.
        for i in reversed(range(len(sccs))):
            for src in sccs[i]:
                for dst in pos_edges[src]:
                    j = scc_of[dst]
                    if j != i:
                        level[j] = max(level[j], level[i])
                for dst in neg_edges[src]:
                    j = scc_of[dst]
                    level[j] = max(level[j], level[i] + 1)

        strata: dict[int, list[str]] = {}
        for i, scc in enumerate(sccs):
            strata.setdefault(level[i], []).extend(scc)
        return [sorted(strata[lvl]) for lvl in sorted(strata)]

    # ------------------------------------------------------------------
    # semi-naive evaluation

    def evaluate(self, deadline_at: float | None = None) -> dict[str, set[tuple]]:
        strata = self.stratify()
        db = {name: set(rows) for name, rows in self._facts.items()}
        ticker = _Ticker(deadline_at)
        # Column indexes, shared across rule passes.  A relation only ever
        # grows during evaluation, so an index is stale exactly when the row
        # count it was built from differs from the relation's current size.
        cache: dict[tuple[str, tuple[int, ...]], tuple[int, dict]] = {}
        for stratum in strata:
            members = set(stratum)
            rules = [r for r in self._rules if r.head[0] in members]
            delta: dict[str, set[tuple]] = {name: set() for name in members}
            for rule in rules:
                for derived in self._join_rule(rule, db, None, None, ticker, cache):
                    if derived not in db[rule.head[0]]:
                        db[rule.head[0]].add(derived)
                        delta[rule.head[0]].add(derived)
            while any(delta.values()):
                fresh: dict[str, set[tuple]] = {name: set() for name in members}
                for rule in rules:
                    for pos, atom in enumerate(rule.positives):
                        changed = delta.get(atom[0])
                        if not changed:
                            continue
                        for derived in self._join_rule(
                            rule, db, pos, changed, ticker, cache
                        ):
                            if derived not in db[rule.head[0]]:
                                db[rule.head[0]].add(derived)
                                fresh[rule.head[0]].add(derived)
                delta = fresh
        return db

    @staticmethod
    def _indexed(db, cache, name: str, cols: tuple[int, ...]) -> dict:
        source = db[name]
        entry = cache.get((name, cols))
        if entry is not None and entry[0] == len(source):
            return entry[1]
        index: dict = {}
        for row in source:
            index.setdefault(tuple(row[c] for c in cols), []).append(row)
        cache[(name, cols)] = (len(source), index)
        return index

    def _join_rule(self, rule, db, delta_pos, delta_rows, ticker, cache):
        """One rule pass, joining positive atoms left to right with an
        index on already-bound columns.  When `delta_pos` is given, that
        atom only matches rows from `delta_rows`."""
        results: set[tuple] = set()

        # Bound-column positions of each negated atom never vary across
        # bindings, so the membership test is a single index probe.
        neg_plans = []
        for negated in rule.negatives:
            terms = _terms_of(negated.atom)
            cols = tuple(
                i for i, t in enumerate(terms) if not isinstance(t, _Wildcard)
            )
            neg_plans.append((negated.atom[0], cols, [terms[c] for c in cols]))

        delta_indexes: dict[tuple[int, ...], dict] = {}

        def rows_for(i: int, atom: tuple, env: dict):
            source = delta_rows if i == delta_pos else db[atom[0]]
            bound: list[tuple[int, object]] = []
            for col, term in enumerate(_terms_of(atom)):
                if isinstance(term, Var):
                    if term.name in env:
                        bound.append((col, env[term.name]))
                elif not isinstance(term, _Wildcard):
                    bound.append((col, term))
            if not bound or len(source) <= 8:
                return source
            cols = tuple(col for col, _ in bound)
            if i == delta_pos:
                # Delta rows are fixed for the duration of this pass but
                # differ between passes, so they get a call-local index.
                index = delta_indexes.get(cols)
                if index is None:
                    index = {}
                    for row in source:
                        index.setdefault(
                            tuple(row[c] for c in cols), []
                        ).append(row)
                    delta_indexes[cols] = index
            else:
                index = self._indexed(db, cache, atom[0], cols)
            return index.get(tuple(v for _, v in bound), ())

        def resolve(term, env):
            return env[term.name] if isinstance(term, Var) else term

        def extend(i: int, env: dict) -> None:
            ticker.tick()
            if i == len(rule.positives):
                for constraint in rule.constraints:
                    if resolve(constraint.left, env) == resolve(constraint.right, env):
                        return
                for name, cols, terms in neg_plans:
                    if not cols:
                        if db[name]:
                            return
                        continue
                    index = self._indexed(db, cache, name, cols)
                    if tuple(resolve(t, env) for t in terms) in index:
                        return
                results.add(tuple(resolve(t, env) for t in _terms_of(rule.head)))
                return
            atom = rule.positives[i]
            terms = _terms_of(atom)
            for row in rows_for(i, atom, env):
                extended = dict(env)
                ok = True
                for term, value in zip(terms, row):
                    if isinstance(term, _Wildcard):
                        continue
                    if isinstance(term, Var):
                        if term.name in extended:
                            if extended[term.name] != value:
                                ok = False
                                break
                        else:
                            extended[term.name] = value
                    elif term != value:
                        ok = False
                        break
                if ok:
                    extend(i + 1, extended)

        extend(0, {})
        return results

    # ------------------------------------------------------------------
    # naive evaluation (independent cross-check)

    def naive_evaluate(self) -> dict[str, set[tuple]]:
        strata = self.stratify()
        db = {name: set(rows) for name, rows in self._facts.items()}
        for stratum in strata:
            members = set(stratum)
            rules = [r for r in self._rules if r.head[0] in members]
            changed = True
            while changed:
                changed = False
                for rule in rules:
                    for env in _naive_bindings(rule.positives, db, {}):
                        if any(
                            _naive_resolve(c.left, env) == _naive_resolve(c.right, env)
                            for c in rule.constraints
                        ):
                            continue
                        if any(
                            _naive_contains(db[n.atom[0]], n.atom, env)
                            for n in rule.negatives
                        ):
                            continue
                        row = tuple(_naive_resolve(t, env) for t in _terms_of(rule.head))
                        if row not in db[rule.head[0]]:
                            db[rule.head[0]].add(row)
                            changed = True
        return db


def _naive_resolve(term, env):
    if isinstance(term, Var):
        return env[term.name]
    return term


def _naive_bindings(atoms, db, env):
    if not atoms:
        yield env
        return
    name, *terms = atoms[0]
    # Snapshot: a recursive rule may extend this very relation while we
    # iterate; additions are picked up by the next outer pass.
    for row in list(db[name]):
        candidate = dict(env)
        matched = True
        for term, value in zip(terms, row):
            if isinstance(term, _Wildcard):
                continue
            if isinstance(term, Var):
                if term.name in candidate and candidate[term.name] != value:
                    matched = False
                    break
                candidate[term.name] = value
            elif term != value:
                matched = False
                break
        if matched:
            yield from _naive_bindings(atoms[1:], db, candidate)


def _naive_contains(rows, atom, env) -> bool:
    _, *terms = atom
    for row in rows:
        hit = True
        for term, value in zip(terms, row):
            if isinstance(term, _Wildcard):
                continue
            if _naive_resolve(term, env) != value:
                hit = False
                break
        if hit:
            return True
    return False


class _Ticker:
    """Cooperative deadline checker, polled every few hundred steps."""

    def __init__(self, deadline_at: float | None) -> None:
        self.deadline_at = deadline_at
        self.count = 0

    def tick(self) -> None:
        if self.deadline_at is None:
            return
        self.count += 1
        if self.count % 512 == 0 and time.monotonic() > self.deadline_at:
            raise EvaluationTimeout("evaluation deadline exceeded")


def _tarjan_sccs(nodes, successors) -> list[list[str]]:
    """Strongly connected components, emitted in reverse topological
    order of the condensation (every edge goes from a later component to
    an earlier one in the returned list)."""
    index_of: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    result: list[list[str]] = []
    counter = [0]

    def strongconnect(node: str) -> None:
        index_of[node] = low[node] = counter[0]
        counter[0] += 1
        stack.append(node)
        on_stack.add(node)
        for succ in successors(node):
            if succ not in index_of:
                strongconnect(succ)
                low[node] = min(low[node], low[succ])
            elif succ in on_stack:
                low[node] = min(low[node], index_of[succ])
        if low[node] == index_of[node]:
            component = []
            while True:
                member = stack.pop()
                on_stack.discard(member)
                component.append(member)
                if member == node:
                    break
            result.append(sorted(component))

    for node in nodes:
        if node not in index_of:
            strongconnect(node)
    return result


# ----------------------------------------------------------------------
# extracted-fact container


@dataclass
class FactBase:
    """Named relations with fixed column schemas, writable as TSV."""

    schemas: dict[str, tuple[str, ...]] = field(default_factory=dict)
    rows: dict[str, set[tuple[str, ...]]] = field(default_factory=dict)

    def declare(self, name: str, *columns: str) -> None:
        if name in self.schemas and self.schemas[name] != columns:
            raise SchemaError(f"relation {name!r} redeclared with different columns")
        self.schemas.setdefault(name, columns)
        self.rows.setdefault(name, set())

    def add(self, name: str, *values: str) -> None:
        if name not in self.schemas:
            raise SchemaError(f"relation {name!r} is not declared")
        if len(values) != len(self.schemas[name]):
            raise SchemaError(
                f"relation {name!r} takes {len(self.schemas[name])} columns, "
                f"got {len(values)}"
            )
        assert all(isinstance(v, str) for v in values)
        self.rows[name].add(values)

    def write_tsv(self, directory: str | Path) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name in sorted(self.schemas):
            path = directory / f"{name}.facts"
            lines = ["\t".join(row) for row in sorted(self.rows[name])]
            path.write_text("".join(line + "\n" for line in lines))
            written.append(path)
        return written

    def feed(self, program: Program) -> None:
        for name, columns in sorted(self.schemas.items()):
            program.declare(name, len(columns))
            for row in self.rows[name]:
                program.fact(name, *row)
