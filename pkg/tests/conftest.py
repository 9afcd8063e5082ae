from __future__ import annotations

from itertools import product

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ocforget.logic import And, Atom, Bot, Iff, Implies, Not, Or, Signature, Top, WorldSet
from ocforget.ocf import RankingFunction

settings.register_profile(
    "default", max_examples=150, derandomize=True, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ATOMS = "abc"


def sig_of(n: int) -> Signature:
    return Signature(tuple(ATOMS[:n]))


signatures = st.integers(1, 3).map(sig_of)


@st.composite
def ocfs(draw, sig: Signature | None = None, max_rank: int = 4) -> RankingFunction:
    sig = sig or draw(signatures)
    ranks = draw(st.lists(st.integers(0, max_rank), min_size=sig.size, max_size=sig.size))
    ranks[draw(st.integers(0, len(ranks) - 1))] = 0
    return RankingFunction(sig, tuple(ranks))


def formulas(atoms: str = ATOMS):
    leaves = st.sampled_from([Top(), Bot()] + [Atom(x) for x in atoms])
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            sub.map(Not),
            st.tuples(sub, sub).map(lambda p: And(*p)),
            st.tuples(sub, sub).map(lambda p: Or(*p)),
            st.tuples(sub, sub).map(lambda p: Implies(*p)),
            st.tuples(sub, sub).map(lambda p: Iff(*p)),
        ),
        max_leaves=8,
    )


@st.composite
def world_sets(draw, sig: Signature, contingent: bool = False) -> WorldSet:
    full = sig.full_mask
    lo, hi = (1, full - 1) if contingent else (0, full)
    return WorldSet(sig, draw(st.integers(lo, hi)))


# ---------------------------------------------------------------------------
# Independent oracles: direct readings of the definitions, no shared helpers.


def oracle_eval(f, valuation: dict[str, bool]) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Atom):
        return valuation[f.name]
    if isinstance(f, Not):
        return not oracle_eval(f.arg, valuation)
    left, right = oracle_eval(f.left, valuation), oracle_eval(f.right, valuation)
    if isinstance(f, And):
        return left and right
    if isinstance(f, Or):
        return left or right
    if isinstance(f, Implies):
        return (not left) or right
    if isinstance(f, Iff):
        return left == right
    raise TypeError(f)


def valuations(atoms: tuple[str, ...]):
    """Valuations indexed like worlds: bit i of the index is atom i."""
    for index in range(1 << len(atoms)):
        yield index, {x: bool(index >> i & 1) for i, x in enumerate(atoms)}


def oracle_models(f, atoms: tuple[str, ...]) -> set[int]:
    return {i for i, v in valuations(atoms) if oracle_eval(f, v)}


def oracle_restrict(w: int, atoms: tuple[str, ...], sub: tuple[str, ...]) -> int:
    return sum(1 << j for j, x in enumerate(sub) if w >> atoms.index(x) & 1)


def oracle_rank(k: RankingFunction, worlds) -> float:
    return min((k.ranks[w] for w in worlds), default=float("inf"))


def oracle_conditionals(k: RankingFunction, atoms: tuple[str, ...]) -> set[tuple[frozenset, frozenset]]:
    """All accepted conditionals (B|A) over ``atoms`` ⊆ sig(κ), as pairs of model sets."""
    sig_atoms = k.signature.atoms
    worlds = range(1 << len(atoms))
    narrowed: dict[int, float] = {}
    for w in range(1 << len(sig_atoms)):
        v = oracle_restrict(w, sig_atoms, atoms)
        narrowed[v] = min(narrowed.get(v, float("inf")), k.ranks[w])
    out = set()
    subsets = [frozenset(w for w in worlds if s >> w & 1) for s in range(1 << (1 << len(atoms)))]
    for a in subsets:
        for b in subsets:
            yes = min((narrowed[w] for w in a & b), default=float("inf"))
            no = min((narrowed[w] for w in a - b), default=float("inf"))
            if yes < no:
                out.add((a, b))
    return out


def all_ocfs(sig: Signature, max_rank: int):
    for ranks in product(range(max_rank + 1), repeat=sig.size):
        if 0 in ranks:
            yield RankingFunction(sig, ranks)


@pytest.fixture(scope="session")
def fixtures_root():
    from ocforget.lab import fixture_root

    return fixture_root()


# ---------------------------------------------------------------------------
# Acceptance criteria: one summary line per criterion, aggregated over its tests.

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and not report.failed):
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": 0, "failed": 0, "skipped": 0})
    if report.when == "call" or report.failed:
        entry[report.outcome] += 1


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if not e["failed"] and e["passed"] else "FAIL"
        terminalreporter.write_line(
            f"criterion {number} {status}: {e['title']} ({e['passed']} passed, {e['failed']} failed)")
