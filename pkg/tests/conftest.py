from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from shadowlab.seqcore import EventuallyPeriodicSeq
from shadowlab.sft import SftSystem, random_point, two_loop_sft

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def seqs(alphabet: int = 3, max_len: int = 5, span: int = 6):
    """Arbitrary eventually periodic sequences over range(alphabet)."""
    sym = st.integers(0, alphabet - 1)
    word = st.lists(sym, min_size=1, max_size=max_len)
    return st.builds(
        lambda l, c, r, s: EventuallyPeriodicSeq(l, c, r, s, alphabet),
        word, st.lists(sym, max_size=2 * max_len), word, st.integers(-span, span),
    )


def brute_distance(a, b, K: int = 160) -> Fraction:
    """Truncated sum over |k| <= K; within 2^(1-K) of the true distance."""
    return sum((Fraction(1, 1 << abs(k)) for k in range(-K, K + 1) if a[k] != b[k]), Fraction(0))


@pytest.fixture(scope="session")
def x34():
    return two_loop_sft(3, 4)


@pytest.fixture(scope="session")
def x23():
    return two_loop_sft(2, 3)


@pytest.fixture(scope="session")
def sft34(x34):
    return SftSystem(x34)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def two_loop_points(draw, p: int = 3, q: int = 4):
    """Random admissible points of X_(p,q), drawn through a seeded generator."""
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_point(two_loop_sft(p, q), np.random.default_rng(seed))


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """record(number, title, ok, detail, seconds): one verdict line per criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(number: int, title: str, ok: bool, detail: str, seconds: float) -> bool:
        verdict = "PASS" if ok else "FAIL"
        line = f"criterion {number:>2} {verdict}  {title} ({seconds:.2f} s): {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
