import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracle  # noqa: E402

ACCEPTANCE: dict = {}


def oracle_windows(w: int, h: int, samples: int, seed: int = 1, max_shift: int = 16) -> set:
    """w x h windows of oracle tilings at offsets near multiples of large powers of two."""
    rnd = random.Random(seed)
    out = set()
    for _ in range(samples):
        s, t = rnd.randrange(max_shift), rnd.randrange(max_shift)
        ox = (rnd.getrandbits(20) << s) + rnd.randrange(-2, 3)
        oy = (rnd.getrandbits(20) << t) + rnd.randrange(-2, 3)
        if ox <= 2 or oy <= 2:
            continue
        out.add(tuple(tuple(r) for r in oracle.grid(w, h, ox, oy)))
    return out


@pytest.fixture(scope="session")
def language3():
    from robinson.patchwork import stabilized_language

    return stabilized_language((3, 3))


@pytest.fixture(scope="session")
def oracle3():
    return oracle_windows(3, 3, 150000)


@pytest.fixture(scope="session")
def tilde_windows3():
    from robinson.substitution import language_windows, omega_tilde_rule

    return language_windows(omega_tilde_rule(), 3, 3)[0]


@pytest.fixture(scope="session")
def tilde_cohomology():
    from robinson.homology import compute_cohomology
    from robinson.substitution import omega_tilde_rule

    return compute_cohomology(omega_tilde_rule())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}")
