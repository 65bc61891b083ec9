import pytest

from hhcassign import Instance

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def make_instance(n=1, m=1, s=1, skills=None, demand=None, capacity=None, max_cg=None,
                  max_pt=None, cost=None, budget=100, utility=None) -> Instance:
    """Instance builder with permissive defaults for hand-written cases."""
    return Instance(
        n=n, m=m, s=s,
        skills=skills if skills is not None else [[1] * s for _ in range(n)],
        demand=demand if demand is not None else [[1] * s for _ in range(m)],
        capacity=capacity if capacity is not None else [10] * n,
        max_caregivers_per_patient=max_cg if max_cg is not None else [n or 1] * m,
        max_patients_per_caregiver=max_pt if max_pt is not None else [m or 1] * n,
        unit_cost=cost if cost is not None else [[[1] * s for _ in range(m)] for _ in range(n)],
        budget=budget,
        utility=utility if utility is not None else [1] * m,
    )


@pytest.fixture
def greedy_trap():
    """2x2x1 instance where greedy stops with budget left for one more hour."""
    return make_instance(n=2, m=2, s=1, demand=[[1], [1]], capacity=[1, 1], max_cg=[1, 1],
                         max_pt=[1, 1], budget=2, utility=[4, 3])


def record_acceptance(name: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
