"""Round arithmetic shared by all robots: every quantity here is a pure
function of n, b, the exploration length T and (optionally) the max degree."""

from __future__ import annotations

from dataclasses import dataclass

HOP_RADII = (1, 2, 3, 4, 5)


def map_round_budget(n: int) -> int:
    """Rounds reserved for map construction: ``20 n^3``."""
    if n < 1:
        raise ValueError("n must be positive")
    return 20 * n**3


def bit_budget(n: int, b: int) -> int:
    """Number of ID-bit cycles: bit length of the largest label ``n^b`` plus one.

    Equals ``ceil(b log2 n) + 1`` computed in exact integer arithmetic
    (``n^b - 1`` has ``ceil(b log2 n)`` bits).
    """
    return max(1, (n**b - 1).bit_length()) + 1


def cycle_length(i: int, n: int, delta_aware: bool = False, delta: int | None = None) -> int:
    """Rounds per cycle of the radius-``i`` ball walk: ``sum_{j=1..i} 2 d^j`` with
    ``d = n-1``, or ``d = delta`` in delta-aware mode."""
    if i < 0:
        raise ValueError("hop radius must be non-negative")
    if delta_aware:
        if delta is None or not (1 <= delta <= max(1, n - 1)):
            raise ValueError("delta-aware mode needs 1 <= delta <= n-1")
        d = delta
    else:
        d = n - 1
    return sum(2 * d**j for j in range(1, i + 1))


def uxs_stage_bound(uxs_T: int, n: int, b: int) -> int:
    """Worst-case rounds of the exploration-sequence stage: ``2T (B_max + 1)``."""
    return 2 * uxs_T * (bit_budget(n, b) + 1)


@dataclass(frozen=True)
class Schedule:
    """Step layout of the staged gathering algorithm.

    Step 1 occupies ``[0, S1)``; step ``i`` in 2..6 occupies ``[S_{i-1}, S_i)``
    with the hop walk first and the map-and-tour phase after it; step 7 (the
    exploration-sequence stage) starts at ``S7 = S6``.  ``T[i]`` and ``D[i]``
    are indexed by hop radius (index 0 is the undispersed case, ``T(0) = 0``);
    ``S`` is indexed by step (index 0 unused and set to 0).
    """

    n: int
    b: int
    uxs_T: int
    R1: int
    R: int
    B_max: int
    T: tuple[int, ...]
    D: tuple[int, ...]
    S: tuple[int, ...]
    delta_aware: bool = False
    delta: int | None = None

    def step_start(self, step: int) -> int:
        if not 1 <= step <= 7:
            raise ValueError("steps are numbered 1..7")
        return 0 if step == 1 else self.S[step - 1]

    def hop_window(self, step: int) -> tuple[int, int]:
        """Rounds ``[start, end)`` of the hop walk inside step 2..6."""
        start = self.step_start(step)
        return start, start + self.D[step - 1]

    def undispersed_start(self, step: int) -> int:
        return self.step_start(step) if step == 1 else self.hop_window(step)[1]

    def boundaries(self, start_step: int = 1) -> tuple[int, ...]:
        """Aloneness-check rounds, relative to a run that begins at ``start_step``."""
        base = self.step_start(start_step)
        return tuple(self.S[j] - base for j in range(start_step, 7))

    @property
    def uxs_bound(self) -> int:
        return 2 * self.uxs_T * (self.B_max + 1)

    def total_bound(self, start_step: int = 1) -> int:
        return self.S[6] - self.step_start(start_step) + self.uxs_bound


def compute_schedule(
    n: int, b: int, uxs_T: int, delta_aware: bool = False, delta: int | None = None
) -> Schedule:
    if n < 2:
        raise ValueError("the staged schedule needs n >= 2")
    if b < 2:
        raise ValueError("b must be at least 2")
    R1 = map_round_budget(n)
    R = R1 + 2 * n
    B_max = bit_budget(n, b)
    T = tuple(cycle_length(i, n, delta_aware, delta) for i in range(6))
    D = tuple(B_max * t for t in T)
    S = [0, R]
    for i in range(2, 7):
        S.append(S[i - 1] + D[i - 1] + R)
    S.append(S[6])
    return Schedule(
        n=n, b=b, uxs_T=uxs_T, R1=R1, R=R, B_max=B_max, T=T, D=D, S=tuple(S),
        delta_aware=delta_aware, delta=delta,
    )
