"""Greedy discretization of a fractional pairing into a perfect matching."""

from dataclasses import dataclass

import numpy as np

from .pairing_lp import vec_pairs


@dataclass(frozen=True)
class Pairing:
    """A perfect matching on 2K users; each entry is (m, n) with m < n."""

    num_users: int
    pairs: tuple

    def __post_init__(self):
        seen = set()
        for m, n in self.pairs:
            if not (1 <= m < n <= self.num_users):
                raise ValueError(f"bad pair ({m}, {n}) for {self.num_users} users")
            seen.update((m, n))
        if len(seen) != self.num_users or len(self.pairs) != self.num_users // 2:
            raise ValueError("pairs must cover every user exactly once")

    def matrix(self) -> np.ndarray:
        """Symmetric binary indicator matrix with zero diagonal."""
        x = np.zeros((self.num_users, self.num_users))
        for m, n in self.pairs:
            x[m - 1, n - 1] = 1.0
            x[n - 1, m - 1] = 1.0
        return x


def greedy_round(x_hat, num_pairs: int) -> Pairing:
    """Pick the largest remaining indicator among fully unmatched pairs.

    Equivalent to the nested-loop scan with -inf overwrites, implemented
    as one descending sort (ties broken by vector position, which keeps
    the result deterministic) followed by a marked-user sweep.
    """
    x_hat = np.asarray(x_hat, dtype=float)
    pairs_in_order = vec_pairs(num_pairs)
    if x_hat.shape != (len(pairs_in_order),):
        raise ValueError(
            f"x_hat length {x_hat.shape} does not match {len(pairs_in_order)} pairs"
        )
    order = sorted(range(len(pairs_in_order)), key=lambda i: (-x_hat[i], i))
    taken = set()
    chosen = []
    for idx in order:
        m, n = pairs_in_order[idx]
        if m in taken or n in taken:
            continue
        chosen.append((m, n))
        taken.update((m, n))
        if len(chosen) == num_pairs:
            break
    return Pairing(num_users=2 * num_pairs, pairs=tuple(sorted(chosen)))
