#!/usr/bin/env python3
"""Exact expected final greedy accuracy of the tabular learner.

Each state's row evolves independently of the others: it starts at zero,
is visited a fixed number of times, picks uniformly among tied maxima and
receives a truthful judgment with probability p. Enumerating every tie
choice and judgment per visit count gives the exact expectation, which the
test suites pin.

    python3 final_accuracy.py --alpha 0.3 --p 0.89 --actions 3 --visits 3 3 3 3 3
"""

import argparse
from functools import lru_cache


def expected_state_accuracy(alpha, p, n_actions, visits):
    @lru_cache(maxsize=None)
    def go(q, left):
        best = max(q)
        ties = [a for a in range(n_actions) if q[a] == best]
        if left == 0:
            return (1.0 / len(ties)) if 0 in ties else 0.0
        total = 0.0
        for a in ties:
            for truthful, weight in ((True, p), (False, 1.0 - p)):
                if weight == 0.0:
                    continue
                h = 1.0 if (a == 0) == truthful else -1.0
                nq = list(q)
                nq[a] += alpha * (h - nq[a])
                total += weight / len(ties) * go(tuple(nq), left - 1)
        return total

    # Action 0 is the correct one; the value does not depend on which.
    return go(tuple([0.0] * n_actions), visits)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, required=True)
    ap.add_argument("--p", type=float, required=True)
    ap.add_argument("--actions", type=int, default=3)
    ap.add_argument("--visits", type=int, nargs="+", required=True, help="visit count of every state")
    args = ap.parse_args()
    per = [expected_state_accuracy(args.alpha, args.p, args.actions, v) for v in args.visits]
    print(repr(sum(per) / len(per)))


if __name__ == "__main__":
    main()
