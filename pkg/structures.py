import collections
from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, Tuple


class GradedRankRegister(collections.OrderedDict):
    '''
    Ranks indexed by a grading key (a bigrading (h, q), a delta grading or a
    (level, grading) pair). Zero entries are never stored and keys are kept in
    sorted order so that reports iterate deterministically.
    '''

    def __init__(self, sequence: Iterable[Tuple[Hashable, int]] = ()):
        super().__init__()
        for k, v in (sequence.items() if isinstance(sequence, dict) else sequence):
            self.add(k, v)

    def add(self, k: Hashable, v: int) -> None:
        v = super().get(k, 0) + v
        if v:
            super().__setitem__(k, v)
        elif k in self:
            super().__delitem__(k)
        self._resort()

    def _resort(self) -> None:
        for k in sorted(self):
            self.move_to_end(k)

    def __getitem__(self, k: Hashable) -> int:
        return super().get(k, 0)

    def __setitem__(self, k: Hashable, v: int) -> None:
        if k in self:
            super().__delitem__(k)
        self.add(k, v)

    def total(self) -> int:
        return sum(self.values())

    def regrade(self, f: Callable[[Hashable], Hashable]) -> "GradedRankRegister":
        out = GradedRankRegister()
        for k, v in self.items():
            out.add(f(k), v)
        return out

    def shifted(self, dh: int, dq: int) -> "GradedRankRegister":
        return self.regrade(lambda k: (k[0] + dh, k[1] + dq))

    def delta(self) -> "GradedRankRegister":
        '''Collapses (h, q) to the delta grading h - q/2.'''
        return self.regrade(lambda k: k[0] - Fraction(k[1], 2))

    def width(self) -> int:
        '''Number of distinct delta gradings in the support.'''
        return len(self.delta())

    def euler_coefficients(self) -> Dict[int, int]:
        '''Graded Euler characteristic: coefficient of q^j is the signed rank sum.'''
        out: Dict[int, int] = collections.defaultdict(int)
        for (h, q), v in self.items():
            out[q] += (-1) ** h * v
        return {q: c for q, c in sorted(out.items()) if c}

    def as_plain(self) -> Dict[Hashable, int]:
        return dict(self)
