"""
Copyright 2024 The entroscope developers
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.

Bit conventions
---------------
SPIN_HALF: bit i of a code is 1 when spin i points up.
FERMION_SITE4: the code is up_mask | (dn_mask << N). Mode m < N is the up orbital of site m,
mode N + i the down orbital of site i. An amplitude multiplies the product of creation
operators taken in ascending mode order acting on the vacuum.
"""

from dataclasses import dataclass, field
import numpy as np
from entroscope.utils import C, popcount

SPIN_PARITIES = ('even', 'odd')


@dataclass(frozen=True, eq=False)
class SectorBasis:
    kind: str
    num_sites: int
    sector: object
    states: np.ndarray = field(repr=False)

    @property
    def dimension(self):
        return len(self.states)

    @property
    def local_dimension(self):
        return 2 if self.kind == C.SPIN_HALF else 4

    @property
    def full_dimension(self):
        return self.local_dimension ** self.num_sites

    def index(self, codes):
        """
        Ordinal of each bit code; raises if a code lies outside the sector
        """

        codes = np.asarray(codes, dtype=np.int64)
        pos = np.searchsorted(self.states, codes)
        pos_clipped = np.minimum(pos, len(self.states) - 1)
        if np.any(self.states[pos_clipped] != codes):
            raise ValueError('State outside the %s sector %s' % (self.kind, self.sector))
        return pos_clipped

    def up_masks(self):
        return self.states & ((1 << self.num_sites) - 1)

    def dn_masks(self):
        return self.states >> self.num_sites


@dataclass(frozen=True, eq=False)
class FullStateVector:
    amplitudes: np.ndarray = field(repr=False)
    kind: str
    num_sites: int

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))


def _spin_codes(n, sector):
    codes = np.arange(1 << n, dtype=np.int64)
    if sector is None or sector == 'full':
        return codes
    n_up = popcount(codes, n)
    if sector in SPIN_PARITIES:
        # parity of the number of down spins, the eigenvalue of prod_i sigma^z_i
        return codes[(n - n_up) % 2 == (0 if sector == 'even' else 1)]
    sz_twice = int(sector)
    if (n + sz_twice) % 2 != 0 or abs(sz_twice) > n:
        raise ValueError('Sector 2Sz=%d is not reachable with %d spins' % (sz_twice, n))
    return codes[n_up == (n + sz_twice) // 2]


def enumerate_sector(kind, num_sites, sector=None):
    """
    Sorted bit codes of a symmetry sector.

    kind SPIN_HALF takes sector = twice the total Sz (int), 'even'/'odd' spin-flip parity, or None for the
    full space; kind FERMION_SITE4 takes sector = (n_up, n_dn).
    """

    n = int(num_sites)
    if n < 1:
        raise ValueError('Need at least one site, got %d' % n)

    if kind == C.SPIN_HALF:
        if n > 30:
            raise ValueError('Spin sectors are limited to 30 sites, got %d' % n)
        states = _spin_codes(n, sector)
        sector = 'full' if sector is None else sector

    elif kind == C.FERMION_SITE4:
        if n > 15:
            raise ValueError('Fermion sectors are limited to 15 sites, got %d' % n)
        try:
            n_up, n_dn = (int(x) for x in sector)
        except (TypeError, ValueError):
            raise ValueError('Fermion sector must be a pair (n_up, n_dn), got %s' % (sector,))
        if not (0 <= n_up <= n and 0 <= n_dn <= n):
            raise ValueError('Fermion sector (%d, %d) needs 0 <= n_up, n_dn <= %d' % (n_up, n_dn, n))
        masks = np.arange(1 << n, dtype=np.int64)
        counts = popcount(masks, n)
        up = masks[counts == n_up]
        dn = masks[counts == n_dn]
        # dn in the high bits and iterated outermost keeps the codes sorted
        states = ((dn[:, None] << n) | up[None, :]).ravel()
        sector = (n_up, n_dn)

    else:
        raise ValueError('Unknown basis kind "%s"; choose %s or %s' % (kind, C.SPIN_HALF, C.FERMION_SITE4))

    if len(states) == 0:
        raise ValueError('Empty %s sector %s for %d sites' % (kind, sector, n))
    return SectorBasis(kind, n, sector, states)


def embed_full(vector, basis):
    """
    Place sector amplitudes at their product-basis positions
    """

    vector = np.asarray(vector, dtype=float)
    if vector.shape != (basis.dimension,):
        raise ValueError('Vector of length %d does not match sector dimension %d'
                         % (vector.size, basis.dimension))
    norm = np.linalg.norm(vector)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError('State must be normalized, got norm %.15f' % norm)
    amplitudes = np.zeros(basis.full_dimension)
    amplitudes[basis.states] = vector
    return FullStateVector(amplitudes, basis.kind, basis.num_sites)


def fermion_reorder_sign(mask, permutation):
    """
    Sign picked up by a product of creation operators when its occupied modes are reordered.

    permutation[k] is the mode placed at position k of the new order. The sign is (-1) to the number of
    inversions of the permutation restricted to occupied modes. mask may be an integer or an integer array.
    """

    perm = np.asarray(permutation, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(len(perm))):
        raise ValueError('Not a permutation: %s' % (list(perm),))
    masks = np.asarray(mask, dtype=np.int64)
    occupied = [(masks >> p) & 1 for p in perm]
    parity = np.zeros(masks.shape, dtype=np.int64)
    for late in range(len(perm)):
        for early in range(late):
            if perm[early] > perm[late]:
                parity ^= occupied[early] & occupied[late]
    sign = 1 - 2 * parity
    if np.ndim(mask) == 0:
        return int(sign)
    return sign
