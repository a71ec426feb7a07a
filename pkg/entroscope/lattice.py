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
"""

import sys
import json
import warnings
import itertools
from dataclasses import dataclass
import numpy as np
from scipy.special import comb
from entroscope.utils import C, FAMILY_LABELS

ALLOWED_SIZES = {C.ISING_CHAIN: 'even N >= 4',
                 C.HUBBARD_CHAIN: 'even N >= 4',
                 C.DIMER_2D: '4x4',
                 C.J1J2_2D: '4x4',
                 C.CHECKERBOARD_2D: '4x4'}


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    label: str

    def key(self):
        return (min(self.i, self.j), max(self.i, self.j), self.label)


@dataclass(frozen=True)
class Lattice:
    """
    Finite cluster with periodic boundary conditions. Sites of 2D clusters are numbered x + Lx*y.
    """

    num_sites: int
    dimension: int
    shape: tuple
    bonds: tuple
    name: str
    family: str = None

    def __post_init__(self):
        if self.num_sites < 1:
            raise ValueError('Lattice needs at least one site, got %d' % self.num_sites)
        if self.dimension not in (1, 2) or len(self.shape) != self.dimension:
            raise ValueError('Lattice dimension must be 1 or 2 and match shape %s' % (self.shape,))
        if int(np.prod(self.shape)) != self.num_sites:
            raise ValueError('Lattice shape %s does not hold %d sites' % (self.shape, self.num_sites))
        seen = set()
        for b in self.bonds:
            if not (0 <= b.i < self.num_sites and 0 <= b.j < self.num_sites):
                raise ValueError('Bond (%d, %d) references a site outside [0, %d)' % (b.i, b.j, self.num_sites))
            if b.i == b.j:
                raise ValueError('Self-bond on site %d' % b.i)
            if b.key() in seen:
                raise ValueError('Duplicate bond (%d, %d, %s)' % b.key())
            seen.add(b.key())
        if self.family is not None:
            allowed = FAMILY_LABELS[self.family]
            for b in self.bonds:
                if b.label not in allowed:
                    raise ValueError('Bond label %s is not allowed for %s (allowed: %s)'
                                     % (b.label, self.family, ', '.join(allowed)))

    def degree(self, site, label=None):
        return sum(1 for b in self.bonds if site in (b.i, b.j) and (label is None or b.label == label))

    def translations(self):
        """
        Site maps of the translations by two lattice spacings along each axis
        """

        maps = []
        if self.dimension == 1:
            n = self.shape[0]
            maps.append(tuple((s + 2) % n for s in range(n)))
        else:
            lx, ly = self.shape
            maps.append(tuple((s % lx + 2) % lx + lx * (s // lx) for s in range(self.num_sites)))
            maps.append(tuple(s % lx + lx * ((s // lx + 2) % ly) for s in range(self.num_sites)))
        return maps

    def relabel(self, new_label):
        """
        Same cluster with site s renamed to new_label[s]
        """

        if sorted(new_label) != list(range(self.num_sites)):
            raise ValueError('Relabelling must be a permutation of range(%d)' % self.num_sites)
        bonds = tuple(Bond(new_label[b.i], new_label[b.j], b.label) for b in self.bonds)
        return Lattice(self.num_sites, self.dimension, self.shape, bonds, self.name + '_relabelled', self.family)

    def to_dict(self):
        return {'name': self.name,
                'family': self.family,
                'num_sites': self.num_sites,
                'dimension': self.dimension,
                'shape': list(self.shape),
                'bonds': [[b.i, b.j, b.label] for b in self.bonds]}

    @classmethod
    def from_dict(cls, d):
        try:
            bonds = tuple(Bond(int(i), int(j), str(label)) for i, j, label in d['bonds'])
            shape = tuple(int(s) for s in d.get('shape', [d['num_sites']]))
            return cls(num_sites=int(d['num_sites']), dimension=len(shape), shape=shape, bonds=bonds,
                       name=str(d.get('name', 'custom')), family=d.get('family'))
        except (KeyError, TypeError) as e:
            raise ValueError('Invalid lattice description: %s' % e)


def load_lattice(filepath):
    with open(filepath, 'r') as f:
        return Lattice.from_dict(json.load(f))


def save_lattice(lattice, filepath):
    with open(filepath, 'w') as f:
        json.dump(lattice.to_dict(), f, indent=2)


def _chain(family, n, label):
    if not isinstance(n, (int, np.integer)) or n < 4 or n % 2 != 0:
        raise ValueError('Unsupported size %s for %s; allowed sizes: %s' % (n, family, ALLOWED_SIZES[family]))
    bonds = tuple(Bond(i, (i + 1) % n, label) for i in range(n))
    return Lattice(n, 1, (n,), bonds, '%s_%d' % (family.lower(), n), family)


def _square_bonds(lx, ly, horizontal_label, vertical_label):
    bonds = []
    for y in range(ly):
        for x in range(lx):
            s = x + lx * y
            bonds.append(Bond(s, (x + 1) % lx + lx * y, horizontal_label(x, y)))
            bonds.append(Bond(s, x + lx * ((y + 1) % ly), vertical_label(x, y)))
    return bonds


def make_preset_lattice(family, size):
    """
    Lattice of a model family with the bond labels its Hamiltonian binds couplings to
    """

    if family in (C.ISING_CHAIN, C.HUBBARD_CHAIN):
        if isinstance(size, (tuple, list)):
            if len(size) != 1:
                raise ValueError('Unsupported size %s for %s; allowed sizes: %s'
                                 % (size, family, ALLOWED_SIZES[family]))
            size = size[0]
        return _chain(family, size, C.NN if family == C.ISING_CHAIN else C.HOP)

    if family not in (C.DIMER_2D, C.J1J2_2D, C.CHECKERBOARD_2D):
        raise ValueError('Unknown model family "%s"; choose one of %s'
                         % (family, ', '.join(sorted(ALLOWED_SIZES))))
    if isinstance(size, (int, np.integer)):
        size = (size, size)
    if tuple(size) != (4, 4):
        raise ValueError('Unsupported size %s for %s; allowed sizes: %s' % (size, family, ALLOWED_SIZES[family]))
    lx, ly = 4, 4

    if family == C.DIMER_2D:
        # columnar dimers: strong bonds on horizontal links starting at even x
        bonds = _square_bonds(lx, ly, lambda x, y: C.DIMER if x % 2 == 0 else C.INTERDIMER,
                              lambda x, y: C.INTERDIMER)
    elif family == C.J1J2_2D:
        bonds = _square_bonds(lx, ly, lambda x, y: C.J1, lambda x, y: C.J1)
        for y in range(ly):
            for x in range(lx):
                s = x + lx * y
                bonds.append(Bond(s, (x + 1) % lx + lx * ((y + 1) % ly), C.J2))
                bonds.append(Bond(s, (x + 1) % lx + lx * ((y - 1) % ly), C.J2))
    else:
        bonds = _square_bonds(lx, ly, lambda x, y: C.J, lambda x, y: C.J)
        # crossed plaquettes form a checkerboard, lower-left corner at x + y even
        for y in range(ly):
            for x in range(lx):
                if (x + y) % 2 == 0:
                    x1, y1 = (x + 1) % lx, (y + 1) % ly
                    bonds.append(Bond(x + lx * y, x1 + lx * y1, C.JCROSS))
                    bonds.append(Bond(x1 + lx * y, x + lx * y1, C.JCROSS))

    return Lattice(lx * ly, 2, (lx, ly), tuple(bonds), '%s_%dx%d' % (family.lower(), lx, ly), family)


@dataclass(frozen=True)
class SublatticePartition:
    r_sites: tuple
    b_sites: tuple
    cut_bonds: int

    @property
    def num_sites(self):
        return len(self.r_sites) + len(self.b_sites)

    def complement(self):
        return SublatticePartition(self.b_sites, self.r_sites, self.cut_bonds)

    def to_dict(self):
        return {'r_sites': list(self.r_sites), 'b_sites': list(self.b_sites), 'cut_bonds': self.cut_bonds}


def count_cut_bonds(lattice, r_sites, labels=None):
    r = set(r_sites)
    return sum(1 for b in lattice.bonds
               if (labels is None or b.label in labels) and ((b.i in r) != (b.j in r)))


def make_partition(lattice, r_sites, balanced=False):
    """
    Partition with the given R sites (order kept) and the ascending complement
    """

    n = lattice.num_sites
    r_sites = tuple(int(s) for s in r_sites)
    if len(set(r_sites)) != len(r_sites):
        raise ValueError('Sublattice sites must be distinct, got %s' % (r_sites,))
    for s in r_sites:
        if not 0 <= s < n:
            raise ValueError('Sublattice site %d outside [0, %d)' % (s, n))
    if len(r_sites) == 0 or len(r_sites) == n:
        raise ValueError('Sublattice must be a nonempty proper subset of the %d sites' % n)
    if balanced and 2 * len(r_sites) != n:
        raise ValueError('balanced bipartition required: %d sites given for a %d-site lattice'
                         % (len(r_sites), n))
    b_sites = tuple(s for s in range(n) if s not in set(r_sites))
    return SublatticePartition(r_sites, b_sites, count_cut_bonds(lattice, r_sites))


def preset_partition(lattice):
    """
    Even sites of chains, Neel sublattice of square clusters
    """

    if lattice.dimension == 1:
        r_sites = tuple(range(0, lattice.num_sites, 2))
    else:
        lx = lattice.shape[0]
        r_sites = tuple(s for s in range(lattice.num_sites) if (s % lx + s // lx) % 2 == 0)
    return make_partition(lattice, r_sites)


def _translation_score(lattice, r_set):
    return sum(1 for t in lattice.translations() if {t[s] for s in r_set} == r_set)


def auto_partition(lattice, budget=200000, labels=None, verbose=False):
    """
    Balanced bipartition maximizing the number of cut bonds.
    Ties prefer sublattices invariant under two-site translations, then the lexicographically smallest site list.
    """

    n = lattice.num_sites
    if n % 2 != 0:
        raise ValueError('balanced bipartition required, but the lattice has an odd number of sites (%d)' % n)
    half = n // 2
    bonds = [b for b in lattice.bonds if labels is None or b.label in labels]

    # site 0 always in R: complementary partitions have equal cuts
    n_candidates = int(comb(n - 1, half - 1, exact=True))
    if n <= 20 and n_candidates <= budget:
        if verbose:
            sys.stdout.write('Scanning %d balanced bipartitions ...\n' % n_candidates)
        subsets = np.array([sum(1 << s for s in (0,) + rest)
                            for rest in itertools.combinations(range(1, n), half - 1)], dtype=np.int64)
        cuts = np.zeros(len(subsets), dtype=np.int64)
        for b in bonds:
            cuts += ((subsets >> b.i) & 1) != ((subsets >> b.j) & 1)
        best = cuts.max()
        winners = subsets[cuts == best]
        # combinations() yields lexicographic order, so the first best score wins ties
        scored = [(-_translation_score(lattice, {s for s in range(n) if (m >> s) & 1}), k)
                  for k, m in enumerate(winners)]
        _, k = min(scored)
        r_sites = tuple(s for s in range(n) if (winners[k] >> s) & 1)
        return make_partition(lattice, r_sites)

    warnings.warn('Exhaustive scan of %d bipartitions exceeds the budget of %d; using greedy swaps'
                  % (n_candidates, budget))
    r_set = set(preset_partition(lattice).r_sites)
    cut = count_cut_bonds(lattice, r_set, labels)
    while True:
        best_gain, best_swap = 0, None
        for r in sorted(r_set):
            for b in range(n):
                if b in r_set:
                    continue
                trial = (r_set - {r}) | {b}
                gain = count_cut_bonds(lattice, trial, labels) - cut
                if gain > best_gain:
                    best_gain, best_swap = gain, (r, b)
        if best_swap is None:
            break
        r_set = (r_set - {best_swap[0]}) | {best_swap[1]}
        cut += best_gain
    if 0 not in r_set:
        r_set = set(range(n)) - r_set
    return make_partition(lattice, tuple(sorted(r_set)))
