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

import os
import json
import hashlib
import tempfile
import numpy as np


class C:
    # model families
    ISING_CHAIN = 'ISING_CHAIN'
    DIMER_2D = 'DIMER_2D'
    J1J2_2D = 'J1J2_2D'
    CHECKERBOARD_2D = 'CHECKERBOARD_2D'
    HUBBARD_CHAIN = 'HUBBARD_CHAIN'
    # bond labels
    DIMER = 'DIMER'
    INTERDIMER = 'INTERDIMER'
    J1 = 'J1'
    J2 = 'J2'
    J = 'J'
    JCROSS = 'JCROSS'
    HOP = 'HOP'
    NN = 'NN'
    # basis kinds
    SPIN_HALF = 'SPIN_HALF'
    FERMION_SITE4 = 'FERMION_SITE4'
    # coupling names
    LAMBDA = 'lambda'
    J_DIMER = 'J_dimer'
    T = 't'
    U = 'U'
    V = 'V'
    # config keys
    FAMILY = 'family'
    SIZE = 'size'
    COUPLINGS = 'couplings'
    SWEEP = 'sweep'
    PARAMETER = 'parameter'
    GRID = 'grid'
    PARTITION = 'partition'
    AUTO_PARTITION = 'auto_partition'
    SECTOR = 'sector'
    METHOD = 'method'
    SOLVER = 'solver'
    THRESHOLDS = 'thresholds'
    OUTPUT = 'output'
    CACHE = 'cache'
    THREADS = 'threads'
    # output columns and report fields
    PARAM = 'param'
    ENERGY = 'energy'
    GAP = 'gap'
    DEGENERATE = 'degenerate'
    ENTROPY_BITS = 'entropy_bits'
    S_OVER_N = 's_over_n'
    DS_OVER_N = 'ds_over_n_dparam'
    CSV_COLUMNS = ('param', 'energy', 'gap', 'degenerate', 'entropy_bits', 's_over_n', 'ds_over_n_dparam')
    REPORT_SCHEMA = 'entroscope.report/1'
    CACHE_SCHEMA = 'entroscope.point/1'
    # candidate sources
    CURVE = 'CURVE'
    DERIVATIVE = 'DERIVATIVE'


FAMILY_LABELS = {C.ISING_CHAIN: (C.NN,),
                 C.DIMER_2D: (C.DIMER, C.INTERDIMER),
                 C.J1J2_2D: (C.J1, C.J2),
                 C.CHECKERBOARD_2D: (C.J, C.JCROSS),
                 C.HUBBARD_CHAIN: (C.HOP,)}

FAMILY_COUPLINGS = {C.ISING_CHAIN: {C.LAMBDA: 1.0},
                    C.DIMER_2D: {C.J_DIMER: 1.0, C.LAMBDA: 1.0},
                    C.J1J2_2D: {C.J1: 1.0, C.J2: 0.0},
                    C.CHECKERBOARD_2D: {C.J: 1.0, C.JCROSS: 1.0},
                    C.HUBBARD_CHAIN: {C.T: 1.0, C.U: 0.0, C.V: 0.0}}


class ConfigError(ValueError):
    """
    Invalid user configuration, optionally anchored to a line of the config file
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = 'line %d: %s' % (line, message)
        super().__init__(message)


class SolverError(RuntimeError):
    pass


class ConvergenceError(SolverError):

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__('%s (best residual %.3e)' % (message, residual))


def popcount(codes, nbits):
    """
    Number of set bits of each integer code below bit position nbits
    """

    codes = np.asarray(codes, dtype=np.int64)
    count = np.zeros(codes.shape, dtype=np.int64)
    for i in range(nbits):
        count += (codes >> i) & 1
    return count


def canonical_json(obj):
    """
    Deterministic JSON text used for hashing
    """

    return json.dumps(obj, sort_keys=True, separators=(',', ':'), default=_to_builtin)


def _to_builtin(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (tuple, set, frozenset)):
        return list(x)
    raise TypeError('Cannot serialize object of type %s' % type(x).__name__)


def fingerprint(obj):
    """
    Stable hex digest of a JSON-serializable object
    """

    return hashlib.sha256(canonical_json(obj).encode('utf-8')).hexdigest()


def write_atomic(filepath, text):
    """
    Write text to a temporary file next to filepath and rename it into place
    """

    directory = os.path.dirname(os.path.abspath(filepath))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp_', suffix=os.path.basename(filepath))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp_path, filepath)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def parse_grid(text):
    """
    Parse 'lo:hi:step' into an inclusive, strictly increasing grid
    """

    parts = text.split(':')
    if len(parts) != 3:
        raise ConfigError('grid must have the form "lo:hi:step", got "%s"' % text)
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigError('grid must have the form "lo:hi:step", got "%s"' % text)
    return make_grid(lo, hi, step)


def make_grid(lo, hi, step):
    if step <= 0 or hi <= lo:
        raise ConfigError('grid needs lo < hi and step > 0, got %g:%g:%g' % (lo, hi, step))
    span = (hi - lo) / step
    if abs(span - round(span)) > 1e-9 * max(1.0, span):
        raise ConfigError('grid step %g does not divide %g:%g' % (step, lo, hi))
    n = int(round(span)) + 1
    # rounding keeps grid values at their decimal representation, e.g. 0.37 not 0.37000000000000005
    return np.round(lo + step * np.arange(n), 12)


def parse_sites(text):
    """
    Parse a comma separated site list like '0,2,4'
    """

    try:
        sites = [int(s) for s in text.replace(' ', '').split(',') if s != '']
    except ValueError:
        raise ConfigError('partition must be a comma separated list of site indices, got "%s"' % text)
    if len(sites) == 0:
        raise ConfigError('partition must not be empty')
    return sites


def parse_assignments(items):
    """
    Parse ['U=4', 'V=0.5'] into {'U': 4.0, 'V': 0.5}
    """

    values = {}
    for item in items or []:
        for assignment in item.split(','):
            if assignment == '':
                continue
            if '=' not in assignment:
                raise ConfigError('expected name=value, got "%s"' % assignment)
            name, value = assignment.split('=', 1)
            try:
                values[name.strip()] = float(value)
            except ValueError:
                raise ConfigError('coupling %s must be a number, got "%s"' % (name, value))
    return values


def binary_entropy(p):
    """
    Binary entropy in bits with 0 log 0 = 0
    """

    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    out = np.zeros_like(p)
    for q in (p, 1.0 - p):
        mask = q > 0
        out[mask] -= q[mask] * np.log2(q[mask])
    return out
