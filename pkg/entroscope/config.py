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
from dataclasses import dataclass, field, replace, asdict
import numpy as np
from entroscope.utils import C, FAMILY_COUPLINGS, ConfigError, fingerprint, make_grid, parse_grid
from entroscope.lattice import make_preset_lattice, make_partition, preset_partition, auto_partition
from entroscope.hilbert import enumerate_sector
from entroscope.hamiltonian import ModelSpec
from entroscope.eigensolver import SolverOptions
from entroscope.sweep_analysis import Thresholds, METHODS, uniform_step

CACHE_ENV = 'ENTROSCOPE_CACHE'

TOP_LEVEL_KEYS = (C.FAMILY, C.SIZE, C.COUPLINGS, C.SWEEP, C.PARTITION, C.AUTO_PARTITION, C.SECTOR, C.METHOD,
                  C.SOLVER, C.THRESHOLDS, C.OUTPUT, C.CACHE, C.THREADS)
SWEEP_KEYS = (C.PARAMETER, C.GRID)

# parameter and inclusive lo, hi, step per family
DEFAULT_SWEEPS = {C.ISING_CHAIN: (C.LAMBDA, 0.0, 2.0, 0.02),
                  C.DIMER_2D: (C.LAMBDA, 0.025, 1.0, 0.025),
                  C.J1J2_2D: (C.J2, 0.0, 1.0, 0.01),
                  C.CHECKERBOARD_2D: (C.JCROSS, 0.5, 1.5, 0.01),
                  C.HUBBARD_CHAIN: (C.V, 0.0, 4.0, 0.05)}


@dataclass(frozen=True, eq=False)
class RunConfig:
    family: str
    size: object
    couplings: dict
    parameter: str
    grid: np.ndarray = field(repr=False)
    partition: tuple = None
    auto_partition: object = False
    sector: object = None
    method: str = None
    solver: SolverOptions = SolverOptions()
    thresholds: Thresholds = Thresholds()
    output: str = 'entroscope_out'
    cache: str = None
    threads: int = 1

    def spec(self):
        return ModelSpec(self.family, self.couplings, make_preset_lattice(self.family, self.size))

    def sublattice(self):
        lattice = make_preset_lattice(self.family, self.size)
        if self.partition is not None:
            return make_partition(lattice, self.partition, balanced=True)
        if self.auto_partition:
            labels = None if self.auto_partition is True else tuple(self.auto_partition)
            return auto_partition(lattice, labels=labels)
        return preset_partition(lattice)

    def to_dict(self):
        """
        Canonical form of everything that affects results
        """

        return {C.FAMILY: self.family, C.SIZE: self.size, C.COUPLINGS: dict(sorted(self.couplings.items())),
                C.SWEEP: {C.PARAMETER: self.parameter, C.GRID: [float(x) for x in self.grid]},
                C.PARTITION: None if self.partition is None else list(self.partition),
                C.AUTO_PARTITION: self.auto_partition, C.SECTOR: self.sector, C.METHOD: self.method,
                C.SOLVER: asdict(self.solver), C.THRESHOLDS: asdict(self.thresholds)}

    def fingerprint(self):
        return fingerprint(self.to_dict())


def key_line(text, key, start=1):
    """
    Line number (1-based) of the first occurrence of "key" at or after line start
    """

    if text is None:
        return None
    for number, line in enumerate(text.splitlines(), start=1):
        if number >= start and '"%s"' % key in line:
            return number
    return None


def _grid_from(value, line):
    try:
        if isinstance(value, str):
            return parse_grid(value)
        if isinstance(value, dict):
            return make_grid(float(value['lo']), float(value['hi']), float(value['step']))
        values = np.array([float(x) for x in value])
    except ConfigError as e:
        raise ConfigError(str(e), line)
    except (KeyError, TypeError, ValueError):
        raise ConfigError('grid must be "lo:hi:step", {"lo", "hi", "step"} or a list of numbers', line)
    if len(values) < 2 or np.any(np.diff(values) <= 0):
        raise ConfigError('grid values must be strictly increasing', line)
    return values


def check_grid(grid, line=None):
    """
    Sweep grids need at least 5 uniformly spaced points for the derivative
    """

    if len(grid) < 5:
        raise ConfigError('grid needs at least 5 points, got %d' % len(grid), line)
    try:
        uniform_step(grid)
    except ValueError as e:
        raise ConfigError(str(e), line)


def _size_from(family, value, line):
    if isinstance(value, str) and 'x' in value:
        try:
            value = [int(v) for v in value.split('x')]
        except ValueError:
            raise ConfigError('size must be an integer or of the form "4x4", got "%s"' % value, line)
    if isinstance(value, list):
        value = tuple(value)
    try:
        make_preset_lattice(family, value)
    except (ValueError, TypeError) as e:
        raise ConfigError(str(e), line)
    return value


def _options_from(cls, value, name, line):
    if not isinstance(value, dict):
        raise ConfigError('%s must be an object' % name, line)
    try:
        return cls(**value)
    except TypeError as e:
        raise ConfigError('unknown %s option: %s' % (name, e), line)
    except ValueError as e:
        raise ConfigError(str(e), line)


def parse_config(data, text=None):
    """
    Validate a decoded config dictionary. text, when given, anchors errors to lines.
    """

    if not isinstance(data, dict):
        raise ConfigError('config must be a JSON object', 1 if text else None)
    for key in data:
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError('unknown key "%s"; allowed keys: %s' % (key, ', '.join(TOP_LEVEL_KEYS)),
                              key_line(text, key))

    family = data.get(C.FAMILY)
    if family not in FAMILY_COUPLINGS:
        raise ConfigError('family must be one of %s, got %s' % (', '.join(sorted(FAMILY_COUPLINGS)), family),
                          key_line(text, C.FAMILY))
    if C.SIZE not in data:
        raise ConfigError('size is required')
    size = _size_from(family, data[C.SIZE], key_line(text, C.SIZE))
    lattice = make_preset_lattice(family, size)

    couplings = data.get(C.COUPLINGS, {})
    couplings_line = key_line(text, C.COUPLINGS)
    if not isinstance(couplings, dict):
        raise ConfigError('couplings must be an object', couplings_line)
    for name, value in couplings.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError('coupling %s must be a number, got %r' % (name, value),
                              key_line(text, name, couplings_line or 1))
    try:
        spec = ModelSpec(family, couplings, lattice)
    except ValueError as e:
        raise ConfigError(str(e), couplings_line)

    default_parameter, lo, hi, step = DEFAULT_SWEEPS[family]
    sweep = data.get(C.SWEEP, {})
    sweep_line = key_line(text, C.SWEEP)
    if not isinstance(sweep, dict):
        raise ConfigError('sweep must be an object', sweep_line)
    for key in sweep:
        if key not in SWEEP_KEYS:
            raise ConfigError('unknown sweep key "%s"; allowed keys: %s' % (key, ', '.join(SWEEP_KEYS)),
                              key_line(text, key, sweep_line or 1))
    parameter = sweep.get(C.PARAMETER, default_parameter)
    if parameter not in spec.couplings:
        raise ConfigError('sweep parameter "%s" is not a coupling of %s (couplings: %s)'
                          % (parameter, family, ', '.join(sorted(spec.couplings))),
                          key_line(text, C.PARAMETER, sweep_line or 1))
    if C.GRID in sweep:
        grid = _grid_from(sweep[C.GRID], key_line(text, C.GRID, sweep_line or 1))
    else:
        grid = make_grid(lo, hi, step)
    check_grid(grid, key_line(text, C.GRID, sweep_line or 1))

    partition = data.get(C.PARTITION)
    if partition is not None:
        line = key_line(text, C.PARTITION)
        try:
            partition = tuple(int(s) for s in partition)
            make_partition(lattice, partition, balanced=True)
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e), line)

    auto = data.get(C.AUTO_PARTITION, False)
    if not (isinstance(auto, bool) or (isinstance(auto, list) and all(isinstance(x, str) for x in auto))):
        raise ConfigError('auto_partition must be true, false or a list of bond labels',
                          key_line(text, C.AUTO_PARTITION))

    method = data.get(C.METHOD)
    if method is not None and method not in METHODS:
        raise ConfigError('method must be one of %s, got %s' % (', '.join(METHODS), method),
                          key_line(text, C.METHOD))
    if method == 'gaussian' and family != C.ISING_CHAIN:
        raise ConfigError('method gaussian is only available for %s' % C.ISING_CHAIN, key_line(text, C.METHOD))

    sector = data.get(C.SECTOR)
    if isinstance(sector, list):
        sector = tuple(sector)
    if sector is not None:
        try:
            basis = enumerate_sector(spec.basis_kind, spec.num_sites, sector)
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e), key_line(text, C.SECTOR))
        if spec.basis_kind == C.FERMION_SITE4 and sum(basis.sector) != spec.num_sites:
            raise ConfigError('Only half filling is supported: sector %s holds %d electrons on %d sites'
                              % (tuple(basis.sector), sum(basis.sector), spec.num_sites), key_line(text, C.SECTOR))

    solver = _options_from(SolverOptions, data.get(C.SOLVER, {}), C.SOLVER, key_line(text, C.SOLVER))
    thresholds = _options_from(Thresholds, data.get(C.THRESHOLDS, {}), C.THRESHOLDS, key_line(text, C.THRESHOLDS))

    threads = data.get(C.THREADS, 1)
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        raise ConfigError('threads must be a positive integer, got %r' % (threads,), key_line(text, C.THREADS))

    return RunConfig(family=family, size=size, couplings=dict(couplings), parameter=parameter, grid=grid,
                     partition=partition, auto_partition=auto, sector=sector, method=method, solver=solver,
                     thresholds=thresholds, output=data.get(C.OUTPUT, 'entroscope_out'), cache=data.get(C.CACHE),
                     threads=threads)


def load_config(filepath):
    try:
        with open(filepath, 'r') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError('cannot read config %s: %s' % (filepath, e))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError('invalid JSON: %s' % e.msg, e.lineno)
    return parse_config(data, text)


def apply_overrides(config, out=None, threads=None, partition=None, grid=None, cache=None):
    """
    Command-line flags win over the config file
    """

    changes = {}
    if out is not None:
        changes[C.OUTPUT] = out
    if threads is not None:
        if threads < 1:
            raise ConfigError('--threads must be a positive integer, got %d' % threads)
        changes[C.THREADS] = threads
    if partition is not None:
        lattice = make_preset_lattice(config.family, config.size)
        try:
            make_partition(lattice, partition, balanced=True)
        except ValueError as e:
            raise ConfigError(str(e))
        changes[C.PARTITION] = tuple(partition)
    if grid is not None:
        changes[C.GRID] = parse_grid(grid)
    if cache is not None:
        changes[C.CACHE] = cache
    return replace(config, **changes)


def resolve_cache_dir(flag=None, config=None):
    """
    --cache flag, then the config's cache key, then $ENTROSCOPE_CACHE; None disables caching
    """

    if flag:
        return flag
    if config is not None and config.cache:
        return config.cache
    return os.environ.get(CACHE_ENV) or None
