"""Shared fixtures.

The large campaign fixtures are expensive (tens of seconds each), so
they are session-scoped and cached as dataset files under
``tests/_campaign_cache``; delete that directory to force a cold run.
All campaigns are fully seeded, so cached and fresh runs are
bit-identical.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make `oracles` importable

from slopemc import (
    FieldStatistics,
    McConfig,
    SlopeGeometry,
    build_grid,
    concat_datasets,
    run_monte_carlo,
)
from slopemc.dataset_io import load_dataset, save_dataset

CACHE_DIR = Path(__file__).parent / "_campaign_cache"

MU_VALUES = (18.6, 22.3, 26.0, 29.7, 33.5)


@pytest.fixture(scope="session")
def geometry():
    return SlopeGeometry()


@pytest.fixture(scope="session")
def grid(geometry):
    return build_grid(geometry)


def _campaign(mu, cov, dh, n, base_seed, geometry):
    CACHE_DIR.mkdir(exist_ok=True)
    name = f"c_mu{mu:g}_cov{cov:g}_dh{dh:g}_n{n}_s{base_seed}.mcd"
    path = CACHE_DIR / name
    if path.exists():
        return load_dataset(path)
    cfg = McConfig(
        stats=FieldStatistics(mu_cu=mu, cov=cov, delta_h=dh, delta_v=1.0),
        geometry=geometry,
        n_samples=n,
        base_seed=base_seed,
    )
    ds = run_monte_carlo(cfg)
    save_dataset(ds, path)
    return ds


@pytest.fixture(scope="session")
def campaign_small(geometry):
    """120-sample campaign with an interior pf; cheap shared workhorse."""
    return _campaign(22.3, 0.3, 6.0, 120, 4101, geometry)


@pytest.fixture(scope="session")
def campaign_mid(geometry):
    """2000-sample campaign with interior pf (the MLAMC reference case)."""
    return _campaign(22.3, 0.3, 6.0, 2000, 881001, geometry)


def _pooled(cov, dh, per_mu, base, geometry):
    parts = [
        _campaign(mu, cov, dh, per_mu, base + k, geometry)
        for k, mu in enumerate(MU_VALUES)
    ]
    return concat_datasets(parts)


@pytest.fixture(scope="session")
def campaign_smooth_pooled(geometry):
    """Low heterogeneity/anisotropy analogue: 5 strength means x 400."""
    return _pooled(0.1, 1.0, 400, 771100, geometry)


@pytest.fixture(scope="session")
def campaign_rough_pooled(geometry):
    """High heterogeneity/anisotropy analogue: 5 strength means x 400."""
    return _pooled(0.5, 25.0, 400, 772500, geometry)
