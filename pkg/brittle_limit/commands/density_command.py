import logging
from typing import List

import numpy as np
import pandas as pd

from brittle_limit.models.run_config import RunConfig
from brittle_limit.models.tensors import SymMat
from brittle_limit.services import densities, envelopes, symcalc
from brittle_limit.services.artifact_store import ArtifactStore

logger = logging.getLogger(__name__)

HELP = 'tabulate the closed-form densities at given strains or along a ray'


def _inputs(run_config: RunConfig) -> List[SymMat]:
    points = list(run_config.get('xi') or [])
    ray = run_config.get('ray')
    if ray is not None:
        xi = ray['xi']
        points.extend(t * xi for t in np.linspace(0.0, ray['t_max'], ray['steps']))
    dims = {xi.dim for xi in points}
    if len(dims) != 1:
        raise ValueError(f"All strains in one table must share a dimension, got {sorted(dims)}")
    return points


def density_row(run_config: RunConfig, xi: SymMat) -> dict:
    params, eps = run_config.params, run_config.get('eps')
    stress = symcalc.apply_iso(params.A_s, xi)
    row = {f'xi_{k}': v for k, v in enumerate(xi.entries)}
    row.update({
        'f': densities.f_strong(params, xi),
        'g_eps': densities.g_weak(params, eps, xi),
        'w_eps': densities.w_eps(params, eps, xi),
        'G': densities.G_quad(params, stress),
        'h': densities.h_density(params, xi),
        'support_K': densities.support_K(params, xi),
        'w_bar': envelopes.w_bar(params, xi)
    })
    if run_config.get('tresca'):
        family = densities.TrescaFamily(params)
        _, xi_D = symcalc.dev_split(xi)
        row.update({
            'G_tilde': family.G_tilde(symcalc.dev_split(stress)[1]),
            'h_tilde': family.h_tilde(xi_D),
            'tresca_bulk': envelopes.tresca_limit_bulk(params, xi)
        })
    return row


def run(run_config: RunConfig, store: ArtifactStore) -> int:
    points = _inputs(run_config)
    logger.info(f"Tabulating densities at {len(points)} strains, eps={run_config.get('eps')}")
    frame = pd.DataFrame([density_row(run_config, xi) for xi in points])
    store.write_csv(frame, 'density.csv')

    ray = run_config.get('ray')
    if ray is not None:
        kink = densities.density_kink(run_config.params, ray['xi'])
        store.write_json({
            'ray': ray['xi'].to_dict(),
            'kink': kink if np.isfinite(kink) else None,
            'params': run_config.params.to_dict()
        }, 'density_summary.json')
        logger.info(f"W_bar leaves the quadratic branch at t={kink:.6g}")
    return 0
