import logging
from dataclasses import dataclass
from typing import Dict, List

import pandas as pd

from brittle_limit.models.params import ModelParams
from brittle_limit.models.run_config import RunConfig
from brittle_limit.models.tensors import SymMat
from brittle_limit.services import envelopes
from brittle_limit.services.artifact_store import ArtifactStore
from brittle_limit.services.parallel import ordered_map

logger = logging.getLogger(__name__)

HELP = 'sweep SQW_eps toward its eps -> 0 limit'


@dataclass(frozen=True)
class _ConvergeTask:
    sample: int
    params: ModelParams
    xi: SymMat
    eps_list: tuple
    tresca: bool


def _converge_sample(task: _ConvergeTask) -> List[Dict]:
    params, xi = task.params, task.xi
    if task.tresca:
        limit = envelopes.tresca_limit_bulk(params, xi)
    else:
        limit = envelopes.w_bar(params, xi)
    rows = []
    for eps in task.eps_list:
        if task.tresca:
            relaxed, eta = envelopes.sq_envelope_tresca(params, eps, xi), eps
        else:
            relaxed, eta = envelopes.sq_envelope(params, eps, xi), params.eta(eps)
        rows.append({
            'sample': task.sample,
            'eps': eps,
            'eta': eta,
            'sqw': relaxed.value,
            'theta_opt': relaxed.theta_opt,
            'w_bar': limit,
            'gap': abs(relaxed.value - limit)
        })
    return rows


def run(run_config: RunConfig, store: ArtifactStore) -> int:
    params = run_config.params
    eps_list = tuple(sorted(run_config.get('eps_list'), reverse=True))
    tasks = [_ConvergeTask(k, params, xi, eps_list, bool(run_config.get('tresca')))
             for k, xi in enumerate(run_config.get('xi'))]
    logger.info(f"Envelope sweep over {len(tasks)} strains and {len(eps_list)} values of eps")

    rows = [row for chunk in ordered_map(_converge_sample, tasks, run_config.jobs) for row in chunk]
    frame = pd.DataFrame(rows, columns=['sample', 'eps', 'eta', 'sqw', 'theta_opt', 'w_bar', 'gap'])
    store.write_csv(frame, 'converge.csv')

    for sample, group in frame.groupby('sample'):
        gaps = group['gap'].tolist()
        if any(b > a for a, b in zip(gaps, gaps[1:])):
            logger.warning(f"Gap column of sample {sample} is not decreasing: {gaps}")
    return 0
