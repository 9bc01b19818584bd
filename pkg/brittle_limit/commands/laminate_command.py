import logging

import pandas as pd

from brittle_limit.models.laminate import LaminateCase, LaminateSpec
from brittle_limit.models.run_config import RunConfig
from brittle_limit.services import microstructure
from brittle_limit.services.artifact_store import ArtifactStore

logger = logging.getLogger(__name__)

HELP = 'evaluate the explicit laminate recovery sequences'


def run(run_config: RunConfig, store: ArtifactStore) -> int:
    case = LaminateCase(run_config.get('case'))
    n_layers = run_config.get('n_layers')
    rows = []
    for eps in run_config.get('eps_list'):
        spec = LaminateSpec(
            case=case,
            eps=eps,
            n_layers=n_layers or LaminateSpec.default_layers(eps),
            params=run_config.params,
            xi=run_config.get('xi'),
            a=run_config.get('a'),
            b=run_config.get('b')
        )
        result = microstructure.laminate_energy(spec)
        logger.info(f"Laminate {case.value} eps={eps}: energy {result.energy:.6g}, "
                    f"limit {result.limit_bound:.6g}")
        rows.append(result.to_dict())
        store.write_csv(microstructure.bands_frame(result), f'bands_{eps:g}.csv')

    columns = ['case', 'eps', 'n_layers', 'delta', 'energy', 'damaged_volume', 'limit_bound', 'gap']
    store.write_csv(pd.DataFrame(rows, columns=columns), 'laminate.csv')
    return 0
