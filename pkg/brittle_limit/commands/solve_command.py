import logging

from brittle_limit.models.grid import BoundaryKind, InitKind
from brittle_limit.models.params import Regime
from brittle_limit.models.run_config import RunConfig
from brittle_limit.services import gammalab
from brittle_limit.services.artifact_store import ArtifactStore

logger = logging.getLogger(__name__)

HELP = 'run the discrete alternating minimization over a sweep of eps'

# a Hencky sweep outside SQW_eps <= E <= 1.15 SQW_eps
BRACKET_FAILURE_EXIT = 1


def run(run_config: RunConfig, store: ArtifactStore) -> int:
    options = dict(
        grid=run_config.get('grid'),
        bc_kind=BoundaryKind(run_config.get('bc')),
        tol=run_config.get('tol'),
        max_iters=run_config.get('max_iters'),
        jobs=run_config.jobs,
        seed=run_config.seed
    )
    init = run_config.get('init')
    if run_config.get('tresca'):
        report = gammalab.tresca_sweep(run_config.params, run_config.get('xi_bc'), run_config.get('eps_list'),
                                       init=InitKind(init or 'undamaged'), **options)
    else:
        report = gammalab.regime_sweep(run_config.params, run_config.get('xi_bc'), run_config.get('eps_list'),
                                       regime=Regime(run_config.get('regime')),
                                       init=InitKind(init) if init else None, **options)

    store.write_csv(report.to_frame(), 'solve.csv')
    for k, state in enumerate(report.states):
        store.write_csv(state.damage_frame(), f'damage_{k}.csv')
    store.write_json(report.to_dict(), 'solve_report.json')
    for flag in report.flags:
        logger.warning(flag)
    if report.within_bracket is False:
        logger.error(f"Energies outside the relaxed-envelope bracket: ratios {report.envelope_ratios}")
        return BRACKET_FAILURE_EXIT
    return 0
