import logging

from brittle_limit.models.run_config import RunConfig
from brittle_limit.services import oracles
from brittle_limit.services.artifact_store import ArtifactStore

logger = logging.getLogger(__name__)

HELP = 'run the oracle suite; exit 10 + k when oracle k fails'

FAILURE_EXIT_BASE = 10


def run(run_config: RunConfig, store: ArtifactStore) -> int:
    only = run_config.get('only')
    known = {name for name, _, _, _ in oracles.ORACLE_SUITE}
    if only is not None and set(only) - known:
        raise ValueError(f"Unknown oracles: {sorted(set(only) - known)}")

    reports = oracles.run_suite(run_config.params, samples=run_config.get('samples'),
                                seed=run_config.seed, jobs=run_config.jobs, only=only,
                                cfg=run_config.config)
    for report in reports:
        store.write_json(report.to_dict(), f'{report.name}.json')
        logger.info(f"{report}")

    failed = [report for report in reports if not report.passed]
    store.write_json({
        'params': run_config.params.to_dict(),
        'seed': run_config.seed,
        'oracles': [{'name': r.name, 'passed': r.passed, 'max_abs_gap': r.max_abs_gap,
                     'max_rel_gap': r.max_rel_gap} for r in reports],
        'failed': [r.name for r in failed],
        'passed': not failed
    }, 'summary.json')

    if failed:
        first = failed[0]
        logger.error(f"Oracle {first.name} failed: max relative gap {first.max_rel_gap:.3e} "
                     f"above tolerance {first.tolerance:.3e}")
        return FAILURE_EXIT_BASE + oracles.suite_index(first.name)
    logger.info(f"All {len(reports)} oracles passed")
    return 0
