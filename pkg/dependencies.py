from core.designer.services import DesignerService
from core.experiments.schema import RunConfig
from core.experiments.services import ExperimentService
from core.labeling.services import LabelingService
from core.linprog.services import simplex_solver
from core.simulate.services import SimulationService
from config import get_settings

settings = get_settings()


def get_designer_service(workers: int | None = None) -> DesignerService:
    return DesignerService(simplex_solver, max_workers=workers or settings.MAX_WORKERS)


def get_labeling_service(restarts: int | None = None) -> LabelingService:
    return LabelingService(restarts=restarts or settings.BSA_RESTARTS)


def get_simulation_service(workers: int | None = None) -> SimulationService:
    return SimulationService(
        max_workers=workers or settings.MAX_WORKERS,
        chunk_symbols=settings.SIM_CHUNK_SYMBOLS,
    )


def get_experiment_service(config: RunConfig | None = None) -> ExperimentService:
    workers = config.workers if config else None
    return ExperimentService(
        designer=get_designer_service(workers),
        labeler=get_labeling_service(config.bsa_restarts if config else None),
        simulator=get_simulation_service(workers),
    )
