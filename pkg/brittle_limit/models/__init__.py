from .errors import (BrittleLimitError, ConfigError, NumericalError, NonInvertibleError,
                     InfeasibleBranchError, DualityGapError, SolverConvergenceError, OracleFailure)
from .tensors import SymMat, Spectrum, IsoTensor
from .params import EtaKind, EtaSchedule, Regime, ModelParams, ConvMKind, ConvMPoint, ConvMElement
from .envelope import EnvelopeRoute, EnvelopeEval, CharacterizationReport
from .laminate import LaminateCase, LaminateSpec, LaminateResult, BandStrip, StaircaseProfile, JumpSegment
from .grid import BoundaryKind, BoundaryCondition, InitKind, GridState, AlternationResult, RegimeReport
from .oracle import OracleReport
from .run_config import RunConfig

__all__ = [
    'BrittleLimitError', 'ConfigError', 'NumericalError', 'NonInvertibleError', 'InfeasibleBranchError',
    'DualityGapError', 'SolverConvergenceError', 'OracleFailure',
    'SymMat', 'Spectrum', 'IsoTensor',
    'EtaKind', 'EtaSchedule', 'Regime', 'ModelParams', 'ConvMKind', 'ConvMPoint', 'ConvMElement',
    'EnvelopeRoute', 'EnvelopeEval', 'CharacterizationReport',
    'LaminateCase', 'LaminateSpec', 'LaminateResult', 'BandStrip', 'StaircaseProfile', 'JumpSegment',
    'BoundaryKind', 'BoundaryCondition', 'InitKind', 'GridState', 'AlternationResult', 'RegimeReport',
    'OracleReport', 'RunConfig'
]
