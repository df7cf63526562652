from .system import (
    SystemSpec, RotationSystem, OdometerSystem, IidShiftSystem, MarkovShiftSystem, ProductSystem,
    UniformPm1Marginal, LatticeUniformMarginal, CauchyMarginal, GaussianMarginal, DiscreteMarginal,
    golden_alpha, is_shift, coordinate_dim
)
from .cocycle import (
    CocycleSpec, BoundedFunctionSpec,
    ConstantBase, IndicatorBase, IndicatorMinusMeanBase, CoordinateReadBase, OdometerOrbitBase, LatticeStepBase,
    BoundedCoordinateRead, TrigOfRotation, DigitRead,
    SubtractDrift, AddCoboundary, Symmetrize, ComposeShift
)
from .config import (
    ExperimentConfig, EstimateBlock, ScanBlock, SuiteBlock, GalleryBlock, MonitorBlock, SelftestBlock,
    DriftGrid, resolve_exponent, SCHEMA_VERSION
)
from .reports import (
    Provenance, CheckOutcome, RecurrenceReport, DriftCell, DriftScanReport, MedianDriftReport,
    TightnessReport, TightnessGridReport, DensityPoint, DensityReport, MonitorCell, MonitorReport,
    AutocorrelationEstimate, PeakCheckReport, FloorCell, AutocorrelationFloorCell, FloorBoundReport,
    SuiteResult, RunManifest, ValidationReport
)

__all__ = [
    "SystemSpec", "RotationSystem", "OdometerSystem", "IidShiftSystem", "MarkovShiftSystem", "ProductSystem",
    "UniformPm1Marginal", "LatticeUniformMarginal", "CauchyMarginal", "GaussianMarginal", "DiscreteMarginal",
    "golden_alpha", "is_shift", "coordinate_dim",
    "CocycleSpec", "BoundedFunctionSpec",
    "ConstantBase", "IndicatorBase", "IndicatorMinusMeanBase", "CoordinateReadBase", "OdometerOrbitBase",
    "LatticeStepBase", "BoundedCoordinateRead", "TrigOfRotation", "DigitRead",
    "SubtractDrift", "AddCoboundary", "Symmetrize", "ComposeShift",
    "ExperimentConfig", "EstimateBlock", "ScanBlock", "SuiteBlock", "GalleryBlock", "MonitorBlock",
    "SelftestBlock", "DriftGrid", "resolve_exponent", "SCHEMA_VERSION",
    "Provenance", "CheckOutcome", "RecurrenceReport", "DriftCell", "DriftScanReport", "MedianDriftReport",
    "TightnessReport", "TightnessGridReport", "DensityPoint", "DensityReport", "MonitorCell", "MonitorReport",
    "AutocorrelationEstimate", "PeakCheckReport", "FloorCell", "AutocorrelationFloorCell", "FloorBoundReport",
    "SuiteResult", "RunManifest", "ValidationReport"
]
