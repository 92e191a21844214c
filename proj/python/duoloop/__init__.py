"""Dual-loop microwave transducer simulator.

Loop field phasors, active crosstalk cancellation, and the spin-qubit
observables (Rabi decay, ODMR contrast) driven by the residual field.
Heavy lifting happens in the compiled ``_core`` module; this package adds
dict-based conveniences around the JSON-text entry points.
"""

import json as _json

from ._core import (  # noqa: F401
    CancellationSolution,
    CoherencePenalty,
    ComparisonError,
    ComparisonReport,
    ConfigError,
    ContractViolationError,
    ContrastVsPhase,
    DecaySinusoidFit,
    DiscretizedLoop,
    DriveTone,
    Error,
    FieldPhasor,
    FitDomainError,
    FitFailureError,
    GaussianDipFit,
    InfeasibleTargetError,
    InvalidParameterError,
    LineScan,
    LoopShape,
    LoopSpec,
    MetricCheck,
    NoiseModel,
    NoisePhasePolicy,
    OdmrSpectrum,
    Phasor,
    Point3,
    PowerLawFit,
    PowerMetric,
    RabiTrace,
    RatioSweepPoint,
    PhaseSweepResult,
    ScenarioResult,
    Segment,
    SingularPointError,
    SinusoidFit,
    Site,
    SiteLayout,
    SpinParams,
    Table,
    ToneSegment,
    UnsolvableTargetError,
    __version__,
    amplitude_decay_exponent,
    apply,
    bloch_evolve,
    calibrate_noise,
    coherence_penalty,
    contrast_vs_phase,
    default_tau_grid,
    discretize,
    discretize_all,
    equivalent_detuning,
    extinction_ratio,
    field_at,
    field_per_unit_current,
    fit_decaying_sinusoid,
    fit_gaussian_dip,
    fit_power_law,
    fit_sinusoid,
    hex_sites,
    line_scan,
    line_scan_table,
    odmr_spectrum,
    polyline_length,
    power_db,
    rabi_frequency,
    rabi_trace,
    residual_at,
    scenario_names,
    shot_population,
    signed_area_z,
    solve,
    sweep_phase,
    sweep_ratio,
    to_csv,
    validate_spin_params,
    write_csv,
    write_result,
)
from . import _core


def _as_json_text(config):
    """Accept a dict (serialized here) or ready-made JSON text."""
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def validate_config(config):
    """Validate a config dict (or JSON text).

    Returns ``(ok, errors, warnings, report_text)`` where errors and
    warnings are lists of ``(path, message)`` pairs.
    """
    return _core.validate_config_json(_as_json_text(config))


def config_hash8(config):
    """Eight-hex-digit hash identifying a config (seed included)."""
    return _core.config_hash8_json(_as_json_text(config))


def config_seed(config, override=None):
    """Effective RNG seed for a config, with an optional override."""
    return _core.config_seed_json(_as_json_text(config), override)


def run_scenario(config, seed=None):
    """Run the scenario named in ``config["scenario"]["name"]``.

    ``config`` may be a dict or JSON text.  Returns a ``ScenarioResult``;
    ``summary_of(result)`` parses its summary JSON into a dict.
    """
    return _core.run_scenario_json(_as_json_text(config), seed)


def summary_of(result):
    """Parsed summary dict of a ``ScenarioResult``."""
    return _json.loads(result.summary_json)


def compare_to_reference(result, reference):
    """Check a ``ScenarioResult`` against a reference record (dict/text)."""
    return _core.compare_to_reference_json(result, _as_json_text(reference))
