import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from sage_weyl.exceptions import ConfigInvalid, NoConvergence, SageWeylError
from sage_weyl.helpers.enums import Experiment, ModelKind
from sage_weyl.models.certificate import DecayEnvelope
from sage_weyl.models.config import ExperimentConfig
from sage_weyl.models.parameter import BoundaryParameter, boundary_param
from sage_weyl.services.bounds import (
    asymptotic_slope,
    certify_bound,
    certify_decay,
    dirichlet_min_sigma,
    small_coupling_table,
)
from sage_weyl.services.discrete import build_discrete_model, random_discrete_model
from sage_weyl.services.halfline import HalfLineModel
from sage_weyl.services.krein import (
    check_lower_bound_hypotheses,
    check_selfadjoint_hypotheses,
    neumann_threshold,
    spectral_transfer_residual,
)
from sage_weyl.services.spectral import (
    resolvent_consistency,
    spectrum_sweep,
    sweep_is_monotone,
)
from sage_weyl.services.triple import (
    TripleModel,
    green_residual,
    weyl,
    weyl_derivative_residual,
)
from sage_weyl.utils import format_float, seeded_rng, write_csv, write_json

logger = logging.getLogger(__name__)

GREEN_PAIRS = 20
KREIN_VECTORS = 10
KREIN_AGREEMENT = 1e-8
SATURATION_FRACTION = 0.1


def build_model(config: ExperimentConfig) -> TripleModel:
    """Builds the model the configuration describes."""
    if config.model is ModelKind.DISCRETE:
        return build_discrete_model(config.grid, config.coeff)
    if config.model is ModelKind.HALFLINE:
        return HalfLineModel(config.halfline)
    spec = config.random
    return random_discrete_model(
        spec.interior,
        spec.boundary,
        seed=config.seed,
        complex_values=spec.complex_values,
    )


def _parameter(config: ExperimentConfig, model: TripleModel) -> BoundaryParameter:
    if config.B is None:
        raise ConfigInvalid("This experiment needs a boundary parameter.", "/B")
    return boundary_param(config.B, model)


def _complex_points(model: TripleModel) -> List[complex]:
    offset = 1.0 + model.spectral_radius
    return [1j * offset, -1j * offset]


def _lambda_entry(lam: complex) -> Dict[str, float]:
    return {"re": float(np.real(lam)), "im": float(np.imag(lam))}


def run_triple_check(config: ExperimentConfig, model: TripleModel) -> Dict[str, Any]:
    """
    Checks the Green identity on random states and the symmetry of M.

    Writes ``report.json``.
    """
    rng = seeded_rng(config.seed)
    scale = max(1.0, model.spectral_radius)
    relative = []
    for _ in range(GREEN_PAIRS):
        f = model.random_state(rng)
        g = model.random_state(rng)
        size = scale * f.euclidean_norm() * g.euclidean_norm()
        relative.append(green_residual(model, f, g) / max(size, 1e-300))

    points = list(config.lambdas) or _complex_points(model)
    weyl_rows = []
    for lam in points:
        value = weyl(model, lam)
        mirrored = weyl(model, np.conj(lam))
        weyl_rows.append(
            {
                "lambda": _lambda_entry(lam),
                "norm": value.norm(),
                "symmetry_defect": value.conjugate_symmetry_defect(mirrored),
            }
        )

    real_point = model.decay_anchor - 1.0
    phi = model.random_boundary_vector(rng)
    derivative = weyl_derivative_residual(
        model, real_point, phi, 1e-4 * max(1.0, abs(real_point))
    )
    worst = max(relative)
    report = {
        "experiment": str(config.experiment),
        "model": model.describe(),
        "pairs": GREEN_PAIRS,
        "max_residual": worst,
        "weyl": weyl_rows,
        "derivative_residual": {"lambda": real_point, "residual": derivative},
        "passed": worst <= config.tolerances.identity,
    }
    write_json(config.out / "report.json", report)
    logger.info("Green check: max relative residual %.3e", worst)
    return report


def run_krein_check(config: ExperimentConfig, model: TripleModel) -> Dict[str, Any]:
    """
    Compares the Krein formula with a direct solve of (A_[B] - λ)u = f.

    Writes ``report.json`` and ``krein.csv`` (one row per λ).
    """
    B = _parameter(config, model)
    points = list(config.lambdas) or _complex_points(model)
    rows = []
    for lam in points:
        deviation = resolvent_consistency(
            model,
            B,
            [lam],
            seed=config.seed,
            n_vectors=KREIN_VECTORS,
            jobs=config.jobs,
            tolerance=config.tolerances.krein_block,
        )
        rows.append(
            {
                "lambda_re": float(np.real(lam)),
                "lambda_im": float(np.imag(lam)),
                "deviation": deviation,
            }
        )
    write_csv(config.out / "krein.csv", ["lambda_re", "lambda_im", "deviation"], rows)
    worst = max(row["deviation"] for row in rows)
    report = {
        "experiment": str(config.experiment),
        "model": model.describe(),
        "vectors_per_lambda": KREIN_VECTORS,
        "max_deviation": worst,
        "passed": worst <= KREIN_AGREEMENT,
    }
    write_json(config.out / "report.json", report)
    return report


def run_hypotheses(config: ExperimentConfig, model: TripleModel) -> Dict[str, Any]:
    """Runs both hypothesis checkers and writes ``hypotheses.json``."""
    B = _parameter(config, model)
    selfadjoint = check_selfadjoint_hypotheses(
        model,
        B,
        list(config.lambdas) or None,
        tolerance=config.tolerances.krein_hypothesis,
    )
    lower = check_lower_bound_hypotheses(model, B)
    try:
        threshold: Optional[float] = neumann_threshold(model, B)
    except NoConvergence as exc:
        logger.warning("No Neumann-series threshold: %s", exc.detail)
        threshold = None
    point = model.min_sigma_A0 - 1.0
    report = {
        "experiment": str(config.experiment),
        "model": model.describe(),
        "selfadjoint": selfadjoint,
        "lower_bound": lower,
        "neumann_threshold": threshold,
        "spectral_transfer_residual": {
            "lambda": point,
            "residual": spectral_transfer_residual(model, B, point),
        },
    }
    write_json(config.out / "hypotheses.json", report)
    return report


def _check_saturation(model: TripleModel, mu: float, lo: float) -> None:
    h = getattr(model, "h", None)
    if h is None:
        return
    crossover = h**-2
    if mu - lo > SATURATION_FRACTION * crossover:
        logger.error("Fit window reaches the mesh crossover %.3g.", crossover)
        raise ConfigInvalid(
            f"mu - lo = {mu - lo:.6g} exceeds {SATURATION_FRACTION} h^-2 = "
            f"{SATURATION_FRACTION * crossover:.6g}; the mesh saturates the decay "
            f"near |λ| ~ {crossover:.6g}.",
            "/fit_window/lo",
        )


def _envelope(config: ExperimentConfig, model: TripleModel) -> DecayEnvelope:
    window = config.fit_window
    if window is None:
        raise ConfigInvalid("This experiment needs a fit window.", "/fit_window")
    mu = model.decay_anchor if window.mu is None else window.mu
    _check_saturation(model, mu, window.lo)
    return certify_decay(
        model, (window.lo, window.hi), mu=mu, samples=window.samples, jobs=config.jobs
    )


def run_decay_fit(config: ExperimentConfig, model: TripleModel) -> Dict[str, Any]:
    """Certifies a decay envelope; writes ``samples.csv`` and ``envelope.json``."""
    envelope = _envelope(config, model)
    rows = [
        {
            "lambda": lam,
            "norm_M": norm,
            "bound_value": envelope.bound(lam),
            "satisfied": envelope.holds(lam, norm),
        }
        for lam, norm in envelope.samples
    ]
    write_csv(
        config.out / "samples.csv",
        ["lambda", "norm_M", "bound_value", "satisfied"],
        rows,
    )
    write_json(config.out / "envelope.json", envelope)
    return envelope.to_dict()


def run_bound_certify(config: ExperimentConfig, model: TripleModel) -> Dict[str, Any]:
    """
    Issues a certificate for B (and for each ω·B when couplings are given).

    The decay route is used when a fit window is configured. Writes
    ``certificates.json`` with the computed min σ next to every certificate.
    """
    B = _parameter(config, model)
    envelope = _envelope(config, model) if config.fit_window is not None else None
    omegas = sorted(config.omegas) or [1.0]
    entries = []
    for omega in omegas:
        scaled = B.scaled(omega)
        certificate = certify_bound(model, scaled, envelope)
        min_sigma = (
            model.min_sigma_A0 if omega == 0 else model.robin_min_sigma(scaled.matrix)
        )
        entries.append(
            {
                "omega": omega,
                "certificate": certificate,
                "min_sigma": min_sigma,
                "slack": certificate.slack(min_sigma),
            }
        )
    report: Dict[str, Any] = {
        "experiment": str(config.experiment),
        "model": model.describe(),
        "envelope": envelope,
        "certificates": entries,
        "dirichlet_min_sigma": dirichlet_min_sigma(model),
    }
    if envelope is not None and envelope.mu == model.min_sigma_A0:
        positive = [omega for omega in omegas if omega > 0]
        report["small_coupling"] = small_coupling_table(
            model, B, positive, envelope, jobs=config.jobs
        )
    write_json(config.out / "certificates.json", report)
    return report


def _is_nonnegative(B: BoundaryParameter) -> bool:
    return bool(np.linalg.eigvalsh(B.matrix)[0] >= -1e-12) if B.dim else True


def run_sweep(config: ExperimentConfig, model: TripleModel) -> Dict[str, Any]:
    """
    Sweeps ω ↦ min σ(A_[ωB]); writes ``sweep.csv`` and ``sweep.json``.

    The summary carries the asymptotic slope when enough couplings give a
    negative bottom, the monotonicity verdict, and the Dirichlet upper anchor.
    """
    B = _parameter(config, model)
    if not config.omegas:
        raise ConfigInvalid("A sweep needs at least one coupling.", "/omegas")
    envelope = _envelope(config, model) if config.fit_window is not None else None
    rows = spectrum_sweep(model, B, config.omegas, envelope=envelope, jobs=config.jobs)
    write_csv(
        config.out / "sweep.csv",
        ["omega", "min_sigma", "certificate", "slack"],
        [row.to_row() for row in rows],
    )
    try:
        slope: Optional[float] = asymptotic_slope(
            [row.omega for row in rows], [row.min_sigma for row in rows]
        )
    except SageWeylError as exc:
        logger.warning("No asymptotic slope: %s", exc.detail)
        slope = None
    anchor = dirichlet_min_sigma(model)
    summary = {
        "experiment": str(config.experiment),
        "model": model.describe(),
        "rows": len(rows),
        "asymptotic_slope": slope,
        "monotone": sweep_is_monotone(rows) if _is_nonnegative(B) else None,
        "dirichlet_min_sigma": anchor,
        "below_dirichlet": all(
            row.min_sigma <= anchor + 1e-8 * (1.0 + abs(anchor)) for row in rows
        ),
        "certificates_hold": all(
            row.slack >= -1e-8 * (1.0 + abs(row.certificate.value)) for row in rows
        ),
        "envelope": envelope,
    }
    write_json(config.out / "sweep.json", summary)
    logger.info("Sweep written to %s", config.out)
    return summary


RUNNERS: Dict[Experiment, Callable[[ExperimentConfig, TripleModel], Dict[str, Any]]] = {
    Experiment.TRIPLE_CHECK: run_triple_check,
    Experiment.GREEN_CHECK: run_triple_check,
    Experiment.KREIN_CHECK: run_krein_check,
    Experiment.HYPOTHESES: run_hypotheses,
    Experiment.DECAY_FIT: run_decay_fit,
    Experiment.BOUND_CERTIFY: run_bound_certify,
    Experiment.SWEEP: run_sweep,
}


def run_experiment(config: ExperimentConfig) -> Dict[str, Any]:
    """
    Builds the model and runs the configured experiment.

    Parameters
    ----------
    config : ExperimentConfig
        A validated configuration.

    Returns
    -------
    Dict[str, Any]
        The experiment summary that was written to ``config.out``.

    Raises
    ------
    SageWeylError
        Configuration errors (exit code 2) and numerical errors (exit code 3).
    """
    Path(config.out).mkdir(parents=True, exist_ok=True)
    model = build_model(config)
    logger.info(
        "Running %s on a %s model (min σ(A0) = %s)",
        config.experiment,
        config.model,
        format_float(model.min_sigma_A0),
    )
    return RUNNERS[config.experiment](config, model)
