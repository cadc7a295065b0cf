"""Impact functions: fitting, model averaging, rescaling and benefits.

Published estimates keep their sign (negative = damage, positive =
benefit). Impact functions return *damage*, a positive % GDP loss, so a
fitted function D satisfies D(T) ~ -impact and D(0) = 0 for every form.
"""

import logging
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import curve_fit
from scipy.special import softmax

from .exceptions import AlignmentError, DomainError, ScenarioParseError, SingularDesignError

logger = logging.getLogger(__name__)

PIECEWISE_KNOT = 2.5

# benefit deltas (baseline °C, policy °C, avoided damage % GDP) the default
# quadratic is fitted to; the SSP3-7.0 pair (3.9 -> 2.0: 1.8, 3.9 -> 1.5: 2.2)
# is held out
DEFAULT_BENEFIT_DELTAS = ((4.8, 2.0, 2.8), (4.8, 1.5, 3.1))


@dataclass(frozen=True)
class ImpactEstimate:
    paper_id: str
    warming: float
    impact: float
    weight: float = 1.0

    def __post_init__(self):
        if not self.warming > 0:
            raise DomainError(f"estimate {self.paper_id}: warming must be positive, got {self.warming}")
        if not self.weight >= 0:
            raise DomainError(f"estimate {self.paper_id}: weight must be non-negative")


def _piecewise_basis(t):
    return np.column_stack([np.minimum(t, PIECEWISE_KNOT), np.maximum(t - PIECEWISE_KNOT, 0.0)])


# forms that are linear in their parameters: name -> design matrix builder
LINEAR_FORMS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "linear": lambda t: t[:, None],
    "quadratic_no_linear": lambda t: (t**2)[:, None],
    "quadratic": lambda t: np.column_stack([t, t**2]),
    "cubic": lambda t: np.column_stack([t, t**2, t**3]),
    "piecewise_linear": _piecewise_basis,
}


def _exponential(t, a, b):
    return a * np.expm1(b * t)


def _power(t, a, b):
    return a * np.power(t, b)


# name -> (model, initial guess, bounds)
NONLINEAR_FORMS = {
    "exponential": (_exponential, (1.0, 0.3), ([-np.inf, 1e-4], [np.inf, 5.0])),
    "power": (_power, (0.5, 2.0), ([-np.inf, 1e-3], [np.inf, 10.0])),
}

FORMS = (
    "linear",
    "quadratic_no_linear",
    "quadratic",
    "exponential",
    "piecewise_linear",
    "power",
    "cubic",
)


@dataclass(frozen=True)
class ImpactFunction:
    """One fitted functional form D(T) in % GDP damage.

    ``wsse`` is the weighted sum of squared residuals of the fit (nan for
    functions that were not fitted); ``fit_weight`` is its share in a
    model average, ``None`` until weights are assigned.
    """

    form: str
    params: Tuple[float, ...]
    fit_weight: Optional[float] = None
    wsse: float = float("nan")

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown impact form '{self.form}'; choose from {', '.join(FORMS)}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if not np.all(np.isfinite(self.params)):
            raise ValueError(f"{self.form} parameters must be finite, got {self.params}")

    def damage(self, temperature):
        t = np.asarray(temperature, dtype=float)
        if self.form in LINEAR_FORMS:
            # elementwise sum so results do not depend on the array shape
            basis = LINEAR_FORMS[self.form](t.reshape(-1))
            value = sum(p * basis[:, j] for j, p in enumerate(self.params))
            return value.reshape(t.shape)
        model = NONLINEAR_FORMS[self.form][0]
        return model(t, *self.params)

    __call__ = damage


@dataclass(frozen=True)
class CompositeImpactFunction:
    """Weighted average of impact functions; weights sum to 1."""

    members: Tuple[ImpactFunction, ...]
    weights: Tuple[float, ...]
    form: str = field(default="composite", init=False)

    def __post_init__(self):
        if len(self.members) != len(self.weights) or not self.members:
            raise ValueError("a composite needs one weight per member")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"composite weights must sum to 1, got {sum(self.weights)}")

    def damage(self, temperature):
        return sum(w * f.damage(temperature) for f, w in zip(self.members, self.weights) if w != 0)

    __call__ = damage


@dataclass(frozen=True)
class UncertaintyBand:
    """Right-skewed spread around a damage or benefit path.

    The spreads are quoted at a level of ``reference`` % GDP and scale with
    the magnitude of the central value.
    """

    sd_below: float = 1.2
    sd_above: float = 1.8
    reference: float = 2.8

    def __post_init__(self):
        if self.sd_below < 0 or self.sd_above < 0:
            raise ValueError("spreads must be non-negative")
        if not self.reference > 0:
            raise ValueError("reference level must be positive")

    def half_widths(self, values) -> Tuple[np.ndarray, np.ndarray]:
        magnitude = np.abs(np.asarray(values, dtype=float)) / self.reference
        return magnitude * self.sd_below, magnitude * self.sd_above

    def bounds(self, values) -> Tuple[np.ndarray, np.ndarray]:
        values = np.asarray(values, dtype=float)
        below, above = self.half_widths(values)
        return values - below, values + above


def damage(temperature, f) -> np.ndarray:
    """Damage (% GDP) at ``temperature`` °C for an impact function or composite."""
    t = np.asarray(temperature, dtype=float)
    if np.any(t < 0):
        raise DomainError(f"temperature must be non-negative, got {t.min()}")
    return f.damage(t)


def _arrays(estimates: Sequence[ImpactEstimate]):
    t = np.array([e.warming for e in estimates], dtype=float)
    y = -np.array([e.impact for e in estimates], dtype=float)
    w = np.array([e.weight for e in estimates], dtype=float)
    return t, y, w


def _n_params(form: str) -> int:
    if form in LINEAR_FORMS:
        return LINEAR_FORMS[form](np.ones(1)).shape[1]
    return len(NONLINEAR_FORMS[form][1])


def fit_impact_function(estimates: Sequence[ImpactEstimate], form: str) -> ImpactFunction:
    """Weighted least-squares fit of one functional form through the origin."""
    if form not in FORMS:
        raise ValueError(f"unknown impact form '{form}'; choose from {', '.join(FORMS)}")
    t, y, w = _arrays(estimates)
    k = _n_params(form)
    if len(t) < k:
        raise SingularDesignError(f"{form} needs at least {k} estimates, got {len(t)}")

    if form in LINEAR_FORMS:
        root_w = np.sqrt(w)
        X = LINEAR_FORMS[form](t) * root_w[:, None]
        if np.linalg.matrix_rank(X) < k:
            raise SingularDesignError(
                f"{form} is not identified by estimates at warming {sorted(set(t.tolist()))}"
            )
        params, *_ = np.linalg.lstsq(X, y * root_w, rcond=None)
    else:
        if len(np.unique(t[w > 0])) < k:
            raise SingularDesignError(f"{form} needs {k} distinct warming levels")
        model, p0, bounds = NONLINEAR_FORMS[form]
        sigma = 1.0 / np.sqrt(np.where(w > 0, w, np.finfo(float).tiny))
        try:
            params, _ = curve_fit(model, t, y, p0=p0, sigma=sigma, bounds=bounds, maxfev=20000)
        except RuntimeError as e:
            raise SingularDesignError(f"{form} fit did not converge: {e}") from None

    fitted = ImpactFunction(form, tuple(params))
    wsse = float(np.sum(w * (y - fitted.damage(t)) ** 2))
    logger.debug("fitted %s: params=%s wsse=%.4g", form, fitted.params, wsse)
    return replace(fitted, wsse=wsse)


def likelihood_weights(fits: Sequence[ImpactFunction], floor: float = 1e-12) -> np.ndarray:
    """Weights proportional to exp(-wsse / (2 sigma^2)), sigma^2 the best fit's wsse."""
    wsse = np.array([f.wsse for f in fits], dtype=float)
    if not np.all(np.isfinite(wsse)):
        raise ValueError("likelihood weights need fitted functions (finite wsse)")
    sigma2 = max(float(wsse.min()), floor)
    return softmax(-0.5 * wsse / sigma2)


def fit_all(estimates: Sequence[ImpactEstimate], forms: Sequence[str] = FORMS) -> List[ImpactFunction]:
    """Fit every form and attach likelihood weights.

    Forms the estimates cannot identify are skipped with a warning.
    """
    fits = []
    for form in forms:
        try:
            fits.append(fit_impact_function(estimates, form))
        except SingularDesignError as e:
            logger.warning("skipping %s: %s", form, e)
    if not fits:
        raise SingularDesignError("no impact form could be fitted to the estimates")
    weights = likelihood_weights(fits)
    return [replace(f, fit_weight=float(w)) for f, w in zip(fits, weights)]


def model_average(fits: Sequence[ImpactFunction]) -> CompositeImpactFunction:
    """Composite of ``fits`` weighted by their ``fit_weight``.

    When no fit carries a weight, likelihood weights are computed from the
    fits' ``wsse``.
    """
    fits = tuple(fits)
    if not fits:
        raise ValueError("model_average needs at least one impact function")
    if all(f.fit_weight is None for f in fits):
        weights = likelihood_weights(fits)
    else:
        weights = np.array([f.fit_weight or 0.0 for f in fits], dtype=float)
        if np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("fit weights must be non-negative with a positive sum")
        weights = weights / weights.sum()
    return CompositeImpactFunction(fits, tuple(float(w) for w in weights))


def scale_estimate(e: ImpactEstimate, target_T: float, composite) -> float:
    """Rescale an estimate to ``target_T`` along the shape of ``composite``."""
    at_estimate = float(composite.damage(e.warming))
    if abs(at_estimate) < 1e-15:
        raise DomainError(
            f"cannot rescale estimate {e.paper_id}: damage is zero at {e.warming} °C"
        )
    return e.impact * (float(composite.damage(target_T)) / at_estimate)


def _temperatures(path):
    years = getattr(path, "years", None)
    temperature = getattr(path, "temperature", path)
    return years, np.asarray(temperature, dtype=float)


def benefit(baseline_T, policy_T, composite) -> np.ndarray:
    """Avoided damage D(baseline) - D(policy) per year, % GDP.

    Accepts temperature arrays or objects with ``years`` and
    ``temperature`` (such as ``ClimatePath``); extra trailing dimensions
    (one column per draw) broadcast.
    """
    years_b, t_b = _temperatures(baseline_T)
    years_p, t_p = _temperatures(policy_T)
    if t_b.shape[0] != t_p.shape[0]:
        raise AlignmentError(f"baseline has {t_b.shape[0]} years, policy has {t_p.shape[0]}")
    if years_b is not None and years_p is not None and not np.array_equal(years_b, years_p):
        raise AlignmentError(
            f"baseline covers {years_b[0]}-{years_b[-1]}, policy covers {years_p[0]}-{years_p[-1]}"
        )
    return damage(t_b, composite) - damage(t_p, composite)


def coverage_adjust(d, underestimate_fraction: float = 0.0):
    """Scale damages up for impacts the estimates leave out: d / (1 - fraction)."""
    if not 0.0 <= underestimate_fraction < 1.0:
        raise DomainError(
            f"underestimate fraction must be in [0, 1), got {underestimate_fraction}"
        )
    return d / (1.0 - underestimate_fraction)


def calibrate_benefit_deltas(deltas: Sequence[Tuple[float, float, float]]) -> ImpactFunction:
    """Quadratic D(T) = aT + bT^2 fitted to (baseline °C, policy °C, benefit) triples."""
    deltas = np.asarray(deltas, dtype=float)
    if deltas.ndim != 2 or deltas.shape[1] != 3:
        raise ValueError("deltas must be (baseline_T, policy_T, benefit) triples")
    t_b, t_p, target = deltas.T
    X = np.column_stack([t_b - t_p, t_b**2 - t_p**2])
    if np.linalg.matrix_rank(X) < 2:
        raise SingularDesignError("benefit deltas do not identify both coefficients")
    params, *_ = np.linalg.lstsq(X, target, rcond=None)
    fitted = ImpactFunction("quadratic", tuple(params))
    residual = target - (fitted.damage(t_b) - fitted.damage(t_p))
    return replace(fitted, wsse=float(np.sum(residual**2)))


def default_impact_function() -> ImpactFunction:
    """The quadratic through the two SSP5-8.5 benefit deltas (a ~ 0.176, b ~ 0.121)."""
    return calibrate_benefit_deltas(DEFAULT_BENEFIT_DELTAS)


def load_estimates(path) -> List[ImpactEstimate]:
    """Read ``paper_id,warming_c,impact_pct_gdp`` rows.

    Each paper carries equal weight, split evenly over its estimates, so
    the weights sum to 1.
    """
    path = Path(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    frame.columns = [str(c).strip() for c in frame.columns]
    for column in ("paper_id", "warming_c", "impact_pct_gdp"):
        if column not in frame.columns:
            raise ScenarioParseError("missing required column", column=column)
    if frame.empty:
        raise ScenarioParseError(f"{path}: no estimates")

    rows = []
    for position, record in enumerate(frame.itertuples(index=False)):
        row = position + 2
        paper = record.paper_id.strip()
        if not paper:
            raise ScenarioParseError("missing paper id", row=row, column="paper_id")
        values = {}
        for column in ("warming_c", "impact_pct_gdp"):
            text = getattr(record, column)
            try:
                values[column] = float(text)
            except ValueError:
                raise ScenarioParseError(f"'{text}' is not a number", row=row, column=column) from None
        if not values["warming_c"] > 0:
            raise ScenarioParseError("warming must be positive", row=row, column="warming_c")
        rows.append((paper, values["warming_c"], values["impact_pct_gdp"]))

    per_paper = pd.Series([r[0] for r in rows]).value_counts()
    n_papers = len(per_paper)
    estimates = [
        ImpactEstimate(paper, warming, impact, 1.0 / (n_papers * per_paper[paper]))
        for paper, warming, impact in rows
    ]
    logger.info("loaded %d estimates from %d papers", len(estimates), n_papers)
    return estimates


def bundled_estimates() -> List[ImpactEstimate]:
    """The small synthetic estimates collection shipped with the package."""
    ref = resources.files(__package__) / "data" / "synthetic_estimates.csv"
    with resources.as_file(ref) as path:
        return load_estimates(path)


def impact_histogram(
    estimates: Sequence[ImpactEstimate],
    composite,
    target_T: float = 2.5,
    bins=None,
) -> pd.DataFrame:
    """Weighted histogram of estimates rescaled to ``target_T``.

    Bin weights are normalized to sum to 1. By default bins are 1 % GDP
    wide and cover all rescaled values.
    """
    scaled = np.array([scale_estimate(e, target_T, composite) for e in estimates])
    weights = np.array([e.weight for e in estimates], dtype=float)
    if bins is None:
        bins = np.arange(np.floor(scaled.min()), np.ceil(scaled.max()) + 1.0, 1.0)
        if len(bins) < 2:
            bins = np.array([bins[0], bins[0] + 1.0])
    counts, edges = np.histogram(scaled, bins=bins, weights=weights)
    return pd.DataFrame(
        {
            "bin_lower": edges[:-1],
            "bin_upper": edges[1:],
            "weighted_frequency": counts / counts.sum(),
        }
    )


def summarize_estimates(
    estimates: Sequence[ImpactEstimate],
    composite=None,
    target_T: float = 2.5,
    year_of_growth: float = 2.5,
) -> Dict[str, float]:
    """Weighted shape of an estimates collection.

    Shares are of total weight: estimates showing a benefit, moderate
    damages (0 to 2 % GDP) and damages larger than ``year_of_growth``
    % GDP. With a composite the estimates are first rescaled to
    ``target_T``.
    """
    if composite is not None:
        impacts = np.array([scale_estimate(e, target_T, composite) for e in estimates])
    else:
        impacts = np.array([e.impact for e in estimates], dtype=float)
    weights = np.array([e.weight for e in estimates], dtype=float)
    weights = weights / weights.sum()

    mean = float(np.sum(weights * impacts))
    sd = float(np.sqrt(np.sum(weights * (impacts - mean) ** 2)))
    # skewness of damage (= -impact); positive when the damage tail is long
    skewness = float(-np.sum(weights * (impacts - mean) ** 3) / sd**3) if sd > 0 else 0.0
    most_optimistic = float(impacts.max())
    most_pessimistic = float(impacts.min())
    ratio = (
        abs(most_pessimistic) / most_optimistic
        if most_optimistic > 0 and most_pessimistic < 0
        else float("nan")
    )
    return {
        "n_estimates": len(estimates),
        "weighted_mean": mean,
        "benefit_share": float(weights[impacts > 0].sum()),
        "moderate_damage_share": float(weights[(impacts <= 0) & (impacts >= -2.0)].sum()),
        "beyond_growth_share": float(weights[impacts < -year_of_growth].sum()),
        "damage_skewness": skewness,
        "pessimist_optimist_ratio": ratio,
    }
