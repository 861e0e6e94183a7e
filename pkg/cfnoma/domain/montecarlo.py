"""
Monte Carlo check of the closed-form SINR terms.

Each realization draws Rayleigh small-scale fading and pilot noise, forms the
per-AP pilot observations, the MMSE estimates and the full-pilot zero-forcing
precoders (normalized by their analytic expected norm), and measures the
received stream amplitudes. Realizations run in blocks; block b always uses
child b of the root SeedSequence, so the result does not depend on how blocks
are scheduled.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from ..core.config import settings
from ..core.errors import InvalidInputError
from ..core.logger import error_logger, msg_logger
from ..schemas.clustering import Clustering
from ..schemas.performance import DecodeStep, McOracleConfig, McReport, SinrBreakdown
from ..schemas.system import SystemConfig
from .network import check_partition, estimation_stats
from .sse import TERMS, sinr_cf, user_se_vector_cf

GRAM_COND_LIMIT = 1e12
# a term outside the relative tolerance still passes when within this many standard errors
SAMPLING_Z = 4.0


def _complex_normal(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


class _Channel:
    """Per-block constants shared by every realization."""

    def __init__(self, config: SystemConfig, beta: np.ndarray, clustering: Clustering, rho: np.ndarray):
        self.M, self.N = beta.shape
        self.K = config.num_antennas
        self.tau_p = config.tau_p
        self.L = clustering.num_clusters
        self.labels = clustering.assignment
        self.sqrt_beta = np.sqrt(beta)
        self.sqrt_pilot = np.sqrt(config.pilot_powers)
        self.sqrt_rho = np.sqrt(rho)

        # orthogonal pilot book with squared column norm tau_p
        self.pilots = np.fft.fft(np.eye(self.tau_p))
        self.ue_pilots = self.pilots[:, self.labels]                   # (tau_p, N)

        gamma, upsilon = estimation_stats(beta, clustering, config)
        self.upsilon = upsilon
        membership = np.zeros((self.N, self.L))
        membership[np.arange(self.N), self.labels] = 1.0
        received = self.tau_p * (beta * config.pilot_powers) @ membership + 1.0
        # E||H_tilde G^-1 e_l||^2 = 1 / ((K - tau_p) tau_p D_ml); precoders are scaled back to unit mean power
        self.scale = np.sqrt((self.K - self.tau_p) * self.tau_p * received)   # (M, L)

    def draw(self, rng: np.random.Generator, count: int) -> Tuple[np.ndarray, np.ndarray]:
        fading = _complex_normal(rng, (count, self.M, self.N, self.K))
        h = self.sqrt_beta[None, :, :, None] * fading
        noise = _complex_normal(rng, (count, self.M, self.K, self.tau_p))
        return h, noise

    def estimate(self, h: np.ndarray, noise: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Projected pilot observations H_tilde (R, M, K, tau_p) and their Gram matrices."""
        y = np.einsum("rmnk,n,tn->rmkt", h, self.sqrt_pilot, self.ue_pilots.conj()) + noise
        h_tilde = y @ self.pilots
        gram = np.conj(np.swapaxes(h_tilde, -1, -2)) @ h_tilde
        return h_tilde, gram


def _run_block(
    channel: _Channel, seed: np.random.SeedSequence, count: int
) -> Tuple[np.ndarray, np.ndarray, int, float]:
    rng = np.random.default_rng(seed)
    h, noise = channel.draw(rng, count)
    h_tilde, gram = channel.estimate(h, noise)

    resampled = 0
    bad = np.any(np.linalg.cond(gram) > GRAM_COND_LIMIT, axis=1)
    while np.any(bad):
        idx = np.flatnonzero(bad)
        resampled += idx.size
        h[idx], noise[idx] = channel.draw(rng, idx.size)
        h_tilde[idx], gram[idx] = channel.estimate(h[idx], noise[idx])
        bad[idx] = np.any(np.linalg.cond(gram[idx]) > GRAM_COND_LIMIT, axis=1)

    # full-pilot zero-forcing: W = H_tilde G^-1, columns of used pilots, scaled to unit expected norm
    zf = np.conj(np.swapaxes(np.linalg.solve(gram, np.conj(np.swapaxes(h_tilde, -1, -2))), -1, -2))
    precoders = zf[..., : channel.L] * channel.scale[None, :, None, :]           # (R, M, K, L)

    gains = np.einsum("rmnk,rmkl->rmnl", h.conj(), precoders)                    # h_{m,n}^H w_{m,l}
    amplitude = np.einsum("mj,rmnj->rnj", channel.sqrt_rho, gains[..., channel.labels])

    estimates = channel.upsilon[None, :, None, :] * h_tilde[..., channel.labels]  # (R, M, K, N)
    leak = np.abs(np.einsum("rmkn,rmkl->rmnl", estimates.conj(), precoders)) ** 2
    own = channel.labels[None, None, :, None] == np.arange(channel.L)[None, None, None, :]
    in_cluster = np.max(np.where(own, leak, 0.0))
    leakage = float(np.max(np.where(own, 0.0, leak)) / in_cluster) if in_cluster > 0 else 0.0

    return amplitude.sum(axis=0), (np.abs(amplitude) ** 2).sum(axis=0), resampled, leakage


def _relative(empirical: float, closed: float, scale: float) -> float:
    reference = closed if closed > 0 else scale
    if reference <= 0:
        return 0.0 if empirical == 0 else float("inf")
    return abs(empirical - closed) / reference


def _empirical(
    mean: np.ndarray, power: np.ndarray, clustering: Clustering, zeta: np.ndarray, target: int, evaluator: int,
) -> SinrBreakdown:
    """Terms of one decoding step from first and second moments indexed [receiving UE, stream]."""
    labels = clustering.assignment
    members = clustering.clusters[labels[target]]
    pos = clustering.rank[target]
    e = evaluator
    ds = float(np.abs(mean[e, target]) ** 2)
    return SinrBreakdown.from_terms(
        ds=ds,
        bu=float(max(power[e, target] - ds, 0.0)),
        ici=float(power[e, members[:pos]].sum()),
        rici=float(zeta[target] * power[e, members[pos + 1:]].sum()),
        ui=float(power[e, labels != labels[target]].sum()),
    )


def _standard_error(batches: List[float]) -> float:
    # batch means; a single block gives no allowance
    if len(batches) < 2:
        return 0.0
    return float(np.std(batches, ddof=1) / np.sqrt(len(batches)))


def mc_verify(
    config: SystemConfig,
    beta: ArrayLike,
    clustering: Clustering,
    rho: ArrayLike,
    mc: McOracleConfig,
    workers: Optional[int] = None,
) -> McReport:
    """
    Compare the closed-form SINR terms of every SIC decoding step against Monte Carlo estimates.

    A term passes when its relative error is within the tolerance or its deviation is
    within SAMPLING_Z batch-means standard errors; every UE's spectral efficiency,
    taken at the worst SINR over the UEs decoding its stream, must be within the
    tolerance.

    Parameters:
    - config (SystemConfig): system parameters, K > tau_p
    - beta: M x N large-scale coefficients
    - clustering (Clustering): decode-ordered clusters
    - rho: M x N downlink powers
    - mc (McOracleConfig): realization count, seed and tolerance
    - workers (int, optional): threads evaluating blocks concurrently

    Returns:
    - report (McReport): per-step terms and errors, per-UE SE errors, resample count and zero-forcing leakage
    """
    config.require_zf_dimension()
    b = np.asarray(beta, dtype=float)
    r = np.asarray(rho, dtype=float)
    if b.ndim != 2 or r.shape != b.shape:
        raise InvalidInputError("beta and rho must both be M x N")
    check_partition(clustering, b.shape[1])

    channel = _Channel(config, b, clustering, r)
    block = mc.block_size or settings.MC_BLOCK
    sizes = [block] * (mc.num_realizations // block)
    if mc.num_realizations % block:
        sizes.append(mc.num_realizations % block)
    seeds = np.random.SeedSequence(mc.seed).spawn(len(sizes))

    with ThreadPoolExecutor(max_workers=workers or 1) as pool:
        results = list(pool.map(lambda args: _run_block(channel, *args), zip(seeds, sizes)))

    # reduce in block order so the floating-point sum is schedule independent
    first = np.zeros((channel.N, channel.N), dtype=complex)
    second = np.zeros((channel.N, channel.N))
    resampled, leakage = 0, 0.0
    for s1, s2, count, leak in results:
        first += s1
        second += s2
        resampled += count
        leakage = max(leakage, leak)
    mean = first / mc.num_realizations
    power = second / mc.num_realizations
    if resampled:
        msg_logger.debug("Monte Carlo: redrew %d ill-conditioned realizations", resampled)

    gamma, _ = estimation_stats(b, clustering, config)
    zeta = config.zeta
    steps: List[DecodeStep] = []
    term_errors: Dict[str, float] = {t: 0.0 for t in TERMS}
    sampling_ok = True
    worst_sinr = np.full(channel.N, np.inf)
    for cluster in clustering.clusters:
        for pos, n in enumerate(cluster):
            for e in cluster[:pos + 1]:
                cf = sinr_cf(n, e, r, gamma, b, clustering, config)
                emp = _empirical(mean, power, clustering, zeta, n, e)
                per_block = [
                    _empirical(s1 / size, s2 / size, clustering, zeta, n, e)
                    for (s1, s2, _, _), size in zip(results, sizes)
                ]
                relative, standard = {}, {}
                for t in TERMS:
                    relative[t] = _relative(getattr(emp, t), getattr(cf, t), cf.ds)
                    standard[t] = _standard_error([getattr(bd, t) for bd in per_block])
                    term_errors[t] = max(term_errors[t], relative[t])
                    if relative[t] > mc.tolerance and abs(getattr(emp, t) - getattr(cf, t)) > SAMPLING_Z * standard[t]:
                        sampling_ok = False
                steps.append(DecodeStep(
                    target=n, evaluator=e, closed_form=cf, empirical=emp,
                    relative_errors=relative, standard_errors=standard,
                ))
                worst_sinr[n] = min(worst_sinr[n], emp.sinr)

    se_closed = user_se_vector_cf(r, gamma, b, clustering, config)
    se_empirical = config.prelog * np.log2(1.0 + worst_sinr)
    se_errors = [_relative(float(emp), float(cf), float(cf)) for emp, cf in zip(se_empirical, se_closed)]

    own = {step.target: step for step in steps if step.target == step.evaluator}
    report = McReport(
        num_realizations=mc.num_realizations,
        tolerance=mc.tolerance,
        closed_form=[own[n].closed_form for n in range(channel.N)],
        empirical=[own[n].empirical for n in range(channel.N)],
        term_errors=term_errors,
        se_errors=se_errors,
        steps=steps,
        resampled=resampled,
        zf_leakage=leakage,
    )
    report.passed = bool(sampling_ok and max(se_errors) <= mc.tolerance)
    if not report.passed:
        error_logger.warning(
            "Monte Carlo check exceeded tolerance %.3g: worst term error %.3g, worst SE error %.3g",
            mc.tolerance, max(term_errors.values()), max(se_errors),
        )
    return report
