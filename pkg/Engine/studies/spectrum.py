"""
Spectral analyses
Transition-frequency histograms, process maps and ladder-structure summaries
of the bare ring (Hamiltonian only, no Liouvillian).
"""

import logging
from typing import Dict, List, Optional

import numpy as np

from constants import thermal_energy
from dissipators import optical_processes, vibrational_processes
from environment import spectral_density
from models import PhononBath, SweepResult
from photocell import RingAnalysis, analyse_ring, ring_spec_from_config, ring_transitions
from schemas import SUPEROHMIC_PRESETS, RunConfig

logger = logging.getLogger(__name__)


def _analysis(config: RunConfig, spec=None) -> RingAnalysis:
    spec = spec if spec is not None else ring_spec_from_config(config)
    return analyse_ring(spec, config.ladder_convention(), config.coupled())


def _cutoff(analysis: RingAnalysis) -> Optional[float]:
    target = analysis.target
    if target.omega_bad is None:
        return None
    return 0.5 * (target.omega_good + target.omega_bad)


# ============================================
# Transition Histograms
# ============================================

def classify_transitions(config: RunConfig, analysis: Optional[RingAnalysis] = None) -> List[Dict]:
    """
    Upward optical transitions labelled good (out of the BTTS), bad (into the
    BTTS from below, or inside the suppressed band) or other.
    """
    analysis = analysis or _analysis(config)
    table = ring_transitions(analysis)
    basis, target = analysis.basis, analysis.target
    cutoff = _cutoff(analysis)
    below = config.bandgap_side(basis.convention) == "below"
    rows = []
    for a, b, w, d_sq, s in zip(table.source, table.target, table.omega, table.dipole_sq, table.strength):
        if basis.manifold[b] != basis.manifold[a] + 1:
            continue
        if a == target.btts:
            klass = "good"
        elif b == target.btts or (cutoff is not None and (w < cutoff if below else w > cutoff)):
            klass = "bad"
        else:
            klass = "other"
        rows.append({
            "source": int(a), "target": int(b), "omega": float(w),
            "dipole_sq": float(d_sq), "strength": float(s), "klass": klass,
        })
    max_sq = max((r["dipole_sq"] for r in rows), default=1.0)
    for r in rows:
        r["dipole_sq"] /= max_sq
    return rows


def phonon_frequencies(analysis: RingAnalysis) -> Dict[str, np.ndarray]:
    """Relaxation frequencies and summed |<a|sigma_i^z|b>|^2 weights over all sites."""
    omegas, weights = [], []
    for i in range(analysis.spec.n_sites):
        processes = vibrational_processes(analysis.basis, i)
        down = processes.omega > 0
        omegas.append(processes.omega[down])
        weights.append(np.abs(processes.amplitudes[down, 0]) ** 2)
    if not omegas:
        return {"omega": np.zeros(0), "weight": np.zeros(0)}
    return {"omega": np.concatenate(omegas), "weight": np.concatenate(weights)}


def _histogram_rows(bath: str, klass: str, values: np.ndarray, weights: np.ndarray, edges: np.ndarray) -> List[Dict]:
    counts, _ = np.histogram(values, bins=edges, weights=weights)
    return [
        {"bath": bath, "klass": klass, "bin_lo": float(lo), "bin_hi": float(hi), "weight": float(c)}
        for lo, hi, c in zip(edges[:-1], edges[1:], counts)
    ]


def spectrum_histogram(config: RunConfig, bins: Optional[int] = None) -> SweepResult:
    """
    Binned optical (by class) and phonon transition frequencies

    The statistics hold the band-gap cutoff, the good/bad separation and the
    weighted mean of each shipped super-Ohmic spectral density over the
    phonon frequencies (non-zero means the bath can drive the relaxation).
    """
    bins = bins or config.axes.bins
    analysis = _analysis(config)
    transitions = classify_transitions(config, analysis)
    rows: List[Dict] = []

    if transitions:
        omega = np.array([t["omega"] for t in transitions])
        weight = np.array([t["dipole_sq"] for t in transitions])
        klass = np.array([t["klass"] for t in transitions])
        edges = np.histogram_bin_edges(omega, bins=bins)
        for name in ("good", "bad", "other"):
            mask = klass == name
            rows += _histogram_rows("optical", name, omega[mask], weight[mask], edges)

    phonons = phonon_frequencies(analysis)
    overlap = {}
    if phonons["omega"].size:
        edges = np.histogram_bin_edges(phonons["omega"], bins=bins)
        total = phonons["weight"].sum()
        rows += _histogram_rows("phonon", "relaxation", phonons["omega"], phonons["weight"] / total, edges)
        for name, (lam, wc) in SUPEROHMIC_PRESETS.items():
            bath = PhononBath(model="superohmic", reorganisation=lam, omega_crit=wc)
            density = np.asarray(spectral_density(phonons["omega"], bath))
            overlap[name] = float((density * phonons["weight"]).sum() / total)

    target = analysis.target
    return SweepResult(
        study="spectrum",
        axes={"bins": [bins]},
        rows=rows,
        statistics={
            "omega_good": target.omega_good,
            "omega_bad": target.omega_bad,
            "cutoff": _cutoff(analysis),
            "superohmic_overlap": overlap,
            "n_transitions": len(transitions),
            "n_phonon_transitions": int(phonons["omega"].size),
        },
        seed=config.seed,
        metadata={"transitions": transitions},
    )


# ============================================
# Process Map
# ============================================

def process_map(config: RunConfig) -> SweepResult:
    """
    Optical and per-site phonon processes between ring eigenstates

    Only the energy-lowering direction is listed. Optical strengths are
    |d|^2 omega^3 and phonon strengths |<a|sigma_z|b>|^2, each normalised to
    its strongest process.
    """
    analysis = _analysis(config)
    basis = analysis.basis
    rows: List[Dict] = []

    def add(bath: str, site: int, processes, strength: np.ndarray):
        down = processes.omega > 0
        scale = (strength[down].max() if down.any() else 0.0) or 1.0
        for r, c, w, s in zip(processes.rows[down], processes.cols[down], processes.omega[down], strength[down]):
            rows.append({
                "bath": bath, "site": site, "source": int(c), "target": int(r),
                "source_manifold": int(basis.manifold[c]), "target_manifold": int(basis.manifold[r]),
                "omega": float(w), "relative_strength": float(s / scale),
            })

    optical = optical_processes(basis, analysis.spec)
    add("optical", -1, optical, (np.abs(optical.amplitudes) ** 2).sum(axis=1) * optical.omega ** 3)
    for i in range(analysis.spec.n_sites):
        vib = vibrational_processes(basis, i)
        add("phonon", i, vib, np.abs(vib.amplitudes[:, 0]) ** 2)

    return SweepResult(
        study="processmap",
        axes={"site": list(range(analysis.spec.n_sites))},
        rows=rows,
        statistics={"ladder": basis.ladder_indices(), "btts": analysis.target.btts, "ttts": analysis.target.ttts},
        seed=config.seed,
    )


# ============================================
# Ladder Structure
# ============================================

def ladder_structure(analysis: RingAnalysis, threshold: float) -> Dict:
    """
    Ladder energies and the spread of the remaining states of every manifold

    "Pinned" values are relative to the manifold's ladder state. `near` flags
    a manifold where some other state lies within `threshold` of the ladder.
    """
    basis = analysis.basis
    manifolds = []
    for m in range(basis.n_manifolds):
        idx = basis.manifold_indices(m)
        ladder = basis.ladder_index(m)
        e_ladder = float(basis.energies[ladder])
        others = basis.energies[idx[idx != ladder]]
        entry = {"manifold": m, "ladder_energy": e_ladder}
        if others.size:
            gaps = np.abs(others - e_ladder)
            entry.update({
                "min_other": float(others.min()), "max_other": float(others.max()),
                "pinned_min": float(others.min() - e_ladder), "pinned_max": float(others.max() - e_ladder),
                "min_gap": float(gaps.min()), "near": bool(gaps.min() < threshold),
            })
        manifolds.append(entry)
    return {"manifolds": manifolds, "near_any": any(m.get("near", False) for m in manifolds)}


def ladder_threshold(config: RunConfig) -> float:
    if config.study.near_threshold is not None:
        return config.study.near_threshold
    return thermal_energy(config.environment.phonon.temperature)


def ladder_metrics(config: RunConfig, spec=None) -> Dict:
    """Flat per-trial ladder-structure metrics for ensembles."""
    analysis = _analysis(config, spec)
    structure = ladder_structure(analysis, ladder_threshold(config))
    metrics = {"near_any": structure["near_any"]}
    for entry in structure["manifolds"]:
        m = entry["manifold"]
        metrics[f"ladder_{m}"] = entry["ladder_energy"]
        if "pinned_min" in entry:
            metrics[f"pinned_min_{m}"] = entry["pinned_min"]
            metrics[f"pinned_max_{m}"] = entry["pinned_max"]
            metrics[f"min_gap_{m}"] = entry["min_gap"]
    return metrics
